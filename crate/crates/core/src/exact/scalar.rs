use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::KnError;

/// Exact rational number. Always kept in lowest terms with a positive
/// denominator (guaranteed by `BigRational`).
pub type Scalar = BigRational;

pub fn int(n: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Scalar {
    assert!(den != 0, "zero denominator");
    Scalar::new(BigInt::from(num), BigInt::from(den))
}

pub fn zero() -> Scalar {
    Scalar::zero()
}

pub fn one() -> Scalar {
    Scalar::one()
}

/// Parses `"p/q"`, `"-p/q"` or an integer. Decimal and exponent notation are
/// rejected so that floating-point values never enter silently.
pub fn parse_scalar(text: &str) -> Result<Scalar, KnError> {
    let s = text.trim();
    let bad = || KnError::Parse(format!("not an exact rational: {text:?} (expected \"p/q\" or an integer)"));
    if s.is_empty() || s.contains(['.', 'e', 'E']) {
        return Err(bad());
    }
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = n.parse().map_err(|_| bad())?;
    let den: BigInt = d.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(KnError::Parse(format!("zero denominator in {text:?}")));
    }
    Ok(Scalar::new(num, den))
}

/// Canonical `p/q` text (integers print without denominator).
pub fn format_scalar(x: &Scalar) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// `x^k` for any integer `k`; `x` must be nonzero when `k < 0`.
pub fn pow(x: &Scalar, k: i64) -> Scalar {
    if k >= 0 {
        num_traits::pow(x.clone(), k as usize)
    } else {
        assert!(!x.is_zero(), "negative power of zero");
        num_traits::pow(x.recip(), (-k) as usize)
    }
}

/// Generalised binomial coefficient `C(k, j)` for integer `k` (possibly negative).
pub fn binomial(k: i64, j: usize) -> Scalar {
    let mut acc = one();
    for i in 0..j as i64 {
        acc = acc * int(k - i) / int(i + 1);
    }
    acc
}

pub fn factorial(n: usize) -> Scalar {
    (1..=n as i64).fold(one(), |acc, i| acc * int(i))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_integers() {
        assert_eq!(parse_scalar("3/6").unwrap(), ratio(1, 2));
        assert_eq!(parse_scalar("-7").unwrap(), int(-7));
        assert_eq!(parse_scalar(" 4 / -8 ").unwrap(), ratio(-1, 2));
    }

    #[test]
    fn rejects_floats() {
        assert!(parse_scalar("0.5").is_err());
        assert!(parse_scalar("1e3").is_err());
        assert!(parse_scalar("1/0").is_err());
        assert!(parse_scalar("").is_err());
    }

    #[test]
    fn binomials_with_negative_top() {
        // (1+t)^{-2} = 1 - 2t + 3t^2 - 4t^3
        let c: Vec<_> = (0..4).map(|j| binomial(-2, j)).collect();
        assert_eq!(c, vec![int(1), int(-2), int(3), int(-4)]);
        assert_eq!(binomial(5, 2), int(10));
        assert_eq!(binomial(3, 5), int(0));
    }

    #[test]
    fn formats_canonically() {
        assert_eq!(format_scalar(&ratio(6, -4)), "-3/2");
        assert_eq!(format_scalar(&int(5)), "5");
    }
}
