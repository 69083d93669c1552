use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::scalar::{format_scalar, int, Scalar};

/// Dense univariate polynomial over the rationals, coefficients stored from
/// the constant term upwards. The leading coefficient is nonzero unless the
/// polynomial is zero (empty coefficient list).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Polynomial {
    coeffs: Vec<Scalar>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Scalar>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Scalar::one())
    }

    pub fn constant(c: Scalar) -> Self {
        Self::new(vec![c])
    }

    /// `c * z^k`
    pub fn monomial(c: Scalar, k: usize) -> Self {
        let mut coeffs = vec![Scalar::zero(); k];
        coeffs.push(c);
        Self::new(coeffs)
    }

    /// The linear factor `z - a`.
    pub fn linear_root(a: &Scalar) -> Self {
        Self::new(vec![-a.clone(), Scalar::one()])
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| int(c)).collect())
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, k: usize) -> Scalar {
        self.coeffs.get(k).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn leading(&self) -> Option<&Scalar> {
        self.coeffs.last()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn eval(&self, x: &Scalar) -> Scalar {
        let mut acc = Scalar::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Polynomial { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * int(k as i64))
                .collect(),
        )
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn monic(&self) -> Self {
        match self.leading() {
            Some(lc) => self.scale(&lc.recip()),
            None => Self::zero(),
        }
    }

    /// Euclidean division. Panics on division by zero.
    pub fn div_rem(&self, divisor: &Polynomial) -> (Polynomial, Polynomial) {
        let dd = divisor.degree().expect("polynomial division by zero");
        let lc_inv = divisor.coeffs[dd].recip();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let mut quot = vec![Scalar::zero(); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = &rem[k + dd] * &lc_inv;
            if !c.is_zero() {
                for (j, d) in divisor.coeffs.iter().enumerate() {
                    rem[k + j] -= &c * d;
                }
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }

    /// Monic greatest common divisor (zero if both are zero).
    pub fn gcd(&self, other: &Polynomial) -> Polynomial {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    /// Synthetic division by `z - a`: returns the quotient and `p(a)`.
    pub fn deflate(&self, a: &Scalar) -> (Polynomial, Scalar) {
        if self.coeffs.is_empty() {
            return (Self::zero(), Scalar::zero());
        }
        let n = self.coeffs.len();
        let mut quot = vec![Scalar::zero(); n - 1];
        let mut carry = Scalar::zero();
        for k in (0..n).rev() {
            let v = &self.coeffs[k] + &carry * a;
            if k == 0 {
                carry = v;
            } else {
                quot[k - 1] = v.clone();
                carry = v;
            }
        }
        (Self::new(quot), carry)
    }

    /// Multiplicity of `a` as a root (0 if not a root). Zero polynomial: 0.
    pub fn root_multiplicity(&self, a: &Scalar) -> u32 {
        if self.is_zero() {
            return 0;
        }
        let mut p = self.clone();
        let mut m = 0;
        loop {
            let (q, r) = p.deflate(a);
            if !r.is_zero() {
                return m;
            }
            p = q;
            m += 1;
        }
    }

    /// Removes all factors `z - a`, returning the cofactor and the multiplicity.
    pub fn strip_root(&self, a: &Scalar) -> (Polynomial, u32) {
        let mut p = self.clone();
        let mut m = 0;
        if p.is_zero() {
            return (p, 0);
        }
        loop {
            let (q, r) = p.deflate(a);
            if !r.is_zero() {
                return (p, m);
            }
            p = q;
            m += 1;
        }
    }

    /// The first `count` Taylor coefficients at `a`, i.e. the coefficients of
    /// `p(a + t)` in powers of `t`.
    pub fn taylor_at(&self, a: &Scalar, count: usize) -> Vec<Scalar> {
        let mut out = Vec::with_capacity(count);
        let mut p = self.clone();
        for _ in 0..count {
            if p.is_zero() {
                out.push(Scalar::zero());
                continue;
            }
            let (q, r) = p.deflate(a);
            out.push(r);
            p = q;
        }
        out
    }

    /// `z^deg p(1/z)` with `deg` the degree of `p`.
    pub fn reversed(&self) -> Polynomial {
        let mut c = self.coeffs.clone();
        c.reverse();
        Self::new(c)
    }

    pub fn to_text(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mono = match k {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{k}"),
            };
            let s = if mono.is_empty() {
                format_scalar(c)
            } else if c.is_one() {
                mono
            } else if *c == -Scalar::one() {
                format!("-{mono}")
            } else {
                format!("{}*{mono}", format_scalar(c))
            };
            parts.push(s);
        }
        let mut out = parts[0].clone();
        for p in &parts[1..] {
            if let Some(stripped) = p.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(stripped);
            } else {
                out.push_str(" + ");
                out.push_str(p);
            }
        }
        out
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text("z"))
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text("z"))
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![Scalar::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::scalar::ratio;

    #[test]
    fn division_roundtrip() {
        let a = Polynomial::from_ints(&[1, 0, -3, 2, 5]);
        let b = Polynomial::from_ints(&[2, 1, 1]);
        let (q, r) = a.div_rem(&b);
        assert_eq!(&(&q * &b) + &r, a);
        assert!(r.degree().unwrap() < 2);
    }

    #[test]
    fn gcd_of_shared_factor() {
        let f = Polynomial::linear_root(&int(2));
        let a = &f * &Polynomial::from_ints(&[1, 1]);
        let b = &f * &Polynomial::from_ints(&[5, 0, 1]);
        assert_eq!(a.gcd(&b), f);
    }

    #[test]
    fn taylor_shift() {
        // z^2 at a = 3: 9 + 6t + t^2
        let p = Polynomial::monomial(int(1), 2);
        assert_eq!(p.taylor_at(&int(3), 4), vec![int(9), int(6), int(1), int(0)]);
    }

    #[test]
    fn root_multiplicity_counts() {
        let p = &Polynomial::linear_root(&ratio(1, 2)).pow(3) * &Polynomial::from_ints(&[1, 1]);
        assert_eq!(p.root_multiplicity(&ratio(1, 2)), 3);
        assert_eq!(p.root_multiplicity(&int(-1)), 1);
        assert_eq!(p.root_multiplicity(&int(0)), 0);
    }

    #[test]
    fn text_rendering() {
        assert_eq!(Polynomial::from_ints(&[1, -1]).to_text("z"), "-z + 1");
        assert_eq!(Polynomial::from_ints(&[0, 0, 3]).to_text("z"), "3*z^2");
    }
}
