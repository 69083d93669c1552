use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::poly::Polynomial;
use super::scalar::{int, Scalar};

/// Quotient of polynomials with the denominator kept partly factored.
///
/// The denominator is `cofactor * prod (z - x)^m` over the recorded `poles`.
/// Normal form:
/// * `poles` is sorted by root, multiplicities are positive, roots distinct;
/// * the numerator does not vanish at any recorded pole root;
/// * `cofactor` is monic, coprime to the numerator and has none of the pole
///   roots as a root;
/// * the zero function has no poles and cofactor `1`.
///
/// Equality compares numerator and expanded denominator, so two functions are
/// equal exactly when they are equal as rational functions.
#[derive(Clone)]
pub struct RationalFunction {
    num: Polynomial,
    poles: Vec<(Scalar, u32)>,
    cofactor: Polynomial,
}

impl RationalFunction {
    pub fn zero() -> Self {
        RationalFunction { num: Polynomial::zero(), poles: Vec::new(), cofactor: Polynomial::one() }
    }

    pub fn one() -> Self {
        Self::constant(Scalar::one())
    }

    pub fn constant(c: Scalar) -> Self {
        Self::from_poly(Polynomial::constant(c))
    }

    pub fn from_poly(p: Polynomial) -> Self {
        RationalFunction { num: p, poles: Vec::new(), cofactor: Polynomial::one() }
    }

    /// The coordinate function `z`.
    pub fn z() -> Self {
        Self::from_poly(Polynomial::monomial(Scalar::one(), 1))
    }

    /// `c * z^k` for any integer `k`.
    pub fn monomial(c: Scalar, k: i64) -> Self {
        if k >= 0 {
            Self::from_poly(Polynomial::monomial(c, k as usize))
        } else {
            Self::from_factored(Polynomial::constant(c), vec![(Scalar::zero(), (-k) as u32)], Polynomial::one())
        }
    }

    /// `c * prod (z - x)^k` for integer exponents.
    pub fn from_root_powers(c: Scalar, factors: &[(Scalar, i64)]) -> Self {
        let mut num = Polynomial::constant(c);
        let mut poles = Vec::new();
        for (x, k) in factors {
            if *k >= 0 {
                num = &num * &Polynomial::linear_root(x).pow(*k as u32);
            } else {
                poles.push((x.clone(), (-k) as u32));
            }
        }
        Self::from_factored(num, poles, Polynomial::one())
    }

    /// General quotient `num / den`. Panics when `den` is zero.
    pub fn new(num: Polynomial, den: Polynomial) -> Self {
        assert!(!den.is_zero(), "rational function with zero denominator");
        Self::from_factored(num, Vec::new(), den)
    }

    /// Builds `num / (cofactor * prod (z - x)^m)` and brings it to normal form.
    pub fn from_factored(num: Polynomial, poles: Vec<(Scalar, u32)>, cofactor: Polynomial) -> Self {
        assert!(!cofactor.is_zero(), "rational function with zero denominator");
        let mut merged: Vec<(Scalar, u32)> = Vec::with_capacity(poles.len());
        for (x, m) in poles {
            if m == 0 {
                continue;
            }
            match merged.iter_mut().find(|(y, _)| *y == x) {
                Some(entry) => entry.1 += m,
                None => merged.push((x, m)),
            }
        }
        let mut f = RationalFunction { num, poles: merged, cofactor };
        f.normalize();
        f
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            *self = Self::zero();
            return;
        }
        // Move cofactor roots that coincide with known pole roots into the pole list.
        for (x, m) in self.poles.iter_mut() {
            let (c, k) = self.cofactor.strip_root(x);
            if k > 0 {
                self.cofactor = c;
                *m += k;
            }
        }
        // Cancel numerator factors against poles.
        for (x, m) in self.poles.iter_mut() {
            let mut k = 0;
            while k < *m {
                let (q, r) = self.num.deflate(x);
                if !r.is_zero() {
                    break;
                }
                self.num = q;
                k += 1;
            }
            *m -= k;
        }
        self.poles.retain(|(_, m)| *m > 0);
        self.poles.sort_by(|a, b| a.0.cmp(&b.0));
        if !self.cofactor.is_constant() {
            let g = self.num.gcd(&self.cofactor);
            if !g.is_constant() {
                self.num = self.num.div_rem(&g).0;
                self.cofactor = self.cofactor.div_rem(&g).0;
            }
        }
        let lc = self.cofactor.leading().cloned().expect("nonzero cofactor");
        if !lc.is_one() {
            let inv = lc.recip();
            self.num = self.num.scale(&inv);
            self.cofactor = self.cofactor.scale(&inv);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.num
    }

    /// Recorded pole roots with multiplicities, sorted by root.
    pub fn poles(&self) -> &[(Scalar, u32)] {
        &self.poles
    }

    /// The monic denominator factor not accounted for by `poles`.
    pub fn cofactor(&self) -> &Polynomial {
        &self.cofactor
    }

    /// The pole-product part `prod (z - x)^m` times the cofactor, expanded.
    pub fn denominator(&self) -> Polynomial {
        let mut d = self.cofactor.clone();
        for (x, m) in &self.poles {
            d = &d * &Polynomial::linear_root(x).pow(*m);
        }
        d
    }

    pub fn is_polynomial(&self) -> bool {
        self.poles.is_empty() && self.cofactor.is_constant()
    }

    /// Degree of the denominator minus degree of the numerator; `None` for zero.
    pub fn order_at_infinity(&self) -> Option<i64> {
        let dn = self.num.degree()? as i64;
        let dd = self.cofactor.degree().unwrap_or(0) as i64
            + self.poles.iter().map(|(_, m)| *m as i64).sum::<i64>();
        Some(dd - dn)
    }

    /// Vanishing order at a finite point (negative for poles); `None` for zero.
    pub fn order_at_finite(&self, x: &Scalar) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        let pole = self.pole_multiplicity(x) as i64;
        let zero = self.num.root_multiplicity(x) as i64;
        Some(zero - pole)
    }

    /// Total pole multiplicity at `x`, including hidden cofactor roots.
    pub fn pole_multiplicity(&self, x: &Scalar) -> u32 {
        let recorded = self.poles.iter().find(|(y, _)| y == x).map_or(0, |(_, m)| *m);
        recorded + self.cofactor.root_multiplicity(x)
    }

    /// Value at `x`, or `None` at a pole.
    pub fn eval(&self, x: &Scalar) -> Option<Scalar> {
        let d = self.denominator().eval(x);
        if d.is_zero() {
            None
        } else {
            Some(self.num.eval(x) / d)
        }
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        RationalFunction { num: self.num.scale(c), poles: self.poles.clone(), cofactor: self.cofactor.clone() }
    }

    /// First derivative with respect to `z`.
    pub fn derivative1(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        if self.is_polynomial() {
            return Self::from_poly(self.num.derivative().scale(&self.cofactor.coeff(0).recip()));
        }
        // D = c * prod (z-x)^m,  P = c * prod (z-x),
        // Q = c' * prod (z-x) + c * sum_i m_i prod_{j != i} (z - x_j),
        // f' = (n' P - n Q) / (c^2 prod (z-x)^{m+1}).
        let lin: Vec<Polynomial> = self.poles.iter().map(|(x, _)| Polynomial::linear_root(x)).collect();
        let prod_all = lin.iter().fold(Polynomial::one(), |acc, l| &acc * l);
        let p = &self.cofactor * &prod_all;
        let mut q = &self.cofactor.derivative() * &prod_all;
        for (i, (_, m)) in self.poles.iter().enumerate() {
            let others = lin
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .fold(Polynomial::one(), |acc, (_, l)| &acc * l);
            q = &q + &(&self.cofactor * &others).scale(&int(*m as i64));
        }
        let num = &(&self.num.derivative() * &p) - &(&self.num * &q);
        let poles = self.poles.iter().map(|(x, m)| (x.clone(), m + 1)).collect();
        Self::from_factored(num, poles, &self.cofactor * &self.cofactor)
    }

    /// `k`-th derivative with respect to `z`.
    pub fn derivative(&self, k: u32) -> Self {
        let mut f = self.clone();
        for _ in 0..k {
            f = f.derivative1();
        }
        f
    }

    /// Common-denominator data: merged pole list and cofactor lcm, plus the
    /// multipliers turning each operand's denominator into the common one.
    fn common_denominator(&self, other: &Self) -> (Vec<(Scalar, u32)>, Polynomial, Polynomial, Polynomial) {
        let mut poles = self.poles.clone();
        for (x, m) in &other.poles {
            match poles.iter_mut().find(|(y, _)| y == x) {
                Some(e) => e.1 = e.1.max(*m),
                None => poles.push((x.clone(), *m)),
            }
        }
        let (cof, ca, cb) = if self.cofactor.is_constant() {
            (other.cofactor.clone(), other.cofactor.clone(), Polynomial::one())
        } else if other.cofactor.is_constant() || self.cofactor == other.cofactor {
            (self.cofactor.clone(), Polynomial::one(), self.cofactor.div_rem(&other.cofactor).0)
        } else {
            let g = self.cofactor.gcd(&other.cofactor);
            let ca = other.cofactor.div_rem(&g).0;
            let cb = self.cofactor.div_rem(&g).0;
            (&self.cofactor * &ca, ca, cb)
        };
        let mut ma = ca;
        let mut mb = cb;
        for (x, m) in &poles {
            let own = self.poles.iter().find(|(y, _)| y == x).map_or(0, |e| e.1);
            let oth = other.poles.iter().find(|(y, _)| y == x).map_or(0, |e| e.1);
            if m - own > 0 {
                ma = &ma * &Polynomial::linear_root(x).pow(m - own);
            }
            if m - oth > 0 {
                mb = &mb * &Polynomial::linear_root(x).pow(m - oth);
            }
        }
        (poles, cof, ma, mb)
    }

    pub fn to_text(&self) -> String {
        if self.is_polynomial() {
            return self.num.to_text("z");
        }
        let wrap = |p: &Polynomial| {
            let s = p.to_text("z");
            if p.coeffs().iter().filter(|c| !c.is_zero()).count() > 1 {
                format!("({s})")
            } else {
                s
            }
        };
        let mut den_parts = Vec::new();
        for (x, m) in &self.poles {
            let base = Polynomial::linear_root(x).to_text("z");
            let base = if x.is_zero() { base } else { format!("({base})") };
            den_parts.push(if *m == 1 { base } else { format!("{base}^{m}") });
        }
        if !self.cofactor.is_constant() {
            den_parts.push(wrap(&self.cofactor));
        }
        format!("{}/{}", wrap(&self.num), den_parts.join("*"))
    }
}

impl PartialEq for RationalFunction {
    fn eq(&self, other: &Self) -> bool {
        self.num == other.num && self.denominator() == other.denominator()
    }
}

impl Eq for RationalFunction {}

impl fmt::Debug for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl Add for &RationalFunction {
    type Output = RationalFunction;
    fn add(self, rhs: &RationalFunction) -> RationalFunction {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let (poles, cof, ma, mb) = self.common_denominator(rhs);
        let num = &(&self.num * &ma) + &(&rhs.num * &mb);
        RationalFunction::from_factored(num, poles, cof)
    }
}

impl Sub for &RationalFunction {
    type Output = RationalFunction;
    fn sub(self, rhs: &RationalFunction) -> RationalFunction {
        self + &(-rhs)
    }
}

impl Neg for &RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        RationalFunction { num: -&self.num, poles: self.poles.clone(), cofactor: self.cofactor.clone() }
    }
}

impl Mul for &RationalFunction {
    type Output = RationalFunction;
    fn mul(self, rhs: &RationalFunction) -> RationalFunction {
        if self.is_zero() || rhs.is_zero() {
            return RationalFunction::zero();
        }
        let mut poles = self.poles.clone();
        poles.extend(rhs.poles.iter().cloned());
        RationalFunction::from_factored(&self.num * &rhs.num, poles, &self.cofactor * &rhs.cofactor)
    }
}
