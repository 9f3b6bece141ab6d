use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::{Cx, JetError, VANISH_TOL};

/// One-variable jet `c0 + c1 s + ... + cN s^N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniJet {
    c: Vec<Cx>,
}

impl UniJet {
    /// Builds a jet of the given order, padding with zeros or dropping extra coefficients.
    pub fn new(coeffs: &[Cx], order: usize) -> Self {
        let mut c = vec![Cx::new(0.0, 0.0); order + 1];
        for (dst, src) in c.iter_mut().zip(coeffs) {
            *dst = *src;
        }
        UniJet { c }
    }

    pub fn from_real(coeffs: &[f64], order: usize) -> Self {
        let v: Vec<Cx> = coeffs.iter().map(|&r| Cx::new(r, 0.0)).collect();
        Self::new(&v, order)
    }

    pub fn zero(order: usize) -> Self {
        Self::new(&[], order)
    }

    pub fn constant(v: Cx, order: usize) -> Self {
        Self::new(&[v], order)
    }

    /// The coordinate `s`.
    pub fn var(order: usize) -> Self {
        Self::monomial(Cx::new(1.0, 0.0), 1, order)
    }

    pub fn monomial(coef: Cx, deg: usize, order: usize) -> Self {
        let mut j = Self::zero(order);
        if deg <= order {
            j.c[deg] = coef;
        }
        j
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    /// Coefficient of `s^i`; zero past the truncation order.
    pub fn coeff(&self, i: usize) -> Cx {
        self.c.get(i).copied().unwrap_or_default()
    }

    pub fn coeffs(&self) -> &[Cx] {
        &self.c
    }

    pub fn set(&mut self, i: usize, v: Cx) {
        if i < self.c.len() {
            self.c[i] = v;
        }
    }

    /// Same coefficients at a different truncation order (zero padded when raised).
    pub fn with_order(&self, order: usize) -> Self {
        Self::new(&self.c, order)
    }

    pub fn truncate(&self, order: usize) -> Self {
        self.with_order(order.min(self.order()))
    }

    /// Index of the first coefficient with modulus above `tol`.
    pub fn valuation(&self, tol: f64) -> Option<usize> {
        self.c.iter().position(|z| z.norm() > tol)
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, s: Cx) -> Cx {
        self.c.iter().rev().fold(Cx::new(0.0, 0.0), |acc, &a| acc * s + a)
    }

    pub fn scale(&self, k: Cx) -> Self {
        UniJet { c: self.c.iter().map(|z| z * k).collect() }
    }

    /// Derivative; order drops by one (order 0 stays a zero jet of order 0).
    pub fn derivative(&self) -> Self {
        let n = self.order();
        if n == 0 {
            return Self::zero(0);
        }
        let v: Vec<Cx> = (1..=n).map(|i| self.c[i] * i as f64).collect();
        Self::new(&v, n - 1)
    }

    /// Multiplication by `s^k`, which is exact and raises the order by `k`.
    pub fn shift_up(&self, k: usize) -> Self {
        let mut v = vec![Cx::new(0.0, 0.0); k];
        v.extend_from_slice(&self.c);
        UniJet { c: v }
    }

    /// Division by `s^k`; the first `k` coefficients must vanish.
    pub fn shift_down(&self, k: usize) -> Result<Self, JetError> {
        if k > self.order() || self.c[..k].iter().any(|z| z.norm() > VANISH_TOL) {
            return Err(JetError::NotDivisible);
        }
        Ok(UniJet { c: self.c[k..].to_vec() })
    }

    pub fn mul_trunc(&self, other: &UniJet, order: usize) -> Self {
        let mut out = vec![Cx::new(0.0, 0.0); order + 1];
        for (i, a) in self.c.iter().enumerate().take(order + 1) {
            if *a == Cx::new(0.0, 0.0) {
                continue;
            }
            for (j, b) in other.c.iter().enumerate().take(order + 1 - i) {
                out[i + j] += a * b;
            }
        }
        UniJet { c: out }
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut acc = Self::constant(Cx::new(1.0, 0.0), self.order());
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// `f ∘ g` truncated to `min(order f, order g)`.
    pub fn compose(&self, g: &UniJet) -> Result<Self, JetError> {
        if g.c[0].norm() > VANISH_TOL {
            return Err(JetError::NonzeroConstantTerm(g.c[0]));
        }
        let mut g = g.clone();
        g.c[0] = Cx::new(0.0, 0.0);
        let order = self.order().min(g.order());
        let mut acc = Self::constant(self.c[order], order);
        for i in (0..order).rev() {
            acc = acc.mul_trunc(&g, order);
            acc.c[0] += self.c[i];
        }
        Ok(acc)
    }

    /// Compositional inverse of a jet with `f(0)=0`, `f'(0)≠0`.
    pub fn comp_inverse(&self) -> Result<Self, JetError> {
        let n = self.order();
        if n == 0 || self.c[1].norm() <= VANISH_TOL {
            return Err(JetError::NotInvertible);
        }
        if self.c[0].norm() > VANISH_TOL {
            return Err(JetError::NonzeroConstantTerm(self.c[0]));
        }
        let f1 = self.c[1];
        let mut g = Self::monomial(f1.inv(), 1, n);
        for k in 2..=n {
            let fg = self.compose(&g)?;
            g.c[k] = -fg.c[k] / f1;
        }
        Ok(g)
    }

    /// Multiplicative inverse of a unit series.
    pub fn reciprocal(&self) -> Result<Self, JetError> {
        let u0 = self.c[0];
        if u0.norm() <= VANISH_TOL {
            return Err(JetError::ZeroConstantTerm);
        }
        let n = self.order();
        let mut r = vec![Cx::new(0.0, 0.0); n + 1];
        r[0] = u0.inv();
        for k in 1..=n {
            let s: Cx = (1..=k).map(|i| self.c[i] * r[k - i]).sum();
            r[k] = -s / u0;
        }
        Ok(UniJet { c: r })
    }

    /// `exp(f)`; the constant term contributes the factor `exp(f(0))`.
    pub fn exp(&self) -> Self {
        let n = self.order();
        let mut e = vec![Cx::new(0.0, 0.0); n + 1];
        e[0] = self.c[0].exp();
        for k in 1..=n {
            let s: Cx = (1..=k).map(|i| self.c[i] * i as f64 * e[k - i]).sum();
            e[k] = s / k as f64;
        }
        UniJet { c: e }
    }

    /// Splits `log u` as `(log u(0), L)` with `L(0)=0`, principal branch for the constant.
    pub fn log_unit_series(&self) -> Result<(Cx, Self), JetError> {
        let u0 = self.c[0];
        if u0.norm() <= VANISH_TOL {
            return Err(JetError::ZeroConstantTerm);
        }
        let n = self.order();
        let mut l = vec![Cx::new(0.0, 0.0); n + 1];
        for k in 1..=n {
            let s: Cx = (1..k).map(|i| l[i] * i as f64 * self.c[k - i]).sum();
            l[k] = (self.c[k] - s / k as f64) / u0;
        }
        Ok((u0.ln(), UniJet { c: l }))
    }

    /// `u^α` for a unit series, with `u(0)^α` on the principal branch.
    pub fn powc(&self, alpha: Cx) -> Result<Self, JetError> {
        let (l0, l) = self.log_unit_series()?;
        Ok(l.scale(alpha).exp().scale((l0 * alpha).exp()))
    }

    /// Normalized coefficients: divides by `u(0)` so that the constant term is 1.
    pub(crate) fn normalized(&self) -> Result<Self, JetError> {
        let u0 = self.c[0];
        if u0.norm() <= VANISH_TOL {
            return Err(JetError::ZeroConstantTerm);
        }
        Ok(self.scale(u0.inv()))
    }
}

impl Add for &UniJet {
    type Output = UniJet;
    fn add(self, rhs: &UniJet) -> UniJet {
        let n = self.order().min(rhs.order());
        UniJet { c: (0..=n).map(|i| self.c[i] + rhs.c[i]).collect() }
    }
}

impl Sub for &UniJet {
    type Output = UniJet;
    fn sub(self, rhs: &UniJet) -> UniJet {
        let n = self.order().min(rhs.order());
        UniJet { c: (0..=n).map(|i| self.c[i] - rhs.c[i]).collect() }
    }
}

impl Mul for &UniJet {
    type Output = UniJet;
    fn mul(self, rhs: &UniJet) -> UniJet {
        self.mul_trunc(rhs, self.order().min(rhs.order()))
    }
}

impl Neg for &UniJet {
    type Output = UniJet;
    fn neg(self) -> UniJet {
        UniJet { c: self.c.iter().map(|z| -z).collect() }
    }
}

impl fmt::Display for UniJet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, z) in self.c.iter().enumerate() {
            if z.norm() == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "({z})")?,
                1 => write!(f, "({z})s")?,
                _ => write!(f, "({z})s^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(s^{})", self.order() + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::c;

    fn close(a: &UniJet, b: &UniJet, tol: f64) -> bool {
        a.order() == b.order() && (a - b).max_abs() <= tol
    }

    #[test]
    fn compose_examples() {
        let f = UniJet::from_real(&[0.0, 1.0, 1.0], 4);
        let id = UniJet::var(4);
        assert!(close(&f.compose(&id).unwrap(), &f, 0.0));
        let g = UniJet::from_real(&[0.0, 1.0, 0.0, 1.0], 4);
        let expect = UniJet::from_real(&[0.0, 1.0, 1.0, 1.0, 2.0], 4);
        assert!(close(&f.compose(&g).unwrap(), &expect, 1e-15));
        let lam = c(0.3, -1.2);
        let l = UniJet::monomial(lam, 1, 5);
        let mut acc = l.clone();
        for _ in 1..6 {
            acc = l.compose(&acc).unwrap();
        }
        assert!((acc.coeff(1) - lam.powi(6)).norm() < 1e-14);
        assert_eq!(
            f.compose(&UniJet::from_real(&[1.0, 1.0], 4)),
            Err(JetError::NonzeroConstantTerm(c(1.0, 0.0)))
        );
    }

    #[test]
    fn inverse_examples() {
        let two = UniJet::from_real(&[0.0, 2.0], 3);
        assert!(close(&two.comp_inverse().unwrap(), &UniJet::from_real(&[0.0, 0.5], 3), 0.0));
        // s - s^2 inverts to the Catalan generating series s + s^2 + 2s^3 + 5s^4.
        let f = UniJet::from_real(&[0.0, 1.0, -1.0], 4);
        let g = f.comp_inverse().unwrap();
        assert!(close(&g, &UniJet::from_real(&[0.0, 1.0, 1.0, 2.0, 5.0], 4), 1e-14));
        assert_eq!(UniJet::from_real(&[0.0, 0.0, 1.0], 3).comp_inverse(), Err(JetError::NotInvertible));
    }

    #[test]
    fn log_examples() {
        let (l0, l) = UniJet::constant(c(1.0, 0.0), 3).log_unit_series().unwrap();
        assert_eq!(l0, c(0.0, 0.0));
        assert_eq!(l.max_abs(), 0.0);
        let (l0, l) = UniJet::from_real(&[1.0, 1.0], 2).log_unit_series().unwrap();
        assert_eq!(l0, c(0.0, 0.0));
        assert!(close(&l, &UniJet::from_real(&[0.0, 1.0, -0.5], 2), 1e-15));
        assert_eq!(UniJet::zero(2).log_unit_series(), Err(JetError::ZeroConstantTerm));
        // Principal branch: log(-1) = iπ.
        let (l0, _) = UniJet::constant(c(-1.0, 0.0), 1).log_unit_series().unwrap();
        assert!((l0 - c(0.0, std::f64::consts::PI)).norm() < 1e-15);
    }

    #[test]
    fn reciprocal_and_powers() {
        let u = UniJet::from_real(&[2.0, 1.0, -3.0, 0.5], 6);
        let r = u.reciprocal().unwrap();
        let one = &u * &r;
        assert!(close(&one, &UniJet::constant(c(1.0, 0.0), 6), 1e-14));
        let sq = u.powc(c(0.5, 0.0)).unwrap();
        assert!(close(&(&sq * &sq), &u, 1e-13));
        assert!(close(&u.powc(c(3.0, 0.0)).unwrap(), &u.powi(3), 1e-12));
    }

    #[test]
    fn shifts() {
        let u = UniJet::from_real(&[0.0, 0.0, 1.0, 2.0], 3);
        let d = u.shift_down(2).unwrap();
        assert_eq!(d, UniJet::from_real(&[1.0, 2.0], 1));
        assert_eq!(d.shift_up(2), u);
        assert_eq!(u.shift_down(3), Err(JetError::NotDivisible));
    }
}
