use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::{Cx, JetError, UniJet, VANISH_TOL};

/// Two-variable jet `Σ c_ij x^i y^j` truncated by total degree `i + j ≤ N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiJet {
    n: usize,
    c: Vec<Cx>,
}

#[inline]
fn idx(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

#[inline]
fn len(n: usize) -> usize {
    (n + 1) * (n + 2) / 2
}

impl BiJet {
    pub fn zero(order: usize) -> Self {
        BiJet { n: order, c: vec![Cx::new(0.0, 0.0); len(order)] }
    }

    pub fn constant(v: Cx, order: usize) -> Self {
        let mut b = Self::zero(order);
        b.c[0] = v;
        b
    }

    pub fn monomial(coef: Cx, i: usize, j: usize, order: usize) -> Self {
        let mut b = Self::zero(order);
        b.set(i, j, coef);
        b
    }

    pub fn x(order: usize) -> Self {
        Self::monomial(Cx::new(1.0, 0.0), 1, 0, order)
    }

    pub fn y(order: usize) -> Self {
        Self::monomial(Cx::new(1.0, 0.0), 0, 1, order)
    }

    /// Builds a jet from `(i, j, c)` triples; monomials above the order are dropped.
    pub fn from_terms(terms: &[(usize, usize, Cx)], order: usize) -> Self {
        let mut b = Self::zero(order);
        for &(i, j, v) in terms {
            if i + j <= order {
                b.c[idx(i, j)] += v;
            }
        }
        b
    }

    /// The jet of `u(x)` viewed as a function of `(x, y)`.
    pub fn from_uni_x(u: &UniJet, order: usize) -> Self {
        let mut b = Self::zero(order);
        for i in 0..=order.min(u.order()) {
            b.c[idx(i, 0)] = u.coeff(i);
        }
        b
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn coeff(&self, i: usize, j: usize) -> Cx {
        if i + j <= self.n {
            self.c[idx(i, j)]
        } else {
            Cx::new(0.0, 0.0)
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: Cx) {
        if i + j <= self.n {
            self.c[idx(i, j)] = v;
        }
    }

    /// Iterates `(i, j, c_ij)` over all stored monomials in graded order.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, Cx)> + '_ {
        (0..=self.n).flat_map(move |d| (0..=d).map(move |j| (d - j, j, self.c[idx(d - j, j)])))
    }

    pub fn with_order(&self, order: usize) -> Self {
        let mut b = Self::zero(order);
        for d in 0..=order.min(self.n) {
            for j in 0..=d {
                b.c[idx(d - j, j)] = self.c[idx(d - j, j)];
            }
        }
        b
    }

    pub fn truncate(&self, order: usize) -> Self {
        self.with_order(order.min(self.n))
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, k: Cx) -> Self {
        BiJet { n: self.n, c: self.c.iter().map(|z| z * k).collect() }
    }

    pub fn eval(&self, x: Cx, y: Cx) -> Cx {
        // Horner in y inside Horner in x.
        let mut acc = Cx::new(0.0, 0.0);
        for i in (0..=self.n).rev() {
            let mut inner = Cx::new(0.0, 0.0);
            for j in (0..=self.n - i).rev() {
                inner = inner * y + self.c[idx(i, j)];
            }
            acc = acc * x + inner;
        }
        acc
    }

    /// Coefficients of `y^j` as a jet in `x` of order `N - j`.
    pub fn y_column(&self, j: usize) -> UniJet {
        if j > self.n {
            return UniJet::zero(0);
        }
        let v: Vec<Cx> = (0..=self.n - j).map(|i| self.c[idx(i, j)]).collect();
        UniJet::new(&v, self.n - j)
    }

    pub fn mul_trunc(&self, other: &BiJet, order: usize) -> Self {
        let mut out = Self::zero(order);
        let na = self.n.min(order);
        for da in 0..=na {
            for ja in 0..=da {
                let a = self.c[idx(da - ja, ja)];
                if a == Cx::new(0.0, 0.0) {
                    continue;
                }
                let ia = da - ja;
                for db in 0..=(order - da).min(other.n) {
                    let base = db * (db + 1) / 2;
                    for jb in 0..=db {
                        let b = other.c[base + jb];
                        out.c[idx(ia + db - jb, ja + jb)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn dx(&self) -> Self {
        let n = self.n.saturating_sub(1);
        let mut b = Self::zero(n);
        if self.n == 0 {
            return b;
        }
        for d in 1..=self.n {
            for j in 0..d {
                let i = d - j;
                b.c[idx(i - 1, j)] = self.c[idx(i, j)] * i as f64;
            }
        }
        b
    }

    pub fn dy(&self) -> Self {
        let n = self.n.saturating_sub(1);
        let mut b = Self::zero(n);
        if self.n == 0 {
            return b;
        }
        for d in 1..=self.n {
            for j in 1..=d {
                let i = d - j;
                b.c[idx(i, j - 1)] = self.c[idx(i, j)] * j as f64;
            }
        }
        b
    }

    /// `Z(f) = z1 ∂f/∂x + z2 ∂f/∂y` for a vector field vanishing at 0, order kept at `N`.
    pub fn lie_derivative(&self, z1: &BiJet, z2: &BiJet) -> Self {
        let n = self.n.min(z1.n).min(z2.n);
        &self.dx().mul_trunc(z1, n) + &self.dy().mul_trunc(z2, n)
    }

    fn check_vanishing(g: &BiJet) -> Result<BiJet, JetError> {
        if g.c[0].norm() > VANISH_TOL {
            return Err(JetError::NonzeroConstantTerm(g.c[0]));
        }
        let mut g = g.clone();
        g.c[0] = Cx::new(0.0, 0.0);
        Ok(g)
    }

    /// `f(g1, g2)` for jets `g1, g2` vanishing at 0, truncated to the least order.
    pub fn compose(&self, g1: &BiJet, g2: &BiJet) -> Result<Self, JetError> {
        let g1 = Self::check_vanishing(g1)?;
        let g2 = Self::check_vanishing(g2)?;
        let n = self.n.min(g1.n).min(g2.n);
        let mut pow2 = Vec::with_capacity(n + 1);
        pow2.push(Self::constant(Cx::new(1.0, 0.0), n));
        for j in 1..=n {
            let next = pow2[j - 1].mul_trunc(&g2, n);
            pow2.push(next);
        }
        let column = |i: usize| {
            let mut p = Self::zero(n);
            for (j, pw) in pow2.iter().enumerate().take(n - i + 1) {
                let cij = self.c[idx(i, j)];
                if cij != Cx::new(0.0, 0.0) {
                    for (dst, src) in p.c.iter_mut().zip(&pw.c) {
                        *dst += cij * src;
                    }
                }
            }
            p
        };
        let mut acc = column(n);
        for i in (0..n).rev() {
            acc = &acc.mul_trunc(&g1, n) + &column(i);
        }
        Ok(acc)
    }

    /// `f(γ1(s), γ2(s))` for one-variable jets vanishing at 0.
    pub fn restrict(&self, g1: &UniJet, g2: &UniJet) -> Result<UniJet, JetError> {
        for g in [g1, g2] {
            if g.coeff(0).norm() > VANISH_TOL {
                return Err(JetError::NonzeroConstantTerm(g.coeff(0)));
            }
        }
        let mut g1 = g1.clone();
        let mut g2 = g2.clone();
        g1.set(0, Cx::new(0.0, 0.0));
        g2.set(0, Cx::new(0.0, 0.0));
        let n = self.n.min(g1.order()).min(g2.order());
        let mut pow2 = vec![UniJet::constant(Cx::new(1.0, 0.0), n)];
        for j in 1..=n {
            let next = pow2[j - 1].mul_trunc(&g2, n);
            pow2.push(next);
        }
        let column = |i: usize| {
            let mut p = UniJet::zero(n);
            for (j, pw) in pow2.iter().enumerate().take(n - i + 1) {
                p = &p + &pw.scale(self.c[idx(i, j)]);
            }
            p
        };
        let mut acc = column(n);
        for i in (0..n).rev() {
            acc = &acc.mul_trunc(&g1, n) + &column(i);
        }
        Ok(acc)
    }

    /// Multiplicative inverse of a jet with nonzero constant term.
    pub fn reciprocal(&self) -> Result<Self, JetError> {
        let u0 = self.c[0];
        if u0.norm() <= VANISH_TOL {
            return Err(JetError::ZeroConstantTerm);
        }
        let mut w = self.scale(-u0.inv());
        w.c[0] = Cx::new(0.0, 0.0);
        // 1/(1 - w) = 1 + w + w^2 + ... , exact to order N since w(0) = 0.
        let mut acc = Self::constant(Cx::new(1.0, 0.0), self.n);
        for _ in 0..self.n {
            acc = &acc.mul_trunc(&w, self.n) + &Self::constant(Cx::new(1.0, 0.0), self.n);
        }
        Ok(acc.scale(u0.inv()))
    }

    pub fn div(&self, den: &BiJet) -> Result<Self, JetError> {
        Ok(self * &den.reciprocal()?)
    }

    /// The substitution `f(x, x y)`, exact at order `N`.
    pub fn blow_up_subst(&self) -> Self {
        let mut b = Self::zero(self.n);
        for (i, j, v) in self.terms() {
            if i + 2 * j <= self.n {
                b.c[idx(i + j, j)] = v;
            }
        }
        b
    }

    /// Division by `x`; fails unless every pure power of `y` has zero coefficient.
    pub fn divide_by_x(&self) -> Result<Self, JetError> {
        if self.n == 0 {
            return Err(JetError::NotDivisible);
        }
        let mut b = Self::zero(self.n - 1);
        for d in 0..=self.n {
            for j in 0..=d {
                let i = d - j;
                let v = self.c[idx(i, j)];
                if i == 0 {
                    if v.norm() > VANISH_TOL {
                        return Err(JetError::NotDivisible);
                    }
                } else {
                    b.c[idx(i - 1, j)] = v;
                }
            }
        }
        Ok(b)
    }
}

impl Add for &BiJet {
    type Output = BiJet;
    fn add(self, rhs: &BiJet) -> BiJet {
        let n = self.n.min(rhs.n);
        BiJet { n, c: (0..len(n)).map(|k| self.c[k] + rhs.c[k]).collect() }
    }
}

impl Sub for &BiJet {
    type Output = BiJet;
    fn sub(self, rhs: &BiJet) -> BiJet {
        let n = self.n.min(rhs.n);
        BiJet { n, c: (0..len(n)).map(|k| self.c[k] - rhs.c[k]).collect() }
    }
}

impl Mul for &BiJet {
    type Output = BiJet;
    fn mul(self, rhs: &BiJet) -> BiJet {
        self.mul_trunc(rhs, self.n.min(rhs.n))
    }
}

impl Neg for &BiJet {
    type Output = BiJet;
    fn neg(self) -> BiJet {
        self.scale(Cx::new(-1.0, 0.0))
    }
}

impl fmt::Display for BiJet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, j, z) in self.terms() {
            if z.norm() == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({z})")?;
            match i {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{i}")?,
            }
            match j {
                0 => {}
                1 => write!(f, "y")?,
                _ => write!(f, "y^{j}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O({})", self.n + 1)
    }
}
