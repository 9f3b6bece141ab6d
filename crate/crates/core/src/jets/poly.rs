use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{BiJet, Cx};

/// Exact polynomial in `(x, y)` with sparse complex coefficients.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Poly2 {
    terms: BTreeMap<(u32, u32), Cx>,
}

impl Poly2 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(v: Cx) -> Self {
        Self::monomial(v, 0, 0)
    }

    pub fn monomial(v: Cx, i: u32, j: u32) -> Self {
        let mut p = Self::zero();
        p.add_term(i, j, v);
        p
    }

    pub fn x() -> Self {
        Self::monomial(Cx::new(1.0, 0.0), 1, 0)
    }

    pub fn y() -> Self {
        Self::monomial(Cx::new(1.0, 0.0), 0, 1)
    }

    fn add_term(&mut self, i: u32, j: u32, v: Cx) {
        let e = self.terms.entry((i, j)).or_insert(Cx::new(0.0, 0.0));
        *e += v;
        if *e == Cx::new(0.0, 0.0) {
            self.terms.remove(&(i, j));
        }
    }

    pub fn coeff(&self, i: u32, j: u32) -> Cx {
        self.terms.get(&(i, j)).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, Cx)> + '_ {
        self.terms.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|&(i, j)| i + j).max().unwrap_or(0)
    }

    pub fn add(&self, o: &Poly2) -> Poly2 {
        let mut r = self.clone();
        for (i, j, v) in o.terms() {
            r.add_term(i, j, v);
        }
        r
    }

    pub fn neg(&self) -> Poly2 {
        Poly2 { terms: self.terms.iter().map(|(&k, &v)| (k, -v)).collect() }
    }

    pub fn sub(&self, o: &Poly2) -> Poly2 {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Poly2) -> Poly2 {
        let mut r = Poly2::zero();
        for (i, j, a) in self.terms() {
            for (k, l, b) in o.terms() {
                r.add_term(i + k, j + l, a * b);
            }
        }
        r
    }

    pub fn pow(&self, n: u32) -> Poly2 {
        let mut r = Poly2::constant(Cx::new(1.0, 0.0));
        for _ in 0..n {
            r = r.mul(self);
        }
        r
    }

    /// Constant value if the polynomial has no variable terms.
    pub fn as_constant(&self) -> Option<Cx> {
        if self.terms.keys().all(|&(i, j)| i == 0 && j == 0) {
            Some(self.coeff(0, 0))
        } else {
            None
        }
    }

    pub fn eval(&self, x: Cx, y: Cx) -> Cx {
        let dx = self.terms.keys().map(|k| k.0).max().unwrap_or(0) as usize;
        let dy = self.terms.keys().map(|k| k.1).max().unwrap_or(0) as usize;
        let mut px = Vec::with_capacity(dx + 1);
        let mut py = Vec::with_capacity(dy + 1);
        px.push(Cx::new(1.0, 0.0));
        py.push(Cx::new(1.0, 0.0));
        for k in 1..=dx {
            px.push(px[k - 1] * x);
        }
        for k in 1..=dy {
            py.push(py[k - 1] * y);
        }
        self.terms().map(|(i, j, v)| v * px[i as usize] * py[j as usize]).sum()
    }

    pub fn to_jet(&self, order: usize) -> BiJet {
        let t: Vec<(usize, usize, Cx)> = self.terms().map(|(i, j, v)| (i as usize, j as usize, v)).collect();
        BiJet::from_terms(&t, order)
    }

    pub fn from_jet(j: &BiJet) -> Poly2 {
        let mut p = Poly2::zero();
        for (i, k, v) in j.terms() {
            if v != Cx::new(0.0, 0.0) {
                p.add_term(i as u32, k as u32, v);
            }
        }
        p
    }
}
