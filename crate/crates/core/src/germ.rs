//! Germs of diffeomorphisms of `(C^2, 0)` as pairs of jets.

use serde::{Deserialize, Serialize};

use crate::jets::{BiJet, Cx, JetError, Poly2, VANISH_TOL};

pub type Mat2 = [[Cx; 2]; 2];

/// Relative tolerance for deciding that a direction is invariant under the linear part.
pub const FIXED_DIRECTION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GermError {
    #[error("linear part is singular")]
    SingularLinearPart,
    #[error("component has nonzero constant term")]
    NonzeroConstantTerm,
    #[error("direction is not fixed by the linear part")]
    NotFixedDirection,
    #[error("coordinate change is not invertible")]
    NotInvertible,
    #[error("jet order exhausted")]
    OrderExhausted,
    #[error(transparent)]
    Jet(#[from] JetError),
}

fn zero() -> Cx {
    Cx::new(0.0, 0.0)
}

fn one() -> Cx {
    Cx::new(1.0, 0.0)
}

pub fn mat_inv(m: &Mat2) -> Option<Mat2> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det.norm() <= 1e-300 {
        return None;
    }
    let d = det.inv();
    Some([[m[1][1] * d, -m[0][1] * d], [-m[1][0] * d, m[0][0] * d]])
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut r = [[zero(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

/// A point of `P^1` written with its larger homogeneous coordinate equal to 1.
pub fn normalize_direction(v: [Cx; 2]) -> [Cx; 2] {
    if v[0].norm() >= v[1].norm() {
        [one(), v[1] / v[0]]
    } else {
        [v[0] / v[1], one()]
    }
}

/// A germ `F = (F1, F2)` with invertible linear part, known to total degree `N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GermDiffeo {
    f1: BiJet,
    f2: BiJet,
    linear: Mat2,
}

impl GermDiffeo {
    pub fn new(f1: BiJet, f2: BiJet) -> Result<Self, GermError> {
        let n = f1.order().min(f2.order());
        let mut f1 = f1.truncate(n);
        let mut f2 = f2.truncate(n);
        if f1.coeff(0, 0).norm() > VANISH_TOL || f2.coeff(0, 0).norm() > VANISH_TOL {
            return Err(GermError::NonzeroConstantTerm);
        }
        f1.set(0, 0, zero());
        f2.set(0, 0, zero());
        let linear = [[f1.coeff(1, 0), f1.coeff(0, 1)], [f2.coeff(1, 0), f2.coeff(0, 1)]];
        let det = linear[0][0] * linear[1][1] - linear[0][1] * linear[1][0];
        let scale = linear.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
        if det.norm() <= 1e-14 * scale.max(1.0).powi(2) || n == 0 {
            return Err(GermError::SingularLinearPart);
        }
        Ok(GermDiffeo { f1, f2, linear })
    }

    pub fn identity(order: usize) -> Self {
        Self::new(BiJet::x(order), BiJet::y(order)).expect("identity is invertible")
    }

    pub fn linear(m: Mat2, order: usize) -> Result<Self, GermError> {
        let f1 = BiJet::from_terms(&[(1, 0, m[0][0]), (0, 1, m[0][1])], order);
        let f2 = BiJet::from_terms(&[(1, 0, m[1][0]), (0, 1, m[1][1])], order);
        Self::new(f1, f2)
    }

    pub fn from_polys(p1: &Poly2, p2: &Poly2, order: usize) -> Result<Self, GermError> {
        Self::new(p1.to_jet(order), p2.to_jet(order))
    }

    pub fn f1(&self) -> &BiJet {
        &self.f1
    }

    pub fn f2(&self) -> &BiJet {
        &self.f2
    }

    pub fn order(&self) -> usize {
        self.f1.order()
    }

    pub fn linear_part(&self) -> Mat2 {
        self.linear
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self::new(self.f1.truncate(order), self.f2.truncate(order)).expect("truncation keeps the linear part")
    }

    pub fn eval(&self, x: Cx, y: Cx) -> (Cx, Cx) {
        (self.f1.eval(x, y), self.f2.eval(x, y))
    }

    /// `self ∘ g`.
    pub fn compose(&self, g: &GermDiffeo) -> GermDiffeo {
        let h1 = self.f1.compose(&g.f1, &g.f2).expect("germs vanish at 0");
        let h2 = self.f2.compose(&g.f1, &g.f2).expect("germs vanish at 0");
        GermDiffeo::new(h1, h2).expect("composition of diffeomorphisms")
    }

    fn apply_linear(m: &Mat2, a: &BiJet, b: &BiJet) -> (BiJet, BiJet) {
        (&a.scale(m[0][0]) + &b.scale(m[0][1]), &a.scale(m[1][0]) + &b.scale(m[1][1]))
    }

    /// Jet inverse, solved by the fixed-point scheme `G = L^{-1}(id - R∘G)` which gains one degree per step.
    pub fn inverse(&self) -> Result<GermDiffeo, GermError> {
        let n = self.order();
        let linv = mat_inv(&self.linear).ok_or(GermError::NotInvertible)?;
        let (id1, id2) = (BiJet::x(n), BiJet::y(n));
        let lin = GermDiffeo::linear(self.linear, n)?;
        let r1 = &self.f1 - lin.f1();
        let r2 = &self.f2 - lin.f2();
        let (mut g1, mut g2) = Self::apply_linear(&linv, &id1, &id2);
        for _ in 1..n {
            let s1 = &id1 - &r1.compose(&g1, &g2)?;
            let s2 = &id2 - &r2.compose(&g1, &g2)?;
            let (a, b) = Self::apply_linear(&linv, &s1, &s2);
            g1 = a;
            g2 = b;
        }
        GermDiffeo::new(g1, g2)
    }

    /// `F^n`, with negative `n` going through the jet inverse.
    pub fn compose_iterate(&self, n: i64) -> GermDiffeo {
        let base = if n < 0 { self.inverse().expect("linear part is invertible") } else { self.clone() };
        let mut acc = GermDiffeo::identity(self.order());
        let mut pow = base;
        let mut k = n.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.compose(&pow);
            }
            k >>= 1;
            if k > 0 {
                pow = pow.compose(&pow);
            }
        }
        acc
    }

    pub fn spectrum(&self) -> Spectrum {
        Spectrum::of(&self.linear)
    }

    /// `φ^{-1} ∘ F ∘ φ`.
    pub fn change_coordinates(&self, phi: &GermDiffeo) -> Result<GermDiffeo, GermError> {
        let pinv = phi.inverse()?;
        Ok(pinv.compose(&self.compose(phi)))
    }

    /// Linear change `P` with first column the given direction, and its conjugate `P^{-1} F P`.
    pub fn straighten(&self, direction: [Cx; 2]) -> Result<(Mat2, GermDiffeo), GermError> {
        let d = normalize_direction(direction);
        let a = self.linear;
        let ad = [a[0][0] * d[0] + a[0][1] * d[1], a[1][0] * d[0] + a[1][1] * d[1]];
        let cross = ad[0] * d[1] - ad[1] * d[0];
        let scale = a.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
        if cross.norm() > FIXED_DIRECTION_TOL * scale {
            return Err(GermError::NotFixedDirection);
        }
        let p: Mat2 = if d[0] == one() { [[one(), zero()], [d[1], one()]] } else { [[d[0], one()], [one(), zero()]] };
        let g = if p == [[one(), zero()], [zero(), one()]] {
            self.clone()
        } else {
            self.change_coordinates(&GermDiffeo::linear(p, self.order())?)?
        };
        Ok((p, g))
    }

    /// The germ at the infinitely near point given by a fixed direction, in the chart `(x', x'y')`.
    ///
    /// Output order is one less than the input order.
    pub fn blow_up_transform(&self, direction: [Cx; 2]) -> Result<GermDiffeo, GermError> {
        let (_, g) = self.straighten(direction)?;
        g.blow_up_x_axis()
    }

    pub(crate) fn blow_up_x_axis(&self) -> Result<GermDiffeo, GermError> {
        let n = self.order();
        if n < 2 {
            return Err(GermError::OrderExhausted);
        }
        let mut f2 = self.f2.clone();
        f2.set(1, 0, zero());
        let s1 = self.f1.blow_up_subst();
        let q1 = s1.divide_by_x()?;
        let q2 = f2.blow_up_subst().divide_by_x()?;
        let t2 = q2.div(&q1)?;
        GermDiffeo::new(s1.truncate(n - 1), t2)
    }

    /// Blow-up with the linear straightening and the chart map appended to `log`.
    pub fn blow_up_logged(&self, direction: [Cx; 2], log: &mut ChangeLog) -> Result<GermDiffeo, GermError> {
        let (p, g) = self.straighten(direction)?;
        let out = g.blow_up_x_axis()?;
        if p != [[one(), zero()], [zero(), one()]] {
            log.push(CoordChange::linear(p, self.order()));
        }
        log.push(CoordChange::blow_up(self.order()));
        Ok(out)
    }
}

/// Eigen-data of the linear part.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub lambda: Cx,
    pub mu: Cx,
    /// Eigenlines as normalized points of `P^1`; one entry when the linear part is not diagonalizable.
    pub directions: Vec<[Cx; 2]>,
    pub diagonalizable: bool,
}

impl Spectrum {
    /// Eigenvalues are ordered so that `lambda` belongs to `[1:0]` whenever that line is invariant.
    pub fn of(m: &Mat2) -> Spectrum {
        let scale = m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
        let tol = 1e-13 * scale;
        let (lambda, mu) = if m[1][0].norm() <= tol {
            (m[0][0], m[1][1])
        } else if m[0][1].norm() <= tol {
            (m[1][1], m[0][0])
        } else {
            let tr = m[0][0] + m[1][1];
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            let disc = (tr * tr - det * 4.0).sqrt();
            let e1 = if (tr + disc).norm() >= (tr - disc).norm() { (tr + disc) / 2.0 } else { (tr - disc) / 2.0 };
            let e2 = if e1.norm() > 0.0 { det / e1 } else { tr - e1 };
            (e1, e2)
        };
        let eigvec = |e: Cx| -> Option<[Cx; 2]> {
            let v1 = [m[0][1], e - m[0][0]];
            let v2 = [e - m[1][1], m[1][0]];
            let n1 = v1[0].norm() + v1[1].norm();
            let n2 = v2[0].norm() + v2[1].norm();
            let v = if n1 >= n2 { v1 } else { v2 };
            if n1.max(n2) <= tol {
                None
            } else {
                Some(normalize_direction(v))
            }
        };
        let distinct = (lambda - mu).norm() > 1e-12 * scale;
        let scalar = m[0][1].norm() <= tol && m[1][0].norm() <= tol && !distinct;
        let directions = if scalar {
            vec![[one(), zero()], [zero(), one()]]
        } else if distinct {
            vec![eigvec(lambda).unwrap_or([one(), zero()]), eigvec(mu).unwrap_or([zero(), one()])]
        } else {
            vec![eigvec(lambda).unwrap_or([one(), zero()])]
        };
        Spectrum { lambda, mu, directions, diagonalizable: distinct || scalar }
    }
}

/// Kind of a recorded coordinate change.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChangeKind {
    Linear,
    Shear,
    /// Tangent-to-identity polynomial change of the `x` coordinate.
    Polynomial,
    BlowUp,
}

/// One coordinate change `old = φ(new)`; `inverse` is absent for blow-up charts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordChange {
    pub kind: ChangeKind,
    pub forward: (BiJet, BiJet),
    pub inverse: Option<(BiJet, BiJet)>,
}

impl CoordChange {
    pub fn linear(m: Mat2, order: usize) -> Self {
        let inv = mat_inv(&m).expect("invertible linear change");
        let lin = |m: &Mat2| {
            (
                BiJet::from_terms(&[(1, 0, m[0][0]), (0, 1, m[0][1])], order),
                BiJet::from_terms(&[(1, 0, m[1][0]), (0, 1, m[1][1])], order),
            )
        };
        CoordChange { kind: ChangeKind::Linear, forward: lin(&m), inverse: Some(lin(&inv)) }
    }

    pub fn blow_up(order: usize) -> Self {
        let f = (BiJet::x(order), BiJet::monomial(one(), 1, 1, order));
        CoordChange { kind: ChangeKind::BlowUp, forward: f, inverse: None }
    }

    /// A change given by a germ `φ` and its jet inverse.
    pub fn from_germ(kind: ChangeKind, phi: &GermDiffeo, inverse: &GermDiffeo) -> Self {
        CoordChange {
            kind,
            forward: (phi.f1().clone(), phi.f2().clone()),
            inverse: Some((inverse.f1().clone(), inverse.f2().clone())),
        }
    }

    pub fn to_old(&self, p: (Cx, Cx)) -> (Cx, Cx) {
        (self.forward.0.eval(p.0, p.1), self.forward.1.eval(p.0, p.1))
    }

    /// Pointwise inverse: exact for blow-up charts, Newton-polished for jets.
    pub fn to_new(&self, p: (Cx, Cx)) -> (Cx, Cx) {
        match self.kind {
            ChangeKind::BlowUp => (p.0, p.1 / p.0),
            _ => {
                let inv = self.inverse.as_ref().expect("invertible change");
                let mut q = (inv.0.eval(p.0, p.1), inv.1.eval(p.0, p.1));
                let (f1, f2) = &self.forward;
                let (j11, j12, j21, j22) = (f1.dx(), f1.dy(), f2.dx(), f2.dy());
                for _ in 0..4 {
                    let r = (f1.eval(q.0, q.1) - p.0, f2.eval(q.0, q.1) - p.1);
                    let m = [[j11.eval(q.0, q.1), j12.eval(q.0, q.1)], [j21.eval(q.0, q.1), j22.eval(q.0, q.1)]];
                    let Some(mi) = mat_inv(&m) else { break };
                    q = (q.0 - (mi[0][0] * r.0 + mi[0][1] * r.1), q.1 - (mi[1][0] * r.0 + mi[1][1] * r.1));
                }
                q
            }
        }
    }
}

/// Ordered list of coordinate changes from the original coordinates to the current ones.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ChangeLog {
    pub steps: Vec<CoordChange>,
}

impl ChangeLog {
    pub fn push(&mut self, c: CoordChange) {
        self.steps.push(c);
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn count(&self, kind: ChangeKind) -> usize {
        self.steps.iter().filter(|s| s.kind == kind).count()
    }

    /// Maps a point in the current coordinates back to the original ones.
    pub fn to_original(&self, p: (Cx, Cx)) -> (Cx, Cx) {
        self.steps.iter().rev().fold(p, |q, s| s.to_old(q))
    }

    /// Maps a point in the original coordinates to the current ones.
    pub fn to_current(&self, p: (Cx, Cx)) -> (Cx, Cx) {
        self.steps.iter().fold(p, |q, s| s.to_new(q))
    }
}

/// Singular vector field `Z = z1 ∂/∂x + z2 ∂/∂y` as a pair of jets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VectorFieldJet {
    pub z1: BiJet,
    pub z2: BiJet,
}

impl VectorFieldJet {
    pub fn new(z1: BiJet, z2: BiJet) -> Result<Self, GermError> {
        if z1.coeff(0, 0).norm() > VANISH_TOL || z2.coeff(0, 0).norm() > VANISH_TOL {
            return Err(GermError::NonzeroConstantTerm);
        }
        let n = z1.order().min(z2.order());
        Ok(VectorFieldJet { z1: z1.truncate(n), z2: z2.truncate(n) })
    }

    pub fn order(&self) -> usize {
        self.z1.order()
    }

    pub fn scale(&self, t: Cx) -> Self {
        VectorFieldJet { z1: self.z1.scale(t), z2: self.z2.scale(t) }
    }

    /// Time-one flow by the Lie series `Σ Z^j(coordinate) / j!`.
    pub fn exp(&self) -> GermDiffeo {
        let n = self.order();
        let series = |start: BiJet| {
            let mut acc = start.clone();
            let mut term = start;
            for j in 1..=400 {
                term = term.lie_derivative(&self.z1, &self.z2).scale(Cx::new(1.0 / j as f64, 0.0));
                acc = &acc + &term;
                if term.max_abs() <= 1e-18 * acc.max_abs().max(1.0) && j >= n {
                    break;
                }
            }
            acc
        };
        GermDiffeo::new(series(BiJet::x(n)), series(BiJet::y(n))).expect("flow of a singular vector field")
    }
}

pub fn exp_vector_field(z: &VectorFieldJet) -> GermDiffeo {
    z.exp()
}
