//! Reduction of a parabolic pair `(F, Γ)` to reduced form and classification of
//! its attracting directions.

use serde::{Deserialize, Serialize};

use crate::curve::{classify_inner, solve_restriction, strict_transform, CurveError, FormalCurveJet, InnerClass, MAX_ROOT_ORDER, ROOT_TOL};
use crate::germ::{ChangeKind, ChangeLog, CoordChange, GermDiffeo, GermError};
use crate::jets::{snap, BiJet, Cx, JetError, UniJet};

/// Tolerance of the reduced-form coefficient predicates.
pub const PREDICATE_TOL: f64 = 1e-10;
/// Zero band for the lexicographic node test and for `a(0)`.
pub const ZERO_BAND: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReduceError {
    #[error("restriction is not parabolic ({0:?})")]
    NotParabolic(InnerClass),
    #[error("restriction to the curve is the identity to the available order")]
    RestrictionIsIdentity,
    #[error("jet order {available} too small, need at least {needed}")]
    OrderExhausted { needed: usize, available: usize },
    #[error("reduction failed: {0}")]
    NotReduced(String),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Germ(#[from] GermError),
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// A pair in reduced form together with its invariants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedPair {
    pub germ: GermDiffeo,
    pub k: usize,
    pub p: usize,
    pub mu: Cx,
    /// Principal branch of `log μ`.
    pub log_mu: Cx,
    /// `a(x)`, degree at most `p`.
    pub a: UniJet,
    /// `A_0..A_p` of the infinitesimal principal part.
    pub big_a: UniJet,
    /// Order of `γ2`, `None` when `γ2` vanishes to the available order.
    pub contact: Option<usize>,
    /// Order of `b(x) = F2(x, 0)/μ`, `None` when `b` vanishes to the available order.
    pub b_order: Option<usize>,
    /// The curve as a graph `(s, γ2(s))` in reduced coordinates.
    pub gamma2: UniJet,
    pub log: ChangeLog,
    /// `x∘F = x - x^{k+p+1} + O(x^{2k+p+1} y, x^{2k+2p+1})`.
    pub technical_condition: bool,
}

/// Largest violation of each reduced-form predicate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredicateReport {
    /// `|[x^{k+p+1}]F1 + 1|` and `|[x]F1 - 1|`.
    pub leading: f64,
    /// Pure powers of `x` in `F1` of degree below `2k+2p+1` other than `x` and `x^{k+p+1}`.
    pub f1_pure: f64,
    /// Terms `x^i y^j`, `j ≥ 1`, `i ≤ k+p` in `F1`.
    pub f1_mixed: f64,
    /// `|[y]F2/μ - 1|` and `[x^i y]F2` for `1 ≤ i < k`.
    pub f2_linear: f64,
    /// Terms `x^i y^j`, `j ≥ 2`, `i ≤ k+p` in `F2`.
    pub f2_higher: f64,
    /// Pure powers of `x` in `F2` of degree at most `k+p+1`.
    pub f2_pure: f64,
    /// `|a(0)|`, which must stay away from zero.
    pub a0: f64,
    /// Contact order of `Γ` with the `x`-axis is at least `k+p+2`.
    pub contact_ok: bool,
    /// `log μ + x^k A(x)` agrees with `J_{k+p} log(μ(1 + x^k a(x)))`.
    pub principal: f64,
}

impl PredicateReport {
    pub fn max_violation(&self) -> f64 {
        [self.leading, self.f1_pure, self.f1_mixed, self.f2_linear, self.f2_higher, self.f2_pure, self.principal]
            .into_iter()
            .fold(0.0, f64::max)
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.max_violation() <= tol && self.a0 > ZERO_BAND && self.contact_ok
    }
}

fn principal_part(a: &UniJet, k: usize, p: usize, mu: Cx) -> Result<(Cx, UniJet), JetError> {
    let kp = k + p;
    let u = &UniJet::constant(Cx::new(1.0, 0.0), kp) + &a.with_order(p).shift_up(k).with_order(kp);
    let (_, l) = u.log_unit_series()?;
    let big: Vec<Cx> = (0..=p).map(|j| l.coeff(k + j)).collect();
    Ok((mu.ln(), UniJet::new(&big, p)))
}

impl ReducedPair {
    pub fn kp(&self) -> usize {
        self.k + self.p
    }

    /// Evaluates every coefficient predicate of the reduced form on the current jets.
    pub fn predicates(&self) -> PredicateReport {
        predicates(&self.germ, self.k, self.p, &self.gamma2, &self.a, &self.big_a)
    }

    pub fn a0(&self) -> Cx {
        self.a.coeff(0)
    }

    /// `J_{k+p+1}` of the infinitesimal generator of `(x, y/μ)∘F`, as `(X1, X2)`.
    pub fn generator_jet(&self) -> (BiJet, BiJet) {
        let kp = self.kp();
        let n = kp + 2;
        let x1 = BiJet::monomial(Cx::new(-1.0, 0.0), kp + 1, 0, n);
        let mut x2 = BiJet::zero(n);
        for j in 0..=self.p {
            x2.set(self.k + j, 1, self.big_a.coeff(j));
        }
        (x1, x2)
    }
}

fn predicates(g: &GermDiffeo, k: usize, p: usize, gamma2: &UniJet, a: &UniJet, big_a: &UniJet) -> PredicateReport {
    let kp = k + p;
    let f1 = g.f1();
    let f2 = g.f2();
    let n = g.order();
    let mu = g.linear_part()[1][1];
    let one = Cx::new(1.0, 0.0);
    let leading = (f1.coeff(kp + 1, 0) + one).norm().max((f1.coeff(1, 0) - one).norm());
    let f1_pure = (2..=(2 * kp).min(n)).filter(|&i| i != kp + 1).map(|i| f1.coeff(i, 0).norm()).fold(0.0, f64::max);
    let mut f1_mixed: f64 = 0.0;
    let mut f2_higher: f64 = 0.0;
    for (i, j, z) in f1.terms() {
        if j >= 1 && i <= kp {
            f1_mixed = f1_mixed.max(z.norm());
        }
    }
    for (i, j, z) in f2.terms() {
        if j >= 2 && i <= kp {
            f2_higher = f2_higher.max(z.norm() / mu.norm());
        }
    }
    let mut f2_linear = (f2.coeff(0, 1) / mu - one).norm();
    for i in 1..k {
        f2_linear = f2_linear.max((f2.coeff(i, 1) / mu).norm());
    }
    for j in 0..=p {
        f2_linear = f2_linear.max((f2.coeff(k + j, 1) / mu - a.coeff(j)).norm());
    }
    let f2_pure = (1..=(kp + 1).min(n)).map(|i| (f2.coeff(i, 0) / mu).norm()).fold(0.0, f64::max);
    let contact = gamma2.valuation(1e-12);
    let contact_ok = contact.map_or(true, |m| m >= kp + 2);
    let principal = match principal_part(a, k, p, mu) {
        Ok((_, aa)) => (&aa - big_a).max_abs(),
        Err(_) => f64::INFINITY,
    };
    PredicateReport {
        leading,
        f1_pure,
        f1_mixed,
        f2_linear,
        f2_higher,
        f2_pure,
        a0: a.coeff(0).norm(),
        contact_ok,
        principal,
    }
}

/// `φ^{-1} ∘ F ∘ φ` with both maps given.
fn conjugate(f: &GermDiffeo, phi: &GermDiffeo, phi_inv: &GermDiffeo) -> GermDiffeo {
    phi_inv.compose(&f.compose(phi))
}

/// Germ, curve graph and log, transformed together.
#[derive(Clone, Debug)]
struct Work {
    g: GermDiffeo,
    curve: UniJet,
    log: ChangeLog,
    blow_ups: usize,
}

impl Work {
    /// New coordinates `(x, y - q(x))`.
    fn shear(&mut self, q: &UniJet) {
        let n = self.g.order();
        let qb = BiJet::from_uni_x(q, n);
        let phi = GermDiffeo::new(BiJet::x(n), &BiJet::y(n) + &qb).expect("shear");
        let inv = GermDiffeo::new(BiJet::x(n), &BiJet::y(n) - &qb).expect("shear");
        self.g = conjugate(&self.g, &phi, &inv);
        let m = self.curve.order();
        self.curve = &self.curve - &q.with_order(m);
        self.log.push(CoordChange::from_germ(ChangeKind::Shear, &phi, &inv));
    }

    /// New coordinate `X` with `x = h(X)`.
    fn xchange(&mut self, h: &UniJet, kind: ChangeKind) -> Result<(), ReduceError> {
        let n = self.g.order();
        let hinv = h.with_order(n).comp_inverse()?;
        let phi = GermDiffeo::new(BiJet::from_uni_x(&h.with_order(n), n), BiJet::y(n))?;
        let inv = GermDiffeo::new(BiJet::from_uni_x(&hinv, n), BiJet::y(n))?;
        self.g = conjugate(&self.g, &phi, &inv);
        let m = self.curve.order();
        self.curve = self.curve.compose(&h.with_order(m))?;
        self.log.push(CoordChange::from_germ(kind, &phi, &inv));
        Ok(())
    }

    /// Blow-up of the `x`-axis direction; the curve must be tangent to it.
    fn blow_up(&mut self) -> Result<(), ReduceError> {
        let n = self.g.order();
        self.g = self.g.blow_up_x_axis()?;
        self.curve = self.curve.shift_down(1).map_err(|_| ReduceError::NotReduced("curve is not tangent to the x-axis".into()))?;
        self.log.push(CoordChange::blow_up(n));
        self.blow_ups += 1;
        Ok(())
    }

    fn read_a(&self, k: usize, p: usize) -> UniJet {
        let mu = self.g.linear_part()[1][1];
        let v: Vec<Cx> = (0..=p).map(|j| self.g.f2().coeff(k + j, 1) / mu).collect();
        UniJet::new(&v, p)
    }

    fn into_pair(self, k: usize, p: usize) -> Result<ReducedPair, ReduceError> {
        let mu = self.g.linear_part()[1][1];
        let a = self.read_a(k, p);
        let (log_mu, big_a) = principal_part(&a, k, p, mu)?;
        let contact = self.curve.valuation(1e-12);
        let b = self.g.f2().y_column(0).scale(mu.inv());
        let b_order = b.valuation(1e-12);
        let technical_condition = technical_condition(&self.g, k, p);
        Ok(ReducedPair {
            germ: self.g,
            k,
            p,
            mu,
            log_mu,
            a,
            big_a,
            contact,
            b_order,
            gamma2: self.curve,
            log: self.log,
            technical_condition,
        })
    }
}

fn technical_condition(g: &GermDiffeo, k: usize, p: usize) -> bool {
    g.f1().terms().all(|(i, j, z)| j == 0 || i >= 2 * k + p + 1 || z.norm() <= PREDICATE_TOL)
}

/// The curve as a graph `(t, g(t))` when `γ1` has order one.
fn as_graph(c: &FormalCurveJet) -> Result<UniJet, ReduceError> {
    let inv = c.g1.comp_inverse()?;
    Ok(c.g2.compose(&inv)?)
}

/// Shear to the contact jet, normalize `x∘F`, and test the reduced-form predicates.
fn finalize(w: &Work, k: usize, p: usize) -> Result<ReducedPair, String> {
    let kp = k + p;
    let mut w = w.clone();
    if w.g.order() < 2 * kp + 1 {
        return Err("jet order too small to normalize".into());
    }
    let q = w.curve.truncate(kp + 1);
    if q.max_abs() > 0.0 {
        w.shear(&q);
    }
    let f = w.g.f1().y_column(0);
    let alpha = f.coeff(kp + 1);
    if alpha.norm() <= ZERO_BAND {
        return Err("restriction order is not k+p+1 on the x-axis".into());
    }
    let beta = snap((-alpha.inv()).powf(1.0 / kp as f64));
    if (beta - Cx::new(1.0, 0.0)).norm() > 1e-15 {
        w.xchange(&UniJet::monomial(beta, 1, 1), ChangeKind::Linear).map_err(|e| e.to_string())?;
    }
    for j in 1..kp {
        let f = w.g.f1().y_column(0);
        let b = f.coeff(kp + 1 + j);
        if b.norm() > 0.0 {
            let c = b / (kp - j) as f64;
            let h = UniJet::new(&[Cx::new(0.0, 0.0), Cx::new(1.0, 0.0)], j + 1);
            let mut h = h;
            h.set(j + 1, c);
            w.xchange(&h, ChangeKind::Polynomial).map_err(|e| e.to_string())?;
        }
    }
    let mut a = w.read_a(k, p);
    if a.coeff(0).norm() <= ZERO_BAND && p == 0 {
        // Raise the contact by one, then a single blow-up moves a(0) to 1.
        let q = w.curve.truncate(kp + 2);
        if q.max_abs() > 0.0 {
            w.shear(&q);
        }
        w.blow_up().map_err(|e| e.to_string())?;
        a = w.read_a(k, p);
    }
    let rp = w.into_pair(k, p).map_err(|e| e.to_string())?;
    let rep = predicates(&rp.germ, k, p, &rp.gamma2, &a, &rp.big_a);
    if rep.holds(PREDICATE_TOL) {
        Ok(rp)
    } else {
        Err(format!("reduced-form predicates fail (max violation {:.3e}, |a(0)| = {:.3e})", rep.max_violation(), rep.a0))
    }
}

/// Jet order needed for a reduction with `blow_ups` blow-ups in total.
pub fn required_order(kp: usize, blow_ups: usize) -> usize {
    2 * kp + 2 + blow_ups
}

/// Brings a parabolic pair with `F|_Γ ≠ id` to reduced form.
///
/// Blow-ups along `Γ` are performed one at a time and the normalization is
/// attempted after each, so at most `k+p+1` (plus one when `a(0)` vanishes) are used.
pub fn reduce_pair(f: &GermDiffeo, gamma: &FormalCurveJet) -> Result<ReducedPair, ReduceError> {
    let rd = solve_restriction(f, gamma)?;
    let class = classify_inner(&rd, ROOT_TOL, MAX_ROOT_ORDER);
    if class != InnerClass::Parabolic {
        return Err(ReduceError::NotParabolic(class));
    }
    let r1 = rd.restriction_order.ok_or(ReduceError::RestrictionIsIdentity)?;
    let r = r1 - 1;
    let n0 = f.order();

    // Resolve the curve: non-singular, with a non-vertical tangent.
    let mut log = ChangeLog::default();
    let mut g = f.clone();
    let mut c = gamma.clone();
    let mut pre_blow_ups = 0;
    while c.nu > 1 {
        if g.order() < 3 || c.order() <= c.nu {
            return Err(ReduceError::OrderExhausted { needed: required_order(r, pre_blow_ups + r + 2) + 1, available: n0 });
        }
        let (pm, _) = g.straighten(c.tangent)?;
        g = g.blow_up_logged(c.tangent, &mut log)?;
        c = strict_transform(&c, &pm)?;
        pre_blow_ups += 1;
    }
    if c.tangent[0].norm() < c.tangent[1].norm() {
        let swap = [[Cx::new(0.0, 0.0), Cx::new(1.0, 0.0)], [Cx::new(1.0, 0.0), Cx::new(0.0, 0.0)]];
        let sg = GermDiffeo::linear(swap, g.order())?;
        g = conjugate(&g, &sg, &sg);
        c = c.apply_linear(&swap)?;
        log.push(CoordChange::linear(swap, g.order()));
    }
    let needed = required_order(r, pre_blow_ups + r + 2);
    if n0 < needed.min(2 * r + 2 + pre_blow_ups) {
        return Err(ReduceError::OrderExhausted { needed, available: n0 });
    }
    let curve = as_graph(&c)?;
    let mut w = Work { g, curve, log, blow_ups: pre_blow_ups };

    // Push Γ to contact order r+2, then read k and p from the y-linear part of F2.
    let q = w.curve.truncate(r + 1);
    if q.max_abs() > 0.0 {
        w.shear(&q);
    }
    let mu = w.g.linear_part()[1][1];
    let t = (1..r).find(|&j| (w.g.f2().coeff(j, 1) / mu).norm() > ZERO_BAND);
    let (k, p) = match t {
        Some(t) => (t, r - t),
        None => (r, 0),
    };

    let mut last = String::new();
    for nb in 0..=k + p + 1 {
        match finalize(&w, k, p) {
            Ok(rp) => return Ok(rp),
            Err(e) => last = e,
        }
        if nb == k + p + 1 {
            break;
        }
        if w.g.order() <= 2 * (k + p) + 2 {
            return Err(ReduceError::OrderExhausted { needed, available: n0 });
        }
        w.blow_up()?;
    }
    Err(ReduceError::NotReduced(last))
}

/// Raises the contact order to at least `k+p+m`; with `want_re_positive`, also
/// blows up along `Γ` until `Re(A_p) > 0` and the technical condition on `x∘F` holds.
pub fn refine_contact(rp: &ReducedPair, m: usize, want_re_positive: bool) -> Result<ReducedPair, ReduceError> {
    let (k, p) = (rp.k, rp.p);
    let kp = k + p;
    if m < 2 {
        return Err(ReduceError::NotReduced("contact target m must be at least 2".into()));
    }
    let mut extra = 0usize;
    if want_re_positive {
        let re = rp.big_a.coeff(p).re;
        if re <= ZERO_BAND {
            extra = (-re).floor() as usize + 1;
        }
        let min_exp = rp.germ.f1().terms().filter(|&(_, j, z)| j >= 1 && z.norm() > PREDICATE_TOL).map(|(i, _, _)| i).min();
        if let Some(e) = min_exp {
            extra = extra.max((2 * k + p + 1).saturating_sub(e));
        }
    }
    let target = kp + m - 1 + extra;
    let needed_order = target.max(required_order(kp, extra) + 1);
    if rp.gamma2.order() < target || rp.germ.order() < needed_order {
        return Err(ReduceError::OrderExhausted { needed: needed_order, available: rp.germ.order().min(rp.gamma2.order()) });
    }
    let mut w = Work { g: rp.germ.clone(), curve: rp.gamma2.clone(), log: rp.log.clone(), blow_ups: 0 };
    let q = w.curve.truncate(target);
    if q.max_abs() > 0.0 {
        w.shear(&q);
    }
    for _ in 0..extra {
        w.blow_up()?;
    }
    let out = w.into_pair(k, p)?;
    let rep = out.predicates();
    if !rep.holds(PREDICATE_TOL) {
        return Err(ReduceError::NotReduced(format!("refinement broke the reduced form ({:.3e})", rep.max_violation())));
    }
    Ok(out)
}

/// Saddle or node character of an attracting direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DirectionKind {
    Saddle,
    Node,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionReport {
    pub index: usize,
    pub xi: Cx,
    pub kind: DirectionKind,
    /// `(ln|μ|, Re(ξ^k A_0), ..., Re(ξ^{k+p-1} A_{p-1}))` with raw values.
    pub witness: Vec<f64>,
    /// First asymptotic significant order, when `|μ| = 1`.
    pub r: Option<usize>,
    /// Some entry of the witness lies inside the zero band without being exactly zero.
    pub borderline: bool,
}

/// The `k+p` directions `ξ R^+`, `ξ^{k+p} = 1`, classified by the lexicographic test.
pub fn attracting_directions(rp: &ReducedPair) -> Vec<DirectionReport> {
    classify_directions(rp.k, rp.p, rp.mu, &rp.big_a)
}

pub fn classify_directions(k: usize, p: usize, mu: Cx, big_a: &UniJet) -> Vec<DirectionReport> {
    let kp = k + p;
    (0..kp)
        .map(|l| {
            let xi = snap(Cx::from_polar(1.0, 2.0 * std::f64::consts::PI * l as f64 / kp as f64));
            let mut witness = vec![mu.norm().ln()];
            for j in 0..p {
                witness.push((xi.powu((k + j) as u32) * big_a.coeff(j)).re);
            }
            let first = witness.iter().find(|v| v.abs() > ZERO_BAND);
            let kind = match first {
                Some(v) if *v < 0.0 => DirectionKind::Node,
                _ => DirectionKind::Saddle,
            };
            let borderline = witness.iter().any(|v| v.abs() <= ZERO_BAND && *v != 0.0);
            let r = if witness[0].abs() <= ZERO_BAND {
                Some((0..p).find(|&j| witness[j + 1].abs() > ZERO_BAND).unwrap_or(p))
            } else {
                None
            };
            DirectionReport { index: l, xi, kind, witness, r, borderline }
        })
        .collect()
}
