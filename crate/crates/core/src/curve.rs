//! Formal curves given by parametrization jets and their restrictions.

use serde::{Deserialize, Serialize};

use crate::germ::{normalize_direction, GermDiffeo, GermError, Mat2};
use crate::jets::{snap, Cx, JetError, UniJet};

/// Coefficients below this modulus do not count towards orders and supports.
pub const COEFF_TOL: f64 = 1e-12;
/// Relative tolerance for the order-by-order invariance equations.
pub const INVARIANCE_TOL: f64 = 1e-9;
/// Resonance threshold for `μ - λ^n` in the invariant-jet solver.
pub const RESONANCE_TOL: f64 = 1e-10;
/// Root-of-unity detection `|λ^n - 1| ≤ ROOT_TOL` for the least `n ≤ MAX_ROOT_ORDER`.
pub const ROOT_TOL: f64 = 1e-9;
pub const MAX_ROOT_ORDER: u32 = 64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CurveError {
    #[error("parametrization is identically zero")]
    ZeroParametrization,
    #[error("parametrization is not irreducible (factors through s^{0})")]
    Reducible(usize),
    #[error("curve is not invariant: invariance fails at order {0}")]
    NotInvariant(usize),
    #[error("invariant jet is obstructed at order {0}")]
    Obstructed(usize),
    #[error("seed direction is not fixed by the linear part")]
    NotFixedDirection,
    #[error("jet order exhausted")]
    OrderExhausted,
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Germ(#[from] GermError),
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// A formal curve `γ(s) = (γ1(s), γ2(s))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormalCurveJet {
    pub g1: UniJet,
    pub g2: UniJet,
    pub irreducible: bool,
    pub nu: usize,
    pub tangent: [Cx; 2],
}

impl FormalCurveJet {
    pub fn new(g1: UniJet, g2: UniJet) -> Result<Self, CurveError> {
        let n = g1.order().min(g2.order());
        let mut g1 = g1.truncate(n);
        let mut g2 = g2.truncate(n);
        g1.set(0, Cx::new(0.0, 0.0));
        g2.set(0, Cx::new(0.0, 0.0));
        let (nu, tangent, irreducible) = curve_basics(&g1, &g2)?;
        Ok(FormalCurveJet { g1, g2, irreducible, nu, tangent })
    }

    /// The graph `(s, γ2(s))`.
    pub fn graph(g2: UniJet) -> Result<Self, CurveError> {
        let n = g2.order();
        Self::new(UniJet::var(n), g2)
    }

    pub fn from_real(g1: &[f64], g2: &[f64], order: usize) -> Result<Self, CurveError> {
        Self::new(UniJet::from_real(g1, order), UniJet::from_real(g2, order))
    }

    pub fn order(&self) -> usize {
        self.g1.order()
    }

    /// Image `M γ` under a linear map.
    pub fn apply_linear(&self, m: &Mat2) -> Result<Self, CurveError> {
        let a = &self.g1.scale(m[0][0]) + &self.g2.scale(m[0][1]);
        let b = &self.g1.scale(m[1][0]) + &self.g2.scale(m[1][1]);
        Self::new(a, b)
    }
}

/// Multiplicity, tangent line and irreducibility certificate of a parametrization.
pub fn curve_basics(g1: &UniJet, g2: &UniJet) -> Result<(usize, [Cx; 2], bool), CurveError> {
    let v1 = g1.valuation(COEFF_TOL);
    let v2 = g2.valuation(COEFF_TOL);
    let nu = match (v1, v2) {
        (None, None) => return Err(CurveError::ZeroParametrization),
        (Some(a), None) => a,
        (None, Some(b)) => b,
        (Some(a), Some(b)) => a.min(b),
    };
    let tangent = normalize_direction([g1.coeff(nu), g2.coeff(nu)]);
    let mut g = 0;
    for u in [g1, g2] {
        for (i, z) in u.coeffs().iter().enumerate() {
            if z.norm() > COEFF_TOL {
                g = gcd(g, i);
            }
        }
    }
    Ok((nu, tangent, g == 1))
}

/// The restriction `θ` with `F∘γ = γ∘θ`, and the eigenvalue data attached to it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestrictionData {
    pub theta: UniJet,
    pub inner_eigenvalue: Cx,
    pub tangent_eigenvalue: Cx,
    pub nu: usize,
    /// Order of `θ - id`; `None` when it vanishes to the available order.
    pub restriction_order: Option<usize>,
    pub residual: f64,
}

/// `f ∘ g` where `g` has valuation at least 1 and `f` valuation at least `f_val`,
/// computed to order `order` even when `g` is known to a lower order.
fn compose_to(f: &UniJet, g: &UniJet, order: usize) -> UniJet {
    let g = g.with_order(order);
    f.with_order(order).compose(&g).expect("inner series vanishes at 0")
}

/// Eigenvalue of `m` along the line spanned by `t`.
pub fn eigenvalue_along(m: &Mat2, t: [Cx; 2]) -> Cx {
    let v = [m[0][0] * t[0] + m[0][1] * t[1], m[1][0] * t[0] + m[1][1] * t[1]];
    if t[0].norm() >= t[1].norm() {
        v[0] / t[0]
    } else {
        v[1] / t[1]
    }
}

pub fn solve_restriction(f: &GermDiffeo, gamma: &FormalCurveJet) -> Result<RestrictionData, CurveError> {
    if !gamma.irreducible {
        let mut g = 0;
        for u in [&gamma.g1, &gamma.g2] {
            for (i, z) in u.coeffs().iter().enumerate() {
                if z.norm() > COEFF_TOL {
                    g = gcd(g, i);
                }
            }
        }
        return Err(CurveError::Reducible(g));
    }
    let nu = gamma.nu;
    let n = gamma.order().min(f.order());
    if n < nu {
        return Err(CurveError::OrderExhausted);
    }
    let lhs1 = f.f1().restrict(&gamma.g1, &gamma.g2)?.with_order(n);
    let lhs2 = f.f2().restrict(&gamma.g1, &gamma.g2)?.with_order(n);
    let lam_t = eigenvalue_along(&f.linear_part(), gamma.tangent);
    let (g_main, l_main) = if gamma.g1.coeff(nu).norm() >= gamma.g2.coeff(nu).norm() {
        (&gamma.g1, &lhs1)
    } else {
        (&gamma.g2, &lhs2)
    };
    let lead = g_main.coeff(nu);
    // Per-order scale, so large high-order coefficients do not mask low-order failures.
    let scale = |i: usize| {
        1.0 + [&lhs1, &lhs2, &gamma.g1, &gamma.g2].iter().map(|u| u.coeff(i).norm()).fold(0.0, f64::max)
    };
    let m = n + 1 - nu;
    let mut best: Option<(f64, usize, UniJet)> = None;
    for k in 0..nu {
        let arg = (lam_t.arg() + 2.0 * std::f64::consts::PI * k as f64) / nu as f64;
        let t1 = snap(Cx::from_polar(lam_t.norm().powf(1.0 / nu as f64), arg));
        // Avoid the polar round trip for the common non-singular case.
        let t1 = if nu == 1 { lam_t } else { t1 };
        let mut theta = UniJet::monomial(t1, 1, m);
        let denom = lead * t1.powu(nu as u32 - 1) * nu as f64;
        for j in 2..=m {
            let comp = compose_to(g_main, &theta, nu + j - 1);
            let r = l_main.coeff(nu + j - 1) - comp.coeff(nu + j - 1);
            theta.set(j, r / denom);
        }
        let r1 = &lhs1 - &compose_to(&gamma.g1, &theta, n);
        let r2 = &lhs2 - &compose_to(&gamma.g2, &theta, n);
        let fail = (0..=n).find(|&i| r1.coeff(i).norm().max(r2.coeff(i).norm()) > INVARIANCE_TOL * scale(i));
        let res = r1.max_abs().max(r2.max_abs());
        let fail_order = fail.unwrap_or(usize::MAX);
        let better = match &best {
            None => true,
            Some((bres, bfail, _)) => fail_order > *bfail || (fail_order == *bfail && res < *bres),
        };
        if better {
            best = Some((res, fail_order, theta));
        }
    }
    let (residual, fail_order, theta) = best.expect("nu >= 1");
    if fail_order != usize::MAX {
        return Err(CurveError::NotInvariant(fail_order));
    }
    let inner = theta.coeff(1);
    let restriction_order = (1..=theta.order()).find(|&i| {
        let d = if i == 1 { theta.coeff(1) - Cx::new(1.0, 0.0) } else { theta.coeff(i) };
        d.norm() > INVARIANCE_TOL
    });
    Ok(RestrictionData {
        theta,
        inner_eigenvalue: inner,
        tangent_eigenvalue: lam_t,
        nu,
        restriction_order,
        residual,
    })
}

/// Seed for [`extend_invariant_jet`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum CurveSeed {
    /// Solve the first-order equation too; with two candidate lines, the one whose eigenvalue is closest to 1 is used.
    Auto,
    /// A tangent line `[a:b]`, required to be fixed by the linear part.
    Direction([Cx; 2]),
    /// Leading coefficients `γ2_1, γ2_2, ...` of the graph `(s, γ2(s))`, checked rather than solved.
    Partial(Vec<Cx>),
}

/// Output of the invariant-jet solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantJet {
    pub curve: FormalCurveJet,
    /// Orders at which the equation was resonant but consistent; the free coefficient was set to 0.
    pub non_unique: Vec<usize>,
}

impl InvariantJet {
    pub fn is_unique(&self) -> bool {
        self.non_unique.is_empty()
    }
}

/// Solves `F(s, g(s)) = (θ(s), g(θ(s)))` order by order for a graph `γ = (s, g(s))`.
pub fn extend_invariant_jet(f: &GermDiffeo, seed: &CurveSeed, target_order: usize) -> Result<InvariantJet, CurveError> {
    let a = f.linear_part();
    if let CurveSeed::Direction(d) = seed {
        let d = normalize_direction(*d);
        let lam = eigenvalue_along(&a, d);
        let img = [a[0][0] * d[0] + a[0][1] * d[1], a[1][0] * d[0] + a[1][1] * d[1]];
        let scale = a.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
        if (img[0] - lam * d[0]).norm().max((img[1] - lam * d[1]).norm()) > 1e-9 * scale {
            return Err(CurveError::NotFixedDirection);
        }
        if d[0].norm() < d[1].norm() && d[0].norm() <= COEFF_TOL {
            // Vertical line: solve for the swapped germ and swap back.
            let swap = GermDiffeo::linear([[Cx::new(0.0, 0.0), Cx::new(1.0, 0.0)], [Cx::new(1.0, 0.0), Cx::new(0.0, 0.0)]], f.order())?;
            let g = f.change_coordinates(&swap)?;
            let sol = extend_invariant_jet(&g, &CurveSeed::Partial(vec![Cx::new(0.0, 0.0)]), target_order)?;
            let curve = FormalCurveJet::new(sol.curve.g2, sol.curve.g1)?;
            return Ok(InvariantJet { curve, non_unique: sol.non_unique });
        }
    }
    let n = target_order.min(f.order());
    if n == 0 {
        return Err(CurveError::OrderExhausted);
    }
    let scale = 1.0 + f.f1().max_abs().max(f.f2().max_abs());
    let mut non_unique = Vec::new();
    let mut g = UniJet::zero(n);
    let fixed: Vec<Cx> = match seed {
        CurveSeed::Partial(v) => v.clone(),
        CurveSeed::Direction(d) => {
            let d = normalize_direction(*d);
            vec![d[1] / d[0]]
        }
        CurveSeed::Auto => Vec::new(),
    };
    // First-order equation: a21 + a22 g1 = g1 (a11 + a12 g1).
    let g1 = if let Some(&v) = fixed.first() {
        v
    } else if a[0][1].norm() <= COEFF_TOL {
        let lin = a[1][1] - a[0][0];
        if lin.norm() <= RESONANCE_TOL {
            if a[1][0].norm() > INVARIANCE_TOL * scale {
                return Err(CurveError::Obstructed(1));
            }
            non_unique.push(1);
            Cx::new(0.0, 0.0)
        } else {
            -a[1][0] / lin
        }
    } else {
        // a12 g1^2 + (a11 - a22) g1 - a21 = 0
        let (qa, qb, qc) = (a[0][1], a[0][0] - a[1][1], -a[1][0]);
        let disc = (qb * qb - qa * qc * 4.0).sqrt();
        let r1 = (-qb + disc) / (qa * 2.0);
        let r2 = (-qb - disc) / (qa * 2.0);
        let e = |r: Cx| (a[0][0] + a[0][1] * r - Cx::new(1.0, 0.0)).norm();
        if e(r1) <= e(r2) {
            r1
        } else {
            r2
        }
    };
    g.set(1, g1);
    let s = UniJet::var(n);
    let residual = |g: &UniJet, k: usize| -> Result<Cx, CurveError> {
        let theta = f.f1().restrict(&s, g)?;
        let lhs = f.f2().restrict(&s, g)?;
        let rhs = g.compose(&theta)?;
        Ok(lhs.coeff(k) - rhs.coeff(k))
    };
    let e1 = residual(&g, 1)?;
    if e1.norm() > INVARIANCE_TOL * scale {
        return Err(CurveError::Obstructed(1));
    }
    let theta1 = a[0][0] + a[0][1] * g1;
    let other = a[1][1] - a[0][1] * g1;
    for k in 2..=n {
        let r = residual(&g, k)?;
        if let Some(&v) = fixed.get(k - 1) {
            g.set(k, v);
            let rk = residual(&g, k)?;
            if rk.norm() > INVARIANCE_TOL * scale {
                return Err(CurveError::Obstructed(k));
            }
            continue;
        }
        let coef = other - theta1.powu(k as u32);
        if coef.norm() <= RESONANCE_TOL {
            if r.norm() > INVARIANCE_TOL * scale {
                return Err(CurveError::Obstructed(k));
            }
            non_unique.push(k);
        } else {
            g.set(k, -r / coef);
        }
    }
    Ok(InvariantJet { curve: FormalCurveJet::graph(g)?, non_unique })
}

/// One level of the chain of infinitely near points of `Γ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainStep {
    /// Tangent line blown up at this step, in the coordinates of the previous level.
    pub point: [Cx; 2],
    pub germ: GermDiffeo,
    pub curve: FormalCurveJet,
}

/// Strict transform of a curve under the blow-up of its tangent line, in the chart used by [`GermDiffeo::blow_up_transform`].
pub fn strict_transform(gamma: &FormalCurveJet, chart: &Mat2) -> Result<FormalCurveJet, CurveError> {
    let inv = crate::germ::mat_inv(chart).ok_or(CurveError::Germ(GermError::NotInvertible))?;
    let c = gamma.apply_linear(&inv)?;
    let nu = c.nu;
    if c.order() <= nu {
        return Err(CurveError::OrderExhausted);
    }
    let u1 = c.g1.shift_down(nu)?;
    let u2 = c.g2.shift_down(nu)?;
    let ratio = &u2 * &u1.reciprocal()?;
    // The ratio is known to order N - ν; re-attach the parameter order of γ1.
    let m = ratio.order();
    let g1 = c.g1.truncate(m);
    FormalCurveJet::new(g1, ratio.with_order(m))
}

pub fn strict_transform_chain(f: &GermDiffeo, gamma: &FormalCurveJet, depth: usize) -> Result<Vec<ChainStep>, CurveError> {
    let mut out = Vec::with_capacity(depth);
    let mut g = f.clone();
    let mut c = gamma.clone();
    for step in 1..=depth {
        if g.order() < 2 || c.order() <= c.nu {
            return Err(CurveError::OrderExhausted);
        }
        let (p, h) = match g.straighten(c.tangent) {
            Ok(v) => v,
            Err(GermError::NotFixedDirection) => return Err(CurveError::NotInvariant(step)),
            Err(e) => return Err(e.into()),
        };
        let point = c.tangent;
        let blown = h.blow_up_transform([Cx::new(1.0, 0.0), Cx::new(0.0, 0.0)])?;
        let st = strict_transform(&c, &p)?;
        g = blown;
        c = st;
        out.push(ChainStep { point, germ: g.clone(), curve: c.clone() });
    }
    Ok(out)
}

/// Dynamical type of the restriction `F|_Γ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "order")]
pub enum InnerClass {
    HyperbolicAttracting,
    HyperbolicRepelling,
    RationallyNeutral(u32),
    Parabolic,
    IrrationallyNeutral,
}

/// Classifies the inner eigenvalue; roots of unity are detected up to order `max_order`.
pub fn classify_inner(rd: &RestrictionData, tol: f64, max_order: u32) -> InnerClass {
    classify_eigenvalue(rd.inner_eigenvalue, tol, max_order)
}

pub fn classify_eigenvalue(l: Cx, tol: f64, max_order: u32) -> InnerClass {
    let r = l.norm();
    if (r - 1.0).abs() > tol {
        return if r < 1.0 { InnerClass::HyperbolicAttracting } else { InnerClass::HyperbolicRepelling };
    }
    if (l - Cx::new(1.0, 0.0)).norm() <= tol {
        return InnerClass::Parabolic;
    }
    let mut pw = l;
    for n in 2..=max_order {
        pw *= l;
        if (pw - Cx::new(1.0, 0.0)).norm() <= tol {
            return InnerClass::RationallyNeutral(n);
        }
    }
    InnerClass::IrrationallyNeutral
}

/// The singular hyperbolic pattern `γ = (s^p, c s^q)`, `λ^q = μ^p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CuspPattern {
    pub p: usize,
    pub q: usize,
    pub c: Cx,
    /// `|λ(Γ)^q - μ^p|`.
    pub power_residual: f64,
    /// Largest coefficient of `y^p - c^p x^q` along `γ`.
    pub membership_residual: f64,
    /// Whether `DF(0)` is diagonal and `F` has no nonlinear terms to the available order.
    pub linear_diagonal: bool,
}

/// Structure checks for an attracting hyperbolic curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicCheck {
    pub nu: usize,
    pub lambda: Cx,
    pub mu: Cx,
    /// `|λ(Γ)| < min(1, |μ|)`: the hypothesis under which `Γ` is non-singular and unique.
    pub tangent_dominated: bool,
    pub cusp: Option<CuspPattern>,
    pub notes: Vec<String>,
}

pub fn hyperbolic_check(f: &GermDiffeo, gamma: &FormalCurveJet, rd: &RestrictionData) -> HyperbolicCheck {
    let spec = f.spectrum();
    let lam = rd.tangent_eigenvalue;
    let mu = if (spec.lambda - lam).norm() <= (spec.mu - lam).norm() { spec.mu } else { spec.lambda };
    let mut notes = Vec::new();
    let tangent_dominated = lam.norm() < mu.norm().min(1.0);
    let mut cusp = None;
    if gamma.nu > 1 {
        // Work with the tangent on the x-axis.
        let (a, b) = if gamma.tangent[0].norm() >= gamma.tangent[1].norm() {
            (&gamma.g1, &gamma.g2)
        } else {
            (&gamma.g2, &gamma.g1)
        };
        let p = gamma.nu;
        let q = b.valuation(COEFF_TOL).unwrap_or(0);
        let a_mono = (0..=a.order()).all(|i| i == p || a.coeff(i).norm() <= COEFF_TOL);
        let b_mono = (0..=b.order()).all(|i| i == q || b.coeff(i).norm() <= COEFF_TOL);
        if q > p && gcd(p, q) == 1 && a_mono && b_mono {
            let alpha = a.coeff(p);
            let cq = b.coeff(q) / alpha.powf(q as f64 / p as f64);
            let c = cq.powu(p as u32);
            let lhs = b.powi(p as u32);
            let rhs = a.powi(q as u32).scale(b.coeff(q).powu(p as u32) / alpha.powu(q as u32));
            let membership_residual = (&lhs - &rhs).max_abs();
            let lin = f.linear_part();
            let nonlinear = f.f1().terms().chain(f.f2().terms()).any(|(i, j, z)| i + j >= 2 && z.norm() > COEFF_TOL);
            let linear_diagonal = lin[0][1].norm() <= COEFF_TOL && lin[1][0].norm() <= COEFF_TOL && !nonlinear;
            cusp = Some(CuspPattern {
                p,
                q,
                c,
                power_residual: (lam.powu(q as u32) - mu.powu(p as u32)).norm(),
                membership_residual,
                linear_diagonal,
            });
        } else {
            notes.push("singular curve does not match the monomial cusp pattern in these coordinates".into());
        }
    }
    HyperbolicCheck { nu: gamma.nu, lambda: lam, mu, tangent_dominated, cusp, notes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::BiJet;

    fn c(re: f64, im: f64) -> Cx {
        Cx::new(re, im)
    }

    fn germ(t1: &[(usize, usize, f64)], t2: &[(usize, usize, f64)], n: usize) -> GermDiffeo {
        let conv = |t: &[(usize, usize, f64)]| {
            let v: Vec<_> = t.iter().map(|&(i, j, r)| (i, j, c(r, 0.0))).collect();
            BiJet::from_terms(&v, n)
        };
        GermDiffeo::new(conv(t1), conv(t2)).unwrap()
    }

    #[test]
    fn basics() {
        let g = FormalCurveJet::from_real(&[0.0, 1.0], &[0.0, 0.0, 0.0, 1.0], 6).unwrap();
        assert_eq!((g.nu, g.tangent, g.irreducible), (1, [c(1.0, 0.0), c(0.0, 0.0)], true));
        let g = FormalCurveJet::from_real(&[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0, 1.0], 6).unwrap();
        assert_eq!((g.nu, g.tangent, g.irreducible), (2, [c(1.0, 0.0), c(0.0, 0.0)], true));
        let g = FormalCurveJet::from_real(&[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0, 0.0, 1.0], 6).unwrap();
        assert!(!g.irreducible);
        assert_eq!(FormalCurveJet::from_real(&[], &[], 3), Err(CurveError::ZeroParametrization));
    }

    #[test]
    fn restrictions() {
        let cusp = FormalCurveJet::from_real(&[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0, 1.0], 10).unwrap();
        let f = germ(&[(1, 0, 1.0)], &[(0, 1, -1.0)], 10);
        let rd = solve_restriction(&f, &cusp).unwrap();
        assert_eq!(rd.inner_eigenvalue, c(-1.0, 0.0));
        assert_eq!(rd.tangent_eigenvalue, c(1.0, 0.0));
        assert!((&rd.theta - &UniJet::monomial(c(-1.0, 0.0), 1, rd.theta.order())).max_abs() < 1e-14);

        let f = germ(&[(1, 0, 0.25)], &[(0, 1, 0.125)], 10);
        let rd = solve_restriction(&f, &cusp).unwrap();
        assert_eq!(rd.inner_eigenvalue, c(0.5, 0.0));
        assert!((&rd.theta - &UniJet::monomial(c(0.5, 0.0), 1, rd.theta.order())).max_abs() < 1e-14);

        let f = germ(&[(1, 0, 1.0), (2, 0, -1.0)], &[(0, 1, 1.0), (1, 1, 1.0)], 8);
        let axis = FormalCurveJet::from_real(&[0.0, 1.0], &[], 8).unwrap();
        let rd = solve_restriction(&f, &axis).unwrap();
        assert!((&rd.theta - &UniJet::from_real(&[0.0, 1.0, -1.0], 8)).max_abs() < 1e-15);
        assert_eq!(rd.restriction_order, Some(2));

        let diag = FormalCurveJet::from_real(&[0.0, 1.0], &[0.0, 1.0], 8).unwrap();
        assert!(matches!(solve_restriction(&f, &diag), Err(CurveError::NotInvariant(_))));
    }

    #[test]
    fn invariant_jets() {
        let f = germ(&[(1, 0, 1.0), (2, 0, -1.0)], &[(0, 1, 2.0)], 8);
        let s = extend_invariant_jet(&f, &CurveSeed::Direction([c(1.0, 0.0), c(0.0, 0.0)]), 8).unwrap();
        assert_eq!(s.curve.g2.max_abs(), 0.0);
        let f = germ(&[(1, 0, 1.0), (2, 0, -1.0)], &[(0, 1, 2.0), (2, 0, 1.0)], 8);
        let s = extend_invariant_jet(&f, &CurveSeed::Auto, 8).unwrap();
        assert!((s.curve.g2.coeff(2) + c(1.0, 0.0)).norm() < 1e-14);
        assert!(s.is_unique());
        let rd = solve_restriction(&f, &s.curve).unwrap();
        assert!(rd.residual < 1e-12);

        let f = germ(&[(1, 0, 1.0)], &[(0, 1, 1.0), (1, 0, 1.0)], 6);
        assert_eq!(extend_invariant_jet(&f, &CurveSeed::Auto, 6), Err(CurveError::Obstructed(1)));
        assert_eq!(
            extend_invariant_jet(&f, &CurveSeed::Direction([c(1.0, 0.0), c(0.0, 0.0)]), 6),
            Err(CurveError::NotFixedDirection)
        );
        // The vertical line is invariant and the axis x = 0 is an invariant curve.
        let s = extend_invariant_jet(&f, &CurveSeed::Direction([c(0.0, 0.0), c(1.0, 0.0)]), 6).unwrap();
        assert_eq!(s.curve.tangent, [c(0.0, 0.0), c(1.0, 0.0)]);
    }

    #[test]
    fn resonant_free_coefficient() {
        // F = (x - x^2, y): every order is resonant and consistent.
        let f = germ(&[(1, 0, 1.0), (2, 0, -1.0)], &[(0, 1, 1.0)], 5);
        let s = extend_invariant_jet(&f, &CurveSeed::Direction([c(1.0, 0.0), c(0.0, 0.0)]), 5).unwrap();
        assert!(!s.is_unique());
        assert_eq!(s.curve.g2.max_abs(), 0.0);
    }

    #[test]
    fn chains() {
        let f = germ(&[(1, 0, 1.0), (2, 0, -1.0)], &[(0, 1, 1.0), (1, 1, 1.0)], 10);
        let axis = FormalCurveJet::from_real(&[0.0, 1.0], &[], 10).unwrap();
        let ch = strict_transform_chain(&f, &axis, 4).unwrap();
        for st in &ch {
            assert_eq!(st.point, [c(1.0, 0.0), c(0.0, 0.0)]);
            assert_eq!(st.curve.g2.max_abs(), 0.0);
        }

        let f = germ(&[(1, 0, 1.0)], &[(0, 1, -1.0)], 10);
        let cusp = FormalCurveJet::from_real(&[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0, 1.0], 10).unwrap();
        let ch = strict_transform_chain(&f, &cusp, 2).unwrap();
        assert_eq!(ch[0].curve.nu, 1);
        assert_eq!(ch[0].curve.g2.coeff(1), c(1.0, 0.0));
        assert!(ch[0].curve.g2.coeff(2).norm() < 1e-15);
        let rd0 = solve_restriction(&f, &cusp).unwrap();
        for st in &ch {
            let rd = solve_restriction(&st.germ, &st.curve).unwrap();
            assert!((rd.inner_eigenvalue - rd0.inner_eigenvalue).norm() < 1e-12);
        }

        let a = 0.5;
        let f = germ(&[(1, 0, a), (0, 1, a)], &[(0, 1, a)], 10);
        let ch = strict_transform_chain(&f, &axis, 6).unwrap();
        assert_eq!(ch.len(), 6);
    }

    #[test]
    fn inner_classes() {
        assert_eq!(classify_eigenvalue(c(0.5, 0.0), ROOT_TOL, 64), InnerClass::HyperbolicAttracting);
        assert_eq!(classify_eigenvalue(c(3.0, 0.0), ROOT_TOL, 64), InnerClass::HyperbolicRepelling);
        assert_eq!(classify_eigenvalue(c(-1.0, 0.0), ROOT_TOL, 64), InnerClass::RationallyNeutral(2));
        assert_eq!(classify_eigenvalue(c(1.0, 0.0), ROOT_TOL, 64), InnerClass::Parabolic);
        let w = Cx::from_polar(1.0, 2.0 * std::f64::consts::PI / 5.0);
        assert_eq!(classify_eigenvalue(w, ROOT_TOL, 64), InnerClass::RationallyNeutral(5));
        let g = Cx::from_polar(1.0, 2.0 * std::f64::consts::PI * (5f64.sqrt() - 1.0) / 2.0);
        assert_eq!(classify_eigenvalue(g, ROOT_TOL, 64), InnerClass::IrrationallyNeutral);
    }
}
