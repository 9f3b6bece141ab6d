//! Weights, sector regions, the Picard solver for parabolic curves and open
//! stable sets at node directions.
//!
//! Everything here works in the frame of one attracting direction: the reduced
//! pair is rotated by `x = ξX` so that the direction becomes `R^+`, where the
//! principal branch of `log` is safe.

use serde::{Deserialize, Serialize};

use crate::germ::CoordChange;
use crate::jets::{BiJet, Cx, UniJet};
use crate::reduce::{DirectionKind, DirectionReport, ReduceError, ReducedPair, ZERO_BAND};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StableError {
    #[error("weight is undefined at the origin")]
    AtOrigin,
    #[error("direction {0} is not a saddle")]
    NotSaddle(usize),
    #[error("direction {0} is not a node")]
    NotNode(usize),
    #[error("Banach deltas stopped decreasing for region (d={d}, e={e}, eps={eps}); last deltas {deltas:?}")]
    NoContraction { d: f64, e: f64, eps: f64, deltas: Vec<f64> },
    #[error("no convergence after {iterations} iterations (last delta {last_delta:e})")]
    NotConverged { iterations: usize, last_delta: f64 },
    #[error("orbit left the mesh at {0}")]
    InterpolationBreakdown(Cx),
    #[error("could not fit the region: {0}")]
    CannotFit(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightMode {
    /// `E(x) = exp(-∫ A(x)/x^{p+1} dx)`.
    Restricted,
    /// `exp(-∫ (log μ + x^k A(x))/x^{k+p+1} dx)`, the reciprocal of the toy-model factor `h`.
    Full,
}

/// `log E(x)` on the principal branch.
pub fn log_weight(rp: &ReducedPair, x: Cx, mode: WeightMode) -> Result<Cx, StableError> {
    if x == Cx::new(0.0, 0.0) {
        return Err(StableError::AtOrigin);
    }
    let p = rp.p;
    let mut r = -rp.big_a.coeff(p) * x.ln();
    if p > 0 {
        let mut s = Cx::new(0.0, 0.0);
        for j in (0..p).rev() {
            s = s * x + rp.big_a.coeff(j) / (p - j) as f64;
        }
        r += s / x.powu(p as u32);
    }
    if mode == WeightMode::Full {
        let kp = rp.k + p;
        r += rp.log_mu / (kp as f64 * x.powu(kp as u32));
    }
    Ok(r)
}

pub fn eval_weight(rp: &ReducedPair, x: Cx, mode: WeightMode) -> Result<Cx, StableError> {
    Ok(log_weight(rp, x, mode)?.exp())
}

/// The first integral `y h(x)` of the model field `-x^{k+p+1}∂x + (log μ + x^k A) y ∂y`.
pub fn first_integral(rp: &ReducedPair, x: Cx, y: Cx) -> Result<Cx, StableError> {
    Ok(y * (-log_weight(rp, x, WeightMode::Full)?).exp())
}

/// `H(x,y) = y - μ^{-1} E(x) E(F1(x,y))^{-1} F2(x,y)`.
pub fn eval_residual_h(rp: &ReducedPair, x: Cx, y: Cx) -> Result<Cx, StableError> {
    let (f1, f2) = rp.germ.eval(x, y);
    let w = (log_weight(rp, x, WeightMode::Restricted)? - log_weight(rp, f1, WeightMode::Restricted)?).exp();
    Ok(y - w * f2 / rp.mu)
}

/// Smallest `C` with `|H| ≤ C (|x|^{k+p+1}|y| + |x|^k|y|^2 + |x|^{k+p+m})` on the samples.
pub fn fit_residual_bound(rp: &ReducedPair, m: usize, samples: &[(Cx, Cx)]) -> Result<f64, StableError> {
    let (k, kp) = (rp.k as i32, (rp.k + rp.p) as i32);
    let mut c: f64 = 0.0;
    for &(x, y) in samples {
        let h = eval_residual_h(rp, x, y)?;
        let ax = x.norm();
        let den = ax.powi(kp + 1) * y.norm() + ax.powi(k) * y.norm_sqr() + ax.powi(kp + m as i32);
        c = c.max(h.norm() / den);
    }
    Ok(c)
}

/// `|μ|^j |E(x_0)^{-1} E(x_j) / x_j^l|` along a sequence of `x`.
pub fn weight_decay(rp: &ReducedPair, xs: &[Cx], l: i32) -> Result<Vec<f64>, StableError> {
    let Some(&x0) = xs.first() else { return Ok(Vec::new()) };
    let r0 = log_weight(rp, x0, WeightMode::Restricted)?;
    let lnmu = rp.mu.norm().ln();
    xs.iter()
        .enumerate()
        .map(|(j, &x)| {
            let r = log_weight(rp, x, WeightMode::Restricted)?;
            Ok((j as f64 * lnmu + (r - r0).re - l as f64 * x.norm().ln()).exp())
        })
        .collect()
}

/// The pair in the coordinate `X = x/ξ`.
pub fn rotate_pair(rp: &ReducedPair, xi: Cx) -> ReducedPair {
    if xi == Cx::new(1.0, 0.0) {
        return rp.clone();
    }
    let n = rp.germ.order();
    let mut f1 = BiJet::zero(n);
    let mut f2 = BiJet::zero(n);
    let xinv = xi.inv();
    for (i, j, z) in rp.germ.f1().terms() {
        f1.set(i, j, z * xi.powu(i as u32) * xinv);
    }
    for (i, j, z) in rp.germ.f2().terms() {
        f2.set(i, j, z * xi.powu(i as u32));
    }
    let mut out = rp.clone();
    out.germ = crate::germ::GermDiffeo::new(f1, f2).expect("rotation keeps the linear part");
    let rot = |u: &UniJet, shift: usize| {
        let v: Vec<Cx> = (0..=u.order()).map(|j| u.coeff(j) * xi.powu((j + shift) as u32)).collect();
        UniJet::new(&v, u.order())
    };
    out.a = rot(&rp.a, rp.k);
    out.big_a = rot(&rp.big_a, rp.k);
    out.gamma2 = rot(&rp.gamma2, 0);
    let z = Cx::new(0.0, 0.0);
    out.log.push(CoordChange::linear([[xi, z], [z, Cx::new(1.0, 0.0)]], n));
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionShape {
    /// `-d Re x < Im x < e Re x`.
    GenericWedge,
    /// `-d Re x < Im x < e (Re x)^{r+1}`.
    UpperFlat,
    /// `-d (Re x)^{r+1} < Im x < e Re x`.
    LowerFlat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionMode {
    Saddle,
    Node,
}

/// A sector-like region around `ξR^+`, described in the rotated coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionDescriptor {
    pub index: usize,
    pub xi: Cx,
    pub shape: RegionShape,
    pub d: f64,
    pub e: f64,
    pub eps: f64,
    pub r: usize,
    pub mode: RegionMode,
    /// Fitted constant of the sign condition on `Re(x^k A(x))`, or of the
    /// weight contraction when `|μ| ≠ 1`.
    pub c_fit: f64,
    pub halvings: usize,
}

fn flat_angle(rho: f64, c: f64, alpha: i32) -> f64 {
    if alpha == 1 {
        return c.atan();
    }
    // ρ sin θ = c (ρ cos θ)^α with the left side increasing and the right side decreasing in θ.
    let (mut lo, mut hi) = (0.0f64, std::f64::consts::FRAC_PI_2);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if rho * mid.sin() < c * (rho * mid.cos()).powi(alpha) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

impl RegionDescriptor {
    fn exponents(&self) -> (i32, i32) {
        let rr = self.r as i32 + 1;
        match self.shape {
            RegionShape::GenericWedge => (1, 1),
            RegionShape::UpperFlat => (1, rr),
            RegionShape::LowerFlat => (rr, 1),
        }
    }

    /// Membership of a rotated point.
    pub fn contains(&self, x: Cx) -> bool {
        if x.norm() >= self.eps || x.re <= 0.0 {
            return false;
        }
        let (al, be) = self.exponents();
        -self.d * x.re.powi(al) < x.im && x.im < self.e * x.re.powi(be)
    }

    /// Membership of a point given in the unrotated reduced coordinate.
    pub fn contains_unrotated(&self, x: Cx) -> bool {
        self.contains(x / self.xi)
    }

    /// Arguments `(θ_lo, θ_hi)` of the region on the circle `|x| = ρ`.
    pub fn angle_range(&self, rho: f64) -> (f64, f64) {
        let (al, be) = self.exponents();
        (-flat_angle(rho, self.d, al), flat_angle(rho, self.e, be))
    }

    pub fn point(&self, rho: f64, sigma: f64) -> Cx {
        let (lo, hi) = self.angle_range(rho);
        Cx::from_polar(rho, lo + sigma * (hi - lo))
    }

    /// `(ρ, σ)` of a rotated point, with `σ ∈ [0, 1]` across the region.
    pub fn coordinates(&self, x: Cx) -> (f64, f64) {
        let rho = x.norm();
        let (lo, hi) = self.angle_range(rho);
        (rho, (x.arg() - lo) / (hi - lo))
    }
}

fn is_unit(mu: Cx) -> bool {
    mu.norm().ln().abs() <= ZERO_BAND
}

/// Region shape for the rotated pair, from `|μ|`, `r` and the sign of `Im a(0)`.
pub fn choose_shape(rot: &ReducedPair, r: Option<usize>, mode: RegionMode) -> (RegionShape, usize) {
    let r = if is_unit(rot.mu) { r.unwrap_or(0) } else { 0 };
    if r == 0 {
        return (RegionShape::GenericWedge, 0);
    }
    let up = rot.a.coeff(0).im > 0.0;
    let shape = match (mode, up) {
        (RegionMode::Saddle, true) | (RegionMode::Node, false) => RegionShape::UpperFlat,
        _ => RegionShape::LowerFlat,
    };
    (shape, r)
}

pub const MAX_HALVINGS: usize = 24;

fn x_k_a(rot: &ReducedPair, x: Cx) -> Cx {
    x.powu(rot.k as u32) * rot.big_a.eval(x)
}

fn sample_mesh(reg: &RegionDescriptor) -> Vec<Cx> {
    let mut out = Vec::new();
    let (nr, ns) = (10, 9);
    for i in 0..nr {
        let t = i as f64 / (nr - 1) as f64;
        let rho = reg.eps * (1e-2f64).powf(1.0 - t) * 0.98f64.powf(t);
        for l in 0..ns {
            let s = 1e-3 + (1.0 - 2e-3) * l as f64 / (ns - 1) as f64;
            out.push(reg.point(rho, s));
        }
    }
    out
}

fn y_samples(base: Cx, radius: f64) -> impl Iterator<Item = Cx> {
    let dirs = [Cx::new(1.0, 0.0), Cx::new(0.0, 1.0), Cx::new(-1.0, 0.0), Cx::new(0.0, -1.0)];
    std::iter::once(base).chain(dirs.into_iter().map(move |d| base + d * (0.99 * radius)))
}

/// Checks the sampled conditions for one parameter triple; returns the fitted constant.
fn check_region(rot: &ReducedPair, reg: &RegionDescriptor) -> Result<f64, String> {
    let (k, p, r) = (rot.k as i32, rot.p as i32, reg.r as i32);
    let unit = is_unit(rot.mu);
    let mut c = f64::INFINITY;
    for x in sample_mesh(reg) {
        let q = x.norm().powi(p + 1);
        let base = if reg.mode == RegionMode::Node { rot.gamma2.eval(x) } else { Cx::new(0.0, 0.0) };
        for y in y_samples(base, q) {
            let (f1, f2) = rot.germ.eval(x, y);
            if !reg.contains(f1) {
                return Err(format!("F1-invariance fails at x = {x}, y = {y}"));
            }
            if reg.mode == RegionMode::Node && y != base {
                let lhs = (f2 - rot.gamma2.eval(f1)).norm();
                if lhs >= f1.norm().powi(p + 1) {
                    return Err(format!("basin invariance fails at x = {x}, y = {y}"));
                }
            }
        }
        let xa = x_k_a(rot, x);
        let v = match (reg.mode, unit) {
            (RegionMode::Saddle, true) => xa.re / x.norm().powi(k + r),
            (RegionMode::Node, true) => -xa.re / x.norm().powi(k + r),
            (RegionMode::Saddle, false) => 1.0 - (-xa).exp().norm() / rot.mu.norm(),
            (RegionMode::Node, false) => 1.0 - rot.mu.norm() * xa.exp().norm(),
        };
        if v <= 0.0 {
            return Err(format!("sign condition on x^k A(x) fails at x = {x}"));
        }
        c = c.min(v);
    }
    Ok(c)
}

/// Fits `(d, e, ε)` by halving from `(1/2, 1/2, 1/10)` for the direction `dir` of `rp`.
pub fn fit_region(rp: &ReducedPair, dir: &DirectionReport) -> Result<RegionDescriptor, StableError> {
    let rot = rotate_pair(rp, dir.xi);
    let mode = match dir.kind {
        DirectionKind::Saddle => RegionMode::Saddle,
        DirectionKind::Node => RegionMode::Node,
    };
    fit_region_rotated(&rot, dir, mode)
}

fn fit_region_rotated(rot: &ReducedPair, dir: &DirectionReport, mode: RegionMode) -> Result<RegionDescriptor, StableError> {
    let (shape, r) = choose_shape(rot, dir.r, mode);
    let mut reg = RegionDescriptor { index: dir.index, xi: dir.xi, shape, d: 0.5, e: 0.5, eps: 0.1, r, mode, c_fit: 0.0, halvings: 0 };
    let mut last = String::new();
    for h in 0..=MAX_HALVINGS {
        reg.halvings = h;
        match check_region(rot, &reg) {
            Ok(c) => {
                reg.c_fit = c;
                return Ok(reg);
            }
            Err(e) => last = e,
        }
        reg.d *= 0.5;
        reg.e *= 0.5;
        reg.eps *= 0.5;
    }
    Err(StableError::CannotFit(last))
}

/// Log-polar mesh `ρ_i × σ_l` over a region, with `ρ` geometric and `σ` uniform on `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarMesh {
    pub region: RegionDescriptor,
    pub radii: Vec<f64>,
    pub sigmas: Vec<f64>,
}

/// Points per axis of the interpolation stencil.
const STENCIL: usize = 6;

/// Where a point falls relative to the mesh.
enum Locate {
    Inside([usize; 2], [[f64; STENCIL]; 2]),
    Inner,
    Outside,
}

/// Lagrange weights at `t` for the nodes `0, 1, …, STENCIL-1`.
fn lagrange(t: f64) -> [f64; STENCIL] {
    let mut w = [1.0; STENCIL];
    for (a, wa) in w.iter_mut().enumerate() {
        for b in 0..STENCIL {
            if a != b {
                *wa *= (t - b as f64) / (a as f64 - b as f64);
            }
        }
    }
    w
}

fn stencil(u: f64, n: usize) -> (usize, [f64; STENCIL]) {
    let half = STENCIL as isize / 2 - 1;
    let b = (u.floor() as isize - half).clamp(0, n as isize - STENCIL as isize) as usize;
    (b, lagrange(u - b as f64))
}

impl PolarMesh {
    pub fn new(region: RegionDescriptor, r_inner: f64, n_radii: usize, n_angles: usize) -> Self {
        let n_radii = n_radii.max(STENCIL);
        let n_angles = n_angles.max(STENCIL);
        let r_outer = region.eps * (1.0 - 1e-9);
        let (l0, l1) = (r_inner.ln(), r_outer.ln());
        let radii = (0..n_radii).map(|i| (l0 + (l1 - l0) * i as f64 / (n_radii - 1) as f64).exp()).collect();
        let sigmas = (0..n_angles).map(|l| l as f64 / (n_angles - 1) as f64).collect();
        PolarMesh { region, radii, sigmas }
    }

    pub fn len(&self) -> usize {
        self.radii.len() * self.sigmas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> Vec<Cx> {
        let mut out = Vec::with_capacity(self.len());
        for &rho in &self.radii {
            for &s in &self.sigmas {
                out.push(self.region.point(rho, s));
            }
        }
        out
    }

    fn locate(&self, x: Cx) -> Locate {
        let nr = self.radii.len();
        let ns = self.sigmas.len();
        let (rho, sigma) = self.region.coordinates(x);
        let (l0, l1) = (self.radii[0].ln(), self.radii[nr - 1].ln());
        let lr = rho.ln();
        if lr < l0 {
            return Locate::Inner;
        }
        if lr > l1 + 1e-12 || !(-1e-9..=1.0 + 1e-9).contains(&sigma) || x.re <= 0.0 {
            return Locate::Outside;
        }
        let ur = (lr - l0) / (l1 - l0) * (nr - 1) as f64;
        let us = sigma * (ns - 1) as f64;
        let (br, wr) = stencil(ur, nr);
        let (bs, ws) = stencil(us, ns);
        Locate::Inside([br, bs], [wr, ws])
    }

    fn interp(&self, vals: &[Cx], base: [usize; 2], w: &[[f64; STENCIL]; 2]) -> Cx {
        let ns = self.sigmas.len();
        let mut acc = Cx::new(0.0, 0.0);
        for (a, wa) in w[0].iter().enumerate() {
            let row = (base[0] + a) * ns;
            let mut s = Cx::new(0.0, 0.0);
            for (b, wb) in w[1].iter().enumerate() {
                s += vals[row + base[1] + b] * *wb;
            }
            acc += s * *wa;
        }
        acc
    }

    /// Interpolated value; `Ok(None)` below the inner radius.
    pub fn interpolate(&self, vals: &[Cx], x: Cx) -> Result<Option<Cx>, StableError> {
        match self.locate(x) {
            Locate::Inside(b, w) => Ok(Some(self.interp(vals, b, &w))),
            Locate::Inner => Ok(None),
            Locate::Outside => Err(StableError::InterpolationBreakdown(x)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PicardOptions {
    /// Weight exponent of the Banach norm `sup |u|/|x|^{m-1}`.
    pub m: usize,
    pub n_radii: usize,
    pub n_angles: usize,
    pub tol: f64,
    pub max_iter: usize,
    /// Inner radius of the mesh; by default chosen so the a-priori tail bound is below `tol/10`.
    pub r_inner: Option<f64>,
    /// Starting function, as a polynomial in the rotated coordinate; `u^0 = 0` when absent.
    pub initial: Option<UniJet>,
    /// Hard cap on orbit steps per mesh point.
    pub max_steps: usize,
}

impl PicardOptions {
    pub fn for_pair(rp: &ReducedPair) -> Self {
        PicardOptions {
            m: rp.p + 4,
            n_radii: 48,
            n_angles: 17,
            tol: 1e-10,
            max_iter: 60,
            r_inner: None,
            initial: None,
            max_steps: 2_000_000,
        }
    }
}

/// A parabolic curve `{(x, u(x))}` over a region, solved on a log-polar mesh.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParabolicCurveSolution {
    pub mesh: PolarMesh,
    pub values: Vec<Cx>,
    pub m: usize,
    pub norm_history: Vec<f64>,
    pub delta_history: Vec<f64>,
    pub iterations: usize,
    /// `sup |u(f_u(x)) - F2(x, u(x))|` over interior mesh points.
    pub residual: f64,
    /// Largest `|μ^{-j} E(x_0) E(x_j)^{-1}|` met along solver orbits.
    pub weight_bound: f64,
    /// Largest `Σ_j |x_j|^{k+p+1} / |x_0|` met along solver orbits.
    pub orbit_sum_constant: f64,
    /// Largest a-priori bound of the discarded tail of the series.
    pub tail_bound: f64,
    /// `|u'(x)| ≤ |x|^{m-p-2}` on the sampled interior.
    pub derivative_ok: bool,
    /// The reduced pair in the rotated frame of the direction.
    pub pair: ReducedPair,
}

impl ParabolicCurveSolution {
    pub fn norm(&self) -> f64 {
        banach_norm(&self.mesh, &self.values, self.m)
    }

    /// `u(x)` at a rotated point of the mesh region.
    pub fn eval(&self, x: Cx) -> Result<Option<Cx>, StableError> {
        self.mesh.interpolate(&self.values, x)
    }

    /// The curve point over the rotated `x`, mapped to the original coordinates.
    pub fn point_original(&self, x: Cx) -> Result<Option<(Cx, Cx)>, StableError> {
        Ok(self.eval(x)?.map(|u| self.pair.log.to_original((x, u))))
    }
}

fn banach_norm(mesh: &PolarMesh, vals: &[Cx], m: usize) -> f64 {
    let ns = mesh.sigmas.len();
    let mut best: f64 = 0.0;
    for (i, &rho) in mesh.radii.iter().enumerate() {
        let w = rho.powi(m as i32 - 1);
        for l in 0..ns {
            best = best.max(vals[i * ns + l].norm() / w);
        }
    }
    best
}

struct OrbitStats {
    weight: f64,
    orbit_sum: f64,
    tail: f64,
}

/// One application of the operator `T` at `x0`.
fn apply_t(rot: &ReducedPair, mesh: &PolarMesh, vals: &[Cx], x0: Cx, u0: Cx, m: usize, tol: f64, max_steps: usize) -> Result<(Cx, OrbitStats), StableError> {
    let kp = (rot.k + rot.p) as i32;
    let mu_inv = rot.mu.inv();
    let lw0 = log_weight(rot, x0, WeightMode::Restricted)?;
    let mut x = x0;
    let mut ux = u0;
    let mut lw = lw0;
    let mut mu_pow = Cx::new(1.0, 0.0);
    let mut sum = Cx::new(0.0, 0.0);
    let mut stats = OrbitStats { weight: 0.0, orbit_sum: 0.0, tail: 0.0 };
    let mut h_scale: f64 = 0.0;
    let ax0 = x0.norm();
    for _ in 0..max_steps {
        let (f1, f2) = rot.germ.eval(x, ux);
        let lw1 = log_weight(rot, f1, WeightMode::Restricted)?;
        let h = ux - (lw - lw1).exp() * f2 * mu_inv;
        let w = mu_pow * (lw0 - lw).exp();
        sum += w * h;
        let ax = x.norm();
        stats.weight = stats.weight.max(w.norm());
        stats.orbit_sum += ax.powi(kp + 1) / ax0;
        h_scale = h_scale.max(h.norm() / ax.powi(kp + m as i32));
        // Remaining terms: Σ_{l>j} |x_l|^{k+p+m} ≤ |x_j|^m / m by the Leau-Fatou asymptotics.
        let tail = w.norm() * h_scale * ax.powi(m as i32) / m as f64;
        if tail < tol / 10.0 {
            stats.tail = stats.tail.max(tail);
            return Ok((sum, stats));
        }
        x = f1;
        lw = lw1;
        mu_pow *= mu_inv;
        match mesh.interpolate(vals, x)? {
            Some(v) => ux = v,
            None => {
                stats.tail = stats.tail.max(tail);
                return Ok((sum, stats));
            }
        }
    }
    stats.tail = f64::INFINITY;
    Ok((sum, stats))
}

/// Default inner radius: the a-priori tail `|x|^m/m` drops below `tol/10` there.
pub fn default_inner_radius(eps: f64, m: usize, tol: f64) -> f64 {
    (m as f64 * tol / 10.0).powf(1.0 / m as f64).clamp(eps * 1e-3, eps * 0.25)
}

/// Checks the preconditions of the saddle solver on a pair prepared by `refine_contact`.
pub fn check_saddle_preconditions(rp: &ReducedPair, m: usize) -> Result<(), StableError> {
    let kp = rp.k + rp.p;
    if m < rp.p + 2 {
        return Err(StableError::Precondition(format!("m = {m} must be at least p + 2")));
    }
    if let Some(c) = rp.contact {
        if c < kp + m {
            return Err(StableError::Precondition(format!("contact order {c} below k+p+m = {}", kp + m)));
        }
    }
    if is_unit(rp.mu) && rp.big_a.coeff(rp.p).re <= 0.0 {
        return Err(StableError::Precondition("Re(A_p) must be positive".into()));
    }
    Ok(())
}

/// Solves the invariance equation `u(f_u(x)) = F2(x, u(x))` at a saddle direction
/// by Picard iteration of `T u(x_0) = Σ_j μ^{-j} E(x_0) E(x_j)^{-1} H(x_j, u(x_j))`.
pub fn picard_solve_parabolic(rp: &ReducedPair, dir: &DirectionReport, opts: &PicardOptions) -> Result<ParabolicCurveSolution, StableError> {
    if dir.kind != DirectionKind::Saddle {
        return Err(StableError::NotSaddle(dir.index));
    }
    check_saddle_preconditions(rp, opts.m)?;
    let rot = rotate_pair(rp, dir.xi);
    let region = fit_region_rotated(&rot, dir, RegionMode::Saddle)?;
    let m = opts.m;
    let r_in = opts.r_inner.unwrap_or_else(|| default_inner_radius(region.eps, m, opts.tol));
    let mesh = PolarMesh::new(region, r_in, opts.n_radii, opts.n_angles);
    let pts = mesh.points();
    let mut vals: Vec<Cx> = match &opts.initial {
        Some(u) => pts.iter().map(|&x| u.eval(x)).collect(),
        None => vec![Cx::new(0.0, 0.0); pts.len()],
    };
    let mut norm_history = vec![banach_norm(&mesh, &vals, m)];
    let mut delta_history = Vec::new();
    let (mut weight_bound, mut orbit_sum_constant, mut tail_bound): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut stalls = 0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let mut next = Vec::with_capacity(pts.len());
        for (idx, &x0) in pts.iter().enumerate() {
            let (t, st) = apply_t(&rot, &mesh, &vals, x0, vals[idx], m, opts.tol, opts.max_steps)?;
            weight_bound = weight_bound.max(st.weight);
            orbit_sum_constant = orbit_sum_constant.max(st.orbit_sum);
            tail_bound = tail_bound.max(st.tail);
            next.push(t);
        }
        let diff: Vec<Cx> = next.iter().zip(&vals).map(|(a, b)| a - b).collect();
        let delta = banach_norm(&mesh, &diff, m);
        vals = next;
        norm_history.push(banach_norm(&mesh, &vals, m));
        if let Some(&prev) = delta_history.last() {
            if delta >= prev && delta > 0.0 {
                stalls += 1;
            } else {
                stalls = 0;
            }
        }
        delta_history.push(delta);
        if delta < opts.tol {
            converged = true;
            break;
        }
        if stalls >= 5 {
            let reg = &mesh.region;
            let tail = delta_history[delta_history.len().saturating_sub(6)..].to_vec();
            return Err(StableError::NoContraction { d: reg.d, e: reg.e, eps: reg.eps, deltas: tail });
        }
    }
    if !converged {
        return Err(StableError::NotConverged { iterations, last_delta: delta_history.last().copied().unwrap_or(f64::NAN) });
    }
    let residual = invariance_residual(&rot, &mesh, &vals)?;
    let derivative_ok = derivative_bound_holds(&rot, &mesh, &vals, m)?;
    Ok(ParabolicCurveSolution {
        mesh,
        values: vals,
        m,
        norm_history,
        delta_history,
        iterations,
        residual,
        weight_bound,
        orbit_sum_constant,
        tail_bound,
        derivative_ok,
        pair: rot,
    })
}

fn invariance_residual(rot: &ReducedPair, mesh: &PolarMesh, vals: &[Cx]) -> Result<f64, StableError> {
    let ns = mesh.sigmas.len();
    let pts = mesh.points();
    let mut res: f64 = 0.0;
    for i in 1..mesh.radii.len() - 1 {
        for l in 0..ns {
            let idx = i * ns + l;
            let (f1, f2) = rot.germ.eval(pts[idx], vals[idx]);
            if let Some(v) = mesh.interpolate(vals, f1)? {
                res = res.max((v - f2).norm());
            }
        }
    }
    Ok(res)
}

fn derivative_bound_holds(rot: &ReducedPair, mesh: &PolarMesh, vals: &[Cx], m: usize) -> Result<bool, StableError> {
    let ns = mesh.sigmas.len();
    let pts = mesh.points();
    let h = 1e-4;
    let e = m as i32 - rot.p as i32 - 2;
    for i in 1..mesh.radii.len() - 1 {
        for l in 1..ns - 1 {
            let x = pts[i * ns + l];
            let (Some(a), Some(b)) = (mesh.interpolate(vals, x * (1.0 + h))?, mesh.interpolate(vals, x * (1.0 - h))?) else { continue };
            let du = (a - b) / (x * 2.0 * h);
            if du.norm() > x.norm().powi(e) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StableSetKind {
    ParabolicCurve,
    NodeBasin,
}

/// Distance to a parabolic curve below which a point counts as lying on it.
pub const CURVE_CAPTURE_TOL: f64 = 1e-8;

/// A stable set attached to one attracting direction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StableSetDescriptor {
    pub kind: StableSetKind,
    pub index: usize,
    pub xi: Cx,
    pub region: RegionDescriptor,
    /// Exponent `q` of `|y - J_M γ2(x)| < |x|^q` for a node basin.
    pub q: Option<usize>,
    /// `J_M γ2` in the rotated frame, for a node basin.
    pub gamma_jet: Option<UniJet>,
    pub curve: Option<ParabolicCurveSolution>,
    /// Number of samples on which `F(S) ⊂ S` was checked.
    pub invariance_samples: usize,
    /// Entry times `k_j` per dyadic annulus for the asymptotic refinement of a basin.
    pub annulus_entry: Option<Vec<usize>>,
    /// The reduced pair in the rotated frame.
    pub pair: ReducedPair,
}

impl StableSetDescriptor {
    pub fn dimension(&self) -> usize {
        match self.kind {
            StableSetKind::ParabolicCurve => 1,
            StableSetKind::NodeBasin => 2,
        }
    }

    /// Membership of a point in the rotated reduced frame.
    pub fn contains_frame(&self, x: Cx, y: Cx) -> bool {
        if !self.region.contains(x) {
            return false;
        }
        match self.kind {
            StableSetKind::NodeBasin => {
                let g = self.gamma_jet.as_ref().map_or(Cx::new(0.0, 0.0), |g| g.eval(x));
                (y - g).norm() < x.norm().powi(self.q.unwrap_or(1) as i32)
            }
            StableSetKind::ParabolicCurve => {
                let Some(c) = self.curve.as_ref() else { return false };
                match c.eval(x) {
                    Ok(Some(u)) => (y - u).norm() <= CURVE_CAPTURE_TOL,
                    // Inside the inner radius only the weighted bound |u(x)| ≤ ‖u‖ |x|^{m-1} is known.
                    Ok(None) if x.norm() < c.mesh.radii[0] => {
                        y.norm() <= CURVE_CAPTURE_TOL + c.norm() * x.norm().powi(c.m as i32 - 1)
                    }
                    _ => false,
                }
            }
        }
    }

    /// Membership of a point given in the original coordinates.
    pub fn contains_original(&self, p: (Cx, Cx)) -> bool {
        let (x, y) = self.pair.log.to_current(p);
        x.is_finite() && y.is_finite() && self.contains_frame(x, y)
    }
}

/// The parabolic curve of a saddle direction as a stable set.
pub fn parabolic_stable_set(sol: ParabolicCurveSolution, dir: &DirectionReport) -> StableSetDescriptor {
    StableSetDescriptor {
        kind: StableSetKind::ParabolicCurve,
        index: dir.index,
        xi: dir.xi,
        region: sol.mesh.region.clone(),
        q: None,
        gamma_jet: None,
        pair: sol.pair.clone(),
        curve: Some(sol),
        invariance_samples: 0,
        annulus_entry: None,
    }
}

/// The open stable set `S = {x ∈ R, |y - J_M γ2(x)| < |x|^{p+1}}` at a node direction.
pub fn node_stable_set(rp: &ReducedPair, dir: &DirectionReport, m: usize, asymptotic_refinement: bool) -> Result<StableSetDescriptor, StableError> {
    if dir.kind != DirectionKind::Node {
        return Err(StableError::NotNode(dir.index));
    }
    let kp = rp.k + rp.p;
    if let Some(c) = rp.contact {
        if c < kp + m {
            return Err(StableError::Precondition(format!("contact order {c} below k+p+m = {}", kp + m)));
        }
    }
    let rot = rotate_pair(rp, dir.xi);
    let region = fit_region_rotated(&rot, dir, RegionMode::Node)?;
    let q = rp.p + 1;
    let jet = rot.gamma2.clone();
    let mut set = StableSetDescriptor {
        kind: StableSetKind::NodeBasin,
        index: dir.index,
        xi: dir.xi,
        region,
        q: Some(q),
        gamma_jet: Some(jet),
        curve: None,
        invariance_samples: 0,
        annulus_entry: None,
        pair: rot,
    };
    set.invariance_samples = verify_basin_invariance(&set)?;
    if asymptotic_refinement {
        set.annulus_entry = Some(annulus_entry_times(&set, 4, 20_000));
    }
    Ok(set)
}

/// Checks `F(S) ⊂ S` on interior and boundary-adjacent samples; returns the sample count.
fn verify_basin_invariance(set: &StableSetDescriptor) -> Result<usize, StableError> {
    let q = set.q.unwrap_or(1) as i32;
    let g = set.gamma_jet.clone().unwrap_or_else(|| UniJet::zero(0));
    let mut count = 0;
    for x in sample_mesh(&set.region) {
        let rad = x.norm().powi(q);
        for t in [0.0, 0.5, 0.99] {
            for ph in 0..4 {
                let y = g.eval(x) + Cx::from_polar(t * rad, ph as f64 * std::f64::consts::FRAC_PI_2);
                let (f1, f2) = set.pair.germ.eval(x, y);
                if !set.contains_frame(f1, f2) {
                    return Err(StableError::CannotFit(format!("F(S) ⊄ S at x = {x}, y = {y}")));
                }
                count += 1;
            }
        }
    }
    Ok(count)
}

/// For each annulus `ε/2^{j+2} < |x| < ε/2^j` of the basin, the number of iterates after which
/// sampled points stay in `|y - J_N γ2(x)| < |x|^N` for all `N ≤ j + 1`.
fn annulus_entry_times(set: &StableSetDescriptor, annuli: usize, horizon: usize) -> Vec<usize> {
    let eps = set.region.eps;
    let q = set.q.unwrap_or(1) as i32;
    let g = set.gamma_jet.clone().unwrap_or_else(|| UniJet::zero(0));
    let mut out = Vec::with_capacity(annuli);
    for j in 0..annuli {
        let mut kj = 0;
        for t in [0.3, 0.6, 0.9] {
            let rho = eps / 2f64.powi(j as i32 + 2) * (1.0 - t) + eps / 2f64.powi(j as i32) * t;
            for s in [0.1, 0.5, 0.9] {
                let x0 = set.region.point(rho * 0.999, s);
                let y0 = g.eval(x0) + Cx::new(0.9 * x0.norm().powi(q), 0.0);
                let (mut x, mut y) = (x0, y0);
                let mut last_bad = 0;
                for n in 1..=horizon {
                    (x, y) = set.pair.germ.eval(x, y);
                    let ok = (1..=j + 1).all(|nn| (y - g.truncate(nn).eval(x)).norm() < x.norm().powi(nn as i32));
                    if !ok {
                        last_bad = n;
                    }
                }
                kj = kj.max(last_bad);
            }
        }
        out.push(kj);
    }
    out
}
