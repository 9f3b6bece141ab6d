//! Orbit simulation and the diagnostics evaluated along orbits.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::germ::GermDiffeo;
use crate::jets::{Cx, Poly2, UniJet};
use crate::stable::{StableSetDescriptor, StableSetKind};

#[derive(Debug, thiserror::Error)]
pub enum OrbitError {
    #[error("orbit tail has only {0} usable points")]
    TailTooShort(usize),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A self-map of `C^2`.
pub trait PlaneMap: Sync {
    fn apply(&self, x: Cx, y: Cx) -> (Cx, Cx);
}

/// Exact polynomial map, evaluated by nested Horner schemes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyMap {
    c1: Vec<Vec<Cx>>,
    c2: Vec<Vec<Cx>>,
}

fn dense(p: &Poly2) -> Vec<Vec<Cx>> {
    let dx = p.terms().map(|t| t.0).max().unwrap_or(0) as usize;
    let dy = p.terms().map(|t| t.1).max().unwrap_or(0) as usize;
    let mut c = vec![vec![Cx::new(0.0, 0.0); dy + 1]; dx + 1];
    for (i, j, v) in p.terms() {
        c[i as usize][j as usize] = v;
    }
    for row in &mut c {
        while row.len() > 1 && row.last() == Some(&Cx::new(0.0, 0.0)) {
            row.pop();
        }
    }
    c
}

fn horner2(c: &[Vec<Cx>], x: Cx, y: Cx) -> Cx {
    c.iter().rev().fold(Cx::new(0.0, 0.0), |acc, row| acc * x + row.iter().rev().fold(Cx::new(0.0, 0.0), |a, &v| a * y + v))
}

impl PolyMap {
    pub fn new(f1: &Poly2, f2: &Poly2) -> Self {
        PolyMap { c1: dense(f1), c2: dense(f2) }
    }
}

impl PlaneMap for PolyMap {
    fn apply(&self, x: Cx, y: Cx) -> (Cx, Cx) {
        (horner2(&self.c1, x, y), horner2(&self.c2, x, y))
    }
}

impl PlaneMap for GermDiffeo {
    fn apply(&self, x: Cx, y: Cx) -> (Cx, Cx) {
        self.eval(x, y)
    }
}

/// `M^n` applied by repeated evaluation.
#[derive(Clone, Debug)]
pub struct Iterate<M> {
    pub map: M,
    pub n: u32,
}

impl<M: PlaneMap> PlaneMap for Iterate<M> {
    fn apply(&self, x: Cx, y: Cx) -> (Cx, Cx) {
        (0..self.n).fold((x, y), |p, _| self.map.apply(p.0, p.1))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrbitStatus {
    ConvergedToOrigin,
    Escaped,
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitOptions {
    pub max_iter: usize,
    pub escape_radius: f64,
    pub conv_radius: f64,
    /// Number of final iterates that must lie inside the convergence radius.
    pub window: usize,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        OrbitOptions { max_iter: 100_000, escape_radius: 1.0, conv_radius: 1e-8, window: 50 }
    }
}

impl OrbitOptions {
    /// Options for orbits tangent to a parabolic direction, which decay like `j^{-1/(k+p)}`:
    /// the convergence radius is three times the Leau-Fatou size after `max_iter` steps.
    pub fn parabolic(kp: usize, max_iter: usize) -> Self {
        let conv = 3.0 * (kp as f64 * max_iter as f64).powf(-1.0 / kp as f64);
        OrbitOptions { max_iter, conv_radius: conv, ..Default::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub start: (Cx, Cx),
    /// `(x_j, y_j)` for `j = 0, 1, …`, starting with the start point.
    pub points: Vec<(Cx, Cx)>,
    pub status: OrbitStatus,
    /// `x_j/|x_j|` at the last iterate.
    pub tangent: Option<Cx>,
}

fn size(p: (Cx, Cx)) -> f64 {
    p.0.norm().max(p.1.norm())
}

/// Iterates `map` from `p0` until escape, convergence or `max_iter`.
pub fn simulate_orbit<M: PlaneMap + ?Sized>(map: &M, p0: (Cx, Cx), opts: &OrbitOptions) -> OrbitRecord {
    let mut points = vec![p0];
    let mut status = OrbitStatus::Undecided;
    if size(p0) == 0.0 {
        status = OrbitStatus::ConvergedToOrigin;
    } else {
        let mut run = 0;
        let mut p = p0;
        for _ in 0..opts.max_iter {
            p = map.apply(p.0, p.1);
            points.push(p);
            let s = size(p);
            if !s.is_finite() || s > opts.escape_radius {
                status = OrbitStatus::Escaped;
                break;
            }
            run = if s < opts.conv_radius { run + 1 } else { 0 };
            if run >= opts.window {
                status = OrbitStatus::ConvergedToOrigin;
                break;
            }
        }
    }
    let last = points.last().expect("start point").0;
    let tangent = (last.norm() > 0.0 && last.is_finite()).then(|| last / last.norm());
    OrbitRecord { start: p0, points, status, tangent }
}

/// Runs independent orbits in parallel; the output order follows `starts`.
pub fn simulate_orbits<M: PlaneMap + ?Sized>(map: &M, starts: &[(Cx, Cx)], opts: &OrbitOptions) -> Vec<OrbitRecord> {
    starts.par_iter().map(|&p| simulate_orbit(map, p, opts)).collect()
}

/// Seeds `(r e^{iθ}, r e^{iφ})` with angles from a fixed-seed generator.
pub fn circle_seeds(count: usize, radius: f64, seed: u64) -> Vec<(Cx, Cx)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tau = std::f64::consts::TAU;
    (0..count)
        .map(|_| {
            let a: f64 = rng.gen::<f64>() * tau;
            let b: f64 = rng.gen::<f64>() * tau;
            (Cx::from_polar(radius, a), Cx::from_polar(radius, b))
        })
        .collect()
}

/// `(k+p) j x_j^{k+p}`, which tends to 1 along orbits tangent to an attracting direction.
pub fn leau_fatou(points: &[(Cx, Cx)], kp: usize) -> Vec<Cx> {
    points.iter().enumerate().map(|(j, p)| p.0.powu(kp as u32) * (kp * j) as f64).collect()
}

/// `Im(x_j) / Re(x_j)^{r+1}`.
pub fn tangency(points: &[(Cx, Cx)], r: usize) -> Vec<f64> {
    points.iter().map(|p| p.0.im / p.0.re.powi(r as i32 + 1)).collect()
}

/// `|y_j - J_N γ2(x_j)| / |x_j|^{N+1}`.
pub fn asymptotic_ratio(points: &[(Cx, Cx)], gamma2: &UniJet, n: usize) -> Vec<f64> {
    let g = gamma2.truncate(n.min(gamma2.order()));
    points.iter().map(|p| (p.1 - g.eval(p.0)).norm() / p.0.norm().powi(n as i32 + 1)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticVerdict {
    pub n: usize,
    pub pass: bool,
    /// Fitted `C_N`: the largest ratio over the tail.
    pub c_n: f64,
    pub mid_max: f64,
    pub last_max: f64,
}

/// Ratio allowed between the last-quartile and the mid-quartile maxima.
pub const QUARTILE_FACTOR: f64 = 10.0;

/// Bounded-tail test of `|y_j - J_N γ2(x_j)| ≤ C_N |x_j|^{N+1}` for `N = 1..=n_max`.
///
/// The orbit is split into quartiles by index; `N` passes when the maximum over
/// the last quartile is at most `QUARTILE_FACTOR` times the maximum over the two middle ones.
pub fn asymptoticity_test(orbit: &OrbitRecord, gamma2: &UniJet, n_max: usize) -> Result<Vec<AsymptoticVerdict>, OrbitError> {
    let pts: Vec<(Cx, Cx)> = orbit.points.iter().copied().filter(|p| p.0 != Cx::new(0.0, 0.0)).collect();
    if pts.len() < 16 {
        return Err(OrbitError::TailTooShort(pts.len()));
    }
    let q = pts.len() / 4;
    (1..=n_max)
        .map(|n| {
            let v = asymptotic_ratio(&pts, gamma2, n);
            let mid = v[q..3 * q].iter().copied().fold(0.0, f64::max);
            let last = v[3 * q..].iter().copied().fold(0.0, f64::max);
            let pass = last.is_finite() && last <= QUARTILE_FACTOR * mid || last == 0.0;
            Ok(AsymptoticVerdict { n, pass, c_n: mid.max(last), mid_max: mid, last_max: last })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum CaptureStatus {
    /// The orbit of the origin.
    Excluded,
    NotConverging { status: OrbitStatus },
    Assigned { set: usize, kind: StableSetKind, entry: usize },
    Unassigned,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaptureEntry {
    pub orbit: usize,
    /// Attracting direction whose frame contains the tail with the smallest argument.
    pub direction: Option<usize>,
    /// `Im(x)/Re(x)^{r+1}` at the last iterate, in the frame of that direction.
    pub tangency: Option<f64>,
    pub status: CaptureStatus,
}

/// Number of iterates sampled per orbit when testing membership.
pub const CAPTURE_SAMPLES: usize = 400;

/// Assigns each converging orbit to the stable set of its tangent direction, with
/// the first sampled index from which all later samples lie in the set.
pub fn capture_report(orbits: &[OrbitRecord], sets: &[StableSetDescriptor]) -> Vec<CaptureEntry> {
    orbits
        .par_iter()
        .enumerate()
        .map(|(i, o)| {
            let mut entry = CaptureEntry { orbit: i, direction: None, tangency: None, status: CaptureStatus::Unassigned };
            if size(o.start) == 0.0 {
                entry.status = CaptureStatus::Excluded;
                return entry;
            }
            if o.status != OrbitStatus::ConvergedToOrigin {
                entry.status = CaptureStatus::NotConverging { status: o.status };
                return entry;
            }
            let last = *o.points.last().expect("nonempty orbit");
            let mut best: Option<(f64, usize, Cx)> = None;
            for (s, set) in sets.iter().enumerate() {
                let (x, _) = set.pair.log.to_current(last);
                if x.is_finite() && x.re > 0.0 {
                    let a = x.arg().abs();
                    if best.map_or(true, |b| a < b.0) {
                        best = Some((a, s, x));
                    }
                }
            }
            let Some((_, s, xf)) = best else { return entry };
            let set = &sets[s];
            entry.direction = Some(set.index);
            entry.tangency = Some(xf.im / xf.re.powi(set.region.r as i32 + 1));
            let n = o.points.len();
            let stride = n.div_ceil(CAPTURE_SAMPLES).max(1);
            let mut idx: Vec<usize> = (0..n).step_by(stride).collect();
            if idx.last() != Some(&(n - 1)) {
                idx.push(n - 1);
            }
            let mut first_in = None;
            for &j in idx.iter().rev() {
                if set.contains_original(o.points[j]) {
                    first_in = Some(j);
                } else {
                    break;
                }
            }
            if let Some(j) = first_in {
                entry.status = CaptureStatus::Assigned { set: s, kind: set.kind, entry: j };
            }
            entry
        })
        .collect()
}

/// Optional columns of an orbit dump.
#[derive(Clone, Debug, Default)]
pub struct DiagnosticColumns {
    pub kp: Option<usize>,
    pub r: Option<usize>,
    pub gamma2: Option<UniJet>,
    pub orders: Vec<usize>,
}

/// Writes one row per iterate: `j, re_x, im_x, re_y, im_y`, then the requested diagnostics.
pub fn write_orbit_csv<W: Write>(orbit: &OrbitRecord, diag: &DiagnosticColumns, out: W) -> Result<(), OrbitError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["j".to_string(), "re_x".into(), "im_x".into(), "re_y".into(), "im_y".into()];
    let lf = diag.kp.map(|kp| leau_fatou(&orbit.points, kp));
    let tg = diag.r.map(|r| tangency(&orbit.points, r));
    let mut asym = Vec::new();
    if lf.is_some() {
        header.push("re_leau_fatou".into());
        header.push("im_leau_fatou".into());
    }
    if tg.is_some() {
        header.push("tangency".into());
    }
    if let Some(g) = &diag.gamma2 {
        for &n in &diag.orders {
            header.push(format!("asym_{n}"));
            asym.push(asymptotic_ratio(&orbit.points, g, n));
        }
    }
    w.write_record(&header)?;
    for (j, p) in orbit.points.iter().enumerate() {
        let mut row = vec![j.to_string(), p.0.re.to_string(), p.0.im.to_string(), p.1.re.to_string(), p.1.im.to_string()];
        if let Some(v) = &lf {
            row.push(v[j].re.to_string());
            row.push(v[j].im.to_string());
        }
        if let Some(v) = &tg {
            row.push(v[j].to_string());
        }
        for v in &asym {
            row.push(v[j].to_string());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Cx {
        Cx::new(re, im)
    }

    fn poly(terms: &[(u32, u32, f64)]) -> Poly2 {
        terms.iter().fold(Poly2::zero(), |acc, &(i, j, v)| acc.add(&Poly2::monomial(c(v, 0.0), i, j)))
    }

    #[test]
    fn parabolic_convergence_and_leau_fatou() {
        let map = PolyMap::new(&poly(&[(1, 0, 1.0), (2, 0, -1.0)]), &poly(&[(0, 1, 0.5)]));
        let o = simulate_orbit(&map, (c(0.1, 0.0), c(0.1, 0.0)), &OrbitOptions::parabolic(1, 100_000));
        assert_eq!(o.status, OrbitStatus::ConvergedToOrigin);
        let lf = leau_fatou(&o.points, 1);
        let v = lf[100_000.min(lf.len() - 1)];
        assert!((v - c(1.0, 0.0)).norm() < 0.01, "{v}");
    }

    #[test]
    fn repelling_escapes() {
        let map = PolyMap::new(&poly(&[(1, 0, -1.0)]), &poly(&[(0, 1, 2.0)]));
        let o = simulate_orbit(&map, (c(0.1, 0.0), c(0.1, 0.0)), &OrbitOptions::default());
        assert_eq!(o.status, OrbitStatus::Escaped);
        for (j, p) in o.points.iter().enumerate() {
            assert_eq!(p.1, c(0.1 * 2f64.powi(j as i32), 0.0));
        }
        assert_eq!(o.points.len(), 5);
    }

    #[test]
    fn origin_is_trivial() {
        let map = PolyMap::new(&poly(&[(1, 0, 1.0), (2, 0, -1.0)]), &poly(&[(0, 1, 1.0)]));
        let o = simulate_orbit(&map, (c(0.0, 0.0), c(0.0, 0.0)), &OrbitOptions::default());
        assert_eq!(o.status, OrbitStatus::ConvergedToOrigin);
        assert!(o.tangent.is_none());
        let rep = capture_report(&[o], &[]);
        assert_eq!(rep[0].status, CaptureStatus::Excluded);
    }

    #[test]
    fn asymptoticity_examples() {
        let map = PolyMap::new(&poly(&[(1, 0, 1.0), (2, 0, -1.0)]), &poly(&[(0, 1, 1.0), (1, 1, 1.0)]));
        let o = simulate_orbit(&map, (c(0.1, 0.0), c(0.0, 0.0)), &OrbitOptions { max_iter: 2000, ..Default::default() });
        let v = asymptoticity_test(&o, &UniJet::zero(8), 6).unwrap();
        assert!(v.iter().all(|r| r.pass && r.c_n == 0.0));

        let map = PolyMap::new(&poly(&[(1, 0, 1.0), (3, 0, -1.0)]), &poly(&[(0, 1, 1.0), (1, 1, -1.0)]));
        let o = simulate_orbit(&map, (c(0.1, 0.0), c(0.005, 0.0)), &OrbitOptions::parabolic(2, 100_000));
        let v = asymptoticity_test(&o, &UniJet::zero(10), 8).unwrap();
        assert!(v.iter().all(|r| r.pass), "{v:?}");

        let map = PolyMap::new(&poly(&[(1, 0, 0.5), (0, 1, 0.5)]), &poly(&[(0, 1, 0.5)]));
        let o = simulate_orbit(&map, (c(0.1, 0.0), c(0.05, 0.0)), &OrbitOptions::default());
        let v = asymptoticity_test(&o, &UniJet::zero(4), 1).unwrap();
        assert!(!v[0].pass);
    }

    #[test]
    fn too_short_tail() {
        let map = PolyMap::new(&poly(&[(1, 0, 1.0), (2, 0, -1.0)]), &poly(&[(0, 1, 1.0)]));
        let o = simulate_orbit(&map, (c(0.1, 0.0), c(0.0, 0.0)), &OrbitOptions { max_iter: 5, ..Default::default() });
        assert!(matches!(asymptoticity_test(&o, &UniJet::zero(3), 2), Err(OrbitError::TailTooShort(6))));
    }

    #[test]
    fn parallel_matches_serial_and_csv_columns() {
        let map = PolyMap::new(&poly(&[(1, 0, 1.0), (2, 0, -1.0)]), &poly(&[(0, 1, 0.5)]));
        let seeds = circle_seeds(8, 0.05, 7);
        assert_eq!(seeds, circle_seeds(8, 0.05, 7));
        let opts = OrbitOptions { max_iter: 300, ..Default::default() };
        let par = simulate_orbits(&map, &seeds, &opts);
        for (s, o) in seeds.iter().zip(&par) {
            assert_eq!(&simulate_orbit(&map, *s, &opts), o);
        }
        let mut buf = Vec::new();
        let diag = DiagnosticColumns { kp: Some(1), r: Some(0), gamma2: Some(UniJet::zero(4)), orders: vec![1, 2] };
        write_orbit_csv(&par[0], &diag, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "j,re_x,im_x,re_y,im_y,re_leau_fatou,im_leau_fatou,tangency,asym_1,asym_2");
        assert_eq!(text.lines().count(), par[0].points.len() + 1);
    }
}
