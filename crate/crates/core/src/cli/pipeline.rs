//! classify → reduce → directions → stable sets → probes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curve::{
    classify_inner, extend_invariant_jet, hyperbolic_check, solve_restriction, CurveSeed, FormalCurveJet, InnerClass,
    MAX_ROOT_ORDER, ROOT_TOL,
};
use crate::germ::GermDiffeo;
use crate::jets::{Cx, UniJet};
use crate::orbit::{
    asymptoticity_test, capture_report, circle_seeds, simulate_orbits, Iterate, OrbitOptions, OrbitRecord, PlaneMap, PolyMap,
};
use crate::reduce::{attracting_directions, reduce_pair, refine_contact, required_order, DirectionKind, ReducedPair};
use crate::stable::{node_stable_set, parabolic_stable_set, picard_solve_parabolic, PicardOptions, StableSetDescriptor};

use super::parse::{CurveInput, GermSpec};
use super::report::*;

/// Last stage to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Classify,
    Reduce,
    Directions,
    StableSets,
    Probe,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Classify => "classify",
            Stage::Reduce => "reduce",
            Stage::Directions => "directions",
            Stage::StableSets => "stable-sets",
            Stage::Probe => "probe",
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error("precondition failed: {0}")]
    Precondition(String),
}

/// Iterations per probe orbit.
pub const PROBE_ITERATIONS: usize = 100_000;
/// Largest order tested by the hyperbolic asymptoticity probes.
pub const HYPERBOLIC_ORDERS: usize = 6;

/// Everything computed by a run; the report plus data for plot files.
pub struct PipelineOutput {
    pub report: AnalysisReport,
    pub sets: Vec<StableSetDescriptor>,
    pub orbits: Vec<OrbitRecord>,
    pub pair: Option<ReducedPair>,
}

pub fn run_pipeline(spec: &GermSpec) -> Result<AnalysisReport, PipelineError> {
    run_stages(spec, Stage::Probe).map(|o| o.report)
}

fn pre<E: std::fmt::Display>(what: &str) -> impl Fn(E) -> PipelineError + '_ {
    move |e| PipelineError::Precondition(format!("{what}: {e}"))
}

fn build_curve(g: &GermDiffeo, input: &CurveInput, order: usize) -> Result<(FormalCurveJet, Vec<usize>), PipelineError> {
    let seed = match input {
        CurveInput::Auto => CurveSeed::Auto,
        CurveInput::Tangent { direction } => CurveSeed::Direction(*direction),
        CurveInput::Gamma2 { coeffs } => CurveSeed::Partial(coeffs.iter().skip(1).copied().collect()),
        CurveInput::Parametrization { g1, g2 } => {
            let c = FormalCurveJet::new(UniJet::new(g1, order), UniJet::new(g2, order)).map_err(pre("curve"))?;
            return Ok((c, Vec::new()));
        }
    };
    if let CurveInput::Gamma2 { coeffs } = input {
        if coeffs.first().is_some_and(|c| c.norm() > 0.0) {
            return Err(PipelineError::Precondition("curve.gamma2 must have zero constant term".into()));
        }
    }
    let inv = extend_invariant_jet(g, &seed, order).map_err(pre("invariant curve"))?;
    Ok((inv.curve, inv.non_unique))
}

fn is_graph(c: &FormalCurveJet) -> bool {
    (0..=c.g1.order()).all(|i| c.g1.coeff(i) == if i == 1 { Cx::new(1.0, 0.0) } else { Cx::new(0.0, 0.0) })
}

fn pair2(p: (Cx, Cx)) -> [Cx; 2] {
    [p.0, p.1]
}

fn warn(w: &mut Vec<Warning>, stage: &str, message: impl Into<String>) {
    w.push(Warning { stage: stage.into(), message: message.into() });
}

pub fn run_stages(spec: &GermSpec, stage: Stage) -> Result<PipelineOutput, PipelineError> {
    let zero = Cx::new(0.0, 0.0);
    if spec.f1.coeff(0, 0) != zero || spec.f2.coeff(0, 0) != zero {
        return Err(PipelineError::Precondition("F must fix the origin (nonzero constant term)".into()));
    }
    let lin = spec.linear_part();
    let det = lin[0][0] * lin[1][1] - lin[0][1] * lin[1][0];
    if det.norm() <= 1e-12 * (1.0 + lin.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)) {
        return Err(PipelineError::Precondition("linear part is not invertible".into()));
    }
    if spec.order < 2 {
        return Err(PipelineError::Precondition("order must be at least 2".into()));
    }
    let base = GermDiffeo::from_polys(&spec.f1, &spec.f2, spec.order).map_err(pre("germ"))?;
    let mut warnings = Vec::new();
    let mut wrap_n = spec.iterate;
    let mut g = if wrap_n > 1 { base.compose_iterate(wrap_n as i64) } else { base.clone() };
    let (curve, non_unique) = build_curve(&g, &spec.curve, spec.order)?;
    let rd = solve_restriction(&g, &curve).map_err(pre("restriction"))?;
    let class = classify_inner(&rd, ROOT_TOL, MAX_ROOT_ORDER);
    let mut wrap = (wrap_n > 1).then(|| WrapInfo {
        n: wrap_n,
        reason: "iterate".into(),
        note: String::new(),
        images: Vec::new(),
    });
    let mut active_class = class;
    let mut active_rd = rd.clone();
    if let InnerClass::RationallyNeutral(n) = class {
        g = g.compose_iterate(n as i64);
        wrap_n *= n;
        active_rd = solve_restriction(&g, &curve).map_err(pre("restriction of the iterate"))?;
        active_class = classify_inner(&active_rd, ROOT_TOL, MAX_ROOT_ORDER);
        wrap = Some(WrapInfo {
            n: wrap_n,
            reason: format!("rationally neutral restriction of order {n}"),
            note: String::new(),
            images: Vec::new(),
        });
    }
    let spectrum = g.spectrum();
    let mut report = AnalysisReport {
        schema: SCHEMA_ID.into(),
        stage: stage.name().into(),
        input: InputEcho {
            f1: spec.f1_text.clone(),
            f2: spec.f2_text.clone(),
            order: spec.order,
            curve: spec.curve.clone(),
            iterate: spec.iterate,
            probes: spec.probes,
            seed: spec.seed,
            contact_m: spec.contact_m,
            tol: spec.tol,
            max_iter: spec.max_iter,
        },
        germ: GermSummary {
            linear_part: base.linear_part(),
            eigenvalues: [spectrum.lambda, spectrum.mu],
            diagonalizable: spectrum.diagonalizable,
            order: g.order(),
        },
        curve: Some(CurveSummary {
            g1: coeffs(&curve.g1),
            g2: coeffs(&curve.g2),
            nu: curve.nu,
            tangent: curve.tangent,
            irreducible: curve.irreducible,
            non_unique,
        }),
        restriction: Some(RestrictionSummary {
            theta: coeffs(&rd.theta),
            inner_eigenvalue: rd.inner_eigenvalue,
            tangent_eigenvalue: rd.tangent_eigenvalue,
            nu: rd.nu,
            restriction_order: rd.restriction_order,
            residual: rd.residual,
        }),
        classification: Some(class),
        wrap: None,
        reduced: None,
        directions: Vec::new(),
        stable_sets: Vec::new(),
        hyperbolic: None,
        probes: None,
        warnings: Vec::new(),
    };
    let mut out_sets = Vec::new();
    let mut out_orbits = Vec::new();
    let mut out_pair = None;
    let map = Iterate { map: PolyMap::new(&spec.f1, &spec.f2), n: wrap_n };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    match active_class {
        _ if stage == Stage::Classify => {}
        InnerClass::Parabolic => 'par: {
            let rp = match reduce_pair(&g, &curve) {
                Ok(rp) => rp,
                Err(e) => {
                    warn(&mut warnings, "reduce", e.to_string());
                    break 'par;
                }
            };
            let m = spec.contact_m.unwrap_or(rp.p + 4);
            let refined = match refine_contact(&rp, m, true) {
                Ok(r) => Some(r),
                Err(e) => {
                    warn(&mut warnings, "reduce", format!("contact refinement failed: {e}"));
                    None
                }
            };
            let blow_ups = rp.log.count(crate::germ::ChangeKind::BlowUp);
            report.reduced = Some(ReducedSummary {
                k: rp.k,
                p: rp.p,
                mu: rp.mu,
                log_mu: rp.log_mu,
                a: coeffs(&rp.a),
                big_a: coeffs(&rp.big_a),
                contact: rp.contact,
                technical_condition: rp.technical_condition,
                required_order: required_order(rp.kp(), blow_ups),
                blow_ups,
                predicates: rp.predicates(),
                log: rp.log.steps.iter().map(|s| LogEntry { kind: s.kind }).collect(),
                m,
                refined_contact: refined.as_ref().and_then(|r| r.contact),
            });
            if stage == Stage::Reduce {
                out_pair = Some(rp);
                break 'par;
            }
            let work = refined.unwrap_or_else(|| rp.clone());
            let dirs = attracting_directions(&work);
            report.directions = dirs.clone();
            out_pair = Some(work.clone());
            if stage == Stage::Directions {
                break 'par;
            }
            for d in &dirs {
                let res = match d.kind {
                    DirectionKind::Saddle => {
                        let mut o = PicardOptions::for_pair(&work);
                        o.m = m;
                        o.tol = spec.tol;
                        o.max_iter = spec.max_iter;
                        picard_solve_parabolic(&work, d, &o).map(|s| parabolic_stable_set(s, d))
                    }
                    DirectionKind::Node => node_stable_set(&work, d, m, false),
                };
                match res {
                    Ok(s) => {
                        report.stable_sets.push(summarize_set(&s));
                        out_sets.push(s);
                    }
                    Err(e) => warn(&mut warnings, "stable-sets", format!("direction {}: {e}", d.index)),
                }
            }
            if out_sets.is_empty() {
                warn(&mut warnings, "stable-sets", "no stable sets constructed");
            }
            if stage < Stage::Probe {
                break 'par;
            }
            let mut starts = Vec::new();
            let mut sources = Vec::new();
            for (si, s) in out_sets.iter().enumerate() {
                for _ in 0..spec.probes.count {
                    let rho = s.region.eps.min(spec.probes.radius) * rng.gen_range(0.3..0.9);
                    let sigma = rng.gen_range(0.2..0.8);
                    let phi = rng.gen_range(0.0..std::f64::consts::TAU);
                    let x = s.region.point(rho, sigma);
                    let p = match &s.curve {
                        Some(c) => match c.point_original(x) {
                            Ok(Some(p)) => p,
                            _ => continue,
                        },
                        None => {
                            let g = s.gamma_jet.as_ref().map_or(Cx::new(0.0, 0.0), |g| g.eval(x));
                            let y = g + Cx::from_polar(0.5 * x.norm().powi(s.q.unwrap_or(1) as i32), phi);
                            s.pair.log.to_original((x, y))
                        }
                    };
                    starts.push(p);
                    sources.push(format!("set:{si}"));
                }
            }
            for p in circle_seeds(spec.probes.count, spec.probes.radius, spec.seed) {
                starts.push(p);
                sources.push("circle".into());
            }
            let opts = OrbitOptions::parabolic(work.kp(), PROBE_ITERATIONS);
            let orbits = simulate_orbits(&map, &starts, &opts);
            let capture = capture_report(&orbits, &out_sets);
            let rows = orbits
                .iter()
                .zip(capture)
                .zip(sources)
                .enumerate()
                .map(|(id, ((o, cap), source))| ProbeRow {
                    id,
                    source,
                    start: pair2(o.start),
                    status: o.status,
                    iterations: o.points.len() - 1,
                    last: pair2(*o.points.last().expect("nonempty orbit")),
                    capture: sanitize(cap),
                })
                .collect();
            report.probes = Some(ProbeTable {
                seed: spec.seed,
                count: spec.probes.count,
                radius: spec.probes.radius,
                max_iter: PROBE_ITERATIONS,
                conv_radius: opts.conv_radius,
                rows,
            });
            out_orbits = orbits;
        }
        InnerClass::HyperbolicAttracting => {
            let check = hyperbolic_check(&g, &curve, &active_rd);
            let mut probes = Vec::new();
            if stage >= Stage::Probe {
                if is_graph(&curve) {
                    let seeds = circle_seeds(spec.probes.count, spec.probes.radius, spec.seed);
                    let orbits = simulate_orbits(&map, &seeds, &OrbitOptions::default());
                    for o in &orbits {
                        let (passed, tested) = match asymptoticity_test(o, &curve.g2, HYPERBOLIC_ORDERS) {
                            Ok(v) => (v.iter().take_while(|r| r.pass).count(), v.len()),
                            Err(_) => (0, 0),
                        };
                        probes.push(AsymptoticProbe { start: pair2(o.start), status: o.status, passed_through: passed, tested });
                    }
                    out_orbits = orbits;
                } else {
                    warn(&mut warnings, "probe", "curve is not a graph over x; asymptoticity probes skipped");
                }
            }
            report.hyperbolic = Some(HyperbolicSummary { check, probes });
        }
        InnerClass::HyperbolicRepelling => {
            warn(&mut warnings, "classify", "repelling restriction: analyse the inverse germ for stable sets")
        }
        other => warn(&mut warnings, "classify", format!("no stable sets claimed for restriction class {other:?}")),
    }

    if let Some(w) = wrap.as_mut() {
        w.note = format!(
            "analysed F^{0}; each stable set S_j of F^{0} yields the F-stable union of S_(j,i) = F(S_(j,i-1)), i = 1..{0}",
            w.n
        );
        let step = PolyMap::new(&spec.f1, &spec.f2);
        for s in &out_sets {
            let x = s.region.point(0.5 * s.region.eps, 0.5);
            let y = match &s.curve {
                Some(c) => c.eval(x).ok().flatten().unwrap_or(Cx::new(0.0, 0.0)),
                None => s.gamma_jet.as_ref().map_or(Cx::new(0.0, 0.0), |g| g.eval(x)),
            };
            let mut p = s.pair.log.to_original((x, y));
            let mut imgs = vec![pair2(p)];
            for _ in 1..w.n {
                p = step.apply(p.0, p.1);
                imgs.push(pair2(p));
            }
            w.images.push(imgs);
        }
    }
    report.wrap = wrap;
    report.warnings = warnings;
    Ok(PipelineOutput { report, sets: out_sets, orbits: out_orbits, pair: out_pair })
}

fn sanitize(mut c: crate::orbit::CaptureEntry) -> crate::orbit::CaptureEntry {
    c.tangency = c.tangency.filter(|v| v.is_finite());
    c
}

fn finite(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        f64::MAX
    }
}

fn summarize_set(s: &StableSetDescriptor) -> StableSetSummary {
    StableSetSummary {
        kind: s.kind,
        index: s.index,
        xi: s.xi,
        dimension: s.dimension(),
        region: s.region.clone(),
        q: s.q,
        invariance_samples: s.invariance_samples,
        solver: s.curve.as_ref().map(|c| SolverSummary {
            m: c.m,
            iterations: c.iterations,
            norm: finite(c.norm()),
            residual: finite(c.residual),
            delta_history: c.delta_history.iter().map(|&d| finite(d)).collect(),
            weight_bound: finite(c.weight_bound),
            tail_bound: finite(c.tail_bound),
            derivative_ok: c.derivative_ok,
            mesh_points: c.mesh.len(),
        }),
    }
}
