//! Acceptance checks; one PASS/FAIL line per criterion.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use germdyn::curve::{eigenvalue_along, extend_invariant_jet, hyperbolic_check, solve_restriction, CurveSeed, FormalCurveJet};
use germdyn::germ::{exp_vector_field, mat_inv, mat_mul, GermDiffeo, Mat2, VectorFieldJet};
use germdyn::jets::{BiJet, Cx, Poly2, UniJet};
use germdyn::orbit::{asymptoticity_test, leau_fatou, simulate_orbit, simulate_orbits, OrbitOptions, OrbitStatus, PolyMap};
use germdyn::reduce::{attracting_directions, classify_directions, reduce_pair, refine_contact, DirectionKind};
use germdyn::stable::{first_integral, node_stable_set, picard_solve_parabolic, weight_decay, PicardOptions};

fn c(re: f64, im: f64) -> Cx {
    Cx::new(re, im)
}

fn one() -> Cx {
    c(1.0, 0.0)
}

fn poly(terms: &[(u32, u32, Cx)]) -> Poly2 {
    terms.iter().fold(Poly2::zero(), |acc, &(i, j, v)| acc.add(&Poly2::monomial(v, i, j)))
}

fn rpoly(terms: &[(u32, u32, f64)]) -> Poly2 {
    poly(&terms.iter().map(|&(i, j, v)| (i, j, c(v, 0.0))).collect::<Vec<_>>())
}

fn germ(t1: &[(u32, u32, f64)], t2: &[(u32, u32, f64)], n: usize) -> GermDiffeo {
    GermDiffeo::from_polys(&rpoly(t1), &rpoly(t2), n).unwrap()
}

fn axis(n: usize) -> FormalCurveJet {
    FormalCurveJet::from_real(&[0.0, 1.0], &[], n).unwrap()
}

fn rc(rng: &mut ChaCha8Rng, s: f64) -> Cx {
    c(rng.gen_range(-s..s), rng.gen_range(-s..s))
}

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Distance between two unordered pairs.
fn pair_err(a: [Cx; 2], b: [Cx; 2]) -> f64 {
    let d1 = (a[0] - b[0]).norm().max((a[1] - b[1]).norm());
    let d2 = (a[0] - b[1]).norm().max((a[1] - b[0]).norm());
    d1.min(d2)
}

fn blow_up_spectrum() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 10;
    let mut worst: f64 = 0.0;
    let mut worst_iter: f64 = 0.0;
    for _ in 0..100 {
        let (lam, mu) = loop {
            let lam = Cx::from_polar(rng.gen_range(0.6..1.4), rng.gen_range(-3.0..3.0));
            let mu = Cx::from_polar(rng.gen_range(0.6..1.4), rng.gen_range(-3.0..3.0));
            if (0..=5).all(|j| (lam - mu / lam.powu(j)).norm() > 0.05) {
                break (lam, mu);
            }
        };
        let p: Mat2 = loop {
            let p = [[one() + rc(&mut rng, 0.3), rc(&mut rng, 0.5)], [rc(&mut rng, 0.5), one() + rc(&mut rng, 0.3)]];
            if mat_inv(&p).is_some() {
                break p;
            }
        };
        let d = [[lam, c(0.0, 0.0)], [c(0.0, 0.0), mu]];
        let lin = mat_mul(&mat_mul(&p, &d), &mat_inv(&p).unwrap());
        let mut t1 = vec![(1, 0, lin[0][0]), (0, 1, lin[0][1])];
        let mut t2 = vec![(1, 0, lin[1][0]), (0, 1, lin[1][1])];
        for deg in 2..=4u32 {
            for i in 0..=deg {
                t1.push((i, deg - i, rc(&mut rng, 0.5)));
                t2.push((i, deg - i, rc(&mut rng, 0.5)));
            }
        }
        let f = GermDiffeo::from_polys(&poly(&t1), &poly(&t2), n).unwrap();
        let dir = [p[0][0], p[1][0]];
        let mut g = f.blow_up_transform(dir).unwrap();
        let s = g.spectrum();
        worst = worst.max(pair_err([s.lambda, s.mu], [lam, mu / lam]) / (mu / lam).norm().max(1.0));
        for j in 1..=4 {
            let s = g.spectrum();
            let lin = g.linear_part();
            let dir = *s
                .directions
                .iter()
                .min_by(|a, b| (eigenvalue_along(&lin, **a) - lam).norm().total_cmp(&(eigenvalue_along(&lin, **b) - lam).norm()))
                .unwrap();
            g = g.blow_up_transform(dir).unwrap();
            let s = g.spectrum();
            let want = mu / lam.powu(j + 1);
            worst_iter = worst_iter.max(pair_err([s.lambda, s.mu], [lam, want]) / want.norm().max(1.0));
        }
    }
    check(worst <= 1e-12 && worst_iter <= 1e-12, format!("max err single {worst:.2e}, iterated j<=4 {worst_iter:.2e}"))
}

fn cusp_restriction() -> Outcome {
    let f = germ(&[(1, 0, 1.0)], &[(0, 1, -1.0)], 12);
    let g = FormalCurveJet::from_real(&[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0, 1.0], 12).unwrap();
    let rd = solve_restriction(&f, &g).map_err(|e| e.to_string())?;
    let li = rd.inner_eigenvalue;
    let lt = rd.tangent_eigenvalue;
    let ok = rd.nu == 2 && li == c(-1.0, 0.0) && lt == one() && li.powu(rd.nu as u32) == lt;
    check(ok, format!("nu={} inner={li} tangent={lt} inner^nu={}", rd.nu, li.powu(rd.nu as u32)))
}

fn cusp_hyperbolic() -> Outcome {
    let f = germ(&[(1, 0, 0.25)], &[(0, 1, 0.125)], 12);
    let g = FormalCurveJet::from_real(&[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0, 1.0], 12).unwrap();
    let rd = solve_restriction(&f, &g).map_err(|e| e.to_string())?;
    let theta_ok = (0..=rd.theta.order()).all(|i| rd.theta.coeff(i) == if i == 1 { c(0.5, 0.0) } else { c(0.0, 0.0) });
    let h = hyperbolic_check(&f, &g, &rd);
    let cusp = h.cusp.ok_or("no cusp pattern")?;
    let exact = h.lambda.powu(3) == h.mu.powu(2);
    let ok = theta_ok && exact && (cusp.p, cusp.q) == (2, 3) && cusp.power_residual == 0.0 && cusp.membership_residual == 0.0;
    check(ok, format!("theta=s/2 exact: {theta_ok}; lambda^3=mu^2 exact: {exact}; (p,q)=({},{}); membership residual {}", cusp.p, cusp.q, cusp.membership_residual))
}

fn reduction_soundness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = 14;
    let models = [(1usize, 1usize), (2, 0), (1, 0), (2, 1), (1, 2)];
    let mut worst_a: f64 = 0.0;
    let mut worst_pred: f64 = 0.0;
    let mut mismatches = Vec::new();
    for trial in 0..20 {
        let (k, p) = models[trial % models.len()];
        let kp = k + p;
        let mu = if trial % 2 == 0 { Cx::from_polar(1.0, rng.gen_range(-2.0..2.0)) } else { Cx::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(-2.0..2.0)) };
        let mut a: Vec<Cx> = (0..=p).map(|_| rc(&mut rng, 1.0)).collect();
        a[0] = a[0] + a[0] / a[0].norm();
        // Reduced model F.
        let mut f1 = vec![(1, 0, one()), (kp as u32 + 1, 0, -one()), ((2 * kp + 1) as u32, 0, rc(&mut rng, 0.5)), (kp as u32 + 1, 1, rc(&mut rng, 0.5))];
        f1.push((kp as u32 + 2, 1, rc(&mut rng, 0.5)));
        let mut f2 = vec![(0, 1, mu)];
        for (j, &aj) in a.iter().enumerate() {
            f2.push(((k + j) as u32, 1, mu * aj));
        }
        f2.push((kp as u32 + 1, 1, mu * rc(&mut rng, 0.5)));
        let f = GermDiffeo::from_polys(&poly(&f1), &poly(&f2), n).unwrap();
        // φ = (λx + P(x) + x^{k+p+1} y R, c y + q(x)).
        let lam = rng.gen_range(0.6..1.5);
        let mut p1 = vec![(1, 0, c(lam, 0.0))];
        for i in 2..=(2 * kp + 1) as u32 {
            p1.push((i, 0, rc(&mut rng, 0.3)));
        }
        p1.push((kp as u32 + 1, 1, rc(&mut rng, 0.3)));
        p1.push((kp as u32 + 1, 2, rc(&mut rng, 0.3)));
        let cy = Cx::from_polar(rng.gen_range(0.5..1.5), rng.gen_range(-3.0..3.0));
        let q: Vec<(u32, u32, Cx)> = (2..=6).map(|i| (i, 0, rc(&mut rng, 0.4))).collect();
        let mut p2 = vec![(0, 1, cy)];
        p2.extend(q.iter().copied());
        let phi = GermDiffeo::from_polys(&poly(&p1), &poly(&p2), n).unwrap();
        let g = f.change_coordinates(&phi).map_err(|e| e.to_string())?;
        let mut g2 = UniJet::zero(n);
        for &(i, _, v) in &q {
            g2.set(i as usize, -v / cy);
        }
        let gamma = FormalCurveJet::new(UniJet::var(n), g2).unwrap();
        let rp = match reduce_pair(&g, &gamma) {
            Ok(r) => r,
            Err(e) => {
                mismatches.push(format!("trial {trial}: {e}"));
                continue;
            }
        };
        if (rp.k, rp.p) != (k, p) || (rp.mu - mu).norm() > 1e-8 {
            mismatches.push(format!("trial {trial}: (k,p,mu)=({},{},{}) want ({k},{p},{mu})", rp.k, rp.p, rp.mu));
            continue;
        }
        for (j, &aj) in a.iter().enumerate() {
            worst_a = worst_a.max((rp.a.coeff(j) - aj).norm());
        }
        worst_pred = worst_pred.max(rp.predicates().max_violation());
    }
    check(
        mismatches.is_empty() && worst_a <= 1e-8 && worst_pred <= 1e-10,
        format!("20 conjugated models; max |a_j - a_j*| {worst_a:.2e}; max predicate violation {worst_pred:.2e}; mismatches {mismatches:?}"),
    )
}

fn direction_classification() -> Outcome {
    let f = germ(&[(1, 0, 1.0), (3, 0, -1.0)], &[(0, 1, 1.0), (1, 1, -1.0)], 12);
    let rp = reduce_pair(&f, &axis(12)).map_err(|e| e.to_string())?;
    let d = attracting_directions(&rp);
    let main = d.len() == 2
        && d[0].xi == one()
        && d[0].kind == DirectionKind::Node
        && d[0].witness == vec![0.0, -1.0]
        && d[1].xi.re == -1.0
        && d[1].kind == DirectionKind::Saddle
        && d[1].witness == vec![0.0, 1.0];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut mu2 = true;
    let mut unit_p0 = true;
    for _ in 0..200 {
        let k = rng.gen_range(0..=4);
        let p = rng.gen_range(0..=4);
        if k + p == 0 {
            continue;
        }
        let a = UniJet::new(&(0..=p).map(|_| rc(&mut rng, 2.0)).collect::<Vec<_>>(), p);
        mu2 &= classify_directions(k, p, c(2.0, 0.0), &a).iter().all(|d| d.kind == DirectionKind::Saddle);
        let a0 = UniJet::new(&[rc(&mut rng, 2.0)], 0);
        let kk = k.max(1);
        unit_p0 &= classify_directions(kk, 0, Cx::from_polar(1.0, rng.gen_range(-3.0..3.0)), &a0).iter().all(|d| d.kind == DirectionKind::Saddle);
    }
    check(main && mu2 && unit_p0, format!("x-x^3 example: {:?}; mu=2 all saddle: {mu2}; |mu|=1,p=0 all saddle: {unit_p0}", d.iter().map(|d| (d.xi.re, d.kind, d.witness.clone())).collect::<Vec<_>>()))
}

fn saddle_solver() -> Outcome {
    let f = germ(&[(1, 0, 1.0), (2, 0, -1.0)], &[(0, 1, 1.0), (1, 1, 1.0)], 12);
    let rp = reduce_pair(&f, &axis(12)).map_err(|e| e.to_string())?;
    let rp = refine_contact(&rp, 4, true).map_err(|e| e.to_string())?;
    let dirs = attracting_directions(&rp);
    let mut o = PicardOptions::for_pair(&rp);
    o.initial = Some(UniJet::from_real(&[0.0, 0.5], 1));
    let s = picard_solve_parabolic(&rp, &dirs[0], &o).map_err(|e| e.to_string())?;
    let h = &s.delta_history;
    let ratio = (3..h.len()).map(|i| h[i] / h[i - 1]).fold(0.0, f64::max);
    // Off-curve orbits leave every neighbourhood of the curve.
    let map = PolyMap::new(&rpoly(&[(1, 0, 1.0), (2, 0, -1.0)]), &rpoly(&[(0, 1, 1.0), (1, 1, 1.0)]));
    let starts: Vec<(Cx, Cx)> = [(0.05, 1e-4), (0.03, -1e-5), (0.08, 1e-3), (0.02, 1e-5)].iter().map(|&(x, y)| (c(x, 0.0), c(y, 0.0))).collect();
    let opts = OrbitOptions { max_iter: 1_000_000, conv_radius: 0.0, ..Default::default() };
    let escapes = simulate_orbits(&map, &starts, &opts)
        .iter()
        .all(|o| o.points.iter().any(|p| p.1.norm() / p.0.norm() > 1e3));
    check(
        ratio <= 0.9 && s.norm() <= 1e-10 && s.residual <= 1e-10 && escapes,
        format!("{} iterations, delta ratio after it. 3 <= {ratio:.3e}, |u| {:.2e}, residual {:.2e}, off-curve |y/x|>1e3: {escapes}", s.iterations, s.norm(), s.residual),
    )
}

fn saddle_cross_check() -> Outcome {
    let n = 16;
    let f = germ(&[(1, 0, 1.0), (2, 0, -1.0)], &[(0, 1, 2.0), (2, 0, 1.0)], n);
    let inv = extend_invariant_jet(&f, &CurveSeed::Auto, n).map_err(|e| e.to_string())?;
    let lead = inv.curve.g2.coeff(2);
    let rp = reduce_pair(&f, &inv.curve).map_err(|e| e.to_string())?;
    let rp = refine_contact(&rp, 4, true).map_err(|e| e.to_string())?;
    let dirs = attracting_directions(&rp);
    let mut o = PicardOptions::for_pair(&rp);
    o.r_inner = Some(5e-4);
    let s = picard_solve_parabolic(&rp, &dirs[0], &o).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for &r in &[1e-3, 2e-3, 5e-3, 1e-2] {
        let (x, y) = s.point_original(c(r, 0.0)).map_err(|e| e.to_string())?.ok_or("point outside mesh")?;
        let yj = inv.curve.g2.eval(x);
        worst = worst.max(((y - yj) / yj).norm());
    }
    check(worst <= 1e-4 && (lead - c(-1.0, 0.0)).norm() < 1e-12, format!("gamma2_2 = {lead}; max relative error at |x| in [1e-3,1e-2]: {worst:.2e}"))
}

fn node_basin() -> Outcome {
    let f = germ(&[(1, 0, 1.0), (3, 0, -1.0)], &[(0, 1, 1.0), (1, 1, -1.0)], 14);
    let rp = reduce_pair(&f, &axis(14)).map_err(|e| e.to_string())?;
    let m = rp.p + 4;
    let rp = refine_contact(&rp, m, false).map_err(|e| e.to_string())?;
    let dirs = attracting_directions(&rp);
    let set = node_stable_set(&rp, &dirs[0], m, false).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let starts: Vec<(Cx, Cx)> = (0..50)
        .map(|_| {
            let x = set.region.point(set.region.eps * rng.gen_range(0.2..0.95), rng.gen_range(0.0..1.0));
            let r = x.norm().powi(set.q.unwrap() as i32) * rng.gen_range(0.0..0.99);
            set.pair.log.to_original((x, Cx::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))))
        })
        .collect();
    let inside = starts.iter().all(|&p| set.contains_original(p));
    let map = PolyMap::new(&rpoly(&[(1, 0, 1.0), (3, 0, -1.0)]), &rpoly(&[(0, 1, 1.0), (1, 1, -1.0)]));
    let orbits = simulate_orbits(&map, &starts, &OrbitOptions::parabolic(2, 100_000));
    let converged = orbits.iter().filter(|o| o.status == OrbitStatus::ConvergedToOrigin).count();
    let zero = UniJet::zero(10);
    let mut asym_ok = true;
    let mut decay_worst: f64 = 0.0;
    for o in &orbits {
        match asymptoticity_test(o, &zero, 8) {
            Ok(v) => asym_ok &= v.iter().all(|r| r.pass),
            Err(_) => asym_ok = false,
        }
        let xs: Vec<Cx> = o.points.iter().take(2001).map(|p| p.0).collect();
        if xs.len() < 2001 {
            asym_ok = false;
            continue;
        }
        for l in 0..=5 {
            let w = weight_decay(&rp, &xs, l).map_err(|e| e.to_string())?;
            decay_worst = decay_worst.max(w[2000] / w[10]);
        }
    }
    check(
        inside && converged == 50 && asym_ok && decay_worst < 1e-6,
        format!("seeds in S: {inside}; converged {converged}/50; asymptoticity N<=8 all pass: {asym_ok}; max w(2000)/w(10) over l<=5: {decay_worst:.2e}"),
    )
}

fn leau_fatou_estimate() -> Outcome {
    let opts = OrbitOptions { max_iter: 100_000, conv_radius: 0.0, ..Default::default() };
    let cases = [
        ("node x-x^3, xi=1", rpoly(&[(1, 0, 1.0), (3, 0, -1.0)]), rpoly(&[(0, 1, 1.0), (1, 1, -1.0)]), 2usize, (0.1, 0.002)),
        ("node x-x^3, xi=-1 on curve", rpoly(&[(1, 0, 1.0), (3, 0, -1.0)]), rpoly(&[(0, 1, 1.0), (1, 1, -1.0)]), 2, (-0.1, 0.0)),
        ("saddle x-x^2 on curve", rpoly(&[(1, 0, 1.0), (2, 0, -1.0)]), rpoly(&[(0, 1, 1.0), (1, 1, 1.0)]), 1, (0.1, 0.0)),
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, p1, p2, kp, (x0, y0)) in cases {
        let o = simulate_orbit(&PolyMap::new(&p1, &p2), (c(x0, 0.0), c(y0, 0.0)), &opts);
        if o.points.len() <= 100_000 {
            ok = false;
            detail.push(format!("{name}: orbit stopped at {}", o.points.len()));
            continue;
        }
        let lf = leau_fatou(&o.points, kp)[100_000];
        ok &= (0.99..=1.01).contains(&lf.re) && lf.im.abs() <= 0.01;
        detail.push(format!("{name}: {:.5}", lf.re));
    }
    check(ok, detail.join("; "))
}

fn hyperbolic_containment() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let map = PolyMap::new(&rpoly(&[(1, 0, 0.6)]), &rpoly(&[(0, 1, 0.3)]));
    let starts: Vec<(Cx, Cx)> = (0..200)
        .map(|i| {
            let x = Cx::from_polar(rng.gen_range(0.01..0.3), rng.gen_range(-3.0..3.0));
            let y = if i % 4 == 0 { c(0.0, 0.0) } else { Cx::from_polar(rng.gen_range(1e-6..0.3), rng.gen_range(-3.0..3.0)) };
            (x, y)
        })
        .collect();
    let orbits = simulate_orbits(&map, &starts, &OrbitOptions::default());
    let zero = UniJet::zero(8);
    let mut wrong = 0;
    let mut passed = 0;
    for o in &orbits {
        let pass = asymptoticity_test(o, &zero, 6).map(|v| v.iter().all(|r| r.pass)).unwrap_or(false);
        if pass {
            passed += 1;
        }
        if pass != (o.start.1 == c(0.0, 0.0)) {
            wrong += 1;
        }
    }
    check(wrong == 0, format!("200 seeds, 50 with y0=0; passing all N<=6: {passed}; misclassified {wrong}"))
}

fn saddle_count_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut done = 0;
    let mut violations = 0;
    while done < 1000 {
        let k = rng.gen_range(1..=4);
        let p = rng.gen_range(0..=6);
        if k + p == 0 {
            continue;
        }
        let mu = if done % 2 == 0 { Cx::from_polar(1.0, rng.gen_range(-3.0..3.0)) } else { Cx::from_polar(rng.gen_range(1.0..3.0), rng.gen_range(-3.0..3.0)) };
        let a = UniJet::new(&(0..=p).map(|_| rc(&mut rng, 2.0)).collect::<Vec<_>>(), p);
        let saddles = classify_directions(k, p, mu, &a).iter().filter(|d| d.kind == DirectionKind::Saddle).count();
        if saddles < (k + p).div_ceil(4) {
            violations += 1;
        }
        done += 1;
    }
    check(violations == 0, format!("1000 samples, violations {violations}"))
}

fn toy_first_integral() -> Outcome {
    let n = 20;
    let z1 = BiJet::from_terms(&[(3, 0, c(-1.0, 0.0))], n);
    let z2 = BiJet::from_terms(&[(1, 1, c(-1.0, 0.0))], n);
    let f = exp_vector_field(&VectorFieldJet::new(z1, z2).map_err(|e| e.to_string())?);
    let rp = reduce_pair(&f, &axis(n)).map_err(|e| e.to_string())?;
    let shape = (rp.k, rp.p) == (1, 1) && (rp.big_a.coeff(0) - c(-1.0, 0.0)).norm() < 1e-12 && rp.big_a.coeff(1).norm() < 1e-12;
    let mut worst: f64 = 0.0;
    for &(x0, y0) in &[(0.1, 0.01), (0.08, -0.02), (0.12, 0.005), (0.1, 0.03)] {
        let mut p = (c(x0, 0.02), c(y0, 0.0));
        let h0 = first_integral(&rp, p.0, p.1).map_err(|e| e.to_string())?;
        for _ in 0..100 {
            p = f.eval(p.0, p.1);
            let (xr, yr) = rp.log.to_current(p);
            let h = first_integral(&rp, xr, yr).map_err(|e| e.to_string())?;
            worst = worst.max(((h - h0) / h0).norm());
        }
    }
    check(shape && worst <= 1e-6, format!("(k,p)=({},{}) A={:?}; max relative drift of y h(x) over 100 steps {worst:.2e}", rp.k, rp.p, (rp.big_a.coeff(0), rp.big_a.coeff(1))))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("blow-up spectrum law", blow_up_spectrum),
        ("cusp restriction", cusp_restriction),
        ("hyperbolic cusp consistency", cusp_hyperbolic),
        ("reduction soundness", reduction_soundness),
        ("direction classification", direction_classification),
        ("saddle solver", saddle_solver),
        ("saddle asymptoticity cross-check", saddle_cross_check),
        ("node basin", node_basin),
        ("Leau-Fatou estimate", leau_fatou_estimate),
        ("hyperbolic containment", hyperbolic_containment),
        ("saddle-count bound", saddle_count_bound),
        ("toy-model first integral", toy_first_integral),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let r = f();
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok(d) => println!("PASS {:>2} {name}: {d} ({secs:.2}s)", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {d} ({secs:.2}s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
