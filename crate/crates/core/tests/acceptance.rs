//! End-to-end acceptance checks, one line per criterion.

use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use coupled::bilinear::{catalog_candidates, catalog_map, exact_zero_search, scalar, singular_search, Algebra, BilinearKind, BilinearMap};
use coupled::bounds::{reproduce_table, Family};
use coupled::kneser::kneser_graph;
use coupled::maps::{
    bilinear_phi_z2, bilinear_product_map, coindex_witness, compose_bilinear, defect, embedding, equivariance_residual,
    mixed_partials_check, phi_z2, random_additive, random_trig, simplex_pair_map, verify_embedding, Domain, JointObstruction, MapKind,
    ProductMap, PsiMap,
};
use coupled::par::{map_indexed, Execution};
use coupled::search::{find_equivariant_zero, minimize_defect, psi_minima, verify_witness, SearchConfig, Verdict, ZeroConfig};
use coupled::simplicial::{dist_to_subcomplex, named, skeleton, three_points_power, SimplicialComplex};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Smallest `c` admitting a proper coloring, by exhaustive backtracking.
fn brute_force_chromatic(n: usize, edges: &[(usize, usize)]) -> usize {
    fn extend(v: usize, n: usize, c: usize, adj: &[Vec<usize>], colors: &mut Vec<usize>) -> bool {
        if v == n {
            return true;
        }
        for col in 0..c {
            if adj[v].iter().all(|&u| u >= v || colors[u] != col) {
                colors[v] = col;
                if extend(v + 1, n, c, adj, colors) {
                    return true;
                }
            }
        }
        false
    }
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    (1..=n.max(1)).find(|&c| extend(0, n, c, &adj, &mut vec![0; n])).unwrap_or(0)
}

/// Minimal nonfaces and their disjointness graph, recomputed from the facets.
fn oracle_kneser(k: &SimplicialComplex) -> (usize, Vec<(usize, usize)>) {
    let n = k.n();
    let is_face = |s: u64| k.facets().iter().any(|&f| f & s == s);
    let minimal: Vec<u64> = (1u64..(1 << n))
        .filter(|&s| !is_face(s) && (0..n).filter(|i| s >> i & 1 == 1).all(|i| is_face(s & !(1 << i))))
        .collect();
    let mut edges = Vec::new();
    for i in 0..minimal.len() {
        for j in i + 1..minimal.len() {
            if minimal[i] & minimal[j] == 0 {
                edges.push((i, j));
            }
        }
    }
    (minimal.len(), edges)
}

fn criterion_1() -> Outcome {
    let mut cases: Vec<(String, SimplicialComplex, usize)> = vec![
        ("rp2_6".into(), named("rp2_6").unwrap(), 1),
        ("cp2_9".into(), named("cp2_9").unwrap(), 1),
    ];
    for k in 0..=4 {
        cases.push((format!("three_points_power({k})"), three_points_power(k).unwrap(), k + 1));
        cases.push((format!("skeleton({},{k})", 2 * k + 2), skeleton(2 * k + 2, k).unwrap(), 1));
    }
    for (id, k, expected) in &cases {
        let g = kneser_graph(k, true).map_err(|e| e.to_string())?;
        let (chi, coloring) = g.chromatic_number();
        ensure(chi == *expected, || format!("{id}: chi {chi}, expected {expected}"))?;
        ensure(coloring.is_proper(g.graph()), || format!("{id}: improper witness coloring"))?;
        let (nv, edges) = oracle_kneser(k);
        ensure(nv == g.vertices().len() && edges.len() == g.graph().edge_count(), || {
            format!("{id}: graph differs from oracle")
        })?;
        if nv <= 12 {
            let brute = brute_force_chromatic(nv, &edges);
            ensure(brute == chi, || format!("{id}: brute force gives {brute}, engine {chi}"))?;
        } else {
            ensure(edges.is_empty() == (chi == 1), || format!("{id}: edgeless/chi mismatch"))?;
        }
    }
    for id in ["rp2_6", "cp2_9"] {
        let k = named(id).unwrap();
        let all = kneser_graph(&k, false).map_err(|e| e.to_string())?;
        ensure(all.is_edgeless(), || format!("{id}: two nonfaces are disjoint"))?;
    }
    Ok(format!("{} complexes, all chromatic numbers match", cases.len()))
}

fn criterion_2() -> Outcome {
    let rows = reproduce_table(Execution::Parallel).map_err(|e| e.to_string())?;
    let mut expected: Vec<(Family, String, String, usize)> = Vec::new();
    let three = |k: usize| format!("three_points_power({k})");
    let skel = |k: usize| format!("skeleton({},{k})", 2 * k + 2);
    for p in 0..=8usize {
        for q in 0..=8usize {
            if p & q == 0 {
                let v = 2 * p + 2 * q + 1;
                expected.push((Family::ComplexPairs, three(p), three(q), v));
                expected.push((Family::ComplexPairs, skel(p), three(q), v));
                expected.push((Family::ComplexPairs, skel(p), skel(q), v));
            }
        }
    }
    for k in 1..=16usize {
        expected.push((Family::Rp2Sphere, "rp2_6".into(), format!("S^{k}"), 4 * (k / 4) + 4));
    }
    for k in 1..=24usize {
        let v = if k.is_multiple_of(8) { k + 7 } else { 8 * k.div_ceil(8) };
        expected.push((Family::Cp2Sphere, "cp2_9".into(), format!("S^{k}"), v));
    }
    for k in 0..=6usize {
        expected.push((Family::SkeletonCircle, skel(k), "S^1".into(), 2 * k + 2));
        expected.push((Family::ThreePointsCircle, three(k), "S^1".into(), 2 * k + 2));
    }
    for q in 0..=4usize {
        expected.push((Family::Rp2Skeleton, "rp2_6".into(), skel(2 * q), 4 * q + 4));
    }
    ensure(rows.len() == expected.len(), || {
        format!("{} rows, expected {}", rows.len(), expected.len())
    })?;
    for (row, (family, x, y, v)) in rows.iter().zip(&expected) {
        ensure(row.family == *family && &row.x == x && &row.y == y, || {
            format!("unexpected row {row:?}")
        })?;
        ensure(row.lower == Some(*v) && row.upper == *v, || {
            format!("{x} × {y}: L={:?} U={}, closed form {v}", row.lower, row.upper)
        })?;
    }
    Ok(format!("{} rows equal the closed forms", rows.len()))
}

fn exact_eval(b: &BilinearMap, x: &[i128], y: &[i128]) -> Vec<i128> {
    let mut out = vec![0i128; b.d()];
    for t in b.terms() {
        out[t.k] += t.coef as i128 * x[t.i] * y[t.j];
    }
    out
}

fn criterion_3() -> Outcome {
    const SAMPLES: usize = 100_000;
    let pairs: Vec<(usize, usize)> = (1..=16).flat_map(|a| (1..=16).map(move |b| (a, b))).collect();
    let failures: Vec<String> = map_indexed(pairs.len(), Execution::Parallel, |i| {
        let (a, b) = pairs[i];
        let map = catalog_map(a, b).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + i as u64);
        for _ in 0..SAMPLES {
            let x = coupled::bilinear::random_rational_direction(a, &mut rng);
            let y = coupled::bilinear::random_rational_direction(b, &mut rng);
            if exact_eval(&map, &x, &y).iter().all(|v| *v == 0) {
                return Some(format!("({a},{b}) vanishes at {x:?}, {y:?}"));
            }
        }
        if exact_zero_search(&map, 1000, i as u64).is_some() {
            return Some(format!("({a},{b}) library sampler found a zero"));
        }
        for cand in catalog_candidates(a, b).unwrap() {
            if !matches!(cand.kind(), BilinearKind::ExplicitTensor) && cand.certify().is_err() {
                return Some(format!("({a},{b}) candidate {:?} not certified", cand.trace()));
            }
        }
        let s = singular_search(&map, 100, 1, Execution::Sequential);
        if s.min_norm <= 1e-6 {
            return Some(format!("({a},{b}) singular search reached {:.3e}", s.min_norm));
        }
        None
    })
    .into_iter()
    .flatten()
    .collect();
    ensure(failures.is_empty(), || failures.join("; "))?;
    Ok(format!("{} catalog maps, {SAMPLES} exact samples each", pairs.len()))
}

fn random_box_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn rational(rng: &mut ChaCha8Rng, n: usize) -> Vec<Ratio<i128>> {
    (0..n)
        .map(|_| Ratio::new(rng.gen_range(-1000..=1000), rng.gen_range(1..=12)))
        .collect()
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for a in 1..=16 {
        for b in 1..=16 {
            let map = catalog_map(a, b).unwrap();
            let f = bilinear_product_map(&map, Domain::unit_box(a), Domain::unit_box(b)).map_err(|e| e.to_string())?;
            for _ in 0..10_000 {
                let (x1, x2) = (random_box_point(&mut rng, a), random_box_point(&mut rng, a));
                let (y1, y2) = (random_box_point(&mut rng, b), random_box_point(&mut rng, b));
                let d = defect(&f, &x1, &y1, &x2, &y2).map_err(|e| e.to_string())?;
                let dx: Vec<f64> = x1.iter().zip(&x2).map(|(p, q)| p - q).collect();
                let dy: Vec<f64> = y1.iter().zip(&y2).map(|(p, q)| p - q).collect();
                let direct = map.evaluate(&dx, &dy).unwrap();
                let scale = [f.eval(&x1, &y1), f.eval(&x2, &y2), f.eval(&x1, &y2), f.eval(&x2, &y1)]
                    .iter()
                    .flatten()
                    .fold(1.0f64, |m, v| m.max(v.abs()));
                let err = d.iter().zip(&direct).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt() / scale;
                worst = worst.max(err);
            }
            let mut qr = ChaCha8Rng::seed_from_u64((a * 100 + b) as u64);
            for _ in 0..20 {
                let (x, y) = (rational(&mut qr, a), rational(&mut qr, b));
                let phi = bilinear_phi_z2(&map, &x, &y).map_err(|e| e.to_string())?;
                let four: Vec<Ratio<i128>> = map.evaluate(&x, &y).unwrap().into_iter().map(|v| v * Ratio::from(4)).collect();
                ensure(phi == four, || format!("({a},{b}): phi is not 4B"))?;
            }
        }
    }
    ensure(worst <= 1e-12, || format!("defect identity error {worst:.3e}"))?;
    for seed in 0..20 {
        let f = random_additive(seed, Domain::Sphere { m: 2 }, Domain::Sphere { m: 3 }, 4, 3);
        for _ in 0..100 {
            let s = |rng: &mut ChaCha8Rng, m: usize| {
                let v = random_box_point(rng, m + 1);
                let r = v.iter().map(|t| t * t).sum::<f64>().sqrt();
                v.into_iter().map(|t| t / r).collect::<Vec<_>>()
            };
            let (x1, x2, y1, y2) = (s(&mut rng, 2), s(&mut rng, 2), s(&mut rng, 3), s(&mut rng, 3));
            let d = defect(&f, &x1, &y1, &x2, &y2).map_err(|e| e.to_string())?;
            let a1 = f.eval(&x1, &y1);
            ensure(
                d.iter().all(|v| v.abs() <= 1e-12 * (1.0 + a1.iter().map(|t| t.abs()).sum::<f64>())),
                || format!("additive defect {d:?}"),
            )?;
        }
    }
    Ok(format!("max relative defect error {worst:.1e}; phi = 4B exactly"))
}

fn criterion_5() -> Outcome {
    let mut a_ok = 0;
    for seed in 0..20 {
        let f = random_trig(seed, Domain::Sphere { m: 1 }, Domain::Sphere { m: 2 }, 3, 2);
        let cfg = SearchConfig {
            z2: true,
            seed,
            ..SearchConfig::default()
        };
        let r = minimize_defect(&f, &cfg).map_err(|e| e.to_string())?;
        if let Some(w) = r.witness() {
            if w.defect < 1e-6 && verify_witness(&f, &w, 1e-6) {
                a_ok += 1;
            }
        }
    }
    let mut b_ok = 0;
    for seed in 0..20 {
        let f = random_trig(seed, Domain::simplex(3).unwrap(), Domain::simplex(4).unwrap(), 3, 2);
        let g = simplex_pair_map(&f).map_err(|e| e.to_string())?;
        let r = find_equivariant_zero(
            &g,
            &ZeroConfig {
                seed,
                ..ZeroConfig::default()
            },
        )
        .map_err(|e| e.to_string())?;
        if r.verdict == Verdict::WitnessFound && r.norm < 1e-6 {
            b_ok += 1;
        }
    }
    let (k1, k2) = (skeleton(4, 1).unwrap(), skeleton(6, 2).unwrap());
    let mut c_ok = 0;
    for seed in 0..10 {
        let f = random_trig(seed, Domain::simplex(5).unwrap(), Domain::simplex(7).unwrap(), 6, 2);
        let g = JointObstruction::new(PsiMap::optimal(&k1).unwrap(), PsiMap::optimal(&k2).unwrap(), &f).map_err(|e| e.to_string())?;
        let r = find_equivariant_zero(
            &g,
            &ZeroConfig {
                seed,
                ..ZeroConfig::default()
            },
        )
        .map_err(|e| e.to_string())?;
        let (p, q) = (&r.witness.first, &r.witness.second);
        let halves = [p.lambda1, p.lambda2, q.lambda1, q.lambda2].iter().all(|l| (l - 0.5).abs() < 1e-3);
        let inside = [(&p.p1, &k1), (&p.p2, &k1), (&q.p1, &k2), (&q.p2, &k2)]
            .iter()
            .all(|(pt, k)| dist_to_subcomplex(&pt.weights, k).is_ok_and(|d| d < 1e-3));
        if r.verdict == Verdict::WitnessFound && halves && inside {
            c_ok += 1;
        }
    }
    let summary = format!("(a) {a_ok}/20, (b) {b_ok}/20, (c) {c_ok}/10");
    ensure(a_ok * 100 >= 95 * 20 && b_ok * 100 >= 95 * 20 && c_ok * 100 >= 95 * 10, || {
        summary.clone()
    })?;
    Ok(summary)
}

fn criterion_6() -> Outcome {
    let rp = embedding("rp2_r4").map_err(|e| e.to_string())?;
    let full = verify_embedding(&rp, 1_000_000, 10_000, 6);
    ensure(full.injective && full.min_image_distance > 0.0, || {
        format!("rp2_r4 sampling: {full:?}")
    })?;
    let f = compose_bilinear(&scalar(Algebra::H, 1).unwrap(), &rp, &rp).map_err(|e| e.to_string())?;
    let cert = f.certificate().ok_or("no structural certificate")?;
    ensure(cert.validates(), || "certificate chain does not validate".into())?;
    let cfg = SearchConfig {
        min_sep: 0.1,
        tol: 1e-4,
        starts: 200,
        seed: 6,
        ..SearchConfig::default()
    };
    let r = minimize_defect(&f, &cfg).map_err(|e| e.to_string())?;
    ensure(r.verdict == Verdict::NoWitnessBelowTolerance && r.budget.starts_run == 200, || {
        format!("search returned {:?}", r.verdict)
    })?;
    Ok(format!(
        "no witness in 200 starts (best defect {:.2e}); min class image distance {:.2e}, min singular value {:.2e}",
        r.defect, full.min_image_distance, full.min_singular_value
    ))
}

fn random_sphere(rng: &mut ChaCha8Rng, ambient: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..ambient).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect();
    let r = v.iter().map(|t| t * t).sum::<f64>().sqrt();
    v.into_iter().map(|t| t / r).collect()
}

fn criterion_7() -> Outcome {
    let mut found = 0;
    for (id, k) in [
        ("rp2_6", named("rp2_6").unwrap()),
        ("three_points_power(2)", three_points_power(2).unwrap()),
    ] {
        let psi = PsiMap::optimal(&k).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut worst = 0.0f64;
        for _ in 0..10_000 {
            let z = random_sphere(&mut rng, k.n());
            let w: Vec<f64> = z.iter().map(|t| -t).collect();
            let (a, b) = (psi.eval_sphere(&z).unwrap(), psi.eval_sphere(&w).unwrap());
            let scale = a.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            worst = worst.max(a.iter().zip(&b).map(|(p, q)| (p + q).abs()).fold(0.0, f64::max) / scale);
        }
        ensure(worst < 1e-12, || format!("{id}: antisymmetry residual {worst:.3e}"))?;
        for m in psi_minima(&psi, 200, 7, Execution::Parallel).into_iter().filter(|m| m.norm < 1e-6) {
            found += 1;
            let p = &m.point;
            let d1 = dist_to_subcomplex(&p.p1.weights, &k).map_err(|e| e.to_string())?;
            let d2 = dist_to_subcomplex(&p.p2.weights, &k).map_err(|e| e.to_string())?;
            ensure((p.lambda1 - 0.5).abs() < 1e-3 && d1 < 1e-3 && d2 < 1e-3, || {
                format!("{id}: near-zero with lambda {} and distances {d1:.2e}, {d2:.2e}", p.lambda1)
            })?;
        }
    }
    ensure(found > 0, || "no near-zeros found".into())?;
    Ok(format!("antisymmetry exact; {found} near-zeros localized"))
}

fn residual_suite(name: &str, g: &dyn coupled::maps::EquivariantMap, rng: &mut ChaCha8Rng) -> Result<f64, String> {
    let (m, n) = g.spheres();
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let (x, y) = (random_sphere(rng, m + 1), random_sphere(rng, n + 1));
        worst = worst.max(equivariance_residual(g, &x, &y));
    }
    ensure(worst < 1e-12, || format!("{name}: residual {worst:.3e}"))?;
    Ok(worst)
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let trig = random_trig(8, Domain::Sphere { m: 2 }, Domain::Sphere { m: 3 }, 5, 3);
    residual_suite("phi_z2", &phi_z2(&trig).unwrap(), &mut rng)?;
    let on_simplices = random_trig(9, Domain::simplex(3).unwrap(), Domain::simplex(4).unwrap(), 3, 2);
    residual_suite("simplex_pair_map", &simplex_pair_map(&on_simplices).unwrap(), &mut rng)?;
    let (k1, k2) = (named("rp2_6").unwrap(), three_points_power(2).unwrap());
    let f = random_trig(10, Domain::simplex(6).unwrap(), Domain::simplex(9).unwrap(), 4, 2);
    let joint = JointObstruction::new(PsiMap::optimal(&k1).unwrap(), PsiMap::optimal(&k2).unwrap(), &f).unwrap();
    residual_suite("joint_obstruction", &joint, &mut rng)?;
    let w = coindex_witness(&trig).unwrap().map;
    for _ in 0..10_000 {
        let (x, y) = (random_sphere(&mut rng, 3), random_sphere(&mut rng, 4));
        let ny: Vec<f64> = y.iter().map(|t| -t).collect();
        let (a, b) = (w.eval(&x, &y), w.eval(&x, &ny));
        ensure(a.iter().zip(&b).all(|(p, q)| *p == -*q), || "coindex witness is not odd".into())?;
    }

    // ∂²/∂x_i∂y_j of B(sin x, y) is cos(x_i)·T_{k i j}.
    let map = scalar(Algebra::H, 1).unwrap();
    let inner = map.clone();
    let f = ProductMap::new(Domain::unit_box(4), Domain::unit_box(4), 4, MapKind::Custom, move |x, y| {
        let s: Vec<f64> = x.iter().map(|t| t.sin()).collect();
        inner.evaluate(&s, y).unwrap()
    });
    let plain = bilinear_product_map(&map, Domain::unit_box(4), Domain::unit_box(4)).unwrap();
    let mut ratios = Vec::new();
    for _ in 0..20 {
        let x: Vec<f64> = (0..4).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let y: Vec<f64> = (0..4).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let mut exact = vec![vec![vec![0.0; 4]; 4]; 4];
        for t in map.terms() {
            exact[t.i][t.j][t.k] += t.coef as f64;
        }
        let err = |h: f64, g: &ProductMap, chain: bool| -> Result<(f64, bool), String> {
            let r = mixed_partials_check(g, &x, &y, h).map_err(|e| e.to_string())?;
            let mut e = 0.0f64;
            for i in 0..4 {
                for j in 0..4 {
                    for k in 0..4 {
                        let want = exact[i][j][k] * if chain { x[i].cos() } else { 1.0 };
                        e = e.max((r.estimates[i][j][k] - want).abs());
                    }
                }
            }
            Ok((e, r.nonsingular))
        };
        let (e1, ok1) = err(2e-2, &f, true)?;
        let (e2, ok2) = err(1e-2, &f, true)?;
        let (e3, ok3) = err(1e-2, &plain, false)?;
        ensure(ok1 && ok2 && ok3, || "mixed partials reported singular".into())?;
        ensure(e1 < 1e-3 && e3 < 1e-8, || format!("finite-difference errors {e1:.2e}, {e3:.2e}"))?;
        ratios.push(e2 / e1);
    }
    let worst = ratios.iter().fold(0.0f64, |m, r| m.max(*r));
    ensure(worst < 0.3, || format!("halving the step shrinks the error only by {worst:.3}"))?;
    Ok(format!("residuals < 1e-12; step-halving error ratio ≤ {worst:.3}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 8] = [
        ("Kneser chromatic numbers", criterion_1, Duration::from_secs(10)),
        ("bounds table", criterion_2, Duration::from_secs(30)),
        ("bilinear nonsingularity", criterion_3, Duration::from_secs(120)),
        ("defect identities", criterion_4, Duration::from_secs(600)),
        ("guaranteed witnesses", criterion_5, Duration::from_secs(600)),
        ("coupled-embedding consistency", criterion_6, Duration::from_secs(300)),
        ("coloring map properties", criterion_7, Duration::from_secs(600)),
        ("equivariance suite", criterion_8, Duration::from_secs(600)),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if elapsed > *limit => Err(format!("{msg}; took {elapsed:.1?}, limit {limit:?}")),
            other => other,
        };
        match outcome {
            Ok(msg) => println!("criterion {}: PASS {name}: {msg} ({elapsed:.1?})", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {msg} ({elapsed:.1?})", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
