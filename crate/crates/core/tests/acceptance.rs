//! Acceptance battery. Runs every criterion at its stated tolerance, prints one
//! PASS/FAIL line per criterion and exits nonzero if any fails.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::Instant;
use symlab::convex::Body;
use symlab::funcs::{battery, random_blob, random_field, FunctionSpec};
use symlab::gridfn::{kcontraction_test_fn, outer_minkowski_content};
use symlab::rearrange::{apply_set, Rearrangement, Side};
use symlab::verify::{self, CheckOptions, EnergyMode, EnergySpec, ModulusForm, Penalty, Supermodular, Verdict};
use symlab::young::{build_phi_body, luxemburg_norm};
use symlab::{ConvexBody, Grid, GridFunction, GridSet, Result, YoungFunction};

type Outcome = Result<(bool, String)>;

fn plane_grid(n: f64) -> Grid {
    Grid::centered(2, 4.0 / n, 2.0).unwrap()
}

/// 64² grid for the random-field criteria.
fn small_grid() -> Grid {
    Grid::new(2, 1.0 / 32.0, [-32, -32], [64, 64]).unwrap()
}

fn phis() -> Vec<(&'static str, YoungFunction)> {
    vec![
        ("t", YoungFunction::power(1.0).unwrap()),
        ("t^2", YoungFunction::power(2.0).unwrap()),
        ("t^4", YoungFunction::power(4.0).unwrap()),
        ("sqrt_shift", YoungFunction::SqrtShift),
    ]
}

fn exact_kinds(rng: &mut ChaCha8Rng) -> Vec<Rearrangement> {
    let h = small_grid().h();
    let offset = rng.gen_range(-8..=8) as f64 * h / 2.0;
    let side = if rng.gen_bool(0.5) { Side::Plus } else { Side::Minus };
    vec![
        Rearrangement::sym_decreasing(2),
        Rearrangement::Steiner { axis: 0, center: 0.0 },
        Rearrangement::Steiner { axis: 1, center: 0.0 },
        Rearrangement::Schwarz { center: vec![0.0, 0.0] },
        Rearrangement::Polarization { axis: rng.gen_range(0..2), offset, positive_side: side },
    ]
}

fn c1_equimeasurability() -> Outcome {
    let g = small_grid();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut runs = 0;
    let mut bad = 0;
    for k in 0..50 {
        let f = random_field(&g, &mut rng, 0.7, 10)?;
        for t in exact_kinds(&mut rng) {
            let r = verify::equimeasurable(&CheckOptions::named(format!("field{k}")), &t, &f)?;
            runs += 1;
            if r.lhs != 0.0 || r.details["multiset_equal"] != 1.0 {
                bad += 1;
            }
        }
    }
    Ok((bad == 0, format!("{runs} (operator, field) pairs, {bad} with unequal value multisets")))
}

fn c2_contraction_crz() -> Outcome {
    let g = small_grid();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = f64::INFINITY;
    let mut runs = 0;
    for k in 0..50 {
        let f = random_field(&g, &mut rng, 0.7, 10)?;
        let h = random_field(&g, &mut rng, 0.7, 10)?;
        for t in exact_kinds(&mut rng) {
            let o = CheckOptions::named(format!("pair{k}"));
            for p in [1.0, 2.0, 4.0] {
                let r = verify::lp_contraction(&o, &t, &f, &h, Penalty::AbsPow(p))?;
                worst = worst.min(r.rhs - r.lhs);
                runs += 1;
            }
            for func in [Supermodular::Product, Supermodular::Min] {
                let r = verify::crz(&o, &t, &f, &h, func, k)?;
                worst = worst.min(r.rhs - r.lhs);
                runs += 1;
            }
        }
    }
    Ok((worst >= -1e-9, format!("{runs} comparisons incl. Hardy-Littlewood, worst margin {worst:.3e}")))
}

fn energy_battery(t: &Rearrangement, body: Option<&ConvexBody>, mode: EnergyMode, refine: bool) -> Result<(usize, usize, f64)> {
    let g = plane_grid(256.0);
    let mut runs = 0;
    let mut failed = 0;
    let mut worst_ratio: f64 = 0.0;
    for (name, spec) in battery() {
        for (pn, phi) in phis() {
            let e = EnergySpec { phi, body: body.cloned(), level: None, mode, refine };
            let r = verify::polya_szego(&CheckOptions::named(format!("{name}/{pn}")), t, &spec, &g, &e)?;
            runs += 1;
            if r.verdict != Verdict::Holds {
                failed += 1;
                println!("    {} {}: lhs {:.6} rhs {:.6} tol {:.3e} {:?}", r.name, r.verdict.as_str(), r.lhs, r.rhs, r.tolerance, r.details);
            }
            worst_ratio = worst_ratio.max((r.lhs - r.rhs) / r.tolerance);
        }
    }
    Ok((runs, failed, worst_ratio))
}

fn c3_polya_szego() -> Outcome {
    let t = Rearrangement::sym_decreasing(2);
    let (runs, failed, worst) = energy_battery(&t, None, EnergyMode::Inequality, true)?;
    let g = plane_grid(256.0);
    let e = EnergySpec { phi: YoungFunction::power(2.0)?, body: None, level: None, mode: EnergyMode::Inequality, refine: false };
    let cone = verify::polya_szego(&CheckOptions::named("cone"), &t, &FunctionSpec::cone(ConvexBody::unit_ball(2)), &g, &e)?;
    let cone_ok = (cone.lhs / PI - 1.0).abs() < 0.02 && (cone.rhs / PI - 1.0).abs() < 0.02;
    Ok((
        failed == 0 && cone_ok,
        format!(
            "{runs} runs at h = 4/256 with h/2 deficit shrink, {failed} failed, worst (lhs-rhs)/tol {worst:.3}; cone t^2: {:.4} vs {:.4} (pi = {PI:.4})",
            cone.lhs, cone.rhs
        ),
    ))
}

fn c4_polarization_equality() -> Outcome {
    let h = plane_grid(256.0).h();
    let mut runs = 0;
    let mut failed = 0;
    let mut worst: f64 = 0.0;
    for (axis, offset, side) in [(0, 0.125 + h / 2.0, Side::Minus), (1, -0.25 - h / 2.0, Side::Plus)] {
        let t = Rearrangement::Polarization { axis, offset, positive_side: side };
        let (r, f, w) = energy_battery(&t, None, EnergyMode::Equality, true)?;
        runs += r;
        failed += f;
        worst = worst.max(w);
    }
    Ok((failed == 0, format!("{runs} runs over two hyperplanes, {failed} failed, worst |dE|/tol {worst:.3}, all gaps shrink at h/2")))
}

fn c5_anisotropic() -> Outcome {
    let mut runs = 0;
    let mut failed = 0;
    let mut worst: f64 = 0.0;
    for k in [ConvexBody::square(1.0)?, ConvexBody::regular_polygon(6, 1.0, 0.0)?] {
        let t = Rearrangement::KSchwarz { body: k.clone() };
        let (r, f, w) = energy_battery(&t, Some(&k), EnergyMode::Inequality, true)?;
        runs += r;
        failed += f;
        worst = worst.max(w);
    }
    Ok((failed == 0, format!("{runs} runs (square, hexagon), {failed} failed, worst (lhs-rhs)/tol {worst:.3}")))
}

fn c6_energy_counterexample() -> Outcome {
    let g = plane_grid(512.0);
    let square = ConvexBody::square_of_area_pi();
    let o = CheckOptions::counterexample("square");
    let p1 = verify::energy_counterexample(&o, &g, &square, 1.0)?;
    let p2 = verify::energy_counterexample(&o, &g, &square, 2.0)?;
    let disk = ConvexBody::ball(vec![0.3, 0.0], 1.0)?;
    let d1 = verify::energy_counterexample(&CheckOptions::named("disk"), &g, &disk, 1.0)?;
    let near = |x: f64, want: f64| (x / want - 1.0).abs() < 0.02;
    let ok = p1.verdict == Verdict::ViolatedAsExpected
        && p2.verdict == Verdict::ViolatedAsExpected
        && near(p1.lhs, 2.0 * PI.sqrt())
        && near(p1.rhs, PI)
        && near(p2.lhs, 4.0)
        && near(p2.rhs, PI)
        && d1.verdict == Verdict::Holds;
    Ok((
        ok,
        format!(
            "square p=1 {:.4} vs {:.4} ({}), p=2 {:.4} vs {:.4} ({}), translated disk p=1 {:.4} vs {:.4} ({})",
            p1.lhs,
            p1.rhs,
            p1.verdict.as_str(),
            p2.lhs,
            p2.rhs,
            p2.verdict.as_str(),
            d1.lhs,
            d1.rhs,
            d1.verdict.as_str()
        ),
    ))
}

fn c7_modulus_counterexample() -> Outcome {
    let g = plane_grid(512.0);
    let mut ok = true;
    let mut parts = vec![];
    for d in [0.05, 0.1] {
        let r = verify::modulus_counterexample(&CheckOptions::counterexample(format!("d={d}")), &g, d)?;
        let probe_err = (r.details["tf_probe"] - (1.0 - 3.0 * d)).abs();
        ok &= r.verdict == Verdict::ViolatedAsExpected && r.details["tf_origin"] == 1.0 && probe_err <= 3.0 * g.h() && r.lhs > r.rhs;
        parts.push(format!("d={d}: w(Tf) {:.4} > w(f) {:.4}, Tf(o) = {}, probe err {probe_err:.4}", r.lhs, r.rhs, r.details["tf_origin"]));
    }
    Ok((ok, parts.join("; ")))
}

fn c8_smoothing_modulus_agreement() -> Outcome {
    let g = plane_grid(256.0);
    let h = g.h();
    let ball = ConvexBody::unit_ball(2);
    let square = ConvexBody::square(1.0)?;
    let sets: Vec<(&str, GridSet)> = vec![
        ("disk", GridSet::from_fn(g, |x| (x[0] - 0.1).hypot(x[1]) <= 0.25)),
        ("two_disks", GridSet::from_fn(g, |x| (x[0] + 0.15).hypot(x[1] - 0.1) <= 0.2 || (x[0] - 0.1).hypot(x[1] + 0.05) <= 0.15)),
        ("box", GridSet::from_fn(g, |x| (-0.2..=0.3).contains(&x[0]) && (-0.25..=0.15).contains(&x[1]))),
    ];
    let ops = [
        Rearrangement::sym_decreasing(2),
        Rearrangement::Steiner { axis: 0, center: 0.0 },
        Rearrangement::Polarization { axis: 0, offset: -0.125 - h / 2.0, positive_side: Side::Plus },
        Rearrangement::KSchwarz { body: ConvexBody::square_of_area_pi() },
    ];
    let (d, d_mod) = (1.0, [0.5, 0.8]);
    let mut scenarios = 0;
    let mut agree = 0;
    let mut violated = 0;
    for (sname, a) in &sets {
        for k in [&ball, &square] {
            let f = kcontraction_test_fn(a, k, d)?;
            for t in &ops {
                let o = CheckOptions::named(format!("{sname}/{}", t.name()));
                let s = verify::smoothing(&o, t, a, k, d)?;
                let m = verify::modulus_reduction(&o, t, &f, k, &d_mod, ModulusForm::Sharp)?;
                scenarios += 1;
                if s.verdict == m.verdict {
                    agree += 1;
                } else {
                    println!(
                        "    disagree {} K={}: smoothing {} (depth {:.4}), modulus {} ({:.4} vs {:.4} + {:.4})",
                        o.name,
                        if k.is_o_symmetric() && k.vertices().is_some() { "square" } else { "disk" },
                        s.verdict.as_str(),
                        s.lhs,
                        m.verdict.as_str(),
                        m.lhs,
                        m.rhs,
                        m.tolerance
                    );
                }
                if s.verdict != Verdict::Holds {
                    violated += 1;
                }
            }
        }
    }
    Ok((agree == scenarios && scenarios >= 20, format!("{agree}/{scenarios} scenarios agree ({violated} non-smoothing)")))
}

fn c9_isoperimetric() -> Outcome {
    let g = plane_grid(256.0);
    let h = g.h();
    let ball = ConvexBody::unit_ball(2);
    let square = GridSet::from_fn(g, |x| x[0].abs() <= 0.5 && x[1].abs() <= 0.5);
    let ops = [
        Rearrangement::sym_decreasing(2),
        Rearrangement::Steiner { axis: 0, center: 0.0 },
        Rearrangement::Steiner { axis: 1, center: 0.25 },
        Rearrangement::Polarization { axis: 1, offset: 0.375 + h / 2.0, positive_side: Side::Plus },
    ];
    let mut worst: f64 = 0.0;
    for t in &ops {
        let c = outer_minkowski_content(&apply_set(t, &square)?, &ball, &verify::planar_eps(h))?;
        worst = worst.max(c.value);
    }
    let sym = Rearrangement::sym_decreasing(2);
    let mut ball_cells = 0.0;
    for radius in [0.1, 0.37, 0.5, 0.83, 1.2] {
        ball_cells += verify::ball_image(&CheckOptions::named("ball"), &sym, &g, radius)?.lhs;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut blobs_ok = 0;
    for k in 0..5 {
        let blob = random_blob(&g, &mut rng, 4, 0.5, (0.15, 0.4));
        if verify::isoperimetric(&CheckOptions::named(format!("blob{k}")), &sym, &blob)?.verdict == Verdict::Holds {
            blobs_ok += 1;
        }
    }
    let ok = worst <= 4.0 * 1.04 && ball_cells == 0.0 && blobs_ok == 5;
    Ok((ok, format!("max image content of unit square {worst:.4} (<= 4.16), ball mismatches {ball_cells}, blobs reduced {blobs_ok}/5")))
}

fn c10_content_identity() -> Outcome {
    let g = plane_grid(256.0);
    let b3 = ConvexBody::unit_ball(3);
    let start = Instant::now();
    let specs = battery();
    let pick = |name: &str| specs.iter().find(|(n, _)| n == name).expect("battery member").1.clone();
    let cases = [("cone", 0.5), ("bump", 0.3), ("bump_pair", 0.4), ("cone_plus_bump", 0.35), ("cone_shifted", 0.25)];
    let mut ok = true;
    let mut cone_value = 0.0;
    let mut worst: f64 = 0.0;
    for (name, a) in cases {
        let f = pick(name).sample(&g)?;
        let r = verify::content_formula(&CheckOptions::named(name), &f, a, &b3)?;
        ok &= r.verdict == Verdict::Holds;
        println!("    {name}: dilation {:.4} graph {:.4}", r.details["dilation_estimate"], r.details["graph_integral"]);
        worst = worst.max(r.lhs / r.details["graph_integral"]);
        if name == "cone" {
            cone_value = r.details["graph_integral"];
            ok &= (r.details["dilation_estimate"] / (PI / 4.0 * (1.0 + 2f64.sqrt())) - 1.0).abs() < 0.05;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs <= 300.0;
    Ok((ok, format!("5 functions, worst relative gap {:.2}%, cone graph integral {cone_value:.4} (exact 1.8961), {secs:.1}s", 100.0 * worst)))
}

fn c11_subgraph_core() -> Outcome {
    let g = plane_grid(256.0);
    let b3 = ConvexBody::unit_ball(3);
    let specs = battery();
    let sym = Rearrangement::sym_decreasing(2);
    let asym_tent = FunctionSpec::Tent { center: vec![0.15, -0.1], half_widths: vec![1.0, 0.55], height: 1.0 };
    let cases: Vec<(String, FunctionSpec, f64, f64)> = vec![
        ("asym_tent".into(), asym_tent, 0.3, 0.2),
        ("cone_quad".into(), specs[2].1.clone(), 0.3, 0.15),
        ("bump_pair".into(), specs[7].1.clone(), 0.2, 0.2),
        ("tent_plus_cone".into(), specs[9].1.clone(), 0.25, 0.1),
        ("cone".into(), specs[0].1.clone(), 0.4, 0.2),
    ];
    let mut held = 0;
    let mut parts = vec![];
    for (name, spec, a, d) in cases {
        let f = spec.sample(&g)?;
        let r = verify::subgraph_core(&CheckOptions::named(&name), &sym, &f, a, d, &b3)?;
        if r.verdict == Verdict::Holds {
            held += 1;
        }
        parts.push(format!("{name} {:.4}/{:.4}", r.lhs, r.rhs));
    }
    Ok((held == 5, format!("{held}/5 hold: {}", parts.join(", "))))
}

fn c12_young() -> Outcome {
    let phi_min = YoungFunction::PhiMin;
    let conj = phi_min.conjugate()?;
    let ts: Vec<f64> = (0..=400).map(|i| i as f64 * 0.01).collect();
    let conj_ok = ts.iter().all(|&t| {
        let (a, b) = (conj.value(t), YoungFunction::PhiMax.value(t));
        a == b || (a - b).abs() < 1e-12
    });
    let g = plane_grid(128.0);
    let a = GridSet::from_fn(g, |x| x[0].hypot(x[1]) <= 0.6 || (x[0] - 0.5).abs() < 0.3 && x[1].abs() < 0.8);
    let ind: GridFunction = a.indicator();
    let mut lux_err: f64 = 0.0;
    for p in [1.0, 1.5, 2.0, 3.0, 4.0] {
        let want = a.measure().powf(1.0 / p);
        lux_err = lux_err.max((luxemburg_norm(&YoungFunction::power(p)?, &ind) - want).abs() / want);
    }
    let k = ConvexBody::regular_polygon(5, 1.0, 0.3)?;
    let phi = YoungFunction::power(2.0)?;
    let big_m = 1.5;
    let c = build_phi_body(&phi, &k, big_m)?;
    let (_, _, _, b) = c.params();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut id_err: f64 = 0.0;
    let mut sampled = 0;
    while sampled < 1000 {
        let y = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let hk = k.support_of(&y);
        if hk > big_m {
            continue;
        }
        sampled += 1;
        let want = 1.0 + b * phi.value(hk);
        id_err = id_err.max((Body::support_of(&c, &[y[0], y[1], 1.0]) - want).abs());
    }
    let mut sub_worst: f64 = 0.0;
    for _ in 0..1000 {
        let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let y: Vec<f64> = (0..3).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let s: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let (hx, hy, hs) = (Body::support_of(&c, &x), Body::support_of(&c, &y), Body::support_of(&c, &s));
        sub_worst = sub_worst.max((hs - hx - hy) / (hx + hy).max(1e-300));
    }
    let ok = conj_ok && lux_err <= 1e-8 && id_err <= 1e-9 && sub_worst <= 1e-9;
    Ok((
        ok,
        format!("conj(phi_min) = phi_max: {conj_ok}; Luxemburg rel err {lux_err:.1e}; h_C(y,1) err {id_err:.1e}; subadditivity excess {sub_worst:.1e}"),
    ))
}

fn c13_flow() -> Outcome {
    let g = plane_grid(128.0);
    let blob = FunctionSpec::Sum(vec![
        FunctionSpec::Bump { center: vec![0.35, -0.2], radius: 0.5, height: 1.0 },
        FunctionSpec::Tent { center: vec![-0.3, 0.25], half_widths: vec![0.4, 0.25], height: 0.6 },
    ]);
    let f = blob.sample(&g)?;
    let r = verify::polarization_flow(&CheckOptions::named("flow"), &f, 500, 42)?;
    let ok = r.verdict == Verdict::Holds && r.details["final_distance"] < r.details["initial_distance"];
    Ok((ok, format!("max step increase {:.2e}, distance {:.5} -> {:.5}", r.lhs, r.details["initial_distance"], r.details["final_distance"])))
}

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("exact equimeasurability", c1_equimeasurability),
        ("L^p contraction and CRZ", c2_contraction_crz),
        ("Polya-Szego for symmetric decreasing", c3_polya_szego),
        ("polarization energy equality", c4_polarization_equality),
        ("anisotropic Polya-Szego for K-Schwarz", c5_anisotropic),
        ("K-Schwarz energy counterexample", c6_energy_counterexample),
        ("K-Schwarz modulus counterexample", c7_modulus_counterexample),
        ("smoothing and modulus reduction agree", c8_smoothing_modulus_agreement),
        ("isoperimetric consequences", c9_isoperimetric),
        ("subgraph content identity", c10_content_identity),
        ("subgraph dilation inequality", c11_subgraph_core),
        ("Young-function machinery", c12_young),
        ("polarization flow", c13_flow),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if only.is_some_and(|k| k != i + 1) {
            continue;
        }
        let start = Instant::now();
        let (ok, summary) = match run() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failures += 1;
        }
        println!("{} [{:>2}] {name}: {summary} ({:.1}s)", if ok { "PASS" } else { "FAIL" }, i + 1, start.elapsed().as_secs_f64());
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
