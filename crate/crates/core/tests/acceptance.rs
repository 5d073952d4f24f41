//! Acceptance run: one PASS/FAIL line per criterion.

use std::time::Instant;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sasaki_tg::catalog::*;
use sasaki_tg::expedition::*;
use sasaki_tg::geometry::*;
use sasaki_tg::immersion::*;
use sasaki_tg::sasaki::*;

const CURVED: [ChartFamily; 5] =
    [ChartFamily::Cos, ChartFamily::Sin, ChartFamily::Cosh, ChartFamily::Sinh, ChartFamily::Exp];
const ALL: [ChartFamily; 8] = [
    ChartFamily::Flat,
    ChartFamily::Cos,
    ChartFamily::Sin,
    ChartFamily::Cosh,
    ChartFamily::Sinh,
    ChartFamily::Exp,
    ChartFamily::Linear,
    ChartFamily::Cubic,
];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn builtin(name: &str) -> ScenarioConfig {
    load_builtin(name).unwrap().0
}

fn run(config: &ScenarioConfig, grid: Option<usize>) -> (ScenarioReport, f64) {
    let t = Instant::now();
    let r = run_config(config, None, &Overrides { tolerance: None, grid }).unwrap().report;
    (r, t.elapsed().as_secs_f64())
}

fn chart(f: ChartFamily) -> (ChartSpec, ChartMetric) {
    let spec = match f {
        ChartFamily::Flat => builtin("checks_flat").chart,
        ChartFamily::Linear => builtin("checks_linear").chart,
        ChartFamily::Cubic => builtin("checks_cubic").chart,
        _ => ChartSpec::constant(f, 1.0),
    };
    let c = spec.build().unwrap();
    (spec, c)
}

fn point(rng: &mut ChaCha8Rng, c: &ChartMetric) -> Vec2 {
    let d = c.domain().shrink(0.2);
    Vec2::new(rng.random_range(d.u.0..d.u.1), rng.random_range(d.v.0..d.v.1))
}

/// Worst positive control.
fn ac1() -> (Outcome, f64) {
    let mut worst = 0.0f64;
    let mut slowest = 0.0f64;
    let mut ok = true;
    for f in [ChartFamily::Cos, ChartFamily::Exp] {
        for name in ["fiber_sphere", "zero_section_sphere", "cylinder_sphere"] {
            let mut config = builtin(name);
            config.chart = ChartSpec::constant(f, 1.0);
            let (r, secs) = run(&config, Some(15));
            ok &= r.failures.is_empty() && r.max_residual <= 1e-6 && secs < 10.0;
            worst = worst.max(r.max_residual);
            slowest = slowest.max(secs);
        }
    }
    (outcome(ok, format!("max residual {worst:.2e}, slowest scenario {slowest:.2}s")), worst)
}

fn ac2(positive: f64) -> Outcome {
    let mut least = f64::MAX;
    for name in ["ruled_curved_sphere", "rotated_cylinder_sphere", "graph_frame_sphere"] {
        least = least.min(run(&builtin(name), Some(15)).0.max_residual);
    }
    let ok = least >= 1e-3 && least >= 1e3 * positive;
    outcome(ok, format!("min residual {least:.2e}, separation {:.1e}", least / positive.max(f64::MIN_POSITIVE)))
}

fn ac3() -> Outcome {
    let res = |n: &str| run(&builtin(n), None).0.max_residual;
    let flat = res("tm_restriction_flat");
    let equator = res("tm_restriction_equator");
    let cubic = res("tm_restriction_cubic");
    let hyperplane = res("affine_hyperplane_flat");
    let failing = ["affine_quadratic_flat", "affine_sphere", "affine_hyperbolic", "affine_offset_sphere"].map(res);
    let least_failing = failing.iter().fold(f64::MAX, |m, &x| m.min(x));
    let ok = flat <= 1e-6 && equator >= 1e-3 && cubic <= 1e-5 && hyperplane <= 1e-6 && least_failing >= 1e-3;
    outcome(
        ok,
        format!(
            "line {flat:.1e}, equator {equator:.1e}, cubic {cubic:.1e}, hyperplane {hyperplane:.1e}, \
             failing families ≥ {least_failing:.1e}"
        ),
    )
}

fn random_field(rng: &mut ChaCha8Rng, kind: usize) -> VectorField {
    let mut r = |s: f64| rng.random_range(-s..s);
    match kind {
        0 => VectorField::Zero,
        1 => VectorField::constant(0.3 + r(0.5).abs(), r(0.8)),
        _ => VectorField::Affine { offset: [0.3 + r(0.5).abs(), r(0.8)], matrix: [[r(0.5), r(0.5)], [r(0.5), r(0.5)]] },
    }
}

fn ac4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let t = Thresholds::default();
    let (mut agree, mut tg) = (0, 0);
    for i in 0..50 {
        let f = [ChartFamily::Flat, ChartFamily::Cos, ChartFamily::Exp, ChartFamily::Sin, ChartFamily::Sinh][i % 5];
        let (_, c) = chart(f);
        let xi = random_field(&mut rng, (i / 5) % 3);
        let q = point(&mut rng, &c);
        let x = Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let y = Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let g = c.metric_at(&q).unwrap();
        let e =
            eq5_residual(&c, &xi, &VectorField::constant(x[0], x[1]), &VectorField::constant(y[0], y[1]), q).unwrap();
        let pde = t.classify(norm(&g, &e));
        let imm = make_vector_field_graph(&c, xi.clone()).unwrap();
        let sf = second_fundamental_form(&imm, &[q[0], q[1]]).unwrap();
        let mut ii = Vec4::zeros();
        for a in 0..2 {
            for b in 0..2 {
                ii += sf.get(a, b) * (x[a] * y[b]);
            }
        }
        let big_g = sasaki_metric_at(&c, &TangentBundlePoint::new(q, xi.value(&c, &q).unwrap())).unwrap();
        let ambient = t.classify(ii.dot(&(big_g * ii)).sqrt());
        if pde == ambient && pde != Verdict::Inconclusive {
            agree += 1;
        }
        if pde == Verdict::TotallyGeodesic {
            tg += 1;
        }
    }

    let mut split = 0.0f64;
    for _ in 0..50 {
        let f = CURVED[rng.random_range(0..5)];
        let (_, c) = chart(f);
        let q = point(&mut rng, &c);
        let rho = ScalarField::affine(1.0, rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3));
        let omega =
            ScalarField::affine(rng.random_range(-1.0..1.0), rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
        let xi = VectorField::Polar { rho: rho.clone(), omega: omega.clone() };
        let e = VectorField::Polar { rho: ScalarField::constant(1.0), omega };
        let x = VectorField::constant(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let l1 = lemma1_residual(&c, &rho, &e, &x, q).unwrap();
        let r7 = eq7_residual(&c, &xi, &x, q).unwrap();
        let g = c.metric_at(&q).unwrap();
        let ev = e.value(&c, &q).unwrap();
        let par = inner(&g, &r7, &ev);
        split = split.max((l1.parallel - par).abs()).max(norm(&g, &(l1.normal + (r7 - ev * par))));
    }
    outcome(
        agree == 50 && split <= 1e-6,
        format!("verdicts agree on {agree}/50 ({tg} totally geodesic), decomposition error {split:.1e}"),
    )
}

fn checks(kinds: &[CheckKind], samples: usize) -> (bool, Vec<(CheckKind, f64)>) {
    let mut ok = true;
    let mut worst: Vec<(CheckKind, f64)> = kinds.iter().map(|&k| (k, 0.0)).collect();
    for (seed, f) in ALL.into_iter().enumerate() {
        let (spec, c) = chart(f);
        for (k, w) in worst.iter_mut() {
            let out = run_check(*k, &spec, &c, samples, seed as u64).unwrap();
            ok &= out.passed;
            *w = w.max(out.value);
        }
    }
    (ok, worst)
}

fn describe(worst: &[(CheckKind, f64)]) -> String {
    worst.iter().map(|(k, v)| format!("{} {v:.1e}", k.name())).collect::<Vec<_>>().join(", ")
}

fn ac5() -> Outcome {
    let (ok, worst) = checks(&[CheckKind::ConnectionAgreement, CheckKind::LiftDerivatives], 100);
    outcome(ok, describe(&worst))
}

fn ac6() -> Outcome {
    let (ok, worst) = checks(&[CheckKind::LiftIsometry, CheckKind::ProjectionRoundTrip, CheckKind::SasakiEnergy], 100);
    let gauss = ["cylinder_sphere", "cylinder_hyperbolic"]
        .iter()
        .map(|n| run(&builtin(n), None).0.intrinsic_gauss_max.unwrap())
        .fold(0.0f64, f64::max);
    outcome(ok && gauss <= 1e-4, format!("{}, cylinder |K| {gauss:.1e}", describe(&worst)))
}

fn ac7() -> Outcome {
    let flat = ["field_equations_flat", "field_equations_linear"]
        .iter()
        .map(|n| run(&builtin(n), None).0.max_residual)
        .fold(0.0f64, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut weakest = f64::MAX;
    let trials = 40;
    for i in 0..trials {
        let f = CURVED[i % 5];
        let (_, c) = chart(f);
        let mut r = |s: f64| rng.random_range(-s..s);
        let rho =
            ScalarField::Quadratic { c0: 0.6 + r(0.3), cu: r(0.3), cv: r(0.3), cuu: 0.0, cuv: r(0.2), cvv: r(0.2) };
        let omega = ScalarField::Wave { offset: r(1.0), amplitude: r(0.5), ku: 0.0, kv: r(2.0), phase: r(1.0) };
        let field = SemiGeodesicField::new(c.clone(), rho.clone(), omega).unwrap();
        let d = c.domain().shrink(0.2);
        let mut strongest = 0.0f64;
        for a in 0..5 {
            for b in 0..5 {
                let q = Vec2::new(d.u.0 + (d.u.1 - d.u.0) * a as f64 / 4.0, d.v.0 + (d.v.1 - d.v.0) * b as f64 / 4.0);
                if rho.value(&q) > 0.05 {
                    strongest = strongest.max(lemma2_residual(&field, q).unwrap().max_abs());
                }
            }
        }
        weakest = weakest.min(strongest);
    }
    outcome(
        flat <= 1e-8 && weakest >= 1e-3,
        format!("flat solutions {flat:.1e}, weakest of {trials} curved fields {weakest:.1e}"),
    )
}

fn ac8() -> Outcome {
    let t = Instant::now();
    let a = run_suite("all", &Overrides::default()).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let b = run_suite("all", &Overrides::default()).unwrap();
    let bytes = |r: &RunReport| {
        let mut csv = Vec::new();
        write_csv_summary(r, &mut csv).unwrap();
        (to_json_string(&r.without_timing()), csv)
    };
    let same = bytes(&a) == bytes(&b);
    outcome(
        a.passed && secs < 300.0 && same,
        format!("{} scenarios in {secs:.1}s, all passed: {}, identical reports: {same}", a.scenarios.len(), a.passed),
    )
}

fn main() {
    let (first, positive) = ac1();
    let results = [
        ("AC1", first),
        ("AC2", ac2(positive)),
        ("AC3", ac3()),
        ("AC4", ac4()),
        ("AC5", ac5()),
        ("AC6", ac6()),
        ("AC7", ac7()),
        ("AC8", ac8()),
    ];
    let mut failed = 0;
    for (id, o) in &results {
        println!("{id} {} {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.passed);
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
