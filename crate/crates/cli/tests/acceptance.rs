//! Acceptance run: one pass/fail line per criterion, each with its stated
//! tolerance and time budget. Closed-form and finite-difference oracles are
//! computed here, independently of the library internals.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use finsler_core::sampling::{self, stream_id};
use finsler_core::verify::{self, Check, CheckReport};
use finsler_core::{
    chern_coefficients, connect, d_exp, distance, estimate_convexity_radii, exp_map, spray_coefficients, zoo,
    ConvexityOptions, IntegrateOptions, Metric, ShootOptions,
};
use rand::Rng;

const SEED: u64 = 42;

struct Outcome {
    pass: bool,
    detail: String,
}

fn ok(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn zoo_metrics() -> Vec<Metric> {
    zoo::zoo()
}

fn rng(label: &str) -> sampling::SeededRng {
    sampling::rng(SEED, stream_id(label))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}

fn report_ok(r: &CheckReport, failures: &mut Vec<String>) -> f64 {
    if !r.pass {
        failures.push(format!("{} on {}: max {:e} > tol {:e} {:?}", r.check.name(), r.metric, r.max_residual, r.tolerance, r.errors));
    }
    r.max_residual
}

/// `½ ∂²F²/∂y∂y` by central differences of `F²` alone.
fn hessian_fd(m: &Metric, x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let h = 1e-4 * norm(y);
    let f2 = |v: &[f64]| m.eval(x, v).unwrap().powi(2);
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for (si, sj, w) in [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)] {
                let mut v = y.to_vec();
                v[i] += si * h;
                v[j] += sj * h;
                s += w * f2(&v);
            }
            out[i * n + j] = 0.5 * s / (4.0 * h * h);
        }
    }
    out
}

fn criterion_1() -> Outcome {
    let mut worst = [0.0f64; 4];
    let mut failures = Vec::new();
    for m in zoo_metrics() {
        let mut r = rng(&format!("acc1/{}", m.name()));
        for _ in 0..100 {
            let (x, y) = sampling::flag(&m, 0.9, 0.1, 10.0, &mut r).unwrap();
            let lambda = 10f64.powf(r.gen_range(-1.0..1.0));
            let ly: Vec<f64> = y.iter().map(|v| lambda * v).collect();
            let f = m.eval(&x, &y).unwrap();
            let hom = (m.eval(&x, &ly).unwrap() - lambda * f).abs() / (lambda * f);
            let t = m.fundamental_tensor(&x, &y).unwrap();
            let tl = m.fundamental_tensor(&x, &ly).unwrap();
            let gmax = t.g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let g0 = max_diff(tl.g.as_slice(), t.g.as_slice()) / gmax;
            let repro = (t.inner(&y, &y) - f * f).abs() / (f * f);
            let fd = max_diff(&hessian_fd(&m, &x, &y), t.g.as_slice()) / gmax;
            let pd = t.g.clone().cholesky().is_some();
            worst = [worst[0].max(hom), worst[1].max(g0), worst[2].max(repro), worst[3].max(fd)];
            if !(hom <= 1e-9 && g0 <= 1e-7 && repro <= 1e-6 && fd <= 1e-5 && pd) {
                failures.push(format!("{} x={x:?} y={y:?}", m.name()));
            }
        }
        for rep in verify::check_algebra(&m, SEED, 100) {
            report_ok(&rep, &mut failures);
        }
    }
    ok(
        failures.is_empty(),
        format!(
            "homogeneity {:.1e}, g scaling {:.1e}, y'gy-F^2 {:.1e}, g vs FD Hessian {:.1e}; {} failures",
            worst[0],
            worst[1],
            worst[2],
            worst[3],
            failures.len()
        ),
    )
}

fn criterion_2() -> Outcome {
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for m in zoo_metrics() {
        let rep = verify::check_energy_conservation(&m, SEED, 20);
        worst = worst.max(report_ok(&rep, &mut failures));
        if rep.samples != 20 {
            failures.push(format!("{}: {} flags", m.name(), rep.samples));
        }
    }
    ok(failures.is_empty(), format!("max relative F-drift {worst:.2e} (tol 1e-6); {failures:?}"))
}

/// Christoffel symbols of `λ(x)²δ` with `φ = ln λ`:
/// `Γ^i_jk = δ_ij φ_k + δ_ik φ_j − δ_jk φ_i`.
fn conformal_christoffel(grad_phi: &[f64]) -> Vec<f64> {
    let n = grad_phi.len();
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let mut out = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out[(i * n + j) * n + k] = d(i, j) * grad_phi[k] + d(i, k) * grad_phi[j] - d(j, k) * grad_phi[i];
            }
        }
    }
    out
}

fn criterion_3() -> Outcome {
    let mut failures = Vec::new();
    let (mut worst_c, mut worst_r) = (0.0f64, 0.0f64);
    for m in zoo_metrics() {
        let mut r = rng(&format!("acc3/{}", m.name()));
        for _ in 0..50 {
            let (x, y) = sampling::flag(&m, 0.5, 0.1, 1.0, &mut r).unwrap();
            let gamma = chern_coefficients(&m, &x, &y).unwrap();
            let two_g: Vec<f64> = spray_coefficients(&m, &x, &y).unwrap().iter().map(|g| 2.0 * g).collect();
            let f2 = m.eval(&x, &y).unwrap().powi(2);
            let scale = norm(&two_g).max(1e-9 * f2);
            let c = max_diff(&gamma.contract(&y, &y), &two_g) / scale;
            worst_c = worst_c.max(c);
            if !(c <= 1e-6) {
                failures.push(format!("contraction {} x={x:?}", m.name()));
            }
            let r2: f64 = x.iter().map(|a| a * a).sum();
            let grad_phi: Option<Vec<f64>> = match m.name() {
                "poincare" => Some(x.iter().map(|a| 2.0 * a / (1.0 - r2)).collect()),
                "sphere" => Some(x.iter().map(|a| -2.0 * a / (1.0 + r2)).collect()),
                _ => None,
            };
            if let Some(gp) = grad_phi {
                let oracle = conformal_christoffel(&gp);
                let big = oracle.iter().fold(1e-12f64, |a, v| a.max(v.abs()));
                let e = max_diff(&gamma.gamma1, &oracle) / big;
                worst_r = worst_r.max(e);
                if !(e <= 1e-6) {
                    failures.push(format!("christoffel {} x={x:?}", m.name()));
                }
            }
        }
    }
    ok(
        failures.is_empty(),
        format!("Gamma(y,y) vs 2G {worst_c:.1e}; Christoffel closed form {worst_r:.1e} (tol 1e-6); {failures:?}"),
    )
}

fn criterion_4() -> Outcome {
    let p = zoo::by_name("poincare").unwrap();
    let rf = zoo::by_name("randers_flat").unwrap();
    let opts = IntegrateOptions::default();
    let mut r = rng("acc4");
    let (mut worst_p, mut worst_r) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let u = sampling::unit_vector(2, &mut r);
        let s = r.gen_range(0.05..1.5);
        let big_x: Vec<f64> = u.iter().map(|a| s * a).collect();
        let got = exp_map(&p, &[0.0, 0.0], &big_x, &opts).unwrap();
        let oracle: Vec<f64> = u.iter().map(|a| s.tanh() * a).collect();
        worst_p = worst_p.max(max_diff(&got, &oracle));
        let x = sampling::point_in(rf.domain(), 2, 5.0, &mut r);
        let v = sampling::gaussian_vector(2, &mut r);
        let e = exp_map(&rf, &x, &v, &opts).unwrap();
        let lin: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + b).collect();
        worst_r = worst_r.max(max_diff(&e, &lin));
    }
    let big_x = [1.2, 0.0];
    let err = |h: f64| (exp_map(&p, &[0.0, 0.0], &big_x, &IntegrateOptions::with_step(h)).unwrap()[0] - 1.2f64.tanh()).abs();
    let ratio = err(0.1) / err(0.05);
    let pass = worst_p <= 1e-8 && worst_r <= 1e-12 && (10.0..=24.0).contains(&ratio);
    ok(pass, format!("poincare vs tanh {worst_p:.1e} (1e-8); flat randers vs x+X {worst_r:.1e} (1e-12); RK4 halving ratio {ratio:.2}"))
}

fn criterion_5() -> Outcome {
    let mut failures = Vec::new();
    let mut worst = [0.0f64; 2];
    for m in zoo_metrics() {
        let reps = verify::check_gauss_lemma(&m, SEED, 100);
        worst[0] = worst[0].max(report_ok(&reps[0], &mut failures));
        worst[1] = worst[1].max(report_ok(&reps[1], &mut failures));
    }
    // hyperbolic oracle: d/dt tanh(t|X|) X/|X| at t = 1
    let p = zoo::by_name("poincare").unwrap();
    let mut r = rng("acc5");
    let mut oracle_err: f64 = 0.0;
    for _ in 0..10 {
        let u = sampling::unit_vector(2, &mut r);
        let s = r.gen_range(0.1..1.2);
        let big_x: Vec<f64> = u.iter().map(|a| s * a).collect();
        let v = d_exp(&p, &[0.0, 0.0], &big_x, &big_x, &IntegrateOptions::default()).unwrap();
        let sech2 = 1.0 / s.cosh().powi(2);
        let want: Vec<f64> = u.iter().map(|a| s * sech2 * a).collect();
        oracle_err = oracle_err.max(max_diff(&v, &want) / s);
    }
    if oracle_err > 1e-6 {
        failures.push(format!("poincare radial DExp vs closed form {oracle_err:e}"));
    }
    ok(
        failures.is_empty(),
        format!("norm {:.1e}, orthogonality {:.1e} (tol 1e-5); radial DExp oracle {oracle_err:.1e}; {failures:?}", worst[0], worst[1]),
    )
}

fn criterion_6() -> Outcome {
    let mut failures = Vec::new();
    let mut strict = 0;
    let mut worst: f64 = 0.0;
    for m in zoo_metrics() {
        let reps = verify::check_radial_minimality(&m, SEED, 200);
        worst = worst.max(report_ok(&reps[0], &mut failures));
        report_ok(&reps[1], &mut failures);
        strict += reps[1].samples;
        if reps[0].samples != 200 {
            failures.push(format!("{}: {} curves", m.name(), reps[0].samples));
        }
    }
    ok(
        failures.is_empty(),
        format!("1000 curves, worst shortfall {worst:.1e} (tol 1e-6), {strict} with amplitude >= 5% strictly longer; {failures:?}"),
    )
}

fn criterion_7() -> Outcome {
    let mut failures = Vec::new();
    for m in zoo_metrics() {
        for rep in verify::check_fundamental_inequality(&m, SEED, 200) {
            report_ok(&rep, &mut failures);
        }
    }
    // Pythagoras on the Euclidean plane
    let e = zoo::by_name("euclidean").unwrap();
    let mut r = rng("acc7");
    for _ in 0..50 {
        let z = sampling::gaussian_vector(2, &mut r);
        let y = [-z[1], z[0]];
        let tau = r.gen_range(0.0..10.0);
        let f = e.eval(&[0.0, 0.0], &[z[0] + tau * y[0], z[1] + tau * y[1]]).unwrap();
        if (f - norm(&z) * (1.0 + tau * tau).sqrt()).abs() > 1e-12 * f {
            failures.push("pythagoras".into());
        }
    }
    ok(failures.is_empty(), format!("1000 trials, zero violations, equality only at tau = 0; {failures:?}"))
}

fn criterion_8() -> Outcome {
    let o = ShootOptions::default();
    let p = zoo::by_name("poincare").unwrap();
    let s = zoo::by_name("sphere").unwrap();
    let rf = zoo::by_name("randers_flat").unwrap();
    let dp = distance(&p, &[0.0, 0.0], &[0.5, 0.0], &o).unwrap();
    let ds = distance(&s, &[0.0, 0.0], &[1.0, 0.0], &o).unwrap();
    let d_fwd = distance(&rf, &[0.0, 0.0], &[1.0, 0.0], &o).unwrap();
    let d_bwd = distance(&rf, &[1.0, 0.0], &[0.0, 0.0], &o).unwrap();
    let e = [(dp - 3f64.ln()).abs(), (ds - PI / 2.0).abs(), (d_fwd - 1.5).abs(), (d_bwd - 0.5).abs()];
    let mut failures = Vec::new();
    if !(e[0] <= 1e-6 && e[1] <= 1e-6 && e[2] <= 1e-9 && e[3] <= 1e-9) {
        failures.push(format!("oracles {e:?}"));
    }
    let mut worst_slack = f64::NEG_INFINITY;
    for m in zoo_metrics() {
        let mut r = rng(&format!("acc8/{}", m.name()));
        for _ in 0..50 {
            let pts: Vec<Vec<f64>> = (0..3).map(|_| sampling::point_in(m.domain(), 2, 0.6, &mut r)).collect();
            let d = |a: usize, b: usize| distance(&m, &pts[a], &pts[b], &o);
            match (d(0, 2), d(0, 1), d(1, 2)) {
                (Ok(ac), Ok(ab), Ok(bc)) => {
                    worst_slack = worst_slack.max(ac - ab - bc);
                    if ac > ab + bc + 1e-7 {
                        failures.push(format!("triangle {} {pts:?}", m.name()));
                    }
                }
                _ => failures.push(format!("no geodesic {} {pts:?}", m.name())),
            }
        }
    }
    ok(
        failures.is_empty(),
        format!(
            "ln3 err {:.1e}, pi/2 err {:.1e}, randers 1.5/0.5 err {:.1e}/{:.1e}; 250 triples, max d(a,c)-d(a,b)-d(b,c) = {worst_slack:.1e}; {failures:?}",
            e[0], e[1], e[2], e[3]
        ),
    )
}

/// Inverse stereographic projection onto the unit sphere.
fn to_sphere(p: &[f64]) -> [f64; 3] {
    let r2 = p[0] * p[0] + p[1] * p[1];
    [2.0 * p[0] / (1.0 + r2), 2.0 * p[1] / (1.0 + r2), (r2 - 1.0) / (1.0 + r2)]
}

fn criterion_9() -> Outcome {
    let o = ShootOptions::default();
    let mut failures = Vec::new();
    let (mut worst_res, mut worst_len): (f64, f64) = (0.0, 0.0);
    for name in ["poincare", "sphere"] {
        let m = zoo::by_name(name).unwrap();
        let mut r = rng(&format!("acc9/{name}"));
        let mut count = 0;
        while count < 100 {
            let (a, b) = if name == "poincare" {
                (sampling::point_in(m.domain(), 2, 0.9, &mut r), sampling::point_in(m.domain(), 2, 0.9, &mut r))
            } else {
                // the closed southern hemisphere: minimizing arcs stay in the chart
                (sampling::point_in(m.domain(), 2, 1.0, &mut r), sampling::point_in(m.domain(), 2, 1.0, &mut r))
            };
            let oracle = if name == "poincare" {
                let d2 = (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2);
                let na = 1.0 - a[0] * a[0] - a[1] * a[1];
                let nb = 1.0 - b[0] * b[0] - b[1] * b[1];
                (1.0 + 2.0 * d2 / (na * nb)).acosh()
            } else {
                let (u, v) = (to_sphere(&a), to_sphere(&b));
                let c = (u[0] * v[0] + u[1] * v[1] + u[2] * v[2]).clamp(-1.0, 1.0);
                if c < -0.95 {
                    continue; // near antipodal
                }
                c.acos()
            };
            count += 1;
            match connect(&m, &a, &b, &o) {
                Ok(res) => {
                    worst_res = worst_res.max(res.residual);
                    worst_len = worst_len.max((res.length - oracle).abs());
                    if !(res.converged && res.residual <= 1e-9 && (res.length - oracle).abs() <= 1e-6) {
                        failures.push(format!("{name} {a:?} -> {b:?}: length {} vs {oracle}", res.length));
                    }
                }
                Err(e) => failures.push(format!("{name} {a:?} -> {b:?}: {e}")),
            }
        }
    }
    ok(
        failures.is_empty(),
        format!("200 pairs, max hit residual {worst_res:.1e} (tol 1e-9), max length vs closed form {worst_len:.1e}; {failures:?}"),
    )
}

fn criterion_10() -> Outcome {
    let e = zoo::by_name("euclidean").unwrap();
    let s = zoo::by_name("sphere").unwrap();
    let opts = ConvexityOptions { seed: SEED, ..ConvexityOptions::default() };
    let grid_e = [0.5, 1.0, 1.5, 2.0];
    let re = estimate_convexity_radii(&e, &[0.0, 0.0], &grid_e, &opts).unwrap();
    let grid_s: Vec<f64> = (1..=8).map(|k| 0.5 * k as f64).collect();
    let rs = estimate_convexity_radii(&s, &[0.0, 0.0], &grid_s, &opts).unwrap();
    let pass = re.epsilon == 2.0
        && rs.epsilon > 0.0
        && rs.epsilon < PI
        && re.epsilon_tilde == re.epsilon / 3.0
        && rs.epsilon_tilde == rs.epsilon / 3.0;
    ok(
        pass,
        format!(
            "euclidean epsilon {} (grid max 2); sphere epsilon {}, eta {}, epsilon_tilde {}, failure modes {:?}",
            re.epsilon, rs.epsilon, rs.eta, rs.epsilon_tilde, rs.failure_modes
        ),
    )
}

fn criterion_11() -> Outcome {
    let mut failures = Vec::new();
    let opts = verify::GrowthOptions::default();
    let mut parts = Vec::new();
    for name in ["euclidean", "poincare", "sphere"] {
        let m = zoo::by_name(name).unwrap();
        let rep = verify::check_quadratic_growth(&m, &opts);
        report_ok(&rep, &mut failures);
        let w = rep.witness.as_ref();
        let (mu, rho) = w.map(|w| (w.params[1], w.params[2])).unwrap_or((f64::NAN, f64::NAN));
        if name == "euclidean" {
            // sqrt(eps² + t²) − eps ≥ 0.4 t²/eps holds exactly for |t| ≤ eps·√1.25
            if mu != 0.4 / opts.epsilon || !(rho > 0.0 && rho <= opts.epsilon * 1.25f64.sqrt()) {
                failures.push(format!("euclidean mu {mu} rho {rho}"));
            }
        } else if !(mu > 0.0) {
            failures.push(format!("{name} fitted mu {mu}"));
        }
        parts.push(format!("{name} mu {mu:.4} rho {rho:.4}"));
    }
    ok(failures.is_empty(), format!("{}; {failures:?}", parts.join(", ")))
}

fn criterion_12() -> Outcome {
    let mut failures = Vec::new();
    let (mut worst_adm, mut least_ctrl) = (0.0f64, f64::INFINITY);
    for m in zoo_metrics() {
        let reps = verify::check_family_invariance(&m, SEED, 6);
        for rep in &reps {
            report_ok(rep, &mut failures);
        }
        worst_adm = worst_adm.max(reps[0].max_residual);
        let floor = verify::tolerances::CONTROL_FLOOR;
        least_ctrl = least_ctrl.min(floor / reps[1].max_residual);
        assert_eq!(reps[1].check, Check::InadmissibleControl);
    }
    ok(
        failures.is_empty() && worst_adm <= 1e-8 && least_ctrl >= 1e-3,
        format!("admissible deviation {worst_adm:.1e} (<= 1e-8); inadmissible deviation >= {least_ctrl:.1e} (>= 1e-3)"),
    )
}

fn criterion_13() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |file: &str| {
        let path = dir.path().join(file);
        let status = Command::new(env!("CARGO_BIN_EXE_finsler"))
            .args(["verify", "--metric-set", "zoo", "--seed", "42", "--json"])
            .arg(&path)
            .output()
            .unwrap();
        (status.status.code(), std::fs::read(path).unwrap_or_default())
    };
    let (c1, a) = run("a.json");
    let (c2, b) = run("b.json");
    ok(
        c1 == Some(0) && c2 == Some(0) && !a.is_empty() && a == b,
        format!("exit codes {c1:?}/{c2:?}, reports {} bytes, identical: {}", a.len(), a == b),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, u64); 13] = [
        ("metric algebra", criterion_1, 10),
        ("energy conservation", criterion_2, 20),
        ("chern coefficients", criterion_3, 20),
        ("exponential map oracle", criterion_4, 20),
        ("gauss lemma", criterion_5, 30),
        ("radial minimality", criterion_6, 30),
        ("fundamental inequality", criterion_7, 10),
        ("distance oracles", criterion_8, 60),
        ("connectivity", criterion_9, 60),
        ("convexity radii", criterion_10, 60),
        ("quadratic growth", criterion_11, 30),
        ("connection family invariance", criterion_12, 20),
        ("determinism", criterion_13, 300),
    ];
    let total = Instant::now();
    let mut failed = 0;
    for (k, (name, f, budget)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = f();
        let elapsed = t.elapsed();
        let in_time = elapsed <= Duration::from_secs(*budget);
        let pass = out.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name} [{:.2}s / {budget}s]: {}",
            k + 1,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            out.detail
        );
    }
    println!("acceptance: {} of 13 passed in {:.1}s", 13 - failed, total.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
