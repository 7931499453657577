//! Runs the full verification suite through the binary twice, prints one
//! line per criterion and re-checks the reported numbers against oracles
//! computed here.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Child, Command};

use serde_json::Value;

fn spawn(dir: &Path) -> Child {
    let cfg = dir.join("verify.cfg");
    fs::write(&cfg, "command = verify-all\n").unwrap();
    Command::new(env!("CARGO_BIN_EXE_plap"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .stdout(std::process::Stdio::null())
        .spawn()
        .unwrap()
}

/// `J_0(x) = Σ (-1)^k (x/2)^{2k} / (k!)^2`.
fn bessel_j0(x: f64) -> f64 {
    let q = -(x * x) / 4.0;
    let (mut term, mut sum) = (1.0, 1.0);
    for k in 1..80 {
        term *= q / (k * k) as f64;
        sum += term;
    }
    sum
}

fn j0_first_zero() -> f64 {
    let (mut lo, mut hi) = (2.0, 3.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if bessel_j0(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `π_p = 2 ∫_0^1 (1 - s^p)^{-1/p} ds` by composite Simpson, with
/// `s = 1 - t^p` on the part near the endpoint singularity.
fn pi_p_quadrature(p: f64) -> f64 {
    let simpson = |f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize| {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    };
    let split: f64 = 0.5;
    let inner = simpson(&|s: f64| (1.0 - s.powf(p)).powf(-1.0 / p), 0.0, split, 2000);
    let outer = |t: f64| {
        if t == 0.0 {
            return if p == 2.0 { p * p.powf(-1.0 / p) } else { 0.0 };
        }
        let s = 1.0 - t.powf(p);
        let q = (1.0 - s.powf(p)) / t.powf(p);
        p * t.powf(p - 2.0) * q.powf(-1.0 / p)
    };
    2.0 * (inner + simpson(&outer, 0.0, (1.0 - split).powf(1.0 / p), 2000))
}

fn obs(c: &Value, key: &str) -> f64 {
    c["observed"][key].as_f64().unwrap_or_else(|| panic!("missing {key}"))
}

#[test]
fn acceptance() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (mut pa, mut pb) = (spawn(a.path()), spawn(b.path()));
    let (sa, sb) = (pa.wait().unwrap(), pb.wait().unwrap());
    let ja = fs::read(a.path().join("out/result.json")).unwrap();
    let jb = fs::read(b.path().join("out/result.json")).unwrap();
    let report: Value = serde_json::from_slice(&ja).unwrap();
    let criteria: BTreeMap<u64, &Value> =
        report["suite"]["criteria"].as_array().unwrap().iter().map(|c| (c["id"].as_u64().unwrap(), c)).collect();

    let mut lines = Vec::new();
    let mut check = |id: u64, extra: bool, note: String| {
        let c = criteria[&id];
        let pass = c["pass"].as_bool().unwrap() && extra;
        lines.push((id, pass));
        println!("criterion {id:>2} {} {:<28} {note}", if pass { "PASS" } else { "FAIL" }, c["name"].as_str().unwrap());
    };

    let c = criteria[&1];
    let (fine, coarse) = (obs(c, "lambda"), obs(c, "lambda_coarse"));
    let rich = (4.0 * fine - coarse) / 3.0;
    let pi2 = PI * PI;
    check(1, (fine - pi2).abs() <= 1e-3 * pi2 && (rich - pi2).abs() <= 1e-4 * pi2, format!("λ = {fine:.8}, Richardson {rich:.10}"));

    let c = criteria[&2];
    let oracle = 2.0 * pi_p_quadrature(3.0).powi(3);
    let l = obs(c, "lambda");
    check(2, (l - oracle).abs() <= 5e-3 * oracle && (obs(c, "shooting") - oracle).abs() <= 1e-6 * oracle, format!("λ = {l:.6}, quadrature oracle {oracle:.6}"));

    let c = criteria[&3];
    let j = j0_first_zero();
    let l = obs(c, "lambda");
    check(3, (l - j * j).abs() <= 5e-3 * j * j, format!("λ = {l:.6}, series oracle j01² = {:.6}", j * j));

    let c = criteria[&4];
    let worst = ["scale_rel_err", "shift_rel_err", "diffusion_rel_err"].iter().map(|k| obs(c, k)).fold(0.0, f64::max);
    check(4, worst <= 1e-12, format!("worst relative error {worst:.1e}"));

    let c = criteria[&5];
    let worst = ["p_1.5.rel_err", "p_2.rel_err", "p_3.rel_err", "p_4.rel_err"].iter().map(|k| obs(c, k)).fold(0.0, f64::max);
    check(5, worst <= 1e-6 && obs(c, "fields_per_p") >= 100.0, format!("worst relative error {worst:.1e}"));

    let c = criteria[&6];
    let ls: Vec<f64> = [2, 4, 8, 16, 32].iter().map(|r| obs(c, &format!("lambda_R{r}"))).collect();
    let dec = ls.windows(2).all(|w| w[1] <= w[0] + 10.0 * 1e-9 * w[0].abs().max(1.0));
    check(6, dec && obs(c, "lambda_inf") >= -0.5, format!("λ∞ = {:.6}", obs(c, "lambda_inf")));

    let c = criteria[&7];
    let l = obs(c, "lambda_at_1e-3");
    check(7, (l + 0.5).abs() <= 0.05 && obs(c, "max_second_divided_difference") <= 1e-6, format!("λ(1e-3) = {l:.4}"));

    let c = criteria[&8];
    let min = ["ratio_alpha_1e2", "ratio_alpha_1e3", "ratio_alpha_1e4"].iter().map(|k| obs(c, k)).fold(f64::INFINITY, f64::min);
    check(8, min > 0.0 && min >= obs(c, "lower_bound"), format!("min λ/α = {min:.6}"));

    let c = criteria[&9];
    let ok = (obs(c, "diffusion_lambda_1e3") - 0.5).abs() <= 0.05
        && (obs(c, "dilation_lambda_1e-2") + 0.5).abs() <= 0.05
        && (obs(c, "dilation_lambda_1e2") - 0.5).abs() <= 0.05
        && obs(c, "bracket_width") <= 1e-3;
    check(9, ok, format!("α* = {:.5}", obs(c, "alpha_star")));

    let c = criteria[&10];
    let ok = (obs(c, "pos_lambda_over_alpha") + 0.5).abs() <= 0.05 && (obs(c, "neg_lambda_over_alpha") + 0.5).abs() <= 0.05;
    check(10, ok, format!("λ/α = {:.4}, {:.4}", obs(c, "pos_lambda_over_alpha"), obs(c, "neg_lambda_over_alpha")));

    let c = criteria[&11];
    let ok = ["interval_p2", "interval_p3", "disk"]
        .iter()
        .all(|k| obs(c, &format!("{k}.upper_bound")) <= obs(c, &format!("{k}.lambda")) + 1e-6);
    check(11, ok, "three instances".into());

    let c = criteria[&12];
    let omega = (1.0 - obs(c, "lambda")).sqrt();
    check(12, obs(c, "rate") >= 0.9 * omega, format!("rate {:.4}, ω̃ {omega:.4}", obs(c, "rate")));

    let c = criteria[&13];
    let worst = obs(c, "well.sup_spread").max(obs(c, "interval_p3.sup_spread"));
    check(13, worst <= 1e-4, format!("sup spread {worst:.1e}"));

    let c = criteria[&14];
    let first = obs(c, "entry_00.stabilizes") == 1.0;
    let last = obs(c, "entry_06.coercivity_violated") == 1.0;
    check(14, first && last && obs(c, "downward_closed") == 1.0, format!("λ̂∞ = {:.4}", obs(c, "lambda_hat_inf")));

    let c = criteria[&15];
    check(15, obs(c, "positive.max_over_admissible") <= 1e-8, format!("λ̂∞ = {:.4}", obs(c, "positive.lambda_hat_inf")));

    let c = criteria[&16];
    check(16, obs(c, "ratio_spread") < 2.0, format!("ratio spread {:.4}", obs(c, "ratio_spread")));

    let same = ja == jb && sa.code() == sb.code();
    check(17, same, format!("two verify-all runs, {} bytes, identical = {same}", ja.len()));

    let failed: Vec<u64> = lines.iter().filter(|l| !l.1).map(|l| l.0).collect();
    assert_eq!(sa.code(), Some(0), "verify-all exit code");
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn oracles_are_consistent() {
    assert!((j0_first_zero() - 2.404_825_557_695_773).abs() < 1e-12);
    assert!((pi_p_quadrature(2.0) - PI).abs() < 1e-6);
    let p: f64 = 3.0;
    let closed = 2.0 * PI / (p * (PI / p).sin());
    assert!((pi_p_quadrature(p) - closed).abs() < 1e-6 * closed);
}
