//! The acceptance suite: seventeen numbered checks with analytic oracles,
//! exact identities, limit behaviour of sweeps, certificates and the
//! experiments, each reduced to a pass/fail outcome with its observations.
//!
//! [`SuiteOptions::quick`] shrinks every grid so the whole suite runs in a
//! few seconds; tolerances are unchanged, so quick runs may fail criteria
//! that need the full resolution.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::certify::{certify_lower, certify_upper};
use crate::eigensolve::{principal_eig, EigenSolver, SolverConfig};
use crate::error::{Error, Result};
use crate::experiments::{
    annular_source, cutoff_ratio_check, decay_rate_fit, max_principle_check, simplicity_probe, spectrum_scan,
    ScanSettings,
};
use crate::field::Field;
use crate::functional;
use crate::limits::{
    amplitude_sweep, diffusion_sweep, dilation_sweep, find_threshold, lambda_unbounded, second_divided_differences,
    SweepDomain,
};
use crate::mesh::{build_grid, DomainSpec, Grid};
use crate::potential::{self, PotentialSpec};

/// First positive zero of the Bessel function `J_0`.
pub const J01: f64 = 2.404_825_557_695_773;

/// Number of criteria in the suite.
pub const CRITERIA: usize = 17;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub quick: bool,
    pub seed: u64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { quick: false, seed: 42 }
    }
}

impl SuiteOptions {
    fn n(&self, full: usize) -> usize {
        if self.quick {
            (full / 4).max(32)
        } else {
            full
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub id: usize,
    pub name: String,
    pub pass: bool,
    pub summary: String,
    pub observed: BTreeMap<String, f64>,
    /// Wall-clock time; excluded from serialized output.
    #[serde(skip)]
    pub seconds: f64,
}

impl Outcome {
    fn new(id: usize) -> Self {
        Outcome { id, name: name(id).into(), pass: false, summary: String::new(), observed: BTreeMap::new(), seconds: 0.0 }
    }

    fn observe(&mut self, key: impl Into<String>, value: f64) {
        self.observed.insert(key.into(), value);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub options: SuiteOptions,
    pub criteria: Vec<Outcome>,
    pub pass: bool,
}

impl SuiteReport {
    /// One line per criterion.
    pub fn table(&self) -> String {
        let mut s = String::new();
        for o in &self.criteria {
            let mark = if o.pass { "PASS" } else { "FAIL" };
            s.push_str(&format!("{:>2} {mark} {:<28} {}\n", o.id, o.name, o.summary));
        }
        s
    }
}

pub fn name(id: usize) -> &'static str {
    match id {
        1 => "linear_oracle",
        2 => "p_laplacian_oracle",
        3 => "radial_oracle",
        4 => "exact_identities",
        5 => "gradient_check",
        6 => "exhaustion_monotonicity",
        7 => "small_diffusion",
        8 => "large_diffusion_bounded",
        9 => "large_diffusion_whole_space",
        10 => "amplitude_limits",
        11 => "certificate_sandwich",
        12 => "tail_decay",
        13 => "simplicity",
        14 => "spectrum_scan",
        15 => "maximum_principle",
        16 => "cutoff_ratio",
        17 => "determinism",
        _ => "unknown",
    }
}

/// Runs the given criteria in order. Errors inside a criterion turn into a
/// failed outcome carrying the error message.
pub fn run_suite(opts: &SuiteOptions, ids: &[usize]) -> SuiteReport {
    let criteria: Vec<Outcome> = ids.iter().map(|&id| run_criterion(id, opts)).collect();
    let pass = criteria.iter().all(|o| o.pass);
    SuiteReport { options: *opts, criteria, pass }
}

pub fn run_all(opts: &SuiteOptions) -> SuiteReport {
    run_suite(opts, &(1..=CRITERIA).collect::<Vec<_>>())
}

pub fn run_criterion(id: usize, opts: &SuiteOptions) -> Outcome {
    let start = Instant::now();
    let mut out = match criterion(id, opts) {
        Ok(o) => o,
        Err(e) => {
            let mut o = Outcome::new(id);
            o.summary = format!("error: {e}");
            o
        }
    };
    out.seconds = start.elapsed().as_secs_f64();
    out
}

fn criterion(id: usize, o: &SuiteOptions) -> Result<Outcome> {
    match id {
        1 => linear_oracle(o),
        2 => p_laplacian_oracle(o),
        3 => radial_oracle(o),
        4 => exact_identities(o),
        5 => gradient_check(o),
        6 => exhaustion_monotonicity(o),
        7 => small_diffusion(o),
        8 => large_diffusion_bounded(o),
        9 => large_diffusion_whole_space(o),
        10 => amplitude_limits(o),
        11 => certificate_sandwich(o),
        12 => tail_decay(o),
        13 => simplicity(o),
        14 => spectrum(o),
        15 => maximum_principle(o),
        16 => cutoff(o),
        17 => determinism(o),
        _ => Err(Error::InvalidParameter(format!("no criterion {id}"))),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn cfg() -> SolverConfig {
    SolverConfig::default()
}

/// Solver settings for the certificate and identity checks.
pub fn tight() -> SolverConfig {
    SolverConfig { tol_lambda: 1e-13, tol_residual: 1e-11, ..SolverConfig::default() }
}

fn interval_eig(n: usize, c: &SolverConfig) -> Result<(Grid, Field, f64)> {
    let g = build_grid(DomainSpec::interval(0.0, 1.0)?, n)?;
    let ep = principal_eig(&g, &Field::zeros(&g), c)?;
    Ok((g, ep.phi, ep.lambda))
}

fn disk_eig(n: usize, c: &SolverConfig) -> Result<(Grid, Field, f64)> {
    let g = build_grid(DomainSpec::radial_ball(2, 1.0)?, n)?;
    let ep = principal_eig(&g, &Field::zeros(&g), c)?;
    Ok((g, ep.phi, ep.lambda))
}

fn linear_oracle(o: &SuiteOptions) -> Result<Outcome> {
    let mut out = Outcome::new(1);
    let n = o.n(1024);
    let exact = PI * PI;
    let (_, _, fine) = interval_eig(n, &cfg())?;
    let (_, _, coarse) = interval_eig(n / 2, &cfg())?;
    let rich = (4.0 * fine - coarse) / 3.0;
    out.observe("lambda", fine);
    out.observe("lambda_coarse", coarse);
    out.observe("lambda_richardson", rich);
    out.observe("exact", exact);
    out.observe("rel_err", rel(fine, exact));
    out.observe("rel_err_richardson", rel(rich, exact));
    out.pass = rel(fine, exact) <= 1e-3 && rel(rich, exact) <= 1e-4;
    out.summary = format!("λ = {fine:.8} (err {:.1e}), Richardson err {:.1e}", rel(fine, exact), rel(rich, exact));
    Ok(out)
}

/// `π_p = 2π / (p sin(π/p))`.
pub fn pi_p(p: f64) -> f64 {
    2.0 * PI / (p * (PI / p).sin())
}

/// First Dirichlet eigenvalue of `-Δ_p` on the unit interval by shooting:
/// integrates `u' = |w|^{1/(p-1)} sgn w`, `w' = -|u|^{p-1} sgn u` from
/// `u = 0, w = 1` up to the first zero of `w`, which is the midpoint of the
/// first hump for the eigenvalue 1; rescaling gives the unit interval.
pub fn shooting_eigenvalue(p: f64, dx: f64) -> f64 {
    let q = 1.0 / (p - 1.0);
    let rhs = |u: f64, w: f64| (w.abs().powf(q) * w.signum(), -u.abs().powf(p - 1.0) * u.signum());
    let (mut x, mut u, mut w) = (0.0, 0.0, 1.0);
    loop {
        let (k1u, k1w) = rhs(u, w);
        let (k2u, k2w) = rhs(u + 0.5 * dx * k1u, w + 0.5 * dx * k1w);
        let (k3u, k3w) = rhs(u + 0.5 * dx * k2u, w + 0.5 * dx * k2w);
        let (k4u, k4w) = rhs(u + dx * k3u, w + dx * k3w);
        let un = u + dx / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        let wn = w + dx / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
        if wn <= 0.0 {
            let half = x + dx * w / (w - wn);
            return (2.0 * half).powf(p);
        }
        x += dx;
        u = un;
        w = wn;
    }
}

fn p_laplacian_oracle(o: &SuiteOptions) -> Result<Outcome> {
    let mut out = Outcome::new(2);
    let p = 3.0;
    let closed = (p - 1.0) * pi_p(p).powf(p);
    let shoot = shooting_eigenvalue(p, 1e-5);
    let (_, _, lambda) = interval_eig(o.n(1024), &SolverConfig::with_p(p))?;
    out.observe("lambda", lambda);
    out.observe("closed_form", closed);
    out.observe("shooting", shoot);
    out.observe("rel_err", rel(lambda, closed));
    out.observe("shooting_rel_err", rel(shoot, closed));
    out.pass = rel(lambda, closed) <= 5e-3 && rel(shoot, closed) <= 1e-6;
    out.summary = format!("λ = {lambda:.6} vs {closed:.6} (err {:.1e}), shooting err {:.1e}", rel(lambda, closed), rel(shoot, closed));
    Ok(out)
}

fn radial_oracle(o: &SuiteOptions) -> Result<Outcome> {
    let mut out = Outcome::new(3);
    let exact = J01 * J01;
    let (_, _, lambda) = disk_eig(o.n(1024), &cfg())?;
    out.observe("lambda", lambda);
    out.observe("exact", exact);
    out.observe("rel_err", rel(lambda, exact));
    out.pass = rel(lambda, exact) <= 5e-3;
    out.summary = format!("λ = {lambda:.6} vs j01² = {exact:.6} (err {:.1e})", rel(lambda, exact));
    Ok(out)
}

fn random_instance(rng: &mut ChaCha8Rng) -> Result<(Grid, Field, Field, f64)> {
    let domain = match rng.gen_range(0..3) {
        0 => DomainSpec::interval(0.0, rng.gen_range(0.5..3.0))?,
        1 => DomainSpec::radial_ball(rng.gen_range(1..=3), rng.gen_range(0.5..3.0))?,
        _ => DomainSpec::box2(0.0, rng.gen_range(0.5..2.0), 0.0, rng.gen_range(0.5..2.0))?,
    };
    let n = if matches!(domain, DomainSpec::Box2 { .. }) { rng.gen_range(8..=12) } else { rng.gen_range(8..=32) };
    let g = build_grid(domain, n)?;
    let u = Field::new(&g, (0..g.len()).map(|j| if g.is_boundary(j) { 0.0 } else { rng.gen_range(0.1..1.0) }).collect())?;
    let v = Field::new(&g, (0..g.len()).map(|_| rng.gen_range(0.0..2.0)).collect())?;
    let p = rng.gen_range(1.5..4.0);
    Ok((g, u, v, p))
}

fn exact_identities(o: &SuiteOptions) -> Result<Outcome> {
    let mut out = Outcome::new(4);
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
    let (mut scale, mut shift, mut diffusion) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..20 {
        let (g, u, v, p) = random_instance(&mut rng)?;
        let r = functional::rayleigh(&u, &v, p)?;
        let c = rng.gen_range(0.1..10.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        scale = scale.max(rel(functional::rayleigh(&u.scaled(c), &v, p)?, r));
        let s = rng.gen_range(0.1..5.0);
        shift = shift.max(rel(functional::rayleigh(&u, &v.shifted(s), p)?, r + s));

        let alpha = rng.gen_range(0.2..5.0);
        let c2 = SolverConfig { p, ..tight() };
        let direct = EigenSolver::new(&g, &v, &c2).diffusion(alpha).solve()?.lambda;
        let scaled = principal_eig(&g, &v.scaled(1.0 / alpha), &c2)?.lambda;
        diffusion = diffusion.max(rel(direct, alpha * scaled));
    }
    out.observe("scale_rel_err", scale);
    out.observe("shift_rel_err", shift);
    out.observe("diffusion_rel_err", diffusion);
    out.pass = scale <= 1e-12 && shift <= 1e-12 && diffusion <= 1e-12;
    out.summary = format!("max rel err: scale {scale:.1e}, shift {shift:.1e}, diffusion {diffusion:.1e}");
    Ok(out)
}

fn gradient_check(o: &SuiteOptions) -> Result<Outcome> {
    let mut out = Outcome::new(5);
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed.wrapping_add(1));
    let fields = if o.quick { 20 } else { 100 };
    let mut worst = 0.0f64;
    for p in [1.5, 2.0, 3.0, 4.0] {
        let mut worst_p = 0.0f64;
        for _ in 0..fields {
            let (_, u, v, _) = random_instance(&mut rng)?;
            let g = u.grid().clone();
            let grad = functional::energy_grad(&u, &v, p)?;
            let norm = grad.values().iter().fold(0.0f64, |a, x| a.max(x.abs()));
            let mut err = 0.0f64;
            for &j in g.interior() {
                let h = 1e-5;
                let mut up = u.clone();
                up.values_mut()[j] += h;
                let mut dn = u.clone();
                dn.values_mut()[j] -= h;
                let fd = (functional::p_energy(&up, &v, p)? - functional::p_energy(&dn, &v, p)?) / (2.0 * h);
                err = err.max((fd - grad.values()[j]).abs());
            }
            worst_p = worst_p.max(err / norm);
        }
        out.observe(format!("p_{p}.rel_err"), worst_p);
        worst = worst.max(worst_p);
    }
    out.observe("fields_per_p", fields as f64);
    out.pass = worst <= 1e-6;
    out.summary = format!("max rel err {worst:.1e} over {fields} fields for each p");
    Ok(out)
}

fn balls(dim: usize, radii: &[f64]) -> Result<Vec<DomainSpec>> {
    radii.iter().map(|&r| DomainSpec::radial_ball(dim, r)).collect()
}

fn exhaustion_monotonicity(o: &SuiteOptions) -> Result<Outcome> {
    let mut out = Outcome::new(6);
    let radii: &[f64] = if o.quick { &[2.0, 4.0, 8.0] } else { &[2.0, 4.0, 8.0, 16.0, 32.0] };
    let c = cfg();
    let rep = match lambda_unbounded(&PotentialSpec::Bump, 2.0, &balls(1, radii)?, 32, &c) {
        Ok(r) => r,
        Err(Error::NonMonotone(r)) => *r,
        Err(e) => return Err(e),
    };
    for (r, l) in rep.radii.iter().zip(&rep.lambdas) {
        out.observe(format!("lambda_R{r}"), *l);
    }
    out.observe("lambda_inf", rep.lambda_inf);
    out.observe("monotone", if rep.monotone { 1.0 } else { 0.0 });
    out.pass = rep.monotone && rep.lambda_inf >= -0.5;
    out.summary = format!("λ = {:.6?}, λ∞ = {:.6}", rep.lambdas, rep.lambda_inf);
    Ok(out)
}

fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| 10f64.powf(lo.log10() + (hi.log10() - lo.log10()) * i as f64 / (count - 1) as f64)).collect()
}

fn small_diffusion(o: &SuiteOptions) -> Result<Outcome> {
    let mut out = Outcome::new(7);
    let alphas = log_space(1e-3, 1e3, 13);
    let dom = SweepDomain::Bounded { domain: DomainSpec::radial_ball(1, 8.0)?, n: o.n(512) };
    let t = diffusion_sweep(&PotentialSpec::Bump, 2.0, &alphas, &dom, &cfg())?;
    let dd = second_divided_differences(&t.alphas, &t.lambdas);
    let max_dd = dd.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    out.observe("lambda_at_1e-3", t.lambdas[0]);
    out.observe("max_second_divided_difference", max_dd);
    out.pass = (t.lambdas[0] + 0.5).abs() <= 0.05 && max_dd <= 1e-6;
    out.summary = format!("λ(1e-3) = {:.4}, max second divided difference {max_dd:.1e}", t.lambdas[0]);
    Ok(out)
}

fn large_diffusion_bounded(o: &SuiteOptions) -> Result<Outcome> {
    let mut out = Outcome::new(8);
    let n = o.n(256);
    let dom = DomainSpec::radial_ball(1, 2.0)?;
    let alphas = [1e2, 1e3, 1e4];
    let t = diffusion_sweep(&PotentialSpec::Bump, 2.0, &alphas, &SweepDomain::Bounded { domain: dom, n }, &cfg())?;
    let g = build_grid(dom, n)?;
    let dirichlet = principal_eig(&g, &Field::zeros(&g), &cfg())?.lambda;
    let b = potential::bounds(&PotentialSpec::Bump, 2.0, 4096)?;
    let sup_abs = b.inf_est.abs().max(b.sup_est.abs());
    let bound = dirichlet - sup_abs / alphas[0];
    let ratios: Vec<f64> = t.alphas.iter().zip(&t.lambdas).map(|(a, l)| l / a).collect();
    for (a, r) in alphas.iter().zip(&ratios) {
        out.observe(format!("ratio_alpha_{a:e}"), *r);
    }
    out.observe("dirichlet_lambda", dirichlet);
    out.observe("lower_bound", bound);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    out.pass = bound > 0.0 && min >= bound;
    out.summary = format!("min λ/α = {min:.6} ≥ {bound:.6} > 0");
    Ok(out)
}

fn large_diffusion_whole_space(o: &SuiteOptions) -> Result<Outcome> {
    let mut out = Outcome::new(9);
    let bump = PotentialSpec::Bump;
    let c = cfg();
    let radii: &[f64] = if o.quick { &[4.0, 8.0] } else { &[8.0, 16.0, 32.0, 64.0] };
    let ex = SweepDomain::Exhaustion { schedule: balls(1, radii)?, n_per_unit: 32 };
    let diff = diffusion_sweep(&bump, 2.0, &[1e3], &ex, &c)?.lambdas[0];
    let dil = dilation_sweep(&bump, 2.0, &[1e-2, 1e2], &ex, &c)?;
    let small = SweepDomain::Exhaustion { schedule: balls(1, &[8.0, 16.0])?, n_per_unit: 32 };
    let th = find_threshold(|a| Ok(dilation_sweep(&bump, 2.0, &[a], &small, &c)?.lambdas[0]), (1e-2, 1e2), 1e-3)?;
    out.observe("diffusion_lambda_1e3", diff);
    out.observe("dilation_lambda_1e-2", dil.lambdas[0]);
    out.observe("dilation_lambda_1e2", dil.lambdas[1]);
    out.observe("alpha_star", th.alpha_star);
    out.observe("bracket_width", th.hi - th.lo);
    out.observe("threshold_evaluations", th.evaluations as f64);
    out.pass = (diff - 0.5).abs() <= 0.05
        && (dil.lambdas[0] + 0.5).abs() <= 0.05
        && (dil.lambdas[1] - 0.5).abs() <= 0.05
        && th.hi - th.lo <= 1e-3
        && th.lambda_lo < 0.0
        && th.lambda_hi > 0.0;
    out.summary = format!(
        "λ(α=1e3) = {diff:.4}, dilation ends {:.4}, {:.4}, α* = {:.5}",
        dil.lambdas[0], dil.lambdas[1], th.alpha_star
    );
    Ok(out)
}

fn amplitude_limits(o: &SuiteOptions) -> Result<Outcome> {
    let mut out = Outcome::new(10);
    let dom = SweepDomain::Bounded { domain: DomainSpec::radial_ball(1, 8.0)?, n: o.n(256) };
    let b = potential::bounds(&PotentialSpec::Bump, 8.0, 4096)?;
    let pos = amplitude_sweep(&PotentialSpec::Bump, 2.0, &[1e3], 1.0, &dom, &cfg())?.lambdas[0];
    let neg = amplitude_sweep(&PotentialSpec::Bump, 2.0, &[1e3], -1.0, &dom, &cfg())?.lambdas[0];
    out.observe("pos_lambda_over_alpha", pos);
    out.observe("neg_lambda_over_alpha", neg);
    out.observe("inf_v", b.inf_est);
    out.observe("sup_v", b.sup_est);
    // λ(-Δ_p - αV)/α tends to inf(-V) = -sup V
    out.pass = (pos - b.inf_est).abs() <= 0.05 && (-neg - b.sup_est).abs() <= 0.05;
    out.summary = format!("λ/α = {pos:.4} (inf V {:.2}); -λ/α = {:.4} (sup V {:.2})", b.inf_est, -neg, b.sup_est);
    Ok(out)
}

fn certificate_sandwich(o: &SuiteOptions) -> Result<Outcome> {
    let mut out = Outcome::new(11);
    let n = o.n(1024);
    let t = tight();
    let cases = [
        ("interval_p2", interval_eig(n, &t)?, 2.0),
        ("interval_p3", interval_eig(n, &SolverConfig { p: 3.0, ..t.clone() })?, 3.0),
        ("disk", disk_eig(n, &t)?, 2.0),
    ];
    let mut pass = true;
    for (name, (g, phi, lambda), p) in cases {
        let v = Field::zeros(&g);
        let lo = certify_lower(&phi, lambda - 1e-6, &v, p)?;
        let up = certify_upper(&phi, &v, p)?;
        out.observe(format!("{name}.lambda"), lambda);
        out.observe(format!("{name}.lower_margin"), lo.margin);
        out.observe(format!("{name}.upper_bound"), up.bound);
        pass &= lo.valid && up.bound <= lambda + 1e-6 && lo.bound <= up.bound;
    }
    out.pass = pass;
    out.summary = "lower certificate at λ̂ - 1e-6 and Rayleigh bound ≤ λ̂ + 1e-6 on three instances".into();
    Ok(out)
}

fn well() -> PotentialSpec {
    PotentialSpec::RadialWell { depth: -1.0, r0: 1.0, outside: 1.0 }
}

fn tail_decay(o: &SuiteOptions) -> Result<Outcome> {
    let mut out = Outcome::new(12);
    let (dim, p) = (1usize, 2.0);
    let g = build_grid(DomainSpec::radial_ball(dim, 16.0)?, o.n(512))?;
    let v = potential::sample(&well(), &g)?;
    let ep = principal_eig(&g, &v, &cfg())?;
    let mu = 1.0 - ep.lambda;
    let omega = (mu / (dim as f64 * (p - 1.0))).powf(1.0 / p);
    let rate = decay_rate_fit(&ep.phi, (3.0, 10.0))?;
    out.observe("lambda", ep.lambda);
    out.observe("mu", mu);
    out.observe("omega", omega);
    out.observe("rate", rate);
    out.pass = mu > 0.0 && rate >= omega * 0.9;
    out.summary = format!("rate {rate:.4} vs ω̃ = {omega:.4} (μ = {mu:.4})");
    Ok(out)
}

fn simplicity(o: &SuiteOptions) -> Result<Outcome> {
    let mut out = Outcome::new(13);
    let seeds: Vec<u64> = (0..5).map(|i| o.seed.wrapping_add(i)).collect();
    let c = SolverConfig { tol_residual: 1e-9, tol_lambda: 1e-12, ..cfg() };
    let gw = build_grid(DomainSpec::radial_ball(1, 16.0)?, o.n(512))?;
    let a = simplicity_probe(&gw, &potential::sample(&well(), &gw)?, &c, &seeds)?;
    let gi = build_grid(DomainSpec::interval(0.0, 1.0)?, o.n(256))?;
    let b = simplicity_probe(&gi, &Field::zeros(&gi), &SolverConfig { p: 3.0, ..c }, &seeds)?;
    out.observe("well.sup_spread", a.observed["sup_spread"]);
    out.observe("interval_p3.sup_spread", b.observed["sup_spread"]);
    out.pass = a.pass && b.pass;
    out.summary = format!(
        "sup spread {:.1e} (well), {:.1e} (interval, p=3)",
        a.observed["sup_spread"], b.observed["sup_spread"]
    );
    Ok(out)
}

fn spectrum(_o: &SuiteOptions) -> Result<Outcome> {
    let mut out = Outcome::new(14);
    let zero = PotentialSpec::Constant { c: 0.0 };
    let radii = [4.0, 8.0, 16.0];
    let settings = ScanSettings::default();
    let pre = lambda_unbounded(&zero, 2.0, &balls(settings.dim, &radii)?, settings.n_per_unit, &cfg())?;
    let offsets = [-1.0, -0.75, -0.5, -0.25, 0.0, 0.5, 1.0];
    let lambdas: Vec<f64> = offsets.iter().map(|d| pre.lambda_inf + d).collect();
    let scan = spectrum_scan(&zero, 2.0, &lambdas, &radii, &cfg(), &settings)?;
    out.observed = scan.report.observed.clone();
    let below = &scan.entries[0];
    let above = &scan.entries[offsets.len() - 1];
    let closed = crate::experiments::downward_closed(&scan.entries);
    out.pass = closed && below.stabilizes && above.coercivity_violated;
    let set: Vec<String> = scan.entries.iter().filter(|e| e.stabilizes).map(|e| format!("{:.2}", e.lambda)).collect();
    out.summary = format!("λ̂∞ = {:.4}, stabilizing shifts [{}]", scan.lambda_hat_inf, set.join(", "));
    Ok(out)
}

fn maximum_principle(_o: &SuiteOptions) -> Result<Outcome> {
    let mut out = Outcome::new(15);
    let c = cfg();
    let g = build_grid(DomainSpec::radial_ball(1, 16.0)?, 512)?;

    let bump = PotentialSpec::Bump;
    let vb = potential::sample(&bump, &g)?;
    let ep = principal_eig(&g, &vb, &c)?;
    let f = annular_source(&g, 16.0)?;
    let src = crate::eigensolve::solve_source(&g, &vb, 0.0, &f, &c)?;
    let cands = [ep.phi.scaled(-1.0), Field::zeros(&g), src.scaled(-1.0)];
    let pos = max_principle_check(&bump, 2.0, &cands, &g, &c)?;

    let vw = potential::sample(&well(), &g)?;
    let ew = principal_eig(&g, &vw, &c)?;
    let neg = max_principle_check(&well(), 2.0, &[ew.phi.clone()], &g, &c)?;

    out.observe("positive.lambda_hat_inf", pos.observed["lambda_hat_inf"]);
    out.observe("positive.candidates_checked", pos.observed["candidates_checked"]);
    out.observe("positive.max_over_admissible", pos.observed["max_over_admissible"]);
    out.observe("negative.lambda_hat_inf", neg.observed["lambda_hat_inf"]);
    out.observe("negative.counterexample_found", neg.observed.get("counterexample_found").copied().unwrap_or(0.0));
    let holds = pos.observed["hypothesis_lambda_positive"] == 1.0;
    let sharp = neg.observed["hypothesis_lambda_positive"] == 0.0 && out.observed["negative.counterexample_found"] == 1.0;
    out.pass = holds && pos.pass && pos.observed["candidates_checked"] == 3.0 && sharp;
    out.summary = format!(
        "λ̂∞ = {:.4}: max u = {:.1e} over {} candidates; λ̂∞ = {:.4}: positive eigenfunction is a counterexample",
        pos.observed["lambda_hat_inf"],
        pos.observed["max_over_admissible"],
        pos.observed["candidates_checked"],
        neg.observed["lambda_hat_inf"]
    );
    Ok(out)
}

fn cutoff(o: &SuiteOptions) -> Result<Outcome> {
    let mut out = Outcome::new(16);
    let levels: &[usize] = if o.quick { &[32, 64] } else { &[32, 64, 128] };
    let rep = cutoff_ratio_check(&well(), 2.0, 1, 16.0, (4.0, 8.0), levels, &cfg())?;
    out.observed = rep.observed.clone();
    out.pass = rep.pass;
    out.summary = format!("ratio spread {:.4} across {} resolutions", rep.observed["ratio_spread"], levels.len());
    Ok(out)
}

fn determinism(o: &SuiteOptions) -> Result<Outcome> {
    let mut out = Outcome::new(17);
    let q = SuiteOptions { quick: true, ..*o };
    let ids: Vec<usize> = (1..CRITERIA).collect();
    let a = serde_json::to_string(&run_suite(&q, &ids)).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let b = serde_json::to_string(&run_suite(&q, &ids)).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    out.observe("bytes", a.len() as f64);
    out.observe("identical", if a == b { 1.0 } else { 0.0 });
    out.pass = a == b;
    out.summary = format!("two quick runs of criteria 1-16: {} bytes, identical = {}", a.len(), a == b);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shooting_matches_closed_form() {
        assert!(rel(shooting_eigenvalue(2.0, 1e-4), PI * PI) < 1e-8);
        for p in [1.5, 3.0, 4.0] {
            let closed = (p - 1.0) * pi_p(p).powf(p);
            assert!(rel(shooting_eigenvalue(p, 1e-5), closed) < 1e-6, "p = {p}");
        }
    }

    #[test]
    fn names_cover_every_criterion() {
        for id in 1..=CRITERIA {
            assert_ne!(name(id), "unknown");
        }
        assert_eq!(name(0), "unknown");
    }

    #[test]
    fn unknown_criterion_fails() {
        let o = run_criterion(99, &SuiteOptions::default());
        assert!(!o.pass && o.summary.starts_with("error"));
    }
}
