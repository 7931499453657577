//! Eigenvalues on `ℝ^N` by exhaustion with balls, parameter sweeps of the
//! diffusion coefficient, dilation and amplitude of the potential, and
//! threshold search by bisection.
//!
//! Every `ℝ^N` value is a truncated estimate and is reported together with
//! the radii it was computed on.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigensolve::{EigenSolver, SolverConfig};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::mesh::{build_grid, DomainSpec, Grid};
use crate::potential::{self, PotentialSpec};

pub const MIN_CELLS_PER_UNIT: usize = 32;

/// Principal eigenvalues along a nested sequence of balls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExhaustionReport {
    pub dim: usize,
    pub radii: Vec<f64>,
    pub lambdas: Vec<f64>,
    /// `λ_k - λ_{k+1}`.
    pub diffs: Vec<f64>,
    /// Geometric-tail extrapolation of the sequence.
    pub lambda_inf: f64,
    pub monotone: bool,
    pub inf_v: f64,
    pub n_per_unit: usize,
}

impl ExhaustionReport {
    /// Rows `(radius, lambda, diff)`; the last row has no difference.
    pub fn rows(&self) -> Vec<(f64, f64, Option<f64>)> {
        rows(&self.radii, &self.lambdas)
    }

    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        write_rows(w, &self.rows())
    }
}

/// `λ(K_V, ℝ^N)` estimated on the balls of `schedule`, each discretized with
/// `n_per_unit` cells per unit radius.
pub fn lambda_unbounded(
    v: &PotentialSpec,
    p: f64,
    schedule: &[DomainSpec],
    n_per_unit: usize,
    cfg: &SolverConfig,
) -> Result<ExhaustionReport> {
    v.validate()?;
    let cfg = SolverConfig { p, ..cfg.clone() };
    exhaust(schedule, n_per_unit, &cfg, 1.0, |g| potential::sample_transformed(v, g, 1.0, 1.0), inf_over(v, schedule)?)
}

fn inf_over(v: &PotentialSpec, schedule: &[DomainSpec]) -> Result<f64> {
    let r = schedule.last().and_then(DomainSpec::radius).unwrap_or(1.0);
    Ok(potential::bounds(v, r, 4096)?.inf_est)
}

/// Validates the schedule and returns `(dim, radii)`.
fn check_schedule(schedule: &[DomainSpec]) -> Result<(usize, Vec<f64>)> {
    let mut dim = None;
    let mut radii = Vec::with_capacity(schedule.len());
    for d in schedule {
        d.validate()?;
        match *d {
            DomainSpec::RadialBall { dim: k, radius } => {
                if dim.is_some_and(|x| x != k) {
                    return Err(Error::NotNested(format!("mixed dimensions {} and {k}", dim.unwrap())));
                }
                dim = Some(k);
                if radii.last().is_some_and(|&r| radius <= r) {
                    return Err(Error::NotNested(format!("radius {radius} follows {}", radii.last().unwrap())));
                }
                radii.push(radius);
            }
            _ => return Err(Error::NotNested(format!("{d} is not a ball"))),
        }
    }
    match dim {
        Some(dim) => Ok((dim, radii)),
        None => Err(Error::NotNested("empty schedule".into())),
    }
}

/// Runs an exhaustion for the operator `-α Δ_p + V` with `V` produced by
/// `sample`; eigenvalues are reported for that operator.
fn exhaust(
    schedule: &[DomainSpec],
    n_per_unit: usize,
    cfg: &SolverConfig,
    alpha: f64,
    sample: impl Fn(&Grid) -> Result<Field> + Sync,
    inf_v: f64,
) -> Result<ExhaustionReport> {
    let (dim, radii) = check_schedule(schedule)?;
    if n_per_unit < MIN_CELLS_PER_UNIT {
        return Err(Error::TooCoarse { n: n_per_unit, min: MIN_CELLS_PER_UNIT });
    }
    let lambdas = schedule
        .par_iter()
        .zip(&radii)
        .map(|(d, &r)| {
            let n = ((r * n_per_unit as f64).round() as usize).max(crate::mesh::MIN_CELLS);
            let g = build_grid(d.clone(), n)?;
            let v = sample(&g)?;
            let ep = EigenSolver::new(&g, &v, cfg).diffusion(alpha).solve()?;
            Ok(ep.lambda)
        })
        .collect::<Result<Vec<f64>>>()?;
    let diffs: Vec<f64> = lambdas.windows(2).map(|w| w[0] - w[1]).collect();
    let slack = |l: f64| 10.0 * cfg.tol_lambda * l.abs().max(1.0);
    let monotone = lambdas.windows(2).all(|w| w[0] >= w[1] - slack(w[1]));
    let lambda_inf = extrapolate(&lambdas, inf_v);
    let report = ExhaustionReport { dim, radii, lambdas, diffs, lambda_inf, monotone, inf_v, n_per_unit };
    if !report.monotone {
        return Err(Error::NonMonotone(Box::new(report)));
    }
    Ok(report)
}

/// Fits `λ_k ≈ λ∞ + c ρ^k` through the last three values when their
/// differences are positive and shrinking; otherwise the last value.
/// The result is clamped to `[floor, last]`.
pub fn extrapolate(lambdas: &[f64], floor: f64) -> f64 {
    let Some(&last) = lambdas.last() else {
        return f64::NAN;
    };
    let k = lambdas.len();
    let est = if k >= 3 {
        let d1 = lambdas[k - 3] - lambdas[k - 2];
        let d2 = lambdas[k - 2] - lambdas[k - 1];
        if d1 > 0.0 && d2 > 0.0 && d2 < d1 {
            let rho = d2 / d1;
            last - d2 * rho / (1.0 - rho)
        } else {
            last
        }
    } else {
        last
    };
    est.max(floor).min(last)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    /// `λ(-α Δ_p + V)`.
    Diffusion,
    /// `λ(-Δ_p + V(α x))`.
    Dilation,
    /// `λ(-Δ_p + α V) / α`.
    AmplitudePos,
    /// `λ(-Δ_p - α V) / α`.
    AmplitudeNeg,
}

impl SweepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepKind::Diffusion => "diffusion",
            SweepKind::Dilation => "dilation",
            SweepKind::AmplitudePos => "amplitude_pos",
            SweepKind::AmplitudeNeg => "amplitude_neg",
        }
    }
}

/// Where each sweep entry is evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SweepDomain {
    Bounded { domain: DomainSpec, n: usize },
    /// `ℝ^N` proxy: the extrapolated value of an exhaustion.
    Exhaustion { schedule: Vec<DomainSpec>, n_per_unit: usize },
}

impl SweepDomain {
    fn radii(&self) -> Option<Vec<f64>> {
        match self {
            SweepDomain::Bounded { .. } => None,
            SweepDomain::Exhaustion { schedule, .. } => schedule.iter().map(DomainSpec::radius).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub kind: SweepKind,
    pub alphas: Vec<f64>,
    pub lambdas: Vec<f64>,
    /// Radii of the exhaustion behind each `ℝ^N` value.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub warnings: Vec<String>,
}

impl SweepTable {
    pub fn rows(&self) -> Vec<(f64, f64, Option<f64>)> {
        rows(&self.alphas, &self.lambdas)
    }

    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        write_rows(w, &self.rows())
    }
}

fn rows(xs: &[f64], ys: &[f64]) -> Vec<(f64, f64, Option<f64>)> {
    (0..xs.len()).map(|i| (xs[i], ys[i], ys.get(i + 1).map(|next| ys[i] - next))).collect()
}

/// Writes `alpha_or_radius,lambda,diff` with 17 significant digits.
fn write_rows(w: impl Write, rows: &[(f64, f64, Option<f64>)]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["alpha_or_radius", "lambda", "diff"])?;
    for &(x, y, d) in rows {
        let d = d.map(|d| format!("{d:.16e}")).unwrap_or_default();
        out.write_record([format!("{x:.16e}"), format!("{y:.16e}"), d])?;
    }
    out.flush()?;
    Ok(())
}

fn check_alphas(alphas: &[f64]) -> Result<()> {
    if alphas.is_empty() {
        return Err(Error::InvalidParameter("empty parameter list".into()));
    }
    if alphas.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
        return Err(Error::InvalidParameter("sweep parameters must be positive and finite".into()));
    }
    if alphas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("sweep parameters must be strictly increasing".into()));
    }
    Ok(())
}

/// Evaluates `λ(-α Δ_p + W)` on `domain`, with `W` produced by `sample`.
fn evaluate(
    domain: &SweepDomain,
    cfg: &SolverConfig,
    alpha: f64,
    floor: f64,
    sample: impl Fn(&Grid) -> Result<Field> + Sync,
) -> Result<f64> {
    match domain {
        SweepDomain::Bounded { domain, n } => {
            let g = build_grid(domain.clone(), *n)?;
            let v = sample(&g)?;
            Ok(EigenSolver::new(&g, &v, cfg).diffusion(alpha).solve()?.lambda)
        }
        SweepDomain::Exhaustion { schedule, n_per_unit } => {
            Ok(exhaust(schedule, *n_per_unit, cfg, alpha, sample, floor)?.lambda_inf)
        }
    }
}

fn sweep(
    kind: SweepKind,
    v: &PotentialSpec,
    p: f64,
    alphas: &[f64],
    domain: &SweepDomain,
    cfg: &SolverConfig,
    warnings: Vec<String>,
    entry: impl Fn(f64, &SolverConfig) -> Result<f64> + Sync,
) -> Result<SweepTable> {
    v.validate()?;
    check_alphas(alphas)?;
    let cfg = SolverConfig { p, ..cfg.clone() };
    let lambdas = alphas.par_iter().map(|&a| entry(a, &cfg)).collect::<Result<Vec<f64>>>()?;
    Ok(SweepTable { kind, alphas: alphas.to_vec(), lambdas, radii: domain.radii(), warnings })
}

fn window(domain: &SweepDomain) -> f64 {
    match domain {
        SweepDomain::Bounded { domain, .. } => match *domain {
            DomainSpec::Interval { a, b } => a.abs().max(b.abs()),
            DomainSpec::RadialBall { radius, .. } => radius,
            DomainSpec::Box2 { ax, bx, ay, by } => ax.hypot(ay).max(bx.hypot(by)).max(ax.hypot(by)).max(bx.hypot(ay)),
        },
        SweepDomain::Exhaustion { schedule, .. } => schedule.last().and_then(DomainSpec::radius).unwrap_or(1.0),
    }
}

/// `α ↦ λ(-α Δ_p + V)`, computed as `α λ(-Δ_p + V/α)`.
pub fn diffusion_sweep(
    v: &PotentialSpec,
    p: f64,
    alphas: &[f64],
    domain: &SweepDomain,
    cfg: &SolverConfig,
) -> Result<SweepTable> {
    let floor = potential::bounds(v, window(domain), 4096)?.inf_est;
    sweep(SweepKind::Diffusion, v, p, alphas, domain, cfg, Vec::new(), |a, cfg| {
        let l = evaluate(domain, cfg, 1.0, floor / a, |g| potential::sample_transformed(v, g, 1.0 / a, 1.0))?;
        Ok(a * l)
    })
}

/// `α ↦ λ(-Δ_p + V(α ·))`.
///
/// The small-`α` limit needs `V(0) = inf V`; when the sampled potential
/// violates this the table carries a warning.
pub fn dilation_sweep(
    v: &PotentialSpec,
    p: f64,
    alphas: &[f64],
    domain: &SweepDomain,
    cfg: &SolverConfig,
) -> Result<SweepTable> {
    let b = potential::bounds(v, window(domain) * alphas.last().copied().unwrap_or(1.0), 4096)?;
    let mut warnings = Vec::new();
    if v.eval(0.0) > b.inf_est + 1e-12 {
        warnings.push(format!("V(0) = {} exceeds inf V ≈ {}; the small-α limit is not inf V", v.eval(0.0), b.inf_est));
    }
    sweep(SweepKind::Dilation, v, p, alphas, domain, cfg, warnings, |a, cfg| {
        evaluate(domain, cfg, 1.0, b.inf_est, |g| potential::sample_transformed(v, g, 1.0, a))
    })
}

/// `α ↦ λ(-Δ_p + sign α V) / α`.
pub fn amplitude_sweep(
    v: &PotentialSpec,
    p: f64,
    alphas: &[f64],
    sign: f64,
    domain: &SweepDomain,
    cfg: &SolverConfig,
) -> Result<SweepTable> {
    if sign != 1.0 && sign != -1.0 {
        return Err(Error::InvalidParameter(format!("amplitude sign must be ±1, got {sign}")));
    }
    let b = potential::bounds(v, window(domain), 4096)?;
    let floor = if sign > 0.0 { b.inf_est } else { -b.sup_est };
    let kind = if sign > 0.0 { SweepKind::AmplitudePos } else { SweepKind::AmplitudeNeg };
    sweep(kind, v, p, alphas, domain, cfg, Vec::new(), |a, cfg| {
        let l = evaluate(domain, cfg, 1.0, a * floor, |g| potential::sample_transformed(v, g, sign * a, 1.0))?;
        Ok(l / a)
    })
}

/// Second divided differences `f[x_{i-1}, x_i, x_{i+1}]`.
pub fn second_divided_differences(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    (1..xs.len().saturating_sub(1))
        .map(|i| {
            let l = (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]);
            let r = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
            2.0 * (r - l) / (xs[i + 1] - xs[i - 1])
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub alpha_star: f64,
    pub lo: f64,
    pub hi: f64,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub evaluations: usize,
}

/// Bisects `α ↦ family(α)` for a sign change from negative to positive.
///
/// The bracket is halved until its width is at most `tol`; `alpha_star` is
/// its midpoint.
pub fn find_threshold(
    mut family: impl FnMut(f64) -> Result<f64>,
    bracket: (f64, f64),
    tol: f64,
) -> Result<Threshold> {
    let (mut lo, mut hi) = bracket;
    if !(lo < hi) || !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("bracket ({lo}, {hi}) with tolerance {tol}")));
    }
    let mut f_lo = family(lo)?;
    let mut f_hi = family(hi)?;
    let mut evaluations = 2;
    if !(f_lo < 0.0 && f_hi > 0.0) {
        return Err(Error::NoSignChange { lo, hi, f_lo, f_hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f = family(mid)?;
        evaluations += 1;
        if f < 0.0 {
            lo = mid;
            f_lo = f;
        } else {
            hi = mid;
            f_hi = f;
        }
    }
    Ok(Threshold { alpha_star: 0.5 * (lo + hi), lo, hi, lambda_lo: f_lo, lambda_hi: f_hi, evaluations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::exhaustion_schedule;

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn constant_potential_shifts_dirichlet_sequence() {
        let sched = exhaustion_schedule(1, 1.0, 2.0, 3).unwrap();
        let zero = lambda_unbounded(&PotentialSpec::Constant { c: 0.0 }, 2.0, &sched, 64, &cfg()).unwrap();
        let c = lambda_unbounded(&PotentialSpec::Constant { c: 0.75 }, 2.0, &sched, 64, &cfg()).unwrap();
        for (a, b) in zero.lambdas.iter().zip(&c.lambdas) {
            assert!((b - a - 0.75).abs() < 1e-7);
        }
        assert!(zero.diffs.iter().all(|&d| d > 0.0));
        // -u'' on (-R, R): (π / 2R)²
        let exact = (std::f64::consts::PI / 2.0).powi(2);
        assert!((zero.lambdas[0] - exact).abs() / exact < 1e-3);
        assert!(zero.lambda_inf >= 0.0 && zero.lambda_inf <= zero.lambdas[2]);
    }

    #[test]
    fn non_nested_schedule_rejected() {
        let sched = vec![DomainSpec::radial_ball(2, 8.0).unwrap(), DomainSpec::radial_ball(2, 8.0).unwrap()];
        let err = lambda_unbounded(&PotentialSpec::Bump, 2.0, &sched, 32, &cfg()).unwrap_err();
        assert!(matches!(err, Error::NotNested(_)));
        let mixed = vec![DomainSpec::radial_ball(2, 2.0).unwrap(), DomainSpec::radial_ball(3, 4.0).unwrap()];
        assert!(lambda_unbounded(&PotentialSpec::Bump, 2.0, &mixed, 32, &cfg()).is_err());
        let coarse = exhaustion_schedule(2, 2.0, 2.0, 2).unwrap();
        assert!(matches!(
            lambda_unbounded(&PotentialSpec::Bump, 2.0, &coarse, 16, &cfg()),
            Err(Error::TooCoarse { .. })
        ));
    }

    #[test]
    fn extrapolation_is_exact_on_geometric_tails() {
        let seq: Vec<f64> = (0..4).map(|k| 0.5 + 3.0 * 0.25f64.powi(k)).collect();
        assert!((extrapolate(&seq, -1.0) - 0.5).abs() < 1e-14);
        assert_eq!(extrapolate(&seq, 0.52), 0.52);
        assert_eq!(extrapolate(&[2.0, 1.0, 1.5], 0.0), 1.5);
        assert_eq!(extrapolate(&[2.0], 0.0), 2.0);
    }

    #[test]
    fn csv_rows() {
        let t = SweepTable {
            kind: SweepKind::Diffusion,
            alphas: vec![0.1, 1.0],
            lambdas: vec![1.0, 0.25],
            radii: None,
            warnings: vec![],
        };
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "alpha_or_radius,lambda,diff");
        assert_eq!(lines[1], "1.0000000000000001e-1,1.0000000000000000e0,7.5000000000000000e-1");
        assert_eq!(lines[2], "1.0000000000000000e0,2.5000000000000000e-1,");
        assert_eq!(lines[1].split(',').next().unwrap().parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn sweeps_reject_bad_parameters() {
        let d = SweepDomain::Bounded { domain: DomainSpec::interval(0.0, 1.0).unwrap(), n: 16 };
        let v = PotentialSpec::Bump;
        assert!(diffusion_sweep(&v, 2.0, &[1.0, 0.5], &d, &cfg()).is_err());
        assert!(diffusion_sweep(&v, 2.0, &[0.0, 0.5], &d, &cfg()).is_err());
        assert!(amplitude_sweep(&v, 2.0, &[1.0], 0.5, &d, &cfg()).is_err());
    }

    #[test]
    fn constant_dilation_is_flat_and_amplitude_shifts() {
        let d = SweepDomain::Bounded { domain: DomainSpec::radial_ball(2, 1.0).unwrap(), n: 32 };
        let v = PotentialSpec::Constant { c: 0.3 };
        let t = dilation_sweep(&v, 2.0, &[0.1, 1.0, 10.0], &d, &cfg()).unwrap();
        assert!(t.warnings.is_empty());
        assert!(t.lambdas.iter().all(|l| (l - t.lambdas[0]).abs() < 1e-8));
        let a = amplitude_sweep(&v, 2.0, &[1.0, 100.0], 1.0, &d, &cfg()).unwrap();
        let dirichlet = t.lambdas[0] - 0.3;
        for (alpha, l) in a.alphas.iter().zip(&a.lambdas) {
            assert!((l - (0.3 + dirichlet / alpha)).abs() < 1e-7, "{l}");
        }
    }

    #[test]
    fn dilation_warns_when_origin_is_not_the_minimum() {
        let d = SweepDomain::Bounded { domain: DomainSpec::radial_ball(1, 2.0).unwrap(), n: 32 };
        let v = PotentialSpec::RadialWell { depth: 1.0, r0: 0.5, outside: 0.0 };
        let t = dilation_sweep(&v, 2.0, &[1.0], &d, &cfg()).unwrap();
        assert_eq!(t.warnings.len(), 1);
    }

    #[test]
    fn bisection_contract() {
        let f = |a: f64| Ok(a - std::f64::consts::E);
        let t1 = find_threshold(f, (0.0, 10.0), 1e-3).unwrap();
        assert!(t1.lambda_lo < 0.0 && t1.lambda_hi >= 0.0);
        assert!(t1.hi - t1.lo <= 1e-3);
        assert!((t1.alpha_star - std::f64::consts::E).abs() <= 5e-4);
        let t2 = find_threshold(f, (0.0, 10.0), 0.25e-3).unwrap();
        assert!(((t1.hi - t1.lo) / (t2.hi - t2.lo) - 4.0).abs() < 1e-9);
        assert!(matches!(find_threshold(|_| Ok(1.0), (0.0, 1.0), 1e-3), Err(Error::NoSignChange { .. })));
    }

    #[test]
    fn divided_differences_of_quadratic() {
        let xs = [0.0, 0.5, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x * x - x).collect();
        for d in second_divided_differences(&xs, &ys) {
            assert!((d - 6.0).abs() < 1e-12);
        }
    }
}
