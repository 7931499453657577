//! Numerical experiments around the eigenvalue on `ℝ^N`: tail decay,
//! growth bounds, simplicity, the spectrum construction and the weak
//! maximum principle.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigensolve::{principal_eig, solve_source_below, Init, SolverConfig};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::functional;
use crate::limits::lambda_unbounded;
use crate::mesh::{build_grid, DomainSpec, Grid};
use crate::potential::{self, PotentialSpec};

/// Outcome of an experiment; `pass` is a function of `observed` alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub inputs: BTreeMap<String, String>,
    pub observed: BTreeMap<String, f64>,
    pub pass: bool,
    pub notes: String,
}

impl ExperimentReport {
    fn new(name: &str) -> Self {
        ExperimentReport {
            name: name.into(),
            inputs: BTreeMap::new(),
            observed: BTreeMap::new(),
            pass: false,
            notes: String::new(),
        }
    }

    fn input(&mut self, key: &str, value: impl ToString) {
        self.inputs.insert(key.into(), value.to_string());
    }

    fn observe(&mut self, key: impl Into<String>, value: f64) {
        self.observed.insert(key.into(), value);
    }

    fn note(&mut self, text: &str) {
        if !self.notes.is_empty() {
            self.notes.push_str("; ");
        }
        self.notes.push_str(text);
    }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Exponential decay rate of a radial field over `r_lo ≤ r ≤ r_hi`: the
/// negated least-squares slope of `log φ` against `r`.
pub fn decay_rate_fit(phi: &Field, window: (f64, f64)) -> Result<f64> {
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidParameter(format!("decay window ({lo}, {hi})")));
    }
    let mut pts = Vec::new();
    for (j, (&r, &u)) in phi.grid().radii().iter().zip(phi.values()).enumerate() {
        if r >= lo && r <= hi {
            if !(u > 0.0) {
                return Err(Error::NegativeValue { node: j, value: u });
            }
            pts.push((r, u.ln()));
        }
    }
    if pts.len() < 2 {
        return Err(Error::InvalidParameter(format!("fewer than two nodes in ({lo}, {hi})")));
    }
    let n = pts.len() as f64;
    let mr = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ml = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mr) * (p.1 - ml)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mr).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("decay window holds a single radius".into()));
    }
    Ok(-sxy / sxx)
}

fn origin_value(phi: &Field) -> f64 {
    let radii = phi.grid().radii();
    let j = (0..radii.len()).min_by(|&a, &b| radii[a].total_cmp(&radii[b])).unwrap_or(0);
    phi.values()[j]
}

/// Whether `φ(x) ≤ C e^{β|x|} φ(0)` at every node.
pub fn growth_bound_check(phi: &Field, c: f64, beta: f64) -> bool {
    fit_growth_constant(phi, beta) <= c
}

/// Smallest `C` with `φ(x) ≤ C e^{β|x|} φ(0)` on the grid.
pub fn fit_growth_constant(phi: &Field, beta: f64) -> f64 {
    let u0 = origin_value(phi);
    phi.grid().radii().iter().zip(phi.values()).map(|(&r, &u)| u / (u0 * (beta * r).exp())).fold(0.0, f64::max)
}

/// Sup-norm tolerance for eigenfunctions obtained from different seeds.
pub const SIMPLICITY_TOL: f64 = 1e-4;

/// Solves from random positive starts and measures the spread of the
/// normalized eigenfunctions.
pub fn simplicity_probe(grid: &Grid, v: &Field, cfg: &SolverConfig, seeds: &[u64]) -> Result<ExperimentReport> {
    if cfg.p < 2.0 {
        return Err(Error::InvalidParameter(format!("simplicity probe needs p ≥ 2, got {}", cfg.p)));
    }
    let mut rep = ExperimentReport::new("simplicity_probe");
    rep.input("domain", grid.domain());
    rep.input("n", grid.n());
    rep.input("p", cfg.p);
    rep.input("seeds", format!("{seeds:?}"));
    let pairs = seeds
        .par_iter()
        .map(|&s| {
            let c = SolverConfig { rng_seed: s, init: Init::RandomPositive, ..cfg.clone() };
            principal_eig(grid, v, &c)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut spread = 0.0f64;
    let mut lambda_spread = 0.0f64;
    for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            // both are positive with unit L^p norm, so no further alignment
            spread = spread.max(pairs[i].phi.sup_distance(&pairs[j].phi)?);
            lambda_spread = lambda_spread.max((pairs[i].lambda - pairs[j].lambda).abs());
        }
    }
    let radii = grid.radii();
    let rmax = radii.iter().copied().fold(0.0, f64::max);
    let liminf = (0..radii.len())
        .filter(|&j| radii[j] >= 0.5 * rmax)
        .map(|j| v.values()[j])
        .fold(f64::INFINITY, f64::min);
    if let Some(first) = pairs.first() {
        rep.observe("lambda", first.lambda);
        rep.observe("gap", liminf - first.lambda);
        if liminf - first.lambda <= 0.0 {
            rep.note("eigenvalue is not below the outer values of V; simplicity here is the bounded-domain one");
        }
    }
    rep.observe("seeds", seeds.len() as f64);
    rep.observe("sup_spread", spread);
    rep.observe("lambda_spread", lambda_spread);
    rep.pass = spread <= SIMPLICITY_TOL;
    Ok(rep)
}

/// Discretization and thresholds for [`spectrum_scan`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSettings {
    pub dim: usize,
    pub n_per_unit: usize,
    /// Shifts within this distance of the extrapolated eigenvalue count as
    /// the endpoint.
    pub margin: f64,
    /// Tolerance on the source solves relative to the largest nodal source.
    pub source_tol: f64,
}

impl Default for ScanSettings {
    fn default() -> Self {
        ScanSettings { dim: 1, n_per_unit: 32, margin: 1e-3, source_tol: 1e-13 }
    }
}

/// Smooth unit-mass bump supported in `0.75 R < |x| < 0.875 R`.
pub fn annular_source(grid: &Grid, radius: f64) -> Result<Field> {
    let (a, b) = (0.75 * radius, 0.875 * radius);
    let (c, w) = (0.5 * (a + b), 0.5 * (b - a));
    let f = Field::from_radial(grid, |r| {
        let s = (r - c) / w;
        if s.abs() < 1.0 {
            (-1.0 / (1.0 - s * s)).exp()
        } else {
            0.0
        }
    })?;
    let mass: f64 = f.values().iter().zip(grid.node_weights()).map(|(x, m)| x * m).sum();
    if !(mass > 0.0) {
        return Err(Error::TooCoarse { n: grid.n(), min: grid.n() + 1 });
    }
    Ok(f.scaled(1.0 / mass))
}

/// One probed shift of [`spectrum_scan`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub lambda: f64,
    /// The normalized solutions stayed positive and their inner sups
    /// changed by less than a factor 2 between consecutive radii.
    pub stabilizes: bool,
    /// Some ball had principal eigenvalue at or below `lambda`.
    pub coercivity_violated: bool,
    /// Largest ratio between inner sups on consecutive radii.
    pub max_ratio: f64,
    pub expected_in_set: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumScan {
    pub lambda_hat_inf: f64,
    pub ball_lambdas: Vec<f64>,
    pub entries: Vec<ScanEntry>,
    pub report: ExperimentReport,
}

/// Probes which shifts admit a positive solution of `K_V[u] = λ u^{p-1}` on
/// `ℝ^N` through solutions of source problems with sources pushed to
/// infinity.
pub fn spectrum_scan(
    v: &PotentialSpec,
    p: f64,
    lambdas: &[f64],
    radii: &[f64],
    cfg: &SolverConfig,
    settings: &ScanSettings,
) -> Result<SpectrumScan> {
    if radii.len() < 2 {
        return Err(Error::InvalidParameter("spectrum scan needs at least two radii".into()));
    }
    let schedule = radii.iter().map(|&r| DomainSpec::radial_ball(settings.dim, r)).collect::<Result<Vec<_>>>()?;
    let exh = lambda_unbounded(v, p, &schedule, settings.n_per_unit, cfg)?;
    let lambda_hat = exh.lambda_inf;
    let grids = schedule
        .iter()
        .zip(radii)
        .map(|(d, &r)| build_grid(d.clone(), (r * settings.n_per_unit as f64).round() as usize))
        .collect::<Result<Vec<_>>>()?;
    let potentials = grids.iter().map(|g| potential::sample_transformed(v, g, 1.0, 1.0)).collect::<Result<Vec<_>>>()?;
    let sources = grids.iter().zip(radii).map(|(g, &r)| annular_source(g, r)).collect::<Result<Vec<_>>>()?;
    let inner = 0.5 * radii[0];
    let src_cfg = SolverConfig { p, tol_residual: settings.source_tol, ..cfg.clone() };

    let entries = lambdas
        .par_iter()
        .map(|&lambda| {
            let mut sups = Vec::new();
            let mut positive = true;
            let mut violated = false;
            for k in 0..grids.len() {
                let g = &grids[k];
                match solve_source_below(g, &potentials[k], lambda, &sources[k], &src_cfg, exh.lambdas[k]) {
                    Ok(u) => {
                        let u0 = u.values()[0];
                        positive &= u0 > 0.0 && g.interior().iter().all(|&j| u.values()[j] > 0.0);
                        let sup = g
                            .radii()
                            .iter()
                            .zip(u.values())
                            .filter(|(&r, _)| r <= inner)
                            .map(|(_, &x)| x / u0)
                            .fold(0.0, f64::max);
                        sups.push(sup);
                    }
                    Err(Error::Coercivity { .. }) => violated = true,
                    Err(Error::Positivity { .. }) => positive = false,
                    Err(e) => return Err(e),
                }
            }
            let max_ratio = sups
                .windows(2)
                .map(|w| (w[1] / w[0]).max(w[0] / w[1]))
                .fold(1.0, f64::max);
            let stabilizes =
                !violated && positive && sups.len() == grids.len() && max_ratio.is_finite() && max_ratio < 2.0;
            Ok(ScanEntry {
                lambda,
                stabilizes,
                coercivity_violated: violated,
                max_ratio,
                expected_in_set: lambda <= lambda_hat + settings.margin,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rep = ExperimentReport::new("spectrum_scan");
    rep.input("potential", format!("{v:?}"));
    rep.input("p", p);
    rep.input("dim", settings.dim);
    rep.input("radii", format!("{radii:?}"));
    rep.input("lambdas", format!("{lambdas:?}"));
    rep.observe("lambda_hat_inf", lambda_hat);
    let mut consistent = true;
    for (i, e) in entries.iter().enumerate() {
        rep.observe(format!("entry_{i:02}.lambda"), e.lambda);
        rep.observe(format!("entry_{i:02}.stabilizes"), flag(e.stabilizes));
        rep.observe(format!("entry_{i:02}.coercivity_violated"), flag(e.coercivity_violated));
        rep.observe(format!("entry_{i:02}.max_ratio"), e.max_ratio);
        consistent &= if e.expected_in_set { e.stabilizes } else { e.coercivity_violated };
    }
    let closed = downward_closed(&entries);
    rep.observe("downward_closed", flag(closed));
    rep.pass = consistent && closed;
    rep.note("stabilization means inner-ball sups within a factor 2 across consecutive radii");
    Ok(SpectrumScan { lambda_hat_inf: lambda_hat, ball_lambdas: exh.lambdas, entries, report: rep })
}

/// Every probed shift below a stabilizing one also stabilizes.
pub fn downward_closed(entries: &[ScanEntry]) -> bool {
    entries.iter().all(|e| !e.stabilizes || entries.iter().all(|o| o.lambda >= e.lambda || o.stabilizes))
}

/// Tolerance on `max u` for candidates satisfying the hypotheses.
pub const MAX_PRINCIPLE_TOL: f64 = 1e-8;

/// Tests the weak maximum principle on a radial grid: every candidate with
/// `K_V[u] ≤ 0` weakly and `u ≤ 0` on the boundary must satisfy `u ≤ 0`.
///
/// The hypothesis `λ(K_V, ℝ^N) > 0` is checked with an exhaustion by balls
/// of radius `R/4`, `R/2`, `R` at the grid's resolution. When it fails the
/// report records whether a candidate violates the conclusion, which shows
/// that the hypothesis cannot be dropped.
pub fn max_principle_check(
    v: &PotentialSpec,
    p: f64,
    candidates: &[Field],
    grid: &Grid,
    cfg: &SolverConfig,
) -> Result<ExperimentReport> {
    let (dim, radius) = match *grid.domain() {
        DomainSpec::RadialBall { dim, radius } => (dim, radius),
        ref d => return Err(Error::InvalidDomain(format!("{d} is not a radial ball"))),
    };
    let n_per_unit = (grid.n() as f64 / radius).round() as usize;
    let schedule = [0.25, 0.5, 1.0].map(|s| DomainSpec::radial_ball(dim, s * radius));
    let schedule = schedule.into_iter().collect::<Result<Vec<_>>>()?;
    let exh = lambda_unbounded(v, p, &schedule, n_per_unit, cfg)?;
    let holds = exh.lambda_inf > 0.0;
    let vf = potential::sample_transformed(v, grid, 1.0, 1.0)?;

    let mut rep = ExperimentReport::new("max_principle_check");
    rep.input("potential", format!("{v:?}"));
    rep.input("p", p);
    rep.input("domain", grid.domain());
    rep.input("n", grid.n());
    rep.observe("lambda_hat_inf", exh.lambda_inf);
    rep.observe("hypothesis_lambda_positive", flag(holds));

    let mut checked = 0usize;
    let mut worst = f64::NEG_INFINITY;
    let mut flat_nodes = 0usize;
    for (i, u) in candidates.iter().enumerate() {
        u.check_same_grid(&vf)?;
        let r = functional::nodal_residuals(u, 0.0, &vf, p)?;
        let sub = grid.interior().iter().all(|&j| r[j] <= cfg.tol_residual);
        let bdry = grid.boundary().iter().all(|&j| u.values()[j] <= 0.0);
        let admissible = sub && bdry;
        rep.observe(format!("candidate_{i:02}.admissible"), flag(admissible));
        rep.observe(format!("candidate_{i:02}.max"), u.max());
        if admissible {
            checked += 1;
            worst = worst.max(u.max());
            flat_nodes += flat_interior_nodes(u);
        }
    }
    rep.observe("candidates_checked", checked as f64);
    rep.observe("max_over_admissible", if checked > 0 { worst } else { 0.0 });
    rep.observe("flat_gradient_nodes", flat_nodes as f64);
    if flat_nodes > 0 {
        rep.note("some admissible candidates have a vanishing discrete gradient at interior nodes");
    }
    let violated = checked > 0 && worst > MAX_PRINCIPLE_TOL;
    if holds {
        rep.pass = !violated;
    } else {
        rep.observe("counterexample_found", flag(violated));
        rep.pass = true;
        rep.note("λ(K_V) ≤ 0: the principle is not expected; admissible positive candidates demonstrate sharpness");
    }
    Ok(rep)
}

/// Plateau cutoff: 1 on `B_a`, linear down to 0 at `|x| = b`.
pub fn plateau_cutoff(grid: &Grid, a: f64, b: f64) -> Result<Field> {
    if !(a >= 0.0 && b > a) {
        return Err(Error::InvalidParameter(format!("plateau cutoff ({a}, {b})")));
    }
    Field::from_radial(grid, |r| ((b - r) / (b - a)).clamp(0.0, 1.0))
}

/// Measures `lhs/rhs` of the cutoff inequality for the principal
/// eigenfunction on a ball with `λ* = λ̂` and `λ = λ̂ − 1`, at several
/// resolutions. Passes when every ratio is finite and positive and they
/// stay within a factor 2 of each other.
pub fn cutoff_ratio_check(
    v: &PotentialSpec,
    p: f64,
    dim: usize,
    radius: f64,
    plateau: (f64, f64),
    cells_per_unit: &[usize],
    cfg: &SolverConfig,
) -> Result<ExperimentReport> {
    if plateau.1 > radius {
        return Err(Error::InvalidParameter(format!("cutoff support {} exceeds radius {radius}", plateau.1)));
    }
    let domain = DomainSpec::radial_ball(dim, radius)?;
    let c = SolverConfig { p, ..cfg.clone() };
    let runs = cells_per_unit
        .par_iter()
        .map(|&k| {
            let g = build_grid(domain.clone(), (radius * k as f64).round() as usize)?;
            let vf = potential::sample(v, &g)?;
            let ep = principal_eig(&g, &vf, &c)?;
            let psi = plateau_cutoff(&g, plateau.0, plateau.1)?;
            let (lhs, rhs) = functional::cutoff_inequality(&ep.phi, ep.lambda - 1.0, ep.lambda, &psi, p)?;
            Ok((ep.lambda, lhs, rhs))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rep = ExperimentReport::new("cutoff_ratio_check");
    rep.input("potential", format!("{v:?}"));
    rep.input("p", p);
    rep.input("domain", &domain);
    rep.input("plateau", format!("{plateau:?}"));
    rep.input("cells_per_unit", format!("{cells_per_unit:?}"));
    let mut ratios = Vec::new();
    for (i, &(lambda, lhs, rhs)) in runs.iter().enumerate() {
        let ratio = lhs / rhs;
        rep.observe(format!("level_{i:02}.lambda"), lambda);
        rep.observe(format!("level_{i:02}.lhs"), lhs);
        rep.observe(format!("level_{i:02}.rhs"), rhs);
        rep.observe(format!("level_{i:02}.ratio"), ratio);
        ratios.push(ratio);
    }
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = hi / lo;
    rep.observe("ratio_spread", spread);
    rep.pass = !ratios.is_empty() && lo > 0.0 && hi.is_finite() && spread < 2.0;
    rep.note("λ* is the ball eigenvalue and λ = λ* − 1; the eigenfunction is the test function u");
    Ok(rep)
}

fn flat_interior_nodes(u: &Field) -> usize {
    let g = u.grid();
    let mut moving = vec![false; g.len()];
    for e in g.elements() {
        if e.diffs().iter().any(|d| u.values()[d.to] != u.values()[d.from]) {
            e.nodes().for_each(|j| moving[j] = true);
        }
    }
    g.interior().iter().filter(|&&j| !moving[j]).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball(dim: usize, r: f64, n: usize) -> Grid {
        build_grid(DomainSpec::radial_ball(dim, r).unwrap(), n).unwrap()
    }

    #[test]
    fn decay_of_pure_exponential() {
        let g = ball(2, 10.0, 200);
        let phi = Field::from_radial(&g, |r| 3.0 * (-2.0 * r).exp()).unwrap();
        assert!((decay_rate_fit(&phi, (2.0, 8.0)).unwrap() - 2.0).abs() < 1e-10);
        let flat = Field::constant(&g, 0.7);
        assert!(decay_rate_fit(&flat, (1.0, 5.0)).unwrap().abs() < 1e-12);
        assert!(decay_rate_fit(&Field::zeros(&g), (1.0, 5.0)).is_err());
        assert!(decay_rate_fit(&flat, (5.0, 1.0)).is_err());
    }

    #[test]
    fn growth_bounds() {
        let g = ball(1, 8.0, 64);
        let phi = Field::from_radial(&g, |r| (0.5 * r).exp()).unwrap();
        assert!(growth_bound_check(&phi, 1.0, 0.5));
        assert!(!growth_bound_check(&phi, 1.0, 0.4));
        let c = fit_growth_constant(&phi, 0.4);
        assert!(growth_bound_check(&phi, c, 0.4));
        assert!((c - (0.1f64 * 8.0).exp()).abs() < 1e-12);
    }

    #[test]
    fn single_seed_is_trivially_simple() {
        let g = build_grid(DomainSpec::interval(0.0, 1.0).unwrap(), 32).unwrap();
        let rep = simplicity_probe(&g, &Field::zeros(&g), &SolverConfig::default(), &[7]).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.observed["sup_spread"], 0.0);
    }

    #[test]
    fn source_has_unit_mass_in_annulus() {
        let g = ball(2, 8.0, 256);
        let f = annular_source(&g, 8.0).unwrap();
        let mass: f64 = f.values().iter().zip(g.node_weights()).map(|(x, m)| x * m).sum();
        assert!((mass - 1.0).abs() < 1e-12);
        for (&r, &x) in g.radii().iter().zip(f.values()) {
            if x > 0.0 {
                assert!(r > 6.0 && r < 7.0);
            }
        }
    }

    #[test]
    fn downward_closure() {
        let e = |lambda, stabilizes| ScanEntry {
            lambda,
            stabilizes,
            coercivity_violated: !stabilizes,
            max_ratio: 1.0,
            expected_in_set: stabilizes,
        };
        assert!(downward_closed(&[e(-1.0, true), e(0.0, true), e(1.0, false)]));
        assert!(!downward_closed(&[e(-1.0, false), e(0.0, true)]));
    }

    #[test]
    fn plateau_shape() {
        let g = ball(1, 16.0, 512);
        let psi = plateau_cutoff(&g, 4.0, 8.0).unwrap();
        for (&r, &x) in g.radii().iter().zip(psi.values()) {
            let want = if r <= 4.0 { 1.0 } else if r >= 8.0 { 0.0 } else { (8.0 - r) / 4.0 };
            assert!((x - want).abs() < 1e-12);
        }
        assert!(plateau_cutoff(&g, 4.0, 4.0).is_err());
    }

    #[test]
    fn cutoff_ratio_is_stable() {
        let v = PotentialSpec::RadialWell { depth: -1.0, r0: 1.0, outside: 1.0 };
        let rep = cutoff_ratio_check(&v, 2.0, 1, 16.0, (4.0, 8.0), &[32, 64], &SolverConfig::default()).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn max_principle_trivial_candidates() {
        let g = ball(1, 8.0, 256);
        let v = PotentialSpec::Constant { c: 0.5 };
        let cfg = SolverConfig::default();
        let vf = potential::sample(&v, &g).unwrap();
        let ep = principal_eig(&g, &vf, &cfg).unwrap();
        let cands = vec![Field::zeros(&g), ep.phi.scaled(-1.0), ep.phi.clone()];
        let rep = max_principle_check(&v, 2.0, &cands, &g, &cfg).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.observed["candidate_02.admissible"], 0.0);
        assert_eq!(rep.observed["candidates_checked"], 2.0);
    }
}
