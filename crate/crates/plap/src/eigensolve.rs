//! Principal eigenpairs by Rayleigh-quotient minimization and coercive
//! source problems.
//!
//! Both solvers minimize a functional over Dirichlet fields with a
//! Polak–Ribière conjugate direction built from the `L²` gradient (the
//! nodal gradient divided by the lumped weights). Steps are accepted only
//! under the Armijo condition, so the objective never increases. In the
//! eigenvalue solver every accepted iterate is replaced by its absolute value
//! and renormalized to `‖u‖_{L^p} = 1`; neither operation raises the
//! quotient.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::functional::{self, check_p, signed_pow, Quotient, EPS_REG};
use crate::linesearch::LineSearch;
use crate::mesh::{DomainSpec, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    Bump,
    RandomPositive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub p: f64,
    /// Relative change of the eigenvalue between accepted steps, measured
    /// against `max(1, |λ|)`.
    pub tol_lambda: f64,
    /// Largest admissible weak residual against a nodal hat function.
    pub tol_residual: f64,
    pub max_iter: usize,
    pub armijo_c: f64,
    pub armijo_shrink: f64,
    pub rng_seed: u64,
    pub init: Init,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            p: 2.0,
            tol_lambda: 1e-9,
            tol_residual: 1e-6,
            max_iter: 50_000,
            armijo_c: 1e-4,
            armijo_shrink: 0.5,
            rng_seed: 42,
            init: Init::Bump,
        }
    }
}

impl SolverConfig {
    pub fn with_p(p: f64) -> Self {
        SolverConfig { p, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        check_p(self.p)?;
        let unit = |x: f64| x > 0.0 && x < 1.0;
        if !(self.tol_lambda > 0.0 && self.tol_residual > 0.0) {
            return Err(Error::InvalidParameter("tolerances must be positive".into()));
        }
        if !unit(self.armijo_c) || !unit(self.armijo_shrink) {
            return Err(Error::InvalidParameter("Armijo parameters must lie in (0, 1)".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be positive".into()));
        }
        Ok(())
    }

    fn line_search(&self) -> LineSearch {
        LineSearch { c1: self.armijo_c, shrink: self.armijo_shrink, max_evals: 40 }
    }
}

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub lambda: f64,
    /// Positive in the interior, zero on the boundary, `‖φ‖_{L^p} = 1`.
    pub phi: Field,
    /// Largest weak residual over interior nodal hat functions.
    pub residual_inf: f64,
    pub iters: usize,
    /// Quotient after each accepted step; empty unless requested.
    pub history: Vec<f64>,
}

/// Default starting field: a product of coordinate bumps vanishing on the boundary.
pub fn bump_init(grid: &Grid) -> Field {
    let f = match *grid.domain() {
        DomainSpec::Interval { a, b } => Field::from_fn(grid, |c, _| {
            let t = (c[0] - a) / (b - a);
            t * (1.0 - t)
        }),
        DomainSpec::RadialBall { radius, .. } => Field::from_radial(grid, |r| 1.0 - (r / radius).powi(2)),
        DomainSpec::Box2 { ax, bx, ay, by } => Field::from_fn(grid, |c, _| {
            let s = (c[0] - ax) / (bx - ax);
            let t = (c[1] - ay) / (by - ay);
            s * (1.0 - s) * t * (1.0 - t)
        }),
    };
    f.expect("bump is finite").clamped()
}

/// Independent uniform values in `[0.1, 1)` at interior nodes.
pub fn random_positive_init(grid: &Grid, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..grid.len())
        .map(|j| if grid.is_boundary(j) { 0.0 } else { rng.gen_range(0.1..1.0) })
        .collect();
    Field::new(grid, values).expect("finite")
}

pub fn initial_guess(grid: &Grid, cfg: &SolverConfig) -> Field {
    match cfg.init {
        Init::Bump => bump_init(grid),
        Init::RandomPositive => random_positive_init(grid, cfg.rng_seed),
    }
}

/// Principal eigenpair of `K_V = -Δ_p + V` with Dirichlet conditions.
pub fn principal_eig(grid: &Grid, v: &Field, cfg: &SolverConfig) -> Result<EigenPair> {
    EigenSolver::new(grid, v, cfg).solve()
}

/// Builder for the eigenvalue solver with the optional knobs
/// (diffusion coefficient, warm start, history recording).
pub struct EigenSolver<'a> {
    grid: &'a Grid,
    v: &'a Field,
    cfg: &'a SolverConfig,
    alpha: f64,
    init: Option<Field>,
    record: bool,
}

impl<'a> EigenSolver<'a> {
    pub fn new(grid: &'a Grid, v: &'a Field, cfg: &'a SolverConfig) -> Self {
        EigenSolver { grid, v, cfg, alpha: 1.0, init: None, record: false }
    }

    /// Solve for `-α Δ_p + V` instead.
    pub fn diffusion(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn initial(mut self, init: Field) -> Self {
        self.init = Some(init);
        self
    }

    pub fn record_history(mut self, yes: bool) -> Self {
        self.record = yes;
        self
    }

    pub fn solve(self) -> Result<EigenPair> {
        let EigenSolver { grid, v, cfg, alpha, init, record } = self;
        cfg.validate()?;
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("diffusion coefficient {alpha}")));
        }
        if !v.grid().same_as(grid) {
            return Err(Error::GridMismatch);
        }
        let init = init.unwrap_or_else(|| initial_guess(grid, cfg));
        if !init.grid().same_as(grid) {
            return Err(Error::GridMismatch);
        }
        let p = cfg.p;
        let n = grid.len();
        let m = grid.node_weights();
        let q = Quotient { grid, p, alpha, v: v.values() };

        let mut u: Vec<f64> = init.values().iter().map(|x| x.abs()).collect();
        for &b in grid.boundary() {
            u[b] = 0.0;
        }
        normalize(grid, &mut u, p)?;

        let mut grad = vec![0.0; n];
        let (mut lam, _) = q.eval(&u, &mut grad);
        let mut history = Vec::new();
        if record {
            history.push(lam);
        }

        let mut lgrad = vec![0.0; n];
        let mut lgrad_prev = vec![0.0; n];
        let mut grad_prev = vec![0.0; n];
        let mut dir = vec![0.0; n];
        let mut trial = vec![0.0; n];
        let mut tgrad = vec![0.0; n];
        let mut have_prev = false;
        let mut last: Option<(f64, f64)> = None; // (step, slope)
        let mut change = f64::INFINITY;
        let mut failures = 0;
        let ls = cfg.line_search();

        for iter in 0..cfg.max_iter {
            // N(u) = 1, so the nodal residual is ∂R/∂u_j / p.
            let residual = grad.iter().fold(0.0f64, |a, g| a.max(g.abs())) / p;
            if change <= cfg.tol_lambda && residual <= cfg.tol_residual {
                return finish(grid, v, cfg, alpha, u, iter, history);
            }
            for j in 0..n {
                lgrad[j] = if m[j] > 0.0 { grad[j] / m[j] } else { 0.0 };
            }
            let beta = if have_prev {
                let num: f64 = (0..n).map(|j| grad[j] * (lgrad[j] - lgrad_prev[j])).sum();
                let den: f64 = (0..n).map(|j| grad_prev[j] * lgrad_prev[j]).sum();
                if den > 0.0 {
                    (num / den).max(0.0)
                } else {
                    0.0
                }
            } else {
                0.0
            };
            for j in 0..n {
                dir[j] = -lgrad[j] + beta * dir[j];
            }
            let mut slope: f64 = dot(&grad, &dir);
            if !(slope < 0.0) {
                dir.iter_mut().zip(&lgrad).for_each(|(d, g)| *d = -g);
                slope = dot(&grad, &dir);
                last = None;
            }
            if !(slope < 0.0) {
                // stationary to rounding
                change = 0.0;
                if residual <= cfg.tol_residual {
                    continue;
                }
                return Err(Error::NotConverged { iters: iter, value: lam, residual });
            }
            let t0 = match last {
                Some((t, s)) => t * s / slope,
                None => initial_step(grid, alpha, &u, &dir, m),
            };
            let noise = q.noise(&u);
            let step = ls.search(lam, slope, t0, noise, |t| {
                for j in 0..n {
                    trial[j] = u[j] + t * dir[j];
                }
                let (f, _) = q.eval(&trial, &mut tgrad);
                (f, dot(&tgrad, &dir))
            });
            let Some(step) = step else {
                failures += 1;
                have_prev = false;
                last = None;
                if failures > 3 {
                    if residual <= cfg.tol_residual {
                        return finish(grid, v, cfg, alpha, u, iter, history);
                    }
                    return Err(Error::NotConverged { iters: iter, value: lam, residual });
                }
                continue;
            };
            failures = 0;
            let mut flipped = false;
            for j in 0..n {
                let x = u[j] + step.t * dir[j];
                flipped |= x < 0.0;
                u[j] = x.abs();
            }
            normalize(grid, &mut u, p)?;
            grad_prev.copy_from_slice(&grad);
            lgrad_prev.copy_from_slice(&lgrad);
            let old = lam;
            lam = q.eval(&u, &mut grad).0;
            if record {
                history.push(lam);
            }
            change = (old - lam).abs() / lam.abs().max(1.0);
            have_prev = !flipped;
            last = if flipped { None } else { Some((step.t, slope)) };
        }
        let residual = grad.iter().fold(0.0f64, |a, g| a.max(g.abs())) / p;
        Err(Error::NotConverged { iters: cfg.max_iter, value: lam, residual })
    }
}

fn finish(
    grid: &Grid,
    v: &Field,
    cfg: &SolverConfig,
    alpha: f64,
    u: Vec<f64>,
    iters: usize,
    history: Vec<f64>,
) -> Result<EigenPair> {
    let (node, min) = grid
        .interior()
        .iter()
        .map(|&j| (j, u[j]))
        .fold((usize::MAX, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    if !(min > 0.0) {
        return Err(Error::Positivity { node, min });
    }
    let phi = Field::new(grid, u)?;
    let lambda = functional::rayleigh_with_diffusion(&phi, alpha, v, cfg.p)?;
    let r = functional::nodal_residuals_with_diffusion(&phi, alpha, lambda, v, cfg.p)?;
    let residual_inf = r.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    Ok(EigenPair { lambda, phi, residual_inf, iters, history })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(grid: &Grid, u: &mut [f64], p: f64) -> Result<()> {
    let nrm = functional::mass_power_raw(grid, u, p, None);
    if !(nrm > 0.0) || !nrm.is_finite() {
        return Err(Error::ZeroNorm);
    }
    let s = nrm.powf(-1.0 / p);
    u.iter_mut().for_each(|x| *x *= s);
    Ok(())
}

/// A step of the size of the stable explicit step `h² / (4α)`, but never
/// moving `u` by more than about its own size.
fn initial_step(grid: &Grid, alpha: f64, u: &[f64], dir: &[f64], m: &[f64]) -> f64 {
    let un: f64 = u.iter().zip(m).map(|(x, w)| w * x * x).sum::<f64>().sqrt();
    let dn: f64 = dir.iter().zip(m).map(|(x, w)| w * x * x).sum::<f64>().sqrt();
    let explicit = 0.25 * grid.h() * grid.h() / alpha;
    if dn > 0.0 && un > 0.0 {
        explicit.min(un / dn)
    } else {
        explicit
    }
}

/// Solves `-Δ_p u + (V - λ) u^{p-1} = f`, `u = 0` on the boundary, for
/// `f ≥ 0` and `λ` below the principal eigenvalue.
///
/// The principal eigenvalue is computed first to check coercivity; use
/// [`solve_source_below`] when it is already known.
pub fn solve_source(grid: &Grid, v: &Field, lambda: f64, f: &Field, cfg: &SolverConfig) -> Result<Field> {
    let principal = principal_eig(grid, v, cfg)?.lambda;
    solve_source_below(grid, v, lambda, f, cfg, principal)
}

/// As [`solve_source`], trusting the caller's principal eigenvalue.
///
/// Minimizes `J(u) = (1/p) ∫(|∇u|^p + (V - λ) u₊^p) - ∫ f u`. Convergence
/// means every nodal component of `∇J` is at most
/// `tol_residual · max_j m_j f_j`.
pub fn solve_source_below(
    grid: &Grid,
    v: &Field,
    lambda: f64,
    f: &Field,
    cfg: &SolverConfig,
    principal: f64,
) -> Result<Field> {
    cfg.validate()?;
    if !v.grid().same_as(grid) || !f.grid().same_as(grid) {
        return Err(Error::GridMismatch);
    }
    if !(lambda < principal) {
        return Err(Error::Coercivity { lambda, principal });
    }
    f.check_nonnegative()?;
    let p = cfg.p;
    let n = grid.len();
    let m = grid.node_weights();
    let fv: Vec<f64> = (0..n).map(|j| if grid.is_boundary(j) { 0.0 } else { f.values()[j] }).collect();
    let scale = (0..n).map(|j| m[j] * fv[j]).fold(0.0f64, f64::max);
    if scale == 0.0 {
        return Ok(Field::zeros(grid));
    }
    let shifted: Vec<f64> = v.values().iter().map(|x| x - lambda).collect();
    let reg = if p < 2.0 { EPS_REG } else { 0.0 };
    let eval = |u: &[f64], grad: &mut [f64]| -> f64 {
        let pos: Vec<f64> = u.iter().map(|x| x.max(0.0)).collect();
        let energy = functional::gradient_energy_raw(grid, u, p)
            + functional::mass_power_raw(grid, &pos, p, Some(&shifted));
        let lin: f64 = (0..n).map(|j| m[j] * fv[j] * u[j]).sum();
        grad.iter_mut().for_each(|x| *x = 0.0);
        functional::accumulate_flux(grid, u, p, 1.0, reg, grad);
        for j in 0..n {
            grad[j] += m[j] * (shifted[j] * signed_pow(pos[j], p) - fv[j]);
        }
        for &b in grid.boundary() {
            grad[b] = 0.0;
        }
        energy / p - lin
    };

    let noise = |u: &[f64]| {
        let abs_shift: Vec<f64> = shifted.iter().map(|x| x.abs()).collect();
        let pos: Vec<f64> = u.iter().map(|x| x.max(0.0)).collect();
        let mag = (functional::gradient_energy_raw(grid, u, p) + functional::mass_power_raw(grid, &pos, p, Some(&abs_shift)))
            / p
            + (0..n).map(|j| m[j] * fv[j] * u[j].abs()).sum::<f64>();
        functional::rounding(mag, n)
    };
    let tol = cfg.tol_residual * scale;
    let mut u = vec![0.0; n];
    let mut grad = vec![0.0; n];
    let mut jval = eval(&u, &mut grad);
    let mut lgrad = vec![0.0; n];
    let mut lgrad_prev = vec![0.0; n];
    let mut grad_prev = vec![0.0; n];
    let mut dir = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut tgrad = vec![0.0; n];
    let mut have_prev = false;
    let mut last: Option<(f64, f64)> = None;
    let mut failures = 0;
    let ls = cfg.line_search();

    let chain = is_chain(grid);

    for iter in 0..cfg.max_iter {
        let residual = grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
        if residual <= tol.max(gradient_floor(grid, &u, p, &shifted, scale)) {
            return finish_source(grid, u);
        }
        let newton = if chain { newton_direction(grid, &u, p, &shifted, &grad) } else { None };
        let (slope, t0, newton_step) = match newton {
            Some(d) if dot(&grad, &d) < 0.0 => {
                dir = d;
                (dot(&grad, &dir), 1.0, true)
            }
            _ => {
                for j in 0..n {
                    lgrad[j] = if m[j] > 0.0 { grad[j] / m[j] } else { 0.0 };
                }
                let beta = if have_prev {
                    let num: f64 = (0..n).map(|j| grad[j] * (lgrad[j] - lgrad_prev[j])).sum();
                    let den: f64 = (0..n).map(|j| grad_prev[j] * lgrad_prev[j]).sum();
                    if den > 0.0 {
                        (num / den).max(0.0)
                    } else {
                        0.0
                    }
                } else {
                    0.0
                };
                for j in 0..n {
                    dir[j] = -lgrad[j] + beta * dir[j];
                }
                let mut slope = dot(&grad, &dir);
                if !(slope < 0.0) {
                    dir.iter_mut().zip(&lgrad).for_each(|(d, g)| *d = -g);
                    slope = dot(&grad, &dir);
                    last = None;
                }
                let t0 = match last {
                    Some((t, s)) => t * s / slope,
                    None => 0.25 * grid.h() * grid.h(),
                };
                (slope, t0, false)
            }
        };
        if !(slope < 0.0) {
            return Err(Error::NotConverged { iters: iter, value: jval, residual: residual / scale });
        }
        let step = ls.search(jval, slope, t0, noise(&u), |t| {
            for j in 0..n {
                trial[j] = u[j] + t * dir[j];
            }
            let fj = eval(&trial, &mut tgrad);
            (fj, dot(&tgrad, &dir))
        });
        let Some(step) = step else {
            failures += 1;
            have_prev = false;
            last = None;
            if failures > 3 {
                return Err(Error::NotConverged { iters: iter, value: jval, residual: residual / scale });
            }
            continue;
        };
        failures = 0;
        for j in 0..n {
            u[j] += step.t * dir[j];
        }
        grad_prev.copy_from_slice(&grad);
        lgrad_prev.copy_from_slice(&lgrad);
        jval = eval(&u, &mut grad);
        have_prev = !newton_step;
        last = if newton_step { None } else { Some((step.t, slope)) };
    }
    let residual = grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
    Err(Error::NotConverged { iters: cfg.max_iter, value: jval, residual: residual / scale })
}

/// Rounding level of the nodal gradient of the source functional at `u`.
fn gradient_floor(grid: &Grid, u: &[f64], p: f64, shifted: &[f64], scale: f64) -> f64 {
    let m = grid.node_weights();
    let flux = grid
        .elements()
        .iter()
        .map(|e| {
            let gsq: f64 = e.diffs().iter().map(|d| ((u[d.to] - u[d.from]) * d.inv_h).powi(2)).sum();
            let inv_h = e.diffs().iter().fold(0.0f64, |a, d| a.max(d.inv_h));
            e.weight * gsq.powf(0.5 * (p - 1.0)) * inv_h
        })
        .fold(0.0f64, f64::max);
    let mass = (0..u.len()).map(|j| m[j] * shifted[j].abs() * u[j].max(0.0).powf(p - 1.0)).fold(0.0f64, f64::max);
    functional::rounding(flux + mass + scale, u.len())
}

/// Interval and radial grids: every element is a single difference between
/// consecutive nodes, so Hessians are tridiagonal.
fn is_chain(grid: &Grid) -> bool {
    grid.elements().iter().all(|e| e.diffs().len() == 1 && e.diffs()[0].to == e.diffs()[0].from + 1)
}

/// Newton direction `-H⁻¹∇J` for the source functional on a chain grid, or
/// `None` when the tridiagonal Hessian is not positive definite.
fn newton_direction(grid: &Grid, u: &[f64], p: f64, shifted: &[f64], grad: &[f64]) -> Option<Vec<f64>> {
    let n = u.len();
    let m = grid.node_weights();
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n]; // off[j] couples j and j + 1
    for e in grid.elements() {
        let d = e.diffs()[0];
        let g = (u[d.to] - u[d.from]) * d.inv_h;
        let reg = if p < 2.0 { EPS_REG } else { 0.0 };
        let k = if p == 2.0 { 1.0 } else { (p - 1.0) * (g * g + reg * reg).powf(0.5 * (p - 2.0)) };
        let c = e.weight * k * d.inv_h * d.inv_h;
        diag[d.from] += c;
        diag[d.to] += c;
        off[d.from] -= c;
    }
    for j in 0..n {
        let x = u[j].max(0.0);
        let mass = if p == 2.0 { if u[j] > 0.0 { 1.0 } else { 0.0 } } else { (p - 1.0) * x.powf(p - 2.0) };
        diag[j] += m[j] * shifted[j] * mass;
    }
    for &b in grid.boundary() {
        diag[b] = 1.0;
        if b > 0 {
            off[b - 1] = 0.0;
        }
        off[b] = 0.0;
    }
    let mut rhs: Vec<f64> = grad.iter().map(|g| -g).collect();
    for &b in grid.boundary() {
        rhs[b] = 0.0;
    }
    // Thomas algorithm, failing on a non-positive pivot
    let mut c = vec![0.0; n];
    let mut piv = diag[0];
    if !(piv > 0.0) {
        return None;
    }
    c[0] = off[0] / piv;
    rhs[0] /= piv;
    for j in 1..n {
        piv = diag[j] - off[j - 1] * c[j - 1];
        if !(piv > 0.0) || !piv.is_finite() {
            return None;
        }
        c[j] = off[j] / piv;
        rhs[j] = (rhs[j] - off[j - 1] * rhs[j - 1]) / piv;
    }
    for j in (0..n - 1).rev() {
        rhs[j] -= c[j] * rhs[j + 1];
    }
    Some(rhs)
}

fn finish_source(grid: &Grid, u: Vec<f64>) -> Result<Field> {
    for &j in grid.interior() {
        if !(u[j] > 0.0) {
            return Err(Error::Positivity { node: j, min: u[j] });
        }
    }
    Field::new(grid, u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_grid;
    use std::f64::consts::PI;

    #[test]
    fn dirichlet_sine_eigenvalue() {
        let g = build_grid(DomainSpec::interval(0.0, 1.0).unwrap(), 256).unwrap();
        let ep = principal_eig(&g, &Field::zeros(&g), &SolverConfig::default()).unwrap();
        let h = g.h();
        let discrete = 4.0 / (h * h) * (PI * h / 2.0).sin().powi(2);
        assert!((ep.lambda - discrete).abs() / discrete < 1e-8, "{} vs {discrete}", ep.lambda);
        assert!(ep.residual_inf <= 1e-6);
        assert!(ep.phi.is_dirichlet());
        assert!((functional::lp_norm_p(&ep.phi, 2.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_potential_shifts_eigenvalue() {
        let g = build_grid(DomainSpec::radial_ball(2, 1.0).unwrap(), 64).unwrap();
        let cfg = SolverConfig::with_p(3.0);
        let a = principal_eig(&g, &Field::zeros(&g), &cfg).unwrap();
        let b = principal_eig(&g, &Field::constant(&g, 2.5), &cfg).unwrap();
        assert!((b.lambda - a.lambda - 2.5).abs() <= 10.0 * cfg.tol_lambda * b.lambda.abs());
    }

    #[test]
    fn quotient_never_increases() {
        let g = build_grid(DomainSpec::interval(0.0, 1.0).unwrap(), 128).unwrap();
        let v = Field::from_fn(&g, |c, _| 10.0 * (6.0 * c[0]).cos()).unwrap();
        let cfg = SolverConfig { p: 2.5, init: Init::RandomPositive, ..Default::default() };
        let ep = EigenSolver::new(&g, &v, &cfg).record_history(true).solve().unwrap();
        assert!(ep.history.len() > 2);
        for w in ep.history.windows(2) {
            assert!(w[1] <= w[0] + 1e-13 * w[0].abs().max(1.0), "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn box_eigenvalue() {
        let g = build_grid(DomainSpec::box2(0.0, 1.0, 0.0, 1.0).unwrap(), 32).unwrap();
        let ep = principal_eig(&g, &Field::zeros(&g), &SolverConfig::default()).unwrap();
        let h = g.h();
        let discrete = 2.0 * 4.0 / (h * h) * (PI * h / 2.0).sin().powi(2);
        assert!((ep.lambda - discrete).abs() / discrete < 1e-7, "{} vs {discrete}", ep.lambda);
    }

    #[test]
    fn diffusion_scaling() {
        let g = build_grid(DomainSpec::radial_ball(1, 4.0).unwrap(), 128).unwrap();
        let v = crate::potential::sample(&crate::potential::PotentialSpec::Bump, &g).unwrap();
        let cfg = SolverConfig::default();
        let alpha = 0.3;
        let direct = EigenSolver::new(&g, &v, &cfg).diffusion(alpha).solve().unwrap();
        let via = principal_eig(&g, &v.scaled(1.0 / alpha), &cfg).unwrap();
        assert!((direct.lambda - alpha * via.lambda).abs() < 1e-7);
    }

    #[test]
    fn rejects_bad_config() {
        let g = build_grid(DomainSpec::interval(0.0, 1.0).unwrap(), 16).unwrap();
        let v = Field::zeros(&g);
        for cfg in [
            SolverConfig { p: 1.0, ..Default::default() },
            SolverConfig { tol_lambda: 0.0, ..Default::default() },
            SolverConfig { armijo_c: 1.0, ..Default::default() },
            SolverConfig { armijo_shrink: 0.0, ..Default::default() },
        ] {
            assert!(matches!(principal_eig(&g, &v, &cfg), Err(Error::InvalidParameter(_))));
        }
    }

    #[test]
    fn iteration_budget_is_enforced() {
        let g = build_grid(DomainSpec::interval(0.0, 1.0).unwrap(), 512).unwrap();
        let cfg = SolverConfig { max_iter: 3, init: Init::RandomPositive, ..Default::default() };
        let err = principal_eig(&g, &Field::zeros(&g), &cfg).unwrap_err();
        assert!(matches!(err, Error::NotConverged { iters: 3, .. }));
    }

    #[test]
    fn poisson_parabola() {
        let g = build_grid(DomainSpec::interval(0.0, 1.0).unwrap(), 200).unwrap();
        let cfg = SolverConfig::default();
        let u = solve_source(&g, &Field::zeros(&g), 0.0, &Field::constant(&g, 1.0), &cfg).unwrap();
        for (c, &x) in g.coords().iter().zip(u.values()) {
            let exact = 0.5 * c[0] * (1.0 - c[0]);
            assert!((x - exact).abs() < 1e-6, "{x} vs {exact}");
        }
        assert!((u.max() - 0.125).abs() < 1e-3);
    }

    #[test]
    fn zero_source_gives_zero() {
        let g = build_grid(DomainSpec::interval(0.0, 1.0).unwrap(), 16).unwrap();
        let u = solve_source_below(&g, &Field::zeros(&g), 0.0, &Field::zeros(&g), &SolverConfig::default(), 9.0)
            .unwrap();
        assert!(u.values().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn source_is_linear_at_p2() {
        let g = build_grid(DomainSpec::radial_ball(2, 1.0).unwrap(), 64).unwrap();
        let cfg = SolverConfig { tol_residual: 1e-12, ..Default::default() };
        let v = Field::from_radial(&g, |r| r * r).unwrap();
        let f = Field::from_radial(&g, |r| (-4.0 * r * r).exp()).unwrap();
        let u1 = solve_source_below(&g, &v, -1.0, &f, &cfg, 5.0).unwrap();
        let u2 = solve_source_below(&g, &v, -1.0, &f.scaled(2.0), &cfg, 5.0).unwrap();
        for (a, b) in u1.values().iter().zip(u2.values()) {
            assert!((2.0 * a - b).abs() <= 1e-12 * b.abs().max(1e-3));
        }
    }

    #[test]
    fn coercivity_violation() {
        let g = build_grid(DomainSpec::interval(0.0, 1.0).unwrap(), 64).unwrap();
        let err = solve_source(&g, &Field::zeros(&g), 12.0, &Field::constant(&g, 1.0), &SolverConfig::default())
            .unwrap_err();
        assert!(matches!(err, Error::Coercivity { .. }));
    }
}
