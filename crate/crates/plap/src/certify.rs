//! Eigenvalue bounds from explicit witnesses.
//!
//! A positive field whose weak residual `K_V[ψ] - λψ^{p-1}` is nonnegative
//! against every interior hat function certifies `λ ≤ λ(K_V)` on its grid.
//! Any admissible Dirichlet field certifies `λ(K_V) ≤ R(ψ)`. The closed-form
//! barriers used as witnesses in limit arguments are provided as samplers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::functional::{self, check_p};
use crate::mesh::{build_grid, DomainSpec, Grid, GridDescriptor};
use crate::potential::{self, PotentialSpec};

/// Slack on the worst nodal residual of a lower certificate.
pub const LOWER_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub direction: Direction,
    pub bound: f64,
    /// Lower: the smallest nodal residual at `bound`. Upper: the smallest
    /// nodal residual at the Rayleigh value, which vanishes exactly for an
    /// eigenfunction.
    pub margin: f64,
    pub witness_id: String,
    pub valid: bool,
    pub grid: GridDescriptor,
}

impl Certificate {
    pub fn with_witness(mut self, id: impl Into<String>) -> Self {
        self.witness_id = id.into();
        self
    }
}

fn min_interior(grid: &Grid, r: &[f64]) -> f64 {
    grid.interior().iter().map(|&j| r[j]).fold(f64::INFINITY, f64::min)
}

fn check_positive(psi: &Field) -> Result<()> {
    let g = psi.grid();
    for &j in g.interior() {
        let x = psi.values()[j];
        if !(x > 0.0) {
            return Err(Error::Positivity { node: j, min: x });
        }
    }
    psi.check_nonnegative()
}

/// Lower bound `λ ≤ λ(K_V)` from a positive supersolution.
pub fn certify_lower(psi: &Field, lambda: f64, v: &Field, p: f64) -> Result<Certificate> {
    certify_lower_with_diffusion(psi, 1.0, lambda, v, p)
}

/// As [`certify_lower`] for `-α Δ_p + V`.
pub fn certify_lower_with_diffusion(psi: &Field, alpha: f64, lambda: f64, v: &Field, p: f64) -> Result<Certificate> {
    check_positive(psi)?;
    let r = functional::nodal_residuals_with_diffusion(psi, alpha, lambda, v, p)?;
    let margin = min_interior(psi.grid(), &r);
    Ok(Certificate {
        direction: Direction::Lower,
        bound: lambda,
        margin,
        witness_id: "field".into(),
        valid: margin >= -LOWER_SLACK,
        grid: psi.grid().descriptor(),
    })
}

/// Upper bound `λ(K_V) ≤ R(ψ)` from a nonnegative Dirichlet field.
pub fn certify_upper(psi: &Field, v: &Field, p: f64) -> Result<Certificate> {
    psi.check_nonnegative()?;
    if let Some(&b) = psi.grid().boundary().iter().find(|&&b| psi.values()[b] != 0.0) {
        return Err(Error::NotCompactlySupported { node: b });
    }
    let bound = functional::rayleigh(psi, v, p)?;
    let r = functional::nodal_residuals(psi, bound, v, p)?;
    Ok(Certificate {
        direction: Direction::Upper,
        bound,
        margin: min_interior(psi.grid(), &r),
        witness_id: "field".into(),
        valid: true,
        grid: psi.grid().descriptor(),
    })
}

/// `ψ(r) = (e^{βr+1} + e^{-βr-1})^{-γ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpBarrier {
    pub beta: f64,
    pub gamma: f64,
}

impl ExpBarrier {
    pub fn new(beta: f64, gamma: f64) -> Result<Self> {
        if !(beta > 0.0 && gamma > 0.0 && beta.is_finite() && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("barrier parameters beta = {beta}, gamma = {gamma}")));
        }
        Ok(ExpBarrier { beta, gamma })
    }

    pub fn psi(&self, r: f64) -> f64 {
        // (2 cosh s)^{-γ} in log form to avoid overflow
        let s = self.beta * r + 1.0;
        (-self.gamma * (s + (-2.0 * s).exp().ln_1p())).exp()
    }

    /// `g(r) = tanh(βr + 1)`.
    pub fn g(&self, r: f64) -> f64 {
        (self.beta * r + 1.0).tanh()
    }

    /// `c_p (p-1) β^p γ^{p-1} [(γ+1) g(r)² - 1] ψ(r)^{p-1}` with
    /// `c_p = tanh(1)^{p-2} + 1`.
    pub fn laplacian_bound(&self, r: f64, p: f64) -> f64 {
        let cp = 1f64.tanh().powf(p - 2.0) + 1.0;
        let g = self.g(r);
        cp * (p - 1.0)
            * self.beta.powf(p)
            * self.gamma.powf(p - 1.0)
            * ((self.gamma + 1.0) * g * g - 1.0)
            * self.psi(r).powf(p - 1.0)
    }

    pub fn id(&self) -> String {
        format!("barrier_exp(beta={:e}, gamma={:e})", self.beta, self.gamma)
    }
}

fn radial_radius(grid: &Grid) -> Result<f64> {
    match *grid.domain() {
        DomainSpec::RadialBall { radius, .. } => Ok(radius),
        ref d => Err(Error::InvalidDomain(format!("{d} is not a radial ball"))),
    }
}

/// Samples `ψ(r) = (e^{βr+1} + e^{-βr-1})^{-γ}` on a radial grid, without
/// boundary clamping.
pub fn barrier_exp(beta: f64, gamma: f64, grid: &Grid) -> Result<(Field, ExpBarrier)> {
    let b = ExpBarrier::new(beta, gamma)?;
    radial_radius(grid)?;
    Ok((Field::from_radial(grid, |r| b.psi(r))?, b))
}

/// `ψ = 1` on the unit ball and `e^{((N-1)/(p-1))(1-|x|)}` outside.
pub fn barrier_matched(dim: usize, p: f64, grid: &Grid) -> Result<Field> {
    check_p(p)?;
    let radius = radial_radius(grid)?;
    if radius <= 1.0 {
        return Err(Error::InvalidDomain(format!("matched barrier needs radius > 1, got {radius}")));
    }
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    let k = (dim as f64 - 1.0) / (p - 1.0);
    Field::from_radial(grid, |r| if r <= 1.0 { 1.0 } else { (k * (1.0 - r)).exp() })
}

/// `w(x) = e^{(R+ρ)(τ-ω)} e^{ω|x|} + e^{R(τ+ω)} e^{-ω|x|}`, sampled on the
/// whole grid; it is meant to be read on the annulus `R ≤ |x| ≤ R + ρ`.
pub fn barrier_decay(r0: f64, rho: f64, omega: f64, tau: f64, grid: &Grid) -> Result<Field> {
    if !(r0 > 0.0 && rho > 0.0 && tau > 0.0 && tau < omega && omega.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "decay barrier needs 0 < tau < omega, R > 0, rho > 0; got R = {r0}, rho = {rho}, omega = {omega}, tau = {tau}"
        )));
    }
    let a = (r0 + rho) * (tau - omega);
    let b = r0 * (tau + omega);
    Field::from_radial(grid, |r| (a + omega * r).exp() + (b - omega * r).exp())
}

/// Lower certificate for `-α Δ_p + V` built from the exponential barrier
/// with `β = α^{-1/(2p)}`, `γ = α^{-1/(2p-1)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lim1Certificate {
    pub beta: f64,
    pub gamma: f64,
    /// Minimum of `V` over the outer half of the ball.
    pub liminf_proxy: f64,
    pub certificate: Certificate,
}

/// Checks `-α Δ_p ψ + V ψ^{p-1} ≥ (liminf V - 2ε) ψ^{p-1}` weakly on the
/// ball of radius `radius` in dimension `dim`. A failed check yields an
/// invalid certificate rather than an error.
pub fn lim1_certificate(
    v: &PotentialSpec,
    p: f64,
    alpha: f64,
    eps: f64,
    dim: usize,
    radius: f64,
    n_per_unit: usize,
) -> Result<Lim1Certificate> {
    check_p(p)?;
    if !(alpha > 0.0 && eps > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha}, eps = {eps}")));
    }
    let n = (radius * n_per_unit as f64).round() as usize;
    let grid = build_grid(DomainSpec::radial_ball(dim, radius)?, n)?;
    let beta = alpha.powf(-1.0 / (2.0 * p));
    let gamma = alpha.powf(-1.0 / (2.0 * p - 1.0));
    let (psi, b) = barrier_exp(beta, gamma, &grid)?;
    let liminf_proxy = potential::bounds(v, radius, 4096)?.liminf_inf_est;
    let vf = potential::sample_transformed(v, &grid, 1.0, 1.0)?;
    let certificate =
        certify_lower_with_diffusion(&psi, alpha, liminf_proxy - 2.0 * eps, &vf, p)?.with_witness(b.id());
    Ok(Lim1Certificate { beta, gamma, liminf_proxy, certificate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolve::{principal_eig, SolverConfig};

    fn interval(n: usize) -> Grid {
        build_grid(DomainSpec::interval(0.0, 1.0).unwrap(), n).unwrap()
    }

    #[test]
    fn constants_are_supersolutions() {
        let g = build_grid(DomainSpec::radial_ball(2, 3.0).unwrap(), 48).unwrap();
        let v = Field::from_radial(&g, |r| 1.0 + r.sin().powi(2)).unwrap();
        let c = certify_lower(&Field::constant(&g, 1.0), 1.0, &v, 2.5).unwrap();
        assert!(c.valid && c.margin >= 0.0);
        let c = certify_lower(&Field::constant(&g, 1.0), 1.5, &v, 2.5).unwrap();
        assert!(!c.valid);
    }

    #[test]
    fn eigenfunction_sandwich() {
        let g = interval(128);
        let v = Field::zeros(&g);
        let cfg = SolverConfig { tol_residual: 1e-11, tol_lambda: 1e-13, ..Default::default() };
        let ep = principal_eig(&g, &v, &cfg).unwrap();
        let lo = certify_lower(&ep.phi, ep.lambda - 1e-6, &v, 2.0).unwrap();
        assert!(lo.valid, "{lo:?}");
        let up = certify_upper(&ep.phi, &v, 2.0).unwrap();
        assert!(up.bound <= ep.lambda + 1e-6 && up.bound >= lo.bound);
        let bad = certify_lower(&ep.phi, ep.lambda + 1.0, &v, 2.0).unwrap();
        assert!(!bad.valid && bad.margin < 0.0);
    }

    #[test]
    fn coarse_bump_exceeds_pi_squared() {
        let g = interval(16);
        let psi = Field::from_fn(&g, |c, _| c[0] * (1.0 - c[0])).unwrap();
        let up = certify_upper(&psi, &Field::zeros(&g), 2.0).unwrap();
        assert!(up.bound > std::f64::consts::PI.powi(2));
        assert!(up.valid && up.direction == Direction::Upper);
    }

    #[test]
    fn witness_checks() {
        let g = interval(16);
        let v = Field::zeros(&g);
        assert!(matches!(certify_upper(&Field::constant(&g, 1.0), &v, 2.0), Err(Error::NotCompactlySupported { .. })));
        assert!(matches!(certify_upper(&Field::zeros(&g), &v, 2.0), Err(Error::ZeroNorm)));
        assert!(certify_lower(&Field::zeros(&g), 0.0, &v, 2.0).is_err());
    }

    #[test]
    fn exp_barrier_shape() {
        let g = build_grid(DomainSpec::radial_ball(3, 10.0).unwrap(), 200).unwrap();
        for (beta, gamma) in [(0.5, 0.5), (2.0, 0.1), (0.05, 3.0)] {
            let (psi, b) = barrier_exp(beta, gamma, &g).unwrap();
            let e = std::f64::consts::E;
            assert!((psi.values()[0] - (e + 1.0 / e).powf(-gamma)).abs() < 1e-15);
            assert!(psi.values().windows(2).all(|w| w[1] < w[0]));
            assert!((b.g(0.0) - (e * e - 1.0) / (e * e + 1.0)).abs() < 1e-15);
        }
        assert!(barrier_exp(0.0, 1.0, &g).is_err());
        assert!(barrier_exp(1.0, 1.0, &interval(8)).is_err());
    }

    #[test]
    fn matched_barrier_values() {
        let g = build_grid(DomainSpec::radial_ball(3, 4.0).unwrap(), 64).unwrap();
        let psi = barrier_matched(3, 2.0, &g).unwrap();
        let at = |r: f64| psi.values()[(r / g.h()).round() as usize];
        assert_eq!(at(1.0), 1.0);
        assert!((at(2.0) - (-2.0f64).exp()).abs() < 1e-15);
        let small = build_grid(DomainSpec::radial_ball(3, 1.0).unwrap(), 16).unwrap();
        assert!(barrier_matched(3, 2.0, &small).is_err());
    }

    #[test]
    fn decay_barrier_boundary_values() {
        let g = build_grid(DomainSpec::radial_ball(1, 8.0).unwrap(), 256).unwrap();
        let (r0, rho, omega, tau) = (2.0, 4.0, 1.2, 0.8);
        let w = barrier_decay(r0, rho, omega, tau, &g).unwrap();
        let at = |r: f64| w.values()[(r / g.h()).round() as usize];
        assert!(at(r0) >= (r0 * tau).exp());
        assert!(at(r0 + rho) >= ((r0 + rho) * tau).exp());
        assert!(barrier_decay(r0, rho, 0.5, 0.8, &g).is_err());
    }

    #[test]
    fn lim1_parameters_and_small_alpha() {
        let c = lim1_certificate(&PotentialSpec::Bump, 2.0, 1e-2, 0.05, 2, 4.0, 32).unwrap();
        assert_eq!(c.beta, 1e-2f64.powf(-0.25));
        assert_eq!(c.gamma, 1e-2f64.powf(-1.0 / 3.0));
        assert!(!c.certificate.valid);
    }
}
