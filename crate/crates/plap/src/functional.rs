//! Discrete weak forms of `K_V[u] = -Δ_p u + V |u|^{p-2} u`.
//!
//! The energy is `Σ_e w_e |∇u|_e^p + Σ_j m_j V_j |u_j|^p`, with the
//! element gradients of [`crate::mesh`] and lumped nodal weights `m_j`. The
//! weak residual against a nodal hat function is the partial derivative of
//! this energy divided by `p`, so residuals, gradients and Rayleigh quotients
//! are mutually consistent to rounding.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::mesh::Grid;

/// Regularization of `|g|^{p-2}` used in gradient assembly when `1 < p < 2`.
pub const EPS_REG: f64 = 1e-12;

pub(crate) fn check_p(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("exponent p must exceed 1, got {p}")))
    }
}

/// `sign(u) |u|^{p-1}`, zero at zero for every `p > 1`.
#[inline]
pub(crate) fn signed_pow(u: f64, p: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        u.signum() * u.abs().powf(p - 1.0)
    }
}

#[inline]
fn abs_pow(u: f64, p: f64) -> f64 {
    if p == 2.0 {
        u * u
    } else {
        u.abs().powf(p)
    }
}

/// `(|g|^2 + reg^2)^{(p-2)/2}`, or zero when the gradient vanishes unregularized.
#[inline]
fn flux_factor(gsq: f64, p: f64, reg: f64) -> f64 {
    if p == 2.0 {
        1.0
    } else if gsq == 0.0 && reg == 0.0 {
        0.0
    } else {
        (gsq + reg * reg).powf(0.5 * (p - 2.0))
    }
}

/// `∫ |∇u|^p`.
pub(crate) fn gradient_energy_raw(grid: &Grid, u: &[f64], p: f64) -> f64 {
    grid.elements()
        .iter()
        .map(|e| {
            let gsq: f64 = e.diffs().iter().map(|d| ((u[d.to] - u[d.from]) * d.inv_h).powi(2)).sum();
            let mag = if p == 2.0 { gsq } else { gsq.powf(0.5 * p) };
            e.weight * mag
        })
        .sum()
}

/// `Σ_j m_j w_j |u_j|^p`, with `w ≡ 1` when `weight` is `None`.
pub(crate) fn mass_power_raw(grid: &Grid, u: &[f64], p: f64, weight: Option<&[f64]>) -> f64 {
    let m = grid.node_weights();
    match weight {
        Some(w) => u.iter().zip(m).zip(w).map(|((&x, &mj), &wj)| mj * wj * abs_pow(x, p)).sum(),
        None => u.iter().zip(m).map(|(&x, &mj)| mj * abs_pow(x, p)).sum(),
    }
}

/// Adds `scale * ∫ |∇u|^{p-2} ∇u · ∇e_j` to `out[j]` for every node `j`.
pub(crate) fn accumulate_flux(grid: &Grid, u: &[f64], p: f64, scale: f64, reg: f64, out: &mut [f64]) {
    for e in grid.elements() {
        let ds = e.diffs();
        let mut g = [0.0; 2];
        let mut gsq = 0.0;
        for (k, d) in ds.iter().enumerate() {
            g[k] = (u[d.to] - u[d.from]) * d.inv_h;
            gsq += g[k] * g[k];
        }
        let f = scale * e.weight * flux_factor(gsq, p, reg);
        if f == 0.0 {
            continue;
        }
        for (k, d) in ds.iter().enumerate() {
            let t = f * g[k] * d.inv_h;
            out[d.to] += t;
            out[d.from] -= t;
        }
    }
}

/// Signed nodal residuals of `-α Δ_p u + (V - λ) |u|^{p-2} u` against every
/// hat function. Boundary entries are zero (hat functions there are not
/// compactly supported).
pub(crate) fn nodal_residuals_raw(grid: &Grid, u: &[f64], alpha: f64, lambda: f64, v: &[f64], p: f64) -> Vec<f64> {
    let mut r = vec![0.0; u.len()];
    accumulate_flux(grid, u, p, alpha, 0.0, &mut r);
    let m = grid.node_weights();
    for j in 0..u.len() {
        r[j] += m[j] * (v[j] - lambda) * signed_pow(u[j], p);
    }
    for &b in grid.boundary() {
        r[b] = 0.0;
    }
    r
}

/// `∫ (|∇u|^p + V |u|^p)`.
pub fn p_energy(u: &Field, v: &Field, p: f64) -> Result<f64> {
    check_p(p)?;
    u.check_same_grid(v)?;
    let g = u.grid();
    Ok(gradient_energy_raw(g, u.values(), p) + mass_power_raw(g, u.values(), p, Some(v.values())))
}

/// `∫ |∇u|^p` alone.
pub fn gradient_energy(u: &Field, p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(gradient_energy_raw(u.grid(), u.values(), p))
}

/// `∫ |u|^p`.
pub fn lp_norm_p(u: &Field, p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(mass_power_raw(u.grid(), u.values(), p, None))
}

pub fn rayleigh(u: &Field, v: &Field, p: f64) -> Result<f64> {
    rayleigh_with_diffusion(u, 1.0, v, p)
}

/// `(α ∫|∇u|^p + ∫ V|u|^p) / ∫|u|^p`, the quotient of `-α Δ_p + V`.
pub fn rayleigh_with_diffusion(u: &Field, alpha: f64, v: &Field, p: f64) -> Result<f64> {
    check_p(p)?;
    u.check_same_grid(v)?;
    let g = u.grid();
    let den = mass_power_raw(g, u.values(), p, None);
    if den == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let num = alpha * gradient_energy_raw(g, u.values(), p) + mass_power_raw(g, u.values(), p, Some(v.values()));
    Ok(num / den)
}

/// Residuals of `K_V[u] - λ u^{p-1}` against every nodal hat function.
pub fn nodal_residuals(u: &Field, lambda: f64, v: &Field, p: f64) -> Result<Vec<f64>> {
    nodal_residuals_with_diffusion(u, 1.0, lambda, v, p)
}

/// Residuals of `-α Δ_p u + V|u|^{p-2}u - λ|u|^{p-2}u` against every nodal
/// hat function; `u` may change sign.
pub fn nodal_residuals_with_diffusion(u: &Field, alpha: f64, lambda: f64, v: &Field, p: f64) -> Result<Vec<f64>> {
    check_p(p)?;
    u.check_same_grid(v)?;
    Ok(nodal_residuals_raw(u.grid(), u.values(), alpha, lambda, v.values(), p))
}

/// `∫ |∇u|^{p-2}∇u·∇φ + ∫ V u^{p-1} φ - λ ∫ u^{p-1} φ` for `u, φ ≥ 0`, `φ`
/// vanishing on the boundary.
pub fn weak_residual(u: &Field, lambda: f64, v: &Field, p: f64, phi: &Field) -> Result<f64> {
    u.check_same_grid(phi)?;
    u.check_nonnegative()?;
    phi.check_nonnegative()?;
    if let Some(&b) = phi.grid().boundary().iter().find(|&&b| phi.values()[b] != 0.0) {
        return Err(Error::NotCompactlySupported { node: b });
    }
    let r = nodal_residuals(u, lambda, v, p)?;
    Ok(r.iter().zip(phi.values()).map(|(a, b)| a * b).sum())
}

/// Exact gradient of [`p_energy`] with respect to the nodal values.
///
/// Boundary entries are zero. For `1 < p < 2` the factor `|g|^{p-2}` is
/// replaced by `(g^2 + EPS_REG^2)^{(p-2)/2}`.
pub fn energy_grad(u: &Field, v: &Field, p: f64) -> Result<Field> {
    check_p(p)?;
    u.check_same_grid(v)?;
    let g = u.grid();
    let reg = if p < 2.0 { EPS_REG } else { 0.0 };
    let mut out = vec![0.0; g.len()];
    accumulate_flux(g, u.values(), p, p, reg, &mut out);
    let m = g.node_weights();
    for (j, o) in out.iter_mut().enumerate() {
        *o += p * m[j] * v.values()[j] * signed_pow(u.values()[j], p);
    }
    for &b in g.boundary() {
        out[b] = 0.0;
    }
    Field::new(g, out)
}

/// Both sides of the cutoff estimate
/// `(λ* - λ) ∫ u^p ψ^p ≤ C(p) ∫ u^p |∇ψ|^p`, returned as `(lhs, rhs)`
/// without the constant.
///
/// On each element `u^p` is averaged over the element's vertices.
pub fn cutoff_inequality(u: &Field, lambda: f64, lambda_star: f64, psi: &Field, p: f64) -> Result<(f64, f64)> {
    check_p(p)?;
    u.check_same_grid(psi)?;
    u.check_nonnegative()?;
    psi.check_nonnegative()?;
    let g = u.grid();
    let (uv, pv) = (u.values(), psi.values());
    let m = g.node_weights();
    let mass: f64 = (0..uv.len()).map(|j| m[j] * abs_pow(uv[j], p) * abs_pow(pv[j], p)).sum();
    let lhs = (lambda_star - lambda) * mass;
    let mut rhs = 0.0;
    let mut verts = Vec::with_capacity(4);
    for e in g.elements() {
        let gsq: f64 = e.diffs().iter().map(|d| ((pv[d.to] - pv[d.from]) * d.inv_h).powi(2)).sum();
        if gsq == 0.0 {
            continue;
        }
        verts.clear();
        verts.extend(e.nodes());
        verts.sort_unstable();
        verts.dedup();
        let up = verts.iter().map(|&j| abs_pow(uv[j], p)).sum::<f64>() / verts.len() as f64;
        rhs += e.weight * up * gsq.powf(0.5 * p);
    }
    Ok((lhs, rhs))
}

/// Rounding level of a sum of `n` terms of total magnitude `mag`.
pub(crate) fn rounding(mag: f64, n: usize) -> f64 {
    64.0 * f64::EPSILON * (n as f64).sqrt() * mag
}

/// Rayleigh quotient of `-α Δ_p + V` and its gradient in one pass.
pub(crate) struct Quotient<'a> {
    pub grid: &'a Grid,
    pub p: f64,
    pub alpha: f64,
    pub v: &'a [f64],
}

impl Quotient<'_> {
    /// Returns `(R(u), ∫|u|^p)` and writes `∂R/∂u_j` into `grad` (zero on the boundary).
    pub fn eval(&self, u: &[f64], grad: &mut [f64]) -> (f64, f64) {
        let (g, p) = (self.grid, self.p);
        let den = mass_power_raw(g, u, p, None);
        let num = self.alpha * gradient_energy_raw(g, u, p) + mass_power_raw(g, u, p, Some(self.v));
        let r = num / den;
        grad.iter_mut().for_each(|x| *x = 0.0);
        let reg = if p < 2.0 { EPS_REG } else { 0.0 };
        accumulate_flux(g, u, p, self.alpha, reg, grad);
        let m = g.node_weights();
        let s = p / den;
        for j in 0..u.len() {
            grad[j] = s * (grad[j] + m[j] * (self.v[j] - r) * signed_pow(u[j], p));
        }
        for &b in g.boundary() {
            grad[b] = 0.0;
        }
        (r, den)
    }

    /// Rounding level of `R(u)`: the quotient of the summed magnitudes,
    /// times `ε √n`.
    pub fn noise(&self, u: &[f64]) -> f64 {
        let (g, p) = (self.grid, self.p);
        let den = mass_power_raw(g, u, p, None);
        let abs_v: Vec<f64> = self.v.iter().map(|x| x.abs()).collect();
        let mag = self.alpha * gradient_energy_raw(g, u, p) + mass_power_raw(g, u, p, Some(&abs_v));
        rounding(mag / den, u.len())
    }
}
