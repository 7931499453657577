//! Computational domains, uniform grids and exhaustion schedules.
//!
//! Every grid is reduced to the same discrete structure: a list of nodes with
//! lumped (nodal) quadrature weights, and a list of elements on which the
//! gradient is constant. An element stores its quadrature weight and up to two
//! first-order forward differences. Intervals and radial balls have one
//! difference per cell; a 2-D box is split into two triangles per cell with
//! one difference per axis, which is exactly the P1 gradient.
//!
//! Radial balls use the reduction `u(x) = u(|x|)`. The cell weight carries the
//! measure `|S^{N-1}| r^{N-1} dr` evaluated at the cell midpoint, node `r = 0`
//! is interior and receives the zero-flux condition `u'(0) = 0` naturally from
//! the weak form.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest accepted number of cells per axis.
pub const MIN_CELLS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainSpec {
    Interval { a: f64, b: f64 },
    RadialBall { dim: usize, radius: f64 },
    Box2 { ax: f64, bx: f64, ay: f64, by: f64 },
}

impl DomainSpec {
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        let d = DomainSpec::Interval { a, b };
        d.validate()?;
        Ok(d)
    }

    pub fn radial_ball(dim: usize, radius: f64) -> Result<Self> {
        let d = DomainSpec::RadialBall { dim, radius };
        d.validate()?;
        Ok(d)
    }

    pub fn box2(ax: f64, bx: f64, ay: f64, by: f64) -> Result<Self> {
        let d = DomainSpec::Box2 { ax, bx, ay, by };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            DomainSpec::Interval { a, b } => a.is_finite() && b.is_finite() && b > a,
            DomainSpec::RadialBall { dim, radius } => dim >= 1 && radius.is_finite() && radius > 0.0,
            DomainSpec::Box2 { ax, bx, ay, by } => {
                [ax, bx, ay, by].iter().all(|v| v.is_finite()) && bx > ax && by > ay
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidDomain(format!("{self}")))
        }
    }

    /// Lebesgue measure of the domain.
    pub fn measure(&self) -> f64 {
        match *self {
            DomainSpec::Interval { a, b } => b - a,
            DomainSpec::RadialBall { dim, radius } => sphere_area(dim) * radius.powi(dim as i32) / dim as f64,
            DomainSpec::Box2 { ax, bx, ay, by } => (bx - ax) * (by - ay),
        }
    }

    /// Outer radius for balls; `None` otherwise.
    pub fn radius(&self) -> Option<f64> {
        match *self {
            DomainSpec::RadialBall { radius, .. } => Some(radius),
            _ => None,
        }
    }

    pub fn is_radial(&self) -> bool {
        matches!(self, DomainSpec::RadialBall { .. })
    }
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            DomainSpec::Interval { a, b } => write!(f, "interval({a}, {b})"),
            DomainSpec::RadialBall { dim, radius } => write!(f, "radial_ball(N={dim}, R={radius})"),
            DomainSpec::Box2 { ax, bx, ay, by } => write!(f, "box2([{ax}, {bx}] x [{ay}, {by}])"),
        }
    }
}

/// Surface area of the unit sphere `S^{N-1}` in `R^N` (`2` for `N = 1`).
pub fn sphere_area(dim: usize) -> f64 {
    match dim {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        n => sphere_area(n - 2) * 2.0 * PI / (n - 2) as f64,
    }
}

/// One forward difference `(u[to] - u[from]) * inv_h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diff {
    pub from: usize,
    pub to: usize,
    pub inv_h: f64,
}

/// A cell (or triangle) carrying a constant discrete gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    pub weight: f64,
    diffs: [Diff; 2],
    len: u8,
}

impl Element {
    fn one(weight: f64, d: Diff) -> Self {
        Element { weight, diffs: [d, d], len: 1 }
    }

    fn two(weight: f64, dx: Diff, dy: Diff) -> Self {
        Element { weight, diffs: [dx, dy], len: 2 }
    }

    #[inline]
    pub fn diffs(&self) -> &[Diff] {
        &self.diffs[..self.len as usize]
    }

    /// Nodes touched by this element (possibly with repetition).
    pub fn nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.diffs().iter().flat_map(|d| [d.from, d.to])
    }
}

#[derive(Debug)]
struct GridData {
    domain: DomainSpec,
    n: usize,
    h: f64,
    coords: Vec<[f64; 2]>,
    radii: Vec<f64>,
    quad_weights: Vec<f64>,
    node_weights: Vec<f64>,
    elements: Vec<Element>,
    interior: Vec<usize>,
    boundary: Vec<usize>,
    is_boundary: Vec<bool>,
}

/// Immutable uniform grid. Cloning is cheap (shared storage).
#[derive(Debug, Clone)]
pub struct Grid(Arc<GridData>);

impl Grid {
    pub fn domain(&self) -> &DomainSpec {
        &self.0.domain
    }

    /// Cells per axis; the grid has `n + 1` nodes per axis.
    pub fn n(&self) -> usize {
        self.0.n
    }

    /// Uniform spacing (x-spacing for boxes).
    pub fn h(&self) -> f64 {
        self.0.h
    }

    pub fn len(&self) -> usize {
        self.0.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.coords.is_empty()
    }

    /// Node coordinates; 1-D and radial grids use only the first component.
    pub fn coords(&self) -> &[[f64; 2]] {
        &self.0.coords
    }

    /// Distance of every node from the origin (the radius for radial grids).
    pub fn radii(&self) -> &[f64] {
        &self.0.radii
    }

    /// Per-element quadrature weights.
    pub fn quad_weights(&self) -> &[f64] {
        &self.0.quad_weights
    }

    /// Lumped nodal weights (each element weight split evenly over its vertices).
    pub fn node_weights(&self) -> &[f64] {
        &self.0.node_weights
    }

    pub fn elements(&self) -> &[Element] {
        &self.0.elements
    }

    pub fn interior(&self) -> &[usize] {
        &self.0.interior
    }

    pub fn boundary(&self) -> &[usize] {
        &self.0.boundary
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.0.is_boundary[node]
    }

    /// Sum of the quadrature weights, i.e. `∫ 1 dx` on the grid.
    pub fn measure(&self) -> f64 {
        self.0.quad_weights.iter().sum()
    }

    /// True when both handles describe the same discretization.
    pub fn same_as(&self, other: &Grid) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.domain == other.0.domain && self.0.n == other.0.n)
    }

    pub fn descriptor(&self) -> GridDescriptor {
        GridDescriptor { domain: self.0.domain, n: self.0.n, h: self.0.h }
    }
}

/// Serializable summary of a grid, attached to reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridDescriptor {
    pub domain: DomainSpec,
    pub n: usize,
    pub h: f64,
}

pub fn build_grid(domain: DomainSpec, n: usize) -> Result<Grid> {
    domain.validate()?;
    if n < MIN_CELLS {
        return Err(Error::TooCoarse { n, min: MIN_CELLS });
    }
    let data = match domain {
        DomainSpec::Interval { a, b } => line_grid(domain, n, a, b),
        DomainSpec::RadialBall { dim, radius } => radial_grid(domain, n, dim, radius),
        DomainSpec::Box2 { ax, bx, ay, by } => box_grid(domain, n, ax, bx, ay, by),
    };
    Ok(Grid(Arc::new(data)))
}

/// Same domain with twice as many cells per axis.
pub fn refine(grid: &Grid) -> Grid {
    build_grid(*grid.domain(), 2 * grid.n()).expect("refining a valid grid")
}

/// Nested balls of radii `r0 * factor^k`, `k = 0..count`.
pub fn exhaustion_schedule(dim: usize, r0: f64, factor: f64, count: usize) -> Result<Vec<DomainSpec>> {
    if !(factor > 1.0) || !factor.is_finite() {
        return Err(Error::InvalidParameter(format!("exhaustion factor must exceed 1, got {factor}")));
    }
    if count < 2 {
        return Err(Error::InvalidParameter(format!("exhaustion needs at least 2 domains, got {count}")));
    }
    (0..count)
        .map(|k| DomainSpec::radial_ball(dim, r0 * factor.powi(k as i32)))
        .collect()
}

fn line_grid(domain: DomainSpec, n: usize, a: f64, b: f64) -> GridData {
    let h = (b - a) / n as f64;
    let coords: Vec<[f64; 2]> = (0..=n).map(|i| [a + i as f64 * h, 0.0]).collect();
    let quad_weights = vec![h; n];
    let elements = (0..n)
        .map(|k| Element::one(h, Diff { from: k, to: k + 1, inv_h: 1.0 / h }))
        .collect();
    finish(domain, n, h, coords, quad_weights, elements, |i| i == 0 || i == n)
}

fn radial_grid(domain: DomainSpec, n: usize, dim: usize, radius: f64) -> GridData {
    let h = radius / n as f64;
    let area = sphere_area(dim);
    let coords: Vec<[f64; 2]> = (0..=n).map(|i| [i as f64 * h, 0.0]).collect();
    let quad_weights: Vec<f64> = (0..n)
        .map(|k| area * ((k as f64 + 0.5) * h).powi(dim as i32 - 1) * h)
        .collect();
    let elements = quad_weights
        .iter()
        .enumerate()
        .map(|(k, &w)| Element::one(w, Diff { from: k, to: k + 1, inv_h: 1.0 / h }))
        .collect();
    finish(domain, n, h, coords, quad_weights, elements, |i| i == n)
}

fn box_grid(domain: DomainSpec, n: usize, ax: f64, bx: f64, ay: f64, by: f64) -> GridData {
    let hx = (bx - ax) / n as f64;
    let hy = (by - ay) / n as f64;
    let stride = n + 1;
    let id = |i: usize, j: usize| j * stride + i;
    let mut coords = Vec::with_capacity(stride * stride);
    for j in 0..=n {
        for i in 0..=n {
            coords.push([ax + i as f64 * hx, ay + j as f64 * hy]);
        }
    }
    let w = 0.5 * hx * hy;
    let (ix, iy) = (1.0 / hx, 1.0 / hy);
    let mut elements = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            elements.push(Element::two(
                w,
                Diff { from: id(i, j), to: id(i + 1, j), inv_h: ix },
                Diff { from: id(i, j), to: id(i, j + 1), inv_h: iy },
            ));
            elements.push(Element::two(
                w,
                Diff { from: id(i, j + 1), to: id(i + 1, j + 1), inv_h: ix },
                Diff { from: id(i + 1, j), to: id(i + 1, j + 1), inv_h: iy },
            ));
        }
    }
    let quad_weights = vec![w; elements.len()];
    finish(domain, n, hx, coords, quad_weights, elements, |k| {
        let (i, j) = (k % stride, k / stride);
        i == 0 || j == 0 || i == n || j == n
    })
}

fn finish(
    domain: DomainSpec,
    n: usize,
    h: f64,
    coords: Vec<[f64; 2]>,
    quad_weights: Vec<f64>,
    elements: Vec<Element>,
    boundary_pred: impl Fn(usize) -> bool,
) -> GridData {
    let len = coords.len();
    let mut node_weights = vec![0.0; len];
    let mut verts = Vec::with_capacity(4);
    for e in &elements {
        verts.clear();
        verts.extend(e.nodes());
        verts.sort_unstable();
        verts.dedup();
        let share = e.weight / verts.len() as f64;
        for &v in &verts {
            node_weights[v] += share;
        }
    }
    let is_boundary: Vec<bool> = (0..len).map(&boundary_pred).collect();
    let interior = (0..len).filter(|&i| !is_boundary[i]).collect();
    let boundary = (0..len).filter(|&i| is_boundary[i]).collect();
    let radii = coords.iter().map(|c| c[0].hypot(c[1])).collect();
    GridData { domain, n, h, coords, radii, quad_weights, node_weights, elements, interior, boundary, is_boundary }
}
