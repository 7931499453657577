use crate::error::{Error, Result};
use crate::mesh::Grid;

/// Nodal values of a function on a [`Grid`].
#[derive(Debug, Clone)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "field has {} values, grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(node) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { node });
        }
        Ok(Field { grid: grid.clone(), values })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Field { grid: grid.clone(), values: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        Field { grid: grid.clone(), values: vec![c; grid.len()] }
    }

    /// Samples `f(coords, radius)` at every node.
    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 2], f64) -> f64) -> Result<Self> {
        let values = grid.coords().iter().zip(grid.radii()).map(|(&c, &r)| f(c, r)).collect();
        Field::new(grid, values)
    }

    /// Samples a function of the distance to the origin.
    pub fn from_radial(grid: &Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Field::from_fn(grid, |_, r| f(r))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn scaled(&self, c: f64) -> Field {
        self.map(|v| c * v)
    }

    pub fn shifted(&self, c: f64) -> Field {
        self.map(|v| v + c)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Copy with every boundary value set to zero.
    pub fn clamped(&self) -> Field {
        let mut out = self.clone();
        for &b in self.grid.boundary() {
            out.values[b] = 0.0;
        }
        out
    }

    pub fn is_dirichlet(&self) -> bool {
        self.grid.boundary().iter().all(|&b| self.values[b] == 0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sup_distance(&self, other: &Field) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }

    pub(crate) fn check_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub(crate) fn check_nonnegative(&self) -> Result<()> {
        match self.values.iter().position(|&v| v < 0.0) {
            Some(node) => Err(Error::NegativeValue { node, value: self.values[node] }),
            None => Ok(()),
        }
    }
}
