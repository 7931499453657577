//! Potentials `V`, their sampling onto grids and crude extremal estimates.
//!
//! All built-in potentials are radial: they are evaluated at the distance of
//! a node from the origin (at `|x|` on intervals).

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::mesh::Grid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum PotentialSpec {
    Constant { c: f64 },
    /// `1/2 - exp(-|x|^2 / (1 - |x|^2))` inside the unit ball, `1/2` outside.
    Bump,
    /// `depth` for `|x| < r0`, `outside` otherwise.
    RadialWell { depth: f64, r0: f64, outside: f64 },
    /// `v_inf + c (1 + |x|)^{-q}`.
    PowerTail { v_inf: f64, c: f64, q: f64 },
    /// `(coordinate, value)` pairs sorted by coordinate.
    Tabulated { samples: Vec<(f64, f64)> },
}

impl PotentialSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match self {
            PotentialSpec::Constant { c } if !c.is_finite() => bad(format!("constant potential {c}")),
            PotentialSpec::RadialWell { depth, r0, outside }
                if !(depth.is_finite() && outside.is_finite() && *r0 > 0.0 && r0.is_finite()) =>
            {
                bad(format!("radial_well({depth}, {r0}, {outside})"))
            }
            PotentialSpec::PowerTail { v_inf, c, q } if !(v_inf.is_finite() && c.is_finite() && *q >= 0.0) => {
                bad(format!("power_tail({v_inf}, {c}, {q})"))
            }
            PotentialSpec::Tabulated { samples } => {
                if samples.is_empty() {
                    return bad("empty tabulated potential".into());
                }
                if samples.iter().any(|(x, v)| !x.is_finite() || !v.is_finite()) {
                    return bad("tabulated potential has non-finite entries".into());
                }
                if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return bad("tabulated coordinates must be strictly increasing".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Value at distance `r` from the origin.
    pub fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        match self {
            PotentialSpec::Constant { c } => *c,
            PotentialSpec::Bump => {
                if r < 1.0 {
                    let s = r * r;
                    0.5 - (-s / (1.0 - s)).exp()
                } else {
                    0.5
                }
            }
            PotentialSpec::RadialWell { depth, r0, outside } => {
                if r < *r0 {
                    *depth
                } else {
                    *outside
                }
            }
            PotentialSpec::PowerTail { v_inf, c, q } => v_inf + c * (1.0 + r).powf(-q),
            PotentialSpec::Tabulated { samples } => interpolate(samples, r),
        }
    }

    /// Loads a tabulated potential from a two-column `coordinate,value` CSV.
    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(file)
    }

    pub fn from_csv_reader(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
        let mut samples = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != 2 {
                return Err(Error::InvalidParameter(format!("line {}: expected 2 columns, got {}", i + 1, rec.len())));
            }
            let parsed = (rec[0].parse::<f64>(), rec[1].parse::<f64>());
            match parsed {
                (Ok(x), Ok(v)) => samples.push((x, v)),
                // only the first line may be a header
                _ if i == 0 => continue,
                _ => return Err(Error::InvalidParameter(format!("line {}: not a number pair", i + 1))),
            }
        }
        let spec = PotentialSpec::Tabulated { samples };
        spec.validate()?;
        Ok(spec)
    }
}

fn interpolate(samples: &[(f64, f64)], x: f64) -> f64 {
    let first = samples[0];
    let last = samples[samples.len() - 1];
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    let k = samples.partition_point(|s| s.0 <= x);
    let (x0, v0) = samples[k - 1];
    let (x1, v1) = samples[k];
    v0 + (v1 - v0) * (x - x0) / (x1 - x0)
}

/// Nodal values of `V` on `grid`.
///
/// Tabulated potentials must supply exactly one sample per node; they are
/// taken in node order.
pub fn sample(spec: &PotentialSpec, grid: &Grid) -> Result<Field> {
    spec.validate()?;
    match spec {
        PotentialSpec::Tabulated { samples } => {
            if samples.len() != grid.len() {
                return Err(Error::TabulatedMismatch { got: samples.len(), expected: grid.len() });
            }
            Field::new(grid, samples.iter().map(|s| s.1).collect())
        }
        _ => Field::from_radial(grid, |r| spec.eval(r)),
    }
}

/// Nodal values of `amplitude * V(dilation * x)`.
pub fn sample_transformed(spec: &PotentialSpec, grid: &Grid, amplitude: f64, dilation: f64) -> Result<Field> {
    spec.validate()?;
    Field::from_radial(grid, |r| amplitude * spec.eval(dilation * r))
}

/// Extremal estimates of `V` sampled at `n + 1` radii on `[0, window_radius]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub inf_est: f64,
    pub sup_est: f64,
    /// Minimum over the outer half `[window/2, window]`; a proxy for
    /// `liminf_{|x|→∞} V`, exact in the limit for eventually monotone tails.
    pub liminf_inf_est: f64,
}

pub fn bounds(spec: &PotentialSpec, window_radius: f64, n: usize) -> Result<Bounds> {
    spec.validate()?;
    if !(window_radius > 0.0) {
        return Err(Error::InvalidParameter(format!("window radius {window_radius}")));
    }
    if n < 100 {
        return Err(Error::TooCoarse { n, min: 100 });
    }
    let mut b = Bounds { inf_est: f64::INFINITY, sup_est: f64::NEG_INFINITY, liminf_inf_est: f64::INFINITY };
    for i in 0..=n {
        let r = window_radius * i as f64 / n as f64;
        let v = spec.eval(r);
        b.inf_est = b.inf_est.min(v);
        b.sup_est = b.sup_est.max(v);
        if 2 * i >= n {
            b.liminf_inf_est = b.liminf_inf_est.min(v);
        }
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_grid, DomainSpec};

    fn grid() -> Grid {
        build_grid(DomainSpec::radial_ball(2, 3.0).unwrap(), 30).unwrap()
    }

    #[test]
    fn constant_samples() {
        let v = sample(&PotentialSpec::Constant { c: 0.3 }, &grid()).unwrap();
        assert!(v.values().iter().all(|&x| x == 0.3));
    }

    #[test]
    fn bump_extremes() {
        assert_eq!(PotentialSpec::Bump.eval(0.0), -0.5);
        assert_eq!(PotentialSpec::Bump.eval(2.0), 0.5);
        assert_eq!(PotentialSpec::Bump.eval(1.0), 0.5);
        // continuous from inside
        assert!((PotentialSpec::Bump.eval(1.0 - 1e-9) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bounds_of_builtins() {
        let b = bounds(&PotentialSpec::Bump, 10.0, 1000).unwrap();
        assert_eq!(b.inf_est, -0.5);
        assert_eq!(b.sup_est, 0.5);
        assert_eq!(b.liminf_inf_est, 0.5);

        let b = bounds(&PotentialSpec::Constant { c: 1.25 }, 5.0, 100).unwrap();
        assert_eq!((b.inf_est, b.sup_est, b.liminf_inf_est), (1.25, 1.25, 1.25));

        let well = PotentialSpec::RadialWell { depth: -1.0, r0: 1.0, outside: 1.0 };
        let b = bounds(&well, 10.0, 100).unwrap();
        assert_eq!(b.inf_est, -1.0);
        assert_eq!(b.liminf_inf_est, 1.0);
    }

    #[test]
    fn bounds_rejects_coarse_sampling() {
        assert!(bounds(&PotentialSpec::Bump, 10.0, 50).is_err());
    }

    #[test]
    fn power_tail_approaches_limit_monotonically() {
        let spec = PotentialSpec::PowerTail { v_inf: 1.0, c: -2.0, q: 1.5 };
        let mut prev = f64::NEG_INFINITY;
        for n in [100, 200, 400, 800] {
            let b = bounds(&spec, 10.0 * n as f64 / 100.0, n).unwrap();
            assert!(b.liminf_inf_est >= prev);
            assert!(b.liminf_inf_est < 1.0);
            prev = b.liminf_inf_est;
        }
    }

    #[test]
    fn tabulated_csv_with_and_without_header() {
        let with = "r,V\n0,1.5\n1,2.5\n2,3.5\n";
        let without = "0,1.5\n1,2.5\n2,3.5\n";
        let a = PotentialSpec::from_csv_reader(with.as_bytes()).unwrap();
        let b = PotentialSpec::from_csv_reader(without.as_bytes()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.eval(0.5), 2.0);
        assert_eq!(a.eval(7.0), 3.5);
        assert!(PotentialSpec::from_csv_reader("0,1\nx,2\n".as_bytes()).is_err());
    }

    #[test]
    fn tabulated_count_must_match_grid() {
        let g = build_grid(DomainSpec::interval(0.0, 1.0).unwrap(), 8).unwrap();
        let samples: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 0.0)).collect();
        let err = sample(&PotentialSpec::Tabulated { samples }, &g).unwrap_err();
        assert!(matches!(err, Error::TabulatedMismatch { got: 5, expected: 9 }));
        let samples: Vec<(f64, f64)> = g.coords().iter().map(|c| (c[0], c[0] * 2.0)).collect();
        let v = sample(&PotentialSpec::Tabulated { samples }, &g).unwrap();
        assert_eq!(v.values()[8], 2.0);
    }

    #[test]
    fn sampling_is_deterministic() {
        let g = grid();
        let a = sample(&PotentialSpec::Bump, &g).unwrap();
        let b = sample(&PotentialSpec::Bump, &g).unwrap();
        assert!(a.values().iter().zip(b.values()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}
