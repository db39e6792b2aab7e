//! Uniform periodic grids, fields attached to them, and the physical state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible number of grid points.
pub const MIN_POINTS: usize = 8;

/// Uniform periodic grid on `[0, length)` with `n` points at `x_i = i * dx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    length: f64,
    n: usize,
}

impl Grid1D {
    pub fn new(length: f64, n: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidParameter {
                name: "length",
                reason: format!("domain length must be positive and finite, got {length}"),
            });
        }
        if n < MIN_POINTS {
            return Err(Error::InvalidParameter {
                name: "n",
                reason: format!("need at least {MIN_POINTS} grid points, got {n}"),
            });
        }
        Ok(Self { length, n })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Even grids carry a checkerboard null mode in the box scheme.
    pub fn is_even(&self) -> bool {
        self.n.is_multiple_of(2)
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    pub fn check_same(&self, other: &Grid1D) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                expected_n: self.n,
                expected_len: self.length,
                found_n: other.n,
                found_len: other.length,
            })
        }
    }
}

/// Nodal values of a scalar quantity on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid1D,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::InvalidParameter {
                name: "values",
                reason: format!("expected {} values, got {}", grid.n(), values.len()),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid1D, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.n()],
        }
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid,
            values: (0..grid.n()).map(|i| f(grid.x(i))).collect(),
        }
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
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

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        self.grid.check_same(&other.grid)?;
        Ok(Field {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.values)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

pub(crate) fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Rejects fields with a nonpositive entry.
pub(crate) fn check_positive_depth(h: &[f64]) -> Result<()> {
    match h.iter().position(|&v| !(v > 0.0)) {
        Some(index) => Err(Error::NonPositiveDepth {
            index,
            value: h[index],
        }),
        None => Ok(()),
    }
}

/// Gravitational acceleration and any further physical constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub g: f64,
}

impl Params {
    pub fn new(g: f64) -> Result<Self> {
        if !(g.is_finite() && g > 0.0) {
            return Err(Error::InvalidParameter {
                name: "g",
                reason: format!("gravity must be positive, got {g}"),
            });
        }
        Ok(Self { g })
    }
}

impl Default for Params {
    fn default() -> Self {
        Self { g: 1.0 }
    }
}

/// Depth `h` and depth-averaged velocity `u` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalState {
    h: Field,
    u: Field,
    t: f64,
}

impl PhysicalState {
    pub fn new(h: Field, u: Field, t: f64) -> Result<Self> {
        h.grid().check_same(&u.grid())?;
        check_positive_depth(h.values())?;
        Ok(Self { h, u, t })
    }

    pub fn h(&self) -> &Field {
        &self.h
    }

    pub fn u(&self) -> &Field {
        &self.u
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn grid(&self) -> Grid1D {
        self.h.grid()
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_is_derived() {
        let g = Grid1D::new(10.0, 8).unwrap();
        assert_eq!(g.dx() * g.n() as f64, 10.0);
        assert!(g.is_even());
        assert!(!Grid1D::new(10.0, 9).unwrap().is_even());
    }

    #[test]
    fn rejects_small_or_degenerate_grids() {
        assert!(Grid1D::new(10.0, 7).is_err());
        assert!(Grid1D::new(0.0, 16).is_err());
        assert!(Grid1D::new(f64::NAN, 16).is_err());
    }

    #[test]
    fn field_length_must_match() {
        let g = Grid1D::new(1.0, 8).unwrap();
        assert!(Field::new(g, vec![0.0; 7]).is_err());
        assert!(Field::new(g, vec![0.0; 8]).is_ok());
    }

    #[test]
    fn dry_states_rejected() {
        let g = Grid1D::new(1.0, 8).unwrap();
        let mut h = vec![1.0; 8];
        h[3] = 0.0;
        let err = PhysicalState::new(Field::new(g, h).unwrap(), Field::zeros(g), 0.0).unwrap_err();
        assert!(matches!(err, Error::NonPositiveDepth { index: 3, .. }));
    }

    #[test]
    fn mismatched_grids_rejected() {
        let a = Grid1D::new(1.0, 8).unwrap();
        let b = Grid1D::new(1.0, 9).unwrap();
        assert!(PhysicalState::new(Field::constant(a, 1.0), Field::zeros(b), 0.0).is_err());
        assert!(Params::new(-1.0).is_err());
    }
}
