//! Periodic differentiation, quadrature and antidifferentiation.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::{Field, Grid1D};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiffKind {
    /// Second-order central differences.
    Fd2,
    /// Fourth-order central differences.
    Fd4,
    /// Exact differentiation of the trigonometric interpolant.
    Fourier,
}

impl DiffKind {
    pub fn name(self) -> &'static str {
        match self {
            DiffKind::Fd2 => "fd2",
            DiffKind::Fd4 => "fd4",
            DiffKind::Fourier => "fourier",
        }
    }
}

impl std::str::FromStr for DiffKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "fd2" => Ok(DiffKind::Fd2),
            "fd4" => Ok(DiffKind::Fd4),
            "fourier" => Ok(DiffKind::Fourier),
            other => Err(format!(
                "unknown differentiation operator `{other}` (expected fd2, fd4 or fourier)"
            )),
        }
    }
}

struct FftPair {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Angular wavenumbers in FFT order; the Nyquist entry is zero on even grids.
    wavenumbers: Vec<f64>,
}

/// A discrete `d/dx` on a periodic grid.
#[derive(Clone)]
pub struct DiffOperator {
    kind: DiffKind,
    grid: Grid1D,
    fft: Option<Arc<FftPair>>,
}

impl fmt::Debug for DiffOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiffOperator")
            .field("kind", &self.kind)
            .field("grid", &self.grid)
            .finish()
    }
}

impl DiffOperator {
    pub fn new(kind: DiffKind, grid: Grid1D) -> Self {
        let fft = (kind == DiffKind::Fourier).then(|| {
            let n = grid.n();
            let mut planner = FftPlanner::new();
            Arc::new(FftPair {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
                wavenumbers: wavenumbers(grid),
            })
        });
        Self { kind, grid, fft }
    }

    pub fn kind(&self) -> DiffKind {
        self.kind
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    /// Periodic finite-difference stencil as `(offset, weight)` pairs, or
    /// `None` for the spectral operator.
    pub fn stencil(&self) -> Option<Vec<(isize, f64)>> {
        let dx = self.grid.dx();
        match self.kind {
            DiffKind::Fd2 => Some(vec![(-1, -0.5 / dx), (1, 0.5 / dx)]),
            DiffKind::Fd4 => Some(vec![
                (-2, 1.0 / (12.0 * dx)),
                (-1, -8.0 / (12.0 * dx)),
                (1, 8.0 / (12.0 * dx)),
                (2, -1.0 / (12.0 * dx)),
            ]),
            DiffKind::Fourier => None,
        }
    }

    fn half_stencil(&self) -> Vec<(isize, f64)> {
        self.stencil()
            .expect("finite-difference kind")
            .into_iter()
            .filter(|&(off, _)| off > 0)
            .collect()
    }

    pub fn derivative(&self, f: &Field) -> Result<Field> {
        self.grid.check_same(&f.grid())?;
        Field::new(self.grid, self.apply(f.values()))
    }

    /// Derivative of raw nodal values; `values.len()` must equal `n`.
    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        let n = self.grid.n();
        assert_eq!(values.len(), n, "value count does not match grid");
        match &self.fft {
            Some(fft) => {
                let mut buf = to_complex(values);
                fft.forward.process(&mut buf);
                let scale = 1.0 / n as f64;
                for (c, &k) in buf.iter_mut().zip(&fft.wavenumbers) {
                    *c = Complex64::new(-c.im * k, c.re * k) * scale;
                }
                fft.inverse.process(&mut buf);
                buf.into_iter().map(|c| c.re).collect()
            }
            None => {
                // Antisymmetric pairs, so constants differentiate to exactly zero.
                let pairs = self.half_stencil();
                (0..n)
                    .map(|i| {
                        pairs
                            .iter()
                            .map(|&(off, w)| {
                                w * (values[wrap(i, off, n)] - values[wrap(i, -off, n)])
                            })
                            .sum()
                    })
                    .collect()
            }
        }
    }

    /// Dense `n x n` matrix of the operator, row-major.
    pub fn dense_matrix(&self) -> Vec<f64> {
        let n = self.grid.n();
        let mut m = vec![0.0; n * n];
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.apply(&e);
            for (i, v) in col.into_iter().enumerate() {
                m[i * n + j] = v;
            }
            e[j] = 0.0;
        }
        m
    }

    /// Splits `f` into its mean `c` and the zero-mean periodic antiderivative
    /// `F` of `f - c`, so that `derivative(F) + c` reproduces `f`.
    pub fn antiderivative_split(&self, f: &Field) -> Result<(f64, Field)> {
        self.grid.check_same(&f.grid())?;
        let n = self.grid.n();
        let c = f.mean();
        let values = match &self.fft {
            Some(fft) => {
                let mut buf = to_complex(f.values());
                fft.forward.process(&mut buf);
                let scale = 1.0 / n as f64;
                for (b, &k) in buf.iter_mut().zip(&fft.wavenumbers) {
                    // 1/(ik) = -i/k; the mean and Nyquist modes are dropped.
                    *b = if k == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        Complex64::new(b.im / k, -b.re / k) * scale
                    };
                }
                fft.inverse.process(&mut buf);
                buf.into_iter().map(|c| c.re).collect()
            }
            None => {
                let dx = self.grid.dx();
                let g: Vec<f64> = f.values().iter().map(|v| v - c).collect();
                let mut acc = vec![0.0; n];
                for i in 1..n {
                    acc[i] = acc[i - 1] + 0.5 * dx * (g[i - 1] + g[i]);
                }
                let mean = acc.iter().sum::<f64>() / n as f64;
                acc.iter().map(|v| v - mean).collect()
            }
        };
        Ok((c, Field::new(self.grid, values)?))
    }
}

/// Rectangle rule, which on a periodic grid coincides with the trapezoid rule.
pub fn integrate(f: &Field) -> f64 {
    f.grid().dx() * f.values().iter().sum::<f64>()
}

pub(crate) fn wrap(i: usize, off: isize, n: usize) -> usize {
    (i as isize + off).rem_euclid(n as isize) as usize
}

fn to_complex(values: &[f64]) -> Vec<Complex64> {
    values.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

fn wavenumbers(grid: Grid1D) -> Vec<f64> {
    let n = grid.n();
    let base = 2.0 * PI / grid.length();
    (0..n)
        .map(|j| {
            if 2 * j == n {
                0.0
            } else if j < n.div_ceil(2) {
                j as f64 * base
            } else {
                (j as f64 - n as f64) * base
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const KINDS: [DiffKind; 3] = [DiffKind::Fd2, DiffKind::Fd4, DiffKind::Fourier];

    fn grid(n: usize) -> Grid1D {
        Grid1D::new(10.0, n).unwrap()
    }

    #[test]
    fn constant_has_zero_derivative() {
        for kind in KINDS {
            let g = grid(33);
            let op = DiffOperator::new(kind, g);
            let d = op.derivative(&Field::constant(g, 3.7)).unwrap();
            let tol = if kind == DiffKind::Fourier {
                1e-13
            } else {
                0.0
            };
            assert!(d.max_abs() <= tol, "{kind:?}: {}", d.max_abs());
        }
    }

    #[test]
    fn spectral_derivative_of_harmonics_is_exact() {
        for n in [32, 33] {
            let g = grid(n);
            let op = DiffOperator::new(DiffKind::Fourier, g);
            let l = g.length();
            for k in 1..(n / 2) {
                let w = 2.0 * PI * k as f64 / l;
                let f = Field::from_fn(g, |x| (w * x).sin());
                let d = op.derivative(&f).unwrap();
                let exact = Field::from_fn(g, |x| w * (w * x).cos());
                let err = d.zip_with(&exact, |a, b| a - b).unwrap().max_abs();
                assert!(err < 1e-12 * w.max(1.0) * n as f64, "n={n} k={k} err={err}");
            }
        }
    }

    #[test]
    fn fd2_converges_at_second_order() {
        // Oracle: spectral derivative of the same smooth sample.
        let err_at = |n: usize| {
            let g = Grid1D::new(40.0, n).unwrap();
            let f = Field::from_fn(g, |x| 1.0 / (0.3 * (x - 20.0)).cosh().powi(2));
            let fd = DiffOperator::new(DiffKind::Fd2, g).derivative(&f).unwrap();
            let sp = DiffOperator::new(DiffKind::Fourier, g)
                .derivative(&f)
                .unwrap();
            fd.zip_with(&sp, |a, b| a - b).unwrap().max_abs()
        };
        let ratio = err_at(128) / err_at(256);
        assert!((ratio - 4.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn integrals() {
        let g = grid(40);
        assert!((integrate(&Field::constant(g, 1.0)) - 10.0).abs() < 1e-14);
        let s = Field::from_fn(g, |x| (2.0 * PI * x / 10.0).sin());
        assert!(integrate(&s).abs() < 1e-13);

        // Closed form: integral of a sech^2(k(x-x0)) over the line is 2a/k.
        let g = Grid1D::new(200.0, 2000).unwrap();
        let (a, k) = (0.3, 0.5);
        let f = Field::from_fn(g, |x| a / (k * (x - 100.0)).cosh().powi(2));
        assert!((integrate(&f) - 2.0 * a / k).abs() < 1e-12);
    }

    #[test]
    fn antiderivative_examples() {
        let g = grid(64);
        let l = g.length();
        let op = DiffOperator::new(DiffKind::Fourier, g);

        let (c, f) = op.antiderivative_split(&Field::zeros(g)).unwrap();
        assert_eq!(c, 0.0);
        assert_eq!(f.max_abs(), 0.0);

        let w = 2.0 * PI / l;
        let exact = Field::from_fn(g, |x| (w * x).sin() / w);
        for offset in [0.0, 1.0] {
            let src = Field::from_fn(g, |x| offset + (w * x).cos());
            let (c, f) = op.antiderivative_split(&src).unwrap();
            assert!((c - offset).abs() < 1e-14);
            let err = f.zip_with(&exact, |a, b| a - b).unwrap().max_abs();
            assert!(err < 1e-13, "err {err}");
            let back = op.derivative(&f).unwrap().map(|v| v + c);
            assert!(back.zip_with(&src, |a, b| a - b).unwrap().max_abs() < 1e-13);
        }
    }

    #[test]
    fn fd_antiderivative_round_trip() {
        let g = Grid1D::new(10.0, 400).unwrap();
        let src = Field::from_fn(g, |x| 0.5 + (2.0 * PI * x / 10.0).cos());
        for kind in [DiffKind::Fd2, DiffKind::Fd4] {
            let op = DiffOperator::new(kind, g);
            let (c, f) = op.antiderivative_split(&src).unwrap();
            assert!(f.mean().abs() < 1e-13);
            let back = op.derivative(&f).unwrap().map(|v| v + c);
            let err = back.zip_with(&src, |a, b| a - b).unwrap().max_abs();
            assert!(err < 1e-3, "{kind:?} err {err}");
        }
    }

    #[test]
    fn grid_mismatch_rejected() {
        let op = DiffOperator::new(DiffKind::Fd2, grid(16));
        assert!(op.derivative(&Field::zeros(grid(17))).is_err());
    }

    #[test]
    fn dense_matrix_matches_apply() {
        let g = grid(9);
        for kind in KINDS {
            let op = DiffOperator::new(kind, g);
            let m = op.dense_matrix();
            let f = Field::from_fn(g, |x| (x * 0.7).sin() + 0.1 * x * x);
            let d = op.apply(f.values());
            for i in 0..9 {
                let row: f64 = (0..9).map(|j| m[i * 9 + j] * f.values()[j]).sum();
                assert!((row - d[i]).abs() < 1e-12);
            }
        }
    }
}
