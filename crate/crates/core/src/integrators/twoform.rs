use crate::error::Result;
use crate::grid::{Field, Grid1D};
use crate::structure::{build_k, build_m, ZField, DIM};

/// Two perturbation fields carried alongside a base trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentPair {
    pub first: ZField,
    pub second: ZField,
}

impl TangentPair {
    pub fn new(first: ZField, second: ZField) -> Result<Self> {
        first.grid().check_same(&second.grid())?;
        Ok(Self { first, second })
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self {
            first: ZField::zeros(grid),
            second: ZField::zeros(grid),
        }
    }

    pub fn grid(&self) -> Grid1D {
        self.first.grid()
    }
}

fn average(a: &[f64], b: &[f64]) -> [f64; DIM] {
    std::array::from_fn(|c| 0.5 * (a[c] + b[c]))
}

/// Discrete conservation law of the symplectic forms over each space-time
/// box, `(omega^(n+1) - omega^n) / dt + (kappa_(i+1) - kappa_i) / dx`, with
/// `omega = <M a, b>` on cell-averaged perturbations and `kappa = <K a, b>` on
/// time-averaged ones. Entry `i` is the box between nodes `i` and `i + 1`.
///
/// The base states do not enter because the forms are constant; they are
/// accepted to check grid consistency.
pub fn discrete_twoform_residual(
    z_n: &ZField,
    z_np1: &ZField,
    pair_n: &TangentPair,
    pair_np1: &TangentPair,
    grid: Grid1D,
    dt: f64,
) -> Result<Field> {
    for g in [z_n.grid(), z_np1.grid(), pair_n.grid(), pair_np1.grid()] {
        grid.check_same(&g)?;
    }
    let m = build_m();
    let k = build_k();
    let n = grid.n();
    let dx = grid.dx();
    let node = |f: &ZField, i: usize| f.data()[DIM * i..DIM * (i + 1)].to_vec();

    let omega = |pair: &TangentPair, i: usize| {
        let j = (i + 1) % n;
        let a = average(&node(&pair.first, i), &node(&pair.first, j));
        let b = average(&node(&pair.second, i), &node(&pair.second, j));
        m.bilinear(&b, &a)
    };
    let kappa = |i: usize| {
        let a = average(&node(&pair_n.first, i), &node(&pair_np1.first, i));
        let b = average(&node(&pair_n.second, i), &node(&pair_np1.second, i));
        k.bilinear(&b, &a)
    };
    let values = (0..n)
        .map(|i| {
            (omega(pair_np1, i) - omega(pair_n, i)) / dt + (kappa((i + 1) % n) - kappa(i)) / dx
        })
        .collect();
    Field::new(grid, values)
}
