use super::comp::{H, P, PHI, Q, R, S, U, V};
use super::DIM;
use crate::diff::DiffOperator;
use crate::error::{Error, Result};
use crate::grid::{Field, Params, PhysicalState};

const THIRD: f64 = 1.0 / 3.0;
const SIXTH: f64 = 1.0 / 6.0;

/// `S(z) = (v^2/6 - u^2/2 - s u v/3) h - g h^2/2 + p (u s - v)/3 + q (u + s v/3) - r s/3`.
pub fn hamiltonian_s(z: &[f64; DIM], params: &Params) -> Result<f64> {
    if !(z[H] > 0.0) {
        return Err(Error::NonPositiveDepth {
            index: 0,
            value: z[H],
        });
    }
    Ok(s_unchecked(z, params.g))
}

pub(crate) fn s_unchecked(z: &[f64; DIM], g: f64) -> f64 {
    let [h, _, u, v, p, q, r, s] = *z;
    (SIXTH * v * v - 0.5 * u * u - THIRD * s * u * v) * h - 0.5 * g * h * h
        + THIRD * p * (u * s - v)
        + q * (u + THIRD * s * v)
        - THIRD * r * s
}

/// Gradient of `S`; its components are the right-hand sides of the eight
/// rows of the multi-symplectic system.
pub fn grad_s(z: &[f64; DIM], params: &Params) -> [f64; DIM] {
    let [h, _, u, v, p, q, r, s] = *z;
    let g = params.g;
    let mut d = [0.0; DIM];
    d[H] = SIXTH * v * v - 0.5 * u * u - THIRD * s * u * v - g * h;
    d[PHI] = 0.0;
    d[U] = -(u + THIRD * s * v) * h + THIRD * p * s + q;
    d[V] = (THIRD * v - THIRD * s * u) * h - THIRD * p + THIRD * q * s;
    d[P] = THIRD * (u * s - v);
    d[Q] = u + THIRD * s * v;
    d[R] = -THIRD * s;
    d[S] = THIRD * (p * u + q * v - r - h * u * v);
    d
}

/// Hessian of `S`. `S` is cubic, so the Hessian is affine in `z`; it is
/// assembled from the upper triangle and mirrored, hence exactly symmetric.
pub fn hess_s(z: &[f64; DIM], params: &Params) -> [[f64; DIM]; DIM] {
    let [h, _, u, v, p, q, _, s] = *z;
    let mut m = [[0.0; DIM]; DIM];
    let mut set = |i: usize, j: usize, val: f64| {
        m[i][j] = val;
        m[j][i] = val;
    };
    set(H, H, -params.g);
    set(H, U, -u - THIRD * s * v);
    set(H, V, THIRD * v - THIRD * s * u);
    set(H, S, -THIRD * u * v);
    set(U, U, -h);
    set(U, V, -THIRD * s * h);
    set(U, P, THIRD * s);
    set(U, Q, 1.0);
    set(U, S, THIRD * (p - v * h));
    set(V, V, THIRD * h);
    set(V, P, -THIRD);
    set(V, Q, THIRD * s);
    set(V, S, THIRD * (q - u * h));
    set(P, S, THIRD * u);
    set(Q, S, THIRD * v);
    set(R, S, -THIRD);
    m
}

/// `S` after eliminating `p`, `q`, `r`: `h u^2/2 - h^3 u_x^2/6 - g h^2/2`.
pub fn reduced_s(state: &PhysicalState, op: &DiffOperator, params: &Params) -> Result<Field> {
    let ux = op.derivative(state.u())?;
    let g = params.g;
    let vals = state
        .h()
        .values()
        .iter()
        .zip(state.u().values())
        .zip(ux.values())
        .map(|((&h, &u), &ux)| 0.5 * h * u * u - SIXTH * h.powi(3) * ux * ux - 0.5 * g * h * h)
        .collect();
    Field::new(state.grid(), vals)
}
