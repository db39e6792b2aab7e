//! The multi-symplectic form `M z_t + K z_x = grad S(z)` of the
//! Serre-Green-Naghdi equations.
//!
//! The state vector is `z = (h, phi, u, v, p, q, r, s)`: depth, velocity
//! potential, depth-averaged velocity, vertical surface velocity, vertical
//! momentum `h v`, horizontal momentum `h u`, the product `h u v`, and the
//! surface slope `h_x`.

mod hamiltonian;
mod residuals;
mod skew;
mod state;

pub(crate) use hamiltonian::s_unchecked;
pub use hamiltonian::{grad_s, hamiltonian_s, hess_s, reduced_s};
pub use residuals::{
    el_as_ms_rows, el_residuals, gamma, lagrangian_density, ms_residual, residual_energy,
    residual_mass, residual_momentum, residual_momentum_flux, residual_tangential,
    LagrangianFields, MsRowsFromEl, TimeDerivatives,
};
pub use skew::{build_k, build_m, SkewForm};
pub use state::{lift, project, traveling_z_t, ZField, ZState};

/// Number of components of the multi-symplectic state.
pub const DIM: usize = 8;

/// Component indices into `z` (0-based).
pub mod comp {
    pub const H: usize = 0;
    pub const PHI: usize = 1;
    pub const U: usize = 2;
    pub const V: usize = 3;
    pub const P: usize = 4;
    pub const Q: usize = 5;
    pub const R: usize = 6;
    pub const S: usize = 7;

    pub const NAMES: [&str; super::DIM] = ["h", "phi", "u", "v", "p", "q", "r", "s"];
}
