use std::f64::consts::PI;

use sgn_core::reference::{classical_rhs, default_dt, m_from_u, rk4_run, u_from_hm, HMState};
use sgn_core::scenarios::Scenario;
use sgn_core::{DiffKind, DiffOperator, Field, Grid1D, Params, PhysicalState};

const KINDS: [DiffKind; 3] = [DiffKind::Fd2, DiffKind::Fd4, DiffKind::Fourier];

fn solitary_state(n: usize) -> (Scenario, PhysicalState) {
    let sc = Scenario::solitary_wave(1.0, 0.2, &Params::default()).unwrap();
    let grid = Grid1D::new(sc.certification_length(), n).unwrap();
    let st = sc.initial_state(grid).unwrap();
    (sc, st)
}

#[test]
fn zero_velocity_has_zero_tangential_momentum() {
    let grid = Grid1D::new(40.0, 64).unwrap();
    let h = Field::from_fn(grid, |x| 1.0 + 0.1 * (2.0 * PI * x / 40.0).sin());
    let st = PhysicalState::new(h, Field::zeros(grid), 0.0).unwrap();
    for kind in KINDS {
        let op = DiffOperator::new(kind, grid);
        let hm = m_from_u(&st, &op).unwrap();
        assert_eq!(hm.m().max_abs(), 0.0);
        assert!(u_from_hm(&hm, &op).unwrap().max_abs() < 1e-14);
    }
}

#[test]
fn constant_depth_inverse_matches_fourier_symbol() {
    let (l, h0) = (40.0, 1.3);
    let grid = Grid1D::new(l, 64).unwrap();
    let op = DiffOperator::new(DiffKind::Fourier, grid);
    for mode in [1.0, 3.0, 7.0] {
        let k = 2.0 * PI * mode / l;
        let m = Field::from_fn(grid, |x| (k * x).cos());
        let hm = HMState::new(Field::constant(grid, h0), m.clone(), 0.0).unwrap();
        let u = u_from_hm(&hm, &op).unwrap();
        let expected = m.map(|v| v / (1.0 + h0 * h0 * k * k / 3.0));
        let err = u.zip_with(&expected, |a, b| a - b).unwrap().max_abs();
        assert!(err < 1e-12, "mode {mode}: {err}");
    }
}

#[test]
fn constant_depth_density_simplifies() {
    let (l, h0) = (40.0, 0.8);
    let grid = Grid1D::new(l, 128).unwrap();
    let op = DiffOperator::new(DiffKind::Fourier, grid);
    let k = 2.0 * PI * 2.0 / l;
    let u = Field::from_fn(grid, |x| (k * x).sin());
    let st = PhysicalState::new(Field::constant(grid, h0), u.clone(), 0.0).unwrap();
    let hm = m_from_u(&st, &op).unwrap();
    let expected = u.map(|v| v * (1.0 + h0 * h0 * k * k / 3.0));
    assert!(hm.m().zip_with(&expected, |a, b| a - b).unwrap().max_abs() < 1e-12);
}

#[test]
fn round_trip_recovers_velocity() {
    let (_, st) = solitary_state(257);
    for kind in KINDS {
        let op = DiffOperator::new(kind, st.grid());
        let u = u_from_hm(&m_from_u(&st, &op).unwrap(), &op).unwrap();
        let err = u.zip_with(st.u(), |a, b| a - b).unwrap().max_abs();
        assert!(err < 1e-10, "{kind:?}: {err}");
    }
}

#[test]
fn still_water_is_steady() {
    let grid = Grid1D::new(40.0, 65).unwrap();
    let hm = HMState::new(Field::constant(grid, 1.0), Field::zeros(grid), 0.0).unwrap();
    for kind in KINDS {
        let (ht, mt) =
            classical_rhs(&hm, &DiffOperator::new(kind, grid), &Params::default()).unwrap();
        assert!(ht.max_abs() < 1e-14 && mt.max_abs() < 1e-14);
    }
}

#[test]
fn solitary_wave_rhs_is_a_translation() {
    let (sc, st) = solitary_state(512);
    let op = DiffOperator::new(DiffKind::Fourier, st.grid());
    let hm = m_from_u(&st, &op).unwrap();
    let (ht, mt) = classical_rhs(&hm, &op, &Params::default()).unwrap();
    let c = sc.speed();
    let hx = op.derivative(hm.h()).unwrap();
    let mx = op.derivative(hm.m()).unwrap();
    let eh = ht.zip_with(&hx, |a, b| a + c * b).unwrap().max_abs();
    let em = mt.zip_with(&mx, |a, b| a + c * b).unwrap().max_abs();
    assert!(eh < 1e-9 && em < 1e-9, "{eh:e} {em:e}");
}

/// Small velocity `eps cos(kx)` on still water of unit depth oscillates as
/// `cos(omega t)` with `omega^2 = g k^2 / (1 + k^2 / 3)`.
#[test]
fn linear_waves_follow_dispersion_relation() {
    let l = 40.0;
    let grid = Grid1D::new(l, 64).unwrap();
    let op = DiffOperator::new(DiffKind::Fourier, grid);
    let params = Params::default();
    let eps = 1e-7;
    let k = 2.0 * PI * 4.0 / l;
    let omega = (k * k / (1.0 + k * k / 3.0)).sqrt();
    let u = Field::from_fn(grid, |x| eps * (k * x).cos());
    let st = PhysicalState::new(Field::constant(grid, 1.0), u, 0.0).unwrap();
    let hm = m_from_u(&st, &op).unwrap();
    let t_end = 7.3;
    let run = rk4_run(&hm, 0.05, t_end, &op, &params, usize::MAX, |_, _| Ok(())).unwrap();
    let fin = run.final_state.to_physical(&op).unwrap();
    let coeff = |f: &Field, basis: &dyn Fn(f64) -> f64| {
        2.0 / grid.n() as f64
            * (0..grid.n())
                .map(|i| f.values()[i] * basis(grid.x(i)))
                .sum::<f64>()
    };
    let u_c = coeff(fin.u(), &|x| (k * x).cos());
    let h_s = coeff(&fin.h().map(|v| v - 1.0), &|x| (k * x).sin());
    assert!(
        (u_c - eps * (omega * t_end).cos()).abs() < 1e-5 * eps,
        "{u_c} vs {}",
        eps * (omega * t_end).cos()
    );
    assert!((h_s - eps * k / omega * (omega * t_end).sin()).abs() < 1e-5 * eps);
}

#[test]
fn rk4_is_fourth_order_in_time_and_conserves_mass() {
    let (_, st) = solitary_state(128);
    let op = DiffOperator::new(DiffKind::Fourier, st.grid());
    let params = Params::default();
    let hm = m_from_u(&st, &op).unwrap();
    let run = |dt: f64| rk4_run(&hm, dt, 4.0, &op, &params, usize::MAX, |_, _| Ok(())).unwrap();
    let sols: Vec<HMState> = [0.4, 0.2, 0.1]
        .iter()
        .map(|&dt| run(dt).final_state)
        .collect();
    let diff = |a: &HMState, b: &HMState| a.h().zip_with(b.h(), |x, y| x - y).unwrap().max_abs();
    let ratio = diff(&sols[0], &sols[1]) / diff(&sols[1], &sols[2]);
    assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
    let mass0: f64 = hm.h().values().iter().sum();
    let mass1: f64 = sols[2].h().values().iter().sum();
    assert!((mass0 - mass1).abs() < 1e-10 * mass0);
}

#[test]
fn default_step_follows_wave_speed() {
    let grid = Grid1D::new(40.0, 100).unwrap();
    let hm = HMState::new(Field::constant(grid, 4.0), Field::zeros(grid), 0.0).unwrap();
    let dt = default_dt(&hm, &Params::new(9.0).unwrap());
    assert!((dt - 0.25 * 0.4 / 6.0).abs() < 1e-15);
}

#[test]
fn runaway_step_is_reported() {
    let (_, st) = solitary_state(64);
    let op = DiffOperator::new(DiffKind::Fd2, st.grid());
    let hm = m_from_u(&st, &op).unwrap();
    let err = rk4_run(&hm, 40.0, 4000.0, &op, &Params::default(), 1, |_, _| Ok(())).unwrap_err();
    assert!(matches!(err.kind(), "instability" | "step_failed"), "{err}");
}
