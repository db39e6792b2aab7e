use std::path::Path;

use serde::Serialize;
use sgn_core::diagnostics::{ConvergenceTable, DiagnosticsRecord};
use sgn_core::structure::{comp, ZState, DIM};
use sgn_core::PhysicalState;

use crate::error::CliError;

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))?;
    w.write_record(header).map_err(|e| CliError::io(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::io(path, e))?;
    std::fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}

pub fn diagnostics_rows(records: &[DiagnosticsRecord]) -> Vec<Vec<String>> {
    records
        .iter()
        .map(|r| {
            vec![
                num(r.t),
                num(r.mass),
                num(r.momentum),
                num(r.energy),
                num(r.tangential),
                num(r.e_int),
                num(r.i_int),
                num(r.ms_law_max),
                r.newton_iters.to_string(),
            ]
        })
        .collect()
}

pub const Z_COLUMNS: [&str; DIM] = ["z_h", "z_phi", "z_u", "z_v", "z_p", "z_q", "z_r", "z_s"];

/// Snapshot table `x, h, u`, optionally followed by the state components
/// (with the full potential).
pub fn snapshot_table(
    state: &PhysicalState,
    z: Option<&ZState>,
) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let grid = state.grid();
    let mut header = vec!["x", "h", "u"];
    if z.is_some() {
        header.extend(Z_COLUMNS);
    }
    let phi = z.map(|z| z.phi_full());
    let rows = (0..grid.n())
        .map(|i| {
            let mut row = vec![
                num(grid.x(i)),
                num(state.h().values()[i]),
                num(state.u().values()[i]),
            ];
            if let (Some(z), Some(phi)) = (z, &phi) {
                let node = z.node(i);
                for (c, value) in node.iter().enumerate() {
                    row.push(num(if c == comp::PHI { phi[i] } else { *value }));
                }
            }
            row
        })
        .collect();
    (header, rows)
}

pub fn convergence_rows(table: &ConvergenceTable) -> Vec<Vec<String>> {
    table
        .rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                num(r.dt),
                num(r.error_l2),
                num(r.error_linf),
                r.observed_order.map(num).unwrap_or_default(),
            ]
        })
        .collect()
}
