//! CSV export of dispatch traces, in GW and GWh.

use std::path::Path;

use super::DispatchState;
use crate::scenario::Scenario;
use crate::{Error, Result};

fn write_rows(
    path: &Path,
    header: Vec<String>,
    rows: impl Iterator<Item = Vec<f64>>,
) -> Result<()> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(&header).map_err(csv_err)?;
    for (t, row) in rows.enumerate() {
        let mut rec = vec![t.to_string()];
        // Adding zero folds -0 into 0 so equal dispatches print identically.
        rec.extend(row.iter().map(|v| (v + 0.0).to_string()));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// One row per simulated interval: node flows, then storage, flexible and
/// line power.
pub fn write_dispatch_csv(s: &Scenario, d: &DispatchState, path: &Path) -> Result<()> {
    let mut header = vec!["interval".to_string()];
    for n in &s.nodes {
        for f in [
            "demand", "pv", "wind", "baseload", "imports", "exports", "unserved", "spillage",
        ] {
            header.push(format!("{n}.{f}"));
        }
    }
    header.extend(s.storages.iter().map(|k| format!("{}.power", k.id)));
    header.extend(
        d.flexible_generators
            .iter()
            .map(|&g| format!("{}.power", s.generators[g].id)),
    );
    header.extend(s.lines.iter().map(|l| format!("{}.flow", l.id)));
    let (nn, nk, ng, nl) = (d.n_nodes, d.n_storages, d.n_flexible, d.n_lines);
    let width = header.len() - 1;
    let rows = (0..d.completed_intervals).map(|t| {
        let mut r = Vec::with_capacity(width);
        for n in 0..nn {
            let i = t * nn + n;
            r.extend([
                d.load[i],
                d.pv[i],
                d.wind[i],
                d.baseload[i],
                d.imports[i],
                d.exports[i],
                d.unserved[i],
                d.spillage[i],
            ]);
        }
        r.extend_from_slice(&d.storage_power[t * nk..(t + 1) * nk]);
        r.extend_from_slice(&d.flexible_power[t * ng..(t + 1) * ng]);
        r.extend_from_slice(&d.line_flow[t * nl..(t + 1) * nl]);
        r
    });
    write_rows(path, header, rows)
}

/// Stored energy of each storage at the end of each simulated interval.
pub fn write_soc_csv(s: &Scenario, d: &DispatchState, path: &Path) -> Result<()> {
    let mut header = vec!["interval".to_string()];
    header.extend(s.storages.iter().map(|k| k.id.clone()));
    let nk = d.n_storages;
    let rows = (0..d.completed_intervals).map(|t| d.storage_energy[t * nk..(t + 1) * nk].to_vec());
    write_rows(path, header, rows)
}
