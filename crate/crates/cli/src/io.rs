//! CSV schemas and atomic file output.

use std::io::Write;
use std::path::Path;

use casimir_core::sweep::SweepTable;
use casimir_core::units::{au_to_cm1, au_to_fs};
use casimir_core::Trajectory;
use tempfile::NamedTempFile;

use crate::CliError;

pub const TRAJECTORY_COLUMNS: [&str; 13] = [
    "t_au",
    "t_fs",
    "P_e",
    "re_rho_eg",
    "im_rho_eg",
    "E_e_cm1",
    "E_c_cm1",
    "E_B_cm1",
    "E_D_cm1",
    "q_c",
    "p_c",
    "q_B",
    "p_B",
];

pub const SWEEP_COLUMNS: [&str; 6] = [
    "param_value",
    "E_D_5ps_cm1",
    "E_c_peak_cm1",
    "P_e_max",
    "P_e_final",
    "status",
];

/// 17 significant digits: enough for any f64 to survive a text round trip.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Writes through a temporary file in the destination directory and renames
/// it into place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file()
        .sync_all()
        .map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

fn csv_bytes<I, R>(header: &[&str], rows: I) -> Vec<u8>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("write to memory");
    for row in rows {
        w.write_record(row).expect("write to memory");
    }
    w.into_inner().expect("flush to memory")
}

pub fn trajectory_csv(traj: &Trajectory) -> Vec<u8> {
    let rows = (0..traj.len()).map(|i| {
        [
            traj.times[i],
            au_to_fs(traj.times[i]),
            traj.p_e[i],
            traj.re_rho_eg[i],
            traj.im_rho_eg[i],
            au_to_cm1(traj.e_e[i]),
            au_to_cm1(traj.e_c[i]),
            au_to_cm1(traj.e_b[i]),
            au_to_cm1(traj.e_d[i]),
            traj.q_c[i],
            traj.p_c[i],
            traj.q_b[i],
            traj.p_b[i],
        ]
        .map(fmt_f64)
    });
    csv_bytes(&TRAJECTORY_COLUMNS, rows)
}

pub fn sweep_csv(table: &SweepTable) -> Vec<u8> {
    let rows = table.rows.iter().map(|r| {
        [
            fmt_f64(r.value),
            fmt_f64(r.e_d_cm1),
            fmt_f64(r.e_c_peak_cm1),
            fmt_f64(r.p_e_max),
            fmt_f64(r.p_e_final),
            r.status.to_string(),
        ]
    });
    csv_bytes(&SWEEP_COLUMNS, rows)
}

/// Columns of a `trajectory.csv`, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryTable {
    pub columns: Vec<Vec<f64>>,
}

impl TrajectoryTable {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        TRAJECTORY_COLUMNS
            .iter()
            .position(|c| *c == name)
            .map(|i| self.columns[i].as_slice())
    }

    pub fn len(&self) -> usize {
        self.columns[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn read_trajectory_csv(path: &Path) -> Result<TrajectoryTable, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    parse_trajectory_csv(&bytes).map_err(|e| match e {
        CliError::Validation(m) => CliError::Validation(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse_trajectory_csv(bytes: &[u8]) -> Result<TrajectoryTable, CliError> {
    let bad = |m: String| CliError::Validation(m);
    let mut r = csv::ReaderBuilder::new().from_reader(bytes);
    let header = r
        .headers()
        .map_err(|e| bad(format!("unreadable header: {e}")))?;
    let names: Vec<&str> = header.iter().collect();
    if names != TRAJECTORY_COLUMNS {
        return Err(bad(format!(
            "unexpected header {names:?}; expected {TRAJECTORY_COLUMNS:?}"
        )));
    }
    let mut columns = vec![Vec::new(); TRAJECTORY_COLUMNS.len()];
    for (i, rec) in r.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| bad(format!("row {row}: {e}")))?;
        if rec.len() != TRAJECTORY_COLUMNS.len() {
            return Err(bad(format!(
                "row {row}: {} fields, expected {}",
                rec.len(),
                TRAJECTORY_COLUMNS.len()
            )));
        }
        for (j, field) in rec.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                bad(format!(
                    "row {row}: column {} holds `{field}`, not a number",
                    TRAJECTORY_COLUMNS[j]
                ))
            })?;
            columns[j].push(v);
        }
    }
    if columns[0].is_empty() {
        return Err(bad("no data rows".into()));
    }
    Ok(TrajectoryTable { columns })
}
