//! Versioned plain-text trajectory format.
//!
//! ```text
//! # heom-trajectory v1
//! # n_sites = 8
//! # ... parameter record ...
//! t_fs p_1 .. p_N re_1_2 im_1_2 re_1_3 im_1_3 ..
//! <one row per output time>
//! ```
//!
//! Values are written with 17 significant digits, which reproduces every
//! f64 exactly. Only the diagonal and the upper triangle are stored; the
//! lower triangle is rebuilt by conjugate symmetry.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;

use super::record::{fmt_f64, write_meta, Header};
use crate::error::{Error, Result};
use crate::heom::{DensityMatrix, Trajectory};
use crate::model::ExcitonHamiltonian;

pub const TRAJECTORY_MAGIC: &str = "# heom-trajectory";
pub const TRAJECTORY_VERSION: u32 = 1;

/// Column labels of the body.
pub fn trajectory_columns(n: usize) -> Vec<String> {
    let mut cols = vec!["t_fs".to_string()];
    cols.extend((1..=n).map(|i| format!("p_{i}")));
    for i in 1..=n {
        for j in (i + 1)..=n {
            cols.push(format!("re_{i}_{j}"));
            cols.push(format!("im_{i}_{j}"));
        }
    }
    cols
}

pub fn format_trajectory(traj: &Trajectory) -> String {
    let n = traj.n_sites();
    let mut out = format!("{TRAJECTORY_MAGIC} v{TRAJECTORY_VERSION}\n");
    write_meta(&mut out, &traj.meta, traj.t_max());
    out.push_str(&format!("# rows = {}\n", traj.len()));
    out.push_str(&trajectory_columns(n).join(" "));
    out.push('\n');
    for (t, rho) in traj.times.iter().zip(&traj.states) {
        let mut fields = vec![fmt_f64(*t)];
        fields.extend((0..n).map(|i| fmt_f64(rho[(i, i)].re)));
        for i in 0..n {
            for j in (i + 1)..n {
                fields.push(fmt_f64(rho[(i, j)].re));
                fields.push(fmt_f64(rho[(i, j)].im));
            }
        }
        out.push_str(&fields.join(" "));
        out.push('\n');
    }
    out
}

pub fn write_trajectory(traj: &Trajectory, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(format_trajectory(traj).as_bytes())?;
    w.flush()?;
    Ok(())
}

pub fn read_trajectory(path: &Path) -> Result<Trajectory> {
    let text = std::fs::read_to_string(path)?;
    parse_trajectory(&text, path)
}

pub fn parse_trajectory(text: &str, path: &Path) -> Result<Trajectory> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let lines: Vec<(usize, &str)> = text.lines().enumerate().map(|(i, l)| (i + 1, l)).collect();
    let first = lines.first().map(|(_, l)| *l).unwrap_or("");
    let version = first
        .strip_prefix(TRAJECTORY_MAGIC)
        .map(str::trim)
        .ok_or_else(|| err(1, "not a trajectory file (missing magic line)".into()))?;
    if version != format!("v{TRAJECTORY_VERSION}") {
        return Err(err(
            1,
            format!("unsupported version {version:?}, expected v{TRAJECTORY_VERSION}"),
        ));
    }

    let header_end = lines
        .iter()
        .position(|(_, l)| !l.starts_with('#'))
        .unwrap_or(lines.len());
    let header = Header::parse(path, &lines[1..header_end]);
    let meta = header.meta()?;
    let rows: usize = header.get("rows")?;
    let t_max: f64 = header.get("t_max_fs")?;
    let n = meta.n_sites;
    if n == 0 {
        return Err(err(header.last_line, "n_sites must be positive".into()));
    }

    let (col_line, col_text) = *lines
        .get(header_end)
        .ok_or_else(|| err(header.last_line + 1, "missing column header".into()))?;
    let expected_cols = trajectory_columns(n);
    if col_text
        .split_whitespace()
        .ne(expected_cols.iter().map(String::as_str))
    {
        return Err(err(col_line, "column header does not match n_sites".into()));
    }

    // Internal consistency between the stride, horizon and row count.
    let expected_rows = (t_max / meta.stride_fs).round() as usize + 1;
    if rows != expected_rows {
        return Err(Error::Consistency {
            path: path.to_path_buf(),
            message: format!(
                "header declares {rows} rows but t_max {t_max} fs at stride {} fs implies {expected_rows}",
                meta.stride_fs
            ),
        });
    }

    let mut times = Vec::with_capacity(rows);
    let mut states = Vec::with_capacity(rows);
    for (row, &(line_no, line)) in lines[header_end + 1..].iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let values = line
            .split_whitespace()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| err(line_no, format!("row {}: invalid number {f:?}", row + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != expected_cols.len() {
            return Err(err(
                line_no,
                format!(
                    "row {} is truncated: {} of {} values",
                    row + 1,
                    values.len(),
                    expected_cols.len()
                ),
            ));
        }
        times.push(values[0]);
        let mut rho = DensityMatrix::zeros(n, n);
        for i in 0..n {
            rho[(i, i)] = Complex64::new(values[1 + i], 0.0);
        }
        let mut at = 1 + n;
        for i in 0..n {
            for j in (i + 1)..n {
                let z = Complex64::new(values[at], values[at + 1]);
                rho[(i, j)] = z;
                rho[(j, i)] = z.conj();
                at += 2;
            }
        }
        states.push(rho);
    }
    if states.len() != rows {
        return Err(Error::Consistency {
            path: path.to_path_buf(),
            message: format!("expected {rows} rows, found {}", states.len()),
        });
    }
    Ok(Trajectory {
        times,
        states,
        meta,
    })
}

/// Fails unless the trajectory records the checksum of `hamiltonian`.
pub fn verify_hamiltonian(
    traj: &Trajectory,
    hamiltonian: &ExcitonHamiltonian,
    path: &Path,
) -> Result<()> {
    let expected = hamiltonian.checksum();
    match &traj.meta.hamiltonian_checksum {
        Some(c) if *c == expected => Ok(()),
        Some(c) => Err(Error::Consistency {
            path: path.to_path_buf(),
            message: format!("Hamiltonian checksum {c} does not match model checksum {expected}"),
        }),
        None => Err(Error::Consistency {
            path: path.to_path_buf(),
            message: "trajectory carries no Hamiltonian checksum".into(),
        }),
    }
}
