//! Import of externally produced trajectories with a configurable column
//! layout.

use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;

use super::trajectory_file::trajectory_columns;
use crate::error::{Error, Result};
use crate::heom::{hermiticity_defect, trace, DensityMatrix, Trajectory, TrajectoryMeta};

/// Trace and Hermiticity tolerance for imported states.
pub const IMPORT_TOL: f64 = 1e-6;

/// Meaning of one column of an external table. Site indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Column {
    Time,
    Population(usize),
    Re(usize, usize),
    Im(usize, usize),
    Skip,
}

impl FromStr for Column {
    type Err = Error;

    /// Accepts `t`, `p<n>`, `re<n>_<k>`, `im<n>_<k>` and `skip`, with an
    /// optional `_` after the prefix (so internal labels like `re_1_2` work).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unrecognized layout column {s:?}"));
        let s = s.trim();
        let pair = |rest: &str| -> Result<(usize, usize)> {
            let rest = rest.trim_start_matches('_');
            let (a, b) = rest.split_once('_').ok_or_else(bad)?;
            Ok((a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?))
        };
        match s {
            "t" | "t_fs" | "time" => Ok(Column::Time),
            "skip" | "_" => Ok(Column::Skip),
            _ => {
                if let Some(rest) = s.strip_prefix("re") {
                    let (n, k) = pair(rest)?;
                    Ok(Column::Re(n, k))
                } else if let Some(rest) = s.strip_prefix("im") {
                    let (n, k) = pair(rest)?;
                    Ok(Column::Im(n, k))
                } else if let Some(rest) = s.strip_prefix('p') {
                    Ok(Column::Population(
                        rest.trim_start_matches('_').parse().map_err(|_| bad())?,
                    ))
                } else {
                    Err(bad())
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutConfig {
    pub n_sites: usize,
    pub columns: Vec<Column>,
    /// Factor converting the time column to fs.
    pub time_scale: f64,
    /// Non-comment lines to skip before the data (column headers).
    pub header_lines: usize,
    /// Field separator; `None` splits on whitespace and commas.
    pub delimiter: Option<char>,
}

impl LayoutConfig {
    /// Parses a comma- or whitespace-separated list of column specifiers.
    pub fn parse(n_sites: usize, spec: &str) -> Result<Self> {
        let columns = spec
            .split([',', ' ', '\t'])
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<Column>>>()?;
        let layout = LayoutConfig {
            n_sites,
            columns,
            time_scale: 1.0,
            header_lines: 0,
            delimiter: None,
        };
        layout.check()?;
        Ok(layout)
    }

    /// The column order of this crate's own trajectory files.
    pub fn internal(n_sites: usize) -> Self {
        let columns = trajectory_columns(n_sites)
            .iter()
            .map(|c| c.parse().expect("internal labels parse"))
            .collect();
        LayoutConfig {
            n_sites,
            columns,
            time_scale: 1.0,
            header_lines: 1,
            delimiter: None,
        }
    }

    /// Every population, and the real and imaginary part of every pair in
    /// at least one orientation, must be mapped.
    fn check(&self) -> Result<()> {
        let n = self.n_sites;
        let mismatch = |m: String| Error::Import {
            record: 0,
            message: format!("layout mismatch: {m}"),
        };
        if n == 0 {
            return Err(mismatch("n_sites must be positive".into()));
        }
        if self.columns.iter().filter(|c| **c == Column::Time).count() != 1 {
            return Err(mismatch("exactly one time column required".into()));
        }
        let in_range = |i: usize| (1..=n).contains(&i);
        for c in &self.columns {
            let ok = match *c {
                Column::Population(i) => in_range(i),
                Column::Re(i, j) | Column::Im(i, j) => in_range(i) && in_range(j),
                _ => true,
            };
            if !ok {
                return Err(mismatch(format!("column {c:?} outside 1..={n}")));
            }
        }
        for i in 1..=n {
            let has_pop = self
                .columns
                .iter()
                .any(|c| *c == Column::Population(i) || *c == Column::Re(i, i));
            if !has_pop {
                return Err(mismatch(format!("no column for population {i}")));
            }
            for j in (i + 1)..=n {
                let re = self
                    .columns
                    .iter()
                    .any(|c| *c == Column::Re(i, j) || *c == Column::Re(j, i));
                let im = self
                    .columns
                    .iter()
                    .any(|c| *c == Column::Im(i, j) || *c == Column::Im(j, i));
                if !re || !im {
                    return Err(mismatch(format!("no columns for coherence ({i}, {j})")));
                }
            }
        }
        Ok(())
    }
}

/// Reads an external table, rebuilding each ρ from the mapped columns.
///
/// Missing orientations are filled by conjugate symmetry. States whose trace
/// or Hermiticity is off by more than [`IMPORT_TOL`] are rejected, naming
/// the first bad record (1-based).
pub fn import_external(path: &Path, layout: &LayoutConfig) -> Result<Trajectory> {
    let text = std::fs::read_to_string(path)?;
    import_external_str(&text, layout)
}

pub fn import_external_str(text: &str, layout: &LayoutConfig) -> Result<Trajectory> {
    layout.check()?;
    let n = layout.n_sites;
    let mut times = Vec::new();
    let mut states = Vec::new();
    let records = text
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .skip(layout.header_lines);

    for (r, line) in records.enumerate() {
        let record = r + 1;
        let fields: Vec<&str> = match layout.delimiter {
            Some(d) => line.split(d).map(str::trim).collect(),
            None => line
                .split([',', ' ', '\t'])
                .filter(|f| !f.is_empty())
                .collect(),
        };
        if fields.len() != layout.columns.len() {
            return Err(Error::Import {
                record,
                message: format!(
                    "layout mismatch: {} fields, layout has {}",
                    fields.len(),
                    layout.columns.len()
                ),
            });
        }
        let mut t = 0.0;
        let mut re = vec![None; n * n];
        let mut im = vec![None; n * n];
        for (col, f) in layout.columns.iter().zip(&fields) {
            if *col == Column::Skip {
                continue;
            }
            let v: f64 = f.parse().map_err(|_| Error::Import {
                record,
                message: format!("invalid number {f:?}"),
            })?;
            match *col {
                Column::Time => t = v * layout.time_scale,
                Column::Population(i) => re[(i - 1) * n + (i - 1)] = Some(v),
                Column::Re(i, j) => re[(i - 1) * n + (j - 1)] = Some(v),
                Column::Im(i, j) => im[(i - 1) * n + (j - 1)] = Some(v),
                Column::Skip => {}
            }
        }
        let rho = DensityMatrix::from_fn(n, n, |a, b| {
            let direct = (re[a * n + b], im[a * n + b]);
            let mirror = (re[b * n + a], im[b * n + a]);
            let x = direct.0.or(mirror.0).unwrap_or(0.0);
            let y = match (direct.1, mirror.1) {
                (Some(v), _) => v,
                (None, Some(v)) => -v,
                (None, None) => 0.0,
            };
            Complex64::new(x, y)
        });
        let drift = (trace(&rho) - 1.0).norm();
        if !(drift <= IMPORT_TOL) {
            return Err(Error::Import {
                record,
                message: format!("trace deviates from 1 by {drift:e}"),
            });
        }
        let defect = hermiticity_defect(&rho);
        if !(defect <= IMPORT_TOL) {
            return Err(Error::Import {
                record,
                message: format!("Hermiticity defect {defect:e}"),
            });
        }
        times.push(t);
        states.push(rho);
    }
    if states.is_empty() {
        return Err(Error::Import {
            record: 0,
            message: "no data records".into(),
        });
    }
    let stride = if times.len() > 1 {
        times[1] - times[0]
    } else {
        0.0
    };
    Ok(Trajectory {
        times,
        states,
        meta: TrajectoryMeta::bare(n, stride),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::trajectory_file::format_trajectory;

    fn sample() -> Trajectory {
        let mut states = Vec::new();
        for k in 0..4 {
            let p = 1.0 - 0.2 * k as f64;
            let c = Complex64::new(0.1 * k as f64, -0.03 * k as f64);
            let rho = DensityMatrix::from_row_slice(
                3,
                3,
                &[
                    Complex64::new(p, 0.0),
                    c,
                    Complex64::new(0.0, 0.01),
                    c.conj(),
                    Complex64::new(1.0 - p, 0.0),
                    Complex64::new(0.0, 0.0),
                    Complex64::new(0.0, -0.01),
                    Complex64::new(0.0, 0.0),
                    Complex64::new(0.0, 0.0),
                ],
            );
            states.push(rho);
        }
        Trajectory {
            times: vec![0.0, 0.1, 0.2, 0.30000000000000004],
            states,
            meta: TrajectoryMeta::bare(3, 0.1),
        }
    }

    #[test]
    fn identity_layout_reimport() {
        let traj = sample();
        let imported =
            import_external_str(&format_trajectory(&traj), &LayoutConfig::internal(3)).unwrap();
        assert_eq!(imported.times, traj.times);
        assert_eq!(imported.states, traj.states);
    }

    #[test]
    fn permuted_layout() {
        let traj = sample();
        // Lower-triangle orientation and shuffled order, comma separated.
        let layout =
            LayoutConfig::parse(3, "im3_1,p2,re2_1,t,skip,im2_1,re3_1,p3,p1,re2_3,im2_3").unwrap();
        let mut text = String::from("# exported elsewhere\n");
        for (t, r) in traj.times.iter().zip(&traj.states) {
            let row = [
                r[(2, 0)].im,
                r[(1, 1)].re,
                r[(1, 0)].re,
                *t,
                42.0,
                r[(1, 0)].im,
                r[(2, 0)].re,
                r[(2, 2)].re,
                r[(0, 0)].re,
                r[(1, 2)].re,
                r[(1, 2)].im,
            ];
            let row: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
            text.push_str(&row.join(","));
            text.push('\n');
        }
        let imported = import_external_str(&text, &layout).unwrap();
        assert_eq!(imported.states, traj.states);
        assert_eq!(imported.times, traj.times);
    }

    #[test]
    fn corrupted_trace_rejected_at_first_bad_record() {
        let mut traj = sample();
        traj.states[2][(0, 0)] += 1e-3;
        match import_external_str(&format_trajectory(&traj), &LayoutConfig::internal(3)) {
            Err(Error::Import { record: 3, message }) => assert!(message.contains("trace")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        let layout = LayoutConfig::parse(2, "t p1 p2 re1_2 im1_2 re2_1 im2_1").unwrap();
        let text = "0 1 0 0.1 0.2 0.1 -0.2\n1 1 0 0.1 0.2 0.1 0.2\n";
        match import_external_str(text, &layout) {
            Err(Error::Import { record: 2, message }) => assert!(message.contains("Hermiticity")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn layout_mismatch() {
        assert!(LayoutConfig::parse(2, "t p1 p2 re1_2").is_err());
        assert!(LayoutConfig::parse(2, "p1 p2 re1_2 im1_2").is_err());
        assert!(LayoutConfig::parse(2, "t p1 p3 re1_2 im1_2").is_err());
        assert!("bogus".parse::<Column>().is_err());
        let layout = LayoutConfig::parse(2, "t p1 p2 re1_2 im1_2").unwrap();
        assert!(matches!(
            import_external_str("0 1 0 0\n", &layout),
            Err(Error::Import { record: 1, .. })
        ));
    }
}
