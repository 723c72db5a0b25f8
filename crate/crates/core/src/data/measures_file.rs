//! Delimited table of observables, one row per output time.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::record::{fmt_f64, write_meta, Header};
use crate::error::{Error, Result};
use crate::heom::TrajectoryMeta;
use crate::measures::{MeasureSeries, SitePair};

pub const MEASURES_MAGIC: &str = "# heom-measures";
pub const MEASURES_VERSION: u32 = 1;

pub fn format_measures(series: &MeasureSeries, meta: &TrajectoryMeta) -> String {
    let mut out = format!("{MEASURES_MAGIC} v{MEASURES_VERSION}\n");
    write_meta(&mut out, meta, series.times.last().copied().unwrap_or(0.0));
    let mut cols = vec!["t_fs".to_string(), "E".into(), "S".into(), "L_rho".into()];
    cols.extend(series.concurrences.iter().map(|(p, _)| p.label()));
    out.push_str(&cols.join(" "));
    out.push('\n');
    for i in 0..series.len() {
        let mut row = vec![
            fmt_f64(series.times[i]),
            fmt_f64(series.global_entanglement[i]),
            fmt_f64(series.entropy[i]),
            fmt_f64(series.coherence_length[i]),
        ];
        row.extend(series.concurrences.iter().map(|(_, v)| fmt_f64(v[i])));
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn write_measures(series: &MeasureSeries, meta: &TrajectoryMeta, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(format_measures(series, meta).as_bytes())?;
    w.flush()?;
    Ok(())
}

pub fn read_measures(path: &Path) -> Result<(MeasureSeries, TrajectoryMeta)> {
    let text = std::fs::read_to_string(path)?;
    parse_measures(&text, path)
}

pub fn parse_measures(text: &str, path: &Path) -> Result<(MeasureSeries, TrajectoryMeta)> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let lines: Vec<(usize, &str)> = text.lines().enumerate().map(|(i, l)| (i + 1, l)).collect();
    let version = lines
        .first()
        .and_then(|(_, l)| l.strip_prefix(MEASURES_MAGIC))
        .map(str::trim)
        .ok_or_else(|| err(1, "not a measures file (missing magic line)".into()))?;
    if version != format!("v{MEASURES_VERSION}") {
        return Err(err(1, format!("unsupported version {version:?}")));
    }
    let header_end = lines
        .iter()
        .position(|(_, l)| !l.starts_with('#'))
        .unwrap_or(lines.len());
    let meta = Header::parse(path, &lines[1..header_end]).meta()?;
    let (col_line, cols) = *lines
        .get(header_end)
        .ok_or_else(|| err(header_end + 1, "missing column header".into()))?;
    let cols: Vec<&str> = cols.split_whitespace().collect();
    if cols.len() < 4 || cols[..4] != ["t_fs", "E", "S", "L_rho"] {
        return Err(err(col_line, "unexpected column header".into()));
    }
    let pairs = cols[4..]
        .iter()
        .map(|c| {
            c.strip_prefix("C_")
                .and_then(|p| p.replace('_', ",").parse::<SitePair>().ok())
                .ok_or_else(|| err(col_line, format!("invalid concurrence column {c:?}")))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut series = MeasureSeries {
        times: vec![],
        global_entanglement: vec![],
        entropy: vec![],
        coherence_length: vec![],
        concurrences: pairs.into_iter().map(|p| (p, vec![])).collect(),
    };
    for &(no, line) in &lines[header_end + 1..] {
        if line.trim().is_empty() {
            continue;
        }
        let v = line
            .split_whitespace()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| err(no, format!("invalid number {f:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if v.len() != cols.len() {
            return Err(err(
                no,
                format!("expected {} values, found {}", cols.len(), v.len()),
            ));
        }
        series.times.push(v[0]);
        series.global_entanglement.push(v[1]);
        series.entropy.push(v[2]);
        series.coherence_length.push(v[3]);
        for (k, (_, values)) in series.concurrences.iter_mut().enumerate() {
            values.push(v[4 + k]);
        }
    }
    Ok((series, meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heom::{site_state, DensityMatrix, Trajectory};
    use crate::measures::trajectory_measures;
    use num_complex::Complex64;

    #[test]
    fn round_trip() {
        let traj = Trajectory {
            times: vec![0.0, 0.1],
            states: vec![
                site_state(4, 1).unwrap(),
                DensityMatrix::from_element(4, 4, Complex64::new(0.25, 0.0)),
            ],
            meta: TrajectoryMeta::bare(4, 0.1),
        };
        let pairs: Vec<SitePair> = ["1,2", "3,4", "2,3"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        let series = trajectory_measures(&traj, &pairs).unwrap();
        let text = format_measures(&series, &traj.meta);
        assert!(text.contains("t_fs E S L_rho C_1_2 C_3_4 C_2_3\n"));
        let (back, meta) = parse_measures(&text, Path::new("m")).unwrap();
        assert_eq!(back, series);
        assert_eq!(meta, traj.meta);
    }
}
