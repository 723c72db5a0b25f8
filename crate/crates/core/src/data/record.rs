//! `# key = value` header lines shared by the plain-text formats.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::heom::TrajectoryMeta;
use crate::model::BathSpec;

/// Shortest-safe text form of a value: 17 significant digits, exact on read-back.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "none".to_string(), |v| v.to_string())
}

/// Header lines carrying the full parameter record.
pub(crate) fn write_meta(out: &mut String, meta: &TrajectoryMeta, t_max_fs: f64) {
    let line = |out: &mut String, k: &str, v: String| out.push_str(&format!("# {k} = {v}\n"));
    line(out, "n_sites", meta.n_sites.to_string());
    line(out, "lambda_cm1", opt(meta.bath.map(|b| b.lambda)));
    line(out, "gamma_cm1", opt(meta.bath.map(|b| b.gamma)));
    line(out, "temperature_k", opt(meta.bath.map(|b| b.temperature)));
    line(out, "n_matsubara", opt(meta.bath.map(|b| b.n_matsubara)));
    line(out, "truncation_level", opt(meta.truncation_level));
    line(out, "dt_fs", opt(meta.dt_fs));
    line(out, "stride_fs", meta.stride_fs.to_string());
    line(out, "t_max_fs", t_max_fs.to_string());
    line(out, "initial_site", opt(meta.initial_site));
    line(
        out,
        "hamiltonian_checksum",
        opt(meta.hamiltonian_checksum.clone()),
    );
}

/// Collected `# key = value` pairs with their line numbers.
pub(crate) struct Header<'a> {
    pub path: &'a Path,
    pub fields: HashMap<String, (usize, String)>,
    pub last_line: usize,
}

impl<'a> Header<'a> {
    pub fn parse(path: &'a Path, lines: &[(usize, &str)]) -> Self {
        let mut fields = HashMap::new();
        let mut last_line = 0;
        for &(no, l) in lines {
            last_line = no;
            if let Some((k, v)) = l.trim_start_matches('#').split_once('=') {
                fields.insert(k.trim().to_string(), (no, v.trim().to_string()));
            }
        }
        Header {
            path,
            fields,
            last_line,
        }
    }

    fn err(&self, line: usize, message: String) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            line,
            message,
        }
    }

    pub fn raw(&self, key: &str) -> Result<(usize, &str)> {
        self.fields
            .get(key)
            .map(|(n, v)| (*n, v.as_str()))
            .ok_or_else(|| self.err(self.last_line, format!("missing header field {key:?}")))
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let (line, v) = self.raw(key)?;
        v.parse()
            .map_err(|_| self.err(line, format!("invalid value {v:?} for {key}")))
    }

    pub fn get_opt<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        let (line, v) = self.raw(key)?;
        if v == "none" {
            return Ok(None);
        }
        v.parse()
            .map(Some)
            .map_err(|_| self.err(line, format!("invalid value {v:?} for {key}")))
    }

    pub fn meta(&self) -> Result<TrajectoryMeta> {
        let lambda: Option<f64> = self.get_opt("lambda_cm1")?;
        let gamma: Option<f64> = self.get_opt("gamma_cm1")?;
        let temperature: Option<f64> = self.get_opt("temperature_k")?;
        let n_matsubara: Option<usize> = self.get_opt("n_matsubara")?;
        let bath = match (lambda, gamma, temperature, n_matsubara) {
            (Some(lambda), Some(gamma), Some(temperature), Some(n_matsubara)) => Some(BathSpec {
                lambda,
                gamma,
                temperature,
                n_matsubara,
            }),
            (None, None, None, None) => None,
            _ => {
                let (line, _) = self.raw("lambda_cm1")?;
                return Err(self.err(line, "incomplete bath record".into()));
            }
        };
        Ok(TrajectoryMeta {
            n_sites: self.get("n_sites")?,
            bath,
            truncation_level: self.get_opt("truncation_level")?,
            dt_fs: self.get_opt("dt_fs")?,
            stride_fs: self.get("stride_fs")?,
            initial_site: self.get_opt("initial_site")?,
            hamiltonian_checksum: self.get_opt("hamiltonian_checksum")?,
        })
    }
}
