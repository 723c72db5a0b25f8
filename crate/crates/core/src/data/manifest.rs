//! Parameter-sweep manifests over (λ, γ, T) grids.

use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};

pub const MANIFEST_MAGIC: &str = "# heom-manifest";
pub const MANIFEST_VERSION: u32 = 1;

fn arithmetic(start: f64, step: f64, last: f64) -> Vec<f64> {
    let n = ((last - start) / step).round() as usize;
    (0..=n).map(|i| start + step * i as f64).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrids {
    /// Reorganization energies, cm⁻¹.
    pub lambda: Vec<f64>,
    /// Cut-off frequencies, cm⁻¹.
    pub gamma: Vec<f64>,
    /// Temperatures, K.
    pub temperature: Vec<f64>,
}

impl Default for SweepGrids {
    /// λ ∈ {10, 40, …, 520}, γ ∈ {25, 50, …, 500}, T ∈ {30, 50, …, 510}.
    fn default() -> Self {
        SweepGrids {
            lambda: arithmetic(10.0, 30.0, 520.0),
            gamma: arithmetic(25.0, 25.0, 500.0),
            temperature: arithmetic(30.0, 20.0, 510.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SubsetRule {
    /// Full Cartesian product, λ-major.
    Full,
    /// Explicit (λ, γ, T) triples, kept in the given order; each must lie on
    /// the grids.
    Explicit(Vec<(f64, f64, f64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub run_id: String,
    pub lambda: f64,
    pub gamma: f64,
    pub temperature: f64,
}

/// Stable identifier derived from the parameters alone.
pub fn run_id(lambda: f64, gamma: f64, temperature: f64) -> String {
    format!("l{lambda}_g{gamma}_t{temperature}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepManifest {
    pub grids: SweepGrids,
    pub initial_site: usize,
    pub runs: Vec<SweepPoint>,
}

pub fn sweep_manifest(
    grids: SweepGrids,
    subset: &SubsetRule,
    initial_site: usize,
) -> Result<SweepManifest> {
    for (name, g) in [
        ("lambda", &grids.lambda),
        ("gamma", &grids.gamma),
        ("temperature", &grids.temperature),
    ] {
        if g.is_empty() {
            return Err(Error::Manifest(format!("{name} grid is empty")));
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::Manifest(format!(
                "{name} grid has non-finite values"
            )));
        }
    }
    let triples: Vec<(f64, f64, f64)> = match subset {
        SubsetRule::Full => {
            let mut v = Vec::with_capacity(
                grids.lambda.len() * grids.gamma.len() * grids.temperature.len(),
            );
            for &l in &grids.lambda {
                for &g in &grids.gamma {
                    for &t in &grids.temperature {
                        v.push((l, g, t));
                    }
                }
            }
            v
        }
        SubsetRule::Explicit(list) => {
            for &(l, g, t) in list {
                if !grids.lambda.contains(&l)
                    || !grids.gamma.contains(&g)
                    || !grids.temperature.contains(&t)
                {
                    return Err(Error::Manifest(format!(
                        "triple ({l}, {g}, {t}) is not on the grids"
                    )));
                }
            }
            list.clone()
        }
    };

    let mut seen = HashSet::new();
    let mut runs = Vec::with_capacity(triples.len());
    for (lambda, gamma, temperature) in triples {
        let id = run_id(lambda, gamma, temperature);
        if !seen.insert(id.clone()) {
            return Err(Error::Manifest(format!("duplicate parameter triple {id}")));
        }
        runs.push(SweepPoint {
            run_id: id,
            lambda,
            gamma,
            temperature,
        });
    }
    Ok(SweepManifest {
        grids,
        initial_site,
        runs,
    })
}

impl SweepManifest {
    pub fn len(&self) -> usize {
        self.runs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn to_text(&self) -> String {
        let join = |g: &[f64]| g.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        let mut out = format!("{MANIFEST_MAGIC} v{MANIFEST_VERSION}\n");
        out.push_str(&format!("# initial_site = {}\n", self.initial_site));
        out.push_str(&format!("# lambda_grid = {}\n", join(&self.grids.lambda)));
        out.push_str(&format!("# gamma_grid = {}\n", join(&self.grids.gamma)));
        out.push_str(&format!(
            "# temperature_grid = {}\n",
            join(&self.grids.temperature)
        ));
        out.push_str("run_id lambda gamma T\n");
        for r in &self.runs {
            out.push_str(&format!(
                "{} {} {} {}\n",
                r.run_id, r.lambda, r.gamma, r.temperature
            ));
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?, path)
    }

    /// Parses a manifest; run ids are re-derived and must match the stored ones.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        match lines.next() {
            Some((_, l)) if l.trim() == format!("{MANIFEST_MAGIC} v{MANIFEST_VERSION}") => {}
            _ => return Err(err(1, "missing or unsupported manifest magic line".into())),
        }
        let mut initial_site = 1;
        let mut grids = SweepGrids {
            lambda: vec![],
            gamma: vec![],
            temperature: vec![],
        };
        let mut triples = Vec::new();
        for (no, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(h) = line.strip_prefix('#') {
                let Some((k, v)) = h.split_once('=') else {
                    continue;
                };
                let grid = |v: &str| -> Result<Vec<f64>> {
                    v.split(',')
                        .map(|x| {
                            x.trim()
                                .parse()
                                .map_err(|_| err(no, format!("invalid grid value {x:?}")))
                        })
                        .collect()
                };
                match k.trim() {
                    "initial_site" => {
                        initial_site = v
                            .trim()
                            .parse()
                            .map_err(|_| err(no, "invalid initial_site".into()))?
                    }
                    "lambda_grid" => grids.lambda = grid(v)?,
                    "gamma_grid" => grids.gamma = grid(v)?,
                    "temperature_grid" => grids.temperature = grid(v)?,
                    _ => {}
                }
                continue;
            }
            if line.starts_with("run_id") {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 4 {
                return Err(err(no, format!("expected 4 fields, found {}", f.len())));
            }
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| err(no, format!("invalid number {s:?}")))
            };
            let (l, g, t) = (num(f[1])?, num(f[2])?, num(f[3])?);
            if run_id(l, g, t) != f[0] {
                return Err(err(
                    no,
                    format!("run id {} does not match its parameters", f[0]),
                ));
            }
            triples.push((l, g, t));
        }
        sweep_manifest(grids, &SubsetRule::Explicit(triples), initial_site)
    }
}

/// Reads whitespace- or comma-separated `λ γ T` triples, one per line.
pub fn read_subset(path: &Path) -> Result<Vec<(f64, f64, f64)>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: Vec<f64> = line
            .split([',', ' ', '\t'])
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("invalid triple {line:?}"),
            })?;
        if v.len() != 3 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("expected 3 values, found {}", v.len()),
            });
        }
        out.push((v[0], v[1], v[2]));
    }
    Ok(out)
}
