use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Site energies and couplings of the FMO monomer in cm⁻¹, relative to
/// [`FMO_OFFSET_CM1`].
#[rustfmt::skip]
const FMO_SITE_MATRIX: [[f64; 8]; 8] = [
    [310.0, -80.3,   3.5,  -4.0,   4.5, -10.2,  -4.9,  21.0],
    [-80.3, 230.0,  23.5,   6.7,   0.5,   7.5,   1.5,   3.3],
    [  3.5,  23.5,   0.0, -49.8,  -1.5,  -6.5,   1.2,   0.7],
    [ -4.0,   6.7, -49.8, 180.0,  63.4, -13.3, -42.2,  -1.2],
    [  4.5,   0.5,  -1.5,  63.4, 450.0,  55.8,   4.7,   2.8],
    [-10.2,   7.5,  -6.5, -13.3,  55.8, 320.0,  33.0,  -7.3],
    [ -4.9,   1.5,   1.2, -42.2,   4.7,  33.0, 270.0,  -8.7],
    [ 21.0,   3.3,   0.7,  -1.2,   2.8,  -7.3,  -8.7, 505.0],
];

pub const FMO_OFFSET_CM1: f64 = 12195.0;

/// Name under which the built-in FMO model is addressable.
pub const FMO_MODEL_NAME: &str = "fmo8";

/// Single-excitation Hamiltonian of an N-site network, in cm⁻¹.
///
/// The matrix holds site energies on the diagonal (without the global offset)
/// and couplings off the diagonal. The offset only shifts all levels and has
/// no effect on the dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcitonHamiltonian {
    matrix: DMatrix<f64>,
    diagonal_offset: f64,
}

impl ExcitonHamiltonian {
    /// Builds a Hamiltonian from a square matrix. The matrix must be exactly
    /// symmetric.
    pub fn new(matrix: DMatrix<f64>, diagonal_offset: f64) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::InvalidParameter(format!(
                "Hamiltonian must be a non-empty square matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) || !diagonal_offset.is_finite() {
            return Err(Error::InvalidParameter(
                "Hamiltonian has non-finite entries".into(),
            ));
        }
        let n = matrix.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                if matrix[(i, j)] != matrix[(j, i)] {
                    return Err(Error::InvalidParameter(format!(
                        "Hamiltonian is not symmetric at ({}, {}): {} vs {}",
                        i + 1,
                        j + 1,
                        matrix[(i, j)],
                        matrix[(j, i)]
                    )));
                }
            }
        }
        Ok(ExcitonHamiltonian {
            matrix,
            diagonal_offset,
        })
    }

    /// The 8-site FMO model with its 12195 cm⁻¹ offset.
    pub fn fmo() -> Self {
        let matrix = DMatrix::from_fn(8, 8, |i, j| FMO_SITE_MATRIX[i][j]);
        ExcitonHamiltonian {
            matrix,
            diagonal_offset: FMO_OFFSET_CM1,
        }
    }

    /// Resolves a built-in model name or reads a matrix file.
    pub fn load(name_or_path: &str) -> Result<Self> {
        if name_or_path == FMO_MODEL_NAME {
            return Ok(Self::fmo());
        }
        Self::read(Path::new(name_or_path))
    }

    /// Reads the plain-text matrix format: a first line `N offset`, then
    /// N rows of N whitespace-separated values in cm⁻¹.
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (hline, header) = lines
            .next()
            .ok_or_else(|| parse_err(1, "empty Hamiltonian file".into()))?;
        let mut fields = header.split_whitespace();
        let n: usize = fields
            .next()
            .and_then(|f| f.parse().ok())
            .filter(|&n| n > 0)
            .ok_or_else(|| parse_err(hline, format!("expected site count, got {header:?}")))?;
        let offset: f64 = match fields.next() {
            Some(f) => f
                .parse()
                .map_err(|_| parse_err(hline, format!("invalid offset {f:?}")))?,
            None => 0.0,
        };

        let mut values = Vec::with_capacity(n * n);
        for row in 0..n {
            let (lineno, line) = lines.next().ok_or_else(|| {
                parse_err(hline + row + 1, format!("missing matrix row {}", row + 1))
            })?;
            let before = values.len();
            for f in line.split_whitespace() {
                values.push(
                    f.parse::<f64>()
                        .map_err(|_| parse_err(lineno, format!("invalid number {f:?}")))?,
                );
            }
            if values.len() - before != n {
                return Err(parse_err(
                    lineno,
                    format!("expected {n} values, found {}", values.len() - before),
                ));
            }
        }
        if let Some((lineno, _)) = lines.next() {
            return Err(parse_err(lineno, "trailing data after matrix".into()));
        }
        Self::new(DMatrix::from_row_slice(n, n, &values), offset).map_err(|e| match e {
            Error::InvalidParameter(m) => parse_err(hline, m),
            other => other,
        })
    }

    /// Serializes in the format accepted by [`ExcitonHamiltonian::parse`].
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n_sites(), self.diagonal_offset);
        for i in 0..self.n_sites() {
            let row: Vec<String> = (0..self.n_sites())
                .map(|j| format!("{}", self.matrix[(i, j)]))
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn n_sites(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn diagonal_offset(&self) -> f64 {
        self.diagonal_offset
    }

    /// Element with 1-based site indices, without offset.
    pub fn element(&self, n: usize, k: usize) -> f64 {
        self.matrix[(n - 1, k - 1)]
    }

    /// Matrix including the offset on the diagonal.
    pub fn with_offset(&self) -> DMatrix<f64> {
        &self.matrix + DMatrix::identity(self.n_sites(), self.n_sites()) * self.diagonal_offset
    }

    /// Same network with every site-site coupling removed.
    pub fn without_couplings(&self) -> Self {
        ExcitonHamiltonian {
            matrix: DMatrix::from_diagonal(&self.matrix.diagonal()),
            diagonal_offset: self.diagonal_offset,
        }
    }

    /// Adds `shift` to every site energy.
    pub fn shifted(&self, shift: f64) -> Self {
        let n = self.n_sites();
        ExcitonHamiltonian {
            matrix: &self.matrix + DMatrix::identity(n, n) * shift,
            diagonal_offset: self.diagonal_offset,
        }
    }

    /// Short hex digest over the matrix entries and offset, used to tie
    /// output files to the model that produced them.
    pub fn checksum(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.n_sites() as u64).to_le_bytes());
        hasher.update(self.diagonal_offset.to_bits().to_le_bytes());
        for v in self.matrix.iter() {
            hasher.update(v.to_bits().to_le_bytes());
        }
        let digest = hasher.finalize();
        let mut hex = String::with_capacity(16);
        for b in &digest[..8] {
            let _ = write!(hex, "{b:02x}");
        }
        hex
    }

    /// Average energy gap `g = ‖H − Tr(H)·I/N‖_* / (N − 1)` in cm⁻¹.
    ///
    /// The traceless part is symmetric, so its nuclear norm is the sum of the
    /// absolute eigenvalues. Any uniform shift (including the offset) drops out.
    pub fn average_energy_gap(&self) -> f64 {
        let n = self.n_sites();
        if n < 2 {
            return 0.0;
        }
        let mean = self.matrix.trace() / n as f64;
        let traceless = &self.matrix - DMatrix::identity(n, n) * mean;
        let eig = SymmetricEigen::new(traceless);
        eig.eigenvalues.iter().map(|v| v.abs()).sum::<f64>() / (n - 1) as f64
    }
}
