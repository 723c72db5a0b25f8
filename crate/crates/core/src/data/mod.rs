//! Plain-text persistence: trajectories, measure tables, external imports
//! and sweep manifests.

mod external;
mod manifest;
mod measures_file;
mod record;
mod trajectory_file;

pub use external::{import_external, import_external_str, Column, LayoutConfig, IMPORT_TOL};
pub use manifest::{
    read_subset, run_id, sweep_manifest, SubsetRule, SweepGrids, SweepManifest, SweepPoint,
};
pub use measures_file::{format_measures, parse_measures, read_measures, write_measures};
pub use record::fmt_f64;
pub use trajectory_file::{
    format_trajectory, parse_trajectory, read_trajectory, trajectory_columns, verify_hamiltonian,
    write_trajectory, TRAJECTORY_VERSION,
};
