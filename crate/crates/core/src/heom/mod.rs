//! Hierarchical equations of motion for site-local Drude–Lorentz baths.

mod converge;
mod hierarchy;
mod propagate;
mod rhs;
mod trajectory;

pub use converge::{converge, converge_with, ConvergenceConfig, ConvergenceReport, LadderStep};
pub use hierarchy::{ado_count, AdoIndex, HierarchyIndex, DEFAULT_ADO_BUDGET};
pub use propagate::{check_initial_state, propagate, HeomModel, Integrator, PropagationConfig};
pub use rhs::HeomGenerator;
pub use trajectory::{
    hermiticity_defect, site_state, trace, DensityMatrix, Diagnostics, Trajectory, TrajectoryMeta,
    HERMITICITY_TOL, NEGATIVE_POPULATION_TOL, TRACE_TOL,
};
