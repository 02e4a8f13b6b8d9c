pub mod bnb;
pub mod brute;
pub mod lu;
pub mod presolve;
pub mod simplex;
pub mod sparse;

pub use bnb::{branch_and_bound, relative_gap, MilpResult, MilpStatus, NodeLog};
pub use brute::{brute_force, BruteForceError, DEFAULT_MAX_BINARIES};
pub use presolve::{fractional_binaries, presolve, repair_envelope_sides, Presolved};
pub use simplex::{solve_lp, Basis, Instance, LpSolution, LpStatus, SolverError, VarStat};

/// Wall-clock abstraction so time limits work without `std`.
pub trait Clock {
    fn elapsed_secs(&self) -> f64;
}

/// Clock that never advances; time limits are effectively disabled.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoClock;

impl Clock for NoClock {
    fn elapsed_secs(&self) -> f64 {
        0.0
    }
}

/// Tolerances and limits shared by the LP and MILP layers.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Scaled primal feasibility tolerance.
    pub feasibility_tol: f64,
    /// Reduced-cost (dual feasibility) tolerance.
    pub optimality_tol: f64,
    /// Integrality tolerance on binaries.
    pub integrality_tol: f64,
    /// Relative MILP gap at which branch and bound stops.
    pub gap_tol: f64,
    pub node_limit: usize,
    /// Wall-clock limit in seconds; needs a real [`Clock`] to trigger.
    pub time_limit_secs: Option<f64>,
    /// Simplex iteration cap per LP solve.
    pub max_iterations: usize,
    /// Consecutive degenerate iterations before switching to Bland's rule.
    pub degeneracy_threshold: usize,
    /// Basis updates between refactorizations.
    pub refactor_interval: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            feasibility_tol: 1e-7,
            optimality_tol: 1e-7,
            integrality_tol: 1e-6,
            gap_tol: 1e-4,
            node_limit: 100_000,
            time_limit_secs: None,
            max_iterations: 2_000_000,
            degeneracy_threshold: 400,
            refactor_interval: 64,
        }
    }
}
