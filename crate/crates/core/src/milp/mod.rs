pub mod breakdown;
pub mod build;
pub mod economics;
pub mod export;
pub mod model;

pub use breakdown::{CostBreakdown, PlanSolution, StateCost};
pub use build::{build_flow_constraints, build_planning_model, BuildError};
pub use economics::{annualize, capital_recovery_factor, investment_cost, tcsc_rating};
pub use model::{MilpModel, RowMeta, RowSense, VarMeta, VariableRegistry};
