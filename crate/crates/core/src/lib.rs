#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod case;
pub(crate) mod float;
pub mod milp;
pub mod network;
pub mod scenario;
pub mod screen;
pub mod solver;

pub use case::{Branch, Bus, CaseError, Generator, Load, PowerCase};
pub use milp::{
    annualize, capital_recovery_factor, investment_cost, tcsc_rating, CostBreakdown, MilpModel,
    VariableRegistry,
};
pub use network::{
    big_m_outage, big_m_tcsc, branch_susceptance, dc_power_flow, recover_tcsc_reactance,
    tcsc_equivalent_susceptance, tcsc_susceptance_bounds, DcSolution, NetworkError, TcscCandidate,
};
pub use scenario::{LoadLevel, PlanningScenario, ScenarioError, StateIndex};
