//! Planning-study configuration: load levels with durations, the contingency
//! set, device candidates, prices and economics, plus enumeration of the
//! operating states the model is built over.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::case::PowerCase;
use crate::network;

/// Operating hours in the target year; base and contingency state durations
/// must add up to this exactly.
pub const HOURS_PER_YEAR: f64 = 8760.0;

/// Tolerance used when checking the 8760-hour duration budget.
pub const DURATION_SUM_TOL: f64 = 1e-6;

/// One load level: a scaling factor on the normal-level demand plus the hours
/// spent in the base state and in each contingency state at this level.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadLevel {
    pub name: String,
    pub scale_factor: f64,
    /// Hours in the base (all-lines-in) state at this level.
    pub base_hours: f64,
    /// Hours per contingency state, aligned with `PlanningScenario::contingencies`.
    pub contingency_hours: Vec<f64>,
}

/// Cost coefficients that the study supplies on top of the case data.
#[derive(Debug, Clone, PartialEq)]
pub struct CostCoefficients {
    /// Load-shedding price, $/MWh.
    pub load_shedding: f64,
    /// Upward-rescheduling price as a multiple of each generator's marginal cost.
    pub reschedule_up_factor: f64,
    /// Downward-rescheduling price as a multiple of each generator's marginal cost.
    pub reschedule_down_factor: f64,
}

impl Default for CostCoefficients {
    fn default() -> Self {
        CostCoefficients {
            load_shedding: 1000.0,
            reschedule_up_factor: 0.1,
            reschedule_down_factor: 0.1,
        }
    }
}

/// Investment economics: interest rate and device lifetime feeding the
/// capital recovery factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Economics {
    pub interest_rate: f64,
    pub lifetime_years: u32,
}

impl Default for Economics {
    fn default() -> Self {
        Economics { interest_rate: 0.05, lifetime_years: 5 }
    }
}

/// Allowed series compensation as fractions of the hosting line's reactance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompensationRange {
    pub lower: f64,
    pub upper: f64,
}

impl Default for CompensationRange {
    fn default() -> Self {
        CompensationRange { lower: -0.7, upper: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanningScenario {
    pub load_levels: Vec<LoadLevel>,
    /// Branch ids outaged one at a time; order fixes the state numbering.
    pub contingencies: Vec<usize>,
    /// Branch ids eligible for a device.
    pub candidates: Vec<usize>,
    pub costs: CostCoefficients,
    pub economics: Economics,
    pub compensation: CompensationRange,
    /// Maximum angle difference across a candidate branch, rad.
    pub theta_max: f64,
    /// Contingency thermal ratings as a multiple of the normal rating.
    pub short_term_rating_factor: f64,
    /// Honor the case's generator minimums instead of dispatching down to zero.
    pub honor_pmin: bool,
    /// Ramp limit assumed when the case carries none, as a fraction of p_max.
    pub default_ramp_fraction: f64,
    /// Per-branch device rating overrides, Mvar.
    pub rating_overrides: BTreeMap<usize, f64>,
}

impl Default for PlanningScenario {
    fn default() -> Self {
        PlanningScenario {
            load_levels: Vec::new(),
            contingencies: Vec::new(),
            candidates: Vec::new(),
            costs: CostCoefficients::default(),
            economics: Economics::default(),
            compensation: CompensationRange::default(),
            theta_max: core::f64::consts::FRAC_PI_3,
            short_term_rating_factor: 1.1,
            honor_pmin: false,
            default_ramp_fraction: 0.3,
            rating_overrides: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioError {
    NoLoadLevels,
    DurationSum { total: f64 },
    NegativeDuration { level: String },
    ContingencyHoursLen { level: String, got: usize, expected: usize },
    NonPositiveScale { level: String, value: f64 },
    UnknownBranch { role: &'static str, id: usize },
    DuplicateBranch { role: &'static str, id: usize },
    IslandingContingency { id: usize },
    NonPositiveThetaMax(f64),
    BadCompensationRange { lower: f64, upper: f64 },
    BadEconomics,
    NegativePrice,
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioError::NoLoadLevels => write!(f, "scenario has no load levels"),
            ScenarioError::DurationSum { total } => write!(
                f,
                "state durations sum to {total} h; base plus contingency hours must total exactly {HOURS_PER_YEAR} h"
            ),
            ScenarioError::NegativeDuration { level } => {
                write!(f, "negative duration in load level '{level}'")
            }
            ScenarioError::ContingencyHoursLen { level, got, expected } => write!(
                f,
                "load level '{level}' lists {got} contingency durations, expected {expected}"
            ),
            ScenarioError::NonPositiveScale { level, value } => {
                write!(f, "load level '{level}' has nonpositive scale factor {value}")
            }
            ScenarioError::UnknownBranch { role, id } => {
                write!(f, "{role} references unknown branch id {id}")
            }
            ScenarioError::DuplicateBranch { role, id } => {
                write!(f, "duplicate {role} branch id {id}")
            }
            ScenarioError::IslandingContingency { id } => write!(
                f,
                "outage of branch {id} disconnects the network; it cannot be a contingency state"
            ),
            ScenarioError::NonPositiveThetaMax(v) => {
                write!(f, "theta_max must be positive, got {v}")
            }
            ScenarioError::BadCompensationRange { lower, upper } => {
                write!(f, "compensation range [{lower}, {upper}] must satisfy lower < 0 <= upper")
            }
            ScenarioError::BadEconomics => {
                write!(f, "economics require interest_rate > 0 and lifetime >= 1")
            }
            ScenarioError::NegativePrice => write!(f, "cost coefficients must be nonnegative"),
        }
    }
}

impl core::error::Error for ScenarioError {}

impl PlanningScenario {
    /// Validates the scenario against a case: branch references, duration
    /// budget, and that no configured contingency islands the network.
    pub fn validate(&self, case: &PowerCase) -> Result<(), ScenarioError> {
        if self.load_levels.is_empty() {
            return Err(ScenarioError::NoLoadLevels);
        }
        if !(self.theta_max > 0.0) {
            return Err(ScenarioError::NonPositiveThetaMax(self.theta_max));
        }
        if !(self.compensation.lower < 0.0 && self.compensation.upper >= 0.0) {
            return Err(ScenarioError::BadCompensationRange {
                lower: self.compensation.lower,
                upper: self.compensation.upper,
            });
        }
        if !(self.economics.interest_rate > 0.0) || self.economics.lifetime_years < 1 {
            return Err(ScenarioError::BadEconomics);
        }
        if self.costs.load_shedding < 0.0
            || self.costs.reschedule_up_factor < 0.0
            || self.costs.reschedule_down_factor < 0.0
        {
            return Err(ScenarioError::NegativePrice);
        }

        let branch_ids = case.branch_index();
        let mut seen = BTreeMap::new();
        for &id in &self.contingencies {
            if !branch_ids.contains_key(&id) {
                return Err(ScenarioError::UnknownBranch { role: "contingency", id });
            }
            if seen.insert(id, ()).is_some() {
                return Err(ScenarioError::DuplicateBranch { role: "contingency", id });
            }
            if !network::connected_without(case, Some(id)) {
                return Err(ScenarioError::IslandingContingency { id });
            }
        }
        seen.clear();
        for &id in &self.candidates {
            if !branch_ids.contains_key(&id) {
                return Err(ScenarioError::UnknownBranch { role: "candidate", id });
            }
            if seen.insert(id, ()).is_some() {
                return Err(ScenarioError::DuplicateBranch { role: "candidate", id });
            }
        }

        let mut total = 0.0;
        for level in &self.load_levels {
            if !(level.scale_factor > 0.0) {
                return Err(ScenarioError::NonPositiveScale {
                    level: level.name.clone(),
                    value: level.scale_factor,
                });
            }
            if level.contingency_hours.len() != self.contingencies.len() {
                return Err(ScenarioError::ContingencyHoursLen {
                    level: level.name.clone(),
                    got: level.contingency_hours.len(),
                    expected: self.contingencies.len(),
                });
            }
            if level.base_hours < 0.0 || level.contingency_hours.iter().any(|&h| h < 0.0) {
                return Err(ScenarioError::NegativeDuration { level: level.name.clone() });
            }
            total += level.base_hours;
            total += level.contingency_hours.iter().sum::<f64>();
        }
        if (total - HOURS_PER_YEAR).abs() > DURATION_SUM_TOL {
            return Err(ScenarioError::DurationSum { total });
        }
        Ok(())
    }
}

/// One operating state: a load level paired with either the base case
/// (`contingency == None`) or a single branch outage.
#[derive(Debug, Clone, PartialEq)]
pub struct StateIndex {
    /// Position of the load level in the scenario.
    pub level: usize,
    /// State number within the level; 0 is the base state, c > 0 is the
    /// (c-1)-th contingency.
    pub state: usize,
    /// Outaged branch id, if any.
    pub contingency: Option<usize>,
    /// Duration of this state, hours.
    pub duration_h: f64,
    /// Demand scaling factor of the level.
    pub scale_factor: f64,
}

impl StateIndex {
    pub fn is_base(&self) -> bool {
        self.contingency.is_none()
    }

    /// Branch availability: 0 for the outaged branch in this state, 1 otherwise.
    pub fn availability(&self, branch_id: usize) -> f64 {
        match self.contingency {
            Some(out) if out == branch_id => 0.0,
            _ => 1.0,
        }
    }
}

/// Expands a scenario into its operating states: per load level the base
/// state followed by one state per contingency, in scenario order.
pub fn enumerate_states(scenario: &PlanningScenario, case: &PowerCase) -> Vec<StateIndex> {
    let _ = case;
    let mut states = Vec::new();
    for (t, level) in scenario.load_levels.iter().enumerate() {
        states.push(StateIndex {
            level: t,
            state: 0,
            contingency: None,
            duration_h: level.base_hours,
            scale_factor: level.scale_factor,
        });
        for (c, &branch) in scenario.contingencies.iter().enumerate() {
            states.push(StateIndex {
                level: t,
                state: c + 1,
                contingency: Some(branch),
                duration_h: level.contingency_hours[c],
                scale_factor: level.scale_factor,
            });
        }
    }
    states
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    /// Splits the year evenly over `levels` levels giving each contingency
    /// state `cont_hours` hours; the remainder goes to the base states.
    pub fn scenario(
        levels: &[(&str, f64)],
        contingencies: Vec<usize>,
        candidates: Vec<usize>,
        cont_hours: f64,
    ) -> PlanningScenario {
        let per_level = HOURS_PER_YEAR / levels.len() as f64;
        let load_levels = levels
            .iter()
            .map(|(name, scale)| LoadLevel {
                name: name.to_string(),
                scale_factor: *scale,
                base_hours: per_level - cont_hours * contingencies.len() as f64,
                contingency_hours: vec![cont_hours; contingencies.len()],
            })
            .collect();
        PlanningScenario {
            load_levels,
            contingencies,
            candidates,
            ..PlanningScenario::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case::testutil::three_bus_ring;
    use alloc::string::ToString;
    use alloc::vec;

    fn level(name: &str, scale: f64, base: f64, cont: Vec<f64>) -> LoadLevel {
        LoadLevel {
            name: name.to_string(),
            scale_factor: scale,
            base_hours: base,
            contingency_hours: cont,
        }
    }

    #[test]
    fn duration_budget_accepted_when_exact() {
        // 3 levels of 2910 h base plus 3 contingency states of 10 h each:
        // 3 * (2880 + 30) = 8730 + 30 = 8760.
        let case = three_bus_ring(100.0);
        let scenario = PlanningScenario {
            load_levels: vec![
                level("peak", 1.2, 2890.0, vec![10.0, 10.0, 10.0]),
                level("normal", 1.0, 2890.0, vec![10.0, 10.0, 10.0]),
                level("low", 0.8, 2890.0, vec![10.0, 10.0, 10.0]),
            ],
            // Ring: every single outage leaves the network connected.
            contingencies: vec![1, 2, 3],
            ..PlanningScenario::default()
        };
        assert_eq!(scenario.validate(&case), Ok(()));
    }

    #[test]
    fn duration_budget_off_by_one_hour_is_rejected() {
        let case = three_bus_ring(100.0);
        let scenario = PlanningScenario {
            load_levels: vec![level("flat", 1.0, 8761.0, vec![])],
            ..PlanningScenario::default()
        };
        assert!(matches!(scenario.validate(&case), Err(ScenarioError::DurationSum { .. })));
    }

    #[test]
    fn unknown_contingency_branch_is_rejected() {
        let case = three_bus_ring(100.0);
        let scenario = PlanningScenario {
            load_levels: vec![level("flat", 1.0, 8750.0, vec![10.0])],
            contingencies: vec![99],
            ..PlanningScenario::default()
        };
        assert!(matches!(scenario.validate(&case), Err(ScenarioError::UnknownBranch { .. })));
    }

    #[test]
    fn three_levels_scale_loads() {
        let case = three_bus_ring(100.0);
        for (scale, expected_first) in [(1.2, 72.0), (1.0, 60.0), (0.8, 48.0)] {
            let loads = case.scaled_loads_mw(scale);
            assert!((loads[0] - expected_first).abs() < 1e-12);
        }
    }

    #[test]
    fn enumerate_counts_and_availability() {
        let case = three_bus_ring(100.0);
        let scenario = testutil::scenario(
            &[("peak", 1.2), ("low", 0.8)],
            vec![1, 2],
            vec![],
            10.0,
        );
        scenario.validate(&case).unwrap();
        let states = enumerate_states(&scenario, &case);
        // 2 levels * (1 base + 2 contingencies) = 6 states.
        assert_eq!(states.len(), 6);
        for st in &states {
            if st.is_base() {
                for br in &case.branches {
                    assert_eq!(st.availability(br.id), 1.0);
                }
            } else {
                let zeros: Vec<usize> = case
                    .branches
                    .iter()
                    .filter(|b| st.availability(b.id) == 0.0)
                    .map(|b| b.id)
                    .collect();
                assert_eq!(zeros.len(), 1);
                assert_eq!(Some(zeros[0]), st.contingency);
            }
        }
        let total: f64 = states.iter().map(|s| s.duration_h).sum();
        assert!((total - HOURS_PER_YEAR).abs() < 1e-9);
    }

    #[test]
    fn single_level_no_contingencies_yields_one_state() {
        let case = three_bus_ring(100.0);
        let scenario = testutil::scenario(&[("flat", 1.0)], vec![], vec![], 0.0);
        scenario.validate(&case).unwrap();
        let states = enumerate_states(&scenario, &case);
        assert_eq!(states.len(), 1);
        assert!(states[0].is_base());
    }

    #[test]
    fn state_count_formula_matches() {
        // 3 levels x 15 contingencies -> 48 states.
        let case = three_bus_ring(100.0);
        let scenario = testutil::scenario(
            &[("peak", 1.2), ("normal", 1.0), ("low", 0.8)],
            vec![1, 2, 3],
            vec![],
            4.0,
        );
        let states = enumerate_states(&scenario, &case);
        assert_eq!(states.len(), 3 * (1 + 3));
        // The 48-state arithmetic from a full study: levels * (1 + |C|).
        assert_eq!(3 * (1 + 15), 48);
    }
}
