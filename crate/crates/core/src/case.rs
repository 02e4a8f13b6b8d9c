//! Validated in-memory representation of a power-system case.
//!
//! A [`PowerCase`] is produced by the case readers in the companion crate (or
//! built directly in tests) and is the network side of every planning model.
//! Branch ids are the 1-based row numbers of the source data, so parallel
//! lines between the same bus pair stay distinct and contingency or candidate
//! references are unambiguous.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// A network bus. `id` is the external bus number (arbitrary, unique).
#[derive(Debug, Clone, PartialEq)]
pub struct Bus {
    pub id: usize,
    pub is_reference: bool,
}

/// A transmission branch (line or transformer) with its DC-model data.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    /// 1-based row number in the source case; stable across filtering.
    pub id: usize,
    pub from_bus: usize,
    pub to_bus: usize,
    /// Series reactance in p.u. on the system base.
    pub reactance: f64,
    /// Normal (long-term) thermal rating in MW.
    pub rating_mw: f64,
    pub in_service: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub id: usize,
    pub bus: usize,
    pub p_min_mw: f64,
    pub p_max_mw: f64,
    /// Linear marginal cost in $/MWh.
    pub marginal_cost: f64,
    /// Maximum upward adjustment from the base dispatch in a contingency, MW.
    pub ramp_up_mw: f64,
    /// Maximum downward adjustment from the base dispatch in a contingency, MW.
    pub ramp_down_mw: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Load {
    pub id: usize,
    pub bus: usize,
    /// Demand in MW at the normal load level.
    pub p_mw: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerCase {
    pub name: String,
    pub base_mva: f64,
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    pub generators: Vec<Generator>,
    pub loads: Vec<Load>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CaseError {
    NoReferenceBus,
    MultipleReferenceBuses,
    DuplicateBusId(usize),
    DuplicateBranchId(usize),
    UnknownBus { entity: &'static str, id: usize, bus: usize },
    NonPositiveReactance { branch: usize, value: f64 },
    NonPositiveRating { branch: usize, value: f64 },
    NonPositiveBaseMva(f64),
    GeneratorBounds { gen: usize, p_min: f64, p_max: f64 },
    NegativeRamp { gen: usize },
    NonPositiveLoad { load: usize, value: f64 },
}

impl fmt::Display for CaseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CaseError::NoReferenceBus => write!(f, "no reference bus"),
            CaseError::MultipleReferenceBuses => write!(f, "more than one reference bus"),
            CaseError::DuplicateBusId(id) => write!(f, "duplicate bus id {id}"),
            CaseError::DuplicateBranchId(id) => write!(f, "duplicate branch id {id}"),
            CaseError::UnknownBus { entity, id, bus } => {
                write!(f, "{entity} {id} references unknown bus {bus}")
            }
            CaseError::NonPositiveReactance { branch, value } => {
                write!(f, "branch {branch} has nonpositive reactance {value}")
            }
            CaseError::NonPositiveRating { branch, value } => {
                write!(f, "branch {branch} has nonpositive rating {value}")
            }
            CaseError::NonPositiveBaseMva(v) => write!(f, "nonpositive base MVA {v}"),
            CaseError::GeneratorBounds { gen, p_min, p_max } => {
                write!(f, "generator {gen} has p_min {p_min} > p_max {p_max}")
            }
            CaseError::NegativeRamp { gen } => write!(f, "generator {gen} has a negative ramp"),
            CaseError::NonPositiveLoad { load, value } => {
                write!(f, "load {load} has nonpositive demand {value}")
            }
        }
    }
}

impl core::error::Error for CaseError {}

impl PowerCase {
    /// Checks every structural invariant; a case that passes is safe to feed
    /// to the model builder without further guards.
    pub fn validate(&self) -> Result<(), CaseError> {
        if !(self.base_mva > 0.0) {
            return Err(CaseError::NonPositiveBaseMva(self.base_mva));
        }
        let mut bus_ids = BTreeMap::new();
        let mut n_ref = 0usize;
        for bus in &self.buses {
            if bus_ids.insert(bus.id, ()).is_some() {
                return Err(CaseError::DuplicateBusId(bus.id));
            }
            if bus.is_reference {
                n_ref += 1;
            }
        }
        if n_ref == 0 {
            return Err(CaseError::NoReferenceBus);
        }
        if n_ref > 1 {
            return Err(CaseError::MultipleReferenceBuses);
        }
        let mut branch_ids = BTreeMap::new();
        for br in &self.branches {
            if branch_ids.insert(br.id, ()).is_some() {
                return Err(CaseError::DuplicateBranchId(br.id));
            }
            for bus in [br.from_bus, br.to_bus] {
                if !bus_ids.contains_key(&bus) {
                    return Err(CaseError::UnknownBus { entity: "branch", id: br.id, bus });
                }
            }
            if !(br.reactance > 0.0) {
                return Err(CaseError::NonPositiveReactance { branch: br.id, value: br.reactance });
            }
            if !(br.rating_mw > 0.0) {
                return Err(CaseError::NonPositiveRating { branch: br.id, value: br.rating_mw });
            }
        }
        for g in &self.generators {
            if !bus_ids.contains_key(&g.bus) {
                return Err(CaseError::UnknownBus { entity: "generator", id: g.id, bus: g.bus });
            }
            if g.p_min_mw > g.p_max_mw {
                return Err(CaseError::GeneratorBounds {
                    gen: g.id,
                    p_min: g.p_min_mw,
                    p_max: g.p_max_mw,
                });
            }
            if g.ramp_up_mw < 0.0 || g.ramp_down_mw < 0.0 {
                return Err(CaseError::NegativeRamp { gen: g.id });
            }
        }
        for l in &self.loads {
            if !bus_ids.contains_key(&l.bus) {
                return Err(CaseError::UnknownBus { entity: "load", id: l.id, bus: l.bus });
            }
            if !(l.p_mw > 0.0) {
                return Err(CaseError::NonPositiveLoad { load: l.id, value: l.p_mw });
            }
        }
        Ok(())
    }

    /// Bus id -> position in `buses`.
    pub fn bus_index(&self) -> BTreeMap<usize, usize> {
        self.buses.iter().enumerate().map(|(i, b)| (b.id, i)).collect()
    }

    /// Branch id -> position in `branches`.
    pub fn branch_index(&self) -> BTreeMap<usize, usize> {
        self.branches.iter().enumerate().map(|(i, b)| (b.id, i)).collect()
    }

    pub fn branch_by_id(&self, id: usize) -> Option<&Branch> {
        self.branches.iter().find(|b| b.id == id)
    }

    pub fn reference_bus(&self) -> Option<&Bus> {
        self.buses.iter().find(|b| b.is_reference)
    }

    /// Total demand at the normal load level, MW.
    pub fn total_load_mw(&self) -> f64 {
        self.loads.iter().map(|l| l.p_mw).sum()
    }

    /// Per-load demand in MW scaled by a load-level factor.
    pub fn scaled_loads_mw(&self, factor: f64) -> Vec<f64> {
        self.loads.iter().map(|l| l.p_mw * factor).collect()
    }

    /// Drops out-of-service branches. Ids of the remaining branches are
    /// unchanged, so external references stay valid.
    pub fn retain_in_service(&mut self) {
        self.branches.retain(|b| b.in_service);
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    #[test]
    fn valid_two_bus_case_passes() {
        let case = testutil::two_bus(100.0);
        assert!(case.validate().is_ok());
        assert_eq!(case.total_load_mw(), 50.0);
    }

    #[test]
    fn missing_reference_bus_is_rejected() {
        let mut case = testutil::two_bus(100.0);
        case.buses[0].is_reference = false;
        assert_eq!(case.validate(), Err(CaseError::NoReferenceBus));
    }

    #[test]
    fn nonpositive_reactance_is_rejected() {
        let mut case = testutil::two_bus(100.0);
        case.branches[0].reactance = 0.0;
        assert!(matches!(case.validate(), Err(CaseError::NonPositiveReactance { .. })));
    }

    #[test]
    fn dangling_branch_endpoint_is_rejected() {
        let mut case = testutil::two_bus(100.0);
        case.branches[0].to_bus = 9;
        assert!(matches!(case.validate(), Err(CaseError::UnknownBus { .. })));
    }

    #[test]
    fn load_scaling_is_linear() {
        let case = testutil::three_bus_ring(100.0);
        let f = 1.2;
        let g = 0.85;
        let once = case.scaled_loads_mw(f * g);
        let twice: Vec<f64> = case.scaled_loads_mw(f).iter().map(|v| v * g).collect();
        for (a, b) in once.iter().zip(&twice) {
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn retain_in_service_keeps_ids() {
        let mut case = testutil::three_bus_ring(100.0);
        case.branches[1].in_service = false;
        case.retain_in_service();
        let ids: Vec<usize> = case.branches.iter().map(|b| b.id).collect();
        assert_eq!(ids, vec![1, 3]);
    }

    #[test]
    fn duplicate_branch_id_is_rejected() {
        let mut case = testutil::three_bus_ring(100.0);
        case.branches[2].id = 2;
        assert_eq!(case.validate(), Err(CaseError::DuplicateBranchId(2)));
    }

    #[test]
    fn minimal_case_shape() {
        // The smallest sensible case: 2 buses, 1 branch, 1 generator, 1 load.
        let case = testutil::two_bus(100.0);
        assert_eq!(case.buses.len(), 2);
        assert_eq!(case.branches.len(), 1);
        assert_eq!(case.generators.len(), 1);
        assert_eq!(case.loads.len(), 1);
    }
}
