//! Assembly of the multi-state planning MILP.
//!
//! Model variables are per-unit on the case base; objective coefficients
//! carry the MW conversion and state durations, so the objective is $/yr.
//!
//! Per state the rows are, in order: two flow-definition rows per branch,
//! eight device rows per candidate, one power-balance row per bus, and (in
//! contingency states) one redispatch-coupling row per generator. Column
//! counts follow `VariableRegistry::state_stride`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::case::PowerCase;
use crate::milp::economics::{annualize, investment_cost, tcsc_rating};
use crate::milp::model::{MilpModel, Row, RowBuilder, RowMeta, RowSense, VariableRegistry};
use crate::network::TcscCandidate;
use crate::scenario::{enumerate_states, PlanningScenario, StateIndex};

#[derive(Debug, Clone, PartialEq)]
pub enum BuildError {
    Case(crate::case::CaseError),
    Scenario(crate::scenario::ScenarioError),
}

impl fmt::Display for BuildError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuildError::Case(e) => write!(f, "case: {e}"),
            BuildError::Scenario(e) => write!(f, "scenario: {e}"),
        }
    }
}

impl core::error::Error for BuildError {}

impl From<crate::case::CaseError> for BuildError {
    fn from(e: crate::case::CaseError) -> Self {
        BuildError::Case(e)
    }
}

impl From<crate::scenario::ScenarioError> for BuildError {
    fn from(e: crate::scenario::ScenarioError) -> Self {
        BuildError::Scenario(e)
    }
}

/// Emits the flow-definition rows for one branch in one state, plus the
/// device envelope block when the branch hosts a candidate.
///
/// Plain branch (availability `n` is a known 0/1 parameter):
/// `P - b*theta >= -M'(1-n)` and `P - b*theta <= M'(1-n)`.
///
/// Candidate branch: the same rows with `- w`, the two big-M complementary
/// envelopes tying `w` to `z`, the range rows `|z| <= n*delta*theta_max` and
/// the linking rows `n(theta -+ (1-delta)theta_max) <= z <= ...`.
#[allow(clippy::too_many_arguments)]
pub fn build_flow_constraints(
    registry: &VariableRegistry,
    state_idx: usize,
    state: &StateIndex,
    branch_pos: usize,
    from_pos: usize,
    to_pos: usize,
    susceptance: f64,
    outage_m: f64,
    candidate: Option<(usize, &TcscCandidate)>,
    theta_max: f64,
) -> Vec<Row> {
    let n = state.availability(registry.branch_ids[branch_pos]);
    let slack = outage_m * (1.0 - n);
    let p = registry.flow(state_idx, branch_pos);
    let th_f = registry.angle(state_idx, from_pos);
    let th_t = registry.angle(state_idx, to_pos);

    let mut rows = Vec::with_capacity(if candidate.is_some() { 10 } else { 2 });

    let mut lo = RowBuilder::new();
    lo.add(p, 1.0).add(th_f, -susceptance).add(th_t, susceptance);
    let mut hi = RowBuilder::new();
    hi.add(p, 1.0).add(th_f, -susceptance).add(th_t, susceptance);
    if let Some((cand_idx, _)) = candidate {
        let w = registry.device_flow(state_idx, cand_idx);
        lo.add(w, -1.0);
        hi.add(w, -1.0);
    }
    rows.push(lo.build(RowSense::Ge, -slack, RowMeta::FlowLo { branch: branch_pos, state: state_idx }));
    rows.push(hi.build(RowSense::Le, slack, RowMeta::FlowHi { branch: branch_pos, state: state_idx }));

    let Some((cand_idx, cand)) = candidate else {
        return rows;
    };

    let w = registry.device_flow(state_idx, cand_idx);
    let z = registry.device_angle(state_idx, cand_idx);
    let y = registry.envelope_side(state_idx, cand_idx);
    let delta = registry.install(cand_idx);
    let m = cand.envelope_big_m(theta_max);

    // Envelope pair A (active when y = 0):  z*b_min - M*y <= w <= z*b_max + M*y.
    let mut a_lo = RowBuilder::new();
    a_lo.add(z, cand.b_min).add(y, -m).add(w, -1.0);
    rows.push(a_lo.build(RowSense::Le, 0.0, RowMeta::EnvelopeALo { cand: cand_idx, state: state_idx }));
    let mut a_hi = RowBuilder::new();
    a_hi.add(w, 1.0).add(z, -cand.b_max).add(y, -m);
    rows.push(a_hi.build(RowSense::Le, 0.0, RowMeta::EnvelopeAHi { cand: cand_idx, state: state_idx }));

    // Envelope pair B (active when y = 1):  z*b_max - M(1-y) <= w <= z*b_min + M(1-y).
    let mut b_lo = RowBuilder::new();
    b_lo.add(z, cand.b_max).add(y, m).add(w, -1.0);
    rows.push(b_lo.build(RowSense::Le, m, RowMeta::EnvelopeBLo { cand: cand_idx, state: state_idx }));
    let mut b_hi = RowBuilder::new();
    b_hi.add(w, 1.0).add(z, -cand.b_min).add(y, m);
    rows.push(b_hi.build(RowSense::Le, m, RowMeta::EnvelopeBHi { cand: cand_idx, state: state_idx }));

    // |z| <= n * delta * theta_max.
    let mut r_lo = RowBuilder::new();
    r_lo.add(z, -1.0).add(delta, -n * theta_max);
    rows.push(r_lo.build(RowSense::Le, 0.0, RowMeta::DeviceAngleRangeLo { cand: cand_idx, state: state_idx }));
    let mut r_hi = RowBuilder::new();
    r_hi.add(z, 1.0).add(delta, -n * theta_max);
    rows.push(r_hi.build(RowSense::Le, 0.0, RowMeta::DeviceAngleRangeHi { cand: cand_idx, state: state_idx }));

    // n*(theta - (1-delta)*theta_max) <= z <= n*(theta + (1-delta)*theta_max).
    let mut l_lo = RowBuilder::new();
    l_lo.add(th_f, n).add(th_t, -n).add(delta, n * theta_max).add(z, -1.0);
    rows.push(l_lo.build(
        RowSense::Le,
        n * theta_max,
        RowMeta::DeviceAngleLinkLo { cand: cand_idx, state: state_idx },
    ));
    let mut l_hi = RowBuilder::new();
    l_hi.add(z, 1.0).add(th_f, -n).add(th_t, n).add(delta, n * theta_max);
    rows.push(l_hi.build(
        RowSense::Le,
        n * theta_max,
        RowMeta::DeviceAngleLinkHi { cand: cand_idx, state: state_idx },
    ));

    rows
}

/// Builds the complete planning model over every operating state.
///
/// The scenario must validate against the case. `candidate_branch_ids`
/// usually comes from the scenario, but screening may pass a subset.
pub fn build_planning_model(
    case: &PowerCase,
    scenario: &PlanningScenario,
    candidate_branch_ids: &[usize],
) -> Result<MilpModel, BuildError> {
    case.validate()?;
    scenario.validate(case)?;

    let base = case.base_mva;
    let states = enumerate_states(scenario, case);
    let registry = VariableRegistry::new(case, candidate_branch_ids.to_vec(), states.clone());
    let n_cols = registry.n_cols();

    let branch_pos_of_id = case.branch_index();
    let bus_pos_of_id = case.bus_index();
    let ref_pos = case.buses.iter().position(|b| b.is_reference).expect("validated");

    // Per-candidate constants.
    let candidates: Vec<TcscCandidate> = candidate_branch_ids
        .iter()
        .map(|&id| {
            let br = case.branch_by_id(id).expect("validated candidate id");
            let rating = scenario
                .rating_overrides
                .get(&id)
                .copied()
                .unwrap_or_else(|| tcsc_rating(br, base));
            TcscCandidate::new(id, br.reactance, scenario.theta_max, rating)
        })
        .collect();
    let cand_of_branch: Vec<Option<usize>> = case
        .branches
        .iter()
        .map(|br| candidate_branch_ids.iter().position(|&id| id == br.id))
        .collect();

    let mut lower = vec![0.0; n_cols];
    let mut upper = vec![0.0; n_cols];
    let mut objective = vec![0.0; n_cols];
    let mut binaries = Vec::new();

    // Installation binaries carry the annualized investment cost.
    for (a, cand) in candidates.iter().enumerate() {
        let col = registry.install(a);
        lower[col] = 0.0;
        upper[col] = 1.0;
        objective[col] =
            annualize(investment_cost(cand.rating_mvar), cand.rating_mvar, scenario.economics.interest_rate, scenario.economics.lifetime_years);
        binaries.push(col);
    }

    let angle_box = case.buses.len() as f64 * scenario.theta_max;

    for (s, state) in states.iter().enumerate() {
        let level = &scenario.load_levels[state.level];
        let duration = state.duration_h;
        let rating_factor = if state.is_base() { 1.0 } else { scenario.short_term_rating_factor };

        for (i, _) in case.buses.iter().enumerate() {
            let col = registry.angle(s, i);
            if i == ref_pos {
                lower[col] = 0.0;
                upper[col] = 0.0;
            } else {
                lower[col] = -angle_box;
                upper[col] = angle_box;
            }
        }
        for (k, br) in case.branches.iter().enumerate() {
            let col = registry.flow(s, k);
            let cap = state.availability(br.id) * rating_factor * br.rating_mw / base;
            lower[col] = -cap;
            upper[col] = cap;
        }
        for (g, gen) in case.generators.iter().enumerate() {
            let col = registry.generation(s, g);
            lower[col] = if scenario.honor_pmin { gen.p_min_mw / base } else { 0.0 };
            upper[col] = gen.p_max_mw / base;
            objective[col] = duration * gen.marginal_cost * base;

            let ramp_up = effective_ramp(gen.ramp_up_mw, gen.p_max_mw, scenario.default_ramp_fraction);
            let ramp_dn = effective_ramp(gen.ramp_down_mw, gen.p_max_mw, scenario.default_ramp_fraction);
            let up = registry.adjust_up(s, g);
            let dn = registry.adjust_down(s, g);
            if state.is_base() {
                // No rescheduling in base states.
                lower[up] = 0.0;
                upper[up] = 0.0;
                lower[dn] = 0.0;
                upper[dn] = 0.0;
            } else {
                lower[up] = 0.0;
                upper[up] = ramp_up / base;
                lower[dn] = 0.0;
                upper[dn] = ramp_dn / base;
                objective[up] = duration * scenario.costs.reschedule_up_factor * gen.marginal_cost * base;
                objective[dn] = duration * scenario.costs.reschedule_down_factor * gen.marginal_cost * base;
            }
        }
        for (m, load) in case.loads.iter().enumerate() {
            let col = registry.shedding(s, m);
            if state.is_base() {
                // Shedding exists only in contingency states.
                lower[col] = 0.0;
                upper[col] = 0.0;
            } else {
                lower[col] = 0.0;
                upper[col] = level.scale_factor * load.p_mw / base;
                objective[col] = duration * scenario.costs.load_shedding * base;
            }
        }
        for (a, cand) in candidates.iter().enumerate() {
            let w = registry.device_flow(s, a);
            lower[w] = -cand.big_m;
            upper[w] = cand.big_m;
            let z = registry.device_angle(s, a);
            lower[z] = -scenario.theta_max;
            upper[z] = scenario.theta_max;
            let y = registry.envelope_side(s, a);
            lower[y] = 0.0;
            upper[y] = 1.0;
            binaries.push(y);
        }
    }
    binaries.sort_unstable();

    let mut rows = Vec::new();
    for (s, state) in states.iter().enumerate() {
        for (k, br) in case.branches.iter().enumerate() {
            let cand_here = cand_of_branch[k].map(|a| (a, &candidates[a]));
            let outage_m = match cand_here {
                Some((_, c)) => c.big_m_outage,
                None => crate::network::big_m_outage(br.reactance, false, scenario.theta_max),
            };
            rows.extend(build_flow_constraints(
                &registry,
                s,
                state,
                k,
                bus_pos_of_id[&br.from_bus],
                bus_pos_of_id[&br.to_bus],
                1.0 / br.reactance,
                outage_m,
                cand_here,
                scenario.theta_max,
            ));
        }

        // Power balance: generation minus net demand equals net flow out.
        let level = &scenario.load_levels[state.level];
        for (i, bus) in case.buses.iter().enumerate() {
            let mut rb = RowBuilder::new();
            let mut rhs = 0.0;
            for (g, gen) in case.generators.iter().enumerate() {
                if bus_pos_of_id[&gen.bus] == i {
                    rb.add(registry.generation(s, g), 1.0);
                }
            }
            for (m, load) in case.loads.iter().enumerate() {
                if bus_pos_of_id[&load.bus] == i {
                    rhs += level.scale_factor * load.p_mw / base;
                    rb.add(registry.shedding(s, m), 1.0);
                }
            }
            for (k, br) in case.branches.iter().enumerate() {
                if bus_pos_of_id[&br.from_bus] == i {
                    rb.add(registry.flow(s, k), -1.0);
                }
                if bus_pos_of_id[&br.to_bus] == i {
                    rb.add(registry.flow(s, k), 1.0);
                }
            }
            let _ = bus;
            rows.push(rb.build(RowSense::Eq, rhs, RowMeta::Balance { bus: i, state: s }));
        }

        // Contingency dispatch is the level's base dispatch plus adjustments.
        if !state.is_base() {
            let base_state = states
                .iter()
                .position(|st| st.level == state.level && st.is_base())
                .expect("every level has a base state");
            for (g, _) in case.generators.iter().enumerate() {
                let mut rb = RowBuilder::new();
                rb.add(registry.generation(s, g), 1.0)
                    .add(registry.generation(base_state, g), -1.0)
                    .add(registry.adjust_up(s, g), -1.0)
                    .add(registry.adjust_down(s, g), 1.0);
                rows.push(rb.build(RowSense::Eq, 0.0, RowMeta::Redispatch { gen: g, state: s }));
            }
        }
    }

    let model = MilpModel {
        registry,
        lower,
        upper,
        objective,
        rows,
        binaries,
        candidates,
        theta_max: scenario.theta_max,
    };
    debug_assert_eq!(model.audit(), Ok(()));
    Ok(model)
}

fn effective_ramp(case_ramp_mw: f64, p_max_mw: f64, default_fraction: f64) -> f64 {
    if case_ramp_mw > 0.0 {
        case_ramp_mw
    } else {
        default_fraction * p_max_mw
    }
}

/// Closed-form row/column counts for a model of the given dimensions; kept
/// next to the builder so audits have one source of truth.
pub fn expected_counts(
    n_bus: usize,
    n_branch: usize,
    n_gen: usize,
    n_load: usize,
    n_cand: usize,
    n_levels: usize,
    n_cont: usize,
) -> (usize, usize) {
    let n_states = n_levels * (1 + n_cont);
    let cols = n_cand + n_states * (n_bus + n_branch + 3 * n_gen + n_load + 3 * n_cand);
    let rows = n_states * (2 * n_branch + 8 * n_cand + n_bus) + n_levels * n_cont * n_gen;
    (rows, cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case::testutil::{three_bus_ring, two_bus};
    use crate::milp::model::RowSense;
    use crate::scenario::testutil::scenario;
    use alloc::vec;

    #[test]
    fn counts_match_closed_form() {
        let case = three_bus_ring(100.0);
        let sc = scenario(&[("peak", 1.2), ("low", 0.8)], vec![1, 2], vec![2, 3], 10.0);
        let model = build_planning_model(&case, &sc, &sc.candidates).unwrap();
        let (rows, cols) = expected_counts(3, 3, 2, 2, 2, 2, 2);
        assert_eq!(model.n_rows(), rows);
        assert_eq!(model.n_cols(), cols);
        assert_eq!(model.audit(), Ok(()));
    }

    #[test]
    fn base_states_forbid_shedding_and_redispatch() {
        let case = three_bus_ring(100.0);
        let sc = scenario(&[("flat", 1.0)], vec![1], vec![], 100.0);
        let model = build_planning_model(&case, &sc, &[]).unwrap();
        let reg = &model.registry;
        // State 0 is the base state.
        for m in 0..reg.n_load {
            let col = reg.shedding(0, m);
            assert_eq!((model.lower[col], model.upper[col]), (0.0, 0.0));
            let col = reg.shedding(1, m);
            assert!(model.upper[col] > 0.0);
        }
        for g in 0..reg.n_gen {
            assert_eq!(model.upper[reg.adjust_up(0, g)], 0.0);
            assert!(model.upper[reg.adjust_up(1, g)] > 0.0);
        }
    }

    #[test]
    fn short_term_rating_only_in_contingency_states() {
        let case = three_bus_ring(100.0);
        let sc = scenario(&[("flat", 1.0)], vec![1], vec![], 100.0);
        let model = build_planning_model(&case, &sc, &[]).unwrap();
        let reg = &model.registry;
        // Branch 2 (position 1) stays in service in both states.
        assert_eq!(model.upper[reg.flow(0, 1)], 200.0 / 100.0);
        assert!((model.upper[reg.flow(1, 1)] - 1.1 * 200.0 / 100.0).abs() < 1e-12);
        // The outaged branch's flow is pinned to zero.
        assert_eq!(model.upper[reg.flow(1, 0)], 0.0);
        assert_eq!(model.lower[reg.flow(1, 0)], 0.0);
    }

    #[test]
    fn objective_duration_weighting() {
        let case = two_bus(100.0);
        let sc = scenario(&[("flat", 1.0)], vec![], vec![], 0.0);
        let model = build_planning_model(&case, &sc, &[]).unwrap();
        let reg = &model.registry;
        // One base state of 8760 h; generator costs 10 $/MWh on a 100 MVA base.
        let col = reg.generation(0, 0);
        assert!((model.objective[col] - 8760.0 * 10.0 * 100.0).abs() < 1e-9);
    }

    #[test]
    fn reference_angle_pinned() {
        let case = three_bus_ring(100.0);
        let sc = scenario(&[("flat", 1.0)], vec![], vec![], 0.0);
        let model = build_planning_model(&case, &sc, &[]).unwrap();
        let col = model.registry.angle(0, 0);
        assert_eq!((model.lower[col], model.upper[col]), (0.0, 0.0));
    }

    #[test]
    fn candidate_rows_have_expected_senses() {
        let case = three_bus_ring(100.0);
        let sc = scenario(&[("flat", 1.0)], vec![], vec![2], 0.0);
        let model = build_planning_model(&case, &sc, &sc.candidates).unwrap();
        let mut senses = vec![];
        for row in &model.rows {
            if row.meta.state() == Some(0) {
                senses.push((row.meta, row.sense));
            }
        }
        // Flow rows come in Ge/Le pairs; all device rows are Le.
        assert!(senses
            .iter()
            .filter(|(m, _)| matches!(m, RowMeta::FlowLo { .. }))
            .all(|&(_, s)| s == RowSense::Ge));
        assert!(senses
            .iter()
            .filter(|(m, _)| matches!(
                m,
                RowMeta::EnvelopeALo { .. }
                    | RowMeta::EnvelopeAHi { .. }
                    | RowMeta::EnvelopeBLo { .. }
                    | RowMeta::EnvelopeBHi { .. }
                    | RowMeta::DeviceAngleRangeLo { .. }
                    | RowMeta::DeviceAngleRangeHi { .. }
                    | RowMeta::DeviceAngleLinkLo { .. }
                    | RowMeta::DeviceAngleLinkHi { .. }
            ))
            .all(|&(_, s)| s == RowSense::Le));
    }

    #[test]
    fn ramp_default_fraction_applies_when_case_has_none() {
        let mut case = three_bus_ring(100.0);
        case.generators[0].ramp_up_mw = 0.0;
        case.generators[0].ramp_down_mw = 0.0;
        let sc = scenario(&[("flat", 1.0)], vec![1], vec![], 100.0);
        let model = build_planning_model(&case, &sc, &[]).unwrap();
        let reg = &model.registry;
        // Default 0.3 * p_max = 60 MW on a 100 MVA base.
        assert!((model.upper[reg.adjust_up(1, 0)] - 0.6).abs() < 1e-12);
        // Generator 2 keeps its explicit 60 MW ramp.
        assert!((model.upper[reg.adjust_up(1, 1)] - 0.6).abs() < 1e-12);
    }
}
