//! Turning a solved model into cost figures: per-state hourly costs, annual
//! duration-weighted totals, chosen placements and recovered device
//! setpoints.

use alloc::vec::Vec;

use crate::case::PowerCase;
use crate::milp::model::MilpModel;
use crate::network::recover_tcsc_reactance;
use crate::scenario::PlanningScenario;

/// Hourly cost figures for one operating state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateCost {
    pub level: usize,
    pub state: usize,
    /// Outaged branch id for contingency states.
    pub contingency: Option<usize>,
    pub duration_h: f64,
    pub generation_per_h: f64,
    /// Rescheduling payment, $/h; zero in base states.
    pub rescheduling_per_h: f64,
    /// Shedding payment, $/h; zero in base states.
    pub shedding_per_h: f64,
    /// Total curtailed demand, MW.
    pub shed_mw: f64,
    /// Total redispatched power (up plus down), MW.
    pub rescheduled_mw: f64,
}

/// Annual cost totals in $; `total` is the sum of the other five.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CostBreakdown {
    pub normal_generation: f64,
    pub contingency_generation: f64,
    pub rescheduling: f64,
    pub shedding: f64,
    pub investment: f64,
    pub total: f64,
}

/// Device setpoint recovered from one state's solution.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceSetpoint {
    pub state: usize,
    pub branch_id: usize,
    /// Equivalent susceptance the device contributes, p.u.
    pub b_v: f64,
    /// Series reactance realizing it, p.u.
    pub x_v: f64,
}

/// A solved plan: cleaned solution vector, placements and cost accounting.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanSolution {
    pub objective: f64,
    pub values: Vec<f64>,
    /// Branch ids with an installed device.
    pub chosen: Vec<usize>,
    pub per_state: Vec<StateCost>,
    pub breakdown: CostBreakdown,
    pub setpoints: Vec<DeviceSetpoint>,
}

/// Nets simultaneous up/down adjustments in place: both positive only in
/// degenerate optima, and the netted point stays feasible with no larger
/// objective.
pub fn net_adjustments(model: &MilpModel, values: &mut [f64]) {
    let reg = &model.registry;
    for s in 0..reg.n_states() {
        if reg.states[s].is_base() {
            continue;
        }
        for g in 0..reg.n_gen {
            let up_col = reg.adjust_up(s, g);
            let dn_col = reg.adjust_down(s, g);
            let net = values[up_col] - values[dn_col];
            values[up_col] = net.max(0.0);
            values[dn_col] = (-net).max(0.0);
        }
    }
}

/// Builds the full cost accounting from a feasible solution vector.
pub fn extract_breakdown(
    model: &MilpModel,
    primal: &[f64],
    case: &PowerCase,
    scenario: &PlanningScenario,
) -> PlanSolution {
    let mut values = primal.to_vec();
    net_adjustments(model, &mut values);

    let reg = &model.registry;
    let base = case.base_mva;

    let chosen: Vec<usize> = (0..reg.n_cand)
        .filter(|&a| values[reg.install(a)] > 0.5)
        .map(|a| reg.candidate_branch_ids[a])
        .collect();

    let mut per_state = Vec::with_capacity(reg.n_states());
    let mut breakdown = CostBreakdown::default();
    for (s, state) in reg.states.iter().enumerate() {
        let mut generation = 0.0;
        let mut rescheduling = 0.0;
        let mut shed_cost = 0.0;
        let mut shed_mw = 0.0;
        let mut resched_mw = 0.0;
        for (g, gen) in case.generators.iter().enumerate() {
            generation += gen.marginal_cost * values[reg.generation(s, g)] * base;
            let up = values[reg.adjust_up(s, g)] * base;
            let dn = values[reg.adjust_down(s, g)] * base;
            rescheduling += scenario.costs.reschedule_up_factor * gen.marginal_cost * up
                + scenario.costs.reschedule_down_factor * gen.marginal_cost * dn;
            resched_mw += up + dn;
        }
        for m in 0..reg.n_load {
            let shed = values[reg.shedding(s, m)] * base;
            shed_mw += shed;
            shed_cost += scenario.costs.load_shedding * shed;
        }
        let duration = state.duration_h;
        if state.is_base() {
            breakdown.normal_generation += duration * generation;
        } else {
            breakdown.contingency_generation += duration * generation;
            breakdown.rescheduling += duration * rescheduling;
            breakdown.shedding += duration * shed_cost;
        }
        per_state.push(StateCost {
            level: state.level,
            state: state.state,
            contingency: state.contingency,
            duration_h: duration,
            generation_per_h: generation,
            rescheduling_per_h: rescheduling,
            shedding_per_h: shed_cost,
            shed_mw,
            rescheduled_mw: resched_mw,
        });
    }
    for a in 0..reg.n_cand {
        breakdown.investment += model.objective[reg.install(a)] * values[reg.install(a)];
    }
    breakdown.total = breakdown.normal_generation
        + breakdown.contingency_generation
        + breakdown.rescheduling
        + breakdown.shedding
        + breakdown.investment;

    // Setpoints: b_v = w/z wherever the installed device sees a nonzero
    // angle; an idle device (z ~ 0) reports zero compensation.
    let mut setpoints = Vec::new();
    for a in 0..reg.n_cand {
        if values[reg.install(a)] <= 0.5 {
            continue;
        }
        let branch_id = reg.candidate_branch_ids[a];
        let x = case.branch_by_id(branch_id).expect("candidate exists").reactance;
        for (s, state) in reg.states.iter().enumerate() {
            if state.availability(branch_id) == 0.0 {
                continue;
            }
            let z = values[reg.device_angle(s, a)];
            let w = values[reg.device_flow(s, a)];
            let b_v = if z.abs() > 1e-9 { w / z } else { 0.0 };
            let x_v = recover_tcsc_reactance(x, b_v).unwrap_or(0.0);
            setpoints.push(DeviceSetpoint { state: s, branch_id, b_v, x_v });
        }
    }

    PlanSolution {
        objective: model.objective_value(&values),
        values,
        chosen,
        per_state,
        breakdown,
        setpoints,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case::testutil::three_bus_ring;
    use crate::milp::build::build_planning_model;
    use crate::scenario::testutil::scenario;
    use alloc::vec;

    #[test]
    fn zero_adjustments_mean_zero_rescheduling_and_shedding() {
        let case = three_bus_ring(200.0);
        let sc = scenario(&[("flat", 1.0)], vec![1], vec![], 100.0);
        let model = build_planning_model(&case, &sc, &[]).unwrap();
        let reg = &model.registry;
        // Hand-build a feasible-looking vector: dispatch 100 MW at gen 1 in
        // both states, no adjustments.
        let mut x = vec![0.0; model.n_cols()];
        for s in 0..reg.n_states() {
            x[reg.generation(s, 0)] = 1.0;
        }
        let plan = extract_breakdown(&model, &x, &case, &sc);
        for st in &plan.per_state {
            assert_eq!(st.rescheduling_per_h, 0.0);
            assert_eq!(st.shedding_per_h, 0.0);
            assert!((st.generation_per_h - 1000.0).abs() < 1e-9);
        }
        assert_eq!(plan.breakdown.shedding, 0.0);
        assert_eq!(plan.breakdown.rescheduling, 0.0);
    }

    #[test]
    fn annual_total_is_sum_of_parts() {
        let case = three_bus_ring(200.0);
        let sc = scenario(&[("peak", 1.2), ("low", 0.8)], vec![1], vec![2], 50.0);
        let model = build_planning_model(&case, &sc, &sc.candidates).unwrap();
        let reg = &model.registry;
        let mut x = vec![0.0; model.n_cols()];
        x[reg.install(0)] = 1.0;
        for s in 0..reg.n_states() {
            x[reg.generation(s, 0)] = 0.9;
            if !reg.states[s].is_base() {
                x[reg.adjust_up(s, 0)] = 0.1;
                x[reg.shedding(s, 0)] = 0.05;
            }
        }
        let plan = extract_breakdown(&model, &x, &case, &sc);
        let b = &plan.breakdown;
        let sum = b.normal_generation + b.contingency_generation + b.rescheduling + b.shedding + b.investment;
        assert!((b.total - sum).abs() <= 1e-6 * sum.abs().max(1.0));
        assert!(b.investment > 0.0);
    }

    #[test]
    fn netting_replaces_simultaneous_up_and_down() {
        let case = three_bus_ring(200.0);
        let sc = scenario(&[("flat", 1.0)], vec![1], vec![], 100.0);
        let model = build_planning_model(&case, &sc, &[]).unwrap();
        let reg = &model.registry;
        let mut x = vec![0.0; model.n_cols()];
        x[reg.adjust_up(1, 0)] = 0.3;
        x[reg.adjust_down(1, 0)] = 0.1;
        net_adjustments(&model, &mut x);
        assert!((x[reg.adjust_up(1, 0)] - 0.2).abs() < 1e-15);
        assert_eq!(x[reg.adjust_down(1, 0)], 0.0);
    }
}
