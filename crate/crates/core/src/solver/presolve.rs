//! Bound-tightening presolve and the envelope-side repair heuristic.

use alloc::vec::Vec;

use crate::milp::model::MilpModel;

/// Tightened bound vectors plus how many binaries got fixed.
#[derive(Debug, Clone)]
pub struct Presolved {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub fixed_binaries: usize,
}

/// Fixes vacuous device binaries: `y = 0` (and `w = z = 0`) wherever the
/// hosting branch is outaged, and the whole device block wherever the
/// installation binary is already pinned to zero in the input bounds.
pub fn presolve(model: &MilpModel, lower: &[f64], upper: &[f64]) -> Presolved {
    let reg = &model.registry;
    let mut lower = lower.to_vec();
    let mut upper = upper.to_vec();
    let mut fixed = 0usize;

    for a in 0..reg.n_cand {
        let branch_id = reg.candidate_branch_ids[a];
        let delta = reg.install(a);
        let delta_off = upper[delta] <= 0.0;
        for (s, state) in reg.states.iter().enumerate() {
            let outaged = state.availability(branch_id) == 0.0;
            if !(outaged || delta_off) {
                continue;
            }
            let y = reg.envelope_side(s, a);
            if lower[y] < upper[y] {
                fixed += 1;
            }
            lower[y] = 0.0;
            upper[y] = 0.0;
            let w = reg.device_flow(s, a);
            lower[w] = 0.0;
            upper[w] = 0.0;
            let z = reg.device_angle(s, a);
            lower[z] = 0.0;
            upper[z] = 0.0;
        }
    }

    Presolved { lower, upper, fixed_binaries: fixed }
}

/// Binary columns whose value is fractional beyond `tol`, with their
/// fractional parts, restricted to columns not fixed by the bounds.
pub fn fractional_binaries(
    model: &MilpModel,
    lower: &[f64],
    upper: &[f64],
    x: &[f64],
    tol: f64,
) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    for &col in &model.binaries {
        if lower[col] >= upper[col] {
            continue;
        }
        let frac = x[col] - crate::float::floor(x[col]);
        let dist = frac.min(1.0 - frac);
        if dist > tol {
            out.push((col, frac));
        }
    }
    out
}

/// Tries to give every envelope-side binary an integral value supported by
/// the current `(w, z)` point. The continuous part of the solution is left
/// untouched, so a successful repair keeps the LP objective. Returns the
/// repaired vector, or `None` when some device's `(w, z)` sits strictly
/// inside the relaxed region and needs branching.
pub fn repair_envelope_sides(model: &MilpModel, x: &[f64]) -> Option<Vec<f64>> {
    let reg = &model.registry;
    let mut out = x.to_vec();
    for a in 0..reg.n_cand {
        let cand = &model.candidates[a];
        let m = cand.envelope_big_m(model.theta_max);
        let tol = 1e-7 * (1.0 + m);
        for s in 0..reg.n_states() {
            let y_col = reg.envelope_side(s, a);
            let y = x[y_col];
            if (y - crate::float::round(y)).abs() <= 1e-9 {
                out[y_col] = crate::float::round(y);
                continue;
            }
            let w = x[reg.device_flow(s, a)];
            let z = x[reg.device_angle(s, a)];
            let y0_ok = z * cand.b_min - w <= tol
                && w - z * cand.b_max <= tol
                && z * cand.b_max - m - w <= tol
                && w - z * cand.b_min - m <= tol;
            let y1_ok = z * cand.b_max - w <= tol
                && w - z * cand.b_min <= tol
                && z * cand.b_min - m - w <= tol
                && w - z * cand.b_max - m <= tol;
            if y0_ok {
                out[y_col] = 0.0;
            } else if y1_ok {
                out[y_col] = 1.0;
            } else {
                return None;
            }
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case::testutil::three_bus_ring;
    use crate::milp::build::build_planning_model;
    use crate::scenario::testutil::scenario;
    use alloc::vec;

    #[test]
    fn outaged_candidate_states_get_fixed() {
        let case = three_bus_ring(100.0);
        // Candidate on branch 2, contingency on branch 2: state 1 outages it.
        let sc = scenario(&[("flat", 1.0)], vec![2], vec![2], 100.0);
        let model = build_planning_model(&case, &sc, &sc.candidates).unwrap();
        let pre = presolve(&model, &model.lower, &model.upper);
        let reg = &model.registry;
        assert_eq!(pre.fixed_binaries, 1);
        let y = reg.envelope_side(1, 0);
        assert_eq!((pre.lower[y], pre.upper[y]), (0.0, 0.0));
        let y0 = reg.envelope_side(0, 0);
        assert!(pre.upper[y0] > 0.0);
    }

    #[test]
    fn delta_fixed_zero_kills_device_columns() {
        let case = three_bus_ring(100.0);
        let sc = scenario(&[("flat", 1.0)], vec![], vec![2, 3], 0.0);
        let mut model = build_planning_model(&case, &sc, &sc.candidates).unwrap();
        model.fix_column(model.registry.install(0), 0.0);
        let pre = presolve(&model, &model.lower, &model.upper);
        let reg = &model.registry;
        assert_eq!((pre.lower[reg.device_flow(0, 0)], pre.upper[reg.device_flow(0, 0)]), (0.0, 0.0));
        // Candidate 1 stays free.
        assert!(pre.upper[reg.device_flow(0, 1)] > 0.0);
    }

    #[test]
    fn repair_picks_supported_side() {
        let case = three_bus_ring(100.0);
        let sc = scenario(&[("flat", 1.0)], vec![], vec![2], 0.0);
        let model = build_planning_model(&case, &sc, &sc.candidates).unwrap();
        let reg = &model.registry;
        let b_max = model.candidates[0].b_max;
        let mut x = vec![0.0; model.n_cols()];
        // theta > 0, w inside the exact envelope: only y = 0 supports it.
        x[reg.device_angle(0, 0)] = 0.3;
        x[reg.device_flow(0, 0)] = 0.3 * b_max * 0.5;
        x[reg.envelope_side(0, 0)] = 0.4;
        let repaired = repair_envelope_sides(&model, &x).expect("repairable");
        assert_eq!(repaired[reg.envelope_side(0, 0)], 0.0);
        // A phantom point strictly inside the relaxation is not repairable.
        x[reg.device_flow(0, 0)] =
            0.3 * b_max + 0.4 * model.candidates[0].envelope_big_m(model.theta_max);
        assert!(repair_envelope_sides(&model, &x).is_none());
    }
}
