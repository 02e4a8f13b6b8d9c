//! DC network quantities: branch susceptances, the equivalent susceptance a
//! series compensator adds, its bounds and big-M constants, plus a dense DC
//! power flow used as a verification oracle and a connectivity test.
//!
//! Per-unit convention: susceptances and angles are p.u./rad throughout; MW
//! appear only at the boundary via `base_mva`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::case::PowerCase;
use crate::float;

#[derive(Debug, Clone, PartialEq)]
pub enum NetworkError {
    NonPositiveReactance(f64),
    SingularCompensation { x: f64, x_v: f64 },
    SingularRecovery { x: f64, b_v: f64 },
    UnbalancedInjections { imbalance_mw: f64 },
    Disconnected,
}

impl fmt::Display for NetworkError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetworkError::NonPositiveReactance(x) => {
                write!(f, "reactance must be positive, got {x}")
            }
            NetworkError::SingularCompensation { x, x_v } => {
                write!(f, "compensation x_v = {x_v} cancels the line reactance {x}")
            }
            NetworkError::SingularRecovery { x, b_v } => {
                write!(f, "cannot recover a reactance from b_v = {b_v} on x = {x}")
            }
            NetworkError::UnbalancedInjections { imbalance_mw } => {
                write!(f, "injections do not balance: residual {imbalance_mw} MW")
            }
            NetworkError::Disconnected => write!(f, "network is not connected"),
        }
    }
}

impl core::error::Error for NetworkError {}

/// Branch susceptance 1/x in p.u.
pub fn branch_susceptance(x: f64) -> Result<f64, NetworkError> {
    if !(x > 0.0) {
        return Err(NetworkError::NonPositiveReactance(x));
    }
    Ok(1.0 / x)
}

/// Range of the equivalent susceptance a device can add to a line of
/// reactance `x` when its compensation spans -70% to +20% of `x`:
/// `b_min = -1/(6x)` (at +20%) and `b_max = 7/(3x)` (at -70%).
pub fn tcsc_susceptance_bounds(x: f64) -> Result<(f64, f64), NetworkError> {
    if !(x > 0.0) {
        return Err(NetworkError::NonPositiveReactance(x));
    }
    Ok((-1.0 / (6.0 * x), 7.0 / (3.0 * x)))
}

/// Equivalent susceptance added by a series reactance `x_v` on a line of
/// reactance `x`: `-x_v / (x (x + x_v))`.
pub fn tcsc_equivalent_susceptance(x: f64, x_v: f64) -> Result<f64, NetworkError> {
    if !(x > 0.0) {
        return Err(NetworkError::NonPositiveReactance(x));
    }
    let total = x + x_v;
    if total.abs() < 1e-12 * x {
        return Err(NetworkError::SingularCompensation { x, x_v });
    }
    Ok(-x_v / (x * total))
}

/// Inverse of [`tcsc_equivalent_susceptance`]: the device reactance that
/// produces `b_v` on a line of reactance `x`.
pub fn recover_tcsc_reactance(x: f64, b_v: f64) -> Result<f64, NetworkError> {
    if !(x > 0.0) {
        return Err(NetworkError::NonPositiveReactance(x));
    }
    let denom = 1.0 + b_v * x;
    if denom.abs() < 1e-12 {
        return Err(NetworkError::SingularRecovery { x, b_v });
    }
    Ok(-b_v * x * x / denom)
}

/// Big-M for the device-flow variable `w`: `(7/(3x)) * theta_max`, which
/// bounds `|b_v * theta|` over the whole compensation range.
pub fn big_m_tcsc(x: f64, theta_max: f64) -> f64 {
    (7.0 / (3.0 * x)) * theta_max
}

/// Big-M disengaging the flow-definition rows of an outaged branch:
/// `b * 2 theta_max`, plus the maximal `|w|` contribution on candidates.
pub fn big_m_outage(x: f64, is_candidate: bool, theta_max: f64) -> f64 {
    let base = (1.0 / x) * 2.0 * theta_max;
    if is_candidate {
        base + big_m_tcsc(x, theta_max)
    } else {
        base
    }
}

/// Per-candidate constants derived from the hosting branch.
#[derive(Debug, Clone, PartialEq)]
pub struct TcscCandidate {
    pub branch_id: usize,
    /// Line susceptance, p.u.
    pub b: f64,
    /// Most negative equivalent susceptance the device can add.
    pub b_min: f64,
    /// Most positive equivalent susceptance the device can add.
    pub b_max: f64,
    /// Bound on `|w|`.
    pub big_m: f64,
    /// Outage-disjunction constant for the flow rows.
    pub big_m_outage: f64,
    /// Device rating, Mvar.
    pub rating_mvar: f64,
}

impl TcscCandidate {
    pub fn new(branch_id: usize, x: f64, theta_max: f64, rating_mvar: f64) -> Self {
        let (b_min, b_max) = tcsc_susceptance_bounds(x).expect("positive reactance");
        TcscCandidate {
            branch_id,
            b: 1.0 / x,
            b_min,
            b_max,
            big_m: big_m_tcsc(x, theta_max),
            big_m_outage: big_m_outage(x, true, theta_max),
            rating_mvar,
        }
    }

    /// Big-M for the complementary envelope rows. `(b_max - b_min) *
    /// theta_max` is the smallest constant that keeps every compensation
    /// point `w = b_v * theta` with `|theta| <= theta_max` representable; it
    /// also makes the relaxed envelope the convex hull of the exact set.
    pub fn envelope_big_m(&self, theta_max: f64) -> f64 {
        (self.b_max - self.b_min) * theta_max
    }
}

/// DC power flow result: per-bus angles and injections plus per-branch flows.
#[derive(Debug, Clone, PartialEq)]
pub struct DcSolution {
    /// Angle per bus (case order), rad; reference fixed to zero.
    pub angles_rad: Vec<f64>,
    /// Flow per in-service branch (case order), MW, measured from->to.
    pub flows_mw: Vec<f64>,
    /// Net injection per bus (case order), MW.
    pub injections_mw: Vec<f64>,
}

/// Solves `B theta = p` over the in-service network with the reference angle
/// fixed to zero and returns angles and branch flows.
///
/// `injections_mw` is indexed like `case.buses` and must balance to zero.
pub fn dc_power_flow(case: &PowerCase, injections_mw: &[f64]) -> Result<DcSolution, NetworkError> {
    let n = case.buses.len();
    assert_eq!(injections_mw.len(), n, "one injection per bus");
    let imbalance: f64 = injections_mw.iter().sum();
    let scale: f64 = injections_mw.iter().map(|p| p.abs()).sum::<f64>().max(1.0);
    if imbalance.abs() > 1e-6 * scale {
        return Err(NetworkError::UnbalancedInjections { imbalance_mw: imbalance });
    }
    if !connected_without(case, None) {
        return Err(NetworkError::Disconnected);
    }

    let bus_pos = case.bus_index();
    let ref_pos = case
        .buses
        .iter()
        .position(|b| b.is_reference)
        .expect("validated case has a reference bus");

    // Reduced susceptance matrix: drop the reference row/column.
    let reduced = |i: usize| -> Option<usize> {
        match i.cmp(&ref_pos) {
            core::cmp::Ordering::Less => Some(i),
            core::cmp::Ordering::Equal => None,
            core::cmp::Ordering::Greater => Some(i - 1),
        }
    };
    let m = n - 1;
    let mut mat = vec![0.0; m * m];
    for br in case.branches.iter().filter(|b| b.in_service) {
        let b = 1.0 / br.reactance;
        let i = bus_pos[&br.from_bus];
        let j = bus_pos[&br.to_bus];
        let (ri, rj) = (reduced(i), reduced(j));
        if let Some(ri) = ri {
            mat[ri * m + ri] += b;
        }
        if let Some(rj) = rj {
            mat[rj * m + rj] += b;
        }
        if let (Some(ri), Some(rj)) = (ri, rj) {
            mat[ri * m + rj] -= b;
            mat[rj * m + ri] -= b;
        }
    }
    let mut rhs = vec![0.0; m];
    for (i, p) in injections_mw.iter().enumerate() {
        if let Some(ri) = reduced(i) {
            rhs[ri] = p / case.base_mva;
        }
    }

    let reduced_angles = solve_dense(&mut mat, &mut rhs, m).ok_or(NetworkError::Disconnected)?;

    let mut angles = vec![0.0; n];
    for (i, angle) in angles.iter_mut().enumerate() {
        if let Some(ri) = reduced(i) {
            *angle = reduced_angles[ri];
        }
    }
    let flows = case
        .branches
        .iter()
        .map(|br| {
            if !br.in_service {
                return 0.0;
            }
            let di = angles[bus_pos[&br.from_bus]] - angles[bus_pos[&br.to_bus]];
            case.base_mva * di / br.reactance
        })
        .collect();

    Ok(DcSolution {
        angles_rad: angles,
        flows_mw: flows,
        injections_mw: injections_mw.to_vec(),
    })
}

/// Gaussian elimination with partial pivoting on a dense row-major system.
/// Returns `None` when the matrix is numerically singular.
fn solve_dense(mat: &mut [f64], rhs: &mut [f64], n: usize) -> Option<Vec<f64>> {
    if n == 0 {
        return Some(Vec::new());
    }
    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        let (mut pivot_row, mut pivot_abs) = (col, 0.0);
        for row in col..n {
            let v = mat[perm[row] * n + col].abs();
            if v > pivot_abs {
                pivot_abs = v;
                pivot_row = row;
            }
        }
        if pivot_abs < 1e-11 {
            return None;
        }
        perm.swap(col, pivot_row);
        let p = perm[col];
        let diag = mat[p * n + col];
        for row in (col + 1)..n {
            let r = perm[row];
            let factor = mat[r * n + col] / diag;
            if factor == 0.0 {
                continue;
            }
            mat[r * n + col] = 0.0;
            for k in (col + 1)..n {
                mat[r * n + k] -= factor * mat[p * n + k];
            }
            rhs[r] -= factor * rhs[p];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let p = perm[col];
        let mut acc = rhs[p];
        for k in (col + 1)..n {
            acc -= mat[p * n + k] * x[k];
        }
        x[col] = acc / mat[p * n + col];
    }
    Some(x)
}

/// True when the in-service network minus the given branch still connects
/// every bus. Used to screen out islanding outages.
pub fn connected_without(case: &PowerCase, skip_branch: Option<usize>) -> bool {
    let n = case.buses.len();
    if n == 0 {
        return true;
    }
    let bus_pos = case.bus_index();
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for br in case.branches.iter().filter(|b| b.in_service) {
        if Some(br.id) == skip_branch {
            continue;
        }
        let i = bus_pos[&br.from_bus];
        let j = bus_pos[&br.to_bus];
        adj.entry(i).or_default().push(j);
        adj.entry(j).or_default().push(i);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(i) = stack.pop() {
        if let Some(neigh) = adj.get(&i) {
            for &j in neigh {
                if !seen[j] {
                    seen[j] = true;
                    count += 1;
                    stack.push(j);
                }
            }
        }
    }
    count == n
}

/// Equilibration scale snapped to a power of two so scaling is exact.
pub(crate) fn pow2_scale(magnitude: f64) -> f64 {
    if !(magnitude > 0.0) || !magnitude.is_finite() {
        return 1.0;
    }
    float::exp2(-float::round(float::log2(magnitude)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case::testutil::{three_bus_ring, two_bus};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn susceptance_reciprocal() {
        assert_eq!(branch_susceptance(0.1).unwrap(), 10.0);
        assert_eq!(branch_susceptance(1.0).unwrap(), 1.0);
        assert_eq!(branch_susceptance(0.25).unwrap(), 4.0);
        assert!(branch_susceptance(0.0).is_err());
        assert!(branch_susceptance(-0.2).is_err());
    }

    #[test]
    fn compensation_bounds_formulas() {
        let (lo, hi) = tcsc_susceptance_bounds(0.1).unwrap();
        assert!(close(lo, -1.6666666666666667, 1e-12));
        assert!(close(hi, 23.333333333333332, 1e-12));
        let (lo, hi) = tcsc_susceptance_bounds(0.2).unwrap();
        assert!(close(lo, -0.8333333333333334, 1e-12));
        assert!(close(hi, 11.666666666666666, 1e-12));
        // Ratio of the two formulas is a constant.
        for x in [0.03, 0.17, 0.5, 1.0] {
            let (lo, hi) = tcsc_susceptance_bounds(x).unwrap();
            assert!(close(hi / lo, -14.0, 1e-12));
        }
    }

    #[test]
    fn equivalent_susceptance_hits_bounds_at_range_ends() {
        // Full capacitive compensation (-70%) gives b_max, +20% gives b_min.
        let b = tcsc_equivalent_susceptance(0.1, -0.07).unwrap();
        assert!(close(b, 23.333333333333332, 1e-12));
        let b = tcsc_equivalent_susceptance(0.1, 0.02).unwrap();
        assert!(close(b, -1.6666666666666667, 1e-12));
        assert_eq!(tcsc_equivalent_susceptance(0.1, 0.0).unwrap(), 0.0);
        assert!(tcsc_equivalent_susceptance(0.1, -0.1).is_err());
    }

    #[test]
    fn reactance_recovery_round_trip() {
        let x = 0.1;
        for &b_v in &[23.333333333333332, -1.6666666666666667, 0.0, 5.0, -0.4] {
            let x_v = recover_tcsc_reactance(x, b_v).unwrap();
            let back = tcsc_equivalent_susceptance(x, x_v).unwrap();
            assert!(close(back, b_v, 1e-12));
        }
        assert!(close(recover_tcsc_reactance(0.1, 23.333333333333332).unwrap(), -0.07, 1e-10));
        assert!(close(recover_tcsc_reactance(0.1, -1.6666666666666667).unwrap(), 0.02, 1e-10));
        assert_eq!(recover_tcsc_reactance(0.1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn big_m_values() {
        let theta = core::f64::consts::FRAC_PI_3;
        assert!(close(big_m_tcsc(0.1, theta), 24.434609527920614, 1e-9));
        assert!(close(big_m_tcsc(1.0, 1.0), 7.0 / 3.0, 1e-12));
        assert_eq!(big_m_tcsc(0.1, 0.0), 0.0);
        assert!(close(big_m_outage(0.1, false, theta), 20.943951023931955, 1e-9));
        assert!(close(big_m_outage(0.1, true, theta), 45.37856055185257, 1e-9));
    }

    #[test]
    fn dc_flow_two_bus_closed_form() {
        let case = two_bus(200.0);
        let sol = dc_power_flow(&case, &[100.0, -100.0]).unwrap();
        assert!(close(sol.flows_mw[0], 100.0, 1e-10));
        let diff = sol.angles_rad[0] - sol.angles_rad[1];
        assert!(close(diff, 0.1, 1e-10));
    }

    #[test]
    fn dc_flow_ring_splits_two_to_one() {
        let case = three_bus_ring(200.0);
        let sol = dc_power_flow(&case, &[100.0, -100.0, 0.0]).unwrap();
        // Direct path 1-2 carries twice the flow of the 1-3-2 detour.
        assert!(close(sol.flows_mw[0], 100.0 * 2.0 / 3.0, 1e-9));
        assert!(close(sol.flows_mw[2], 100.0 / 3.0, 1e-9));
        assert!(close(sol.flows_mw[1], -100.0 / 3.0, 1e-9));
    }

    #[test]
    fn dc_flow_zero_injections_zero_everything() {
        let case = three_bus_ring(200.0);
        let sol = dc_power_flow(&case, &[0.0, 0.0, 0.0]).unwrap();
        assert!(sol.angles_rad.iter().all(|&a| a == 0.0));
        assert!(sol.flows_mw.iter().all(|&f| f == 0.0));
    }

    #[test]
    fn dc_flow_rejects_imbalance_and_islands() {
        let case = three_bus_ring(200.0);
        assert!(matches!(
            dc_power_flow(&case, &[100.0, -50.0, 0.0]),
            Err(NetworkError::UnbalancedInjections { .. })
        ));
        let mut cut = three_bus_ring(200.0);
        cut.branches[0].in_service = false;
        cut.branches[1].in_service = false;
        assert!(matches!(
            dc_power_flow(&cut, &[100.0, -100.0, 0.0]),
            Err(NetworkError::Disconnected)
        ));
    }

    #[test]
    fn dc_flow_nodal_balance() {
        let case = three_bus_ring(150.0);
        let injections = [80.0, -35.0, -45.0];
        let sol = dc_power_flow(&case, &injections).unwrap();
        let bus_pos = case.bus_index();
        for (i, bus) in case.buses.iter().enumerate() {
            let mut net = injections[i];
            for (k, br) in case.branches.iter().enumerate() {
                if bus_pos[&br.from_bus] == i {
                    net -= sol.flows_mw[k];
                }
                if bus_pos[&br.to_bus] == i {
                    net += sol.flows_mw[k];
                }
            }
            assert!(net.abs() < 1e-8 * 100.0, "bus {} residual {}", bus.id, net);
        }
    }

    #[test]
    fn connectivity_respects_skip() {
        let case = three_bus_ring(100.0);
        assert!(connected_without(&case, None));
        assert!(connected_without(&case, Some(1)));
        let case = two_bus(100.0);
        assert!(!connected_without(&case, Some(1)));
    }

    #[test]
    fn envelope_big_m_dominates_paper_constant() {
        let theta = core::f64::consts::FRAC_PI_3;
        let cand = TcscCandidate::new(1, 0.1, theta, 10.0);
        assert!(cand.envelope_big_m(theta) > cand.big_m);
        assert!(close(cand.envelope_big_m(theta), (cand.b_max - cand.b_min) * theta, 1e-12));
    }
}
