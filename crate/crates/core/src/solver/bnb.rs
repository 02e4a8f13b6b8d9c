//! Branch and bound over the model's binaries.
//!
//! Node selection is best-bound via a heap keyed on (bound, node id), with a
//! depth-first plunge on the preferred child after each branching so
//! incumbents show up early. Branching picks the most fractional binary
//! (index tie-break). Everything is single-threaded and deterministic:
//! identical inputs give identical node sequences.

use alloc::collections::BinaryHeap;
use alloc::rc::Rc;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::float;
use crate::milp::model::MilpModel;
use crate::solver::presolve::{fractional_binaries, presolve, repair_envelope_sides};
use crate::solver::simplex::{Basis, Instance, LpStatus, SolverError};
use crate::solver::{Clock, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MilpStatus {
    OptimalWithinGap,
    Infeasible,
    NodeLimit,
    TimeLimit,
}

/// One line of the search log, mirroring the solver-log file format.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeLog {
    pub node: usize,
    pub depth: usize,
    /// LP objective of the node, if it solved to optimality.
    pub objective: Option<f64>,
    /// Global best bound after processing the node.
    pub bound: f64,
    /// Relative gap after processing the node.
    pub gap: f64,
    /// Fractional binaries at the node solution.
    pub frac_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpResult {
    pub status: MilpStatus,
    /// Best integral solution found (model units).
    pub incumbent: Option<Vec<f64>>,
    pub objective: Option<f64>,
    pub best_bound: f64,
    pub gap_abs: f64,
    pub gap_rel: f64,
    pub nodes: usize,
    pub lp_iterations: usize,
    pub wall_secs: f64,
    pub log: Vec<NodeLog>,
}

impl MilpResult {
    pub fn optimal(&self) -> bool {
        self.status == MilpStatus::OptimalWithinGap
    }
}

struct Node {
    id: usize,
    depth: usize,
    bound: f64,
    /// (column, fixed value) along the path from the root.
    fixings: Rc<FixChain>,
    warm: Rc<Basis>,
}

enum FixChain {
    Root,
    Fix { col: usize, value: f64, parent: Rc<FixChain> },
}

impl FixChain {
    fn apply(&self, lower: &mut [f64], upper: &mut [f64]) {
        let mut cur = self;
        while let FixChain::Fix { col, value, parent } = cur {
            lower[*col] = *value;
            upper[*col] = *value;
            cur = parent;
        }
    }
}

/// Heap entry ordered so the smallest bound (then smallest id) pops first.
struct Entry(Node);

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap.
        other
            .0
            .bound
            .total_cmp(&self.0.bound)
            .then_with(|| other.0.id.cmp(&self.0.id))
    }
}

/// Relative MILP gap as reported everywhere: `(incumbent - bound) / max(1, |incumbent|)`.
pub fn relative_gap(incumbent: f64, bound: f64) -> f64 {
    (incumbent - bound) / incumbent.abs().max(1.0)
}

pub fn branch_and_bound(
    model: &MilpModel,
    config: &SolverConfig,
    clock: &dyn Clock,
) -> Result<MilpResult, SolverError> {
    let started = clock.elapsed_secs();
    let pre = presolve(model, &model.lower, &model.upper);
    let instance = Instance::new(model, config);
    let int_tol = config.integrality_tol;

    let deadline = config.time_limit_secs.map(|lim| started + lim);
    let clock_arg = deadline.map(|d| (clock, d));

    let mut result = MilpResult {
        status: MilpStatus::OptimalWithinGap,
        incumbent: None,
        objective: None,
        best_bound: f64::NEG_INFINITY,
        gap_abs: f64::INFINITY,
        gap_rel: f64::INFINITY,
        nodes: 0,
        lp_iterations: 0,
        wall_secs: 0.0,
        log: Vec::new(),
    };

    // Root relaxation.
    let root_sol = match instance.solve(&pre.lower, &pre.upper, None, clock_arg) {
        Ok(sol) => sol,
        Err(SolverError::TimeLimit) => {
            result.status = MilpStatus::TimeLimit;
            result.wall_secs = clock.elapsed_secs() - started;
            return Ok(result);
        }
        Err(e) => return Err(e),
    };
    result.lp_iterations += root_sol.iterations;
    result.nodes = 1;
    match root_sol.status {
        LpStatus::Infeasible => {
            result.status = MilpStatus::Infeasible;
            result.wall_secs = clock.elapsed_secs() - started;
            result.log.push(NodeLog {
                node: 0,
                depth: 0,
                objective: None,
                bound: f64::INFINITY,
                gap: f64::INFINITY,
                frac_count: 0,
            });
            return Ok(result);
        }
        LpStatus::Unbounded => {
            return Err(SolverError::NumericalBreakdown {
                detail: alloc::string::String::from(
                    "relaxation unbounded; planning models have finite bounds",
                ),
            })
        }
        LpStatus::Optimal => {}
    }

    let mut incumbent: Option<(Vec<f64>, f64)> = None;
    let mut try_incumbent = |cand: Vec<f64>, obj: f64, incumbent: &mut Option<(Vec<f64>, f64)>| {
        let better = incumbent.as_ref().map_or(true, |(_, best)| obj < *best - 1e-12);
        if better {
            *incumbent = Some((cand, obj));
        }
    };

    let root_frac = fractional_binaries(model, &pre.lower, &pre.upper, &root_sol.primal, int_tol);
    let root_bound = root_sol.objective;
    if root_frac.is_empty() {
        try_incumbent(root_sol.primal.clone(), root_sol.objective, &mut incumbent);
    } else if let Some(rep) = attempt_repair(model, &pre, &root_sol.primal, int_tol) {
        try_incumbent(rep, root_sol.objective, &mut incumbent);
    }

    // No-investment warm incumbent: with every free installation binary
    // pinned to zero the LP is the operations-only problem, and a repair on
    // it yields a feasible plan that seeds pruning. Skipped when the root
    // already settled things.
    let install_cols: Vec<usize> = (0..model.registry.n_cand)
        .map(|a| model.registry.install(a))
        .filter(|&c| pre.lower[c] < pre.upper[c])
        .collect();
    if incumbent.is_none() && !install_cols.is_empty() {
        let mut lo = pre.lower.clone();
        let mut hi = pre.upper.clone();
        for &c in &install_cols {
            lo[c] = 0.0;
            hi[c] = 0.0;
        }
        let seed_pre = presolve(model, &lo, &hi);
        if let Ok(sol) = instance.solve(&seed_pre.lower, &seed_pre.upper, Some(&root_sol.basis), clock_arg)
        {
            result.lp_iterations += sol.iterations;
            if sol.status == LpStatus::Optimal {
                let frac = fractional_binaries(model, &seed_pre.lower, &seed_pre.upper, &sol.primal, int_tol);
                if frac.is_empty() {
                    try_incumbent(sol.primal.clone(), sol.objective, &mut incumbent);
                } else if let Some(rep) = attempt_repair(model, &seed_pre, &sol.primal, int_tol) {
                    try_incumbent(rep, sol.objective, &mut incumbent);
                }
            }
        }
    }

    let mut heap: BinaryHeap<Entry> = BinaryHeap::new();
    let mut dive: Vec<Node> = Vec::new();
    let mut next_id = 1usize;

    let push_children = |parent_bound: f64,
                         depth: usize,
                         fixings: &Rc<FixChain>,
                         warm: &Rc<Basis>,
                         branch_col: usize,
                         branch_frac: f64,
                         next_id: &mut usize,
                         heap: &mut BinaryHeap<Entry>,
                         dive: &mut Vec<Node>| {
        // Preferred child follows the rounding of the fractional value and
        // is explored depth-first; the sibling goes to the best-bound heap.
        let preferred = if branch_frac >= 0.5 { 1.0 } else { 0.0 };
        let mk = |value: f64, id: usize| Node {
            id,
            depth: depth + 1,
            bound: parent_bound,
            fixings: Rc::new(FixChain::Fix { col: branch_col, value, parent: Rc::clone(fixings) }),
            warm: Rc::clone(warm),
        };
        let sibling = mk(1.0 - preferred, *next_id);
        let chosen = mk(preferred, *next_id + 1);
        *next_id += 2;
        heap.push(Entry(sibling));
        dive.push(chosen);
    };

    if !root_frac.is_empty() {
        let (col, frac) = pick_branching(&root_frac);
        let root_fix = Rc::new(FixChain::Root);
        let root_basis = Rc::new(root_sol.basis.clone());
        push_children(
            root_bound,
            0,
            &root_fix,
            &root_basis,
            col,
            frac,
            &mut next_id,
            &mut heap,
            &mut dive,
        );
    }

    result.log.push(NodeLog {
        node: 0,
        depth: 0,
        objective: Some(root_bound),
        bound: root_bound,
        gap: incumbent
            .as_ref()
            .map_or(f64::INFINITY, |(_, obj)| relative_gap(*obj, root_bound)),
        frac_count: root_frac.len(),
    });

    let mut status = MilpStatus::OptimalWithinGap;
    loop {
        // Global bound over everything still open.
        let open_bound = dive
            .iter()
            .map(|n| n.bound)
            .chain(heap.peek().map(|e| e.0.bound))
            .fold(f64::INFINITY, f64::min);
        let inc_obj = incumbent.as_ref().map(|(_, o)| *o);
        let bound_now = match inc_obj {
            Some(obj) => open_bound.min(obj),
            None => open_bound,
        };
        if let Some(obj) = inc_obj {
            if relative_gap(obj, bound_now) <= config.gap_tol {
                result.best_bound = bound_now;
                break;
            }
        }
        if dive.is_empty() && heap.is_empty() {
            // Search exhausted.
            result.best_bound = match inc_obj {
                Some(obj) => obj,
                None => {
                    status = MilpStatus::Infeasible;
                    f64::INFINITY
                }
            };
            break;
        }
        if result.nodes >= config.node_limit {
            status = MilpStatus::NodeLimit;
            result.best_bound = bound_now;
            break;
        }
        if let Some(d) = deadline {
            if clock.elapsed_secs() > d {
                status = MilpStatus::TimeLimit;
                result.best_bound = bound_now;
                break;
            }
        }

        // Dive first, fall back to best bound.
        let node = match dive.pop() {
            Some(n) => n,
            None => heap.pop().expect("nonempty").0,
        };
        if let Some(obj) = inc_obj {
            if node.bound >= obj - 1e-12 {
                continue; // pruned by bound before solving
            }
        }

        let mut lo = pre.lower.clone();
        let mut hi = pre.upper.clone();
        node.fixings.apply(&mut lo, &mut hi);
        let node_pre = presolve(model, &lo, &hi);
        let sol = match instance.solve(&node_pre.lower, &node_pre.upper, Some(&node.warm), clock_arg) {
            Ok(s) => s,
            Err(SolverError::TimeLimit) => {
                status = MilpStatus::TimeLimit;
                result.best_bound = bound_now;
                break;
            }
            Err(e) => return Err(e),
        };
        result.nodes += 1;
        result.lp_iterations += sol.iterations;

        let (objective, frac_count) = match sol.status {
            LpStatus::Infeasible => (None, 0),
            LpStatus::Unbounded => {
                return Err(SolverError::NumericalBreakdown {
                    detail: alloc::string::String::from("node relaxation unbounded"),
                })
            }
            LpStatus::Optimal => {
                let frac =
                    fractional_binaries(model, &node_pre.lower, &node_pre.upper, &sol.primal, int_tol);
                let prune_by_bound =
                    inc_obj.is_some_and(|obj| sol.objective >= obj - 1e-12);
                if !prune_by_bound {
                    if frac.is_empty() {
                        try_incumbent(sol.primal.clone(), sol.objective, &mut incumbent);
                    } else if let Some(rep) = attempt_repair(model, &node_pre, &sol.primal, int_tol)
                    {
                        // Repair keeps the LP objective, which equals this
                        // node's bound: the node is solved exactly.
                        try_incumbent(rep, sol.objective, &mut incumbent);
                    } else {
                        let (col, frac_val) = pick_branching(&frac);
                        let warm = Rc::new(sol.basis.clone());
                        push_children(
                            sol.objective,
                            node.depth,
                            &node.fixings,
                            &warm,
                            col,
                            frac_val,
                            &mut next_id,
                            &mut heap,
                            &mut dive,
                        );
                    }
                }
                (Some(sol.objective), frac.len())
            }
        };

        let open_bound = dive
            .iter()
            .map(|n| n.bound)
            .chain(heap.peek().map(|e| e.0.bound))
            .fold(f64::INFINITY, f64::min);
        let inc_obj = incumbent.as_ref().map(|(_, o)| *o);
        let bound_after = match inc_obj {
            Some(obj) => open_bound.min(obj),
            None => open_bound,
        };
        result.log.push(NodeLog {
            node: node.id,
            depth: node.depth,
            objective,
            bound: bound_after,
            gap: inc_obj.map_or(f64::INFINITY, |obj| relative_gap(obj, bound_after)),
            frac_count,
        });
    }

    if let Some((x, obj)) = incumbent {
        result.gap_abs = obj - result.best_bound;
        result.gap_rel = relative_gap(obj, result.best_bound);
        result.incumbent = Some(x);
        result.objective = Some(obj);
    } else if status == MilpStatus::OptimalWithinGap {
        status = MilpStatus::Infeasible;
    }
    result.status = status;
    result.wall_secs = clock.elapsed_secs() - started;
    Ok(result)
}

/// Repairs a fractional solution when only envelope-side binaries are
/// fractional; installation binaries must already be integral.
fn attempt_repair(
    model: &MilpModel,
    pre: &crate::solver::presolve::Presolved,
    x: &[f64],
    int_tol: f64,
) -> Option<Vec<f64>> {
    let reg = &model.registry;
    for a in 0..reg.n_cand {
        let col = reg.install(a);
        let v = x[col];
        if (v - float::round(v)).abs() > int_tol {
            return None;
        }
    }
    let mut rounded = x.to_vec();
    for a in 0..reg.n_cand {
        let col = reg.install(a);
        rounded[col] = float::round(rounded[col]);
    }
    let repaired = repair_envelope_sides(model, &rounded)?;
    // The repair must not disturb anything the node fixed.
    for &col in &model.binaries {
        if pre.lower[col] >= pre.upper[col]
            && (repaired[col] - pre.lower[col]).abs() > int_tol
        {
            return None;
        }
    }
    Some(repaired)
}

/// Most fractional first, then lowest column index.
fn pick_branching(frac: &[(usize, f64)]) -> (usize, f64) {
    let mut best = frac[0];
    let mut best_dist = 0.0;
    for &(col, f) in frac {
        let dist = f.min(1.0 - f);
        if dist > best_dist + 1e-12 {
            best = (col, f);
            best_dist = dist;
        }
    }
    best
}
