//! Exhaustive enumeration oracle: every installation vector is tried
//! explicitly, and within each the envelope-side binaries are resolved
//! exactly (repair when the LP point supports it, otherwise a depth-first
//! fixing search). Slow by design; the reference the branch-and-bound run is
//! checked against in tests.

use alloc::vec::Vec;
use core::fmt;

use crate::float;
use crate::milp::model::MilpModel;
use crate::solver::bnb::{relative_gap, MilpResult, MilpStatus, NodeLog};
use crate::solver::presolve::{fractional_binaries, presolve, repair_envelope_sides, Presolved};
use crate::solver::simplex::{Basis, Instance, LpStatus, SolverError};
use crate::solver::{Clock, SolverConfig};

pub const DEFAULT_MAX_BINARIES: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub enum BruteForceError {
    TooManyBinaries { free: usize, limit: usize },
    Solver(SolverError),
}

impl fmt::Display for BruteForceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BruteForceError::TooManyBinaries { free, limit } => {
                write!(f, "{free} free installation binaries exceed the enumeration limit {limit}")
            }
            BruteForceError::Solver(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for BruteForceError {}

impl From<SolverError> for BruteForceError {
    fn from(e: SolverError) -> Self {
        BruteForceError::Solver(e)
    }
}

/// Exact optimum by enumerating installation vectors (at most
/// `2^max_binaries` LP sweeps). The result's `nodes` counts LP solves.
pub fn brute_force(
    model: &MilpModel,
    config: &SolverConfig,
    clock: &dyn Clock,
    max_binaries: usize,
) -> Result<MilpResult, BruteForceError> {
    let started = clock.elapsed_secs();
    let reg = &model.registry;
    let base = presolve(model, &model.lower, &model.upper);

    let free_installs: Vec<usize> = (0..reg.n_cand)
        .map(|a| reg.install(a))
        .filter(|&c| base.lower[c] < base.upper[c])
        .collect();
    if free_installs.len() > max_binaries {
        return Err(BruteForceError::TooManyBinaries {
            free: free_installs.len(),
            limit: max_binaries,
        });
    }

    let instance = Instance::new(model, config);
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut lp_solves = 0usize;
    let mut warm: Option<Basis> = None;

    for mask in 0u64..(1u64 << free_installs.len()) {
        let mut lo = base.lower.clone();
        let mut hi = base.upper.clone();
        for (bit, &col) in free_installs.iter().enumerate() {
            let v = if mask >> bit & 1 == 1 { 1.0 } else { 0.0 };
            lo[col] = v;
            hi[col] = v;
        }
        let pre = presolve(model, &lo, &hi);
        let outcome = solve_fixed_installs(
            model,
            &instance,
            &pre,
            warm.as_ref(),
            config,
            &mut lp_solves,
            best.as_ref().map(|(_, obj)| *obj),
        )?;
        if let Some((x, obj, basis)) = outcome {
            warm = Some(basis);
            let better = best.as_ref().map_or(true, |(_, b)| obj < *b - 1e-12);
            if better {
                best = Some((x, obj));
            }
        }
    }

    let wall = clock.elapsed_secs() - started;
    let mut result = MilpResult {
        status: MilpStatus::OptimalWithinGap,
        incumbent: None,
        objective: None,
        best_bound: f64::INFINITY,
        gap_abs: 0.0,
        gap_rel: 0.0,
        nodes: lp_solves,
        lp_iterations: 0,
        wall_secs: wall,
        log: Vec::new(),
    };
    match best {
        Some((x, obj)) => {
            result.best_bound = obj;
            result.gap_abs = 0.0;
            result.gap_rel = relative_gap(obj, obj);
            result.log.push(NodeLog {
                node: lp_solves,
                depth: 0,
                objective: Some(obj),
                bound: obj,
                gap: 0.0,
                frac_count: 0,
            });
            result.incumbent = Some(x);
            result.objective = Some(obj);
        }
        None => result.status = MilpStatus::Infeasible,
    }
    Ok(result)
}

/// Exact minimum for one installation fixing: solve with sides relaxed,
/// repair when supported, otherwise branch depth-first on the fractional
/// sides. `cutoff` prunes entire subtrees that cannot beat the enumeration's
/// best so far (exact pruning).
#[allow(clippy::too_many_arguments)]
fn solve_fixed_installs(
    model: &MilpModel,
    instance: &Instance,
    pre: &Presolved,
    warm: Option<&Basis>,
    config: &SolverConfig,
    lp_solves: &mut usize,
    cutoff: Option<f64>,
) -> Result<Option<(Vec<f64>, f64, Basis)>, SolverError> {
    struct Frame {
        lower: Vec<f64>,
        upper: Vec<f64>,
    }
    let mut stack = alloc::vec![Frame { lower: pre.lower.clone(), upper: pre.upper.clone() }];
    let mut best: Option<(Vec<f64>, f64, Basis)> = None;
    let mut warm_local: Option<Basis> = warm.cloned();

    while let Some(frame) = stack.pop() {
        let sol = instance.solve(&frame.lower, &frame.upper, warm_local.as_ref(), None)?;
        *lp_solves += 1;
        if sol.status != LpStatus::Optimal {
            continue;
        }
        warm_local = Some(sol.basis.clone());
        let beaten_globally = cutoff.is_some_and(|c| sol.objective >= c - 1e-12);
        let beaten_locally =
            best.as_ref().is_some_and(|(_, obj, _)| sol.objective >= *obj - 1e-12);
        if beaten_globally || beaten_locally {
            continue;
        }
        let frac = fractional_binaries(
            model,
            &frame.lower,
            &frame.upper,
            &sol.primal,
            config.integrality_tol,
        );
        if frac.is_empty() {
            best = Some((sol.primal, sol.objective, sol.basis));
            continue;
        }
        if let Some(repaired) = repair_envelope_sides(model, &sol.primal) {
            best = Some((repaired, sol.objective, sol.basis));
            continue;
        }
        // Branch on the most fractional side, preferred value first (the
        // stack is LIFO, so push it last).
        let (col, f) = frac
            .iter()
            .copied()
            .reduce(|a, b| {
                let da = a.1.min(1.0 - a.1);
                let db = b.1.min(1.0 - b.1);
                if db > da + 1e-12 {
                    b
                } else {
                    a
                }
            })
            .expect("nonempty");
        let preferred = float::round(f);
        for value in [1.0 - preferred, preferred] {
            let mut child = Frame { lower: frame.lower.clone(), upper: frame.upper.clone() };
            child.lower[col] = value;
            child.upper[col] = value;
            stack.push(child);
        }
    }
    Ok(best)
}
