//! Bounded-variable revised primal simplex.
//!
//! Rows become equalities by adding one logical column per row (`<=` gives a
//! nonnegative logical, `>=` a nonpositive one, `=` a fixed one). Phase 1
//! minimizes the sum of basic bound violations with the composite gradient
//! (+1/-1 on violated basics, re-priced every iteration); phase 2 runs the
//! usual bounded ratio test with bound flips. The basis inverse lives in
//! product form ([`crate::solver::lu`]) and is refactorized on a fixed
//! update interval. Pivoting is Dantzig with a Bland fallback after a
//! degeneracy streak, so runs are deterministic.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::milp::model::{MilpModel, RowSense};
use crate::network::pow2_scale;
use crate::solver::lu::{BasisCol, BasisFactor};
use crate::solver::sparse::CscMatrix;
use crate::solver::{Clock, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarStat {
    Basic,
    AtLower,
    AtUpper,
}

/// Column statuses (structural then logical), reusable as a warm start.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    pub status: Vec<VarStat>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Structural column values, model units.
    pub primal: Vec<f64>,
    /// Row duals: nonnegative multipliers for binding inequalities, signed
    /// shadow prices for equalities.
    pub row_duals: Vec<f64>,
    /// Reduced costs of structural columns, model units.
    pub reduced_costs: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub basis: Basis,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolverError {
    IterationLimit { iterations: usize },
    TimeLimit,
    NumericalBreakdown { detail: String },
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverError::IterationLimit { iterations } => {
                write!(f, "simplex iteration limit reached after {iterations} iterations")
            }
            SolverError::TimeLimit => write!(f, "time limit reached inside the simplex"),
            SolverError::NumericalBreakdown { detail } => {
                write!(f, "numerical breakdown: {detail}")
            }
        }
    }
}

impl core::error::Error for SolverError {}

const INF: f64 = f64::INFINITY;
const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_STEP: f64 = 1e-10;
const RATIO_TIE: f64 = 1e-9;

/// Ready-to-solve LP data: the scaled matrix and cost vector are shared by
/// every solve; bounds vary per call (nodes, enumerations).
pub struct Instance {
    m: usize,
    n_struct: usize,
    a: CscMatrix,
    b_scaled: Vec<f64>,
    cost_scaled: Vec<f64>,
    cost_raw: Vec<f64>,
    row_scale: Vec<f64>,
    col_scale: Vec<f64>,
    senses: Vec<RowSense>,
    config: SolverConfig,
}

impl Instance {
    pub fn new(model: &MilpModel, config: &SolverConfig) -> Instance {
        let m = model.n_rows();
        let n = model.n_cols();
        let mut a = CscMatrix::from_rows(&model.rows, n);

        // Geometric equilibration snapped to powers of two (exact scaling),
        // two alternating row/column rounds.
        let mut row_scale = vec![1.0; m];
        let mut col_scale = vec![1.0; n];
        for _ in 0..2 {
            let mut hi = vec![0.0f64; m];
            let mut lo = vec![INF; m];
            for j in 0..n {
                let (rows, vals) = a.col(j);
                for (&i, &v) in rows.iter().zip(vals) {
                    let av = (v * row_scale[i] * col_scale[j]).abs();
                    if av > 0.0 {
                        hi[i] = hi[i].max(av);
                        lo[i] = lo[i].min(av);
                    }
                }
            }
            for i in 0..m {
                if hi[i] > 0.0 {
                    row_scale[i] *= pow2_scale(crate::float::sqrt(hi[i] * lo[i]));
                }
            }
            let mut hi = vec![0.0f64; n];
            let mut lo = vec![INF; n];
            for j in 0..n {
                let (rows, vals) = a.col(j);
                for (&i, &v) in rows.iter().zip(vals) {
                    let av = (v * row_scale[i] * col_scale[j]).abs();
                    if av > 0.0 {
                        hi[j] = hi[j].max(av);
                        lo[j] = lo[j].min(av);
                    }
                }
            }
            for j in 0..n {
                if hi[j] > 0.0 {
                    col_scale[j] *= pow2_scale(crate::float::sqrt(hi[j] * lo[j]));
                }
            }
        }
        a.scale(&row_scale, &col_scale);

        let b_scaled = model.rows.iter().enumerate().map(|(i, r)| r.rhs * row_scale[i]).collect();
        let cost_scaled = (0..n).map(|j| model.objective[j] * col_scale[j]).collect();
        let senses = model.rows.iter().map(|r| r.sense).collect();

        Instance {
            m,
            n_struct: n,
            a,
            b_scaled,
            cost_scaled,
            cost_raw: model.objective.clone(),
            row_scale,
            col_scale,
            senses,
            config: config.clone(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.m
    }

    pub fn n_struct(&self) -> usize {
        self.n_struct
    }

    fn n_total(&self) -> usize {
        self.n_struct + self.m
    }

    fn logical_bounds(&self, i: usize) -> (f64, f64) {
        match self.senses[i] {
            RowSense::Le => (0.0, INF),
            RowSense::Eq => (0.0, 0.0),
            RowSense::Ge => (-INF, 0.0),
        }
    }

    fn col_of(&self, var: usize) -> BasisCol {
        if var < self.n_struct {
            BasisCol::Structural(var)
        } else {
            BasisCol::Logical(var - self.n_struct)
        }
    }

    fn axpy_col(&self, var: usize, value: f64, dense: &mut [f64]) {
        if var < self.n_struct {
            self.a.col_axpy(var, value, dense);
        } else {
            dense[var - self.n_struct] += value;
        }
    }

    fn dot_col(&self, var: usize, dense: &[f64]) -> f64 {
        if var < self.n_struct {
            self.a.col_dot(var, dense)
        } else {
            dense[var - self.n_struct]
        }
    }

    fn cost_of(&self, var: usize) -> f64 {
        if var < self.n_struct {
            self.cost_scaled[var]
        } else {
            0.0
        }
    }

    /// Solves with the given structural bounds (model units). `warm` reuses
    /// a compatible basis from an earlier solve; `clock` enforces a deadline
    /// in elapsed seconds.
    pub fn solve(
        &self,
        lower: &[f64],
        upper: &[f64],
        warm: Option<&Basis>,
        clock: Option<(&dyn Clock, f64)>,
    ) -> Result<LpSolution, SolverError> {
        assert_eq!(lower.len(), self.n_struct);
        assert_eq!(upper.len(), self.n_struct);
        let n_total = self.n_total();
        let ftol = self.config.feasibility_tol;
        let feas_budget = ftol * (1 + self.m) as f64;

        // Scaled bounds; logical bounds are 0 or infinite and scale-free.
        let mut lb = vec![0.0; n_total];
        let mut ub = vec![0.0; n_total];
        for j in 0..self.n_struct {
            lb[j] = lower[j] / self.col_scale[j];
            ub[j] = upper[j] / self.col_scale[j];
        }
        for i in 0..self.m {
            let (l, u) = self.logical_bounds(i);
            lb[self.n_struct + i] = l;
            ub[self.n_struct + i] = u;
        }

        let mut st = State::start(self, &lb, &ub, warm)?;
        let mut iterations = 0usize;
        let mut degenerate_streak = 0usize;
        let mut bland = false;
        let mut phase_one = st.infeasibility(&lb, &ub) > feas_budget;
        let mut phase_switches = 0usize;
        let mut y = vec![0.0; self.m];

        loop {
            if iterations >= self.config.max_iterations {
                return Err(SolverError::IterationLimit { iterations });
            }
            if iterations % 512 == 0 {
                if let Some((clk, deadline)) = clock {
                    if clk.elapsed_secs() > deadline {
                        return Err(SolverError::TimeLimit);
                    }
                }
            }

            // Duals of the current phase's costs: scatter position costs
            // into their slots and BTRAN into row space.
            y.iter_mut().for_each(|v| *v = 0.0);
            for (pos, &var) in st.basis_vars.iter().enumerate() {
                let c = if phase_one {
                    st.phase1_cost(var, &lb, &ub)
                } else {
                    self.cost_of(var)
                };
                y[st.slot_of_pos[pos]] = c;
            }
            st.factor.btran(&mut y);

            // Pricing: most violating reduced cost (Bland: first violating).
            let mut enter: Option<(usize, f64)> = None;
            for var in 0..n_total {
                if st.stat[var] == VarStat::Basic || lb[var] == ub[var] {
                    continue;
                }
                let c = if phase_one { 0.0 } else { self.cost_of(var) };
                let d = c - self.dot_col(var, &y);
                let viol = match st.stat[var] {
                    VarStat::AtLower => -d,
                    VarStat::AtUpper => d,
                    VarStat::Basic => unreachable!(),
                };
                if viol > self.config.optimality_tol {
                    if bland {
                        enter = Some((var, viol));
                        break;
                    }
                    if enter.map_or(true, |(_, best)| viol > best) {
                        enter = Some((var, viol));
                    }
                }
            }

            let Some((enter_var, _)) = enter else {
                // No improving column: settle the phase on clean numbers.
                st.refresh(self, &lb, &ub)?;
                let infeas = st.infeasibility(&lb, &ub);
                if phase_one {
                    if infeas > feas_budget {
                        return Ok(self.finish(LpStatus::Infeasible, &st, iterations));
                    }
                    phase_one = false;
                    continue;
                }
                if infeas > feas_budget {
                    phase_switches += 1;
                    if phase_switches > 8 {
                        return Err(SolverError::NumericalBreakdown {
                            detail: format!(
                                "cannot hold feasibility (residual {infeas:.3e} after {phase_switches} phase returns)"
                            ),
                        });
                    }
                    phase_one = true;
                    continue;
                }
                return Ok(self.finish(LpStatus::Optimal, &st, iterations));
            };

            iterations += 1;
            let sigma = if st.stat[enter_var] == VarStat::AtLower { 1.0 } else { -1.0 };

            // alpha = B^-1 a_enter, slot-indexed.
            let mut alpha = vec![0.0; self.m];
            self.axpy_col(enter_var, 1.0, &mut alpha);
            st.factor.ftran(&mut alpha);

            // Ratio test over basic blockers plus the entering bound flip.
            let mut t_block = ub[enter_var] - lb[enter_var];
            let mut blocker: Option<(usize, VarStat)> = None;
            let mut blocker_rating = -1.0;
            for pos in 0..self.m {
                let av = alpha[st.slot_of_pos[pos]];
                if av.abs() <= PIVOT_TOL {
                    continue;
                }
                let var = st.basis_vars[pos];
                let rate = -sigma * av;
                let xv = st.x[var];
                let below = xv < lb[var] - ftol;
                let above = xv > ub[var] + ftol;
                let (bound, stat_after) = if below {
                    if rate > 0.0 {
                        (lb[var], VarStat::AtLower)
                    } else {
                        continue;
                    }
                } else if above {
                    if rate < 0.0 {
                        (ub[var], VarStat::AtUpper)
                    } else {
                        continue;
                    }
                } else if rate > 0.0 {
                    if ub[var] == INF {
                        continue;
                    }
                    (ub[var], VarStat::AtUpper)
                } else {
                    if lb[var] == -INF {
                        continue;
                    }
                    (lb[var], VarStat::AtLower)
                };
                let t = ((bound - xv) / rate).max(0.0);
                let rating = if bland {
                    // Anti-cycling: lowest variable index wins ties.
                    -(var as f64)
                } else {
                    av.abs()
                };
                if t < t_block - RATIO_TIE || (t < t_block + RATIO_TIE && rating > blocker_rating) {
                    t_block = t.min(t_block);
                    blocker = Some((pos, stat_after));
                    blocker_rating = rating;
                }
            }

            if t_block == INF {
                if phase_one {
                    return Err(SolverError::NumericalBreakdown {
                        detail: String::from("unbounded direction while minimizing infeasibility"),
                    });
                }
                return Ok(self.finish(LpStatus::Unbounded, &st, iterations));
            }

            if t_block <= DEGENERATE_STEP {
                degenerate_streak += 1;
                if degenerate_streak >= self.config.degeneracy_threshold {
                    bland = true;
                }
            } else {
                degenerate_streak = 0;
                bland = false;
            }

            // Apply the step.
            let step = sigma * t_block;
            if step != 0.0 {
                for pos in 0..self.m {
                    let av = alpha[st.slot_of_pos[pos]];
                    if av != 0.0 {
                        let var = st.basis_vars[pos];
                        st.x[var] -= av * step;
                    }
                }
            }
            st.x[enter_var] += step;

            match blocker {
                None => {
                    // Bound flip; no basis change.
                    let to_upper = st.stat[enter_var] == VarStat::AtLower;
                    st.stat[enter_var] = if to_upper { VarStat::AtUpper } else { VarStat::AtLower };
                    st.x[enter_var] = if to_upper { ub[enter_var] } else { lb[enter_var] };
                }
                Some((pos, stat_after)) => {
                    let leave_var = st.basis_vars[pos];
                    st.x[leave_var] = match stat_after {
                        VarStat::AtLower => lb[leave_var],
                        VarStat::AtUpper => ub[leave_var],
                        VarStat::Basic => unreachable!(),
                    };
                    st.stat[leave_var] = stat_after;
                    st.stat[enter_var] = VarStat::Basic;
                    st.basis_vars[pos] = enter_var;
                    st.factor.update(st.slot_of_pos[pos], &alpha);
                    if st.factor.n_updates() >= self.config.refactor_interval {
                        st.refresh(self, &lb, &ub)?;
                    }
                }
            }
        }
    }

    fn finish(&self, status: LpStatus, st: &State, iterations: usize) -> LpSolution {
        let mut primal = vec![0.0; self.n_struct];
        for j in 0..self.n_struct {
            primal[j] = st.x[j] * self.col_scale[j];
        }
        let mut objective = 0.0;
        for j in 0..self.n_struct {
            objective += self.cost_raw[j] * primal[j];
        }

        // Duals always priced with the real costs.
        let mut y = vec![0.0; self.m];
        for (pos, &var) in st.basis_vars.iter().enumerate() {
            y[st.slot_of_pos[pos]] = self.cost_of(var);
        }
        st.factor.btran(&mut y);

        let mut row_duals = vec![0.0; self.m];
        let mut reduced = vec![0.0; self.n_struct];
        if status == LpStatus::Optimal {
            for j in 0..self.n_struct {
                if st.stat[j] != VarStat::Basic {
                    let d = self.cost_scaled[j] - self.a.col_dot(j, &y);
                    reduced[j] = d / self.col_scale[j];
                }
            }
            for i in 0..self.m {
                let yv = y[i] * self.row_scale[i];
                row_duals[i] = match self.senses[i] {
                    RowSense::Le => -yv,
                    RowSense::Ge | RowSense::Eq => yv,
                };
            }
        }

        LpSolution {
            status,
            primal,
            row_duals,
            reduced_costs: reduced,
            objective,
            iterations,
            basis: Basis { status: st.stat.clone() },
        }
    }
}

struct State {
    stat: Vec<VarStat>,
    basis_vars: Vec<usize>,
    /// Pivot row owned by each basis position; fixed between refactorizations.
    slot_of_pos: Vec<usize>,
    x: Vec<f64>,
    factor: BasisFactor,
}

impl State {
    fn start(
        inst: &Instance,
        lb: &[f64],
        ub: &[f64],
        warm: Option<&Basis>,
    ) -> Result<State, SolverError> {
        let n_total = inst.n_total();
        let mut stat: Vec<VarStat> = Vec::with_capacity(n_total);

        let usable = warm
            .filter(|b| b.status.len() == n_total)
            .filter(|b| b.status.iter().filter(|&&s| s == VarStat::Basic).count() == inst.m);
        match usable {
            Some(b) => stat.extend(b.status.iter().copied()),
            None => {
                for j in 0..n_total {
                    if j >= inst.n_struct {
                        stat.push(VarStat::Basic);
                    } else if lb[j].abs() <= ub[j].abs() {
                        stat.push(VarStat::AtLower);
                    } else {
                        stat.push(VarStat::AtUpper);
                    }
                }
            }
        }

        let mut x = vec![0.0; n_total];
        for j in 0..n_total {
            match stat[j] {
                VarStat::Basic => {}
                VarStat::AtLower => {
                    if lb[j] == -INF {
                        stat[j] = VarStat::AtUpper;
                        x[j] = ub[j];
                    } else {
                        x[j] = lb[j];
                    }
                }
                VarStat::AtUpper => {
                    if ub[j] == INF {
                        stat[j] = VarStat::AtLower;
                        x[j] = lb[j];
                    } else {
                        x[j] = ub[j];
                    }
                }
            }
        }

        let basis_vars: Vec<usize> = (0..n_total).filter(|&j| stat[j] == VarStat::Basic).collect();
        let mut st = State {
            stat,
            basis_vars,
            slot_of_pos: Vec::new(),
            x,
            factor: BasisFactor::empty(),
        };
        st.refresh(inst, lb, ub)?;
        Ok(st)
    }

    /// Refactorizes (repairing dependent columns) and recomputes basic
    /// values from scratch.
    fn refresh(&mut self, inst: &Instance, lb: &[f64], ub: &[f64]) -> Result<(), SolverError> {
        for attempt in 0..2 {
            let cols: Vec<BasisCol> = self.basis_vars.iter().map(|&v| inst.col_of(v)).collect();
            let fz = BasisFactor::factorize(&inst.a, &cols);
            if fz.repairs.is_empty() {
                self.factor = fz.factor;
                self.slot_of_pos = fz.slot_of_pos;
                break;
            }
            if attempt == 1 {
                return Err(SolverError::NumericalBreakdown {
                    detail: format!("basis still singular after {} repairs", fz.repairs.len()),
                });
            }
            for rep in &fz.repairs {
                let old = self.basis_vars[rep.position];
                let logical = inst.n_struct + rep.replacement_row;
                self.stat[old] = if self.x[old] - lb[old] <= ub[old] - self.x[old] {
                    self.x[old] = lb[old];
                    VarStat::AtLower
                } else {
                    self.x[old] = ub[old];
                    VarStat::AtUpper
                };
                self.stat[logical] = VarStat::Basic;
                self.basis_vars[rep.position] = logical;
            }
        }

        // x_B = B^-1 (b - N x_N); result is slot-indexed.
        let mut rhs = inst.b_scaled.clone();
        for j in 0..inst.n_total() {
            if self.stat[j] != VarStat::Basic && self.x[j] != 0.0 {
                inst.axpy_col(j, -self.x[j], &mut rhs);
            }
        }
        self.factor.ftran(&mut rhs);
        for (pos, &slot) in self.slot_of_pos.iter().enumerate() {
            self.x[self.basis_vars[pos]] = rhs[slot];
        }
        Ok(())
    }

    fn infeasibility(&self, lb: &[f64], ub: &[f64]) -> f64 {
        let mut sum = 0.0;
        for &var in &self.basis_vars {
            let x = self.x[var];
            if x < lb[var] {
                sum += lb[var] - x;
            } else if x > ub[var] {
                sum += x - ub[var];
            }
        }
        sum
    }

    fn phase1_cost(&self, var: usize, lb: &[f64], ub: &[f64]) -> f64 {
        let x = self.x[var];
        if x < lb[var] {
            -1.0
        } else if x > ub[var] {
            1.0
        } else {
            0.0
        }
    }
}

/// One-shot LP solve of a model (binaries relaxed to their bounds or
/// whatever fixings the bounds encode).
pub fn solve_lp(
    model: &MilpModel,
    warm: Option<&Basis>,
    config: &SolverConfig,
) -> Result<LpSolution, SolverError> {
    let instance = Instance::new(model, config);
    instance.solve(&model.lower, &model.upper, warm, None)
}
