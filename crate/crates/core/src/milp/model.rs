//! Sparse MILP container: a variable registry mapping every decision symbol
//! to a column, bound vectors, a linear objective and typed constraint rows.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::case::PowerCase;
use crate::scenario::StateIndex;

/// Which decision a column carries. `cand` indexes the candidate list,
/// everything else indexes the case vectors; `state` indexes the enumerated
/// state list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarMeta {
    /// Installation binary for candidate `cand`.
    Install { cand: usize },
    /// Bus angle, rad.
    Angle { bus: usize, state: usize },
    /// Branch active-power flow, p.u.
    Flow { branch: usize, state: usize },
    /// Generator output, p.u.
    Generation { gen: usize, state: usize },
    /// Upward redispatch from the base dispatch, p.u.
    AdjustUp { gen: usize, state: usize },
    /// Downward redispatch from the base dispatch, p.u.
    AdjustDown { gen: usize, state: usize },
    /// Load shedding, p.u.
    Shedding { load: usize, state: usize },
    /// Device flow contribution w, p.u.
    DeviceFlow { cand: usize, state: usize },
    /// Linearized product z of installation and angle difference, rad.
    DeviceAngle { cand: usize, state: usize },
    /// Sign-selection binary of the complementary envelope.
    EnvelopeSide { cand: usize, state: usize },
}

/// Deterministic column layout: installation binaries first, then one block
/// per state holding angles, flows, generation, redispatch, shedding and the
/// per-candidate device variables.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableRegistry {
    pub n_bus: usize,
    pub n_branch: usize,
    pub n_gen: usize,
    pub n_load: usize,
    pub n_cand: usize,
    pub states: Vec<StateIndex>,
    /// External ids used for naming: bus ids, branch ids, candidate branch ids.
    pub bus_ids: Vec<usize>,
    pub branch_ids: Vec<usize>,
    pub gen_ids: Vec<usize>,
    pub load_ids: Vec<usize>,
    pub candidate_branch_ids: Vec<usize>,
}

impl VariableRegistry {
    pub fn new(case: &PowerCase, candidate_branch_ids: Vec<usize>, states: Vec<StateIndex>) -> Self {
        VariableRegistry {
            n_bus: case.buses.len(),
            n_branch: case.branches.len(),
            n_gen: case.generators.len(),
            n_load: case.loads.len(),
            n_cand: candidate_branch_ids.len(),
            states,
            bus_ids: case.buses.iter().map(|b| b.id).collect(),
            branch_ids: case.branches.iter().map(|b| b.id).collect(),
            gen_ids: case.generators.iter().map(|g| g.id).collect(),
            load_ids: case.loads.iter().map(|l| l.id).collect(),
            candidate_branch_ids,
        }
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    /// Columns per state block.
    pub fn state_stride(&self) -> usize {
        self.n_bus + self.n_branch + 3 * self.n_gen + self.n_load + 3 * self.n_cand
    }

    pub fn n_cols(&self) -> usize {
        self.n_cand + self.n_states() * self.state_stride()
    }

    fn state_base(&self, state: usize) -> usize {
        debug_assert!(state < self.n_states());
        self.n_cand + state * self.state_stride()
    }

    pub fn install(&self, cand: usize) -> usize {
        debug_assert!(cand < self.n_cand);
        cand
    }

    pub fn angle(&self, state: usize, bus: usize) -> usize {
        debug_assert!(bus < self.n_bus);
        self.state_base(state) + bus
    }

    pub fn flow(&self, state: usize, branch: usize) -> usize {
        debug_assert!(branch < self.n_branch);
        self.state_base(state) + self.n_bus + branch
    }

    pub fn generation(&self, state: usize, gen: usize) -> usize {
        debug_assert!(gen < self.n_gen);
        self.state_base(state) + self.n_bus + self.n_branch + gen
    }

    pub fn adjust_up(&self, state: usize, gen: usize) -> usize {
        self.generation(state, gen) + self.n_gen
    }

    pub fn adjust_down(&self, state: usize, gen: usize) -> usize {
        self.generation(state, gen) + 2 * self.n_gen
    }

    pub fn shedding(&self, state: usize, load: usize) -> usize {
        debug_assert!(load < self.n_load);
        self.state_base(state) + self.n_bus + self.n_branch + 3 * self.n_gen + load
    }

    pub fn device_flow(&self, state: usize, cand: usize) -> usize {
        debug_assert!(cand < self.n_cand);
        self.state_base(state) + self.n_bus + self.n_branch + 3 * self.n_gen + self.n_load + cand
    }

    pub fn device_angle(&self, state: usize, cand: usize) -> usize {
        self.device_flow(state, cand) + self.n_cand
    }

    pub fn envelope_side(&self, state: usize, cand: usize) -> usize {
        self.device_flow(state, cand) + 2 * self.n_cand
    }

    /// Inverse of the column arithmetic.
    pub fn meta(&self, col: usize) -> VarMeta {
        if col < self.n_cand {
            return VarMeta::Install { cand: col };
        }
        let rel = col - self.n_cand;
        let stride = self.state_stride();
        let state = rel / stride;
        let mut off = rel % stride;
        if off < self.n_bus {
            return VarMeta::Angle { bus: off, state };
        }
        off -= self.n_bus;
        if off < self.n_branch {
            return VarMeta::Flow { branch: off, state };
        }
        off -= self.n_branch;
        if off < self.n_gen {
            return VarMeta::Generation { gen: off, state };
        }
        off -= self.n_gen;
        if off < self.n_gen {
            return VarMeta::AdjustUp { gen: off, state };
        }
        off -= self.n_gen;
        if off < self.n_gen {
            return VarMeta::AdjustDown { gen: off, state };
        }
        off -= self.n_gen;
        if off < self.n_load {
            return VarMeta::Shedding { load: off, state };
        }
        off -= self.n_load;
        if off < self.n_cand {
            return VarMeta::DeviceFlow { cand: off, state };
        }
        off -= self.n_cand;
        if off < self.n_cand {
            return VarMeta::DeviceAngle { cand: off, state };
        }
        off -= self.n_cand;
        VarMeta::EnvelopeSide { cand: off, state }
    }

    /// Stable export name, e.g. `P_k12_c3_t0` for the flow on branch id 12 in
    /// contingency state 3 of level 0.
    pub fn column_name(&self, col: usize) -> String {
        let ct = |state: usize| {
            let s = &self.states[state];
            (s.state, s.level)
        };
        match self.meta(col) {
            VarMeta::Install { cand } => {
                format!("delta_k{}", self.candidate_branch_ids[cand])
            }
            VarMeta::Angle { bus, state } => {
                let (c, t) = ct(state);
                format!("th_i{}_c{}_t{}", self.bus_ids[bus], c, t)
            }
            VarMeta::Flow { branch, state } => {
                let (c, t) = ct(state);
                format!("P_k{}_c{}_t{}", self.branch_ids[branch], c, t)
            }
            VarMeta::Generation { gen, state } => {
                let (c, t) = ct(state);
                format!("Pg_n{}_c{}_t{}", self.gen_ids[gen], c, t)
            }
            VarMeta::AdjustUp { gen, state } => {
                let (c, t) = ct(state);
                format!("dup_n{}_c{}_t{}", self.gen_ids[gen], c, t)
            }
            VarMeta::AdjustDown { gen, state } => {
                let (c, t) = ct(state);
                format!("ddn_n{}_c{}_t{}", self.gen_ids[gen], c, t)
            }
            VarMeta::Shedding { load, state } => {
                let (c, t) = ct(state);
                format!("dls_m{}_c{}_t{}", self.load_ids[load], c, t)
            }
            VarMeta::DeviceFlow { cand, state } => {
                let (c, t) = ct(state);
                format!("w_k{}_c{}_t{}", self.candidate_branch_ids[cand], c, t)
            }
            VarMeta::DeviceAngle { cand, state } => {
                let (c, t) = ct(state);
                format!("z_k{}_c{}_t{}", self.candidate_branch_ids[cand], c, t)
            }
            VarMeta::EnvelopeSide { cand, state } => {
                let (c, t) = ct(state);
                format!("y_k{}_c{}_t{}", self.candidate_branch_ids[cand], c, t)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

/// Where a row came from; used for export names and infeasibility reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowMeta {
    FlowLo { branch: usize, state: usize },
    FlowHi { branch: usize, state: usize },
    EnvelopeALo { cand: usize, state: usize },
    EnvelopeAHi { cand: usize, state: usize },
    EnvelopeBLo { cand: usize, state: usize },
    EnvelopeBHi { cand: usize, state: usize },
    DeviceAngleRangeLo { cand: usize, state: usize },
    DeviceAngleRangeHi { cand: usize, state: usize },
    DeviceAngleLinkLo { cand: usize, state: usize },
    DeviceAngleLinkHi { cand: usize, state: usize },
    Balance { bus: usize, state: usize },
    Redispatch { gen: usize, state: usize },
    Free,
}

impl RowMeta {
    pub fn state(&self) -> Option<usize> {
        match *self {
            RowMeta::FlowLo { state, .. }
            | RowMeta::FlowHi { state, .. }
            | RowMeta::EnvelopeALo { state, .. }
            | RowMeta::EnvelopeAHi { state, .. }
            | RowMeta::EnvelopeBLo { state, .. }
            | RowMeta::EnvelopeBHi { state, .. }
            | RowMeta::DeviceAngleRangeLo { state, .. }
            | RowMeta::DeviceAngleRangeHi { state, .. }
            | RowMeta::DeviceAngleLinkLo { state, .. }
            | RowMeta::DeviceAngleLinkHi { state, .. }
            | RowMeta::Balance { state, .. }
            | RowMeta::Redispatch { state, .. } => Some(state),
            RowMeta::Free => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    /// Column/coefficient pairs sorted by column.
    pub coeffs: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
    pub meta: RowMeta,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpModel {
    pub registry: VariableRegistry,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
    /// Columns restricted to {0, 1}, ascending.
    pub binaries: Vec<usize>,
    /// Per-candidate device constants, aligned with the registry's candidate
    /// list; consumed by presolve and envelope repair.
    pub candidates: Vec<crate::network::TcscCandidate>,
    pub theta_max: f64,
}

impl MilpModel {
    pub fn n_cols(&self) -> usize {
        self.lower.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Pins a binary (or any) column to a value.
    pub fn fix_column(&mut self, col: usize, value: f64) {
        self.lower[col] = value;
        self.upper[col] = value;
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Signed activity of a row at `x`.
    pub fn row_activity(&self, row: &Row, x: &[f64]) -> f64 {
        row.coeffs.iter().map(|&(col, coef)| coef * x[col]).sum()
    }

    pub fn row_name(&self, idx: usize) -> String {
        let reg = &self.registry;
        let ct = |state: usize| {
            let s = &reg.states[state];
            (s.state, s.level)
        };
        match self.rows[idx].meta {
            RowMeta::FlowLo { branch, state } => {
                let (c, t) = ct(state);
                format!("flow_lo_k{}_c{}_t{}", reg.branch_ids[branch], c, t)
            }
            RowMeta::FlowHi { branch, state } => {
                let (c, t) = ct(state);
                format!("flow_hi_k{}_c{}_t{}", reg.branch_ids[branch], c, t)
            }
            RowMeta::EnvelopeALo { cand, state } => {
                let (c, t) = ct(state);
                format!("env_a_lo_k{}_c{}_t{}", reg.candidate_branch_ids[cand], c, t)
            }
            RowMeta::EnvelopeAHi { cand, state } => {
                let (c, t) = ct(state);
                format!("env_a_hi_k{}_c{}_t{}", reg.candidate_branch_ids[cand], c, t)
            }
            RowMeta::EnvelopeBLo { cand, state } => {
                let (c, t) = ct(state);
                format!("env_b_lo_k{}_c{}_t{}", reg.candidate_branch_ids[cand], c, t)
            }
            RowMeta::EnvelopeBHi { cand, state } => {
                let (c, t) = ct(state);
                format!("env_b_hi_k{}_c{}_t{}", reg.candidate_branch_ids[cand], c, t)
            }
            RowMeta::DeviceAngleRangeLo { cand, state } => {
                let (c, t) = ct(state);
                format!("z_range_lo_k{}_c{}_t{}", reg.candidate_branch_ids[cand], c, t)
            }
            RowMeta::DeviceAngleRangeHi { cand, state } => {
                let (c, t) = ct(state);
                format!("z_range_hi_k{}_c{}_t{}", reg.candidate_branch_ids[cand], c, t)
            }
            RowMeta::DeviceAngleLinkLo { cand, state } => {
                let (c, t) = ct(state);
                format!("z_link_lo_k{}_c{}_t{}", reg.candidate_branch_ids[cand], c, t)
            }
            RowMeta::DeviceAngleLinkHi { cand, state } => {
                let (c, t) = ct(state);
                format!("z_link_hi_k{}_c{}_t{}", reg.candidate_branch_ids[cand], c, t)
            }
            RowMeta::Balance { bus, state } => {
                let (c, t) = ct(state);
                format!("bal_i{}_c{}_t{}", reg.bus_ids[bus], c, t)
            }
            RowMeta::Redispatch { gen, state } => {
                let (c, t) = ct(state);
                format!("redisp_n{}_c{}_t{}", reg.gen_ids[gen], c, t)
            }
            RowMeta::Free => format!("r{idx}"),
        }
    }

    /// Structural sanity: every referenced column exists, bounds are ordered
    /// and finite, rhs and objective are finite.
    pub fn audit(&self) -> Result<(), String> {
        let n = self.n_cols();
        if self.upper.len() != n || self.objective.len() != n {
            return Err(String::from("bound/objective vectors disagree on column count"));
        }
        if n != self.registry.n_cols() {
            return Err(String::from("registry column count mismatch"));
        }
        for j in 0..n {
            if !self.lower[j].is_finite() || !self.upper[j].is_finite() {
                return Err(format!("column {} has a non-finite bound", self.registry.column_name(j)));
            }
            if self.lower[j] > self.upper[j] + 1e-12 {
                return Err(format!("column {} has crossed bounds", self.registry.column_name(j)));
            }
            if !self.objective[j].is_finite() {
                return Err(format!("column {} has a non-finite objective", self.registry.column_name(j)));
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(format!("row {} has a non-finite rhs", self.row_name(i)));
            }
            let mut last = None;
            for &(col, coef) in &row.coeffs {
                if col >= n {
                    return Err(format!("row {} references column {col} out of range", self.row_name(i)));
                }
                if !coef.is_finite() {
                    return Err(format!("row {} has a non-finite coefficient", self.row_name(i)));
                }
                if let Some(prev) = last {
                    if col <= prev {
                        return Err(format!("row {} columns not strictly ascending", self.row_name(i)));
                    }
                }
                last = Some(col);
            }
        }
        for pair in self.binaries.windows(2) {
            if pair[0] >= pair[1] {
                return Err(String::from("binary list not strictly ascending"));
            }
        }
        Ok(())
    }
}

/// Accumulates coefficients for one row, merging duplicate columns.
#[derive(Debug, Default)]
pub struct RowBuilder {
    terms: Vec<(usize, f64)>,
}

impl RowBuilder {
    pub fn new() -> Self {
        RowBuilder { terms: Vec::new() }
    }

    pub fn add(&mut self, col: usize, coef: f64) -> &mut Self {
        if coef != 0.0 {
            self.terms.push((col, coef));
        }
        self
    }

    pub fn build(mut self, sense: RowSense, rhs: f64, meta: RowMeta) -> Row {
        self.terms.sort_unstable_by_key(|&(col, _)| col);
        let mut coeffs: Vec<(usize, f64)> = Vec::with_capacity(self.terms.len());
        for (col, coef) in self.terms {
            match coeffs.last_mut() {
                Some(last) if last.0 == col => last.1 += coef,
                _ => coeffs.push((col, coef)),
            }
        }
        coeffs.retain(|&(_, c)| c != 0.0);
        Row { coeffs, sense, rhs, meta }
    }
}
