//! Open-system time evolution of pulse schedules.
//!
//! The register is three qutrits plus one truncated cavity mode, basis
//! index `((t1·3 + t2)·3 + t3)·(cutoff+1) + p`. Each pulse segment has a
//! time-dependent Hamiltonian in the frame rotating with the drives: a
//! resonant exchange term for the selected transition plus an
//! off-resonant spurious term for the other transition of the same
//! qutrit, oscillating at the detuning. The segment clock restarts at
//! zero, so retuning between segments is free.
//!
//! Integration is fixed-step RK4 on the full master equation. The
//! right-hand side is assembled from sparse operator triplets as
//! `B + B† + Σ γ·ΛρΛ†` with `B = (−iH − K/2)ρ` and `K = Σ γ·Λ†Λ`
//! (diagonal), which is valid because ρ stays hermitian through every
//! stage. A dense textbook implementation, [`lindblad_rhs`], is kept as
//! the reference the fast path is checked against.
//!
//! Every exchange term moves one photon against one qutrit excitation,
//! so the total excitation number is conserved exactly during segments
//! and only ever lowered by dissipation. Starting from at most three
//! excitations, a photon cutoff of 3 is exact and Fock level 4 is
//! unreachable.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::circuit::{ideal_joint_output, JointOpId};
use crate::linalg::{state_fidelity, ComplexMatrix, DensityMatrix, StateVector};
use crate::params::{CouplingParams, NoiseParams};
use crate::pulse::{compile_joint_op, InstantaneousLayer, PulseSegment, ScheduleItem, Transition};
use crate::{Error, Result};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub const DEFAULT_PHOTON_CUTOFF: usize = 3;
pub const MAX_PHOTON_CUTOFF: usize = 12;
/// Hard cap on radians of the fastest oscillation per integration step.
pub const MAX_STEP_PHASE: f64 = 0.05;
/// The default step resolves the fastest frequency with this many steps
/// per cycle, keeping the step phase at 2π/128 ≈ 0.049 rad.
pub const STEPS_PER_FASTEST_CYCLE: f64 = 128.0;
/// Highest tolerable population in the top Fock level before the
/// truncation is considered unsound.
pub const CUTOFF_POPULATION_LIMIT: f64 = 1e-6;

const QUTRIT_STATES: usize = 27;

/// Three qutrits and a cavity truncated at `photon_cutoff` photons.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HilbertSpace {
    photon_cutoff: usize,
}

impl HilbertSpace {
    pub fn new(photon_cutoff: usize) -> Result<Self> {
        if (1..=MAX_PHOTON_CUTOFF).contains(&photon_cutoff) {
            Ok(Self { photon_cutoff })
        } else {
            Err(Error::BadParameter {
                detail: format!(
                    "photon cutoff must lie in 1..={MAX_PHOTON_CUTOFF}, got {photon_cutoff}"
                ),
            })
        }
    }

    pub fn photon_cutoff(&self) -> usize {
        self.photon_cutoff
    }

    pub fn cavity_dim(&self) -> usize {
        self.photon_cutoff + 1
    }

    pub fn dim(&self) -> usize {
        QUTRIT_STATES * self.cavity_dim()
    }

    /// Basis index of qutrit levels `t = [t1, t2, t3]` with `p` photons.
    pub fn index(&self, t: [usize; 3], p: usize) -> usize {
        debug_assert!(t.iter().all(|&l| l < 3) && p <= self.photon_cutoff);
        ((t[0] * 3 + t[1]) * 3 + t[2]) * self.cavity_dim() + p
    }

    /// Inverse of [`HilbertSpace::index`].
    pub fn levels(&self, idx: usize) -> ([usize; 3], usize) {
        let p = idx % self.cavity_dim();
        let q = idx / self.cavity_dim();
        ([q / 9 % 3, q / 3 % 3, q % 3], p)
    }
}

/// Real sparse operator as (row, column, value) triplets.
#[derive(Clone, Debug, Default)]
struct SparseOp {
    entries: Vec<(u32, u32, f64)>,
}

impl SparseOp {
    fn to_dense(&self, dim: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(dim, dim);
        for &(r, c, v) in &self.entries {
            m.set(r as usize, c as usize, C64::new(v, 0.0));
        }
        m
    }
}

/// `a†·|lower⟩⟨lower+1|` on one qutrit: the excitation moves from the
/// qutrit into the cavity with the usual √(p+1) matrix element.
fn exchange_op(space: &HilbertSpace, qutrit: usize, lower: usize) -> SparseOp {
    let mut entries = Vec::new();
    for col in 0..space.dim() {
        let (mut t, p) = space.levels(col);
        if t[qutrit - 1] == lower + 1 && p < space.photon_cutoff() {
            t[qutrit - 1] = lower;
            let row = space.index(t, p + 1);
            entries.push((row as u32, col as u32, ((p + 1) as f64).sqrt()));
        }
    }
    SparseOp { entries }
}

/// Cavity annihilation operator.
fn annihilation_op(space: &HilbertSpace) -> SparseOp {
    let mut entries = Vec::new();
    for col in 0..space.dim() {
        let (t, p) = space.levels(col);
        if p > 0 {
            entries.push((space.index(t, p - 1) as u32, col as u32, (p as f64).sqrt()));
        }
    }
    SparseOp { entries }
}

/// `|to⟩⟨from|` on one qutrit, identity elsewhere.
fn qutrit_transfer_op(space: &HilbertSpace, qutrit: usize, to: usize, from: usize) -> SparseOp {
    let mut entries = Vec::new();
    for col in 0..space.dim() {
        let (mut t, p) = space.levels(col);
        if t[qutrit - 1] == from {
            t[qutrit - 1] = to;
            entries.push((space.index(t, p) as u32, col as u32, 1.0));
        }
    }
    SparseOp { entries }
}

struct SegmentHamiltonian {
    resonant: SparseOp,
    g_res: f64,
    spurious: SparseOp,
    g_sp: f64,
    delta: f64,
}

impl SegmentHamiltonian {
    fn new(segment: &PulseSegment, params: &CouplingParams, space: &HilbertSpace) -> Self {
        let j = segment.active_qutrit;
        match segment.transition {
            Transition::G01 => Self {
                resonant: exchange_op(space, j, 0),
                g_res: params.g01,
                spurious: exchange_op(space, j, 1),
                g_sp: params.g12_spurious,
                delta: params.delta12(),
            },
            Transition::E12 => Self {
                resonant: exchange_op(space, j, 1),
                g_res: params.g12,
                spurious: exchange_op(space, j, 0),
                g_sp: params.g01_spurious,
                delta: params.delta01(),
            },
        }
    }
}

struct NoiseModel {
    /// (rate, jump operator), zero-rate channels omitted.
    jumps: Vec<(f64, SparseOp)>,
    /// Diagonal of `Σ γ·Λ†Λ`.
    damping: Vec<f64>,
}

impl NoiseModel {
    fn new(noise: &NoiseParams, space: &HilbertSpace) -> Self {
        let mut channels: Vec<(f64, SparseOp)> = Vec::new();
        channels.push((noise.kappa, annihilation_op(space)));
        for j in 1..=3 {
            channels.push((noise.gamma21, qutrit_transfer_op(space, j, 1, 2)));
        }
        for j in 1..=3 {
            channels.push((noise.gamma20, qutrit_transfer_op(space, j, 0, 2)));
        }
        for j in 1..=3 {
            channels.push((noise.gamma10, qutrit_transfer_op(space, j, 0, 1)));
        }
        for j in 1..=3 {
            channels.push((noise.gamma_phi2, qutrit_transfer_op(space, j, 2, 2)));
        }
        for j in 1..=3 {
            channels.push((noise.gamma_phi1, qutrit_transfer_op(space, j, 1, 1)));
        }

        let mut damping = vec![0.0; space.dim()];
        let mut jumps = Vec::new();
        for (rate, op) in channels {
            if rate == 0.0 {
                continue;
            }
            for &(_, c, v) in &op.entries {
                damping[c as usize] += rate * v * v;
            }
            jumps.push((rate, op));
        }
        Self { jumps, damping }
    }
}

/// RHS evaluator for one segment, hot path of the integrator.
struct SegmentEngine {
    h: SegmentHamiltonian,
    noise: NoiseModel,
    dim: usize,
}

/// `out[row,·] += c·v·rho[col,·]` and `out[col,·] += c_dag·v·rho[row,·]`
/// over all triplets, i.e. the action of `c·Op + c_dag·Op†` from the
/// left.
fn scatter_rows(
    out: &mut [C64],
    rho: &[C64],
    dim: usize,
    op: &SparseOp,
    c: C64,
    c_dag: C64,
) {
    for &(row, col, v) in &op.entries {
        let (row, col) = (row as usize, col as usize);
        let f = c * v;
        let dst = &mut out[row * dim..(row + 1) * dim];
        let src = &rho[col * dim..(col + 1) * dim];
        for (x, y) in dst.iter_mut().zip(src) {
            *x += f * *y;
        }
        let f = c_dag * v;
        let dst = &mut out[col * dim..(col + 1) * dim];
        let src = &rho[row * dim..(row + 1) * dim];
        for (x, y) in dst.iter_mut().zip(src) {
            *x += f * *y;
        }
    }
}

impl SegmentEngine {
    fn new(
        segment: &PulseSegment,
        params: &CouplingParams,
        noise: &NoiseParams,
        space: &HilbertSpace,
    ) -> Self {
        Self {
            h: SegmentHamiltonian::new(segment, params, space),
            noise: NoiseModel::new(noise, space),
            dim: space.dim(),
        }
    }

    /// Master-equation right-hand side at segment time `t`.
    fn rhs(&self, t: f64, rho: &ComplexMatrix, out: &mut ComplexMatrix) {
        let dim = self.dim;
        let r = rho.data();
        let o = out.data_mut();
        o.fill(C64::new(0.0, 0.0));

        // B = (−iH(t) − K/2)·ρ
        let c_res = C64::new(0.0, -self.h.g_res);
        scatter_rows(o, r, dim, &self.h.resonant, c_res, c_res);
        if self.h.g_sp != 0.0 {
            let phase = C64::from_polar(1.0, -self.h.delta * t);
            let c = C64::new(0.0, -self.h.g_sp);
            scatter_rows(o, r, dim, &self.h.spurious, c * phase, c * phase.conj());
        }
        for i in 0..dim {
            let k = self.noise.damping[i];
            if k != 0.0 {
                let dst = &mut o[i * dim..(i + 1) * dim];
                let src = &r[i * dim..(i + 1) * dim];
                for (x, y) in dst.iter_mut().zip(src) {
                    *x += -0.5 * k * *y;
                }
            }
        }

        // out = B + B†
        for i in 0..dim {
            let d = o[i * dim + i];
            o[i * dim + i] = C64::new(2.0 * d.re, 0.0);
            for j in (i + 1)..dim {
                let s = o[i * dim + j] + o[j * dim + i].conj();
                o[i * dim + j] = s;
                o[j * dim + i] = s.conj();
            }
        }

        // out += Σ γ·ΛρΛ†
        for (rate, op) in &self.noise.jumps {
            for &(r1, c1, v1) in &op.entries {
                let w = rate * v1;
                let (r1, c1) = (r1 as usize, c1 as usize);
                for &(r2, c2, v2) in &op.entries {
                    o[r1 * dim + r2 as usize] += w * v2 * r[c1 * dim + c2 as usize];
                }
            }
        }
    }
}

struct Workspace {
    k1: ComplexMatrix,
    k2: ComplexMatrix,
    k3: ComplexMatrix,
    k4: ComplexMatrix,
    stage: ComplexMatrix,
}

impl Workspace {
    fn new(dim: usize) -> Self {
        Self {
            k1: ComplexMatrix::zeros(dim, dim),
            k2: ComplexMatrix::zeros(dim, dim),
            k3: ComplexMatrix::zeros(dim, dim),
            k4: ComplexMatrix::zeros(dim, dim),
            stage: ComplexMatrix::zeros(dim, dim),
        }
    }
}

fn set_stage(stage: &mut ComplexMatrix, rho: &ComplexMatrix, k: &ComplexMatrix, c: f64) {
    for ((s, x), y) in stage.data_mut().iter_mut().zip(rho.data()).zip(k.data()) {
        *s = *x + c * *y;
    }
}

fn hermitize_in_place(m: &mut ComplexMatrix) {
    let dim = m.rows();
    let d = m.data_mut();
    for i in 0..dim {
        let x = d[i * dim + i];
        d[i * dim + i] = C64::new(x.re, 0.0);
        for j in (i + 1)..dim {
            let avg = 0.5 * (d[i * dim + j] + d[j * dim + i].conj());
            d[i * dim + j] = avg;
            d[j * dim + i] = avg.conj();
        }
    }
}

fn rk4_step(engine: &SegmentEngine, t: f64, dt: f64, rho: &mut ComplexMatrix, ws: &mut Workspace) {
    engine.rhs(t, rho, &mut ws.k1);
    set_stage(&mut ws.stage, rho, &ws.k1, 0.5 * dt);
    engine.rhs(t + 0.5 * dt, &ws.stage, &mut ws.k2);
    set_stage(&mut ws.stage, rho, &ws.k2, 0.5 * dt);
    engine.rhs(t + 0.5 * dt, &ws.stage, &mut ws.k3);
    set_stage(&mut ws.stage, rho, &ws.k3, dt);
    engine.rhs(t + dt, &ws.stage, &mut ws.k4);
    let w = dt / 6.0;
    for ((((x, k1), k2), k3), k4) in rho
        .data_mut()
        .iter_mut()
        .zip(ws.k1.data())
        .zip(ws.k2.data())
        .zip(ws.k3.data())
        .zip(ws.k4.data())
    {
        *x += w * (*k1 + 2.0 * *k2 + 2.0 * *k3 + *k4);
    }
    hermitize_in_place(rho);
}

/// Total population currently sitting in the top Fock level.
pub fn cutoff_population(rho: &ComplexMatrix, space: &HilbertSpace) -> f64 {
    let top = space.photon_cutoff();
    (0..QUTRIT_STATES)
        .map(|q| {
            let idx = q * space.cavity_dim() + top;
            rho.get(idx, idx).re
        })
        .sum()
}

/// Integration settings; `dt_override` is in seconds and must keep the
/// fastest oscillation under [`MAX_STEP_PHASE`] radians per step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub photon_cutoff: usize,
    pub dt_override: Option<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { photon_cutoff: DEFAULT_PHOTON_CUTOFF, dt_override: None }
    }
}

/// Step that resolves the fastest frequency in `params` with
/// [`STEPS_PER_FASTEST_CYCLE`] points per cycle.
pub fn default_dt(params: &CouplingParams) -> f64 {
    std::f64::consts::TAU / (STEPS_PER_FASTEST_CYCLE * params.max_angular_frequency())
}

impl SimConfig {
    pub fn effective_dt(&self, params: &CouplingParams) -> f64 {
        self.dt_override.unwrap_or_else(|| default_dt(params))
    }

    pub fn validate(&self, params: &CouplingParams) -> Result<()> {
        HilbertSpace::new(self.photon_cutoff)?;
        if self.photon_cutoff < DEFAULT_PHOTON_CUTOFF {
            return Err(Error::BadParameter {
                detail: format!(
                    "photon cutoff {} is below {DEFAULT_PHOTON_CUTOFF}, the smallest value \
                     that can hold all three register excitations",
                    self.photon_cutoff
                ),
            });
        }
        if let Some(dt) = self.dt_override {
            if !dt.is_finite() || dt <= 0.0 {
                return Err(Error::BadParameter {
                    detail: format!("dt override must be positive and finite, got {dt}"),
                });
            }
            let phase = dt * params.max_angular_frequency();
            if phase > MAX_STEP_PHASE {
                return Err(Error::BadParameter {
                    detail: format!(
                        "dt override of {dt:.3e} s advances the fastest oscillation by \
                         {phase:.3} rad per step, above the {MAX_STEP_PHASE} rad limit"
                    ),
                });
            }
        }
        Ok(())
    }
}

/// Diagnostics of a single integrated segment.
#[derive(Clone, Copy, Debug)]
pub struct SegmentReport {
    pub steps: usize,
    pub max_cutoff_population: f64,
}

/// Integrate `rho` through one pulse segment in place. The requested
/// `dt` is rounded down so an integer number of steps covers the
/// duration exactly.
pub fn evolve_segment(
    rho: &mut ComplexMatrix,
    segment: &PulseSegment,
    params: &CouplingParams,
    noise: &NoiseParams,
    space: &HilbertSpace,
    dt: f64,
) -> Result<SegmentReport> {
    if rho.rows() != space.dim() || rho.cols() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), got: rho.rows() });
    }
    if !(segment.duration > 0.0 && segment.duration.is_finite()) {
        return Err(Error::BadParameter {
            detail: format!("segment duration must be positive, got {}", segment.duration),
        });
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::BadParameter {
            detail: format!("integration step must be positive, got {dt}"),
        });
    }
    let steps = (segment.duration / dt).ceil().max(1.0) as usize;
    let h = segment.duration / steps as f64;

    let engine = SegmentEngine::new(segment, params, noise, space);
    let mut ws = Workspace::new(space.dim());
    let mut max_cutoff_population = cutoff_population(rho, space);
    for i in 0..steps {
        rk4_step(&engine, i as f64 * h, h, rho, &mut ws);
        max_cutoff_population = max_cutoff_population.max(cutoff_population(rho, space));
    }
    let trace = rho.trace();
    if !trace.re.is_finite() {
        return Err(Error::CorruptedState {
            detail: format!("state trace became non-finite in segment '{}'", segment.label),
        });
    }
    Ok(SegmentReport { steps, max_cutoff_population })
}

/// Outcome of simulating one joint operation.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SimResult {
    pub op: JointOpId,
    pub b0: f64,
    pub b1: f64,
    /// Overlap of the final state with the ideal closed-circuit output.
    pub fidelity: f64,
    pub trace_error: f64,
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
    /// Worst top-Fock-level population seen at any integration step.
    pub cutoff_population: f64,
    pub wall_time_s: f64,
}

impl SimResult {
    /// True when the truncation cannot be trusted.
    pub fn cutoff_flagged(&self) -> bool {
        self.cutoff_population > CUTOFF_POPULATION_LIMIT
    }
}

fn layer_unitary(layer: &InstantaneousLayer, space: &HilbertSpace) -> ComplexMatrix {
    layer.qutrit_unitary().tensor(&ComplexMatrix::identity(space.cavity_dim()))
}

/// Ideal closed-circuit output of `op`, embedded in the full register
/// with the cavity in vacuum.
pub fn embed_ideal_output(op: JointOpId, space: &HilbertSpace) -> StateVector {
    let qubit_state = ideal_joint_output(op);
    let mut amps = vec![C64::new(0.0, 0.0); space.dim()];
    for m in 0..8 {
        let t = [m >> 2 & 1, m >> 1 & 1, m & 1];
        amps[space.index(t, 0)] = qubit_state.amplitude(m);
    }
    StateVector::new(amps).expect("ideal output is normalized")
}

/// Diagonal total-excitation-number operator `a†a + Σ_j (P1_j + 2·P2_j)`.
pub fn excitation_number(space: &HilbertSpace) -> ComplexMatrix {
    ComplexMatrix::from_fn(space.dim(), space.dim(), |i, j| {
        if i != j {
            return C64::new(0.0, 0.0);
        }
        let (t, p) = space.levels(i);
        C64::new((p + t.iter().sum::<usize>()) as f64, 0.0)
    })
}

/// Simulate one joint operation from `|000⟩⊗|0⟩` through its full pulse
/// schedule and score it against the ideal output.
pub fn run_joint_op(
    op: JointOpId,
    params: &CouplingParams,
    noise: &NoiseParams,
    config: &SimConfig,
) -> Result<SimResult> {
    run_joint_op_with_state(op, params, noise, config).map(|(result, _)| result)
}

/// Same as [`run_joint_op`] but also hands back the final state.
pub fn run_joint_op_with_state(
    op: JointOpId,
    params: &CouplingParams,
    noise: &NoiseParams,
    config: &SimConfig,
) -> Result<(SimResult, DensityMatrix)> {
    params.validate()?;
    noise.validate()?;
    config.validate(params)?;
    #[cfg(not(target_arch = "wasm32"))]
    let started = std::time::Instant::now();

    let space = HilbertSpace::new(config.photon_cutoff)?;
    let schedule = compile_joint_op(op, params)?;
    let dt = config.effective_dt(params);

    let mut rho = ComplexMatrix::zeros(space.dim(), space.dim());
    rho.set(0, 0, C64::new(1.0, 0.0));
    let mut max_cutoff_population: f64 = 0.0;
    for item in &schedule.items {
        match item {
            ScheduleItem::Layer(layer) => {
                let u = layer_unitary(layer, &space);
                rho = u.mul(&rho).mul(&u.dagger());
            }
            ScheduleItem::Segment(segment) => {
                let report = evolve_segment(&mut rho, segment, params, noise, &space, dt)?;
                max_cutoff_population = max_cutoff_population.max(report.max_cutoff_population);
            }
        }
    }

    let trace_error = (rho.trace().re - 1.0).abs();
    let hermiticity_error = rho.hermiticity_error();
    let min_eigenvalue = rho.min_eigenvalue_hermitian();
    let ideal = embed_ideal_output(op, &space);
    let state = DensityMatrix::new_unchecked(rho);
    let fidelity = state_fidelity(&ideal, &state)?;

    #[cfg(not(target_arch = "wasm32"))]
    let wall_time_s = started.elapsed().as_secs_f64();
    #[cfg(target_arch = "wasm32")]
    let wall_time_s = f64::NAN;

    Ok((
        SimResult {
            op,
            b0: params.b0,
            b1: params.b1,
            fidelity,
            trace_error,
            hermiticity_error,
            min_eigenvalue,
            cutoff_population: max_cutoff_population,
            wall_time_s,
        },
        state,
    ))
}

/// Detuning ratios swept by default: 6, 8, …, 30.
pub fn default_b0_sweep() -> Vec<f64> {
    (0..13).map(|i| 6.0 + 2.0 * i as f64).collect()
}

/// Run every (operation, b0) pair, ops outermost, preserving order. The
/// integration step is re-derived per point unless overridden, since the
/// fastest frequency grows with b0.
pub fn sweep_b0(
    ops: &[JointOpId],
    b0_values: &[f64],
    params: &CouplingParams,
    noise: &NoiseParams,
    config: &SimConfig,
) -> Result<Vec<SimResult>> {
    let jobs: Vec<(JointOpId, f64)> = ops
        .iter()
        .flat_map(|&op| b0_values.iter().map(move |&b0| (op, b0)))
        .collect();
    let run = |&(op, b0): &(JointOpId, f64)| run_joint_op(op, &params.with_b0(b0), noise, config);
    #[cfg(feature = "parallel")]
    let results = jobs.par_iter().map(run).collect();
    #[cfg(not(feature = "parallel"))]
    let results = jobs.iter().map(run).collect();
    results
}

/// Dense segment Hamiltonian at segment time `t`; reference
/// implementation of the model the integrator uses in sparse form.
pub fn build_segment_hamiltonian(
    segment: &PulseSegment,
    t: f64,
    params: &CouplingParams,
    space: &HilbertSpace,
) -> ComplexMatrix {
    let h = SegmentHamiltonian::new(segment, params, space);
    let dim = space.dim();
    let res = h.resonant.to_dense(dim);
    let mut out = res.add(&res.dagger()).scale(C64::new(h.g_res, 0.0));
    if h.g_sp != 0.0 {
        let sp = h.spurious.to_dense(dim);
        let c = C64::from_polar(h.g_sp, -h.delta * t);
        out = out.add(&sp.scale(c)).add(&sp.dagger().scale(c.conj()));
    }
    out
}

/// Dense textbook master-equation right-hand side
/// `−i[H,ρ] + Σ γ·(ΛρΛ† − ½{Λ†Λ, ρ})`.
pub fn lindblad_rhs(
    rho: &ComplexMatrix,
    hamiltonian: &ComplexMatrix,
    noise: &NoiseParams,
    space: &HilbertSpace,
) -> ComplexMatrix {
    let dim = space.dim();
    let mut out = hamiltonian
        .mul(rho)
        .sub(&rho.mul(hamiltonian))
        .scale(C64::new(0.0, -1.0));
    for (rate, op) in NoiseModel::new(noise, space).jumps {
        let l = op.to_dense(dim);
        let ld = l.dagger();
        let ldl = ld.mul(&l);
        let sandwich = l.mul(rho).mul(&ld);
        let anti = ldl.mul(rho).add(&rho.mul(&ldl));
        out = out
            .add(&sandwich.scale(C64::new(rate, 0.0)))
            .sub(&anti.scale(C64::new(0.5 * rate, 0.0)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::expectation;
    use crate::pulse::compile_cp;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const PI: f64 = std::f64::consts::PI;

    fn space3() -> HilbertSpace {
        HilbertSpace::new(3).unwrap()
    }

    fn cp_segments(params: &CouplingParams) -> Vec<PulseSegment> {
        compile_cp(1, 2, params.g01, params.g12)
            .unwrap()
            .segments()
            .cloned()
            .collect()
    }

    fn random_hermitian_state(dim: usize, seed: u64) -> ComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = ComplexMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                m.set(i, j, C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            }
        }
        let m = m.mul(&m.dagger());
        let trace = m.trace().re;
        m.scale(C64::new(1.0 / trace, 0.0))
    }

    fn pure_state(amps: &[(usize, C64)], dim: usize) -> StateVector {
        let mut v = vec![C64::new(0.0, 0.0); dim];
        for &(i, a) in amps {
            v[i] = a;
        }
        StateVector::new(v).unwrap()
    }

    #[test]
    fn indexing_round_trips() {
        let space = space3();
        assert_eq!(space.dim(), 108);
        for idx in 0..space.dim() {
            let (t, p) = space.levels(idx);
            assert_eq!(space.index(t, p), idx);
        }
        assert_eq!(space.index([0, 0, 0], 1), 1);
        assert_eq!(space.index([1, 0, 0], 0), 36);
    }

    #[test]
    fn segment_hamiltonian_matrix_elements() {
        let params = CouplingParams::default();
        let space = space3();
        let segs = cp_segments(&params);

        let h0 = build_segment_hamiltonian(&segs[0], 0.0, &params, &space);
        assert!(h0.is_hermitian(1e-9));
        // resonant 0↔1 exchange on qutrit 1 with one photon appearing
        let el = h0.get(space.index([0, 0, 0], 1), space.index([1, 0, 0], 0));
        assert!((el - C64::new(params.g01, 0.0)).norm() < 1e-9);
        // spurious 1↔2 exchange carries the detuning phase
        let t = 3.7e-9;
        let ht = build_segment_hamiltonian(&segs[0], t, &params, &space);
        let el = ht.get(space.index([1, 0, 0], 1), space.index([2, 0, 0], 0));
        let expected = C64::from_polar(params.g12_spurious, -params.delta12() * t);
        assert!((el - expected).norm() < 1e-6);

        // middle segment drives 1↔2 on qutrit 2 resonantly
        let h1 = build_segment_hamiltonian(&segs[1], 0.0, &params, &space);
        let el = h1.get(space.index([0, 1, 0], 1), space.index([0, 2, 0], 0));
        assert!((el - C64::new(params.g12, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn hamiltonian_conserves_excitation_number() {
        let params = CouplingParams::default();
        let space = space3();
        let n = excitation_number(&space);
        for seg in &cp_segments(&params) {
            for &t in &[0.0, 1.3e-9, 8.9e-9] {
                let h = build_segment_hamiltonian(seg, t, &params, &space);
                let comm = h.mul(&n).sub(&n.mul(&h));
                assert_eq!(comm.max_abs(), 0.0);
            }
        }
    }

    #[test]
    fn spurious_free_hamiltonian_is_time_independent() {
        let params = CouplingParams::default().without_spurious();
        let space = space3();
        let seg = &cp_segments(&params)[0];
        let h0 = build_segment_hamiltonian(seg, 0.0, &params, &space);
        let h1 = build_segment_hamiltonian(seg, 5.0e-9, &params, &space);
        assert_eq!(h0.max_abs_diff(&h1), 0.0);
    }

    #[test]
    fn rhs_is_traceless_and_hermitian() {
        let params = CouplingParams::default();
        let noise = NoiseParams::default();
        let space = space3();
        let seg = &cp_segments(&params)[0];
        let rho = random_hermitian_state(space.dim(), 7);
        let h = build_segment_hamiltonian(seg, 2.0e-9, &params, &space);
        let rhs = lindblad_rhs(&rho, &h, &noise, &space);
        let scale = rhs.max_abs();
        assert!(rhs.trace().norm() < 1e-12 * scale);
        assert!(rhs.hermiticity_error() < 1e-12 * scale);
    }

    #[test]
    fn zero_noise_rhs_is_the_commutator() {
        let params = CouplingParams::default();
        let space = space3();
        let seg = &cp_segments(&params)[1];
        let rho = random_hermitian_state(space.dim(), 11);
        let h = build_segment_hamiltonian(seg, 1.0e-9, &params, &space);
        let rhs = lindblad_rhs(&rho, &h, &NoiseParams::zero(), &space);
        let comm = h.mul(&rho).sub(&rho.mul(&h)).scale(C64::new(0.0, -1.0));
        assert!(rhs.max_abs_diff(&comm) < 1e-12 * comm.max_abs().max(1.0));
    }

    #[test]
    fn decay_rates_match_the_channel_definitions() {
        let noise = NoiseParams::default();
        let space = space3();
        let dim = space.dim();
        let h = ComplexMatrix::zeros(dim, dim);

        // two photons decay at 2κ
        let rho = pure_state(&[(space.index([0, 0, 0], 2), C64::new(1.0, 0.0))], dim).outer();
        let rhs = lindblad_rhs(&rho, &h, &noise, &space);
        let photon_number = ComplexMatrix::from_fn(dim, dim, |i, j| {
            if i == j {
                C64::new(space.levels(i).1 as f64, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let dn = expectation(&photon_number, &rhs);
        assert!((dn + 2.0 * noise.kappa).abs() < 1e-6 * noise.kappa);

        // level 1 of qutrit 1 depletes at γ10
        let rho = pure_state(&[(space.index([1, 0, 0], 0), C64::new(1.0, 0.0))], dim).outer();
        let rhs = lindblad_rhs(&rho, &h, &noise, &space);
        let idx = space.index([1, 0, 0], 0);
        assert!((rhs.get(idx, idx).re + noise.gamma10).abs() < 1e-6 * noise.gamma10);

        // a 0↔1 coherence decays at (γ10 + γφ1)/2
        let psi = pure_state(
            &[
                (space.index([0, 0, 0], 0), C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)),
                (space.index([1, 0, 0], 0), C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)),
            ],
            dim,
        );
        let rho = psi.outer();
        let rhs = lindblad_rhs(&rho, &h, &noise, &space);
        let expected = -0.5 * (noise.gamma10 + noise.gamma_phi1) * rho.get(0, idx).re;
        assert!((rhs.get(0, idx).re - expected).abs() < 1e-6 * expected.abs());

        // level 2 decays through both channels: γ21 + γ20
        let rho = pure_state(&[(space.index([2, 0, 0], 0), C64::new(1.0, 0.0))], dim).outer();
        let rhs = lindblad_rhs(&rho, &h, &noise, &space);
        let idx = space.index([2, 0, 0], 0);
        let total = noise.gamma21 + noise.gamma20;
        assert!((rhs.get(idx, idx).re + total).abs() < 1e-6 * total);
    }

    #[test]
    fn engine_matches_the_dense_reference() {
        let params = CouplingParams::default();
        let noise = NoiseParams::default();
        for cutoff in [1, 3] {
            let space = HilbertSpace::new(cutoff).unwrap();
            for (si, seg) in cp_segments(&params).iter().enumerate().take(2) {
                let engine = SegmentEngine::new(seg, &params, &noise, &space);
                let rho = random_hermitian_state(space.dim(), 100 + si as u64);
                let t = 2.4e-9;
                let mut fast = ComplexMatrix::zeros(space.dim(), space.dim());
                engine.rhs(t, &rho, &mut fast);
                let h = build_segment_hamiltonian(seg, t, &params, &space);
                let dense = lindblad_rhs(&rho, &h, &noise, &space);
                assert!(fast.max_abs_diff(&dense) < 1e-11 * dense.max_abs());
            }
        }
    }

    #[test]
    fn engine_matches_the_dense_reference_at_unit_scale() {
        let params = CouplingParams {
            g01: 1.3,
            g01_spurious: 0.4,
            g12: 1.1,
            g12_spurious: 0.7,
            b0: 2.0,
            b1: 1.5,
        };
        let noise = NoiseParams {
            kappa: 0.31,
            gamma21: 0.11,
            gamma20: 0.05,
            gamma10: 0.23,
            gamma_phi2: 0.17,
            gamma_phi1: 0.13,
        };
        let space = HilbertSpace::new(2).unwrap();
        let seg = PulseSegment {
            active_qutrit: 2,
            transition: Transition::E12,
            duration: 1.0,
            label: "unit-scale".into(),
        };
        let engine = SegmentEngine::new(&seg, &params, &noise, &space);
        let rho = random_hermitian_state(space.dim(), 42);
        let mut fast = ComplexMatrix::zeros(space.dim(), space.dim());
        engine.rhs(0.8, &rho, &mut fast);
        let h = build_segment_hamiltonian(&seg, 0.8, &params, &space);
        let dense = lindblad_rhs(&rho, &h, &noise, &space);
        assert!(fast.max_abs_diff(&dense) < 1e-13);
    }

    /// With qutrits 2 and 3 pinned to `|0⟩` the dynamics closes on the
    /// 12-dim qutrit-1 ⊗ cavity subspace. There the full right-hand side
    /// can be checked against an independently assembled row-major
    /// vectorized superoperator, `vec(AXB) = (A ⊗ Bᵀ)·vec(X)`.
    #[test]
    fn dense_rhs_matches_a_vectorized_superoperator_on_the_12_dim_subspace() {
        let params = CouplingParams {
            g01: 1.3,
            g01_spurious: 0.4,
            g12: 1.1,
            g12_spurious: 0.7,
            b0: 2.0,
            b1: 1.5,
        };
        let noise = NoiseParams {
            kappa: 0.31,
            gamma21: 0.11,
            gamma20: 0.05,
            gamma10: 0.23,
            gamma_phi2: 0.17,
            gamma_phi1: 0.13,
        };
        let space = space3();
        let sub: Vec<usize> =
            (0..3).flat_map(|l| (0..4).map(move |p| (l, p))).map(|(l, p)| space.index([l, 0, 0], p)).collect();
        assert_eq!(sub.len(), 12);

        let mut rho12 = random_hermitian_state(12, 5);
        rho12 = rho12.hermitize();
        let mut rho = ComplexMatrix::zeros(space.dim(), space.dim());
        for (i, &a) in sub.iter().enumerate() {
            for (j, &b) in sub.iter().enumerate() {
                rho.set(a, b, rho12.get(i, j));
            }
        }

        let seg = PulseSegment {
            active_qutrit: 1,
            transition: Transition::G01,
            duration: 1.0,
            label: "subspace".into(),
        };
        let t = 0.6;
        let h = build_segment_hamiltonian(&seg, t, &params, &space);
        let rhs = lindblad_rhs(&rho, &h, &noise, &space);

        // the subspace is invariant, so nothing leaks out of its block
        for a in 0..space.dim() {
            for b in 0..space.dim() {
                if !(sub.contains(&a) && sub.contains(&b)) {
                    assert!(rhs.get(a, b).norm() <= 1e-15);
                }
            }
        }

        let h12 = ComplexMatrix::from_fn(12, 12, |i, j| h.get(sub[i], sub[j]));
        let transpose =
            |m: &ComplexMatrix| ComplexMatrix::from_fn(m.rows(), m.cols(), |i, j| m.get(j, i));
        let id3 = ComplexMatrix::identity(3);
        let id4 = ComplexMatrix::identity(4);
        let id12 = ComplexMatrix::identity(12);
        let qutrit_op = |to: usize, from: usize| {
            let mut m = ComplexMatrix::zeros(3, 3);
            m.set(to, from, C64::new(1.0, 0.0));
            m.tensor(&id4)
        };
        let mut ladder = ComplexMatrix::zeros(4, 4);
        for p in 1..4 {
            ladder.set(p - 1, p, C64::new((p as f64).sqrt(), 0.0));
        }
        let jumps12 = [
            (noise.kappa, id3.tensor(&ladder)),
            (noise.gamma21, qutrit_op(1, 2)),
            (noise.gamma20, qutrit_op(0, 2)),
            (noise.gamma10, qutrit_op(0, 1)),
            (noise.gamma_phi2, qutrit_op(2, 2)),
            (noise.gamma_phi1, qutrit_op(1, 1)),
        ];

        let minus_i = C64::new(0.0, -1.0);
        let mut superop = h12
            .tensor(&id12)
            .scale(minus_i)
            .add(&id12.tensor(&transpose(&h12)).scale(-minus_i));
        for (rate, l) in &jumps12 {
            let ld = l.dagger();
            let ldl = ld.mul(l);
            let half = C64::new(-0.5 * rate, 0.0);
            superop = superop
                .add(&l.tensor(&transpose(&ld)).scale(C64::new(*rate, 0.0)))
                .add(&ldl.tensor(&id12).scale(half))
                .add(&id12.tensor(&transpose(&ldl)).scale(half));
        }

        let flat = superop.mul_vec(rho12.data());
        for i in 0..12 {
            for j in 0..12 {
                let direct = rhs.get(sub[i], sub[j]);
                assert!((direct - flat[i * 12 + j]).norm() < 1e-12);
            }
        }
    }

    /// Closed-system checks of the three resonant steps, each against a
    /// superposition with the invariant `|000,0⟩` so relative phases are
    /// observable.
    #[test]
    fn resonant_steps_produce_the_advertised_maps() {
        let params = CouplingParams::default().without_spurious();
        let noise = NoiseParams::zero();
        let space = HilbertSpace::new(1).unwrap();
        let dim = space.dim();
        // a quarter of the default step, for phase checks at the 1e-9 level
        let dt = default_dt(&params) / 4.0;
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let amp = C64::new(r, 0.0);

        let check = |seg: &PulseSegment, start: StateVector, want: StateVector| {
            let mut rho = start.outer();
            evolve_segment(&mut rho, seg, &params, &noise, &space, dt).unwrap();
            let f = state_fidelity(&want, &DensityMatrix::new_unchecked(rho)).unwrap();
            assert!(f > 1.0 - 1e-9, "fidelity {f} for segment {}", seg.label);
        };

        let half_swap = PulseSegment {
            active_qutrit: 1,
            transition: Transition::G01,
            duration: PI / (2.0 * params.g01),
            label: "step (i)".into(),
        };
        check(
            &half_swap,
            pure_state(&[(0, amp), (space.index([1, 0, 0], 0), amp)], dim),
            pure_state(&[(0, amp), (space.index([0, 0, 0], 1), C64::new(0.0, -r))], dim),
        );

        let full_cycle = PulseSegment {
            active_qutrit: 2,
            transition: Transition::E12,
            duration: PI / params.g12,
            label: "step (ii)".into(),
        };
        check(
            &full_cycle,
            pure_state(&[(0, amp), (space.index([0, 1, 0], 1), amp)], dim),
            pure_state(&[(0, amp), (space.index([0, 1, 0], 1), C64::new(-r, 0.0))], dim),
        );

        let return_swap = PulseSegment {
            active_qutrit: 1,
            transition: Transition::G01,
            duration: 3.0 * PI / (2.0 * params.g01),
            label: "step (iii)".into(),
        };
        check(
            &return_swap,
            pure_state(&[(0, amp), (space.index([0, 0, 0], 1), amp)], dim),
            pure_state(&[(0, amp), (space.index([1, 0, 0], 0), C64::new(0.0, r))], dim),
        );

        // a spectator configuration without a photon never moves
        check(
            &full_cycle,
            pure_state(&[(0, amp), (space.index([1, 0, 0], 0), amp)], dim),
            pure_state(&[(0, amp), (space.index([1, 0, 0], 0), amp)], dim),
        );
    }

    #[test]
    fn closed_run_reproduces_the_ideal_output() {
        let params = CouplingParams::default().without_spurious();
        let config = SimConfig {
            photon_cutoff: DEFAULT_PHOTON_CUTOFF,
            dt_override: Some(default_dt(&params) / 4.0),
        };
        let space = HilbertSpace::new(config.photon_cutoff).unwrap();
        for op in JointOpId::ALL {
            let (result, state) =
                run_joint_op_with_state(op, &params, &NoiseParams::zero(), &config).unwrap();
            assert!(result.fidelity > 1.0 - 1e-9, "{op}: fidelity {}", result.fidelity);
            assert!(result.trace_error < 1e-10);
            // RK4 is not exactly a positive map; the residual negative
            // eigenvalue shrinks as dt⁴ and sits near -2.5e-9 here
            assert!(result.min_eigenvalue > -1e-8);
            assert!(result.hermiticity_error < 1e-14);
            let pops = state.populations();
            let vacuum: f64 = (0..QUTRIT_STATES).map(|q| pops[q * space.cavity_dim()]).sum();
            assert!(vacuum > 1.0 - 1e-9, "{op}: cavity vacuum population {vacuum}");
        }
    }

    #[test]
    fn excitation_number_is_conserved_during_closed_segments() {
        let params = CouplingParams::default();
        let space = space3();
        let n = excitation_number(&space);
        let dt = default_dt(&params);

        let mut amps = vec![C64::new(0.0, 0.0); space.dim()];
        for m in 0..8usize {
            amps[space.index([m >> 2 & 1, m >> 1 & 1, m & 1], 0)] =
                C64::new(1.0 / 8f64.sqrt(), 0.0);
        }
        let mut rho = StateVector::new(amps).unwrap().outer();
        for seg in &cp_segments(&params) {
            let before = expectation(&n, &rho);
            evolve_segment(&mut rho, seg, &params, &NoiseParams::zero(), &space, dt).unwrap();
            let after = expectation(&n, &rho);
            assert!((after - before).abs() < 1e-10);
        }
    }

    #[test]
    fn repeated_runs_are_bitwise_identical() {
        let params = CouplingParams::default();
        let noise = NoiseParams::zero();
        let config = SimConfig::default();
        let a = run_joint_op(JointOpId::U1, &params, &noise, &config).unwrap();
        let b = run_joint_op(JointOpId::U1, &params, &noise, &config).unwrap();
        assert_eq!(a.fidelity, b.fidelity);
        assert_eq!(a.min_eigenvalue, b.min_eigenvalue);
        assert_eq!(a.cutoff_population, b.cutoff_population);
    }

    #[test]
    fn embedded_ideal_output_places_amplitudes_at_vacuum() {
        let space = space3();
        let psi = embed_ideal_output(JointOpId::U1, &space);
        let half = 0.5;
        assert!((psi.amplitude(space.index([0, 0, 1], 0)) - C64::new(-half, 0.0)).norm() < 1e-12);
        assert!((psi.amplitude(space.index([0, 1, 1], 0)) - C64::new(half, 0.0)).norm() < 1e-12);
        assert!((psi.amplitude(space.index([1, 0, 1], 0)) - C64::new(half, 0.0)).norm() < 1e-12);
        assert!((psi.amplitude(space.index([1, 1, 1], 0)) - C64::new(half, 0.0)).norm() < 1e-12);
        assert!(psi.amplitude(space.index([0, 0, 0], 1)).norm() < 1e-15);
    }

    #[test]
    fn config_validation_rejects_bad_settings() {
        let params = CouplingParams::default();
        assert!(SimConfig { photon_cutoff: 0, dt_override: None }.validate(&params).is_err());
        assert!(SimConfig { photon_cutoff: 2, dt_override: None }.validate(&params).is_err());
        assert!(SimConfig { photon_cutoff: 99, dt_override: None }.validate(&params).is_err());
        assert!(SimConfig { photon_cutoff: 3, dt_override: Some(-1.0) }
            .validate(&params)
            .is_err());
        let coarse = 1.0 / params.max_angular_frequency();
        assert!(SimConfig { photon_cutoff: 3, dt_override: Some(coarse) }
            .validate(&params)
            .is_err());
        let fine = default_dt(&params) / 2.0;
        assert!(SimConfig { photon_cutoff: 3, dt_override: Some(fine) }
            .validate(&params)
            .is_ok());
    }

    #[test]
    fn default_step_respects_the_phase_cap() {
        let params = CouplingParams::default();
        let phase = default_dt(&params) * params.max_angular_frequency();
        assert!(phase <= MAX_STEP_PHASE);
        assert!(phase > 0.04);
    }

    #[test]
    fn default_sweep_grid_is_even_ratios_six_to_thirty() {
        let grid = default_b0_sweep();
        assert_eq!(grid.len(), 13);
        assert_eq!(grid[0], 6.0);
        assert_eq!(grid[12], 30.0);
        assert!(grid.windows(2).all(|w| w[1] - w[0] == 2.0));
    }
}
