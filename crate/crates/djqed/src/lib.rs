//! Three-qubit refined Deutsch-Jozsa algorithm in circuit QED.
//!
//! The crate covers the full path from Boolean functions to open-system
//! dynamics:
//!
//! * [`boolean`]: 3-bit Boolean functions, their algebraic normal forms,
//!   and the balanced-function catalogue.
//! * [`synth`]: synthesis of every balanced-function phase oracle from
//!   single-qubit `σz`, controlled-phase, and two-target controlled-phase
//!   gates.
//! * [`circuit`]: ideal (qubit-level) execution of the algorithm and the
//!   constant/balanced decision rule.
//! * [`pulse`]: lowering of entangling gates to resonant qutrit-cavity
//!   pulse schedules.
//! * [`lindblad`]: master-equation integration of those schedules with
//!   cavity decay, qutrit relaxation, and dephasing.
//! * [`params`]: the device parameter set shared by the last two.

pub mod boolean;
pub mod circuit;
pub mod linalg;
pub mod lindblad;
pub mod params;
pub mod pulse;
pub mod synth;

pub use boolean::{balanced_set, canonical_balanced_set, AnfForm, OracleMatrix, TruthTable};
pub use circuit::{
    dj_decision, ideal_joint_output, run_dj, DjDecision, JointOpId, MeasurementDistribution,
};
pub use linalg::{
    apply_unitary, state_fidelity, tensor_product, ComplexMatrix, DensityMatrix, StateVector,
};
pub use lindblad::{
    build_segment_hamiltonian, default_b0_sweep, default_dt, evolve_segment, lindblad_rhs,
    run_joint_op, run_joint_op_with_state, sweep_b0, HilbertSpace, SimConfig, SimResult,
};
pub use params::{CouplingParams, NoiseParams};
pub use pulse::{
    compile_cp, compile_joint_op, compile_two_target, InstantaneousLayer, PulseSegment, Schedule,
    ScheduleItem, Transition,
};
pub use synth::{
    brute_force_synthesize, classify_all, gate_matrix, gate_matrix_qutrit, synthesize,
    synthesize_all, Decomposition, GateOp,
};

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("state vector norm {norm} differs from 1 beyond tolerance")]
    NotNormalized { norm: f64 },

    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NonUnitary { deviation: f64 },

    #[error("not a balanced function: {ones} ones out of {size} entries")]
    NotBalanced { ones: usize, size: usize },

    #[error("bad truth table: {detail}")]
    BadTruthTable { detail: String },

    #[error("invalid qubit index {index}; expected 1..=3")]
    BadQubitIndex { index: usize },

    #[error("invalid parameter: {detail}")]
    BadParameter { detail: String },

    #[error("function is neither constant nor balanced")]
    PromiseViolation,

    #[error("synthesis failed: {detail}")]
    Synthesis { detail: String },

    #[error("state corrupted: {detail}")]
    CorruptedState { detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;
