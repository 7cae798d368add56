//! Lowering of entangling gates to resonant qutrit–cavity interaction
//! segments.
//!
//! A controlled-phase gate between qutrits j and k becomes three
//! segments: j swaps its excitation into the cavity over `π/(2·g01)`, k
//! picks up a sign through a full 1↔2 Rabi cycle over `π/g12`, and j
//! retrieves the excitation over `3π/(2·g01)` so the transfer phases
//! cancel. The two-target variant inserts a second full-cycle segment for
//! the extra target. Single-qubit layers are instantaneous and noiseless.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::circuit::JointOpId;
use crate::linalg::ComplexMatrix;
use crate::params::CouplingParams;
use crate::synth::{gate_matrix_qutrit, GateOp, QUBITS};
use crate::{Error, Result};

/// Which qutrit transition a segment drives resonantly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Transition {
    /// Cavity resonant with the 0↔1 transition of the active qutrit.
    G01,
    /// Cavity resonant with the 1↔2 transition of the active qutrit.
    E12,
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::G01 => "G01",
            Self::E12 => "E12",
        })
    }
}

/// One resonant interaction interval. Exactly one qutrit couples to the
/// cavity; the other two are detuned away entirely.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PulseSegment {
    pub active_qutrit: usize,
    pub transition: Transition,
    /// Seconds.
    pub duration: f64,
    pub label: String,
}

/// Zero-duration unitary layer of simultaneous single-qubit gates on the
/// qutrit register.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstantaneousLayer {
    gates: Vec<GateOp>,
    pub label: String,
}

impl InstantaneousLayer {
    pub fn hadamard_all() -> Self {
        Self {
            gates: (1..=QUBITS).map(GateOp::Hadamard).collect(),
            label: "H1 H2 H3".into(),
        }
    }

    pub fn sigma_z_set(qubits: &[usize]) -> Self {
        let label = qubits
            .iter()
            .map(|j| format!("sz{j}"))
            .collect::<Vec<_>>()
            .join(" ");
        Self { gates: qubits.iter().map(|&j| GateOp::SigmaZ(j)).collect(), label }
    }

    pub fn gates(&self) -> &[GateOp] {
        &self.gates
    }

    /// Dense 27×27 unitary on the qutrit register (identity on level 2).
    pub fn qutrit_unitary(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::identity(27);
        for g in &self.gates {
            m = m.mul(&gate_matrix_qutrit(g));
        }
        m
    }
}

/// Schedule element: a timed resonant segment or an instantaneous layer.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum ScheduleItem {
    Segment(PulseSegment),
    Layer(InstantaneousLayer),
}

/// Ordered pulse program; items execute first to last.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Schedule {
    pub items: Vec<ScheduleItem>,
    /// Label of the gate or joint operation this schedule realizes.
    pub source: String,
}

impl Schedule {
    pub fn segments(&self) -> impl Iterator<Item = &PulseSegment> {
        self.items.iter().filter_map(|item| match item {
            ScheduleItem::Segment(s) => Some(s),
            ScheduleItem::Layer(_) => None,
        })
    }

    pub fn segment_count(&self) -> usize {
        self.segments().count()
    }

    /// Total time spent in resonant segments; layers are instantaneous.
    pub fn total_duration(&self) -> f64 {
        self.segments().map(|s| s.duration).sum()
    }
}

fn check_qutrit(j: usize) -> Result<()> {
    if (1..=QUBITS).contains(&j) {
        Ok(())
    } else {
        Err(Error::BadQubitIndex { index: j })
    }
}

fn check_couplings(g01: f64, g12: f64) -> Result<()> {
    if g01 > 0.0 && g12 > 0.0 && g01.is_finite() && g12.is_finite() {
        Ok(())
    } else {
        Err(Error::BadParameter {
            detail: format!("couplings must be positive and finite, got g01 = {g01}, g12 = {g12}"),
        })
    }
}

fn segment(j: usize, transition: Transition, duration: f64, label: String) -> ScheduleItem {
    ScheduleItem::Segment(PulseSegment { active_qutrit: j, transition, duration, label })
}

/// Three-segment schedule for a controlled-phase gate between qutrits
/// `j` and `k`. Couplings are angular (rad/s).
pub fn compile_cp(j: usize, k: usize, g01: f64, g12: f64) -> Result<Schedule> {
    check_qutrit(j)?;
    check_qutrit(k)?;
    if j == k {
        return Err(Error::BadParameter {
            detail: format!("controlled-phase needs two distinct qutrits, got {j} twice"),
        });
    }
    check_couplings(g01, g12)?;
    let name = format!("C_{j}{k}");
    let items = vec![
        segment(j, Transition::G01, std::f64::consts::PI / (2.0 * g01), format!("{name} step (i)")),
        segment(k, Transition::E12, std::f64::consts::PI / g12, format!("{name} step (ii)")),
        segment(
            j,
            Transition::G01,
            3.0 * std::f64::consts::PI / (2.0 * g01),
            format!("{name} step (iii)"),
        ),
    ];
    Ok(Schedule { items, source: name })
}

/// Four-segment schedule for a two-target controlled-phase gate with
/// control `j` and targets `k`, `l`.
pub fn compile_two_target(j: usize, k: usize, l: usize, g01: f64, g12: f64) -> Result<Schedule> {
    check_qutrit(j)?;
    check_qutrit(k)?;
    check_qutrit(l)?;
    if j == k || j == l || k == l {
        return Err(Error::BadParameter {
            detail: format!("two-target gate needs three distinct qutrits, got {j},{k},{l}"),
        });
    }
    check_couplings(g01, g12)?;
    let name = format!("T_{j}{k}{l}");
    let items = vec![
        segment(j, Transition::G01, std::f64::consts::PI / (2.0 * g01), format!("{name} step (i)")),
        segment(k, Transition::E12, std::f64::consts::PI / g12, format!("{name} step (ii)")),
        segment(l, Transition::E12, std::f64::consts::PI / g12, format!("{name} step (iii)")),
        segment(
            j,
            Transition::G01,
            3.0 * std::f64::consts::PI / (2.0 * g01),
            format!("{name} step (iv)"),
        ),
    ];
    Ok(Schedule { items, source: name })
}

/// Full program for a joint operation: Hadamard layer, σz layer, the
/// entangling blocks in execution order (rightmost gate of the notation
/// first), and the closing Hadamard layer.
pub fn compile_joint_op(op: JointOpId, p: &CouplingParams) -> Result<Schedule> {
    p.validate()?;
    let mut items = vec![ScheduleItem::Layer(InstantaneousLayer::hadamard_all())];
    let mut sigma_z = Vec::new();
    let mut entangling = Vec::new();
    for g in op.oracle_gates() {
        match g {
            GateOp::SigmaZ(j) => sigma_z.push(j),
            GateOp::Cp { control, target } => {
                entangling.push(compile_cp(control, target, p.g01, p.g12)?)
            }
            GateOp::TwoTargetCp { control, targets: (k, l) } => {
                entangling.push(compile_two_target(control, k, l, p.g01, p.g12)?)
            }
            other => {
                return Err(Error::BadParameter {
                    detail: format!("unexpected gate {other} in oracle section"),
                })
            }
        }
    }
    sigma_z.sort_unstable();
    items.push(ScheduleItem::Layer(InstantaneousLayer::sigma_z_set(&sigma_z)));
    for block in entangling.into_iter().rev() {
        items.extend(block.items);
    }
    items.push(ScheduleItem::Layer(InstantaneousLayer::hadamard_all()));
    Ok(Schedule { items, source: op.label().into() })
}
