//! Ideal qubit-level execution of the refined constant-vs-balanced
//! algorithm: Hadamard the register, apply the phase oracle, Hadamard
//! again, and read the all-zeros probability.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::boolean::TruthTable;
use crate::linalg::{ComplexMatrix, StateVector};
use crate::synth::{gate_matrix, GateOp};
use crate::{Error, Result};

/// The three joint operations used as physical benchmarks, each a fixed
/// oracle conjugated by Hadamard layers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum JointOpId {
    U1,
    U2,
    U3,
}

impl JointOpId {
    pub const ALL: [Self; 3] = [Self::U1, Self::U2, Self::U3];

    pub fn label(self) -> &'static str {
        match self {
            Self::U1 => "U1",
            Self::U2 => "U2",
            Self::U3 => "U3",
        }
    }

    /// The balanced function whose oracle sits at the core of the
    /// operation.
    pub fn truth_table(self) -> TruthTable {
        let s = match self {
            Self::U1 => "01101010",
            Self::U2 => "00101110",
            Self::U3 => "00101011",
        };
        s.parse().expect("fixed table")
    }

    /// Diagonal oracle section in notation order (rightmost applied
    /// first).
    pub fn oracle_gates(self) -> Vec<GateOp> {
        match self {
            Self::U1 => vec![
                GateOp::Cp { control: 1, target: 2 },
                GateOp::SigmaZ(1),
                GateOp::SigmaZ(2),
                GateOp::SigmaZ(3),
            ],
            Self::U2 => vec![
                GateOp::TwoTargetCp { control: 2, targets: (1, 3) },
                GateOp::SigmaZ(1),
                GateOp::SigmaZ(2),
            ],
            Self::U3 => vec![
                GateOp::TwoTargetCp { control: 1, targets: (2, 3) },
                GateOp::Cp { control: 2, target: 3 },
                GateOp::SigmaZ(1),
                GateOp::SigmaZ(2),
            ],
        }
    }

    /// Full gate string in notation order: a Hadamard layer on each side
    /// of the oracle section.
    pub fn gate_string(self) -> Vec<GateOp> {
        let hadamards = [GateOp::Hadamard(1), GateOp::Hadamard(2), GateOp::Hadamard(3)];
        let mut gates = hadamards.to_vec();
        gates.extend(self.oracle_gates());
        gates.extend(hadamards);
        gates
    }
}

impl fmt::Display for JointOpId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for JointOpId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "U1" => Ok(Self::U1),
            "U2" => Ok(Self::U2),
            "U3" => Ok(Self::U3),
            other => Err(Error::BadParameter {
                detail: format!("unknown joint operation {other:?}; expected U1, U2, or U3"),
            }),
        }
    }
}

/// Constant-vs-balanced verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DjDecision {
    Constant,
    Balanced,
}

impl fmt::Display for DjDecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Constant => "constant",
            Self::Balanced => "balanced",
        })
    }
}

/// Measurement probabilities over the eight computational basis states,
/// index = `|x1x2x3⟩`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasurementDistribution {
    probabilities: [f64; 8],
}

impl MeasurementDistribution {
    pub fn new(probabilities: [f64; 8]) -> Result<Self> {
        let sum: f64 = probabilities.iter().sum();
        let in_range = probabilities.iter().all(|p| (0.0..=1.0).contains(p));
        if !in_range || (sum - 1.0).abs() > 1e-10 {
            return Err(Error::BadParameter {
                detail: format!("probabilities sum to {sum} or leave [0,1]"),
            });
        }
        Ok(Self { probabilities })
    }

    pub fn probabilities(&self) -> &[f64; 8] {
        &self.probabilities
    }

    pub fn p(&self, index: usize) -> f64 {
        self.probabilities[index]
    }

    /// Probability of the all-zeros outcome, the decision statistic.
    pub fn p000(&self) -> f64 {
        self.probabilities[0]
    }

    /// Seeded multinomial sampling for demonstration output; exact
    /// probabilities stay the reference elsewhere.
    pub fn sample_counts(&self, shots: u64, seed: u64) -> [u64; 8] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = [0u64; 8];
        for _ in 0..shots {
            let mut r: f64 = rng.gen();
            let mut outcome = 7;
            for (i, p) in self.probabilities.iter().enumerate() {
                if r < *p {
                    outcome = i;
                    break;
                }
                r -= p;
            }
            counts[outcome] += 1;
        }
        counts
    }
}

fn hadamard_layer() -> ComplexMatrix {
    gate_matrix(&GateOp::Hadamard(1))
        .mul(&gate_matrix(&GateOp::Hadamard(2)))
        .mul(&gate_matrix(&GateOp::Hadamard(3)))
}

/// Runs the algorithm on a promised constant-or-balanced function and
/// returns the exact outcome distribution.
pub fn run_dj(f: &TruthTable) -> Result<MeasurementDistribution> {
    if f.n() != 3 {
        return Err(Error::BadParameter {
            detail: format!("algorithm register is 3 qubits; function has {} bits", f.n()),
        });
    }
    if !f.is_constant() && !f.is_balanced() {
        return Err(Error::PromiseViolation);
    }
    let h3 = hadamard_layer();
    let oracle = f.oracle_matrix();
    let psi = StateVector::basis(8, 0).apply(&h3);
    let phased: Vec<_> = psi
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, a)| a * oracle.entry(i) as f64)
        .collect();
    let out = StateVector::new(phased)?.apply(&h3);
    let mut probabilities = [0.0; 8];
    for (p, a) in probabilities.iter_mut().zip(out.amplitudes()) {
        *p = a.norm_sqr().clamp(0.0, 1.0);
    }
    MeasurementDistribution::new(probabilities)
}

/// Thresholds the all-zeros probability: above means constant.
pub fn dj_decision(d: &MeasurementDistribution, threshold: f64) -> Result<DjDecision> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::BadParameter {
            detail: format!("threshold {threshold} outside (0,1)"),
        });
    }
    Ok(if d.p000() > threshold {
        DjDecision::Constant
    } else {
        DjDecision::Balanced
    })
}

/// Output state of a joint operation applied to `|000⟩`, computed by
/// composing its gate string.
pub fn ideal_joint_output(op: JointOpId) -> StateVector {
    let mut psi = StateVector::basis(8, 0);
    for g in op.gate_string().iter().rev() {
        psi = psi.apply(&gate_matrix(g));
    }
    psi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolean::balanced_set;
    use crate::synth::synthesize;
    use num_complex::Complex64 as C64;

    #[test]
    fn constant_functions_concentrate_on_zero() {
        for value in [false, true] {
            let f = TruthTable::constant(3, value).unwrap();
            let d = run_dj(&f).unwrap();
            assert!((d.p000() - 1.0).abs() <= 1e-12);
            assert_eq!(dj_decision(&d, 0.5).unwrap(), DjDecision::Constant);
        }
    }

    #[test]
    fn balanced_functions_miss_zero_entirely() {
        for f in balanced_set(3).unwrap() {
            let d = run_dj(&f).unwrap();
            assert!(d.p000() <= 1e-12, "p000 = {} for {f}", d.p000());
            assert_eq!(dj_decision(&d, 0.5).unwrap(), DjDecision::Balanced);
        }
    }

    #[test]
    fn promise_violation_is_rejected() {
        let f: TruthTable = "00000001".parse().unwrap();
        assert!(matches!(run_dj(&f), Err(Error::PromiseViolation)));
    }

    #[test]
    fn noisy_statistic_still_thresholds() {
        let d = MeasurementDistribution::new([0.03, 0.97, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(dj_decision(&d, 0.5).unwrap(), DjDecision::Balanced);
        assert!(dj_decision(&d, 1.0).is_err());
    }

    #[test]
    fn joint_op_tables_match_their_synthesized_gates() {
        for op in JointOpId::ALL {
            let d = synthesize(&op.truth_table()).unwrap();
            assert_eq!(d.gates(), op.oracle_gates(), "gate list for {op}");
        }
    }

    fn expected_amplitudes(op: JointOpId) -> [C64; 8] {
        let mut a = [C64::new(0.0, 0.0); 8];
        let half = 0.5;
        match op {
            JointOpId::U1 => {
                a[0b001] = C64::new(-half, 0.0);
                a[0b011] = C64::new(half, 0.0);
                a[0b101] = C64::new(half, 0.0);
                a[0b111] = C64::new(half, 0.0);
            }
            JointOpId::U2 => {
                a[0b001] = C64::new(-half, 0.0);
                a[0b011] = C64::new(half, 0.0);
                a[0b100] = C64::new(half, 0.0);
                a[0b110] = C64::new(half, 0.0);
            }
            JointOpId::U3 => {
                a[0b001] = C64::new(-half, 0.0);
                a[0b010] = C64::new(half, 0.0);
                a[0b100] = C64::new(half, 0.0);
                a[0b111] = C64::new(half, 0.0);
            }
        }
        a
    }

    #[test]
    fn ideal_outputs_match_fixed_amplitudes() {
        for op in JointOpId::ALL {
            let psi = ideal_joint_output(op);
            for (i, expect) in expected_amplitudes(op).into_iter().enumerate() {
                assert!(
                    (psi.amplitude(i) - expect).norm() <= 1e-12,
                    "{op} amplitude {i}: {} vs {expect}",
                    psi.amplitude(i)
                );
            }
        }
    }

    #[test]
    fn joint_ops_are_balanced_runs() {
        for op in JointOpId::ALL {
            let d = run_dj(&op.truth_table()).unwrap();
            assert!(d.p000() <= 1e-12);
        }
    }

    #[test]
    fn gate_strings_compose_to_unitaries() {
        for op in JointOpId::ALL {
            let mut m = ComplexMatrix::identity(8);
            for g in op.gate_string() {
                m = m.mul(&gate_matrix(&g));
            }
            assert!(m.is_unitary(1e-12));
        }
    }

    #[test]
    fn sampling_is_seeded_and_consistent() {
        let d = run_dj(&TruthTable::constant(3, false).unwrap()).unwrap();
        let a = d.sample_counts(1000, 7);
        let b = d.sample_counts(1000, 7);
        assert_eq!(a, b);
        assert_eq!(a[0], 1000);

        let u1 = run_dj(&JointOpId::U1.truth_table()).unwrap();
        let counts = u1.sample_counts(4000, 11);
        assert_eq!(counts.iter().sum::<u64>(), 4000);
        assert_eq!(counts[0], 0);
    }
}
