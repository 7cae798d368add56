//! Decomposition of balanced-function phase oracles over three qubits
//! into single-qubit σz gates, at most one controlled-phase gate, and at
//! most one two-target controlled-phase gate.
//!
//! All oracle-side gates are diagonal with ±1 entries, so decompositions
//! are verified in exact integer arithmetic.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::boolean::{canonical_balanced_set, TruthTable};
use crate::linalg::ComplexMatrix;
use crate::{Error, Result};

/// This module is specific to the three-qubit instance.
pub const QUBITS: usize = 3;

/// One gate on the three-qubit register. Qubit indices are 1-based.
///
/// `Cp` flips the sign of inputs where control and target are both 1; as a
/// matrix it is symmetric under swapping the two, and the stored form
/// keeps the declared control first. `TwoTargetCp` applies that phase from
/// the control to each of its two targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateOp {
    SigmaZ(usize),
    Hadamard(usize),
    Cp { control: usize, target: usize },
    TwoTargetCp { control: usize, targets: (usize, usize) },
    Oracle(TruthTable),
}

/// Value of `x_j` inside a basis index (`x1` most significant).
fn bit(index: usize, j: usize) -> bool {
    index >> (QUBITS - j) & 1 == 1
}

impl GateOp {
    /// Confirms index ranges and distinctness.
    pub fn validate(&self) -> Result<()> {
        let check = |j: usize| -> Result<()> {
            if (1..=QUBITS).contains(&j) {
                Ok(())
            } else {
                Err(Error::BadQubitIndex { index: j })
            }
        };
        match *self {
            GateOp::SigmaZ(j) | GateOp::Hadamard(j) => check(j),
            GateOp::Cp { control, target } => {
                check(control)?;
                check(target)?;
                if control == target {
                    return Err(Error::BadParameter {
                        detail: format!("Cp control and target are both {control}"),
                    });
                }
                Ok(())
            }
            GateOp::TwoTargetCp { control, targets: (k, l) } => {
                check(control)?;
                check(k)?;
                check(l)?;
                if control == k || control == l || k == l {
                    return Err(Error::BadParameter {
                        detail: format!("TwoTargetCp indices {control},{k},{l} not distinct"),
                    });
                }
                Ok(())
            }
            GateOp::Oracle(f) => {
                if f.n() == QUBITS {
                    Ok(())
                } else {
                    Err(Error::BadParameter {
                        detail: format!("oracle is on {} bits, expected {QUBITS}", f.n()),
                    })
                }
            }
        }
    }

    /// ±1 diagonal entry at `index` for diagonal gates; `None` for
    /// Hadamard.
    pub fn diagonal_sign(&self, index: usize) -> Option<i32> {
        let flip = match *self {
            GateOp::SigmaZ(j) => bit(index, j),
            GateOp::Cp { control, target } => bit(index, control) && bit(index, target),
            GateOp::TwoTargetCp { control, targets: (k, l) } => {
                let c = bit(index, control);
                (c && bit(index, k)) ^ (c && bit(index, l))
            }
            GateOp::Oracle(f) => f.value(index),
            GateOp::Hadamard(_) => return None,
        };
        Some(if flip { -1 } else { 1 })
    }

    pub fn is_diagonal(&self) -> bool {
        !matches!(self, GateOp::Hadamard(_))
    }
}

impl fmt::Display for GateOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GateOp::SigmaZ(j) => write!(f, "sz{j}"),
            GateOp::Hadamard(j) => write!(f, "H{j}"),
            GateOp::Cp { control, target } => write!(f, "C{control}{target}"),
            GateOp::TwoTargetCp { control, targets: (k, l) } => write!(f, "T{control}{k}{l}"),
            GateOp::Oracle(t) => write!(f, "O[{t}]"),
        }
    }
}

/// Dense 8×8 unitary of a gate on the qubit register.
pub fn gate_matrix(g: &GateOp) -> ComplexMatrix {
    g.validate().expect("invalid gate");
    if let GateOp::Hadamard(j) = *g {
        let h = 1.0 / 2.0f64.sqrt();
        let had = ComplexMatrix::from_fn(2, 2, |r, c| {
            C64::new(if r == 1 && c == 1 { -h } else { h }, 0.0)
        });
        let i2 = ComplexMatrix::identity(2);
        let mut m = if j == 1 { had.clone() } else { i2.clone() };
        for q in 2..=QUBITS {
            m = m.tensor(if q == j { &had } else { &i2 });
        }
        return m;
    }
    let diag: Vec<C64> = (0..1 << QUBITS)
        .map(|i| C64::new(g.diagonal_sign(i).unwrap() as f64, 0.0))
        .collect();
    ComplexMatrix::diagonal(&diag)
}

/// The same gate embedded on three qutrits (27×27): the qubit action on
/// levels {0,1}, identity on any component containing level 2.
pub fn gate_matrix_qutrit(g: &GateOp) -> ComplexMatrix {
    g.validate().expect("invalid gate");
    if let GateOp::Hadamard(j) = *g {
        let h = 1.0 / 2.0f64.sqrt();
        let had3 = ComplexMatrix::from_fn(3, 3, |r, c| match (r, c) {
            (0, 0) | (0, 1) | (1, 0) => C64::new(h, 0.0),
            (1, 1) => C64::new(-h, 0.0),
            (2, 2) => C64::new(1.0, 0.0),
            _ => C64::new(0.0, 0.0),
        });
        let i3 = ComplexMatrix::identity(3);
        let mut m = if j == 1 { had3.clone() } else { i3.clone() };
        for q in 2..=QUBITS {
            m = m.tensor(if q == j { &had3 } else { &i3 });
        }
        return m;
    }
    let dim = 3usize.pow(QUBITS as u32);
    let diag: Vec<C64> = (0..dim)
        .map(|q| {
            let digits = [q / 9 % 3, q / 3 % 3, q % 3];
            if digits.contains(&2) {
                C64::new(1.0, 0.0)
            } else {
                let index = digits[0] << 2 | digits[1] << 1 | digits[2];
                C64::new(g.diagonal_sign(index).unwrap() as f64, 0.0)
            }
        })
        .collect();
    ComplexMatrix::diagonal(&diag)
}

/// An oracle realized as a gate list, with its structural type:
/// 1 = σz only, 2 = σz + Cp, 3 = σz + TwoTargetCp, 4 = σz + both.
///
/// Gates are stored in notation order (rightmost applied first); since
/// every gate here is diagonal the order is presentational only.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    gates: Vec<GateOp>,
    type_class: u8,
    target: TruthTable,
}

impl Decomposition {
    fn assemble(gates: Vec<GateOp>, target: TruthTable) -> Result<Self> {
        let has_cp = gates.iter().any(|g| matches!(g, GateOp::Cp { .. }));
        let has_tt = gates.iter().any(|g| matches!(g, GateOp::TwoTargetCp { .. }));
        let type_class = match (has_tt, has_cp) {
            (false, false) => 1,
            (false, true) => 2,
            (true, false) => 3,
            (true, true) => 4,
        };
        let d = Self { gates, type_class, target };
        d.verify()?;
        Ok(d)
    }

    pub fn gates(&self) -> &[GateOp] {
        &self.gates
    }

    pub fn type_class(&self) -> u8 {
        self.type_class
    }

    pub fn target(&self) -> TruthTable {
        self.target
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    /// Exact ±1 diagonal of the gate product.
    pub fn diagonal(&self) -> [i32; 8] {
        let mut diag = [1i32; 8];
        for g in &self.gates {
            for (i, d) in diag.iter_mut().enumerate() {
                *d *= g.diagonal_sign(i).expect("non-diagonal gate in decomposition");
            }
        }
        diag
    }

    /// Entry-for-entry integer comparison against the target oracle.
    pub fn verify(&self) -> Result<()> {
        let oracle = self.target.oracle_matrix();
        let diag = self.diagonal();
        for (i, &d) in diag.iter().enumerate() {
            if d != oracle.entry(i) {
                return Err(Error::Synthesis {
                    detail: format!(
                        "diagonal mismatch at index {i} for {}: got {d}, oracle {}",
                        self.target,
                        oracle.entry(i)
                    ),
                });
            }
        }
        Ok(())
    }

    pub fn gates_text(&self) -> String {
        self.gates
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// 1-based variable indices of a monomial mask, ascending.
fn vars_of(mask: u64) -> Vec<usize> {
    (1..=QUBITS).filter(|j| mask >> (QUBITS - j) & 1 == 1).collect()
}

fn check_synth_input(f: &TruthTable) -> Result<()> {
    if f.n() != QUBITS {
        return Err(Error::BadParameter {
            detail: format!("synthesis requires a {QUBITS}-bit function, got {} bits", f.n()),
        });
    }
    if !f.is_balanced() {
        return Err(Error::NotBalanced { ones: f.ones() as usize, size: f.size() });
    }
    if f.value(0) {
        return Err(Error::BadParameter {
            detail: format!("synthesis requires the canonical representative with f(000) = 0; got {f}"),
        });
    }
    Ok(())
}

/// Synthesizes the oracle of a canonical balanced function from its
/// normal form: one σz per linear term, and its quadratic terms covered
/// by at most one Cp and at most one TwoTargetCp.
pub fn synthesize(f: &TruthTable) -> Result<Decomposition> {
    check_synth_input(f)?;
    let anf = f.anf();
    if anf.degree() > 2 {
        return Err(Error::Synthesis {
            detail: format!(
                "degree-{} normal form for balanced {f}; balanced three-bit functions are quadratic",
                anf.degree()
            ),
        });
    }
    let quadratics = anf.monomials_of_degree(2);
    let mut gates = Vec::new();
    match quadratics.len() {
        0 => {}
        1 => {
            let v = vars_of(quadratics[0]);
            gates.push(GateOp::Cp { control: v[0], target: v[1] });
        }
        2 => {
            let shared = quadratics[0] & quadratics[1];
            debug_assert_eq!(shared.count_ones(), 1);
            let control = vars_of(shared)[0];
            let t = vars_of((quadratics[0] | quadratics[1]) & !shared);
            gates.push(GateOp::TwoTargetCp { control, targets: (t[0], t[1]) });
        }
        3 => {
            // All three quadratic monomials are present; taking qubit 1 as
            // the control covers x1x2 and x1x3, leaving x2x3 for a plain
            // Cp. The brute-force tie-break below selects the same split.
            gates.push(GateOp::TwoTargetCp { control: 1, targets: (2, 3) });
            gates.push(GateOp::Cp { control: 2, target: 3 });
        }
        n => unreachable!("{n} quadratic monomials on three bits"),
    }
    for m in anf.monomials_of_degree(1).into_iter().rev() {
        gates.push(GateOp::SigmaZ(vars_of(m)[0]));
    }
    Decomposition::assemble(gates, *f)
}

/// Independent exhaustive search over every admissible gate multiset
/// (any σz subset, at most one Cp, at most one TwoTargetCp); returns a
/// minimal-gate-count match, ties broken by gate-list order.
pub fn brute_force_synthesize(f: &TruthTable) -> Result<Decomposition> {
    check_synth_input(f)?;
    let oracle = f.oracle_matrix();
    let tt_options: [Option<GateOp>; 4] = [
        None,
        Some(GateOp::TwoTargetCp { control: 1, targets: (2, 3) }),
        Some(GateOp::TwoTargetCp { control: 2, targets: (1, 3) }),
        Some(GateOp::TwoTargetCp { control: 3, targets: (1, 2) }),
    ];
    let cp_options: [Option<GateOp>; 4] = [
        None,
        Some(GateOp::Cp { control: 1, target: 2 }),
        Some(GateOp::Cp { control: 1, target: 3 }),
        Some(GateOp::Cp { control: 2, target: 3 }),
    ];
    let mut best: Option<Vec<GateOp>> = None;
    for tt in tt_options {
        for cp in cp_options {
            for sz_set in 0u8..8 {
                let mut gates = Vec::new();
                gates.extend(tt);
                gates.extend(cp);
                for j in 1..=QUBITS {
                    if sz_set >> (j - 1) & 1 == 1 {
                        gates.push(GateOp::SigmaZ(j));
                    }
                }
                let matches = (0..8).all(|i| {
                    let sign: i32 = gates.iter().map(|g| g.diagonal_sign(i).unwrap()).product();
                    sign == oracle.entry(i)
                });
                if !matches {
                    continue;
                }
                let better = match &best {
                    None => true,
                    Some(b) => (gates.len(), &gates) < (b.len(), b),
                };
                if better {
                    best = Some(gates);
                }
            }
        }
    }
    let gates = best.ok_or_else(|| Error::Synthesis {
        detail: format!("no decomposition found for {f}"),
    })?;
    Decomposition::assemble(gates, *f)
}

/// Decompositions of the whole canonical set, in canonical order.
pub fn synthesize_all() -> Result<Vec<Decomposition>> {
    canonical_balanced_set(QUBITS)?.iter().map(synthesize).collect()
}

/// Count of canonical decompositions per structural type.
pub fn classify_all() -> Result<BTreeMap<u8, usize>> {
    let mut counts = BTreeMap::new();
    for d in synthesize_all()? {
        *counts.entry(d.type_class()).or_insert(0) += 1;
    }
    Ok(counts)
}
