//! Boolean functions on up to six bits: truth tables, algebraic normal
//! forms, and the diagonal phase oracles they induce.
//!
//! Input index `i` encodes the assignment `(x1, ..., xn)` with `x1` as the
//! most significant bit, so for three bits the index runs `000, 001, ...,
//! 111` read as `|x1 x2 x3⟩`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg::ComplexMatrix;
use crate::{Error, Result};

/// Largest supported number of input bits.
pub const MAX_BITS: usize = 6;

/// Enumeration helpers walk all `2^(2ⁿ)` functions, which stops being
/// tractable past four bits.
pub const MAX_ENUM_BITS: usize = 4;

/// Bit masks selecting the u64 positions whose index has bit `b` clear;
/// used by the in-place subset-XOR butterfly.
const STRIDE_MASKS: [u64; 6] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0f0f_0f0f_0f0f_0f0f,
    0x00ff_00ff_00ff_00ff,
    0x0000_ffff_0000_ffff,
    0x0000_0000_ffff_ffff,
];

fn check_bits(n: usize) -> Result<()> {
    if (1..=MAX_BITS).contains(&n) {
        Ok(())
    } else {
        Err(Error::BadTruthTable {
            detail: format!("bit count {n} outside 1..={MAX_BITS}"),
        })
    }
}

fn full_mask(size: usize) -> u64 {
    if size == 64 {
        u64::MAX
    } else {
        (1u64 << size) - 1
    }
}

/// Subset-XOR (Möbius/zeta) transform over GF(2), in place on a packed
/// table of `2ⁿ` bits. The transform is its own inverse.
fn binary_mobius(mut v: u64, n: usize) -> u64 {
    for (b, mask) in STRIDE_MASKS.iter().enumerate().take(n) {
        v ^= (v & mask) << (1u32 << b);
    }
    v
}

/// A Boolean function on `n` bits, stored as its value table.
///
/// The value at input index `i` sits in bit `i` of `bits`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct TruthTable {
    n: usize,
    bits: u64,
}

impl TruthTable {
    /// Packs a raw value table; bit `i` of `bits` is the value at input
    /// index `i`. Bits beyond `2ⁿ` must be clear.
    pub fn from_bits(n: usize, bits: u64) -> Result<Self> {
        check_bits(n)?;
        let table = Self { n, bits };
        if bits & !full_mask(table.size()) != 0 {
            return Err(Error::BadTruthTable {
                detail: format!("value bits set beyond 2^{n} entries"),
            });
        }
        Ok(table)
    }

    /// Builds a table from explicit 0/1 values, index 0 first.
    pub fn from_values(n: usize, values: &[u8]) -> Result<Self> {
        check_bits(n)?;
        if values.len() != 1 << n {
            return Err(Error::BadTruthTable {
                detail: format!("expected {} values, got {}", 1 << n, values.len()),
            });
        }
        let mut bits = 0u64;
        for (i, &v) in values.iter().enumerate() {
            match v {
                0 => {}
                1 => bits |= 1 << i,
                other => {
                    return Err(Error::BadTruthTable {
                        detail: format!("value {other} at index {i} is not 0 or 1"),
                    })
                }
            }
        }
        Ok(Self { n, bits })
    }

    /// Builds a table by evaluating `f` on every input index.
    pub fn from_fn(n: usize, f: impl Fn(usize) -> bool) -> Result<Self> {
        check_bits(n)?;
        let mut bits = 0u64;
        for i in 0..1usize << n {
            if f(i) {
                bits |= 1 << i;
            }
        }
        Ok(Self { n, bits })
    }

    /// The constant function with the given value.
    pub fn constant(n: usize, value: bool) -> Result<Self> {
        check_bits(n)?;
        let size = 1usize << n;
        Ok(Self { n, bits: if value { full_mask(size) } else { 0 } })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of table entries, `2ⁿ`.
    pub fn size(&self) -> usize {
        1 << self.n
    }

    /// Value at input index `i` (`x1` most significant).
    pub fn value(&self, i: usize) -> bool {
        assert!(i < self.size(), "input index out of range");
        self.bits >> i & 1 == 1
    }

    /// Number of inputs mapped to 1.
    pub fn ones(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn is_balanced(&self) -> bool {
        self.ones() as usize == self.size() / 2
    }

    pub fn is_constant(&self) -> bool {
        self.bits == 0 || self.bits == full_mask(self.size())
    }

    /// The pointwise complement `1 ⊕ f`.
    pub fn complement(&self) -> Self {
        Self { n: self.n, bits: self.bits ^ full_mask(self.size()) }
    }

    /// The table read as a binary numeral with the value at input 0 most
    /// significant; defines the canonical sort order.
    pub fn integer_value(&self) -> u64 {
        let size = self.size();
        let mut acc = 0u64;
        for i in 0..size {
            acc = acc << 1 | (self.bits >> i & 1);
        }
        acc
    }

    /// Algebraic normal form of the function.
    pub fn anf(&self) -> AnfForm {
        AnfForm { n: self.n, coeffs: binary_mobius(self.bits, self.n) }
    }

    /// The diagonal phase oracle `|x⟩ → (−1)^f(x)|x⟩`.
    pub fn oracle_matrix(&self) -> OracleMatrix {
        let diagonal = (0..self.size())
            .map(|i| if self.value(i) { -1 } else { 1 })
            .collect();
        OracleMatrix { diagonal }
    }
}

impl fmt::Display for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.size() {
            f.write_str(if self.value(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TruthTable({self})")
    }
}

impl FromStr for TruthTable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let len = s.len();
        let n = match len {
            2 => 1,
            4 => 2,
            8 => 3,
            16 => 4,
            32 => 5,
            64 => 6,
            _ => {
                return Err(Error::BadTruthTable {
                    detail: format!("string length {len} is not a power of two in 2..=64"),
                })
            }
        };
        let mut bits = 0u64;
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits |= 1 << i,
                other => {
                    return Err(Error::BadTruthTable {
                        detail: format!("character {other:?} at position {i} is not 0 or 1"),
                    })
                }
            }
        }
        Ok(Self { n, bits })
    }
}

impl Ord for TruthTable {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.n
            .cmp(&other.n)
            .then_with(|| self.integer_value().cmp(&other.integer_value()))
    }
}

impl PartialOrd for TruthTable {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Serialize for TruthTable {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TruthTable {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

/// Algebraic normal form: XOR of AND-monomials.
///
/// Bit `m` of `coeffs` is the coefficient of the monomial whose variable
/// set is `m`, using the same bit convention as input indices (`x1` most
/// significant, so `x_j` is bit `n−j`). The empty monomial (bit 0) is the
/// constant term.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct AnfForm {
    n: usize,
    coeffs: u64,
}

impl AnfForm {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Coefficient of the monomial with variable mask `m`.
    pub fn coefficient(&self, m: u64) -> bool {
        assert!(m < 1 << self.n, "monomial mask out of range");
        self.coeffs >> m & 1 == 1
    }

    pub fn constant_term(&self) -> bool {
        self.coeffs & 1 == 1
    }

    /// Variable masks of all monomials with nonzero coefficient, ascending.
    pub fn monomials(&self) -> Vec<u64> {
        (0..1u64 << self.n).filter(|&m| self.coeffs >> m & 1 == 1).collect()
    }

    /// Monomial masks with exactly `degree` variables, ascending.
    pub fn monomials_of_degree(&self, degree: u32) -> Vec<u64> {
        self.monomials()
            .into_iter()
            .filter(|m| m.count_ones() == degree)
            .collect()
    }

    /// Largest monomial size present; 0 for constant functions.
    pub fn degree(&self) -> u32 {
        self.monomials().iter().map(|m| m.count_ones()).max().unwrap_or(0)
    }

    /// Evaluates the polynomial at the given input index.
    pub fn evaluate(&self, index: usize) -> bool {
        let mut acc = false;
        for m in self.monomials() {
            if m & !(index as u64) == 0 {
                acc ^= true;
            }
        }
        acc
    }

    /// Inverse transform back to the value table.
    pub fn truth_table(&self) -> TruthTable {
        TruthTable { n: self.n, bits: binary_mobius(self.coeffs, self.n) }
    }

    /// Name of a monomial mask, e.g. `x1x2`; the empty monomial is `1`.
    pub fn monomial_name(n: usize, m: u64) -> String {
        if m == 0 {
            return "1".to_owned();
        }
        let mut s = String::new();
        for j in 1..=n {
            if m >> (n - j) & 1 == 1 {
                s.push('x');
                s.push_str(&j.to_string());
            }
        }
        s
    }
}

impl fmt::Display for AnfForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = self.monomials();
        if terms.is_empty() {
            return f.write_str("0");
        }
        // high-degree terms first, then lexicographic by variable order
        terms.sort_by_key(|&m| (std::cmp::Reverse(m.count_ones()), std::cmp::Reverse(m)));
        let rendered: Vec<String> = terms
            .iter()
            .map(|&m| Self::monomial_name(self.n, m))
            .collect();
        f.write_str(&rendered.join(" ^ "))
    }
}

impl fmt::Debug for AnfForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AnfForm({self})")
    }
}

/// Diagonal of a phase oracle; entries are exactly ±1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleMatrix {
    diagonal: Vec<i32>,
}

impl OracleMatrix {
    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn diagonal(&self) -> &[i32] {
        &self.diagonal
    }

    pub fn entry(&self, i: usize) -> i32 {
        self.diagonal[i]
    }

    /// Dense unitary form of the oracle.
    pub fn to_matrix(&self) -> ComplexMatrix {
        let diag: Vec<C64> = self.diagonal.iter().map(|&s| C64::new(s as f64, 0.0)).collect();
        ComplexMatrix::diagonal(&diag)
    }
}

/// All balanced functions on `n` bits, sorted; enumeration-bounded to
/// `n ≤ 4`.
pub fn balanced_set(n: usize) -> Result<Vec<TruthTable>> {
    check_bits(n)?;
    if n > MAX_ENUM_BITS {
        return Err(Error::BadTruthTable {
            detail: format!("enumeration supported only for n ≤ {MAX_ENUM_BITS}"),
        });
    }
    let size = 1usize << n;
    let mut out: Vec<TruthTable> = (0..1u64 << size)
        .map(|bits| TruthTable { n, bits })
        .filter(TruthTable::is_balanced)
        .collect();
    out.sort();
    Ok(out)
}

/// The balanced functions fixing input 0 to 0, one per complement pair,
/// sorted by [`TruthTable::integer_value`].
///
/// Complementary functions induce the same oracle up to global phase; the
/// representative with `f(00...0) = 0` is the one the gate set reproduces
/// with no phase freedom.
pub fn canonical_balanced_set(n: usize) -> Result<Vec<TruthTable>> {
    Ok(balanced_set(n)?
        .into_iter()
        .filter(|f| !f.value(0))
        .collect())
}
