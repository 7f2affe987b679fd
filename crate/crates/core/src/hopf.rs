//! Binary-digit obstruction predicates.
//!
//! Each predicate is a sufficient condition. `true` certifies that a zero or
//! a nonexistence is forced; `false` says nothing.

use serde::{Deserialize, Serialize};

/// Whether `a` and `b` have a one in a common binary digit.
pub fn shares_binary_one(a: u64, b: u64) -> bool {
    a & b != 0
}

/// Every biskew map `S^m × S^n → ℝ^{m+n}` has a zero.
pub fn biskew_blocked(m: u64, n: u64) -> bool {
    !shares_binary_one(m, n)
}

/// Multiplicities of the three nontrivial one-dimensional `(ℤ/2)²`-modules in
/// a codomain `V_{−+}^i × V_{+−}^j × V_{−−}^k`.
///
/// Coordinates are laid out in that order: the first generator negates the
/// `i` and `k` blocks, the second negates the `j` and `k` blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ActionSignature {
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

impl ActionSignature {
    pub fn new(i: usize, j: usize, k: usize) -> Self {
        ActionSignature { i, j, k }
    }

    /// Total codomain dimension.
    pub fn dim(&self) -> usize {
        self.i + self.j + self.k
    }

    /// Sign applied to coordinate `index` by the first generator.
    pub fn first_sign(&self, index: usize) -> f64 {
        if index < self.i || index >= self.i + self.j {
            -1.0
        } else {
            1.0
        }
    }

    /// Sign applied to coordinate `index` by the second generator.
    pub fn second_sign(&self, index: usize) -> f64 {
        if index >= self.i {
            -1.0
        } else {
            1.0
        }
    }
}

/// Every `(ℤ/2)²`-equivariant map `S^m × S^n → V_{−+}^i × V_{+−}^j × V_{−−}^k`
/// has a zero.
pub fn zero_guaranteed(m: usize, n: usize, sig: ActionSignature) -> bool {
    m + n == sig.dim() && m >= sig.i && n >= sig.j && !shares_binary_one((m - sig.i) as u64, (n - sig.j) as u64)
}

/// Three-valued outcome of an obstruction rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Obstruction {
    /// The rule forces a zero, so the corresponding map cannot exist.
    Blocked,
    /// The rule is silent.
    Unknown,
}

impl Obstruction {
    pub fn from_flag(blocked: bool) -> Self {
        if blocked {
            Obstruction::Blocked
        } else {
            Obstruction::Unknown
        }
    }

    pub fn is_blocked(self) -> bool {
        self == Obstruction::Blocked
    }
}
