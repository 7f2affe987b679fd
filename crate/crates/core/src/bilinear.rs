//! Structured nonsingular bilinear maps `ℝ^a × ℝ^b → ℝ^d`.
//!
//! Every map is stored as a sparse integer tensor, so evaluation is exact
//! over any ring implementing [`Scalar`]. The construction kind is kept
//! alongside for certificates and traces.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::optim::{local_minimize, multistart, Factor, LocalOptions, MultistartConfig, ProductDomain, Residual};
use crate::par::Execution;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BilinearError {
    #[error("dimensions must be positive")]
    ZeroDimension,
    #[error("{kind} needs both dimensions divisible by {modulus}, got ({a},{b})")]
    NotDivisible {
        kind: &'static str,
        modulus: usize,
        a: usize,
        b: usize,
    },
    #[error("restriction index set is empty")]
    EmptyIndexSet,
    #[error("restriction index {index} is outside 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("input has {got} coordinates, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("explicit tensors carry no nonsingularity certificate")]
    NoCertificate,
}

/// Ring elements a bilinear map can be evaluated over.
pub trait Scalar: Copy + PartialEq + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> {
    fn zero() -> Self;
    fn from_i64(v: i64) -> Self;

    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }
}

macro_rules! scalar_primitive {
    ($($t:ty),*) => {$(
        impl Scalar for $t {
            fn zero() -> Self {
                0 as $t
            }
            fn from_i64(v: i64) -> Self {
                v as $t
            }
        }
    )*};
}

scalar_primitive!(f64, i64, i128);

impl Scalar for Ratio<i64> {
    fn zero() -> Self {
        Ratio::from_integer(0)
    }
    fn from_i64(v: i64) -> Self {
        Ratio::from_integer(v)
    }
}

impl Scalar for Ratio<i128> {
    fn zero() -> Self {
        Ratio::from_integer(0)
    }
    fn from_i64(v: i64) -> Self {
        Ratio::from_integer(v as i128)
    }
}

/// The normed division algebras over ℝ of dimension 2, 4 and 8.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algebra {
    C,
    H,
    O,
}

impl Algebra {
    pub const ALL: [Algebra; 3] = [Algebra::C, Algebra::H, Algebra::O];

    pub fn dim(self) -> usize {
        match self {
            Algebra::C => 2,
            Algebra::H => 4,
            Algebra::O => 8,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Algebra::C => "C",
            Algebra::H => "H",
            Algebra::O => "O",
        }
    }

    fn poly_name(self) -> &'static str {
        match self {
            Algebra::C => "complex_poly",
            Algebra::H => "quat_poly",
            Algebra::O => "oct_poly",
        }
    }
}

impl fmt::Display for Algebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Signed basis product `e_p e_q = sign · e_r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisProduct {
    pub index: usize,
    pub sign: i64,
}

/// Multiplication table of the Cayley-Dickson algebra of dimension `s`
/// (1, 2, 4 or 8), built by doubling with
/// `(a, b)(c, d) = (ac − d̄b, da + bc̄)`.
///
/// Basis element 0 is the unit. For `s = 4`, `e1 e2 = e3` (i·j = k).
pub fn multiplication_table(s: usize) -> Vec<Vec<BasisProduct>> {
    assert!(matches!(s, 1 | 2 | 4 | 8), "unsupported algebra dimension {s}");
    let mut table = vec![vec![BasisProduct { index: 0, sign: 1 }]];
    let mut size = 1;
    while size < s {
        let conj = |p: usize| if p == 0 { 1 } else { -1 };
        let prev = table.clone();
        let mut next = vec![vec![BasisProduct { index: 0, sign: 0 }; 2 * size]; 2 * size];
        for p in 0..2 * size {
            for q in 0..2 * size {
                let (pl, ph) = (p % size, p >= size);
                let (ql, qh) = (q % size, q >= size);
                next[p][q] = match (ph, qh) {
                    // (e_p, 0)(e_q, 0) = (e_p e_q, 0)
                    (false, false) => prev[pl][ql],
                    // (e_p, 0)(0, e_q) = (0, e_q e_p)
                    (false, true) => {
                        let t = prev[ql][pl];
                        BasisProduct {
                            index: t.index + size,
                            sign: t.sign,
                        }
                    }
                    // (0, e_p)(e_q, 0) = (0, e_p ē_q)
                    (true, false) => {
                        let t = prev[pl][ql];
                        BasisProduct {
                            index: t.index + size,
                            sign: t.sign * conj(ql),
                        }
                    }
                    // (0, e_p)(0, e_q) = (−ē_q e_p, 0)
                    (true, true) => {
                        let t = prev[ql][pl];
                        BasisProduct {
                            index: t.index,
                            sign: -t.sign * conj(ql),
                        }
                    }
                };
            }
        }
        table = next;
        size *= 2;
    }
    table
}

/// Construction behind a bilinear map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BilinearKind {
    RealPoly,
    ComplexPoly,
    QuatPoly,
    OctPoly,
    Scalar {
        algebra: Algebra,
        k: usize,
    },
    Restriction {
        parent: Box<BilinearMap>,
        rows: Vec<usize>,
        cols: Vec<usize>,
    },
    Swap {
        parent: Box<BilinearMap>,
    },
    ExplicitTensor,
}

/// One nonzero tensor entry: `B(x,y)_k += coef · x_i · y_j` (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub coef: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BilinearMap {
    kind: BilinearKind,
    a: usize,
    b: usize,
    d: usize,
    terms: Vec<Term>,
}

/// Statement that `B(x,y) = 0` forces `x = 0` or `y = 0`, with the chain of
/// rules that proves it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonsingularityCertificate {
    pub statement: String,
    pub trace: Vec<String>,
    /// Whether any rule in the chain is an extension beyond the classical
    /// constructions (octonionic polynomial multiplication).
    pub uses_extension_rule: bool,
}

fn algebra_poly(alg: Option<Algebra>, a: usize, b: usize) -> Result<BilinearMap, BilinearError> {
    if a == 0 || b == 0 {
        return Err(BilinearError::ZeroDimension);
    }
    let s = alg.map_or(1, Algebra::dim);
    let kind = match alg {
        None => BilinearKind::RealPoly,
        Some(Algebra::C) => BilinearKind::ComplexPoly,
        Some(Algebra::H) => BilinearKind::QuatPoly,
        Some(Algebra::O) => BilinearKind::OctPoly,
    };
    if !a.is_multiple_of(s) || !b.is_multiple_of(s) {
        return Err(BilinearError::NotDivisible {
            kind: alg.map_or("real_poly", Algebra::poly_name),
            modulus: s,
            a,
            b,
        });
    }
    let table = multiplication_table(s);
    let (na, nb) = (a / s, b / s);
    let mut terms = Vec::with_capacity(a * b);
    for p in 0..na {
        for q in 0..nb {
            for u in 0..s {
                for v in 0..s {
                    let t = table[u][v];
                    terms.push(Term {
                        i: p * s + u,
                        j: q * s + v,
                        k: (p + q) * s + t.index,
                        coef: t.sign,
                    });
                }
            }
        }
    }
    Ok(BilinearMap {
        kind,
        a,
        b,
        d: a + b - s,
        terms,
    })
}

/// Coefficient convolution of real polynomials: `ℝ^a × ℝ^b → ℝ^{a+b−1}`.
pub fn real_poly(a: usize, b: usize) -> Result<BilinearMap, BilinearError> {
    algebra_poly(None, a, b)
}

/// Complex polynomial multiplication: `ℝ^a × ℝ^b → ℝ^{a+b−2}`, `a, b` even.
pub fn complex_poly(a: usize, b: usize) -> Result<BilinearMap, BilinearError> {
    algebra_poly(Some(Algebra::C), a, b)
}

/// Quaternionic polynomial multiplication: `ℝ^a × ℝ^b → ℝ^{a+b−4}`.
pub fn quat_poly(a: usize, b: usize) -> Result<BilinearMap, BilinearError> {
    algebra_poly(Some(Algebra::H), a, b)
}

/// Octonionic polynomial multiplication: `ℝ^a × ℝ^b → ℝ^{a+b−8}`.
pub fn oct_poly(a: usize, b: usize) -> Result<BilinearMap, BilinearError> {
    algebra_poly(Some(Algebra::O), a, b)
}

/// Scalar multiplication `A × A^k → A^k`, i.e. `ℝ^s × ℝ^{sk} → ℝ^{sk}`.
pub fn scalar(algebra: Algebra, k: usize) -> Result<BilinearMap, BilinearError> {
    if k == 0 {
        return Err(BilinearError::ZeroDimension);
    }
    let s = algebra.dim();
    let table = multiplication_table(s);
    let mut terms = Vec::with_capacity(s * s * k);
    for block in 0..k {
        for u in 0..s {
            for v in 0..s {
                let t = table[u][v];
                terms.push(Term {
                    i: u,
                    j: block * s + v,
                    k: block * s + t.index,
                    coef: t.sign,
                });
            }
        }
    }
    Ok(BilinearMap {
        kind: BilinearKind::Scalar { algebra, k },
        a: s,
        b: s * k,
        d: s * k,
        terms,
    })
}

/// Restriction to coordinate subspaces given by 1-based index sets.
pub fn restrict(map: &BilinearMap, rows: &[usize], cols: &[usize]) -> Result<BilinearMap, BilinearError> {
    if rows.is_empty() || cols.is_empty() {
        return Err(BilinearError::EmptyIndexSet);
    }
    let position = |set: &[usize], len: usize| -> Result<Vec<Option<usize>>, BilinearError> {
        let mut pos = vec![None; len];
        for (new, &old) in set.iter().enumerate() {
            if old == 0 || old > len {
                return Err(BilinearError::IndexOutOfRange { index: old, len });
            }
            pos[old - 1] = Some(new);
        }
        Ok(pos)
    };
    let mut rows_sorted = rows.to_vec();
    rows_sorted.sort_unstable();
    rows_sorted.dedup();
    let mut cols_sorted = cols.to_vec();
    cols_sorted.sort_unstable();
    cols_sorted.dedup();
    let rpos = position(&rows_sorted, map.a)?;
    let cpos = position(&cols_sorted, map.b)?;
    let terms = map
        .terms
        .iter()
        .filter_map(|t| match (rpos[t.i], cpos[t.j]) {
            (Some(i), Some(j)) => Some(Term { i, j, ..*t }),
            _ => None,
        })
        .collect();
    Ok(BilinearMap {
        a: rows_sorted.len(),
        b: cols_sorted.len(),
        d: map.d,
        terms,
        kind: BilinearKind::Restriction {
            parent: Box::new(map.clone()),
            rows: rows_sorted,
            cols: cols_sorted,
        },
    })
}

/// Restriction to the first `a` and first `b` coordinates.
pub fn restrict_leading(map: &BilinearMap, a: usize, b: usize) -> Result<BilinearMap, BilinearError> {
    let rows: Vec<usize> = (1..=a).collect();
    let cols: Vec<usize> = (1..=b).collect();
    restrict(map, &rows, &cols)
}

/// Exchanges the arguments: `(x, y) ↦ B(y, x)`.
pub fn swap(map: &BilinearMap) -> BilinearMap {
    BilinearMap {
        a: map.b,
        b: map.a,
        d: map.d,
        terms: map.terms.iter().map(|t| Term { i: t.j, j: t.i, ..*t }).collect(),
        kind: BilinearKind::Swap {
            parent: Box::new(map.clone()),
        },
    }
}

impl BilinearMap {
    /// Map given by explicit 0-based tensor entries. Search-only: it has no
    /// nonsingularity certificate.
    pub fn explicit(a: usize, b: usize, d: usize, terms: Vec<Term>) -> Result<Self, BilinearError> {
        if a == 0 || b == 0 || d == 0 {
            return Err(BilinearError::ZeroDimension);
        }
        for t in &terms {
            for (index, len) in [(t.i, a), (t.j, b), (t.k, d)] {
                if index >= len {
                    return Err(BilinearError::IndexOutOfRange { index: index + 1, len });
                }
            }
        }
        Ok(BilinearMap {
            kind: BilinearKind::ExplicitTensor,
            a,
            b,
            d,
            terms,
        })
    }

    pub fn kind(&self) -> &BilinearKind {
        &self.kind
    }

    pub fn a(&self) -> usize {
        self.a
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Evaluates `B(x, y)` over any ring.
    pub fn evaluate<T: Scalar>(&self, x: &[T], y: &[T]) -> Result<Vec<T>, BilinearError> {
        self.check(x.len(), y.len())?;
        Ok(self.eval_unchecked(x, y))
    }

    pub(crate) fn eval_unchecked<T: Scalar>(&self, x: &[T], y: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.d];
        for t in &self.terms {
            let prod = x[t.i] * y[t.j];
            out[t.k] = match t.coef {
                1 => out[t.k] + prod,
                -1 => out[t.k] - prod,
                c => out[t.k] + T::from_i64(c) * prod,
            };
        }
        out
    }

    fn check(&self, xa: usize, yb: usize) -> Result<(), BilinearError> {
        if xa != self.a {
            return Err(BilinearError::DimensionMismatch { expected: self.a, got: xa });
        }
        if yb != self.b {
            return Err(BilinearError::DimensionMismatch { expected: self.b, got: yb });
        }
        Ok(())
    }

    /// Jacobian of `(x, y) ↦ B(x, y)` with respect to the concatenated input.
    pub fn jacobian(&self, x: &[f64], y: &[f64]) -> DMatrix<f64> {
        let mut jac = DMatrix::zeros(self.d, self.a + self.b);
        for t in &self.terms {
            let c = t.coef as f64;
            jac[(t.k, t.i)] += c * y[t.j];
            jac[(t.k, self.a + t.j)] += c * x[t.i];
        }
        jac
    }

    /// Human-readable construction trace: the base construction followed by
    /// closure steps.
    pub fn trace(&self) -> Vec<String> {
        match &self.kind {
            BilinearKind::Restriction { parent, .. } => {
                let mut t = parent.trace();
                t.push(format!("restrict({},{})", self.a, self.b));
                t
            }
            BilinearKind::Swap { parent } => {
                let mut t = parent.trace();
                t.push("swap".to_string());
                t
            }
            _ => vec![self.base_name()],
        }
    }

    fn base_name(&self) -> String {
        match &self.kind {
            BilinearKind::RealPoly => format!("real_poly({},{})", self.a, self.b),
            BilinearKind::ComplexPoly => format!("complex_poly({},{})", self.a, self.b),
            BilinearKind::QuatPoly => format!("quat_poly({},{})", self.a, self.b),
            BilinearKind::OctPoly => format!("oct_poly({},{})", self.a, self.b),
            BilinearKind::Scalar { algebra, k } => format!("scalar({algebra},{k})"),
            BilinearKind::ExplicitTensor => format!("explicit_tensor({},{},{})", self.a, self.b, self.d),
            BilinearKind::Restriction { .. } | BilinearKind::Swap { .. } => unreachable!(),
        }
    }

    /// Walks the construction down to its base and names the argument that
    /// makes each step nonsingular.
    pub fn certify(&self) -> Result<NonsingularityCertificate, BilinearError> {
        let mut trace = Vec::new();
        let mut extension = false;
        self.certify_into(&mut trace, &mut extension)?;
        Ok(NonsingularityCertificate {
            statement: "B(x,y)=0 implies x=0 or y=0".to_string(),
            trace,
            uses_extension_rule: extension,
        })
    }

    fn certify_into(&self, trace: &mut Vec<String>, extension: &mut bool) -> Result<(), BilinearError> {
        let name = match &self.kind {
            BilinearKind::Restriction { parent, .. } => {
                parent.certify_into(trace, extension)?;
                trace.push(format!(
                    "restrict({},{}): a restriction of a nonsingular map to coordinate subspaces is nonsingular",
                    self.a, self.b
                ));
                return Ok(());
            }
            BilinearKind::Swap { parent } => {
                parent.certify_into(trace, extension)?;
                trace.push("swap: exchanging the arguments of a nonsingular map keeps it nonsingular".to_string());
                return Ok(());
            }
            BilinearKind::ExplicitTensor => return Err(BilinearError::NoCertificate),
            _ => self.base_name(),
        };
        let reason = match &self.kind {
            BilinearKind::RealPoly => "product of nonzero real polynomials is nonzero (leading coefficients multiply in R)",
            BilinearKind::ComplexPoly => {
                "product of nonzero complex polynomials is nonzero (leading coefficients multiply in C, which has no zero divisors)"
            }
            BilinearKind::QuatPoly => {
                "product of nonzero quaternionic polynomials is nonzero (leading coefficients multiply in H, which has no zero divisors)"
            }
            BilinearKind::OctPoly => {
                *extension = true;
                "extension rule: product of nonzero octonionic polynomials is nonzero (leading coefficients multiply in O, which has no zero divisors)"
            }
            BilinearKind::Scalar { algebra, .. } => match algebra {
                Algebra::C => "scalar multiplication by a nonzero element of C is injective on each block",
                Algebra::H => "scalar multiplication by a nonzero element of H is injective on each block",
                Algebra::O => "scalar multiplication by a nonzero element of O is injective on each block",
            },
            _ => unreachable!(),
        };
        trace.push(format!("{name}: {reason}"));
        Ok(())
    }
}

/// JSON description of a bilinear map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "construction", rename_all = "snake_case", deny_unknown_fields)]
pub enum BilinearSpec {
    Catalog { a: usize, b: usize },
    RealPoly { a: usize, b: usize },
    ComplexPoly { a: usize, b: usize },
    QuatPoly { a: usize, b: usize },
    OctPoly { a: usize, b: usize },
    Scalar { algebra: Algebra, k: usize },
    Explicit { a: usize, b: usize, d: usize, terms: Vec<Term> },
}

impl BilinearSpec {
    pub fn build(&self) -> Result<BilinearMap, BilinearError> {
        match self {
            BilinearSpec::Catalog { a, b } => catalog_map(*a, *b),
            BilinearSpec::RealPoly { a, b } => real_poly(*a, *b),
            BilinearSpec::ComplexPoly { a, b } => complex_poly(*a, *b),
            BilinearSpec::QuatPoly { a, b } => quat_poly(*a, *b),
            BilinearSpec::OctPoly { a, b } => oct_poly(*a, *b),
            BilinearSpec::Scalar { algebra, k } => scalar(*algebra, *k),
            BilinearSpec::Explicit { a, b, d, terms } => BilinearMap::explicit(*a, *b, *d, terms.clone()),
        }
    }
}

/// Result of a minimal-dimension catalog lookup.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub d: usize,
    pub trace: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Base {
    Scalar(Algebra),
    Poly(Algebra),
    RealPoly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Candidate {
    base: Base,
    base_a: usize,
    base_b: usize,
    swapped: bool,
    d: usize,
    restricted: bool,
}

impl Candidate {
    fn rank(&self) -> (usize, bool, bool, Base) {
        (self.d, self.restricted, self.swapped, self.base)
    }
}

fn candidates(a: usize, b: usize) -> Vec<Candidate> {
    let up = |v: usize, s: usize| v.div_ceil(s) * s;
    let mut out = vec![Candidate {
        base: Base::RealPoly,
        base_a: a,
        base_b: b,
        swapped: false,
        d: a + b - 1,
        restricted: false,
    }];
    for alg in Algebra::ALL {
        let s = alg.dim();
        let (pa, pb) = (up(a, s), up(b, s));
        out.push(Candidate {
            base: Base::Poly(alg),
            base_a: pa,
            base_b: pb,
            swapped: false,
            d: pa + pb - s,
            restricted: (pa, pb) != (a, b),
        });
        if a <= s {
            let k = b.div_ceil(s);
            out.push(Candidate {
                base: Base::Scalar(alg),
                base_a: s,
                base_b: s * k,
                swapped: false,
                d: s * k,
                restricted: (s, s * k) != (a, b),
            });
        }
        if b <= s {
            let k = a.div_ceil(s);
            out.push(Candidate {
                base: Base::Scalar(alg),
                base_a: s,
                base_b: s * k,
                swapped: true,
                d: s * k,
                restricted: (s * k, s) != (a, b),
            });
        }
    }
    out
}

fn best_candidate(a: usize, b: usize) -> Candidate {
    candidates(a, b)
        .into_iter()
        .min_by_key(Candidate::rank)
        .expect("real_poly is always a candidate")
}

fn build(c: &Candidate, a: usize, b: usize) -> BilinearMap {
    let base = match c.base {
        Base::RealPoly => real_poly(c.base_a, c.base_b),
        Base::Poly(alg) => algebra_poly(Some(alg), c.base_a, c.base_b),
        Base::Scalar(alg) => scalar(alg, c.base_b / alg.dim()),
    }
    .expect("catalog candidates have valid dimensions");
    let base = if c.swapped { swap(&base) } else { base };
    if c.restricted {
        restrict_leading(&base, a, b).expect("catalog restriction fits")
    } else {
        base
    }
}

/// Smallest `d` reachable from the built-in constructions under restriction
/// and swap. An upper bound on the true minimum, which is unknown in general.
pub fn catalog_min_dim(a: usize, b: usize) -> Result<CatalogEntry, BilinearError> {
    let map = catalog_map(a, b)?;
    Ok(CatalogEntry {
        d: map.d,
        trace: map.trace(),
    })
}

/// The map realizing [`catalog_min_dim`].
pub fn catalog_map(a: usize, b: usize) -> Result<BilinearMap, BilinearError> {
    if a == 0 || b == 0 {
        return Err(BilinearError::ZeroDimension);
    }
    Ok(build(&best_candidate(a, b), a, b))
}

/// Every construction the catalog considers for `(a, b)`, best first.
pub fn catalog_candidates(a: usize, b: usize) -> Result<Vec<BilinearMap>, BilinearError> {
    if a == 0 || b == 0 {
        return Err(BilinearError::ZeroDimension);
    }
    let mut c = candidates(a, b);
    c.sort_by_key(Candidate::rank);
    Ok(c.iter().map(|c| build(c, a, b)).collect())
}

/// Outcome of a numerical search for a singular pair on the unit torus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularSearch {
    pub min_norm: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub starts: usize,
    pub seed: u64,
}

struct OnTorus<'a>(&'a BilinearMap);

impl Residual for OnTorus<'_> {
    fn residual(&self, p: &[f64]) -> Vec<f64> {
        let (x, y) = p.split_at(self.0.a);
        self.0.eval_unchecked(x, y)
    }

    fn jacobian(&self, p: &[f64]) -> Option<DMatrix<f64>> {
        let (x, y) = p.split_at(self.0.a);
        Some(self.0.jacobian(x, y))
    }
}

/// Minimizes `‖B(x,y)‖` over `S^{a−1} × S^{b−1}` from `starts` seeded starts.
pub fn singular_search(map: &BilinearMap, starts: usize, seed: u64, execution: Execution) -> SingularSearch {
    let domain = ProductDomain::new(vec![Factor::Sphere { ambient: map.a }, Factor::Sphere { ambient: map.b }]);
    let config = MultistartConfig {
        starts,
        seed,
        batch: 8,
        stop_below: Some(0.0),
        local: LocalOptions {
            max_iters: 100,
            target: 0.0,
        },
        execution,
    };
    let problem = OnTorus(map);
    let result = multistart(
        &config,
        |rng| domain.random_point(rng),
        |x0| local_minimize(&domain, x0, &problem, &config.local),
    );
    let (x, y) = result.best.result.point.split_at(map.a);
    SingularSearch {
        min_norm: result.best.result.norm,
        x: x.to_vec(),
        y: y.to_vec(),
        starts: result.starts_run,
        seed,
    }
}

/// Random nonzero rational vector with denominators at most 12, scaled to an
/// integer vector by the least common denominator. Scaling does not change
/// whether a bilinear map vanishes.
pub fn random_rational_direction(len: usize, rng: &mut ChaCha8Rng) -> Vec<i128> {
    loop {
        let q: Vec<Ratio<i64>> = (0..len)
            .map(|_| Ratio::new(rng.gen_range(-1000..=1000), rng.gen_range(1..=12)))
            .collect();
        if q.iter().all(|r| *r.numer() == 0) {
            continue;
        }
        let lcm = q.iter().fold(1i64, |acc, r| num_integer::lcm(acc, *r.denom()));
        break q.iter().map(|r| (*r.numer() as i128) * (lcm / *r.denom()) as i128).collect();
    }
}

/// Evaluates `B` exactly on `samples` random nonzero rational pairs and
/// returns the first pair mapped to zero, if any.
pub fn exact_zero_search(map: &BilinearMap, samples: usize, seed: u64) -> Option<(Vec<i128>, Vec<i128>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let x = random_rational_direction(map.a, &mut rng);
        let y = random_rational_direction(map.b, &mut rng);
        if map.eval_unchecked(&x, &y).iter().all(|v| *v == 0) {
            return Some((x, y));
        }
    }
    None
}
