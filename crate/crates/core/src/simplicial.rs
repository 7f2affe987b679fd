//! Finite abstract simplicial complexes on at most 64 vertices.
//!
//! Vertices are labelled `1..=n` and faces are stored as `u64` bitsets
//! (vertex `i` is bit `i - 1`). Complexes are kept by their facets; faces and
//! nonfaces are derived on demand.

use std::cmp::Ordering;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A set of vertices of a complex, vertex `i` stored as bit `i - 1`.
pub type VertexSet = u64;

/// Largest ground set a complex may have.
pub const MAX_VERTICES: usize = 64;

/// Ground sets above this size are refused by operations that walk all
/// `2^n` subsets.
pub const MAX_EXHAUSTIVE_VERTICES: usize = 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComplexError {
    #[error("ground set is empty")]
    EmptyGroundSet,
    #[error("ground set of {0} vertices exceeds the {MAX_VERTICES}-vertex limit")]
    TooManyVertices(usize),
    #[error("vertex {vertex} is outside 1..={n}")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("facet list contains an empty facet")]
    EmptyFacet,
    #[error("skeleton dimension {k} exceeds simplex dimension {m}")]
    SkeletonTooLarge { m: usize, k: usize },
    #[error("unknown named complex `{0}`")]
    UnknownName(String),
    #[error("complex has no faces to measure distance to")]
    EmptyComplex,
    #[error("point has {got} coordinates, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("zero vector has no crosspolytope chart image")]
    ZeroVector,
    #[error("invalid barycentric weights: {0}")]
    InvalidWeights(String),
    #[error("operation enumerates all subsets and is limited to {MAX_EXHAUSTIVE_VERTICES} vertices (got {0})")]
    TooLargeForEnumeration(usize),
}

/// Bitset of all vertices `1..=n`.
pub fn full_set(n: usize) -> VertexSet {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Builds a vertex set from 1-based labels. Labels must be in `1..=64`.
pub fn vertex_set(vertices: &[usize]) -> VertexSet {
    vertices.iter().fold(0, |acc, &v| acc | (1u64 << (v - 1)))
}

/// 1-based vertex labels of a set, ascending.
pub fn vertices_of(set: VertexSet) -> Vec<usize> {
    let mut out = Vec::with_capacity(set.count_ones() as usize);
    let mut s = set;
    while s != 0 {
        out.push(s.trailing_zeros() as usize + 1);
        s &= s - 1;
    }
    out
}

/// Lexicographic order of the ascending vertex lists of two sets.
pub fn lex_cmp(a: VertexSet, b: VertexSet) -> Ordering {
    let (mut a, mut b) = (a, b);
    loop {
        match (a, b) {
            (0, 0) => return Ordering::Equal,
            (0, _) => return Ordering::Less,
            (_, 0) => return Ordering::Greater,
            _ => {}
        }
        let (la, lb) = (a.trailing_zeros(), b.trailing_zeros());
        if la != lb {
            return la.cmp(&lb);
        }
        a &= a - 1;
        b &= b - 1;
    }
}

/// Order by size first, then lexicographically.
pub fn graded_cmp(a: VertexSet, b: VertexSet) -> Ordering {
    a.count_ones().cmp(&b.count_ones()).then_with(|| lex_cmp(a, b))
}

/// All `k`-subsets of `{1..=n}` in increasing bit order.
pub fn k_subsets(n: usize, k: usize) -> Vec<VertexSet> {
    if k > n {
        return Vec::new();
    }
    if k == 0 {
        return vec![0];
    }
    let mut out = Vec::new();
    let limit = full_set(n);
    let mut s: u64 = (1u64 << k) - 1;
    loop {
        out.push(s);
        // Gosper's hack for the next set with the same popcount.
        let c = s & s.wrapping_neg();
        let r = s.wrapping_add(c);
        if r == 0 {
            break;
        }
        s = (((r ^ s) >> 2) / c) | r;
        if s > limit || s == 0 {
            break;
        }
    }
    out
}

/// A finite abstract simplicial complex on the ground set `1..=n`, stored by
/// its facets in canonical (lexicographic) order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ComplexJson", into = "ComplexJson")]
pub struct SimplicialComplex {
    n: usize,
    facets: Vec<VertexSet>,
    name: Option<String>,
}

/// JSON form: `{"n": int, "facets": [[int,...],...], "name": string?}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexJson {
    pub n: usize,
    pub facets: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl TryFrom<ComplexJson> for SimplicialComplex {
    type Error = ComplexError;

    fn try_from(raw: ComplexJson) -> Result<Self, Self::Error> {
        let k = SimplicialComplex::from_facets(raw.n, &raw.facets)?;
        Ok(match raw.name {
            Some(name) => k.with_name(name),
            None => k,
        })
    }
}

impl From<SimplicialComplex> for ComplexJson {
    fn from(k: SimplicialComplex) -> Self {
        ComplexJson {
            n: k.n,
            facets: k.facets.iter().map(|&f| vertices_of(f)).collect(),
            name: k.name,
        }
    }
}

/// Faces of a complex, sorted by size and then lexicographically, with a hash
/// set for membership queries. The empty face is included.
#[derive(Debug, Clone)]
pub struct FaceLattice {
    faces: Vec<VertexSet>,
    members: HashSet<VertexSet>,
}

impl FaceLattice {
    pub fn faces(&self) -> &[VertexSet] {
        &self.faces
    }

    pub fn contains(&self, set: VertexSet) -> bool {
        self.members.contains(&set)
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }
}

impl SimplicialComplex {
    /// Builds a complex from facet vertex lists; contained facets are dropped.
    pub fn from_facets(n: usize, facets: &[Vec<usize>]) -> Result<Self, ComplexError> {
        check_ground_set(n)?;
        let mut sets = Vec::with_capacity(facets.len());
        for facet in facets {
            if facet.is_empty() {
                return Err(ComplexError::EmptyFacet);
            }
            for &v in facet {
                if v == 0 || v > n {
                    return Err(ComplexError::VertexOutOfRange { vertex: v, n });
                }
            }
            sets.push(vertex_set(facet));
        }
        Ok(Self::from_sets_unchecked(n, sets))
    }

    /// Builds a complex from facet bitsets. Sets must lie inside `1..=n`.
    pub fn from_facet_sets(n: usize, sets: Vec<VertexSet>) -> Result<Self, ComplexError> {
        check_ground_set(n)?;
        let full = full_set(n);
        for &s in &sets {
            if s == 0 {
                return Err(ComplexError::EmptyFacet);
            }
            if s & !full != 0 {
                let vertex = vertices_of(s & !full)[0];
                return Err(ComplexError::VertexOutOfRange { vertex, n });
            }
        }
        Ok(Self::from_sets_unchecked(n, sets))
    }

    fn from_sets_unchecked(n: usize, mut sets: Vec<VertexSet>) -> Self {
        sets.sort_by(|a, b| b.count_ones().cmp(&a.count_ones()).then_with(|| lex_cmp(*a, *b)));
        sets.dedup();
        let mut kept: Vec<VertexSet> = Vec::with_capacity(sets.len());
        for s in sets {
            if !kept.iter().any(|&k| k & s == s) {
                kept.push(s);
            }
        }
        kept.sort_by(|a, b| lex_cmp(*a, *b));
        SimplicialComplex {
            n,
            facets: kept,
            name: None,
        }
    }

    /// The complex on `1..=n` whose minimal nonfaces are exactly the minimal
    /// members of `nonfaces`: a set is a face iff it contains none of them.
    pub fn from_minimal_nonfaces(n: usize, nonfaces: &[VertexSet]) -> Result<Self, ComplexError> {
        check_ground_set(n)?;
        if n > MAX_EXHAUSTIVE_VERTICES {
            return Err(ComplexError::TooLargeForEnumeration(n));
        }
        let full = full_set(n);
        let blocked: Vec<VertexSet> = nonfaces.iter().map(|&s| s & full).collect();
        let is_face = |s: VertexSet| !blocked.iter().any(|&b| b & s == b);
        // Depth-first over vertices, keeping only maximal faces.
        let mut facets = Vec::new();
        let mut stack = vec![(0usize, 0u64)];
        while let Some((next, current)) = stack.pop() {
            if next == n {
                let maximal = (0..n).all(|v| current & (1 << v) != 0 || !is_face(current | (1 << v)));
                if maximal && current != 0 {
                    facets.push(current);
                }
                continue;
            }
            stack.push((next + 1, current));
            let with = current | (1 << next);
            if is_face(with) {
                stack.push((next + 1, with));
            }
        }
        Ok(Self::from_sets_unchecked(n, facets))
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn facets(&self) -> &[VertexSet] {
        &self.facets
    }

    pub fn facet_vertices(&self) -> Vec<Vec<usize>> {
        self.facets.iter().map(|&f| vertices_of(f)).collect()
    }

    /// Dimension; `-1` for the complex with no vertices.
    pub fn dim(&self) -> isize {
        self.facets.iter().map(|f| f.count_ones() as isize - 1).max().unwrap_or(-1)
    }

    pub fn is_face(&self, set: VertexSet) -> bool {
        set == 0 || self.facets.iter().any(|&f| f & set == set)
    }

    /// Every face, the empty face included.
    pub fn face_lattice(&self) -> FaceLattice {
        let mut members: HashSet<VertexSet> = HashSet::new();
        members.insert(0);
        let mut level: Vec<VertexSet> = self.facets.clone();
        // Walk downward one vertex at a time so each face is produced from a
        // face one size larger.
        let mut by_size: Vec<Vec<VertexSet>> = vec![Vec::new(); self.n + 2];
        for &f in &self.facets {
            by_size[f.count_ones() as usize].push(f);
        }
        for size in (1..by_size.len()).rev() {
            level.clear();
            level.append(&mut by_size[size]);
            let mut smaller = Vec::new();
            for &f in &level {
                if !members.insert(f) {
                    continue;
                }
                let mut rest = f;
                while rest != 0 {
                    let bit = rest & rest.wrapping_neg();
                    smaller.push(f & !bit);
                    rest &= rest - 1;
                }
            }
            by_size[size - 1].extend(smaller.into_iter().filter(|s| *s != 0));
        }
        let mut faces: Vec<VertexSet> = members.iter().copied().collect();
        faces.sort_by(|a, b| graded_cmp(*a, *b));
        FaceLattice { faces, members }
    }

    /// `f[k]` = number of faces with `k + 1` vertices.
    pub fn f_vector(&self) -> Vec<usize> {
        let lattice = self.face_lattice();
        let top = (self.dim() + 1).max(0) as usize;
        let mut f = vec![0usize; top];
        for &face in lattice.faces() {
            let size = face.count_ones() as usize;
            if size > 0 {
                f[size - 1] += 1;
            }
        }
        f
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.f_vector()
            .iter()
            .enumerate()
            .map(|(k, &c)| if k % 2 == 0 { c as i64 } else { -(c as i64) })
            .sum()
    }

    /// Minimal nonfaces, sorted by size and then lexicographically.
    pub fn minimal_nonfaces(&self) -> Vec<VertexSet> {
        let lattice = self.face_lattice();
        self.minimal_nonfaces_with(&lattice)
    }

    pub fn minimal_nonfaces_with(&self, lattice: &FaceLattice) -> Vec<VertexSet> {
        let mut out = Vec::new();
        for &face in lattice.faces() {
            // Each minimal nonface S is generated once, from S minus its
            // largest vertex.
            let start = 64 - face.leading_zeros() as usize;
            for v in start..self.n {
                let candidate = face | (1u64 << v);
                if lattice.contains(candidate) {
                    continue;
                }
                let mut rest = face;
                let mut minimal = true;
                while rest != 0 {
                    let bit = rest & rest.wrapping_neg();
                    if !lattice.contains(candidate & !bit) {
                        minimal = false;
                        break;
                    }
                    rest &= rest - 1;
                }
                if minimal {
                    out.push(candidate);
                }
            }
        }
        out.sort_by(|a, b| graded_cmp(*a, *b));
        out
    }

    /// Every nonempty subset of the ground set that is not a face.
    pub fn all_nonfaces(&self) -> Result<Vec<VertexSet>, ComplexError> {
        if self.n > MAX_EXHAUSTIVE_VERTICES {
            return Err(ComplexError::TooLargeForEnumeration(self.n));
        }
        let lattice = self.face_lattice();
        let mut out: Vec<VertexSet> = (1..=full_set(self.n)).filter(|s| !lattice.contains(*s)).collect();
        out.sort_by(|a, b| graded_cmp(*a, *b));
        Ok(out)
    }

    /// Link of a face, as a complex on the same ground set.
    pub fn link(&self, face: VertexSet) -> SimplicialComplex {
        let sets: Vec<VertexSet> = self
            .facets
            .iter()
            .filter(|&&f| f & face == face && f != face)
            .map(|&f| f & !face)
            .collect();
        Self::from_sets_unchecked(self.n, sets)
    }

    /// Whether every codimension-one face lies in exactly two facets and all
    /// facets have the same dimension.
    pub fn is_pseudomanifold(&self) -> bool {
        let d = self.dim();
        if d < 1 || self.facets.iter().any(|f| f.count_ones() as isize - 1 != d) {
            return false;
        }
        let mut counts = std::collections::HashMap::new();
        for &f in &self.facets {
            let mut rest = f;
            while rest != 0 {
                let bit = rest & rest.wrapping_neg();
                *counts.entry(f & !bit).or_insert(0usize) += 1;
                rest &= rest - 1;
            }
        }
        counts.values().all(|&c| c == 2)
    }
}

fn check_ground_set(n: usize) -> Result<(), ComplexError> {
    if n == 0 {
        return Err(ComplexError::EmptyGroundSet);
    }
    if n > MAX_VERTICES {
        return Err(ComplexError::TooManyVertices(n));
    }
    Ok(())
}

/// The `k`-skeleton of the `m`-simplex on vertices `1..=m+1`.
pub fn skeleton(m: usize, k: usize) -> Result<SimplicialComplex, ComplexError> {
    if k > m {
        return Err(ComplexError::SkeletonTooLarge { m, k });
    }
    let n = m + 1;
    let facets = k_subsets(n, k + 1);
    Ok(SimplicialComplex::from_facet_sets(n, facets)?.with_name(format!("skeleton({m},{k})")))
}

/// The join `K * L`; the vertices of `L` are shifted by `K.n()`.
pub fn join(k: &SimplicialComplex, l: &SimplicialComplex) -> Result<SimplicialComplex, ComplexError> {
    let n = k.n + l.n;
    check_ground_set(n)?;
    let shift = k.n as u32;
    let mut sets = Vec::new();
    match (k.facets.is_empty(), l.facets.is_empty()) {
        (true, true) => {}
        (false, true) => sets.extend_from_slice(&k.facets),
        (true, false) => sets.extend(l.facets.iter().map(|&t| t << shift)),
        (false, false) => {
            for &s in &k.facets {
                for &t in &l.facets {
                    sets.push(s | (t << shift));
                }
            }
        }
    }
    Ok(SimplicialComplex::from_sets_unchecked(n, sets))
}

/// `[3]^{*(k+1)}`: the `(k+1)`-fold join of three isolated points.
pub fn three_points_power(k: usize) -> Result<SimplicialComplex, ComplexError> {
    let three = SimplicialComplex::from_facets(3, &[vec![1], vec![2], vec![3]])?;
    let mut acc = three.clone();
    for _ in 0..k {
        acc = join(&acc, &three)?;
    }
    Ok(acc.with_name(format!("three_points_power({k})")))
}

/// The deleted join: faces `σ ⊔ τ` (second copy shifted by `K.n()`) with
/// `σ, τ` disjoint faces of `K`.
pub fn deleted_join(k: &SimplicialComplex) -> Result<SimplicialComplex, ComplexError> {
    let n = 2 * k.n;
    check_ground_set(n)?;
    let lattice = k.face_lattice();
    let faces = lattice.faces();
    let ground = full_set(k.n);
    let extendable = |s: VertexSet, used: VertexSet| {
        let mut free = ground & !used;
        while free != 0 {
            let bit = free & free.wrapping_neg();
            if lattice.contains(s | bit) {
                return true;
            }
            free &= free - 1;
        }
        false
    };
    let shift = k.n as u32;
    let mut sets = Vec::new();
    for &s in faces {
        for &t in faces {
            if s & t != 0 || (s | t) == 0 {
                continue;
            }
            let used = s | t;
            if extendable(s, used) || extendable(t, used) {
                continue;
            }
            sets.push(s | (t << shift));
        }
    }
    Ok(SimplicialComplex::from_sets_unchecked(n, sets))
}

const RP2_6: &str = include_str!("../data/rp2_6.json");
const CP2_9: &str = include_str!("../data/cp2_9.json");

/// Bundled triangulations: `rp2_6` (six-vertex real projective plane) and
/// `cp2_9` (nine-vertex complex projective plane).
pub fn named(id: &str) -> Result<SimplicialComplex, ComplexError> {
    let text = match id {
        "rp2_6" => RP2_6,
        "cp2_9" => CP2_9,
        other => return Err(ComplexError::UnknownName(other.to_string())),
    };
    let k: SimplicialComplex = serde_json::from_str(text).expect("bundled complex data is valid JSON");
    Ok(k)
}

/// Identifiers accepted by [`named`].
pub const NAMED_COMPLEXES: [&str; 2] = ["rp2_6", "cp2_9"];

/// Euclidean projection onto the probability simplex (sort and threshold).
pub fn project_onto_simplex(v: &[f64]) -> Vec<f64> {
    if v.is_empty() {
        return Vec::new();
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let t = (cumulative - 1.0) / (i as f64 + 1.0);
        if u - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Squared distance from `x` to the simplex spanned by the basis vectors of
/// `face`.
pub fn dist_sq_to_face(x: &[f64], face: VertexSet) -> f64 {
    let mut inside = Vec::with_capacity(face.count_ones() as usize);
    let mut outside = 0.0;
    for (i, &xi) in x.iter().enumerate() {
        if i < 64 && face & (1u64 << i) != 0 {
            inside.push(xi);
        } else {
            outside += xi * xi;
        }
    }
    let p = project_onto_simplex(&inside);
    outside + inside.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
}

/// Euclidean distance from `x ∈ ℝ^n` to the realization of `k` inside the
/// standard simplex (vertex `i` at the `i`-th basis vector).
pub fn dist_to_subcomplex(x: &[f64], k: &SimplicialComplex) -> Result<f64, ComplexError> {
    if x.len() != k.n {
        return Err(ComplexError::DimensionMismatch {
            expected: k.n,
            got: x.len(),
        });
    }
    if k.facets.is_empty() {
        return Err(ComplexError::EmptyComplex);
    }
    let best = k.facets.iter().map(|&f| dist_sq_to_face(x, f)).fold(f64::INFINITY, f64::min);
    Ok(best.sqrt())
}

/// A point of the standard simplex in barycentric coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizedPoint {
    pub weights: Vec<f64>,
}

impl RealizedPoint {
    pub fn new(weights: Vec<f64>) -> Result<Self, ComplexError> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(ComplexError::InvalidWeights("negative or non-finite weight".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(ComplexError::InvalidWeights(format!("weights sum to {total}")));
        }
        Ok(RealizedPoint { weights })
    }

    /// The vertex `i` (1-based) of the simplex on `n` vertices.
    pub fn vertex(n: usize, i: usize) -> Self {
        let mut weights = vec![0.0; n];
        weights[i - 1] = 1.0;
        RealizedPoint { weights }
    }

    /// Placeholder carried by a join point whose weight is zero.
    pub fn ignored(n: usize) -> Self {
        RealizedPoint { weights: vec![0.0; n] }
    }

    pub fn support(&self) -> VertexSet {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .fold(0, |acc, (i, _)| acc | (1u64 << i))
    }
}

/// A point `λ₁x₁ + λ₂x₂` of a deleted join of a simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeletedJoinPoint {
    pub lambda1: f64,
    pub lambda2: f64,
    pub p1: RealizedPoint,
    pub p2: RealizedPoint,
}

impl DeletedJoinPoint {
    /// Interchange the join factors.
    pub fn swapped(&self) -> Self {
        DeletedJoinPoint {
            lambda1: self.lambda2,
            lambda2: self.lambda1,
            p1: self.p2.clone(),
            p2: self.p1.clone(),
        }
    }
}

/// Identification of the deleted join of `Δ_m` with the boundary of the
/// `(m+1)`-crosspolytope, viewed as the unit sphere `S^m ⊂ ℝ^{m+1}`.
///
/// The positive part of `z / ‖z‖₁` is `λ₁x₁` and the negative part is `λ₂x₂`,
/// so swapping the join factors is the antipodal map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrosspolytopeChart {
    pub m: usize,
}

impl CrosspolytopeChart {
    pub fn new(m: usize) -> Self {
        CrosspolytopeChart { m }
    }

    /// Ambient dimension `m + 1`.
    pub fn ambient(&self) -> usize {
        self.m + 1
    }

    pub fn to_join(&self, z: &[f64]) -> Result<DeletedJoinPoint, ComplexError> {
        if z.len() != self.ambient() {
            return Err(ComplexError::DimensionMismatch {
                expected: self.ambient(),
                got: z.len(),
            });
        }
        let l1: f64 = z.iter().map(|v| v.abs()).sum();
        if l1 == 0.0 || !l1.is_finite() {
            return Err(ComplexError::ZeroVector);
        }
        let n = z.len();
        let pos: Vec<f64> = z.iter().map(|&v| if v > 0.0 { v / l1 } else { 0.0 }).collect();
        let neg: Vec<f64> = z.iter().map(|&v| if v < 0.0 { -v / l1 } else { 0.0 }).collect();
        let lambda1: f64 = pos.iter().sum();
        let lambda2: f64 = neg.iter().sum();
        let normalize = |part: Vec<f64>, lambda: f64| {
            if lambda > 0.0 {
                RealizedPoint {
                    weights: part.into_iter().map(|v| v / lambda).collect(),
                }
            } else {
                RealizedPoint::ignored(n)
            }
        };
        Ok(DeletedJoinPoint {
            lambda1,
            lambda2,
            p1: normalize(pos, lambda1),
            p2: normalize(neg, lambda2),
        })
    }

    /// Inverse of [`CrosspolytopeChart::to_join`], landing on the unit sphere.
    pub fn to_sphere(&self, p: &DeletedJoinPoint) -> Result<Vec<f64>, ComplexError> {
        let n = self.ambient();
        if p.p1.weights.len() != n || p.p2.weights.len() != n {
            return Err(ComplexError::DimensionMismatch {
                expected: n,
                got: p.p1.weights.len().max(p.p2.weights.len()),
            });
        }
        let v: Vec<f64> = (0..n).map(|i| p.lambda1 * p.p1.weights[i] - p.lambda2 * p.p2.weights[i]).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(ComplexError::ZeroVector);
        }
        Ok(v.into_iter().map(|a| a / norm).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sets(k: &SimplicialComplex) -> Vec<Vec<usize>> {
        k.face_lattice().faces().iter().map(|&f| vertices_of(f)).collect()
    }

    #[test]
    fn path_complex_faces() {
        let k = SimplicialComplex::from_facets(3, &[vec![1, 2], vec![2, 3]]).unwrap();
        assert_eq!(sets(&k), vec![vec![], vec![1], vec![2], vec![3], vec![1, 2], vec![2, 3]]);
    }

    #[test]
    fn contained_facets_are_dropped() {
        let k = SimplicialComplex::from_facets(3, &[vec![1], vec![1, 2, 3], vec![2, 3]]).unwrap();
        assert_eq!(k.facet_vertices(), vec![vec![1, 2, 3]]);
        assert_eq!(k.dim(), 2);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(SimplicialComplex::from_facets(0, &[]), Err(ComplexError::EmptyGroundSet));
        assert_eq!(
            SimplicialComplex::from_facets(3, &[vec![1, 4]]),
            Err(ComplexError::VertexOutOfRange { vertex: 4, n: 3 })
        );
        assert_eq!(SimplicialComplex::from_facets(65, &[]), Err(ComplexError::TooManyVertices(65)));
        assert!(matches!(skeleton(2, 3), Err(ComplexError::SkeletonTooLarge { .. })));
        assert!(matches!(named("klein"), Err(ComplexError::UnknownName(_))));
    }

    #[test]
    fn skeleton_faces() {
        let k = skeleton(4, 1).unwrap();
        assert_eq!(k.n(), 5);
        assert_eq!(k.f_vector(), vec![5, 10]);
        assert_eq!(skeleton(2, 2).unwrap().facet_vertices(), vec![vec![1, 2, 3]]);
    }

    #[test]
    fn k_subsets_counts() {
        assert_eq!(k_subsets(5, 2).len(), 10);
        assert_eq!(k_subsets(64, 1).len(), 64);
        assert_eq!(k_subsets(3, 4).len(), 0);
        assert_eq!(k_subsets(4, 4), vec![0b1111]);
    }

    #[test]
    fn joins() {
        let point = SimplicialComplex::from_facets(1, &[vec![1]]).unwrap();
        assert_eq!(join(&point, &point).unwrap().facet_vertices(), vec![vec![1, 2]]);
        let k33 = three_points_power(1).unwrap();
        assert_eq!(k33.f_vector(), vec![6, 9]);
        let pts = skeleton(2, 0).unwrap();
        assert_eq!(join(&pts, &pts).unwrap().dim(), pts.dim() + pts.dim() + 1);
    }

    #[test]
    fn three_points_power_minimal_nonfaces_are_block_pairs() {
        for k in 0..=3 {
            let c = three_points_power(k).unwrap();
            let mn = c.minimal_nonfaces();
            assert_eq!(mn.len(), 3 * (k + 1));
            for s in mn {
                let v = vertices_of(s);
                assert_eq!(v.len(), 2);
                assert_eq!((v[0] - 1) / 3, (v[1] - 1) / 3);
            }
        }
    }

    #[test]
    fn deleted_join_of_point_is_two_points() {
        let point = SimplicialComplex::from_facets(1, &[vec![1]]).unwrap();
        let dj = deleted_join(&point).unwrap();
        assert_eq!(dj.facet_vertices(), vec![vec![1], vec![2]]);
    }

    #[test]
    fn deleted_join_of_simplex_is_crosspolytope_boundary() {
        for n in 0..=4usize {
            let simplex = skeleton(n, n).unwrap();
            let dj = deleted_join(&simplex).unwrap();
            assert_eq!(dj.facets().len(), 1 << (n + 1));
            let expected = if n % 2 == 0 { 2 } else { 0 };
            assert_eq!(dj.euler_characteristic(), expected, "n = {n}");
        }
    }

    #[test]
    fn projection_onto_simplex() {
        assert_eq!(project_onto_simplex(&[0.2, 0.8]), vec![0.2, 0.8]);
        let p = project_onto_simplex(&[0.0, 0.5, 0.5, 7.0]);
        assert_eq!(p, vec![0.0, 0.0, 0.0, 1.0]);
        let p = project_onto_simplex(&[1.0, 1.0]);
        assert!((p[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn distances() {
        let k = SimplicialComplex::from_facets(3, &[vec![1], vec![2, 3]]).unwrap();
        assert_eq!(dist_to_subcomplex(&[1.0, 0.0, 0.0], &k).unwrap(), 0.0);
        let edge = SimplicialComplex::from_facets(3, &[vec![2, 3]]).unwrap();
        let d = dist_to_subcomplex(&[1.0, 0.0, 0.0], &edge).unwrap();
        assert!((d - 1.5f64.sqrt()).abs() < 1e-12);
        assert!(matches!(
            dist_to_subcomplex(&[1.0], &edge),
            Err(ComplexError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn chart_basics() {
        let chart = CrosspolytopeChart::new(2);
        let p = chart.to_join(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(p.lambda1, 1.0);
        assert_eq!(p.lambda2, 0.0);
        assert_eq!(p.p1, RealizedPoint::vertex(3, 1));
        let p = chart.to_join(&[0.5, -0.5, 0.0]).unwrap();
        assert_eq!((p.lambda1, p.lambda2), (0.5, 0.5));
        assert_eq!(p.p1, RealizedPoint::vertex(3, 1));
        assert_eq!(p.p2, RealizedPoint::vertex(3, 2));
        assert_eq!(chart.to_join(&[0.0; 3]), Err(ComplexError::ZeroVector));
    }

    #[test]
    fn complex_json_round_trip() {
        let k = named("rp2_6").unwrap();
        let text = serde_json::to_string(&k).unwrap();
        let back: SimplicialComplex = serde_json::from_str(&text).unwrap();
        assert_eq!(k, back);
        let bad: Result<SimplicialComplex, _> = serde_json::from_str(r#"{"n": 2, "facets": [[3]]}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn from_minimal_nonfaces_recovers_skeleton() {
        let k = skeleton(4, 1).unwrap();
        let rebuilt = SimplicialComplex::from_minimal_nonfaces(5, &k.minimal_nonfaces()).unwrap();
        assert_eq!(rebuilt.facets(), k.facets());
    }
}
