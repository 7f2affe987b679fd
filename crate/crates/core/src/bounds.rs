//! Bounds on the minimum dimension `d(X,Y)` of a coupled (almost-)embedding.
//!
//! Upper bounds come from catalog bilinear maps applied to embeddings of the
//! factors; lower bounds come from zeros forced in equivariant maps. Every
//! bound carries a trace whose steps can be re-executed from their recorded
//! inputs.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bilinear::{catalog_min_dim, BilinearError};
use crate::hopf::shares_binary_one;
use crate::kneser::{kneser_graph, KneserError};
use crate::par::{map_slice, Execution};
use crate::simplicial::{self, ComplexError, SimplicialComplex};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("space `{0}` has no embedding dimension")]
    MissingEmbeddingDim(String),
    #[error("embedding dimension {e} of `{space}` is below {min}")]
    EmbeddingDimTooSmall { space: String, e: usize, min: usize },
    #[error("unknown space `{0}`")]
    UnknownSpace(String),
    #[error("manifold dimension must be positive")]
    ZeroDimension,
    #[error("trace step {step} does not replay: {reason}")]
    Replay { step: usize, reason: String },
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Kneser(#[from] KneserError),
    #[error(transparent)]
    Bilinear(#[from] BilinearError),
}

/// JSON input describing a space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceSpec {
    Complex {
        complex: SimplicialComplex,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        embedding_dim: Option<usize>,
    },
    /// `rp2_6`, `cp2_9`, `skeleton(m,k)`, `three_points_power(k)` or `sphere(m)`.
    Named {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        embedding_dim: Option<usize>,
    },
    Sphere {
        m: usize,
    },
    Manifold {
        dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        embedding_dim: Option<usize>,
    },
}

/// What the bound rules need to know about a space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceKind {
    /// `c` is the chromatic number of the Kneser graph of nonfaces.
    Complex {
        n: usize,
        dim: usize,
        c: usize,
    },
    Sphere {
        m: usize,
    },
    Manifold {
        dim: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceDescriptor {
    pub label: String,
    #[serde(flatten)]
    pub kind: SpaceKind,
    pub embedding_dim: Option<usize>,
}

impl fmt::Display for SpaceDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

fn parse_args(id: &str, prefix: &str) -> Option<Vec<usize>> {
    let inner = id.strip_prefix(prefix)?.strip_prefix('(')?.strip_suffix(')')?;
    inner.split(',').map(|s| s.trim().parse().ok()).collect()
}

/// Curated embedding dimensions of the named triangulations.
fn curated_embedding_dim(name: &str) -> Option<usize> {
    match name {
        "rp2_6" => Some(4),
        "cp2_9" => Some(7),
        _ => None,
    }
}

/// Resolves `rp2_6`, `cp2_9`, `skeleton(m,k)` and `three_points_power(k)`.
pub fn named_complex(id: &str) -> Result<SimplicialComplex, BoundsError> {
    let id = id.trim();
    if let Some(args) = parse_args(id, "skeleton") {
        if let [m, k] = args[..] {
            return Ok(simplicial::skeleton(m, k)?);
        }
    }
    if let Some(args) = parse_args(id, "three_points_power") {
        if let [k] = args[..] {
            return Ok(simplicial::three_points_power(k)?);
        }
    }
    simplicial::named(id).map_err(|_| BoundsError::UnknownSpace(id.to_string()))
}

impl SpaceDescriptor {
    pub fn sphere(m: usize) -> Self {
        SpaceDescriptor {
            label: format!("S^{m}"),
            kind: SpaceKind::Sphere { m },
            embedding_dim: Some(m + 1),
        }
    }

    pub fn manifold(label: impl Into<String>, dim: usize, embedding_dim: Option<usize>) -> Result<Self, BoundsError> {
        if dim == 0 {
            return Err(BoundsError::ZeroDimension);
        }
        Ok(SpaceDescriptor {
            label: label.into(),
            kind: SpaceKind::Manifold { dim },
            embedding_dim,
        })
    }

    /// Computes the Kneser chromatic number; the embedding dimension defaults
    /// to a curated value for named triangulations and `2·dim + 1` otherwise.
    pub fn complex(k: &SimplicialComplex, embedding_dim: Option<usize>) -> Result<Self, BoundsError> {
        let c = match kneser_graph(k, true) {
            Ok(g) => g.chromatic_number().0,
            Err(KneserError::NoNonfaces) => 0,
            Err(e) => return Err(e.into()),
        };
        if k.dim() < 0 {
            return Err(ComplexError::EmptyComplex.into());
        }
        let dim = k.dim() as usize;
        let label = k.name().map_or_else(|| format!("complex(n={})", k.n()), str::to_string);
        let e = embedding_dim
            .or_else(|| k.name().and_then(curated_embedding_dim))
            .unwrap_or(2 * dim + 1);
        if e < dim + 1 {
            return Err(BoundsError::EmbeddingDimTooSmall {
                space: label,
                e,
                min: dim + 1,
            });
        }
        Ok(SpaceDescriptor {
            label,
            kind: SpaceKind::Complex { n: k.n(), dim, c },
            embedding_dim: Some(e),
        })
    }

    pub fn named(id: &str) -> Result<Self, BoundsError> {
        if let Some(args) = parse_args(id.trim(), "sphere") {
            if let [m] = args[..] {
                return Ok(Self::sphere(m));
            }
        }
        Self::complex(&named_complex(id)?, None)
    }

    pub fn from_spec(spec: &SpaceSpec) -> Result<Self, BoundsError> {
        let mut d = match spec {
            SpaceSpec::Complex { complex, embedding_dim } => Self::complex(complex, *embedding_dim)?,
            SpaceSpec::Named { name, embedding_dim } => {
                let mut d = Self::named(name)?;
                if embedding_dim.is_some() {
                    d.embedding_dim = *embedding_dim;
                }
                d
            }
            SpaceSpec::Sphere { m } => Self::sphere(*m),
            SpaceSpec::Manifold { dim, embedding_dim } => Self::manifold(format!("manifold(dim={dim})"), *dim, *embedding_dim)?,
        };
        if let (Some(e), Some(min)) = (d.embedding_dim, d.dimension().map(|v| v + 1)) {
            if e < min {
                return Err(BoundsError::EmbeddingDimTooSmall { space: d.label, e, min });
            }
        }
        if let SpaceKind::Sphere { m } = d.kind {
            d.embedding_dim = Some(m + 1);
        }
        Ok(d)
    }

    pub fn dimension(&self) -> Option<usize> {
        match self.kind {
            SpaceKind::Complex { dim, .. } => Some(dim),
            SpaceKind::Sphere { m } => Some(m),
            SpaceKind::Manifold { dim } => Some(dim),
        }
    }

    fn require_embedding_dim(&self) -> Result<usize, BoundsError> {
        self.embedding_dim
            .ok_or_else(|| BoundsError::MissingEmbeddingDim(self.label.clone()))
    }
}

/// Which maps a bound is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Notion {
    CoupledEmbedding,
    CoupledAlmostEmbedding,
}

/// One replayable rule application.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Step {
    /// The factor embeds in `ℝ^dim`.
    Embedding { space: String, dim: usize },
    /// The smallest catalog nonsingular bilinear map `ℝ^a × ℝ^b → ℝ^value`.
    CatalogBilinear {
        a: usize,
        b: usize,
        value: usize,
        construction: Vec<String>,
    },
    /// Coloring maps of two complexes force a zero when `n₁−c₁−2` and
    /// `n₂−c₂−2` share no binary one.
    ComplexPair {
        n1: usize,
        c1: usize,
        n2: usize,
        c2: usize,
        value: usize,
    },
    /// Coloring map of a complex against `S^m` forces a zero when `m` and
    /// `n−c−2` share no binary one.
    ComplexSphere { n: usize, c: usize, m: usize, value: usize },
    /// Biskew maps `S^a × S^b → ℝ^{a+b}` have zeros when `a`, `b` share no
    /// binary one.
    BiskewSpheres { a: usize, b: usize, value: usize },
    /// The pair-configuration space of a factor contains an antipodal
    /// `S^sphere`: the sphere itself, or a small sphere in a chart of a manifold.
    ConfigurationSphere {
        space: String,
        manifold_dim: Option<usize>,
        sphere: usize,
    },
    /// Restricting to an antipodally invariant sub-sphere `S^from ⊂ S^to`
    /// keeps the lower bound.
    SphereRestriction { from: usize, to: usize, value: usize },
}

impl Step {
    /// Rule composed from the stated results rather than stated outright.
    pub fn is_derived(&self) -> bool {
        matches!(self, Step::SphereRestriction { .. } | Step::ConfigurationSphere { .. })
    }

    /// Re-executes the rule from its inputs; returns the bound it yields.
    fn replay(&self) -> Result<Option<usize>, String> {
        let check = |ok: bool, msg: &str, v: usize| if ok { Ok(Some(v)) } else { Err(msg.to_string()) };
        match self {
            Step::Embedding { dim, .. } => check(*dim > 0, "embedding dimension must be positive", *dim).map(|_| None),
            Step::CatalogBilinear { a, b, value, construction } => {
                let entry = catalog_min_dim(*a, *b).map_err(|e| e.to_string())?;
                check(entry.d == *value && &entry.trace == construction, "catalog disagrees", *value)
            }
            Step::ComplexPair { n1, c1, n2, c2, value } => {
                let v = complex_pair_value(*n1, *c1, *n2, *c2);
                check(v == Some(*value), "complex pair rule does not apply", *value)
            }
            Step::ComplexSphere { n, c, m, value } => {
                let v = complex_sphere_value(*n, *c, *m);
                check(v == Some(*value), "complex sphere rule does not apply", *value)
            }
            Step::BiskewSpheres { a, b, value } => check(
                !shares_binary_one(*a as u64, *b as u64) && a + b + 1 == *value,
                "biskew rule does not apply",
                *value,
            ),
            Step::ConfigurationSphere { manifold_dim, sphere, .. } => {
                let ok = manifold_dim.is_none_or(|d| d >= 1 && *sphere < d);
                check(ok, "no such sphere in the configuration space", *sphere).map(|_| None)
            }
            Step::SphereRestriction { from, to, value } => check(from <= to, "restriction must go to a sub-sphere", *value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bound {
    /// `None` when no rule applies.
    pub value: Option<usize>,
    pub notion: Notion,
    pub trace: Vec<Step>,
}

impl Bound {
    fn unknown(notion: Notion) -> Self {
        Bound {
            value: None,
            notion,
            trace: Vec::new(),
        }
    }

    /// Re-executes every step; the result is the value of the last step that
    /// yields one.
    pub fn replay(&self) -> Result<Option<usize>, BoundsError> {
        let mut last = None;
        for (i, step) in self.trace.iter().enumerate() {
            match step.replay() {
                Ok(Some(v)) => last = Some(v),
                Ok(None) => {}
                Err(reason) => return Err(BoundsError::Replay { step: i, reason }),
            }
        }
        if last != self.value {
            return Err(BoundsError::Replay {
                step: self.trace.len(),
                reason: format!("trace yields {last:?}, bound records {:?}", self.value),
            });
        }
        Ok(last)
    }
}

/// `n₁+n₂−c₁−c₂−3` when `n₁−c₁−2`, `n₂−c₂−2` are nonnegative and share no
/// binary one.
pub fn complex_pair_value(n1: usize, c1: usize, n2: usize, c2: usize) -> Option<usize> {
    let p = n1.checked_sub(c1 + 2)?;
    let q = n2.checked_sub(c2 + 2)?;
    (!shares_binary_one(p as u64, q as u64)).then_some(p + q + 1)
}

/// `m + (n−c−2) + 1` when `m` and `n−c−2` share no binary one.
pub fn complex_sphere_value(n: usize, c: usize, m: usize) -> Option<usize> {
    let p = n.checked_sub(c + 2)?;
    (!shares_binary_one(m as u64, p as u64)).then_some(m + p + 1)
}

/// `(a, b)` maximizing `a + b` over `a ≤ s`, `b ≤ t` with no shared binary
/// one; ties go to the largest `a`.
fn best_disjoint_pair(s: usize, t: usize) -> (usize, usize) {
    let mut best = (0, 0);
    for a in 0..=s {
        for b in (0..=t).rev() {
            if !shares_binary_one(a as u64, b as u64) {
                if a + b >= best.0 + best.1 {
                    best = (a, b);
                }
                break;
            }
        }
    }
    best
}

/// `d(X,Y) ≤ catalog_min_dim(e_X, e_Y)`.
pub fn upper_bound(x: &SpaceDescriptor, y: &SpaceDescriptor) -> Result<Bound, BoundsError> {
    let (ex, ey) = (x.require_embedding_dim()?, y.require_embedding_dim()?);
    let entry = catalog_min_dim(ex, ey)?;
    Ok(Bound {
        value: Some(entry.d),
        notion: Notion::CoupledEmbedding,
        trace: vec![
            Step::Embedding {
                space: x.label.clone(),
                dim: ex,
            },
            Step::Embedding {
                space: y.label.clone(),
                dim: ey,
            },
            Step::CatalogBilinear {
                a: ex,
                b: ey,
                value: entry.d,
                construction: entry.trace,
            },
        ],
    })
}

/// Lower bound for two complexes from their Kneser chromatic numbers.
pub fn lower_bound_complexes(n1: usize, c1: usize, n2: usize, c2: usize) -> Bound {
    match complex_pair_value(n1, c1, n2, c2) {
        Some(value) => Bound {
            value: Some(value),
            notion: Notion::CoupledAlmostEmbedding,
            trace: vec![Step::ComplexPair { n1, c1, n2, c2, value }],
        },
        None => Bound::unknown(Notion::CoupledAlmostEmbedding),
    }
}

/// Lower bound for a complex against `S^m`, using the best sub-sphere
/// `S^{m′} ⊂ S^m`.
pub fn lower_bound_sphere(n: usize, c: usize, m: usize) -> Bound {
    let Some(p) = n.checked_sub(c + 2) else {
        return Bound::unknown(Notion::CoupledAlmostEmbedding);
    };
    let sub = (0..=m)
        .rev()
        .find(|&mm| !shares_binary_one(mm as u64, p as u64))
        .expect("m′ = 0 always qualifies");
    let value = sub + p + 1;
    let mut trace = vec![Step::ComplexSphere { n, c, m: sub, value }];
    if sub < m {
        trace.push(Step::SphereRestriction { from: sub, to: m, value });
    }
    Bound {
        value: Some(value),
        notion: Notion::CoupledAlmostEmbedding,
        trace,
    }
}

/// Lower bound from antipodal spheres of dimensions `s`, `t` inside the pair
/// configuration spaces; reported unknown below dimension 2.
fn lower_bound_configuration(x: &SpaceDescriptor, s: usize, y: &SpaceDescriptor, t: usize) -> Bound {
    let (a, b) = best_disjoint_pair(s, t);
    let value = a + b + 1;
    if value < 2 {
        return Bound::unknown(Notion::CoupledEmbedding);
    }
    let config = |d: &SpaceDescriptor, sphere: usize| Step::ConfigurationSphere {
        space: d.label.clone(),
        manifold_dim: match d.kind {
            SpaceKind::Manifold { dim } => Some(dim),
            _ => None,
        },
        sphere,
    };
    let mut trace = vec![config(x, s), config(y, t), Step::BiskewSpheres { a, b, value }];
    if a < s {
        trace.push(Step::SphereRestriction { from: a, to: s, value });
    }
    if b < t {
        trace.push(Step::SphereRestriction { from: b, to: t, value });
    }
    Bound {
        value: Some(value),
        notion: Notion::CoupledEmbedding,
        trace,
    }
}

/// Lower bound for closed manifolds of dimensions `p`, `q`.
pub fn lower_bound_manifolds(p: usize, q: usize) -> Result<Bound, BoundsError> {
    let x = SpaceDescriptor::manifold(format!("manifold(dim={p})"), p, None)?;
    let y = SpaceDescriptor::manifold(format!("manifold(dim={q})"), q, None)?;
    Ok(lower_bound_configuration(&x, p - 1, &y, q - 1))
}

fn configuration_sphere(d: &SpaceDescriptor) -> Option<usize> {
    match d.kind {
        SpaceKind::Sphere { m } => Some(m),
        SpaceKind::Manifold { dim } => Some(dim - 1),
        SpaceKind::Complex { .. } => None,
    }
}

/// The best applicable lower bound for `(X, Y)`.
pub fn lower_bound(x: &SpaceDescriptor, y: &SpaceDescriptor) -> Bound {
    match (&x.kind, &y.kind) {
        (SpaceKind::Complex { n: n1, c: c1, .. }, SpaceKind::Complex { n: n2, c: c2, .. }) => lower_bound_complexes(*n1, *c1, *n2, *c2),
        (SpaceKind::Complex { n, c, .. }, SpaceKind::Sphere { m }) | (SpaceKind::Sphere { m }, SpaceKind::Complex { n, c, .. }) => {
            lower_bound_sphere(*n, *c, *m)
        }
        _ => match (configuration_sphere(x), configuration_sphere(y)) {
            (Some(s), Some(t)) => lower_bound_configuration(x, s, y, t),
            _ => Bound::unknown(Notion::CoupledEmbedding),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundsCertificate {
    #[serde(rename = "X")]
    pub x: SpaceDescriptor,
    #[serde(rename = "Y")]
    pub y: SpaceDescriptor,
    pub lower: Bound,
    pub upper: Bound,
    pub tight: bool,
}

impl BoundsCertificate {
    /// Replays both traces and checks `L ≤ U`.
    pub fn replay(&self) -> Result<(), BoundsError> {
        let l = self.lower.replay()?;
        let u = self.upper.replay()?;
        if let (Some(l), Some(u)) = (l, u) {
            if l > u {
                return Err(BoundsError::Replay {
                    step: 0,
                    reason: format!("lower bound {l} exceeds upper bound {u}"),
                });
            }
        }
        Ok(())
    }
}

pub fn certificate(x: &SpaceDescriptor, y: &SpaceDescriptor) -> Result<BoundsCertificate, BoundsError> {
    let upper = upper_bound(x, y)?;
    let lower = lower_bound(x, y);
    let tight = lower.value.is_some() && lower.value == upper.value;
    Ok(BoundsCertificate {
        x: x.clone(),
        y: y.clone(),
        lower,
        upper,
        tight,
    })
}

/// Row families of [`reproduce_table`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Pairs among `[3]^{*(p+1)}` and `Δ^{(p)}_{2p+2}` with `p & q = 0`.
    ComplexPairs,
    Rp2Sphere,
    Cp2Sphere,
    SkeletonCircle,
    ThreePointsCircle,
    Rp2Skeleton,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub family: Family,
    pub x: String,
    pub y: String,
    /// Value of the closed form for this instance.
    pub formula: usize,
    pub lower: Option<usize>,
    pub upper: usize,
    pub tight: bool,
    /// Both bounds equal the closed form.
    pub matches: bool,
}

/// Closed forms reproduced by [`reproduce_table`].
pub mod closed_form {
    pub fn complex_pairs(p: usize, q: usize) -> usize {
        2 * p + 2 * q + 1
    }

    pub fn rp2_sphere(k: usize) -> usize {
        4 * (k / 4) + 4
    }

    pub fn cp2_sphere(k: usize) -> usize {
        if k.is_multiple_of(8) {
            k + 7
        } else {
            8 * k.div_ceil(8)
        }
    }

    pub fn circle(k: usize) -> usize {
        2 * k + 2
    }

    pub fn rp2_skeleton(q: usize) -> usize {
        4 * q + 4
    }
}

pub const COMPLEX_PAIR_MAX: usize = 8;
pub const RP2_SPHERE_MAX: usize = 16;
pub const CP2_SPHERE_MAX: usize = 24;
pub const CIRCLE_MAX: usize = 6;
pub const RP2_SKELETON_MAX: usize = 4;

struct Instance {
    family: Family,
    x: usize,
    y: usize,
    formula: usize,
}

/// Evaluates every instance of the reproduced families, one row per
/// instance, in a fixed order.
pub fn reproduce_table(execution: Execution) -> Result<Vec<TableRow>, BoundsError> {
    let mut ids: Vec<String> = Vec::new();
    let mut intern = |id: String| -> usize {
        ids.push(id);
        ids.len() - 1
    };
    let three: Vec<usize> = (0..=COMPLEX_PAIR_MAX.max(CIRCLE_MAX))
        .map(|k| intern(format!("three_points_power({k})")))
        .collect();
    let skel: Vec<usize> = (0..=COMPLEX_PAIR_MAX.max(CIRCLE_MAX).max(2 * RP2_SKELETON_MAX))
        .map(|k| intern(format!("skeleton({},{k})", 2 * k + 2)))
        .collect();
    let spheres: Vec<usize> = (0..=CP2_SPHERE_MAX.max(RP2_SPHERE_MAX))
        .map(|m| intern(format!("sphere({m})")))
        .collect();
    let rp2 = intern("rp2_6".into());
    let cp2 = intern("cp2_9".into());

    let mut instances = Vec::new();
    for p in 0..=COMPLEX_PAIR_MAX {
        for q in 0..=COMPLEX_PAIR_MAX {
            if p & q != 0 {
                continue;
            }
            let formula = closed_form::complex_pairs(p, q);
            for (x, y) in [(three[p], three[q]), (skel[p], three[q]), (skel[p], skel[q])] {
                instances.push(Instance {
                    family: Family::ComplexPairs,
                    x,
                    y,
                    formula,
                });
            }
        }
    }
    for k in 1..=RP2_SPHERE_MAX {
        instances.push(Instance {
            family: Family::Rp2Sphere,
            x: rp2,
            y: spheres[k],
            formula: closed_form::rp2_sphere(k),
        });
    }
    for k in 1..=CP2_SPHERE_MAX {
        instances.push(Instance {
            family: Family::Cp2Sphere,
            x: cp2,
            y: spheres[k],
            formula: closed_form::cp2_sphere(k),
        });
    }
    for k in 0..=CIRCLE_MAX {
        let formula = closed_form::circle(k);
        instances.push(Instance {
            family: Family::SkeletonCircle,
            x: skel[k],
            y: spheres[1],
            formula,
        });
        instances.push(Instance {
            family: Family::ThreePointsCircle,
            x: three[k],
            y: spheres[1],
            formula,
        });
    }
    for q in 0..=RP2_SKELETON_MAX {
        instances.push(Instance {
            family: Family::Rp2Skeleton,
            x: rp2,
            y: skel[2 * q],
            formula: closed_form::rp2_skeleton(q),
        });
    }

    let resolved: Vec<Result<SpaceDescriptor, BoundsError>> = map_slice(&ids, execution, |id| SpaceDescriptor::named(id));
    let resolved: Vec<SpaceDescriptor> = resolved.into_iter().collect::<Result<_, _>>()?;

    let rows: Vec<Result<TableRow, BoundsError>> = map_slice(&instances, execution, |inst| {
        let (x, y) = (&resolved[inst.x], &resolved[inst.y]);
        let cert = certificate(x, y)?;
        let upper = cert.upper.value.expect("upper bounds always exist");
        Ok(TableRow {
            family: inst.family,
            x: x.label.clone(),
            y: y.label.clone(),
            formula: inst.formula,
            lower: cert.lower.value,
            upper,
            tight: cert.tight,
            matches: cert.tight && upper == inst.formula,
        })
    });
    rows.into_iter().collect()
}
