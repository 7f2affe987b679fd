//! Product maps `f : X × Y → ℝ^d`, the parallelogram defect, and the
//! equivariant maps whose zeros witness coupled nonembeddability.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bilinear::{BilinearError, BilinearMap, BilinearSpec, NonsingularityCertificate, Scalar};
use crate::hopf::ActionSignature;
use crate::kneser::{ColoredComplex, Coloring, KneserError};
use crate::optim::{dot, norm, Factor};
use crate::simplicial::{
    dist_sq_to_face, project_onto_simplex, vertices_of, ComplexError, CrosspolytopeChart, DeletedJoinPoint, SimplicialComplex,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("point has {got} coordinates, domain {domain} expects {expected}")]
    DimensionMismatch { domain: String, expected: usize, got: usize },
    #[error("point is not in domain {0}")]
    OutsideDomain(String),
    #[error("operation needs sphere factors, got {0}")]
    NotSphere(String),
    #[error("operation needs box factors, got {0}")]
    NotBox(String),
    #[error("operation needs simplicial factors, got {0}")]
    NotComplex(String),
    #[error("unknown embedding `{0}`")]
    UnknownEmbedding(String),
    #[error("embedding target {target} does not match bilinear input dimension {expected}")]
    EmbeddingMismatch { expected: usize, target: usize },
    #[error("stencil of step {h} leaves the box around coordinate {coordinate}")]
    StencilOutsideBox { h: f64, coordinate: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Bilinear(#[from] BilinearError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Kneser(#[from] KneserError),
}

/// Tolerance for domain membership checks.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

/// A factor of a product map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Domain {
    /// Unit sphere `S^m ⊂ ℝ^{m+1}`.
    Sphere { m: usize },
    /// `ℝP^m`, represented by points of `S^m` modulo `±`.
    Projective { m: usize },
    /// Realization of a complex inside the standard simplex of `ℝ^n`.
    Complex { complex: SimplicialComplex },
    /// Axis-aligned box in `ℝ^p`.
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Sphere { m } => write!(f, "sphere({m})"),
            Domain::Projective { m } => write!(f, "projective({m})"),
            Domain::Complex { complex } => match complex.name() {
                Some(name) => write!(f, "complex({name})"),
                None => write!(f, "complex(n={})", complex.n()),
            },
            Domain::Box { lo, .. } => write!(f, "box({})", lo.len()),
        }
    }
}

impl Domain {
    /// The full simplex on `n` vertices.
    pub fn simplex(n: usize) -> Result<Self, MapError> {
        let complex = crate::simplicial::skeleton(n - 1, n - 1)?;
        Ok(Domain::Complex { complex })
    }

    pub fn unit_box(p: usize) -> Self {
        Domain::Box {
            lo: vec![-1.0; p],
            hi: vec![1.0; p],
        }
    }

    pub fn ambient(&self) -> usize {
        match self {
            Domain::Sphere { m } | Domain::Projective { m } => m + 1,
            Domain::Complex { complex } => complex.n(),
            Domain::Box { lo, .. } => lo.len(),
        }
    }

    pub fn is_sphere(&self) -> bool {
        matches!(self, Domain::Sphere { .. })
    }

    /// Search factor whose points cover the domain; complexes search over
    /// the ambient simplex with a distance penalty.
    pub fn factor(&self) -> Factor {
        match self {
            Domain::Sphere { m } | Domain::Projective { m } => Factor::sphere(*m),
            Domain::Complex { complex } => Factor::Simplex { vertices: complex.n() },
            Domain::Box { lo, hi } => Factor::Box {
                lo: lo.clone(),
                hi: hi.clone(),
            },
        }
    }

    pub fn check(&self, p: &[f64]) -> Result<(), MapError> {
        if p.len() != self.ambient() {
            return Err(MapError::DimensionMismatch {
                domain: self.to_string(),
                expected: self.ambient(),
                got: p.len(),
            });
        }
        if !self.contains(p, MEMBERSHIP_TOL) {
            return Err(MapError::OutsideDomain(self.to_string()));
        }
        Ok(())
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        if p.len() != self.ambient() || p.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match self {
            Domain::Sphere { .. } | Domain::Projective { .. } => (norm(p) - 1.0).abs() <= tol,
            Domain::Complex { complex } => {
                p.iter().all(|&v| v >= -tol)
                    && (p.iter().sum::<f64>() - 1.0).abs() <= tol
                    && self.distance_to_domain(p) <= tol
                    && complex.n() == p.len()
            }
            Domain::Box { lo, hi } => p.iter().zip(lo.iter().zip(hi)).all(|(&v, (&l, &h))| v >= l - tol && v <= h + tol),
        }
    }

    /// Distance from a point of the search factor to the domain itself;
    /// nonzero only for complexes.
    pub fn distance_to_domain(&self, p: &[f64]) -> f64 {
        match self {
            Domain::Complex { complex } => complex
                .facets()
                .iter()
                .map(|&f| dist_sq_to_face(p, f))
                .fold(f64::INFINITY, f64::min)
                .sqrt(),
            _ => 0.0,
        }
    }

    /// Nearest point of the domain: normalization on spheres, clamping on
    /// boxes, projection onto the closest facet for complexes.
    pub fn project(&self, p: &[f64]) -> Vec<f64> {
        match self {
            Domain::Sphere { .. } | Domain::Projective { .. } => {
                let r = norm(p);
                p.iter().map(|v| v / r).collect()
            }
            Domain::Box { lo, hi } => p.iter().zip(lo.iter().zip(hi)).map(|(&v, (&l, &h))| v.clamp(l, h)).collect(),
            Domain::Complex { complex } => {
                let best = complex
                    .facets()
                    .iter()
                    .copied()
                    .min_by(|&a, &b| dist_sq_to_face(p, a).total_cmp(&dist_sq_to_face(p, b)));
                let Some(face) = best else { return p.to_vec() };
                let idx = vertices_of(face);
                let sub: Vec<f64> = idx.iter().map(|&i| p[i - 1]).collect();
                let proj = project_onto_simplex(&sub);
                let mut out = vec![0.0; p.len()];
                idx.iter().zip(proj).for_each(|(&i, v)| out[i - 1] = v);
                out
            }
        }
    }

    /// Separation of two points: geodesic on spheres, angle between lines on
    /// projective spaces, Euclidean otherwise.
    pub fn separation(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Domain::Sphere { .. } => dot(a, b).clamp(-1.0, 1.0).acos(),
            Domain::Projective { .. } => {
                let t = dot(a, b).clamp(-1.0, 1.0).acos();
                t.min(std::f64::consts::PI - t)
            }
            _ => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
        }
    }
}

/// How a product map was built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    ComposedBilinear,
    Bilinear,
    Additive,
    TrigRandom,
    Tabulated,
    Derived,
    Custom,
}

pub type Evaluator = Arc<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>;

/// `B ∘ (e1 × e2)` together with what makes it a coupled embedding.
#[derive(Debug, Clone)]
pub struct Composition {
    pub bilinear: BilinearMap,
    pub x_embedding: EmbeddingSpec,
    pub y_embedding: EmbeddingSpec,
}

/// Structural reason a composed map admits no parallelogram with distinct
/// classes: its defect is `B(e1(x₁)−e1(x₂), e2(y₁)−e2(y₂))`, nonzero because
/// `B` is nonsingular and both embeddings are injective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledCertificate {
    pub statement: String,
    pub bilinear: NonsingularityCertificate,
    pub x_embedding: EmbeddingMetadata,
    pub y_embedding: EmbeddingMetadata,
}

impl CoupledCertificate {
    /// Every link of the chain holds: a nonsingularity proof and injectivity
    /// evidence for both embeddings.
    pub fn validates(&self) -> bool {
        !self.bilinear.trace.is_empty() && self.x_embedding.injective && self.y_embedding.injective
    }
}

/// Evaluatable map `f : X × Y → ℝ^d`.
#[derive(Clone)]
pub struct ProductMap {
    x: Domain,
    y: Domain,
    d: usize,
    kind: MapKind,
    eval: Evaluator,
    composition: Option<Arc<Composition>>,
    certificate: Option<CoupledCertificate>,
}

impl fmt::Debug for ProductMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProductMap")
            .field("x", &self.x.to_string())
            .field("y", &self.y.to_string())
            .field("d", &self.d)
            .field("kind", &self.kind)
            .field("certified", &self.certificate.is_some())
            .finish()
    }
}

impl ProductMap {
    pub fn new<F>(x: Domain, y: Domain, d: usize, kind: MapKind, eval: F) -> Self
    where
        F: Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        ProductMap {
            x,
            y,
            d,
            kind,
            eval: Arc::new(eval),
            composition: None,
            certificate: None,
        }
    }

    pub fn x_domain(&self) -> &Domain {
        &self.x
    }

    pub fn y_domain(&self) -> &Domain {
        &self.y
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    pub fn certificate(&self) -> Option<&CoupledCertificate> {
        self.certificate.as_ref()
    }

    pub fn composition(&self) -> Option<&Composition> {
        self.composition.as_deref()
    }

    /// Evaluates without domain checks.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        (self.eval)(x, y)
    }

    pub fn evaluate(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>, MapError> {
        self.x.check(x)?;
        self.y.check(y)?;
        Ok(self.eval(x, y))
    }
}

/// `f(x₁,y₁) + f(x₂,y₂) − f(x₁,y₂) − f(x₂,y₁)`, unchecked.
pub fn defect_unchecked(f: &ProductMap, x1: &[f64], y1: &[f64], x2: &[f64], y2: &[f64]) -> Vec<f64> {
    let a = f.eval(x1, y1);
    let b = f.eval(x2, y2);
    let c = f.eval(x1, y2);
    let e = f.eval(x2, y1);
    (0..f.d).map(|i| (a[i] + b[i]) - (c[i] + e[i])).collect()
}

/// The parallelogram defect; zero with `x₁ ≠ x₂`, `y₁ ≠ y₂` means the four
/// points form an axis-aligned parallelogram.
pub fn defect(f: &ProductMap, x1: &[f64], y1: &[f64], x2: &[f64], y2: &[f64]) -> Result<Vec<f64>, MapError> {
    for (dom, p) in [(&f.x, x1), (&f.y, y1), (&f.x, x2), (&f.y, y2)] {
        dom.check(p)?;
    }
    Ok(defect_unchecked(f, x1, y1, x2, y2))
}

/// Defect of a bilinear map in exact arithmetic.
pub fn bilinear_defect<T: Scalar>(b: &BilinearMap, x1: &[T], y1: &[T], x2: &[T], y2: &[T]) -> Result<Vec<T>, MapError> {
    let p = b.evaluate(x1, y1)?;
    let q = b.evaluate(x2, y2)?;
    let r = b.evaluate(x1, y2)?;
    let s = b.evaluate(x2, y1)?;
    Ok((0..b.d()).map(|i| (p[i] + q[i]) - (r[i] + s[i])).collect())
}

/// `B(x,y) + B(−x,−y) − B(x,−y) − B(−x,y)` in exact arithmetic.
pub fn bilinear_phi_z2<T: Scalar>(b: &BilinearMap, x: &[T], y: &[T]) -> Result<Vec<T>, MapError> {
    let nx: Vec<T> = x.iter().map(|&v| -v).collect();
    let ny: Vec<T> = y.iter().map(|&v| -v).collect();
    bilinear_defect(b, x, y, &nx, &ny)
}

/// The bilinear map itself as a product map on spheres or boxes.
pub fn bilinear_product_map(b: &BilinearMap, x: Domain, y: Domain) -> Result<ProductMap, MapError> {
    if x.ambient() != b.a() || y.ambient() != b.b() {
        return Err(MapError::EmbeddingMismatch {
            expected: b.a(),
            target: x.ambient(),
        });
    }
    let map = b.clone();
    Ok(ProductMap::new(x, y, b.d(), MapKind::Bilinear, move |p, q| {
        map.eval_unchecked(p, q)
    }))
}

/// A `(ℤ/2)²`-equivariant map on a product of spheres.
///
/// Negating `x` multiplies output coordinate `t` by `signature().first_sign(t)`;
/// negating `y` by `second_sign(t)`.
pub trait EquivariantMap: Send + Sync {
    /// Sphere dimensions `(m, n)`.
    fn spheres(&self) -> (usize, usize);
    fn signature(&self) -> ActionSignature;
    fn eval(&self, x: &[f64], y: &[f64]) -> Vec<f64>;

    /// Problem-specific starting point for zero searches.
    fn start_hint(&self, _rng: &mut ChaCha8Rng) -> Option<(Vec<f64>, Vec<f64>)> {
        None
    }
}

/// Largest equivariance defect at `(x, y)`, relative to the output scale.
pub fn equivariance_residual(g: &dyn EquivariantMap, x: &[f64], y: &[f64]) -> f64 {
    let sig = g.signature();
    let base = g.eval(x, y);
    let nx: Vec<f64> = x.iter().map(|v| -v).collect();
    let ny: Vec<f64> = y.iter().map(|v| -v).collect();
    let fx = g.eval(&nx, y);
    let fy = g.eval(x, &ny);
    let scale = base.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut worst = 0.0f64;
    for t in 0..base.len() {
        worst = worst.max((fx[t] - sig.first_sign(t) * base[t]).abs());
        worst = worst.max((fy[t] - sig.second_sign(t) * base[t]).abs());
    }
    worst / scale
}

/// `Φ_f(x,y) = f(x,y) + f(−x,−y) − f(x,−y) − f(−x,y)` on `S^m × S^n`.
#[derive(Debug, Clone)]
pub struct PhiZ2 {
    f: ProductMap,
    m: usize,
    n: usize,
}

pub fn phi_z2(f: &ProductMap) -> Result<PhiZ2, MapError> {
    let (Domain::Sphere { m }, Domain::Sphere { m: n }) = (&f.x, &f.y) else {
        let bad = if f.x.is_sphere() { &f.y } else { &f.x };
        return Err(MapError::NotSphere(bad.to_string()));
    };
    Ok(PhiZ2 {
        f: f.clone(),
        m: *m,
        n: *n,
    })
}

impl PhiZ2 {
    pub fn map(&self) -> &ProductMap {
        &self.f
    }
}

impl EquivariantMap for PhiZ2 {
    fn spheres(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    fn signature(&self) -> ActionSignature {
        ActionSignature::new(0, 0, self.f.d)
    }

    fn eval(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let nx: Vec<f64> = x.iter().map(|v| -v).collect();
        let ny: Vec<f64> = y.iter().map(|v| -v).collect();
        defect_unchecked(&self.f, x, y, &nx, &ny)
    }
}

/// The coloring map `Ψ` on the deleted join of `Δ_{n−1}`:
/// `(λ₁−λ₂, λ₁ dist(x₁,Σ_j) − λ₂ dist(x₂,Σ_j))_{j=1..c}`.
#[derive(Debug, Clone)]
pub struct PsiMap {
    colored: ColoredComplex,
    sigmas: Vec<SimplicialComplex>,
    chart: CrosspolytopeChart,
}

/// Builds `Ψ` from a proper coloring of the minimal-nonface Kneser graph.
pub fn psi_from_coloring(k: &SimplicialComplex, col: Coloring) -> Result<PsiMap, MapError> {
    let colored = ColoredComplex::with_coloring(k, col)?;
    PsiMap::new(colored)
}

impl PsiMap {
    pub fn new(colored: ColoredComplex) -> Result<Self, MapError> {
        let sigmas = colored.color_complexes()?;
        let n = colored.complex().n();
        Ok(PsiMap {
            colored,
            sigmas,
            chart: CrosspolytopeChart::new(n - 1),
        })
    }

    /// `Ψ` for an optimal coloring.
    pub fn optimal(k: &SimplicialComplex) -> Result<Self, MapError> {
        Self::new(ColoredComplex::optimal(k)?)
    }

    pub fn complex(&self) -> &SimplicialComplex {
        self.colored.complex()
    }

    pub fn colors(&self) -> usize {
        self.sigmas.len()
    }

    pub fn output_dim(&self) -> usize {
        self.colors() + 1
    }

    pub fn chart(&self) -> CrosspolytopeChart {
        self.chart
    }

    pub fn color_complexes(&self) -> &[SimplicialComplex] {
        &self.sigmas
    }

    fn dist(sigma: &SimplicialComplex, x: &[f64]) -> f64 {
        sigma
            .facets()
            .iter()
            .map(|&f| dist_sq_to_face(x, f))
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    }

    /// Unit vector whose positive part lies on a random facet of the complex
    /// and whose negative part lies on a face disjoint from it, with equal
    /// mass on both sides.
    pub fn disjoint_face_start(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let k = self.complex();
        let facets = k.facets();
        let first = facets[rng.gen_range(0..facets.len())];
        let rest: Vec<u64> = facets.iter().map(|&f| f & !first).filter(|&f| f != 0).collect();
        let second = if rest.is_empty() { 0 } else { rest[rng.gen_range(0..rest.len())] };
        let mut z = vec![0.0; k.n()];
        for (face, sign) in [(first, 1.0), (second, -1.0)] {
            let idx = vertices_of(face);
            let w: Vec<f64> = idx.iter().map(|_| rng.gen_range(0.05..1.0)).collect();
            let total: f64 = w.iter().sum();
            idx.iter().zip(w).for_each(|(&i, v)| z[i - 1] = sign * v / total);
        }
        let r = norm(&z);
        z.iter_mut().for_each(|v| *v /= r);
        z
    }

    pub fn eval_join(&self, p: &DeletedJoinPoint) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.output_dim());
        out.push(p.lambda1 - p.lambda2);
        for sigma in &self.sigmas {
            let a = if p.lambda1 > 0.0 {
                p.lambda1 * Self::dist(sigma, &p.p1.weights)
            } else {
                0.0
            };
            let b = if p.lambda2 > 0.0 {
                p.lambda2 * Self::dist(sigma, &p.p2.weights)
            } else {
                0.0
            };
            out.push(a - b);
        }
        out
    }

    /// `Ψ` on the sphere `S^{n−1}` via the crosspolytope chart.
    pub fn eval_sphere(&self, z: &[f64]) -> Result<Vec<f64>, MapError> {
        let p = self.chart.to_join(z)?;
        Ok(self.eval_join(&p))
    }
}

fn simplex_vertices(dom: &Domain) -> Result<usize, MapError> {
    match dom {
        Domain::Complex { complex } => Ok(complex.n()),
        other => Err(MapError::NotComplex(other.to_string())),
    }
}

/// `λ₁μ₁f(x₁,y₁) + λ₂μ₂f(x₂,y₂) − λ₁μ₂f(x₁,y₂) − λ₂μ₁f(x₂,y₁)`, grouped so
/// that swapping either join factor negates the result exactly. Terms with
/// zero weight are skipped.
fn weighted_defect(f: &ProductMap, p: &DeletedJoinPoint, q: &DeletedJoinPoint) -> Vec<f64> {
    let term = |l: f64, x: &[f64], m: f64, y: &[f64]| -> Vec<f64> {
        if l > 0.0 && m > 0.0 {
            f.eval(x, y).into_iter().map(|v| (l * m) * v).collect()
        } else {
            vec![0.0; f.d]
        }
    };
    let t11 = term(p.lambda1, &p.p1.weights, q.lambda1, &q.p1.weights);
    let t22 = term(p.lambda2, &p.p2.weights, q.lambda2, &q.p2.weights);
    let t12 = term(p.lambda1, &p.p1.weights, q.lambda2, &q.p2.weights);
    let t21 = term(p.lambda2, &p.p2.weights, q.lambda1, &q.p1.weights);
    (0..f.d).map(|i| (t11[i] + t22[i]) - (t12[i] + t21[i])).collect()
}

/// The map `S^m × S^n → V_{−+} × V_{+−} × V_{−−}^d` built from
/// `f : Δ_m × Δ_n → ℝ^d` through the crosspolytope charts.
#[derive(Debug, Clone)]
pub struct SimplexPairMap {
    f: ProductMap,
    x_chart: CrosspolytopeChart,
    y_chart: CrosspolytopeChart,
}

pub fn simplex_pair_map(f: &ProductMap) -> Result<SimplexPairMap, MapError> {
    let nx = simplex_vertices(&f.x)?;
    let ny = simplex_vertices(&f.y)?;
    Ok(SimplexPairMap {
        f: f.clone(),
        x_chart: CrosspolytopeChart::new(nx - 1),
        y_chart: CrosspolytopeChart::new(ny - 1),
    })
}

impl SimplexPairMap {
    pub fn map(&self) -> &ProductMap {
        &self.f
    }

    pub fn charts(&self) -> (CrosspolytopeChart, CrosspolytopeChart) {
        (self.x_chart, self.y_chart)
    }

    pub fn eval_join(&self, p: &DeletedJoinPoint, q: &DeletedJoinPoint) -> Vec<f64> {
        let mut out = vec![p.lambda1 - p.lambda2, q.lambda1 - q.lambda2];
        out.extend(weighted_defect(&self.f, p, q));
        out
    }
}

impl EquivariantMap for SimplexPairMap {
    fn spheres(&self) -> (usize, usize) {
        (self.x_chart.m, self.y_chart.m)
    }

    fn signature(&self) -> ActionSignature {
        ActionSignature::new(1, 1, self.f.d)
    }

    fn eval(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        match (self.x_chart.to_join(x), self.y_chart.to_join(y)) {
            (Ok(p), Ok(q)) => self.eval_join(&p, &q),
            _ => vec![f64::NAN; 2 + self.f.d],
        }
    }
}

/// `(Ψ₁, Ψ₂, weighted defect)` on `S^{n₁−1} × S^{n₂−1}` with signature
/// `(c₁+1, c₂+1, d)`.
#[derive(Debug, Clone)]
pub struct JointObstruction {
    psi1: PsiMap,
    psi2: PsiMap,
    f: ProductMap,
}

/// Joint obstruction map for complexes with colorings of their minimal
/// nonfaces. `f` must be defined on the full simplices `Δ_{n₁−1} × Δ_{n₂−1}`.
pub fn joint_obstruction(
    k1: &SimplicialComplex,
    k2: &SimplicialComplex,
    col1: Coloring,
    col2: Coloring,
    f: &ProductMap,
) -> Result<JointObstruction, MapError> {
    let psi1 = psi_from_coloring(k1, col1)?;
    let psi2 = psi_from_coloring(k2, col2)?;
    JointObstruction::new(psi1, psi2, f)
}

impl JointObstruction {
    pub fn new(psi1: PsiMap, psi2: PsiMap, f: &ProductMap) -> Result<Self, MapError> {
        let nx = simplex_vertices(&f.x)?;
        let ny = simplex_vertices(&f.y)?;
        if nx != psi1.complex().n() || ny != psi2.complex().n() {
            return Err(MapError::InvalidParameter(format!(
                "map is defined on simplices with {nx} and {ny} vertices, complexes have {} and {}",
                psi1.complex().n(),
                psi2.complex().n()
            )));
        }
        Ok(JointObstruction { psi1, psi2, f: f.clone() })
    }

    pub fn psi(&self) -> (&PsiMap, &PsiMap) {
        (&self.psi1, &self.psi2)
    }

    pub fn map(&self) -> &ProductMap {
        &self.f
    }

    pub fn eval_join(&self, p: &DeletedJoinPoint, q: &DeletedJoinPoint) -> Vec<f64> {
        let mut out = self.psi1.eval_join(p);
        out.extend(self.psi2.eval_join(q));
        out.extend(weighted_defect(&self.f, p, q));
        out
    }
}

impl EquivariantMap for JointObstruction {
    fn spheres(&self) -> (usize, usize) {
        (self.psi1.chart.m, self.psi2.chart.m)
    }

    fn signature(&self) -> ActionSignature {
        ActionSignature::new(self.psi1.output_dim(), self.psi2.output_dim(), self.f.d)
    }

    fn eval(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        match (self.psi1.chart.to_join(x), self.psi2.chart.to_join(y)) {
            (Ok(p), Ok(q)) => self.eval_join(&p, &q),
            _ => vec![f64::NAN; self.signature().dim()],
        }
    }

    /// Balanced points supported on two disjoint faces of each complex.
    fn start_hint(&self, rng: &mut ChaCha8Rng) -> Option<(Vec<f64>, Vec<f64>)> {
        Some((self.psi1.disjoint_face_start(rng), self.psi2.disjoint_face_start(rng)))
    }
}

/// `g(x,y) = f(x,y) − f(x,−y)`, odd in `y`.
#[derive(Debug, Clone)]
pub struct CoindexWitness {
    pub map: ProductMap,
    /// `f` carried a coupled-embedding certificate, so `g(x,·)` is a family
    /// of odd maps without zeros on separated pairs.
    pub embedding_family: bool,
}

pub fn coindex_witness(f: &ProductMap) -> Result<CoindexWitness, MapError> {
    if !f.y.is_sphere() {
        return Err(MapError::NotSphere(f.y.to_string()));
    }
    let inner = f.clone();
    let map = ProductMap::new(f.x.clone(), f.y.clone(), f.d, MapKind::Derived, move |x, y| {
        let ny: Vec<f64> = y.iter().map(|v| -v).collect();
        let a = inner.eval(x, y);
        let b = inner.eval(x, &ny);
        a.iter().zip(&b).map(|(p, q)| p - q).collect()
    });
    Ok(CoindexWitness {
        map,
        embedding_family: f.certificate.as_ref().is_some_and(CoupledCertificate::validates),
    })
}

/// One term `coef · cos(⟨ω,x⟩ + ⟨ν,y⟩ + φ)` of a trigonometric map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub wx: Vec<i32>,
    pub wy: Vec<i32>,
    pub phase: f64,
    pub coef: Vec<f64>,
}

fn eval_trig(terms: &[TrigTerm], d: usize, x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; d];
    for t in terms {
        let arg = t.phase
            + t.wx.iter().zip(x).map(|(&w, &v)| w as f64 * v).sum::<f64>()
            + t.wy.iter().zip(y).map(|(&w, &v)| w as f64 * v).sum::<f64>();
        let c = arg.cos();
        out.iter_mut().zip(&t.coef).for_each(|(o, k)| *o += k * c);
    }
    out
}

fn trig_terms(rng: &mut ChaCha8Rng, px: usize, py: usize, d: usize, degree: u32, count: usize, scale: f64) -> Vec<TrigTerm> {
    let deg = degree as i32;
    (0..count)
        .map(|_| TrigTerm {
            wx: (0..px).map(|_| rng.gen_range(-deg..=deg)).collect(),
            wy: (0..py).map(|_| rng.gen_range(-deg..=deg)).collect(),
            phase: rng.gen_range(0.0..std::f64::consts::TAU),
            coef: (0..d).map(|_| scale * rng.gen_range(-1.0..1.0)).collect(),
        })
        .collect()
}

/// Number of cosine terms in generated trigonometric maps.
pub const DEFAULT_TRIG_TERMS: usize = 8;

/// Random trigonometric map with integer frequencies in `[−degree, degree]`,
/// reproducible from `seed`. Degree 0 gives a constant map.
pub fn random_trig(seed: u64, x: Domain, y: Domain, d: usize, degree: u32) -> ProductMap {
    random_trig_with(seed, x, y, d, degree, DEFAULT_TRIG_TERMS, 1.0)
}

pub fn random_trig_with(seed: u64, x: Domain, y: Domain, d: usize, degree: u32, terms: usize, scale: f64) -> ProductMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms = trig_terms(&mut rng, x.ambient(), y.ambient(), d, degree, terms, scale);
    ProductMap::new(x, y, d, MapKind::TrigRandom, move |p, q| eval_trig(&terms, d, p, q))
}

/// `f(x,y) = g(x) + h(y)` with random trigonometric `g`, `h`.
pub fn random_additive(seed: u64, x: Domain, y: Domain, d: usize, degree: u32) -> ProductMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = trig_terms(&mut rng, x.ambient(), 0, d, degree, DEFAULT_TRIG_TERMS, 1.0);
    let h = trig_terms(&mut rng, 0, y.ambient(), d, degree, DEFAULT_TRIG_TERMS, 1.0);
    ProductMap::new(x, y, d, MapKind::Additive, move |p, q| {
        let a = eval_trig(&g, d, p, &[]);
        let b = eval_trig(&h, d, &[], q);
        a.iter().zip(&b).map(|(u, v)| u + v).collect()
    })
}

/// Map on realized complexes given by vertex-pair values, extended by
/// barycentric interpolation: `f(x,y) = Σ_{i,j} x_i y_j v_{ij}`.
pub fn tabulated(x: Domain, y: Domain, values: Vec<Vec<Vec<f64>>>) -> Result<ProductMap, MapError> {
    let nx = simplex_vertices(&x)?;
    let ny = simplex_vertices(&y)?;
    if values.len() != nx || values.iter().any(|row| row.len() != ny) {
        return Err(MapError::InvalidParameter(format!("value table must be {nx} × {ny}")));
    }
    let d = values.first().and_then(|r| r.first()).map_or(0, Vec::len);
    if d == 0 || values.iter().flatten().any(|v| v.len() != d) {
        return Err(MapError::InvalidParameter("value vectors must share a positive length".into()));
    }
    Ok(ProductMap::new(x, y, d, MapKind::Tabulated, move |p, q| {
        let mut out = vec![0.0; d];
        for (i, row) in values.iter().enumerate() {
            if p[i] == 0.0 {
                continue;
            }
            for (j, v) in row.iter().enumerate() {
                let w = p[i] * q[j];
                if w != 0.0 {
                    out.iter_mut().zip(v).for_each(|(o, c)| *o += w * c);
                }
            }
        }
        out
    }))
}

/// Injectivity evidence for an embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingMetadata {
    pub id: String,
    /// `exact` when injectivity holds by construction, `sampled` otherwise.
    pub method: String,
    pub pairs_sampled: usize,
    /// Pairs closer than this in the domain are not compared.
    pub min_class_distance: f64,
    /// Smallest image distance over compared pairs.
    pub min_image_distance: f64,
    /// Smallest ratio of image distance to class distance.
    pub min_distance_ratio: f64,
    pub rank_points: usize,
    /// Smallest singular value of the tangent Jacobian over sampled points.
    pub min_singular_value: f64,
    pub injective: bool,
}

/// An embedding of a catalog space into `ℝ^target`.
#[derive(Clone)]
pub struct EmbeddingSpec {
    id: String,
    domain: Domain,
    target: usize,
    eval: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
    metadata: EmbeddingMetadata,
}

impl fmt::Debug for EmbeddingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EmbeddingSpec")
            .field("id", &self.id)
            .field("domain", &self.domain.to_string())
            .field("target", &self.target)
            .field("metadata", &self.metadata)
            .finish()
    }
}

impl EmbeddingSpec {
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn metadata(&self) -> &EmbeddingMetadata {
        &self.metadata
    }

    pub fn eval(&self, p: &[f64]) -> Vec<f64> {
        (self.eval)(p)
    }
}

/// Pairs and Jacobian points sampled when an embedding is built.
pub const DEFAULT_EMBEDDING_PAIRS: usize = 20_000;
pub const DEFAULT_RANK_POINTS: usize = 2_000;
/// Class distance below which pairs are not compared for injectivity.
pub const CLASS_DISTANCE_FLOOR: f64 = 0.05;

fn rp2_r4(p: &[f64]) -> Vec<f64> {
    let (x, y, z) = (p[0], p[1], p[2]);
    vec![x * y, x * z, y * z, x * x - y * y]
}

/// Identifiers accepted by [`embedding`]: `sphere(m)` and `rp2_r4`.
pub fn embedding(id: &str) -> Result<EmbeddingSpec, MapError> {
    let id = id.trim();
    let (domain, target, eval, exact): (Domain, usize, Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>, bool) = if id == "rp2_r4" {
        (Domain::Projective { m: 2 }, 4, Arc::new(rp2_r4), false)
    } else if let Some(m) = id
        .strip_prefix("sphere(")
        .and_then(|s| s.strip_suffix(')'))
        .and_then(|s| s.parse::<usize>().ok())
    {
        (Domain::Sphere { m }, m + 1, Arc::new(|p: &[f64]| p.to_vec()), true)
    } else {
        return Err(MapError::UnknownEmbedding(id.to_string()));
    };
    let mut spec = EmbeddingSpec {
        id: id.to_string(),
        domain,
        target,
        eval,
        metadata: EmbeddingMetadata {
            id: id.to_string(),
            method: String::new(),
            pairs_sampled: 0,
            min_class_distance: CLASS_DISTANCE_FLOOR,
            min_image_distance: 0.0,
            min_distance_ratio: 0.0,
            rank_points: 0,
            min_singular_value: 0.0,
            injective: false,
        },
    };
    spec.metadata = verify_embedding(&spec, DEFAULT_EMBEDDING_PAIRS, DEFAULT_RANK_POINTS, 0);
    if exact {
        spec.metadata.method = "exact".into();
        spec.metadata.injective = true;
    }
    Ok(spec)
}

/// Samples pairs at class distance at least [`CLASS_DISTANCE_FLOOR`] and
/// points for a tangent-rank check.
pub fn verify_embedding(spec: &EmbeddingSpec, pairs: usize, rank_points: usize, seed: u64) -> EmbeddingMetadata {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let factor = spec.domain.factor();
    let mut min_image = f64::INFINITY;
    let mut min_ratio = f64::INFINITY;
    let mut compared = 0;
    while compared < pairs {
        let a = factor.random_point(&mut rng);
        let b = factor.random_point(&mut rng);
        let sep = spec.domain.separation(&a, &b);
        if sep < CLASS_DISTANCE_FLOOR {
            continue;
        }
        compared += 1;
        let (ea, eb) = (spec.eval(&a), spec.eval(&b));
        let dist = ea.iter().zip(&eb).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
        min_image = min_image.min(dist);
        min_ratio = min_ratio.min(dist / sep);
    }
    let h = 1e-6;
    let mut min_sv = f64::INFINITY;
    for _ in 0..rank_points {
        let p = factor.random_point(&mut rng);
        let basis = factor.tangent_basis(&p);
        let mut jac = DMatrix::zeros(spec.target, basis.len());
        for (t, v) in basis.iter().enumerate() {
            let plus: Vec<f64> = p.iter().zip(v).map(|(a, b)| a + h * b).collect();
            let minus: Vec<f64> = p.iter().zip(v).map(|(a, b)| a - h * b).collect();
            let (ep, em) = (spec.eval(&plus), spec.eval(&minus));
            for row in 0..spec.target {
                jac[(row, t)] = (ep[row] - em[row]) / (2.0 * h);
            }
        }
        let sv = jac.singular_values().iter().fold(f64::INFINITY, |m, &s| m.min(s));
        min_sv = min_sv.min(sv);
    }
    if rank_points == 0 {
        min_sv = 0.0;
    }
    EmbeddingMetadata {
        id: spec.id.clone(),
        method: "sampled".into(),
        pairs_sampled: compared,
        min_class_distance: CLASS_DISTANCE_FLOOR,
        min_image_distance: min_image,
        min_distance_ratio: min_ratio,
        rank_points,
        min_singular_value: min_sv,
        injective: compared > 0 && min_image > 1e-9 && rank_points > 0 && min_sv > 1e-6,
    }
}

/// `f(x,y) = B(e1(x), e2(y))`, certified as a coupled embedding when `B` is
/// certified nonsingular and both embeddings are injective.
pub fn compose_bilinear(b: &BilinearMap, e1: &EmbeddingSpec, e2: &EmbeddingSpec) -> Result<ProductMap, MapError> {
    if e1.target != b.a() {
        return Err(MapError::EmbeddingMismatch {
            expected: b.a(),
            target: e1.target,
        });
    }
    if e2.target != b.b() {
        return Err(MapError::EmbeddingMismatch {
            expected: b.b(),
            target: e2.target,
        });
    }
    let composition = Arc::new(Composition {
        bilinear: b.clone(),
        x_embedding: e1.clone(),
        y_embedding: e2.clone(),
    });
    let inner = composition.clone();
    let mut map = ProductMap::new(
        e1.domain.clone(),
        e2.domain.clone(),
        b.d(),
        MapKind::ComposedBilinear,
        move |x, y| {
            let ex = inner.x_embedding.eval(x);
            let ey = inner.y_embedding.eval(y);
            inner.bilinear.eval_unchecked(&ex, &ey)
        },
    );
    map.certificate = match b.certify() {
        Ok(cert) if e1.metadata.injective && e2.metadata.injective => Some(CoupledCertificate {
            statement: "defect equals B(e1(x1)-e1(x2), e2(y1)-e2(y2)), nonzero for distinct classes".into(),
            bilinear: cert,
            x_embedding: e1.metadata.clone(),
            y_embedding: e2.metadata.clone(),
        }),
        _ => None,
    };
    map.composition = Some(composition);
    Ok(map)
}

/// `B(e1(x₁)−e1(x₂), e2(y₁)−e2(y₂))` for a composed map.
pub fn structural_defect(c: &Composition, x1: &[f64], y1: &[f64], x2: &[f64], y2: &[f64]) -> Vec<f64> {
    let (a, b) = (c.x_embedding.eval(x1), c.x_embedding.eval(x2));
    let (p, q) = (c.y_embedding.eval(y1), c.y_embedding.eval(y2));
    let u: Vec<f64> = a.iter().zip(&b).map(|(s, t)| s - t).collect();
    let v: Vec<f64> = p.iter().zip(&q).map(|(s, t)| s - t).collect();
    c.bilinear.eval_unchecked(&u, &v)
}

/// Finite-difference estimates of `∂²f/∂x_i∂y_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedPartialsReport {
    pub h: f64,
    /// `estimates[i][j]` at step `h`.
    pub estimates: Vec<Vec<Vec<f64>>>,
    /// Richardson extrapolation `(4D(h/2) − D(h)) / 3`.
    pub refined: Vec<Vec<Vec<f64>>>,
    /// Smallest norm over the refined estimates.
    pub min_norm: f64,
    pub tolerance: f64,
    /// Estimated third-derivative scale from the step-halving difference.
    pub error_scale: f64,
    pub nonsingular: bool,
}

fn mixed_stencil(f: &ProductMap, x: &[f64], y: &[f64], i: usize, j: usize, h: f64) -> Vec<f64> {
    let shift = |p: &[f64], k: usize, s: f64| {
        let mut q = p.to_vec();
        q[k] += s;
        q
    };
    let (xp, xm) = (shift(x, i, h), shift(x, i, -h));
    let (yp, ym) = (shift(y, j, h), shift(y, j, -h));
    let a = f.eval(&xp, &yp);
    let b = f.eval(&xp, &ym);
    let c = f.eval(&xm, &yp);
    let d = f.eval(&xm, &ym);
    (0..f.d).map(|k| ((a[k] - b[k]) - (c[k] - d[k])) / (4.0 * h * h)).collect()
}

/// Checks that every mixed partial `∂²f/∂x_i∂y_j` is nonzero at `(x, y)` in
/// the box coordinates.
///
/// An estimate counts as nonzero when its Richardson-refined norm exceeds
/// `max(10·h²·scale, noise)`, with `scale` the observed `O(h²)` error
/// coefficient and `noise` the rounding floor of the stencil.
pub fn mixed_partials_check(f: &ProductMap, x: &[f64], y: &[f64], h: f64) -> Result<MixedPartialsReport, MapError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(MapError::InvalidParameter(format!("step {h} must be positive")));
    }
    let (Domain::Box { lo: xl, hi: xh }, Domain::Box { lo: yl, hi: yh }) = (&f.x, &f.y) else {
        let bad = if matches!(f.x, Domain::Box { .. }) { &f.y } else { &f.x };
        return Err(MapError::NotBox(bad.to_string()));
    };
    f.x.check(x)?;
    f.y.check(y)?;
    for (k, ((&v, &l), &u)) in x.iter().zip(xl).zip(xh).enumerate() {
        if v - h < l || v + h > u {
            return Err(MapError::StencilOutsideBox { h, coordinate: k });
        }
    }
    for (k, ((&v, &l), &u)) in y.iter().zip(yl).zip(yh).enumerate() {
        if v - h < l || v + h > u {
            return Err(MapError::StencilOutsideBox {
                h,
                coordinate: x.len() + k,
            });
        }
    }
    let (p, q) = (x.len(), y.len());
    let mut estimates = vec![vec![Vec::new(); q]; p];
    let mut refined = vec![vec![Vec::new(); q]; p];
    let mut error_scale = 0.0f64;
    let f_scale = f.eval(x, y).iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let mut min_norm = f64::INFINITY;
    for i in 0..p {
        for j in 0..q {
            let coarse = mixed_stencil(f, x, y, i, j, h);
            let fine = mixed_stencil(f, x, y, i, j, h / 2.0);
            let r: Vec<f64> = fine.iter().zip(&coarse).map(|(a, b)| (4.0 * a - b) / 3.0).collect();
            let diff = fine.iter().zip(&coarse).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            error_scale = error_scale.max(4.0 / 3.0 * diff / (h * h));
            min_norm = min_norm.min(norm(&r));
            estimates[i][j] = coarse;
            refined[i][j] = r;
        }
    }
    let noise = 64.0 * f64::EPSILON * f_scale / (h * h);
    let tolerance = (10.0 * h * h * error_scale).max(noise);
    Ok(MixedPartialsReport {
        h,
        estimates,
        refined,
        min_norm,
        tolerance,
        error_scale,
        nonsingular: min_norm > tolerance,
    })
}

/// JSON description of a product map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    /// `B ∘ (e1 × e2)` for catalog embeddings such as `"rp2_r4"` or `"sphere(2)"`.
    ComposedBilinear {
        bilinear: BilinearSpec,
        x: String,
        y: String,
    },
    /// The bilinear map itself on sphere or box factors.
    Bilinear {
        bilinear: BilinearSpec,
        x: Domain,
        y: Domain,
    },
    TrigRandom {
        x: Domain,
        y: Domain,
        d: usize,
        seed: u64,
        degree: u32,
        #[serde(default = "default_terms")]
        terms: usize,
        #[serde(default = "default_scale")]
        scale: f64,
    },
    Additive {
        x: Domain,
        y: Domain,
        d: usize,
        seed: u64,
        degree: u32,
    },
    Tabulated {
        x: Domain,
        y: Domain,
        values: Vec<Vec<Vec<f64>>>,
    },
}

fn default_terms() -> usize {
    DEFAULT_TRIG_TERMS
}

fn default_scale() -> f64 {
    1.0
}

impl MapSpec {
    pub fn build(&self) -> Result<ProductMap, MapError> {
        match self {
            MapSpec::ComposedBilinear { bilinear, x, y } => compose_bilinear(&bilinear.build()?, &embedding(x)?, &embedding(y)?),
            MapSpec::Bilinear { bilinear, x, y } => bilinear_product_map(&bilinear.build()?, x.clone(), y.clone()),
            MapSpec::TrigRandom {
                x,
                y,
                d,
                seed,
                degree,
                terms,
                scale,
            } => Ok(random_trig_with(*seed, x.clone(), y.clone(), *d, *degree, *terms, *scale)),
            MapSpec::Additive { x, y, d, seed, degree } => Ok(random_additive(*seed, x.clone(), y.clone(), *d, *degree)),
            MapSpec::Tabulated { x, y, values } => tabulated(x.clone(), y.clone(), values.clone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bilinear::{real_poly, scalar, Algebra};

    fn sphere(m: usize) -> Domain {
        Domain::Sphere { m }
    }

    #[test]
    fn additive_defect_vanishes() {
        let f = random_additive(3, sphere(1), sphere(2), 3, 3);
        let d = defect(&f, &[1.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 1.0], &[0.6, 0.8, 0.0]).unwrap();
        assert!(d.iter().all(|v| v.abs() < 1e-12), "{d:?}");
    }

    #[test]
    fn defect_rejects_points_off_the_domain() {
        let f = random_trig(1, sphere(1), sphere(1), 2, 2);
        assert!(matches!(
            defect(&f, &[1.0, 1.0], &[1.0, 0.0], &[1.0, 0.0], &[1.0, 0.0]),
            Err(MapError::OutsideDomain(_))
        ));
        assert!(matches!(
            defect(&f, &[1.0], &[1.0, 0.0], &[1.0, 0.0], &[1.0, 0.0]),
            Err(MapError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn phi_of_biskew_bilinear_is_four_times() {
        let b = real_poly(2, 3).unwrap();
        let x = [2i64, -3];
        let y = [1i64, 5, -7];
        let phi = bilinear_phi_z2(&b, &x, &y).unwrap();
        let direct = b.evaluate(&x, &y).unwrap();
        assert_eq!(phi, direct.iter().map(|v| 4 * v).collect::<Vec<_>>());
    }

    #[test]
    fn phi_of_map_even_in_x_vanishes() {
        let f = ProductMap::new(sphere(1), sphere(1), 1, MapKind::Custom, |x, y| vec![x[0] * x[0] + y[1]]);
        let phi = phi_z2(&f).unwrap();
        assert_eq!(phi.eval(&[0.6, 0.8], &[0.0, 1.0]), vec![0.0]);
    }

    #[test]
    fn trig_degree_zero_is_constant() {
        let f = random_trig(5, sphere(2), sphere(2), 2, 0);
        assert_eq!(
            f.eval(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]),
            f.eval(&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0])
        );
        let z = random_trig_with(5, sphere(2), sphere(2), 2, 3, 4, 0.0);
        assert!(z.eval(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn embeddings() {
        let s = embedding("sphere(3)").unwrap();
        assert_eq!(s.target(), 4);
        assert!(s.metadata().injective);
        let rp = embedding("rp2_r4").unwrap();
        let p = [0.48, -0.6, 0.64];
        let q = [-0.48, 0.6, -0.64];
        assert_eq!(rp.eval(&p), rp.eval(&q));
        assert!(rp.metadata().injective, "{:?}", rp.metadata());
        assert!(matches!(embedding("klein"), Err(MapError::UnknownEmbedding(_))));
    }

    #[test]
    fn quaternionic_composition_is_certified() {
        let rp = embedding("rp2_r4").unwrap();
        let f = compose_bilinear(&scalar(Algebra::H, 1).unwrap(), &rp, &rp).unwrap();
        assert!(f.certificate().unwrap().validates());
        let w = coindex_witness(&f);
        assert!(matches!(w, Err(MapError::NotSphere(_))));
    }

    #[test]
    fn composition_dimension_mismatch() {
        let rp = embedding("rp2_r4").unwrap();
        let s = embedding("sphere(1)").unwrap();
        assert!(matches!(
            compose_bilinear(&scalar(Algebra::H, 1).unwrap(), &rp, &s),
            Err(MapError::EmbeddingMismatch { .. })
        ));
    }

    #[test]
    fn psi_is_antisymmetric() {
        let k = crate::simplicial::named("rp2_6").unwrap();
        let psi = PsiMap::optimal(&k).unwrap();
        let z = [0.3, -0.2, 0.5, -0.1, 0.7, -0.4];
        let w: Vec<f64> = z.iter().map(|v| -v).collect();
        let a = psi.eval_sphere(&z).unwrap();
        let b = psi.eval_sphere(&w).unwrap();
        assert_eq!(a, b.iter().map(|v| -v).collect::<Vec<_>>());
        let top = psi.eval_sphere(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(top[0], 1.0);
    }

    #[test]
    fn mixed_partials_of_product_and_sum() {
        let prod = ProductMap::new(Domain::unit_box(1), Domain::unit_box(1), 1, MapKind::Custom, |x, y| {
            vec![x[0] * y[0]]
        });
        let r = mixed_partials_check(&prod, &[0.1], &[0.2], 1e-3).unwrap();
        assert!(r.nonsingular);
        assert!((r.refined[0][0][0] - 1.0).abs() < 1e-8);
        let sum = ProductMap::new(Domain::unit_box(1), Domain::unit_box(1), 1, MapKind::Custom, |x, y| {
            vec![x[0].sin() + y[0].cos()]
        });
        assert!(!mixed_partials_check(&sum, &[0.1], &[0.2], 1e-3).unwrap().nonsingular);
        assert!(matches!(
            mixed_partials_check(&prod, &[0.9999], &[0.2], 1e-3),
            Err(MapError::StencilOutsideBox { .. })
        ));
    }

    #[test]
    fn map_spec_round_trip() {
        let spec: MapSpec = serde_json::from_str(
            r#"{"kind":"composed_bilinear","bilinear":{"construction":"scalar","algebra":"H","k":1},"x":"rp2_r4","y":"rp2_r4"}"#,
        )
        .unwrap();
        let f = spec.build().unwrap();
        assert_eq!(f.d(), 4);
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<MapSpec>(&text).unwrap(), spec);
    }
}
