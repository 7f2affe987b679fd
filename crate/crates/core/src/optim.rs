//! Constrained least-squares minimization over products of spheres, boxes
//! and simplices.
//!
//! The local solver is a damped Gauss-Newton (Levenberg-Marquardt) iteration
//! in tangent coordinates with a retraction back onto the domain. Multistart
//! runs independent seeded starts in fixed-size batches, so the result does
//! not depend on how many workers executed them.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::par::{map_indexed, Execution};
use crate::simplicial::project_onto_simplex;

/// One factor of a product domain, embedded in ambient coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Factor {
    /// Unit sphere in `ℝ^ambient`.
    Sphere { ambient: usize },
    /// Axis-aligned box.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Standard simplex in `ℝ^vertices`.
    Simplex { vertices: usize },
}

impl Factor {
    pub fn sphere(dim: usize) -> Self {
        Factor::Sphere { ambient: dim + 1 }
    }

    pub fn ambient(&self) -> usize {
        match self {
            Factor::Sphere { ambient } => *ambient,
            Factor::Box { lo, .. } => lo.len(),
            Factor::Simplex { vertices } => *vertices,
        }
    }

    pub fn random_point(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match self {
            Factor::Sphere { ambient } => loop {
                let v: Vec<f64> = (0..*ambient).map(|_| StandardNormal.sample(rng)).collect();
                let norm = norm(&v);
                if norm > 1e-6 {
                    break v.into_iter().map(|a| a / norm).collect();
                }
            },
            Factor::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(&l, &h)| if h > l { rng.gen_range(l..h) } else { l })
                .collect(),
            Factor::Simplex { vertices } => {
                let e: Vec<f64> = (0..*vertices).map(|_| Exp1.sample(rng)).collect();
                let total: f64 = e.iter().sum();
                e.into_iter().map(|a| a / total).collect()
            }
        }
    }

    pub fn retract(&self, p: &mut [f64]) {
        match self {
            Factor::Sphere { .. } => {
                let n = norm(p);
                if n > 0.0 {
                    p.iter_mut().for_each(|a| *a /= n);
                } else {
                    p.iter_mut().for_each(|a| *a = 0.0);
                    p[0] = 1.0;
                }
            }
            Factor::Box { lo, hi } => {
                for ((a, &l), &h) in p.iter_mut().zip(lo).zip(hi) {
                    *a = a.clamp(l, h);
                }
            }
            Factor::Simplex { .. } => {
                let q = project_onto_simplex(p);
                p.copy_from_slice(&q);
            }
        }
    }

    /// Orthonormal tangent basis at `p`, in the factor's own coordinates.
    pub fn tangent_basis(&self, p: &[f64]) -> Vec<Vec<f64>> {
        let n = self.ambient();
        match self {
            Factor::Sphere { .. } => {
                let mut basis: Vec<Vec<f64>> = vec![p.to_vec()];
                for i in 0..n {
                    if basis.len() == n {
                        break;
                    }
                    let mut v = vec![0.0; n];
                    v[i] = 1.0;
                    for b in &basis {
                        let c = dot(&v, b);
                        v.iter_mut().zip(b).for_each(|(a, bb)| *a -= c * bb);
                    }
                    let l = norm(&v);
                    if l > 1e-6 {
                        v.iter_mut().for_each(|a| *a /= l);
                        basis.push(v);
                    }
                }
                basis.remove(0);
                basis
            }
            Factor::Box { .. } => (0..n)
                .map(|i| {
                    let mut v = vec![0.0; n];
                    v[i] = 1.0;
                    v
                })
                .collect(),
            Factor::Simplex { .. } => (1..n)
                .map(|k| {
                    let scale = ((k * (k + 1)) as f64).sqrt();
                    let mut v = vec![0.0; n];
                    v[..k].iter_mut().for_each(|a| *a = 1.0 / scale);
                    v[k] = -(k as f64) / scale;
                    v
                })
                .collect(),
        }
    }
}

/// Cartesian product of factors, with points stored as concatenated ambient
/// coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductDomain {
    factors: Vec<Factor>,
}

impl ProductDomain {
    pub fn new(factors: Vec<Factor>) -> Self {
        ProductDomain { factors }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn ambient(&self) -> usize {
        self.factors.iter().map(Factor::ambient).sum()
    }

    /// Start offset of each factor's coordinates.
    pub fn offsets(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.factors.len());
        let mut at = 0;
        for f in &self.factors {
            out.push(at);
            at += f.ambient();
        }
        out
    }

    /// Splits a point into per-factor slices.
    pub fn split<'a>(&self, p: &'a [f64]) -> Vec<&'a [f64]> {
        let mut out = Vec::with_capacity(self.factors.len());
        let mut rest = p;
        for f in &self.factors {
            let (head, tail) = rest.split_at(f.ambient());
            out.push(head);
            rest = tail;
        }
        out
    }

    pub fn random_point(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.factors.iter().flat_map(|f| f.random_point(rng)).collect()
    }

    pub fn retract(&self, p: &mut [f64]) {
        let mut rest = p;
        for f in &self.factors {
            let (head, tail) = rest.split_at_mut(f.ambient());
            f.retract(head);
            rest = tail;
        }
    }

    /// Orthonormal tangent basis at `p`, as full-length ambient vectors.
    pub fn tangent_basis(&self, p: &[f64]) -> Vec<Vec<f64>> {
        let total = self.ambient();
        let mut out = Vec::new();
        for (f, (offset, part)) in self.factors.iter().zip(self.offsets().into_iter().zip(self.split(p))) {
            for v in f.tangent_basis(part) {
                let mut full = vec![0.0; total];
                full[offset..offset + v.len()].copy_from_slice(&v);
                out.push(full);
            }
        }
        out
    }
}

/// Stopping rules for the local solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalOptions {
    pub max_iters: usize,
    /// Stop as soon as the residual norm is at or below this value.
    pub target: f64,
}

impl Default for LocalOptions {
    fn default() -> Self {
        LocalOptions {
            max_iters: 200,
            target: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalResult {
    pub point: Vec<f64>,
    pub norm: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

/// Residual map whose squared norm is minimized.
pub trait Residual: Sync {
    fn residual(&self, p: &[f64]) -> Vec<f64>;

    /// Ambient Jacobian (rows = residual components), if known in closed form.
    fn jacobian(&self, _p: &[f64]) -> Option<DMatrix<f64>> {
        None
    }
}

impl<F> Residual for F
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    fn residual(&self, p: &[f64]) -> Vec<f64> {
        self(p)
    }
}

/// Levenberg-Marquardt descent from `start` on `domain`.
pub fn local_minimize<R: Residual + ?Sized>(domain: &ProductDomain, start: &[f64], problem: &R, opts: &LocalOptions) -> LocalResult {
    let mut p = start.to_vec();
    domain.retract(&mut p);
    let mut r = problem.residual(&p);
    let mut f = sq_norm(&r);
    let mut evaluations = 1;
    let mut mu: Option<f64> = None;
    let mut iterations = 0;
    while iterations < opts.max_iters && f.sqrt() > opts.target && f.is_finite() {
        iterations += 1;
        let basis = domain.tangent_basis(&p);
        let k = basis.len();
        if k == 0 {
            break;
        }
        let jac = match problem.jacobian(&p) {
            Some(ambient) => {
                let b = DMatrix::from_fn(ambient.ncols(), k, |i, t| basis[t][i]);
                ambient * b
            }
            None => {
                let h = (0.1 * f.sqrt()).clamp(1e-9, 1e-5);
                let mut jac = DMatrix::zeros(r.len(), k);
                for (t, v) in basis.iter().enumerate() {
                    let mut plus: Vec<f64> = p.iter().zip(v).map(|(a, b)| a + h * b).collect();
                    let mut minus: Vec<f64> = p.iter().zip(v).map(|(a, b)| a - h * b).collect();
                    domain.retract(&mut plus);
                    domain.retract(&mut minus);
                    let rp = problem.residual(&plus);
                    let rm = problem.residual(&minus);
                    evaluations += 2;
                    for row in 0..r.len() {
                        jac[(row, t)] = (rp[row] - rm[row]) / (2.0 * h);
                    }
                }
                jac
            }
        };
        let rv = DVector::from_column_slice(&r);
        let g = jac.transpose() * &rv;
        let a = jac.transpose() * &jac;
        let scale = (0..k).map(|i| a[(i, i)]).fold(0.0f64, f64::max).max(1e-300);
        let mut damping = mu.unwrap_or(1e-3 * scale);
        let mut accepted = false;
        for _ in 0..30 {
            let mut m = a.clone();
            for i in 0..k {
                m[(i, i)] += damping;
            }
            let Some(chol) = m.cholesky() else {
                damping *= 4.0;
                continue;
            };
            let delta = chol.solve(&(-&g));
            let mut cand = p.clone();
            for (t, v) in basis.iter().enumerate() {
                let s = delta[t];
                cand.iter_mut().zip(v).for_each(|(c, b)| *c += s * b);
            }
            domain.retract(&mut cand);
            let rc = problem.residual(&cand);
            evaluations += 1;
            let fc = sq_norm(&rc);
            if fc < f {
                p = cand;
                r = rc;
                f = fc;
                damping = (damping / 3.0).max(1e-15 * scale);
                accepted = true;
                break;
            }
            damping *= 4.0;
            if damping > 1e12 * scale {
                break;
            }
        }
        mu = Some(damping);
        if !accepted {
            break;
        }
    }
    LocalResult {
        point: p,
        norm: f.sqrt(),
        iterations,
        evaluations,
    }
}

/// Multistart configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultistartConfig {
    pub starts: usize,
    pub seed: u64,
    /// Starts run per batch; early stopping is checked between batches.
    pub batch: usize,
    /// Stop after the first batch whose best norm is at or below this value.
    pub stop_below: Option<f64>,
    pub local: LocalOptions,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for MultistartConfig {
    fn default() -> Self {
        MultistartConfig {
            starts: 200,
            seed: 0,
            batch: 8,
            stop_below: None,
            local: LocalOptions::default(),
            execution: Execution::Parallel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartOutcome {
    pub index: usize,
    pub seed: u64,
    pub result: LocalResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultistartResult {
    pub best: StartOutcome,
    pub starts_run: usize,
    pub seeds: Vec<u64>,
    pub evaluations: usize,
}

/// SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of start `index` under master seed `seed`.
pub fn start_seed(seed: u64, index: usize) -> u64 {
    splitmix64(seed ^ splitmix64(index as u64))
}

/// Runs seeded local solves and keeps the best by `(norm, index)`.
///
/// `start` draws the initial point from the start's own generator; `solve`
/// runs the local method from it.
pub fn multistart<S, L>(config: &MultistartConfig, start: S, solve: L) -> MultistartResult
where
    S: Fn(&mut ChaCha8Rng) -> Vec<f64> + Sync + Send,
    L: Fn(&[f64]) -> LocalResult + Sync + Send,
{
    let batch = config.batch.max(1);
    let total = config.starts.max(1);
    let mut best: Option<StartOutcome> = None;
    let mut seeds = Vec::new();
    let mut evaluations = 0;
    let mut run = 0;
    while run < total {
        let len = batch.min(total - run);
        let outcomes = map_indexed(len, config.execution, |offset| {
            let index = run + offset;
            let seed = start_seed(config.seed, index);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x0 = start(&mut rng);
            StartOutcome {
                index,
                seed,
                result: solve(&x0),
            }
        });
        run += len;
        for o in outcomes {
            seeds.push(o.seed);
            evaluations += o.result.evaluations;
            let better = match &best {
                None => true,
                Some(b) => o.result.norm < b.result.norm,
            };
            if better {
                best = Some(o);
            }
        }
        if let (Some(limit), Some(b)) = (config.stop_below, &best) {
            if b.result.norm <= limit {
                break;
            }
        }
    }
    MultistartResult {
        best: best.expect("at least one start runs"),
        starts_run: run,
        seeds,
        evaluations,
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    sq_norm(a).sqrt()
}

pub(crate) fn sq_norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_tangent_basis_is_orthonormal() {
        let f = Factor::sphere(3);
        let p = [0.5, 0.5, 0.5, 0.5];
        let basis = f.tangent_basis(&p);
        assert_eq!(basis.len(), 3);
        for (i, u) in basis.iter().enumerate() {
            assert!(dot(u, &p).abs() < 1e-12);
            for (j, v) in basis.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot(u, v) - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn simplex_tangent_basis_sums_to_zero() {
        let f = Factor::Simplex { vertices: 4 };
        for v in f.tangent_basis(&[0.25; 4]) {
            assert!(v.iter().sum::<f64>().abs() < 1e-12);
            assert!((norm(&v) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn finds_point_on_sphere_with_prescribed_first_coordinates() {
        let domain = ProductDomain::new(vec![Factor::sphere(2)]);
        let residual = |p: &[f64]| vec![p[0] - 0.6, p[1] - 0.8];
        let res = local_minimize(
            &domain,
            &[0.0, 0.0, 1.0],
            &residual,
            &LocalOptions {
                max_iters: 100,
                target: 1e-12,
            },
        );
        assert!(res.norm < 1e-9, "norm {}", res.norm);
    }

    #[test]
    fn multistart_is_deterministic_across_execution_modes() {
        let domain = ProductDomain::new(vec![Factor::sphere(2), Factor::Simplex { vertices: 3 }]);
        let residual = |p: &[f64]| vec![p[0] * p[3] - 0.1, p[1] + p[4] - 0.3];
        let run = |execution| {
            let config = MultistartConfig {
                starts: 10,
                seed: 7,
                batch: 4,
                stop_below: None,
                local: LocalOptions {
                    max_iters: 50,
                    target: 1e-10,
                },
                execution,
            };
            multistart(
                &config,
                |rng| domain.random_point(rng),
                |x0| local_minimize(&domain, x0, &residual, &config.local),
            )
        };
        assert_eq!(run(Execution::Sequential), run(Execution::Parallel));
    }
}
