//! Multistart searches for parallelogram witnesses and for zeros of
//! equivariant maps.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::maps::{defect_unchecked, Domain, EquivariantMap, MapError, PhiZ2, ProductMap, PsiMap, MEMBERSHIP_TOL};
use crate::optim::{local_minimize, multistart, norm, start_seed, Factor, LocalOptions, MultistartConfig, ProductDomain};
use crate::par::{map_indexed, Execution};
use crate::simplicial::{CrosspolytopeChart, DeletedJoinPoint};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Map(#[from] MapError),
}

/// Outcome of a search. Absence of a witness is not a proof of absence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    WitnessFound,
    NoWitnessBelowTolerance,
}

impl Verdict {
    pub fn found(self) -> bool {
        self == Verdict::WitnessFound
    }
}

pub const DEFAULT_MIN_SEP: f64 = 0.05;
pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_STARTS: usize = 200;
/// Weight of the separation penalty relative to the defect.
const SEPARATION_WEIGHT: f64 = 10.0;
/// Penalized searches aim slightly past the minimum separation.
const SEPARATION_MARGIN: f64 = 1.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub min_sep: f64,
    pub tol: f64,
    pub starts: usize,
    pub seed: u64,
    /// Restrict to quadruples `(x, y, −x, −y)` on spheres.
    pub z2: bool,
    pub max_iters: usize,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            min_sep: DEFAULT_MIN_SEP,
            tol: DEFAULT_TOL,
            starts: DEFAULT_STARTS,
            seed: 0,
            z2: false,
            max_iters: 200,
            execution: Execution::default(),
        }
    }
}

impl SearchConfig {
    fn validate(&self) -> Result<(), SearchError> {
        if !(self.min_sep > 0.0 && self.min_sep.is_finite()) {
            return Err(SearchError::InvalidConfig(format!("min_sep {} must be positive", self.min_sep)));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(SearchError::InvalidConfig(format!("tol {} must be positive", self.tol)));
        }
        if self.starts == 0 {
            return Err(SearchError::InvalidConfig("at least one start is required".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quadruple {
    pub x1: Vec<f64>,
    pub y1: Vec<f64>,
    pub x2: Vec<f64>,
    pub y2: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Separations {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessFlags {
    /// The two edge vectors at `f(x₁,y₁)` are parallel and nonzero.
    pub collinear: bool,
    pub z2_constrained: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub starts: usize,
    pub starts_run: usize,
    pub max_iters: usize,
    pub evaluations: usize,
}

/// Four points whose images form an axis-aligned parallelogram up to `defect`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParallelogramWitness {
    pub points: Quadruple,
    pub defect: f64,
    pub separations: Separations,
    pub min_sep: f64,
    pub flags: WitnessFlags,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub verdict: Verdict,
    /// Smallest defect norm found.
    pub defect: f64,
    /// Quadruple attaining `defect`.
    pub points: Quadruple,
    pub separations: Separations,
    pub seed: u64,
    pub budget: Budget,
    pub flags: WitnessFlags,
    pub min_sep: f64,
    pub tol: f64,
    /// Seed of every start that ran, in start order.
    pub seeds: Vec<u64>,
}

impl SearchReport {
    pub fn witness(&self) -> Option<ParallelogramWitness> {
        self.verdict.found().then(|| ParallelogramWitness {
            points: self.points.clone(),
            defect: self.defect,
            separations: self.separations,
            min_sep: self.min_sep,
            flags: self.flags,
        })
    }
}

fn collinear(f: &ProductMap, q: &Quadruple, tol: f64) -> bool {
    let base = f.eval(&q.x1, &q.y1);
    let a: Vec<f64> = f.eval(&q.x2, &q.y1).iter().zip(&base).map(|(u, v)| u - v).collect();
    let b: Vec<f64> = f.eval(&q.x1, &q.y2).iter().zip(&base).map(|(u, v)| u - v).collect();
    let (na, nb) = (norm(&a), norm(&b));
    if na <= tol || nb <= tol {
        return false;
    }
    let cos = a.iter().zip(&b).map(|(u, v)| u * v).sum::<f64>() / (na * nb);
    1.0 - cos.abs() < 1e-9
}

fn measure(f: &ProductMap, q: &Quadruple) -> (f64, Separations) {
    let d = norm(&defect_unchecked(f, &q.x1, &q.y1, &q.x2, &q.y2));
    let seps = Separations {
        x: f.x_domain().separation(&q.x1, &q.x2),
        y: f.y_domain().separation(&q.y1, &q.y2),
    };
    (d, seps)
}

/// Searches for `x₁, x₂, y₁, y₂` with vanishing defect and separations at
/// least `min_sep`, by seeded multistart Levenberg-Marquardt on
/// `defect ⊕ separation penalty`.
pub fn minimize_defect(f: &ProductMap, config: &SearchConfig) -> Result<SearchReport, SearchError> {
    config.validate()?;
    let (dx, dy) = (f.x_domain().clone(), f.y_domain().clone());
    let local = LocalOptions {
        max_iters: config.max_iters,
        target: config.tol / 10.0,
    };
    let ms = MultistartConfig {
        starts: config.starts,
        seed: config.seed,
        batch: 8,
        stop_below: Some(config.tol / 10.0),
        local,
        execution: config.execution,
    };
    let (result, to_quad): (_, Box<dyn Fn(&[f64]) -> Quadruple>) = if config.z2 {
        for dom in [&dx, &dy] {
            if !dom.is_sphere() {
                return Err(MapError::NotSphere(dom.to_string()).into());
            }
        }
        let phi = crate::maps::phi_z2(f)?;
        let domain = ProductDomain::new(vec![dx.factor(), dy.factor()]);
        let px = dx.ambient();
        let residual = |p: &[f64]| phi_residual(&phi, p, px);
        let result = multistart(
            &ms,
            |rng| domain.random_point(rng),
            |x0| local_minimize(&domain, x0, &residual, &local),
        );
        let to_quad = move |p: &[f64]| {
            let (x, y) = p.split_at(px);
            Quadruple {
                x1: x.to_vec(),
                y1: y.to_vec(),
                x2: x.iter().map(|v| -v).collect(),
                y2: y.iter().map(|v| -v).collect(),
            }
        };
        (result, Box::new(to_quad) as Box<dyn Fn(&[f64]) -> Quadruple>)
    } else {
        let domain = ProductDomain::new(vec![dx.factor(), dy.factor(), dx.factor(), dy.factor()]);
        let (px, py) = (dx.ambient(), dy.ambient());
        let target_sep = SEPARATION_MARGIN * config.min_sep;
        let residual = |p: &[f64]| {
            let (x1, rest) = p.split_at(px);
            let (y1, rest) = rest.split_at(py);
            let (x2, y2) = rest.split_at(px);
            let mut r = defect_unchecked(f, x1, y1, x2, y2);
            r.push(SEPARATION_WEIGHT * (target_sep - dx.separation(x1, x2)).max(0.0));
            r.push(SEPARATION_WEIGHT * (target_sep - dy.separation(y1, y2)).max(0.0));
            for (dom, pt) in [(&dx, x1), (&dy, y1), (&dx, x2), (&dy, y2)] {
                if matches!(dom, Domain::Complex { .. }) {
                    r.push(dom.distance_to_domain(pt));
                }
            }
            r
        };
        let result = multistart(
            &ms,
            |rng| domain.random_point(rng),
            |x0| local_minimize(&domain, x0, &residual, &local),
        );
        let (dx, dy) = (dx.clone(), dy.clone());
        let to_quad = move |p: &[f64]| {
            let (x1, rest) = p.split_at(px);
            let (y1, rest) = rest.split_at(py);
            let (x2, y2) = rest.split_at(px);
            Quadruple {
                x1: dx.project(x1),
                y1: dy.project(y1),
                x2: dx.project(x2),
                y2: dy.project(y2),
            }
        };
        (result, Box::new(to_quad) as Box<dyn Fn(&[f64]) -> Quadruple>)
    };
    let points = to_quad(&result.best.result.point);
    let (defect, separations) = measure(f, &points);
    let flags = WitnessFlags {
        collinear: collinear(f, &points, config.tol),
        z2_constrained: config.z2,
    };
    let mut report = SearchReport {
        verdict: Verdict::NoWitnessBelowTolerance,
        defect,
        points,
        separations,
        seed: config.seed,
        budget: Budget {
            starts: config.starts,
            starts_run: result.starts_run,
            max_iters: config.max_iters,
            evaluations: result.evaluations,
        },
        flags,
        min_sep: config.min_sep,
        tol: config.tol,
        seeds: result.seeds,
    };
    let candidate = ParallelogramWitness {
        points: report.points.clone(),
        defect,
        separations,
        min_sep: config.min_sep,
        flags,
    };
    if verify_witness(f, &candidate, config.tol) {
        report.verdict = Verdict::WitnessFound;
    }
    Ok(report)
}

fn phi_residual(phi: &PhiZ2, p: &[f64], px: usize) -> Vec<f64> {
    let (x, y) = p.split_at(px);
    phi.eval(x, y)
}

/// Recomputes the defect and separations of `w` from scratch.
pub fn verify_witness(f: &ProductMap, w: &ParallelogramWitness, tol: f64) -> bool {
    let q = &w.points;
    let (dx, dy) = (f.x_domain(), f.y_domain());
    let inside = [(dx, &q.x1), (dy, &q.y1), (dx, &q.x2), (dy, &q.y2)]
        .iter()
        .all(|(dom, p)| dom.contains(p, MEMBERSHIP_TOL));
    if !inside {
        return false;
    }
    if w.flags.z2_constrained {
        let neg = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(u, v)| *v == -*u);
        if !neg(&q.x1, &q.x2) || !neg(&q.y1, &q.y2) {
            return false;
        }
    }
    let (d, seps) = measure(f, q);
    d < tol && seps.x >= w.min_sep && seps.y >= w.min_sep
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroConfig {
    pub tol: f64,
    pub starts: usize,
    pub seed: u64,
    pub max_iters: usize,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for ZeroConfig {
    fn default() -> Self {
        ZeroConfig {
            tol: DEFAULT_TOL,
            starts: DEFAULT_STARTS,
            seed: 0,
            max_iters: 200,
            execution: Execution::default(),
        }
    }
}

/// A zero of an equivariant map, with both sphere points decoded through the
/// crosspolytope charts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroWitness {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub first: DeletedJoinPoint,
    pub second: DeletedJoinPoint,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroReport {
    pub verdict: Verdict,
    pub norm: f64,
    pub witness: ZeroWitness,
    pub seed: u64,
    pub budget: Budget,
    pub tol: f64,
    pub seeds: Vec<u64>,
}

/// Minimizes `‖g‖` over `S^m × S^n`.
pub fn find_equivariant_zero(g: &dyn EquivariantMap, config: &ZeroConfig) -> Result<ZeroReport, SearchError> {
    if !(config.tol > 0.0 && config.tol.is_finite()) || config.starts == 0 {
        return Err(SearchError::InvalidConfig("tol must be positive and starts nonzero".into()));
    }
    let (m, n) = g.spheres();
    let domain = ProductDomain::new(vec![Factor::sphere(m), Factor::sphere(n)]);
    let local = LocalOptions {
        max_iters: config.max_iters,
        target: config.tol / 10.0,
    };
    let ms = MultistartConfig {
        starts: config.starts,
        seed: config.seed,
        batch: 8,
        stop_below: Some(config.tol / 10.0),
        local,
        execution: config.execution,
    };
    let residual = |p: &[f64]| {
        let (x, y) = p.split_at(m + 1);
        g.eval(x, y)
    };
    let start = |rng: &mut ChaCha8Rng| match g.start_hint(rng) {
        Some((mut x, y)) => {
            x.extend(y);
            x
        }
        None => domain.random_point(rng),
    };
    let result = multistart(&ms, start, |x0| local_minimize(&domain, x0, &residual, &local));
    let (x, y) = result.best.result.point.split_at(m + 1);
    let value = norm(&g.eval(x, y));
    let first = CrosspolytopeChart::new(m).to_join(x).map_err(MapError::from)?;
    let second = CrosspolytopeChart::new(n).to_join(y).map_err(MapError::from)?;
    Ok(ZeroReport {
        verdict: if value < config.tol {
            Verdict::WitnessFound
        } else {
            Verdict::NoWitnessBelowTolerance
        },
        norm: value,
        witness: ZeroWitness {
            x: x.to_vec(),
            y: y.to_vec(),
            first,
            second,
            norm: value,
        },
        seed: config.seed,
        budget: Budget {
            starts: config.starts,
            starts_run: result.starts_run,
            max_iters: config.max_iters,
            evaluations: result.evaluations,
        },
        tol: config.tol,
        seeds: result.seeds,
    })
}

/// A local minimum of `‖Ψ‖` on `S^{n−1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiMinimum {
    pub z: Vec<f64>,
    pub point: DeletedJoinPoint,
    pub norm: f64,
}

/// Runs one local descent of `‖Ψ‖` per start and returns every end point.
pub fn psi_minima(psi: &PsiMap, starts: usize, seed: u64, execution: Execution) -> Vec<PsiMinimum> {
    let chart = psi.chart();
    let domain = ProductDomain::new(vec![Factor::sphere(chart.m)]);
    let residual = |z: &[f64]| psi.eval_sphere(z).unwrap_or_else(|_| vec![f64::NAN; psi.output_dim()]);
    let local = LocalOptions {
        max_iters: 200,
        target: 1e-9,
    };
    map_indexed(starts, execution, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(start_seed(seed, i));
        let x0 = domain.random_point(&mut rng);
        let r = local_minimize(&domain, &x0, &residual, &local);
        let point = chart.to_join(&r.point).expect("sphere point is nonzero");
        PsiMinimum {
            norm: norm(&psi.eval_join(&point)),
            z: r.point,
            point,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{random_additive, random_trig, MapKind};

    fn sphere(m: usize) -> Domain {
        Domain::Sphere { m }
    }

    #[test]
    fn additive_witness_on_first_batch() {
        let f = random_additive(2, sphere(1), sphere(1), 2, 2);
        let r = minimize_defect(&f, &SearchConfig::default()).unwrap();
        assert!(r.verdict.found());
        assert_eq!(r.budget.starts_run, 8);
        assert!(verify_witness(&f, &r.witness().unwrap(), 1e-6));
    }

    #[test]
    fn z2_trig_witness() {
        let f = random_trig(11, sphere(1), sphere(2), 3, 2);
        let cfg = SearchConfig {
            z2: true,
            ..SearchConfig::default()
        };
        let r = minimize_defect(&f, &cfg).unwrap();
        assert!(r.verdict.found(), "{r:?}");
        let w = r.witness().unwrap();
        assert!(w.flags.z2_constrained);
        assert!(w.points.x2.iter().zip(&w.points.x1).all(|(a, b)| *a == -*b));
    }

    #[test]
    fn invalid_config() {
        let f = random_additive(2, sphere(1), sphere(1), 2, 2);
        let cfg = SearchConfig {
            min_sep: 0.0,
            ..SearchConfig::default()
        };
        assert!(matches!(minimize_defect(&f, &cfg), Err(SearchError::InvalidConfig(_))));
    }

    #[test]
    fn constant_coordinate_blocks_zero() {
        struct Shifted;
        impl EquivariantMap for Shifted {
            fn spheres(&self) -> (usize, usize) {
                (1, 1)
            }
            fn signature(&self) -> crate::hopf::ActionSignature {
                crate::hopf::ActionSignature::new(0, 0, 2)
            }
            fn eval(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
                vec![x[0] * y[0], 0.5]
            }
        }
        let cfg = ZeroConfig {
            starts: 16,
            ..ZeroConfig::default()
        };
        let r = find_equivariant_zero(&Shifted, &cfg).unwrap();
        assert_eq!(r.verdict, Verdict::NoWitnessBelowTolerance);
        assert!(r.norm >= 0.5);
    }

    #[test]
    fn product_map_custom_kind_search() {
        let f = ProductMap::new(sphere(1), sphere(1), 2, MapKind::Custom, |x, y| vec![x[0] * y[0], x[1] * y[1]]);
        let cfg = SearchConfig {
            starts: 16,
            ..SearchConfig::default()
        };
        let r = minimize_defect(&f, &cfg).unwrap();
        if let Some(w) = r.witness() {
            assert!(verify_witness(&f, &w, cfg.tol));
        }
    }
}
