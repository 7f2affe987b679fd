use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use coupled::bilinear::{catalog_min_dim, Algebra};
use coupled::bounds::{certificate, named_complex, reproduce_table, SpaceDescriptor, SpaceSpec};
use coupled::hopf::{biskew_blocked, shares_binary_one, zero_guaranteed, ActionSignature};
use coupled::kneser::{kneser_graph, Coloring, KneserError};
use coupled::maps::{phi_z2, simplex_pair_map, EquivariantMap, JointObstruction, MapSpec, PsiMap};
use coupled::par::Execution;
use coupled::search::{find_equivariant_zero, minimize_defect, SearchConfig, ZeroConfig, DEFAULT_MIN_SEP, DEFAULT_STARTS, DEFAULT_TOL};
use coupled::simplicial::{vertices_of, SimplicialComplex, NAMED_COMPLEXES};

#[derive(Debug, Parser)]
#[command(
    name = "coupled",
    version,
    about = "Coupled embeddings of products: bounds, obstructions and searches"
)]
struct Cli {
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for randomized subcommands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Certified bounds on d(X,Y) for two space descriptions.
    Bounds { x: PathBuf, y: PathBuf },
    /// Chromatic number of the Kneser graph of minimal nonfaces.
    KneserChi { complex: PathBuf },
    /// Binary-digit predicates for S^m × S^n.
    Hopf {
        m: usize,
        n: usize,
        /// Action signature i j k of the codomain.
        #[arg(long, num_args = 3, value_names = ["I", "J", "K"])]
        sig: Option<Vec<usize>>,
    },
    /// Smallest catalog nonsingular bilinear map R^a × R^b → R^d.
    BilinearCatalog { a: usize, b: usize },
    /// Multistart search for a parallelogram of a product map.
    SearchParallelogram {
        map: PathBuf,
        /// Restrict to quadruples (x, y, −x, −y).
        #[arg(long)]
        z2: bool,
        #[arg(long, default_value_t = DEFAULT_MIN_SEP)]
        min_sep: f64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_STARTS)]
        starts: usize,
    },
    /// Zero search for an equivariant obstruction map.
    ZeroSearch { spec: PathBuf },
    /// Bounds for every reproduced instance, with closed forms.
    ReproduceTable,
    /// Named spaces, embeddings and constructions.
    Catalog,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// A complex given inline or by name.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
enum ComplexRef {
    Named(String),
    Inline(SimplicialComplex),
}

impl ComplexRef {
    fn resolve(&self) -> Result<SimplicialComplex, CliError> {
        match self {
            ComplexRef::Named(id) => named_complex(id).map_err(input),
            ComplexRef::Inline(k) => Ok(k.clone()),
        }
    }
}

/// Input of `zero-search`.
#[derive(Debug, Deserialize)]
struct ZeroSpec {
    #[serde(flatten)]
    construction: Construction,
    tol: Option<f64>,
    starts: Option<usize>,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "construction", rename_all = "snake_case")]
enum Construction {
    /// Four-term defect at `(x, y, −x, −y)` of a map on two spheres.
    PhiZ2 { map: MapSpec },
    /// Weighted defect of a map on two full simplices.
    SimplexPair { map: MapSpec },
    /// Coloring maps of two complexes together with the weighted defect.
    Joint {
        first: ComplexRef,
        second: ComplexRef,
        map: MapSpec,
        #[serde(default)]
        first_coloring: Option<Vec<usize>>,
        #[serde(default)]
        second_coloring: Option<Vec<usize>>,
    },
}

fn psi(k: &SimplicialComplex, colors: &Option<Vec<usize>>) -> Result<PsiMap, CliError> {
    match colors {
        None => PsiMap::optimal(k).map_err(input),
        Some(c) => {
            let col = Coloring::new(c.clone()).map_err(input)?;
            coupled::maps::psi_from_coloring(k, col).map_err(input)
        }
    }
}

fn zero_search(path: &Path, seed: u64, exec: Execution) -> Result<Value, CliError> {
    let spec: ZeroSpec = read_json(path)?;
    let g: Box<dyn EquivariantMap> = match &spec.construction {
        Construction::PhiZ2 { map } => Box::new(phi_z2(&map.build().map_err(input)?).map_err(input)?),
        Construction::SimplexPair { map } => Box::new(simplex_pair_map(&map.build().map_err(input)?).map_err(input)?),
        Construction::Joint {
            first,
            second,
            map,
            first_coloring,
            second_coloring,
        } => {
            let p1 = psi(&first.resolve()?, first_coloring)?;
            let p2 = psi(&second.resolve()?, second_coloring)?;
            let f = map.build().map_err(input)?;
            Box::new(JointObstruction::new(p1, p2, &f).map_err(input)?)
        }
    };
    let config = ZeroConfig {
        tol: spec.tol.unwrap_or(DEFAULT_TOL),
        starts: spec.starts.unwrap_or(DEFAULT_STARTS),
        seed: spec.seed.unwrap_or(seed),
        execution: exec,
        ..ZeroConfig::default()
    };
    let report = find_equivariant_zero(g.as_ref(), &config).map_err(input)?;
    let (m, n) = g.spheres();
    let sig = g.signature();
    Ok(json!({
        "spheres": [m, n],
        "signature": sig,
        "zero_guaranteed": zero_guaranteed(m, n, sig),
        "report": report,
    }))
}

fn kneser_chi(path: &Path) -> Result<Value, CliError> {
    let k: SimplicialComplex = read_json(path)?;
    let g = match kneser_graph(&k, true) {
        Ok(g) => g,
        Err(KneserError::NoNonfaces) => {
            return Ok(json!({ "n": k.n(), "minimal_nonfaces": [], "edges": 0, "edgeless": true, "chi": 0, "coloring": [] }));
        }
        Err(e) => return Err(input(e)),
    };
    let (chi, coloring) = g.chromatic_number();
    if !coloring.is_proper(g.graph()) {
        return Err(CliError::Internal("computed coloring is not proper".into()));
    }
    let nonfaces: Vec<Vec<usize>> = g.vertices().iter().map(|&s| vertices_of(s)).collect();
    Ok(json!({
        "n": k.n(),
        "minimal_nonfaces": nonfaces,
        "edges": g.graph().edge_count(),
        "edgeless": g.is_edgeless(),
        "chi": chi,
        "coloring": coloring.colors(),
    }))
}

fn catalog() -> Result<Value, CliError> {
    let mut complexes = Vec::new();
    for id in NAMED_COMPLEXES {
        let d = SpaceDescriptor::named(id).map_err(|e| CliError::Internal(e.to_string()))?;
        complexes.push(serde_json::to_value(&d).map_err(|e| CliError::Internal(e.to_string()))?);
    }
    Ok(json!({
        "complexes": complexes,
        "complex_families": ["skeleton(m,k)", "three_points_power(k)"],
        "spaces": ["sphere(m)", "manifold"],
        "embeddings": ["sphere(m)", "rp2_r4"],
        "bilinear_constructions": {
            "real_poly": "R^a × R^b → R^(a+b-1)",
            "complex_poly": "2 | a, b",
            "quat_poly": "4 | a, b",
            "oct_poly": "8 | a, b",
            "scalar": Algebra::ALL.iter().map(|a| a.symbol()).collect::<Vec<_>>(),
            "explicit": "sparse integer tensor",
        },
        "map_kinds": ["composed_bilinear", "bilinear", "trig_random", "additive", "tabulated"],
        "zero_constructions": ["phi_z2", "simplex_pair", "joint"],
    }))
}

fn run(cli: Cli) -> Result<Value, CliError> {
    let exec = Execution::default();
    match cli.command {
        Command::Bounds { x, y } => {
            let sx = SpaceDescriptor::from_spec(&read_json::<SpaceSpec>(&x)?).map_err(input)?;
            let sy = SpaceDescriptor::from_spec(&read_json::<SpaceSpec>(&y)?).map_err(input)?;
            let cert = certificate(&sx, &sy).map_err(input)?;
            cert.replay().map_err(|e| CliError::Internal(e.to_string()))?;
            serde_json::to_value(cert).map_err(|e| CliError::Internal(e.to_string()))
        }
        Command::KneserChi { complex } => kneser_chi(&complex),
        Command::Hopf { m, n, sig } => {
            let mut out = json!({
                "shares": shares_binary_one(m as u64, n as u64),
                "biskew_blocked": biskew_blocked(m as u64, n as u64),
            });
            if let Some(s) = sig {
                let sig = ActionSignature::new(s[0], s[1], s[2]);
                out["signature"] = json!(sig);
                out["zero_guaranteed"] = json!(zero_guaranteed(m, n, sig));
            }
            Ok(out)
        }
        Command::BilinearCatalog { a, b } => {
            let entry = catalog_min_dim(a, b).map_err(input)?;
            serde_json::to_value(entry).map_err(|e| CliError::Internal(e.to_string()))
        }
        Command::SearchParallelogram {
            map,
            z2,
            min_sep,
            tol,
            starts,
        } => {
            let spec: MapSpec = read_json(&map)?;
            let f = spec.build().map_err(input)?;
            let config = SearchConfig {
                min_sep,
                tol,
                starts,
                seed: cli.seed,
                z2,
                execution: exec,
                ..SearchConfig::default()
            };
            let report = minimize_defect(&f, &config).map_err(input)?;
            serde_json::to_value(report).map_err(|e| CliError::Internal(e.to_string()))
        }
        Command::ZeroSearch { spec } => zero_search(&spec, cli.seed, exec),
        Command::ReproduceTable => {
            let rows = reproduce_table(exec).map_err(|e| CliError::Internal(e.to_string()))?;
            if rows.iter().any(|r| r.lower.is_some_and(|l| l > r.upper)) {
                return Err(CliError::Internal("a lower bound exceeds its upper bound".into()));
            }
            let all_match = rows.iter().all(|r| r.matches);
            Ok(json!({ "rows": rows, "all_match": all_match }))
        }
        Command::Catalog => catalog(),
    }
}

fn configure_threads(threads: Option<usize>) -> Result<(), CliError> {
    let Some(t) = threads else { return Ok(()) };
    if t == 0 {
        return Err(CliError::Usage("--threads must be positive".into()));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(t)
        .build_global()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    Ok(())
}

fn emit(value: &Value, out: Option<&Path>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    match out {
        Some(path) => fs::write(path, text + "\n").map_err(|e| CliError::Input(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Internal(e.to_string())),
                _ => Ok(()),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let out = cli.out.clone();
    let result = configure_threads(cli.threads)
        .and_then(|()| run(cli))
        .and_then(|v| emit(&v, out.as_deref()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
