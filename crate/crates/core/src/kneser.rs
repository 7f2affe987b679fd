//! Kneser graphs of nonfaces and exact chromatic numbers.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::simplicial::{lex_cmp, ComplexError, SimplicialComplex, VertexSet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KneserError {
    #[error("complex is a full simplex and has no nonfaces")]
    NoNonfaces,
    #[error("coloring assigns {got} colors to a graph with {expected} vertices")]
    SizeMismatch { expected: usize, got: usize },
    #[error("coloring is not proper: vertices {0} and {1} are adjacent and share a color")]
    ImproperColoring(usize, usize),
    #[error("colors must be numbered from 1")]
    ZeroColor,
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// Simple undirected graph on vertices `0..n` stored as sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Graph { adj: vec![Vec::new(); n] }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Graph::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    /// Adds the edge `{u, v}`; loops and repeated edges are ignored.
    pub fn add_edge(&mut self, u: usize, v: usize) {
        if u == v || self.has_edge(u, v) {
            return;
        }
        let pos = self.adj[u].binary_search(&v).unwrap_err();
        self.adj[u].insert(pos, v);
        let pos = self.adj[v].binary_search(&u).unwrap_err();
        self.adj[v].insert(pos, u);
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, nbrs) in self.adj.iter().enumerate() {
            out.extend(nbrs.iter().filter(|&&v| v > u).map(|&v| (u, v)));
        }
        out
    }
}

/// Color assignment with colors numbered `1..=count`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring {
    colors: Vec<usize>,
    count: usize,
}

impl Coloring {
    /// Builds a coloring; `count` is the number of distinct colors used.
    pub fn new(colors: Vec<usize>) -> Result<Self, KneserError> {
        if colors.contains(&0) {
            return Err(KneserError::ZeroColor);
        }
        let mut distinct = colors.clone();
        distinct.sort_unstable();
        distinct.dedup();
        Ok(Coloring {
            count: distinct.len(),
            colors,
        })
    }

    pub fn colors(&self) -> &[usize] {
        &self.colors
    }

    pub fn color(&self, v: usize) -> usize {
        self.colors[v]
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Largest color label in use.
    pub fn max_color(&self) -> usize {
        self.colors.iter().copied().max().unwrap_or(0)
    }

    pub fn check_proper(&self, g: &Graph) -> Result<(), KneserError> {
        if self.colors.len() != g.vertex_count() {
            return Err(KneserError::SizeMismatch {
                expected: g.vertex_count(),
                got: self.colors.len(),
            });
        }
        for (u, v) in g.edges() {
            if self.colors[u] == self.colors[v] {
                return Err(KneserError::ImproperColoring(u, v));
            }
        }
        Ok(())
    }

    pub fn is_proper(&self, g: &Graph) -> bool {
        self.check_proper(g).is_ok()
    }
}

/// Kneser graph of nonfaces: vertices are nonfaces, edges join disjoint ones.
#[derive(Debug, Clone)]
pub struct KneserGraph {
    n: usize,
    minimal_only: bool,
    vertices: Vec<VertexSet>,
    graph: Graph,
}

impl KneserGraph {
    /// Kneser graph on the given vertex sets, which must be listed in
    /// nondecreasing size.
    fn from_sorted_sets(n: usize, minimal_only: bool, vertices: Vec<VertexSet>) -> Self {
        let mut graph = Graph::new(vertices.len());
        for (a, &u) in vertices.iter().enumerate() {
            let room = n as u32 - u.count_ones();
            for (b, &v) in vertices.iter().enumerate().skip(a + 1) {
                if v.count_ones() > room {
                    break;
                }
                if u & v == 0 {
                    graph.adj[a].push(b);
                    graph.adj[b].push(a);
                }
            }
        }
        for list in &mut graph.adj {
            list.sort_unstable();
        }
        KneserGraph {
            n,
            minimal_only,
            vertices,
            graph,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn minimal_only(&self) -> bool {
        self.minimal_only
    }

    pub fn vertices(&self) -> &[VertexSet] {
        &self.vertices
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn is_edgeless(&self) -> bool {
        self.graph.edge_count() == 0
    }

    pub fn chromatic_number(&self) -> (usize, Coloring) {
        chromatic_number(&self.graph)
    }
}

/// The Kneser graph of the minimal nonfaces of `k`, or of all its nonfaces.
pub fn kneser_graph(k: &SimplicialComplex, minimal_only: bool) -> Result<KneserGraph, KneserError> {
    let vertices = if minimal_only { k.minimal_nonfaces() } else { k.all_nonfaces()? };
    if vertices.is_empty() {
        return Err(KneserError::NoNonfaces);
    }
    Ok(KneserGraph::from_sorted_sets(k.n(), minimal_only, vertices))
}

/// Exact chromatic number with a witness coloring.
///
/// Isolated vertices get color 1. The rest is solved by DSATUR-ordered
/// branch and bound between a greedy clique bound and a DSATUR coloring;
/// ties are broken by vertex index, so the witness is deterministic.
pub fn chromatic_number(g: &Graph) -> (usize, Coloring) {
    let n = g.vertex_count();
    if n == 0 {
        return (
            0,
            Coloring {
                colors: Vec::new(),
                count: 0,
            },
        );
    }
    let active: Vec<usize> = (0..n).filter(|&v| !g.adj[v].is_empty()).collect();
    let mut colors = vec![1usize; n];
    if active.is_empty() {
        return (1, Coloring { colors, count: 1 });
    }
    let mut index = vec![usize::MAX; n];
    for (i, &v) in active.iter().enumerate() {
        index[v] = i;
    }
    let adj: Vec<Vec<usize>> = active.iter().map(|&v| g.adj[v].iter().map(|&u| index[u]).collect()).collect();
    let mut solver = Dsatur::new(adj);
    let (c, local) = solver.solve();
    for (i, &v) in active.iter().enumerate() {
        colors[v] = local[i];
    }
    let coloring = Coloring::new(colors).expect("solver colors start at 1");
    debug_assert!(coloring.is_proper(g));
    (c, coloring)
}

struct Dsatur {
    adj: Vec<Vec<usize>>,
    colors: Vec<usize>,
    // conflicts[v][c] = number of neighbours of v holding colour c.
    conflicts: Vec<Vec<u32>>,
    saturation: Vec<usize>,
    best: usize,
    best_colors: Vec<usize>,
    lower: usize,
}

impl Dsatur {
    fn new(adj: Vec<Vec<usize>>) -> Self {
        let n = adj.len();
        Dsatur {
            adj,
            colors: vec![0; n],
            conflicts: Vec::new(),
            saturation: vec![0; n],
            best: usize::MAX,
            best_colors: Vec::new(),
            lower: 1,
        }
    }

    fn solve(&mut self) -> (usize, Vec<usize>) {
        let n = self.adj.len();
        self.lower = self.greedy_clique();
        let greedy = self.greedy_dsatur();
        self.best = *greedy.iter().max().unwrap_or(&1);
        self.best_colors = greedy;
        if self.best > self.lower {
            self.conflicts = vec![vec![0; self.best + 1]; n];
            self.colors = vec![0; n];
            self.saturation = vec![0; n];
            self.branch(0);
        }
        (self.best, self.best_colors.clone())
    }

    fn greedy_clique(&self) -> usize {
        let n = self.adj.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| self.adj[b].len().cmp(&self.adj[a].len()).then(a.cmp(&b)));
        let mut best = 1;
        for &start in &order {
            let mut clique = vec![start];
            for &v in &order {
                if v != start && clique.iter().all(|&u| self.adj[u].binary_search(&v).is_ok()) {
                    clique.push(v);
                }
            }
            best = best.max(clique.len());
        }
        best
    }

    fn greedy_dsatur(&self) -> Vec<usize> {
        let n = self.adj.len();
        let mut colors = vec![0usize; n];
        let mut seen: Vec<Vec<bool>> = vec![vec![false; n + 2]; n];
        let mut saturation = vec![0usize; n];
        for _ in 0..n {
            let v = (0..n)
                .filter(|&v| colors[v] == 0)
                .max_by(|&a, &b| {
                    saturation[a]
                        .cmp(&saturation[b])
                        .then(self.adj[a].len().cmp(&self.adj[b].len()))
                        .then(b.cmp(&a))
                })
                .expect("an uncolored vertex remains");
            let c = (1..).find(|&c| !seen[v][c]).expect("some color is free");
            colors[v] = c;
            for &u in &self.adj[v] {
                if !seen[u][c] {
                    seen[u][c] = true;
                    saturation[u] += 1;
                }
            }
        }
        colors
    }

    fn pick(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for v in 0..self.adj.len() {
            if self.colors[v] != 0 {
                continue;
            }
            best = match best {
                None => Some(v),
                Some(b) => {
                    let key = (self.saturation[v], self.adj[v].len());
                    let bkey = (self.saturation[b], self.adj[b].len());
                    if key > bkey {
                        Some(v)
                    } else {
                        Some(b)
                    }
                }
            };
        }
        best
    }

    fn assign(&mut self, v: usize, c: usize) {
        self.colors[v] = c;
        for i in 0..self.adj[v].len() {
            let u = self.adj[v][i];
            if self.conflicts[u][c] == 0 {
                self.saturation[u] += 1;
            }
            self.conflicts[u][c] += 1;
        }
    }

    fn unassign(&mut self, v: usize, c: usize) {
        self.colors[v] = 0;
        for i in 0..self.adj[v].len() {
            let u = self.adj[v][i];
            self.conflicts[u][c] -= 1;
            if self.conflicts[u][c] == 0 {
                self.saturation[u] -= 1;
            }
        }
    }

    fn branch(&mut self, used: usize) {
        if used >= self.best || self.best == self.lower {
            return;
        }
        let Some(v) = self.pick() else {
            self.best = used;
            self.best_colors = self.colors.clone();
            return;
        };
        let top = (used + 1).min(self.best - 1);
        for c in 1..=top {
            if self.conflicts[v][c] != 0 {
                continue;
            }
            self.assign(v, c);
            self.branch(used.max(c));
            self.unassign(v, c);
            if self.best == self.lower {
                return;
            }
        }
    }
}

/// Extends a proper coloring of the minimal-nonface Kneser graph to all
/// nonfaces: each nonface takes the color of the lexicographically least
/// minimal nonface it contains.
pub fn lift_coloring(minimal: &KneserGraph, col: &Coloring) -> Result<(KneserGraph, Coloring), KneserError> {
    col.check_proper(&minimal.graph)?;
    let n = minimal.n;
    let all = all_supersets(n, minimal.vertices())?;
    let mut order: Vec<usize> = (0..minimal.vertices.len()).collect();
    order.sort_by(|&a, &b| lex_cmp(minimal.vertices[a], minimal.vertices[b]));
    let lifted: Vec<usize> = all
        .iter()
        .map(|&s| {
            let src = order
                .iter()
                .copied()
                .find(|&i| minimal.vertices[i] & s == minimal.vertices[i])
                .expect("every nonface contains a minimal nonface");
            col.colors[src]
        })
        .collect();
    let graph = KneserGraph::from_sorted_sets(n, false, all);
    let coloring = Coloring::new(lifted)?;
    Ok((graph, coloring))
}

fn all_supersets(n: usize, minimal: &[VertexSet]) -> Result<Vec<VertexSet>, KneserError> {
    if n > crate::simplicial::MAX_EXHAUSTIVE_VERTICES {
        return Err(ComplexError::TooLargeForEnumeration(n).into());
    }
    let full = crate::simplicial::full_set(n);
    let mut out: Vec<VertexSet> = (1..=full).filter(|&s| minimal.iter().any(|&m| m & s == m)).collect();
    out.sort_by(|a, b| crate::simplicial::graded_cmp(*a, *b));
    Ok(out)
}

/// Minimal nonfaces of a complex together with a proper coloring of their
/// Kneser graph; the data behind the coloring map.
#[derive(Debug, Clone)]
pub struct ColoredComplex {
    complex: SimplicialComplex,
    minimal_nonfaces: Vec<VertexSet>,
    coloring: Coloring,
}

impl ColoredComplex {
    /// Colors the complex optimally.
    pub fn optimal(complex: &SimplicialComplex) -> Result<Self, KneserError> {
        let g = kneser_graph(complex, true)?;
        let (_, coloring) = g.chromatic_number();
        Ok(ColoredComplex {
            complex: complex.clone(),
            minimal_nonfaces: g.vertices,
            coloring,
        })
    }

    /// Uses a supplied coloring of the minimal-nonface Kneser graph.
    pub fn with_coloring(complex: &SimplicialComplex, coloring: Coloring) -> Result<Self, KneserError> {
        let g = kneser_graph(complex, true)?;
        coloring.check_proper(&g.graph)?;
        Ok(ColoredComplex {
            complex: complex.clone(),
            minimal_nonfaces: g.vertices,
            coloring,
        })
    }

    pub fn complex(&self) -> &SimplicialComplex {
        &self.complex
    }

    pub fn coloring(&self) -> &Coloring {
        &self.coloring
    }

    pub fn minimal_nonfaces(&self) -> &[VertexSet] {
        &self.minimal_nonfaces
    }

    /// Number of color labels, `max_color`.
    pub fn colors(&self) -> usize {
        self.coloring.max_color()
    }

    /// `Σ_j` for `j = 1..=colors`: the complex whose nonfaces are the sets
    /// containing a minimal nonface of color `j`. Their intersection is the
    /// original complex.
    pub fn color_complexes(&self) -> Result<Vec<SimplicialComplex>, KneserError> {
        (1..=self.colors())
            .map(|j| {
                let class: Vec<VertexSet> = self
                    .minimal_nonfaces
                    .iter()
                    .zip(self.coloring.colors())
                    .filter(|(_, &c)| c == j)
                    .map(|(&s, _)| s)
                    .collect();
                Ok(SimplicialComplex::from_minimal_nonfaces(self.complex.n(), &class)?)
            })
            .collect()
    }
}
