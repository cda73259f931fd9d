//! Directed graphs with a vertex involution.
//!
//! A star graph is a finite directed graph `G = (V, E)` together with an
//! involution `i -> i*` on the vertices such that `(i,j)` is an edge exactly
//! when `(j*, i*)` is. Edges are grouped into classes `{e, e*}`; weights and
//! conductances live on classes. The module also provides the named
//! constructions used throughout: de Bruijn graphs under word reversal,
//! doubled/glued environments, and the amnesia graph of variable-length
//! histories.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num::{BigRational, One, Signed, Zero};
use thiserror::Error;

/// Hard cap on the number of edges a builder will generate.
pub const SIZE_CAP: usize = 1 << 16;

/// Index of a vertex inside a [`StarGraph`]. Vertices are stored sorted by
/// name, so index order is lexicographic name order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Index of a directed edge inside a [`StarGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub u32);

impl EdgeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Index of an edge class (an edge identified with its mirror).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassId(pub u32);

impl ClassId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("star map is not an involution at vertex {0}: ({0})** = {1}")]
    NotInvolution(String, String),
    #[error("edge ({0},{1}) is missing its mirror edge ({2},{3})")]
    MissingMirrorEdge(String, String, String, String),
    #[error("no directed path from {0} to {1} or to {2}")]
    NotConnected(String, String, String),
    #[error("duplicate edge ({0},{1})")]
    DuplicateEdge(String, String),
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("star image of {0} is missing")]
    MissingStar(String),
    #[error("graph would have {0} edges, exceeding the cap of {1}")]
    SizeLimit(usize, usize),
    #[error("context set is not closed; missing words: {0:?}")]
    ContextNotClosed(Vec<String>),
    #[error("weights must be strictly positive on every edge (class {0})")]
    NonPositiveWeight(String),
    #[error("alpha values differ inside class {{({0},{1}), ({2},{3})}}")]
    AsymmetricWeight(String, String, String, String),
    #[error("divergence condition div(alpha) = delta_(i0*) - delta_(i0) fails at vertex {0}")]
    DivergenceConditionViolated(String),
}

/// Immutable star-directed graph with all derived structure precomputed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarGraph {
    names: Vec<String>,
    star: Vec<u32>,
    edges: Vec<(u32, u32)>,
    /// Mirror edge of each edge: (i,j) -> (j*, i*).
    mirror: Vec<u32>,
    /// Fixed points of the involution.
    v0: Vec<u32>,
    /// Transversal of the non-fixed pairs (smaller name of each pair).
    v1: Vec<u32>,
    v1_star: Vec<u32>,
    class_of: Vec<u32>,
    class_members: Vec<Vec<u32>>,
    /// Lexicographically smallest member of each class.
    class_rep: Vec<u32>,
    out_edges: Vec<Vec<u32>>,
    in_edges: Vec<Vec<u32>>,
}

impl StarGraph {
    /// Builds and fully validates a star graph from named data. All
    /// violations are collected, not just the first one.
    pub fn new(
        vertices: &[(String, String)],
        edges: &[(String, String)],
    ) -> Result<Self, Vec<GraphError>> {
        let mut errors = Vec::new();

        let mut names: Vec<String> = vertices.iter().map(|(v, _)| v.clone()).collect();
        names.sort();
        names.dedup();
        let index: BTreeMap<&str, u32> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i as u32))
            .collect();

        let mut star = vec![u32::MAX; names.len()];
        for (v, s) in vertices {
            match (index.get(v.as_str()), index.get(s.as_str())) {
                (Some(&vi), Some(&si)) => star[vi as usize] = si,
                (_, None) => errors.push(GraphError::UnknownVertex(s.clone())),
                (None, _) => errors.push(GraphError::UnknownVertex(v.clone())),
            }
        }
        for (i, &s) in star.iter().enumerate() {
            if s == u32::MAX {
                errors.push(GraphError::MissingStar(names[i].clone()));
            }
        }
        if !errors.is_empty() {
            return Err(errors);
        }
        for (i, &s) in star.iter().enumerate() {
            let ss = star[s as usize] as usize;
            if ss != i {
                errors.push(GraphError::NotInvolution(
                    names[i].clone(),
                    names[ss].clone(),
                ));
            }
        }

        let mut edge_list: Vec<(u32, u32)> = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            match (index.get(a.as_str()), index.get(b.as_str())) {
                (Some(&ai), Some(&bi)) => edge_list.push((ai, bi)),
                (None, _) => errors.push(GraphError::UnknownVertex(a.clone())),
                (_, None) => errors.push(GraphError::UnknownVertex(b.clone())),
            }
        }
        edge_list.sort();
        for w in edge_list.windows(2) {
            if w[0] == w[1] {
                errors.push(GraphError::DuplicateEdge(
                    names[w[0].0 as usize].clone(),
                    names[w[0].1 as usize].clone(),
                ));
            }
        }
        edge_list.dedup();

        // Mirror-edge condition: (i,j) in E iff (j*,i*) in E.
        let edge_set: BTreeSet<(u32, u32)> = edge_list.iter().copied().collect();
        for &(i, j) in &edge_list {
            let m = (star[j as usize], star[i as usize]);
            if !edge_set.contains(&m) {
                errors.push(GraphError::MissingMirrorEdge(
                    names[i as usize].clone(),
                    names[j as usize].clone(),
                    names[m.0 as usize].clone(),
                    names[m.1 as usize].clone(),
                ));
            }
        }
        if !errors.is_empty() {
            return Err(errors);
        }

        let n = names.len();
        let mut out_edges = vec![Vec::new(); n];
        let mut in_edges = vec![Vec::new(); n];
        for (e, &(i, j)) in edge_list.iter().enumerate() {
            out_edges[i as usize].push(e as u32);
            in_edges[j as usize].push(e as u32);
        }

        // Weak connectivity: from every i there is a path to j or to j*.
        for i in 0..n {
            let mut seen = vec![false; n];
            let mut stack = vec![i];
            seen[i] = true;
            while let Some(v) = stack.pop() {
                for &e in &out_edges[v] {
                    let w = edge_list[e as usize].1 as usize;
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            for j in 0..n {
                if !seen[j] && !seen[star[j] as usize] {
                    errors.push(GraphError::NotConnected(
                        names[i].clone(),
                        names[j].clone(),
                        names[star[j] as usize].clone(),
                    ));
                }
            }
        }
        if !errors.is_empty() {
            return Err(errors);
        }

        let mut v0 = Vec::new();
        let mut v1 = Vec::new();
        let mut v1_star = Vec::new();
        for i in 0..n as u32 {
            let s = star[i as usize];
            if s == i {
                v0.push(i);
            } else if i < s {
                v1.push(i);
            } else {
                v1_star.push(i);
            }
        }

        let edge_index: BTreeMap<(u32, u32), u32> = edge_list
            .iter()
            .enumerate()
            .map(|(e, &p)| (p, e as u32))
            .collect();
        let mirror: Vec<u32> = edge_list
            .iter()
            .map(|&(i, j)| edge_index[&(star[j as usize], star[i as usize])])
            .collect();

        let mut class_of = vec![u32::MAX; edge_list.len()];
        let mut class_members = Vec::new();
        let mut class_rep = Vec::new();
        for e in 0..edge_list.len() as u32 {
            if class_of[e as usize] != u32::MAX {
                continue;
            }
            let c = class_members.len() as u32;
            let m = mirror[e as usize];
            class_of[e as usize] = c;
            class_rep.push(e);
            if m == e {
                class_members.push(vec![e]);
            } else {
                class_of[m as usize] = c;
                class_members.push(vec![e, m]);
            }
        }

        Ok(StarGraph {
            names,
            star,
            edges: edge_list,
            mirror,
            v0,
            v1,
            v1_star,
            class_of,
            class_members,
            class_rep,
            out_edges,
            in_edges,
        })
    }

    /// Collects every invariant violation of the raw data without building.
    pub fn validate(
        vertices: &[(String, String)],
        edges: &[(String, String)],
    ) -> Vec<GraphError> {
        match Self::new(vertices, edges) {
            Ok(_) => Vec::new(),
            Err(e) => e,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn class_count(&self) -> usize {
        self.class_members.len()
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.names.len() as u32).map(VertexId)
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edges.len() as u32).map(EdgeId)
    }

    pub fn class_ids(&self) -> impl Iterator<Item = ClassId> + '_ {
        (0..self.class_members.len() as u32).map(ClassId)
    }

    pub fn name(&self, v: VertexId) -> &str {
        &self.names[v.index()]
    }

    pub fn vertex(&self, name: &str) -> Option<VertexId> {
        self.names
            .binary_search_by(|n| n.as_str().cmp(name))
            .ok()
            .map(|i| VertexId(i as u32))
    }

    pub fn star(&self, v: VertexId) -> VertexId {
        VertexId(self.star[v.index()])
    }

    pub fn endpoints(&self, e: EdgeId) -> (VertexId, VertexId) {
        let (i, j) = self.edges[e.index()];
        (VertexId(i), VertexId(j))
    }

    pub fn edge(&self, tail: VertexId, head: VertexId) -> Option<EdgeId> {
        self.edges
            .binary_search(&(tail.0, head.0))
            .ok()
            .map(|i| EdgeId(i as u32))
    }

    pub fn mirror_edge(&self, e: EdgeId) -> EdgeId {
        EdgeId(self.mirror[e.index()])
    }

    pub fn class_of(&self, e: EdgeId) -> ClassId {
        ClassId(self.class_of[e.index()])
    }

    pub fn class_members(&self, c: ClassId) -> impl Iterator<Item = EdgeId> + '_ {
        self.class_members[c.index()].iter().map(|&e| EdgeId(e))
    }

    pub fn class_size(&self, c: ClassId) -> usize {
        self.class_members[c.index()].len()
    }

    /// True when the class is a single edge equal to its own mirror.
    pub fn is_self_paired(&self, c: ClassId) -> bool {
        self.class_members[c.index()].len() == 1
    }

    /// Lexicographically smallest member of the class.
    pub fn representative(&self, c: ClassId) -> EdgeId {
        EdgeId(self.class_rep[c.index()])
    }

    pub fn is_loop(&self, e: EdgeId) -> bool {
        let (i, j) = self.edges[e.index()];
        i == j
    }

    pub fn has_loops(&self) -> bool {
        self.edge_ids().any(|e| self.is_loop(e))
    }

    pub fn out_edges(&self, v: VertexId) -> impl Iterator<Item = EdgeId> + '_ {
        self.out_edges[v.index()].iter().map(|&e| EdgeId(e))
    }

    pub fn in_edges(&self, v: VertexId) -> impl Iterator<Item = EdgeId> + '_ {
        self.in_edges[v.index()].iter().map(|&e| EdgeId(e))
    }

    pub fn out_degree(&self, v: VertexId) -> usize {
        self.out_edges[v.index()].len()
    }

    pub fn v0(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.v0.iter().map(|&v| VertexId(v))
    }

    pub fn v1(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.v1.iter().map(|&v| VertexId(v))
    }

    pub fn v1_star(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.v1_star.iter().map(|&v| VertexId(v))
    }

    pub fn v0_len(&self) -> usize {
        self.v0.len()
    }

    pub fn v1_len(&self) -> usize {
        self.v1.len()
    }

    pub fn is_fixed(&self, v: VertexId) -> bool {
        self.star[v.index()] == v.0
    }

    /// Named vertex/edge data, sorted, suitable for serialization.
    pub fn to_named(&self) -> (Vec<(String, String)>, Vec<(String, String)>) {
        let vs = self
            .names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), self.names[self.star[i] as usize].clone()))
            .collect();
        let es = self
            .edges
            .iter()
            .map(|&(i, j)| (self.names[i as usize].clone(), self.names[j as usize].clone()))
            .collect();
        (vs, es)
    }
}

impl fmt::Display for StarGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "StarGraph(|V|={}, |E|={}, |E~|={}, |V0|={}, |V1|={})",
            self.vertex_count(),
            self.edge_count(),
            self.class_count(),
            self.v0.len(),
            self.v1.len()
        )
    }
}

/// A real (or rational) vector indexed by the directed edges of a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeVec<T> {
    pub values: Vec<T>,
}

impl<T: Clone> EdgeVec<T> {
    pub fn from_fn(g: &StarGraph, f: impl FnMut(EdgeId) -> T) -> Self {
        EdgeVec {
            values: g.edge_ids().map(f).collect(),
        }
    }

    pub fn constant(g: &StarGraph, v: T) -> Self {
        EdgeVec {
            values: vec![v; g.edge_count()],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, e: EdgeId) -> &T {
        &self.values[e.index()]
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> EdgeVec<U> {
        EdgeVec {
            values: self.values.iter().map(f).collect(),
        }
    }
}

impl<T> std::ops::Index<EdgeId> for EdgeVec<T> {
    type Output = T;
    fn index(&self, e: EdgeId) -> &T {
        &self.values[e.index()]
    }
}

impl<T> std::ops::IndexMut<EdgeId> for EdgeVec<T> {
    fn index_mut(&mut self, e: EdgeId) -> &mut T {
        &mut self.values[e.index()]
    }
}

impl<T> EdgeVec<T>
where
    T: Clone + Zero + std::ops::Add<Output = T> + std::ops::Sub<Output = T> + PartialEq,
{
    /// Membership in H: x_{i,j} = x_{j*,i*} for every edge.
    pub fn in_h(&self, g: &StarGraph) -> bool {
        g.edge_ids()
            .all(|e| self.values[e.index()] == self.values[g.mirror_edge(e).index()])
    }

    /// Out-sum x_i = sum over edges leaving i.
    pub fn out_sum(&self, g: &StarGraph, i: VertexId) -> T {
        g.out_edges(i)
            .fold(T::zero(), |acc, e| acc + self.values[e.index()].clone())
    }

    /// In-sum over edges entering i.
    pub fn in_sum(&self, g: &StarGraph, i: VertexId) -> T {
        g.in_edges(i)
            .fold(T::zero(), |acc, e| acc + self.values[e.index()].clone())
    }

    /// Both-ways sum x_i^<-> = x_i^-> + x_i^<-.
    pub fn both_sum(&self, g: &StarGraph, i: VertexId) -> T {
        self.out_sum(g, i) + self.in_sum(g, i)
    }

    pub fn total(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |acc, v| acc + v.clone())
    }

    pub fn is_divergence_free(&self, g: &StarGraph) -> bool {
        divergence(g, self).iter().all(|d| *d == T::zero())
    }
}

impl<T: PartialOrd + Zero> EdgeVec<T> {
    pub fn is_positive(&self) -> bool {
        self.values.iter().all(|v| *v > T::zero())
    }
}

/// div(x)(i) = sum of x over edges leaving i minus sum over edges entering i.
pub fn divergence<T>(g: &StarGraph, x: &EdgeVec<T>) -> Vec<T>
where
    T: Clone + Zero + std::ops::Add<Output = T> + std::ops::Sub<Output = T>,
{
    g.vertex_ids()
        .map(|i| {
            let out = g
                .out_edges(i)
                .fold(T::zero(), |acc, e| acc + x.values[e.index()].clone());
            let inn = g
                .in_edges(i)
                .fold(T::zero(), |acc, e| acc + x.values[e.index()].clone());
            out - inn
        })
        .collect()
}

/// Weights with the class symmetry enforced by construction: one positive
/// rational per edge class, shared by an edge and its mirror.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightConfig {
    graph: Arc<StarGraph>,
    alpha: Vec<BigRational>,
    start: VertexId,
}

impl WeightConfig {
    pub fn new(
        graph: Arc<StarGraph>,
        alpha: Vec<BigRational>,
        start: VertexId,
    ) -> Result<Self, GraphError> {
        assert_eq!(alpha.len(), graph.class_count(), "one alpha per class");
        for (c, a) in alpha.iter().enumerate() {
            if !a.is_positive() {
                let e = graph.representative(ClassId(c as u32));
                let (i, j) = graph.endpoints(e);
                return Err(GraphError::NonPositiveWeight(format!(
                    "({},{})",
                    graph.name(i),
                    graph.name(j)
                )));
            }
        }
        Ok(WeightConfig { graph, alpha, start })
    }

    pub fn uniform(graph: Arc<StarGraph>, start: VertexId) -> Self {
        let alpha = vec![BigRational::one(); graph.class_count()];
        WeightConfig { graph, alpha, start }
    }

    pub fn graph(&self) -> &StarGraph {
        &self.graph
    }

    pub fn graph_arc(&self) -> Arc<StarGraph> {
        Arc::clone(&self.graph)
    }

    pub fn start(&self) -> VertexId {
        self.start
    }

    pub fn with_start(&self, start: VertexId) -> Self {
        WeightConfig {
            graph: Arc::clone(&self.graph),
            alpha: self.alpha.clone(),
            start,
        }
    }

    pub fn alpha_class(&self, c: ClassId) -> &BigRational {
        &self.alpha[c.index()]
    }

    pub fn alpha_classes(&self) -> &[BigRational] {
        &self.alpha
    }

    pub fn alpha_edge(&self, e: EdgeId) -> &BigRational {
        &self.alpha[self.graph.class_of(e).index()]
    }

    /// Per-edge view of alpha (each edge carries its class value).
    pub fn alpha_edge_vec(&self) -> EdgeVec<BigRational> {
        EdgeVec::from_fn(&self.graph, |e| self.alpha_edge(e).clone())
    }

    /// alpha_i = sum of alpha over edges leaving i.
    pub fn alpha_vertex(&self, i: VertexId) -> BigRational {
        self.graph
            .out_edges(i)
            .map(|e| self.alpha_edge(e))
            .fold(BigRational::zero(), |acc, a| acc + a)
    }

    pub fn set_alpha(&mut self, c: ClassId, a: BigRational) {
        assert!(a.is_positive());
        self.alpha[c.index()] = a;
    }

    /// Checks div(alpha)(i) = 1_{i = i0*} - 1_{i = i0} exactly.
    pub fn divergence_condition_holds(&self) -> bool {
        let g = &self.graph;
        let alpha = self.alpha_edge_vec();
        let div = divergence(g, &alpha);
        let i0 = self.start;
        let i0s = g.star(i0);
        g.vertex_ids().all(|i| {
            let mut expect = BigRational::zero();
            if i == i0s {
                expect += BigRational::one();
            }
            if i == i0 {
                expect -= BigRational::one();
            }
            div[i.index()] == expect
        })
    }

    pub fn require_divergence_condition(&self) -> Result<(), GraphError> {
        if self.divergence_condition_holds() {
            Ok(())
        } else {
            let g = &self.graph;
            let alpha = self.alpha_edge_vec();
            let div = divergence(g, &alpha);
            let i0 = self.start;
            let i0s = g.star(i0);
            let bad = g
                .vertex_ids()
                .find(|&i| {
                    let mut expect = BigRational::zero();
                    if i == i0s {
                        expect += BigRational::one();
                    }
                    if i == i0 {
                        expect -= BigRational::one();
                    }
                    div[i.index()] != expect
                })
                .unwrap();
            Err(GraphError::DivergenceConditionViolated(
                g.name(bad).to_string(),
            ))
        }
    }
}

fn word_reverse(w: &str) -> String {
    w.chars().rev().collect()
}

fn alphabet(s: usize) -> Vec<char> {
    assert!(s <= 36, "alphabet size capped at 36 symbols");
    "0123456789abcdefghijklmnopqrstuvwxyz"
        .chars()
        .take(s)
        .collect()
}

fn words(symbols: &[char], len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    for _ in 0..len {
        out = out
            .iter()
            .flat_map(|w| {
                symbols.iter().map(move |&c| {
                    let mut w2 = w.clone();
                    w2.push(c);
                    w2
                })
            })
            .collect();
    }
    out
}

/// De Bruijn graph on words of length `k` over an alphabet of `s` symbols,
/// with the word-reversal involution. V0 is the set of palindromes.
pub fn build_de_bruijn(s: usize, k: usize) -> Result<StarGraph, Vec<GraphError>> {
    assert!(s >= 2 && k >= 1);
    let n_edges = s.checked_pow(k as u32 + 1).unwrap_or(usize::MAX);
    if n_edges > SIZE_CAP {
        return Err(vec![GraphError::SizeLimit(n_edges, SIZE_CAP)]);
    }
    let symbols = alphabet(s);
    let vertices: Vec<(String, String)> = words(&symbols, k)
        .into_iter()
        .map(|w| {
            let r = word_reverse(&w);
            (w, r)
        })
        .collect();
    let mut edges = Vec::with_capacity(n_edges);
    for (w, _) in &vertices {
        for &c in &symbols {
            let mut h: String = w.chars().skip(1).collect();
            h.push(c);
            edges.push((w.clone(), h));
        }
    }
    StarGraph::new(&vertices, &edges)
}

/// How the two copies of an ordinary directed graph are combined into a
/// star graph representing a random walk in a random environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RwdeMode {
    /// Disjoint union of the graph and its edge-reversed starred copy.
    Doubled,
    /// Same, with the start vertex identified with its starred copy.
    Glued,
}

/// Builds the doubled or glued environment graph from an arbitrary directed
/// graph. The starred copy of vertex `v` is named `v*`.
pub fn build_rwde(
    vertices: &[String],
    edges: &[(String, String)],
    mode: RwdeMode,
    i0: &str,
) -> Result<StarGraph, Vec<GraphError>> {
    let starred = |v: &str| -> String {
        if mode == RwdeMode::Glued && v == i0 {
            v.to_string()
        } else {
            format!("{v}*")
        }
    };
    if mode == RwdeMode::Glued && !vertices.iter().any(|v| v == i0) {
        return Err(vec![GraphError::UnknownVertex(i0.to_string())]);
    }
    let mut vs = Vec::new();
    for v in vertices {
        vs.push((v.clone(), starred(v)));
        if !(mode == RwdeMode::Glued && v == i0) {
            vs.push((starred(v), v.clone()));
        }
    }
    let mut es = Vec::new();
    for (a, b) in edges {
        es.push((a.clone(), b.clone()));
        es.push((starred(b), starred(a)));
    }
    es.sort();
    es.dedup();
    StarGraph::new(&vs, &es)
}

/// Amnesia graph: histories of length 1..=k over `s` symbols, with forget
/// edges dropping the oldest symbol and append edges extending the history.
/// The involution is word reversal.
pub fn build_amnesia(s: usize, k: usize) -> Result<StarGraph, Vec<GraphError>> {
    assert!(s >= 2 && k >= 1);
    let symbols = alphabet(s);
    let mut vertices = Vec::new();
    for m in 1..=k {
        for w in words(&symbols, m) {
            let r = word_reverse(&w);
            vertices.push((w, r));
        }
    }
    let mut edges = Vec::new();
    for (w, _) in &vertices {
        let m = w.chars().count();
        if m > 1 {
            // forget the most distant symbol
            edges.push((w.clone(), w.chars().skip(1).collect()));
        }
        if m < k {
            for &c in &symbols {
                let mut h = w.clone();
                h.push(c);
                edges.push((w.clone(), h));
            }
        }
    }
    if edges.len() > SIZE_CAP {
        return Err(vec![GraphError::SizeLimit(edges.len(), SIZE_CAP)]);
    }
    StarGraph::new(&vertices, &edges)
}

/// Comparison used when matching a context against the history length in
/// [`restrict_variable_order`]. `Strict` is the literal rule (contexts of
/// length smaller than the history), `AtMost` the inclusive variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContextLengthRule {
    Strict,
    AtMost,
}

/// Prunes append edges of an amnesia graph according to a context set.
///
/// The context set must be closed: it contains the reversal of each of its
/// members, and every vertex extending a member by one symbol on the right.
/// An append edge out of history `w` is removed when some context shorter
/// than `w` (per `rule`) is a suffix of `w`.
pub fn restrict_variable_order(
    g: &StarGraph,
    contexts: &BTreeSet<String>,
    rule: ContextLengthRule,
) -> Result<StarGraph, Vec<GraphError>> {
    let mut missing = BTreeSet::new();
    for x in contexts {
        let r = word_reverse(x);
        if g.vertex(&r).is_some() && !contexts.contains(&r) {
            missing.insert(r);
        }
        for v in g.vertex_ids() {
            let name = g.name(v);
            if name.len() > x.len() && name.starts_with(x.as_str()) && !contexts.contains(name) {
                missing.insert(name.to_string());
            }
        }
    }
    if !missing.is_empty() {
        return Err(vec![GraphError::ContextNotClosed(
            missing.into_iter().collect(),
        )]);
    }

    let (vs, _) = g.to_named();
    let removed_append = |tail: &str, head: &str| -> bool {
        let is_append = head.len() == tail.len() + 1 && head.starts_with(tail);
        is_append
            && contexts.iter().any(|x| {
                let short_enough = match rule {
                    ContextLengthRule::Strict => x.len() < tail.len(),
                    ContextLengthRule::AtMost => x.len() <= tail.len(),
                };
                short_enough && tail.ends_with(x.as_str())
            })
    };
    // Drop each disallowed append edge together with its mirror (a forget
    // edge in the reversed history), keeping the edge set star-symmetric.
    let mut es: Vec<(String, String)> = g
        .edge_ids()
        .filter(|&e| {
            let (i, j) = g.endpoints(e);
            let (mi, mj) = g.endpoints(g.mirror_edge(e));
            !removed_append(g.name(i), g.name(j)) && !removed_append(g.name(mi), g.name(mj))
        })
        .map(|e| {
            let (i, j) = g.endpoints(e);
            (g.name(i).to_string(), g.name(j).to_string())
        })
        .collect();
    // Histories that can no longer be entered or left drop out of the state
    // space. Removals come in mirror pairs, so the star stays well defined.
    let mut vs = vs;
    loop {
        let dead: BTreeSet<String> = vs
            .iter()
            .filter(|(v, _)| {
                !es.iter().any(|(a, _)| a == v) || !es.iter().any(|(_, b)| b == v)
            })
            .map(|(v, _)| v.clone())
            .collect();
        if dead.is_empty() {
            break;
        }
        vs.retain(|(v, _)| !dead.contains(v));
        es.retain(|(a, b)| !dead.contains(a) && !dead.contains(b));
    }
    StarGraph::new(&vs, &es)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;
    use num::FromPrimitive;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(
            num::BigInt::from_i64(n).unwrap(),
            num::BigInt::from_i64(d).unwrap(),
        )
    }

    #[test]
    fn triangle_is_valid() {
        let g = zoo::triangle();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 6);
        assert_eq!(g.class_count(), 3);
        assert_eq!(g.v0_len(), 3);
        for c in g.class_ids() {
            assert_eq!(g.class_size(c), 2);
        }
    }

    #[test]
    fn two_cycle_swap_is_valid_with_self_paired_classes() {
        let g = zoo::two_cycle_swap();
        assert_eq!(g.class_count(), 2);
        for c in g.class_ids() {
            assert!(g.is_self_paired(c));
        }
        // (2*,1*) = (1,2): the mirror of (1,2) is itself.
        let e = g.edge(g.vertex("1").unwrap(), g.vertex("2").unwrap()).unwrap();
        assert_eq!(g.mirror_edge(e), e);
    }

    #[test]
    fn missing_mirror_is_reported() {
        let vs = vec![("1".into(), "1".into()), ("2".into(), "2".into())];
        let es = vec![("1".into(), "2".into())];
        let errs = StarGraph::validate(&vs, &es);
        assert!(matches!(errs[0], GraphError::MissingMirrorEdge(..)));
    }

    #[test]
    fn non_involution_is_reported() {
        let vs = vec![
            ("a".into(), "b".into()),
            ("b".into(), "c".into()),
            ("c".into(), "a".into()),
        ];
        let errs = StarGraph::validate(&vs, &[]);
        assert!(errs
            .iter()
            .any(|e| matches!(e, GraphError::NotInvolution(..))));
    }

    #[test]
    fn duplicate_edge_is_reported() {
        let vs = vec![("1".into(), "1".into()), ("2".into(), "2".into())];
        let es = vec![
            ("1".into(), "2".into()),
            ("1".into(), "2".into()),
            ("2".into(), "1".into()),
        ];
        let errs = StarGraph::validate(&vs, &es);
        assert!(errs
            .iter()
            .any(|e| matches!(e, GraphError::DuplicateEdge(..))));
    }

    #[test]
    fn de_bruijn_2_2() {
        let g = build_de_bruijn(2, 2).unwrap();
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.edge_count(), 8);
        let v0: Vec<_> = g.v0().map(|v| g.name(v).to_string()).collect();
        assert_eq!(v0, vec!["00", "11"]);
        // 6 classes: 4 self-paired (palindromic triples) + 2 pairs.
        assert_eq!(g.class_count(), 6);
        let self_paired = g.class_ids().filter(|&c| g.is_self_paired(c)).count();
        assert_eq!(self_paired, 4);
    }

    #[test]
    fn de_bruijn_2_1() {
        let g = build_de_bruijn(2, 1).unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edge_count(), 4);
        assert_eq!(g.v0_len(), 2); // length-1 words are palindromes
    }

    #[test]
    fn divergence_two_cycle() {
        let g = zoo::two_cycle_swap();
        let v1 = g.vertex("1").unwrap();
        let v2 = g.vertex("2").unwrap();
        let e12 = g.edge(v1, v2).unwrap();
        let mut x = EdgeVec::constant(&g, rat(0, 1));
        x[e12] = rat(1, 1);
        x[g.edge(v2, v1).unwrap()] = rat(2, 1);
        let d = divergence(&g, &x);
        assert_eq!(d[v1.index()], rat(-1, 1));
        assert_eq!(d[v2.index()], rat(1, 1));
    }

    #[test]
    fn divergence_symmetric_triangle_is_zero() {
        let g = zoo::triangle();
        let x = EdgeVec::constant(&g, rat(5, 7));
        assert!(divergence(&g, &x).iter().all(|d| d.is_zero()));
    }

    #[test]
    fn divergence_condition_two_cycle() {
        let cfg = zoo::two_cycle_config();
        assert!(cfg.divergence_condition_holds());
        // Same weights, wrong start.
        let g = cfg.graph_arc();
        let v2 = g.vertex("2").unwrap();
        let bad = cfg.with_start(v2);
        assert!(!bad.divergence_condition_holds());
    }

    #[test]
    fn divergence_condition_triangle_uniform() {
        let cfg = zoo::triangle_config();
        assert!(cfg.divergence_condition_holds());
    }

    #[test]
    fn rwde_doubled_two_cycle() {
        let g = build_rwde(
            &["a".into(), "b".into()],
            &[("a".into(), "b".into()), ("b".into(), "a".into())],
            RwdeMode::Doubled,
            "a",
        )
        .unwrap();
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.edge_count(), 4);
        assert_eq!(g.class_count(), 2);
        for c in g.class_ids() {
            assert_eq!(g.class_size(c), 2);
        }
        assert_eq!(g.v0_len(), 0);
        // Mirror of (a,b) lives in the starred copy.
        let e = g.edge(g.vertex("a").unwrap(), g.vertex("b").unwrap()).unwrap();
        let (t, h) = g.endpoints(g.mirror_edge(e));
        assert_eq!(g.name(t), "b*");
        assert_eq!(g.name(h), "a*");
    }

    #[test]
    fn rwde_doubled_rejects_weakly_connected_base() {
        // A single directed edge gives a doubled graph where b cannot reach
        // a or a*.
        let errs = build_rwde(
            &["a".into(), "b".into()],
            &[("a".into(), "b".into())],
            RwdeMode::Doubled,
            "a",
        )
        .unwrap_err();
        assert!(errs.iter().any(|e| matches!(e, GraphError::NotConnected(..))));
    }

    #[test]
    fn rwde_glued_identifies_start() {
        let g = build_rwde(
            &["a".into(), "b".into()],
            &[("a".into(), "b".into()), ("b".into(), "a".into())],
            RwdeMode::Glued,
            "a",
        )
        .unwrap();
        assert_eq!(g.vertex_count(), 3);
        let a = g.vertex("a").unwrap();
        assert!(g.is_fixed(a));
    }

    #[test]
    fn amnesia_2_2() {
        let g = build_amnesia(2, 2).unwrap();
        assert_eq!(g.vertex_count(), 6);
        assert_eq!(g.edge_count(), 8);
        // (01,1) pairs with (1,10)
        let e = g
            .edge(g.vertex("01").unwrap(), g.vertex("1").unwrap())
            .unwrap();
        let m = g.mirror_edge(e);
        let (t, h) = g.endpoints(m);
        assert_eq!(g.name(t), "1");
        assert_eq!(g.name(h), "10");
    }

    #[test]
    fn variable_order_empty_context_is_identity() {
        let g = build_amnesia(2, 2).unwrap();
        let pruned =
            restrict_variable_order(&g, &BTreeSet::new(), ContextLengthRule::Strict).unwrap();
        assert_eq!(g, pruned);
    }

    #[test]
    fn variable_order_unclosed_context_rejected() {
        let g = build_amnesia(2, 2).unwrap();
        let mut c = BTreeSet::new();
        c.insert("0".to_string());
        let err = restrict_variable_order(&g, &c, ContextLengthRule::Strict).unwrap_err();
        match &err[0] {
            GraphError::ContextNotClosed(missing) => {
                assert!(missing.contains(&"00".to_string()));
                assert!(missing.contains(&"01".to_string()));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn variable_order_prunes_append_edges() {
        let g = build_amnesia(2, 3).unwrap();
        // Closure of {"0"}: every word containing a 0 (all right extensions
        // and reversals land back in the set).
        let mut c = BTreeSet::new();
        for v in g.vertex_ids() {
            let n = g.name(v);
            if n.contains('0') {
                c.insert(n.to_string());
            }
        }
        let pruned = restrict_variable_order(&g, &c, ContextLengthRule::Strict).unwrap();
        // Append edges out of any length-2 word ending in 0 are removed.
        for w in ["00", "10"] {
            let v = pruned.vertex(w).unwrap();
            for e in pruned.out_edges(v) {
                let (_, h) = pruned.endpoints(e);
                assert!(pruned.name(h).len() <= w.len());
            }
        }
        assert!(StarGraph::validate(&pruned.to_named().0, &pruned.to_named().1).is_empty());
    }

    #[test]
    fn class_sizes_partition_edges() {
        for g in zoo::all() {
            let total: usize = g.class_ids().map(|c| g.class_size(c)).sum();
            assert_eq!(total, g.edge_count());
            for v in g.vertex_ids() {
                assert_eq!(g.star(g.star(v)), v);
            }
            for e in g.edge_ids() {
                let (i, j) = g.endpoints(e);
                let (ms, mt) = g.endpoints(g.mirror_edge(e));
                assert_eq!(ms, g.star(j));
                assert_eq!(mt, g.star(i));
            }
        }
    }
}
