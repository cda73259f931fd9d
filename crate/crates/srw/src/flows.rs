//! Linear geometry of the star-symmetric edge vectors.
//!
//! H is the space of edge vectors invariant under the edge mirror map,
//! identified with R^{E~} (one coordinate per class). L is the
//! divergence-free part of H, L0 additionally has zero total sum, and L1 is
//! the positive affine slice of total sum one. This module builds tree-type
//! bases of L, coordinate charts on L1, the bilinear form Q, the generator
//! of the jump process with rates Y, the Q-orthogonal decomposition, and the
//! spanning-arborescence determinant.

use std::sync::Arc;

use nalgebra::DMatrix;
use num::{BigRational, FromPrimitive, One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::ratlin::RatMatrix;
use crate::star_graph::{divergence, ClassId, EdgeId, EdgeVec, StarGraph, VertexId};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum FlowError {
    #[error("quotient graph is disconnected; no tree basis exists")]
    NoBasis,
    #[error("the given class set is not a basis")]
    NotABasis,
    #[error("Gram matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("right-hand side does not sum to zero")]
    NotSolvable,
    #[error("generator is reducible; system is singular")]
    Reducible,
    #[error("graph has {0} vertices, enumeration capped at {1}")]
    SizeLimit(usize, usize),
    #[error("matrix is singular")]
    Singular,
    #[error("point leaves the positive domain")]
    OutOfDomain,
    #[error("anchor is not strictly positive (graph has transient states)")]
    NoAnchor,
}

/// The graph with all fixed vertices collapsed to a single point delta.
#[derive(Debug, Clone)]
pub struct QuotientGraph {
    /// Quotient node names; "delta" is last when present.
    pub node_names: Vec<String>,
    /// Map from original vertex index to quotient node index.
    pub node_of: Vec<usize>,
    /// One quotient edge per original edge: (tail node, head node, original).
    pub edges: Vec<(usize, usize, EdgeId)>,
    pub has_delta: bool,
}

pub fn build_quotient_graph(g: &StarGraph) -> QuotientGraph {
    let has_delta = g.v0_len() > 0;
    let mut node_names = Vec::new();
    let mut node_of = vec![usize::MAX; g.vertex_count()];
    for v in g.vertex_ids() {
        if !g.is_fixed(v) {
            node_of[v.index()] = node_names.len();
            node_names.push(g.name(v).to_string());
        }
    }
    if has_delta {
        let delta = node_names.len();
        node_names.push("delta".to_string());
        for v in g.vertex_ids() {
            if g.is_fixed(v) {
                node_of[v.index()] = delta;
            }
        }
    }
    let edges = g
        .edge_ids()
        .map(|e| {
            let (i, j) = g.endpoints(e);
            (node_of[i.index()], node_of[j.index()], e)
        })
        .collect();
    QuotientGraph {
        node_names,
        node_of,
        edges,
        has_delta,
    }
}

/// Constraint matrix whose kernel is L in class coordinates: one divergence
/// row per vertex, applied to the symmetric edge vector with value t_c on
/// every member of class c.
fn l_constraints(g: &StarGraph) -> RatMatrix {
    RatMatrix::from_fn(g.vertex_count(), g.class_count(), |vi, ci| {
        let v = VertexId(vi as u32);
        let mut coeff = 0i64;
        for e in g.class_members(ClassId(ci as u32)) {
            let (t, h) = g.endpoints(e);
            if t == v {
                coeff += 1;
            }
            if h == v {
                coeff -= 1;
            }
        }
        BigRational::from_i64(coeff).unwrap()
    })
}

/// Row expressing the total edge sum in class coordinates (class size counts
/// both members).
fn sum_row(g: &StarGraph) -> Vec<BigRational> {
    g.class_ids()
        .map(|c| BigRational::from_usize(g.class_size(c)).unwrap())
        .collect()
}

/// Kernel basis of L in class coordinates, shape (|E~|, dim L).
pub fn l_kernel(g: &StarGraph) -> RatMatrix {
    l_constraints(g).kernel_basis()
}

/// Kernel basis of L0 in class coordinates, shape (|E~|, dim L0).
pub fn l0_kernel(g: &StarGraph) -> RatMatrix {
    let div = l_constraints(g);
    let mut m = RatMatrix::zeros(div.rows + 1, div.cols);
    for r in 0..div.rows {
        for c in 0..div.cols {
            m[(r, c)] = div[(r, c)].clone();
        }
    }
    for (c, v) in sum_row(g).into_iter().enumerate() {
        m[(div.rows, c)] = v;
    }
    m.kernel_basis()
}

/// dim L1 = dim L0 = |E~| - |V1| - 1 on connected star graphs.
pub fn l1_dimension(g: &StarGraph) -> usize {
    l0_kernel(g).cols
}

/// A basis of L whose complement member edges form a spanning tree of the
/// quotient graph.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeBasis {
    /// Classes in the basis, sorted.
    pub classes: Vec<ClassId>,
    /// Classes outside the basis; their member edges are the tree.
    pub complement: Vec<ClassId>,
}

/// Checks that the member edges of `complement` classes form a spanning tree
/// of the quotient graph (viewed as undirected edges).
fn complement_is_spanning_tree(g: &StarGraph, complement: &[ClassId]) -> bool {
    let q = build_quotient_graph(g);
    let n = q.node_names.len();
    let mut edges = Vec::new();
    for &c in complement {
        for e in g.class_members(c) {
            let (i, j) = g.endpoints(e);
            edges.push((q.node_of[i.index()], q.node_of[j.index()]));
        }
    }
    if edges.len() != n.saturating_sub(1) {
        return false;
    }
    // Union-find: acyclic and connected.
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (a, b) in edges {
        let ra = find(&mut parent, a);
        let rb = find(&mut parent, b);
        if ra == rb {
            return false;
        }
        parent[ra] = rb;
    }
    let root = find(&mut parent, 0);
    (0..n).all(|x| find(&mut parent, x) == root)
}

/// Exact-rank check: the coordinate functionals of `classes` restricted to L
/// have full rank dim L.
pub fn basis_has_full_rank(g: &StarGraph, classes: &[ClassId]) -> bool {
    let k = l_kernel(g);
    if classes.len() != k.cols {
        return false;
    }
    let rows: Vec<usize> = classes.iter().map(|c| c.index()).collect();
    k.select_rows(&rows).rank() == k.cols
}

/// True iff `classes` is a tree-type basis of L: the complement member edges
/// form a spanning tree of the quotient. Tree-type always implies that the
/// coordinate functionals have full rank on L (the converse can fail on
/// graphs with loops).
pub fn is_tree_basis(g: &StarGraph, classes: &[ClassId]) -> bool {
    let set: Vec<ClassId> = classes.to_vec();
    let complement: Vec<ClassId> = g.class_ids().filter(|c| !set.contains(c)).collect();
    let tree = complement_is_spanning_tree(g, &complement);
    if tree {
        debug_assert!(
            basis_has_full_rank(g, classes),
            "spanning-tree complement without full coordinate rank"
        );
    }
    tree
}

/// Lexicographically smallest tree-type basis of L: classes are assigned to
/// the basis in increasing order whenever the remaining classes can still
/// complete a spanning tree of the quotient. Classes enter the tree as a
/// whole (both member edges, or one for a self-paired class).
pub fn find_tree_basis(g: &StarGraph) -> Result<TreeBasis, FlowError> {
    let q = build_quotient_graph(g);
    let n = q.node_names.len();
    let class_edges: Vec<Vec<(usize, usize)>> = g
        .class_ids()
        .map(|c| {
            g.class_members(c)
                .map(|e| {
                    let (i, j) = g.endpoints(e);
                    (q.node_of[i.index()], q.node_of[j.index()])
                })
                .collect()
        })
        .collect();

    // Union-find forests are passed by value so backtracking is a no-op.
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    fn add_class(mut parent: Vec<usize>, edges: &[(usize, usize)]) -> Option<Vec<usize>> {
        for &(a, b) in edges {
            let ra = find(&mut parent, a);
            let rb = find(&mut parent, b);
            if ra == rb {
                return None;
            }
            parent[ra] = rb;
        }
        Some(parent)
    }
    fn components(parent: &mut Vec<usize>) -> usize {
        let n = parent.len();
        (0..n).filter(|&x| find(parent, x) == x).count()
    }
    // Depth-first search over class assignments; prefers basis membership
    // for small indices so the first complete solution is lex-smallest.
    fn search(
        class_edges: &[Vec<(usize, usize)>],
        next: usize,
        parent: Vec<usize>,
        tree: &mut Vec<usize>,
    ) -> Option<Vec<usize>> {
        let mut probe = parent.clone();
        // Prune: the undecided classes must be able to connect the rest.
        for edges in &class_edges[next..] {
            for &(a, b) in edges {
                let ra = find(&mut probe, a);
                let rb = find(&mut probe, b);
                if ra != rb {
                    probe[ra] = rb;
                }
            }
        }
        if components(&mut probe) > 1 {
            return None;
        }
        if next == class_edges.len() {
            let mut p = parent;
            return (components(&mut p) == 1).then_some(p);
        }
        // Branch 1: class goes to the basis.
        if let Some(p) = search(class_edges, next + 1, parent.clone(), tree) {
            return Some(p);
        }
        // Branch 2: class goes to the tree.
        if let Some(p) = add_class(parent, &class_edges[next]) {
            tree.push(next);
            if let Some(p) = search(class_edges, next + 1, p, tree) {
                return Some(p);
            }
            tree.pop();
        }
        None
    }

    let mut tree_classes = Vec::new();
    let parent: Vec<usize> = (0..n).collect();
    search(&class_edges, 0, parent, &mut tree_classes).ok_or(FlowError::NoBasis)?;
    let complement: Vec<ClassId> = tree_classes.iter().map(|&c| ClassId(c as u32)).collect();
    let classes: Vec<ClassId> = g
        .class_ids()
        .filter(|c| !complement.contains(c))
        .collect();
    debug_assert!(complement_is_spanning_tree(g, &complement));
    Ok(TreeBasis { classes, complement })
}

/// Enumerates every tree-type basis of L (for small graphs).
pub fn enumerate_tree_bases(g: &StarGraph) -> Vec<TreeBasis> {
    let dim = l_kernel(g).cols;
    let classes: Vec<ClassId> = g.class_ids().collect();
    let mut out = Vec::new();
    let mut stack: Vec<(Vec<ClassId>, usize)> = vec![(Vec::new(), 0)];
    while let Some((prefix, next)) = stack.pop() {
        if prefix.len() == dim {
            if is_tree_basis(g, &prefix) {
                let complement = g
                    .class_ids()
                    .filter(|c| !prefix.contains(c))
                    .collect();
                out.push(TreeBasis {
                    classes: prefix,
                    complement,
                });
            }
            continue;
        }
        for i in next..classes.len() {
            let mut p = prefix.clone();
            p.push(classes[i]);
            stack.push((p, i + 1));
        }
    }
    out
}

/// Exact Jacobian determinant of the change of coordinates between two
/// class-coordinate bases, either both of L (tree bases, where the result
/// is always +-1) or both of L0 (tree bases minus one class; +-1 when the
/// dropped classes carry the same edge-sum coefficient, see
/// [`reduction_coefficients`]).
pub fn basis_change_determinant(
    g: &StarGraph,
    b1: &[ClassId],
    b2: &[ClassId],
) -> Result<BigRational, FlowError> {
    if b1.len() != b2.len() {
        return Err(FlowError::NotABasis);
    }
    let kl = l_kernel(g);
    let k0 = l0_kernel(g);
    let k = if b1.len() == kl.cols {
        kl
    } else if b1.len() == k0.cols {
        k0
    } else {
        return Err(FlowError::NotABasis);
    };
    let m1 = k.select_rows(&b1.iter().map(|c| c.index()).collect::<Vec<_>>());
    let m2 = k.select_rows(&b2.iter().map(|c| c.index()).collect::<Vec<_>>());
    let d1 = m1.determinant();
    let d2 = m2.determinant();
    if d1.is_zero() || d2.is_zero() {
        return Err(FlowError::NotABasis);
    }
    Ok(d2 / d1)
}

/// Coefficients kappa_e of the unique (up to scale) linear relation
/// sum_{e in B} kappa_e y_e = 0 that the basis coordinates satisfy on L0.
/// kappa_e equals the total edge sum of the dual vector of e in B, so the
/// Lebesgue measures pulled back from B minus {a} and B minus {b} differ by
/// |kappa_a / kappa_b|. The vector is normalized so its first nonzero entry
/// is positive with denominator 1 cleared.
pub fn reduction_coefficients(g: &StarGraph, basis: &TreeBasis) -> Vec<BigRational> {
    let k = l_kernel(g);
    let rows: Vec<usize> = basis.classes.iter().map(|c| c.index()).collect();
    let m = k.select_rows(&rows);
    // Dual vectors: columns of K * M^{-1}; kappa_e = sum-row . dual_e.
    let s = sum_row(g);
    basis
        .classes
        .iter()
        .enumerate()
        .map(|(a, _)| {
            let mut e_a = vec![BigRational::zero(); m.rows];
            e_a[a] = BigRational::one();
            // Solve M^T w = e_a is not what we need; we need u with M u = e_a,
            // dual vector xi = K u, kappa = <s, xi>.
            let u = m.solve(&e_a).expect("tree basis rows are invertible");
            let mut kappa = BigRational::zero();
            for ci in 0..g.class_count() {
                let mut xi = BigRational::zero();
                for (kk, uk) in u.iter().enumerate() {
                    xi += &k[(ci, kk)] * uk;
                }
                kappa += &s[ci] * xi;
            }
            kappa
        })
        .collect()
}

/// The measure-canonical reduction of a tree basis to a basis of L0: drop
/// the class with the smallest |kappa| (largest class id breaking ties), so
/// reductions of different tree bases induce the same reference measure
/// whenever possible.
pub fn canonical_l0_basis(g: &StarGraph, basis: &TreeBasis) -> (Vec<ClassId>, ClassId) {
    let kappa = reduction_coefficients(g, basis);
    // A class with kappa = 0 cannot be dropped: the remaining coordinates
    // would stay linearly dependent on L0.
    let mut best = usize::MAX;
    for a in 0..basis.classes.len() {
        if kappa[a].is_zero() {
            continue;
        }
        if best == usize::MAX {
            best = a;
            continue;
        }
        let ka = kappa[a].abs();
        let kb = kappa[best].abs();
        if ka < kb || (ka == kb && basis.classes[a] > basis.classes[best]) {
            best = a;
        }
    }
    assert!(best != usize::MAX, "tree basis has no valid reduction");
    let dropped = basis.classes[best];
    let reduced = basis
        .classes
        .iter()
        .copied()
        .filter(|&c| c != dropped)
        .collect();
    (reduced, dropped)
}

/// Strictly positive rational point of L1: the stationary edge flow of the
/// uniform out-neighbor chain, star-symmetrized and normalized. On reducible
/// graphs the closed communicating classes are weighted equally.
pub fn anchor_point(g: &StarGraph) -> Result<Vec<BigRational>, FlowError> {
    let n = g.vertex_count();
    // Strongly connected components (Kosaraju).
    let order = {
        let mut visited = vec![false; n];
        let mut order = Vec::with_capacity(n);
        for s in 0..n {
            if visited[s] {
                continue;
            }
            // Iterative DFS with an explicit post-order.
            let mut stack = vec![(s, false)];
            while let Some((v, processed)) = stack.pop() {
                if processed {
                    order.push(v);
                    continue;
                }
                if visited[v] {
                    continue;
                }
                visited[v] = true;
                stack.push((v, true));
                for e in g.out_edges(VertexId(v as u32)) {
                    let w = g.endpoints(e).1.index();
                    if !visited[w] {
                        stack.push((w, false));
                    }
                }
            }
        }
        order
    };
    let mut comp = vec![usize::MAX; n];
    let mut n_comp = 0;
    for &s in order.iter().rev() {
        if comp[s] != usize::MAX {
            continue;
        }
        let mut stack = vec![s];
        comp[s] = n_comp;
        while let Some(v) = stack.pop() {
            for e in g.in_edges(VertexId(v as u32)) {
                let w = g.endpoints(e).0.index();
                if comp[w] == usize::MAX {
                    comp[w] = n_comp;
                    stack.push(w);
                }
            }
        }
        n_comp += 1;
    }
    // Closed components: no edge leaves them.
    let mut closed = vec![true; n_comp];
    for e in g.edge_ids() {
        let (i, j) = g.endpoints(e);
        if comp[i.index()] != comp[j.index()] {
            closed[comp[i.index()]] = false;
        }
    }
    let n_closed = closed.iter().filter(|&&c| c).count();
    if n_closed == 0 {
        return Err(FlowError::NoAnchor);
    }

    let mut pi = vec![BigRational::zero(); n];
    for cidx in 0..n_comp {
        if !closed[cidx] {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|&v| comp[v] == cidx).collect();
        let m = members.len();
        // Stationary distribution of the uniform out-neighbor chain on this
        // closed component: replace the last balance equation with sum = 1.
        let mut sys = RatMatrix::zeros(m, m);
        let mut rhs = vec![BigRational::zero(); m];
        for (row, &i) in members.iter().enumerate() {
            if row == m - 1 {
                for col in 0..m {
                    sys[(row, col)] = BigRational::one();
                }
                rhs[row] = BigRational::one();
                continue;
            }
            // sum_j pi_j P_{ji} - pi_i = 0
            sys[(row, members.iter().position(|&x| x == i).unwrap())] -= BigRational::one();
            for e in g.in_edges(VertexId(i as u32)) {
                let j = g.endpoints(e).0.index();
                if comp[j] != cidx {
                    continue;
                }
                let col = members.iter().position(|&x| x == j).unwrap();
                sys[(row, col)] +=
                    BigRational::new(1.into(), (g.out_degree(VertexId(j as u32)) as i64).into());
            }
        }
        let sol = sys.solve(&rhs).ok_or(FlowError::Reducible)?;
        let weight = BigRational::new(1.into(), (n_closed as i64).into());
        for (row, &i) in members.iter().enumerate() {
            pi[i] = &sol[row] * &weight;
        }
    }

    // Edge flow, star-symmetrized per class, normalized over E.
    let flow = |e: EdgeId| -> BigRational {
        let (i, _) = g.endpoints(e);
        &pi[i.index()] / BigRational::from_usize(g.out_degree(i)).unwrap()
    };
    let mut per_class = vec![BigRational::zero(); g.class_count()];
    for c in g.class_ids() {
        let members: Vec<EdgeId> = g.class_members(c).collect();
        let sum: BigRational = members.iter().map(|&e| flow(e)).sum();
        per_class[c.index()] = sum / BigRational::from_usize(members.len()).unwrap();
    }
    let total: BigRational = g
        .class_ids()
        .map(|c| {
            &per_class[c.index()] * BigRational::from_usize(g.class_size(c)).unwrap()
        })
        .sum();
    if total.is_zero() {
        return Err(FlowError::NoAnchor);
    }
    for v in per_class.iter_mut() {
        *v /= &total;
    }
    if per_class.iter().any(|v| !v.is_positive()) {
        return Err(FlowError::NoAnchor);
    }
    Ok(per_class)
}

/// Affine chart on L1: coordinates are the class values along a tree basis
/// minus one designated class, offset by a positive anchor point.
#[derive(Debug, Clone)]
pub struct FlowChart {
    graph: Arc<StarGraph>,
    pub basis: TreeBasis,
    /// The designated class removed from the basis.
    pub dropped: ClassId,
    /// Chart coordinate classes, sorted.
    pub coords: Vec<ClassId>,
    /// Anchor per class, strictly positive, in L1.
    pub anchor: Vec<BigRational>,
    /// Dual directions: column a is the L0 vector with class coordinates
    /// delta_ab along `coords`. Shape (|E~|, d).
    pub dual: RatMatrix,
    anchor_f64: Vec<f64>,
    dual_f64: Vec<Vec<f64>>,
}

impl FlowChart {
    /// Builds the canonical chart: lexicographically smallest tree basis,
    /// reduced by the measure-canonical dropped class.
    pub fn build(graph: Arc<StarGraph>) -> Result<Self, FlowError> {
        let basis = find_tree_basis(&graph)?;
        if basis.classes.is_empty() {
            return Err(FlowError::NoBasis);
        }
        let (_, dropped) = canonical_l0_basis(&graph, &basis);
        Self::build_with(graph, basis, dropped)
    }

    pub fn build_with(
        graph: Arc<StarGraph>,
        basis: TreeBasis,
        dropped: ClassId,
    ) -> Result<Self, FlowError> {
        if !basis.classes.contains(&dropped) {
            return Err(FlowError::NotABasis);
        }
        let coords: Vec<ClassId> = basis
            .classes
            .iter()
            .copied()
            .filter(|&c| c != dropped)
            .collect();
        let k0 = l0_kernel(&graph);
        let d = k0.cols;
        if coords.len() != d {
            return Err(FlowError::NotABasis);
        }
        let anchor = anchor_point(&graph)?;
        // Dual directions: solve M u_a = e_a with M the coordinate rows of
        // the kernel basis, then map back through the kernel.
        let rows: Vec<usize> = coords.iter().map(|c| c.index()).collect();
        let m = k0.select_rows(&rows);
        let mut dual = RatMatrix::zeros(graph.class_count(), d);
        for a in 0..d {
            let mut e_a = vec![BigRational::zero(); d];
            e_a[a] = BigRational::one();
            let u = m.solve(&e_a).ok_or(FlowError::NotABasis)?;
            for ci in 0..graph.class_count() {
                let mut acc = BigRational::zero();
                for (kk, uk) in u.iter().enumerate() {
                    acc += &k0[(ci, kk)] * uk;
                }
                dual[(ci, a)] = acc;
            }
        }
        let anchor_f64: Vec<f64> = anchor.iter().map(|v| v.to_f64().unwrap()).collect();
        let dual_f64: Vec<Vec<f64>> = (0..graph.class_count())
            .map(|ci| (0..d).map(|a| dual[(ci, a)].to_f64().unwrap()).collect())
            .collect();
        Ok(FlowChart {
            graph,
            basis,
            dropped,
            coords,
            anchor,
            dual,
            anchor_f64,
            dual_f64,
        })
    }

    pub fn graph(&self) -> &StarGraph {
        &self.graph
    }

    pub fn dimension(&self) -> usize {
        self.coords.len()
    }

    /// Class values of the point with the given chart coordinates.
    pub fn point_classes_f64(&self, coords: &[f64]) -> Vec<f64> {
        assert_eq!(coords.len(), self.dimension());
        (0..self.graph.class_count())
            .map(|ci| {
                self.anchor_f64[ci]
                    + self.dual_f64[ci]
                        .iter()
                        .zip(coords)
                        .map(|(d, c)| d * c)
                        .sum::<f64>()
            })
            .collect()
    }

    /// Maps chart coordinates to the edge vector in L1; errors when the
    /// point leaves the positive cone.
    pub fn to_l1(&self, coords: &[f64]) -> Result<EdgeVec<f64>, FlowError> {
        let classes = self.point_classes_f64(coords);
        if classes.iter().any(|&v| v <= 0.0) {
            return Err(FlowError::OutOfDomain);
        }
        Ok(self.expand_classes(&classes))
    }

    /// Per-edge expansion of class values.
    pub fn expand_classes(&self, classes: &[f64]) -> EdgeVec<f64> {
        EdgeVec::from_fn(&self.graph, |e| classes[self.graph.class_of(e).index()])
    }

    /// Chart coordinates of a point of L1 given per-edge values.
    pub fn coords_of(&self, y: &EdgeVec<f64>) -> Vec<f64> {
        self.coords
            .iter()
            .map(|&c| {
                let rep = self.graph.representative(c);
                y[rep] - self.anchor_f64[c.index()]
            })
            .collect()
    }

    /// Exact-rational variant of [`Self::to_l1`]; does not check positivity.
    pub fn to_l1_rational(&self, coords: &[BigRational]) -> EdgeVec<BigRational> {
        assert_eq!(coords.len(), self.dimension());
        let classes: Vec<BigRational> = (0..self.graph.class_count())
            .map(|ci| {
                let mut acc = self.anchor[ci].clone();
                for (a, c) in coords.iter().enumerate() {
                    acc += &self.dual[(ci, a)] * c;
                }
                acc
            })
            .collect();
        EdgeVec::from_fn(&self.graph, |e| {
            classes[self.graph.class_of(e).index()].clone()
        })
    }

    /// Anchor as a per-edge f64 vector.
    pub fn anchor_edges(&self) -> EdgeVec<f64> {
        self.expand_classes(&self.anchor_f64)
    }

    /// Linear inequality constraints `lhs . c > -anchor` defining the
    /// positive domain in chart coordinates, one row per class:
    /// anchor_ci + sum_a dual[ci][a] c_a > 0.
    pub fn domain_constraints(&self) -> Vec<(Vec<f64>, f64)> {
        (0..self.graph.class_count())
            .map(|ci| (self.dual_f64[ci].clone(), self.anchor_f64[ci]))
            .collect()
    }
}

/// Operator B of the bilinear form: (Bx)_i = (x_i + x_{i*})/2 with x_i the
/// out-sum at i.
pub fn b_operator(g: &StarGraph, x: &EdgeVec<f64>) -> Vec<f64> {
    let out: Vec<f64> = g.vertex_ids().map(|i| x.out_sum(g, i)).collect();
    g.vertex_ids()
        .map(|i| 0.5 * (out[i.index()] + out[g.star(i).index()]))
        .collect()
}

/// Q_w(x, x') = sum_E x x'/w - sum_V (Bx)(Bx')/w_i + (sum_E x)(sum_E x').
pub fn q_bilinear(g: &StarGraph, w: &EdgeVec<f64>, x: &EdgeVec<f64>, x2: &EdgeVec<f64>) -> f64 {
    let term1: f64 = g
        .edge_ids()
        .map(|e| x[e] * x2[e] / w[e])
        .sum();
    let bx = b_operator(g, x);
    let bx2 = b_operator(g, x2);
    let term2: f64 = g
        .vertex_ids()
        .map(|i| {
            let wi: f64 = w.out_sum(g, i);
            bx[i.index()] * bx2[i.index()] / wi
        })
        .sum();
    let s1: f64 = x.values.iter().sum();
    let s2: f64 = x2.values.iter().sum();
    term1 - term2 + s1 * s2
}

/// Gram matrix of Q_w in the chart directions; verified positive definite.
pub fn q_gram(g: &StarGraph, w: &EdgeVec<f64>, chart: &FlowChart) -> Result<DMatrix<f64>, FlowError> {
    let d = chart.dimension();
    let dirs: Vec<EdgeVec<f64>> = (0..d)
        .map(|a| {
            let classes: Vec<f64> = (0..g.class_count())
                .map(|ci| chart.dual[(ci, a)].to_f64().unwrap())
                .collect();
            chart.expand_classes(&classes)
        })
        .collect();
    let mut a = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let v = q_bilinear(g, w, &dirs[i], &dirs[j]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    if d > 0 && a.clone().cholesky().is_none() {
        return Err(FlowError::NotPositiveDefinite);
    }
    Ok(a)
}

/// Solves (G^Y v)_i = sum_j Y_{ij}(v_j - v_i) = h_i with the gauge
/// sum_i v_i = 0. Requires sum_i h_i = 0.
pub fn generator_solve(
    g: &StarGraph,
    y: &EdgeVec<f64>,
    h: &[f64],
) -> Result<Vec<f64>, FlowError> {
    let n = g.vertex_count();
    assert_eq!(h.len(), n);
    let scale: f64 = h.iter().map(|v| v.abs()).fold(1.0, f64::max);
    if h.iter().sum::<f64>().abs() > 1e-9 * scale {
        return Err(FlowError::NotSolvable);
    }
    // Row and column sums of G^Y vanish (div(Y) = 0), so G + 1 1^T is
    // invertible and its solution carries the zero-sum gauge.
    let mut m = DMatrix::from_element(n, n, 1.0);
    for e in g.edge_ids() {
        let (i, j) = g.endpoints(e);
        m[(i.index(), j.index())] += y[e];
        m[(i.index(), i.index())] -= y[e];
    }
    let rhs = nalgebra::DVector::from_row_slice(h);
    let lu = m.lu();
    let v = lu.solve(&rhs).ok_or(FlowError::Reducible)?;
    Ok(v.iter().copied().collect())
}

/// Applies the generator with rates y to a vertex function.
pub fn generator_apply(g: &StarGraph, y: &EdgeVec<f64>, v: &[f64]) -> Vec<f64> {
    g.vertex_ids()
        .map(|i| {
            g.out_edges(i)
                .map(|e| {
                    let (_, j) = g.endpoints(e);
                    y[e] * (v[j.index()] - v[i.index()])
                })
                .sum()
        })
        .collect()
}

/// Result of the Q-orthogonal decomposition x = lambda Y + omega + z.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub lambda: f64,
    pub omega: EdgeVec<f64>,
    pub z: EdgeVec<f64>,
    pub h: Vec<f64>,
    pub v: Vec<f64>,
}

/// Q-orthogonal decomposition of x in H against Y in L1:
/// lambda = sum_E x, h = div(x)/2, v = (G^Y)^{-1} h (zero-sum gauge),
/// omega the unique element of H with sum 0 and div(omega) = div(x) that is
/// Q-orthogonal to every divergence-free direction, z the remainder.
/// Q(omega, omega) = -2<h, v> holds for this omega.
///
/// omega is computed as a saddle-point system in class coordinates:
/// M omega = A^t mu, A omega = b, with M the class Gram matrix of Q, and
/// A the divergence rows at the V1 representatives plus the edge-sum row.
pub fn orthogonal_decompose(
    g: &StarGraph,
    y: &EdgeVec<f64>,
    x: &EdgeVec<f64>,
) -> Result<Decomposition, FlowError> {
    let lambda: f64 = x.values.iter().sum();
    let div = divergence(g, x);
    let h: Vec<f64> = div.iter().map(|d| d / 2.0).collect();
    let v = generator_solve(g, y, &h)?;

    let nc = g.class_count();
    let units: Vec<EdgeVec<f64>> = (0..nc)
        .map(|c| {
            EdgeVec::from_fn(g, |e| if g.class_of(e).index() == c { 1.0 } else { 0.0 })
        })
        .collect();
    let reps: Vec<VertexId> = g.v1().collect();
    let k = reps.len();
    // Block system [[M, -A^t], [A, 0]]: Q-gradient in the row space of the
    // constraints forces Q(omega, z) = 0 for all z in ker(A).
    let dim = nc + k + 1;
    let mut m = DMatrix::zeros(dim, dim);
    let mut rhs = nalgebra::DVector::<f64>::zeros(dim);
    for c in 0..nc {
        for c2 in c..nc {
            let q = q_bilinear(g, y, &units[c], &units[c2]);
            m[(c, c2)] = q;
            m[(c2, c)] = q;
        }
    }
    for (a, &r) in reps.iter().enumerate() {
        for c in 0..nc {
            let d = divergence(g, &units[c])[r.index()];
            m[(c, nc + a)] = -d;
            m[(nc + a, c)] = d;
        }
        rhs[nc + a] = div[r.index()];
    }
    for c in 0..nc {
        let s: f64 = units[c].values.iter().sum();
        m[(c, nc + k)] = -s;
        m[(nc + k, c)] = s;
    }
    let sol = m.lu().solve(&rhs).ok_or(FlowError::Reducible)?;
    let omega = EdgeVec::from_fn(g, |e| {
        (0..nc).map(|c| sol[c] * units[c][e]).sum::<f64>()
    });
    let z = EdgeVec::from_fn(g, |e| x[e] - lambda * y[e] - omega[e]);
    Ok(Decomposition {
        lambda,
        omega,
        z,
        h,
        v,
    })
}

/// Cap on vertex count for exhaustive arborescence enumeration.
pub const ENUMERATION_CAP: usize = 8;

/// Sum over spanning trees directed toward `root` of the product of edge
/// weights, by exhaustive enumeration.
pub fn arborescence_sum(g: &StarGraph, y: &EdgeVec<f64>, root: VertexId) -> Result<f64, FlowError> {
    let n = g.vertex_count();
    if n > ENUMERATION_CAP {
        return Err(FlowError::SizeLimit(n, ENUMERATION_CAP));
    }
    let others: Vec<VertexId> = g.vertex_ids().filter(|&v| v != root).collect();
    let mut total = 0.0;
    let mut choice: Vec<Option<EdgeId>> = vec![None; n];
    fn recurse(
        g: &StarGraph,
        y: &EdgeVec<f64>,
        root: VertexId,
        others: &[VertexId],
        level: usize,
        choice: &mut Vec<Option<EdgeId>>,
        total: &mut f64,
    ) {
        if level == others.len() {
            // Every non-root vertex must reach the root along choices.
            for &start in others {
                let mut seen = 0usize;
                let mut v = start;
                while v != root {
                    let Some(e) = choice[v.index()] else { return };
                    v = g.endpoints(e).1;
                    seen += 1;
                    if seen > others.len() {
                        return; // cycle
                    }
                }
            }
            let mut prod = 1.0;
            for &v in others {
                prod *= y[choice[v.index()].unwrap()];
            }
            *total += prod;
            return;
        }
        let v = others[level];
        for e in g.out_edges(v) {
            if g.endpoints(e).1 == v {
                continue; // loops never appear in a tree
            }
            choice[v.index()] = Some(e);
            recurse(g, y, root, others, level + 1, choice, total);
        }
        choice[v.index()] = None;
    }
    recurse(g, y, root, &others, 0, &mut choice, &mut total);
    Ok(total)
}

/// D(y) as the diagonal minor of the out-degree Laplacian
/// L = diag(y_i) - (y_{ij}) with the root row and column removed.
pub fn tree_determinant(g: &StarGraph, y: &EdgeVec<f64>, root: VertexId) -> Result<f64, FlowError> {
    let n = g.vertex_count();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for e in g.edge_ids() {
        let (i, j) = g.endpoints(e);
        l[(i.index(), i.index())] += y[e];
        l[(i.index(), j.index())] -= y[e];
    }
    let keep: Vec<usize> = (0..n).filter(|&i| i != root.index()).collect();
    let minor = DMatrix::from_fn(n - 1, n - 1, |r, c| l[(keep[r], keep[c])]);
    let det = minor.determinant();
    if !det.is_finite() {
        return Err(FlowError::Singular);
    }
    Ok(det)
}

/// Generates a random strictly positive divergence-free point of L1.
pub fn random_l1_point(
    chart: &FlowChart,
    rng: &mut impl rand::Rng,
    spread: f64,
) -> EdgeVec<f64> {
    // Rejection-sample chart coordinates around the anchor.
    loop {
        let coords: Vec<f64> = (0..chart.dimension())
            .map(|_| (rng.gen::<f64>() - 0.5) * 2.0 * spread)
            .collect();
        if let Ok(y) = chart.to_l1(&coords) {
            return y;
        }
    }
}
