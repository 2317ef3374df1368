//! Component graphs: HOC-weighted complete graphs, maximum spanning trees,
//! spectral clustering of trees, and DOT export.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CoreError, Result};
use crate::hoc::HocMatrix;
use crate::linalg::sym_eig_desc;

/// Complete graph over a subset of display axes, weighted by higher-order
/// correlations.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentGraph {
    /// Node ids (display axis numbers), in the order given at build time.
    pub nodes: Vec<usize>,
    weights: HashMap<(usize, usize), f64>,
}

impl ComponentGraph {
    /// Weight of the edge between nodes `a` and `b`.
    pub fn weight(&self, a: usize, b: usize) -> Option<f64> {
        let key = (a.min(b), a.max(b));
        self.weights.get(&key).copied()
    }

    /// Canonical edge list: `(a, b, w)` with `a < b`, ascending by `(a, b)`.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut sorted: Vec<usize> = self.nodes.clone();
        sorted.sort_unstable();
        let mut out = Vec::with_capacity(sorted.len() * (sorted.len() - 1) / 2);
        for (idx, &a) in sorted.iter().enumerate() {
            for &b in &sorted[idx + 1..] {
                out.push((a, b, self.weights[&(a, b)]));
            }
        }
        out
    }
}

/// Weighted tree edge between display axes `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeEdge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// Spanning tree over component nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanningTree {
    pub nodes: Vec<usize>,
    pub edges: Vec<TreeEdge>,
}

impl SpanningTree {
    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// Adjacency map node -> (neighbor, weight).
    pub fn adjacency(&self) -> BTreeMap<usize, Vec<(usize, f64)>> {
        let mut adj: BTreeMap<usize, Vec<(usize, f64)>> =
            self.nodes.iter().map(|&n| (n, Vec::new())).collect();
        for e in &self.edges {
            adj.get_mut(&e.a).unwrap().push((e.b, e.weight));
            adj.get_mut(&e.b).unwrap().push((e.a, e.weight));
        }
        adj
    }

    /// Edge count, connectivity, and acyclicity in one check.
    pub fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        if n == 0 {
            return Err(CoreError::InvalidParam("empty tree".into()));
        }
        if self.edges.len() != n - 1 {
            return Err(CoreError::InvalidParam(format!(
                "tree has {} edges for {n} nodes",
                self.edges.len()
            )));
        }
        let adj = self.adjacency();
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([self.nodes[0]]);
        seen.insert(self.nodes[0]);
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &adj[&u] {
                if seen.insert(v) {
                    queue.push_back(v);
                }
            }
        }
        if seen.len() != n {
            return Err(CoreError::InvalidParam("tree is not connected".into()));
        }
        Ok(())
    }
}

/// Node -> cluster assignment with contiguous ids `0..k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    pub assignment: BTreeMap<usize, usize>,
    pub k: usize,
}

impl ClusterAssignment {
    /// Members per cluster id.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (&node, &c) in &self.assignment {
            out[c].push(node);
        }
        out
    }

    /// Clusters as a label-invariant set partition.
    pub fn partition(&self) -> BTreeSet<BTreeSet<usize>> {
        self.members()
            .into_iter()
            .filter(|m| !m.is_empty())
            .map(|m| m.into_iter().collect())
            .collect()
    }
}

/// Builds the complete graph on `nodes` with weights from the HOC matrix.
pub fn build_graph(h: &HocMatrix, nodes: &[usize]) -> Result<ComponentGraph> {
    if nodes.len() < 2 {
        return Err(CoreError::InvalidParam(
            "graph needs at least 2 nodes".into(),
        ));
    }
    let d = h.dim();
    let mut seen = BTreeSet::new();
    for &node in nodes {
        if node >= d {
            return Err(CoreError::AxisOutOfRange { axis: node, d });
        }
        if !seen.insert(node) {
            return Err(CoreError::DuplicateNode(node));
        }
    }
    let mut weights = HashMap::with_capacity(nodes.len() * (nodes.len() - 1) / 2);
    let sorted: Vec<usize> = seen.into_iter().collect();
    for (idx, &a) in sorted.iter().enumerate() {
        for &b in &sorted[idx + 1..] {
            weights.insert((a, b), h.values[[a, b]]);
        }
    }
    Ok(ComponentGraph {
        nodes: nodes.to_vec(),
        weights,
    })
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

fn kruskal(g: &ComponentGraph, maximize: bool) -> Result<SpanningTree> {
    if g.nodes.is_empty() {
        return Err(CoreError::InvalidParam("graph has no nodes".into()));
    }
    let mut edges = g.edges();
    edges.sort_by(|x, y| {
        let w = if maximize {
            y.2.partial_cmp(&x.2).unwrap()
        } else {
            x.2.partial_cmp(&y.2).unwrap()
        };
        w.then((x.0, x.1).cmp(&(y.0, y.1)))
    });
    let pos: HashMap<usize, usize> = g.nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let mut uf = UnionFind::new(g.nodes.len());
    let mut picked = Vec::with_capacity(g.nodes.len().saturating_sub(1));
    for (a, b, w) in edges {
        if uf.union(pos[&a], pos[&b]) {
            picked.push(TreeEdge { a, b, weight: w });
            if picked.len() + 1 == g.nodes.len() {
                break;
            }
        }
    }
    let tree = SpanningTree {
        nodes: g.nodes.clone(),
        edges: picked,
    };
    tree.validate()?;
    Ok(tree)
}

/// Kruskal over edges sorted by descending weight; ties break by ascending
/// `(a, b)`. The total weight is maximal among spanning trees.
pub fn maximum_spanning_tree(g: &ComponentGraph) -> Result<SpanningTree> {
    kruskal(g, true)
}

/// Minimum spanning tree under the same tie-breaking. For strictly positive
/// weights, the minimum tree over reciprocal weights selects exactly the
/// maximum tree's edge set.
pub fn minimum_spanning_tree(g: &ComponentGraph) -> Result<SpanningTree> {
    kruskal(g, false)
}

/// Spectral clustering of a spanning tree into `k` parts.
///
/// Affinity is the tree-restricted weight matrix; the embedding uses the k
/// eigenvectors of the symmetric normalized Laplacian with smallest
/// eigenvalues, rows normalized, clustered by seeded k-means (10 restarts,
/// best inertia).
pub fn spectral_clustering(t: &SpanningTree, k: usize, seed: u64) -> Result<ClusterAssignment> {
    let m = t.nodes.len();
    if k < 1 {
        return Err(CoreError::InvalidParam("k must be >= 1".into()));
    }
    if k > m {
        return Err(CoreError::InvalidParam(format!(
            "k = {k} exceeds node count {m}"
        )));
    }
    let mut sorted_nodes = t.nodes.clone();
    sorted_nodes.sort_unstable();
    if k == 1 {
        return Ok(ClusterAssignment {
            assignment: sorted_nodes.into_iter().map(|n| (n, 0)).collect(),
            k: 1,
        });
    }
    if k == m {
        return Ok(ClusterAssignment {
            assignment: sorted_nodes
                .into_iter()
                .enumerate()
                .map(|(i, n)| (n, i))
                .collect(),
            k,
        });
    }
    t.validate()?;

    let pos: HashMap<usize, usize> = sorted_nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let mut affinity = Array2::<f64>::zeros((m, m));
    for e in &t.edges {
        let (i, j) = (pos[&e.a], pos[&e.b]);
        affinity[[i, j]] = e.weight;
        affinity[[j, i]] = e.weight;
    }
    let degree: Array1<f64> = affinity.rows().into_iter().map(|r| r.sum()).collect();
    for (i, &dg) in degree.iter().enumerate() {
        if dg <= 0.0 {
            return Err(CoreError::InvalidParam(format!(
                "node {} has zero degree",
                sorted_nodes[i]
            )));
        }
    }
    let mut laplacian = Array2::<f64>::zeros((m, m));
    for i in 0..m {
        for j in 0..m {
            let norm = affinity[[i, j]] / (degree[i] * degree[j]).sqrt();
            laplacian[[i, j]] = if i == j { 1.0 - norm } else { -norm };
        }
    }

    // k eigenvectors of smallest eigenvalue
    let (_, vectors) = sym_eig_desc(&laplacian);
    let mut embedding = Array2::<f64>::zeros((m, k));
    for out_col in 0..k {
        let src = m - 1 - out_col;
        embedding.column_mut(out_col).assign(&vectors.column(src));
    }
    for mut row in embedding.rows_mut() {
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-12 {
            row.mapv_inplace(|v| v / norm);
        }
    }

    let labels = kmeans(&embedding, k, seed, 10);

    // relabel by first appearance over ascending node order
    let mut relabel: BTreeMap<usize, usize> = BTreeMap::new();
    let mut assignment = BTreeMap::new();
    for (i, &node) in sorted_nodes.iter().enumerate() {
        let next = relabel.len();
        let id = *relabel.entry(labels[i]).or_insert(next);
        assignment.insert(node, id);
    }
    let k_actual = relabel.len();
    if k_actual < k {
        log::warn!("k-means produced {k_actual} non-empty clusters (asked for {k})");
    }
    Ok(ClusterAssignment {
        assignment,
        k: k_actual,
    })
}

/// Seeded k-means with k-means++ initialization and a fixed restart count;
/// returns the labeling with the best inertia.
fn kmeans(points: &Array2<f64>, k: usize, seed: u64, restarts: usize) -> Vec<usize> {
    let mut best: Option<(f64, Vec<usize>)> = None;
    for restart in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(restart as u64));
        let centroids = kmeans_pp_init(points, k, &mut rng);
        let (labels, inertia) = lloyd(points, centroids, 300);
        if best.as_ref().map(|(b, _)| inertia < *b).unwrap_or(true) {
            best = Some((inertia, labels));
        }
    }
    best.expect("restarts >= 1").1
}

fn kmeans_pp_init(points: &Array2<f64>, k: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let n = points.nrows();
    let dim = points.ncols();
    let mut centroids = Array2::zeros((k, dim));
    let first = rng.random_range(0..n);
    centroids.row_mut(0).assign(&points.row(first));
    let mut dist2 = vec![0.0f64; n];
    for c in 1..k {
        let mut total = 0.0;
        for i in 0..n {
            let mut min = f64::INFINITY;
            for prev in 0..c {
                let d = sq_dist(points, i, &centroids, prev);
                min = min.min(d);
            }
            dist2[i] = min;
            total += min;
        }
        let chosen = if total <= 0.0 {
            rng.random_range(0..n)
        } else {
            let target = rng.random_range(0.0..total);
            let mut acc = 0.0;
            let mut pick = n - 1;
            for (i, &d) in dist2.iter().enumerate() {
                acc += d;
                if acc >= target {
                    pick = i;
                    break;
                }
            }
            pick
        };
        centroids.row_mut(c).assign(&points.row(chosen));
    }
    centroids
}

fn sq_dist(points: &Array2<f64>, i: usize, centroids: &Array2<f64>, c: usize) -> f64 {
    points
        .row(i)
        .iter()
        .zip(centroids.row(c).iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

fn lloyd(points: &Array2<f64>, mut centroids: Array2<f64>, max_iter: usize) -> (Vec<usize>, f64) {
    let n = points.nrows();
    let k = centroids.nrows();
    let dim = points.ncols();
    let mut labels = vec![0usize; n];
    for _ in 0..max_iter {
        let mut changed = false;
        for i in 0..n {
            let mut best = (0usize, f64::INFINITY);
            for c in 0..k {
                let d = sq_dist(points, i, &centroids, c);
                if d < best.1 {
                    best = (c, d);
                }
            }
            if labels[i] != best.0 {
                labels[i] = best.0;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = Array2::<f64>::zeros((k, dim));
        let mut counts = vec![0usize; k];
        for i in 0..n {
            counts[labels[i]] += 1;
            let mut row = sums.row_mut(labels[i]);
            row += &points.row(i);
        }
        for c in 0..k {
            if counts[c] > 0 {
                let mut row = sums.row_mut(c);
                row.mapv_inplace(|v| v / counts[c] as f64);
                centroids.row_mut(c).assign(&row);
            }
        }
    }
    let inertia = (0..n).map(|i| sq_dist(points, i, &centroids, labels[i])).sum();
    (labels, inertia)
}

/// Induced subtree of nodes within `radius` tree hops of `root`.
pub fn subtree_extract(t: &SpanningTree, root: usize, radius: usize) -> Result<SpanningTree> {
    if !t.nodes.contains(&root) {
        return Err(CoreError::NodeNotInTree(root));
    }
    let adj = t.adjacency();
    let mut depth: BTreeMap<usize, usize> = BTreeMap::from([(root, 0)]);
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        let du = depth[&u];
        if du == radius {
            continue;
        }
        for &(v, _) in &adj[&u] {
            if let std::collections::btree_map::Entry::Vacant(e) = depth.entry(v) {
                e.insert(du + 1);
                queue.push_back(v);
            }
        }
    }
    let nodes: Vec<usize> = depth.keys().copied().collect();
    let keep: BTreeSet<usize> = nodes.iter().copied().collect();
    let edges = t
        .edges
        .iter()
        .filter(|e| keep.contains(&e.a) && keep.contains(&e.b))
        .copied()
        .collect();
    Ok(SpanningTree { nodes, edges })
}

/// Renders the tree as an undirected DOT graph.
///
/// Node labels are `"axis : top-word"`; edges fall into `buckets`
/// equal-frequency weight buckets, darker for heavier edges. `header_lines`
/// are emitted as comments.
pub fn tree_to_dot(
    t: &SpanningTree,
    labels: &BTreeMap<usize, String>,
    header_lines: &[String],
    buckets: usize,
) -> String {
    let buckets = buckets.max(1);
    let mut weights: Vec<f64> = t.edges.iter().map(|e| e.weight).collect();
    weights.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let boundary = |b: usize| -> f64 {
        // upper boundary of bucket b under equal-frequency splitting
        let idx = ((b + 1) * weights.len()) / buckets;
        weights[idx.saturating_sub(1).min(weights.len().saturating_sub(1))]
    };
    let shade = |w: f64| -> (usize, &'static str) {
        const SHADES: [&str; 5] = ["gray80", "gray60", "gray40", "gray20", "black"];
        let mut bucket = 0;
        while bucket + 1 < buckets && w > boundary(bucket) {
            bucket += 1;
        }
        let shade_idx = if buckets == 1 {
            SHADES.len() - 1
        } else {
            bucket * (SHADES.len() - 1) / (buckets - 1)
        };
        (bucket, SHADES[shade_idx])
    };

    let mut out = String::new();
    for line in header_lines {
        out.push_str("// ");
        out.push_str(line);
        out.push('\n');
    }
    if !t.edges.is_empty() {
        let bounds: Vec<String> = (0..buckets).map(|b| format!("{:.6}", boundary(b))).collect();
        out.push_str(&format!(
            "// edge color buckets: {} equal-frequency, upper bounds [{}]\n",
            buckets,
            bounds.join(", ")
        ));
    }
    out.push_str("graph component_tree {\n");
    out.push_str("  node [shape=ellipse, fontsize=10];\n");
    let mut nodes = t.nodes.clone();
    nodes.sort_unstable();
    for n in &nodes {
        let label = labels
            .get(n)
            .map(|w| format!("{n} : {w}"))
            .unwrap_or_else(|| n.to_string());
        out.push_str(&format!("  n{n} [label=\"{label}\"];\n"));
    }
    let mut edges = t.edges.clone();
    edges.sort_by(|x, y| (x.a, x.b).cmp(&(y.a, y.b)));
    for e in &edges {
        let (_, color) = shade(e.weight);
        out.push_str(&format!(
            "  n{} -- n{} [color=\"{}\", label=\"{:.3}\"];\n",
            e.a, e.b, color, e.weight
        ));
    }
    out.push_str("}\n");
    out
}
