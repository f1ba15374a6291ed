//! Local scales, the fuzzy 1-skeleton and all-pairs UMAP distances.
//!
//! Each point gets a distance-to-nearest-neighbor `rho` and a bandwidth
//! `sigma` such that its k memberships sum to `log2(k)`. Directed memberships
//! are merged with the probabilistic t-conorm and turned into edge lengths
//! `-ln(mu)`. Pairs that are not neighbors get a distance from paths in the
//! graph, either the total length (geodesic) or the largest step (minimax).

use petgraph::algo::{dijkstra, min_spanning_tree};
use petgraph::data::Element;
use petgraph::graph::{NodeIndex, UnGraph};
use petgraph::unionfind::UnionFind;
use serde::Serialize;

use crate::data::{euclidean, DataTable, DisconnectPolicy, MetricMode};
use crate::error::{Error, Result};
use crate::neighbors::NeighborLists;

/// Lower bracket of the bandwidth search.
pub const SIGMA_MIN: f64 = 1e-12;
/// Stopping tolerance on the membership sum.
pub const CALIBRATION_TOLERANCE: f64 = 1e-5;
/// Maximum number of bisection steps.
pub const CALIBRATION_ITERATIONS: usize = 64;
/// Memberships are capped at `1 - MEMBERSHIP_CLAMP` before taking the logarithm.
pub const MEMBERSHIP_CLAMP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Clamp {
    None,
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalScales {
    pub rho: Vec<f64>,
    pub sigma: Vec<f64>,
    pub clamp: Vec<Clamp>,
}

/// `sum_j exp(-max(0, d_j - rho) / sigma)` over one neighbor list.
pub fn membership_sum(distances: impl IntoIterator<Item = f64>, rho: f64, sigma: f64) -> f64 {
    distances
        .into_iter()
        .map(|d| (-(d - rho).max(0.0) / sigma).exp())
        .sum()
}

/// Upper bracket of the bandwidth search: `1e3 * (max neighbor distance + 1)`.
pub fn sigma_max(nbrs: &NeighborLists) -> f64 {
    let max_d = nbrs
        .iter()
        .flatten()
        .map(|nb| nb.distance)
        .fold(0.0, f64::max);
    1e3 * (max_d + 1.0)
}

/// Calibrates `rho` and `sigma` for every point.
///
/// The membership sum is increasing in `sigma`, so a bisection (on a log
/// scale) over `[SIGMA_MIN, sigma_max]` finds the bandwidth. Targets that are
/// already exceeded at `SIGMA_MIN` or unreachable at the upper bound clamp to
/// that bound.
pub fn compute_local_scales(nbrs: &NeighborLists) -> LocalScales {
    let target = (nbrs.k() as f64).log2();
    let hi_bound = sigma_max(nbrs);
    let n = nbrs.n_points();
    let mut scales = LocalScales {
        rho: Vec::with_capacity(n),
        sigma: Vec::with_capacity(n),
        clamp: Vec::with_capacity(n),
    };
    for list in nbrs.iter() {
        let rho = list[0].distance;
        let f = |sigma: f64| membership_sum(list.iter().map(|nb| nb.distance), rho, sigma);
        let (sigma, clamp) = if f(SIGMA_MIN) >= target {
            (SIGMA_MIN, Clamp::Min)
        } else if f(hi_bound) < target {
            (hi_bound, Clamp::Max)
        } else {
            (bisect(f, target, SIGMA_MIN, hi_bound), Clamp::None)
        };
        scales.rho.push(rho);
        scales.sigma.push(sigma);
        scales.clamp.push(clamp);
    }
    scales
}

fn bisect(f: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut mid = (lo * hi).sqrt();
    for _ in 0..CALIBRATION_ITERATIONS {
        mid = (lo * hi).sqrt();
        let value = f(mid);
        if (value - target).abs() <= CALIBRATION_TOLERANCE {
            break;
        }
        if value < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    mid
}

/// Undirected edge of the fuzzy graph, stored with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub mu: f64,
    pub ell: f64,
    /// Added to join two components rather than derived from memberships.
    pub bridge: bool,
}

/// The fuzzy 1-skeleton: directed memberships `w_ij` and symmetric edges.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuzzyGraph {
    n: usize,
    directed: Vec<Vec<(usize, f64)>>,
    edges: Vec<Edge>,
}

impl FuzzyGraph {
    /// Builds a graph from symmetric memberships `(i, j, mu)`, one entry per pair.
    pub fn from_memberships(n: usize, memberships: &[(usize, usize, f64)]) -> Result<Self> {
        let mut edges = Vec::with_capacity(memberships.len());
        for &(a, b, mu) in memberships {
            if a == b || a.max(b) >= n || !(mu > 0.0 && mu <= 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "invalid membership ({a}, {b}, {mu})"
                )));
            }
            edges.push(Edge {
                i: a.min(b),
                j: a.max(b),
                mu,
                ell: edge_length(mu),
                bridge: false,
            });
        }
        edges.sort_by_key(|e| (e.i, e.j));
        if edges.windows(2).any(|w| (w[0].i, w[0].j) == (w[1].i, w[1].j)) {
            return Err(Error::InvalidArgument("duplicate edge".into()));
        }
        Ok(Self {
            n,
            directed: vec![Vec::new(); n],
            edges,
        })
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    /// Symmetric edges sorted by `(i, j)`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Directed memberships `(j, w_ij)` of point `i`, in neighbor order.
    pub fn directed(&self, i: usize) -> &[(usize, f64)] {
        &self.directed[i]
    }

    pub fn edge(&self, a: usize, b: usize) -> Option<&Edge> {
        let key = (a.min(b), a.max(b));
        self.edges
            .binary_search_by_key(&key, |e| (e.i, e.j))
            .ok()
            .map(|idx| &self.edges[idx])
    }

    pub fn membership(&self, a: usize, b: usize) -> Option<f64> {
        self.edge(a, b).map(|e| e.mu)
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut uf = UnionFind::<usize>::new(self.n);
        for e in &self.edges {
            uf.union(e.i, e.j);
        }
        let labels = uf.into_labeling();
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut slot = vec![usize::MAX; self.n];
        for (i, &root) in labels.iter().enumerate() {
            if slot[root] == usize::MAX {
                slot[root] = groups.len();
                groups.push(Vec::new());
            }
            groups[slot[root]].push(i);
        }
        groups
    }

    /// Returns a copy with `mu` of the edge `(a, b)` replaced and `ell` recomputed.
    pub fn with_membership(&self, a: usize, b: usize, mu: f64) -> Result<Self> {
        let mut out = self.clone();
        let key = (a.min(b), a.max(b));
        let idx = out
            .edges
            .binary_search_by_key(&key, |e| (e.i, e.j))
            .map_err(|_| Error::InvalidArgument(format!("no edge ({a}, {b})")))?;
        out.edges[idx].mu = mu;
        out.edges[idx].ell = edge_length(mu);
        Ok(out)
    }

    fn petgraph(&self) -> UnGraph<(), f64> {
        let mut g = UnGraph::with_capacity(self.n, self.edges.len());
        for _ in 0..self.n {
            g.add_node(());
        }
        for e in &self.edges {
            g.add_edge(NodeIndex::new(e.i), NodeIndex::new(e.j), e.ell);
        }
        g
    }
}

/// `-ln(min(mu, 1 - MEMBERSHIP_CLAMP))`.
pub fn edge_length(mu: f64) -> f64 {
    -mu.min(1.0 - MEMBERSHIP_CLAMP).ln()
}

/// Probabilistic t-conorm `a + b - ab`.
pub fn fuzzy_union(a: f64, b: f64) -> f64 {
    a + b - a * b
}

/// Directed memberships `w_ij = exp(-max(0, d_ij - rho_i) / sigma_i)` merged
/// into symmetric edges. Pairs whose merged membership underflows to zero get
/// no edge.
pub fn fuzzy_memberships(nbrs: &NeighborLists, scales: &LocalScales) -> FuzzyGraph {
    let n = nbrs.n_points();
    let directed: Vec<Vec<(usize, f64)>> = nbrs
        .iter()
        .enumerate()
        .map(|(i, list)| {
            list.iter()
                .map(|nb| {
                    let w = (-(nb.distance - scales.rho[i]).max(0.0) / scales.sigma[i]).exp();
                    (nb.index, w)
                })
                .collect()
        })
        .collect();

    let lookup = |from: usize, to: usize| -> f64 {
        directed[from]
            .iter()
            .find(|(j, _)| *j == to)
            .map_or(0.0, |&(_, w)| w)
    };

    let mut pairs: Vec<(usize, usize)> = directed
        .iter()
        .enumerate()
        .flat_map(|(i, list)| list.iter().map(move |&(j, _)| (i.min(j), i.max(j))))
        .collect();
    pairs.sort_unstable();
    pairs.dedup();

    let edges = pairs
        .into_iter()
        .filter_map(|(i, j)| {
            let mu = fuzzy_union(lookup(i, j), lookup(j, i));
            (mu > 0.0).then(|| Edge {
                i,
                j,
                mu,
                ell: edge_length(mu),
                bridge: false,
            })
        })
        .collect();

    FuzzyGraph { n, directed, edges }
}

/// Joins the components of `graph` according to `policy`.
///
/// With [`DisconnectPolicy::EuclideanBridge`], every pair of components is
/// linked through its closest pair of rows. The bridge length is the
/// Euclidean distance times `c = mean(ell) / mean(euclidean length)` over the
/// existing edges, and its membership is `exp(-length)`.
pub fn connect_components(
    graph: &FuzzyGraph,
    table: &DataTable,
    policy: DisconnectPolicy,
) -> Result<FuzzyGraph> {
    let components = graph.components();
    if components.len() <= 1 {
        return Ok(graph.clone());
    }
    if policy == DisconnectPolicy::Fail {
        let names = |c: &Vec<usize>| -> Vec<String> {
            c.iter().map(|&i| table.row_labels()[i].clone()).collect()
        };
        return Err(Error::Disconnected {
            first: names(&components[0]),
            second: names(&components[1]),
        });
    }

    let m = graph.edges.len() as f64;
    let mean_ell = graph.edges.iter().map(|e| e.ell).sum::<f64>() / m;
    let mean_euclid = graph
        .edges
        .iter()
        .map(|e| table.row_distance(e.i, e.j))
        .sum::<f64>()
        / m;
    let scale = if mean_euclid > 0.0 && m > 0.0 {
        mean_ell / mean_euclid
    } else {
        1.0
    };

    let mut out = graph.clone();
    for (a, first) in components.iter().enumerate() {
        for second in &components[a + 1..] {
            let mut best = (f64::INFINITY, 0, 0);
            for &i in first {
                for &j in second {
                    let d = euclidean(table.row(i), table.row(j));
                    if d < best.0 {
                        best = (d, i, j);
                    }
                }
            }
            let (d, i, j) = best;
            let ell = scale * d;
            out.edges.push(Edge {
                i: i.min(j),
                j: i.max(j),
                mu: (-ell).exp(),
                ell,
                bridge: true,
            });
        }
    }
    out.edges.sort_by_key(|e| (e.i, e.j));
    Ok(out)
}

/// Symmetric n×n matrix of UMAP distances with a zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceMatrix {
    n: usize,
    mode: MetricMode,
    values: Vec<f64>,
}

impl DistanceMatrix {
    /// Wraps a dense matrix, checking shape, symmetry, diagonal and sign.
    pub fn from_rows(rows: Vec<Vec<f64>>, mode: MetricMode) -> Result<Self> {
        let n = rows.len();
        let mut values = Vec::with_capacity(n * n);
        for row in &rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    left: row.len(),
                    right: n,
                });
            }
            values.extend_from_slice(row);
        }
        let out = Self { n, mode, values };
        for i in 0..n {
            if out.get(i, i) != 0.0 {
                return Err(Error::InvalidArgument(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let v = out.get(i, j);
                if !(v.is_finite() && v >= 0.0) || v != out.get(j, i) {
                    return Err(Error::InvalidArgument(format!(
                        "entry ({i}, {j}) is negative, non-finite or asymmetric"
                    )));
                }
            }
        }
        Ok(out)
    }

    /// Euclidean distances between the rows of `table`.
    pub fn euclidean(table: &DataTable) -> Self {
        let n = table.n_rows();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = table.row_distance(i, j);
                values[i * n + j] = d;
                values[j * n + i] = d;
            }
        }
        Self {
            n,
            mode: MetricMode::Geodesic,
            values,
        }
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> MetricMode {
        self.mode
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    fn set_pair(&mut self, i: usize, j: usize, v: f64) {
        self.values[i * self.n + j] = v;
        self.values[j * self.n + i] = v;
    }
}

/// All-pairs d_UMAP over the (bridged) fuzzy graph.
pub fn umap_distance_matrix(
    graph: &FuzzyGraph,
    mode: MetricMode,
    policy: DisconnectPolicy,
    table: &DataTable,
) -> Result<DistanceMatrix> {
    let connected = connect_components(graph, table, policy)?;
    Ok(match mode {
        MetricMode::Geodesic => geodesic(&connected),
        MetricMode::Minimax => minimax(&connected),
    })
}

/// Shortest-path lengths from every source, then closed under the triangle
/// inequality so that `d(i, k) <= d(i, j) + d(j, k)` holds in floating point.
fn geodesic(graph: &FuzzyGraph) -> DistanceMatrix {
    let n = graph.n;
    let g = graph.petgraph();
    let mut out = DistanceMatrix {
        n,
        mode: MetricMode::Geodesic,
        values: vec![f64::INFINITY; n * n],
    };
    for s in 0..n {
        for (node, d) in dijkstra(&g, NodeIndex::new(s), None, |e| *e.weight()) {
            out.values[s * n + node.index()] = d;
        }
    }
    for i in 0..n {
        out.values[i * n + i] = 0.0;
        for j in i + 1..n {
            let d = out.get(i, j).min(out.get(j, i));
            out.set_pair(i, j, d);
        }
    }
    // Rounding along different paths can leave ulp-level violations.
    loop {
        let mut changed = false;
        for m in 0..n {
            for i in 0..n {
                let dim = out.get(i, m);
                for j in i + 1..n {
                    let via = dim + out.get(m, j);
                    if via < out.get(i, j) {
                        out.set_pair(i, j, via);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    out
}

/// Largest edge on the minimum-spanning-tree path between each pair.
fn minimax(graph: &FuzzyGraph) -> DistanceMatrix {
    let n = graph.n;
    let mut tree: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for element in min_spanning_tree(&graph.petgraph()) {
        if let Element::Edge {
            source,
            target,
            weight,
        } = element
        {
            tree[source].push((target, weight));
            tree[target].push((source, weight));
        }
    }
    let mut out = DistanceMatrix {
        n,
        mode: MetricMode::Minimax,
        values: vec![f64::INFINITY; n * n],
    };
    let mut stack = Vec::new();
    for s in 0..n {
        out.values[s * n + s] = 0.0;
        stack.push((s, usize::MAX, 0.0f64));
        while let Some((node, parent, worst)) = stack.pop() {
            for &(next, w) in &tree[node] {
                if next != parent {
                    let d = worst.max(w);
                    out.values[s * n + next] = d;
                    stack.push((next, node, d));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neighbors::{exact_knn, Neighbor};
    use proptest::prelude::*;

    fn lists(k: usize, rows: Vec<Vec<f64>>) -> NeighborLists {
        let lists = rows
            .into_iter()
            .enumerate()
            .map(|(i, ds)| {
                ds.into_iter()
                    .enumerate()
                    .map(|(m, distance)| Neighbor {
                        index: (i + m + 1) % (k + 1),
                        distance,
                    })
                    .collect()
            })
            .collect();
        NeighborLists { k, lists }
    }

    /// Membership sum for three sorted distances as a function of t = exp(-1/sigma):
    /// 1 + t^(d2 - d1) + t^(d3 - d1). With distances {1, 2, 3} this is the
    /// quadratic t + t^2 = log2(3) - 1.
    fn quadratic_sigma() -> f64 {
        let c = 3f64.log2() - 1.0;
        let t = (-1.0 + (1.0 + 4.0 * c).sqrt()) / 2.0;
        -1.0 / t.ln()
    }

    #[test]
    fn sigma_for_one_two_three() {
        let want = quadratic_sigma();
        assert!((want - 1.1333).abs() < 1e-3, "{want}");
        let nb = lists(3, vec![vec![1.0, 2.0, 3.0]; 4]);
        let s = compute_local_scales(&nb);
        assert_eq!(s.rho[0], 1.0);
        assert_eq!(s.clamp[0], Clamp::None);
        assert!((s.sigma[0] - want).abs() < 1e-3, "{} vs {want}", s.sigma[0]);
        let sum = membership_sum([1.0, 2.0, 3.0], 1.0, s.sigma[0]);
        assert!((sum - 3f64.log2()).abs() <= CALIBRATION_TOLERANCE);
    }

    #[test]
    fn target_met_by_first_term_clamps_low() {
        let nb = lists(2, vec![vec![1.0, 1.0]; 3]);
        let s = compute_local_scales(&nb);
        assert_eq!(s.rho[0], 1.0);
        assert_eq!(s.sigma[0], SIGMA_MIN);
        assert_eq!(s.clamp[0], Clamp::Min);
    }

    #[test]
    fn equal_distances_clamp_low() {
        let nb = lists(4, vec![vec![2.5; 4]; 5]);
        let s = compute_local_scales(&nb);
        assert!(s.clamp.iter().all(|&c| c == Clamp::Min));
        assert_eq!(membership_sum([2.5; 4], 2.5, 123.0), 4.0);
    }

    #[test]
    fn t_conorm() {
        assert_eq!(fuzzy_union(0.5, 0.5), 0.75);
        assert_eq!(fuzzy_union(0.3, 0.0), 0.3);
        assert_eq!(fuzzy_union(1.0, 0.2), 1.0);
    }

    #[test]
    fn nearest_neighbor_edge_is_clamped() {
        assert_eq!(edge_length(1.0), -(1.0 - 1e-6f64).ln());
        assert!((edge_length(1.0) - 1e-6).abs() < 1e-11);
        assert!(edge_length(1.0) > 0.0);
    }

    #[test]
    fn memberships_on_a_line() {
        let t = DataTable::from_rows(vec![vec![0.0], vec![1.0], vec![3.0], vec![7.0]]).unwrap();
        let nb = exact_knn(&t, 2).unwrap();
        let g = fuzzy_memberships(&nb, &compute_local_scales(&nb));
        // Every point has its nearest neighbor at membership 1.
        for i in 0..4 {
            assert_eq!(g.directed(i)[0].1, 1.0);
        }
        for e in g.edges() {
            assert!(e.i < e.j);
            assert!(e.mu > 0.0 && e.mu <= 1.0);
            assert!(e.ell > 0.0);
            let w = |a: usize, b: usize| {
                g.directed(a).iter().find(|x| x.0 == b).map_or(0.0, |x| x.1)
            };
            assert_eq!(e.mu, fuzzy_union(w(e.i, e.j), w(e.j, e.i)));
        }
        // 0 and 3 are never neighbors of each other at k = 2.
        assert!(g.membership(0, 3).is_none());
    }

    fn path_graph() -> FuzzyGraph {
        // ell = 1 on a-b and ell = 2 on b-c.
        let mut g = FuzzyGraph::from_memberships(3, &[(0, 1, 0.5), (1, 2, 0.5)]).unwrap();
        g.edges[0].ell = 1.0;
        g.edges[1].ell = 2.0;
        g
    }

    fn line_table(n: usize) -> DataTable {
        DataTable::from_rows((0..n).map(|i| vec![i as f64]).collect()).unwrap()
    }

    #[test]
    fn path_graph_geodesic_and_minimax() {
        let g = path_graph();
        let t = line_table(3);
        let geo = umap_distance_matrix(&g, MetricMode::Geodesic, DisconnectPolicy::Fail, &t).unwrap();
        let mm = umap_distance_matrix(&g, MetricMode::Minimax, DisconnectPolicy::Fail, &t).unwrap();
        assert_eq!(geo.get(0, 2), 3.0);
        assert_eq!(mm.get(0, 2), 2.0);
        assert_eq!(mm.get(0, 1), 1.0);
        for i in 0..3 {
            assert_eq!(geo.get(i, i), 0.0);
            assert_eq!(mm.get(i, i), 0.0);
        }
    }

    #[test]
    fn disconnected_fail_names_components() {
        let g = FuzzyGraph::from_memberships(4, &[(0, 1, 0.5), (2, 3, 0.5)]).unwrap();
        let t = line_table(4);
        let err = umap_distance_matrix(&g, MetricMode::Geodesic, DisconnectPolicy::Fail, &t)
            .unwrap_err();
        match err {
            Error::Disconnected { first, second } => {
                assert_eq!(first, vec!["r1", "r2"]);
                assert_eq!(second, vec!["r3", "r4"]);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn euclidean_bridge_joins_closest_pair() {
        let mut g = FuzzyGraph::from_memberships(4, &[(0, 1, 0.5), (2, 3, 0.5)]).unwrap();
        g.edges[0].ell = 2.0;
        g.edges[1].ell = 2.0;
        // Rows at 0, 1, 5, 6: existing edges have Euclidean length 1, so c = 2.
        let t = DataTable::from_rows(vec![vec![0.0], vec![1.0], vec![5.0], vec![6.0]]).unwrap();
        let bridged = connect_components(&g, &t, DisconnectPolicy::EuclideanBridge).unwrap();
        let bridge = bridged.edge(1, 2).unwrap();
        assert!(bridge.bridge);
        assert_eq!(bridge.ell, 8.0);
        let d = umap_distance_matrix(&g, MetricMode::Geodesic, DisconnectPolicy::EuclideanBridge, &t)
            .unwrap();
        assert_eq!(d.get(0, 3), 12.0);
    }

    #[test]
    fn bridge_links_every_pair_of_components() {
        let g = FuzzyGraph::from_memberships(6, &[(0, 1, 0.5), (2, 3, 0.5), (4, 5, 0.5)]).unwrap();
        let t = line_table(6);
        let bridged = connect_components(&g, &t, DisconnectPolicy::EuclideanBridge).unwrap();
        assert_eq!(bridged.edges().iter().filter(|e| e.bridge).count(), 3);
        assert_eq!(bridged.components().len(), 1);
    }

    /// Floyd-Warshall with (+, min) or (max, min).
    fn closure(n: usize, edges: &[Edge], combine: fn(f64, f64) -> f64) -> Vec<Vec<f64>> {
        let mut d = vec![vec![f64::INFINITY; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        for e in edges {
            d[e.i][e.j] = d[e.i][e.j].min(e.ell);
            d[e.j][e.i] = d[e.j][e.i].min(e.ell);
        }
        for m in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = combine(d[i][m], d[m][j]);
                    if via < d[i][j] {
                        d[i][j] = via;
                    }
                }
            }
        }
        d
    }

    fn random_table() -> impl Strategy<Value = Vec<Vec<f64>>> {
        (5usize..30, 1usize..4).prop_flat_map(|(n, p)| {
            proptest::collection::vec(proptest::collection::vec(-10.0f64..10.0, p), n)
        })
    }

    proptest! {
        #[test]
        fn calibration_residual(rows in random_table(), k_frac in 0.0f64..1.0) {
            let n = rows.len();
            let k = 2 + ((n - 3) as f64 * k_frac) as usize;
            let t = DataTable::from_rows(rows).unwrap();
            let nb = exact_knn(&t, k).unwrap();
            let s = compute_local_scales(&nb);
            let target = (k as f64).log2();
            for i in 0..n {
                prop_assert_eq!(s.rho[i], nb.of(i)[0].distance);
                prop_assert!(s.sigma[i] >= SIGMA_MIN && s.sigma[i] <= sigma_max(&nb));
                if s.clamp[i] == Clamp::None {
                    let sum = membership_sum(nb.of(i).iter().map(|x| x.distance), s.rho[i], s.sigma[i]);
                    prop_assert!((sum - target).abs() <= CALIBRATION_TOLERANCE);
                }
            }
        }

        #[test]
        fn distance_matrices_match_oracles(rows in random_table(), k_frac in 0.0f64..1.0) {
            let n = rows.len();
            let k = 2 + ((n - 3) as f64 * k_frac) as usize;
            let t = DataTable::from_rows(rows).unwrap();
            let nb = exact_knn(&t, k).unwrap();
            let g = fuzzy_memberships(&nb, &compute_local_scales(&nb));
            let policy = DisconnectPolicy::EuclideanBridge;
            let geo = umap_distance_matrix(&g, MetricMode::Geodesic, policy, &t).unwrap();
            let mm = umap_distance_matrix(&g, MetricMode::Minimax, policy, &t).unwrap();
            let bridged = connect_components(&g, &t, policy).unwrap();
            let geo_oracle = closure(n, bridged.edges(), |a, b| a + b);
            let mm_oracle = closure(n, bridged.edges(), f64::max);
            for i in 0..n {
                for j in 0..n {
                    prop_assert!((geo.get(i, j) - geo_oracle[i][j]).abs() <= 1e-9 * (1.0 + geo_oracle[i][j]));
                    prop_assert_eq!(mm.get(i, j), mm_oracle[i][j]);
                    prop_assert_eq!(geo.get(i, j), geo.get(j, i));
                    prop_assert_eq!(mm.get(i, j), mm.get(j, i));
                    prop_assert!(mm.get(i, j) <= geo.get(i, j));
                    prop_assert!(geo.get(i, j).is_finite() && geo.get(i, j) >= 0.0);
                    for m in 0..n {
                        prop_assert!(geo.get(i, m) <= geo.get(i, j) + geo.get(j, m));
                    }
                }
            }
        }

        #[test]
        fn memberships_are_symmetric_and_bounded(rows in random_table()) {
            let t = DataTable::from_rows(rows).unwrap();
            let nb = exact_knn(&t, 3).unwrap();
            let g = fuzzy_memberships(&nb, &compute_local_scales(&nb));
            for e in g.edges() {
                prop_assert!(e.mu > 0.0 && e.mu <= 1.0);
                prop_assert!(e.ell > 0.0);
                prop_assert_eq!(g.membership(e.j, e.i), Some(e.mu));
            }
        }

        #[test]
        fn raising_a_membership_never_lengthens_paths(rows in random_table(), pick in any::<prop::sample::Index>(), bump in 0.0f64..1.0) {
            let t = DataTable::from_rows(rows).unwrap();
            let nb = exact_knn(&t, 3).unwrap();
            let g = fuzzy_memberships(&nb, &compute_local_scales(&nb));
            let policy = DisconnectPolicy::EuclideanBridge;
            let before = umap_distance_matrix(&g, MetricMode::Geodesic, policy, &t).unwrap();
            let e = g.edges()[pick.index(g.edges().len())];
            let raised = g.with_membership(e.i, e.j, e.mu + (1.0 - e.mu) * bump).unwrap();
            let after = umap_distance_matrix(&raised, MetricMode::Geodesic, policy, &t).unwrap();
            let n = t.n_rows();
            for i in 0..n {
                for j in 0..n {
                    prop_assert!(after.get(i, j) <= before.get(i, j) * (1.0 + 1e-12));
                }
            }
        }
    }
}
