//! Čech complexes up to dimension 2, single-linkage groups and Betti numbers.
//!
//! Balls have radius `epsilon`: an edge appears when two balls meet
//! (`d <= 2 epsilon`) and a triangle when the three balls share a point, i.e.
//! the minimum enclosing ball of its vertices has radius `<= epsilon`.

use std::collections::{HashMap, HashSet};

use petgraph::unionfind::UnionFind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::data::euclidean;
use crate::error::{Error, Result};

/// Sorted, strictly increasing vertex list of dimension 0, 1 or 2.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Simplex(Vec<usize>);

impl Simplex {
    pub fn new(mut vertices: Vec<usize>) -> Result<Self> {
        vertices.sort_unstable();
        if vertices.is_empty() || vertices.len() > 3 || vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(format!(
                "a simplex needs 1 to 3 distinct vertices, got {vertices:?}"
            )));
        }
        Ok(Self(vertices))
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.len() - 1
    }

    /// Codimension-1 faces.
    pub fn faces(&self) -> Vec<Simplex> {
        if self.0.len() == 1 {
            return Vec::new();
        }
        (0..self.0.len())
            .map(|skip| {
                Simplex(
                    self.0
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != skip)
                        .map(|(_, &v)| v)
                        .collect(),
                )
            })
            .collect()
    }
}

/// Simplices with the scale at which each appears.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilteredComplex {
    simplices: Vec<(Simplex, f64)>,
    closed: bool,
}

impl FilteredComplex {
    /// Builds a complex from explicit simplices and checks the face property.
    pub fn from_simplices(simplices: Vec<(Simplex, f64)>) -> Self {
        let mut simplices = simplices;
        simplices.sort_by(|a, b| {
            a.0.dimension()
                .cmp(&b.0.dimension())
                .then_with(|| a.0.cmp(&b.0))
        });
        let closed = closure_violation(&simplices).is_none();
        Self { simplices, closed }
    }

    pub fn simplices(&self) -> &[(Simplex, f64)] {
        &self.simplices
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn of_dimension(&self, dim: usize) -> impl Iterator<Item = &Simplex> {
        self.simplices
            .iter()
            .map(|(s, _)| s)
            .filter(move |s| s.dimension() == dim)
    }

    pub fn count(&self, dim: usize) -> usize {
        self.of_dimension(dim).count()
    }

    /// Sub-complex of simplices born at or before `epsilon`.
    pub fn at(&self, epsilon: f64) -> Self {
        Self {
            simplices: self
                .simplices
                .iter()
                .filter(|(_, birth)| *birth <= epsilon)
                .cloned()
                .collect(),
            closed: self.closed,
        }
    }

    pub fn contains(&self, s: &Simplex) -> bool {
        self.simplices.iter().any(|(t, _)| t == s)
    }

    pub fn is_subcomplex_of(&self, other: &Self) -> bool {
        let theirs: HashSet<&Simplex> = other.simplices.iter().map(|(s, _)| s).collect();
        self.simplices.iter().all(|(s, _)| theirs.contains(s))
    }
}

fn closure_violation(simplices: &[(Simplex, f64)]) -> Option<(Simplex, Simplex)> {
    let births: HashMap<&Simplex, f64> = simplices.iter().map(|(s, b)| (s, *b)).collect();
    for (s, birth) in simplices {
        for face in s.faces() {
            match births.get(&face) {
                Some(fb) if fb <= birth => {}
                _ => return Some((s.clone(), face)),
            }
        }
    }
    None
}

/// Radius of the smallest ball containing the three points.
///
/// For an acute triangle this is the circumradius; otherwise (right, obtuse
/// or degenerate) it is half the longest side.
pub fn enclosing_radius(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let ab = euclidean(a, b);
    let bc = euclidean(b, c);
    let ca = euclidean(c, a);
    let half_longest = ab.max(bc).max(ca) / 2.0;
    let angle_dot = |p: &[f64], q: &[f64], r: &[f64]| -> f64 {
        q.iter()
            .zip(r)
            .zip(p)
            .map(|((qi, ri), pi)| (qi - pi) * (ri - pi))
            .sum()
    };
    let acute = angle_dot(a, b, c) > 0.0 && angle_dot(b, c, a) > 0.0 && angle_dot(c, a, b) > 0.0;
    if !acute {
        return half_longest;
    }
    // |u|^2 |v|^2 - (u.v)^2 = (2 area)^2 with u, v the edges at `a`;
    // circumradius = abc / (4 area).
    let (uu, vv, uv) = (ab * ab, ca * ca, angle_dot(a, b, c));
    let twice_area_sq = uu * vv - uv * uv;
    if !(twice_area_sq > 0.0) {
        return half_longest;
    }
    (ab * bc * ca / (2.0 * twice_area_sq.sqrt())).max(half_longest)
}

/// Every vertex, edge and triangle with its Čech birth radius.
pub fn cech_filtration(points: &[Vec<f64>]) -> FilteredComplex {
    let n = points.len();
    let mut simplices: Vec<(Simplex, f64)> = (0..n).map(|i| (Simplex(vec![i]), 0.0)).collect();
    for i in 0..n {
        for j in i + 1..n {
            simplices.push((Simplex(vec![i, j]), euclidean(&points[i], &points[j]) / 2.0));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let r = enclosing_radius(&points[i], &points[j], &points[k]);
                simplices.push((Simplex(vec![i, j, k]), r));
            }
        }
    }
    FilteredComplex::from_simplices(simplices)
}

/// The Čech complex at radius `epsilon`, truncated at dimension 2.
pub fn cech_complex(points: &[Vec<f64>], epsilon: f64) -> Result<FilteredComplex> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let n = points.len();
    let mut simplices: Vec<(Simplex, f64)> = (0..n).map(|i| (Simplex(vec![i]), 0.0)).collect();
    let mut edge = vec![vec![false; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let birth = euclidean(&points[i], &points[j]) / 2.0;
            if birth <= epsilon {
                edge[i][j] = true;
                simplices.push((Simplex(vec![i, j]), birth));
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if !edge[i][j] {
                continue;
            }
            for k in j + 1..n {
                if edge[i][k] && edge[j][k] {
                    let birth = enclosing_radius(&points[i], &points[j], &points[k]);
                    if birth <= epsilon {
                        simplices.push((Simplex(vec![i, j, k]), birth));
                    }
                }
            }
        }
    }
    Ok(FilteredComplex::from_simplices(simplices))
}

/// Groups of points chained by steps of length `<= epsilon`, each sorted and
/// ordered by smallest member.
pub fn single_linkage_components(points: &[Vec<f64>], epsilon: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut uf = UnionFind::<usize>::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if euclidean(&points[i], &points[j]) <= epsilon {
                uf.union(i, j);
            }
        }
    }
    group_by_label(&uf.into_labeling())
}

fn group_by_label(labels: &[usize]) -> Vec<Vec<usize>> {
    let mut slot: HashMap<usize, usize> = HashMap::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, &root) in labels.iter().enumerate() {
        let idx = *slot.entry(root).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[idx].push(i);
    }
    groups
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Betti {
    pub b0: usize,
    pub b1: usize,
    pub b2: usize,
}

/// Rank over the two-element field of a matrix given as sparse columns of
/// sorted row indices, by column reduction on the lowest entry.
fn gf2_rank(mut columns: Vec<Vec<usize>>) -> usize {
    let mut owner: HashMap<usize, usize> = HashMap::new();
    let mut rank = 0;
    for c in 0..columns.len() {
        while let Some(&low) = columns[c].last() {
            match owner.get(&low) {
                Some(&other) => {
                    columns[c] = symmetric_difference(&columns[c], &columns[other]);
                }
                None => {
                    owner.insert(low, c);
                    rank += 1;
                    break;
                }
            }
        }
    }
    rank
}

fn symmetric_difference(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

fn boundary_columns(complex: &FilteredComplex, dim: usize) -> Vec<Vec<usize>> {
    let index: HashMap<&Simplex, usize> = complex
        .of_dimension(dim - 1)
        .enumerate()
        .map(|(i, s)| (s, i))
        .collect();
    complex
        .of_dimension(dim)
        .map(|s| {
            let mut col: Vec<usize> = s.faces().iter().map(|f| index[f]).collect();
            col.sort_unstable();
            col
        })
        .collect()
}

/// Betti numbers over the two-element field.
///
/// `b2` is the kernel dimension of the boundary map on triangles, which is all
/// of second homology for a complex truncated at dimension 2.
pub fn betti_numbers(complex: &FilteredComplex) -> Result<Betti> {
    if let Some((simplex, face)) = closure_violation(&complex.simplices) {
        return Err(Error::ClosureViolation {
            simplex: simplex.0,
            face: face.0,
        });
    }
    let (v, e, t) = (complex.count(0), complex.count(1), complex.count(2));
    let rank1 = gf2_rank(boundary_columns(complex, 1));
    let rank2 = gf2_rank(boundary_columns(complex, 2));
    Ok(Betti {
        b0: v - rank1,
        b1: e - rank1 - rank2,
        b2: t - rank2,
    })
}

/// `(epsilon, vertices, edges, triangles, betti)` for each sweep value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub epsilon: f64,
    pub vertices: usize,
    pub edges: usize,
    pub triangles: usize,
    pub b0: usize,
    pub b1: usize,
}

/// Betti numbers over `steps` evenly spaced radii in `[lo, hi]`.
pub fn betti_sweep(points: &[Vec<f64>], lo: f64, hi: f64, steps: usize) -> Result<Vec<SweepPoint>> {
    if steps == 0 || !(lo > 0.0) || !(hi >= lo) {
        return Err(Error::InvalidArgument(format!(
            "sweep needs 0 < lo <= hi and steps >= 1, got {lo}:{hi}:{steps}"
        )));
    }
    let full = cech_filtration(points);
    (0..steps)
        .map(|s| {
            let epsilon = if steps == 1 {
                lo
            } else {
                lo + (hi - lo) * s as f64 / (steps - 1) as f64
            };
            let complex = full.at(epsilon);
            let betti = betti_numbers(&complex)?;
            Ok(SweepPoint {
                epsilon,
                vertices: complex.count(0),
                edges: complex.count(1),
                triangles: complex.count(2),
                b0: betti.b0,
                b1: betti.b1,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NerveReport {
    pub samples: usize,
    pub mismatches: usize,
    pub ball_union_components: usize,
    pub complex_components: usize,
    pub grid_cells: usize,
}

const GRID_CELLS_PER_RADIUS: f64 = 40.0;
const MAX_GRID_SIDE: usize = 4000;

/// Monte-Carlo check that the ball union and the complex agree on connectivity.
///
/// The union of balls is rasterized on a fine grid and split into components
/// by flood fill. Points are sampled uniformly from random balls; for each
/// sample the grid component of its cell is compared with the complex
/// component of its nearest center. A sample is a mismatch when it breaks
/// the one-to-one correspondence built so far.
pub fn nerve_consistency_check(
    points: &[Vec<f64>],
    epsilon: f64,
    trials: usize,
    seed: u64,
) -> Result<NerveReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if !(epsilon > 0.0) || points.is_empty() {
        return Err(Error::InvalidArgument(
            "need at least one point and a positive epsilon".into(),
        ));
    }
    if points.iter().any(|p| p.len() != 2) {
        return Err(Error::InvalidArgument("points must be planar".into()));
    }

    let complex_groups = single_linkage_components(points, 2.0 * epsilon);
    let mut complex_label = vec![0; points.len()];
    for (g, members) in complex_groups.iter().enumerate() {
        for &i in members {
            complex_label[i] = g;
        }
    }

    let grid = BallGrid::new(points, epsilon);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grid_to_complex: HashMap<usize, usize> = HashMap::new();
    let mut complex_to_grid: HashMap<usize, usize> = HashMap::new();
    let mut mismatches = 0;
    let mut samples = 0;
    while samples < trials {
        let center = &points[rng.random_range(0..points.len())];
        let (dx, dy) = loop {
            let dx = rng.random_range(-1.0..1.0);
            let dy = rng.random_range(-1.0..1.0);
            if dx * dx + dy * dy <= 1.0 {
                break (dx * epsilon, dy * epsilon);
            }
        };
        let sample = [center[0] + dx, center[1] + dy];
        let Some(cell_component) = grid.component_at(&sample) else {
            continue;
        };
        samples += 1;
        let nearest = (0..points.len())
            .min_by(|&a, &b| {
                euclidean(&points[a], &sample).total_cmp(&euclidean(&points[b], &sample))
            })
            .expect("nonempty");
        let complex_component = complex_label[nearest];
        let forward = *grid_to_complex.entry(cell_component).or_insert(complex_component);
        let backward = *complex_to_grid.entry(complex_component).or_insert(cell_component);
        if forward != complex_component || backward != cell_component {
            mismatches += 1;
        }
    }
    Ok(NerveReport {
        samples,
        mismatches,
        ball_union_components: grid.n_components,
        complex_components: complex_groups.len(),
        grid_cells: grid.width * grid.height,
    })
}

/// Rasterized union of balls with 4-connected components.
struct BallGrid {
    origin: [f64; 2],
    cell: f64,
    width: usize,
    height: usize,
    component: Vec<Option<usize>>,
    n_components: usize,
}

impl BallGrid {
    fn new(points: &[Vec<f64>], epsilon: f64) -> Self {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in points {
            for a in 0..2 {
                lo[a] = lo[a].min(p[a] - epsilon);
                hi[a] = hi[a].max(p[a] + epsilon);
            }
        }
        let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]);
        let cell = (epsilon / GRID_CELLS_PER_RADIUS).max(extent / MAX_GRID_SIDE as f64);
        let width = ((hi[0] - lo[0]) / cell).ceil() as usize + 1;
        let height = ((hi[1] - lo[1]) / cell).ceil() as usize + 1;

        let eps_sq = epsilon * epsilon;
        let mut inside = vec![false; width * height];
        for p in points {
            let x0 = (((p[0] - epsilon - lo[0]) / cell).floor().max(0.0)) as usize;
            let x1 = ((((p[0] + epsilon - lo[0]) / cell).ceil()) as usize).min(width - 1);
            let y0 = (((p[1] - epsilon - lo[1]) / cell).floor().max(0.0)) as usize;
            let y1 = ((((p[1] + epsilon - lo[1]) / cell).ceil()) as usize).min(height - 1);
            for gy in y0..=y1 {
                for gx in x0..=x1 {
                    let cx = lo[0] + (gx as f64 + 0.5) * cell;
                    let cy = lo[1] + (gy as f64 + 0.5) * cell;
                    if (cx - p[0]).powi(2) + (cy - p[1]).powi(2) <= eps_sq {
                        inside[gy * width + gx] = true;
                    }
                }
            }
        }

        let mut component = vec![None; width * height];
        let mut n_components = 0;
        let mut stack = Vec::new();
        for start in 0..inside.len() {
            if !inside[start] || component[start].is_some() {
                continue;
            }
            component[start] = Some(n_components);
            stack.push(start);
            while let Some(idx) = stack.pop() {
                let (x, y) = (idx % width, idx / width);
                let mut visit = |nx: usize, ny: usize| {
                    let nidx = ny * width + nx;
                    if inside[nidx] && component[nidx].is_none() {
                        component[nidx] = Some(n_components);
                        stack.push(nidx);
                    }
                };
                if x > 0 {
                    visit(x - 1, y);
                }
                if x + 1 < width {
                    visit(x + 1, y);
                }
                if y > 0 {
                    visit(x, y - 1);
                }
                if y + 1 < height {
                    visit(x, y + 1);
                }
            }
            n_components += 1;
        }
        Self {
            origin: lo,
            cell,
            width,
            height,
            component,
            n_components,
        }
    }

    fn component_at(&self, p: &[f64; 2]) -> Option<usize> {
        let gx = ((p[0] - self.origin[0]) / self.cell).floor();
        let gy = ((p[1] - self.origin[1]) / self.cell).floor();
        if gx < 0.0 || gy < 0.0 {
            return None;
        }
        let (gx, gy) = (gx as usize, gy as usize);
        if gx >= self.width || gy >= self.height {
            return None;
        }
        self.component[gy * self.width + gx]
    }
}
