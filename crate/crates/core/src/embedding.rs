//! Low-dimensional layout of the fuzzy graph.
//!
//! The layout minimizes the cross-entropy between graph memberships `mu` and
//! the low-dimensional similarity `phi(d) = 1 / (1 + a d^(2b))`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::local_metric::{FuzzyGraph, MEMBERSHIP_CLAMP};

/// Number of repulsive samples drawn per attractive update.
pub const NEGATIVE_SAMPLES: usize = 5;
/// Per-coordinate gradient clip.
pub const GRADIENT_CLIP: f64 = 4.0;
/// Largest absolute coordinate of an initial layout.
pub const INIT_SCALE: f64 = 10.0;

const NU_FLOOR: f64 = 1e-12;
const FIT_GRID: usize = 300;

/// Parameters of `phi(d) = 1 / (1 + a d^(2b))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveParams {
    pub a: f64,
    pub b: f64,
}

impl CurveParams {
    /// Similarity at squared distance `s`.
    pub fn phi_sq(&self, s: f64) -> f64 {
        1.0 / (1.0 + self.a * s.powf(self.b))
    }

    pub fn phi(&self, d: f64) -> f64 {
        self.phi_sq(d * d)
    }
}

/// The curve `phi` is fitted to: 1 up to `min_dist`, then exponential decay.
pub fn target_curve(d: f64, min_dist: f64, spread: f64) -> f64 {
    if d < min_dist {
        1.0
    } else {
        (-(d - min_dist) / spread).exp()
    }
}

/// The fit grid: 300 evenly spaced points over `[0, 3 * spread]`.
pub fn fit_grid(spread: f64) -> Vec<f64> {
    let hi = 3.0 * spread;
    (0..FIT_GRID)
        .map(|i| hi * i as f64 / (FIT_GRID - 1) as f64)
        .collect()
}

/// Least-squares fit of `(a, b)` by Levenberg-Marquardt.
pub fn fit_curve(min_dist: f64, spread: f64) -> CurveParams {
    let xs = fit_grid(spread);
    let ys: Vec<f64> = xs.iter().map(|&x| target_curve(x, min_dist, spread)).collect();
    let sse = |a: f64, b: f64| -> f64 {
        let p = CurveParams { a, b };
        xs.iter().zip(&ys).map(|(&x, &y)| (p.phi(x) - y).powi(2)).sum()
    };

    let (mut a, mut b) = (1.0, 1.0);
    let mut cost = sse(a, b);
    let mut lambda = 1e-3;
    for _ in 0..500 {
        // Normal equations J^T J and J^T r for the residual r = phi - y.
        let (mut jaa, mut jab, mut jbb, mut ga, mut gb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&x, &y) in xs.iter().zip(&ys) {
            if x == 0.0 {
                continue;
            }
            let u = x.powf(2.0 * b);
            let denom = (1.0 + a * u).powi(2);
            let da = -u / denom;
            let db = -a * u * 2.0 * x.ln() / denom;
            let r = 1.0 / (1.0 + a * u) - y;
            jaa += da * da;
            jab += da * db;
            jbb += db * db;
            ga += da * r;
            gb += db * r;
        }
        let mut improved = false;
        while lambda < 1e12 {
            let (maa, mbb) = (jaa * (1.0 + lambda), jbb * (1.0 + lambda));
            let det = maa * mbb - jab * jab;
            let step_a = -(mbb * ga - jab * gb) / det;
            let step_b = -(maa * gb - jab * ga) / det;
            let (na, nb) = (a + step_a, b + step_b);
            if na > 0.0 && nb > 0.0 && det.is_finite() && det != 0.0 {
                let new_cost = sse(na, nb);
                if new_cost < cost {
                    let done = (cost - new_cost) <= 1e-15 * cost.max(1e-300);
                    a = na;
                    b = nb;
                    cost = new_cost;
                    lambda = (lambda / 10.0).max(1e-12);
                    improved = !done;
                    break;
                }
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    CurveParams { a, b }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitMethod {
    Spectral,
    Random,
}

/// Point coordinates in the low-dimensional space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Embedding {
    n: usize,
    dim: usize,
    coords: Vec<f64>,
    pub init: InitMethod,
    pub epochs: usize,
    pub cross_entropy: Option<f64>,
}

impl Embedding {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let dim = rows.first().map_or(0, Vec::len);
        let mut coords = Vec::with_capacity(n * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    left: row.len(),
                    right: dim,
                });
            }
            coords.extend(row);
        }
        Ok(Self {
            n,
            dim,
            coords,
            init: InitMethod::Random,
            epochs: 0,
            cross_entropy: None,
        })
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn column(&self, r: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.coords[i * self.dim + r]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.coords.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    /// Adds `shift` to every point.
    pub fn translated(&self, shift: &[f64]) -> Self {
        let mut out = self.clone();
        for p in out.coords.chunks_mut(self.dim) {
            for (c, s) in p.iter_mut().zip(shift) {
                *c += s;
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }
}

/// Uniform noise in `[-10, 10]` from a seeded generator.
pub fn random_init(n: usize, dim: usize, seed: u64) -> Embedding {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords = (0..n * dim)
        .map(|_| rng.random_range(-INIT_SCALE..=INIT_SCALE))
        .collect();
    Embedding {
        n,
        dim,
        coords,
        init: InitMethod::Random,
        epochs: 0,
        cross_entropy: None,
    }
}

/// Bottom nontrivial eigenvectors of the symmetric normalized Laplacian of `mu`.
///
/// Each eigenvector is signed so that its largest-magnitude entry is positive,
/// and the layout is scaled to a maximum absolute coordinate of 10. Falls back
/// to [`random_init`] when the eigensolver does not converge or the graph has
/// too few points.
pub fn spectral_init(graph: &FuzzyGraph, dim: usize, seed: u64) -> Embedding {
    let n = graph.n_points();
    spectral_coords(graph, dim).map_or_else(
        || random_init(n, dim, seed),
        |coords| Embedding {
            n,
            dim,
            coords,
            init: InitMethod::Spectral,
            epochs: 0,
            cross_entropy: None,
        },
    )
}

/// Dense symmetric normalized Laplacian `I - D^-1/2 W D^-1/2`.
pub fn normalized_laplacian(graph: &FuzzyGraph) -> DMatrix<f64> {
    let n = graph.n_points();
    let mut w = DMatrix::<f64>::zeros(n, n);
    for e in graph.edges() {
        w[(e.i, e.j)] = e.mu;
        w[(e.j, e.i)] = e.mu;
    }
    let inv_sqrt: Vec<f64> = (0..n)
        .map(|i| {
            let deg = w.row(i).sum();
            if deg > 0.0 {
                1.0 / deg.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    DMatrix::from_fn(n, n, |i, j| {
        let identity = if i == j { 1.0 } else { 0.0 };
        identity - inv_sqrt[i] * w[(i, j)] * inv_sqrt[j]
    })
}

fn spectral_coords(graph: &FuzzyGraph, dim: usize) -> Option<Vec<f64>> {
    let n = graph.n_points();
    if n < dim + 1 {
        return None;
    }
    let eig = SymmetricEigen::try_new(normalized_laplacian(graph), 1e-14, 10_000)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]).then(x.cmp(&y)));

    let mut columns: Vec<Vec<f64>> = order[1..=dim]
        .iter()
        .map(|&c| eig.eigenvectors.column(c).iter().copied().collect())
        .collect();
    for col in &mut columns {
        let pivot = col
            .iter()
            .copied()
            .fold(0.0f64, |best, v| if v.abs() > best.abs() { v } else { best });
        if pivot < 0.0 {
            col.iter_mut().for_each(|v| *v = -*v);
        }
    }
    let max_abs = columns.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(max_abs > 0.0 && max_abs.is_finite()) {
        return None;
    }
    let scale = INIT_SCALE / max_abs;
    Some(
        (0..n)
            .flat_map(|i| columns.iter().map(move |col| col[i] * scale))
            .collect(),
    )
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `-ln phi` for a pair that should be close.
pub fn attractive_loss(params: CurveParams, yi: &[f64], yj: &[f64]) -> f64 {
    (params.a * squared_distance(yi, yj).powf(params.b)).ln_1p()
}

/// Gradient of [`attractive_loss`] with respect to `yi`.
pub fn attractive_gradient(params: CurveParams, yi: &[f64], yj: &[f64]) -> Vec<f64> {
    let s = squared_distance(yi, yj);
    if s == 0.0 {
        return vec![0.0; yi.len()];
    }
    let CurveParams { a, b } = params;
    let coeff = 2.0 * a * b * s.powf(b - 1.0) / (1.0 + a * s.powf(b));
    yi.iter().zip(yj).map(|(x, y)| coeff * (x - y)).collect()
}

/// `-ln(1 - phi)` for a pair that should be apart.
pub fn repulsive_loss(params: CurveParams, yi: &[f64], yk: &[f64]) -> f64 {
    -(1.0 - params.phi_sq(squared_distance(yi, yk))).ln()
}

/// Gradient of [`repulsive_loss`] with respect to `yi`.
pub fn repulsive_gradient(params: CurveParams, yi: &[f64], yk: &[f64]) -> Vec<f64> {
    let s = squared_distance(yi, yk);
    let CurveParams { a, b } = params;
    let coeff = -2.0 * b / (s * (1.0 + a * s.powf(b)));
    yi.iter().zip(yk).map(|(x, y)| coeff * (x - y)).collect()
}

fn clip(g: f64) -> f64 {
    g.clamp(-GRADIENT_CLIP, GRADIENT_CLIP)
}

/// Sequential stochastic gradient descent on the cross-entropy.
///
/// Each epoch visits the edges in `(i, j)` order. An edge is updated with
/// probability `mu / max(mu)`: both endpoints move toward each other, then
/// one endpoint (chosen at random) is pushed away from five uniformly drawn
/// points. The learning rate falls linearly from 1 to 0 and every gradient
/// coordinate is clipped to `[-4, 4]`.
pub fn optimize_layout(
    init: &Embedding,
    graph: &FuzzyGraph,
    params: CurveParams,
    epochs: usize,
    seed: u64,
) -> Result<Embedding> {
    if epochs == 0 {
        return Err(Error::InvalidConfig("epochs must be at least 1".into()));
    }
    if init.n != graph.n_points() {
        return Err(Error::DimensionMismatch {
            left: init.n,
            right: graph.n_points(),
        });
    }
    let (n, dim) = (init.n, init.dim);
    let mut y = init.coords.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_mu = graph.edges().iter().map(|e| e.mu).fold(0.0, f64::max);
    let mut grad = vec![0.0; dim];

    for epoch in 0..epochs {
        let alpha = 1.0 - epoch as f64 / epochs as f64;
        for e in graph.edges() {
            if rng.random::<f64>() * max_mu >= e.mu {
                continue;
            }
            let (i, j) = (e.i, e.j);
            let s = squared_distance(&y[i * dim..(i + 1) * dim], &y[j * dim..(j + 1) * dim]);
            if s > 0.0 {
                let g = attractive_gradient(params, &y[i * dim..(i + 1) * dim], &y[j * dim..(j + 1) * dim]);
                for d in 0..dim {
                    let step = alpha * clip(g[d]);
                    y[i * dim + d] -= step;
                    y[j * dim + d] += step;
                }
            }

            let head = if rng.random::<bool>() { i } else { j };
            for _ in 0..NEGATIVE_SAMPLES {
                let other = rng.random_range(0..n);
                if other == head {
                    continue;
                }
                let yh = &y[head * dim..(head + 1) * dim];
                let yo = &y[other * dim..(other + 1) * dim];
                if squared_distance(yh, yo) > 0.0 {
                    let g = repulsive_gradient(params, yh, yo);
                    grad.copy_from_slice(&g);
                } else {
                    grad.iter_mut().for_each(|g| *g = -GRADIENT_CLIP);
                }
                for d in 0..dim {
                    y[head * dim + d] -= alpha * clip(grad[d]);
                }
            }
        }
    }

    let mut out = Embedding {
        n,
        dim,
        coords: y,
        init: init.init,
        epochs,
        cross_entropy: None,
    };
    out.cross_entropy = Some(cross_entropy(graph, &out, params));
    Ok(out)
}

/// Binary cross-entropy of one edge with membership `mu` and similarity `nu`,
/// after clamping `mu <= 1 - 1e-6` and `nu` into `[1e-12, 1 - 1e-12]`.
pub fn edge_cross_entropy(mu: f64, nu: f64) -> f64 {
    let mu = mu.min(1.0 - MEMBERSHIP_CLAMP);
    let nu = nu.clamp(NU_FLOOR, 1.0 - NU_FLOOR);
    mu * (mu / nu).ln() + (1.0 - mu) * ((1.0 - mu) / (1.0 - nu)).ln()
}

/// Sum of [`edge_cross_entropy`] over the edges of `graph`.
pub fn cross_entropy(graph: &FuzzyGraph, emb: &Embedding, params: CurveParams) -> f64 {
    graph
        .edges()
        .iter()
        .map(|e| {
            let nu = params.phi_sq(squared_distance(emb.point(e.i), emb.point(e.j)));
            edge_cross_entropy(e.mu, nu)
        })
        .sum()
}
