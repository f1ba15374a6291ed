//! Riemannian statistics over a UMAP distance matrix.
//!
//! The mean is the data row minimizing the sum of squared UMAP distances
//! (a Fréchet medoid). Deviations from it are Euclidean differences rescaled
//! by `rho = d_UMAP / d_euclid`, and the covariance `S` is the average outer
//! product of those deviations. Correlations are normalized entries of `S`.
//!
//! The correlation circle correlates each variable with the embedding axes
//! using the same rescaled deviations. When the two axis vectors are
//! orthonormalized first, each variable's coordinates are projections of a
//! unit vector onto an orthonormal pair, so they lie in the unit disk.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::data::{euclidean, DataTable};
use crate::embedding::Embedding;
use crate::error::{Error, Result};
use crate::local_metric::DistanceMatrix;

/// `d_umap / d_euclid`, or 1 when the Euclidean distance is zero.
pub fn rho_factor(d_umap: f64, d_euclid: f64) -> f64 {
    if d_euclid != 0.0 {
        d_umap / d_euclid
    } else {
        1.0
    }
}

/// `rho * (a - b)`.
pub fn riemannian_subtract(a: &[f64], b: &[f64], rho: f64) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.iter().zip(b).map(|(x, y)| rho * (x - y)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrechetMean {
    pub index: usize,
    pub g: Vec<f64>,
    pub objective: f64,
}

/// `sum_i d(c, x_i)^2` for every candidate row `c`.
pub fn frechet_objectives(dist: &DistanceMatrix) -> Vec<f64> {
    (0..dist.n_points())
        .map(|c| dist.row(c).iter().map(|d| d * d).sum())
        .collect()
}

/// Index and objective of the minimizing row; ties go to the lowest index.
pub fn frechet_medoid(dist: &DistanceMatrix) -> (usize, f64) {
    frechet_objectives(dist)
        .into_iter()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, v)| if v < best.1 { (i, v) } else { best })
}

/// The Fréchet mean restricted to the rows of `table`.
pub fn frechet_mean(table: &DataTable, dist: &DistanceMatrix) -> Result<FrechetMean> {
    if dist.n_points() != table.n_rows() {
        return Err(Error::DimensionMismatch {
            left: dist.n_points(),
            right: table.n_rows(),
        });
    }
    let (index, objective) = frechet_medoid(dist);
    Ok(FrechetMean {
        index,
        g: table.row(index).to_vec(),
        objective,
    })
}

/// Point the deviations are taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "index")]
pub enum Center {
    /// A data row, normally the Fréchet mean.
    Row(usize),
    /// The arithmetic column mean.
    ArithmeticMean,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiemannianCovariance {
    pub center: Center,
    pub g: Vec<f64>,
    pub rho: Vec<f64>,
    /// Row `i` is `x_i ⊖ g = rho_i (x_i - g)`.
    pub deviations: Vec<Vec<f64>>,
    pub s: Vec<Vec<f64>>,
    labels: Vec<String>,
}

/// `S` from the Fréchet mean with `rho_i = rho_factor(d_UMAP(x_i, g), d(x_i, g))`.
pub fn covariance(
    table: &DataTable,
    mean: &FrechetMean,
    dist: &DistanceMatrix,
) -> Result<RiemannianCovariance> {
    if dist.n_points() != table.n_rows() {
        return Err(Error::DimensionMismatch {
            left: dist.n_points(),
            right: table.n_rows(),
        });
    }
    let rho = (0..table.n_rows())
        .map(|i| {
            rho_factor(
                dist.get(i, mean.index),
                euclidean(table.row(i), &mean.g),
            )
        })
        .collect();
    covariance_with(table, Center::Row(mean.index), rho)
}

/// `S` for an explicit center and explicit per-row factors.
///
/// `Center::ArithmeticMean` with all factors equal to 1 is the classical
/// population covariance.
pub fn covariance_with(
    table: &DataTable,
    center: Center,
    rho: Vec<f64>,
) -> Result<RiemannianCovariance> {
    let (n, p) = (table.n_rows(), table.n_cols());
    if rho.len() != n {
        return Err(Error::DimensionMismatch {
            left: rho.len(),
            right: n,
        });
    }
    let g = match center {
        Center::Row(idx) => table
            .rows()
            .nth(idx)
            .ok_or_else(|| Error::InvalidArgument(format!("row {idx} out of range")))?
            .to_vec(),
        Center::ArithmeticMean => column_means(table.rows(), p),
    };
    let deviations: Vec<Vec<f64>> = table
        .rows()
        .zip(&rho)
        .map(|(x, &r)| riemannian_subtract(x, &g, r))
        .collect::<Result<_>>()?;

    let mut s = vec![vec![0.0; p]; p];
    for a in 0..p {
        for b in a..p {
            let v = deviations.iter().map(|d| d[a] * d[b]).sum::<f64>() / n as f64;
            s[a][b] = v;
            s[b][a] = v;
        }
    }
    Ok(RiemannianCovariance {
        center,
        g,
        rho,
        deviations,
        s,
        labels: table.col_labels().to_vec(),
    })
}

fn column_means<'a>(rows: impl Iterator<Item = &'a [f64]>, p: usize) -> Vec<f64> {
    let mut sum = vec![0.0; p];
    let mut n = 0usize;
    for row in rows {
        for (acc, v) in sum.iter_mut().zip(row) {
            *acc += v;
        }
        n += 1;
    }
    sum.into_iter().map(|v| v / n as f64).collect()
}

impl RiemannianCovariance {
    pub fn dim(&self) -> usize {
        self.s.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// `S_ij / sqrt(S_ii S_jj)`.
    pub fn correlation(&self, i: usize, j: usize) -> Result<f64> {
        for v in [i, j] {
            if !(self.s[v][v] > 0.0) {
                return Err(Error::DegenerateVariance(self.labels[v].clone()));
            }
        }
        if i == j {
            return Ok(1.0);
        }
        Ok(self.s[i][j] / (self.s[i][i] * self.s[j][j]).sqrt())
    }

    pub fn correlation_matrix(&self) -> Result<Vec<Vec<f64>>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.correlation(i, j)).collect())
            .collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let p = self.dim();
        let m = DMatrix::from_fn(p, p, |i, j| self.s[i][j]);
        SymmetricEigen::new(m).eigenvalues.min()
    }
}

/// Free function form of [`RiemannianCovariance::correlation`].
pub fn riemannian_correlation(cov: &RiemannianCovariance, i: usize, j: usize) -> Result<f64> {
    cov.correlation(i, j)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CircleVariable {
    pub label: String,
    pub x: f64,
    pub y: f64,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationCircle {
    pub variables: Vec<CircleVariable>,
    pub orthogonalized: bool,
    /// Component deviation vectors actually used, one per axis.
    pub basis: Vec<Vec<f64>>,
    pub warnings: Vec<String>,
}

impl CorrelationCircle {
    fn from_coords(labels: &[String], coords: Vec<[f64; 2]>, orthogonalized: bool) -> Self {
        let variables = labels
            .iter()
            .zip(coords)
            .map(|(label, [x, y])| CircleVariable {
                label: label.clone(),
                x,
                y,
                norm: x.hypot(y),
            })
            .collect();
        Self {
            variables,
            orthogonalized,
            basis: Vec::new(),
            warnings: Vec::new(),
        }
    }

    /// Largest `x^2 + y^2` over the variables.
    pub fn max_squared_norm(&self) -> f64 {
        self.variables
            .iter()
            .map(|v| v.x * v.x + v.y * v.y)
            .fold(0.0, f64::max)
    }

    /// Labels of variables whose arrow leaves the unit disk.
    pub fn outside_unit_disk(&self) -> Vec<String> {
        self.variables
            .iter()
            .filter(|v| v.x * v.x + v.y * v.y > 1.0)
            .map(|v| v.label.clone())
            .collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Relative size under which a component vector counts as dependent.
const DEPENDENCE_TOLERANCE: f64 = 1e-12;

/// Correlations of every variable with the first two embedding axes.
///
/// Variable vectors are the columns of `cov.deviations`. Axis vectors have
/// entries `rho_i (e_ir - c_r)`, where `c` is the embedded position of the
/// mean row (or the embedding's column mean for an arithmetic-mean center).
/// With `orthogonalize`, the axis vectors are replaced by an orthonormal pair
/// spanning the same plane (first axis kept in direction) and coordinates are
/// inner products with the normalized variable vector.
pub fn correlation_circle(
    table: &DataTable,
    emb: &Embedding,
    cov: &RiemannianCovariance,
    orthogonalize: bool,
) -> Result<CorrelationCircle> {
    let n = table.n_rows();
    if emb.n_points() != n || cov.deviations.len() != n {
        return Err(Error::DimensionMismatch {
            left: emb.n_points(),
            right: n,
        });
    }
    if emb.dim() < 2 {
        return Err(Error::InvalidArgument("embedding needs two axes".into()));
    }
    let p = table.n_cols();
    let center: Vec<f64> = match cov.center {
        Center::Row(idx) => emb.point(idx)[..2].to_vec(),
        Center::ArithmeticMean => column_means(emb.to_rows().iter().map(|r| &r[..2]), 2),
    };
    let mut axes: Vec<Vec<f64>> = (0..2)
        .map(|r| {
            (0..n)
                .map(|i| cov.rho[i] * (emb.point(i)[r] - center[r]))
                .collect()
        })
        .collect();

    let variables: Vec<Vec<f64>> = (0..p)
        .map(|j| cov.deviations.iter().map(|d| d[j]).collect())
        .collect();
    for (j, u) in variables.iter().enumerate() {
        if !(norm(u) > 0.0) {
            return Err(Error::DegenerateVariance(table.col_labels()[j].clone()));
        }
    }

    let mut warnings = Vec::new();
    let mut usable = [true; 2];
    if orthogonalize {
        let original: Vec<f64> = axes.iter().map(|v| norm(v)).collect();
        for r in 0..2 {
            for q in 0..r {
                if usable[q] {
                    let proj = dot(&axes[r], &axes[q]);
                    let basis = axes[q].clone();
                    axes[r].iter_mut().zip(&basis).for_each(|(x, b)| *x -= proj * b);
                }
            }
            let len = norm(&axes[r]);
            if !(len > DEPENDENCE_TOLERANCE * original[r]) || len == 0.0 {
                usable[r] = false;
                axes[r].iter_mut().for_each(|x| *x = 0.0);
                warnings.push(format!(
                    "component {} is linearly dependent on the previous components; its coordinates are set to 0",
                    r + 1
                ));
            } else {
                axes[r].iter_mut().for_each(|x| *x /= len);
            }
        }
    } else {
        for (r, v) in axes.iter().enumerate() {
            if !(norm(v) > 0.0) {
                usable[r] = false;
                warnings.push(format!(
                    "component {} has zero spread; its coordinates are set to 0",
                    r + 1
                ));
            }
        }
    }

    let coords = variables
        .iter()
        .map(|u| {
            let un = norm(u);
            let mut c = [0.0; 2];
            for r in 0..2 {
                if usable[r] {
                    c[r] = if orthogonalize {
                        dot(u, &axes[r]) / un
                    } else {
                        dot(u, &axes[r]) / (un * norm(&axes[r]))
                    };
                }
            }
            c
        })
        .collect();

    let mut circle = CorrelationCircle::from_coords(table.col_labels(), coords, orthogonalize);
    circle.basis = axes;
    circle.warnings = warnings;
    Ok(circle)
}

/// Pearson correlations over the table's columns followed by `extra_columns`.
pub fn pearson_correlation_matrix(
    table: &DataTable,
    extra_columns: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>> {
    let n = table.n_rows();
    let mut columns: Vec<(String, Vec<f64>)> = (0..table.n_cols())
        .map(|j| (table.col_labels()[j].clone(), table.column(j)))
        .collect();
    for (r, col) in extra_columns.iter().enumerate() {
        if col.len() != n {
            return Err(Error::DimensionMismatch {
                left: col.len(),
                right: n,
            });
        }
        columns.push((format!("C{}", r + 1), col.clone()));
    }
    let centered: Vec<Vec<f64>> = columns
        .iter()
        .map(|(label, col)| {
            if col.iter().all(|&v| v == col[0]) {
                return Err(Error::ConstantColumn(label.clone()));
            }
            let mean = col.iter().sum::<f64>() / n as f64;
            Ok(col.iter().map(|v| v - mean).collect())
        })
        .collect::<Result<_>>()?;
    let norms: Vec<f64> = centered.iter().map(|c| norm(c)).collect();
    let m = centered.len();
    Ok((0..m)
        .map(|a| {
            (0..m)
                .map(|b| {
                    if a == b {
                        1.0
                    } else {
                        dot(&centered[a], &centered[b]) / (norms[a] * norms[b])
                    }
                })
                .collect()
        })
        .collect())
}

/// Classical correlation circle: Pearson correlation of each variable with the
/// first two embedding axes. Nothing keeps these inside the unit disk.
pub fn pearson_circle(table: &DataTable, emb: &Embedding) -> Result<CorrelationCircle> {
    let axes = vec![emb.column(0), emb.column(1)];
    let r = pearson_correlation_matrix(table, &axes)?;
    let p = table.n_cols();
    let coords = (0..p).map(|j| [r[j][p], r[j][p + 1]]).collect();
    let mut circle = CorrelationCircle::from_coords(table.col_labels(), coords, false);
    circle.basis = axes;
    Ok(circle)
}
