//! JSON and CSV documents emitted by the command line.
//!
//! Floats are written in their shortest round-trip form, so equal values
//! always serialize to equal bytes.

use serde::Serialize;

use crate::data::{DataTable, PipelineConfig};
use crate::embedding::{Embedding, InitMethod};
use crate::error::Result;
use crate::local_metric::{Clamp, Edge};
use crate::neighbors::NeighborLists;
use crate::pipeline::{LocalStructure, PipelineOutput};
use crate::stats::{CircleVariable, CorrelationCircle};
use crate::topology::SweepPoint;

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    #[serde(flatten)]
    pub pipeline: PipelineConfig,
    pub orthogonalize: bool,
    pub baseline_pearson: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MeanSummary {
    pub label: String,
    pub index: usize,
    pub coordinates: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CircleSummary {
    pub variables: Vec<CircleVariable>,
    pub orthogonalized: bool,
    pub warnings: Vec<String>,
}

impl From<&CorrelationCircle> for CircleSummary {
    fn from(c: &CorrelationCircle) -> Self {
        Self {
            variables: c.variables.clone(),
            orthogonalized: c.orthogonalized,
            warnings: c.warnings.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EmbeddingSummary {
    pub init: InitMethod,
    pub epochs: usize,
    pub a: f64,
    pub b: f64,
    pub initial_cross_entropy: f64,
    pub final_cross_entropy: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub min_eigenvalue_s: f64,
    pub max_circle_norm_squared: f64,
    /// Variables whose Pearson arrow leaves the unit disk (baseline mode only).
    pub pearson_violations: Vec<String>,
}

/// Full output of the `stats` command.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: ConfigEcho,
    pub mean: MeanSummary,
    pub rho: Vec<f64>,
    #[serde(rename = "S")]
    pub s: Vec<Vec<f64>>,
    #[serde(rename = "R")]
    pub r: Vec<Vec<f64>>,
    pub circle: CircleSummary,
    pub embedding: EmbeddingSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pearson_baseline: Option<CircleSummary>,
    pub diagnostics: Diagnostics,
}

impl RunReport {
    pub fn new(out: &PipelineOutput, pearson: Option<&CorrelationCircle>) -> Self {
        Self {
            config: ConfigEcho {
                pipeline: out.config.clone(),
                orthogonalize: out.circle.orthogonalized,
                baseline_pearson: pearson.is_some(),
            },
            mean: MeanSummary {
                label: out.table.row_labels()[out.mean.index].clone(),
                index: out.mean.index,
                coordinates: out.mean.g.clone(),
                objective: out.mean.objective,
            },
            rho: out.covariance.rho.clone(),
            s: out.covariance.s.clone(),
            r: out.correlation.clone(),
            circle: (&out.circle).into(),
            embedding: EmbeddingSummary {
                init: out.layout.embedding.init,
                epochs: out.layout.embedding.epochs,
                a: out.layout.curve.a,
                b: out.layout.curve.b,
                initial_cross_entropy: out.layout.initial_cross_entropy,
                final_cross_entropy: out.layout.embedding.cross_entropy,
            },
            pearson_baseline: pearson.map(Into::into),
            diagnostics: Diagnostics {
                min_eigenvalue_s: out.covariance.min_eigenvalue(),
                max_circle_norm_squared: out.circle.max_squared_norm(),
                pearson_violations: pearson.map_or_else(Vec::new, |p| p.outside_unit_disk()),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NeighborEntry {
    pub index: usize,
    pub label: String,
    pub distance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PointNeighbors {
    pub label: String,
    pub neighbors: Vec<NeighborEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct KnnReport {
    pub k: usize,
    pub points: Vec<PointNeighbors>,
}

impl KnnReport {
    pub fn new(table: &DataTable, nbrs: &NeighborLists) -> Self {
        let labels = table.row_labels();
        Self {
            k: nbrs.k(),
            points: nbrs
                .iter()
                .enumerate()
                .map(|(i, list)| PointNeighbors {
                    label: labels[i].clone(),
                    neighbors: list
                        .iter()
                        .map(|nb| NeighborEntry {
                            index: nb.index,
                            label: labels[nb.index].clone(),
                            distance: nb.distance,
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PointScale {
    pub label: String,
    pub rho: f64,
    pub sigma: f64,
    pub clamp: Clamp,
    /// Directed memberships `(j, w_ij)`.
    pub memberships: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GraphReport {
    pub k: usize,
    pub metric_mode: crate::MetricMode,
    pub points: Vec<PointScale>,
    pub edges: Vec<Edge>,
    pub components: usize,
    pub distances: Vec<Vec<f64>>,
}

impl GraphReport {
    pub fn new(table: &DataTable, local: &LocalStructure) -> Self {
        Self {
            k: local.neighbors.k(),
            metric_mode: local.distances.mode(),
            points: (0..table.n_rows())
                .map(|i| PointScale {
                    label: table.row_labels()[i].clone(),
                    rho: local.scales.rho[i],
                    sigma: local.scales.sigma[i],
                    clamp: local.scales.clamp[i],
                    memberships: local.graph.directed(i).to_vec(),
                })
                .collect(),
            edges: local.connected.edges().to_vec(),
            components: local.graph.components().len(),
            distances: local.distances.to_rows(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TopologyReport {
    pub points: usize,
    pub sweep: Vec<SweepPoint>,
}

/// Embedding coordinates as CSV with the table's row labels and `C1..Cd` headers.
pub fn embedding_csv(table: &DataTable, emb: &Embedding) -> Result<Vec<u8>> {
    let labelled = DataTable::new(
        emb.to_rows(),
        table.row_labels().to_vec(),
        (1..=emb.dim()).map(|r| format!("C{r}")).collect(),
    )?;
    let mut buf = Vec::new();
    labelled.to_csv(&mut buf)?;
    Ok(buf)
}

/// Pretty-printed JSON followed by a newline.
pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut buf = serde_json::to_vec_pretty(value).expect("report types serialize");
    buf.push(b'\n');
    buf
}
