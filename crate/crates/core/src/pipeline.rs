//! End-to-end run: table to correlation circle.

use crate::data::{DataTable, PipelineConfig};
use crate::embedding::{
    cross_entropy, fit_curve, optimize_layout, spectral_init, CurveParams, Embedding,
};
use crate::error::Result;
use crate::local_metric::{
    compute_local_scales, connect_components, fuzzy_memberships, umap_distance_matrix,
    DistanceMatrix, FuzzyGraph, LocalScales,
};
use crate::neighbors::{exact_knn, NeighborLists};
use crate::stats::{
    correlation_circle, covariance, frechet_mean, CorrelationCircle, FrechetMean,
    RiemannianCovariance,
};

/// Neighbor lists, local scales and the fuzzy graph of a table.
#[derive(Debug, Clone)]
pub struct LocalStructure {
    pub neighbors: NeighborLists,
    pub scales: LocalScales,
    /// Graph built from memberships only.
    pub graph: FuzzyGraph,
    /// `graph` with components joined according to the disconnect policy.
    pub connected: FuzzyGraph,
    pub distances: DistanceMatrix,
}

/// Validates `config` and standardizes `table` as configured.
pub fn prepare(table: &DataTable, config: &PipelineConfig) -> Result<DataTable> {
    config.validate(table.n_rows())?;
    table.standardize(config.standardize)
}

/// kNN, calibration, memberships and all-pairs distances on a prepared table.
pub fn local_structure(table: &DataTable, config: &PipelineConfig) -> Result<LocalStructure> {
    let neighbors = exact_knn(table, config.k)?;
    let scales = compute_local_scales(&neighbors);
    let graph = fuzzy_memberships(&neighbors, &scales);
    let connected = connect_components(&graph, table, config.disconnect_policy)?;
    let distances =
        umap_distance_matrix(&graph, config.metric_mode, config.disconnect_policy, table)?;
    Ok(LocalStructure {
        neighbors,
        scales,
        graph,
        connected,
        distances,
    })
}

#[derive(Debug, Clone)]
pub struct Layout {
    pub curve: CurveParams,
    pub initial: Embedding,
    pub initial_cross_entropy: f64,
    pub embedding: Embedding,
}

/// Spectral initialization followed by cross-entropy optimization.
pub fn layout(graph: &FuzzyGraph, config: &PipelineConfig) -> Result<Layout> {
    let curve = fit_curve(config.min_dist, config.spread);
    let initial = spectral_init(graph, config.embedding_dim, config.seed);
    let initial_cross_entropy = cross_entropy(graph, &initial, curve);
    let embedding = optimize_layout(&initial, graph, curve, config.n_epochs, config.seed)?;
    Ok(Layout {
        curve,
        initial,
        initial_cross_entropy,
        embedding,
    })
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub config: PipelineConfig,
    /// The table after standardization.
    pub table: DataTable,
    pub local: LocalStructure,
    pub layout: Layout,
    pub mean: FrechetMean,
    pub covariance: RiemannianCovariance,
    pub correlation: Vec<Vec<f64>>,
    pub circle: CorrelationCircle,
}

/// Runs every stage and returns all intermediate results.
pub fn run_pipeline(table: &DataTable, config: &PipelineConfig) -> Result<PipelineOutput> {
    let table = prepare(table, config)?;
    let local = local_structure(&table, config)?;
    let layout = layout(&local.connected, config)?;
    let mean = frechet_mean(&table, &local.distances)?;
    let covariance = covariance(&table, &mean, &local.distances)?;
    let correlation = covariance.correlation_matrix()?;
    let circle = correlation_circle(&table, &layout.embedding, &covariance, true)?;
    Ok(PipelineOutput {
        config: config.clone(),
        table,
        local,
        layout,
        mean,
        covariance,
        correlation,
        circle,
    })
}
