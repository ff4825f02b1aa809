//! Synthetic homophilous datasets and feature masking.

use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;

use crate::graph::{FeatureMatrix, UndirectedGraph};
use crate::{Error, Result};

/// A graph with its node features.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetBundle {
    pub name: String,
    pub graph: UndirectedGraph,
    pub features: FeatureMatrix,
}

impl DatasetBundle {
    pub fn new(
        name: impl Into<String>,
        graph: UndirectedGraph,
        features: FeatureMatrix,
    ) -> Result<Self> {
        if graph.node_count() != features.node_count() {
            return Err(Error::Input(alloc::format!(
                "graph has {} nodes but features cover {}",
                graph.node_count(),
                features.node_count()
            )));
        }
        Ok(Self {
            name: name.into(),
            graph,
            features,
        })
    }
}

/// Planted-partition generator. Feature positions `0..marker_count` are
/// marker bits; every node carries one uniformly chosen marker, plus each
/// other marker with probability `extra_marker_prob` (`hub_marker_prob` for the
/// `hub_fraction` of nodes drawn as hubs). Remaining positions are
/// independent noise bits set with probability `noise_density`. Pairs that
/// share a marker connect with `edge_prob_in`, others with `edge_prob_out`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub n: usize,
    pub dim: usize,
    pub marker_count: usize,
    pub edge_prob_in: f64,
    pub edge_prob_out: f64,
    pub noise_density: f64,
    pub extra_marker_prob: f64,
    pub hub_fraction: f64,
    pub hub_marker_prob: f64,
}

impl SyntheticConfig {
    pub fn new(
        n: usize,
        dim: usize,
        marker_count: usize,
        edge_prob_in: f64,
        edge_prob_out: f64,
    ) -> Self {
        Self {
            n,
            dim,
            marker_count,
            edge_prob_in,
            edge_prob_out,
            noise_density: 0.1,
            extra_marker_prob: 0.0,
            hub_fraction: 0.0,
            hub_marker_prob: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("edge_prob_in", self.edge_prob_in),
            ("edge_prob_out", self.edge_prob_out),
            ("noise_density", self.noise_density),
            ("extra_marker_prob", self.extra_marker_prob),
            ("hub_fraction", self.hub_fraction),
            ("hub_marker_prob", self.hub_marker_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(alloc::format!("{name} = {p} outside [0, 1]")));
            }
        }
        if self.marker_count == 0 || self.marker_count > self.dim {
            return Err(Error::Config(alloc::format!(
                "marker_count {} must be in 1..={}",
                self.marker_count,
                self.dim
            )));
        }
        Ok(())
    }

    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<DatasetBundle> {
        self.validate()?;
        let mut rows: Vec<Vec<u32>> = Vec::with_capacity(self.n);
        for _ in 0..self.n {
            let hub = self.hub_fraction > 0.0 && rng.gen_bool(self.hub_fraction);
            let extra = if hub {
                self.hub_marker_prob
            } else {
                self.extra_marker_prob
            };
            let primary = rng.gen_range(0..self.marker_count);
            let mut row = Vec::new();
            for m in 0..self.marker_count {
                if m == primary || (extra > 0.0 && rng.gen_bool(extra)) {
                    row.push(m as u32);
                }
            }
            for i in self.marker_count..self.dim {
                if rng.gen_bool(self.noise_density) {
                    row.push(i as u32);
                }
            }
            rows.push(row);
        }
        let markers: Vec<&[u32]> = rows
            .iter()
            .map(|r| marker_prefix(r, self.marker_count))
            .collect();
        let mut graph = UndirectedGraph::new(self.n);
        for u in 0..self.n {
            for v in (u + 1)..self.n {
                let p = if intersects(markers[u], markers[v]) {
                    self.edge_prob_in
                } else {
                    self.edge_prob_out
                };
                if p > 0.0 && rng.gen_bool(p) {
                    graph.add_edge(u, v)?;
                }
            }
        }
        let features = FeatureMatrix::new(self.dim, rows)?;
        DatasetBundle::new("synthetic", graph, features)
    }
}

fn marker_prefix(row: &[u32], marker_count: usize) -> &[u32] {
    &row[..row.partition_point(|&i| (i as usize) < marker_count)]
}

fn intersects(a: &[u32], b: &[u32]) -> bool {
    a.iter().any(|i| b.binary_search(i).is_ok())
}

/// Whether nodes `u` and `v` share a marker bit under `config`.
pub fn same_marker_class(
    config: &SyntheticConfig,
    features: &FeatureMatrix,
    u: usize,
    v: usize,
) -> bool {
    intersects(
        marker_prefix(features.row(u), config.marker_count),
        marker_prefix(features.row(v), config.marker_count),
    )
}

/// [`SyntheticConfig::new`] with default noise and a single marker per node.
pub fn gen_synthetic_homophily<R: Rng + ?Sized>(
    n: usize,
    dim: usize,
    marker_count: usize,
    edge_prob_in: f64,
    edge_prob_out: f64,
    rng: &mut R,
) -> Result<DatasetBundle> {
    SyntheticConfig::new(n, dim, marker_count, edge_prob_in, edge_prob_out).generate(rng)
}

/// Zeroes a uniformly random `⌈fraction·d⌉` positions of each row,
/// independently per node. The dimension is unchanged.
pub fn mask_features<R: Rng + ?Sized>(
    features: &FeatureMatrix,
    fraction: f64,
    rng: &mut R,
) -> Result<FeatureMatrix> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::Config(alloc::format!(
            "mask fraction {fraction} outside [0, 1)"
        )));
    }
    let d = features.dim();
    let drop = libm::ceil(fraction * d as f64) as usize;
    if drop == 0 {
        return Ok(features.clone());
    }
    let mut removed = alloc::vec![false; d];
    let rows = features
        .rows()
        .iter()
        .map(|row| {
            let picked = index::sample(rng, d, drop);
            for i in picked.iter() {
                removed[i] = true;
            }
            let kept = row
                .iter()
                .copied()
                .filter(|&i| !removed[i as usize])
                .collect();
            for i in picked.iter() {
                removed[i] = false;
            }
            kept
        })
        .collect();
    FeatureMatrix::new(d, rows)
}
