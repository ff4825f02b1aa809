//! The explore-then-seed loop and its comparison arms.
//!
//! Every run starts from the same seed-derived initial subgraph, so methods
//! sharing a seed are paired. Selection never looks at the hidden graph;
//! only the final evaluation of the chosen seeds does.

use alloc::vec::Vec;

use crate::data::{mask_features, DatasetBundle};
use crate::diffusion::{
    estimate_spread, modified_greedy, DiffusionConfig, MonteCarlo, SpreadEstimate,
};
use crate::graph::{FeatureMatrix, NodeId};
use crate::graphgen::{prune_confident, ReinforcedGraph};
use crate::inference::{
    build_training_pairs, fit, infer_all, EdgeModel, EdgeProbabilityMap, LogisticModel,
    SiameseConfig, SiameseModel, SplitMode, TrainConfig,
};
use crate::oracle::{HiddenGraphOracle, ObservedState, INITIAL_SUBGRAPH_SIZE};
use crate::rng;
use crate::select::{
    anchor_seeds, baseline_select, rank_degree_ablation, rank_nodes, select_query_node,
    BaselineStrategy,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Siamese inference with topology-aware ranking.
    ImMeta,
    /// Logistic-regression inference with topology-aware ranking.
    ImMetaLr,
    /// Siamese inference with estimated-degree ranking.
    ImMetaDegree,
    Baseline(BaselineStrategy),
    /// Greedy on the fully known graph.
    Upper,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::ImMeta,
        Method::ImMetaLr,
        Method::ImMetaDegree,
        Method::Baseline(BaselineStrategy::Rand),
        Method::Baseline(BaselineStrategy::Dfs),
        Method::Baseline(BaselineStrategy::Change),
        Method::Upper,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::ImMeta => "im-meta",
            Method::ImMetaLr => "im-meta-lr",
            Method::ImMetaDegree => "im-meta-degree",
            Method::Baseline(s) => s.name(),
            Method::Upper => "upper",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub method: Method,
    /// Query budget `T`.
    pub queries: usize,
    /// Seed count `k`.
    pub seeds: usize,
    /// Diffusion model; `replicates` is the evaluation `R`.
    pub diffusion: DiffusionConfig,
    /// Replicates for greedy selection; `None` uses the evaluation count.
    pub selection_replicates: Option<usize>,
    pub alpha: f64,
    pub epsilon: f64,
    /// Keep at most this many confident edges.
    pub h_cap: Option<usize>,
    /// Score only the top this-many uncertain pairs.
    pub theta_cap: Option<usize>,
    /// Fraction of feature positions zeroed per node.
    pub feature_drop: f64,
    pub train: TrainConfig,
    pub siamese: SiameseConfig,
    pub neg_ratio: f64,
    pub split: SplitMode,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            method: Method::ImMeta,
            queries: 15,
            seeds: 5,
            diffusion: DiffusionConfig::default(),
            selection_replicates: None,
            alpha: 1.0,
            epsilon: 0.5,
            h_cap: None,
            theta_cap: None,
            feature_drop: 0.0,
            train: TrainConfig::default(),
            siamese: SiameseConfig::default(),
            neg_ratio: 1.0,
            split: SplitMode::Pairs,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.diffusion.validate()?;
        if self.seeds == 0 {
            return Err(Error::Config("seed count k must be at least 1".into()));
        }
        if self.alpha.is_nan() || self.alpha < 0.0 {
            return Err(Error::Config(alloc::format!(
                "alpha = {} must be non-negative",
                self.alpha
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Config(alloc::format!(
                "epsilon = {} outside (0, 1)",
                self.epsilon
            )));
        }
        if !(0.0..1.0).contains(&self.feature_drop) {
            return Err(Error::Config(alloc::format!(
                "feature drop {} outside [0, 1)",
                self.feature_drop
            )));
        }
        if self.selection_replicates == Some(0) {
            return Err(Error::Config(
                "selection replicates must be positive".into(),
            ));
        }
        Ok(())
    }

    fn selection_replicates(&self) -> usize {
        self.selection_replicates
            .unwrap_or(self.diffusion.replicates)
    }
}

/// State after one query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepTrace {
    /// Queries executed so far.
    pub t: usize,
    pub observed: usize,
    pub edges: usize,
    pub selected: NodeId,
    /// Confident edges in the reinforced graph that guided the choice.
    pub confident: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub state: ObservedState,
    pub seeds: Vec<NodeId>,
    pub sigma: SpreadEstimate,
    pub trace: Vec<StepTrace>,
    /// Set when no queryable node remained before the budget ran out.
    pub exhausted: bool,
}

mod tag {
    pub const INIT: u64 = 1;
    pub const MODEL: u64 = 2;
    pub const TRAIN: u64 = 3;
    pub const BASELINE: u64 = 4;
    pub const GREEDY: u64 = 5;
    pub const EVAL: u64 = 6;
    pub const MASK: u64 = 7;
}

/// Runs `config.method` on `data`.
pub fn run(config: &RunConfig, data: &DatasetBundle) -> Result<RunOutcome> {
    match config.method {
        Method::Upper => run_upper(config, data),
        Method::Baseline(_) => run_baseline(config, data),
        _ => run_im_meta(config, data),
    }
}

fn features_for(config: &RunConfig, data: &DatasetBundle) -> Result<FeatureMatrix> {
    if config.feature_drop == 0.0 {
        return Ok(data.features.clone());
    }
    let mut r = rng::seeded(rng::derive(config.seed, &[tag::MASK]));
    mask_features(&data.features, config.feature_drop, &mut r)
}

fn start(config: &RunConfig, data: &DatasetBundle) -> Result<(HiddenGraphOracle, ObservedState)> {
    config.validate()?;
    let features = features_for(config, data)?;
    let oracle = HiddenGraphOracle::new(data.graph.clone(), features, config.queries)?;
    let mut r = rng::seeded(rng::derive(config.seed, &[tag::INIT]));
    let state = oracle.init_observed(&mut r, INITIAL_SUBGRAPH_SIZE.min(data.graph.node_count()))?;
    Ok((oracle, state))
}

/// Greedy on `graph` over the observed nodes, then Monte-Carlo evaluation on
/// the hidden graph. `k` is clamped to the number of eligible nodes.
fn seed_and_evaluate(
    config: &RunConfig,
    data: &DatasetBundle,
    graph: &ReinforcedGraph,
    eligible: &[NodeId],
) -> Result<(Vec<NodeId>, SpreadEstimate)> {
    let k = config.seeds.min(eligible.len());
    let mc = MonteCarlo::new(
        graph.arcs(),
        config.selection_replicates(),
        rng::derive(config.seed, &[tag::GREEDY]),
    )?;
    let seeds = modified_greedy(&mc, k, eligible)?;
    let truth = ReinforcedGraph::observed_only(&data.graph, &config.diffusion)?;
    let sigma = estimate_spread(
        truth.arcs(),
        &seeds,
        config.diffusion.replicates,
        rng::derive(config.seed, &[tag::EVAL]),
    )?;
    Ok((seeds, sigma))
}

/// The learning side of the loop: a pair model warm-started across steps.
struct Learner {
    model: EdgeModel,
    config: RunConfig,
}

impl Learner {
    fn new(config: &RunConfig, dim: usize) -> Result<Self> {
        let model = match config.method {
            Method::ImMetaLr => EdgeModel::Logistic(LogisticModel::new(dim)),
            _ => {
                let mut r = rng::seeded(rng::derive(config.seed, &[tag::MODEL]));
                EdgeModel::Siamese(SiameseModel::new(dim, &config.siamese, &mut r)?)
            }
        };
        Ok(Self {
            model,
            config: config.clone(),
        })
    }

    /// Trains on the current labels and scores the uncertain pairs. Without
    /// both positive and negative labels nothing is trained and `Θ` is empty.
    fn infer(
        &mut self,
        state: &ObservedState,
        features: &FeatureMatrix,
    ) -> Result<EdgeProbabilityMap> {
        let mut r = rng::seeded(rng::derive(
            self.config.seed,
            &[tag::TRAIN, state.step() as u64],
        ));
        let set =
            match build_training_pairs(state, &mut r, self.config.neg_ratio, self.config.split) {
                Ok(set) if !set.positives_only => set,
                Ok(_) | Err(Error::TrainingSkipped(_)) => {
                    return Ok(EdgeProbabilityMap::empty(state.step()))
                }
                Err(e) => return Err(e),
            };
        fit(&mut self.model, features, &set, &self.config.train, &mut r)?;
        Ok(infer_all(
            &self.model,
            state,
            features,
            self.config.theta_cap,
        ))
    }

    fn reinforced(
        &mut self,
        state: &ObservedState,
        features: &FeatureMatrix,
    ) -> Result<ReinforcedGraph> {
        let theta = self.infer(state, features)?;
        let confident = prune_confident(&theta, self.config.epsilon, self.config.h_cap);
        ReinforcedGraph::build(state.edges(), &confident, &self.config.diffusion)
    }
}

/// Query-select-infer loop for the three learned methods, then greedy on the
/// final reinforced graph restricted to the explored nodes.
pub fn run_im_meta(config: &RunConfig, data: &DatasetBundle) -> Result<RunOutcome> {
    run_im_meta_with(config, data, |graph, state| match config.method {
        Method::ImMetaDegree => rank_degree_ablation(graph, state),
        _ => {
            let anchors = anchor_seeds(
                graph,
                state,
                config.seeds,
                config.diffusion.discount_probability(),
            )?;
            rank_nodes(graph, state, &anchors, config.alpha)
        }
    })
}

/// [`run_im_meta`] with the per-step candidate scoring supplied by `rank`;
/// the highest score is queried, ties going to the smaller id.
pub fn run_im_meta_with<F>(
    config: &RunConfig,
    data: &DatasetBundle,
    mut rank: F,
) -> Result<RunOutcome>
where
    F: FnMut(&ReinforcedGraph, &ObservedState) -> Result<Vec<(NodeId, f64)>>,
{
    let (mut oracle, mut state) = start(config, data)?;
    let features = oracle.features().clone();
    let mut learner = Learner::new(config, features.dim())?;
    let mut trace = Vec::new();
    let mut exhausted = false;
    for _ in 0..config.queries {
        let graph = learner.reinforced(&state, &features)?;
        let scores = match rank(&graph, &state) {
            Err(Error::ExplorationExhausted) => {
                exhausted = true;
                break;
            }
            other => other?,
        };
        let Some(v) = select_query_node(&scores) else {
            exhausted = true;
            break;
        };
        oracle.query(&mut state, v)?;
        trace.push(StepTrace {
            t: state.step(),
            observed: state.observed_count(),
            edges: state.edges().edge_count(),
            selected: v,
            confident: graph.confident_count(),
        });
    }
    let graph = learner.reinforced(&state, &features)?;
    let (seeds, sigma) = seed_and_evaluate(config, data, &graph, &state.observed_nodes())?;
    Ok(RunOutcome {
        state,
        seeds,
        sigma,
        trace,
        exhausted,
    })
}

/// Baseline exploration, then greedy on the observed subgraph alone with the
/// true model's probabilities (WC uses observed degrees).
pub fn run_baseline(config: &RunConfig, data: &DatasetBundle) -> Result<RunOutcome> {
    let Method::Baseline(strategy) = config.method else {
        return Err(Error::Config(alloc::format!(
            "{} is not a baseline",
            config.method.name()
        )));
    };
    let (mut oracle, mut state) = start(config, data)?;
    let mut r = rng::seeded(rng::derive(config.seed, &[tag::BASELINE]));
    let mut trace = Vec::new();
    let mut exhausted = false;
    for _ in 0..config.queries {
        let v = match baseline_select(strategy, &state, &mut r) {
            Err(Error::ExplorationExhausted) => {
                exhausted = true;
                break;
            }
            other => other?,
        };
        oracle.query(&mut state, v)?;
        trace.push(StepTrace {
            t: state.step(),
            observed: state.observed_count(),
            edges: state.edges().edge_count(),
            selected: v,
            confident: 0,
        });
    }
    let graph = ReinforcedGraph::observed_only(state.edges(), &config.diffusion)?;
    let (seeds, sigma) = seed_and_evaluate(config, data, &graph, &state.observed_nodes())?;
    Ok(RunOutcome {
        state,
        seeds,
        sigma,
        trace,
        exhausted,
    })
}

/// Greedy over the whole hidden graph with no queries: the ceiling.
pub fn run_upper(config: &RunConfig, data: &DatasetBundle) -> Result<RunOutcome> {
    config.validate()?;
    let n = data.graph.node_count();
    let graph = ReinforcedGraph::observed_only(&data.graph, &config.diffusion)?;
    let all: Vec<NodeId> = (0..n).collect();
    let (seeds, sigma) = seed_and_evaluate(config, data, &graph, &all)?;
    let edges: Vec<(NodeId, NodeId)> = data.graph.edges().collect();
    Ok(RunOutcome {
        state: ObservedState::from_parts(n, &all, &edges, &[])?,
        seeds,
        sigma,
        trace: Vec::new(),
        exhausted: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::SyntheticConfig;
    use crate::diffusion::{DiffusionModel, IcProbability};
    use crate::graph::UndirectedGraph;

    fn small_data(seed: u64) -> DatasetBundle {
        let mut cfg = SyntheticConfig::new(60, 12, 4, 0.25, 0.01);
        cfg.noise_density = 0.2;
        cfg.generate(&mut rng::seeded(seed)).unwrap()
    }

    fn quick(method: Method) -> RunConfig {
        RunConfig {
            method,
            queries: 4,
            seeds: 3,
            diffusion: DiffusionConfig {
                replicates: 300,
                ..DiffusionConfig::default()
            },
            selection_replicates: Some(100),
            train: TrainConfig {
                epochs: 3,
                ..TrainConfig::default()
            },
            siamese: SiameseConfig {
                hidden: alloc::vec![16],
                embedding: 8,
            },
            seed: 7,
            ..RunConfig::default()
        }
    }

    #[test]
    fn defaults() {
        let c = RunConfig::default();
        assert_eq!(
            (c.alpha, c.epsilon, c.diffusion.replicates),
            (1.0, 0.5, 20_000)
        );
        assert_eq!(c.diffusion.ic_probability, IcProbability::Constant(0.1));
        for m in Method::ALL {
            assert_eq!(Method::parse(m.name()), Some(m));
        }
    }

    #[test]
    fn every_method_runs_and_respects_invariants() {
        let data = small_data(1);
        for m in Method::ALL {
            let out = run(&quick(m), &data).unwrap();
            assert_eq!(out.seeds.len(), 3, "{}", m.name());
            assert!(out.sigma.mean >= 3.0 && out.sigma.mean <= 60.0);
            assert!(out.trace.len() <= 4);
            if m != Method::Upper {
                assert!(out.seeds.iter().all(|&s| out.state.is_observed(s)));
                assert_eq!(out.trace.len(), out.state.queried_nodes().len());
            }
            for w in out.trace.windows(2) {
                assert!(w[0].observed <= w[1].observed);
            }
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let data = small_data(2);
        for m in [Method::ImMeta, Method::Baseline(BaselineStrategy::Change)] {
            assert_eq!(
                run(&quick(m), &data).unwrap(),
                run(&quick(m), &data).unwrap()
            );
        }
    }

    #[test]
    fn zero_queries_share_initial_subgraph() {
        let data = small_data(3);
        let mut a = quick(Method::ImMeta);
        a.queries = 0;
        let mut b = quick(Method::Baseline(BaselineStrategy::Rand));
        b.queries = 0;
        let (ra, rb) = (run(&a, &data).unwrap(), run(&b, &data).unwrap());
        assert_eq!(ra.state.observed_nodes(), rb.state.observed_nodes());
        assert!(ra.trace.is_empty());
        assert_eq!(ra.seeds.len(), 3);
    }

    #[test]
    fn fully_observed_tiny_graph() {
        let g = UndirectedGraph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let data = DatasetBundle::new("path", g, FeatureMatrix::empty(4, 3)).unwrap();
        let mut c = quick(Method::ImMeta);
        c.seeds = 1;
        c.queries = 0;
        c.diffusion.ic_probability = IcProbability::Constant(1.0);
        let out = run(&c, &data).unwrap();
        assert_eq!(out.sigma.mean, 4.0);
    }

    #[test]
    fn exploration_stops_when_nothing_is_left() {
        let g = UndirectedGraph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let data = DatasetBundle::new("path", g, FeatureMatrix::empty(5, 3)).unwrap();
        let mut c = quick(Method::Baseline(BaselineStrategy::Rand));
        c.queries = 20;
        let out = run(&c, &data).unwrap();
        assert!(out.exhausted);
        assert_eq!(out.trace.len(), 5);
        let mut c = quick(Method::ImMeta);
        c.queries = 20;
        assert!(run(&c, &data).unwrap().exhausted);
    }

    #[test]
    fn upper_ceiling_cases() {
        let g = UndirectedGraph::from_edges(6, [(0, 1), (1, 2), (3, 4)]).unwrap();
        let data = DatasetBundle::new("forest", g, FeatureMatrix::empty(6, 2)).unwrap();
        let mut c = quick(Method::Upper);
        c.seeds = 3;
        c.diffusion.ic_probability = IcProbability::Constant(1.0);
        assert_eq!(run(&c, &data).unwrap().sigma.mean, 6.0);
        c.seeds = 6;
        c.diffusion.ic_probability = IcProbability::Constant(0.1);
        c.diffusion.model = DiffusionModel::Wc;
        assert_eq!(run(&c, &data).unwrap().sigma.mean, 6.0);
    }

    #[test]
    fn alpha_zero_equals_residual_ranking() {
        let data = small_data(4);
        let mut c = quick(Method::ImMeta);
        c.alpha = 0.0;
        let out = run(&c, &data).unwrap();
        assert!(!out.trace.is_empty());
    }
}
