//! Reinforced weighted graph generation.
//!
//! The generated adjacency combines observed edges (weight 1), pairs known to
//! be absent (weight 0) and inferred probabilities for everything else. Only
//! *confident* inferred edges, those with `θ ≥ ε`, are kept; the result carries
//! per-arc joint probabilities `Pr(edge exists ∧ activation succeeds)`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::diffusion::{DiffusionConfig, DiffusionModel, IcProbability};
use crate::graph::{NodeId, UndirectedGraph, WeightedDigraph};
use crate::inference::EdgeProbabilityMap;
use crate::oracle::ObservedState;
use crate::rng;
use crate::{Error, Result};

/// How pairs with exactly one queried endpoint and no observed edge are filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdjacencyRule {
    /// Only pairs with both endpoints queried are forced to zero; other
    /// unobserved pairs take their inferred θ (zero when none was inferred).
    #[default]
    Literal,
    /// Any pair with a queried endpoint and no observed edge is zero.
    Disclosed,
}

/// Nonzero entries of the generated adjacency matrix.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GeneratedAdjacency {
    n: usize,
    entries: Vec<(NodeId, NodeId, f64)>,
}

impl GeneratedAdjacency {
    pub fn node_count(&self) -> usize {
        self.n
    }

    /// `a_ij`; zero on the diagonal and for absent pairs.
    pub fn get(&self, i: NodeId, j: NodeId) -> f64 {
        if i == j {
            return 0.0;
        }
        let key = (i.min(j), i.max(j));
        self.entries
            .binary_search_by(|e| (e.0, e.1).cmp(&key))
            .map_or(0.0, |k| self.entries[k].2)
    }

    pub fn nonzero(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        self.entries.iter().copied()
    }
}

/// Builds the generated adjacency from `E_t`, `Q_t` and `Θ`.
pub fn assemble_adjacency(
    state: &ObservedState,
    theta: &EdgeProbabilityMap,
    rule: AdjacencyRule,
) -> Result<GeneratedAdjacency> {
    let mut entries: Vec<(NodeId, NodeId, f64)> =
        state.edges().edges().map(|(u, v)| (u, v, 1.0)).collect();
    for (u, v, t) in theta.iter() {
        if state.edges().has_edge(u, v) {
            return Err(Error::Logic(alloc::format!(
                "inferred probability for observed edge ({u}, {v})"
            )));
        }
        let zero = match rule {
            AdjacencyRule::Literal => state.is_queried(u) && state.is_queried(v),
            AdjacencyRule::Disclosed => state.is_queried(u) || state.is_queried(v),
        };
        if !zero && t > 0.0 {
            entries.push((u, v, t));
        }
    }
    entries.sort_by_key(|a| (a.0, a.1));
    Ok(GeneratedAdjacency {
        n: state.node_count(),
        entries,
    })
}

/// Inferred edges with `θ ≥ ε`, highest first (ties by smaller pair),
/// truncated to `h_cap` when set.
pub fn prune_confident(
    theta: &EdgeProbabilityMap,
    epsilon: f64,
    h_cap: Option<usize>,
) -> Vec<(NodeId, NodeId, f64)> {
    let mut kept: Vec<(NodeId, NodeId, f64)> = theta.iter().filter(|e| e.2 >= epsilon).collect();
    kept.sort_by(|a, b| b.2.total_cmp(&a.2).then((a.0, a.1).cmp(&(b.0, b.1))));
    if let Some(cap) = h_cap {
        kept.truncate(cap);
    }
    kept
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    Observed,
    Confident,
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeKind::Observed => "observed",
            EdgeKind::Confident => "confident",
        })
    }
}

/// Observed edges plus confident inferred edges, with estimated degrees
/// `d̂_v = Σ θ_uv` (θ = 1 on observed edges) and diffusion arcs.
#[derive(Debug, Clone, PartialEq)]
pub struct ReinforcedGraph {
    /// Per node: `(neighbor, θ, kind)` sorted by neighbor.
    adj: Vec<Vec<(NodeId, f64, EdgeKind)>>,
    skeleton: UndirectedGraph,
    est_degree: Vec<f64>,
    confident_count: usize,
    arcs: WeightedDigraph,
}

impl ReinforcedGraph {
    /// Combines `observed` with `confident` edges and assigns diffusion
    /// probabilities under `config`.
    pub fn build(
        observed: &UndirectedGraph,
        confident: &[(NodeId, NodeId, f64)],
        config: &DiffusionConfig,
    ) -> Result<Self> {
        let n = observed.node_count();
        let mut adj: Vec<Vec<(NodeId, f64, EdgeKind)>> = vec![Vec::new(); n];
        let mut skeleton = observed.clone();
        for (u, v) in observed.edges() {
            adj[u].push((v, 1.0, EdgeKind::Observed));
            adj[v].push((u, 1.0, EdgeKind::Observed));
        }
        for &(u, v, t) in confident {
            if observed.has_edge(u, v) {
                return Err(Error::Logic(alloc::format!(
                    "confident edge ({u}, {v}) is already observed"
                )));
            }
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::Input(alloc::format!(
                    "confident θ = {t} outside (0, 1]"
                )));
            }
            if !skeleton.add_edge(u, v)? {
                return Err(Error::Input(alloc::format!(
                    "duplicate confident edge ({u}, {v})"
                )));
            }
            adj[u].push((v, t, EdgeKind::Confident));
            adj[v].push((u, t, EdgeKind::Confident));
        }
        for list in &mut adj {
            list.sort_by_key(|e| e.0);
        }
        let est_degree = adj.iter().map(|l| l.iter().map(|e| e.1).sum()).collect();
        let mut g = Self {
            adj,
            skeleton,
            est_degree,
            confident_count: confident.len(),
            arcs: WeightedDigraph::new(n),
        };
        g.arcs = g.assign_probabilities(config)?;
        Ok(g)
    }

    /// A reinforced graph with no inferred edges.
    pub fn observed_only(observed: &UndirectedGraph, config: &DiffusionConfig) -> Result<Self> {
        Self::build(observed, &[], config)
    }

    /// Joint probabilities per arc. IC: `θ · p`. WC: arc `u → v` gets
    /// `θ_uv / d̂_v`, so arcs into the same node sum to one.
    pub fn assign_probabilities(&self, config: &DiffusionConfig) -> Result<WeightedDigraph> {
        let n = self.adj.len();
        let mut arcs = WeightedDigraph::new(n);
        for (u, list) in self.adj.iter().enumerate() {
            for &(v, t, _) in list {
                let p = match config.model {
                    DiffusionModel::Ic => t * edge_ic_probability(config.ic_probability, u, v),
                    DiffusionModel::Wc => {
                        let d = self.est_degree[v];
                        assert!(
                            d > 0.0,
                            "node {v} has an incident arc but zero estimated degree"
                        );
                        (t / d).min(1.0)
                    }
                };
                arcs.set_arc(u, v, p)?;
            }
        }
        Ok(arcs)
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn arcs(&self) -> &WeightedDigraph {
        &self.arcs
    }

    /// Observed and confident edges as unit-length edges, for geodesics.
    pub fn skeleton(&self) -> &UndirectedGraph {
        &self.skeleton
    }

    /// `H`, the number of confident edges kept.
    pub fn confident_count(&self) -> usize {
        self.confident_count
    }

    pub fn estimated_degree(&self, v: NodeId) -> f64 {
        self.est_degree[v]
    }

    pub fn estimated_degrees(&self) -> &[f64] {
        &self.est_degree
    }

    /// `(neighbor, θ, kind)` for every edge at `u`.
    pub fn weighted_neighbors(&self, u: NodeId) -> &[(NodeId, f64, EdgeKind)] {
        &self.adj[u]
    }

    /// Sum of θ over the confident edges at `u`.
    pub fn confident_weight(&self, u: NodeId) -> f64 {
        self.adj[u]
            .iter()
            .filter(|e| e.2 == EdgeKind::Confident)
            .map(|e| e.1)
            .sum()
    }

    /// One line per arc: `u v prob kind`.
    pub fn write_arc_list<W: fmt::Write>(&self, out: &mut W) -> fmt::Result {
        for (u, list) in self.adj.iter().enumerate() {
            for &(v, _, kind) in list {
                let p = self.arcs.weight(u, v).unwrap_or(0.0);
                writeln!(out, "{u} {v} {p} {kind}")?;
            }
        }
        Ok(())
    }
}

/// The per-edge activation probability under IC. In uniform mode each
/// undirected edge draws its own `U(0, 1)` value from a hash of the seed and
/// the endpoints, so both arcs agree and reruns reproduce it.
pub fn edge_ic_probability(p: IcProbability, u: NodeId, v: NodeId) -> f64 {
    match p {
        IcProbability::Constant(p) => p,
        IcProbability::Uniform { seed } => {
            let h = rng::derive(seed, &[u.min(v) as u64, u.max(v) as u64]);
            (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::String;

    fn ic(p: f64) -> DiffusionConfig {
        DiffusionConfig {
            model: DiffusionModel::Ic,
            ic_probability: IcProbability::Constant(p),
            ..DiffusionConfig::default()
        }
    }

    fn wc() -> DiffusionConfig {
        DiffusionConfig {
            model: DiffusionModel::Wc,
            ..DiffusionConfig::default()
        }
    }

    /// Nodes v1..v4 as 0..3: observed edge (v2, v1), inferred θ_41 = 0.6 and
    /// θ_43 = 0.4.
    fn worked_example() -> (UndirectedGraph, EdgeProbabilityMap) {
        let observed = UndirectedGraph::from_edges(4, [(1, 0)]).unwrap();
        let theta = EdgeProbabilityMap::from_entries(0, [(3, 0, 0.6), (3, 2, 0.4)]).unwrap();
        (observed, theta)
    }

    #[test]
    fn adjacency_cases() {
        let s = ObservedState::from_parts(4, &[], &[(0, 1)], &[0, 2]).unwrap();
        let theta = EdgeProbabilityMap::from_entries(0, [(1, 3, 0.6)]).unwrap();
        let a = assemble_adjacency(&s, &theta, AdjacencyRule::Literal).unwrap();
        assert_eq!(a.get(0, 1), 1.0);
        assert_eq!(a.get(1, 0), 1.0);
        assert_eq!(a.get(0, 2), 0.0);
        assert_eq!(a.get(3, 1), 0.6);
        assert_eq!(a.get(2, 2), 0.0);
    }

    #[test]
    fn adjacency_rules_differ_on_single_queried_endpoint() {
        let s = ObservedState::from_parts(3, &[], &[], &[0]).unwrap();
        let theta = EdgeProbabilityMap::from_entries(0, [(0, 1, 0.7)]).unwrap();
        let lit = assemble_adjacency(&s, &theta, AdjacencyRule::Literal).unwrap();
        let dis = assemble_adjacency(&s, &theta, AdjacencyRule::Disclosed).unwrap();
        assert_eq!(lit.get(0, 1), 0.7);
        assert_eq!(dis.get(0, 1), 0.0);
    }

    #[test]
    fn adjacency_rejects_theta_on_observed_edge() {
        let s = ObservedState::from_parts(3, &[], &[(0, 1)], &[]).unwrap();
        let theta = EdgeProbabilityMap::from_entries(0, [(1, 0, 0.5)]).unwrap();
        assert!(matches!(
            assemble_adjacency(&s, &theta, AdjacencyRule::Literal),
            Err(Error::Logic(_))
        ));
    }

    #[test]
    fn pruning_examples() {
        let (_, theta) = worked_example();
        assert_eq!(prune_confident(&theta, 0.5, None), vec![(0, 3, 0.6)]);
        assert!(prune_confident(&theta, 0.7, None).is_empty());
        let three =
            EdgeProbabilityMap::from_entries(0, [(0, 1, 0.8), (0, 2, 0.9), (1, 2, 0.7)]).unwrap();
        assert_eq!(
            prune_confident(&three, 0.5, Some(2)),
            vec![(0, 2, 0.9), (0, 1, 0.8)]
        );
        let ties =
            EdgeProbabilityMap::from_entries(0, [(2, 3, 0.5), (0, 1, 0.5), (0, 3, 0.5)]).unwrap();
        assert_eq!(
            prune_confident(&ties, 0.5, Some(2)),
            vec![(0, 1, 0.5), (0, 3, 0.5)]
        );
    }

    #[test]
    fn empty_pruning_gives_observed_graph() {
        let (observed, theta) = worked_example();
        let conf = prune_confident(&theta, 0.99, None);
        let g = ReinforcedGraph::build(&observed, &conf, &ic(0.1)).unwrap();
        let base = ReinforcedGraph::observed_only(&observed, &ic(0.1)).unwrap();
        assert_eq!(g, base);
        assert_eq!(g.skeleton(), &observed);
    }

    #[test]
    fn worked_example_wc() {
        let (observed, theta) = worked_example();
        let conf = prune_confident(&theta, 0.5, None);
        let g = ReinforcedGraph::build(&observed, &conf, &wc()).unwrap();
        assert_eq!(g.estimated_degree(0), 1.0 + 0.6);
        assert_eq!(g.arcs().weight(1, 0), Some(1.0 / 1.6));
        assert_eq!(g.arcs().weight(3, 0), Some(0.6 / 1.6));
        // v4's only edge is the confident one: d̂ = 0.6
        assert_eq!(g.arcs().weight(0, 3), Some(1.0));
        assert_eq!(g.confident_count(), 1);
    }

    #[test]
    fn worked_example_ic() {
        let (observed, theta) = worked_example();
        let conf = prune_confident(&theta, 0.5, None);
        let g = ReinforcedGraph::build(&observed, &conf, &ic(0.1)).unwrap();
        assert_eq!(g.arcs().weight(1, 0), Some(0.1));
        assert_eq!(g.arcs().weight(0, 1), Some(0.1));
        assert_eq!(g.arcs().weight(3, 0), Some(0.6 * 0.1));
        assert_eq!(g.arcs().weight(0, 3), Some(0.6 * 0.1));
    }

    #[test]
    fn isolated_observed_edge_wc() {
        let observed = UndirectedGraph::from_edges(3, [(0, 1)]).unwrap();
        let g = ReinforcedGraph::observed_only(&observed, &wc()).unwrap();
        assert_eq!(g.arcs().weight(0, 1), Some(1.0));
        assert_eq!(g.arcs().weight(1, 0), Some(1.0));
    }

    #[test]
    fn confident_edge_may_not_repeat_observed() {
        let observed = UndirectedGraph::from_edges(3, [(0, 1)]).unwrap();
        assert!(matches!(
            ReinforcedGraph::build(&observed, &[(1, 0, 0.9)], &ic(0.1)),
            Err(Error::Logic(_))
        ));
    }

    #[test]
    fn arc_dump_format() {
        let (observed, theta) = worked_example();
        let g = ReinforcedGraph::build(&observed, &prune_confident(&theta, 0.5, None), &ic(0.1))
            .unwrap();
        let mut s = String::new();
        g.write_arc_list(&mut s).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "0 1 0.1 observed");
        assert!(lines.contains(&"3 0 0.06 confident"));
    }

    #[test]
    fn uniform_ic_mode_is_symmetric_and_in_range() {
        let p = IcProbability::Uniform { seed: 5 };
        for u in 0..20 {
            for v in 0..20 {
                let x = edge_ic_probability(p, u, v);
                assert!((0.0..1.0).contains(&x));
                assert_eq!(x, edge_ic_probability(p, v, u));
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_instance() -> impl Strategy<Value = (UndirectedGraph, EdgeProbabilityMap)> {
            (4usize..12).prop_flat_map(|n| {
                let pairs: Vec<(usize, usize)> = (0..n)
                    .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
                    .collect();
                proptest::collection::vec(0u8..3, pairs.len()).prop_flat_map(move |kinds| {
                    let pairs = pairs.clone();
                    proptest::collection::vec(0.01f64..1.0, pairs.len()).prop_map(move |thetas| {
                        let mut g = UndirectedGraph::new(n);
                        let mut entries = Vec::new();
                        for ((&(u, v), &k), &t) in pairs.iter().zip(&kinds).zip(&thetas) {
                            match k {
                                0 => {
                                    g.add_edge(u, v).unwrap();
                                }
                                1 => entries.push((u, v, t)),
                                _ => {}
                            }
                        }
                        (g, EdgeProbabilityMap::from_entries(0, entries).unwrap())
                    })
                })
            })
        }

        proptest! {
            #[test]
            fn wc_incoming_arcs_sum_to_one((g, theta) in arb_instance(), eps in 0.05f64..0.95) {
                let rg = ReinforcedGraph::build(&g, &prune_confident(&theta, eps, None), &wc()).unwrap();
                let mut incoming = vec![0.0; rg.node_count()];
                for (_, v, w) in rg.arcs().arcs() {
                    incoming[v] += w;
                }
                for (v, s) in incoming.iter().enumerate() {
                    if rg.estimated_degree(v) > 0.0 {
                        prop_assert!((s - 1.0).abs() < 1e-12);
                    }
                }
            }

            #[test]
            fn ic_scales_linearly((g, theta) in arb_instance(), p in 0.01f64..0.5) {
                let conf = prune_confident(&theta, 0.3, None);
                let a = ReinforcedGraph::build(&g, &conf, &ic(p)).unwrap();
                let b = ReinforcedGraph::build(&g, &conf, &ic(2.0 * p)).unwrap();
                for ((u, v, wa), (_, _, wb)) in a.arcs().arcs().zip(b.arcs().arcs()) {
                    let t = a.weighted_neighbors(u).iter().find(|e| e.0 == v).unwrap().1;
                    prop_assert!((wa - t * p).abs() < 1e-15);
                    prop_assert!((wb - 2.0 * wa).abs() < 1e-12);
                }
            }

            #[test]
            fn raising_epsilon_never_adds((_g, theta) in arb_instance(), e1 in 0.0f64..1.0, e2 in 0.0f64..1.0) {
                let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
                let small = prune_confident(&theta, hi, None);
                let big = prune_confident(&theta, lo, None);
                for e in &small {
                    prop_assert!(big.contains(e));
                    prop_assert!(e.2 >= hi);
                }
            }

            #[test]
            fn degrees_and_arcs_consistent((g, theta) in arb_instance(), eps in 0.05f64..0.95) {
                let conf = prune_confident(&theta, eps, None);
                let rg = ReinforcedGraph::build(&g, &conf, &ic(0.1)).unwrap();
                for v in 0..rg.node_count() {
                    let expected = g.degree(v) as f64
                        + conf.iter().filter(|e| e.0 == v || e.1 == v).map(|e| e.2).sum::<f64>();
                    prop_assert!((rg.estimated_degree(v) - expected).abs() < 1e-12);
                }
                for (_, _, w) in rg.arcs().arcs() {
                    prop_assert!((0.0..=1.0).contains(&w));
                }
            }
        }
    }
}
