//! Cascade simulation, spread estimation and seed selection.
//!
//! Monte-Carlo estimates draw every arc coin from a hash of
//! `(seed, replicate, arc)`, so each replicate is a fixed live-edge sample.
//! The estimate is then a deterministic function of the seed set, which makes
//! lazy greedy evaluation agree with plain greedy under the same seed.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::Rng;

use crate::graph::{NodeId, WeightedDigraph};
use crate::graphgen::ReinforcedGraph;
use crate::rng;
use crate::{Error, Result};

/// Largest number of stochastic arcs [`exact_spread`] will enumerate.
pub const EXACT_ARC_BOUND: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiffusionModel {
    #[default]
    Ic,
    Wc,
}

/// Per-edge activation probability under IC.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IcProbability {
    Constant(f64),
    /// Each edge draws its own `U(0, 1)` value, reproducibly from `seed`.
    Uniform {
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionConfig {
    pub model: DiffusionModel,
    pub ic_probability: IcProbability,
    /// Monte-Carlo replicates `R`.
    pub replicates: usize,
}

impl Default for DiffusionConfig {
    fn default() -> Self {
        Self {
            model: DiffusionModel::Ic,
            ic_probability: IcProbability::Constant(0.1),
            replicates: 20_000,
        }
    }
}

impl DiffusionConfig {
    pub fn validate(&self) -> Result<()> {
        if let IcProbability::Constant(p) = self.ic_probability {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::Config(alloc::format!(
                    "IC probability {p} outside (0, 1]"
                )));
            }
        }
        if self.replicates == 0 {
            return Err(Error::Config("replicate count must be positive".into()));
        }
        Ok(())
    }

    /// The scalar `p` used by degree discount (the mean, 0.5, in uniform mode).
    pub fn discount_probability(&self) -> f64 {
        match self.ic_probability {
            IcProbability::Constant(p) => p,
            IcProbability::Uniform { .. } => 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpreadEstimate {
    pub mean: f64,
    pub replicates: usize,
    /// Sample standard deviation over `√R`; zero when `R = 1`.
    pub std_error: f64,
}

fn check_seeds(n: usize, seeds: &[NodeId]) -> Result<()> {
    match seeds.iter().find(|&&s| s >= n) {
        Some(&node) => Err(Error::NodeOutOfRange { node, n }),
        None => Ok(()),
    }
}

/// One discrete-time cascade from `seeds`. Returns the activated nodes in
/// ascending order.
pub fn simulate_cascade<R: Rng + ?Sized>(
    graph: &WeightedDigraph,
    seeds: &[NodeId],
    rng: &mut R,
) -> Result<Vec<NodeId>> {
    check_seeds(graph.node_count(), seeds)?;
    let mut active = vec![false; graph.node_count()];
    let mut frontier = Vec::new();
    for &s in seeds {
        if !active[s] {
            active[s] = true;
            frontier.push(s);
        }
    }
    let mut next = Vec::new();
    while !frontier.is_empty() {
        for &u in &frontier {
            for &(v, p) in graph.out_arcs(u) {
                if !active[v] && rng.gen::<f64>() < p {
                    active[v] = true;
                    next.push(v);
                }
            }
        }
        core::mem::swap(&mut frontier, &mut next);
        next.clear();
    }
    Ok(active
        .iter()
        .enumerate()
        .filter(|e| *e.1)
        .map(|e| e.0)
        .collect())
}

/// Reusable Monte-Carlo spread estimator with hashed live-edge coins.
#[derive(Debug, Clone)]
pub struct MonteCarlo<'g> {
    graph: &'g WeightedDigraph,
    offsets: Vec<usize>,
    replicates: usize,
    seed: u64,
}

impl<'g> MonteCarlo<'g> {
    pub fn new(graph: &'g WeightedDigraph, replicates: usize, seed: u64) -> Result<Self> {
        if replicates == 0 {
            return Err(Error::Config("replicate count must be positive".into()));
        }
        let mut offsets = Vec::with_capacity(graph.node_count() + 1);
        let mut acc = 0;
        for u in 0..graph.node_count() {
            offsets.push(acc);
            acc += graph.out_arcs(u).len();
        }
        offsets.push(acc);
        Ok(Self {
            graph,
            offsets,
            replicates,
            seed,
        })
    }

    pub fn estimate(&self, seeds: &[NodeId]) -> Result<SpreadEstimate> {
        check_seeds(self.graph.node_count(), seeds)?;
        let n = self.graph.node_count();
        let mut stamp = vec![0u32; n];
        let mut stack = Vec::new();
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for r in 0..self.replicates {
            let mark = r as u32 + 1;
            let key = rng::derive(self.seed, &[r as u64]);
            let mut count = 0usize;
            for &s in seeds {
                if stamp[s] != mark {
                    stamp[s] = mark;
                    stack.push(s);
                    count += 1;
                }
            }
            while let Some(u) = stack.pop() {
                let base = self.offsets[u];
                for (j, &(v, p)) in self.graph.out_arcs(u).iter().enumerate() {
                    if stamp[v] != mark && coin(key, base + j) < p {
                        stamp[v] = mark;
                        stack.push(v);
                        count += 1;
                    }
                }
            }
            let c = count as f64;
            sum += c;
            sum_sq += c * c;
        }
        let rn = self.replicates as f64;
        let mean = sum / rn;
        let std_error = if self.replicates > 1 {
            let var = ((sum_sq - rn * mean * mean) / (rn - 1.0)).max(0.0);
            libm::sqrt(var / rn)
        } else {
            0.0
        };
        Ok(SpreadEstimate {
            mean,
            replicates: self.replicates,
            std_error,
        })
    }
}

#[inline]
fn coin(key: u64, arc: usize) -> f64 {
    let h = rng::mix64(key ^ (arc as u64).wrapping_mul(0xd6e8_feb8_6659_fd93));
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Mean cascade size over `replicates` runs; replicate `i` depends only on
/// `(seed, i)`.
pub fn estimate_spread(
    graph: &WeightedDigraph,
    seeds: &[NodeId],
    replicates: usize,
    seed: u64,
) -> Result<SpreadEstimate> {
    MonteCarlo::new(graph, replicates, seed)?.estimate(seeds)
}

/// Expected cascade size by enumerating every live/blocked outcome of the
/// arcs with probability strictly between 0 and 1 whose tail is reachable
/// from `seeds`; other arcs cannot change the outcome.
pub fn exact_spread(graph: &WeightedDigraph, seeds: &[NodeId]) -> Result<f64> {
    check_seeds(graph.node_count(), seeds)?;
    let n = graph.node_count();
    let mut reachable = vec![false; n];
    let mut stack: Vec<NodeId> = Vec::new();
    for &s in seeds {
        if !reachable[s] {
            reachable[s] = true;
            stack.push(s);
        }
    }
    while let Some(u) = stack.pop() {
        for &(v, p) in graph.out_arcs(u) {
            if p > 0.0 && !reachable[v] {
                reachable[v] = true;
                stack.push(v);
            }
        }
    }
    // per node: (head, index of the stochastic arc, or None when always live)
    let mut live: Vec<Vec<(NodeId, Option<usize>)>> = vec![Vec::new(); n];
    let mut probs: Vec<f64> = Vec::new();
    for (u, v, p) in graph.arcs() {
        if !reachable[u] || p <= 0.0 {
            continue;
        }
        if p >= 1.0 {
            live[u].push((v, None));
        } else {
            live[u].push((v, Some(probs.len())));
            probs.push(p);
        }
    }
    if probs.len() > EXACT_ARC_BOUND {
        return Err(Error::EnumerationBound {
            arcs: probs.len(),
            bound: EXACT_ARC_BOUND,
        });
    }
    let mut reached = vec![false; n];
    let mut total = 0.0;
    for mask in 0u32..(1u32 << probs.len()) {
        let mut prob = 1.0;
        for (i, &p) in probs.iter().enumerate() {
            prob *= if mask >> i & 1 == 1 { p } else { 1.0 - p };
        }
        reached.iter_mut().for_each(|r| *r = false);
        let mut count = 0usize;
        for &s in seeds {
            if !reached[s] {
                reached[s] = true;
                stack.push(s);
                count += 1;
            }
        }
        while let Some(u) = stack.pop() {
            for &(v, arc) in &live[u] {
                if !reached[v] && arc.is_none_or(|i| mask >> i & 1 == 1) {
                    reached[v] = true;
                    stack.push(v);
                    count += 1;
                }
            }
        }
        total += prob * count as f64;
    }
    Ok(total)
}

/// A deterministic set function `σ(S)` that greedy selection maximizes.
pub trait SpreadOracle {
    fn node_count(&self) -> usize;

    fn spread(&self, seeds: &[NodeId]) -> Result<f64>;
}

impl SpreadOracle for MonteCarlo<'_> {
    fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    fn spread(&self, seeds: &[NodeId]) -> Result<f64> {
        Ok(self.estimate(seeds)?.mean)
    }
}

/// [`exact_spread`] as a greedy oracle.
#[derive(Debug, Clone, Copy)]
pub struct Exact<'g>(pub &'g WeightedDigraph);

impl SpreadOracle for Exact<'_> {
    fn node_count(&self) -> usize {
        self.0.node_count()
    }

    fn spread(&self, seeds: &[NodeId]) -> Result<f64> {
        exact_spread(self.0, seeds)
    }
}

/// Degree discount on estimated degrees: start from `d̂_v`, and after each
/// pick update `dd_v = d̂_v − 2t_v − (d̂_v − t_v)·t_v·p`, where `t_v` sums θ
/// over edges from `v` to chosen seeds. Ties go to the smaller id.
pub fn degree_discount(graph: &ReinforcedGraph, k: usize, p: f64) -> Result<Vec<NodeId>> {
    let n = graph.node_count();
    if k > n {
        return Err(Error::Input(alloc::format!(
            "k = {k} exceeds node count {n}"
        )));
    }
    let deg = graph.estimated_degrees();
    let mut dd: Vec<f64> = deg.to_vec();
    let mut t = vec![0.0; n];
    let mut chosen = vec![false; n];
    let mut seeds = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best: Option<NodeId> = None;
        for v in 0..n {
            if !chosen[v] && best.is_none_or(|b| dd[v] > dd[b]) {
                best = Some(v);
            }
        }
        let u = best.expect("k <= n leaves a candidate");
        chosen[u] = true;
        seeds.push(u);
        for &(v, theta, _) in graph.weighted_neighbors(u) {
            if !chosen[v] {
                t[v] += theta;
                dd[v] = deg[v] - 2.0 * t[v] - (deg[v] - t[v]) * t[v] * p;
            }
        }
    }
    Ok(seeds)
}

fn eligible_set(n: usize, eligible: &[NodeId], k: usize) -> Result<Vec<NodeId>> {
    let mut pool = eligible.to_vec();
    pool.sort_unstable();
    pool.dedup();
    check_seeds(n, &pool)?;
    if pool.len() < k {
        return Err(Error::Input(alloc::format!(
            "{} eligible nodes cannot supply {k} seeds",
            pool.len()
        )));
    }
    Ok(pool)
}

/// Plain greedy: each round evaluates every remaining eligible node and
/// keeps the largest marginal gain (ties to the smaller id).
pub fn naive_greedy<O: SpreadOracle + ?Sized>(
    oracle: &O,
    k: usize,
    eligible: &[NodeId],
) -> Result<Vec<NodeId>> {
    let pool = eligible_set(oracle.node_count(), eligible, k)?;
    let mut seeds: Vec<NodeId> = Vec::with_capacity(k);
    let mut base = 0.0;
    for _ in 0..k {
        let mut best: Option<(f64, NodeId)> = None;
        for &v in &pool {
            if seeds.contains(&v) {
                continue;
            }
            seeds.push(v);
            let gain = oracle.spread(&seeds)? - base;
            seeds.pop();
            if best.is_none_or(|(g, _)| gain > g) {
                best = Some((gain, v));
            }
        }
        let (gain, v) = best.expect("pool holds at least k nodes");
        seeds.push(v);
        base += gain;
    }
    Ok(seeds)
}

#[derive(Debug, PartialEq)]
struct Entry {
    gain: f64,
    node: NodeId,
    round: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain
            .total_cmp(&other.gain)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Greedy seed selection with lazy re-evaluation: marginal gains from earlier
/// rounds serve as upper bounds, and only the top of the queue is refreshed
/// until it is current.
pub fn modified_greedy<O: SpreadOracle + ?Sized>(
    oracle: &O,
    k: usize,
    eligible: &[NodeId],
) -> Result<Vec<NodeId>> {
    let pool = eligible_set(oracle.node_count(), eligible, k)?;
    let mut seeds: Vec<NodeId> = Vec::with_capacity(k);
    if k == 0 {
        return Ok(seeds);
    }
    let mut heap = BinaryHeap::with_capacity(pool.len());
    for &v in &pool {
        heap.push(Entry {
            gain: oracle.spread(&[v])?,
            node: v,
            round: 0,
        });
    }
    let mut base = 0.0;
    while seeds.len() < k {
        let top = heap.pop().expect("pool holds at least k nodes");
        if top.round == seeds.len() {
            seeds.push(top.node);
            base += top.gain;
            continue;
        }
        seeds.push(top.node);
        let gain = oracle.spread(&seeds)? - base;
        seeds.pop();
        heap.push(Entry {
            gain,
            node: top.node,
            round: seeds.len(),
        });
    }
    Ok(seeds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::UndirectedGraph;
    use crate::rng::seeded;

    fn digraph(n: usize, arcs: &[(NodeId, NodeId, f64)]) -> WeightedDigraph {
        let mut g = WeightedDigraph::new(n);
        for &(u, v, p) in arcs {
            g.set_arc(u, v, p).unwrap();
        }
        g
    }

    fn random_digraph(rng: &mut rng::Rng, n: usize, edges: usize) -> WeightedDigraph {
        let mut g = WeightedDigraph::new(n);
        let mut placed = 0;
        while placed < edges {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            if u == v || g.weight(u, v).is_some() {
                continue;
            }
            g.set_arc(u, v, rng.gen_range(0.05..0.95)).unwrap();
            g.set_arc(v, u, rng.gen_range(0.05..0.95)).unwrap();
            placed += 1;
        }
        g
    }

    #[test]
    fn cascade_trivial_cases() {
        let path = UndirectedGraph::from_edges(5, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let mut r = seeded(1);
        let full = WeightedDigraph::uniform(&path, 1.0).unwrap();
        assert_eq!(
            simulate_cascade(&full, &[1], &mut r).unwrap(),
            vec![0, 1, 2, 3]
        );
        let none = WeightedDigraph::uniform(&path, 0.0).unwrap();
        assert_eq!(
            simulate_cascade(&none, &[1, 3], &mut r).unwrap(),
            vec![1, 3]
        );
    }

    #[test]
    fn cascade_single_arc_binomial() {
        let g = digraph(2, &[(0, 1, 0.5)]);
        let mut r = seeded(7);
        let runs = 20_000;
        let hits = (0..runs)
            .filter(|_| simulate_cascade(&g, &[0], &mut r).unwrap().len() == 2)
            .count() as f64;
        let sd = libm::sqrt(runs as f64 * 0.25);
        assert!((hits - 0.5 * runs as f64).abs() <= 3.0 * sd);
    }

    #[test]
    fn spread_examples() {
        let g = digraph(2, &[(0, 1, 0.5)]);
        let est = estimate_spread(&g, &[0], 20_000, 3).unwrap();
        assert!((est.mean - 1.5).abs() <= 3.0 * est.std_error);
        assert_eq!(est, estimate_spread(&g, &[0], 20_000, 3).unwrap());
        let all = estimate_spread(&g, &[0, 1], 50, 3).unwrap();
        assert_eq!((all.mean, all.std_error), (2.0, 0.0));
        assert!(estimate_spread(&g, &[0], 0, 3).is_err());
    }

    #[test]
    fn exact_examples() {
        assert!((exact_spread(&digraph(2, &[(0, 1, 0.3)]), &[0]).unwrap() - 1.3).abs() < 1e-15);
        let tri = WeightedDigraph::uniform(
            &UndirectedGraph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap(),
            1.0,
        )
        .unwrap();
        assert_eq!(exact_spread(&tri, &[2]).unwrap(), 3.0);
        let path = digraph(3, &[(0, 1, 0.5), (1, 2, 0.5)]);
        assert_eq!(exact_spread(&path, &[0]).unwrap(), 1.75);
        let cycle: Vec<(NodeId, NodeId, f64)> = (0..11)
            .flat_map(|i| [(i, (i + 1) % 11, 0.5), ((i + 1) % 11, i, 0.5)])
            .collect();
        assert_eq!(
            exact_spread(&digraph(11, &cycle), &[0]),
            Err(Error::EnumerationBound {
                arcs: 22,
                bound: 20
            })
        );
        // arcs out of nodes the seeds cannot reach do not count
        let mut split = cycle.clone();
        split.retain(|a| a.0 != 0 && a.1 != 0);
        split.push((1, 0, 0.5));
        assert_eq!(exact_spread(&digraph(11, &split), &[0]).unwrap(), 1.0);
    }

    #[test]
    fn estimator_matches_enumeration() {
        let mut r = seeded(11);
        for i in 0..20 {
            let g = random_digraph(&mut r, 7, 5);
            let s = [r.gen_range(0..7)];
            let exact = exact_spread(&g, &s).unwrap();
            let est = estimate_spread(&g, &s, 20_000, i).unwrap();
            assert!(
                (est.mean - exact).abs() <= 3.0 * est.std_error + 1e-12,
                "instance {i}"
            );
        }
    }

    #[test]
    fn exact_is_monotone() {
        let mut r = seeded(5);
        for _ in 0..10 {
            let g = random_digraph(&mut r, 6, 5);
            for mask in 0u32..64 {
                let s: Vec<NodeId> = (0..6).filter(|i| mask >> i & 1 == 1).collect();
                let base = exact_spread(&g, &s).unwrap();
                for v in 0..6 {
                    let mut t = s.clone();
                    t.push(v);
                    assert!(exact_spread(&g, &t).unwrap() >= base - 1e-12);
                }
            }
        }
    }

    fn star_forest(sizes: &[usize]) -> UndirectedGraph {
        let n: usize = sizes.iter().map(|s| s + 1).sum();
        let mut g = UndirectedGraph::new(n);
        let mut at = 0;
        for &s in sizes {
            for leaf in 1..=s {
                g.add_edge(at, at + leaf).unwrap();
            }
            at += s + 1;
        }
        g
    }

    #[test]
    fn degree_discount_examples() {
        let cfg = DiffusionConfig::default();
        let star = ReinforcedGraph::observed_only(&star_forest(&[5]), &cfg).unwrap();
        assert_eq!(degree_discount(&star, 1, 0.1).unwrap(), vec![0]);
        let mut all = degree_discount(&star, 6, 0.1).unwrap();
        all.sort_unstable();
        assert_eq!(all, (0..6).collect::<Vec<_>>());
        assert!(degree_discount(&star, 7, 0.1).is_err());

        let two = ReinforcedGraph::observed_only(&star_forest(&[3, 3]), &cfg).unwrap();
        let picked = degree_discount(&two, 2, 0.1).unwrap();
        assert_eq!(picked, vec![0, 4]);
        let mut best = (0.0, (0, 0));
        for a in 0..8 {
            for b in (a + 1)..8 {
                let s = exact_spread(two.arcs(), &[a, b]).unwrap();
                if s > best.0 + 1e-12 {
                    best = (s, (a, b));
                }
            }
        }
        assert_eq!(best.1, (0, 4));
    }

    #[test]
    fn greedy_examples() {
        let g = UndirectedGraph::from_edges(6, [(0, 1), (1, 2), (3, 4)]).unwrap();
        let d = WeightedDigraph::uniform(&g, 1.0).unwrap();
        let mc = MonteCarlo::new(&d, 10, 0).unwrap();
        assert_eq!(
            modified_greedy(&mc, 1, &[0, 1, 2, 3, 4, 5]).unwrap(),
            vec![0]
        );
        assert_eq!(
            modified_greedy(&mc, 2, &[0, 1, 2, 3, 4, 5]).unwrap(),
            vec![0, 3]
        );
        assert_eq!(modified_greedy(&mc, 1, &[5]).unwrap(), vec![5]);
        assert!(modified_greedy(&mc, 2, &[5]).is_err());
        assert!(modified_greedy(&mc, 0, &[]).unwrap().is_empty());
    }

    #[test]
    fn celf_matches_naive_with_exact_oracle() {
        let mut r = seeded(17);
        for _ in 0..10 {
            let g = random_digraph(&mut r, 20, 10);
            let eligible: Vec<NodeId> = (0..20).collect();
            for k in 1..=3 {
                let lazy = modified_greedy(&Exact(&g), k, &eligible).unwrap();
                assert_eq!(lazy, naive_greedy(&Exact(&g), k, &eligible).unwrap());
            }
        }
    }

    #[test]
    fn celf_matches_naive_with_monte_carlo() {
        let mut r = seeded(23);
        for i in 0..5 {
            let g = random_digraph(&mut r, 40, 60).scaled(0.4);
            let mc = MonteCarlo::new(&g, 300, i).unwrap();
            let eligible: Vec<NodeId> = (0..40).step_by(2).collect();
            let lazy = modified_greedy(&mc, 4, &eligible).unwrap();
            assert_eq!(lazy, naive_greedy(&mc, 4, &eligible).unwrap());
            assert!(lazy.iter().all(|v| eligible.contains(v)));
        }
    }
}
