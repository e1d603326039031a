//! Abelian sandpile dynamics on a sink-contracted gasket and the burning bijection.

use std::collections::VecDeque;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::error::{Error, Result};
use crate::gasket::ContractedGraph;

/// Seeded generator; `stream` separates independent workers.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SandpileConfig {
    graph: Arc<ContractedGraph>,
    chips: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Odometer {
    pub counts: Vec<u64>,
}

impl Odometer {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

impl SandpileConfig {
    pub fn new(graph: Arc<ContractedGraph>, chips: Vec<u64>) -> Result<SandpileConfig> {
        if chips.len() != graph.len() {
            return Err(Error::Domain(format!(
                "expected {} chip counts, got {}",
                graph.len(),
                chips.len()
            )));
        }
        Ok(SandpileConfig { graph, chips })
    }

    pub fn zeros(graph: Arc<ContractedGraph>) -> SandpileConfig {
        let n = graph.len();
        SandpileConfig {
            graph,
            chips: vec![0; n],
        }
    }

    /// Every vertex at deg - 1.
    pub fn max_stable(graph: Arc<ContractedGraph>) -> SandpileConfig {
        let chips = (0..graph.len())
            .map(|v| graph.degree(v) as u64 - 1)
            .collect();
        SandpileConfig { graph, chips }
    }

    pub fn graph(&self) -> &Arc<ContractedGraph> {
        &self.graph
    }
    pub fn chips(&self) -> &[u64] {
        &self.chips
    }
    pub fn get(&self, v: usize) -> u64 {
        self.chips[v]
    }
    pub fn total(&self) -> u64 {
        self.chips.iter().sum()
    }

    pub fn is_stable(&self) -> bool {
        self.chips
            .iter()
            .enumerate()
            .all(|(v, &c)| c < self.graph.degree(v) as u64)
    }

    pub fn add_at(&mut self, v: usize, k: u64) {
        self.chips[v] += k;
    }

    fn same_graph(&self, other: &SandpileConfig) -> bool {
        Arc::ptr_eq(&self.graph, &other.graph)
            || self.graph.base().level() == other.graph.base().level()
                && self.graph.sinks() == other.graph.sinks()
    }

    pub fn plus(&self, other: &SandpileConfig) -> Result<SandpileConfig> {
        if !self.same_graph(other) {
            return Err(Error::Domain(
                "configurations live on different graphs".into(),
            ));
        }
        let chips = self
            .chips
            .iter()
            .zip(&other.chips)
            .map(|(a, b)| a + b)
            .collect();
        Ok(SandpileConfig {
            graph: self.graph.clone(),
            chips,
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        let chips: serde_json::Map<String, serde_json::Value> = (0..self.graph.len())
            .map(|v| (self.graph.addr(v).to_string(), json!(self.chips[v])))
            .collect();
        json!({
            "graph_level": self.graph.base().level(),
            "sinks": self.graph.sinks().label(),
            "chips": chips,
        })
    }
}

/// Stabilizes by FIFO processing with bulk topplings.
pub fn stabilize(c: &SandpileConfig) -> (SandpileConfig, Odometer) {
    let g = &c.graph;
    let n = g.len();
    let sink = g.sink();
    let mut chips = c.chips.clone();
    let mut odo = vec![0u64; n];
    let mut queued = vec![false; n];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for v in 0..n {
        if chips[v] >= g.degree(v) as u64 {
            queue.push_back(v);
            queued[v] = true;
        }
    }
    while let Some(v) = queue.pop_front() {
        queued[v] = false;
        let d = g.degree(v) as u64;
        let k = chips[v] / d;
        if k == 0 {
            continue;
        }
        chips[v] -= k * d;
        odo[v] += k;
        for &w in g.neighbors(v) {
            if w == sink {
                continue;
            }
            chips[w] += k;
            if !queued[w] && chips[w] >= g.degree(w) as u64 {
                queued[w] = true;
                queue.push_back(w);
            }
        }
    }
    (
        SandpileConfig {
            graph: g.clone(),
            chips,
        },
        Odometer { counts: odo },
    )
}

/// Stabilizes by toppling the unstable vertex that comes first in `order`, one
/// toppling at a time.
pub fn stabilize_ordered(c: &SandpileConfig, order: &[usize]) -> (SandpileConfig, Odometer) {
    let g = &c.graph;
    let sink = g.sink();
    let mut chips = c.chips.clone();
    let mut odo = vec![0u64; g.len()];
    loop {
        let Some(&v) = order.iter().find(|&&v| chips[v] >= g.degree(v) as u64) else {
            break;
        };
        chips[v] -= g.degree(v) as u64;
        odo[v] += 1;
        for &w in g.neighbors(v) {
            if w != sink {
                chips[w] += 1;
            }
        }
    }
    (
        SandpileConfig {
            graph: g.clone(),
            chips,
        },
        Odometer { counts: odo },
    )
}

/// `before - Laplacian * odometer == after`, in exact integers.
pub fn laplacian_identity(before: &SandpileConfig, odo: &Odometer, after: &SandpileConfig) -> bool {
    let g = &before.graph;
    let sink = g.sink();
    let mut x: Vec<i128> = before.chips.iter().map(|&c| c as i128).collect();
    for v in 0..g.len() {
        let k = odo.counts[v] as i128;
        x[v] -= k * g.degree(v) as i128;
        for &w in g.neighbors(v) {
            if w != sink {
                x[w] += k;
            }
        }
    }
    x.iter().zip(&after.chips).all(|(a, &b)| *a == b as i128)
}

pub fn markov_step<R: Rng>(c: &SandpileConfig, rng: &mut R) -> SandpileConfig {
    if c.graph.is_empty() {
        return c.clone();
    }
    let mut next = c.clone();
    let v = rng.gen_range(0..c.graph.len());
    next.chips[v] += 1;
    stabilize(&next).0
}

/// Burning test: adding the sink edges topples every vertex once and returns `c`.
pub fn is_recurrent(c: &SandpileConfig) -> bool {
    if !c.is_stable() {
        return false;
    }
    let mut s = c.clone();
    for v in 0..c.graph.len() {
        s.chips[v] += c.graph.multi_edges(v) as u64;
    }
    let (after, odo) = stabilize(&s);
    after.chips == c.chips && odo.counts.iter().all(|&k| k == 1)
}

pub fn group_add(a: &SandpileConfig, b: &SandpileConfig) -> Result<SandpileConfig> {
    for x in [a, b] {
        if !is_recurrent(x) {
            return Err(Error::Contract("group_add needs recurrent operands".into()));
        }
    }
    Ok(stabilize(&a.plus(b)?).0)
}

/// ((m - (2m)°) + m)° with m the maximal stable configuration.
pub fn identity_element(g: Arc<ContractedGraph>) -> SandpileConfig {
    let m = SandpileConfig::max_stable(g);
    let doubled = stabilize(&m.plus(&m).expect("same graph")).0;
    let mut x = m.clone();
    for v in 0..x.chips.len() {
        x.chips[v] = 2 * m.chips[v] - doubled.chips[v];
    }
    stabilize(&x).0
}

/// Spanning tree of a contracted graph; `parent_slot[v]` indexes
/// `graph.neighbors(v)`, so parallel sink edges are distinguished.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RootedSpanningTree {
    pub parent_slot: Vec<usize>,
}

impl RootedSpanningTree {
    pub fn parent(&self, g: &ContractedGraph, v: usize) -> usize {
        g.neighbors(v)[self.parent_slot[v]]
    }

    pub fn validate(&self, g: &ContractedGraph) -> Result<()> {
        if self.parent_slot.len() != g.len() {
            return Err(Error::Domain("parent table has the wrong length".into()));
        }
        for v in 0..g.len() {
            if self.parent_slot[v] >= g.degree(v) {
                return Err(Error::Domain(format!(
                    "vertex {v} has no edge slot {}",
                    self.parent_slot[v]
                )));
            }
        }
        self.depths(g).map(|_| ())
    }

    /// Path length to the sink for each vertex.
    pub fn depths(&self, g: &ContractedGraph) -> Result<Vec<usize>> {
        let n = g.len();
        let sink = g.sink();
        let mut depth = vec![usize::MAX; n];
        for start in 0..n {
            let mut path = Vec::new();
            let mut v = start;
            while v != sink && depth[v] == usize::MAX {
                if path.len() > n {
                    return Err(Error::Domain("parent pointers contain a cycle".into()));
                }
                path.push(v);
                v = self.parent(g, v);
            }
            let mut d = if v == sink { 0 } else { depth[v] };
            for &u in path.iter().rev() {
                d += 1;
                depth[u] = d;
            }
        }
        Ok(depth)
    }

    /// Neighbors whose path to the sink passes through `v`.
    pub fn descendant_count(&self, g: &ContractedGraph, v: usize) -> usize {
        let sink = g.sink();
        g.neighbors(v)
            .iter()
            .filter(|&&y| y != sink && self.is_strict_ancestor(g, v, y))
            .count()
    }

    fn is_strict_ancestor(&self, g: &ContractedGraph, anc: usize, y: usize) -> bool {
        let sink = g.sink();
        let mut z = self.parent(g, y);
        while z != sink {
            if z == anc {
                return true;
            }
            z = self.parent(g, z);
        }
        false
    }
}

/// Returns `(a_T, b_T)` per vertex.
pub fn burning_statistics(
    t: &RootedSpanningTree,
    g: &ContractedGraph,
) -> Result<Vec<(usize, usize)>> {
    let depth = t.depths(g)?;
    let sink = g.sink();
    let l = |y: usize| if y == sink { 0 } else { depth[y] };
    Ok((0..g.len())
        .map(|v| {
            let lv = depth[v];
            let a = g.neighbors(v).iter().filter(|&&y| l(y) + 1 < lv).count();
            let b = g.neighbors(v)[..t.parent_slot[v]]
                .iter()
                .filter(|&&y| l(y) + 1 == lv)
                .count();
            (a, b)
        })
        .collect())
}

pub fn tree_to_sandpile(t: &RootedSpanningTree, g: Arc<ContractedGraph>) -> Result<SandpileConfig> {
    t.validate(&g)?;
    let stats = burning_statistics(t, &g)?;
    let chips = stats
        .iter()
        .enumerate()
        .map(|(v, &(a, b))| (g.degree(v) - 1 - a - b) as u64)
        .collect();
    Ok(SandpileConfig { graph: g, chips })
}

/// Inverse of `tree_to_sandpile`: synchronous burning rounds.
pub fn sandpile_to_tree(c: &SandpileConfig) -> Result<RootedSpanningTree> {
    let g = &c.graph;
    let n = g.len();
    let sink = g.sink();
    if !c.is_stable() {
        return Err(Error::Contract(
            "sandpile_to_tree needs a stable configuration".into(),
        ));
    }
    let mut time: Vec<Option<usize>> = vec![None; n + 1];
    time[sink] = Some(0);
    let mut slot = vec![usize::MAX; n];
    let mut burnt = 1;
    let mut round = 0;
    while burnt < n + 1 {
        round += 1;
        let mut fresh = Vec::new();
        for v in 0..n {
            if time[v].is_some() {
                continue;
            }
            let nb = g.neighbors(v);
            let older = nb
                .iter()
                .filter(|&&y| time[y].is_some_and(|t| t + 1 < round))
                .count();
            let last = nb.iter().filter(|&&y| time[y] == Some(round - 1)).count();
            if last > 0 && c.chips[v] as usize + older + last >= nb.len() {
                let b = nb.len() - 1 - older - c.chips[v] as usize;
                let s = nb
                    .iter()
                    .enumerate()
                    .filter(|(_, &y)| time[y] == Some(round - 1))
                    .nth(b)
                    .map(|(i, _)| i)
                    .expect("b < last");
                fresh.push((v, s));
            }
        }
        if fresh.is_empty() {
            return Err(Error::Contract("configuration is not recurrent".into()));
        }
        for (v, s) in fresh {
            time[v] = Some(round);
            slot[v] = s;
            burnt += 1;
        }
    }
    Ok(RootedSpanningTree { parent_slot: slot })
}

/// All stable configurations, in lexicographic chip order. Small graphs only.
pub fn stable_configs(g: Arc<ContractedGraph>) -> Vec<SandpileConfig> {
    let n = g.len();
    let mut out = Vec::new();
    let mut chips = vec![0u64; n];
    loop {
        out.push(SandpileConfig {
            graph: g.clone(),
            chips: chips.clone(),
        });
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            chips[i] += 1;
            if chips[i] < g.degree(i) as u64 {
                break;
            }
            chips[i] = 0;
        }
    }
}

pub fn recurrent_configs(g: Arc<ContractedGraph>) -> Vec<SandpileConfig> {
    stable_configs(g).into_iter().filter(is_recurrent).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gasket::{build_graph, contract_sinks, SinkSpec};

    fn cg(level: u32, s: SinkSpec) -> Arc<ContractedGraph> {
        Arc::new(contract_sinks(Arc::new(build_graph(level).unwrap()), s))
    }

    #[test]
    fn stable_input_is_fixed() {
        let g = cg(1, SinkSpec::top());
        let m = SandpileConfig::max_stable(g);
        let (s, odo) = stabilize(&m);
        assert_eq!(s, m);
        assert_eq!(odo.total(), 0);
    }

    #[test]
    fn abelian_on_level_one() {
        let g = cg(1, SinkSpec::top());
        let chips = (0..g.len()).map(|v| g.degree(v) as u64).collect();
        let c = SandpileConfig::new(g.clone(), chips).unwrap();
        let fwd: Vec<usize> = (0..g.len()).collect();
        let rev: Vec<usize> = fwd.iter().rev().copied().collect();
        let a = stabilize_ordered(&c, &fwd);
        let b = stabilize_ordered(&c, &rev);
        assert_eq!(a, b);
        assert_eq!(stabilize(&c), a);
        assert!(laplacian_identity(&c, &a.1, &a.0));
    }

    #[test]
    fn recurrence_level_zero_and_one() {
        let g = cg(1, SinkSpec::top());
        assert!(is_recurrent(&SandpileConfig::max_stable(g.clone())));
        assert!(!is_recurrent(&SandpileConfig::zeros(g.clone())));
        assert_eq!(recurrent_configs(g).len(), 54);
        assert_eq!(recurrent_configs(cg(0, SinkSpec::top())).len(), 3);
    }

    #[test]
    fn identity_is_neutral() {
        let g = cg(0, SinkSpec::top());
        let e = identity_element(g.clone());
        assert!(is_recurrent(&e));
        for r in recurrent_configs(g) {
            assert_eq!(group_add(&r, &e).unwrap(), r);
        }
        let g2 = cg(2, SinkSpec::top());
        let e2 = identity_element(g2);
        assert_eq!(group_add(&e2, &e2).unwrap(), e2);
    }

    #[test]
    fn burning_round_trip_level_one() {
        let g = cg(1, SinkSpec::top());
        for r in recurrent_configs(g.clone()) {
            let t = sandpile_to_tree(&r).unwrap();
            assert_eq!(tree_to_sandpile(&t, g.clone()).unwrap(), r);
        }
        assert!(sandpile_to_tree(&SandpileConfig::zeros(g)).is_err());
    }

    #[test]
    fn path_tree_on_triangle() {
        // sink = top; left hangs off right
        let g = cg(0, SinkSpec::top());
        let (l, r) = (0, 1);
        let slot_of = |v: usize, w: usize| g.neighbors(v).iter().position(|&x| x == w).unwrap();
        let t = RootedSpanningTree {
            parent_slot: vec![slot_of(l, r), slot_of(r, g.sink())],
        };
        assert_eq!(t.descendant_count(&g, r), 1);
        assert_eq!(t.descendant_count(&g, l), 0);
    }

    #[test]
    fn markov_is_deterministic_per_seed() {
        let g = cg(1, SinkSpec::top());
        let run = |seed| {
            let mut r = rng(seed, 0);
            let mut c = SandpileConfig::zeros(g.clone());
            let mut out = Vec::new();
            for _ in 0..50 {
                c = markov_step(&c, &mut r);
                out.push(c.chips().to_vec());
            }
            out
        };
        assert_eq!(run(7), run(7));
        assert_ne!(run(7), run(8));
    }
}
