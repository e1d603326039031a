//! Independent ground truth: exhaustive forest enumeration on small levels,
//! matrix-tree determinants, Wilson's algorithm and loop-erased walks.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::census::ForestClass;
use crate::error::{Error, Result};
use std::sync::Arc;

use crate::gasket::{build_graph, ContractedGraph, Corner, SgGraph};
use crate::heights::{class_roots, DescDist, MAX_DES};
use crate::rat::{q, Q};
use crate::sandpile::{rng, RootedSpanningTree};

pub const MAX_LEVEL: u32 = 2;
/// Significance level of every chi-square verdict.
pub const CHI2_ALPHA: f64 = 1e-3;
/// Independent random streams per Monte Carlo run.
pub const STREAMS: u64 = 8;

/// Spanning forest with one root per component; `parent[root] = None`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RootedForest {
    pub roots: Vec<usize>,
    pub parent: Vec<Option<usize>>,
}

impl RootedForest {
    /// Orients an acyclic edge set towards `roots`.
    pub fn from_edges(
        g: &SgGraph,
        edges: &[(usize, usize)],
        roots: &[usize],
    ) -> Result<RootedForest> {
        let n = g.len();
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut parent = vec![None; n];
        let mut seen = vec![false; n];
        let mut stack = Vec::new();
        for &r in roots {
            if seen[r] {
                return Err(Error::Domain("two roots share a component".into()));
            }
            seen[r] = true;
            stack.push(r);
            while let Some(v) = stack.pop() {
                for &w in &adj[v] {
                    if Some(w) == parent[v] {
                        continue;
                    }
                    if seen[w] {
                        return Err(Error::Domain("edge set has a cycle".into()));
                    }
                    seen[w] = true;
                    parent[w] = Some(v);
                    stack.push(w);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Domain("edge set does not span".into()));
        }
        Ok(RootedForest {
            roots: roots.to_vec(),
            parent,
        })
    }

    pub fn root_of(&self, mut v: usize) -> usize {
        while let Some(p) = self.parent[v] {
            v = p;
        }
        v
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<_> = self
            .parent
            .iter()
            .enumerate()
            .filter_map(|(v, p)| p.map(|p| (v.min(p), v.max(p))))
            .collect();
        e.sort_unstable();
        e
    }

    /// Pre-order entry and exit times; `w` is a strict descendant of `v`
    /// iff `tin[v] < tin[w] < tout[v]`.
    fn euler(&self) -> (Vec<usize>, Vec<usize>) {
        let n = self.parent.len();
        let mut kids = vec![Vec::new(); n];
        for (v, p) in self.parent.iter().enumerate() {
            if let Some(p) = p {
                kids[*p].push(v);
            }
        }
        let (mut tin, mut tout) = (vec![0; n], vec![0; n]);
        let mut t = 0;
        let mut stack: Vec<(usize, bool)> = self.roots.iter().rev().map(|&r| (r, false)).collect();
        while let Some((v, done)) = stack.pop() {
            if done {
                tout[v] = t;
                continue;
            }
            tin[v] = t;
            t += 1;
            stack.push((v, true));
            stack.extend(kids[v].iter().rev().map(|&k| (k, false)));
        }
        (tin, tout)
    }

    /// Per vertex, the number of neighbours whose path to the roots passes
    /// through it.
    pub fn descendants(&self, g: &SgGraph) -> Vec<usize> {
        let (tin, tout) = self.euler();
        (0..g.len())
            .map(|v| {
                g.neighbors(v)
                    .iter()
                    .filter(|&&w| tin[v] < tin[w] && tin[w] < tout[v])
                    .count()
            })
            .collect()
    }

    /// Per vertex, the number of neighbours on its own path to the roots.
    pub fn ancestor_neighbours(&self, g: &SgGraph) -> Vec<usize> {
        let (tin, tout) = self.euler();
        (0..g.len())
            .map(|v| {
                g.neighbors(v)
                    .iter()
                    .filter(|&&w| tin[w] < tin[v] && tin[v] < tout[w])
                    .count()
            })
            .collect()
    }
}

fn find(uf: &mut [usize], mut x: usize) -> usize {
    while uf[x] != x {
        uf[x] = uf[uf[x]];
        x = uf[x];
    }
    x
}

/// Class of an edge subset, if it is a spanning forest whose components
/// each hold a corner in one of the class patterns.
pub fn classify(g: &SgGraph, edges: &[(usize, usize)]) -> Option<ForestClass> {
    let n = g.len();
    let mut uf: Vec<usize> = (0..n).collect();
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut uf, a), find(&mut uf, b));
        if ra == rb {
            return None;
        }
        uf[ra] = rb;
    }
    let comps = n - edges.len();
    let c = g.corners().map(|x| find(&mut uf, x));
    match comps {
        1 => Some(ForestClass::T),
        2 => {
            let alone = (0..3).find(|&i| c[i] != c[(i + 1) % 3] && c[i] != c[(i + 2) % 3])?;
            Some(ForestClass::from_isolated(alone))
        }
        3 if c[0] != c[1] && c[1] != c[2] && c[0] != c[2] => Some(ForestClass::R),
        _ => None,
    }
}

/// How [`enumerate_forests`] visits forests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnumMethod {
    /// Classify every edge subset.
    Subsets,
    /// Depth-first over edges with union-find pruning.
    Backtrack,
}

/// Exhaustive tallies over all forests of one class, rooted as in
/// [`class_roots`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForestEnumeration {
    pub level: u32,
    pub class: ForestClass,
    pub count: u64,
    /// `tallies[v][k]`: forests in which `v` has `k` neighbouring descendants.
    pub tallies: Vec<[u64; 5]>,
    /// Summed numbers of neighbours on each vertex's own path to the roots.
    pub ancestor_tallies: Vec<u64>,
    /// Inclusion counts in the order of `SgGraph::edges`.
    pub edge_counts: Vec<u64>,
}

impl ForestEnumeration {
    fn new(level: u32, class: ForestClass, n: usize, e: usize) -> ForestEnumeration {
        ForestEnumeration {
            level,
            class,
            count: 0,
            tallies: vec![[0; 5]; n],
            ancestor_tallies: vec![0; n],
            edge_counts: vec![0; e],
        }
    }

    fn record(&mut self, g: &SgGraph, mask: u64, edges: &[(usize, usize)]) {
        let chosen: Vec<_> = (0..edges.len())
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| edges[i])
            .collect();
        let roots: Vec<usize> = class_roots(self.class)
            .iter()
            .map(|&c| g.corner(c))
            .collect();
        let f = RootedForest::from_edges(g, &chosen, &roots).expect("classified forest");
        self.count += 1;
        for (v, d) in f.descendants(g).into_iter().enumerate() {
            self.tallies[v][d] += 1;
        }
        for (v, a) in f.ancestor_neighbours(g).into_iter().enumerate() {
            self.ancestor_tallies[v] += a as u64;
        }
        for i in 0..edges.len() {
            self.edge_counts[i] += mask >> i & 1;
        }
    }

    fn merge(&mut self, o: ForestEnumeration) {
        self.count += o.count;
        for (a, b) in self.tallies.iter_mut().zip(o.tallies) {
            for k in 0..5 {
                a[k] += b[k];
            }
        }
        for (a, b) in self.ancestor_tallies.iter_mut().zip(o.ancestor_tallies) {
            *a += b;
        }
        for (a, b) in self.edge_counts.iter_mut().zip(o.edge_counts) {
            *a += b;
        }
    }

    pub fn dist(&self, v: usize) -> DescDist {
        DescDist::from_counts(&self.tallies[v], self.count)
    }

    /// Exact expected number of neighbours of `v` on its path to the roots.
    pub fn zeta_v(&self, v: usize) -> Q {
        q(self.ancestor_tallies[v] as i64, self.count as i64)
    }

    /// Expected summed descendant count over the non-corner vertices.
    pub fn interior_mean_total(&self, g: &SgGraph) -> Q {
        let cx = g.corners();
        (0..g.len())
            .filter(|v| !cx.contains(v))
            .map(|v| self.dist(v).mean())
            .sum()
    }

    /// Expected summed descendant count over every vertex.
    pub fn mean_total(&self) -> Q {
        (0..self.tallies.len()).map(|v| self.dist(v).mean()).sum()
    }
}

fn check_oracle_level(level: u32) -> Result<()> {
    if level > MAX_LEVEL {
        return Err(Error::Capacity {
            level,
            max: MAX_LEVEL,
        });
    }
    Ok(())
}

/// Subset classification up to level 1, backtracking at level 2.
pub fn enumerate_forests(level: u32, class: ForestClass) -> Result<ForestEnumeration> {
    let method = if level <= 1 {
        EnumMethod::Subsets
    } else {
        EnumMethod::Backtrack
    };
    enumerate_forests_with(level, class, method)
}

pub fn enumerate_forests_with(
    level: u32,
    class: ForestClass,
    method: EnumMethod,
) -> Result<ForestEnumeration> {
    check_oracle_level(level)?;
    let g = build_graph(level)?;
    let edges: Vec<(usize, usize)> = g.edges().collect();
    match method {
        EnumMethod::Subsets => Ok(by_subsets(&g, &edges, level, class)),
        EnumMethod::Backtrack => Ok(by_backtracking(&g, &edges, level, class)),
    }
}

fn by_subsets(
    g: &SgGraph,
    edges: &[(usize, usize)],
    level: u32,
    class: ForestClass,
) -> ForestEnumeration {
    let e = edges.len();
    let total: u64 = 1 << e;
    let workers = std::thread::available_parallelism()
        .map(|x| x.get() as u64)
        .unwrap_or(1);
    let chunk = total.div_ceil(workers);
    let parts: Vec<ForestEnumeration> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                s.spawn(move || {
                    let mut out = ForestEnumeration::new(level, class, g.len(), e);
                    let mut chosen = Vec::with_capacity(e);
                    for mask in (w * chunk)..((w + 1) * chunk).min(total) {
                        chosen.clear();
                        chosen.extend((0..e).filter(|&i| mask >> i & 1 == 1).map(|i| edges[i]));
                        if classify(g, &chosen) == Some(class) {
                            out.record(g, mask, edges);
                        }
                    }
                    out
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker"))
            .collect()
    });
    let mut out = ForestEnumeration::new(level, class, g.len(), e);
    for p in parts {
        out.merge(p);
    }
    out
}

struct Search<'a> {
    g: &'a SgGraph,
    edges: &'a [(usize, usize)],
    parent: Vec<usize>,
    size: Vec<usize>,
    rooted: Vec<bool>,
    undo: Vec<(usize, usize, bool)>,
    need: usize,
    out: ForestEnumeration,
}

impl Search<'_> {
    fn find(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    fn go(&mut self, i: usize, mask: u64, taken: usize) {
        if taken == self.need {
            if classify(self.g, &self.chosen(mask)) == Some(self.out.class) {
                self.out.record(self.g, mask, self.edges);
            }
            return;
        }
        if i == self.edges.len() || taken + (self.edges.len() - i) < self.need {
            return;
        }
        let (a, b) = self.edges[i];
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb && !(self.rooted[ra] && self.rooted[rb]) {
            let (big, small) = if self.size[ra] >= self.size[rb] {
                (ra, rb)
            } else {
                (rb, ra)
            };
            self.undo.push((small, big, self.rooted[big]));
            self.parent[small] = big;
            self.size[big] += self.size[small];
            self.rooted[big] |= self.rooted[small];
            self.go(i + 1, mask | 1 << i, taken + 1);
            let (small, big, was) = self.undo.pop().expect("undo entry");
            self.parent[small] = small;
            self.size[big] -= self.size[small];
            self.rooted[big] = was;
        }
        self.go(i + 1, mask, taken);
    }

    fn chosen(&self, mask: u64) -> Vec<(usize, usize)> {
        (0..self.edges.len())
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| self.edges[i])
            .collect()
    }
}

fn by_backtracking(
    g: &SgGraph,
    edges: &[(usize, usize)],
    level: u32,
    class: ForestClass,
) -> ForestEnumeration {
    let n = g.len();
    let roots: Vec<usize> = class_roots(class).iter().map(|&c| g.corner(c)).collect();
    let mut rooted = vec![false; n];
    for &r in &roots {
        rooted[r] = true;
    }
    let mut s = Search {
        g,
        edges,
        parent: (0..n).collect(),
        size: vec![1; n],
        rooted,
        undo: Vec::new(),
        need: n - roots.len(),
        out: ForestEnumeration::new(level, class, n, edges.len()),
    };
    s.go(0, 0, 0);
    s.out
}

/// Largest parent-slot product [`contracted_trees`] will scan.
pub const MAX_SLOT_PRODUCT: u64 = 50_000_000;

/// Every spanning tree of a sink-contracted graph, parallel sink edges
/// distinguished, by scanning all parent-slot assignments.
pub fn contracted_trees(g: &Arc<ContractedGraph>) -> Result<Vec<RootedSpanningTree>> {
    let n = g.len();
    let product = (0..n)
        .try_fold(1u64, |acc, v| acc.checked_mul(g.degree(v) as u64))
        .unwrap_or(u64::MAX);
    if product > MAX_SLOT_PRODUCT {
        return Err(Error::Domain(format!(
            "{product} parent assignments exceed the scan limit"
        )));
    }
    let mut out = Vec::new();
    let mut slot = vec![0usize; n];
    loop {
        let t = RootedSpanningTree {
            parent_slot: slot.clone(),
        };
        if t.depths(g).is_ok() {
            out.push(t);
        }
        let mut i = 0;
        loop {
            if i == n {
                return Ok(out);
            }
            slot[i] += 1;
            if slot[i] < g.degree(i) {
                break;
            }
            slot[i] = 0;
            i += 1;
        }
    }
}

/// Determinant of an integer matrix by fraction-free elimination.
pub fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

/// Spanning trees of `g` with the `merged` corners identified into one
/// vertex, by the matrix-tree theorem.
pub fn kirchhoff_count(g: &SgGraph, merged: &[Corner]) -> BigInt {
    let mut removed: Vec<usize> = merged.iter().map(|&c| g.corner(c)).collect();
    if removed.is_empty() {
        removed.push(0);
    }
    let mut idx = vec![None; g.len()];
    let mut m = 0;
    for v in (0..g.len()).filter(|v| !removed.contains(v)) {
        idx[v] = Some(m);
        m += 1;
    }
    let mut lap = vec![vec![BigInt::zero(); m]; m];
    for (a, b) in g.edges() {
        if let Some(i) = idx[a] {
            lap[i][i] += 1;
        }
        if let Some(j) = idx[b] {
            lap[j][j] += 1;
        }
        if let (Some(i), Some(j)) = (idx[a], idx[b]) {
            lap[i][j] -= 1;
            lap[j][i] -= 1;
        }
    }
    bareiss_det(lap)
}

/// Uniform spanning forest rooted at `roots` by Wilson's algorithm.
pub fn wilson_sample<R: Rng>(g: &SgGraph, roots: &[usize], rng: &mut R) -> RootedForest {
    let n = g.len();
    let mut in_tree = vec![false; n];
    let mut next: Vec<Option<usize>> = vec![None; n];
    for &r in roots {
        in_tree[r] = true;
    }
    for start in 0..n {
        let mut u = start;
        while !in_tree[u] {
            let nb = g.neighbors(u);
            let w = nb[rng.gen_range(0..nb.len())];
            next[u] = Some(w);
            u = w;
        }
        let mut u = start;
        while !in_tree[u] {
            in_tree[u] = true;
            u = next[u].expect("walk step");
        }
    }
    let parent = (0..n)
        .map(|v| if roots.contains(&v) { None } else { next[v] })
        .collect();
    RootedForest {
        roots: roots.to_vec(),
        parent,
    }
}

/// Chronological loop erasure.
pub fn loop_erase(walk: &[usize]) -> Vec<usize> {
    let mut path: Vec<usize> = Vec::new();
    for &v in walk {
        if let Some(i) = path.iter().position(|&x| x == v) {
            path.truncate(i + 1);
        } else {
            path.push(v);
        }
    }
    path
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LerwSample {
    pub start: usize,
    pub targets: Vec<usize>,
    pub path: Vec<usize>,
}

/// Loop-erased simple random walk from `start` until it hits `targets`.
pub fn lerw<R: Rng>(g: &SgGraph, start: usize, targets: &[usize], rng: &mut R) -> LerwSample {
    let mut pos: Vec<Option<usize>> = vec![None; g.len()];
    let mut path = vec![start];
    pos[start] = Some(0);
    let mut u = start;
    while !targets.contains(&u) {
        let nb = g.neighbors(u);
        let w = nb[rng.gen_range(0..nb.len())];
        if let Some(i) = pos[w] {
            for &x in &path[i + 1..] {
                pos[x] = None;
            }
            path.truncate(i + 1);
        } else {
            pos[w] = Some(path.len());
            path.push(w);
        }
        u = w;
    }
    let mut seen = vec![false; g.len()];
    assert!(
        path.iter().all(|&v| !std::mem::replace(&mut seen[v], true)),
        "loop-erased path is simple"
    );
    assert!(
        targets.contains(path.last().expect("nonempty path")),
        "path ends in the targets"
    );
    LerwSample {
        start,
        targets: targets.to_vec(),
        path,
    }
}

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: u64,
}

impl Estimate {
    /// `|mean - exact|` in standard errors.
    pub fn z(&self, exact: f64) -> f64 {
        (self.mean - exact).abs() / self.std_err
    }
}

/// Runs `samples` draws of `f` split over [`STREAMS`] seeded streams; the
/// result depends only on the seed.
pub fn estimate<F>(samples: u64, seed: u64, f: F) -> Estimate
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> f64 + Sync,
{
    let workers = std::thread::available_parallelism()
        .map(|x| x.get() as u64)
        .unwrap_or(1)
        .min(STREAMS);
    let per = |s: u64| samples / STREAMS + u64::from(s < samples % STREAMS);
    let sums: Vec<(f64, f64)> = std::thread::scope(|sc| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let f = &f;
                sc.spawn(move || {
                    (w..STREAMS)
                        .step_by(workers as usize)
                        .map(|s| {
                            let mut r = rng(seed, s);
                            let (mut a, mut b) = (0.0, 0.0);
                            for _ in 0..per(s) {
                                let x = f(&mut r);
                                a += x;
                                b += x * x;
                            }
                            (s, a, b)
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        let mut all: Vec<(u64, f64, f64)> = handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker"))
            .collect();
        all.sort_by_key(|x| x.0);
        all.into_iter().map(|(_, a, b)| (a, b)).collect()
    });
    let (s1, s2) = sums
        .iter()
        .fold((0.0, 0.0), |acc, x| (acc.0 + x.0, acc.1 + x.1));
    let n = samples as f64;
    let mean = s1 / n;
    let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
    Estimate {
        mean,
        std_err: (var / n).sqrt(),
        samples,
    }
}

/// Bulk-average descendant count of Wilson forests rooted at the top and
/// right corners of SG_n.
pub fn mc_looping_constant(level: u32, samples: u64, seed: u64) -> Result<Estimate> {
    let g = build_graph(level)?;
    let roots = [g.corner(Corner::Top), g.corner(Corner::Right)];
    let size = g.len() as f64;
    Ok(estimate(samples, seed, |r| {
        let f = wilson_sample(&g, &roots, r);
        f.descendants(&g).iter().sum::<usize>() as f64 / size
    }))
}

/// Neighbours of `v` visited by the loop-erased walk from `v` to the top
/// and right corners.
pub fn mc_zeta_vertex(level: u32, v: usize, samples: u64, seed: u64) -> Result<Estimate> {
    let g = build_graph(level)?;
    if v >= g.len() {
        return Err(Error::Domain(format!("vertex {v} out of range")));
    }
    let targets = [g.corner(Corner::Top), g.corner(Corner::Right)];
    let nb = g.neighbors(v).to_vec();
    Ok(estimate(samples, seed, |r| {
        let s = lerw(&g, v, &targets, r);
        s.path.iter().filter(|x| nb.contains(x)).count() as f64
    }))
}

/// Pearson statistic, its degrees of freedom and the verdict at
/// [`CHI2_ALPHA`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub critical: f64,
    pub pass: bool,
}

pub fn chi_square(observed: &[u64], expected: &[f64]) -> ChiSquare {
    let statistic = observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
        .sum();
    let dof = observed.len() - 1;
    let critical = ChiSquared::new(dof as f64)
        .expect("positive dof")
        .inverse_cdf(1.0 - CHI2_ALPHA);
    ChiSquare {
        statistic,
        dof,
        critical,
        pass: statistic <= critical,
    }
}

pub fn chi_square_uniform(observed: &[u64]) -> ChiSquare {
    let total: u64 = observed.iter().sum();
    let e = total as f64 / observed.len() as f64;
    chi_square(observed, &vec![e; observed.len()])
}

/// Non-root vertex distributions from an enumeration.
pub fn vertex_table(en: &ForestEnumeration) -> Result<Vec<(usize, DescDist)>> {
    let g = build_graph(en.level)?;
    let roots: Vec<usize> = class_roots(en.class).iter().map(|&c| g.corner(c)).collect();
    Ok((0..g.len())
        .filter(|v| !roots.contains(v))
        .map(|v| (v, en.dist(v)))
        .collect())
}

pub fn is_distribution(d: &DescDist) -> bool {
    d.is_valid() && d.0.len() == MAX_DES + 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::census::FOREST_CLASSES;
    use crate::gasket::CORNERS;

    #[test]
    fn level_counts() {
        let c: Vec<u64> = FOREST_CLASSES
            .iter()
            .map(|&k| enumerate_forests(1, k).unwrap().count)
            .collect();
        assert_eq!(c, vec![54, 30, 30, 30, 50]);
        assert_eq!(enumerate_forests(0, ForestClass::R).unwrap().count, 1);
        assert_eq!(enumerate_forests(0, ForestClass::T).unwrap().count, 3);
        assert!(enumerate_forests(3, ForestClass::T).is_err());
    }

    #[test]
    fn methods_agree_on_level_one() {
        for k in FOREST_CLASSES {
            let a = enumerate_forests_with(1, k, EnumMethod::Subsets).unwrap();
            let b = enumerate_forests_with(1, k, EnumMethod::Backtrack).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn determinants() {
        let g0 = build_graph(0).unwrap();
        assert_eq!(kirchhoff_count(&g0, &[]), BigInt::from(3));
        let g1 = build_graph(1).unwrap();
        assert_eq!(kirchhoff_count(&g1, &[]), BigInt::from(54));
        assert_eq!(
            kirchhoff_count(&g1, &[Corner::Top, Corner::Right]),
            BigInt::from(60)
        );
        assert_eq!(kirchhoff_count(&g1, &CORNERS), BigInt::from(50));
        let g2 = build_graph(2).unwrap();
        assert_eq!(kirchhoff_count(&g2, &[]), BigInt::from(524880));
        assert_eq!(kirchhoff_count(&g2, &CORNERS), BigInt::from(1350000));
    }

    #[test]
    fn contracted_tree_counts() {
        use crate::gasket::{contract_sinks, SinkSpec};
        let g = Arc::new(build_graph(1).unwrap());
        for (s, want) in [
            (SinkSpec::top(), 54),
            (SinkSpec::top_right(), 60),
            (SinkSpec::all(), 50),
        ] {
            let c = Arc::new(contract_sinks(g.clone(), s));
            assert_eq!(contracted_trees(&c).unwrap().len(), want);
        }
    }

    #[test]
    fn loop_erasure() {
        assert_eq!(loop_erase(&[0, 1, 0, 2]), vec![0, 2]);
        assert_eq!(loop_erase(&[0, 1, 2, 1, 3]), vec![0, 1, 3]);
        let g = build_graph(1).unwrap();
        let mut r = rng(1, 0);
        let t = g.corner(Corner::Top);
        assert_eq!(lerw(&g, t, &[t], &mut r).path, vec![t]);
    }

    #[test]
    fn wilson_roots_only() {
        let g = build_graph(0).unwrap();
        let mut r = rng(3, 0);
        let f = wilson_sample(&g, &g.corners(), &mut r);
        assert!(f.edges().is_empty());
    }

    #[test]
    fn forest_statistics() {
        let g = build_graph(1).unwrap();
        let roots = [g.corner(Corner::Top)];
        let mut r = rng(5, 0);
        for _ in 0..50 {
            let f = wilson_sample(&g, &roots, &mut r);
            let e = f.edges();
            assert_eq!(e.len(), g.len() - 1);
            assert_eq!(RootedForest::from_edges(&g, &e, &roots).unwrap(), f);
            let d: usize = f.descendants(&g).iter().sum();
            let a: usize = f.ancestor_neighbours(&g).iter().sum();
            assert_eq!(d, a);
        }
    }

    #[test]
    fn chi_square_critical() {
        let c = chi_square_uniform(&[100, 100, 100, 100]);
        assert_eq!(c.dof, 3);
        assert!((c.critical - 16.266).abs() < 1e-2);
        assert!(c.pass);
    }
}
