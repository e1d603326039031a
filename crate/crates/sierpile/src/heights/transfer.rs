//! Exact transfer engine for descendant counts.
//!
//! A forest of SG_n is described by its shape-refined class together with a
//! root ("exit") corner for every component and an optional "hang" corner:
//! the path leaving a component's exit continues at the hang corner, which
//! lies in another component. This is how a forest on a copy sees the rest of
//! the level-n forest. Descendant counts of a vertex are computed for the
//! extended paths.
//!
//! Every such type at level n splits into ordered triples of types at level
//! n - 1 (one per copy). Non-boundary vertices inherit their distribution
//! from the copy containing them; cut points convolve the two copies meeting
//! there.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::Zero;

use crate::census::{
    piece_counts, triples_for, ForestClass, Piece, Skeleton, COPY_CORNERS, PIECES,
};
use crate::error::Result;
use crate::gasket::{build_graph, SgGraph, CORNERS};
use crate::rat::{qb, Q};

use super::DescDist;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Block {
    pub mask: u8,
    pub exit: u8,
    pub hang: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EType {
    pub piece: Piece,
    pub blocks: Vec<Block>,
}

impl EType {
    fn new(piece: Piece, mut blocks: Vec<Block>) -> EType {
        blocks.sort();
        EType { piece, blocks }
    }

    /// Plain rooted forest: every component exits at `roots`, no hangs.
    pub fn rooted(piece: Piece, roots: &[usize]) -> EType {
        let blocks = piece
            .blocks()
            .into_iter()
            .map(|mask| {
                let exit = *roots
                    .iter()
                    .find(|&&r| mask & (1 << r) != 0)
                    .expect("root per block") as u8;
                Block {
                    mask,
                    exit,
                    hang: None,
                }
            })
            .collect();
        EType::new(piece, blocks)
    }
}

fn enumerate() -> Vec<EType> {
    let mut out = Vec::new();
    for p in PIECES {
        let blocks = p.blocks();
        let mut choices: Vec<Vec<(u8, Option<u8>)>> = Vec::new();
        for &m in &blocks {
            let mut c = Vec::new();
            for x in 0..3u8 {
                if m & (1 << x) == 0 {
                    continue;
                }
                c.push((x, None));
                for h in 0..3u8 {
                    if m & (1 << h) == 0 {
                        c.push((x, Some(h)));
                    }
                }
            }
            choices.push(c);
        }
        let mut idx = vec![0usize; blocks.len()];
        'combos: loop {
            let sel: Vec<(u8, Option<u8>)> = idx.iter().zip(&choices).map(|(&i, c)| c[i]).collect();
            let block_of = |c: u8| blocks.iter().position(|&m| m & (1 << c) != 0).unwrap();
            let acyclic = (0..blocks.len()).all(|start| {
                let mut seen = vec![false; blocks.len()];
                let mut j = start;
                seen[j] = true;
                while let Some(h) = sel[j].1 {
                    j = block_of(h);
                    if seen[j] {
                        return false;
                    }
                    seen[j] = true;
                }
                true
            });
            if acyclic {
                let bl = blocks
                    .iter()
                    .zip(&sel)
                    .map(|(&mask, &(exit, hang))| Block { mask, exit, hang })
                    .collect();
                out.push(EType::new(p, bl));
            }
            let mut k = 0;
            loop {
                if k == idx.len() {
                    break 'combos;
                }
                idx[k] += 1;
                if idx[k] < choices[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }
    out
}

pub(crate) struct Catalog {
    pub types: Vec<EType>,
    pub index: HashMap<EType, usize>,
    /// Per type: (child pieces, child type indices).
    pub splits: Vec<Vec<([Piece; 3], [usize; 3])>>,
}

pub(crate) fn catalog() -> &'static Catalog {
    static C: OnceLock<Catalog> = OnceLock::new();
    C.get_or_init(|| {
        let mut types = enumerate();
        types.sort();
        types.dedup();
        let index: HashMap<EType, usize> = types
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, e)| (e, i))
            .collect();
        let splits = types.iter().map(|e| decompose(e, &index)).collect();
        Catalog {
            types,
            index,
            splits,
        }
    })
}

/// All extended types (52).
pub fn all_etypes() -> &'static [EType] {
    &catalog().types
}

pub fn etype_index(e: &EType) -> Option<usize> {
    catalog().index.get(e).copied()
}

fn decompose(e: &EType, index: &HashMap<EType, usize>) -> Vec<([Piece; 3], [usize; 3])> {
    let mut res = Vec::new();
    for t in triples_for(e.piece) {
        let sk = Skeleton::build(t);
        let n = sk.adj.len();
        // par[v]: Some(u) = next vertex on the extended path, None = end.
        let mut par: Vec<Option<usize>> = vec![None; n];
        let mut seen = vec![false; n];
        for b in &e.blocks {
            let x = b.exit as usize;
            par[x] = b.hang.map(|h| h as usize);
            seen[x] = true;
            let mut st = vec![x];
            while let Some(u) = st.pop() {
                for &w in &sk.adj[u] {
                    if !seen[w] {
                        seen[w] = true;
                        par[w] = Some(u);
                        st.push(w);
                    }
                }
            }
        }
        let mut kids = [0usize; 3];
        for d in 0..3 {
            let corners = COPY_CORNERS[d];
            let local = |bv: usize| corners.iter().position(|&c| c == bv);
            let mut blocks = Vec::new();
            for (bi, &mask) in t[d].blocks().iter().enumerate() {
                let ns = &sk.nodes[&(d, bi)];
                let exits: Vec<usize> = (0..3)
                    .filter(|&c| mask & (1 << c) != 0)
                    .filter(|&c| par[corners[c]].is_none_or(|p| !ns.contains(&p)))
                    .collect();
                assert_eq!(exits.len(), 1, "one exit per component");
                let x = exits[0];
                let mut y = par[corners[x]];
                let mut hang = None;
                while let Some(v) = y {
                    if v < 6 {
                        if let Some(c) = local(v) {
                            hang = Some(c as u8);
                            break;
                        }
                    }
                    y = par[v];
                }
                blocks.push(Block {
                    mask,
                    exit: x as u8,
                    hang,
                });
            }
            kids[d] = index[&EType::new(t[d], blocks)];
        }
        res.push((t, kids));
    }
    res
}

pub(crate) fn graph(level: u32) -> Result<Arc<SgGraph>> {
    static G: OnceLock<Mutex<HashMap<u32, Arc<SgGraph>>>> = OnceLock::new();
    let m = G.get_or_init(Default::default);
    if let Some(g) = m.lock().unwrap().get(&level) {
        return Ok(g.clone());
    }
    let g = Arc::new(build_graph(level)?);
    m.lock().unwrap().insert(level, g.clone());
    Ok(g)
}

/// Per-vertex descendant distributions of every type at one level; `None`
/// where the type has no forests.
pub type LevelMaps = Vec<Option<Vec<DescDist>>>;

/// Tally over every edge subset of SG_level (levels 0 and 1).
pub fn brute_etype(e: &EType, level: u32) -> Result<Option<Vec<DescDist>>> {
    let g = graph(level)?;
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let m = edges.len();
    assert!(
        m <= 20,
        "edge-subset enumeration is limited to small levels"
    );
    let cx = g.corners();
    let nv = g.len();
    let mut tally = vec![[0u64; 5]; nv];
    let mut count = 0u64;
    for mask in 0u32..(1 << m) {
        let mut uf: Vec<usize> = (0..nv).collect();
        fn find(uf: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while uf[r] != r {
                r = uf[r];
            }
            let mut y = x;
            while uf[y] != r {
                let n = uf[y];
                uf[y] = r;
                y = n;
            }
            r
        }
        let mut adj = vec![Vec::new(); nv];
        let mut ok = true;
        for (i, &(a, b)) in edges.iter().enumerate() {
            if mask & (1 << i) == 0 {
                continue;
            }
            let (ra, rb) = (find(&mut uf, a), find(&mut uf, b));
            if ra == rb {
                ok = false;
                break;
            }
            uf[ra] = rb;
            adj[a].push(b);
            adj[b].push(a);
        }
        if !ok {
            continue;
        }
        let rc: Vec<usize> = cx.iter().map(|&c| find(&mut uf, c)).collect();
        if (0..nv).any(|v| {
            let r = find(&mut uf, v);
            !rc.contains(&r)
        }) {
            continue;
        }
        let same = |a: usize, b: usize| rc[a] == rc[b];
        let fits = e
            .blocks
            .iter()
            .all(|b| (0..3).all(|c| (b.mask & (1 << c) != 0) == same(c, b.exit as usize)));
        if !fits {
            continue;
        }
        if e.piece.is_tree() && tree_shape(&adj, cx) != e.piece {
            continue;
        }
        let mut par: Vec<Option<usize>> = vec![None; nv];
        for b in &e.blocks {
            let root = cx[b.exit as usize];
            par[root] = b.hang.map(|h| cx[h as usize]);
            let mut seen = vec![false; nv];
            seen[root] = true;
            let mut st = vec![root];
            while let Some(u) = st.pop() {
                for &w in &adj[u] {
                    if !seen[w] {
                        seen[w] = true;
                        par[w] = Some(u);
                        st.push(w);
                    }
                }
            }
        }
        for v in 0..nv {
            let mut k = 0;
            for &y in g.neighbors(v) {
                let mut z = par[y];
                while let Some(u) = z {
                    if u == v {
                        k += 1;
                        break;
                    }
                    z = par[u];
                }
            }
            tally[v][k] += 1;
        }
        count += 1;
    }
    if count == 0 {
        return Ok(None);
    }
    Ok(Some(
        tally
            .iter()
            .map(|t| DescDist::from_counts(t, count))
            .collect(),
    ))
}

fn tree_shape(adj: &[Vec<usize>], cx: [usize; 3]) -> Piece {
    let path = |from: usize, to: usize| {
        let mut par = vec![usize::MAX; adj.len()];
        par[from] = from;
        let mut st = vec![from];
        while let Some(u) = st.pop() {
            for &w in &adj[u] {
                if par[w] == usize::MAX {
                    par[w] = u;
                    st.push(w);
                }
            }
        }
        let mut p = vec![to];
        let mut x = to;
        while x != from {
            x = par[x];
            p.push(x);
        }
        p
    };
    for k in 0..3 {
        let o: Vec<usize> = (0..3).filter(|&c| c != k).collect();
        if path(cx[o[0]], cx[o[1]]).contains(&cx[k]) {
            return Piece::TreeMid(k as u8);
        }
    }
    Piece::TreeY
}

/// Piece counts divided by the tree count, per level; small rationals at
/// any depth, unlike the counts themselves.
pub fn relative_piece_counts(level: u32) -> Vec<Q> {
    static CACHE: OnceLock<Mutex<Vec<Vec<Q>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| {
        let c = piece_counts(0);
        let tau = qb(&c[..4].iter().sum());
        Mutex::new(vec![c.iter().map(|x| qb(x) / &tau).collect()])
    });
    let mut c = cache.lock().unwrap();
    while c.len() <= level as usize {
        let prev = c.last().unwrap();
        let mut next = vec![Q::zero(); 8];
        for a in PIECES {
            for b in PIECES {
                for d in PIECES {
                    if let Some(u) = crate::census::union([a, b, d]) {
                        next[u.idx()] += &prev[a.idx()] * &prev[b.idx()] * &prev[d.idx()];
                    }
                }
            }
        }
        let tau: Q = next[..4].iter().sum();
        let next = next.into_iter().map(|x| x / &tau).collect();
        c.push(next);
    }
    c[level as usize].clone()
}

/// Split weights: probability of each child triple given the parent type.
pub(crate) fn split_weights(level: u32) -> Vec<Vec<Q>> {
    let prev = relative_piece_counts(level - 1);
    let cat = catalog();
    cat.types
        .iter()
        .zip(&cat.splits)
        .map(|(_, sp)| {
            let raw: Vec<Q> = sp
                .iter()
                .map(|(t, _)| &prev[t[0].idx()] * &prev[t[1].idx()] * &prev[t[2].idx()])
                .collect();
            let total: Q = raw.iter().sum();
            if total.is_zero() {
                return raw;
            }
            raw.into_iter().map(|x| x / &total).collect()
        })
        .collect()
}

fn base_maps() -> LevelMaps {
    all_etypes()
        .iter()
        .map(|e| brute_etype(e, 0).expect("level 0"))
        .collect()
}

fn step_maps(prev: &LevelMaps, level: u32) -> Result<LevelMaps> {
    let g = graph(level)?;
    let sub = graph(level - 1)?;
    let emb = g.embed_table(&sub)?;
    let sub_corner: Vec<Option<usize>> = (0..sub.len())
        .map(|u| CORNERS.iter().position(|&c| sub.corner(c) == u))
        .collect();
    let weights = split_weights(level);
    let cat = catalog();
    let work = |i: usize| -> Option<Vec<DescDist>> {
        let sp = &cat.splits[i];
        if sp.is_empty() || weights[i].iter().all(|w| w.is_zero()) {
            return None;
        }
        let mut acc = vec![DescDist::zero(); g.len()];
        for ((_, kids), w) in sp.iter().zip(&weights[i]) {
            if w.is_zero() {
                continue;
            }
            let mut cut: [Option<DescDist>; 3] = Default::default();
            for d in 0..3 {
                let m = prev[kids[d]].as_ref().expect("child type with forests");
                for (u, dist) in m.iter().enumerate() {
                    let gv = emb[d][u];
                    match sub_corner[u].map(|c| COPY_CORNERS[d][c]) {
                        Some(bv) if bv >= 3 => {
                            let slot = &mut cut[bv - 3];
                            *slot = Some(match slot.take() {
                                None => dist.clone(),
                                Some(o) => o.convolve(dist),
                            });
                        }
                        _ => acc[gv].add_scaled(w, dist),
                    }
                }
            }
            for (k, dist) in cut.iter().enumerate() {
                let gv = g.cut_point(CORNERS[k]).expect("cut point");
                acc[gv].add_scaled(w, dist.as_ref().expect("both copies"));
            }
        }
        Some(acc)
    };
    Ok(par_map(cat.types.len(), work))
}

/// Vertex maps of every type at `level`, memoized across calls.
pub fn level_maps(level: u32) -> Result<Arc<LevelMaps>> {
    static CACHE: OnceLock<Mutex<Vec<Arc<LevelMaps>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(vec![Arc::new(base_maps())]));
    loop {
        let (have, last) = {
            let c = cache.lock().unwrap();
            if let Some(m) = c.get(level as usize) {
                return Ok(m.clone());
            }
            (c.len() as u32, c.last().unwrap().clone())
        };
        let next = Arc::new(step_maps(&last, have)?);
        let mut c = cache.lock().unwrap();
        if c.len() as u32 == have {
            c.push(next);
        }
    }
}

/// Types and weights composing a forest class with its canonical roots:
/// the top corner for trees; top and right for `S2`/`S3`; top for the pair
/// of `S1`; every corner for `R`.
pub fn class_mixture(class: ForestClass, level: u32) -> Vec<(usize, Q)> {
    let one = || Q::from_integer(1.into());
    match class {
        ForestClass::T => {
            let c = relative_piece_counts(level);
            PIECES[..4]
                .iter()
                .filter(|p| !c[p.idx()].is_zero())
                .map(|&p| {
                    (
                        etype_index(&EType::rooted(p, &[2])).unwrap(),
                        c[p.idx()].clone(),
                    )
                })
                .collect()
        }
        ForestClass::S1 => vec![(
            etype_index(&EType::rooted(Piece::Split(0), &[0, 2])).unwrap(),
            one(),
        )],
        ForestClass::S2 => vec![(
            etype_index(&EType::rooted(Piece::Split(2), &[2, 1])).unwrap(),
            one(),
        )],
        ForestClass::S3 => vec![(
            etype_index(&EType::rooted(Piece::Split(1), &[1, 2])).unwrap(),
            one(),
        )],
        ForestClass::R => vec![(
            etype_index(&EType::rooted(Piece::Three, &[0, 1, 2])).unwrap(),
            one(),
        )],
    }
}

/// Aggregated state of one type: summed distribution over non-corner
/// vertices and the three corner distributions.
#[derive(Debug, Clone)]
pub struct Aggregate {
    pub interior: DescDist,
    pub corners: [DescDist; 3],
    /// Cut point opposite each corner; zero at level 0.
    pub cuts: [DescDist; 3],
}

pub type LevelAggregates = Vec<Option<Aggregate>>;

pub(crate) fn base_aggregates() -> LevelAggregates {
    let g = graph(0).expect("level 0");
    base_maps()
        .into_iter()
        .map(|m| {
            m.map(|m| Aggregate {
                interior: DescDist::zero(),
                corners: [
                    m[g.corner(CORNERS[0])].clone(),
                    m[g.corner(CORNERS[1])].clone(),
                    m[g.corner(CORNERS[2])].clone(),
                ],
                cuts: std::array::from_fn(|_| DescDist::zero()),
            })
        })
        .collect()
}

fn step_aggregates(prev: &LevelAggregates, level: u32) -> LevelAggregates {
    let weights = split_weights(level);
    let cat = catalog();
    let work = |i: usize| -> Option<Aggregate> {
        let sp = &cat.splits[i];
        if weights[i].iter().all(|w| w.is_zero()) {
            return None;
        }
        let mut interior = DescDist::zero();
        let mut corners = [DescDist::zero(), DescDist::zero(), DescDist::zero()];
        let mut cuts = [DescDist::zero(), DescDist::zero(), DescDist::zero()];
        for ((_, kids), w) in sp.iter().zip(&weights[i]) {
            if w.is_zero() {
                continue;
            }
            let mut cut: [Option<DescDist>; 3] = Default::default();
            for d in 0..3 {
                let a = prev[kids[d]].as_ref().expect("child type with forests");
                interior.add_scaled(w, &a.interior);
                for (c, &bv) in COPY_CORNERS[d].iter().enumerate() {
                    if bv < 3 {
                        corners[bv].add_scaled(w, &a.corners[c]);
                    } else {
                        let slot = &mut cut[bv - 3];
                        *slot = Some(match slot.take() {
                            None => a.corners[c].clone(),
                            Some(o) => o.convolve(&a.corners[c]),
                        });
                    }
                }
            }
            for (k, dist) in cut.iter().enumerate() {
                let dist = dist.as_ref().expect("both copies");
                interior.add_scaled(w, dist);
                cuts[k].add_scaled(w, dist);
            }
        }
        Some(Aggregate {
            interior,
            corners,
            cuts,
        })
    };
    par_map(cat.types.len(), work)
}

fn par_map<T: Send>(n: usize, work: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let workers = std::thread::available_parallelism()
        .map(|x| x.get())
        .unwrap_or(1)
        .min(n.max(1));
    let mut out: Vec<Option<T>> = (0..n).map(|_| None).collect();
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let work = &work;
                s.spawn(move || {
                    (w..n)
                        .step_by(workers)
                        .map(|i| (i, work(i)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, m) in h.join().expect("worker") {
                out[i] = Some(m);
            }
        }
    });
    out.into_iter().map(|x| x.expect("filled")).collect()
}

/// Aggregates of every type at levels `0..=level`.
pub fn aggregates_upto(level: u32) -> Vec<Arc<LevelAggregates>> {
    static CACHE: OnceLock<Mutex<Vec<Arc<LevelAggregates>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(vec![Arc::new(base_aggregates())]));
    let mut c = cache.lock().unwrap();
    while c.len() <= level as usize {
        let n = c.len() as u32;
        let next = Arc::new(step_aggregates(c.last().unwrap(), n));
        c.push(next);
    }
    c[..=level as usize].to_vec()
}

/// Mixture of aggregates for a class.
pub fn class_aggregate(class: ForestClass, level: u32) -> Aggregate {
    let aggs = aggregates_upto(level);
    let lvl = &aggs[level as usize];
    let mut interior = DescDist::zero();
    let mut corners = [DescDist::zero(), DescDist::zero(), DescDist::zero()];
    let mut cuts = [DescDist::zero(), DescDist::zero(), DescDist::zero()];
    for (i, w) in class_mixture(class, level) {
        let a = lvl[i].as_ref().expect("class with forests");
        interior.add_scaled(&w, &a.interior);
        for c in 0..3 {
            corners[c].add_scaled(&w, &a.corners[c]);
            cuts[c].add_scaled(&w, &a.cuts[c]);
        }
    }
    Aggregate {
        interior,
        corners,
        cuts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_size() {
        assert_eq!(all_etypes().len(), 52);
        for (e, sp) in all_etypes().iter().zip(&catalog().splits) {
            assert!(!sp.is_empty(), "{e:?}");
        }
    }

    #[test]
    fn relative_counts() {
        for n in 0..=4 {
            let c = piece_counts(n);
            let tau = qb(&c[..4].iter().sum());
            let want: Vec<Q> = c.iter().map(|x| qb(x) / &tau).collect();
            assert_eq!(relative_piece_counts(n), want);
        }
    }

    #[test]
    fn level_one_matches_enumeration() {
        let maps = level_maps(1).unwrap();
        for (i, e) in all_etypes().iter().enumerate() {
            assert_eq!(maps[i], brute_etype(e, 1).unwrap(), "{e:?}");
        }
    }

    #[test]
    fn aggregates_match_maps() {
        for n in 1..=3u32 {
            let maps = level_maps(n).unwrap();
            let aggs = aggregates_upto(n);
            let g = graph(n).unwrap();
            let cx = g.corners();
            for i in 0..all_etypes().len() {
                let (Some(m), Some(a)) = (&maps[i], &aggs[n as usize][i]) else {
                    assert!(maps[i].is_none() && aggs[n as usize][i].is_none());
                    continue;
                };
                let mut sum = DescDist::zero();
                for (v, d) in m.iter().enumerate() {
                    if !cx.contains(&v) {
                        sum.add_scaled(&Q::from_integer(1.into()), d);
                    }
                }
                assert_eq!(sum, a.interior);
                for c in 0..3 {
                    assert_eq!(m[cx[c]], a.corners[c]);
                    assert_eq!(m[g.cut_point(CORNERS[c]).unwrap()], a.cuts[c]);
                }
            }
        }
    }
}
