//! Counts of spanning trees and 2-/3-component spanning forests of SG_n and
//! the decomposition of each forest class into classes of the three copies.
//!
//! Corner indices follow [`crate::gasket::Corner`]: 0 = left, 1 = right,
//! 2 = top. The forest classes keep the usual names: `S1` isolates the left
//! corner, `S2` the top corner and `S3` the right corner.
//!
//! Internally trees are refined by shape. In a spanning tree the three corners
//! are joined by a tripod; either its centre is an interior vertex (`TreeY`)
//! or one corner lies on the path between the other two (`TreeMid(k)`). The
//! refinement is needed to decide which copies a descendant path visits.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{check_level, Error, Result};

pub const DEFAULT_MAX_LEVEL: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ForestClass {
    T,
    S1,
    S2,
    S3,
    R,
}

pub const FOREST_CLASSES: [ForestClass; 5] = [
    ForestClass::T,
    ForestClass::S1,
    ForestClass::S2,
    ForestClass::S3,
    ForestClass::R,
];

impl ForestClass {
    /// Corner index isolated by a two-component class.
    pub fn isolated(self) -> Option<usize> {
        match self {
            ForestClass::S1 => Some(0),
            ForestClass::S2 => Some(2),
            ForestClass::S3 => Some(1),
            _ => None,
        }
    }

    pub fn from_isolated(c: usize) -> ForestClass {
        [ForestClass::S1, ForestClass::S3, ForestClass::S2][c]
    }

    pub fn name(self) -> &'static str {
        match self {
            ForestClass::T => "tree",
            ForestClass::S1 => "s1",
            ForestClass::S2 => "s2",
            ForestClass::S3 => "s3",
            ForestClass::R => "r",
        }
    }

    pub fn parse(s: &str) -> Result<ForestClass> {
        match s.to_ascii_lowercase().as_str() {
            "tree" | "t" => Ok(ForestClass::T),
            "s1" => Ok(ForestClass::S1),
            "s2" => Ok(ForestClass::S2),
            "s3" => Ok(ForestClass::S3),
            "r" => Ok(ForestClass::R),
            _ => Err(Error::Domain(format!("unknown forest class `{s}`"))),
        }
    }
}

/// Forest class refined by tree shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Piece {
    TreeY,
    TreeMid(u8),
    Split(u8),
    Three,
}

pub const PIECES: [Piece; 8] = [
    Piece::TreeY,
    Piece::TreeMid(0),
    Piece::TreeMid(1),
    Piece::TreeMid(2),
    Piece::Split(0),
    Piece::Split(1),
    Piece::Split(2),
    Piece::Three,
];

impl Piece {
    pub fn idx(self) -> usize {
        match self {
            Piece::TreeY => 0,
            Piece::TreeMid(k) => 1 + k as usize,
            Piece::Split(k) => 4 + k as usize,
            Piece::Three => 7,
        }
    }

    pub fn class(self) -> ForestClass {
        match self {
            Piece::TreeY | Piece::TreeMid(_) => ForestClass::T,
            Piece::Split(k) => ForestClass::from_isolated(k as usize),
            Piece::Three => ForestClass::R,
        }
    }

    pub fn is_tree(self) -> bool {
        matches!(self, Piece::TreeY | Piece::TreeMid(_))
    }

    /// Corner sets of the components, as bit masks, sorted.
    pub fn blocks(self) -> Vec<u8> {
        let mut b = match self {
            Piece::TreeY | Piece::TreeMid(_) => vec![7],
            Piece::Split(a) => vec![1 << a, 7 ^ (1 << a)],
            Piece::Three => vec![1, 2, 4],
        };
        b.sort_unstable();
        b
    }

    /// Paths joining corners inside each component: (block mask, corner lists).
    fn skeleton(self) -> Vec<(u8, Vec<Vec<usize>>)> {
        match self {
            Piece::TreeY => vec![(7, vec![vec![0, 1, 2]])],
            Piece::TreeMid(k) => {
                let k = k as usize;
                let o: Vec<usize> = (0..3).filter(|&c| c != k).collect();
                vec![(7, vec![vec![o[0], k], vec![k, o[1]]])]
            }
            Piece::Split(a) => {
                let pair: Vec<usize> = (0..3).filter(|&c| c != a as usize).collect();
                vec![(1 << a, vec![]), (7 ^ (1 << a), vec![pair])]
            }
            Piece::Three => vec![(1, vec![]), (2, vec![]), (4, vec![])],
        }
    }
}

/// Level-n boundary vertex shared by copy `d` at its local corner `c`:
/// 0..3 are the corners of SG_n, 3 + k the cut point opposite corner k.
pub const COPY_CORNERS: [[usize; 3]; 3] = [[0, 5, 4], [5, 1, 3], [4, 3, 2]];

/// Boundary skeleton of SG_n assembled from three copy pieces.
pub(crate) struct Skeleton {
    pub adj: Vec<Vec<usize>>,
    /// Skeleton node ids of each (copy, block index).
    pub nodes: BTreeMap<(usize, usize), Vec<usize>>,
    edges: usize,
}

impl Skeleton {
    pub fn build(pieces: [Piece; 3]) -> Skeleton {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); 6];
        let mut nodes = BTreeMap::new();
        let mut edges = 0;
        for (d, p) in pieces.iter().enumerate() {
            let blocks = p.blocks();
            for (mask, paths) in p.skeleton() {
                let bi = blocks.iter().position(|&m| m == mask).expect("block");
                let mut ids = Vec::new();
                for path in paths {
                    let id = adj.len();
                    adj.push(Vec::new());
                    for c in path {
                        let bv = COPY_CORNERS[d][c];
                        adj[id].push(bv);
                        adj[bv].push(id);
                        edges += 1;
                    }
                    ids.push(id);
                }
                nodes.insert((d, bi), ids);
            }
        }
        Skeleton { adj, nodes, edges }
    }

    fn components(&self) -> (Vec<usize>, usize) {
        let n = self.adj.len();
        let mut comp = vec![usize::MAX; n];
        let mut k = 0;
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = k;
            let mut st = vec![s];
            while let Some(u) = st.pop() {
                for &w in &self.adj[u] {
                    if comp[w] == usize::MAX {
                        comp[w] = k;
                        st.push(w);
                    }
                }
            }
            k += 1;
        }
        (comp, k)
    }

    pub fn path(&self, from: usize, to: usize) -> Vec<usize> {
        let mut par = vec![usize::MAX; self.adj.len()];
        par[from] = from;
        let mut st = vec![from];
        while let Some(u) = st.pop() {
            for &w in &self.adj[u] {
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
    }
}

fn union_uncached(pieces: [Piece; 3]) -> Option<Piece> {
    let sk = Skeleton::build(pieces);
    let (comp, k) = sk.components();
    if sk.edges != sk.adj.len() - k {
        return None;
    }
    let mut masks: BTreeMap<usize, u8> = BTreeMap::new();
    for c in 0..3 {
        *masks.entry(comp[c]).or_default() |= 1 << c;
    }
    if masks.len() != k {
        return None;
    }
    match k {
        1 => {
            for mid in 0..3 {
                let o: Vec<usize> = (0..3).filter(|&c| c != mid).collect();
                if sk.path(o[0], o[1]).contains(&mid) {
                    return Some(Piece::TreeMid(mid as u8));
                }
            }
            Some(Piece::TreeY)
        }
        2 => {
            let single = masks.values().find(|m| m.count_ones() == 1)?;
            Some(Piece::Split(single.trailing_zeros() as u8))
        }
        _ => Some(Piece::Three),
    }
}

/// Class of the level-n forest glued from pieces of copies L, R, U, if any.
pub fn union(pieces: [Piece; 3]) -> Option<Piece> {
    static TABLE: OnceLock<Vec<Option<Piece>>> = OnceLock::new();
    let t = TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(512);
        for a in PIECES {
            for b in PIECES {
                for c in PIECES {
                    t.push(union_uncached([a, b, c]));
                }
            }
        }
        t
    });
    t[pieces[0].idx() * 64 + pieces[1].idx() * 8 + pieces[2].idx()]
}

/// All ordered triples of pieces gluing to `target`.
pub fn triples_for(target: Piece) -> Vec<[Piece; 3]> {
    let mut out = Vec::new();
    for a in PIECES {
        for b in PIECES {
            for c in PIECES {
                if union([a, b, c]) == Some(target) {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out
}

/// Exact number of forests of each piece class, indexed by [`Piece::idx`].
pub fn piece_counts(n: u32) -> Vec<BigUint> {
    let mut c: Vec<BigUint> = vec![0u32, 1, 1, 1, 1, 1, 1, 1]
        .into_iter()
        .map(BigUint::from)
        .collect();
    for _ in 0..n {
        let mut next = vec![BigUint::zero(); 8];
        for a in PIECES {
            for b in PIECES {
                for d in PIECES {
                    if let Some(u) = union([a, b, d]) {
                        next[u.idx()] += &c[a.idx()] * &c[b.idx()] * &c[d.idx()];
                    }
                }
            }
        }
        c = next;
    }
    c
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CensusState {
    pub n: u32,
    #[serde(serialize_with = "as_string")]
    pub tau: BigUint,
    #[serde(serialize_with = "as_string")]
    pub sigma: BigUint,
    #[serde(serialize_with = "as_string")]
    pub rho: BigUint,
}

fn as_string<S: serde::Serializer>(x: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(x)
}

/// Which cubic term the rho recursion uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhoTerm {
    /// 14 sigma^3, the form consistent with the closed forms.
    Cubic,
    /// 14 sigma^2, as typeset in the source derivation.
    Printed,
}

pub fn counts_recursive(n: u32) -> Result<CensusState> {
    counts_recursive_with(n, RhoTerm::Cubic)
}

pub fn counts_recursive_with(n: u32, term: RhoTerm) -> Result<CensusState> {
    check_level(n, DEFAULT_MAX_LEVEL)?;
    let (mut t, mut s, mut r) = (BigUint::from(3u32), BigUint::one(), BigUint::one());
    for _ in 0..n {
        let s_pow = match term {
            RhoTerm::Cubic => &s * &s * &s,
            RhoTerm::Printed => &s * &s,
        };
        let t2 = 6u32 * &t * &t * &s;
        let s2 = 7u32 * &t * &s * &s + &t * &t * &r;
        let r2 = 14u32 * s_pow + 12u32 * &t * &s * &r;
        (t, s, r) = (t2, s2, r2);
    }
    Ok(CensusState {
        n,
        tau: t,
        sigma: s,
        rho: r,
    })
}

/// Closed forms evaluated in integers:
/// sigma^2 3^n = 5^n 540^((3^n-1)/2), tau sigma = 3 * 540^((3^n-1)/2),
/// rho 3^n = 5^n sigma.
pub fn counts_closed(n: u32) -> Result<CensusState> {
    check_level(n, DEFAULT_MAX_LEVEL)?;
    let e = (3usize.pow(n) - 1) / 2;
    let p540 = num_traits::pow(BigUint::from(540u32), e);
    let p3 = num_traits::pow(BigUint::from(3u32), n as usize);
    let p5 = num_traits::pow(BigUint::from(5u32), n as usize);
    let sq = &p5 * &p540;
    let bad = || Error::Domain(format!("closed forms are not integral at n = {n}"));
    if !(&sq % &p3).is_zero() {
        return Err(bad());
    }
    let s2 = sq / &p3;
    let sigma = num_integer::Roots::sqrt(&s2);
    if &sigma * &sigma != s2 {
        return Err(bad());
    }
    let ts = 3u32 * &p540;
    if !(&ts % &sigma).is_zero() {
        return Err(bad());
    }
    let tau = ts / &sigma;
    let rs = &p5 * &sigma;
    if !(&rs % &p3).is_zero() {
        return Err(bad());
    }
    Ok(CensusState {
        n,
        tau,
        sigma,
        rho: rs / p3,
    })
}

/// One gluing pattern of a decomposition: classes of the copies L, R, U.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecompositionEntry {
    pub children: [ForestClass; 3],
    pub multiplicity: u32,
}

/// Copies are translates of SG_{n-1}, so every child class is read in the
/// copy's own frame and no reorientation is needed.
pub fn decomposition_table(class: ForestClass) -> Vec<DecompositionEntry> {
    let mut agg: BTreeMap<[ForestClass; 3], u32> = BTreeMap::new();
    for p in PIECES {
        if p.class() != class {
            continue;
        }
        for t in triples_for(p) {
            agg.insert(t.map(Piece::class), 1);
        }
    }
    agg.into_iter()
        .map(|(children, multiplicity)| DecompositionEntry {
            children,
            multiplicity,
        })
        .collect()
}

/// Recomputes `(tau, sigma, rho)` at level n + 1 from the tables.
pub fn table_step(c: &CensusState) -> CensusState {
    let val = |k: ForestClass| match k {
        ForestClass::T => &c.tau,
        ForestClass::R => &c.rho,
        _ => &c.sigma,
    };
    let total = |class| {
        decomposition_table(class)
            .iter()
            .map(|e| e.multiplicity * val(e.children[0]) * val(e.children[1]) * val(e.children[2]))
            .sum::<BigUint>()
    };
    CensusState {
        n: c.n + 1,
        tau: total(ForestClass::T),
        sigma: total(ForestClass::S2),
        rho: total(ForestClass::R),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_levels() {
        let want = [(3u64, 1u64, 1u64), (54, 30, 50), (524880, 486000, 1350000)];
        for (n, &(t, s, r)) in want.iter().enumerate() {
            let c = counts_recursive(n as u32).unwrap();
            assert_eq!((c.tau, c.sigma, c.rho), (t.into(), s.into(), r.into()));
        }
    }

    #[test]
    fn closed_equals_recursive() {
        for n in 0..=6 {
            assert_eq!(counts_closed(n).unwrap(), counts_recursive(n).unwrap());
        }
    }

    #[test]
    fn printed_rho_term_breaks_at_two() {
        let p = counts_recursive_with(2, RhoTerm::Printed).unwrap();
        assert_eq!(p.rho, BigUint::from(984600u32));
        assert_ne!(p.rho, counts_closed(2).unwrap().rho);
    }

    #[test]
    fn table_sizes() {
        let t = decomposition_table(ForestClass::T);
        assert_eq!(t.len(), 6);
        let two = |e: &DecompositionEntry, k| e.children.iter().filter(|&&c| c == k).count();
        assert!(t.iter().all(|e| two(e, ForestClass::T) == 2));
        let s = decomposition_table(ForestClass::S2);
        assert_eq!(s.len(), 8);
        let r = decomposition_table(ForestClass::R);
        assert_eq!(r.len(), 26);
        let with_tree = r.iter().filter(|e| two(e, ForestClass::T) == 1).count();
        assert_eq!(with_tree, 12);
    }

    #[test]
    fn table_recursion_matches() {
        let mut c = counts_recursive(0).unwrap();
        for n in 1..=5 {
            c = table_step(&c);
            assert_eq!(c, counts_recursive(n).unwrap());
        }
    }

    #[test]
    fn shape_counts() {
        let c = piece_counts(2);
        let tau = counts_recursive(2).unwrap().tau;
        assert_eq!(c[0], BigUint::from(466560u32));
        for k in 1..4 {
            assert_eq!(&c[k] * 27u32, tau);
        }
        for n in 0..=5 {
            let c = piece_counts(n);
            let cs = counts_recursive(n).unwrap();
            assert_eq!(&c[0] + &c[1] + &c[2] + &c[3], cs.tau);
            assert!(c[4..7].iter().all(|x| *x == cs.sigma));
            assert_eq!(c[7], cs.rho);
            assert_eq!(
                &c[1] * num_traits::pow(BigUint::from(3u32), n as usize + 1),
                cs.tau
            );
        }
    }
}
