//! Level-n Sierpinski gasket graphs with word addresses.
//!
//! A raw address is a word over {L, R, U} of length n followed by a corner
//! of the addressed unit triangle. Copy L holds the left corner, R the right
//! corner and U the top corner, so copy `d` shares corner `d` with its parent.
//! Corner `b` of copy `a` is the same point as corner `a` of copy `b`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{check_level, domain, Error, Result};

pub const DEFAULT_MAX_LEVEL: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Corner {
    Left = 0,
    Right = 1,
    Top = 2,
}

pub const CORNERS: [Corner; 3] = [Corner::Left, Corner::Right, Corner::Top];

impl Corner {
    pub fn idx(self) -> usize {
        self as usize
    }
    pub fn from_idx(i: usize) -> Corner {
        CORNERS[i]
    }
    pub fn letter(self) -> char {
        ['l', 'r', 't'][self.idx()]
    }
}

/// Sub-triangle letters; the discriminant equals the corner the copy keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Copy {
    L = 0,
    R = 1,
    U = 2,
}

pub const COPIES: [Copy; 3] = [Copy::L, Copy::R, Copy::U];

impl Copy {
    pub fn idx(self) -> usize {
        self as usize
    }
    pub fn from_idx(i: usize) -> Copy {
        COPIES[i]
    }
    pub fn letter(self) -> char {
        ['L', 'R', 'U'][self.idx()]
    }
}

/// A permutation of {0,1,2} acting on corners and copy letters alike.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sym(pub [usize; 3]);

impl Sym {
    pub const ID: Sym = Sym([0, 1, 2]);
    /// 120 degree rotation: left -> top -> right -> left.
    pub const ROT: Sym = Sym([2, 0, 1]);
    pub const ROT_INV: Sym = Sym([1, 2, 0]);

    /// Mirror fixing corner `axis` (1 = left, 2 = top, 3 = right).
    pub fn mirror(axis: u8) -> Result<Sym> {
        match axis {
            1 => Ok(Sym([0, 2, 1])),
            2 => Ok(Sym([1, 0, 2])),
            3 => Ok(Sym([2, 1, 0])),
            _ => domain(format!("reflection axis must be 1, 2 or 3, got {axis}")),
        }
    }

    pub fn apply(self, i: usize) -> usize {
        self.0[i]
    }

    /// `self` after `other`.
    pub fn compose(self, other: Sym) -> Sym {
        Sym([self.0[other.0[0]], self.0[other.0[1]], self.0[other.0[2]]])
    }

    pub fn inverse(self) -> Sym {
        let mut r = [0; 3];
        for i in 0..3 {
            r[self.0[i]] = i;
        }
        Sym(r)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexAddr {
    word: Vec<Copy>,
    corner: Corner,
}

impl VertexAddr {
    /// Builds the canonical form of a raw spelling.
    pub fn new(word: Vec<Copy>, corner: Corner) -> VertexAddr {
        let raw = VertexAddr { word, corner };
        match raw.alternate() {
            Some(alt) if alt < raw => alt,
            _ => raw,
        }
    }

    pub fn corner_of(level: u32, c: Corner) -> VertexAddr {
        VertexAddr {
            word: vec![Copy::from_idx(c.idx()); level as usize],
            corner: c,
        }
    }

    /// Cut point of SG_level opposite corner `c` (level >= 1).
    pub fn cut_point(level: u32, c: Corner) -> VertexAddr {
        let (a, b) = match c {
            Corner::Left => (1, 2),
            Corner::Right => (0, 2),
            Corner::Top => (0, 1),
        };
        let mut word = vec![Copy::from_idx(a)];
        word.extend(std::iter::repeat_n(Copy::from_idx(b), level as usize - 1));
        VertexAddr::new(word, Corner::from_idx(b))
    }

    pub fn level(&self) -> u32 {
        self.word.len() as u32
    }
    pub fn word(&self) -> &[Copy] {
        &self.word
    }
    pub fn corner(&self) -> Corner {
        self.corner
    }

    /// The other raw spelling of this point, if it has one.
    fn alternate(&self) -> Option<VertexAddr> {
        let c = self.corner.idx();
        let n = self.word.len();
        for i in (0..n).rev() {
            let a = self.word[i].idx();
            if a == c {
                continue;
            }
            let mut word = self.word[..i].to_vec();
            word.push(Copy::from_idx(c));
            word.extend(std::iter::repeat_n(Copy::from_idx(a), n - 1 - i));
            return Some(VertexAddr {
                word,
                corner: Corner::from_idx(a),
            });
        }
        None
    }

    pub fn is_canonical(&self) -> bool {
        self.alternate().is_none_or(|alt| *self <= alt)
    }

    /// All raw spellings (one or two).
    pub fn spellings(&self) -> Vec<VertexAddr> {
        let mut v = vec![self.clone()];
        if let Some(a) = self.alternate() {
            v.push(a);
        }
        v.sort();
        v
    }

    pub fn map(&self, s: Sym) -> VertexAddr {
        VertexAddr::new(
            self.word
                .iter()
                .map(|l| Copy::from_idx(s.apply(l.idx())))
                .collect(),
            Corner::from_idx(s.apply(self.corner.idx())),
        )
    }

    /// Lattice coordinates: left corner (0,0), right (2^n,0), top (0,2^n).
    pub fn coords(&self) -> (u64, u64) {
        let n = self.word.len();
        let (mut x, mut y) = (0u64, 0u64);
        for (i, l) in self.word.iter().enumerate() {
            let s = 1u64 << (n - 1 - i);
            match l {
                Copy::L => {}
                Copy::R => x += s,
                Copy::U => y += s,
            }
        }
        match self.corner {
            Corner::Left => {}
            Corner::Right => x += 1,
            Corner::Top => y += 1,
        }
        (x, y)
    }

    /// Plane coordinates of the unit-side embedding.
    pub fn display_coords(&self) -> (f64, f64) {
        let (x, y) = self.coords();
        let s = (1u64 << self.word.len()) as f64;
        (
            (x as f64 + y as f64 / 2.0) / s,
            (y as f64) * 3f64.sqrt() / 2.0 / s,
        )
    }
}

impl fmt::Display for VertexAddr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.word {
            write!(f, "{}", l.letter())?;
        }
        write!(f, ":{}", self.corner.letter())
    }
}

impl FromStr for VertexAddr {
    type Err = Error;
    fn from_str(s: &str) -> Result<VertexAddr> {
        let (w, c) = s
            .split_once(':')
            .ok_or_else(|| Error::Domain(format!("address `{s}` lacks ':'")))?;
        let word = w
            .chars()
            .map(|ch| match ch {
                'L' => Ok(Copy::L),
                'R' => Ok(Copy::R),
                'U' => Ok(Copy::U),
                _ => domain(format!("bad letter `{ch}` in address `{s}`")),
            })
            .collect::<Result<Vec<_>>>()?;
        let corner = match c {
            "l" => Corner::Left,
            "r" => Corner::Right,
            "t" => Corner::Top,
            _ => return domain(format!("bad corner `{c}` in address `{s}`")),
        };
        Ok(VertexAddr::new(word, corner))
    }
}

impl Serialize for VertexAddr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone)]
pub struct SgGraph {
    level: u32,
    vertices: Vec<VertexAddr>,
    index: HashMap<VertexAddr, usize>,
    adjacency: Vec<Vec<usize>>,
    corners: [usize; 3],
    cut_points: Option<[usize; 3]>,
    edge_count: usize,
}

pub fn build_graph(level: u32) -> Result<SgGraph> {
    check_level(level, DEFAULT_MAX_LEVEL)?;
    let n = level as usize;
    let cells = 3usize.pow(level);
    let mut seen: HashMap<(u64, u64), VertexAddr> = HashMap::new();
    let mut cell_pts = Vec::with_capacity(cells);
    let mut word = vec![Copy::L; n];
    for id in 0..cells {
        let mut r = id;
        for i in (0..n).rev() {
            word[i] = Copy::from_idx(r % 3);
            r /= 3;
        }
        let mut pts = [(0, 0); 3];
        for c in CORNERS {
            let a = VertexAddr::new(word.clone(), c);
            let p = a.coords();
            seen.entry(p).or_insert(a);
            pts[c.idx()] = p;
        }
        cell_pts.push(pts);
    }
    let mut vertices: Vec<VertexAddr> = seen.into_values().collect();
    vertices.sort();
    let index: HashMap<VertexAddr, usize> = vertices
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, v)| (v, i))
        .collect();
    let by_pt: HashMap<(u64, u64), usize> = vertices
        .iter()
        .enumerate()
        .map(|(i, v)| (v.coords(), i))
        .collect();
    let mut adjacency = vec![Vec::with_capacity(4); vertices.len()];
    for pts in &cell_pts {
        for (a, b) in [(0, 1), (1, 2), (0, 2)] {
            let (u, v) = (by_pt[&pts[a]], by_pt[&pts[b]]);
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
    }
    for a in &mut adjacency {
        a.sort_unstable();
    }
    let corners = CORNERS.map(|c| index[&VertexAddr::corner_of(level, c)]);
    let cut_points = (level >= 1).then(|| CORNERS.map(|c| index[&VertexAddr::cut_point(level, c)]));
    Ok(SgGraph {
        level,
        vertices,
        index,
        adjacency,
        corners,
        cut_points,
        edge_count: 3 * cells,
    })
}

impl SgGraph {
    pub fn level(&self) -> u32 {
        self.level
    }
    pub fn len(&self) -> usize {
        self.vertices.len()
    }
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }
    pub fn vertices(&self) -> &[VertexAddr] {
        &self.vertices
    }
    pub fn addr(&self, i: usize) -> &VertexAddr {
        &self.vertices[i]
    }
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }
    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }
    pub fn corner(&self, c: Corner) -> usize {
        self.corners[c.idx()]
    }
    pub fn corners(&self) -> [usize; 3] {
        self.corners
    }
    /// Cut point opposite `c`; none at level 0.
    pub fn cut_point(&self, c: Corner) -> Option<usize> {
        self.cut_points.map(|p| p[c.idx()])
    }

    pub fn index_of(&self, v: &VertexAddr) -> Result<usize> {
        self.index.get(v).copied().ok_or_else(|| {
            Error::Domain(format!("address {v} is not a vertex of SG_{}", self.level))
        })
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, a)| a.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    pub fn rotate(&self, v: &VertexAddr) -> Result<VertexAddr> {
        self.index_of(v)?;
        Ok(v.map(Sym::ROT))
    }

    pub fn reflect(&self, axis: u8, v: &VertexAddr) -> Result<VertexAddr> {
        let s = Sym::mirror(axis)?;
        self.index_of(v)?;
        Ok(v.map(s))
    }

    /// Index permutation induced by a symmetry.
    pub fn perm(&self, s: Sym) -> Vec<usize> {
        self.vertices
            .iter()
            .map(|v| self.index[&v.map(s)])
            .collect()
    }

    /// Image of a level n-1 vertex under the embedding of copy `which`.
    pub fn subtriangle_embed(&self, which: Copy, v: &VertexAddr) -> Result<VertexAddr> {
        if self.level == 0 || v.level() + 1 != self.level {
            return domain(format!(
                "cannot embed a level {} vertex into SG_{}",
                v.level(),
                self.level
            ));
        }
        let mut word = Vec::with_capacity(self.level as usize);
        word.push(which);
        word.extend_from_slice(v.word());
        Ok(VertexAddr::new(word, v.corner()))
    }

    /// `table[d][i]` is the level-n index of vertex `i` of `sub` inside copy `d`.
    pub fn embed_table(&self, sub: &SgGraph) -> Result<[Vec<usize>; 3]> {
        let mut out: [Vec<usize>; 3] = Default::default();
        for d in COPIES {
            out[d.idx()] = sub
                .vertices
                .iter()
                .map(|v| self.subtriangle_embed(d, v).and_then(|w| self.index_of(&w)))
                .collect::<Result<_>>()?;
        }
        Ok(out)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let name = |i: usize| self.vertices[i].to_string();
        serde_json::json!({
            "level": self.level,
            "vertices": self.vertices.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "edges": self.edges().map(|(u, v)| [name(u), name(v)]).collect::<Vec<_>>(),
            "corners": { "l": name(self.corners[0]), "r": name(self.corners[1]), "t": name(self.corners[2]) },
            "cut_points": self.cut_points.map(|p| serde_json::json!({
                "opposite_l": name(p[0]), "opposite_r": name(p[1]), "opposite_t": name(p[2]),
            })),
        })
    }
}

/// Corners identified into a single sink.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SinkSpec {
    mask: u8,
}

impl SinkSpec {
    pub fn new(corners: &[Corner]) -> Result<SinkSpec> {
        let mask = corners.iter().fold(0u8, |m, c| m | (1 << c.idx()));
        if mask == 0 {
            return domain("sink set must be nonempty");
        }
        Ok(SinkSpec { mask })
    }
    pub fn top() -> SinkSpec {
        SinkSpec { mask: 4 }
    }
    pub fn top_right() -> SinkSpec {
        SinkSpec { mask: 6 }
    }
    pub fn all() -> SinkSpec {
        SinkSpec { mask: 7 }
    }
    pub fn contains(&self, c: Corner) -> bool {
        self.mask & (1 << c.idx()) != 0
    }
    pub fn corners(&self) -> Vec<Corner> {
        CORNERS.into_iter().filter(|&c| self.contains(c)).collect()
    }
    pub fn size(&self) -> usize {
        self.mask.count_ones() as usize
    }
    pub fn label(&self) -> String {
        self.corners().iter().map(|c| c.letter()).collect()
    }
}

/// SG_n with the sink corners merged. Local indices `0..len()` are the
/// non-sink vertices in address order; index `len()` is the sink.
#[derive(Debug, Clone)]
pub struct ContractedGraph {
    base: Arc<SgGraph>,
    sinks: SinkSpec,
    verts: Vec<usize>,
    local: Vec<Option<usize>>,
    nbrs: Vec<Vec<usize>>,
    multi: Vec<usize>,
}

impl PartialEq for ContractedGraph {
    fn eq(&self, o: &Self) -> bool {
        self.sinks == o.sinks
            && self.verts == o.verts
            && self.nbrs == o.nbrs
            && self.multi == o.multi
    }
}

impl Eq for ContractedGraph {}

pub fn contract_sinks(g: Arc<SgGraph>, s: SinkSpec) -> ContractedGraph {
    let sink_set: Vec<usize> = s.corners().iter().map(|&c| g.corner(c)).collect();
    let mut local = vec![None; g.len()];
    let mut verts = Vec::new();
    for i in 0..g.len() {
        if !sink_set.contains(&i) {
            local[i] = Some(verts.len());
            verts.push(i);
        }
    }
    let sink = verts.len();
    let mut nbrs = Vec::with_capacity(sink);
    let mut multi = Vec::with_capacity(sink);
    for &v in &verts {
        let mut a: Vec<usize> = g.neighbors(v).iter().filter_map(|&w| local[w]).collect();
        let b = g.degree(v) - a.len();
        a.extend(std::iter::repeat_n(sink, b));
        nbrs.push(a);
        multi.push(b);
    }
    ContractedGraph {
        base: g,
        sinks: s,
        verts,
        local,
        nbrs,
        multi,
    }
}

impl ContractedGraph {
    pub fn base(&self) -> &SgGraph {
        &self.base
    }
    pub fn base_arc(&self) -> Arc<SgGraph> {
        self.base.clone()
    }
    pub fn sinks(&self) -> SinkSpec {
        self.sinks
    }
    /// Number of non-sink vertices.
    pub fn len(&self) -> usize {
        self.verts.len()
    }
    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }
    pub fn sink(&self) -> usize {
        self.verts.len()
    }
    pub fn degree(&self, v: usize) -> usize {
        self.nbrs[v].len()
    }
    /// Neighbors in edge order: vertices by address, then sink edges.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.nbrs[v]
    }
    pub fn multi_edges(&self, v: usize) -> usize {
        self.multi[v]
    }
    pub fn base_index(&self, v: usize) -> usize {
        self.verts[v]
    }
    pub fn local_index(&self, base: usize) -> Option<usize> {
        self.local[base]
    }
    pub fn addr(&self, v: usize) -> &VertexAddr {
        self.base.addr(self.verts[v])
    }
    pub fn sink_degree(&self) -> usize {
        self.multi.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_levels() {
        let g0 = build_graph(0).unwrap();
        assert_eq!((g0.len(), g0.edge_count()), (3, 3));
        assert!((0..3).all(|i| g0.degree(i) == 2));
        let g1 = build_graph(1).unwrap();
        assert_eq!((g1.len(), g1.edge_count()), (6, 9));
        let g4 = build_graph(4).unwrap();
        assert_eq!((g4.len(), g4.edge_count()), (123, 243));
        assert_eq!(g4.edges().count(), 243);
    }

    #[test]
    fn capacity() {
        assert!(matches!(build_graph(40), Err(Error::Capacity { .. })));
    }

    #[test]
    fn addresses_round_trip() {
        let g = build_graph(3).unwrap();
        for v in g.vertices() {
            assert!(v.is_canonical());
            assert_eq!(&v.to_string().parse::<VertexAddr>().unwrap(), v);
        }
        let a: VertexAddr = "RLL:l".parse().unwrap();
        assert_eq!(a.to_string(), "LRR:r");
    }

    #[test]
    fn corner_orbits() {
        let g = build_graph(2).unwrap();
        let l = VertexAddr::corner_of(2, Corner::Left);
        let t = VertexAddr::corner_of(2, Corner::Top);
        assert_eq!(g.rotate(&l).unwrap(), t);
        let cl = VertexAddr::cut_point(2, Corner::Left);
        let ct = VertexAddr::cut_point(2, Corner::Top);
        assert_eq!(g.rotate(&cl).unwrap(), ct);
        let m2 = |v: &VertexAddr| g.reflect(2, v).unwrap();
        assert_eq!(m2(&t), t);
        assert_eq!(m2(&l), VertexAddr::corner_of(2, Corner::Right));
    }

    #[test]
    fn rotation_is_two_mirrors() {
        let g = build_graph(2).unwrap();
        for v in g.vertices() {
            let composed = g.reflect(1, &g.reflect(2, v).unwrap()).unwrap();
            assert_eq!(composed, g.rotate(v).unwrap());
        }
    }

    #[test]
    fn embedding_glues_cut_points() {
        let g = build_graph(2).unwrap();
        let sub = build_graph(1).unwrap();
        let top = VertexAddr::corner_of(1, Corner::Top);
        let img = g.subtriangle_embed(Copy::L, &top).unwrap();
        assert_eq!(img, VertexAddr::cut_point(2, Corner::Right));
        let t = g.embed_table(&sub).unwrap();
        let mut all: Vec<usize> = t.iter().flatten().copied().collect();
        assert_eq!(all.len(), 18);
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 15);
        assert!(g
            .subtriangle_embed(Copy::U, &VertexAddr::corner_of(2, Corner::Top))
            .is_err());
    }

    #[test]
    fn contraction() {
        let g = Arc::new(build_graph(1).unwrap());
        let c = contract_sinks(g.clone(), SinkSpec::top());
        let cut = |k| c.local_index(g.cut_point(k).unwrap()).unwrap();
        assert_eq!(c.multi_edges(cut(Corner::Left)), 1);
        assert_eq!(c.multi_edges(cut(Corner::Right)), 1);
        assert_eq!(c.sink_degree(), 2);
        let c2 = contract_sinks(g, SinkSpec::top_right());
        assert_eq!(c2.sink_degree(), 4);
        assert_eq!((0..c2.len()).filter(|&v| c2.multi_edges(v) == 1).count(), 2);
        let between = c2
            .local_index(c2.base().cut_point(Corner::Left).unwrap())
            .unwrap();
        assert_eq!(c2.multi_edges(between), 2);
        let g0 = Arc::new(build_graph(0).unwrap());
        assert!(contract_sinks(g0, SinkSpec::all()).is_empty());
    }
}
