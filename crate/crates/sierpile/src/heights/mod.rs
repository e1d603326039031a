//! Distributions of the number of neighbouring descendants per vertex and
//! their conversion to sandpile height probabilities.
//!
//! Exact per-vertex values come from the transfer engine in [`transfer`].
//! The closed forms and recursions for corners, roots and cut points as they
//! are usually stated live in [`printed`]; see the README for where they
//! disagree with exhaustive enumeration.

pub mod fixed;
pub mod printed;
pub mod transfer;

use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};
use serde_json::json;

use crate::census::ForestClass;
use crate::error::{check_level, Error, Result};
use crate::gasket::{Corner, Sym, VertexAddr, CORNERS};
use crate::rat::{fmt_q, q, qi, to_f64, Q};

pub use printed::{corner_probs, corner_probs_closed, matrix_power_2x2, matrix_power_2x2_closed};

pub const DEFAULT_MAX_LEVEL: u32 = 6;
pub const MAX_DES: usize = 4;
/// Cap for quantities computed from aggregates rather than full vertex maps.
pub const AGGREGATE_MAX_LEVEL: u32 = 16;

/// Exact law of a count in `0..=4`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DescDist(pub [Q; 5]);

impl DescDist {
    pub fn zero() -> DescDist {
        DescDist(std::array::from_fn(|_| Q::zero()))
    }

    pub fn point(k: usize) -> DescDist {
        let mut d = DescDist::zero();
        d.0[k] = Q::one();
        d
    }

    pub fn from_slice(p: &[Q]) -> DescDist {
        let mut d = DescDist::zero();
        for (i, x) in p.iter().enumerate() {
            d.0[i] = x.clone();
        }
        d
    }

    pub fn from_counts(c: &[u64; 5], total: u64) -> DescDist {
        DescDist(std::array::from_fn(|k| q(c[k] as i64, total as i64)))
    }

    /// Mass at `k`; zero outside `0..=4`.
    pub fn at(&self, k: i64) -> Q {
        if (0..=MAX_DES as i64).contains(&k) {
            self.0[k as usize].clone()
        } else {
            Q::zero()
        }
    }

    pub fn total(&self) -> Q {
        self.0.iter().sum()
    }

    pub fn mean(&self) -> Q {
        self.0
            .iter()
            .enumerate()
            .map(|(k, p)| p * qi(k as i64))
            .sum()
    }

    pub fn is_valid(&self) -> bool {
        self.0.iter().all(|p| !p.is_negative()) && self.total().is_one()
    }

    /// Sum of independent counts, truncated at 4.
    pub fn convolve(&self, other: &DescDist) -> DescDist {
        let mut d = DescDist::zero();
        for i in 0..=MAX_DES {
            if self.0[i].is_zero() {
                continue;
            }
            for j in 0..=MAX_DES - i {
                if !other.0[j].is_zero() {
                    d.0[i + j] += &self.0[i] * &other.0[j];
                }
            }
        }
        d
    }

    /// Shift mass up by `s`.
    pub fn shift(&self, s: usize) -> DescDist {
        let mut d = DescDist::zero();
        for k in s..=MAX_DES {
            d.0[k] = self.0[k - s].clone();
        }
        d
    }

    pub fn add_scaled(&mut self, w: &Q, other: &DescDist) {
        for k in 0..=MAX_DES {
            if !other.0[k].is_zero() {
                self.0[k] += w * &other.0[k];
            }
        }
    }

    pub fn scaled(&self, w: &Q) -> DescDist {
        DescDist(std::array::from_fn(|k| &self.0[k] * w))
    }

    pub fn plus(&self, other: &DescDist) -> DescDist {
        DescDist(std::array::from_fn(|k| &self.0[k] + &other.0[k]))
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.0.iter().map(fmt_q).collect()
    }
}

/// Height law of one vertex; index is the height.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeightDist(pub Vec<Q>);

impl HeightDist {
    pub fn total(&self) -> Q {
        self.0.iter().sum()
    }
    pub fn mean(&self) -> Q {
        self.0
            .iter()
            .enumerate()
            .map(|(k, p)| p * qi(k as i64))
            .sum()
    }
}

/// Given `des = j`, the height is uniform on `j..degree`.
pub fn desc_to_height(d: &DescDist, degree: usize) -> Result<HeightDist> {
    if degree == 0 || degree > MAX_DES + 1 {
        return Err(Error::Domain(format!("degree {degree} out of range")));
    }
    if (degree..=MAX_DES).any(|k| !d.0[k].is_zero()) {
        return Err(Error::Domain(format!(
            "distribution has mass above degree {degree}"
        )));
    }
    let mut h = vec![Q::zero(); degree];
    for j in 0..degree {
        if d.0[j].is_zero() {
            continue;
        }
        let share = &d.0[j] / qi((degree - j) as i64);
        for hk in h.iter_mut().skip(j) {
            *hk += &share;
        }
    }
    Ok(HeightDist(h))
}

/// Roots of the canonical forest ensemble of each class.
pub fn class_roots(class: ForestClass) -> Vec<Corner> {
    match class {
        ForestClass::T => vec![Corner::Top],
        ForestClass::S1 => vec![Corner::Left, Corner::Top],
        ForestClass::S2 => vec![Corner::Top, Corner::Right],
        ForestClass::S3 => vec![Corner::Right, Corner::Top],
        ForestClass::R => CORNERS.to_vec(),
    }
}

/// Per-vertex distributions of one class at one level, non-root vertices in
/// address order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexProbMap {
    pub level: u32,
    pub class: ForestClass,
    pub table: Vec<(VertexAddr, DescDist)>,
}

impl VertexProbMap {
    pub fn get(&self, v: &VertexAddr) -> Option<&DescDist> {
        self.table.iter().find(|(a, _)| a == v).map(|(_, d)| d)
    }

    /// Every vertex's entry equals the entry of its image under `s`.
    pub fn invariant_under(&self, s: Sym) -> bool {
        self.table
            .iter()
            .all(|(a, d)| self.get(&a.map(s)) == Some(d))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<_> = self
            .table
            .iter()
            .map(|(a, d)| json!({"vertex": a.to_string(), "probs": d.to_strings()}))
            .collect();
        json!({"level": self.level, "class": self.class.name(), "vertices": rows})
    }

    /// Heatmap rows `x,y,k,probability` in display coordinates.
    pub fn to_csv(&self, exact: bool) -> String {
        let mut s = String::from("vertex,x,y,k,probability\n");
        for (a, d) in &self.table {
            let (x, y) = a.display_coords();
            for (k, p) in d.0.iter().enumerate() {
                let val = if exact {
                    fmt_q(p)
                } else {
                    format!("{:.12}", to_f64(p))
                };
                let _ = writeln!(s, "{a},{x:.6},{y:.6},{k},{val}");
            }
        }
        s
    }
}

/// Exact per-vertex distributions for `class` on SG_n.
pub fn vertex_probs(n: u32, class: ForestClass) -> Result<VertexProbMap> {
    check_level(n, DEFAULT_MAX_LEVEL)?;
    let g = transfer::graph(n)?;
    let maps = transfer::level_maps(n)?;
    let roots: Vec<usize> = class_roots(class).iter().map(|&c| g.corner(c)).collect();
    let mut acc = vec![DescDist::zero(); g.len()];
    for (i, w) in transfer::class_mixture(class, n) {
        let m = maps[i].as_ref().expect("class with forests");
        for (v, d) in m.iter().enumerate() {
            acc[v].add_scaled(&w, d);
        }
    }
    let table = (0..g.len())
        .filter(|v| !roots.contains(v))
        .map(|v| (g.addr(v).clone(), acc[v].clone()))
        .collect();
    Ok(VertexProbMap {
        level: n,
        class,
        table,
    })
}

/// Distribution at one vertex, roots included.
pub fn vertex_dist(n: u32, class: ForestClass, v: &VertexAddr) -> Result<DescDist> {
    check_level(n, DEFAULT_MAX_LEVEL)?;
    let g = transfer::graph(n)?;
    let i = g.index_of(v)?;
    let maps = transfer::level_maps(n)?;
    let mut d = DescDist::zero();
    for (t, w) in transfer::class_mixture(class, n) {
        d.add_scaled(&w, &maps[t].as_ref().expect("class with forests")[i]);
    }
    Ok(d)
}

/// Root-component laws: `eta2` at the right corner and `eta2bar` at the top
/// corner for `S2`; `eta3` at the top corner for `R`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootProbs {
    pub eta2: DescDist,
    pub eta2bar: DescDist,
    pub eta3: DescDist,
}

/// Exact root-component laws.
pub fn root_probs(n: u32) -> Result<RootProbs> {
    check_level(n, AGGREGATE_MAX_LEVEL)?;
    let s2 = transfer::class_aggregate(ForestClass::S2, n);
    let r = transfer::class_aggregate(ForestClass::R, n);
    Ok(RootProbs {
        eta2: s2.corners[Corner::Right.idx()].clone(),
        eta2bar: s2.corners[Corner::Top.idx()].clone(),
        eta3: r.corners[Corner::Top.idx()].clone(),
    })
}

/// Exact cut-point laws; index `k` is the cut point opposite corner `k`.
pub fn cutpoint_probs(n: u32, class: ForestClass) -> Result<[DescDist; 3]> {
    if n == 0 {
        return Err(Error::Domain("SG_0 has no cut points".into()));
    }
    check_level(n, AGGREGATE_MAX_LEVEL)?;
    Ok(transfer::class_aggregate(class, n).cuts)
}

pub fn heatmap_json(m: &VertexProbMap) -> serde_json::Value {
    let rows: Vec<_> = m
        .table
        .iter()
        .map(|(a, d)| {
            let (x, y) = a.display_coords();
            json!({"vertex": a.to_string(), "x": x, "y": y, "probs": d.to_strings()})
        })
        .collect();
    json!({"level": m.level, "class": m.class.name(), "exact": true, "cells": rows})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::q;

    #[test]
    fn height_conversion() {
        let h = desc_to_height(&DescDist::point(3), 4).unwrap();
        assert_eq!(h.0, vec![qi(0), qi(0), qi(0), qi(1)]);
        let d = DescDist::from_slice(&[q(11, 14), q(3, 14)]);
        let h = desc_to_height(&d, 2).unwrap();
        assert_eq!(h.0, vec![q(11, 28), q(17, 28)]);
        let h = desc_to_height(&DescDist::point(1), 4).unwrap();
        assert_eq!(h.0[2], q(1, 3));
        assert!(desc_to_height(&DescDist::point(3), 2).is_err());
    }

    #[test]
    fn symmetries() {
        for n in 1..=3 {
            let t = vertex_probs(n, ForestClass::T).unwrap();
            assert!(t.invariant_under(Sym::mirror(2).unwrap()));
            let r = vertex_probs(n, ForestClass::R).unwrap();
            assert!(r.invariant_under(Sym::ROT));
            let s2 = vertex_probs(n, ForestClass::S2).unwrap();
            let s1 = vertex_probs(n, ForestClass::S1).unwrap();
            for (a, d) in &s1.table {
                assert_eq!(s2.get(&a.map(Sym::ROT)), Some(d));
            }
            assert!(t.table.iter().chain(&s2.table).all(|(_, d)| d.is_valid()));
        }
    }

    #[test]
    fn corners_agree_with_printed() {
        for n in 0..=5 {
            let (p1, p2) = corner_probs(n);
            let t =
                vertex_dist(n, ForestClass::T, &VertexAddr::corner_of(n, Corner::Left)).unwrap();
            let s =
                vertex_dist(n, ForestClass::S2, &VertexAddr::corner_of(n, Corner::Left)).unwrap();
            assert_eq!((t, s), (p1, p2));
        }
    }
}
