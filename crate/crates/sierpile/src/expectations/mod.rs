//! Expected numbers of neighbouring descendants and expected sandpile heights
//! per forest class, the looping constant, and their limits.
//!
//! Finite-level values are exact rationals from the aggregate recursion of
//! [`crate::heights::transfer`]. Limits are extracted from the fixed-point
//! twin of that recursion (see [`limits`]). The class-level recursion with
//! the matrix `M` lives in [`printed`].

pub mod printed;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde_json::json;

use crate::census::{ForestClass, FOREST_CLASSES};
use crate::error::{check_level, Error, Result};
use crate::gasket::SinkSpec;
use crate::heights::{desc_to_height, fixed, transfer, DescDist, AGGREGATE_MAX_LEVEL};
use crate::rat::{decimal, fmt_q, limit_denominator, q, qi, Q};

/// Number of vertices of SG_n.
pub fn vertex_count(n: u32) -> BigInt {
    (num_traits::pow(BigInt::from(3), n as usize + 1) + 3) / 2
}

/// Which corners are merged into the sink.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sink {
    /// Top corner.
    One,
    /// Top and right corners.
    Two,
    /// All three corners.
    Three,
}

pub const SINKS: [Sink; 3] = [Sink::One, Sink::Two, Sink::Three];

impl Sink {
    pub fn name(self) -> &'static str {
        match self {
            Sink::One => "one",
            Sink::Two => "two",
            Sink::Three => "three",
        }
    }

    pub fn parse(s: &str) -> Option<Sink> {
        match s.trim().to_ascii_lowercase().as_str() {
            "one" | "1" => Some(Sink::One),
            "two" | "2" => Some(Sink::Two),
            "three" | "3" => Some(Sink::Three),
            _ => None,
        }
    }

    /// Forest ensemble of the burning bijection for this sink.
    pub fn mixture(self) -> Vec<(ForestClass, Q)> {
        match self {
            Sink::One => vec![(ForestClass::T, qi(1))],
            Sink::Two => vec![(ForestClass::S2, q(1, 2)), (ForestClass::S3, q(1, 2))],
            Sink::Three => vec![(ForestClass::R, qi(1))],
        }
    }

    pub fn spec(self) -> SinkSpec {
        match self {
            Sink::One => SinkSpec::top(),
            Sink::Two => SinkSpec::top_right(),
            Sink::Three => SinkSpec::all(),
        }
    }

    /// Corner indices that are not part of the sink.
    pub fn free_corners(self) -> &'static [usize] {
        match self {
            Sink::One => &[0, 1],
            Sink::Two => &[0],
            Sink::Three => &[],
        }
    }
}

/// Exact class-level expectations at one level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectationState {
    pub n: u32,
    /// `dbar[c][i]`: expected number of non-corner vertices with `i`
    /// neighbouring descendants, classes in the order `T, S1, S2, S3, R`.
    pub dbar: [[Q; 4]; 5],
    /// Summed cut-point laws per class.
    pub e_terms: [[Q; 4]; 5],
}

impl ExpectationState {
    pub fn to_json(&self) -> serde_json::Value {
        let rows = |m: &[[Q; 4]; 5]| -> serde_json::Value {
            FOREST_CLASSES
                .iter()
                .zip(m)
                .map(|(c, r)| {
                    (
                        c.name().to_string(),
                        json!(r.iter().map(fmt_q).collect::<Vec<_>>()),
                    )
                })
                .collect::<serde_json::Map<_, _>>()
                .into()
        };
        json!({"level": self.n, "dbar": rows(&self.dbar), "e_terms": rows(&self.e_terms)})
    }
}

fn first4(d: &DescDist) -> [Q; 4] {
    std::array::from_fn(|i| d.0[i].clone())
}

pub fn expectation_state(n: u32) -> Result<ExpectationState> {
    if n == 0 {
        return Err(Error::Domain("level must be at least 1".into()));
    }
    check_level(n, AGGREGATE_MAX_LEVEL)?;
    let aggs = FOREST_CLASSES.map(|c| transfer::class_aggregate(c, n));
    Ok(ExpectationState {
        n,
        dbar: std::array::from_fn(|c| first4(&aggs[c].interior)),
        e_terms: std::array::from_fn(|c| {
            let mut s = DescDist::zero();
            for d in &aggs[c].cuts {
                s = s.plus(d);
            }
            first4(&s)
        }),
    })
}

/// `D_n^i` per class.
pub fn expected_desc(n: u32, i: usize) -> Result<[Q; 5]> {
    if i > 3 {
        return Err(Error::Domain(format!(
            "descendant count {i} out of range 0..=3"
        )));
    }
    Ok(expectation_state(n)?.dbar.map(|d| d[i].clone()))
}

/// `D_n = sum_i i D_n^i` per class.
pub fn expected_desc_total(n: u32) -> Result<[Q; 5]> {
    Ok(expectation_state(n)?.dbar.map(|d| weighted_sum(&d)))
}

fn weighted_sum(d: &[Q]) -> Q {
    d.iter().enumerate().map(|(i, x)| qi(i as i64) * x).sum()
}

/// `W^i = sum_{j <= i} D^j / (4 - j)`.
pub fn heights_from_desc(d: &[Q; 4]) -> [Q; 4] {
    let mut acc = Q::zero();
    std::array::from_fn(|i| {
        acc += &d[i] / qi(4 - i as i64);
        acc.clone()
    })
}

/// Expected height counts for one sink choice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeightExpectation {
    pub n: u32,
    pub sink: Sink,
    /// Expected number of non-corner vertices at height `i`.
    pub w: [Q; 4],
    /// `sum_i i w[i]`.
    pub wbar: Q,
    /// Expected number of non-sink corners at height `0` and `1`.
    pub corner_w: [Q; 2],
    /// Expected total height over every non-sink vertex.
    pub total_height: Q,
}

impl HeightExpectation {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "level": self.n,
            "sink": self.sink.name(),
            "w": self.w.iter().map(fmt_q).collect::<Vec<_>>(),
            "wbar": fmt_q(&self.wbar),
            "wbar_decimal": decimal(&self.wbar, 12),
            "corner_w": self.corner_w.iter().map(fmt_q).collect::<Vec<_>>(),
            "total_height": fmt_q(&self.total_height),
        })
    }
}

fn mixture_aggregate(sink: Sink, n: u32) -> transfer::Aggregate {
    let mut interior = DescDist::zero();
    let mut corners = [DescDist::zero(), DescDist::zero(), DescDist::zero()];
    let mut cuts = corners.clone();
    for (class, w) in sink.mixture() {
        let a = transfer::class_aggregate(class, n);
        interior.add_scaled(&w, &a.interior);
        for c in 0..3 {
            corners[c].add_scaled(&w, &a.corners[c]);
            cuts[c].add_scaled(&w, &a.cuts[c]);
        }
    }
    transfer::Aggregate {
        interior,
        corners,
        cuts,
    }
}

pub fn expected_heights(n: u32, sink: Sink) -> Result<HeightExpectation> {
    if n == 0 {
        return Err(Error::Domain("level must be at least 1".into()));
    }
    check_level(n, AGGREGATE_MAX_LEVEL)?;
    let a = mixture_aggregate(sink, n);
    let w = heights_from_desc(&first4(&a.interior));
    let wbar = weighted_sum(&w);
    let mut corner_w = [Q::zero(), Q::zero()];
    for &c in sink.free_corners() {
        let h = desc_to_height(&a.corners[c], 2)?;
        corner_w[0] += &h.0[0];
        corner_w[1] += &h.0[1];
    }
    let total_height = &wbar + &corner_w[1];
    Ok(HeightExpectation {
        n,
        sink,
        w,
        wbar,
        corner_w,
        total_height,
    })
}

/// Average over all vertices of the expected number of neighbouring
/// descendants in a uniform two-component forest rooted at the top and
/// right corners.
pub fn looping_constant(n: u32) -> Result<Q> {
    if n == 0 {
        return Err(Error::Domain("level must be at least 1".into()));
    }
    check_level(n, AGGREGATE_MAX_LEVEL)?;
    let a = mixture_aggregate(Sink::Two, n);
    let sum = a.interior.mean() + a.corners.iter().map(|d| d.mean()).sum::<Q>();
    Ok(sum / Q::from_integer(vertex_count(n)))
}

/// Levels used for limit extraction; the second confirms the first.
pub const LIMIT_LEVELS: [u32; 2] = [34, 38];
/// Largest denominator accepted for a recovered limit.
pub const LIMIT_MAX_DEN: i64 = 100_000_000_000;

/// Limits of the class-level expectations as `n -> infinity`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitReport {
    pub sink: Sink,
    /// Limits of `D_n^i / |SG_n|` for the sink's ensemble.
    pub d: [Q; 4],
    /// Limits of `W_n^i / |SG_n|`.
    pub w: [Q; 4],
    /// Limit mean height.
    pub wbar: Q,
    /// Looping constant.
    pub zeta: Q,
    /// Limits of `D_n / |SG_n|` per class.
    pub class_dbar: [Q; 5],
}

impl LimitReport {
    /// `sum w = 1`, `wbar = sum i w_i` and `wbar = (zeta + 3) / 2`.
    pub fn identities_hold(&self) -> bool {
        self.w.iter().sum::<Q>().is_one()
            && self.wbar == weighted_sum(&self.w)
            && self.wbar == (&self.zeta + qi(3)) / qi(2)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let pair = |x: &Q| json!({"exact": fmt_q(x), "decimal": decimal(x, 15)});
        json!({
            "sink": self.sink.name(),
            "d": self.d.iter().map(pair).collect::<Vec<_>>(),
            "w": self.w.iter().map(pair).collect::<Vec<_>>(),
            "mean_height": fmt_q(&self.wbar),
            "mean_height_decimal": decimal(&self.wbar, 15),
            "zeta": fmt_q(&self.zeta),
            "zeta_decimal": decimal(&self.zeta, 15),
            "class_dbar": FOREST_CLASSES
                .iter()
                .zip(&self.class_dbar)
                .map(|(c, x)| (c.name().to_string(), pair(x)))
                .collect::<serde_json::Map<_, _>>(),
        })
    }
}

pub(crate) fn limits_from_d(
    sink: Sink,
    d: [Q; 4],
    zeta_d: [Q; 4],
    class_dbar: [Q; 5],
) -> LimitReport {
    let w = heights_from_desc(&d);
    let wbar = weighted_sum(&w);
    let zeta = weighted_sum(&zeta_d);
    LimitReport {
        sink,
        d,
        w,
        wbar,
        zeta,
        class_dbar,
    }
}

/// `(D_{N+1}^i - D_N^i) / 3^{N+1}` for a class mixture, in fixed point.
fn extrapolated(mix: &[(ForestClass, Q)], level: u32) -> [Q; 4] {
    let at = |n: u32| -> [Q; 4] {
        let mut d: [Q; 4] = std::array::from_fn(|_| Q::zero());
        for (class, w) in mix {
            let a = fixed::class_aggregate(*class, n);
            for i in 0..4 {
                d[i] += w * fixed::to_q(&a.interior[i]);
            }
        }
        d
    };
    let (lo, hi) = (at(level), at(level + 1));
    let scale = Q::from_integer(num_traits::pow(BigInt::from(3), level as usize + 1));
    std::array::from_fn(|i| (&hi[i] - &lo[i]) / &scale)
}

fn recovered(mix: &[(ForestClass, Q)]) -> Result<[Q; 4]> {
    let max_den = BigInt::from(LIMIT_MAX_DEN);
    let runs: Vec<[Q; 4]> = LIMIT_LEVELS
        .iter()
        .map(|&n| extrapolated(mix, n).map(|x| limit_denominator(&x, &max_den)))
        .collect();
    if runs.windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::Contract("limit extraction did not stabilise".into()));
    }
    let d = runs.into_iter().next().expect("levels");
    if !d.iter().sum::<Q>().is_one() {
        return Err(Error::Contract("recovered limits do not sum to one".into()));
    }
    Ok(d)
}

/// Exact limits, recovered as the unique small-denominator rationals
/// consistent with a deep fixed-point extrapolation at two levels.
pub fn limits(sink: Sink) -> Result<LimitReport> {
    let d = recovered(&sink.mixture())?;
    let zeta_d = recovered(&Sink::Two.mixture())?;
    let mut class_dbar: [Q; 5] = std::array::from_fn(|_| Q::zero());
    for (k, &c) in FOREST_CLASSES.iter().enumerate() {
        class_dbar[k] = weighted_sum(&recovered(&[(c, qi(1))])?);
    }
    Ok(limits_from_d(sink, d, zeta_d, class_dbar))
}

/// Limit of [`looping_constant`].
pub fn looping_limit() -> Result<Q> {
    Ok(weighted_sum(&recovered(&Sink::Two.mixture())?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_mass_and_vertex_count() {
        assert_eq!(vertex_count(0), BigInt::from(3));
        assert_eq!(vertex_count(2), BigInt::from(15));
        for n in 1..=8 {
            let s = expectation_state(n).unwrap();
            for d in &s.dbar {
                assert_eq!(d.iter().sum::<Q>(), printed::interior_count(n));
            }
        }
    }

    #[test]
    fn looping_constant_is_mean_descendants() {
        for n in 1..=6 {
            let zeta = looping_constant(n).unwrap();
            let h = expected_heights(n, Sink::Two).unwrap();
            let a = mixture_aggregate(Sink::Two, n);
            let total = Q::from_integer(vertex_count(n));
            assert_eq!(
                zeta.clone() * &total,
                a.interior.mean() + a.corners.iter().map(|d| d.mean()).sum::<Q>()
            );
            assert!(h.w.iter().sum::<Q>() == printed::interior_count(n));
        }
    }

    #[test]
    fn state_cuts_match_heights() {
        for n in 1..=4 {
            let s = expectation_state(n).unwrap();
            for (k, &c) in FOREST_CLASSES.iter().enumerate() {
                let cuts = crate::heights::cutpoint_probs(n, c).unwrap();
                let sum: [Q; 4] =
                    std::array::from_fn(|i| cuts.iter().map(|d| d.0[i].clone()).sum());
                assert_eq!(s.e_terms[k], sum);
            }
        }
    }

    #[test]
    fn limits_are_consistent() {
        for sink in SINKS {
            let l = limits(sink).unwrap();
            assert!(l.identities_hold());
            assert_eq!(l.d[0], q(10957, 40464));
            assert_eq!(l.zeta, q(635, 432));
            assert!(l.class_dbar.iter().all(|x| *x == l.zeta));
        }
    }
}
