//! The class-level recursion `D_n = (M/150) D_{n-1} + e_n`, driven by the
//! tabulated cut-point laws of [`crate::heights::printed`], together with its
//! eigen-decomposition, leading-coefficient limits and the tabulated closed
//! forms.
//!
//! This route reproduces the tabulated closed forms but not the exact
//! expectations of [`super`]; both are exposed.

use num_traits::{One, Zero};

use crate::census::FOREST_CLASSES;
use crate::error::{check_level, Result};
use crate::heights::printed::{cutpoint_series, e_terms};
use crate::rat::{q, qi, qpow, Q};

use super::{limits_from_d, vertex_count, LimitReport, Sink};

pub const MAX_LEVEL: u32 = 200;

/// Rows and columns in the order `T, S1, S2, S3, R`.
pub const M: [[i64; 5]; 5] = [
    [300, 50, 50, 50, 0],
    [195, 150, 30, 30, 45],
    [195, 30, 150, 30, 45],
    [195, 30, 30, 150, 45],
    [108, 78, 78, 78, 108],
];

pub const EIGENPAIRS: [(i64, [i64; 5]); 5] = [
    (450, [1, 1, 1, 1, 1]),
    (150, [-1, 1, 1, 1, 3]),
    (120, [0, -1, 0, 1, 0]),
    (120, [0, -1, 1, 0, 0]),
    (18, [125, -235, -235, -235, 461]),
];

pub fn m_times(v: &[Q; 5]) -> [Q; 5] {
    std::array::from_fn(|r| (0..5).map(|c| qi(M[r][c]) * &v[c]).sum())
}

pub fn row_sums() -> [Q; 5] {
    std::array::from_fn(|r| q(M[r].iter().sum(), 150))
}

/// `M v = lambda v` for every tabulated pair.
pub fn eigenpairs_hold() -> bool {
    EIGENPAIRS.iter().all(|(l, v)| {
        let v: [Q; 5] = v.map(qi);
        m_times(&v).iter().zip(&v).all(|(a, b)| *a == qi(*l) * b)
    })
}

/// `D_n^i` per class, step by step.
pub fn expected_desc(n: u32, i: usize) -> Result<[Q; 5]> {
    Ok(states(n)?
        .pop()
        .expect("level 0 present")
        .map(|d| d[i].clone()))
}

/// `D_n^i` for `i = 0..4` per class at levels `0..=n`.
pub fn states(n: u32) -> Result<Vec<[[Q; 4]; 5]>> {
    check_level(n, MAX_LEVEL)?;
    let mut out = vec![std::array::from_fn(|_| std::array::from_fn(|_| Q::zero()))];
    for k in 1..=n {
        let e = e_terms(k)?;
        let prev: &[[Q; 4]; 5] = out.last().unwrap();
        let next = std::array::from_fn(|c| {
            std::array::from_fn(|i| {
                let col: [Q; 5] = std::array::from_fn(|d| prev[d][i].clone());
                m_times(&col)[c].clone() / qi(150) + &e[c].0[i]
            })
        });
        out.push(next);
    }
    Ok(out)
}

/// `sum_j (M/150)^j e_{n-j}`.
pub fn expected_desc_telescoped(n: u32, i: usize) -> Result<[Q; 5]> {
    check_level(n, MAX_LEVEL)?;
    let mut acc: [Q; 5] = std::array::from_fn(|_| Q::zero());
    for k in (1..=n).rev() {
        let e = e_terms(k)?;
        let mut v: [Q; 5] = std::array::from_fn(|c| e[c].0[i].clone());
        for _ in 0..(n - k) {
            v = m_times(&v).map(|x| x / qi(150));
        }
        for c in 0..5 {
            acc[c] += &v[c];
        }
    }
    Ok(acc)
}

pub fn expected_desc_total(n: u32) -> Result<[Q; 5]> {
    let s = states(n)?.pop().expect("level 0 present");
    Ok(s.map(|d| d.iter().enumerate().map(|(i, x)| qi(i as i64) * x).sum()))
}

/// `W_n^i = sum_{j <= i} D_n^j / (4 - j)` for the sink's class mixture.
pub fn expected_heights(n: u32, sink: Sink) -> Result<[Q; 4]> {
    let s = states(n)?.pop().expect("level 0 present");
    let mut d: [Q; 4] = std::array::from_fn(|_| Q::zero());
    for (class, w) in sink.mixture() {
        let c = FOREST_CLASSES
            .iter()
            .position(|&x| x == class)
            .expect("known class");
        for i in 0..4 {
            d[i] += &w * &s[c][i];
        }
    }
    Ok(super::heights_from_desc(&d))
}

/// Row `0` of the inverse of the eigenvector matrix: the projection onto
/// the leading eigenvector `(1, ..., 1)`.
pub fn leading_projection() -> [Q; 5] {
    let mut a: Vec<Vec<Q>> = (0..5)
        .map(|r| {
            let mut row: Vec<Q> = EIGENPAIRS.iter().map(|(_, v)| qi(v[r])).collect();
            row.extend((0..5).map(|c| if c == r { Q::one() } else { Q::zero() }));
            row
        })
        .collect();
    for c in 0..5 {
        let p = (c..5)
            .find(|&r| !a[r][c].is_zero())
            .expect("eigenvectors independent");
        a.swap(c, p);
        let inv = a[c][c].recip();
        for x in a[c].iter_mut() {
            *x *= &inv;
        }
        for r in 0..5 {
            if r != c && !a[r][c].is_zero() {
                let f = a[r][c].clone();
                for k in 0..10 {
                    let t = &f * &a[c][k];
                    a[r][k] -= t;
                }
            }
        }
    }
    std::array::from_fn(|c| a[0][5 + c].clone())
}

/// Leading coefficients: `lim D_n^i / 3^n`, identical for every class.
pub fn leading_coefficients() -> [Q; 4] {
    let u = leading_projection();
    let third = q(1, 3);
    let series: Vec<[Q; 4]> = FOREST_CLASSES
        .iter()
        .map(|&c| {
            let cuts = cutpoint_series(c, &third);
            std::array::from_fn(|i| cuts.iter().map(|d| d.0[i].clone()).sum())
        })
        .collect();
    std::array::from_fn(|i| (0..5).map(|c| &u[c] * &series[c][i]).sum())
}

/// Limits of `D_n^i / |SG_n|` and the derived height limits.
pub fn limits(sink: Sink) -> LimitReport {
    let d = leading_coefficients().map(|a| a * q(2, 3));
    let class_dbar =
        std::array::from_fn(|_| d.iter().enumerate().map(|(i, x)| qi(i as i64) * x).sum());
    limits_from_d(sink, d.clone(), d, class_dbar)
}

/// A tabulated closed form: `value(n) = sum_k coef[k] * basis[k]^n`.
#[derive(Debug, Clone)]
pub struct ClosedForm {
    pub basis: Vec<Q>,
    pub rows: Vec<Vec<Q>>,
}

impl ClosedForm {
    fn new(basis: &[(i64, i64)], rows: &[&[(i64, i64)]]) -> ClosedForm {
        ClosedForm {
            basis: basis.iter().map(|&(a, b)| q(a, b)).collect(),
            rows: rows
                .iter()
                .map(|r| r.iter().map(|&(a, b)| q(a, b)).collect())
                .collect(),
        }
    }

    pub fn eval(&self, row: usize, n: u32) -> Q {
        self.rows[row]
            .iter()
            .zip(&self.basis)
            .map(|(c, b)| c * qpow(b, n as i64))
            .sum()
    }

    pub fn leading(&self, row: usize) -> Q {
        self.rows[row][0].clone()
    }
}

/// Row index of a class in the three-row tables (`T`, `S`, `R`).
pub fn short_row(class_idx: usize) -> usize {
    match class_idx {
        0 => 0,
        4 => 2,
        _ => 1,
    }
}

const B0: [(i64, i64); 6] = [(3, 1), (1, 1), (3, 5), (3, 25), (1, 25), (1, 375)];
const B1: [(i64, i64); 8] = [
    (3, 1),
    (1, 1),
    (3, 5),
    (2, 5),
    (3, 25),
    (1, 25),
    (2, 75),
    (1, 375),
];
const B2: [(i64, i64); 9] = [
    (3, 1),
    (1, 1),
    (3, 5),
    (2, 5),
    (1, 15),
    (3, 25),
    (1, 25),
    (2, 75),
    (1, 375),
];
const BT: [(i64, i64); 7] = [(3, 1), (1, 1), (3, 5), (2, 5), (3, 25), (1, 15), (1, 25)];

/// Tabulated `D^0` rows `T, S, R`.
pub fn table_d0() -> ClosedForm {
    ClosedForm::new(
        &B0,
        &[
            &[
                (10957, 26976),
                (-9567, 16456),
                (0, 1),
                (2875, 11616),
                (0, 1),
                (-334375, 4624136),
            ],
            &[
                (10957, 26976),
                (9567, 16456),
                (-363, 392),
                (-5405, 11616),
                (55, 196),
                (13954125, 113291332),
            ],
            &[
                (10957, 26976),
                (28701, 16456),
                (-363, 196),
                (10603, 11616),
                (-99, 98),
                (-45504405, 226582664),
            ],
        ],
    )
}

/// Tabulated `D^1` rows `T, S, R`, verbatim.
pub fn table_d1() -> ClosedForm {
    ClosedForm::new(
        &B1,
        &[
            &[
                (22747599, 58652568),
                (-2120933, 5405796),
                (0, 1),
                (2035, 22932),
                (-101875, 426888),
                (0, 1),
                (-175375, 28716156),
                (1671875, 10404306),
            ],
            &[
                (22737599, 58652568),
                (2120933, 5405796),
                (-66, 49),
                (1529, 2548),
                (191525, 426888),
                (-95, 882),
                (-960865, 9572052),
                (-23256875, 84968499),
            ],
            &[
                (22737599, 58652568),
                (2120933, 1801932),
                (-132, 49),
                (6017, 7644),
                (-375715, 426888),
                (19, 49),
                (1238333, 3190684),
                (25280225, 56645666),
            ],
        ],
    )
}

/// Tabulated `D^2` rows `T, S, R`, verbatim.
pub fn table_d2() -> ClosedForm {
    ClosedForm::new(
        &B2,
        &[
            &[
                (33273907, 58652568),
                (-8427329, 18920286),
                (0, 1),
                (-370, 5733),
                (5, 21),
                (-43375, 213444),
                (0, 1),
                (175375, 14358078),
                (-4346875, 41617224),
            ],
            &[
                (33273907, 58652568),
                (-18085244, 9460143),
                (675, 392),
                (-278, 637),
                (-3, 14),
                (81545, 213444),
                (-215, 441),
                (960865, 4786026),
                (60467875, 339873996),
            ],
            &[
                (33273907, 58652568),
                (-3043507, 900966),
                (675, 196),
                (-1094, 1911),
                (0, 1),
                (-159967, 213444),
                (0, 1),
                (-1238333, 1595342),
                (-65728585, 226582664),
            ],
        ],
    )
}

/// `D^1` with the leading coefficient of row `T` read as `22737599`.
pub fn table_d1_corrected() -> ClosedForm {
    let mut t = table_d1();
    t.rows[0][0] = q(22737599, 58652568);
    t
}

/// `D^2` with the `(1/25)^n` coefficient of row `R` read as `86/49`.
pub fn table_d2_corrected() -> ClosedForm {
    let mut t = table_d2();
    t.rows[2][6] = q(86, 49);
    t
}

/// Tabulated total `D_n = sum_i i D_n^i`, rows `T, S, R`.
pub fn table_total() -> ClosedForm {
    ClosedForm::new(
        &BT,
        &[
            &[
                (7259, 3744),
                (-769, 504),
                (0, 1),
                (-185, 1638),
                (-125, 2016),
                (-5, 21),
                (0, 1),
            ],
            &[
                (7259, 3744),
                (-2579, 504),
                (15, 4),
                (-139, 182),
                (235, 2016),
                (3, 14),
                (-5, 36),
            ],
            &[
                (7259, 3744),
                (-209, 24),
                (15, 2),
                (-547, 546),
                (-461, 2016),
                (0, 1),
                (1, 2),
            ],
        ],
    )
}

/// Tabulated limits of `D^i / |SG_n|` and `W^i / |SG_n|`.
pub fn table_limits() -> ([Q; 4], [Q; 4]) {
    (
        [
            q(10957, 40464),
            q(22737599, 87978852),
            q(33273907, 87978852),
            q(3619595, 39101712),
        ],
        [
            q(10957, 161856),
            q(649680671, 4222984896),
            q(1448254439, 4222984896),
            q(1839170699, 4222984896),
        ],
    )
}

/// Per class, whether the table reproduces the recursion for `n = 1..=max_n`.
pub fn table_agrees(
    t: &ClosedForm,
    max_n: u32,
    value: impl Fn(&[[Q; 4]; 5], usize) -> Q,
) -> Result<[bool; 5]> {
    let s = states(max_n)?;
    Ok(std::array::from_fn(|c| {
        (1..=max_n).all(|n| t.eval(short_row(c), n) == value(&s[n as usize], c))
    }))
}

/// `|V_n| - 3`, the number of non-corner vertices.
pub fn interior_count(n: u32) -> Q {
    Q::from_integer(vertex_count(n)) - qi(3)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn total(s: &[[Q; 4]; 5], c: usize) -> Q {
        s[c].iter().enumerate().map(|(i, x)| qi(i as i64) * x).sum()
    }

    #[test]
    fn matrix_facts() {
        assert!(row_sums().iter().all(|x| *x == qi(3)));
        assert!(eigenpairs_hold());
        let u = leading_projection();
        assert_eq!(u.iter().sum::<Q>(), Q::one());
    }

    #[test]
    fn telescoped_matches_steps() {
        for n in 1..=8 {
            for i in 0..4 {
                assert_eq!(
                    expected_desc(n, i).unwrap(),
                    expected_desc_telescoped(n, i).unwrap()
                );
            }
        }
    }

    #[test]
    fn interior_mass() {
        let s = states(8).unwrap();
        for (n, st) in s.iter().enumerate().skip(1) {
            for d in st {
                assert_eq!(d.iter().sum::<Q>(), interior_count(n as u32));
            }
        }
    }

    #[test]
    fn tables_against_recursion() {
        let all = [true; 5];
        assert_eq!(
            table_agrees(&table_d0(), 8, |s, c| s[c][0].clone()).unwrap(),
            all
        );
        assert_eq!(
            table_agrees(&table_d1(), 8, |s, c| s[c][1].clone()).unwrap(),
            [false, true, true, true, true]
        );
        assert_eq!(
            table_agrees(&table_d1_corrected(), 8, |s, c| s[c][1].clone()).unwrap(),
            all
        );
        assert_eq!(
            table_agrees(&table_d2(), 8, |s, c| s[c][2].clone()).unwrap(),
            [true, true, true, true, false]
        );
        assert_eq!(
            table_agrees(&table_d2_corrected(), 8, |s, c| s[c][2].clone()).unwrap(),
            all
        );
        assert_eq!(table_agrees(&table_total(), 8, total).unwrap(), all);
    }

    #[test]
    fn limits_match_tables() {
        let lead = leading_coefficients();
        assert_eq!(lead[0], table_d0().leading(0));
        assert_eq!(lead[1], table_d1_corrected().leading(0));
        assert_eq!(lead[2], table_d2().leading(0));
        let (d, w) = table_limits();
        for sink in [Sink::One, Sink::Two, Sink::Three] {
            let l = limits(sink);
            assert_eq!(l.d, d);
            assert_eq!(l.w, w);
            assert_eq!(l.wbar, q(24107, 11232));
            assert_eq!(l.zeta, q(7259, 5616));
        }
    }
}
