//! Recursions and closed forms for corner, root and cut-point laws in the
//! form they are commonly stated.
//!
//! The corner laws here are exact. The root recursion, its table of closed
//! forms and the cut-point formulas built from it are reproduced verbatim;
//! they agree with one another but not with exhaustive enumeration (see
//! [`super::root_probs`] and [`super::cutpoint_probs`] for the exact values).

use crate::census::ForestClass;
use crate::error::{Error, Result};
use crate::rat::{q, qi, qpow, Q};

use super::{DescDist, RootProbs};

pub type Mat2 = [[Q; 2]; 2];

fn base2() -> Mat2 {
    [[q(2, 3), q(1, 3)], [q(3, 5), q(2, 5)]]
}

fn mul2(a: &Mat2, b: &Mat2) -> Mat2 {
    std::array::from_fn(|i| std::array::from_fn(|j| &a[i][0] * &b[0][j] + &a[i][1] * &b[1][j]))
}

/// `[[2/3,1/3],[3/5,2/5]]^n` by repeated multiplication.
pub fn matrix_power_2x2(n: u32) -> Mat2 {
    let mut m = [[qi(1), qi(0)], [qi(0), qi(1)]];
    for _ in 0..n {
        m = mul2(&m, &base2());
    }
    m
}

/// Diagonalized form of the same power.
pub fn matrix_power_2x2_closed(n: u32) -> Mat2 {
    let n = n as i64;
    let p3 = qpow(&qi(3), n);
    let p5 = qpow(&qi(5), n);
    let p15 = qpow(&qi(15), n);
    let f = qpow(&qi(15), -n) / qi(14);
    let one = qi(1);
    [
        [
            &f * (qi(9) * &p3 * &p5 + qi(5)),
            &f * (qi(-5) * (&one - &p15)),
        ],
        [
            &f * (qi(-9) * (&one - &p15)),
            &f * (&p3 * &p5 * qi(5) + qi(9)),
        ],
    ]
}

/// Corner laws `(p1, p2)`: left corner of a tree rooted at the top, and of
/// an `S2` forest.
pub fn corner_probs(n: u32) -> (DescDist, DescDist) {
    let m = matrix_power_2x2(n);
    let init = [[q(2, 3), q(1, 3)], [qi(1), qi(0)]];
    let row = |i: usize| {
        DescDist::from_slice(&[
            &m[i][0] * &init[0][0] + &m[i][1] * &init[1][0],
            &m[i][0] * &init[0][1] + &m[i][1] * &init[1][1],
        ])
    };
    (row(0), row(1))
}

pub fn corner_probs_closed(n: u32) -> (DescDist, DescDist) {
    let t = qpow(&q(1, 15), n as i64);
    (
        DescDist::from_slice(&[q(11, 14) - q(5, 42) * &t, q(3, 14) + q(5, 42) * &t]),
        DescDist::from_slice(&[q(11, 14) + q(3, 14) * &t, q(3, 14) - q(3, 14) * &t]),
    )
}

/// Affine root recursion from `(0,1,0), (1,0,0), (1,0,0)`.
pub fn root_probs(n: u32) -> RootProbs {
    let a = [
        [q(12, 30), qi(0), qi(0)],
        [q(6, 30), q(12, 30), q(9, 30)],
        [q(14, 50), q(12, 50), q(12, 50)],
    ];
    let b = [q(18, 30), q(3, 30), q(12, 50)];
    let mut v = [DescDist::point(1), DescDist::point(0), DescDist::point(0)];
    for _ in 0..n {
        v = std::array::from_fn(|i| {
            let mut d = DescDist::zero();
            for (j, x) in v.iter().enumerate() {
                d.add_scaled(&a[i][j], x);
            }
            d.0[2] += &b[i];
            d
        });
    }
    let [eta2, eta2bar, eta3] = v;
    RootProbs {
        eta2,
        eta2bar,
        eta3,
    }
}

/// Tabulated closed forms of the root recursion.
pub fn root_probs_table(n: u32) -> RootProbs {
    let n = n as i64;
    let a = qpow(&q(3, 5), n);
    let b = qpow(&q(2, 5), n);
    let c = qpow(&q(1, 25), n);
    let one = qi(1);
    RootProbs {
        eta2: DescDist::from_slice(&[qi(0), b.clone(), &one - &b]),
        eta2bar: DescDist::from_slice(&[
            q(33, 28) * &a - q(5, 28) * &c,
            q(39, 28) * &a - q(29, 18) * &b + q(55, 252) * &c,
            &one - q(18, 7) * &a + q(29, 18) * &b - q(5, 126) * &c,
        ]),
        eta3: DescDist::from_slice(&[
            q(11, 14) * &a - q(3, 14) * &c,
            q(39, 42) * &a - q(28, 42) * &b + q(11, 42) * &c,
            &one - q(12, 7) * &a + q(2, 3) * &b - q(1, 21) * &c,
        ]),
    }
}

/// The tabulated `eta3` row with the signs of its `(1/25)^n` terms flipped,
/// which is the closed form the recursion actually satisfies.
pub fn eta3_sign_corrected(n: u32) -> DescDist {
    let n = n as i64;
    let a = qpow(&q(3, 5), n);
    let b = qpow(&q(2, 5), n);
    let c = qpow(&q(1, 25), n);
    DescDist::from_slice(&[
        q(11, 14) * &a + q(3, 14) * &c,
        q(39, 42) * &a - q(28, 42) * &b - q(11, 42) * &c,
        qi(1) - q(12, 7) * &a + q(2, 3) * &b + q(1, 21) * &c,
    ])
}

fn lin(terms: &[(Q, DescDist)]) -> DescDist {
    let mut d = DescDist::zero();
    for (w, x) in terms {
        d.add_scaled(w, x);
    }
    d
}

/// Cut-point formulas; index `k` is the cut point opposite corner `k`.
/// `S1` and `S3` are obtained from `S2` by rotation.
pub fn cutpoint_probs(n: u32, class: ForestClass) -> Result<[DescDist; 3]> {
    if n == 0 {
        return Err(Error::Domain("SG_0 has no cut points".into()));
    }
    let (p1, p2) = corner_probs(n - 1);
    let RootProbs {
        eta2: e2,
        eta2bar: eb,
        eta3: e3,
    } = root_probs(n - 1);
    let c = |a: &DescDist, b: &DescDist| a.convolve(b);
    let s2 = |d: &DescDist| d.shift(2);
    let tree_b = lin(&[
        (q(2, 3), c(&p1, &e2.plus(&eb).scaled(&q(1, 2)))),
        (q(1, 3), s2(&p1)),
    ]);
    let tree_l = lin(&[
        (q(2, 6), c(&p1, &eb)),
        (q(1, 6), c(&p1, &e2)),
        (q(2, 6), s2(&p1)),
        (q(1, 6), s2(&p2)),
    ]);
    let s2_b = lin(&[
        (q(2, 10), c(&p1, &eb)),
        (q(2, 10), c(&p1, &e2)),
        (q(1, 10), c(&p2, &e2)),
        (q(2, 10), s2(&p2)),
        (q(3, 10), s2(&p1)),
    ]);
    let s2_r = lin(&[
        (q(2, 10), c(&p1, &eb)),
        (q(2, 10), c(&p1, &e2)),
        (q(1, 10), c(&p2, &e2)),
        (q(2, 10), c(&p2, &eb)),
        (q(3, 10), c(&p1, &e3)),
    ]);
    let s2_l = lin(&[
        (q(2, 10), c(&p1, &eb)),
        (q(1, 10), c(&p1, &e2)),
        (q(1, 10), c(&p2, &e2)),
        (q(2, 10), c(&p2, &eb)),
        (q(1, 10), s2(&p2)),
        (q(3, 10), c(&p1, &e3)),
    ]);
    let r_b = lin(&[
        (q(12, 50), c(&p1, &e3)),
        (q(6, 50), c(&p1, &eb)),
        (q(12, 50), c(&p2, &e3)),
        (q(6, 50), c(&p1, &e2)),
        (q(8, 50), c(&p2, &eb)),
        (q(6, 50), c(&p2, &e2)),
    ]);
    // index: [opposite left (right cut), opposite right (left cut), opposite top (bottom cut)]
    Ok(match class {
        ForestClass::T => [tree_l.clone(), tree_l, tree_b],
        ForestClass::S2 => [s2_r, s2_l, s2_b],
        ForestClass::S1 => [s2_b, s2_r, s2_l],
        ForestClass::S3 => [s2_l, s2_b, s2_r],
        ForestClass::R => [r_b.clone(), r_b.clone(), r_b],
    })
}

/// Basis `(1, (3/5)^n, (2/5)^n, (1/15)^n, (1/25)^n, (2/75)^n, (1/375)^n)`.
pub fn m_basis(n: u32) -> [Q; 7] {
    let n = n as i64;
    [
        qi(1),
        qpow(&q(3, 5), n),
        qpow(&q(2, 5), n),
        qpow(&q(1, 15), n),
        qpow(&q(1, 25), n),
        qpow(&q(2, 75), n),
        qpow(&q(1, 375), n),
    ]
}

type Coef = [[(i64, i64); 7]; 4];

const TREE_B: Coef = [
    [
        (0, 1),
        (605, 1176),
        (0, 1),
        (0, 1),
        (-1375, 588),
        (0, 1),
        (3125, 1176),
    ],
    [
        (0, 1),
        (110, 147),
        (-605, 1512),
        (0, 1),
        (2375, 2646),
        (1375, 1512),
        (-15625, 2646),
    ],
    [
        (11, 14),
        (-375, 392),
        (55, 189),
        (-25, 14),
        (5375, 1323),
        (-1375, 756),
        (40625, 10584),
    ],
    [
        (3, 14),
        (-15, 49),
        (55, 504),
        (25, 14),
        (-4625, 1764),
        (1375, 1512),
        (-3125, 5292),
    ],
];
const TREE_L: Coef = [
    [
        (0, 1),
        (605, 1176),
        (0, 1),
        (0, 1),
        (-1375, 588),
        (0, 1),
        (3125, 1176),
    ],
    [
        (0, 1),
        (110, 147),
        (-275, 378),
        (0, 1),
        (2375, 2646),
        (625, 378),
        (-15625, 2646),
    ],
    [
        (11, 14),
        (-375, 392),
        (100, 189),
        (-20, 21),
        (5375, 1323),
        (-625, 189),
        (40625, 10584),
    ],
    [
        (3, 14),
        (-15, 49),
        (25, 126),
        (20, 21),
        (-4625, 1764),
        (625, 378),
        (-3125, 5292),
    ],
];
const S2_B: Coef = [
    [
        (0, 1),
        (121, 392),
        (0, 1),
        (0, 1),
        (-275, 196),
        (0, 1),
        (625, 392),
    ],
    [
        (0, 1),
        (22, 49),
        (-11, 252),
        (0, 1),
        (475, 882),
        (85, 63),
        (-3125, 882),
    ],
    [
        (11, 14),
        (-225, 392),
        (2, 63),
        (-2, 7),
        (1075, 441),
        (-170, 63),
        (8125, 3528),
    ],
    [
        (3, 14),
        (-9, 49),
        (1, 84),
        (2, 7),
        (-925, 588),
        (85, 63),
        (-625, 1764),
    ],
];
const S2_R: Coef = [
    [
        (0, 1),
        (363, 392),
        (0, 1),
        (0, 1),
        (-110, 392),
        (0, 1),
        (-1625, 392),
    ],
    [
        (0, 1),
        (66, 49),
        (-77, 72),
        (0, 1),
        (95, 882),
        (-25, 72),
        (8125, 882),
    ],
    [
        (11, 14),
        (-675, 392),
        (7, 9),
        (-2, 7),
        (215, 441),
        (25, 36),
        (-21125, 3528),
    ],
    [
        (3, 14),
        (-27, 49),
        (7, 24),
        (2, 7),
        (-185, 588),
        (-25, 72),
        (1625, 1764),
    ],
];
const S2_L: Coef = [
    [
        (0, 1),
        (363, 392),
        (0, 1),
        (0, 1),
        (-110, 392),
        (0, 1),
        (-1625, 392),
    ],
    [
        (0, 1),
        (66, 49),
        (-319, 252),
        (0, 1),
        (95, 882),
        (25, 252),
        (8125, 882),
    ],
    [
        (11, 14),
        (-675, 392),
        (58, 63),
        (3, 14),
        (215, 441),
        (-25, 126),
        (-21125, 3528),
    ],
    [
        (3, 14),
        (-27, 49),
        (29, 84),
        (-3, 14),
        (-185, 588),
        (25, 252),
        (1625, 1764),
    ],
];
const R_B: Coef = [
    [
        (0, 1),
        (363, 392),
        (0, 1),
        (0, 1),
        (814, 392),
        (0, 1),
        (195, 392),
    ],
    [
        (0, 1),
        (66, 49),
        (-2629, 2520),
        (0, 1),
        (-703, 882),
        (-227, 168),
        (-325, 294),
    ],
    [
        (11, 14),
        (-675, 392),
        (239, 315),
        (57, 70),
        (-1591, 441),
        (227, 84),
        (845, 1176),
    ],
    [
        (3, 14),
        (-27, 49),
        (239, 840),
        (-57, 70),
        (1369, 588),
        (-227, 168),
        (-65, 588),
    ],
];

fn eval(c: &Coef, n: u32) -> DescDist {
    let m = m_basis(n);
    let mut d = DescDist::zero();
    for (k, row) in c.iter().enumerate() {
        d.0[k] = row.iter().zip(&m).map(|(&(a, b), x)| q(a, b) * x).sum();
    }
    d
}

fn eval_series(c: &Coef, r: &Q) -> DescDist {
    let basis = m_basis(1);
    let mut d = DescDist::zero();
    for (k, row) in c.iter().enumerate() {
        d.0[k] = row
            .iter()
            .zip(&basis)
            .map(|(&(a, b), beta)| {
                let x = r * beta;
                q(a, b) * &x / (qi(1) - x)
            })
            .sum();
    }
    d
}

/// `sum_{n >= 1} r^n` times the tabulated cut-point laws, for `|r| < 1`.
pub fn cutpoint_series(class: ForestClass, r: &Q) -> [DescDist; 3] {
    let (tb, tl) = (eval_series(&TREE_B, r), eval_series(&TREE_L, r));
    let (sb, sr, sl) = (
        eval_series(&S2_B, r),
        eval_series(&S2_R, r),
        eval_series(&S2_L, r),
    );
    let rb = eval_series(&R_B, r);
    match class {
        ForestClass::T => [tl.clone(), tl, tb],
        ForestClass::S2 => [sr, sl, sb],
        ForestClass::S1 => [sb, sr, sl],
        ForestClass::S3 => [sl, sb, sr],
        ForestClass::R => [rb.clone(), rb.clone(), rb],
    }
}

/// Tabulated closed forms of [`cutpoint_probs`], same indexing.
pub fn cutpoint_closed(n: u32, class: ForestClass) -> Result<[DescDist; 3]> {
    if n == 0 {
        return Err(Error::Domain("SG_0 has no cut points".into()));
    }
    let (tb, tl) = (eval(&TREE_B, n), eval(&TREE_L, n));
    let (sb, sr, sl) = (eval(&S2_B, n), eval(&S2_R, n), eval(&S2_L, n));
    let rb = eval(&R_B, n);
    Ok(match class {
        ForestClass::T => [tl.clone(), tl, tb],
        ForestClass::S2 => [sr, sl, sb],
        ForestClass::S1 => [sb, sr, sl],
        ForestClass::S3 => [sl, sb, sr],
        ForestClass::R => [rb.clone(), rb.clone(), rb],
    })
}

/// Summed cut-point laws per class in the order `T, S1, S2, S3, R`.
pub fn e_terms(n: u32) -> Result<[DescDist; 5]> {
    let mut out: [DescDist; 5] = std::array::from_fn(|_| DescDist::zero());
    for (i, class) in crate::census::FOREST_CLASSES.iter().enumerate() {
        for d in cutpoint_probs(n, *class)? {
            out[i] = out[i].plus(&d);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_power_forms() {
        assert_eq!(matrix_power_2x2(0), [[qi(1), qi(0)], [qi(0), qi(1)]]);
        assert_eq!(matrix_power_2x2_closed(1), base2());
        for n in 0..=10 {
            assert_eq!(matrix_power_2x2(n), matrix_power_2x2_closed(n));
        }
    }

    #[test]
    fn corner_forms() {
        let (p1, p2) = corner_probs(0);
        assert_eq!(p1, DescDist::from_slice(&[q(2, 3), q(1, 3)]));
        assert_eq!(p2, DescDist::point(0));
        for n in 0..=8 {
            assert_eq!(corner_probs(n), corner_probs_closed(n));
            let gap = &corner_probs(n).0 .0[0] - q(11, 14);
            assert_eq!(gap, -q(5, 42) * qpow(&q(1, 15), n as i64));
        }
    }

    #[test]
    fn root_forms() {
        let r = root_probs(0);
        assert_eq!(
            (r.eta2.clone(), r.eta2bar.clone(), r.eta3.clone()),
            (DescDist::point(1), DescDist::point(0), DescDist::point(0))
        );
        assert_eq!(root_probs(1).eta2bar.0[0], q(7, 10));
        for n in 0..=8 {
            let (rec, tab) = (root_probs(n), root_probs_table(n));
            assert_eq!(
                (&rec.eta2, &rec.eta2bar),
                (&tab.eta2, &tab.eta2bar),
                "n = {n}"
            );
            assert_eq!(rec.eta2.0[1], qpow(&q(2, 5), n as i64));
            assert_ne!(rec.eta3, tab.eta3, "n = {n}");
            assert_eq!(rec.eta3, eta3_sign_corrected(n), "n = {n}");
        }
    }

    #[test]
    fn cut_forms() {
        for n in 1..=8 {
            for class in crate::census::FOREST_CLASSES {
                let a = cutpoint_probs(n, class).unwrap();
                assert_eq!(a, cutpoint_closed(n, class).unwrap(), "n = {n} {class:?}");
                assert!(a.iter().all(|d| d.is_valid()));
            }
        }
    }
}
