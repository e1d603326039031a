//! Fixed-point twin of the aggregate recursion, for deep levels where exact
//! rationals get slow. Values are integers scaled by `2^FRAC_BITS`.

use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::Zero;

use crate::census::{ForestClass, COPY_CORNERS};
use crate::rat::Q;

use super::transfer::{base_aggregates, catalog, class_mixture, split_weights, Aggregate};
use super::MAX_DES;

pub const FRAC_BITS: u64 = 384;

pub fn to_fixed(x: &Q) -> BigInt {
    (x.numer() << FRAC_BITS) / x.denom()
}

pub fn to_q(x: &BigInt) -> Q {
    Q::new(x.clone(), BigInt::from(1) << FRAC_BITS)
}

type Fx = [BigInt; 5];

fn zero() -> Fx {
    std::array::from_fn(|_| BigInt::zero())
}

fn add_scaled(acc: &mut Fx, w: &BigInt, d: &Fx) {
    for k in 0..=MAX_DES {
        if !d[k].is_zero() {
            acc[k] += (w * &d[k]) >> FRAC_BITS;
        }
    }
}

fn convolve(a: &Fx, b: &Fx) -> Fx {
    let mut d = zero();
    for i in 0..=MAX_DES {
        if a[i].is_zero() {
            continue;
        }
        for j in 0..=MAX_DES - i {
            if !b[j].is_zero() {
                d[i + j] += (&a[i] * &b[j]) >> FRAC_BITS;
            }
        }
    }
    d
}

#[derive(Debug, Clone)]
pub struct FxAggregate {
    pub interior: Fx,
    pub corners: [Fx; 3],
}

fn from_exact(a: &Aggregate) -> FxAggregate {
    let f = |d: &super::DescDist| -> Fx { std::array::from_fn(|k| to_fixed(&d.0[k])) };
    FxAggregate {
        interior: f(&a.interior),
        corners: std::array::from_fn(|c| f(&a.corners[c])),
    }
}

fn step(prev: &[Option<FxAggregate>], level: u32) -> Vec<Option<FxAggregate>> {
    let weights = split_weights(level);
    let cat = catalog();
    (0..cat.types.len())
        .map(|i| {
            if weights[i].iter().all(|w| w.is_zero()) {
                return None;
            }
            let mut interior = zero();
            let mut corners = [zero(), zero(), zero()];
            for ((_, kids), w) in cat.splits[i].iter().zip(&weights[i]) {
                if w.is_zero() {
                    continue;
                }
                let w = to_fixed(w);
                let mut cut: [Option<Fx>; 3] = Default::default();
                for d in 0..3 {
                    let a = prev[kids[d]].as_ref().expect("child type with forests");
                    add_scaled(&mut interior, &w, &a.interior);
                    for (c, &bv) in COPY_CORNERS[d].iter().enumerate() {
                        if bv < 3 {
                            add_scaled(&mut corners[bv], &w, &a.corners[c]);
                        } else {
                            let slot = &mut cut[bv - 3];
                            *slot = Some(match slot.take() {
                                None => a.corners[c].clone(),
                                Some(o) => convolve(&o, &a.corners[c]),
                            });
                        }
                    }
                }
                for dist in cut.iter() {
                    add_scaled(&mut interior, &w, dist.as_ref().expect("both copies"));
                }
            }
            Some(FxAggregate { interior, corners })
        })
        .collect()
}

/// Fixed-point aggregates of every type at `level`, memoized.
pub fn aggregates_at(level: u32) -> Vec<Option<FxAggregate>> {
    static CACHE: OnceLock<Mutex<Vec<Vec<Option<FxAggregate>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| {
        Mutex::new(vec![base_aggregates()
            .iter()
            .map(|a| a.as_ref().map(from_exact))
            .collect()])
    });
    let mut c = cache.lock().unwrap();
    while c.len() <= level as usize {
        let n = c.len() as u32;
        let next = step(c.last().unwrap(), n);
        c.push(next);
    }
    c[level as usize].clone()
}

/// Class mixture of the fixed-point aggregates.
pub fn class_aggregate(class: ForestClass, level: u32) -> FxAggregate {
    let lvl = aggregates_at(level);
    let mut out = FxAggregate {
        interior: zero(),
        corners: [zero(), zero(), zero()],
    };
    for (i, w) in class_mixture(class, level) {
        let a = lvl[i].as_ref().expect("class with forests");
        let w = to_fixed(&w);
        add_scaled(&mut out.interior, &w, &a.interior);
        for c in 0..3 {
            add_scaled(&mut out.corners[c], &w, &a.corners[c]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::census::FOREST_CLASSES;
    use crate::rat::to_f64;

    #[test]
    fn agrees_with_exact() {
        for n in 0..=6 {
            for class in FOREST_CLASSES {
                let e = super::super::transfer::class_aggregate(class, n);
                let f = class_aggregate(class, n);
                for k in 0..=MAX_DES {
                    let diff = to_f64(&(to_q(&f.interior[k]) - &e.interior.0[k]));
                    assert!(diff.abs() < 1e-90, "{class:?} {n} {k}");
                }
            }
        }
    }
}
