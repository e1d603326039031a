//! Exact rational helpers.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qb(n: &BigUint) -> Q {
    Q::from_integer(BigInt::from(n.clone()))
}

/// `base^e` for a possibly negative exponent.
pub fn qpow(base: &Q, e: i64) -> Q {
    if e >= 0 {
        num_traits::pow(base.clone(), e as usize)
    } else {
        num_traits::pow(base.recip(), (-e) as usize)
    }
}

/// "num/den" rendering, integers without a denominator.
pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((a, b)) => {
            let a: BigInt = a.trim().parse().ok()?;
            let b: BigInt = b.trim().parse().ok()?;
            if b.is_zero() {
                None
            } else {
                Some(Q::new(a, b))
            }
        }
        None => Some(Q::from_integer(s.parse().ok()?)),
    }
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // huge numerator and denominator: scale both down
        let shift = x.denom().bits().max(x.numer().bits()).saturating_sub(900);
        let n = (x.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (x.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Decimal rendering with `digits` places after the point, truncated toward zero.
pub fn decimal(x: &Q, digits: usize) -> String {
    let neg = x.is_negative();
    let a = x.abs();
    let scale = num_traits::pow(BigInt::from(10), digits);
    let v = (a.numer() * &scale) / a.denom();
    let s = v.to_string();
    let s = if s.len() <= digits {
        format!("{}{}", "0".repeat(digits + 1 - s.len()), s)
    } else {
        s
    };
    let (i, f) = s.split_at(s.len() - digits);
    let body = if digits == 0 {
        i.to_string()
    } else {
        format!("{i}.{f}")
    };
    if neg && !v.is_zero() {
        format!("-{body}")
    } else {
        body
    }
}

/// Best rational approximation of `x` with denominator at most `max_den`.
pub fn limit_denominator(x: &Q, max_den: &BigInt) -> Q {
    let (mut p0, mut q0, mut p1, mut q1) =
        (BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::zero());
    let (mut n, mut d) = (x.numer().clone(), x.denom().clone());
    loop {
        let a = num_integer::Integer::div_floor(&n, &d);
        let q2 = &q0 + &a * &q1;
        if &q2 > max_den {
            break;
        }
        let p2 = &p0 + &a * &p1;
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        let r = &n - &a * &d;
        n = std::mem::replace(&mut d, r);
        if d.is_zero() {
            break;
        }
    }
    let k = num_integer::Integer::div_floor(&(max_den - &q0), &q1);
    let b1 = Q::new(&p0 + &k * &p1, &q0 + &k * &q1);
    let b2 = Q::new(p1, q1);
    if (&b2 - x).abs() <= (&b1 - x).abs() {
        b2
    } else {
        b1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting() {
        assert_eq!(fmt_q(&q(6, 4)), "3/2");
        assert_eq!(fmt_q(&qi(-5)), "-5");
        assert_eq!(decimal(&q(1, 3), 4), "0.3333");
        assert_eq!(decimal(&q(-7, 2), 2), "-3.50");
        assert_eq!(decimal(&q(1, 200), 2), "0.00");
        assert_eq!(parse_q("7259/5616"), Some(q(7259, 5616)));
    }

    #[test]
    fn continued_fraction() {
        let x = q(635, 432) + q(1, 1_000_000_000_000i64) * q(1, 1_000_000);
        assert_eq!(limit_denominator(&x, &BigInt::from(100_000)), q(635, 432));
        assert_eq!(limit_denominator(&q(355, 113), &BigInt::from(10)), q(22, 7));
    }
}
