//! Exact rational arithmetic helpers on top of `num`.
//!
//! Every scalar in the symbolic layer is a `Rat` (arbitrary-precision
//! rational, reduced, positive denominator). This module adds the pieces
//! the kernel needs beyond plain field operations: exact rational powers,
//! perfect-root detection and deterministic float conversion.

use alloc::string::ToString;
use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn is_integer(q: &Rat) -> bool {
    q.denom().is_one()
}

/// Exponents are folded exactly only while they stay this small; larger
/// ones are kept symbolic so coefficient growth stays observable.
const MAX_FOLD_EXP: u32 = 4096;

fn exp_to_u32(n: &BigInt) -> Option<u32> {
    n.to_u32().filter(|k| *k <= MAX_FOLD_EXP)
}

/// `base^k` for integer `k`. `None` when `base == 0` and `k < 0`, or when
/// `|k|` exceeds the fold guard.
pub fn pow_int(base: &Rat, k: &BigInt) -> Option<Rat> {
    if k.is_zero() {
        return Some(Rat::one());
    }
    let (neg, mag) = if k.is_negative() {
        if base.is_zero() {
            return None;
        }
        (true, -k)
    } else {
        (false, k.clone())
    };
    let e = exp_to_u32(&mag)?;
    let p = Rat::new(base.numer().pow(e), base.denom().pow(e));
    Some(if neg { p.recip() } else { p })
}

fn perfect_root(n: &BigInt, k: u32) -> Option<BigInt> {
    debug_assert!(k >= 1);
    if n.is_negative() {
        return None;
    }
    let r = n.nth_root(k);
    if r.pow(k) == *n {
        Some(r)
    } else {
        None
    }
}

/// Exact `base^(p/q)` with real-root semantics (`q > 0`, `p/q` reduced).
/// `None` when the value is irrational, imaginary, or a negative power of
/// zero — callers decide whether that is an error or "stay symbolic".
pub fn pow_exact(base: &Rat, exponent: &Rat) -> Option<Rat> {
    if is_integer(exponent) {
        return pow_int(base, exponent.numer());
    }
    if base.is_zero() {
        return if exponent.is_positive() {
            Some(Rat::zero())
        } else {
            None
        };
    }
    let q = exp_to_u32(exponent.denom())?;
    let negative_base = base.is_negative();
    if negative_base && q % 2 == 0 {
        return None;
    }
    let mag = base.abs();
    let rn = perfect_root(mag.numer(), q)?;
    let rd = perfect_root(mag.denom(), q)?;
    let root = Rat::new(rn, rd);
    let mut out = pow_int(&root, exponent.numer())?;
    if negative_base && exponent.numer().is_odd() {
        out = -out;
    }
    Some(out)
}

/// IEEE double view of a rational; `None` when the conversion is not finite.
pub fn to_f64(q: &Rat) -> Option<f64> {
    q.to_f64().filter(|v| v.is_finite())
}

/// Real-root floating power: odd denominators extend to negative bases,
/// even denominators require a nonnegative base.
pub fn pow_f64(base: f64, exponent: &Rat) -> crate::error::Result<f64> {
    use crate::error::Error;
    let e = exponent
        .to_f64()
        .ok_or(Error::OverflowError)?;
    let v = if is_integer(exponent) {
        if base == 0.0 && exponent.is_negative() {
            return Err(Error::DomainError("division by zero"));
        }
        match exponent.numer().to_i32() {
            Some(k) => base.powi(k),
            None => return Err(Error::OverflowError),
        }
    } else if base > 0.0 {
        base.powf(e)
    } else if base == 0.0 {
        if exponent.is_positive() {
            0.0
        } else {
            return Err(Error::DomainError("division by zero"));
        }
    } else if exponent.denom().is_odd() {
        let mag = (-base).powf(e);
        if exponent.numer().is_odd() {
            -mag
        } else {
            mag
        }
    } else {
        return Err(Error::DomainError("even root of a negative number"));
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::OverflowError)
    }
}

/// Parses "3", "-3", "3/4", "-3/4" and decimal literals like "1.25" into an
/// exact rational.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let num: BigInt = n.trim().parse().ok()?;
        let den: BigInt = d.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(Rat::new(num, den));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let negative = int_part.trim_start().starts_with('-');
        let int: BigInt = if int_part.is_empty() || int_part == "-" {
            BigInt::zero()
        } else {
            int_part.parse().ok()?
        };
        let frac: BigInt = frac_part.parse().ok()?;
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let mag = int.abs() * &scale + frac;
        let num = if negative { -mag } else { mag };
        return Some(Rat::new(num, scale));
    }
    let n: BigInt = s.parse().ok()?;
    Some(Rat::from_integer(n))
}

/// Canonical text form: "n" or "n/d".
pub fn format_rat(q: &Rat) -> alloc::string::String {
    if is_integer(q) {
        q.numer().to_string()
    } else {
        alloc::format!("{}/{}", q.numer(), q.denom())
    }
}

/// Nonnegative gcd of two rationals: gcd of numerators over lcm of
/// denominators; gcd(0, x) = |x|.
pub fn gcd(a: &Rat, b: &Rat) -> Rat {
    if a.is_zero() {
        return b.abs();
    }
    if b.is_zero() {
        return a.abs();
    }
    let num = a.numer().gcd(b.numer());
    let den = a.denom().lcm(b.denom());
    Rat::new(num, den)
}

/// Sign of the rational as -1, 0, 1.
pub fn sign(q: &Rat) -> i32 {
    match q.numer().sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_powers() {
        assert_eq!(pow_exact(&rat_int(4), &rat(1, 2)), Some(rat_int(2)));
        assert_eq!(pow_exact(&rat_int(4), &rat(3, 2)), Some(rat_int(8)));
        assert_eq!(pow_exact(&rat(9, 4), &rat(1, 2)), Some(rat(3, 2)));
        assert_eq!(pow_exact(&rat_int(2), &rat(1, 2)), None);
        assert_eq!(pow_exact(&rat_int(-8), &rat(1, 3)), Some(rat_int(-2)));
        assert_eq!(pow_exact(&rat_int(-8), &rat(2, 3)), Some(rat_int(4)));
        assert_eq!(pow_exact(&rat_int(-4), &rat(1, 2)), None);
        assert_eq!(pow_exact(&rat_int(0), &rat(-1, 1)), None);
        assert_eq!(pow_exact(&rat(1, 8), &rat(-2, 3)), Some(rat_int(4)));
    }

    #[test]
    fn float_powers() {
        assert!((pow_f64(2.0, &rat(3, 2)).unwrap() - 2.0f64.powf(1.5)).abs() < 1e-15);
        assert!((pow_f64(-8.0, &rat(1, 3)).unwrap() + 2.0).abs() < 1e-12);
        assert!((pow_f64(-8.0, &rat(2, 3)).unwrap() - 4.0).abs() < 1e-12);
        assert!(pow_f64(-1.0, &rat(1, 2)).is_err());
        assert!(pow_f64(0.0, &rat(-1, 1)).is_err());
    }

    #[test]
    fn parsing() {
        assert_eq!(parse_rat("3/4"), Some(rat(3, 4)));
        assert_eq!(parse_rat("-3/4"), Some(rat(-3, 4)));
        assert_eq!(parse_rat("1.25"), Some(rat(5, 4)));
        assert_eq!(parse_rat("-0.5"), Some(rat(-1, 2)));
        assert_eq!(parse_rat("17"), Some(rat_int(17)));
        assert_eq!(parse_rat("1/0"), None);
    }
}
