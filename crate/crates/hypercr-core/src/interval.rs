//! Certified rational interval arithmetic.
//!
//! Sample points are exact rationals, so invariants can be evaluated in
//! exact arithmetic; the only irrational operations are roots, which get
//! rigorous dyadic bounds from integer nth-roots. Endpoints are rounded
//! outward to a dyadic grid after every operation to keep denominators
//! bounded. The result is an enclosure: the true value of the expression
//! at the point always lies inside, so zero verdicts are proofs at the
//! sampled points rather than floating-point guesses.

use crate::error::{Error, Result};
use crate::expr::{Expr, JetPoint};
use crate::rat::{self, Rat};
use alloc::collections::BTreeMap;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// A closed interval with exact rational endpoints, `lo <= hi`.
#[derive(Clone, Debug, PartialEq)]
pub struct RatInterval {
    lo: Rat,
    hi: Rat,
}

fn floor_dyadic(q: &Rat, bits: u32) -> Rat {
    let scale = BigInt::one() << bits;
    let n = (q.numer() * &scale).div_floor(q.denom());
    Rat::new(n, scale)
}

fn ceil_dyadic(q: &Rat, bits: u32) -> Rat {
    let scale = BigInt::one() << bits;
    let n = (q.numer() * &scale).div_ceil(q.denom());
    Rat::new(n, scale)
}

impl RatInterval {
    pub fn point(q: Rat) -> RatInterval {
        RatInterval { lo: q.clone(), hi: q }
    }

    pub fn lo(&self) -> &Rat {
        &self.lo
    }

    pub fn hi(&self) -> &Rat {
        &self.hi
    }

    pub fn width(&self) -> Rat {
        &self.hi - &self.lo
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    /// Largest absolute value over the interval.
    pub fn abs_upper(&self) -> Rat {
        let a = self.lo.abs();
        let b = self.hi.abs();
        if a > b {
            a
        } else {
            b
        }
    }

    /// Smallest absolute value over the interval (zero when it straddles).
    pub fn abs_lower(&self) -> Rat {
        if self.contains_zero() {
            Rat::zero()
        } else if self.lo.is_positive() {
            self.lo.clone()
        } else {
            -self.hi.clone()
        }
    }

    pub fn mid_f64(&self) -> f64 {
        let mid = (&self.lo + &self.hi) / rat::rat_int(2);
        rat::to_f64(&mid).unwrap_or(f64::NAN)
    }

    /// Round endpoints outward onto the dyadic grid 2^-bits.
    fn round_out(self, bits: u32) -> RatInterval {
        RatInterval {
            lo: floor_dyadic(&self.lo, bits),
            hi: ceil_dyadic(&self.hi, bits),
        }
    }

    pub fn add(&self, other: &RatInterval, bits: u32) -> RatInterval {
        RatInterval {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
        .round_out(bits)
    }

    pub fn mul(&self, other: &RatInterval, bits: u32) -> RatInterval {
        let c: [Rat; 4] = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let mut lo = c[0].clone();
        let mut hi = c[0].clone();
        for v in &c[1..] {
            if *v < lo {
                lo = v.clone();
            }
            if *v > hi {
                hi = v.clone();
            }
        }
        RatInterval { lo, hi }.round_out(bits)
    }

    pub fn neg(&self) -> RatInterval {
        RatInterval {
            lo: -self.hi.clone(),
            hi: -self.lo.clone(),
        }
    }

    fn recip(&self, bits: u32) -> Result<RatInterval> {
        if self.contains_zero() {
            return Err(Error::DomainError("interval straddles zero in reciprocal"));
        }
        RatInterval {
            lo: self.hi.clone(),
            hi: self.lo.clone(),
        }
        .map_recip()
        .map(|iv| iv.round_out(bits))
    }

    fn map_recip(self) -> Result<RatInterval> {
        Ok(RatInterval {
            lo: self.lo.recip(),
            hi: self.hi.recip(),
        })
    }

    /// Integer power with correct handling of even powers across zero.
    pub fn pow_int(&self, k: &BigInt, bits: u32) -> Result<RatInterval> {
        if k.is_zero() {
            return Ok(RatInterval::point(Rat::one()));
        }
        if k.is_negative() {
            let pos = self.pow_int(&-k, bits)?;
            return pos.recip(bits);
        }
        let e = k.to_u32().ok_or(Error::OverflowError)?;
        let plo = rat::pow_int(&self.lo, k).ok_or(Error::DomainError("zero base"))?;
        let phi = rat::pow_int(&self.hi, k).ok_or(Error::DomainError("zero base"))?;
        let out = if e % 2 == 1 {
            RatInterval { lo: plo, hi: phi }
        } else if !self.lo.is_negative() {
            RatInterval { lo: plo, hi: phi }
        } else if !self.hi.is_positive() {
            RatInterval { lo: phi, hi: plo }
        } else {
            let hi = {
                let a = plo;
                let b = phi;
                if a > b {
                    a
                } else {
                    b
                }
            };
            RatInterval {
                lo: Rat::zero(),
                hi,
            }
        };
        Ok(out.round_out(bits))
    }

    /// Rigorous q-th root bounds of a nonnegative rational via integer
    /// nth-roots on the dyadic grid.
    fn root_bounds(x: &Rat, q: u32, bits: u32) -> (Rat, Rat) {
        debug_assert!(!x.is_negative());
        let scale = BigInt::one() << (bits * q);
        let lo_int = ((x.numer() * &scale).div_floor(x.denom())).nth_root(q);
        let hi_int = ((x.numer() * &scale).div_ceil(x.denom())).nth_root(q) + BigInt::one();
        let den = BigInt::one() << bits;
        (
            Rat::new(lo_int, den.clone()),
            Rat::new(hi_int, den),
        )
    }

    /// Rational power with real-root semantics (odd denominators extend to
    /// negative bases; even denominators require nonnegative bases).
    pub fn pow_rat(&self, e: &Rat, bits: u32) -> Result<RatInterval> {
        if rat::is_integer(e) {
            return self.pow_int(e.numer(), bits);
        }
        let q = e
            .denom()
            .to_u32()
            .ok_or(Error::OverflowError)?;
        let rooted = if !self.lo.is_negative() {
            let (lo, _) = Self::root_bounds(&self.lo, q, bits);
            let (_, hi) = Self::root_bounds(&self.hi, q, bits);
            RatInterval { lo, hi }
        } else if q % 2 == 1 && !self.hi.is_positive() {
            // odd root of a nonpositive interval: root(|x|) mirrored
            let (lo_m, _) = Self::root_bounds(&self.hi.abs(), q, bits);
            let (_, hi_m) = Self::root_bounds(&self.lo.abs(), q, bits);
            RatInterval {
                lo: -hi_m,
                hi: -lo_m,
            }
        } else if q % 2 == 1 {
            // straddles zero: odd root is monotone through it
            let (_, hi) = Self::root_bounds(&self.hi, q, bits);
            let (_, lo_m) = Self::root_bounds(&self.lo.abs(), q, bits);
            RatInterval { lo: -lo_m, hi }
        } else {
            return Err(Error::DomainError("even root of a negative interval"));
        };
        rooted.pow_int(e.numer(), bits)
    }
}

type IntervalMemo = BTreeMap<usize, RatInterval>;

/// Certified evaluation of an expression at an exact rational point.
pub fn eval_interval(e: &Expr, p: &JetPoint, bits: u32) -> Result<RatInterval> {
    let coords = [
        RatInterval::point(p.coord(crate::expr::Var::T).clone()),
        RatInterval::point(p.coord(crate::expr::Var::X0).clone()),
        RatInterval::point(p.coord(crate::expr::Var::X1).clone()),
        RatInterval::point(p.coord(crate::expr::Var::X2).clone()),
    ];
    let mut memo = IntervalMemo::new();
    eval_iv(e, &coords, bits, &mut memo)
}

fn eval_iv(
    e: &Expr,
    coords: &[RatInterval; 4],
    bits: u32,
    memo: &mut IntervalMemo,
) -> Result<RatInterval> {
    if let Some(hit) = memo.get(&e.ptr_key()) {
        return Ok(hit.clone());
    }
    use crate::expr::Node;
    let out = match e.node() {
        Node::Num(q) => RatInterval::point(q.clone()),
        Node::Var(v) => coords[v.index()].clone(),
        Node::Add(ts) => {
            let mut acc = RatInterval::point(Rat::zero());
            for t in ts {
                let tv = eval_iv(t, coords, bits, memo)?;
                acc = acc.add(&tv, bits);
            }
            acc
        }
        Node::Mul(fs) => {
            let mut acc = RatInterval::point(Rat::one());
            for f in fs {
                let fv = eval_iv(f, coords, bits, memo)?;
                acc = acc.mul(&fv, bits);
            }
            acc
        }
        Node::Pow(b, ex) => {
            let bv = eval_iv(b, coords, bits, memo)?;
            bv.pow_rat(ex, bits)?
        }
    };
    memo.insert(e.ptr_key(), out.clone());
    Ok(out)
}
