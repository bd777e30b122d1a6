//! Fast exact zero detection by evaluation modulo large primes.
//!
//! A rational value is mapped into F_p (or into F_p[s]/(s^2 - u0) when the
//! expression contains a single square root); the expression is then
//! evaluated with word-sized arithmetic. A nonzero image proves the value
//! is nonzero; a zero image across independent primes leaves a false-zero
//! probability around 2^-122 per sample, far below any floating concern.
//! Inconclusive cases (a denominator hit by the prime) fall back to the
//! exact or interval evaluators.

use crate::expr::{Expr, JetPoint, Node};
use crate::quad::RadicalShape;
use crate::rat::Rat;
use alloc::collections::BTreeMap;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};

/// Mersenne prime 2^61 - 1 and the largest 64-bit prime 2^64 - 59.
pub(crate) const PRIMES: [u64; 2] = [2_305_843_009_213_693_951, 18_446_744_073_709_551_557];

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
struct Fp2 {
    a: u64,
    b: u64,
}

pub(crate) struct ModCtx {
    p: u64,
    /// Radicand value mod p (0 when the shape has no radical).
    u0: u64,
}

impl ModCtx {
    /// Plain F_p context for rational-shape evaluation.
    pub(crate) fn rational(prime: u64) -> ModCtx {
        ModCtx { p: prime, u0: 0 }
    }

    pub(crate) fn mul(&self, x: u64, y: u64) -> u64 {
        ((x as u128 * y as u128) % self.p as u128) as u64
    }

    pub(crate) fn add(&self, x: u64, y: u64) -> u64 {
        ((x as u128 + y as u128) % self.p as u128) as u64
    }

    pub(crate) fn sub(&self, x: u64, y: u64) -> u64 {
        self.add(x, self.p - y % self.p)
    }

    pub(crate) fn pow(&self, mut base: u64, mut e: u64) -> u64 {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub(crate) fn inv(&self, x: u64) -> Option<u64> {
        if x == 0 {
            None
        } else {
            Some(self.pow(x, self.p - 2))
        }
    }

    fn q_add(&self, x: Fp2, y: Fp2) -> Fp2 {
        Fp2 {
            a: self.add(x.a, y.a),
            b: self.add(x.b, y.b),
        }
    }

    fn q_mul(&self, x: Fp2, y: Fp2) -> Fp2 {
        Fp2 {
            a: self.add(self.mul(x.a, y.a), self.mul(self.mul(x.b, y.b), self.u0)),
            b: self.add(self.mul(x.a, y.b), self.mul(x.b, y.a)),
        }
    }

    fn q_inv(&self, x: Fp2) -> Option<Fp2> {
        let norm = self.sub(self.mul(x.a, x.a), self.mul(self.mul(x.b, x.b), self.u0));
        let ninv = self.inv(norm)?;
        Some(Fp2 {
            a: self.mul(x.a, ninv),
            b: self.mul(self.sub(0, x.b), ninv),
        })
    }

    fn q_pow(&self, mut base: Fp2, mut e: u64) -> Fp2 {
        let mut acc = Fp2 { a: 1, b: 0 };
        while e > 0 {
            if e & 1 == 1 {
                acc = self.q_mul(acc, base);
            }
            base = self.q_mul(base, base);
            e >>= 1;
        }
        acc
    }

    fn rat(&self, q: &Rat) -> Option<u64> {
        let p_big = BigInt::from(self.p);
        let num = q.numer().mod_floor(&p_big).to_u64()?;
        let den = q.denom().mod_floor(&p_big).to_u64()?;
        Some(self.mul(num, self.inv(den)?))
    }
}

type ModMemo = BTreeMap<usize, Fp2>;

fn eval_mod(
    e: &Expr,
    p: &JetPoint,
    u_base: Option<&Expr>,
    ctx: &ModCtx,
    memo: &mut ModMemo,
) -> Option<Fp2> {
    if let Some(hit) = memo.get(&e.ptr_key()) {
        return Some(*hit);
    }
    let out = match e.node() {
        Node::Num(q) => Fp2 {
            a: ctx.rat(q)?,
            b: 0,
        },
        Node::Var(v) => Fp2 {
            a: ctx.rat(p.coord(*v))?,
            b: 0,
        },
        Node::Add(ts) => {
            let mut acc = Fp2 { a: 0, b: 0 };
            for t in ts {
                acc = ctx.q_add(acc, eval_mod(t, p, u_base, ctx, memo)?);
            }
            acc
        }
        Node::Mul(fs) => {
            let mut acc = Fp2 { a: 1, b: 0 };
            for f in fs {
                acc = ctx.q_mul(acc, eval_mod(f, p, u_base, ctx, memo)?);
                if acc == (Fp2 { a: 0, b: 0 }) {
                    break;
                }
            }
            acc
        }
        Node::Pow(b, exp) => {
            let k = exp.numer();
            if crate::rat::is_integer(exp) {
                let base = eval_mod(b, p, u_base, ctx, memo)?;
                let mag = k.magnitude().to_u64()?;
                if k.is_negative() {
                    ctx.q_pow(ctx.q_inv(base)?, mag)
                } else {
                    ctx.q_pow(base, mag)
                }
            } else if u_base.is_some_and(|u| u == b) {
                // s^k for odd k: u0^((k-1)/2) * s
                let half = (k - BigInt::from(1)) / BigInt::from(2);
                let s_part = Fp2 { a: 0, b: 1 };
                let coef = if half.is_negative() {
                    let mag = half.magnitude().to_u64()?;
                    let u_inv = ctx.inv(ctx.u0)?;
                    ctx.pow(u_inv, mag)
                } else {
                    ctx.pow(ctx.u0, half.magnitude().to_u64()?)
                };
                ctx.q_mul(Fp2 { a: coef, b: 0 }, s_part)
            } else {
                return None;
            }
        }
    };
    memo.insert(e.ptr_key(), out);
    Some(out)
}

/// Pointwise image of a rational-shape expression modulo a prime; `None`
/// when the expression carries radicals or a denominator is divisible by
/// the prime.
pub(crate) fn eval_rational_at(e: &Expr, p: &JetPoint, prime: u64) -> Option<u64> {
    let ctx = ModCtx { p: prime, u0: 0 };
    let mut memo = ModMemo::new();
    let v = eval_mod(e, p, None, &ctx, &mut memo)?;
    if v.b != 0 {
        return None;
    }
    Some(v.a)
}

/// Exact-zero test of `e` at a rational point by evaluation modulo two
/// independent primes. `Some(false)` is a proof of nonvanishing at the
/// point; `Some(true)` means zero modulo both primes; `None` means the
/// method did not apply (deep radicals, or a denominator divisible by a
/// prime) and the caller must decide another way.
pub fn modular_is_zero(e: &Expr, p: &JetPoint, shape: &RadicalShape) -> Option<bool> {
    let u_base = match shape {
        RadicalShape::Rational => None,
        RadicalShape::Quadratic(u) => Some(u),
        RadicalShape::General => return None,
    };
    for prime in PRIMES {
        let u0 = match u_base {
            None => 0,
            Some(u) => {
                let q = u.eval_exact(p).ok()?;
                if q.is_negative() {
                    return None;
                }
                let ctx0 = ModCtx { p: prime, u0: 0 };
                ctx0.rat(&q)?
            }
        };
        let ctx = ModCtx { p: prime, u0 };
        let mut memo = ModMemo::new();
        let v = eval_mod(e, p, u_base, &ctx, &mut memo)?;
        if v != (Fp2 { a: 0, b: 0 }) {
            return Some(false);
        }
    }
    Some(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::radical_shape;
    use crate::rat::rat;
    use alloc::vec;

    #[test]
    fn detects_polynomial_zero_and_nonzero() {
        let e = &Expr::powi(&Expr::x1() + &Expr::x2(), 2)
            - &Expr::add(vec![
                Expr::powi(Expr::x1(), 2),
                Expr::mul(vec![Expr::int(2), Expr::x1(), Expr::x2()]),
                Expr::powi(Expr::x2(), 2),
            ]);
        assert!(e.is_const_zero());

        let nonzero = &Expr::x1() - &Expr::x2();
        let p = JetPoint::from_ints(0, 0, 2, 5);
        let shape = radical_shape(&nonzero);
        assert_eq!(modular_is_zero(&nonzero, &p, &shape), Some(false));
    }

    #[test]
    fn radical_identity_is_zero_mod_p() {
        // (3 - sqrt(u))(3 + sqrt(u)) - (9 - u) with u = 9 - 2 x1 x2
        let u = &Expr::int(9) - &Expr::mul(vec![Expr::int(2), Expr::x1(), Expr::x2()]);
        let s = Expr::sqrt(u.clone());
        let lhs = Expr::mul(vec![&Expr::int(3) - &s, &Expr::int(3) + &s]);
        let e = &lhs - &(&Expr::int(9) - &u);
        let p = JetPoint::from_ints(0, 0, 1, 1);
        let shape = radical_shape(&e);
        if !e.is_const_zero() {
            assert_eq!(modular_is_zero(&e, &p, &shape), Some(true));
        }
    }

    #[test]
    fn quadratic_nonzero_detected() {
        let u = &Expr::int(9) - &Expr::mul(vec![Expr::int(2), Expr::x1(), Expr::x2()]);
        let s = Expr::sqrt(u.clone());
        let e = &s - &Expr::one();
        let p = JetPoint::from_ints(0, 0, 1, 1); // u = 7, sqrt(7) != 1
        let shape = radical_shape(&e);
        assert_eq!(modular_is_zero(&e, &p, &shape), Some(false));
    }

    #[test]
    fn negative_half_powers() {
        // u^(-1/2) * u^(1/2) - 1 == 0
        let u = &Expr::int(9) - &Expr::mul(vec![Expr::int(2), Expr::x1(), Expr::x2()]);
        let e = &(&Expr::pow(u.clone(), rat(-1, 2)) * &Expr::pow(u.clone(), rat(1, 2)))
            - &Expr::one();
        let p = JetPoint::from_ints(0, 0, 1, 1);
        if !e.is_const_zero() {
            let shape = radical_shape(&e);
            assert_eq!(modular_is_zero(&e, &p, &shape), Some(true));
        }
    }
}
