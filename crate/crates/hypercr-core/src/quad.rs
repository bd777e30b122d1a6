//! Exact evaluation in a quadratic extension field.
//!
//! Invariants of equations built from one square root (both worked
//! examples, and anything whose fractional exponents are half-integers of
//! a single base) take values in Q(sqrt(u0)) at a rational jet point,
//! where u0 is the rational value of the radicand. Arithmetic there is
//! exact, so a vanishing test at a sample point is a proof, with no
//! precision management. Expressions with several independent radicals or
//! deeper roots fall back to certified intervals.

use crate::error::{Error, Result};
use crate::expr::{Expr, JetPoint, Node};
use crate::rat::{self, Rat};
use alloc::collections::BTreeMap;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// How an expression's irrational content is structured.
#[derive(Clone, Debug, PartialEq)]
pub enum RadicalShape {
    /// No fractional exponents at all: exact rational evaluation.
    Rational,
    /// Half-integer exponents of exactly one base: values in Q(sqrt(u0)).
    Quadratic(Expr),
    /// Anything else (several bases, deeper roots).
    General,
}

/// Classifies the fractional-power structure of an expression.
pub fn radical_shape(e: &Expr) -> RadicalShape {
    let mut base: Option<Expr> = None;
    let mut general = false;
    e.for_each_pow(&mut |b, exp| {
        if rat::is_integer(exp) {
            return;
        }
        if *exp.denom() != BigInt::from(2) {
            general = true;
            return;
        }
        match &base {
            None => base = Some(b.clone()),
            Some(u) if u == b => {}
            Some(_) => general = true,
        }
    });
    if general {
        return RadicalShape::General;
    }
    match base {
        None => RadicalShape::Rational,
        Some(u) => RadicalShape::Quadratic(u),
    }
}

/// A value a + b*s with s = sqrt(u0) >= 0 for a fixed rational u0 > 0.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadVal {
    pub a: Rat,
    pub b: Rat,
}

impl QuadVal {
    fn rational(a: Rat) -> QuadVal {
        QuadVal { a, b: Rat::zero() }
    }

    fn root() -> QuadVal {
        QuadVal {
            a: Rat::zero(),
            b: Rat::one(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    fn add(&self, other: &QuadVal) -> QuadVal {
        QuadVal {
            a: &self.a + &other.a,
            b: &self.b + &other.b,
        }
    }

    fn mul(&self, other: &QuadVal, u0: &Rat) -> QuadVal {
        QuadVal {
            a: &self.a * &other.a + &self.b * &other.b * u0,
            b: &self.a * &other.b + &self.b * &other.a,
        }
    }

    fn recip(&self, u0: &Rat) -> Result<QuadVal> {
        // 1/(a + b s) = (a - b s)/(a^2 - b^2 u0). When sqrt(u0) is
        // irrational the norm vanishes only for the zero value; rational
        // roots are folded away before any QuadVal carries a b-part.
        let norm = &(&self.a * &self.a) - &(&self.b * &self.b * u0);
        if norm.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(QuadVal {
            a: &self.a / &norm,
            b: -(&self.b / &norm),
        })
    }

    fn pow_int(&self, k: &BigInt, u0: &Rat) -> Result<QuadVal> {
        if k.is_negative() {
            return self.pow_int(&-k, u0)?.recip(u0);
        }
        let mut e = k.to_u64().ok_or(Error::OverflowError)?;
        let mut base = self.clone();
        let mut acc = QuadVal::rational(Rat::one());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base, u0);
            }
            base = base.mul(&base, u0);
            e >>= 1;
        }
        Ok(acc)
    }

    /// s^p for odd integer p (p/2 was the half-integer exponent):
    /// s^p = u0^((p-1)/2) * s.
    fn root_power(p: &BigInt, u0: &Rat) -> Result<QuadVal> {
        debug_assert!(p.is_odd());
        let half = (p - BigInt::one()) / BigInt::from(2);
        let coef = rat::pow_int(u0, &half).ok_or(Error::DivisionByZero)?;
        Ok(QuadVal {
            a: Rat::zero(),
            b: coef,
        })
    }

    pub fn to_f64(&self, u0: &Rat) -> f64 {
        let a = rat::to_f64(&self.a).unwrap_or(f64::NAN);
        let b = rat::to_f64(&self.b).unwrap_or(f64::NAN);
        let s = rat::to_f64(u0).unwrap_or(f64::NAN).sqrt();
        a + b * s
    }

    /// |a + b s|^2 = (a + b s)(a - b s + 2 b s)... computed directly as a
    /// rational as (a^2 + b^2 u0) + 2 a b s; for comparisons it is easier
    /// to decide the sign of a + b s exactly.
    pub fn is_nonzero(&self) -> bool {
        !self.is_zero()
    }

    /// Exact comparison |value| <= bound for a rational bound >= 0.
    /// Decides sign questions about a + b*sqrt(u0) by squaring safely.
    pub fn abs_le(&self, bound: &Rat, u0: &Rat) -> bool {
        // |a + b s| <= t  <=>  (a + b s)^2 <= t^2 when both sides >= 0:
        // (a^2 + b^2 u0 - t^2) <= -2 a b s, compare exactly.
        let t2 = bound * bound;
        let lhs = &(&(&self.a * &self.a) + &(&self.b * &self.b * u0)) - &t2;
        let rhs_coef = rat::rat_int(-2) * &self.a * &self.b;
        // lhs <= rhs_coef * s with s = sqrt(u0) > 0
        exact_le_times_root(&lhs, &rhs_coef, u0)
    }
}

/// Decides lhs <= c * sqrt(u0) exactly for rationals lhs, c and u0 > 0.
fn exact_le_times_root(lhs: &Rat, c: &Rat, u0: &Rat) -> bool {
    let lneg = !lhs.is_positive();
    let cneg = c.is_negative();
    match (lneg, cneg) {
        (true, false) => true,
        (false, true) => false,
        (false, false) => {
            // both sides nonnegative: square
            lhs * lhs <= c * c * u0
        }
        (true, true) => {
            // both negative: squaring flips
            lhs * lhs >= c * c * u0
        }
    }
}

type QuadMemo = BTreeMap<usize, QuadVal>;

/// Evaluation context: the radicand value and, when it happens to be a
/// perfect square, the exact rational root (then every value stays purely
/// rational).
pub struct QuadCtx {
    u0: Rat,
    s_exact: Option<Rat>,
}

impl QuadCtx {
    /// `u0` must be the nonnegative value of the radicand at the sample.
    pub fn new(u0: Rat) -> Result<QuadCtx> {
        if u0.is_negative() {
            return Err(Error::DomainError("negative radicand"));
        }
        let s_exact = rat::pow_exact(&u0, &rat::rat(1, 2));
        Ok(QuadCtx { u0, s_exact })
    }

    pub fn u0(&self) -> &Rat {
        &self.u0
    }

    fn root_power(&self, p: &BigInt) -> Result<QuadVal> {
        match &self.s_exact {
            Some(s) => {
                if s.is_zero() && p.is_negative() {
                    return Err(Error::DivisionByZero);
                }
                Ok(QuadVal::rational(
                    rat::pow_exact(&self.u0, &Rat::new(p.clone(), BigInt::from(2)))
                        .or_else(|| {
                            rat::pow_int(s, p)
                        })
                        .ok_or(Error::DivisionByZero)?,
                ))
            }
            None => QuadVal::root_power(p, &self.u0),
        }
    }
}

/// Exact evaluation in Q(sqrt(u0)) at a rational point. `u_base` is the
/// designated radicand expression.
pub fn eval_quad(e: &Expr, p: &JetPoint, u_base: &Expr, ctx: &QuadCtx) -> Result<QuadVal> {
    let mut memo = QuadMemo::new();
    eval_q(e, p, u_base, ctx, &mut memo)
}

fn eval_q(
    e: &Expr,
    p: &JetPoint,
    u_base: &Expr,
    ctx: &QuadCtx,
    memo: &mut QuadMemo,
) -> Result<QuadVal> {
    if let Some(hit) = memo.get(&e.ptr_key()) {
        return Ok(hit.clone());
    }
    let out = match e.node() {
        Node::Num(q) => QuadVal::rational(q.clone()),
        Node::Var(v) => QuadVal::rational(p.coord(*v).clone()),
        Node::Add(ts) => {
            let mut acc = QuadVal::rational(Rat::zero());
            for t in ts {
                acc = acc.add(&eval_q(t, p, u_base, ctx, memo)?);
            }
            acc
        }
        Node::Mul(fs) => {
            let mut acc = QuadVal::rational(Rat::one());
            for f in fs {
                acc = acc.mul(&eval_q(f, p, u_base, ctx, memo)?, &ctx.u0);
            }
            acc
        }
        Node::Pow(b, exp) => {
            if rat::is_integer(exp) {
                let bv = eval_q(b, p, u_base, ctx, memo)?;
                bv.pow_int(exp.numer(), &ctx.u0)?
            } else if b == u_base {
                ctx.root_power(exp.numer())?
            } else {
                return Err(Error::NonRationalOperation);
            }
        }
    };
    memo.insert(e.ptr_key(), out.clone());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;
    use alloc::vec;

    fn u_expr() -> Expr {
        &Expr::int(9) - &Expr::mul(vec![Expr::int(2), Expr::x1(), Expr::x2()])
    }

    #[test]
    fn shape_detection() {
        assert_eq!(radical_shape(&Expr::x1()), RadicalShape::Rational);
        assert_eq!(
            radical_shape(&Expr::powi(&Expr::x1() + &Expr::one(), -3)),
            RadicalShape::Rational
        );
        let s = Expr::sqrt(u_expr());
        assert_eq!(radical_shape(&s), RadicalShape::Quadratic(u_expr()));
        let mixed = &s + &Expr::sqrt(Expr::t());
        assert_eq!(radical_shape(&mixed), RadicalShape::General);
        let cube = Expr::pow(Expr::x2(), rat(1, 3));
        assert_eq!(radical_shape(&cube), RadicalShape::General);
    }

    #[test]
    fn quad_arithmetic_squares_the_root() {
        // s * s = u0
        let p = JetPoint::from_ints(0, 0, 1, 1); // u0 = 7
        let u0 = rat(7, 1);
        let s = Expr::sqrt(u_expr());
        let sq = Expr::mul(vec![s.clone(), s.clone()]);
        let v = eval_quad(&sq, &p, &u_expr(), &QuadCtx::new(u0).unwrap()).unwrap();
        assert_eq!(v, QuadVal::rational(rat(7, 1)));
    }

    #[test]
    fn quad_reciprocal() {
        // 1/(-3 + s) * (-3 + s) = 1 with s = sqrt(7)
        let p = JetPoint::from_ints(0, 0, 1, 1);
        let u0 = rat(7, 1);
        let v = &Expr::sqrt(u_expr()) - &Expr::int(3);
        let prod = Expr::mul(vec![v.recip(), v.clone()]);
        let out = eval_quad(&prod, &p, &u_expr(), &QuadCtx::new(u0).unwrap()).unwrap();
        assert_eq!(out, QuadVal::rational(rat(1, 1)));
    }

    #[test]
    fn half_integer_powers() {
        // u^(5/2) = u0^2 * s
        let p = JetPoint::from_ints(0, 0, 1, 1);
        let u0 = rat(7, 1);
        let e = Expr::pow(u_expr(), rat(5, 2));
        let out = eval_quad(&e, &p, &u_expr(), &QuadCtx::new(u0).unwrap()).unwrap();
        assert_eq!(out.a, rat(0, 1));
        assert_eq!(out.b, rat(49, 1));
    }

    #[test]
    fn abs_comparison_is_exact() {
        let u0 = rat(2, 1);
        // sqrt(2) - 1.414 is about 2.1e-4
        let v = QuadVal {
            a: rat(-1414, 1000),
            b: rat(1, 1),
        };
        assert!(v.abs_le(&rat(1, 1000), &u0));
        assert!(!v.abs_le(&rat(1, 10000), &u0));
        let zero = QuadVal {
            a: rat(0, 1),
            b: rat(0, 1),
        };
        assert!(zero.abs_le(&rat(0, 1), &u0));
    }
}
