//! Exact and floating evaluation at jet points.

use super::{Expr, Node, Var};
use crate::error::{Error, Result};
use crate::rat::{self, Rat};
use num_traits::{One, Signed, Zero};

/// A point of 2-jet space with exact rational coordinates and a floating
/// view derived from them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JetPoint {
    coords: [Rat; 4],
}

impl JetPoint {
    pub fn new(t: Rat, x0: Rat, x1: Rat, x2: Rat) -> JetPoint {
        JetPoint {
            coords: [t, x0, x1, x2],
        }
    }

    pub fn from_ints(t: i64, x0: i64, x1: i64, x2: i64) -> JetPoint {
        JetPoint::new(
            rat::rat_int(t),
            rat::rat_int(x0),
            rat::rat_int(x1),
            rat::rat_int(x2),
        )
    }

    pub fn coord(&self, v: Var) -> &Rat {
        &self.coords[v.index()]
    }

    pub fn coords(&self) -> &[Rat; 4] {
        &self.coords
    }

    /// Floating view; errors when a coordinate overflows the double range.
    pub fn to_f64(&self) -> Result<[f64; 4]> {
        let mut out = [0.0; 4];
        for (slot, q) in out.iter_mut().zip(self.coords.iter()) {
            *slot = rat::to_f64(q).ok_or(Error::OverflowError)?;
        }
        Ok(out)
    }
}

/// Per-evaluation memo keyed by node identity, so shared subexpressions
/// (inverse-power atoms appear in thousands of terms) evaluate once.
pub(crate) type FloatMemo = alloc::collections::BTreeMap<usize, f64>;
type ExactMemo = alloc::collections::BTreeMap<usize, Rat>;

impl Expr {
    /// Exact rational value. Fractional powers must hit perfect powers.
    pub fn eval_exact(&self, p: &JetPoint) -> Result<Rat> {
        let mut memo = ExactMemo::new();
        self.eval_exact_memo(p, &mut memo)
    }

    fn eval_exact_memo(&self, p: &JetPoint, memo: &mut ExactMemo) -> Result<Rat> {
        if let Some(hit) = memo.get(&self.ptr_key()) {
            return Ok(hit.clone());
        }
        let out = match self.node() {
            Node::Num(q) => q.clone(),
            Node::Var(v) => p.coord(*v).clone(),
            Node::Add(ts) => {
                let mut acc = Rat::zero();
                for t in ts {
                    acc += t.eval_exact_memo(p, memo)?;
                }
                acc
            }
            Node::Mul(fs) => {
                let mut acc = Rat::one();
                for f in fs {
                    acc *= f.eval_exact_memo(p, memo)?;
                }
                acc
            }
            Node::Pow(b, e) => {
                let base = b.eval_exact_memo(p, memo)?;
                if base.is_zero() && e.is_negative() {
                    return Err(Error::DivisionByZero);
                }
                rat::pow_exact(&base, e).ok_or(Error::NonRationalOperation)?
            }
        };
        memo.insert(self.ptr_key(), out.clone());
        Ok(out)
    }

    /// IEEE double evaluation with real-root semantics for odd roots.
    pub fn eval_float(&self, p: &JetPoint) -> Result<f64> {
        let coords = p.to_f64()?;
        self.eval_f(&coords)
    }

    pub(crate) fn eval_f(&self, coords: &[f64; 4]) -> Result<f64> {
        let mut memo = FloatMemo::new();
        self.eval_f_memo(coords, &mut memo)
    }

    pub(crate) fn eval_f_memo(&self, coords: &[f64; 4], memo: &mut FloatMemo) -> Result<f64> {
        if let Some(hit) = memo.get(&self.ptr_key()) {
            return Ok(*hit);
        }
        let v = match self.node() {
            Node::Num(q) => rat::to_f64(q).ok_or(Error::OverflowError)?,
            Node::Var(v) => coords[v.index()],
            Node::Add(ts) => {
                let mut acc = 0.0;
                for t in ts {
                    acc += t.eval_f_memo(coords, memo)?;
                }
                acc
            }
            Node::Mul(fs) => {
                let mut acc = 1.0;
                for f in fs {
                    acc *= f.eval_f_memo(coords, memo)?;
                }
                acc
            }
            Node::Pow(b, e) => rat::pow_f64(b.eval_f_memo(coords, memo)?, e)?,
        };
        if !v.is_finite() {
            return Err(Error::OverflowError);
        }
        memo.insert(self.ptr_key(), v);
        Ok(v)
    }
}
