//! Immutable symbolic expressions over the 2-jet coordinates (t, x0, x1, x2).
//!
//! Expressions are canonical by construction: the constructors [`Expr::add`],
//! [`Expr::mul`] and [`Expr::pow`] normalize as they build, so structural
//! equality decides equality for the polynomial fragment. The canonical form
//! is an expanded multivariate normal form whose "generalized variables" are
//! the four coordinates plus atomic powers (fractional or negative exponents
//! of irreducible bases). Exponents of a shared base are merged
//! (`u^a * u^b -> u^(a+b)`); radicals are never denested.

mod calculus;
mod canon;
mod display;
mod eval;

pub use calculus::{Bindings, DEFAULT_NODE_LIMIT};
pub(crate) use eval::FloatMemo;
pub use eval::JetPoint;

use crate::rat::{self, Rat};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::cmp::Ordering;
use num_traits::{One, Signed, Zero};

/// A 2-jet coordinate.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Var {
    T,
    X0,
    X1,
    X2,
}

impl Var {
    pub const ALL: [Var; 4] = [Var::T, Var::X0, Var::X1, Var::X2];

    pub fn name(self) -> &'static str {
        match self {
            Var::T => "t",
            Var::X0 => "x0",
            Var::X1 => "x1",
            Var::X2 => "x2",
        }
    }

    pub fn index(self) -> usize {
        match self {
            Var::T => 0,
            Var::X0 => 1,
            Var::X1 => 2,
            Var::X2 => 3,
        }
    }

    pub fn from_index(i: usize) -> Var {
        Var::ALL[i]
    }

    fn bit(self) -> u8 {
        1 << self.index()
    }
}

#[derive(Debug)]
pub(crate) enum Node {
    /// Exact rational constant.
    Num(Rat),
    /// One of the four jet coordinates.
    Var(Var),
    /// `base^exponent` with rational exponent not in {0, 1}; kept atomic
    /// (fractional or negative exponent, or a constant surd).
    Pow(Expr, Rat),
    /// Product: optional leading constant (not 0 or 1) followed by sorted
    /// non-constant factors, none of which is a product or a sum.
    Mul(Vec<Expr>),
    /// Sum of at least two collected terms in a fixed total order; at most
    /// one constant term and no zero terms.
    Add(Vec<Expr>),
}

#[derive(Debug)]
struct Inner {
    node: Node,
    count: usize,
    vars: u8,
    hash: u64,
    poly: bool,
}

fn mix(h: u64, x: u64) -> u64 {
    (h ^ x).wrapping_mul(0x0000_0100_0000_01B3)
}

fn hash_big(mut h: u64, n: &num_bigint::BigInt) -> u64 {
    h = mix(
        h,
        match n.sign() {
            num_bigint::Sign::Minus => 0x6D,
            num_bigint::Sign::NoSign => 0x30,
            num_bigint::Sign::Plus => 0x70,
        },
    );
    for d in n.iter_u64_digits() {
        h = mix(h, d);
    }
    h
}

fn hash_rat(mut h: u64, q: &Rat) -> u64 {
    h = hash_big(h, q.numer());
    hash_big(h, q.denom())
}

/// Structural order on rationals (denominator, then numerator): cheaper
/// than value order and just as good for canonical sorting.
fn rat_order(a: &Rat, b: &Rat) -> Ordering {
    a.denom()
        .cmp(b.denom())
        .then_with(|| a.numer().cmp(b.numer()))
}

/// An immutable, canonical symbolic expression. Cloning is cheap (shared
/// subtrees) and shared values are safe to read concurrently.
#[derive(Clone, Debug)]
pub struct Expr(Arc<Inner>);

impl Expr {
    pub(crate) fn new_raw(node: Node) -> Expr {
        let (count, vars, hash, poly) = match &node {
            Node::Num(q) => (1, 0, hash_rat(0xCBF2_9CE4_8422_2325, q), true),
            Node::Var(v) => (1, v.bit(), mix(0x5661_7221, v.index() as u64), true),
            Node::Pow(b, e) => (
                1usize.saturating_add(b.tree_count()),
                b.var_mask(),
                hash_rat(mix(0x506F_7721, b.hash()), e),
                b.is_polynomial() && crate::rat::is_integer(e) && e.is_positive(),
            ),
            Node::Mul(es) | Node::Add(es) => {
                let tag: u64 = if matches!(node, Node::Mul(_)) {
                    0x4D75_6C21
                } else {
                    0x4164_6421
                };
                let mut c = 1usize;
                let mut m = 0u8;
                let mut h = mix(tag, es.len() as u64);
                let mut p = true;
                for e in es {
                    c = c.saturating_add(e.tree_count());
                    m |= e.var_mask();
                    h = mix(h, e.hash());
                    p &= e.is_polynomial();
                }
                (c, m, h, p)
            }
        };
        Expr(Arc::new(Inner {
            node,
            count,
            vars,
            hash,
            poly,
        }))
    }

    fn hash(&self) -> u64 {
        self.0.hash
    }

    pub(crate) fn node(&self) -> &Node {
        &self.0.node
    }

    /// Number of distinct nodes, counting shared subexpressions once.
    pub fn node_count(&self) -> usize {
        let mut seen = alloc::collections::BTreeSet::new();
        self.count_dag(&mut seen);
        seen.len()
    }

    fn count_dag(&self, seen: &mut alloc::collections::BTreeSet<usize>) {
        if !seen.insert(Arc::as_ptr(&self.0) as usize) {
            return;
        }
        match self.node() {
            Node::Num(_) | Node::Var(_) => {}
            Node::Pow(b, _) => b.count_dag(seen),
            Node::Mul(es) | Node::Add(es) => {
                for e in es {
                    e.count_dag(seen);
                }
            }
        }
    }

    /// Upper bound on `node_count` that ignores sharing; O(1).
    pub(crate) fn tree_count(&self) -> usize {
        self.0.count
    }

    pub(crate) fn ptr_key(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub(crate) fn var_mask(&self) -> u8 {
        self.0.vars
    }

    /// True when the expression mentions `v`.
    pub fn depends_on(&self, v: Var) -> bool {
        self.0.vars & v.bit() != 0
    }

    /// The variables occurring in the expression.
    pub fn free_vars(&self) -> Vec<Var> {
        Var::ALL
            .iter()
            .copied()
            .filter(|v| self.depends_on(*v))
            .collect()
    }

    // ---- constructors -------------------------------------------------

    pub fn num(q: Rat) -> Expr {
        Expr::new_raw(Node::Num(q))
    }

    pub fn int(n: i64) -> Expr {
        Expr::num(rat::rat_int(n))
    }

    pub fn ratio(n: i64, d: i64) -> Expr {
        Expr::num(rat::rat(n, d))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn var(v: Var) -> Expr {
        Expr::new_raw(Node::Var(v))
    }

    pub fn t() -> Expr {
        Expr::var(Var::T)
    }

    pub fn x0() -> Expr {
        Expr::var(Var::X0)
    }

    pub fn x1() -> Expr {
        Expr::var(Var::X1)
    }

    pub fn x2() -> Expr {
        Expr::var(Var::X2)
    }

    /// Canonical n-ary sum.
    pub fn add(terms: Vec<Expr>) -> Expr {
        canon::add_many(terms)
    }

    /// Canonical n-ary product.
    pub fn mul(factors: Vec<Expr>) -> Expr {
        canon::mul_many(factors)
    }

    /// Canonical rational power.
    pub fn pow(base: Expr, exponent: Rat) -> Expr {
        canon::pow_make(base, exponent)
    }

    pub fn powi(base: Expr, k: i64) -> Expr {
        Expr::pow(base, rat::rat_int(k))
    }

    pub fn sqrt(base: Expr) -> Expr {
        Expr::pow(base, rat::rat(1, 2))
    }

    pub fn recip(&self) -> Expr {
        Expr::powi(self.clone(), -1)
    }

    // ---- queries -------------------------------------------------------

    /// True when the expression is the constant zero.
    pub fn is_const_zero(&self) -> bool {
        matches!(self.node(), Node::Num(q) if q.is_zero())
    }

    pub fn is_const_one(&self) -> bool {
        matches!(self.node(), Node::Num(q) if q.is_one())
    }

    /// The constant value, when the expression is a plain rational.
    pub fn as_num(&self) -> Option<&Rat> {
        match self.node() {
            Node::Num(q) => Some(q),
            _ => None,
        }
    }

    /// True for the polynomial fragment: every power has a positive integer
    /// exponent. Zero testing is decided symbolically exactly here.
    pub fn is_polynomial(&self) -> bool {
        self.0.poly
    }

    /// Visits the top-level power factors of a monomial as
    /// `(base, exponent)`; plain variables count with exponent 1. Does not
    /// recurse into bases or sums.
    pub(crate) fn for_each_factor_pow<F: FnMut(&Expr, &Rat)>(&self, f: &mut F) {
        let one = Rat::one();
        match self.node() {
            Node::Pow(b, e) => f(b, e),
            Node::Var(_) => f(self, &one),
            Node::Mul(fs) => {
                for fac in fs {
                    match fac.node() {
                        Node::Pow(b, e) => f(b, e),
                        Node::Var(_) => f(fac, &one),
                        _ => {}
                    }
                }
            }
            _ => {}
        }
    }

    /// Visits every power node as `(base, exponent)`, recursing into bases.
    pub(crate) fn for_each_pow<F: FnMut(&Expr, &Rat)>(&self, f: &mut F) {
        match self.node() {
            Node::Num(_) | Node::Var(_) => {}
            Node::Pow(b, e) => {
                f(b, e);
                b.for_each_pow(f);
            }
            Node::Mul(es) | Node::Add(es) => {
                for e in es {
                    e.for_each_pow(f);
                }
            }
        }
    }

    /// The summands of a sum, or the expression itself.
    pub fn terms(&self) -> &[Expr] {
        match self.node() {
            Node::Add(ts) => ts,
            _ => core::slice::from_ref(self),
        }
    }

    fn kind_rank(&self) -> u8 {
        match self.node() {
            Node::Num(_) => 0,
            Node::Var(_) => 1,
            Node::Pow(..) => 2,
            Node::Mul(_) => 3,
            Node::Add(_) => 4,
        }
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Expr {}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Expr {
    /// Total structural order: kind, then cached structural hash, with a
    /// deep comparison only to break hash ties. The hash depends purely on
    /// structure, so the order is deterministic across runs.
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        let rank = self.kind_rank().cmp(&other.kind_rank());
        if rank != Ordering::Equal {
            return rank;
        }
        let hash = self.hash().cmp(&other.hash());
        if hash != Ordering::Equal {
            return hash;
        }
        match (self.node(), other.node()) {
            (Node::Num(a), Node::Num(b)) => rat_order(a, b),
            (Node::Var(a), Node::Var(b)) => a.cmp(b),
            (Node::Pow(b1, e1), Node::Pow(b2, e2)) => {
                b1.cmp(b2).then_with(|| rat_order(e1, e2))
            }
            (Node::Mul(a), Node::Mul(b)) | (Node::Add(a), Node::Add(b)) => a.cmp(b),
            _ => unreachable!("kind ranks matched"),
        }
    }
}

impl core::ops::Add<&Expr> for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        Expr::add(alloc::vec![self.clone(), rhs.clone()])
    }
}

impl core::ops::Sub<&Expr> for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        Expr::add(alloc::vec![self.clone(), -rhs])
    }
}

impl core::ops::Mul<&Expr> for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        Expr::mul(alloc::vec![self.clone(), rhs.clone()])
    }
}

impl core::ops::Div<&Expr> for &Expr {
    type Output = Expr;
    fn div(self, rhs: &Expr) -> Expr {
        Expr::mul(alloc::vec![self.clone(), rhs.recip()])
    }
}

impl core::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::mul(alloc::vec![Expr::int(-1), self.clone()])
    }
}
