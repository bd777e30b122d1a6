//! Canonicalization: the smart constructors behind `Expr::add/mul/pow`.
//!
//! Sums collect like terms keyed by their monomial part; products merge
//! exponents of a shared base and expand integer powers of sums, so the
//! result is an expanded normal form over "atoms" (variables and
//! non-polynomial powers). Power rules are applied only where they are
//! valid over the reals with real-root semantics for odd denominators:
//!
//! * `(u^a)^b -> u^(ab)` needs `b` integer, or `a` with an even
//!   denominator (the inner root already forces `u >= 0`), or `a` odd/odd
//!   (sign-preserving). `u^(2/3)` followed by an even root stays nested.
//! * fractional exponents distribute over a product only for the positive
//!   constant head (and the sign when the root is odd), never over
//!   symbolic factors.

use super::{Expr, Node};
use crate::rat::{self, Rat};
use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Splits a non-sum term into (coefficient, monomial); the monomial of a
/// constant is 1.
pub(crate) fn split_coeff(term: &Expr) -> (Rat, Expr) {
    match term.node() {
        Node::Num(c) => (c.clone(), Expr::one()),
        Node::Mul(fs) => match fs[0].node() {
            Node::Num(c) => {
                let rest = &fs[1..];
                let mono = if rest.len() == 1 {
                    rest[0].clone()
                } else {
                    Expr::new_raw(Node::Mul(rest.to_vec()))
                };
                (c.clone(), mono)
            }
            _ => (Rat::one(), term.clone()),
        },
        _ => (Rat::one(), term.clone()),
    }
}

/// Rebuilds a term from (coefficient, monomial). Inverse of `split_coeff`.
fn attach_coeff(c: Rat, mono: Expr) -> Expr {
    if c.is_zero() {
        return Expr::zero();
    }
    if mono.is_const_one() {
        return Expr::num(c);
    }
    if c.is_one() {
        return mono;
    }
    match mono.node() {
        Node::Mul(fs) => {
            let mut v = Vec::with_capacity(fs.len() + 1);
            v.push(Expr::num(c));
            v.extend(fs.iter().cloned());
            Expr::new_raw(Node::Mul(v))
        }
        _ => Expr::new_raw(Node::Mul(vec![Expr::num(c), mono])),
    }
}

pub(crate) fn add_many(terms: Vec<Expr>) -> Expr {
    let mut by_mono: BTreeMap<Expr, Rat> = BTreeMap::new();
    let mut queue = terms;
    while let Some(t) = queue.pop() {
        match t.node() {
            Node::Add(ts) => queue.extend(ts.iter().cloned()),
            Node::Num(c) if c.is_zero() => {}
            _ => {
                use alloc::collections::btree_map::Entry;
                let (c, mono) = split_coeff(&t);
                match by_mono.entry(mono) {
                    Entry::Vacant(slot) => {
                        slot.insert(c);
                    }
                    Entry::Occupied(mut slot) => {
                        *slot.get_mut() += c;
                        if slot.get().is_zero() {
                            slot.remove();
                        }
                    }
                }
            }
        }
    }
    rebuild_sum(by_mono)
}

fn rebuild_sum(by_mono: BTreeMap<Expr, Rat>) -> Expr {
    let mut out: Vec<Expr> = Vec::with_capacity(by_mono.len());
    for (mono, c) in by_mono {
        if !c.is_zero() {
            out.push(attach_coeff(c, mono));
        }
    }
    match out.len() {
        0 => Expr::zero(),
        1 => out.pop().unwrap(),
        _ => Expr::new_raw(Node::Add(out)),
    }
}

/// Multiplies a sum by a rational constant without re-expansion.
fn scale_terms(c: &Rat, e: &Expr) -> Expr {
    if c.is_zero() {
        return Expr::zero();
    }
    if c.is_one() {
        return e.clone();
    }
    match e.node() {
        Node::Add(ts) => {
            let scaled: Vec<Expr> = ts
                .iter()
                .map(|t| {
                    let (tc, mono) = split_coeff(t);
                    attach_coeff(tc * c, mono)
                })
                .collect();
            Expr::new_raw(Node::Add(scaled))
        }
        _ => {
            let (tc, mono) = split_coeff(e);
            attach_coeff(tc * c, mono)
        }
    }
}

pub(crate) fn mul_many(factors: Vec<Expr>) -> Expr {
    // Separate sums (distributed at the end) from monomial material.
    let mut coeff = Rat::one();
    let mut sums: Vec<Expr> = Vec::new();
    let mut exps: BTreeMap<Expr, Rat> = BTreeMap::new();
    let mut queue = factors;
    while let Some(f) = queue.pop() {
        match f.node() {
            Node::Num(c) => coeff *= c,
            Node::Mul(fs) => queue.extend(fs.iter().cloned()),
            Node::Add(_) => merge_base(&mut exps, f.clone(), Rat::one()),
            Node::Var(_) => merge_base(&mut exps, f.clone(), Rat::one()),
            Node::Pow(b, e) => merge_base(&mut exps, b.clone(), e.clone()),
        }
    }
    if coeff.is_zero() {
        return Expr::zero();
    }

    // Apply power rules until every entry is a stable atom. Merged
    // exponents can collapse nested powers, fold constants or turn an
    // atom into an expandable integer power of a sum.
    let mut atoms: Vec<Expr> = Vec::new();
    loop {
        let mut work: Vec<(Expr, Rat)> = Vec::new();
        let mut expand: Vec<(Expr, u32)> = Vec::new();
        for (b, e) in core::mem::take(&mut exps) {
            if e.is_zero() {
                continue;
            }
            if let Some(k) = add_power(&b, &e) {
                expand.push((b, k));
                continue;
            }
            let p = pow_make(b.clone(), e.clone());
            match p.node() {
                Node::Num(c) => coeff *= c,
                Node::Var(_) => atoms.push(p),
                Node::Pow(b2, e2) => {
                    if *b2 == b && *e2 == e {
                        atoms.push(p);
                    } else {
                        work.push((b2.clone(), e2.clone()));
                    }
                }
                Node::Mul(fs) => {
                    for f in fs {
                        match f.node() {
                            Node::Num(c) => coeff *= c,
                            Node::Var(_) => work.push((f.clone(), Rat::one())),
                            Node::Pow(b2, e2) => work.push((b2.clone(), e2.clone())),
                            _ => sums.push(f.clone()),
                        }
                    }
                }
                Node::Add(_) => sums.push(p),
            }
        }
        for (b, k) in expand {
            sums.extend(core::iter::repeat(b).take(k as usize));
        }
        if work.is_empty() {
            break;
        }
        // Re-merge: stable atoms may share a base with reworked entries.
        for a in atoms.drain(..) {
            match a.node() {
                Node::Pow(b, e) => merge_base(&mut exps, b.clone(), e.clone()),
                _ => merge_base(&mut exps, a.clone(), Rat::one()),
            }
        }
        for (b, e) in work {
            merge_base(&mut exps, b, e);
        }
    }

    if coeff.is_zero() {
        return Expr::zero();
    }
    let mut acc = assemble_monomial(coeff, atoms);
    for s in sums {
        acc = distribute(&acc, &s);
    }
    acc
}

/// Fast path for monomial * monomial: one linear merge of the base-sorted
/// factor lists. Falls back to the generic machinery whenever a merged
/// exponent triggers a rewrite rule (constant folding, expansion, nested
/// collapse, sign or content normalization).
fn mul_monomials(a: &Expr, b: &Expr) -> Expr {
    fn factors_of(m: &Expr) -> (Rat, &[Expr]) {
        match m.node() {
            Node::Mul(fs) => match fs[0].node() {
                Node::Num(c) => (c.clone(), &fs[1..]),
                _ => (Rat::one(), &fs[..]),
            },
            _ => (Rat::one(), core::slice::from_ref(m)),
        }
    }
    let slow = || mul_many(vec![a.clone(), b.clone()]);
    if matches!(a.node(), Node::Add(_) | Node::Num(_))
        || matches!(b.node(), Node::Add(_) | Node::Num(_))
    {
        return slow();
    }
    let (ca, fa) = factors_of(a);
    let (cb, fb) = factors_of(b);
    let coeff = ca * cb;
    let mut merged: Vec<Expr> = Vec::with_capacity(fa.len() + fb.len());
    let (mut i, mut j) = (0, 0);
    while i < fa.len() || j < fb.len() {
        let pick_a = if i == fa.len() {
            false
        } else if j == fb.len() {
            true
        } else {
            match factor_base(&fa[i]).cmp(factor_base(&fb[j])) {
                core::cmp::Ordering::Less => true,
                core::cmp::Ordering::Greater => false,
                core::cmp::Ordering::Equal => {
                    // merge exponents of the shared base
                    let base = factor_base(&fa[i]).clone();
                    let e = factor_exponent(&fa[i]) + factor_exponent(&fb[j]);
                    i += 1;
                    j += 1;
                    if e.is_zero() {
                        continue;
                    }
                    match base.node() {
                        Node::Var(_) => {
                            if e.is_one() {
                                merged.push(base);
                            } else {
                                merged.push(Expr::new_raw(Node::Pow(base, e)));
                            }
                        }
                        Node::Add(_)
                            if rat::is_integer(&e)
                                && !e.is_one()
                                && merged_add_power_is_direct(&base, &e, true) =>
                        {
                            merged.push(Expr::new_raw(Node::Pow(base, e)));
                        }
                        // constant folding, expansion, content/sign
                        // normalization and nested collapse all live in the
                        // generic path
                        _ if rat::is_integer(&e) => return slow(),
                        Node::Num(_) => return slow(),
                        _ => merged.push(Expr::new_raw(Node::Pow(base, e))),
                    }
                    continue;
                }
            }
        };
        if pick_a {
            merged.push(fa[i].clone());
            i += 1;
        } else {
            merged.push(fb[j].clone());
            j += 1;
        }
    }
    if merged.is_empty() {
        return Expr::num(coeff);
    }
    if coeff.is_one() && merged.len() == 1 {
        return merged.into_iter().next().unwrap();
    }
    if coeff.is_one() {
        return Expr::new_raw(Node::Mul(merged));
    }
    let mut v = Vec::with_capacity(merged.len() + 1);
    v.push(Expr::num(coeff));
    v.extend(merged);
    Expr::new_raw(Node::Mul(v))
}

fn merge_base(exps: &mut BTreeMap<Expr, Rat>, base: Expr, e: Rat) {
    let entry = exps.entry(base).or_insert_with(Rat::zero);
    *entry += e;
}

/// `Some(k)` when `base^e` is an integer power of a sum that must expand.
/// Only polynomial sums expand; a sum carrying radical or inverse atoms
/// stays an atomic factor, which keeps radical-bearing expressions compact
/// without weakening the polynomial normal form.
fn add_power(base: &Expr, e: &Rat) -> Option<u32> {
    if matches!(base.node(), Node::Add(_))
        && base.is_polynomial()
        && rat::is_integer(e)
        && e.is_positive()
    {
        e.numer().to_u32()
    } else {
        None
    }
}

/// The base of a factor: a power contributes its base, anything else is
/// its own base (exponent 1).
fn factor_base(f: &Expr) -> &Expr {
    match f.node() {
        Node::Pow(b, _) => b,
        _ => f,
    }
}

fn factor_exponent(f: &Expr) -> Rat {
    match f.node() {
        Node::Pow(_, e) => e.clone(),
        _ => Rat::one(),
    }
}

/// Canonical factor order inside a product: by base, then exponent, so
/// products of monomials merge with a single linear pass.
pub(crate) fn factor_order(a: &Expr, b: &Expr) -> core::cmp::Ordering {
    factor_base(a)
        .cmp(factor_base(b))
        .then_with(|| match (a.node(), b.node()) {
            (Node::Pow(_, ea), Node::Pow(_, eb)) => {
                ea.denom().cmp(eb.denom()).then_with(|| ea.numer().cmp(eb.numer()))
            }
            (Node::Pow(_, e), _) => e
                .denom()
                .cmp(&num_bigint::BigInt::from(1))
                .then_with(|| e.numer().cmp(&num_bigint::BigInt::from(1))),
            (_, Node::Pow(_, e)) => num_bigint::BigInt::from(1)
                .cmp(e.denom())
                .then_with(|| num_bigint::BigInt::from(1).cmp(e.numer())),
            _ => core::cmp::Ordering::Equal,
        })
}

fn assemble_monomial(coeff: Rat, mut atoms: Vec<Expr>) -> Expr {
    if atoms.is_empty() {
        return Expr::num(coeff);
    }
    atoms.sort_by(|a, b| factor_order(a, b));
    if coeff.is_one() {
        if atoms.len() == 1 {
            return atoms.into_iter().next().unwrap();
        }
        return Expr::new_raw(Node::Mul(atoms));
    }
    let mut v = Vec::with_capacity(atoms.len() + 1);
    v.push(Expr::num(coeff));
    v.extend(atoms);
    Expr::new_raw(Node::Mul(v))
}

/// True when the monomial `m` has `base` as the base of one of its power
/// factors, so the product `m * base` cancels exponents instead of
/// expanding.
fn monomial_has_base(m: &Expr, base: &Expr) -> bool {
    match m.node() {
        Node::Pow(b, _) => b == base,
        Node::Mul(fs) => fs
            .iter()
            .any(|f| matches!(f.node(), Node::Pow(b, _) if b == base)),
        _ => false,
    }
}

/// Product of two canonical expressions, distributing over sums. A sum that
/// appears as the base of an inverse or fractional power on the other side
/// is merged through the exponent map first, which is what clears
/// denominators exactly.
pub(crate) fn distribute(a: &Expr, b: &Expr) -> Expr {
    match (a.node(), b.node()) {
        (Node::Num(c), _) => scale_terms(c, b),
        (_, Node::Num(c)) => scale_terms(c, a),
        (Node::Add(_), _) if monomial_has_base(b, a) => mul_many(vec![a.clone(), b.clone()]),
        (_, Node::Add(_)) if monomial_has_base(a, b) => mul_many(vec![a.clone(), b.clone()]),
        (Node::Add(ta), Node::Add(tb)) if ta.len() * tb.len() >= 64 => expand_product(ta, tb),
        (Node::Add(ts), _) => add_many(ts.iter().map(|t| distribute(t, b)).collect()),
        (_, Node::Add(ts)) => add_many(ts.iter().map(|t| distribute(a, t)).collect()),
        _ => mul_monomials(a, b),
    }
}

/// True when integer powers of this sum need no rewrite: no extractable
/// monomial or coefficient content and a positive leading coefficient.
/// Exactly the postcondition of `pow_of_sum` on integer exponents, so
/// merged exponents of such a base can be stored directly.
fn add_base_is_normalized(b: &Expr) -> bool {
    match b.node() {
        Node::Add(ts) => {
            let (lead, _) = split_coeff(&ts[0]);
            if lead.is_negative() {
                return false;
            }
            let (ccoeff, cbases) = sum_content(ts);
            ccoeff.is_one() && cbases.is_empty()
        }
        _ => false,
    }
}

/// Shared decision for merged integer exponents of an `Add` base inside a
/// monomial product: `true` to store `base^e` directly, `false` to rerun
/// the generic rewrite machinery.
fn merged_add_power_is_direct(base: &Expr, e: &Rat, poly_expand: bool) -> bool {
    debug_assert!(rat::is_integer(e) && !e.is_zero() && !e.is_one());
    if poly_expand && e.is_positive() && base.is_polynomial() {
        return false;
    }
    add_base_is_normalized(base)
}

/// Bulk product of two sums of monomials: pair products are collected in a
/// map keyed by the merged factor list, so the expression nodes of the
/// surviving monomials are allocated once instead of once per pair. Pairs
/// whose exponent merge triggers a rewrite rule spill into the generic
/// path.
fn expand_product(ta: &[Expr], tb: &[Expr]) -> Expr {
    let split: fn(&Expr) -> (Rat, &[Expr]) = |m| match m.node() {
        Node::Mul(fs) => match fs[0].node() {
            Node::Num(c) => (c.clone(), &fs[1..]),
            _ => (Rat::one(), &fs[..]),
        },
        Node::Num(c) => (c.clone(), &[]),
        _ => (Rat::one(), core::slice::from_ref(m)),
    };
    let parts_a: Vec<(Rat, &[Expr])> = ta.iter().map(split).collect();
    let parts_b: Vec<(Rat, &[Expr])> = tb.iter().map(split).collect();
    let mut collected: BTreeMap<Vec<Expr>, Rat> = BTreeMap::new();
    let mut spill: Vec<Expr> = Vec::new();
    let mut key = Vec::new();
    // per-base decision cache for merged integer exponents
    let mut direct_cache: BTreeMap<(usize, bool), bool> = BTreeMap::new();
    for (ca, fa) in &parts_a {
        'pair: for (cb, fb) in &parts_b {
            key.clear();
            key.reserve(fa.len() + fb.len());
            let (mut i, mut j) = (0, 0);
            while i < fa.len() || j < fb.len() {
                let take_a = if i == fa.len() {
                    false
                } else if j == fb.len() {
                    true
                } else {
                    match factor_base(&fa[i]).cmp(factor_base(&fb[j])) {
                        core::cmp::Ordering::Less => true,
                        core::cmp::Ordering::Greater => false,
                        core::cmp::Ordering::Equal => {
                            let base = factor_base(&fa[i]).clone();
                            let e = factor_exponent(&fa[i]) + factor_exponent(&fb[j]);
                            i += 1;
                            j += 1;
                            if e.is_zero() {
                                continue;
                            }
                            match base.node() {
                                Node::Var(_) if e.is_one() => key.push(base),
                                Node::Var(_) => key.push(Expr::new_raw(Node::Pow(base, e))),
                                Node::Add(_) if rat::is_integer(&e) && !e.is_one() => {
                                    let probe = (base.ptr_key(), e.is_positive());
                                    let direct = *direct_cache
                                        .entry(probe)
                                        .or_insert_with(|| {
                                            merged_add_power_is_direct(&base, &e, true)
                                        });
                                    if direct {
                                        key.push(Expr::new_raw(Node::Pow(base, e)));
                                    } else {
                                        spill.push(slow_pair(ca, fa, cb, fb));
                                        continue 'pair;
                                    }
                                }
                                _ if rat::is_integer(&e) => {
                                    // rewrite needed: full machinery
                                    spill.push(slow_pair(ca, fa, cb, fb));
                                    continue 'pair;
                                }
                                Node::Num(_) => {
                                    spill.push(slow_pair(ca, fa, cb, fb));
                                    continue 'pair;
                                }
                                _ => key.push(Expr::new_raw(Node::Pow(base, e))),
                            }
                            continue;
                        }
                    }
                };
                if take_a {
                    key.push(fa[i].clone());
                    i += 1;
                } else {
                    key.push(fb[j].clone());
                    j += 1;
                }
            }
            let coeff = ca * cb;
            use alloc::collections::btree_map::Entry;
            match collected.entry(core::mem::take(&mut key)) {
                Entry::Vacant(slot) => {
                    slot.insert(coeff);
                }
                Entry::Occupied(mut slot) => {
                    *slot.get_mut() += coeff;
                    if slot.get().is_zero() {
                        slot.remove();
                    }
                }
            }
        }
    }
    let mut out: Vec<Expr> = Vec::with_capacity(collected.len() + spill.len());
    for (factors, coeff) in collected {
        if coeff.is_zero() {
            continue;
        }
        let mono = match factors.len() {
            0 => Expr::one(),
            1 => factors.into_iter().next().unwrap(),
            _ => Expr::new_raw(Node::Mul(factors)),
        };
        out.push(attach_coeff(coeff, mono));
    }
    out.extend(spill);
    add_many(out)
}

fn slow_pair(ca: &Rat, fa: &[Expr], cb: &Rat, fb: &[Expr]) -> Expr {
    let mut factors: Vec<Expr> = Vec::with_capacity(fa.len() + fb.len() + 1);
    factors.push(Expr::num(ca * cb));
    factors.extend(fa.iter().cloned());
    factors.extend(fb.iter().cloned());
    mul_many(factors)
}

/// True when `(u^inner)^outer == u^(inner*outer)` over the real domain of
/// the left side.
fn collapse_ok(inner: &Rat, outer: &Rat) -> bool {
    rat::is_integer(outer)
        || inner.denom().is_even()
        || (inner.denom().is_odd() && inner.numer().is_odd())
}

pub(crate) fn pow_make(base: Expr, e: Rat) -> Expr {
    if e.is_zero() {
        return Expr::one();
    }
    if e.is_one() {
        return base;
    }
    match base.node() {
        Node::Num(c) => match rat::pow_exact(c, &e) {
            Some(v) => Expr::num(v),
            None => Expr::new_raw(Node::Pow(base, e)),
        },
        Node::Var(_) => Expr::new_raw(Node::Pow(base, e)),
        Node::Pow(b2, e2) => {
            if collapse_ok(e2, &e) {
                pow_make(b2.clone(), e2 * &e)
            } else {
                Expr::new_raw(Node::Pow(base, e))
            }
        }
        Node::Mul(fs) => pow_of_product(fs, &e, &base),
        Node::Add(ts) => pow_of_sum(ts, &e, &base),
    }
}

fn pow_of_product(fs: &[Expr], e: &Rat, whole: &Expr) -> Expr {
    if rat::is_integer(e) {
        // Integer powers distribute over any product.
        return mul_many(fs.iter().map(|f| pow_make(f.clone(), e.clone())).collect());
    }
    // Fractional power: only a positive constant head (plus the sign when
    // the root is odd) may be factored out.
    if let Node::Num(c) = fs[0].node() {
        let odd_root = e.denom().is_odd();
        if c.is_positive() || odd_root {
            let sign = if c.is_negative() && e.numer().is_odd() {
                Expr::int(-1)
            } else {
                Expr::one()
            };
            if c.is_negative() && !odd_root {
                return Expr::new_raw(Node::Pow(whole.clone(), e.clone()));
            }
            let mag = Expr::num(c.abs());
            let rest = &fs[1..];
            let rest_expr = if rest.len() == 1 {
                rest[0].clone()
            } else {
                Expr::new_raw(Node::Mul(rest.to_vec()))
            };
            return mul_many(vec![
                sign,
                pow_make(mag, e.clone()),
                Expr::new_raw(Node::Pow(rest_expr, e.clone())),
            ]);
        }
        return Expr::new_raw(Node::Pow(whole.clone(), e.clone()));
    }
    Expr::new_raw(Node::Pow(whole.clone(), e.clone()))
}

/// Monomial content of a sum: the per-base minimum exponent over all terms
/// (0 when absent) plus the rational gcd of the coefficients. Dividing it
/// out leaves a content-free core, which keeps inverse-power bases small
/// and maximizes exponent cancellation.
fn sum_content(ts: &[Expr]) -> (Rat, BTreeMap<Expr, Rat>) {
    let mut coeff_gcd = Rat::zero();
    let mut per_base: BTreeMap<Expr, Option<Rat>> = BTreeMap::new();
    let mut universe: Vec<BTreeMap<Expr, Rat>> = Vec::with_capacity(ts.len());
    for t in ts {
        let (c, _) = split_coeff(t);
        coeff_gcd = rat::gcd(&coeff_gcd, &c);
        let mut m: BTreeMap<Expr, Rat> = BTreeMap::new();
        t.for_each_factor_pow(&mut |b, e| {
            m.insert(b.clone(), e.clone());
        });
        for b in m.keys() {
            per_base.entry(b.clone()).or_insert(None);
        }
        universe.push(m);
    }
    let mut content: BTreeMap<Expr, Rat> = BTreeMap::new();
    for (b, _) in per_base {
        let mut min: Option<Rat> = None;
        for m in &universe {
            let e = m.get(&b).cloned().unwrap_or_else(Rat::zero);
            min = Some(match min {
                None => e,
                Some(cur) => {
                    if e < cur {
                        e
                    } else {
                        cur
                    }
                }
            });
        }
        let min = min.unwrap_or_else(Rat::zero);
        if !min.is_zero() {
            content.insert(b, min);
        }
    }
    if coeff_gcd.is_zero() {
        coeff_gcd = Rat::one();
    }
    (coeff_gcd, content)
}

fn pow_of_sum(ts: &[Expr], e: &Rat, whole: &Expr) -> Expr {
    if whole.is_polynomial() && rat::is_integer(e) && e.is_positive() {
        if let Some(k) = e.numer().to_u32() {
            return expand_pow_sum(whole, k);
        }
    }
    // Integer exponents distribute over the monomial content of the base
    // unconditionally. A fractional exponent may only move the provably
    // nonnegative part of the content out of the root: the positive
    // coefficient, factors with an even-denominator exponent (roots of
    // even index are nonnegative), and the even part of integer exponents.
    {
        let e_int = rat::is_integer(e);
        let (ccoeff, cbases) = sum_content(ts);
        let cbases: BTreeMap<Expr, Rat> = if e_int {
            cbases
        } else {
            cbases
                .into_iter()
                .filter_map(|(b, m)| {
                    if m.denom().is_even() || m.numer().is_even() {
                        return Some((b, m));
                    }
                    // odd/odd: step the numerator down by one to the even
                    // part, dropping the factor when that reaches zero
                    let sign = if m.is_negative() { -1 } else { 1 };
                    let adjusted = &m - Rat::new(BigInt::from(sign), m.denom().clone());
                    if adjusted.is_zero() {
                        None
                    } else {
                        Some((b, adjusted))
                    }
                })
                .collect()
        };
        if !ccoeff.is_one() || !cbases.is_empty() {
            // Divide the content out of each term by adjusting exponents in
            // the factor map directly; multiplying by an expanded positive
            // power would change the base key and never cancel.
            let core = add_many(
                ts.iter()
                    .map(|t| {
                        let (c, _) = split_coeff(t);
                        let mut fmap: BTreeMap<Expr, Rat> = BTreeMap::new();
                        t.for_each_factor_pow(&mut |b, fe| {
                            fmap.insert(b.clone(), fe.clone());
                        });
                        for (b, min) in &cbases {
                            let slot = fmap.entry(b.clone()).or_insert_with(Rat::zero);
                            *slot -= min;
                        }
                        let mut factors: Vec<Expr> = Vec::with_capacity(fmap.len() + 1);
                        factors.push(Expr::num(c / &ccoeff));
                        for (b, fe) in fmap {
                            factors.push(pow_make(b, fe));
                        }
                        mul_many(factors)
                    })
                    .collect(),
            );
            let mut outer: Vec<Expr> = Vec::with_capacity(cbases.len() + 2);
            outer.push(pow_make(Expr::num(ccoeff), e.clone()));
            for (b, m) in cbases {
                // nest rather than multiplying exponents: the collapse
                // rules know when (b^m)^e may fold to b^(m e)
                outer.push(pow_make(pow_make(b, m), e.clone()));
            }
            outer.push(pow_make(core, e.clone()));
            return mul_many(outer);
        }
    }
    // Normalize the sign of the leading coefficient when that is sound:
    // integer exponents always, odd roots via real-root semantics.
    if rat::is_integer(e) || e.denom().is_odd() {
        let (lead, _) = split_coeff(&ts[0]);
        if lead.is_negative() {
            let flipped = scale_terms(&Rat::from_integer(BigInt::from(-1)), whole);
            let p = Expr::new_raw(Node::Pow(flipped, e.clone()));
            return if e.numer().is_odd() {
                mul_many(vec![Expr::int(-1), p])
            } else {
                p
            };
        }
    }
    Expr::new_raw(Node::Pow(whole.clone(), e.clone()))
}

fn expand_pow_sum(base: &Expr, k: u32) -> Expr {
    let mut acc = base.clone();
    for _ in 1..k {
        acc = distribute(&acc, base);
    }
    acc
}
