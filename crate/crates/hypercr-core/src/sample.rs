//! Seeded numeric zero-testing with domain guards.
//!
//! Vanishing questions are answered symbolically first: the canonical form
//! decides the polynomial fragment outright, and clearing denominators
//! extends that to rational functions of the atoms. Everything else falls
//! back to evaluation at pseudo-random rational points, rejected against
//! the guards so sampling stays away from branch points and poles.

use crate::error::{Error, Result};
use crate::expr::{Expr, JetPoint};
use crate::rat::{self, Rat};
use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use num_integer::Integer;
use num_traits::{One, Signed};

/// Deterministic 64-bit generator (splitmix64). Hand-rolled so verdicts are
/// reproducible byte for byte across platforms and builds.
#[derive(Clone, Debug)]
pub struct Prng {
    state: u64,
}

impl Prng {
    pub fn new(seed: u64) -> Prng {
        Prng { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform exact rational on the dyadic grid lo + (hi-lo)*k/2^16.
    pub fn next_rat_in(&mut self, lo: &Rat, hi: &Rat) -> Rat {
        let k = self.next_u64() & 0xFFFF;
        let frac = rat::rat(k as i64, 1 << 16);
        lo + (hi - lo) * frac
    }
}

/// What a guard demands of its expression at accepted sample points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum GuardKind {
    /// Value must be at least the margin (even-root arguments).
    Positive,
    /// Absolute value must be at least the margin (negative-power bases).
    NonzeroAbs,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Guard {
    pub kind: GuardKind,
    pub expr: Expr,
}

impl Guard {
    pub fn positive(expr: Expr) -> Guard {
        Guard {
            kind: GuardKind::Positive,
            expr,
        }
    }

    pub fn nonzero(expr: Expr) -> Guard {
        Guard {
            kind: GuardKind::NonzeroAbs,
            expr,
        }
    }

    fn holds(&self, coords: &[f64; 4], margin: f64) -> bool {
        match self.expr.eval_f(coords) {
            Ok(v) => match self.kind {
                GuardKind::Positive => v >= margin,
                GuardKind::NonzeroAbs => v.abs() >= margin,
            },
            Err(_) => false,
        }
    }
}

/// Guards implied by the expression itself: even-root arguments must clear
/// the margin, bases of negative powers must stay away from zero.
pub fn auto_guards(e: &Expr) -> Vec<Guard> {
    let mut found: Vec<Guard> = Vec::new();
    e.for_each_pow(&mut |base, exp| {
        if base.as_num().is_some() {
            return;
        }
        let g = if exp.denom().is_even() {
            Guard::positive(base.clone())
        } else if exp.is_negative() {
            Guard::nonzero(base.clone())
        } else {
            return;
        };
        if !found.contains(&g) {
            found.push(g);
        }
    });
    found.sort();
    found.dedup();
    found
}

/// Sampling policy for numeric verdicts.
#[derive(Clone, Debug)]
pub struct SamplePlan {
    /// Number of accepted sample points.
    pub count: usize,
    /// PRNG seed, printed in every report.
    pub seed: u64,
    /// Per-coordinate closed interval for (t, x0, x1, x2).
    pub coord_box: [(Rat, Rat); 4],
    /// Residuals below tol * (1 + magnitude scale) count as zero.
    pub tol: f64,
    /// Margin for the domain guards.
    pub margin: f64,
    /// Guards every accepted sample must satisfy.
    pub guards: Vec<Guard>,
}

pub const DEFAULT_SEED: u64 = 0xDA7A;

impl Default for SamplePlan {
    fn default() -> SamplePlan {
        let span = || (rat::rat_int(-2), rat::rat_int(2));
        SamplePlan {
            count: 12,
            seed: DEFAULT_SEED,
            coord_box: [span(), span(), span(), span()],
            tol: 1e-9,
            margin: 0.05,
            guards: Vec::new(),
        }
    }
}

impl SamplePlan {
    pub fn with_guards(&self, extra: &[Guard]) -> SamplePlan {
        let mut plan = self.clone();
        for g in extra {
            if !plan.guards.contains(g) {
                plan.guards.push(g.clone());
            }
        }
        plan
    }

    fn sample(&self, prng: &mut Prng) -> JetPoint {
        let c: Vec<Rat> = self
            .coord_box
            .iter()
            .map(|(lo, hi)| prng.next_rat_in(lo, hi))
            .collect();
        let mut it = c.into_iter();
        JetPoint::new(
            it.next().unwrap(),
            it.next().unwrap(),
            it.next().unwrap(),
            it.next().unwrap(),
        )
    }
}

/// Outcome of a vanishing test.
#[derive(Clone, Debug, PartialEq)]
pub enum ZeroVerdict {
    /// Canonical simplification reached the zero constant.
    SymbolicZero,
    /// Every accepted sample stayed below the tolerance.
    NumericallyZero { max_abs: f64, samples: usize },
    /// A guarded sample evaluated above the tolerance.
    NonZero { witness: JetPoint, value: f64 },
}

impl ZeroVerdict {
    pub fn is_zero(&self) -> bool {
        !matches!(self, ZeroVerdict::NonZero { .. })
    }

    pub fn is_symbolic(&self) -> bool {
        matches!(self, ZeroVerdict::SymbolicZero)
    }
}

/// Skip denominator clearing above these sizes: the modular and exact
/// fallbacks are cheaper than a huge expansion.
const CLEAR_SIZE_CAP: usize = 100_000;
const CLEAR_TERM_CAP: usize = 600;

/// Multiplies through by enough powers of every negative-exponent base to
/// make all exponents nonnegative. Zero-preserving away from the poles, so
/// a zero result proves the input vanishes on its domain.
pub(crate) fn clear_denominators(e: &Expr) -> Expr {
    let mut need: BTreeMap<Expr, Rat> = BTreeMap::new();
    for term in e.terms() {
        term.for_each_factor_pow(&mut |base, exp| {
            if exp.is_negative() && base.as_num().is_none() {
                let want = -exp;
                let slot = need.entry(base.clone()).or_insert_with(|| want.clone());
                if *slot < want {
                    *slot = want;
                }
            }
        });
    }
    if need.is_empty() {
        return e.clone();
    }
    let mut factors: Vec<Expr> = vec![e.clone()];
    for (b, m) in need {
        factors.push(Expr::pow(b, m));
    }
    Expr::mul(factors)
}

/// Working precisions (bits of the dyadic rounding grid) for the certified
/// evaluation; widened when an enclosure is too loose to decide.
const PRECISIONS: [u32; 3] = [128, 320, 768];

/// Decides whether `e` vanishes identically: symbolically when the normal
/// form (or its cleared numerator) is zero, otherwise by certified
/// interval evaluation at guarded pseudo-random rational points. A
/// returned `NonZero` witness carries a proven |value| > tol.
pub fn is_zero(e: &Expr, plan: &SamplePlan) -> Result<ZeroVerdict> {
    if e.is_const_zero() {
        return Ok(ZeroVerdict::SymbolicZero);
    }
    if e.terms().len() <= CLEAR_TERM_CAP
        && e.node_count() <= CLEAR_SIZE_CAP
        && clear_denominators(e).is_const_zero()
    {
        return Ok(ZeroVerdict::SymbolicZero);
    }
    if e.as_num().is_some() {
        // A nonzero constant needs no sampling; witness anywhere.
        let witness = JetPoint::from_ints(0, 0, 0, 0);
        let value = e.eval_float(&witness)?;
        return Ok(ZeroVerdict::NonZero { witness, value });
    }

    let guards: Vec<Guard> = {
        let mut gs = plan.guards.clone();
        for g in auto_guards(e) {
            if !gs.contains(&g) {
                gs.push(g);
            }
        }
        gs
    };
    let tol = Rat::from_float(plan.tol).unwrap_or_else(|| rat::rat(1, 1_000_000_000));
    // |v| <= tol (1 + |v|) is |v| <= tol/(1 - tol).
    let threshold = &tol / &(&Rat::one() - &tol);
    let shape = crate::quad::radical_shape(e);

    let mut prng = Prng::new(plan.seed);
    let max_attempts = plan.count.saturating_mul(1000);
    let mut attempts = 0usize;
    let mut accepted = 0usize;
    let mut max_abs = 0.0f64;
    while accepted < plan.count {
        if attempts >= max_attempts {
            return Err(Error::SamplingExhausted { attempts, accepted });
        }
        attempts += 1;
        let p = plan.sample(&mut prng);
        let coords = match p.to_f64() {
            Ok(c) => c,
            Err(_) => continue,
        };
        if !guards.iter().all(|g| g.holds(&coords, plan.margin)) {
            continue;
        }
        match sample_verdict(e, &p, &shape, &threshold) {
            SampleOutcome::Rejected => continue,
            SampleOutcome::NonZero { value } => {
                return Ok(ZeroVerdict::NonZero { witness: p, value });
            }
            SampleOutcome::Zero { certified_abs } => {
                if certified_abs > max_abs {
                    max_abs = certified_abs;
                }
                accepted += 1;
            }
        }
    }
    Ok(ZeroVerdict::NumericallyZero {
        max_abs,
        samples: accepted,
    })
}

enum SampleOutcome {
    /// Evaluation failed or the enclosure could not be decided.
    Rejected,
    Zero { certified_abs: f64 },
    NonZero { value: f64 },
}

/// Decides |e(p)| <= threshold at one point: exactly when the radical
/// structure allows (no radicals, or a single square root), by certified
/// intervals otherwise.
fn sample_verdict(
    e: &Expr,
    p: &JetPoint,
    shape: &crate::quad::RadicalShape,
    threshold: &Rat,
) -> SampleOutcome {
    use crate::quad::RadicalShape;
    use num_traits::Signed;
    // Modular pre-check: an exact zero is certified in word arithmetic;
    // only nonzero values need their magnitude for the tolerance test.
    match crate::modular::modular_is_zero(e, p, shape) {
        Some(true) => return SampleOutcome::Zero { certified_abs: 0.0 },
        Some(false) => {
            // Proven nonzero; a double evaluation settles the magnitude
            // unless the value sits near the tolerance within float noise.
            if let Ok(coords) = p.to_f64() {
                if let Ok((value, scale)) = eval_with_scale(e, &coords) {
                    let thr = rat::to_f64(threshold).unwrap_or(0.0);
                    let noise = 1e-12 * (1.0 + scale);
                    if value.abs() - noise > thr {
                        return SampleOutcome::NonZero { value };
                    }
                }
            }
        }
        None => {}
    }
    match shape {
        RadicalShape::Rational => match e.eval_exact(p) {
            Err(_) => SampleOutcome::Rejected,
            Ok(v) => {
                if v.abs() <= *threshold {
                    SampleOutcome::Zero {
                        certified_abs: rat::to_f64(&v.abs()).unwrap_or(0.0),
                    }
                } else {
                    SampleOutcome::NonZero {
                        value: rat::to_f64(&v).unwrap_or(f64::INFINITY),
                    }
                }
            }
        },
        RadicalShape::Quadratic(u_base) => {
            let u0 = match u_base.eval_exact(p) {
                Ok(q) => q,
                Err(_) => return SampleOutcome::Rejected,
            };
            let ctx = match crate::quad::QuadCtx::new(u0) {
                Ok(c) => c,
                Err(_) => return SampleOutcome::Rejected,
            };
            match crate::quad::eval_quad(e, p, u_base, &ctx) {
                Err(_) => SampleOutcome::Rejected,
                Ok(v) => {
                    if v.abs_le(threshold, ctx.u0()) {
                        SampleOutcome::Zero {
                            certified_abs: v.to_f64(ctx.u0()).abs(),
                        }
                    } else {
                        SampleOutcome::NonZero {
                            value: v.to_f64(ctx.u0()),
                        }
                    }
                }
            }
        }
        RadicalShape::General => {
            for bits in PRECISIONS {
                match crate::interval::eval_interval(e, p, bits) {
                    Err(_) => return SampleOutcome::Rejected,
                    Ok(iv) => {
                        if iv.abs_lower() > *threshold {
                            return SampleOutcome::NonZero {
                                value: iv.mid_f64(),
                            };
                        }
                        if iv.abs_upper() <= *threshold {
                            return SampleOutcome::Zero {
                                certified_abs: rat::to_f64(&iv.abs_upper()).unwrap_or(0.0),
                            };
                        }
                    }
                }
            }
            SampleOutcome::Rejected
        }
    }
}

/// Value plus the cancellation scale: the sum of the magnitudes of the
/// top-level terms. Residuals are judged relative to this, which is the
/// precision a double evaluation can actually achieve.
pub(crate) fn eval_with_scale(e: &Expr, coords: &[f64; 4]) -> Result<(f64, f64)> {
    let terms = e.terms();
    if terms.len() == 1 {
        let v = e.eval_f(coords)?;
        return Ok((v, v.abs()));
    }
    let mut memo = crate::expr::FloatMemo::new();
    let mut sum = 0.0;
    let mut scale = 0.0;
    for t in terms {
        let v = t.eval_f_memo(coords, &mut memo)?;
        sum += v;
        scale += v.abs();
    }
    Ok((sum, scale))
}

/// Shared helper: evaluate every guard-respecting residual callback over
/// accepted samples. Used by the transformation checks.
pub(crate) fn for_each_accepted<F>(
    plan: &SamplePlan,
    guards: &[Guard],
    mut body: F,
) -> Result<usize>
where
    F: FnMut(&JetPoint, &[f64; 4]) -> Result<bool>,
{
    let mut prng = Prng::new(plan.seed);
    let max_attempts = plan.count.saturating_mul(1000);
    let mut attempts = 0usize;
    let mut accepted = 0usize;
    while accepted < plan.count {
        if attempts >= max_attempts {
            return Err(Error::SamplingExhausted { attempts, accepted });
        }
        attempts += 1;
        let p = plan.sample(&mut prng);
        let coords = match p.to_f64() {
            Ok(c) => c,
            Err(_) => continue,
        };
        if !guards.iter().all(|g| g.holds(&coords, plan.margin)) {
            continue;
        }
        if !body(&p, &coords)? {
            continue;
        }
        accepted += 1;
    }
    Ok(accepted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    fn u_expr() -> Expr {
        // 9 - 2*x1*x2
        &Expr::int(9) - &Expr::mul(vec![Expr::int(2), Expr::x1(), Expr::x2()])
    }

    #[test]
    fn symbolic_zero_plain() {
        let plan = SamplePlan::default();
        assert_eq!(is_zero(&Expr::zero(), &plan).unwrap(), ZeroVerdict::SymbolicZero);
    }

    #[test]
    fn symbolic_zero_after_clearing() {
        let u = &Expr::int(1) + &Expr::x0();
        let inv = u.recip();
        let e = &(&inv + &(&Expr::x0() * &inv)) - &Expr::one();
        let plan = SamplePlan::default();
        assert_eq!(is_zero(&e, &plan).unwrap(), ZeroVerdict::SymbolicZero);
    }

    #[test]
    fn nonzero_has_checkable_witness() {
        let e = &Expr::x1() - &Expr::x2();
        let plan = SamplePlan::default();
        match is_zero(&e, &plan).unwrap() {
            ZeroVerdict::NonZero { witness, value } => {
                let again = e.eval_float(&witness).unwrap();
                assert!((again - value).abs() <= 1e-9 * (1.0 + again.abs()));
                assert!(value.abs() > plan.tol);
            }
            other => panic!("expected NonZero, got {other:?}"),
        }
    }

    #[test]
    fn abs_identity_is_only_numerically_zero_on_guarded_domain() {
        // sqrt(x2^2) - x2 is |x2| - x2: nonzero on the full box, zero once
        // a positivity guard keeps x2 > 0.
        let e = &Expr::sqrt(Expr::powi(Expr::x2(), 2)) - &Expr::x2();
        let plan = SamplePlan::default();
        assert!(matches!(
            is_zero(&e, &plan).unwrap(),
            ZeroVerdict::NonZero { .. }
        ));
        let guarded = plan.with_guards(&[Guard::positive(Expr::x2())]);
        match is_zero(&e, &guarded).unwrap() {
            ZeroVerdict::NumericallyZero { max_abs, samples } => {
                assert!(max_abs <= 1e-12);
                assert_eq!(samples, plan.count);
            }
            other => panic!("expected NumericallyZero, got {other:?}"),
        }
    }

    #[test]
    fn radical_guards_are_extracted() {
        let v = &Expr::sqrt(u_expr()) - &Expr::int(3);
        let f = Expr::powi(v, -3);
        let gs = auto_guards(&f);
        assert!(gs.iter().any(|g| g.kind == GuardKind::Positive && g.expr == u_expr()));
        assert!(gs.iter().any(|g| g.kind == GuardKind::NonzeroAbs));
    }

    #[test]
    fn impossible_guard_exhausts() {
        let plan = SamplePlan {
            count: 2,
            ..SamplePlan::default()
        };
        let impossible = plan.with_guards(&[Guard::positive(
            -&(&Expr::int(1) + &Expr::powi(Expr::x2(), 2)),
        )]);
        assert!(matches!(
            is_zero(&Expr::x2(), &impossible),
            Err(Error::SamplingExhausted { .. })
        ));
    }

    #[test]
    fn verdicts_are_deterministic() {
        let e = &Expr::sqrt(Expr::powi(Expr::x2(), 2)) - &Expr::x2();
        let plan = SamplePlan::default();
        let a = is_zero(&e, &plan).unwrap();
        let b = is_zero(&e, &plan).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dyadic_sampling_stays_in_box() {
        let mut prng = Prng::new(7);
        let lo = rat(-2, 1);
        let hi = rat(2, 1);
        for _ in 0..100 {
            let v = prng.next_rat_in(&lo, &hi);
            assert!(v >= lo && v <= hi);
        }
    }
}
