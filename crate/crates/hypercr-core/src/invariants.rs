//! Scalar and form invariants of a third-order ODE and the hyper-CR
//! Einstein-Weyl classification.
//!
//! The scalar invariants W (Wunschmann), C (Cartan) and the pair (K0, K1)
//! are built from the cached partials of F and iterated total derivatives.
//! When the third x2-derivative of F is nonzero the multiplier ratio Psi
//! exists, and with it the relative invariant forms: the integrability
//! 3-form built from alpha_F and the 2-form whose coefficients decide the
//! hyper-CR condition. Their vanishing is judged through the coefficient
//! tuples; the wedge expansion is kept as an independent oracle.

use crate::error::{Error, Result};
use crate::expr::{Expr, Var};
use crate::exterior::{alpha_form, omega_coframe, Form};
use crate::jet::Equation;
use crate::sample::{is_zero, SamplePlan, ZeroVerdict};
use alloc::vec;


/// Wunschmann invariant
/// W = F_x0 - 1/2 X(F_x1) + 1/3 F_x1 F_x2 + 1/6 X^2(F_x2)
///   - 1/3 X(F_x2) F_x2 + 2/27 F_x2^3.
pub fn wunschmann(eq: &Equation) -> Result<Expr> {
    let f1 = eq.df(Var::X1);
    let f2 = eq.df(Var::X2);
    let x_f1 = eq.total_derivative(f1)?;
    let x_f2 = eq.total_derivative(f2)?;
    let xx_f2 = eq.total_derivative(&x_f2)?;
    let w = Expr::add(vec![
        eq.df(Var::X0).clone(),
        Expr::mul(vec![Expr::ratio(-1, 2), x_f1]),
        Expr::mul(vec![Expr::ratio(1, 3), f1.clone(), f2.clone()]),
        Expr::mul(vec![Expr::ratio(1, 6), xx_f2]),
        Expr::mul(vec![Expr::ratio(-1, 3), x_f2, f2.clone()]),
        Expr::mul(vec![Expr::ratio(2, 27), Expr::powi(f2.clone(), 3)]),
    ]);
    w.simplify()
}

/// The relative invariants of the fibre-preserving class:
/// K0 = F_x0 - X(F_x1) + 1/3 F_x1 F_x2 + 2/3 X^2(F_x2) - 2/3 X(F_x2) F_x2
///    + 2/27 F_x2^3,
/// K1 = F_x1 - X(F_x2) + 1/3 F_x2^2.
pub fn k_invariants(eq: &Equation) -> Result<(Expr, Expr)> {
    let f1 = eq.df(Var::X1);
    let f2 = eq.df(Var::X2);
    let x_f1 = eq.total_derivative(f1)?;
    let x_f2 = eq.total_derivative(f2)?;
    let xx_f2 = eq.total_derivative(&x_f2)?;
    let k0 = Expr::add(vec![
        eq.df(Var::X0).clone(),
        -&x_f1,
        Expr::mul(vec![Expr::ratio(1, 3), f1.clone(), f2.clone()]),
        Expr::mul(vec![Expr::ratio(2, 3), xx_f2]),
        Expr::mul(vec![Expr::ratio(-2, 3), x_f2.clone(), f2.clone()]),
        Expr::mul(vec![Expr::ratio(2, 27), Expr::powi(f2.clone(), 3)]),
    ]);
    let k1 = Expr::add(vec![
        f1.clone(),
        -&x_f2,
        Expr::mul(vec![Expr::ratio(1, 3), Expr::powi(f2.clone(), 2)]),
    ]);
    k0.simplify()?;
    k1.simplify()?;
    Ok((k0, k1))
}

/// Residual of W = K0 + 1/2 X(K1); identically zero for every equation.
pub fn wk_identity_residual(eq: &Equation) -> Result<Expr> {
    let w = wunschmann(eq)?;
    let (k0, k1) = k_invariants(eq)?;
    let x_k1 = eq.total_derivative(&k1)?;
    Ok(Expr::add(vec![
        w,
        -&k0,
        Expr::mul(vec![Expr::ratio(-1, 2), x_k1]),
    ]))
}

/// Cartan invariant C = X^2(F_x2x2) - X(F_x1x2) + F_x0x2.
pub fn cartan(eq: &Equation) -> Result<Expr> {
    let f2 = eq.df(Var::X2);
    let c = Expr::add(vec![
        eq.total_derivative_n(&f2.diff(Var::X2), 2)?,
        -&eq.total_derivative(&f2.diff(Var::X1))?,
        f2.diff(Var::X0),
    ]);
    c.simplify()
}

/// Residual of C = 3/2 K1_x1 + F_x2 K1_x2 + 3/2 K0_x2; identically zero.
pub fn cartan_k_identity_residual(eq: &Equation) -> Result<Expr> {
    let c = cartan(eq)?;
    let (k0, k1) = k_invariants(eq)?;
    Ok(Expr::add(vec![
        c,
        Expr::mul(vec![Expr::ratio(-3, 2), k1.diff(Var::X1)]),
        Expr::mul(vec![Expr::int(-1), eq.df(Var::X2).clone(), k1.diff(Var::X2)]),
        Expr::mul(vec![Expr::ratio(-3, 2), k0.diff(Var::X2)]),
    ]))
}

/// Psi = K1_x2x2x2 / (2 F_x2x2x2). The denominator is a point invariant;
/// when it vanishes identically the equation is point equivalent to the
/// trivial one and the branch is reported instead.
pub fn psi(eq: &Equation) -> Result<Expr> {
    let d3f = eq.f().diff_n(Var::X2, 3);
    if d3f.is_const_zero() {
        return Err(Error::TrivializableBranch);
    }
    let (_, k1) = k_invariants(eq)?;
    let d3k1 = k1.diff_n(Var::X2, 3);
    let p = &d3k1 / &(&Expr::int(2) * &d3f);
    p.simplify()
}

/// I1 = Psi_x1 - Psi^2 and I2 = Psi_x2: the Frobenius obstructions for the
/// rank-3 distribution annihilated by alpha_F.
pub fn i_coefficients(eq: &Equation) -> Result<(Expr, Expr)> {
    let p = psi(eq)?;
    let i1 = &p.diff(Var::X1) - &Expr::powi(p.clone(), 2);
    let i2 = p.diff(Var::X2);
    i1.simplify()?;
    Ok((i1, i2))
}

/// The 3-form d(alpha_F) ^ alpha_F computed by exterior calculus.
pub fn i_form(eq: &Equation) -> Result<Form> {
    let p = psi(eq)?;
    let alpha = alpha_form(eq, &p);
    alpha.exterior_derivative().wedge(&alpha)
}

/// The same 3-form through its closed expression
/// -(I1 omega1 + I2 omega2) ^ omega0 ^ alpha_F; the two paths agreeing is
/// the oracle for the exterior pipeline.
pub fn i_form_closed(eq: &Equation) -> Result<Form> {
    let p = psi(eq)?;
    let (i1, i2) = i_coefficients(eq)?;
    let [omega0, omega1, omega2, _] = omega_coframe(eq);
    let alpha = alpha_form(eq, &p);
    let lead = omega1.scale(&i1).add(&omega2.scale(&i2)).scale(&Expr::int(-1));
    lead.wedge(&omega0)?.wedge(&alpha)
}

/// J0, J1, J2: the coefficients of the 2-form deciding the hyper-CR
/// condition once W and the 3-form vanish.
pub fn j_coefficients(eq: &Equation) -> Result<(Expr, Expr, Expr)> {
    let p = psi(eq)?;
    let (_, k1) = k_invariants(eq)?;
    let x_p = eq.total_derivative(&p)?;
    let xx_p = eq.total_derivative(&x_p)?;
    let xxx_p = eq.total_derivative(&xx_p)?;
    let x_k1 = eq.total_derivative(&k1)?;
    let j0 = Expr::add(vec![
        k1.diff(Var::X0),
        Expr::mul(vec![Expr::int(2), x_p.clone(), k1.clone()]),
        Expr::mul(vec![p.clone(), x_k1]),
        Expr::mul(vec![Expr::int(-2), xxx_p]),
        Expr::mul(vec![Expr::int(-2), eq.df(Var::X0).clone(), p.clone()]),
    ]);
    let j1 = Expr::add(vec![
        k1.diff(Var::X1),
        Expr::mul(vec![Expr::int(2), p.clone(), k1.clone()]),
        Expr::mul(vec![Expr::int(-6), xx_p]),
        Expr::mul(vec![Expr::int(-2), eq.df(Var::X1).clone(), p.clone()]),
    ]);
    let j2 = Expr::add(vec![
        k1.diff(Var::X2),
        Expr::mul(vec![Expr::int(-6), x_p]),
        Expr::mul(vec![Expr::int(-2), eq.df(Var::X2).clone(), p]),
    ]);
    j0.simplify()?;
    j1.simplify()?;
    j2.simplify()?;
    Ok((j0, j1, j2))
}

/// The 2-form (J0 omega0 + J1 omega1 + J2 omega2) ^ alpha_F.
pub fn j_form(eq: &Equation) -> Result<Form> {
    let p = psi(eq)?;
    let (j0, j1, j2) = j_coefficients(eq)?;
    let [omega0, omega1, omega2, _] = omega_coframe(eq);
    let alpha = alpha_form(eq, &p);
    omega0
        .scale(&j0)
        .add(&omega1.scale(&j1))
        .add(&omega2.scale(&j2))
        .wedge(&alpha)
}

/// Residual of the closing identity
/// C = 3/2 W_x2 - 3/4 X(J2) + 3/4 J1 + 1/4 F_x2 J2,
/// identically zero whenever Psi is defined.
pub fn closing_identity_residual(eq: &Equation) -> Result<Expr> {
    let c = cartan(eq)?;
    let w = wunschmann(eq)?;
    let (_, j1, j2) = j_coefficients(eq)?;
    let x_j2 = eq.total_derivative(&j2)?;
    Ok(Expr::add(vec![
        c,
        Expr::mul(vec![Expr::ratio(-3, 2), w.diff(Var::X2)]),
        Expr::mul(vec![Expr::ratio(3, 4), x_j2]),
        Expr::mul(vec![Expr::ratio(-3, 4), j1]),
        Expr::mul(vec![Expr::ratio(-1, 4), eq.df(Var::X2).clone(), j2]),
    ]))
}

/// Final verdict of the decision table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    /// F_x2x2x2 vanishes identically: point equivalent to the trivial
    /// equation, hyper-CR trivially.
    PointTrivializable,
    /// W does not vanish: no conformal structure on the solution space.
    NotWunschmann,
    /// W vanishes but C does not: conformal structure without a compatible
    /// Weyl connection.
    WunschmannNotEinsteinWeyl,
    /// W and C vanish but the invariant forms do not: Einstein-Weyl, not
    /// hyper-CR.
    EinsteinWeylNotHyperCR,
    /// W and both forms vanish: hyper-CR Einstein-Weyl.
    HyperCREinsteinWeyl,
}

impl Classification {
    pub fn name(self) -> &'static str {
        match self {
            Classification::PointTrivializable => "PointTrivializable",
            Classification::NotWunschmann => "NotWunschmann",
            Classification::WunschmannNotEinsteinWeyl => "WunschmannNotEinsteinWeyl",
            Classification::EinsteinWeylNotHyperCR => "EinsteinWeylNotHyperCR",
            Classification::HyperCREinsteinWeyl => "HyperCREinsteinWeyl",
        }
    }
}

/// An invariant expression together with its vanishing verdict.
#[derive(Clone, Debug)]
pub struct ScalarInvariant {
    pub expr: Expr,
    pub verdict: ZeroVerdict,
}

/// Everything that only exists away from the trivializable branch.
#[derive(Clone, Debug)]
pub struct FormInvariants {
    pub psi: Expr,
    pub i1: ScalarInvariant,
    pub i2: ScalarInvariant,
    /// Combined verdict for the 3-form (through its coefficients).
    pub i_verdict: ZeroVerdict,
    pub j0: ScalarInvariant,
    pub j1: ScalarInvariant,
    pub j2: ScalarInvariant,
    /// Combined verdict for the 2-form (through its coefficients).
    pub j_verdict: ZeroVerdict,
    /// The 2-form is a relative invariant only when W and the 3-form
    /// vanish; reported data is diagnostic otherwise.
    pub j_valid: bool,
}

/// Residuals of the consistency identities, evaluated like any invariant.
#[derive(Clone, Debug)]
pub struct Residuals {
    pub wk: ZeroVerdict,
    pub cartan_k: ZeroVerdict,
    pub closing: Option<ZeroVerdict>,
}

/// Full output of `classify`.
#[derive(Clone, Debug)]
pub struct InvariantReport {
    pub f: Expr,
    pub w: ScalarInvariant,
    pub c: ScalarInvariant,
    pub k0: ScalarInvariant,
    pub k1: ScalarInvariant,
    /// True when F_x2x2x2 is identically zero (branch (a)).
    pub trivializable: bool,
    pub forms: Option<FormInvariants>,
    pub residuals: Residuals,
    pub classification: Classification,
    pub plan: SamplePlan,
}

/// Combines coefficient verdicts into a form verdict: symbolic only when
/// every coefficient vanished symbolically, nonzero as soon as one
/// coefficient witnessed a value.
pub fn combine_verdicts(parts: &[&ZeroVerdict]) -> ZeroVerdict {
    for p in parts {
        if let ZeroVerdict::NonZero { witness, value } = p {
            return ZeroVerdict::NonZero {
                witness: witness.clone(),
                value: *value,
            };
        }
    }
    if parts.iter().all(|p| p.is_symbolic()) {
        return ZeroVerdict::SymbolicZero;
    }
    let mut max_abs = 0.0f64;
    let mut samples = usize::MAX;
    for p in parts {
        if let ZeroVerdict::NumericallyZero {
            max_abs: m,
            samples: s,
        } = p
        {
            if *m > max_abs {
                max_abs = *m;
            }
            if *s < samples {
                samples = *s;
            }
        }
    }
    ZeroVerdict::NumericallyZero { max_abs, samples }
}

/// Runs the whole pipeline and applies the decision table:
/// (a) trivializable; (b) W nonzero; (c) W zero, 3-form nonzero;
/// (d) W and 3-form zero, 2-form nonzero; (e) all zero.
///
/// Shared intermediates (the total-derivative chains of F, K1 and Psi) are
/// computed once; the standalone per-invariant functions recompute them
/// and exist for spot queries and cross-checks.
pub fn classify(eq: &Equation, plan: &SamplePlan) -> Result<InvariantReport> {
    let plan = eq.plan(plan);
    let test = |e: &Expr| -> Result<ZeroVerdict> { is_zero(e, &plan) };

    let f1 = eq.df(Var::X1);
    let f2 = eq.df(Var::X2);
    let x_f1 = eq.total_derivative(f1)?;
    let x_f2 = eq.total_derivative(f2)?;
    let xx_f2 = eq.total_derivative(&x_f2)?;

    let w_expr = Expr::add(vec![
        eq.df(Var::X0).clone(),
        Expr::mul(vec![Expr::ratio(-1, 2), x_f1.clone()]),
        Expr::mul(vec![Expr::ratio(1, 3), f1.clone(), f2.clone()]),
        Expr::mul(vec![Expr::ratio(1, 6), xx_f2.clone()]),
        Expr::mul(vec![Expr::ratio(-1, 3), x_f2.clone(), f2.clone()]),
        Expr::mul(vec![Expr::ratio(2, 27), Expr::powi(f2.clone(), 3)]),
    ]);
    let k0_expr = Expr::add(vec![
        eq.df(Var::X0).clone(),
        -&x_f1,
        Expr::mul(vec![Expr::ratio(1, 3), f1.clone(), f2.clone()]),
        Expr::mul(vec![Expr::ratio(2, 3), xx_f2]),
        Expr::mul(vec![Expr::ratio(-2, 3), x_f2.clone(), f2.clone()]),
        Expr::mul(vec![Expr::ratio(2, 27), Expr::powi(f2.clone(), 3)]),
    ]);
    let k1_expr = Expr::add(vec![
        f1.clone(),
        -&x_f2,
        Expr::mul(vec![Expr::ratio(1, 3), Expr::powi(f2.clone(), 2)]),
    ]);
    let c_expr = Expr::add(vec![
        eq.total_derivative_n(&f2.diff(Var::X2), 2)?,
        -&eq.total_derivative(&f2.diff(Var::X1))?,
        f2.diff(Var::X0),
    ]);

    let x_k1 = eq.total_derivative(&k1_expr)?;
    let wk_res = Expr::add(vec![
        w_expr.clone(),
        -&k0_expr,
        Expr::mul(vec![Expr::ratio(-1, 2), x_k1.clone()]),
    ]);
    let ck_res = Expr::add(vec![
        c_expr.clone(),
        Expr::mul(vec![Expr::ratio(-3, 2), k1_expr.diff(Var::X1)]),
        Expr::mul(vec![Expr::int(-1), f2.clone(), k1_expr.diff(Var::X2)]),
        Expr::mul(vec![Expr::ratio(-3, 2), k0_expr.diff(Var::X2)]),
    ]);

    let w = ScalarInvariant {
        verdict: test(&w_expr)?,
        expr: w_expr,
    };
    let c = ScalarInvariant {
        verdict: test(&c_expr)?,
        expr: c_expr,
    };
    let k0 = ScalarInvariant {
        verdict: test(&k0_expr)?,
        expr: k0_expr,
    };
    let wk = test(&wk_res)?;
    let cartan_k = test(&ck_res)?;

    let d3f = eq.f().diff_n(Var::X2, 3);
    if d3f.is_const_zero() {
        let k1 = ScalarInvariant {
            verdict: test(&k1_expr)?,
            expr: k1_expr,
        };
        return Ok(InvariantReport {
            f: eq.f().clone(),
            w,
            c,
            k0,
            k1,
            trivializable: true,
            forms: None,
            residuals: Residuals {
                wk,
                cartan_k,
                closing: None,
            },
            classification: Classification::PointTrivializable,
            plan,
        });
    }

    let psi_expr = {
        let d3k1 = k1_expr.diff_n(Var::X2, 3);
        let p = &d3k1 / &(&Expr::int(2) * &d3f);
        p.simplify()?;
        p
    };
    let i1_expr = &psi_expr.diff(Var::X1) - &Expr::powi(psi_expr.clone(), 2);
    let i2_expr = psi_expr.diff(Var::X2);
    let k1 = ScalarInvariant {
        verdict: test(&k1_expr)?,
        expr: k1_expr.clone(),
    };
    let i1 = ScalarInvariant {
        verdict: test(&i1_expr)?,
        expr: i1_expr,
    };
    let i2 = ScalarInvariant {
        verdict: test(&i2_expr)?,
        expr: i2_expr,
    };
    let i_verdict = combine_verdicts(&[&i1.verdict, &i2.verdict]);

    let x_p = eq.total_derivative(&psi_expr)?;
    let xx_p = eq.total_derivative(&x_p)?;
    let xxx_p = eq.total_derivative(&xx_p)?;
    let j0_expr = Expr::add(vec![
        k1_expr.diff(Var::X0),
        Expr::mul(vec![Expr::int(2), x_p.clone(), k1_expr.clone()]),
        Expr::mul(vec![psi_expr.clone(), x_k1]),
        Expr::mul(vec![Expr::int(-2), xxx_p]),
        Expr::mul(vec![Expr::int(-2), eq.df(Var::X0).clone(), psi_expr.clone()]),
    ]);
    let j1_expr = Expr::add(vec![
        k1_expr.diff(Var::X1),
        Expr::mul(vec![Expr::int(2), psi_expr.clone(), k1_expr.clone()]),
        Expr::mul(vec![Expr::int(-6), xx_p]),
        Expr::mul(vec![Expr::int(-2), f1.clone(), psi_expr.clone()]),
    ]);
    let j2_expr = Expr::add(vec![
        k1_expr.diff(Var::X2),
        Expr::mul(vec![Expr::int(-6), x_p]),
        Expr::mul(vec![Expr::int(-2), f2.clone(), psi_expr.clone()]),
    ]);
    j0_expr.simplify()?;

    let closing_res = Expr::add(vec![
        c.expr.clone(),
        Expr::mul(vec![Expr::ratio(-3, 2), w.expr.diff(Var::X2)]),
        Expr::mul(vec![Expr::ratio(3, 4), eq.total_derivative(&j2_expr)?]),
        Expr::mul(vec![Expr::ratio(-3, 4), j1_expr.clone()]),
        Expr::mul(vec![Expr::ratio(-1, 4), f2.clone(), j2_expr.clone()]),
    ]);

    let j0 = ScalarInvariant {
        verdict: test(&j0_expr)?,
        expr: j0_expr,
    };
    let j1 = ScalarInvariant {
        verdict: test(&j1_expr)?,
        expr: j1_expr,
    };
    let j2 = ScalarInvariant {
        verdict: test(&j2_expr)?,
        expr: j2_expr,
    };
    let j_verdict = combine_verdicts(&[&j0.verdict, &j1.verdict, &j2.verdict]);
    let j_valid = w.verdict.is_zero() && i_verdict.is_zero();

    let closing = test(&closing_res)?;

    let classification = if !w.verdict.is_zero() {
        Classification::NotWunschmann
    } else if !i_verdict.is_zero() || !j_verdict.is_zero() {
        if c.verdict.is_zero() {
            Classification::EinsteinWeylNotHyperCR
        } else {
            Classification::WunschmannNotEinsteinWeyl
        }
    } else {
        Classification::HyperCREinsteinWeyl
    };

    Ok(InvariantReport {
        f: eq.f().clone(),
        w,
        c,
        k0,
        k1,
        trivializable: false,
        forms: Some(FormInvariants {
            psi: psi_expr,
            i1,
            i2,
            i_verdict,
            j0,
            j1,
            j2,
            j_verdict,
            j_valid,
        }),
        residuals: Residuals {
            wk,
            cartan_k,
            closing: Some(closing),
        },
        classification,
        plan,
    })
}

/// Named lookup used by the CLI `invariants` subcommand.
pub fn invariant_by_name(eq: &Equation, name: &str) -> Result<Expr> {
    match name.to_ascii_lowercase().as_str() {
        "w" => wunschmann(eq),
        "c" => cartan(eq),
        "k0" => Ok(k_invariants(eq)?.0),
        "k1" => Ok(k_invariants(eq)?.1),
        "psi" => psi(eq),
        "i1" => Ok(i_coefficients(eq)?.0),
        "i2" => Ok(i_coefficients(eq)?.1),
        "j0" => Ok(j_coefficients(eq)?.0),
        "j1" => Ok(j_coefficients(eq)?.1),
        "j2" => Ok(j_coefficients(eq)?.2),
        _ => Err(Error::PreconditionViolated("unknown invariant name")),
    }
}

pub const INVARIANT_NAMES: [&str; 10] =
    ["W", "C", "K0", "K1", "Psi", "I1", "I2", "J0", "J1", "J2"];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    fn eq_of(e: Expr) -> Equation {
        Equation::new(e)
    }

    fn nil_equation() -> Equation {
        eq_of(Expr::pow(Expr::x2(), rat(3, 2)))
    }

    fn cubic_equation() -> Equation {
        eq_of(Expr::powi(Expr::x2(), 3))
    }

    #[test]
    fn wunschmann_fixtures() {
        assert!(wunschmann(&Equation::trivial()).unwrap().is_const_zero());
        assert!(wunschmann(&nil_equation()).unwrap().is_const_zero());
        assert_eq!(wunschmann(&eq_of(Expr::x0())).unwrap(), Expr::one());
    }

    #[test]
    fn k_fixtures() {
        let (k0, k1) = k_invariants(&Equation::trivial()).unwrap();
        assert!(k0.is_const_zero() && k1.is_const_zero());

        let (_, k1) = k_invariants(&nil_equation()).unwrap();
        assert!(k1.is_const_zero());

        // F = a x2 + b x1 + c x0 with (a, b, c) = (3, 5, 7):
        // K1 = b + a^2/3, K0 = c + ab/3 + 2a^3/27.
        let f = Expr::add(vec![
            Expr::mul(vec![Expr::int(3), Expr::x2()]),
            Expr::mul(vec![Expr::int(5), Expr::x1()]),
            Expr::mul(vec![Expr::int(7), Expr::x0()]),
        ]);
        let (k0, k1) = k_invariants(&eq_of(f)).unwrap();
        assert_eq!(k1, Expr::int(8)); // 5 + 9/3
        assert_eq!(k0, Expr::int(14)); // 7 + 5 + 2
    }

    #[test]
    fn cartan_fixtures() {
        assert!(cartan(&Equation::trivial()).unwrap().is_const_zero());
        assert_eq!(
            cartan(&eq_of(&Expr::x0() * &Expr::x2())).unwrap(),
            Expr::one()
        );
    }

    #[test]
    fn psi_fixtures() {
        assert!(matches!(
            psi(&Equation::trivial()),
            Err(Error::TrivializableBranch)
        ));
        assert!(psi(&nil_equation()).unwrap().is_const_zero());
        assert_eq!(
            psi(&cubic_equation()).unwrap(),
            Expr::mul(vec![Expr::int(-6), Expr::x2()])
        );
    }

    #[test]
    fn i_coefficient_fixtures() {
        let (i1, i2) = i_coefficients(&nil_equation()).unwrap();
        assert!(i1.is_const_zero() && i2.is_const_zero());

        let (i1, i2) = i_coefficients(&cubic_equation()).unwrap();
        assert_eq!(i1, Expr::mul(vec![Expr::int(-36), Expr::powi(Expr::x2(), 2)]));
        assert_eq!(i2, Expr::int(-6));
    }

    #[test]
    fn i_form_two_paths_agree() {
        for eq in [
            cubic_equation(),
            eq_of(&Expr::powi(Expr::x2(), 3) + &(&Expr::x1() * &Expr::x0())),
            eq_of(Expr::add(vec![
                Expr::powi(Expr::x2(), 4),
                Expr::mul(vec![Expr::t(), Expr::x2()]),
                Expr::x0(),
            ])),
        ] {
            let direct = i_form(&eq).unwrap();
            let closed = i_form_closed(&eq).unwrap();
            assert_eq!(direct, closed);
        }
    }

    #[test]
    fn i_form_omega_components_match_coefficients() {
        let eq = cubic_equation();
        let (i1, i2) = i_coefficients(&eq).unwrap();
        let comps = crate::exterior::omega_components(&i_form(&eq).unwrap(), &eq);
        assert_eq!(comps[&0b1011], i1); // omega0 ^ omega1 ^ omega3
        assert_eq!(comps[&0b1101], i2); // omega0 ^ omega2 ^ omega3
        assert_eq!(comps.len(), 2);
    }

    #[test]
    fn i_form_vanishes_for_nil() {
        assert!(i_form(&nil_equation()).unwrap().is_zero_form());
        assert!(j_form(&nil_equation()).unwrap().is_zero_form());
    }

    #[test]
    fn j_fixtures_for_cubic() {
        // Hand values for F = x2^3 (Psi = -6 x2, K1 = -3 x2^4):
        // J2 = 60 x2^3, J1 = 144 x2^5, C = 18 x2^5.
        let eq = cubic_equation();
        let (_, j1, j2) = j_coefficients(&eq).unwrap();
        assert_eq!(j2, Expr::mul(vec![Expr::int(60), Expr::powi(Expr::x2(), 3)]));
        assert_eq!(j1, Expr::mul(vec![Expr::int(144), Expr::powi(Expr::x2(), 5)]));
        assert_eq!(
            cartan(&eq).unwrap(),
            Expr::mul(vec![Expr::int(18), Expr::powi(Expr::x2(), 5)])
        );
        assert!(!j_form(&eq).unwrap().is_zero_form());
    }

    #[test]
    fn j_for_nil_is_zero_and_valid() {
        let eq = nil_equation();
        let (j0, j1, j2) = j_coefficients(&eq).unwrap();
        assert!(j0.is_const_zero() && j1.is_const_zero() && j2.is_const_zero());
    }

    #[test]
    fn identities_hold_symbolically_on_polynomials() {
        let samples = [
            Expr::powi(Expr::x2(), 3),
            Expr::add(vec![
                Expr::powi(Expr::x2(), 3),
                Expr::mul(vec![Expr::int(2), Expr::x1(), Expr::x0()]),
                Expr::t(),
            ]),
            Expr::mul(vec![Expr::x1(), Expr::powi(Expr::x2(), 2)]),
        ];
        let plan = SamplePlan::default();
        for f in samples {
            let eq = eq_of(f);
            assert!(is_zero(&wk_identity_residual(&eq).unwrap(), &plan)
                .unwrap()
                .is_symbolic());
            assert!(is_zero(&cartan_k_identity_residual(&eq).unwrap(), &plan)
                .unwrap()
                .is_symbolic());
            if !eq.f().diff_n(Var::X2, 3).is_const_zero() {
                assert!(is_zero(&closing_identity_residual(&eq).unwrap(), &plan)
                    .unwrap()
                    .is_symbolic());
            }
        }
    }

    #[test]
    fn classify_decision_table() {
        let plan = SamplePlan::default();
        let r = classify(&Equation::trivial(), &plan).unwrap();
        assert_eq!(r.classification, Classification::PointTrivializable);
        assert!(r.trivializable && r.forms.is_none());

        let r = classify(&nil_equation(), &plan).unwrap();
        assert_eq!(r.classification, Classification::HyperCREinsteinWeyl);
        assert!(r.w.verdict.is_symbolic());
        assert!(r.k1.verdict.is_symbolic());
        let forms = r.forms.as_ref().unwrap();
        assert!(forms.i_verdict.is_symbolic());
        assert!(forms.j_verdict.is_symbolic());
        assert!(forms.j_valid);
        assert!(r.c.verdict.is_zero());

        let r = classify(&cubic_equation(), &plan).unwrap();
        assert_eq!(r.classification, Classification::WunschmannNotEinsteinWeyl);
        assert!(r.w.verdict.is_zero());
        assert!(!r.forms.as_ref().unwrap().j_valid);

        let r = classify(&eq_of(&Expr::x0() + &Expr::powi(Expr::x2(), 3)), &plan).unwrap();
        assert_eq!(r.classification, Classification::NotWunschmann);
    }

    #[test]
    fn classification_is_deterministic() {
        let plan = SamplePlan::default();
        let f = &Expr::powi(Expr::x2(), 3) + &(&Expr::x1() * &Expr::t());
        let a = classify(&eq_of(f.clone()), &plan).unwrap();
        let b = classify(&eq_of(f), &plan).unwrap();
        assert_eq!(a.classification, b.classification);
        assert_eq!(a.w.verdict, b.w.verdict);
        assert_eq!(a.c.verdict, b.c.verdict);
    }
}
