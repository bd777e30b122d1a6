//! Randomized properties of the symbolic kernel: canonicalization
//! preserves values, differentiation matches finite differences, the
//! parser round-trips the printer, and the exterior/bracket operators
//! satisfy their algebraic laws.

use hypercr_core::exterior::Form;
use hypercr_core::invariants;
use hypercr_core::{
    is_zero, parse_expr, render, Equation, Expr, JetPoint, SamplePlan, Var, VectorField,
};
use proptest::prelude::*;

/// Test-side AST, evaluated naively and independently of the kernel.
#[derive(Debug, Clone)]
enum Ast {
    Int(i8),
    Var(u8),
    Add(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Neg(Box<Ast>),
    Pow(Box<Ast>, u8),
    Inv(Box<Ast>),
    Sqrt(Box<Ast>),
}

fn ast_strategy(allow_radicals: bool) -> impl Strategy<Value = Ast> {
    let leaf = prop_oneof![
        (-4i8..=4).prop_map(Ast::Int),
        (0u8..4).prop_map(Ast::Var),
    ];
    leaf.prop_recursive(4, 24, 3, move |inner| {
        let mut options = vec![
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Ast::Add(Box::new(a), Box::new(b)))
                .boxed(),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Ast::Mul(Box::new(a), Box::new(b)))
                .boxed(),
            inner.clone().prop_map(|a| Ast::Neg(Box::new(a))).boxed(),
            (inner.clone(), 2u8..=3)
                .prop_map(|(a, k)| Ast::Pow(Box::new(a), k))
                .boxed(),
            inner.clone().prop_map(|a| Ast::Inv(Box::new(a))).boxed(),
        ];
        if allow_radicals {
            options.push(inner.prop_map(|a| Ast::Sqrt(Box::new(a))).boxed());
        }
        proptest::strategy::Union::new(options)
    })
}

fn to_expr(ast: &Ast) -> Expr {
    match ast {
        Ast::Int(n) => Expr::int(*n as i64),
        Ast::Var(i) => Expr::var(Var::from_index(*i as usize)),
        Ast::Add(a, b) => &to_expr(a) + &to_expr(b),
        Ast::Mul(a, b) => &to_expr(a) * &to_expr(b),
        Ast::Neg(a) => -&to_expr(a),
        Ast::Pow(a, k) => Expr::powi(to_expr(a), *k as i64),
        Ast::Inv(a) => to_expr(a).recip(),
        Ast::Sqrt(a) => Expr::sqrt(to_expr(a)),
    }
}

fn eval_naive(ast: &Ast, coords: &[f64; 4]) -> Option<f64> {
    let v = match ast {
        Ast::Int(n) => *n as f64,
        Ast::Var(i) => coords[*i as usize],
        Ast::Add(a, b) => eval_naive(a, coords)? + eval_naive(b, coords)?,
        Ast::Mul(a, b) => eval_naive(a, coords)? * eval_naive(b, coords)?,
        Ast::Neg(a) => -eval_naive(a, coords)?,
        Ast::Pow(a, k) => eval_naive(a, coords)?.powi(*k as i32),
        Ast::Inv(a) => {
            let d = eval_naive(a, coords)?;
            if d.abs() < 1e-3 {
                return None;
            }
            1.0 / d
        }
        Ast::Sqrt(a) => {
            let d = eval_naive(a, coords)?;
            if d < 1e-3 {
                return None;
            }
            d.sqrt()
        }
    };
    if v.is_finite() && v.abs() < 1e12 {
        Some(v)
    } else {
        None
    }
}

fn sample_points() -> Vec<JetPoint> {
    let mut out = Vec::new();
    for (t, x0, x1, x2) in [
        (1i64, 2i64, 3i64, 5i64),
        (-1, 1, -2, 3),
        (2, -1, 1, -3),
        (-2, -3, 2, 1),
    ] {
        out.push(JetPoint::new(
            hypercr_core::rat::rat(t, 2),
            hypercr_core::rat::rat(x0, 3),
            hypercr_core::rat::rat(x1, 2),
            hypercr_core::rat::rat(x2, 3),
        ));
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn canonicalization_preserves_values(ast in ast_strategy(true)) {
        let e = to_expr(&ast);
        for p in sample_points() {
            let coords = p.to_f64().unwrap();
            let (Some(naive), Ok(canonical)) = (eval_naive(&ast, &coords), e.eval_float(&p)) else {
                continue;
            };
            prop_assert!(
                (naive - canonical).abs() <= 1e-9 * (1.0 + naive.abs().max(canonical.abs())),
                "naive {naive} vs canonical {canonical} for {e}"
            );
        }
    }

    #[test]
    fn simplify_is_idempotent(ast in ast_strategy(true)) {
        let e = to_expr(&ast);
        let s = e.simplify().unwrap();
        prop_assert_eq!(&s, &e);
        prop_assert_eq!(s.simplify().unwrap(), s);
    }

    #[test]
    fn parse_render_round_trip(ast in ast_strategy(true)) {
        let e = to_expr(&ast);
        let text = render(&e);
        let back = parse_expr(&text).unwrap();
        prop_assert_eq!(back, e, "round trip through {}", text);
    }

    #[test]
    fn polynomial_zero_iff_canonical_zero(ast in ast_strategy(false)) {
        // For the polynomial fragment the normal form is decisive: build
        // e - e through two syntactically different routes.
        let e = to_expr(&ast);
        if !e.is_polynomial() {
            return Ok(());
        }
        let doubled = &e + &e;
        let difference = &doubled - &(&e * &Expr::int(2));
        prop_assert!(difference.is_const_zero());
    }

    #[test]
    fn diff_matches_central_differences(ast in ast_strategy(true)) {
        let e = to_expr(&ast);
        let h = 1e-5f64;
        for p in sample_points() {
            let coords = match p.to_f64() { Ok(c) => c, Err(_) => continue };
            for v in Var::ALL {
                let d = e.diff(v);
                let Ok(sym) = d.eval_float(&p) else { continue };
                let mut up = coords;
                let mut dn = coords;
                up[v.index()] += h;
                dn[v.index()] -= h;
                let up_p = float_point(&up);
                let dn_p = float_point(&dn);
                let (Ok(fu), Ok(fd)) = (e.eval_float(&up_p), e.eval_float(&dn_p)) else {
                    continue;
                };
                let fd_est = (fu - fd) / (2.0 * h);
                // wide guard: skip ill-conditioned spots
                if !fd_est.is_finite() || fd_est.abs() > 1e8 || sym.abs() > 1e8 {
                    continue;
                }
                prop_assert!(
                    (fd_est - sym).abs() <= 1e-4 * (1.0 + fd_est.abs().max(sym.abs())),
                    "var {v:?}: fd {fd_est} vs sym {sym}"
                );
            }
        }
    }
}

fn float_point(coords: &[f64; 4]) -> JetPoint {
    let r = |x: f64| hypercr_core::rat::Rat::from_float(x).unwrap();
    JetPoint::new(r(coords[0]), r(coords[1]), r(coords[2]), r(coords[3]))
}

fn poly_strategy() -> impl Strategy<Value = Expr> {
    ast_strategy(false).prop_map(|a| to_expr(&a))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn exterior_derivative_squares_to_zero(c0 in poly_strategy(), c1 in poly_strategy()) {
        let a = Form::one_form(vec![(Var::T, c0), (Var::X1, c1)]);
        prop_assert!(a.exterior_derivative().exterior_derivative().is_zero_form());
    }

    #[test]
    fn leibniz_rule_for_wedge(c0 in poly_strategy(), c1 in poly_strategy()) {
        let a = Form::one_form(vec![(Var::X0, c0)]);
        let b = Form::one_form(vec![(Var::X2, c1)]);
        let lhs = a.wedge(&b).unwrap().exterior_derivative();
        let rhs = a
            .exterior_derivative()
            .wedge(&b)
            .unwrap()
            .add(&a.wedge(&b.exterior_derivative()).unwrap().scale(&Expr::int(-1)));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn wedge_is_antisymmetric_and_bilinear(
        c0 in poly_strategy(),
        c1 in poly_strategy(),
        c2 in poly_strategy(),
    ) {
        let a = Form::one_form(vec![(Var::T, c0.clone()), (Var::X1, c2.clone())]);
        let b = Form::one_form(vec![(Var::X0, c1.clone()), (Var::X2, c0.clone())]);
        let ab = a.wedge(&b).unwrap();
        let ba = b.wedge(&a).unwrap().scale(&Expr::int(-1));
        prop_assert_eq!(&ab, &ba);

        let sum = a.add(&Form::one_form(vec![(Var::X1, c1)]));
        let lhs = sum.wedge(&b).unwrap();
        let rhs = ab.add(&Form::one_form(vec![(Var::X1, c2)]).wedge(&b).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn wedge_is_associative(c0 in poly_strategy(), c1 in poly_strategy(), c2 in poly_strategy()) {
        let a = Form::one_form(vec![(Var::T, c0)]);
        let b = Form::one_form(vec![(Var::X0, c1)]);
        let c = Form::one_form(vec![(Var::X1, c2)]);
        let lhs = a.wedge(&b).unwrap().wedge(&c).unwrap();
        let rhs = a.wedge(&b.wedge(&c).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn bracket_antisymmetry_and_jacobi(
        a0 in poly_strategy(), a1 in poly_strategy(),
        b0 in poly_strategy(), b1 in poly_strategy(),
        c0 in poly_strategy(), c1 in poly_strategy(),
    ) {
        let x = VectorField::new([a0, Expr::zero(), a1.clone(), Expr::one()]);
        let y = VectorField::new([b0, b1.clone(), Expr::zero(), Expr::x1()]);
        let z = VectorField::new([c0, Expr::x2(), c1, Expr::zero()]);

        let xy = VectorField::lie_bracket(&x, &y);
        let yx = VectorField::lie_bracket(&y, &x);
        for v in Var::ALL {
            prop_assert!((&xy.comp(v).clone() + yx.comp(v)).is_const_zero());
        }

        let jacobi = [
            VectorField::lie_bracket(&x, &VectorField::lie_bracket(&y, &z)),
            VectorField::lie_bracket(&y, &VectorField::lie_bracket(&z, &x)),
            VectorField::lie_bracket(&z, &VectorField::lie_bracket(&x, &y)),
        ];
        for v in Var::ALL {
            let total = Expr::add(jacobi.iter().map(|f| f.comp(v).clone()).collect());
            prop_assert!(total.is_const_zero(), "jacobi fails in {v:?}: {total}");
        }
    }

    #[test]
    fn total_derivative_is_a_derivation(e1 in poly_strategy(), e2 in poly_strategy()) {
        let eq = Equation::new(&Expr::powi(Expr::x2(), 2) + &Expr::x0());
        let lhs = eq.total_derivative(&(&e1 * &e2)).unwrap();
        let rhs = &(&eq.total_derivative(&e1).unwrap() * &e2)
            + &(&e1 * &eq.total_derivative(&e2).unwrap());
        prop_assert!((&lhs - &rhs).is_const_zero());
    }
}

#[test]
fn is_zero_sound_on_symbolic_zeros() {
    // SymbolicZero implies tiny values at accepted samples.
    let plan = SamplePlan::default();
    let u = &Expr::int(9) - &Expr::mul(vec![Expr::int(2), Expr::x1(), Expr::x2()]);
    let s = Expr::sqrt(u.clone());
    let e = &(&s * &s) - &u;
    assert!(e.is_const_zero());
    let w = invariants::wunschmann(&Equation::new(Expr::pow(
        Expr::x2(),
        hypercr_core::rat::rat(3, 2),
    )))
    .unwrap();
    let verdict = is_zero(&w, &plan).unwrap();
    assert!(verdict.is_symbolic());
    let p = JetPoint::from_ints(0, 0, 0, 4);
    assert!(w.eval_float(&p).unwrap().abs() <= 1e-12);
}

#[test]
fn prolongation_functoriality_numeric() {
    // prolong(map2 o map1, F) agrees with prolong(map2, prolong(map1, F)).
    let plan = SamplePlan::default();
    let maps = hypercr_core::transform::fixture_maps(&plan).unwrap();
    let inner = &maps[1].1;
    let outer = &maps[3].1;
    let eq = Equation::new(&Expr::powi(Expr::x2(), 2) + &Expr::t());
    let composed = hypercr_core::PointMap::compose(outer, inner, &plan).unwrap();
    let two = hypercr_core::prolong(outer, &hypercr_core::prolong(inner, &eq).unwrap()).unwrap();
    let one = hypercr_core::prolong(&composed, &eq).unwrap();
    let diff = &one.f().clone() - two.f();
    assert!(is_zero(&diff, &plan).unwrap().is_zero());
}
