//! Operators on 2-jet space: the total derivative, vector fields and Lie
//! brackets, frame decomposition, and second prolongation of point
//! transformations.

use crate::error::{Error, Result};
use crate::expr::{Bindings, Expr, JetPoint, Var};
use crate::sample::{auto_guards, for_each_accepted, Guard, SamplePlan};
use alloc::vec;
use alloc::vec::Vec;

/// A validated right-hand side `F` of `x''' = F(t, x, x', x'')` with its
/// cached first partials and the domain guards extracted from it.
#[derive(Clone, Debug)]
pub struct Equation {
    f: Expr,
    df: [Expr; 3],
    guards: Vec<Guard>,
}

impl Equation {
    pub fn new(f: Expr) -> Equation {
        let df = [f.diff(Var::X0), f.diff(Var::X1), f.diff(Var::X2)];
        let guards = auto_guards(&f);
        Equation { f, df, guards }
    }

    pub fn trivial() -> Equation {
        Equation::new(Expr::zero())
    }

    pub fn f(&self) -> &Expr {
        &self.f
    }

    /// Cached partial of F with respect to x0, x1 or x2.
    pub fn df(&self, v: Var) -> &Expr {
        match v {
            Var::T => panic!("dF/dt is not cached"),
            Var::X0 => &self.df[0],
            Var::X1 => &self.df[1],
            Var::X2 => &self.df[2],
        }
    }

    pub fn guards(&self) -> &[Guard] {
        &self.guards
    }

    /// Plan with this equation's guards merged in.
    pub fn plan(&self, base: &SamplePlan) -> SamplePlan {
        base.with_guards(&self.guards)
    }

    /// The total derivative X_F(e) = de/dt + x1 de/dx0 + x2 de/dx1 + F de/dx2.
    pub fn total_derivative(&self, e: &Expr) -> Result<Expr> {
        let out = Expr::add(vec![
            e.diff(Var::T),
            &Expr::x1() * &e.diff(Var::X0),
            &Expr::x2() * &e.diff(Var::X1),
            &self.f * &e.diff(Var::X2),
        ]);
        out.simplify()?;
        Ok(out)
    }

    /// n-fold application of the total derivative; n = 0 is the identity.
    pub fn total_derivative_n(&self, e: &Expr, n: u32) -> Result<Expr> {
        let mut acc = e.clone();
        for _ in 0..n {
            acc = self.total_derivative(&acc)?;
        }
        Ok(acc)
    }

    /// X_F as a coordinate vector field.
    pub fn vector_field(&self) -> VectorField {
        VectorField::new([Expr::one(), Expr::x1(), Expr::x2(), self.f.clone()])
    }
}

/// A vector field in the coordinate frame (d/dt, d/dx0, d/dx1, d/dx2).
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    comps: [Expr; 4],
}

impl VectorField {
    pub fn new(comps: [Expr; 4]) -> VectorField {
        VectorField { comps }
    }

    /// The coordinate field d/dv.
    pub fn coordinate(v: Var) -> VectorField {
        let mut comps = [Expr::zero(), Expr::zero(), Expr::zero(), Expr::zero()];
        comps[v.index()] = Expr::one();
        VectorField::new(comps)
    }

    pub fn comp(&self, v: Var) -> &Expr {
        &self.comps[v.index()]
    }

    pub fn comps(&self) -> &[Expr; 4] {
        &self.comps
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Expr::is_const_zero)
    }

    /// Directional derivative of a scalar.
    pub fn apply(&self, e: &Expr) -> Expr {
        Expr::add(
            Var::ALL
                .iter()
                .map(|v| &self.comps[v.index()] * &e.diff(*v))
                .collect(),
        )
    }

    /// Coefficient-wise Lie bracket [X, Y] = X(Y^i) - Y(X^i).
    pub fn lie_bracket(x: &VectorField, y: &VectorField) -> VectorField {
        let comps = [
            &x.apply(&y.comps[0]) - &y.apply(&x.comps[0]),
            &x.apply(&y.comps[1]) - &y.apply(&x.comps[1]),
            &x.apply(&y.comps[2]) - &y.apply(&x.comps[2]),
            &x.apply(&y.comps[3]) - &y.apply(&x.comps[3]),
        ];
        VectorField::new(comps)
    }
}

fn det(m: &[Vec<Expr>]) -> Expr {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut terms = Vec::with_capacity(n);
    for (j, pivot) in m[0].iter().enumerate() {
        if pivot.is_const_zero() {
            continue;
        }
        let minor: Vec<Vec<Expr>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(k, _)| *k != j)
                    .map(|(_, e)| e.clone())
                    .collect()
            })
            .collect();
        let sign = if j % 2 == 0 { 1 } else { -1 };
        terms.push(Expr::mul(vec![Expr::int(sign), pivot.clone(), det(&minor)]));
    }
    Expr::add(terms)
}

/// Resolves V in the frame {d/dx2, ad_{X_F} d/dx2, ad^2_{X_F} d/dx2, X_F},
/// returning the four coefficients (a, b, c, d) with
/// V = a e1 + b e2 + c e3 + d e4.
pub fn decompose_in_frame(v: &VectorField, eq: &Equation) -> Result<[Expr; 4]> {
    let xf = eq.vector_field();
    let e1 = VectorField::coordinate(Var::X2);
    let e2 = VectorField::lie_bracket(&xf, &e1);
    let e3 = VectorField::lie_bracket(&xf, &e2);
    let basis = [e1, e2, e3, xf];

    let matrix: Vec<Vec<Expr>> = (0..4)
        .map(|row| {
            basis
                .iter()
                .map(|b| b.comps[row].clone())
                .collect::<Vec<_>>()
        })
        .collect();
    let d = det(&matrix);
    if d.is_const_zero() {
        return Err(Error::DegenerateFrame);
    }
    let inv_det = d.recip();
    let mut out = [Expr::zero(), Expr::zero(), Expr::zero(), Expr::zero()];
    for (col, slot) in out.iter_mut().enumerate() {
        let replaced: Vec<Vec<Expr>> = (0..4)
            .map(|row| {
                (0..4)
                    .map(|j| {
                        if j == col {
                            v.comps[row].clone()
                        } else {
                            matrix[row][j].clone()
                        }
                    })
                    .collect()
            })
            .collect();
        *slot = &det(&replaced) * &inv_det;
    }
    Ok(out)
}

/// Truncated total derivative for functions of (t, x0, x1): the part of
/// X_F that does not involve F. Prolongations of point maps only ever
/// need this.
fn jet_derivative(e: &Expr) -> Expr {
    Expr::add(vec![
        e.diff(Var::T),
        &Expr::x1() * &e.diff(Var::X0),
        &Expr::x2() * &e.diff(Var::X1),
    ])
}

/// A point transformation (t, x) -> (t~(t,x), x~(t,x)) with a user-supplied
/// inverse, its second prolongation to jet space and the multiplier
/// g = A + B x1 where A, B are the t-derivatives of t~.
#[derive(Clone, Debug)]
pub struct PointMap {
    t_fwd: Expr,
    x_fwd: Expr,
    t_inv: Expr,
    x_inv: Expr,
    x1_fwd: Expr,
    x2_fwd: Expr,
    x1_inv: Expr,
    x2_inv: Expr,
    a_coef: Expr,
    b_coef: Expr,
    g: Expr,
    guards: Vec<Guard>,
}

fn prolong_components(t_c: &Expr, x_c: &Expr) -> Result<(Expr, Expr, Expr)> {
    let g = jet_derivative(t_c);
    if g.is_const_zero() {
        return Err(Error::DivisionByZero);
    }
    let x1 = &jet_derivative(x_c) / &g;
    let x2 = &jet_derivative(&x1) / &g;
    Ok((g, x1, x2))
}

impl PointMap {
    /// Builds and validates a point map. The four components must depend on
    /// t and x only; the inverse is checked numerically on the prolonged
    /// map at `plan.count` guarded samples (tolerance `plan.tol`).
    pub fn new(
        t_fwd: Expr,
        x_fwd: Expr,
        t_inv: Expr,
        x_inv: Expr,
        plan: &SamplePlan,
    ) -> Result<PointMap> {
        for e in [&t_fwd, &x_fwd, &t_inv, &x_inv] {
            for v in [Var::X1, Var::X2] {
                if e.depends_on(v) {
                    return Err(Error::DependsOnJetVariables(v));
                }
            }
        }
        let a_coef = t_fwd.diff(Var::T);
        let b_coef = t_fwd.diff(Var::X0);
        let (g, x1_fwd, x2_fwd) = prolong_components(&t_fwd, &x_fwd)?;
        let (g_inv, x1_inv, x2_inv) = prolong_components(&t_inv, &x_inv)?;

        let jacobian = &(&a_coef * &x_fwd.diff(Var::X0)) - &(&b_coef * &x_fwd.diff(Var::T));
        let mut guards = vec![
            Guard::nonzero(g.clone()),
            Guard::nonzero(jacobian),
        ];
        for e in [
            &t_fwd, &x_fwd, &t_inv, &x_inv, &x1_fwd, &x2_fwd, &x1_inv, &x2_inv, &g_inv,
        ] {
            for gd in auto_guards(e) {
                if !guards.contains(&gd) {
                    guards.push(gd);
                }
            }
        }

        let map = PointMap {
            t_fwd,
            x_fwd,
            t_inv,
            x_inv,
            x1_fwd,
            x2_fwd,
            x1_inv,
            x2_inv,
            a_coef,
            b_coef,
            g,
            guards,
        };
        map.verify_round_trip(plan)?;
        Ok(map)
    }

    /// Checks forward-then-inverse on the full prolonged map.
    pub fn verify_round_trip(&self, plan: &SamplePlan) -> Result<()> {
        let guards: Vec<Guard> = {
            let mut gs = plan.guards.clone();
            for g in &self.guards {
                if !gs.contains(g) {
                    gs.push(g.clone());
                }
            }
            gs
        };
        let mut worst = 0.0f64;
        for_each_accepted(plan, &guards, |_, coords| {
            let image = match self.forward_f64(coords) {
                Ok(im) => im,
                Err(_) => return Ok(false),
            };
            let back = match self.inverse_f64(&image) {
                Ok(b) => b,
                Err(_) => return Ok(false),
            };
            for (orig, round) in coords.iter().zip(back.iter()) {
                let residual = (orig - round).abs() / (1.0 + orig.abs());
                if residual > worst {
                    worst = residual;
                }
            }
            Ok(true)
        })?;
        if worst > plan.tol {
            return Err(Error::InverseMismatch { residual: worst });
        }
        Ok(())
    }

    pub fn t_fwd(&self) -> &Expr {
        &self.t_fwd
    }

    pub fn x_fwd(&self) -> &Expr {
        &self.x_fwd
    }

    pub fn t_inv(&self) -> &Expr {
        &self.t_inv
    }

    pub fn x_inv(&self) -> &Expr {
        &self.x_inv
    }

    /// The multiplier g = A + B x1 = X_F(t~).
    pub fn multiplier(&self) -> &Expr {
        &self.g
    }

    /// A = dt~/dt and B = dt~/dx.
    pub fn multiplier_parts(&self) -> (&Expr, &Expr) {
        (&self.a_coef, &self.b_coef)
    }

    pub fn guards(&self) -> &[Guard] {
        &self.guards
    }

    /// The prolonged forward map as substitution bindings
    /// (t, x0, x1, x2) -> (t~, x~0, x~1, x~2).
    pub fn jet_forward_bindings(&self) -> Bindings {
        let mut b = Bindings::new();
        b.insert(Var::T, self.t_fwd.clone());
        b.insert(Var::X0, self.x_fwd.clone());
        b.insert(Var::X1, self.x1_fwd.clone());
        b.insert(Var::X2, self.x2_fwd.clone());
        b
    }

    pub fn jet_inverse_bindings(&self) -> Bindings {
        let mut b = Bindings::new();
        b.insert(Var::T, self.t_inv.clone());
        b.insert(Var::X0, self.x_inv.clone());
        b.insert(Var::X1, self.x1_inv.clone());
        b.insert(Var::X2, self.x2_inv.clone());
        b
    }

    /// Exact image of a rational jet point under the prolonged forward
    /// map; fails when a component does not evaluate rationally.
    pub fn forward_exact(&self, p: &JetPoint) -> Result<JetPoint> {
        Ok(JetPoint::new(
            self.t_fwd.eval_exact(p)?,
            self.x_fwd.eval_exact(p)?,
            self.x1_fwd.eval_exact(p)?,
            self.x2_fwd.eval_exact(p)?,
        ))
    }

    /// Floating image of a jet point under the prolonged forward map.
    pub fn forward_f64(&self, coords: &[f64; 4]) -> Result<[f64; 4]> {
        Ok([
            self.t_fwd.eval_f(coords)?,
            self.x_fwd.eval_f(coords)?,
            self.x1_fwd.eval_f(coords)?,
            self.x2_fwd.eval_f(coords)?,
        ])
    }

    pub fn inverse_f64(&self, coords: &[f64; 4]) -> Result<[f64; 4]> {
        Ok([
            self.t_inv.eval_f(coords)?,
            self.x_inv.eval_f(coords)?,
            self.x1_inv.eval_f(coords)?,
            self.x2_inv.eval_f(coords)?,
        ])
    }

    /// Composite map: `outer` after `inner`, revalidated.
    pub fn compose(outer: &PointMap, inner: &PointMap, plan: &SamplePlan) -> Result<PointMap> {
        let mut fwd = Bindings::new();
        fwd.insert(Var::T, inner.t_fwd.clone());
        fwd.insert(Var::X0, inner.x_fwd.clone());
        let mut inv = Bindings::new();
        inv.insert(Var::T, outer.t_inv.clone());
        inv.insert(Var::X0, outer.x_inv.clone());
        PointMap::new(
            outer.t_fwd.substitute(&fwd)?,
            outer.x_fwd.substitute(&fwd)?,
            inner.t_inv.substitute(&inv)?,
            inner.x_inv.substitute(&inv)?,
            plan,
        )
    }
}

/// Transports an equation along a point map: computes
/// F^ = X_F(x~2)/X_F(t~) in the source coordinates and rewrites it in the
/// tilde coordinates through the prolonged inverse.
pub fn prolong(map: &PointMap, eq: &Equation) -> Result<Equation> {
    if map.multiplier().is_const_zero() {
        return Err(Error::DivisionByZero);
    }
    let f_hat = &eq.total_derivative(&map.x2_fwd)? / map.multiplier();
    let f_tilde = f_hat.substitute(&map.jet_inverse_bindings())?;
    f_tilde.simplify()?;
    Ok(Equation::new(f_tilde))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    fn power_equation() -> Equation {
        Equation::new(Expr::pow(Expr::x2(), rat(3, 2)))
    }

    #[test]
    fn total_derivative_basics() {
        let eq = power_equation();
        // X_F(dF/dx2) = F * (3/4) x2^(-1/2) = (3/4) x2
        let d = eq.total_derivative(eq.df(Var::X2)).unwrap();
        assert_eq!(d, Expr::mul(vec![Expr::ratio(3, 4), Expr::x2()]));

        assert_eq!(eq.total_derivative(&Expr::t()).unwrap(), Expr::one());
        let trivial = Equation::trivial();
        assert_eq!(trivial.total_derivative(&Expr::x1()).unwrap(), Expr::x2());
    }

    #[test]
    fn iterated_total_derivative() {
        let eq = power_equation();
        let e = eq.df(Var::X2);
        assert_eq!(eq.total_derivative_n(e, 0).unwrap(), e.clone());
        let twice = eq.total_derivative_n(e, 2).unwrap();
        assert_eq!(
            twice,
            Expr::mul(vec![Expr::ratio(3, 4), Expr::pow(Expr::x2(), rat(3, 2))])
        );
        let trivial = Equation::trivial();
        assert!(eq
            .total_derivative_n(&Expr::x0(), 0)
            .unwrap()
            .eq(&Expr::x0()));
        assert!(trivial
            .total_derivative_n(&Expr::x0(), 3)
            .unwrap()
            .is_const_zero());
    }

    #[test]
    fn bracket_with_vertical_field() {
        // [d/dx2, X_F] = d/dx1 + (dF/dx2) d/dx2
        let eq = power_equation();
        let xf = eq.vector_field();
        let e1 = VectorField::coordinate(Var::X2);
        let br = VectorField::lie_bracket(&e1, &xf);
        assert!(br.comp(Var::T).is_const_zero());
        assert!(br.comp(Var::X0).is_const_zero());
        assert_eq!(br.comp(Var::X1), &Expr::one());
        assert_eq!(br.comp(Var::X2), eq.df(Var::X2));
    }

    #[test]
    fn bracket_antisymmetry_and_coordinates() {
        let eq = power_equation();
        let xf = eq.vector_field();
        let self_bracket = VectorField::lie_bracket(&xf, &xf);
        assert!(self_bracket.is_zero());
        let b = VectorField::lie_bracket(
            &VectorField::coordinate(Var::X0),
            &VectorField::coordinate(Var::X1),
        );
        assert!(b.is_zero());
    }

    #[test]
    fn frame_decomposition_of_basis_vectors() {
        let eq = Equation::new(&(&Expr::x0() * &Expr::x1()) + &Expr::t());
        let xf = eq.vector_field();
        let coeffs = decompose_in_frame(&xf, &eq).unwrap();
        assert!(coeffs[0].is_const_zero());
        assert!(coeffs[1].is_const_zero());
        assert!(coeffs[2].is_const_zero());
        assert!(coeffs[3].is_const_one());

        let e1 = VectorField::coordinate(Var::X2);
        let coeffs = decompose_in_frame(&e1, &eq).unwrap();
        assert!(coeffs[0].is_const_one());
        assert!(coeffs[1].is_const_zero());
        assert!(coeffs[2].is_const_zero());
        assert!(coeffs[3].is_const_zero());
    }

    #[test]
    fn restricted_bracket_oracle() {
        // For dF/dx2 = 0 the section V = d/dx2 realizes
        // ad^3 V = -K0 V + K1 ad V mod X_F with K1 = dF/dx1 and
        // K0 = dF/dx0 - X_F(dF/dx1).
        let f = &(&Expr::x0() * &Expr::x1()) + &Expr::t();
        let eq = Equation::new(f.clone());
        let xf = eq.vector_field();
        let mut ad = VectorField::coordinate(Var::X2);
        for _ in 0..3 {
            ad = VectorField::lie_bracket(&xf, &ad);
        }
        let coeffs = decompose_in_frame(&ad, &eq).unwrap();
        let k1 = f.diff(Var::X1);
        let k0 = &f.diff(Var::X0) - &eq.total_derivative(&f.diff(Var::X1)).unwrap();
        assert_eq!(coeffs[0], -&k0);
        assert_eq!(coeffs[1], k1);
        assert!(coeffs[2].is_const_zero());
    }

    #[test]
    fn prolong_identity_map() {
        let plan = SamplePlan::default();
        let id = PointMap::new(Expr::t(), Expr::x0(), Expr::t(), Expr::x0(), &plan).unwrap();
        assert!(id.multiplier().is_const_one());
        let eq = power_equation();
        let moved = prolong(&id, &eq).unwrap();
        assert_eq!(moved.f(), eq.f());
    }

    #[test]
    fn prolong_shift_by_t_cubed() {
        // t~ = t, x~ = x + t^3 turns the trivial equation into x~''' = 6.
        let plan = SamplePlan::default();
        let map = PointMap::new(
            Expr::t(),
            &Expr::x0() + &Expr::powi(Expr::t(), 3),
            Expr::t(),
            &Expr::x0() - &Expr::powi(Expr::t(), 3),
            &plan,
        )
        .unwrap();
        let moved = prolong(&map, &Equation::trivial()).unwrap();
        assert_eq!(*moved.f(), Expr::int(6));
    }

    #[test]
    fn prolong_rejects_jet_variables() {
        let plan = SamplePlan::default();
        let bad = PointMap::new(
            &Expr::t() + &Expr::x1(),
            Expr::x0(),
            Expr::t(),
            Expr::x0(),
            &plan,
        );
        assert!(matches!(bad, Err(Error::DependsOnJetVariables(Var::X1))));
    }

    #[test]
    fn wrong_inverse_is_rejected() {
        let plan = SamplePlan::default();
        let bad = PointMap::new(
            Expr::t(),
            &Expr::x0() + &Expr::powi(Expr::t(), 3),
            Expr::t(),
            &Expr::x0() + &Expr::powi(Expr::t(), 3),
            &plan,
        );
        assert!(matches!(bad, Err(Error::InverseMismatch { .. })));
    }

    #[test]
    fn moebius_map_prolongs_and_preserves_triviality() {
        let plan = SamplePlan::default();
        // t~ = (2t+1)/(t+1), inverse t = (t~-1)/(2-t~).
        let t_fwd = &(&(&Expr::int(2) * &Expr::t()) + &Expr::one())
            / &(&Expr::t() + &Expr::one());
        let t_inv = &(&Expr::t() - &Expr::one()) / &(&Expr::int(2) - &Expr::t());
        let map = PointMap::new(t_fwd, Expr::x0(), t_inv, Expr::x0(), &plan).unwrap();
        let moved = prolong(&map, &Equation::trivial()).unwrap();
        let d3 = moved.f().diff_n(Var::X2, 3);
        assert!(d3.is_const_zero());
    }
}
