//! Differential forms on 2-jet space: wedge product, exterior derivative,
//! contraction, the omega coframe adapted to an equation, and pullback
//! along prolonged point maps.
//!
//! A k-form is a sparse map from coordinate subsets to coefficients. The
//! subset of (t, x0, x1, x2) is a 4-bit mask whose popcount is the degree,
//! so sign bookkeeping reduces to counting bit inversions.

use crate::error::{Error, Result};
use crate::expr::{Expr, Var};
use crate::jet::{Equation, PointMap, VectorField};
use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

const DIM: u8 = 4;

/// A differential form of fixed degree with canonical `Expr` coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Form {
    degree: u8,
    coeffs: BTreeMap<u8, Expr>,
}

fn mask_of(v: Var) -> u8 {
    1 << (v.index() as u8)
}

/// Transpositions needed to merge two disjoint ascending index tuples.
pub(crate) fn merge_sign(a: u8, b: u8) -> i64 {
    let mut swaps = 0u32;
    for j in 0..DIM {
        if b & (1 << j) != 0 {
            swaps += (a >> (j + 1)).count_ones();
        }
    }
    if swaps % 2 == 0 {
        1
    } else {
        -1
    }
}

impl Form {
    pub fn zero(degree: u8) -> Form {
        assert!(degree <= DIM);
        Form {
            degree,
            coeffs: BTreeMap::new(),
        }
    }

    /// Degree-0 form (a scalar).
    pub fn scalar(e: Expr) -> Form {
        let mut f = Form::zero(0);
        f.insert(0, e);
        f
    }

    /// The coordinate differential dv.
    pub fn d_coord(v: Var) -> Form {
        let mut f = Form::zero(1);
        f.insert(mask_of(v), Expr::one());
        f
    }

    /// Builds a 1-form from coordinate components.
    pub fn one_form(components: Vec<(Var, Expr)>) -> Form {
        let mut f = Form::zero(1);
        for (v, c) in components {
            f.insert(mask_of(v), c);
        }
        f
    }

    fn insert(&mut self, mask: u8, e: Expr) {
        debug_assert_eq!(mask.count_ones() as u8, self.degree);
        if e.is_const_zero() {
            return;
        }
        use alloc::collections::btree_map::Entry;
        match self.coeffs.entry(mask) {
            Entry::Vacant(slot) => {
                slot.insert(e);
            }
            Entry::Occupied(mut slot) => {
                let merged = slot.get() + &e;
                if merged.is_const_zero() {
                    slot.remove();
                } else {
                    *slot.get_mut() = merged;
                }
            }
        }
    }

    pub fn degree(&self) -> u8 {
        self.degree
    }

    /// True when every coefficient vanished symbolically.
    pub fn is_zero_form(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient on the sorted coordinate tuple encoded by `mask`.
    pub fn coeff(&self, mask: u8) -> Expr {
        self.coeffs.get(&mask).cloned().unwrap_or_else(Expr::zero)
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (u8, &Expr)> {
        self.coeffs.iter().map(|(m, e)| (*m, e))
    }

    pub fn add(&self, other: &Form) -> Form {
        assert_eq!(self.degree, other.degree);
        let mut out = self.clone();
        for (m, e) in &other.coeffs {
            out.insert(*m, e.clone());
        }
        out
    }

    pub fn sub(&self, other: &Form) -> Form {
        self.add(&other.scale(&Expr::int(-1)))
    }

    /// Multiplies every coefficient by a scalar expression.
    pub fn scale(&self, s: &Expr) -> Form {
        let mut out = Form::zero(self.degree);
        for (m, e) in &self.coeffs {
            out.insert(*m, s * e);
        }
        out
    }

    /// Graded-antisymmetric product.
    pub fn wedge(&self, other: &Form) -> Result<Form> {
        let degree = self.degree + other.degree;
        if degree > DIM {
            return Err(Error::DegreeOverflow);
        }
        let mut out = Form::zero(degree);
        for (ma, ca) in &self.coeffs {
            for (mb, cb) in &other.coeffs {
                if ma & mb != 0 {
                    continue;
                }
                let sign = merge_sign(*ma, *mb);
                out.insert(ma | mb, Expr::mul(vec![Expr::int(sign), ca.clone(), cb.clone()]));
            }
        }
        Ok(out)
    }

    /// Exterior derivative, coefficient-wise: d(c dx_I) = sum dv c dv^dx_I.
    pub fn exterior_derivative(&self) -> Form {
        debug_assert!(self.degree < DIM);
        let mut out = Form::zero(self.degree + 1);
        for (m, c) in &self.coeffs {
            for v in Var::ALL {
                let bit = mask_of(v);
                if m & bit != 0 {
                    continue;
                }
                let dc = c.diff(v);
                if dc.is_const_zero() {
                    continue;
                }
                let below = (m & (bit - 1)).count_ones();
                let sign = if below % 2 == 0 { 1 } else { -1 };
                out.insert(m | bit, Expr::mul(vec![Expr::int(sign), dc]));
            }
        }
        out
    }

    /// Interior product with a vector field (contraction in the first slot).
    pub fn contract(&self, x: &VectorField) -> Form {
        assert!(self.degree >= 1);
        let mut out = Form::zero(self.degree - 1);
        for (m, c) in &self.coeffs {
            let mut position = 0;
            for v in Var::ALL {
                let bit = mask_of(v);
                if m & bit == 0 {
                    continue;
                }
                let comp = x.comp(v);
                if !comp.is_const_zero() {
                    let sign = if position % 2 == 0 { 1 } else { -1 };
                    out.insert(
                        m & !bit,
                        Expr::mul(vec![Expr::int(sign), comp.clone(), c.clone()]),
                    );
                }
                position += 1;
            }
        }
        out
    }

    /// Full pairing of a 1-form with a vector field.
    pub fn pair(&self, x: &VectorField) -> Expr {
        assert_eq!(self.degree, 1);
        self.contract(x).coeff(0)
    }

    /// Floating coefficients at a point, with their cancellation scales.
    pub(crate) fn eval_coeffs(&self, coords: &[f64; 4]) -> Result<BTreeMap<u8, (f64, f64)>> {
        let mut out = BTreeMap::new();
        for (m, c) in &self.coeffs {
            out.insert(*m, crate::sample::eval_with_scale(c, coords)?);
        }
        Ok(out)
    }
}

/// The coframe (omega0, omega1, omega2, omega3) adapted to an equation:
/// omega_i = dx_i - x_{i+1} dt for i < 2, omega2 = dx2 - F dt, omega3 = dt.
pub fn omega_coframe(eq: &Equation) -> [Form; 4] {
    let omega0 = Form::one_form(vec![(Var::X0, Expr::one()), (Var::T, -&Expr::x1())]);
    let omega1 = Form::one_form(vec![(Var::X1, Expr::one()), (Var::T, -&Expr::x2())]);
    let omega2 = Form::one_form(vec![(Var::X2, Expr::one()), (Var::T, -eq.f())]);
    let omega3 = Form::d_coord(Var::T);
    [omega0, omega1, omega2, omega3]
}

/// The frame dual to the omega coframe: (d/dx0, d/dx1, d/dx2, X_F).
pub fn omega_dual_frame(eq: &Equation) -> [VectorField; 4] {
    [
        VectorField::coordinate(Var::X0),
        VectorField::coordinate(Var::X1),
        VectorField::coordinate(Var::X2),
        eq.vector_field(),
    ]
}

/// Components of a form in the omega coframe, keyed by a bitmask over the
/// omega indices (bit i set = omega_i present, ascending order).
pub fn omega_components(form: &Form, eq: &Equation) -> BTreeMap<u8, Expr> {
    let frame = omega_dual_frame(eq);
    let k = form.degree();
    let mut out = BTreeMap::new();
    for mask in 0u8..16 {
        if mask.count_ones() as u8 != k {
            continue;
        }
        let mut acc = form.clone();
        for (i, field) in frame.iter().enumerate() {
            if mask & (1 << i) != 0 {
                acc = acc.contract(field);
            }
        }
        let comp = acc.coeff(0);
        if !comp.is_const_zero() {
            out.insert(mask, comp);
        }
    }
    out
}

/// The one-form alpha_F = omega3 - Psi omega0 annihilating the rank-3
/// distribution spanned by (V_F, d/dx1, d/dx2).
pub fn alpha_form(eq: &Equation, psi: &Expr) -> Form {
    let [omega0, _, _, omega3] = omega_coframe(eq);
    omega3.sub(&omega0.scale(psi))
}

/// A form evaluated at a point: coefficients on coordinate masks.
pub type FormValues = [f64; 16];

/// Numeric pullback at a single point: the same contract as [`pullback`],
/// evaluated with the exact Jacobian of the prolonged map at the source
/// point. For heavy coefficient expressions this is the only affordable
/// route; the symbolic path stays available for small forms.
pub fn pullback_at(map: &PointMap, form: &Form, coords: &[f64; 4]) -> Result<FormValues> {
    let image = map.forward_f64(coords)?;
    let bindings = map.jet_forward_bindings();
    // Jacobian rows of the prolonged map: d(phi_v) = sum_w J[v][w] dw.
    let mut jac = [[0.0f64; 4]; 4];
    for (v_idx, v) in Var::ALL.iter().enumerate() {
        let phi = &bindings[v];
        for (w_idx, w) in Var::ALL.iter().enumerate() {
            let d = phi.diff(*w);
            if !d.is_const_zero() {
                jac[v_idx][w_idx] = d.eval_f(coords)?;
            }
        }
    }
    let mut out = [0.0f64; 16];
    for (mask, c) in form.coeffs() {
        let value = c.eval_f(&image)?;
        // wedge of the pulled-back differentials of the masked coordinates
        let mut partial: alloc::vec::Vec<(u8, f64)> = alloc::vec![(0u8, value)];
        for v_idx in 0..4 {
            if mask & (1 << v_idx) == 0 {
                continue;
            }
            let mut next: alloc::vec::Vec<(u8, f64)> = alloc::vec::Vec::new();
            for (m, coef) in &partial {
                for (w_idx, jv) in jac[v_idx].iter().enumerate() {
                    let bit = 1u8 << w_idx;
                    if *jv == 0.0 || m & bit != 0 {
                        continue;
                    }
                    let sign = merge_sign(*m, bit) as f64;
                    next.push((m | bit, coef * jv * sign));
                }
            }
            partial = next;
        }
        for (m, coef) in partial {
            out[m as usize] += coef;
        }
    }
    Ok(out)
}

/// Pullback along the prolonged forward map: substitutes the map into the
/// coefficients and wedges the differentials of the components.
pub fn pullback(map: &PointMap, form: &Form) -> Result<Form> {
    let bindings = map.jet_forward_bindings();
    let comps = [
        bindings[&Var::T].clone(),
        bindings[&Var::X0].clone(),
        bindings[&Var::X1].clone(),
        bindings[&Var::X2].clone(),
    ];
    let differentials: Vec<Form> = comps
        .iter()
        .map(|phi| {
            Form::one_form(
                Var::ALL
                    .iter()
                    .map(|v| (*v, phi.diff(*v)))
                    .collect(),
            )
        })
        .collect();
    let mut out = Form::zero(form.degree());
    for (mask, c) in form.coeffs() {
        let moved = c.substitute(&bindings)?;
        let mut piece = Form::scalar(moved);
        for (i, d) in differentials.iter().enumerate() {
            if mask & (1 << i) != 0 {
                piece = piece.wedge(d)?;
            }
        }
        out = out.add(&piece);
    }
    Ok(out)
}
