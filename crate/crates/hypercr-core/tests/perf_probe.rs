use hypercr_core::*;
use std::time::Instant;

#[test]
#[ignore]
fn example_one_phases() {
    let src = "24*x2^3/(-3+sqrt(9-2*x1*x2))^3 + 12*x1*x2^4/(-3+sqrt(9-2*x1*x2))^4";
    let eq = parse_equation(src).unwrap();
    let plan = eq.plan(&SamplePlan::default());

    let time_zero = |name: &str, e: &Expr| {
        let t0 = Instant::now();
        let v = is_zero(e, &plan).unwrap();
        let tag = match v {
            ZeroVerdict::SymbolicZero => "sym",
            ZeroVerdict::NumericallyZero { .. } => "num",
            ZeroVerdict::NonZero { .. } => "NONZERO",
        };
        println!("{name}: {:?} terms={} -> {tag}", t0.elapsed(), e.terms().len());
    };

    let w = invariants::wunschmann(&eq).unwrap();
    time_zero("W", &w);
    let c = invariants::cartan(&eq).unwrap();
    time_zero("C", &c);
    let (k0, k1) = invariants::k_invariants(&eq).unwrap();
    time_zero("K0", &k0);
    time_zero("K1", &k1);
    let (i1, i2) = invariants::i_coefficients(&eq).unwrap();
    time_zero("I1", &i1);
    time_zero("I2", &i2);
    let t0 = Instant::now();
    let (j0, j1, j2) = invariants::j_coefficients(&eq).unwrap();
    println!("J construction: {:?}", t0.elapsed());
    time_zero("J0", &j0);
    time_zero("J1", &j1);
    time_zero("J2", &j2);
    let t0 = Instant::now();
    let closing = invariants::closing_identity_residual(&eq).unwrap();
    println!("closing construction: {:?} terms={}", t0.elapsed(), closing.terms().len());
    time_zero("closing", &closing);
    let t0 = Instant::now();
    let wk = invariants::wk_identity_residual(&eq).unwrap();
    println!("wk construction: {:?}", t0.elapsed());
    time_zero("wk", &wk);
    let t0 = Instant::now();
    let ck = invariants::cartan_k_identity_residual(&eq).unwrap();
    println!("ck construction: {:?}", t0.elapsed());
    time_zero("ck", &ck);
}
