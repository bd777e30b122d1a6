use hypercr_core::*;
use hypercr_core::transform::{fixture_maps, check_form_scaling_named, FormKind};
use std::time::Instant;

#[test]
#[ignore]
fn iscaling_rerun() {
    let plan = SamplePlan::default();
    let maps = fixture_maps(&plan).unwrap();
    let cubic = Equation::new(Expr::powi(Expr::x2(), 3));
    let t0 = Instant::now();
    for (name, map) in &maps {
        let t1 = Instant::now();
        let c = check_form_scaling_named(&cubic, map, FormKind::I, name, &plan).unwrap();
        println!("I-scaling {name}: {:?} passed={} max={:.2e}", t1.elapsed(), c.passed, c.max_residual);
    }
    println!("total: {:?}", t0.elapsed());
}
