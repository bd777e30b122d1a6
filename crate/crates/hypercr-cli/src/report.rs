//! Text and JSON rendering of classification reports.
//!
//! The JSON layout is stable: top-level keys `equation`,
//! `verdicts` (`W`, `C`, `K0`, `K1`, `I`, `J`), `classification`,
//! `plan` (`seed`, `samples`, `tol`) and `residuals`. Identical inputs and
//! seeds produce byte-identical output (keys are sorted, floats printed
//! shortest-roundtrip).

use hypercr_core::invariants::InvariantReport;
use hypercr_core::rat::format_rat;
use hypercr_core::{render, JetPoint, SamplePlan, ZeroVerdict};
use serde_json::{json, Map, Value};

fn witness_json(p: &JetPoint) -> Value {
    json!({
        "t": format_rat(p.coord(hypercr_core::Var::T)),
        "x0": format_rat(p.coord(hypercr_core::Var::X0)),
        "x1": format_rat(p.coord(hypercr_core::Var::X1)),
        "x2": format_rat(p.coord(hypercr_core::Var::X2)),
    })
}

pub fn verdict_json(v: &ZeroVerdict) -> Value {
    match v {
        ZeroVerdict::SymbolicZero => json!({ "status": "symbolic_zero" }),
        ZeroVerdict::NumericallyZero { max_abs, samples } => json!({
            "status": "numerically_zero",
            "max_abs": max_abs,
            "samples": samples,
        }),
        ZeroVerdict::NonZero { witness, value } => json!({
            "status": "non_zero",
            "witness": witness_json(witness),
            "value": value,
        }),
    }
}

fn undefined_json() -> Value {
    json!({ "status": "undefined", "reason": "trivializable_branch" })
}

pub fn verdict_text(v: &ZeroVerdict) -> String {
    match v {
        ZeroVerdict::SymbolicZero => "zero (symbolic)".into(),
        ZeroVerdict::NumericallyZero { max_abs, samples } => {
            format!("zero (numeric, max |value| {max_abs:.3e} over {samples} samples)")
        }
        ZeroVerdict::NonZero { value, .. } => format!("nonzero (witness value {value:.6e})"),
    }
}

pub fn plan_json(plan: &SamplePlan) -> Value {
    json!({
        "seed": plan.seed,
        "samples": plan.count,
        "tol": plan.tol,
    })
}

pub fn report_json(report: &InvariantReport) -> Value {
    let mut verdicts = Map::new();
    verdicts.insert("W".into(), verdict_json(&report.w.verdict));
    verdicts.insert("C".into(), verdict_json(&report.c.verdict));
    verdicts.insert("K0".into(), verdict_json(&report.k0.verdict));
    verdicts.insert("K1".into(), verdict_json(&report.k1.verdict));
    match &report.forms {
        Some(f) => {
            verdicts.insert("I".into(), verdict_json(&f.i_verdict));
            let mut j = verdict_json(&f.j_verdict);
            j.as_object_mut()
                .unwrap()
                .insert("valid".into(), json!(f.j_valid));
            verdicts.insert("J".into(), j);
        }
        None => {
            verdicts.insert("I".into(), undefined_json());
            verdicts.insert("J".into(), undefined_json());
        }
    }
    let residuals = json!({
        "wk_identity": verdict_json(&report.residuals.wk),
        "cartan_k_identity": verdict_json(&report.residuals.cartan_k),
        "closing_identity": report
            .residuals
            .closing
            .as_ref()
            .map(verdict_json)
            .unwrap_or_else(undefined_json),
    });
    json!({
        "equation": render(&report.f),
        "verdicts": Value::Object(verdicts),
        "classification": report.classification.name(),
        "plan": plan_json(&report.plan),
        "residuals": residuals,
    })
}

pub fn report_text(report: &InvariantReport) -> String {
    let mut out = String::new();
    let plan = &report.plan;
    out.push_str(&format!("equation: x''' = {}\n", render(&report.f)));
    out.push_str(&format!(
        "plan: {} samples, seed {:#x}, tol {:.1e}, margin {}, box [-2,2]^4\n",
        plan.count, plan.seed, plan.tol, plan.margin
    ));
    out.push_str(&format!("  W  : {}\n", verdict_text(&report.w.verdict)));
    out.push_str(&format!("  C  : {}\n", verdict_text(&report.c.verdict)));
    out.push_str(&format!("  K0 : {}\n", verdict_text(&report.k0.verdict)));
    out.push_str(&format!("  K1 : {}\n", verdict_text(&report.k1.verdict)));
    match &report.forms {
        Some(f) => {
            out.push_str(&format!("  I  : {}\n", verdict_text(&f.i_verdict)));
            out.push_str(&format!(
                "  J  : {}{}\n",
                verdict_text(&f.j_verdict),
                if f.j_valid { "" } else { " [diagnostic only: needs W = 0 and I = 0]" }
            ));
        }
        None => {
            out.push_str("  I  : undefined (trivializable branch)\n");
            out.push_str("  J  : undefined (trivializable branch)\n");
        }
    }
    out.push_str(&format!(
        "identities: W-K {}; Cartan-K {}; closing {}\n",
        verdict_text(&report.residuals.wk),
        verdict_text(&report.residuals.cartan_k),
        report
            .residuals
            .closing
            .as_ref()
            .map(verdict_text)
            .unwrap_or_else(|| "undefined".into()),
    ));
    out.push_str(&format!("classification: {}\n", report.classification.name()));
    out
}
