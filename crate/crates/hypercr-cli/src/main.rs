//! Command-line classifier for third-order ODEs x''' = F(t, x, x', x'').
//!
//! Computes the point invariants of the equation, decides whether its
//! solution space carries a Lorentzian hyper-CR Einstein-Weyl structure,
//! transports equations along point transformations, and verifies the
//! transformation rules numerically.

mod report;

use clap::{Args, Parser, Subcommand};
use hypercr_core::invariants::{invariant_by_name, INVARIANT_NAMES};
use hypercr_core::transform::{
    check_form_scaling_named, check_k1_rule_named, check_triviality_preservation_named,
    check_w_vanishing, fixture_maps, FormKind, InvarianceCheck,
};
use hypercr_core::{
    classify, is_zero, prolong, rat, render, Classification, Equation, Error, JetPoint, PointMap,
    SamplePlan, Var,
};
use serde_json::json;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "hypercr",
    about = "Point invariants of third-order ODEs and the hyper-CR Einstein-Weyl classification",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct PlanArgs {
    /// Number of accepted sample points for numeric verdicts.
    #[arg(long, default_value_t = 12)]
    samples: usize,
    /// PRNG seed (decimal or 0x-prefixed hex).
    #[arg(long, default_value = "0xDA7A", value_parser = parse_seed)]
    seed: u64,
    /// Zero tolerance for numeric verdicts.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Sampling box: "lo,hi" for all coordinates or eight comma-separated
    /// rationals for per-coordinate bounds.
    #[arg(long, value_parser = parse_box)]
    r#box: Option<BoxSpec>,
    /// Margin the domain guards must clear at accepted samples.
    #[arg(long, default_value_t = 0.05)]
    margin: f64,
}

#[derive(Clone)]
struct BoxSpec([(rat::Rat, rat::Rat); 4]);

fn parse_seed(s: &str) -> Result<u64, String> {
    let s = s.trim();
    if let Some(hex) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        u64::from_str_radix(hex, 16).map_err(|e| e.to_string())
    } else {
        s.parse().map_err(|e: std::num::ParseIntError| e.to_string())
    }
}

fn parse_box(s: &str) -> Result<BoxSpec, String> {
    let parts: Vec<rat::Rat> = s
        .split(',')
        .map(|p| rat::parse_rat(p).ok_or_else(|| format!("bad rational '{p}'")))
        .collect::<Result<_, _>>()?;
    let pair = |lo: &rat::Rat, hi: &rat::Rat| -> Result<(rat::Rat, rat::Rat), String> {
        if lo >= hi {
            return Err("box interval is empty".into());
        }
        Ok((lo.clone(), hi.clone()))
    };
    match parts.as_slice() {
        [lo, hi] => {
            let p = pair(lo, hi)?;
            Ok(BoxSpec([p.clone(), p.clone(), p.clone(), p]))
        }
        [t0, t1, a0, a1, b0, b1, c0, c1] => Ok(BoxSpec([
            pair(t0, t1)?,
            pair(a0, a1)?,
            pair(b0, b1)?,
            pair(c0, c1)?,
        ])),
        _ => Err("expected 2 or 8 comma-separated rationals".into()),
    }
}

fn parse_point(s: &str) -> Result<JetPoint, String> {
    let parts: Vec<rat::Rat> = s
        .split(',')
        .map(|p| rat::parse_rat(p).ok_or_else(|| format!("bad rational '{p}'")))
        .collect::<Result<_, _>>()?;
    match parts.as_slice() {
        [t, x0, x1, x2] => Ok(JetPoint::new(t.clone(), x0.clone(), x1.clone(), x2.clone())),
        _ => Err("expected t,x0,x1,x2".into()),
    }
}

impl PlanArgs {
    fn plan(&self) -> SamplePlan {
        let mut plan = SamplePlan {
            count: self.samples.max(1),
            seed: self.seed,
            tol: self.tol,
            margin: self.margin,
            ..SamplePlan::default()
        };
        if let Some(BoxSpec(coord_box)) = &self.r#box {
            plan.coord_box = coord_box.clone();
        }
        plan
    }
}

#[derive(Args, Clone)]
struct MapArgs {
    /// Forward t-component t~(t, x).
    #[arg(long = "map-t")]
    map_t: String,
    /// Forward x-component x~(t, x).
    #[arg(long = "map-x")]
    map_x: String,
    /// Inverse t-component t(t~, x~), written in t, x.
    #[arg(long = "inv-t")]
    inv_t: String,
    /// Inverse x-component x(t~, x~), written in t, x.
    #[arg(long = "inv-x")]
    inv_x: String,
}

#[derive(Subcommand)]
enum Command {
    /// Classify an equation per the invariant decision table.
    Classify {
        /// Right-hand side F(t, x, x', x'') of x''' = F.
        #[arg(long)]
        equation: String,
        #[command(flatten)]
        plan: PlanArgs,
        #[arg(long, default_value = "text")]
        format: Format,
    },
    /// Print (and optionally evaluate) named invariants of an equation.
    Invariants {
        #[arg(long)]
        equation: String,
        /// Invariant name: W, C, K0, K1, Psi, I1, I2, J0, J1, J2. All when
        /// omitted.
        #[arg(long)]
        name: Option<String>,
        /// Evaluation point "t,x0,x1,x2" (rationals).
        #[arg(long, value_parser = parse_point)]
        point: Option<JetPoint>,
        #[command(flatten)]
        plan: PlanArgs,
        #[arg(long, default_value = "text")]
        format: Format,
    },
    /// Transport an equation along a point transformation.
    Transform {
        #[arg(long)]
        equation: String,
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        plan: PlanArgs,
        #[arg(long, default_value = "text")]
        format: Format,
    },
    /// Run the identity and invariance suites for an equation.
    Verify {
        #[arg(long)]
        equation: String,
        #[command(flatten)]
        plan: PlanArgs,
        #[arg(long, default_value = "text")]
        format: Format,
    },
    /// Classify the built-in fixture equations and check the expected
    /// verdicts.
    Selftest {
        #[command(flatten)]
        plan: PlanArgs,
        #[arg(long, default_value = "text")]
        format: Format,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Format {
    Text,
    Json,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::SyntaxError { .. }
        | Error::UnknownSymbol { .. }
        | Error::DependsOnJetVariables(_)
        | Error::InverseMismatch { .. } => 1,
        Error::NonRationalOperation
        | Error::DivisionByZero
        | Error::DomainError(_)
        | Error::OverflowError
        | Error::TrivializableBranch
        | Error::DegenerateFrame
        | Error::DegreeOverflow
        | Error::PreconditionViolated(_) => 2,
        Error::ExpressionTooLarge { .. } | Error::SamplingExhausted { .. } => 3,
    }
}

fn fail(err: Error, format: Format) -> ExitCode {
    let code = exit_code_for(&err);
    match format {
        Format::Json => println!(
            "{}",
            json!({ "error": err.to_string(), "exit_code": code })
        ),
        Format::Text => eprintln!("error: {err}"),
    }
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Classify {
            equation,
            plan,
            format,
        } => cmd_classify(&equation, &plan.plan(), format),
        Command::Invariants {
            equation,
            name,
            point,
            plan,
            format,
        } => cmd_invariants(&equation, name.as_deref(), point.as_ref(), &plan.plan(), format),
        Command::Transform {
            equation,
            map,
            plan,
            format,
        } => cmd_transform(&equation, &map, &plan.plan(), format),
        Command::Verify {
            equation,
            plan,
            format,
        } => cmd_verify(&equation, &plan.plan(), format),
        Command::Selftest { plan, format } => cmd_selftest(&plan.plan(), format),
    }
}

fn parse_equation_arg(src: &str, format: Format) -> Result<Equation, ExitCode> {
    hypercr_core::parse_equation(src).map_err(|e| fail(e, format))
}

fn cmd_classify(src: &str, plan: &SamplePlan, format: Format) -> ExitCode {
    let eq = match parse_equation_arg(src, format) {
        Ok(eq) => eq,
        Err(code) => return code,
    };
    match classify(&eq, plan) {
        Ok(report) => {
            match format {
                Format::Json => println!("{}", report::report_json(&report)),
                Format::Text => print!("{}", report::report_text(&report)),
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(e, format),
    }
}

fn cmd_invariants(
    src: &str,
    name: Option<&str>,
    point: Option<&JetPoint>,
    plan: &SamplePlan,
    format: Format,
) -> ExitCode {
    let eq = match parse_equation_arg(src, format) {
        Ok(eq) => eq,
        Err(code) => return code,
    };
    let names: Vec<&str> = match name {
        Some(n) => vec![n],
        None => INVARIANT_NAMES.to_vec(),
    };
    let mut entries = Vec::new();
    for n in names {
        let value = match invariant_by_name(&eq, n) {
            Ok(e) => e,
            Err(Error::TrivializableBranch) => {
                entries.push((
                    n.to_string(),
                    "undefined (trivializable branch)".to_string(),
                    None,
                ));
                continue;
            }
            Err(e) => return fail(e, format),
        };
        let at_point = match point {
            None => None,
            Some(p) => match value.eval_exact(p) {
                Ok(q) => Some(rat::format_rat(&q)),
                Err(_) => match value.eval_float(p) {
                    Ok(v) => Some(format!("{v}")),
                    Err(e) => return fail(e, format),
                },
            },
        };
        entries.push((n.to_string(), render(&value), at_point));
    }
    match format {
        Format::Json => {
            let list: Vec<_> = entries
                .iter()
                .map(|(n, text, at)| {
                    json!({ "name": n, "expression": text, "value_at_point": at })
                })
                .collect();
            println!(
                "{}",
                json!({
                    "equation": render(eq.f()),
                    "invariants": list,
                    "plan": report::plan_json(plan),
                })
            );
        }
        Format::Text => {
            for (n, text, at) in &entries {
                match at {
                    Some(v) => println!("{n} = {text}\n{n} at point = {v}"),
                    None => println!("{n} = {text}"),
                }
            }
        }
    }
    ExitCode::SUCCESS
}

fn parse_map_args(map: &MapArgs, plan: &SamplePlan, format: Format) -> Result<PointMap, ExitCode> {
    hypercr_core::parser::parse_transformation_with_plan(
        &map.map_t, &map.map_x, &map.inv_t, &map.inv_x, plan,
    )
    .map_err(|e| fail(e, format))
}

fn cmd_transform(src: &str, map_args: &MapArgs, plan: &SamplePlan, format: Format) -> ExitCode {
    let eq = match parse_equation_arg(src, format) {
        Ok(eq) => eq,
        Err(code) => return code,
    };
    let map = match parse_map_args(map_args, plan, format) {
        Ok(m) => m,
        Err(code) => return code,
    };
    match prolong(&map, &eq) {
        Ok(moved) => {
            match format {
                Format::Json => println!(
                    "{}",
                    json!({
                        "equation": render(eq.f()),
                        "transformed": render(moved.f()),
                        "multiplier": render(map.multiplier()),
                    })
                ),
                Format::Text => {
                    println!("x~''' = {}", render(moved.f()));
                    println!("multiplier g = {}", render(map.multiplier()));
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(e, format),
    }
}

fn check_line(check: &InvarianceCheck) -> String {
    format!(
        "{} [{}]: {} (max residual {:.3e} over {} samples)",
        check.rule.name(),
        check.map_name,
        if check.passed { "pass" } else { "FAIL" },
        check.max_residual,
        check.samples
    )
}

fn cmd_verify(src: &str, plan: &SamplePlan, format: Format) -> ExitCode {
    let eq = match parse_equation_arg(src, format) {
        Ok(eq) => eq,
        Err(code) => return code,
    };
    let mut lines: Vec<(String, bool)> = Vec::new();

    // identity residuals
    let identities: Vec<(&str, Result<hypercr_core::Expr, Error>)> = vec![
        (
            "W = K0 + 1/2 X(K1)",
            hypercr_core::invariants::wk_identity_residual(&eq),
        ),
        (
            "C = 3/2 K1_x1 + F_x2 K1_x2 + 3/2 K0_x2",
            hypercr_core::invariants::cartan_k_identity_residual(&eq),
        ),
    ];
    for (label, residual) in identities {
        match residual {
            Ok(r) => match is_zero(&r, &eq.plan(plan)) {
                Ok(v) => {
                    let ok = v.is_zero();
                    lines.push((
                        format!("identity {label}: {}", report::verdict_text(&v)),
                        ok,
                    ));
                }
                Err(e) => return fail(e, format),
            },
            Err(e) => return fail(e, format),
        }
    }
    let d3_zero = eq.f().diff_n(Var::X2, 3).is_const_zero();
    if !d3_zero {
        match hypercr_core::invariants::closing_identity_residual(&eq) {
            Ok(r) => match is_zero(&r, &eq.plan(plan)) {
                Ok(v) => {
                    let ok = v.is_zero();
                    lines.push((
                        format!(
                            "identity closing (C from W, J1, J2): {}",
                            report::verdict_text(&v)
                        ),
                        ok,
                    ));
                }
                Err(e) => return fail(e, format),
            },
            Err(e) => return fail(e, format),
        }
    }

    // transformation rules over the fixture maps
    let maps = match fixture_maps(plan) {
        Ok(m) => m,
        Err(e) => return fail(e, format),
    };
    let w_vanishes = match hypercr_core::invariants::wunschmann(&eq) {
        Ok(w) => match is_zero(&w, &eq.plan(plan)) {
            Ok(v) => v.is_zero(),
            Err(e) => return fail(e, format),
        },
        Err(e) => return fail(e, format),
    };
    for (name, map) in &maps {
        match check_k1_rule_named(&eq, map, name, plan) {
            Ok(c) => lines.push((check_line(&c), c.passed)),
            Err(e) => return fail(e, format),
        }
        match check_triviality_preservation_named(map, name, plan) {
            Ok(c) => lines.push((check_line(&c), c.passed)),
            Err(e) => return fail(e, format),
        }
        if !d3_zero {
            match check_form_scaling_named(&eq, map, FormKind::I, name, plan) {
                Ok(c) => lines.push((check_line(&c), c.passed)),
                Err(e) => return fail(e, format),
            }
            match check_form_scaling_named(&eq, map, FormKind::J, name, plan) {
                Ok(c) => lines.push((check_line(&c), c.passed)),
                Err(Error::PreconditionViolated(_)) => {}
                Err(e) => return fail(e, format),
            }
        }
        if w_vanishes {
            match check_w_vanishing(&eq, map, name, plan) {
                Ok(c) => lines.push((check_line(&c), c.passed)),
                Err(e) => return fail(e, format),
            }
        }
    }

    let all_ok = lines.iter().all(|(_, ok)| *ok);
    match format {
        Format::Json => {
            let checks: Vec<_> = lines
                .iter()
                .map(|(line, ok)| json!({ "check": line, "passed": ok }))
                .collect();
            println!(
                "{}",
                json!({
                    "equation": render(eq.f()),
                    "checks": checks,
                    "passed": all_ok,
                    "plan": report::plan_json(plan),
                })
            );
        }
        Format::Text => {
            for (line, _) in &lines {
                println!("{line}");
            }
            println!(
                "verify: {}",
                if all_ok { "all checks passed" } else { "FAILURES" }
            );
        }
    }
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(4)
    }
}

fn cmd_selftest(plan: &SamplePlan, format: Format) -> ExitCode {
    let fixtures: Vec<(&str, &str, Classification)> = vec![
        ("trivial", "0", Classification::PointTrivializable),
        ("nil", "x2^(3/2)", Classification::HyperCREinsteinWeyl),
        (
            "dkp",
            "24*x2^3/(-3+sqrt(9-2*x1*x2))^3 + 12*x1*x2^4/(-3+sqrt(9-2*x1*x2))^4",
            Classification::EinsteinWeylNotHyperCR,
        ),
        ("cubic", "x2^3", Classification::WunschmannNotEinsteinWeyl),
        ("linear-x", "x", Classification::NotWunschmann),
    ];
    let mut lines = Vec::new();
    let mut all_ok = true;
    for (name, src, expected) in fixtures {
        let eq = match hypercr_core::parse_equation(src) {
            Ok(eq) => eq,
            Err(e) => return fail(e, format),
        };
        match classify(&eq, plan) {
            Ok(report) => {
                let ok = report.classification == expected;
                all_ok &= ok;
                lines.push((
                    format!(
                        "{name}: {} (expected {}) {}",
                        report.classification.name(),
                        expected.name(),
                        if ok { "pass" } else { "FAIL" }
                    ),
                    ok,
                ));
            }
            Err(e) => return fail(e, format),
        }
    }
    match format {
        Format::Json => {
            let checks: Vec<_> = lines
                .iter()
                .map(|(line, ok)| json!({ "fixture": line, "passed": ok }))
                .collect();
            println!(
                "{}",
                json!({ "fixtures": checks, "passed": all_ok, "plan": report::plan_json(plan) })
            );
        }
        Format::Text => {
            for (line, _) in &lines {
                println!("{line}");
            }
        }
    }
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(4)
    }
}
