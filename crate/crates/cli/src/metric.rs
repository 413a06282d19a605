use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Subcommand;
use num_traits::Zero;
use serde_json::{json, Value};
use twistor_core::normal_form::{off_block_max, parse_point, point_to_f64, PolyMetric, PolyMetricJson};
use twistor_core::numeric::max_abs;
use twistor_core::random::gaussian_vec;

use crate::fmt::{q_json, q_str};
use crate::report::{Check, CliError, CliResult, Outcome};
use crate::{Ctx, Produced};

#[derive(Subcommand, Debug)]
pub enum MetricCmd {
    /// Generate a seeded random metric satisfying the divergence constraints.
    Random {
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 2)]
        degree: u32,
        #[arg(long)]
        include_z: bool,
    },
    /// The m = 1 fixture g_11 = (y^1)^2 + z^2.
    Fixture,
    /// Divergence constraints and the parallel lightlike distribution.
    Check {
        #[arg(long = "in")]
        input: PathBuf,
        /// Random points for the parallelity residual.
        #[arg(long, default_value_t = 5)]
        points: usize,
    },
    /// Ricci tensor at a point from the closed formula, optionally against finite differences.
    Ricci {
        #[arg(long = "in")]
        input: PathBuf,
        /// Comma-separated coordinates x_1..x_m, y^1..y^m[, z]; rationals like 1/3 allowed.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long)]
        oracle: bool,
        /// Finite-difference step of the oracle.
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
    },
}

fn var_names(pm: &PolyMetric) -> Vec<String> {
    let mut v: Vec<String> = (1..=pm.m).map(|i| format!("x{i}")).collect();
    v.extend((1..=pm.m).map(|i| format!("y{i}")));
    if pm.include_z {
        v.push("z".into());
    }
    v
}

fn load(ctx: &mut Ctx, path: &std::path::Path) -> CliResult<PolyMetric> {
    let text = ctx.read(path)?;
    let js: PolyMetricJson = serde_json::from_str(&text)?;
    Ok(PolyMetric::from_json(&js)?)
}

fn constraint_check(pm: &PolyMetric) -> (Check, Value) {
    let bad = pm.validate_constraints();
    let listed: Vec<Value> = bad.iter().map(|v| json!({ "column": v.k + 1, "divergence": v.divergence.to_string() })).collect();
    let check = Check::exact("divergence constraints sum_i d_{x_i} g_ik = 0", bad.is_empty());
    let check = match bad.first() {
        Some(v) => check.with_witness(format!("column {} has divergence {}", v.k + 1, v.divergence)),
        None => check,
    };
    (check, json!(listed))
}

fn artifact(pm: &PolyMetric) -> CliResult<Produced> {
    Ok(Produced::Artifact(json!(pm.to_json()?)))
}

pub fn run(c: &MetricCmd, ctx: &mut Ctx) -> CliResult<Produced> {
    match c {
        MetricCmd::Random { m, degree, include_z } => {
            if *m == 0 {
                return Err(CliError::Input("m must be at least 1".into()));
            }
            let mut r = ctx.rng()?;
            artifact(&PolyMetric::random_constrained(*m, *include_z, *degree, &mut r))
        }
        MetricCmd::Fixture => artifact(&PolyMetric::fixture_m1()),
        MetricCmd::Check { input, points } => {
            let pm = load(ctx, input)?;
            let (constraints, violations) = constraint_check(&pm);
            let mut checks = vec![constraints];
            let mut r = ctx.rng()?;
            let pts: Vec<Vec<f64>> = (0..*points).map(|_| gaussian_vec(&mut r, pm.nvars()).iter().map(|a| a * 0.5).collect()).collect();
            let tol = ctx.tol(1e-6);
            let ll = pm.lightlike_distribution_check(&pts, 1e-3)?;
            checks.push(Check::exact("span(d_x) is totally lightlike", ll.lightlike_exact));
            checks.push(Check::below("span(d_x) is parallel", ll.parallel_residual, tol));
            let (p, q) = pm.signature();
            let result = json!({ "m": pm.m, "include_z": pm.include_z, "signature": [p, q], "violations": violations, "parallel_residual": ll.parallel_residual, "tol": tol });
            let summary = vec![format!("normal-form metric, m = {}, signature ({p},{q})", pm.m)];
            Ok(Produced::Report(Outcome { checks, result, summary }))
        }
        MetricCmd::Ricci { input, point, oracle, step } => {
            let pm = load(ctx, input)?;
            let pt = parse_point(point)?;
            if pt.len() != pm.nvars() {
                return Err(CliError::Input(format!("point has {} coordinates, the metric needs {}", pt.len(), pm.nvars())));
            }
            let names = var_names(&pm);
            let (constraints, violations) = constraint_check(&pm);
            if !constraints.passed() {
                let result = json!({ "violations": violations });
                return Ok(Produced::Report(Outcome { checks: vec![constraints], result, summary: vec!["constraints violated; the closed Ricci formula does not apply".into()] }));
            }
            let mut checks = vec![constraints];
            let ric = pm.ricci_closed_formula()?;
            let mut exact = BTreeMap::new();
            let mut formula = BTreeMap::new();
            let mut summary = Vec::new();
            for k in 0..pm.m {
                for l in k..pm.m {
                    let key = format!("d{}d{}", names[pm.y(k)], names[pm.y(l)]);
                    let val = ric[k][l].eval_q(&pt);
                    summary.push(format!("Ric({key}) = {}", q_str(&val)));
                    if !val.is_zero() || k == l {
                        exact.insert(key.clone(), q_json(&val));
                    }
                    formula.insert(key, ric[k][l].to_string());
                }
            }
            let mut result = json!({
                "m": pm.m,
                "include_z": pm.include_z,
                "variables": names,
                "point": pt.iter().map(q_str).collect::<Vec<_>>(),
                "ricci": exact,
                "formula": formula,
            });
            if *oracle {
                let ptf = point_to_f64(&pt);
                let num = pm.ricci_numeric_oracle(&ptf, *step)?;
                let closed = pm.ricci_formula_at(&ptf)?;
                let tol = ctx.tol(1e-6);
                let diff = max_abs(&(num.clone() - closed));
                let off = off_block_max(&pm, &num);
                checks.push(Check::below("closed formula matches finite differences", diff, tol));
                checks.push(Check::below("Ricci vanishes outside the dy dy block", off, tol));
                let rows: Vec<Vec<f64>> = (0..num.nrows()).map(|i| (0..num.ncols()).map(|j| num[(i, j)]).collect()).collect();
                result["oracle"] = json!({ "step": step, "tol": tol, "matrix": rows, "max_difference": diff, "off_block": off });
            }
            Ok(Produced::Report(Outcome { checks, result, summary }))
        }
    }
}
