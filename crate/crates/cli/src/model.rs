use std::path::PathBuf;

use clap::Subcommand;
use serde_json::{json, Value};
use twistor_core::model_space::{spinor_norm, Model, ModelPoint};
use twistor_core::io::SpinorJson;

use crate::fmt::{c64_json, sig_label};
use crate::report::{Check, CliError, CliResult, Outcome};
use crate::spinor::load_spinor;
use crate::{Ctx, Produced};

/// Finite-difference step for the twistor residual.
const TWISTOR_STEP: f64 = 1e-4;

#[derive(Subcommand, Debug)]
pub enum ModelCmd {
    /// Locate the zeros of phi_v = x·v and verify their structure.
    Zeroset {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        q: usize,
        /// Ambient spinor for the standard signature (p+1, q+1).
        #[arg(long)]
        spinor: PathBuf,
        /// Random starts for the zero search and samples per direction test.
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// Twistor equation residual of phi_v at random points.
    Twistor {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        q: usize,
        /// Ambient spinor; random spinors are drawn when absent.
        #[arg(long)]
        spinor: Option<PathBuf>,
        /// Number of random spinors when no file is given.
        #[arg(long, default_value_t = 5)]
        count: usize,
        #[arg(long, default_value_t = 5)]
        points: usize,
    },
    /// Proportionality constants between the tractor split of alpha_v and the Dirac forms of phi_v.
    Constants {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        q: usize,
        #[arg(long)]
        spinor: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        points: usize,
    },
    /// Generate an ambient spinor whose twistor spinor has a zero with r null kernel directions.
    Spinor {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        q: usize,
        #[arg(long, default_value_t = 0)]
        kernel: usize,
    },
}

fn point_json(x: &ModelPoint) -> Value {
    json!({ "x1": x.x1, "x2": x.x2 })
}

fn model_spinor(ctx: &mut Ctx, model: &Model, path: &std::path::Path) -> CliResult<Vec<num_complex::Complex<f64>>> {
    let (sig, coeffs) = load_spinor(ctx, path)?;
    if sig != model.rep.sig {
        return Err(CliError::Input(format!(
            "spinor signature {} eps {:?} does not match the ambient signature {} eps {:?}",
            sig_label(&sig),
            sig.eps,
            sig_label(&model.rep.sig),
            model.rep.sig.eps
        )));
    }
    if coeffs.is_zero() {
        return Err(CliError::Input("zero spinor".into()));
    }
    Ok(coeffs.to_c64())
}

pub fn run(c: &ModelCmd, ctx: &mut Ctx) -> CliResult<Produced> {
    match c {
        ModelCmd::Zeroset { p, q, spinor, samples } => {
            let mut r = ctx.rng()?;
            let model = Model::new(*p, *q)?;
            let v = model_spinor(ctx, &model, spinor)?;
            let zeros = model.find_zeros(&v, *samples, &mut r);
            let mut checks = Vec::new();
            let mut residuals = serde_json::Map::new();
            let mut summary = vec![format!("phi_v on S^{p} x S^{q}: {} zeros found from {samples} starts", zeros.len())];
            let mut ker_dim = Value::Null;
            if let Some(x) = zeros.first() {
                let rep = model.zero_set_verify(&v, x, *samples, &mut r)?;
                let tol = ctx.tol(1e-8);
                checks.push(Check::below("phi vanishes along exp_x(ker D phi)", rep.kernel_max, tol));
                checks.push(Check::above("phi grows in transverse directions", rep.transverse_min_ratio, 1e-4));
                checks.push(Check::exact("every zero found lies on the predicted set", rep.off_prediction == 0).with_witness(format!("{} off", rep.off_prediction)));
                checks.push(Check::exact("dim ker D phi is constant across zeros", rep.ker_dims.iter().all(|&d| d == rep.ker_dim)).with_witness(format!("{:?}", rep.ker_dims)));
                checks.push(Check::below("zero-set geodesics are null", rep.null_tangency, tol));
                ker_dim = json!(rep.ker_dim);
                residuals.insert("kernel_max".into(), json!(rep.kernel_max));
                residuals.insert("transverse_min_ratio".into(), json!(rep.transverse_min_ratio));
                residuals.insert("null_tangency".into(), json!(rep.null_tangency));
                residuals.insert("ker_dims".into(), json!(rep.ker_dims));
                residuals.insert("tol".into(), json!(tol));
                summary.push(format!("dim ker D phi = {} at the zeros", rep.ker_dim));
            }
            let result = json!({
                "p": p,
                "q": q,
                "zeros": zeros.iter().map(point_json).collect::<Vec<_>>(),
                "ker_dim": ker_dim,
                "residuals": residuals,
            });
            Ok(Produced::Report(Outcome { checks, result, summary }))
        }
        ModelCmd::Twistor { p, q, spinor, count, points } => {
            let mut r = ctx.rng()?;
            let model = Model::new(*p, *q)?;
            let vs = match spinor {
                Some(path) => vec![model_spinor(ctx, &model, path)?],
                None => (0..*count).map(|_| model.random_spinor(&mut r)).collect(),
            };
            let tol = ctx.tol(1e-6);
            let mut rows = Vec::new();
            let mut worst: f64 = 0.0;
            for v in &vs {
                let res = model.twistor_residual_max(v, &mut r, *points, TWISTOR_STEP)? / spinor_norm(v);
                worst = worst.max(res);
                rows.push(res);
            }
            let checks = vec![Check::below("nabla_X phi + X·D phi / n = 0", worst, tol)];
            let result = json!({ "p": p, "q": q, "step": TWISTOR_STEP, "residuals": rows, "tol": tol });
            let summary = vec![format!("{} spinors on S^{p} x S^{q}, {points} points each", vs.len())];
            Ok(Produced::Report(Outcome { checks, result, summary }))
        }
        ModelCmd::Constants { p, q, spinor, points } => {
            let mut r = ctx.rng()?;
            let model = Model::new(*p, *q)?;
            let v = match spinor {
                Some(path) => model_spinor(ctx, &model, path)?,
                None => model.random_spinor(&mut r),
            };
            let pts: Vec<ModelPoint> = (0..(*points).max(2)).map(|_| model.random_point(&mut r)).collect();
            let consts = model.parallel_tractor_integration(&v, &pts)?;
            let tol = ctx.tol(1e-6);
            let mut checks = Vec::new();
            let mut rows = Vec::new();
            for d in &consts {
                checks.push(Check::below(format!("degree {} constants are point-independent", d.k), d.spread.max(d.deviation), tol));
                rows.push(json!({
                    "k": d.k,
                    "d1": d.d1.as_ref().map(c64_json),
                    "d2": d.d2.as_ref().map(c64_json),
                    "spread": d.spread,
                    "deviation": d.deviation,
                }));
            }
            let result = json!({ "p": p, "q": q, "constants": rows, "tol": tol });
            let summary = vec![format!("tractor split of alpha_v against Dirac forms of phi_v over {} points", pts.len())];
            Ok(Produced::Report(Outcome { checks, result, summary }))
        }
        ModelCmd::Spinor { p, q, kernel } => {
            let mut r = ctx.rng()?;
            let model = Model::new(*p, *q)?;
            let x = model.random_point(&mut r);
            let v = model.spinor_with_zero(&x, *kernel, &mut r)?;
            Ok(Produced::Artifact(json!(SpinorJson::float(&model.rep.sig, &v))))
        }
    }
}
