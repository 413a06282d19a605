use clap::Subcommand;
use num_traits::Signed;
use serde_json::json;
use twistor_core::kform::{index_tuples, KForm};
use twistor_core::model_space::Model;
use twistor_core::random::{gaussian_vec, int_vec, small_int, unit_param, Rng64};
use twistor_core::scalar::{q, qf, R2};
use twistor_core::tractor::{
    compare_with_oracle, conformal_transform_vector, reassemble, split_tractor_form, tractor_metric, Gauge, Layout, PlusLaw, SigmaJet, SpinTractor, TractorVector,
};
use twistor_core::{Signature, Q};

use crate::fmt::sig_label;
use crate::report::{Check, CliResult, Outcome};
use crate::Ctx;

#[derive(Subcommand, Debug)]
pub enum TractorCmd {
    /// Gauge invariance, form laws, spin-tractor pairing and connection metricity.
    /// With no selection flag every check runs.
    Check {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        q: usize,
        /// Tractor metric invariance under conformal rescaling.
        #[arg(long)]
        invariance: bool,
        /// Split/reassemble identity and component laws against the frame-change oracle.
        #[arg(long)]
        laws: bool,
        /// Anti-diagonal pairing of the spin-tractor split.
        #[arg(long)]
        pairing: bool,
        /// Metricity and parallel-tractor residuals of the normal tractor connection on the model.
        #[arg(long)]
        metricity: bool,
        /// Samples per check.
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
}

fn random_jet(g: &Gauge<Q>, r: &mut Rng64) -> SigmaJet<Q> {
    let e = q(1) + unit_param(r).abs();
    let d: Vec<Q> = (0..g.n()).map(|_| qf(small_int(r), 3)).collect();
    SigmaJet::new(g, e, d)
}

pub fn run(c: &TractorCmd, ctx: &mut Ctx) -> CliResult<Outcome> {
    let TractorCmd::Check { p, q: q_, invariance, laws, pairing, metricity, samples } = c;
    let (p, q_) = (*p, *q_);
    let all = !(*invariance || *laws || *pairing || *metricity);
    let sig = Signature::standard(p, q_)?;
    let n = sig.n();
    let g = Gauge::<Q>::flat(&sig.eps);
    let mut checks = Vec::new();
    let mut result = serde_json::Map::new();
    let mut summary = vec![format!("tractor bundle over {} (rank {})", sig_label(&sig), n + 2)];

    if all || *invariance {
        let mut r = ctx.rng()?;
        let mut ok = true;
        for _ in 0..*samples {
            let mk = |r: &mut Rng64| TractorVector::new(q(small_int(r)), int_vec(r, n), q(small_int(r)), g.clone());
            let (s, t) = (mk(&mut r)?, mk(&mut r)?);
            let jet = random_jet(&g, &mut r);
            let before = tractor_metric(&s, &t)?;
            let after = tractor_metric(&conformal_transform_vector(&s, &jet)?, &conformal_transform_vector(&t, &jet)?)?;
            ok &= before == after;
        }
        checks.push(Check::exact("tractor metric is gauge invariant", ok).with_witness(format!("{samples} pairs")));
    }

    if all || *laws {
        let mut r = ctx.rng()?;
        let mut split_ok = true;
        let mut law_ok = true;
        let mut printed = Vec::new();
        for deg in 1..=n + 2 {
            let mut printed_agrees = true;
            for _ in 0..(*samples).max(1) {
                let mut f = KForm::<Q>::zero(n + 2, deg);
                for idx in index_tuples(n + 2, deg) {
                    f.add_term(&idx, q(small_int(&mut r)));
                }
                let s = split_tractor_form(&f, &g)?;
                split_ok &= reassemble(&s) == f;
                let jet = random_jet(&g, &mut r);
                law_ok &= compare_with_oracle(&s, &jet, PlusLaw::FrameChange)?.all();
                printed_agrees &= compare_with_oracle(&s, &jet, PlusLaw::Printed)?.all();
            }
            printed.push(json!({ "degree": deg, "printed_laws_agree": printed_agrees }));
        }
        checks.push(Check::exact("split/reassemble identity", split_ok).with_witness(format!("degrees 1..={}", n + 2)));
        checks.push(Check::exact("component laws agree with the frame change", law_ok));
        result.insert("laws".into(), json!(printed));
    }

    if all || *pairing {
        let st = SpinTractor::new(&sig, Layout::Bracket)?;
        match st.pairing_constant::<R2>(false) {
            Ok(c) => {
                let (re, im) = (c.re.to_f64(), c.im.to_f64());
                checks.push(Check::exact("spin-tractor pairing is anti-diagonal with one constant", true).with_witness(format!("{re:.6}{im:+.6}i")));
                result.insert("pairing_constant".into(), json!({ "re": c.re.to_string(), "im": c.im.to_string(), "approx": [re, im] }));
            }
            Err(e) => checks.push(Check::exact("spin-tractor pairing is anti-diagonal with one constant", false).with_witness(e.to_string())),
        }
    }

    if *metricity || (all && n >= 3) {
        let mut r = ctx.rng()?;
        let model = Model::new(p, q_)?;
        let tol = ctx.tol(1e-8);
        let mut rows = Vec::new();
        let (mut worst_m, mut worst_p): (f64, f64) = (0.0, 0.0);
        for i in 0..(*samples).clamp(1, 5) {
            let x = model.random_point(&mut r);
            let m = model.tractor_metricity_residual(&x, 3, &mut r)?;
            let w = gaussian_vec(&mut r, n + 2);
            let par = model.parallel_tractor_residual(&w, &x, 2, &mut r)?;
            worst_m = worst_m.max(m);
            worst_p = worst_p.max(par);
            rows.push(json!({ "point": i, "x1": x.x1, "x2": x.x2, "metricity": m, "parallel": par }));
        }
        checks.push(Check::below("normal tractor connection is metric", worst_m, tol));
        checks.push(Check::below("constant ambient vectors are parallel tractors", worst_p, tol));
        result.insert("residuals".into(), json!({ "tol": tol, "rows": rows }));
    } else if all {
        summary.push("connection residuals skipped: the model chart curvature needs n >= 3".into());
    }
    Ok(Outcome { checks, result: serde_json::Value::Object(result), summary })
}
