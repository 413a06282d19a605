use serde_json::{json, Value};
use twistor_core::clifford::Mono;
use twistor_core::CliffordRep;

use crate::fmt::{cq_str, sig_json, sig_label};
use crate::report::{Check, CliResult, Outcome};
use crate::SigArgs;

fn matrix_json(m: &Mono) -> Value {
    let d = m.dense::<twistor_core::Q>();
    let rows: Vec<Vec<String>> = (0..m.dim()).map(|i| (0..m.dim()).map(|j| cq_str(&d[(i, j)])).collect()).collect();
    json!(rows)
}

pub fn run(a: &SigArgs) -> CliResult<Outcome> {
    let sig = a.signature()?;
    let rep = CliffordRep::new(sig.clone())?;
    let n = rep.n();
    let mut checks = vec![Check::exact("Clifford relations e_i e_j + e_j e_i = -2 eps_i delta_ij", rep.check_relations())];
    if n % 2 == 1 {
        checks.push(Check::exact("omega_C = Id", rep.check_volume()));
    } else {
        checks.push(Check::exact("omega_C^2 = Id and omega_C anticommutes with generators", rep.check_volume()));
        let plus = rep.half_spinor_indices(1);
        let minus = rep.half_spinor_indices(-1);
        checks.push(Check::exact("half-spinor split Delta = Delta^+ + Delta^-", plus.len() == rep.dim / 2 && minus.len() == rep.dim / 2));
    }
    let half = if n % 2 == 0 {
        json!({
            "plus": rep.half_spinor_indices(1).iter().map(|b| rep.u_label(*b)).collect::<Vec<_>>(),
            "minus": rep.half_spinor_indices(-1).iter().map(|b| rep.u_label(*b)).collect::<Vec<_>>(),
        })
    } else {
        Value::Null
    };
    let result = json!({
        "signature": sig_json(&sig),
        "dim_spinor": rep.dim,
        "real_backed": rep.is_real_backed(),
        "volume_exponent": rep.volume_exponent,
        "generators": rep.gens.iter().map(matrix_json).collect::<Vec<_>>(),
        "volume_complex": matrix_json(&rep.volume),
        "half_spinors": half,
        "basis": (0..rep.dim).map(|b| rep.u_label(b)).collect::<Vec<_>>(),
    });
    let summary = vec![format!(
        "Cl{} acting on C^{}{}; eps = {:?}",
        sig_label(&sig),
        rep.dim,
        if rep.is_real_backed() { " by real matrices" } else { "" },
        sig.eps
    )];
    Ok(Outcome { checks, result, summary })
}
