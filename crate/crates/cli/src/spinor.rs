use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Subcommand, ValueEnum};
use num_traits::Zero;
use serde_json::{json, Value};
use twistor_core::clifford::random_spin_element;
use twistor_core::io::{KFormJson, SpinorCoeffs, SpinorJson};
use twistor_core::random::{complex_spinor, small_int};
use twistor_core::spinor_forms::{
    check_kernel_factorization, classify_dirac2, is_decomposable, low_dim_orbit_predicates, normal_form_spinor, null_candidates, orbit_rep, random_null_spinor, random_real_spinor,
    DiracFamily, InnerProduct, ORBIT_SIGNATURES,
};
use twistor_core::{CliffordRep, Cq, Signature, Q};

use crate::fmt::{cq_json, cq_str, q_str, sig_json, sig_label};
use crate::report::{Check, CliError, CliResult, Outcome};
use crate::{Ctx, Produced, SigArgs};

#[derive(Subcommand, Debug)]
pub enum SpinorCmd {
    /// Norm, kernel, purity, Dirac forms and orbit facts of a spinor.
    Analyze {
        /// Spinor JSON file with exact coefficients.
        #[arg(long)]
        spinor: PathBuf,
        /// Dirac form degrees to report (default: all).
        #[arg(long, value_delimiter = ',')]
        degrees: Option<Vec<usize>>,
        /// Require the low-dimensional orbit predicates (exit 4 if the signature has none).
        #[arg(long)]
        orbit: bool,
    },
    /// Generate a seeded random spinor as JSON.
    Random {
        #[command(flatten)]
        sig: SigArgs,
        /// Real spinor (real-backed representation or one with a real structure).
        #[arg(long)]
        real: bool,
        /// Real spinor with <v, v> = 0.
        #[arg(long, conflicts_with = "real")]
        null: bool,
        /// Project to a half-spinor module (even n).
        #[arg(long, value_enum)]
        half: Option<Half>,
        /// Spinor annihilated by k null vectors f_j = e_{2j-1} +- e_{2j}, moved by a random spin element.
        #[arg(long, conflicts_with_all = ["null", "half"])]
        kernel: Option<usize>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Half {
    Plus,
    Minus,
}

#[derive(Subcommand, Debug)]
pub enum FormCmd {
    /// The Dirac k-form of a spinor.
    Dirac {
        #[arg(long)]
        spinor: PathBuf,
        #[arg(long)]
        degree: usize,
    },
    /// Kernel vectors divide alpha^p; admissible null witnesses do not.
    Kernel {
        #[arg(long)]
        spinor: PathBuf,
    },
}

pub fn load_spinor(ctx: &mut Ctx, path: &Path) -> CliResult<(Signature, SpinorCoeffs)> {
    let text = ctx.read(path)?;
    let js: SpinorJson = serde_json::from_str(&text)?;
    Ok(js.parse()?)
}

fn load_exact(ctx: &mut Ctx, path: &Path) -> CliResult<(Signature, Vec<Cq>)> {
    match load_spinor(ctx, path)? {
        (sig, SpinorCoeffs::Exact(v)) => {
            if v.iter().all(|c| c.is_zero()) {
                return Err(CliError::Input("zero spinor: its kernel is everything, so purity and forms are not defined".into()));
            }
            Ok((sig, v))
        }
        _ => Err(CliError::Input("exact coefficients [re_num, re_den, im_num, im_den] required".into())),
    }
}

/// Whether `v` is real: real entries on a real-backed rep, `J v = v` when a real structure exists.
fn is_real(rep: &CliffordRep, v: &[Cq]) -> bool {
    if rep.is_real_backed() {
        return v.iter().all(|c| c.im.is_zero());
    }
    match rep.real_structure() {
        Some(j) => j.mul_vec(&v.iter().map(|c| c.conj()).collect::<Vec<_>>()) == v,
        None => false,
    }
}

fn vectors_json(vs: &[Vec<Q>]) -> Value {
    json!(vs.iter().map(|v| v.iter().map(q_str).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn analyze(ctx: &mut Ctx, path: &Path, degrees: &Option<Vec<usize>>, want_orbit: bool) -> CliResult<Outcome> {
    let (sig, v) = load_exact(ctx, path)?;
    let (p, q) = (sig.p, sig.q);
    let orbit_supported = ORBIT_SIGNATURES.contains(&(p, q)) && orbit_rep(p, q).map(|r| r.sig == sig).unwrap_or(false);
    if want_orbit && !orbit_supported {
        return Err(CliError::Unsupported(format!("no orbit predicates for {} with eps {:?}", sig_label(&sig), sig.eps)));
    }
    let rep = CliffordRep::new(sig.clone())?;
    let ip = InnerProduct::new(&rep)?;
    let fam = DiracFamily::new(&rep)?;
    let n = rep.n();
    let purity = rep.purity(&v)?;
    let real = if rep.is_real_backed() { v.iter().all(|c| c.im.is_zero()) } else { orbit_supported && is_real(&rep, &v) };
    let norm = if real { ip.real_norm(&rep, &v) } else { ip.hermitian(&v, &v) };
    let ker_dim = if real { purity.real_index } else { purity.complex_dim };
    let pure = if real { purity.real_pure.unwrap_or(purity.pure) } else { purity.pure };
    let mut checks = Vec::new();

    let degrees: Vec<usize> = degrees.clone().unwrap_or_else(|| (0..=n).collect());
    let mut forms = BTreeMap::new();
    for &k in &degrees {
        if k > n {
            return Err(CliError::Input(format!("degree {k} exceeds n = {n}")));
        }
        let f = fam.form(&rep, &v, k);
        checks.push(Check::exact(format!("Dirac {k}-form is real"), f.is_ok()));
        if let Ok(f) = f {
            forms.insert(k.to_string(), json!(KFormJson::exact(&f)));
        }
    }

    let ker = rep.kernel_real(&v)?;
    if real {
        let fact = check_kernel_factorization(&fam, &rep, &v, &null_candidates(&sig, &ker))?;
        checks.push(Check::exact(format!("kernel vectors divide alpha^{p}"), fact.kernel_divides).with_witness(format!("{} kernel vectors", fact.ker_dim)));
        checks.push(Check::exact("null witnesses outside the kernel do not divide", fact.witnesses_hold).with_witness(format!("{} witnesses", fact.witnesses_tested)));
    }

    let mut case_label = if pure { "pure".to_string() } else { "not pure".to_string() };
    let mut orbit = Value::Null;
    if orbit_supported {
        if real {
            let rec = low_dim_orbit_predicates(&rep, &ip, &v)?;
            for (name, ok) in &rec.facts {
                checks.push(Check::exact(name.clone(), *ok));
            }
            case_label = rec.label.clone();
            orbit = json!({ "label": rec.label, "facts": rec.facts.iter().map(|(f, ok)| json!({"fact": f, "holds": ok})).collect::<Vec<_>>() });
        } else if want_orbit {
            return Err(CliError::Input("orbit predicates need a real spinor".into()));
        }
    }
    let mut dirac2 = Value::Null;
    if p == 2 && real && !orbit_supported {
        match classify_dirac2(&fam, &rep, &v) {
            Ok(d) => {
                checks.push(Check::exact("2-form case matches dim ker", d.consistent).with_witness(format!("{} with dim ker {}", d.case.label(), d.ker_dim)));
                case_label = d.case.label().to_string();
                dirac2 = json!(d);
            }
            Err(e) => {
                case_label = format!("unclassified ({e})");
            }
        }
    }
    let result = json!({
        "signature": sig_json(&sig),
        "spinor": SpinorJson::exact(&sig, &v),
        "real": real,
        "norm": cq_json(&norm),
        "ker_dim": ker_dim,
        "ker_dim_complex": purity.complex_dim,
        "kernel": vectors_json(&ker),
        "pure": pure,
        "dirac_forms": forms,
        "case_label": case_label,
        "orbit": orbit,
        "dirac2": dirac2,
    });
    let summary = vec![
        format!("{} spinor in {}, <v,v> = {}", if real { "real" } else { "complex" }, sig_label(&sig), cq_str(&norm)),
        format!("{case_label}, ker_dim {ker_dim}"),
    ];
    Ok(Outcome { checks, result, summary })
}

fn random(ctx: &Ctx, a: &SigArgs, real: bool, null: bool, half: Option<Half>, kernel: Option<usize>) -> CliResult<Value> {
    let mut r = ctx.rng()?;
    let sig = a.signature()?;
    let rep = CliffordRep::new(sig.clone())?;
    let mut v = if let Some(k) = kernel {
        let m = sig.m();
        if k > m {
            return Err(CliError::Input(format!("at most {m} annihilating null vectors in dimension {}", sig.n())));
        }
        if (0..k).any(|j| sig.eps[2 * j] == sig.eps[2 * j + 1]) {
            return Err(CliError::Input("--kernel needs eps_{2j-1} != eps_{2j} on the first k pairs (use --convention alternating or adapted)".into()));
        }
        let delta: Vec<i8> = (0..k).map(|_| if small_int(&mut r) > 0 { 1 } else { -1 }).collect();
        let base = normal_form_spinor(&rep, &delta, &mut r, real);
        random_spin_element(&rep, &mut r, 3).apply(&rep, &base)
    } else if null {
        let ip = InnerProduct::new(&rep)?;
        if !rep.is_real_backed() {
            return Err(CliError::Unsupported(format!("null real spinors need a real-backed representation, {} is not", sig_label(&sig))));
        }
        random_null_spinor(&rep, &ip, &mut r).ok_or_else(|| CliError::Unsupported(format!("the spinor product of {} has no null basis direction", sig_label(&sig))))?
    } else if real {
        let j = if rep.is_real_backed() { None } else { Some(rep.real_structure().ok_or_else(|| CliError::Unsupported(format!("{} has no real spinors", sig_label(&sig))))?) };
        random_real_spinor(&rep, j.as_ref(), &mut r)
    } else {
        complex_spinor(&mut r, rep.dim)
    };
    if let Some(h) = half {
        if sig.n() % 2 == 1 {
            return Err(CliError::Input("half-spinors exist only for even n".into()));
        }
        let keep = rep.half_spinor_indices(match h {
            Half::Plus => 1,
            Half::Minus => -1,
        });
        loop {
            for (b, c) in v.iter_mut().enumerate() {
                if !keep.contains(&b) {
                    *c = Cq::zero();
                }
            }
            if v.iter().any(|c| !c.is_zero()) {
                break;
            }
            v = if real { random_real_spinor(&rep, rep.real_structure().as_ref(), &mut r) } else { complex_spinor(&mut r, rep.dim) };
        }
    }
    Ok(json!(SpinorJson::exact(&sig, &v)))
}

pub fn run_spinor(c: &SpinorCmd, ctx: &mut Ctx) -> CliResult<Produced> {
    match c {
        SpinorCmd::Analyze { spinor, degrees, orbit } => analyze(ctx, spinor, degrees, *orbit).map(Produced::Report),
        SpinorCmd::Random { sig, real, null, half, kernel } => random(ctx, sig, *real, *null, *half, *kernel).map(Produced::Artifact),
    }
}

pub fn run_form(c: &FormCmd, ctx: &mut Ctx) -> CliResult<Outcome> {
    match c {
        FormCmd::Dirac { spinor, degree } => {
            let (sig, v) = load_exact(ctx, spinor)?;
            let rep = CliffordRep::new(sig.clone())?;
            if *degree > rep.n() {
                return Err(CliError::Input(format!("degree {degree} exceeds n = {}", rep.n())));
            }
            let fam = DiracFamily::new(&rep)?;
            let f = fam.form(&rep, &v, *degree);
            let checks = vec![Check::exact(format!("Dirac {degree}-form is real"), f.is_ok())];
            let (form, decomposable) = match &f {
                Ok(f) => (json!(KFormJson::exact(f)), Some(is_decomposable(f))),
                Err(_) => (Value::Null, None),
            };
            let phase = ["1", "i"][fam.phases[*degree] as usize];
            let result = json!({ "signature": sig_json(&sig), "degree": degree, "phase": phase, "form": form, "decomposable": decomposable });
            let terms = f.as_ref().map(|f| f.coeffs.values().filter(|c| !c.is_zero()).count()).unwrap_or(0);
            let summary = vec![format!("alpha^{degree} in {}: phase d = {phase}, {terms} nonzero terms", sig_label(&sig))];
            Ok(Outcome { checks, result, summary })
        }
        FormCmd::Kernel { spinor } => {
            let (sig, v) = load_exact(ctx, spinor)?;
            let rep = CliffordRep::new(sig.clone())?;
            let fam = DiracFamily::new(&rep)?;
            let ker = rep.kernel_real(&v)?;
            let fact = check_kernel_factorization(&fam, &rep, &v, &null_candidates(&sig, &ker))?;
            let checks = vec![
                Check::exact(format!("kernel vectors divide alpha^{}", sig.p), fact.kernel_divides),
                Check::exact("null witnesses outside the kernel do not divide", fact.witnesses_hold).with_witness(format!("{} witnesses", fact.witnesses_tested)),
            ];
            let result = json!({ "signature": sig_json(&sig), "ker_dim": fact.ker_dim, "kernel": vectors_json(&ker), "witnesses_tested": fact.witnesses_tested });
            let summary = vec![format!("dim ker = {} in {}", fact.ker_dim, sig_label(&sig))];
            Ok(Outcome { checks, result, summary })
        }
    }
}
