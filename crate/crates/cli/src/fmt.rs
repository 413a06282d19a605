use num_complex::Complex;
use num_traits::{One, Zero};
use serde_json::{json, Value};
use twistor_core::io::{q_to_parts, SignatureJson};
use twistor_core::{Cq, Signature, Q};

pub fn q_str(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn cq_str(x: &Cq) -> String {
    match (x.re.is_zero(), x.im.is_zero()) {
        (_, true) => q_str(&x.re),
        (true, false) if x.im.is_one() => "i".into(),
        (true, false) if (-x.im.clone()).is_one() => "-i".into(),
        (true, false) => format!("{}i", q_str(&x.im)),
        (false, false) => {
            let sign = if x.im < Q::zero() { "-" } else { "+" };
            let im = if x.im < Q::zero() { -x.im.clone() } else { x.im.clone() };
            if im.is_one() {
                format!("{}{sign}i", q_str(&x.re))
            } else {
                format!("{}{sign}{}i", q_str(&x.re), q_str(&im))
            }
        }
    }
}

/// `[num, den]`.
pub fn q_json(x: &Q) -> Value {
    json!(q_to_parts(x))
}

/// `[re_num, re_den, im_num, im_den]`.
pub fn cq_json(x: &Cq) -> Value {
    let [a, b] = q_to_parts(&x.re);
    let [c, d] = q_to_parts(&x.im);
    json!([a, b, c, d])
}

pub fn c64_json(x: &Complex<f64>) -> Value {
    json!([x.re, x.im])
}

pub fn sig_json(s: &Signature) -> Value {
    json!(SignatureJson::from_signature(s))
}

pub fn sig_label(s: &Signature) -> String {
    format!("({},{})", s.p, s.q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use twistor_core::scalar::{cq, qf};

    #[test]
    fn complex_rationals_print_compactly() {
        assert_eq!(cq_str(&cq(0, 1)), "i");
        assert_eq!(cq_str(&cq(0, -1)), "-i");
        assert_eq!(cq_str(&cq(2, -1)), "2-i");
        assert_eq!(cq_str(&Cq::new(qf(1, 2), qf(3, 4))), "1/2+3/4i");
        assert_eq!(cq_str(&cq(0, 0)), "0");
    }
}
