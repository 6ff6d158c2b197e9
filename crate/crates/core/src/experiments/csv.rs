use std::fmt::Write;

use super::{CollapsibilitySetting, ContourSurface, SweepRow};

pub const CSV_HEADER: &str = "or_u,beta_x,alpha,p_u,p_x,beta_t,method,fit_beta0,fit_beta_t,fit_beta_x,implied_gamma,true_gamma,pehe,converged";

/// Formats like C's `%.12g`.
pub fn fmt_g12(v: f64) -> String {
    const SIG: i32 = 12;
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    // Exponent after rounding to 12 significant digits.
    let sci = format!("{:.*e}", (SIG - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if !(-4..SIG).contains(&exp) {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        strip_zeros(&format!("{:.*}", (SIG - 1 - exp) as usize, v)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_g12).unwrap_or_default()
}

/// Sweep rows under [`CSV_HEADER`], newline terminated.
pub fn rows_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let [b0, bt, bx] = match r.fit {
            Some(f) => f.map(Some),
            None => [None; 3],
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            fmt_g12(r.or_u),
            fmt_g12(r.beta_x),
            opt(r.alpha),
            fmt_g12(r.p_u),
            fmt_g12(r.p_x),
            fmt_g12(r.beta_t),
            r.method,
            opt(b0),
            opt(bt),
            opt(bx),
            opt(r.implied_gamma),
            fmt_g12(r.true_gamma),
            opt(r.pehe),
            r.converged
        )
        .expect("write to string");
    }
    out
}

/// Long format: `or_u,beta0,beta_t,loglik`.
pub fn contours_csv(surfaces: &[ContourSurface]) -> String {
    let mut out = String::from("or_u,beta0,beta_t,loglik\n");
    for s in surfaces {
        for (i, b0) in s.beta0.iter().enumerate() {
            for (j, bt) in s.beta_t.iter().enumerate() {
                writeln!(
                    out,
                    "{},{},{},{}",
                    fmt_g12(s.or_u),
                    fmt_g12(*b0),
                    fmt_g12(*bt),
                    fmt_g12(s.at(i, j))
                )
                .expect("write to string");
            }
        }
    }
    out
}

pub fn collapsibility_csv(settings: &[CollapsibilitySetting]) -> String {
    let mut out = String::from(
        "setting,x,eta0,eta1,beta_t,pi0_x,pi1_x,pi0,pi1,eta0_marg,eta1_marg,gamma_t\n",
    );
    for s in settings {
        for r in &s.rows {
            let cols = [
                r.eta0,
                r.eta1,
                r.beta_t,
                r.pi0_x,
                r.pi1_x,
                r.pi0,
                r.pi1,
                r.eta0_marg,
                r.eta1_marg,
                r.gamma_t,
            ];
            let cols: Vec<String> = cols.into_iter().map(fmt_g12).collect();
            writeln!(out, "{},{},{}", s.label, r.x, cols.join(",")).expect("write to string");
        }
    }
    out
}
