//! Byte-reproducible output writers: CSV profiles, bound-report JSONL, and
//! run manifests. Floats are printed at 17 significant digits everywhere so
//! identical runs produce identical bytes; non-finite values appear as the
//! quoted strings "inf", "-inf", "nan".

use crate::bounds::{BoundParams, BoundReport};
pub use crate::dist::json::format_sig17;
use std::fmt::Write as _;

pub fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out
}

fn push_param(fields: &mut Vec<String>, name: &str, value: Option<f64>) {
    if let Some(v) = value {
        fields.push(format!("\"{name}\":{}", format_sig17(v)));
    }
}

pub fn params_to_json(params: &BoundParams) -> String {
    let mut fields = Vec::new();
    push_param(&mut fields, "m", params.m);
    push_param(&mut fields, "rho", params.rho);
    push_param(&mut fields, "q", params.q);
    push_param(&mut fields, "p", params.p);
    push_param(&mut fields, "s", params.s);
    if let Some(mp) = params.metric_power {
        fields.push(format!("\"metric_power\":{mp}"));
    }
    format!("{{{}}}", fields.join(","))
}

/// One bound report as a single JSONL record.
pub fn report_to_json(report: &BoundReport) -> String {
    let t = report
        .t
        .map_or("null".to_string(), |t| t.to_string());
    format!(
        "{{\"name\":\"{}\",\"t\":{},\"lhs\":{},\"rhs\":{},\"slack\":{},\"params\":{},\"clamped\":{},\"provenance\":\"{}\"}}",
        json_escape(&report.name),
        t,
        format_sig17(report.lhs),
        format_sig17(report.rhs),
        format_sig17(report.slack),
        params_to_json(&report.params),
        report.clamped,
        json_escape(&report.provenance),
    )
}

/// CSV cell for a float; non-finite values spelled out as text.
pub fn csv_float(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x == f64::INFINITY {
        "inf".to_string()
    } else if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Header + row renderer for the bound-report summary CSV
/// (columns: name, t, lhs, rhs, slack, params..., seed).
pub const SUMMARY_HEADER: &str = "name,t,lhs,rhs,slack,m,rho,q,p,s,metric_power,seed_master,seed_stream";

pub fn summary_row(report: &BoundReport, seed_master: u64, seed_stream: u64) -> String {
    let opt = |v: Option<f64>| v.map_or(String::new(), csv_float);
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{}",
        report.name,
        report.t.map_or(String::new(), |t| t.to_string()),
        csv_float(report.lhs),
        csv_float(report.rhs),
        csv_float(report.slack),
        opt(report.params.m),
        opt(report.params.rho),
        opt(report.params.q),
        opt(report.params.p),
        opt(report.params.s),
        report
            .params
            .metric_power
            .map_or(String::new(), |mp| mp.to_string()),
        seed_master,
        seed_stream,
    )
}
