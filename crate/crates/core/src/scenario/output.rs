use std::fmt::Write as _;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::run::ResultRecord;

/// One diffraction order of a result table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderRow {
    pub n: i64,
    pub k_n_per_m: f64,
    pub re_r: f64,
    pub im_r: f64,
    #[serde(rename = "R_n")]
    pub big_r_n: f64,
}

impl OrderRow {
    pub fn new(n: i64, k_n: f64, r: Complex<f64>) -> Self {
        Self { n, k_n_per_m: k_n, re_r: r.re, im_r: r.im, big_r_n: r.norm_sqr() }
    }
}

// 17 significant digits: enough to round-trip every f64.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn push_rows(out: &mut String, prefix: &str, table: &[OrderRow]) {
    for r in table {
        writeln!(out, "{prefix}{},{},{},{},{}", r.n, num(r.k_n_per_m), num(r.re_r), num(r.im_r), num(r.big_r_n)).unwrap();
    }
}

/// CSV rendering. Order tables use `n,k_n_per_m,re_r,im_r,R_n`; sweeps
/// prepend the swept parameter (failed points keep a row with empty
/// fields); badlands runs emit `y_m,B`; validation runs one row per check.
pub fn to_csv(rec: &ResultRecord) -> String {
    let mut out = String::new();
    if let Some(v) = &rec.validation {
        out.push_str("check,passed,measured,limit\n");
        for c in &v.checks {
            writeln!(out, "{},{},{},{}", c.name, c.passed, num(c.measured), num(c.limit)).unwrap();
        }
    } else if let Some(b) = &rec.badlands {
        out.push_str("y_m,B\n");
        for (y, v) in b.y_m.iter().zip(&b.b) {
            writeln!(out, "{},{}", num(*y), num(*v)).unwrap();
        }
    } else if !rec.points.is_empty() {
        let axis = rec.config.sweep.as_ref().map_or("value", |s| s.axis.name());
        writeln!(out, "{axis},n,k_n_per_m,re_r,im_r,R_n").unwrap();
        for p in &rec.points {
            let v = num(p.sweep_value.unwrap_or(f64::NAN));
            if p.error.is_some() {
                writeln!(out, "{v},,,,,").unwrap();
            } else {
                push_rows(&mut out, &format!("{v},"), &p.table);
            }
        }
    } else {
        out.push_str("n,k_n_per_m,re_r,im_r,R_n\n");
        push_rows(&mut out, "", &rec.table);
    }
    out
}

pub fn to_json(rec: &ResultRecord) -> String {
    let mut s = serde_json::to_string_pretty(rec).expect("record serializes");
    s.push('\n');
    s
}
