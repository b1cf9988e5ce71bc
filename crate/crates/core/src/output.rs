//! Text formats shared by the `bmc` binary and the examples.
//!
//! Scalars print with 9 significant digits in the style of C's `%.9g`;
//! divergent values print as `inf`. Matrices dump at full precision.

use std::io::{self, Write};

use nalgebra::DMatrix;
use serde_json::{json, Value};

use crate::capacity::CapacityBounds;
use crate::error::Result;
use crate::forgetful::DecayReport;
use crate::model::ChannelParams;
use crate::spectra::{gram_spectrum, AsymptoticSymbol, FitReport};

/// Number of symbol samples in a spectrum dump (at least).
pub const SYMBOL_SAMPLES: usize = 512;

/// `%.9g`.
pub fn fmt_sig9(v: f64) -> String {
    fmt_general(v, 9)
}

fn fmt_general(v: f64, digits: usize) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, v)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A JSON number rounded to 9 significant digits, or the string `"inf"`.
pub fn json_number(v: f64) -> Value {
    if v.is_finite() {
        json!(fmt_sig9(v).parse::<f64>().expect("formatted float parses"))
    } else {
        json!(fmt_sig9(v))
    }
}

/// Row-major CSV at 17 significant digits, enough to round-trip every entry.
pub fn write_matrix_csv<W: Write>(out: &mut W, m: &DMatrix<f64>) -> io::Result<()> {
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:.16e}", m[(i, j)])).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Sorted eigenvalues of `M` next to samples of the symbol.
///
/// Columns `j,eta,z,eta_z`; the shorter of the two series leaves its cells
/// blank.
pub fn spectrum_csv(params: &ChannelParams) -> Result<String> {
    let eta = gram_spectrum(params)?;
    let symbol = AsymptoticSymbol::new(params.mu(), params.kappa())?;
    let rows = eta.len().max(SYMBOL_SAMPLES);
    let mut s = String::from("j,eta,z,eta_z\n");
    for i in 0..rows {
        let (j, e) = match eta.get(i) {
            Some(&e) => ((i + 1).to_string(), fmt_sig9(e)),
            None => (String::new(), String::new()),
        };
        let (z, ez) = if i < SYMBOL_SAMPLES {
            let z = 2.0 * std::f64::consts::PI * i as f64 / (SYMBOL_SAMPLES - 1) as f64;
            (fmt_sig9(z), fmt_sig9(symbol.eval(z)))
        } else {
            (String::new(), String::new())
        };
        s.push_str(&format!("{j},{e},{z},{ez}\n"));
    }
    Ok(s)
}

/// Spectrum as JSON: `{"mu", "kappa", "n", "eta": [...]}`.
pub fn spectrum_json(params: &ChannelParams) -> Result<String> {
    let eta = gram_spectrum(params)?;
    let v = json!({
        "mu": json_number(params.mu()),
        "kappa": json_number(params.kappa()),
        "n": params.n(),
        "eta": eta.iter().map(|&e| json_number(e)).collect::<Vec<_>>(),
    });
    Ok(format!("{v}\n"))
}

/// One JSON object per line: `{"n", "delta_mean", "delta_var", "fitted_rate"}`.
pub fn decay_json_lines(report: &DecayReport) -> String {
    report
        .rows
        .iter()
        .map(|r| {
            let rate = r.fitted_rate.map(json_number).unwrap_or(Value::Null);
            format!(
                "{}\n",
                json!({
                    "n": r.n,
                    "delta_mean": json_number(r.delta_mean),
                    "delta_var": json_number(r.delta_var),
                    "fitted_rate": rate,
                })
            )
        })
        .collect()
}

/// One JSON object per line: `{"n", "ks_distance", "trimmed_count"}`.
pub fn fit_json_lines(report: &FitReport) -> String {
    report
        .rows
        .iter()
        .map(|r| {
            format!(
                "{}\n",
                json!({
                    "n": r.n,
                    "ks_distance": json_number(r.ks_distance),
                    "trimmed_count": r.trimmed_count,
                })
            )
        })
        .collect()
}

/// Bounds at one block count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsRow {
    pub blocks: usize,
    pub quantum: CapacityBounds,
    pub classical: Option<CapacityBounds>,
}

pub fn bounds_json(rows: &[BoundsRow]) -> String {
    let pack = |b: &CapacityBounds| {
        json!({"lower": json_number(b.lower), "upper": json_number(b.upper), "converged": b.converged})
    };
    let table: Vec<Value> = rows
        .iter()
        .map(|r| {
            let mut v = json!({"P": r.blocks, "quantum": pack(&r.quantum)});
            if let Some(c) = &r.classical {
                v["classical"] = pack(c);
            }
            v
        })
        .collect();
    let mut v = json!({ "rows": table });
    if rows.iter().any(|r| !r.quantum.converged) {
        v["warning"] = json!("n schedule too short: bounds not converged");
    }
    format!("{v}\n")
}

/// Columns `P,quantity,lower,upper,converged`.
pub fn bounds_csv(rows: &[BoundsRow]) -> String {
    let mut s = String::from("P,quantity,lower,upper,converged\n");
    for r in rows {
        let mut line = |name: &str, b: &CapacityBounds| {
            s.push_str(&format!(
                "{},{name},{},{},{}\n",
                r.blocks,
                fmt_sig9(b.lower),
                fmt_sig9(b.upper),
                b.converged
            ));
        };
        line("q", &r.quantum);
        if let Some(c) = &r.classical {
            line("c", c);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig9_matches_printf() {
        let cases = [
            (1.584962500721156, "1.5849625"),
            (0.0, "0"),
            (4.529325012980809, "4.52932501"),
            (1e-5, "1e-05"),
            (0.0001234, "0.0001234"),
            (123456789.0, "123456789"),
            (1234567890.0, "1.23456789e+09"),
            (-2.5, "-2.5"),
            (9.9999999999, "10"),
            (f64::INFINITY, "inf"),
            (0.25f64.powi(5), "0.0009765625"),
            (3.0e-300, "3e-300"),
        ];
        for (v, want) in cases {
            assert_eq!(fmt_sig9(v), want, "{v}");
        }
    }

    #[test]
    fn json_numbers() {
        assert_eq!(json_number(f64::INFINITY), json!("inf"));
        assert_eq!(json_number(1.0 / 3.0).to_string(), "0.333333333");
    }

    #[test]
    fn matrix_round_trips() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0 / 3.0, -0.1, 2.0f64.sqrt(), 1e-300]);
        let mut buf = Vec::new();
        write_matrix_csv(&mut buf, &m).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let back: Vec<f64> = text.split(|c| c == ',' || c == '\n').filter(|s| !s.is_empty()).map(|s| s.parse().unwrap()).collect();
        assert_eq!(back, vec![1.0 / 3.0, -0.1, 2.0f64.sqrt(), 1e-300]);
    }

    #[test]
    fn spectrum_dump_shape() {
        let p = ChannelParams::new(0.0, 0.5, 4).unwrap();
        let csv = spectrum_csv(&p).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "j,eta,z,eta_z");
        assert_eq!(lines.len(), 1 + SYMBOL_SAMPLES);
        assert_eq!(lines[1], "1,0.5,0,0.5");
        assert!(lines[5].starts_with(",,"));
    }
}
