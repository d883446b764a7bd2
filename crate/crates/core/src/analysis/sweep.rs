//! Parameter sweeps: exact and measured cost, certified leakage and the
//! leakage-exponent bound at each grid point, written as CSV.

use std::io::{self, Write};

use log::info;

use crate::error::Result;
use crate::field::PrimeField;
use crate::params::{rational_to_f64, SchemeParams, Variant};
use crate::schemes::leakage_exponent_bound;
use crate::Rational;

use super::cost::{estimate_download_cost, exact_download_cost, CostEstimate};
use super::leakage::{max_leakage_ratio, Ratio};

pub const CSV_HEADER: &str =
    "n,k,m,t,epsilon,exact_cost,measured_cost,measured_stderr,max_ratio,certified_epsilon,certified,epsilon_bound,error";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepPoint {
    pub servers: usize,
    pub messages: usize,
    pub side_info: usize,
    pub t: Rational,
}

#[derive(Clone, Debug, Default)]
pub struct SweepOptions {
    /// Monte Carlo trials per point; 0 skips the measurement.
    pub trials: usize,
    pub seed: u64,
    /// Run the exact leakage enumeration (skipped with a note when infeasible).
    pub certify: bool,
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub point: SweepPoint,
    pub epsilon: f64,
    pub exact_cost: Option<Rational>,
    pub measured: Option<CostEstimate>,
    pub max_ratio: Option<Ratio>,
    pub certified: Option<bool>,
    pub epsilon_bound: Option<f64>,
    pub errors: Vec<String>,
}

impl SweepRow {
    /// `ln` of the certified maximum ratio.
    pub fn certified_epsilon(&self) -> Option<f64> {
        self.max_ratio.as_ref().map(Ratio::ln)
    }
}

/// Cartesian product in the order n, k, m, t; points with `M >= K` are skipped.
pub fn grid(servers: &[usize], messages: &[usize], side_info: &[usize], ts: &[Rational]) -> Vec<SweepPoint> {
    let mut out = Vec::new();
    for &n in servers {
        for &k in messages {
            for &m in side_info {
                if m >= k {
                    continue;
                }
                for t in ts {
                    out.push(SweepPoint { servers: n, messages: k, side_info: m, t: t.clone() });
                }
            }
        }
    }
    out
}

fn evaluate(point: &SweepPoint, variant: Variant, field: PrimeField, opts: &SweepOptions) -> SweepRow {
    let mut row = SweepRow {
        point: point.clone(),
        epsilon: -rational_to_f64(&point.t).ln(),
        exact_cost: None,
        measured: None,
        max_ratio: None,
        certified: None,
        epsilon_bound: None,
        errors: Vec::new(),
    };
    let params =
        match SchemeParams::new(point.servers, point.messages, point.side_info, point.t.clone(), field, variant) {
            Ok(p) => p,
            Err(e) => {
                row.errors.push(e.to_string());
                return row;
            }
        };
    match exact_download_cost(&params) {
        Ok(c) => {
            match leakage_exponent_bound(variant, rational_to_f64(&c), &params) {
                Ok(b) => row.epsilon_bound = Some(b),
                Err(e) => row.errors.push(format!("bound: {e}")),
            }
            row.exact_cost = Some(c);
        }
        Err(e) => row.errors.push(format!("exact cost: {e}")),
    }
    if opts.trials > 0 {
        match estimate_download_cost(&params, opts.trials, opts.seed) {
            Ok(m) => row.measured = Some(m),
            Err(e) => row.errors.push(format!("measured cost: {e}")),
        }
    }
    if opts.certify {
        match max_leakage_ratio(&params) {
            Ok(report) => {
                row.certified = Some(report.certified);
                row.max_ratio = Some(report.max_ratio);
            }
            Err(e) => row.errors.push(format!("leakage: {e}")),
        }
    }
    row
}

/// Evaluates every point; a failing point records its errors and the sweep
/// moves on.
pub fn sweep(points: &[SweepPoint], variant: Variant, field: PrimeField, opts: &SweepOptions) -> Vec<SweepRow> {
    points
        .iter()
        .map(|p| {
            info!("sweep point N={} K={} M={} t={}", p.servers, p.messages, p.side_info, p.t);
            evaluate(p, variant, field, opts)
        })
        .collect()
}

/// 12 significant digits, `inf`/`-inf` for infinities.
pub fn format_real(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = 11 - x.abs().log10().floor() as i32;
    let s = format!("{:.*}", digits.max(0) as usize, x);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn write_csv<W: Write>(rows: &[SweepRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    let opt = |x: Option<f64>| x.map(format_real).unwrap_or_default();
    for r in rows {
        let fields = [
            r.point.servers.to_string(),
            r.point.messages.to_string(),
            r.point.side_info.to_string(),
            r.point.t.to_string(),
            format_real(r.epsilon),
            opt(r.exact_cost.as_ref().map(rational_to_f64)),
            opt(r.measured.map(|m| m.mean)),
            opt(r.measured.map(|m| m.stderr)),
            r.max_ratio.as_ref().map(Ratio::to_string).unwrap_or_default(),
            opt(r.certified_epsilon()),
            r.certified.map(|c| c.to_string()).unwrap_or_default(),
            opt(r.epsilon_bound),
            r.errors.join("; "),
        ];
        let line: Vec<String> = fields.iter().map(|f| csv_field(f)).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn sweep_to_csv<W: Write>(
    points: &[SweepPoint],
    variant: Variant,
    field: PrimeField,
    opts: &SweepOptions,
    out: W,
) -> Result<Vec<SweepRow>> {
    let rows = sweep(points, variant, field, opts);
    write_csv(&rows, out)?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::{reference_cost_exact, CostModel};

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn empty_grid_is_header_only() {
        let mut buf = Vec::new();
        sweep_to_csv(&[], Variant::WPrivacy, PrimeField::default(), &SweepOptions::default(), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn cost_column_matches_closed_form() {
        let ks: Vec<usize> = (3..=8).collect();
        let points = grid(&[3], &ks, &[1], &[rat(1, 2), rat(1, 1)]);
        assert_eq!(points.len(), 12);
        let opts = SweepOptions { certify: true, ..Default::default() };
        let rows = sweep(&points, Variant::WPrivacy, PrimeField::default(), &opts);
        for row in &rows {
            let p = SchemeParams::new(
                3,
                row.point.messages,
                1,
                row.point.t.clone(),
                PrimeField::default(),
                Variant::WPrivacy,
            )
            .unwrap();
            assert_eq!(row.exact_cost.clone().unwrap(), reference_cost_exact(CostModel::LeakyPirSiW, &p).unwrap());
            if row.point.t == rat(1, 1) {
                assert_eq!(
                    row.exact_cost.clone().unwrap(),
                    reference_cost_exact(CostModel::PirSiWUpperBound, &p).unwrap()
                );
            }
            assert_eq!(row.certified, Some(true));
            if let (Some(eps), Some(bound)) = (row.certified_epsilon(), row.epsilon_bound) {
                assert!(eps <= bound + 1e-9, "{row:?}");
            }
        }
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 13);
    }

    #[test]
    fn errors_are_recorded_per_row() {
        let points = grid(&[3], &[3, 4], &[1, 2], &[rat(1, 4)]);
        let rows = sweep(
            &points,
            Variant::WsPrivacy,
            PrimeField::default(),
            &SweepOptions { trials: 10, seed: 1, certify: true },
        );
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| !r.errors.is_empty()));
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 5);
    }

    #[test]
    fn real_formatting() {
        assert_eq!(format_real(1.25), "1.25");
        assert_eq!(format_real(4.0 / 3.0), "1.33333333333");
        assert_eq!(format_real(f64::NEG_INFINITY), "-inf");
        assert_eq!(format_real(0.0), "0");
        assert_eq!(format_real(std::f64::consts::LN_2), "0.69314718056");
        assert_eq!(format_real(1234.5), "1234.5");
    }
}
