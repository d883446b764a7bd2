//! Reference pattern tables and their rendering.
//!
//! Each embedded table lists the `(f_U, f_S⁽⁰⁾, f_S⁽¹⁾)` realizations with
//! `π = (0, 1, 2)` for the request `W = 1`, `S = {2}`. Query and answer
//! columns are not stored; they follow from the pattern. One table is
//! partial (its source elides rows), so it is checked as a subset.

use std::collections::BTreeSet;
use std::fmt;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{RandomPattern, RetrievalRequest};
use crate::params::{SchemeParams, Variant};
use crate::retrieval::build_queries;
use crate::schemes::{pattern_support, PatternShape};
use crate::Rational;

const SOURCES: [(&str, &str); 4] = [
    ("table1", include_str!("../../fixtures/table1_w_3_3_1.txt")),
    ("table2", include_str!("../../fixtures/table2_ws_3_3_1.txt")),
    ("table3", include_str!("../../fixtures/table3_w_3_4_1.txt")),
    ("table4", include_str!("../../fixtures/table4_ws_3_4_1.txt")),
];

/// One pattern row, each vector in request order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PatternRow {
    pub f_u: Vec<usize>,
    pub f_s0: Vec<usize>,
    pub f_s1: Vec<usize>,
}

impl PatternRow {
    pub fn from_pattern(p: &RandomPattern) -> Self {
        Self {
            f_u: p.f_u().values().copied().collect(),
            f_s0: p.f_s0().values().copied().collect(),
            f_s1: p.f_s1().values().copied().collect(),
        }
    }
}

fn digits(v: &[usize]) -> String {
    if v.is_empty() {
        return "-".into();
    }
    v.iter().map(usize::to_string).collect()
}

impl fmt::Display for PatternRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", digits(&self.f_u), digits(&self.f_s0), digits(&self.f_s1))
    }
}

fn parse_digits(tok: &str) -> Option<Vec<usize>> {
    if tok == "-" {
        return Some(Vec::new());
    }
    tok.chars().map(|c| c.to_digit(10).map(|d| d as usize)).collect()
}

#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub variant: Variant,
    pub servers: usize,
    pub messages: usize,
    pub side_info: usize,
    /// `false` when the source lists only some rows.
    pub complete: bool,
    pub rows: BTreeSet<PatternRow>,
}

fn parse_fixture(name: &'static str, text: &str) -> Result<Fixture> {
    let bad = |what: &str| Error::Validation(format!("fixture {name}: {what}"));
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| bad("missing header"))?;
    let mut variant = None;
    let (mut n, mut k, mut m, mut complete) = (None, None, None, None);
    for kv in header.split_whitespace() {
        let (key, value) = kv.split_once('=').ok_or_else(|| bad("header is not key=value"))?;
        match key {
            "variant" => variant = Some(value.parse::<Variant>()?),
            "n" => n = value.parse().ok(),
            "k" => k = value.parse().ok(),
            "m" => m = value.parse().ok(),
            "complete" => complete = value.parse().ok(),
            _ => return Err(bad(&format!("unknown header key {key}"))),
        }
    }
    let mut rows = BTreeSet::new();
    for line in lines {
        let cols: Vec<&str> = line.split_whitespace().collect();
        let [u, s0, s1] = cols[..] else {
            return Err(bad(&format!("row {line:?} does not have three columns")));
        };
        let row = PatternRow {
            f_u: parse_digits(u).ok_or_else(|| bad(line))?,
            f_s0: parse_digits(s0).ok_or_else(|| bad(line))?,
            f_s1: parse_digits(s1).ok_or_else(|| bad(line))?,
        };
        rows.insert(row);
    }
    Ok(Fixture {
        name,
        variant: variant.ok_or_else(|| bad("missing variant"))?,
        servers: n.ok_or_else(|| bad("missing n"))?,
        messages: k.ok_or_else(|| bad("missing k"))?,
        side_info: m.ok_or_else(|| bad("missing m"))?,
        complete: complete.ok_or_else(|| bad("missing complete"))?,
        rows,
    })
}

pub fn fixtures() -> Vec<Fixture> {
    SOURCES.iter().map(|(name, text)| parse_fixture(name, text).expect("embedded fixtures are well formed")).collect()
}

pub fn find_fixture(servers: usize, messages: usize, side_info: usize, variant: Variant) -> Option<Fixture> {
    fixtures()
        .into_iter()
        .find(|f| (f.servers, f.messages, f.side_info, f.variant) == (servers, messages, side_info, variant))
}

/// The request the tables use: `W = 1`, `S = {2, ..., M+1}`.
pub fn table_request(messages: usize, side_info: usize) -> Result<RetrievalRequest> {
    RetrievalRequest::new(1, 2..=side_info + 1, messages)
}

#[derive(Clone, Debug)]
pub struct TableRow {
    pub pattern: RandomPattern,
    pub row: PatternRow,
    pub shape: PatternShape,
    /// Joint probability, including the `1/N!` for the fixed `π`.
    pub probability: Rational,
}

/// Every realization with the given `π`, in the table's row order.
pub fn table_rows(params: &SchemeParams, perm: &[usize]) -> Result<Vec<TableRow>> {
    let req = table_request(params.messages(), params.side_info())?;
    let weight = |v: &[usize]| v.iter().filter(|&&x| x != 0).count();
    let mut rows: Vec<TableRow> = pattern_support(params, &req, Some(perm))?
        .into_iter()
        .map(|(pattern, probability)| {
            let row = PatternRow::from_pattern(&pattern);
            let shape =
                PatternShape { u_weight: weight(&row.f_u), s0_weight: weight(&row.f_s0), s1_weight: weight(&row.f_s1) };
            TableRow { pattern, row, shape, probability }
        })
        .collect();
    rows.sort_by(|a, b| a.row.cmp(&b.row));
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixtureCheck {
    pub missing: Vec<PatternRow>,
    /// Rows enumerated but absent from a complete fixture.
    pub extra: Vec<PatternRow>,
}

impl FixtureCheck {
    pub fn passed(&self) -> bool {
        self.missing.is_empty() && self.extra.is_empty()
    }
}

pub fn check_fixture(fixture: &Fixture, rows: &[TableRow]) -> FixtureCheck {
    let got: BTreeSet<PatternRow> = rows.iter().map(|r| r.row.clone()).collect();
    FixtureCheck {
        missing: fixture.rows.difference(&got).cloned().collect(),
        extra: if fixture.complete { got.difference(&fixture.rows).cloned().collect() } else { Vec::new() },
    }
}

fn symbolic_answer(indices: &[usize]) -> String {
    let terms: Vec<String> =
        indices.iter().enumerate().filter(|(_, &j)| j != 0).map(|(i, j)| format!("X{}[{j}]", i + 1)).collect();
    if terms.is_empty() {
        "∅".into()
    } else {
        terms.join("+")
    }
}

/// Plain-text table: pattern columns, each server's query and symbolic
/// answer, and the joint probability.
pub fn render_table(params: &SchemeParams, perm: &[usize], rows: &[TableRow]) -> Result<String> {
    let req = table_request(params.messages(), params.side_info())?;
    let mut header = vec!["f_U".to_string(), "f_S0".into(), "f_S1".into()];
    for n in 1..=params.servers() {
        header.push(format!("q{n}"));
        header.push(format!("a{n}"));
    }
    header.push("prob".into());
    let mut body: Vec<Vec<String>> = Vec::new();
    for r in rows {
        let mut cells = vec![digits(&r.row.f_u), digits(&r.row.f_s0), digits(&r.row.f_s1)];
        for q in build_queries(&r.pattern, &req, params)? {
            cells.push(q.to_string());
            cells.push(symbolic_answer(q.indices()));
        }
        cells.push(r.probability.to_string());
        body.push(cells);
    }
    let widths: Vec<usize> = (0..header.len())
        .map(|c| std::iter::once(&header).chain(&body).map(|row| row[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    let perm_s: Vec<String> = perm.iter().map(usize::to_string).collect();
    writeln!(
        out,
        "(N, K, M) = ({}, {}, {}), variant {}, t = {}, W = 1, S = {:?}, pi = ({})",
        params.servers(),
        params.messages(),
        params.side_info(),
        params.variant(),
        params.t(),
        req.side(),
        perm_s.join(", ")
    )
    .expect("writing to a String");
    for row in std::iter::once(&header).chain(&body) {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, &w)| format!("{cell}{}", " ".repeat(w - cell.chars().count())))
            .collect();
        writeln!(out, "{}", line.join("  ").trim_end()).expect("writing to a String");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;
    use num_traits::One;

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn embedded_fixtures_parse() {
        let fx = fixtures();
        assert_eq!(fx.len(), 4);
        let sizes: Vec<usize> = fx.iter().map(|f| f.rows.len()).collect();
        assert_eq!(sizes, vec![10, 14, 10, 27]);
        assert!(find_fixture(3, 4, 1, Variant::WsPrivacy).is_some_and(|f| !f.complete));
        assert!(find_fixture(4, 4, 1, Variant::WPrivacy).is_none());
    }

    #[test]
    fn all_fixtures_match_enumeration() {
        for fixture in fixtures() {
            let p = SchemeParams::new(
                fixture.servers,
                fixture.messages,
                fixture.side_info,
                rat(1, 1),
                PrimeField::default(),
                fixture.variant,
            )
            .unwrap();
            let rows = table_rows(&p, &[0, 1, 2]).unwrap();
            let check = check_fixture(&fixture, &rows);
            assert!(check.passed(), "{}: {check:?}", fixture.name);
        }
    }

    #[test]
    fn partial_fixture_full_support_size() {
        let p = SchemeParams::new(3, 4, 1, rat(1, 1), PrimeField::default(), Variant::WsPrivacy).unwrap();
        assert_eq!(table_rows(&p, &[0, 1, 2]).unwrap().len(), 62);
    }

    #[test]
    fn table_one_rows_sum_to_group_totals() {
        let t = rat(1, 3);
        let p = SchemeParams::new(3, 3, 1, t.clone(), PrimeField::default(), Variant::WPrivacy).unwrap();
        let rows = table_rows(&p, &[0, 1, 2]).unwrap();
        let p0 = Rational::one() / (&t + Rational::one());
        let p1 = &t / (&t + Rational::one());
        let total = |w: usize| -> Rational {
            rows.iter().filter(|r| r.shape.u_weight == w).map(|r| r.probability.clone()).sum()
        };
        assert_eq!(total(0), &p0 / rat(6, 1));
        assert_eq!(total(1), &p1 / rat(6, 1));
    }

    #[test]
    fn rendering_mentions_every_row() {
        let p = SchemeParams::perfect(3, 3, 1, Variant::WPrivacy).unwrap();
        let rows = table_rows(&p, &[0, 1, 2]).unwrap();
        let text = render_table(&p, &[0, 1, 2], &rows).unwrap();
        assert_eq!(text.lines().count(), 12);
        assert!(text.contains("X1[1]+X2[1]+X3[1]"));
        assert!(text.contains("∅"));
    }
}
