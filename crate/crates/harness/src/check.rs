//! Machine-readable acceptance criteria evaluated against a result bundle.
//!
//! Every rule reports a signed margin: how far the worst selected value sits
//! inside (positive) or outside (negative) its allowed region.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bundle::{verify, Bundle};
use crate::error::{HarnessError, Result};
use crate::exec::Row;

/// Values compare equal within this tolerance when filtering on numbers.
const MATCH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Column {
    Scenario,
    Observable,
    #[serde(rename = "h_e")]
    HE,
    Lambda,
    Dt,
    Site,
    T,
    Value,
    Stderr,
    Stage,
}

enum Cell<'a> {
    Num(f64),
    Str(&'a str),
}

impl Column {
    fn get(self, r: &Row) -> Cell<'_> {
        match self {
            Column::Scenario => Cell::Str(&r.scenario),
            Column::Observable => Cell::Str(&r.observable),
            Column::HE => Cell::Num(r.h_e),
            Column::Lambda => Cell::Num(r.lambda),
            Column::Dt => Cell::Num(r.dt),
            Column::Site => Cell::Str(&r.site),
            Column::T => Cell::Num(r.t),
            Column::Value => Cell::Num(r.value),
            Column::Stderr => Cell::Num(r.stderr),
            Column::Stage => Cell::Str(&r.stage),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Column::Scenario => "scenario",
            Column::Observable => "observable",
            Column::HE => "h_e",
            Column::Lambda => "lambda",
            Column::Dt => "dt",
            Column::Site => "site",
            Column::T => "t",
            Column::Value => "value",
            Column::Stderr => "stderr",
            Column::Stage => "stage",
        }
    }
}

/// Column → condition. A number or string matches by equality, a list
/// matches any of its elements, and `{"min": a, "max": b}` is a closed range.
pub type Filter = BTreeMap<Column, Value>;

fn matches_value(cell: &Cell<'_>, cond: &Value) -> Result<bool> {
    Ok(match (cell, cond) {
        (Cell::Num(x), Value::Number(n)) => (x - n.as_f64().unwrap_or(f64::NAN)).abs() <= MATCH_TOL,
        (Cell::Str(s), Value::String(c)) => s == c,
        (_, Value::Array(items)) => {
            for i in items {
                if matches_value(cell, i)? {
                    return Ok(true);
                }
            }
            false
        }
        (Cell::Num(x), Value::Object(o)) => {
            for k in o.keys() {
                if k != "min" && k != "max" {
                    return Err(HarnessError::Criteria(format!("unknown range key '{k}'")));
                }
            }
            let lo = o.get("min").and_then(Value::as_f64).unwrap_or(f64::NEG_INFINITY);
            let hi = o.get("max").and_then(Value::as_f64).unwrap_or(f64::INFINITY);
            *x >= lo - MATCH_TOL && *x <= hi + MATCH_TOL
        }
        (Cell::Num(_), Value::String(_)) | (Cell::Str(_), Value::Number(_)) => false,
        (_, c) => return Err(HarnessError::Criteria(format!("unsupported filter condition {c}"))),
    })
}

fn matches(row: &Row, filter: &Filter) -> Result<bool> {
    for (col, cond) in filter {
        if !matches_value(&col.get(row), cond)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Selection {
    pub observable: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub filter: Filter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregate {
    /// Every selected value must lie in bounds.
    #[default]
    Each,
    Mean,
    Min,
    Max,
    AbsMax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Rule {
    ColumnBound {
        select: Selection,
        #[serde(default)]
        aggregate: Aggregate,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        min: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max: Option<f64>,
    },
    /// Within each group, `max − min ≤ tol`.
    ColumnConstant {
        select: Selection,
        #[serde(default)]
        group_by: Vec<Column>,
        tol: f64,
    },
    /// `|a − b| ≤ tol` for rows paired on the `join` columns.
    CompareColumns {
        a: Selection,
        b: Selection,
        join: Vec<Column>,
        tol: f64,
    },
    /// At each `join` key, `value(chain[i]) ≤ value(chain[i+1]) + tol`.
    Ordering {
        select: Selection,
        join: Vec<Column>,
        chain: Vec<Filter>,
        #[serde(default)]
        tol: f64,
    },
    /// Within each group, the maximum over `over` is interior and lies in `[min, max]`.
    Argmax {
        select: Selection,
        over: Column,
        #[serde(default)]
        group_by: Vec<Column>,
        min: f64,
        max: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Criterion {
    pub id: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub rule: Rule,
}

impl Criterion {
    pub fn new(id: &str, description: &str, rule: Rule) -> Self {
        Self {
            id: id.into(),
            description: description.into(),
            rule,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriteriaFile {
    pub criteria: Vec<Criterion>,
}

impl CriteriaFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| HarnessError::Criteria(e.to_string()))
    }
}

/// Selection shorthand used by the scenario defaults.
pub fn sel(observable: &str, filter: &[(Column, Value)]) -> Selection {
    Selection {
        observable: observable.into(),
        filter: filter.iter().cloned().collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub id: String,
    pub pass: bool,
    pub margin: f64,
    pub detail: String,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} margin={:+.3e} {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.margin,
            self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub outcomes: Vec<Outcome>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.pass)
    }
}

fn describe(r: &Row) -> String {
    let mut s = format!("h_e={} lambda={} dt={} t={}", r.h_e, r.lambda, r.dt, r.t);
    if !r.site.is_empty() {
        s += &format!(" site={}", r.site);
    }
    s + &format!(" stage={}", r.stage)
}

fn key(r: &Row, cols: &[Column]) -> String {
    cols.iter()
        .map(|c| match c.get(r) {
            Cell::Num(x) => format!("{}={}", c.name(), x),
            Cell::Str(s) => format!("{}={}", c.name(), s),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn select<'a>(data: &'a BTreeMap<String, Vec<Row>>, s: &Selection) -> Result<Vec<&'a Row>> {
    let rows = data
        .get(&s.observable)
        .ok_or_else(|| HarnessError::Criteria(format!("missing observable '{}'", s.observable)))?;
    let mut out = Vec::new();
    for r in rows {
        if matches(r, &s.filter)? {
            out.push(r);
        }
    }
    if out.is_empty() {
        return Err(HarnessError::Criteria(format!("no '{}' rows match {:?}", s.observable, s.filter)));
    }
    Ok(out)
}

fn grouped<'a>(rows: &[&'a Row], by: &[Column]) -> Vec<(String, Vec<&'a Row>)> {
    let mut groups: Vec<(String, Vec<&Row>)> = Vec::new();
    for r in rows {
        let k = key(r, by);
        match groups.iter_mut().find(|g| g.0 == k) {
            Some(g) => g.1.push(r),
            None => groups.push((k, vec![r])),
        }
    }
    groups
}

fn bound_margin(x: f64, min: Option<f64>, max: Option<f64>) -> f64 {
    if x.is_nan() {
        return f64::NEG_INFINITY;
    }
    let lo = min.map_or(f64::INFINITY, |m| x - m);
    let hi = max.map_or(f64::INFINITY, |m| m - x);
    lo.min(hi)
}

/// Evaluate one rule. Errors (missing observable, empty selection) are
/// reported by the caller as failures.
pub fn evaluate(rule: &Rule, data: &BTreeMap<String, Vec<Row>>) -> Result<(f64, String)> {
    match rule {
        Rule::ColumnBound { select: s, aggregate, min, max } => {
            if min.is_none() && max.is_none() {
                return Err(HarnessError::Criteria("column_bound needs min or max".into()));
            }
            let rows = select(data, s)?;
            let vals = rows.iter().map(|r| r.value);
            let agg = |x: f64, what: &str| (bound_margin(x, *min, *max), format!("{what} {x:.6e} over {} rows", rows.len()));
            Ok(match aggregate {
                Aggregate::Each => {
                    let (worst, m) = rows
                        .iter()
                        .map(|r| (r, bound_margin(r.value, *min, *max)))
                        .min_by(|a, b| a.1.total_cmp(&b.1))
                        .expect("non-empty");
                    (m, format!("worst {:.6e} at {} ({} rows)", worst.value, describe(worst), rows.len()))
                }
                Aggregate::Mean => agg(vals.sum::<f64>() / rows.len() as f64, "mean"),
                Aggregate::Min => agg(vals.fold(f64::INFINITY, f64::min), "min"),
                Aggregate::Max => agg(vals.fold(f64::NEG_INFINITY, f64::max), "max"),
                Aggregate::AbsMax => {
                    let worst = rows.iter().max_by(|a, b| a.value.abs().total_cmp(&b.value.abs())).expect("non-empty");
                    let (m, _) = agg(worst.value.abs(), "");
                    (m, format!("max |value| {:.6e} at {} ({} rows)", worst.value.abs(), describe(worst), rows.len()))
                }
            })
        }
        Rule::ColumnConstant { select: s, group_by, tol } => {
            let rows = select(data, s)?;
            let mut worst = (f64::NEG_INFINITY, String::new());
            for (k, g) in grouped(&rows, group_by) {
                let lo = g.iter().map(|r| r.value).fold(f64::INFINITY, f64::min);
                let hi = g.iter().map(|r| r.value).fold(f64::NEG_INFINITY, f64::max);
                let spread = if g.iter().any(|r| r.value.is_nan()) { f64::INFINITY } else { hi - lo };
                if spread > worst.0 {
                    worst = (spread, k);
                }
            }
            Ok((tol - worst.0, format!("max spread {:.3e} in group [{}]", worst.0, worst.1)))
        }
        Rule::CompareColumns { a, b, join, tol } => {
            let ra = select(data, a)?;
            let rb = select(data, b)?;
            let index: BTreeMap<String, &Row> = rb.iter().map(|r| (key(r, join), *r)).collect();
            let mut worst: (f64, String) = (f64::NEG_INFINITY, String::new());
            for r in ra {
                let k = key(r, join);
                let other = index
                    .get(&k)
                    .ok_or_else(|| HarnessError::Criteria(format!("no '{}' row pairs with [{k}]", b.observable)))?;
                let d = (r.value - other.value).abs();
                let d = if d.is_nan() { f64::INFINITY } else { d };
                if d > worst.0 {
                    worst = (d, k);
                }
            }
            Ok((tol - worst.0, format!("max |a - b| {:.3e} at [{}]", worst.0, worst.1)))
        }
        Rule::Ordering { select: s, join, chain, tol } => {
            if chain.len() < 2 {
                return Err(HarnessError::Criteria("ordering needs a chain of at least two filters".into()));
            }
            let rows = select(data, s)?;
            let mut links: Vec<Vec<&Row>> = Vec::new();
            for f in chain {
                let mut v = Vec::new();
                for r in &rows {
                    if matches(r, f)? {
                        v.push(*r);
                    }
                }
                if v.is_empty() {
                    return Err(HarnessError::Criteria(format!("ordering link {f:?} selects no rows")));
                }
                links.push(v);
            }
            let mut worst = (f64::INFINITY, String::new());
            for r in &links[0] {
                let k = key(r, join);
                let mut prev = r.value;
                for (i, l) in links.iter().enumerate().skip(1) {
                    let next = l
                        .iter()
                        .find(|x| key(x, join) == k)
                        .ok_or_else(|| HarnessError::Criteria(format!("ordering link {i} has no row at [{k}]")))?;
                    let m = next.value + tol - prev;
                    let m = if m.is_nan() { f64::NEG_INFINITY } else { m };
                    if m < worst.0 {
                        worst = (m, format!("link {i} at [{k}]: {prev:.6e} then {:.6e}", next.value));
                    }
                    prev = next.value;
                }
            }
            Ok(worst)
        }
        Rule::Argmax { select: s, over, group_by, min, max } => {
            let rows = select(data, s)?;
            let mut worst = (f64::INFINITY, String::new());
            for (k, mut g) in grouped(&rows, group_by) {
                let pos = |r: &Row| match over.get(r) {
                    Cell::Num(x) => x,
                    Cell::Str(_) => f64::NAN,
                };
                g.sort_by(|a, b| pos(a).total_cmp(&pos(b)));
                let (i, best) = g
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.value.total_cmp(&b.1.value))
                    .expect("non-empty group");
                let x = pos(best);
                let interior = i > 0 && i + 1 < g.len();
                let m = if interior { (x - min).min(max - x) } else { -(x - min).abs().min((max - x).abs()) - 1.0 };
                if m < worst.0 {
                    let edge = if interior { "" } else { " (at the grid edge)" };
                    worst = (m, format!("argmax {}={x}{edge} in [{k}]", over.name()));
                }
            }
            Ok(worst)
        }
    }
}

/// Verify the bundle against its manifest, then evaluate every criterion.
pub fn check_bundle(dir: &Path, criteria: &CriteriaFile) -> Result<Report> {
    let bundle = Bundle::load(dir)?;
    let mut outcomes = Vec::new();
    let problems = verify(dir, &bundle.manifest)?;
    outcomes.push(Outcome {
        id: "bundle_integrity".into(),
        pass: problems.is_empty(),
        margin: if problems.is_empty() { 0.0 } else { -(problems.len() as f64) },
        detail: if problems.is_empty() {
            format!("{} tables match their digests", bundle.manifest.tables.len())
        } else {
            problems.join("; ")
        },
    });
    let data = bundle.tables(dir)?;
    for c in &criteria.criteria {
        let o = match evaluate(&c.rule, &data) {
            Ok((margin, detail)) => Outcome {
                id: c.id.clone(),
                pass: margin >= 0.0,
                margin,
                detail,
            },
            Err(e) => Outcome {
                id: c.id.clone(),
                pass: false,
                margin: f64::NEG_INFINITY,
                detail: e.to_string(),
            },
        };
        outcomes.push(o);
    }
    Ok(Report { outcomes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn row(obs: &str, h: f64, t: f64, site: &str, value: f64) -> Row {
        Row {
            scenario: "x".into(),
            observable: obs.into(),
            h_e: h,
            lambda: 0.0,
            dt: 0.1,
            site: site.into(),
            t,
            value,
            stderr: 0.0,
            stage: "noiseless".into(),
        }
    }

    fn data(rows: Vec<Row>) -> BTreeMap<String, Vec<Row>> {
        let mut m: BTreeMap<String, Vec<Row>> = BTreeMap::new();
        for r in rows {
            m.entry(r.observable.clone()).or_default().push(r);
        }
        m
    }

    #[test]
    fn bounds_and_filters() {
        let d = data(vec![row("s", 0.0, 0.0, "", 1.0), row("s", 0.0, 0.1, "", 1.5), row("s", 1.0, 0.0, "", 3.0)]);
        let rule = |filter: Filter, agg, max| Rule::ColumnBound { select: Selection { observable: "s".into(), filter }, aggregate: agg, min: None, max: Some(max) };
        let f: Filter = [(Column::HE, json!(0.0))].into_iter().collect();
        assert!((evaluate(&rule(f.clone(), Aggregate::Each, 2.0), &d).unwrap().0 - 0.5).abs() < 1e-12);
        assert!((evaluate(&rule(f, Aggregate::Mean, 2.0), &d).unwrap().0 - 0.75).abs() < 1e-12);
        let f: Filter = [(Column::T, json!({"min": 0.05}))].into_iter().collect();
        assert!((evaluate(&rule(f, Aggregate::Max, 2.0), &d).unwrap().0 - 0.5).abs() < 1e-12);
        let f: Filter = [(Column::HE, json!([0.0, 1.0]))].into_iter().collect();
        assert!(evaluate(&rule(f, Aggregate::Each, 2.0), &d).unwrap().0 < 0.0);
        let f: Filter = [(Column::HE, json!(7.0))].into_iter().collect();
        assert!(evaluate(&rule(f, Aggregate::Each, 2.0), &d).is_err());
        assert!(evaluate(&rule(Filter::new(), Aggregate::Each, 2.0), &data(vec![])).is_err());
    }

    #[test]
    fn constant_compare_ordering_argmax() {
        let d = data(vec![
            row("a", 0.0, 0.0, "w", 1.0),
            row("a", 0.0, 0.1, "w", 1.0 + 1e-12),
            row("a", 0.0, 0.0, "x", 2.0),
            row("a", 0.0, 0.1, "x", 2.5),
            row("b", 0.0, 0.0, "w", 1.0),
            row("b", 0.0, 0.1, "w", 1.1),
        ]);
        let only_w: Filter = [(Column::Site, json!("w"))].into_iter().collect();
        let c = Rule::ColumnConstant { select: Selection { observable: "a".into(), filter: only_w.clone() }, group_by: vec![Column::HE], tol: 1e-10 };
        assert!(evaluate(&c, &d).unwrap().0 > 0.0);
        let c = Rule::ColumnConstant { select: sel("a", &[]), group_by: vec![Column::Site], tol: 1e-10 };
        assert!(evaluate(&c, &d).unwrap().0 < 0.0);
        let cmp = Rule::CompareColumns { a: Selection { observable: "a".into(), filter: only_w.clone() }, b: sel("b", &[]), join: vec![Column::T], tol: 0.2 };
        assert!((evaluate(&cmp, &d).unwrap().0 - 0.1).abs() < 1e-9);
        let chain = vec![only_w, [(Column::Site, json!("x"))].into_iter().collect()];
        let ord = Rule::Ordering { select: sel("a", &[]), join: vec![Column::T], chain, tol: 0.0 };
        assert!((evaluate(&ord, &d).unwrap().0 - 1.0).abs() < 1e-9);

        let peak = data((0..5).map(|i| row("p", i as f64, 0.0, "", -((i as f64) - 2.0).powi(2))).collect());
        let am = |min, max| Rule::Argmax { select: sel("p", &[]), over: Column::HE, group_by: vec![], min, max };
        assert!((evaluate(&am(1.5, 3.0), &peak).unwrap().0 - 0.5).abs() < 1e-12);
        assert!(evaluate(&am(2.5, 3.0), &peak).unwrap().0 < 0.0);
        let edge = data((0..5).map(|i| row("p", i as f64, 0.0, "", i as f64)).collect());
        assert!(evaluate(&am(0.0, 10.0), &edge).unwrap().0 < 0.0);
    }

    #[test]
    fn criteria_json_round_trip() {
        let text = r#"{"criteria": [{"id": "c", "rule": {"kind": "column_bound", "select": {"observable": "s", "filter": {"h_e": 0.0, "t": {"max": 1}}}, "aggregate": "abs_max", "max": 0.1}}]}"#;
        let f: CriteriaFile = serde_json::from_str(text).unwrap();
        let back: CriteriaFile = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        assert_eq!(f, back);
        assert!(serde_json::from_str::<CriteriaFile>(r#"{"criteria": [{"id": "c", "rule": {"kind": "nope"}}]}"#).is_err());
    }
}
