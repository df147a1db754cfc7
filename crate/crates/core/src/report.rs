//! Rendering of coarsening results as text, JSON or CSV.
//!
//! JSON layout:
//!
//! ```text
//! {
//!   "title": string,
//!   "cause_partition": [[label, ...], ...],
//!   "effect_partition": [[label, ...], ...],
//!   "coarse_cpt": {"kind": "observational"|"interventional",
//!                  "causes": [macro label], "effects": [macro label], "rows": [[p]]},
//!   "eu_profile": null | {"kind": ..., "causes": [label], "values": [number], "eta": number|null},
//!   "notes": [string]
//! }
//! ```
//!
//! CSV is long-format with columns `section,row,column,value`; sections are `cause_class`,
//! `effect_class`, `cpt`, `eu` and `eta`.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::cfl::CoarseningResult;
use crate::equiv::ExpectedUtilityProfile;
use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::space::ValueSpace;
use crate::table::{Cpt, CptKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::Config(format!("unknown format {other:?} (text, json, csv)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub title: String,
    pub cause_space: ValueSpace,
    pub effect_space: ValueSpace,
    pub cause_partition: Partition,
    pub effect_partition: Partition,
    pub coarse_cpt: Cpt<f64>,
    /// Expected utility of every fine cause value, for pragmatic runs.
    pub eu_profile: Option<ExpectedUtilityProfile<f64>>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(
        title: impl Into<String>,
        cause_space: ValueSpace,
        effect_space: ValueSpace,
        cause_partition: Partition,
        effect_partition: Partition,
        coarse_cpt: Cpt<f64>,
    ) -> Self {
        Report {
            title: title.into(),
            cause_space,
            effect_space,
            cause_partition,
            effect_partition,
            coarse_cpt,
            eu_profile: None,
            notes: Vec::new(),
        }
    }

    pub fn from_coarsening(title: impl Into<String>, r: &CoarseningResult) -> Self {
        Report::new(
            title,
            r.cause_space.clone(),
            r.effect_space.clone(),
            r.cause_partition.clone(),
            r.effect_partition.clone(),
            r.coarse_cpt.clone(),
        )
    }

    pub fn with_profile(mut self, profile: ExpectedUtilityProfile<f64>) -> Self {
        self.eu_profile = Some(profile);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

#[derive(Serialize)]
struct CptDoc<'a> {
    kind: CptKind,
    causes: &'a [String],
    effects: &'a [String],
    rows: &'a [Vec<f64>],
}

#[derive(Serialize)]
struct ProfileDoc<'a> {
    kind: CptKind,
    causes: &'a [String],
    values: &'a [f64],
    eta: Option<f64>,
}

#[derive(Serialize)]
struct ReportDoc<'a> {
    title: &'a str,
    cause_partition: Vec<Vec<String>>,
    effect_partition: Vec<Vec<String>>,
    coarse_cpt: CptDoc<'a>,
    eu_profile: Option<ProfileDoc<'a>>,
    notes: &'a [String],
}

pub fn emit_report(report: &Report, format: Format) -> Result<String> {
    match format {
        Format::Text => Ok(text(report)),
        Format::Json => json(report),
        Format::Csv => Ok(csv(report)),
    }
}

fn classes_line(part: &Partition, space: &ValueSpace) -> String {
    part.macro_labels(space)
        .iter()
        .map(|l| format!("{{{l}}}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn text(r: &Report) -> String {
    let mut out = String::new();
    let w = &mut out;
    writeln!(w, "{}", r.title).unwrap();
    writeln!(w, "cause classes:  {}", classes_line(&r.cause_partition, &r.cause_space)).unwrap();
    writeln!(w, "effect classes: {}", classes_line(&r.effect_partition, &r.effect_space)).unwrap();
    let cpt = &r.coarse_cpt;
    writeln!(w, "coarse CPT ({}):", cpt.kind()).unwrap();
    let first = cpt
        .cause_space()
        .labels()
        .iter()
        .map(|l| l.chars().count())
        .max()
        .unwrap_or(0)
        .max(2);
    let widths: Vec<usize> = cpt
        .effect_space()
        .labels()
        .iter()
        .map(|l| l.chars().count().max(6))
        .collect();
    write!(w, "  {:first$}", "").unwrap();
    for (l, cw) in cpt.effect_space().labels().iter().zip(&widths) {
        write!(w, "  {l:>cw$}").unwrap();
    }
    writeln!(w).unwrap();
    for (j, row) in cpt.rows().iter().enumerate() {
        write!(w, "  {:first$}", cpt.cause_space().label(j)).unwrap();
        for (p, cw) in row.iter().zip(&widths) {
            write!(w, "  {p:>cw$.3}").unwrap();
        }
        writeln!(w).unwrap();
    }
    if let Some(p) = &r.eu_profile {
        writeln!(w, "expected utilities ({}):", p.kind).unwrap();
        let lw = r.cause_space.labels().iter().map(|l| l.chars().count()).max().unwrap_or(0);
        for (l, v) in r.cause_space.labels().iter().zip(&p.values) {
            writeln!(w, "  {l:lw$}  {v:.2}").unwrap();
        }
        if let Some(eta) = p.eta {
            writeln!(w, "eta = {eta:.2}").unwrap();
        }
    }
    for n in &r.notes {
        writeln!(w, "note: {n}").unwrap();
    }
    out
}

fn json(r: &Report) -> Result<String> {
    let doc = ReportDoc {
        title: &r.title,
        cause_partition: r.cause_partition.labelled_classes(&r.cause_space),
        effect_partition: r.effect_partition.labelled_classes(&r.effect_space),
        coarse_cpt: CptDoc {
            kind: r.coarse_cpt.kind(),
            causes: r.coarse_cpt.cause_space().labels(),
            effects: r.coarse_cpt.effect_space().labels(),
            rows: r.coarse_cpt.rows(),
        },
        eu_profile: r.eu_profile.as_ref().map(|p| ProfileDoc {
            kind: p.kind,
            causes: r.cause_space.labels(),
            values: &p.values,
            eta: p.eta,
        }),
        notes: &r.notes,
    };
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv(r: &Report) -> String {
    let mut out = String::from("section,row,column,value\n");
    let mut line = |section: &str, row: &str, col: &str, value: String| {
        out.push_str(&format!("{section},{},{},{value}\n", csv_field(row), csv_field(col)));
    };
    for (side, part, space) in [
        ("cause_class", &r.cause_partition, &r.cause_space),
        ("effect_class", &r.effect_partition, &r.effect_space),
    ] {
        for (name, members) in part.macro_labels(space).iter().zip(part.labelled_classes(space)) {
            for m in members {
                line(side, name, &m, String::new());
            }
        }
    }
    let cpt = &r.coarse_cpt;
    for (j, row) in cpt.rows().iter().enumerate() {
        for (i, p) in row.iter().enumerate() {
            line("cpt", cpt.cause_space().label(j), cpt.effect_space().label(i), p.to_string());
        }
    }
    if let Some(p) = &r.eu_profile {
        for (l, v) in r.cause_space.labels().iter().zip(&p.values) {
            line("eu", l, "", v.to_string());
        }
        if let Some(eta) = p.eta {
            line("eta", "", "", eta.to_string());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equiv::{expected_utilities, pragmatic_causal_coarsening, pragmatic_effect_coarsening};
    use crate::fixtures;
    use crate::table::{coarsen_cpt, uniform};

    fn smoking_report() -> Report {
        let cpt = fixtures::smoking_cpt().unwrap();
        let util = fixtures::smoking_utility().unwrap();
        let pc = pragmatic_causal_coarsening(&cpt, &util, 1e-9).unwrap();
        let pe = pragmatic_effect_coarsening(&util, 1e-9);
        let coarse = coarsen_cpt(&cpt, &pc, &pe, &uniform(3)).unwrap();
        Report::new(
            "smoking",
            cpt.cause_space().clone(),
            cpt.effect_space().clone(),
            pc,
            pe,
            coarse,
        )
        .with_profile(expected_utilities(&cpt, &util).unwrap())
    }

    #[test]
    fn text_mentions_merged_class_and_eta() {
        let t = emit_report(&smoking_report(), Format::Text).unwrap();
        assert!(t.contains("Marlboro∨Other"));
        assert!(t.contains("eta = 1947.05"));
        // identity effect partition: every label alone
        assert!(t.contains("{[0,49]} {[50,69]} {[70,90]} {[90,Inf]}"));
    }

    #[test]
    fn json_schema() {
        let j = emit_report(&smoking_report(), Format::Json).unwrap();
        let v: serde_json::Value = serde_json::from_str(&j).unwrap();
        for key in ["cause_partition", "effect_partition", "coarse_cpt", "eu_profile"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["cause_partition"][0][1], "Other");
        assert_eq!(v["eu_profile"]["eta"], 1947.05);
        assert_eq!(v["coarse_cpt"]["kind"], "interventional");
    }

    #[test]
    fn csv_sections() {
        let c = emit_report(&smoking_report(), Format::Csv).unwrap();
        assert!(c.starts_with("section,row,column,value\n"));
        assert!(c.contains("cause_class,Marlboro∨Other,Marlboro,"));
        assert!(c.contains("effect_class,\"[0,49]\",\"[0,49]\","));
        assert!(c.contains("eta,,,1947.05"));
    }

    #[test]
    fn format_parsing() {
        assert_eq!("json".parse::<Format>().unwrap(), Format::Json);
        assert!("xml".parse::<Format>().is_err());
    }
}
