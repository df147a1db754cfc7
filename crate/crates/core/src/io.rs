//! CSV reading and writing for datasets, CPTs and utility tables.
//!
//! Fields are comma-separated, but commas inside brackets or parentheses do not split a
//! field, so interval labels such as `[70,90]` need no quoting. Double-quoted fields are
//! also accepted (`""` escapes a quote).

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sample::{Column, SampleSet};
use crate::space::ValueSpace;
use crate::table::{Cpt, CptKind, UtilityTable};

/// CPT rows whose sums are off by at most this much are renormalized; others are rejected.
pub const ROW_SUM_TOLERANCE: f64 = 1e-6;

fn split_fields(line: &str, line_no: u64) -> Result<Vec<String>> {
    let mut fields = Vec::new();
    let mut cur = String::new();
    let mut depth = 0i32;
    let mut chars = line.chars().peekable();
    let mut quoted: Option<usize> = None;
    let mut in_quotes = false;
    while let Some(ch) = chars.next() {
        if in_quotes {
            if ch == '"' {
                if chars.peek() == Some(&'"') {
                    cur.push('"');
                    chars.next();
                } else {
                    in_quotes = false;
                    quoted = Some(cur.len());
                }
            } else {
                cur.push(ch);
            }
            continue;
        }
        match ch {
            '"' if cur.trim().is_empty() && quoted.is_none() => {
                cur.clear();
                in_quotes = true;
            }
            '[' | '(' | '{' => {
                depth += 1;
                cur.push(ch);
            }
            ']' | ')' | '}' => {
                depth -= 1;
                cur.push(ch);
            }
            ',' if depth <= 0 => {
                fields.push(finish_field(std::mem::take(&mut cur), quoted.take()));
                depth = 0;
            }
            _ => cur.push(ch),
        }
    }
    if in_quotes {
        return Err(Error::Parse {
            line: line_no,
            message: "unterminated quoted field".into(),
        });
    }
    fields.push(finish_field(cur, quoted));
    Ok(fields)
}

/// `quoted_len` is the length of the quoted content; anything after the closing quote is dropped.
fn finish_field(mut s: String, quoted_len: Option<usize>) -> String {
    match quoted_len {
        Some(n) => {
            s.truncate(n);
            s
        }
        None => s.trim().to_string(),
    }
}

fn quote(label: &str) -> Result<String> {
    if label.contains(['\n', '\r']) {
        return Err(Error::Input(format!("label {label:?} contains a line break")));
    }
    let plain = !label.contains(['"', ',', '[', ']', '(', ')', '{', '}']) && label.trim() == label;
    Ok(if plain || (bracketed(label) && label.trim() == label) {
        label.to_string()
    } else {
        format!("\"{}\"", label.replace('"', "\"\""))
    })
}

/// True when every comma sits inside balanced brackets and there are no quotes, so the
/// label survives unquoted.
fn bracketed(label: &str) -> bool {
    if label.starts_with('"') || label.contains('"') {
        return false;
    }
    let mut depth = 0i32;
    for ch in label.chars() {
        match ch {
            '[' | '(' | '{' => depth += 1,
            ']' | ')' | '}' => {
                depth -= 1;
                if depth < 0 {
                    return false;
                }
            }
            ',' if depth == 0 => return false,
            _ => {}
        }
    }
    depth == 0
}

/// Non-blank lines with their 1-based line numbers.
fn lines(text: &str) -> impl Iterator<Item = (u64, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i as u64 + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
}

fn parse_f64(s: &str, line: u64, what: &str) -> Result<f64> {
    s.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::Parse {
            line,
            message: format!("{what} {s:?} is not a finite number"),
        })
}

fn read(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Side {
    Label,
    Vector(usize),
}

/// Parses a column block of the header starting at `at`: either `name` or `name_1..name_d`.
fn header_block(header: &[String], at: usize, name: &str) -> Result<(Side, usize)> {
    match header.get(at).map(String::as_str) {
        Some(h) if h == name => Ok((Side::Label, at + 1)),
        Some(h) if h == format!("{name}_1") => {
            let mut d = 1;
            while header.get(at + d).map(String::as_str) == Some(format!("{name}_{}", d + 1).as_str()) {
                d += 1;
            }
            Ok((Side::Vector(d), at + d))
        }
        other => Err(Error::Parse {
            line: 1,
            message: format!("expected column {name:?} or {name}_1.., found {other:?}"),
        }),
    }
}

/// Parses a dataset with header `c,e[,u]`, or `c_1..c_d,e_1..e_k[,u]` for vector values.
pub fn parse_samples_str(text: &str) -> Result<SampleSet> {
    let mut it = lines(text);
    let (hline, hraw) = it.next().ok_or_else(|| Error::Input("empty dataset file".into()))?;
    let header = split_fields(hraw, hline)?;
    let (cause_side, at) = header_block(&header, 0, "c")?;
    let (effect_side, at) = header_block(&header, at, "e")?;
    let has_u = match header.get(at).map(String::as_str) {
        None => false,
        Some("u") if at + 1 == header.len() => true,
        Some(other) => {
            return Err(Error::Parse {
                line: hline,
                message: format!("unexpected column {other:?}"),
            })
        }
    };
    let width = header.len();

    let mut causes = Builder::new(cause_side);
    let mut effects = Builder::new(effect_side);
    let mut utilities = Vec::new();
    for (line, raw) in it {
        let fields = split_fields(raw, line)?;
        if fields.len() != width {
            return Err(Error::Parse {
                line,
                message: format!("expected {width} fields, found {}", fields.len()),
            });
        }
        let rest = causes.push(&fields, line)?;
        let rest = effects.push(rest, line)?;
        if has_u {
            utilities.push(parse_f64(&rest[0], line, "utility")?);
        }
    }
    SampleSet::new(causes.finish()?, effects.finish()?, has_u.then_some(utilities))
}

struct Builder {
    side: Side,
    labels: Vec<String>,
    vectors: Vec<Vec<f64>>,
}

impl Builder {
    fn new(side: Side) -> Self {
        Builder {
            side,
            labels: Vec::new(),
            vectors: Vec::new(),
        }
    }

    fn push<'a>(&mut self, fields: &'a [String], line: u64) -> Result<&'a [String]> {
        match self.side {
            Side::Label => {
                if fields[0].is_empty() {
                    return Err(Error::Parse {
                        line,
                        message: "empty label".into(),
                    });
                }
                self.labels.push(fields[0].clone());
                Ok(&fields[1..])
            }
            Side::Vector(d) => {
                let v = fields[..d]
                    .iter()
                    .map(|f| parse_f64(f, line, "coordinate"))
                    .collect::<Result<Vec<f64>>>()?;
                self.vectors.push(v);
                Ok(&fields[d..])
            }
        }
    }

    fn finish(self) -> Result<Column> {
        match self.side {
            Side::Label => Ok(Column::Labels(self.labels)),
            Side::Vector(_) => Column::vectors(self.vectors),
        }
    }
}

pub fn parse_samples_csv(path: impl AsRef<Path>) -> Result<SampleSet> {
    parse_samples_str(&read(path.as_ref())?)
}

fn column_header(col: &Column, name: &str) -> Vec<String> {
    match col {
        Column::Labels(_) => vec![name.to_string()],
        Column::Vectors { dim, .. } => (1..=*dim).map(|i| format!("{name}_{i}")).collect(),
    }
}

fn column_fields(col: &Column, i: usize, out: &mut Vec<String>) -> Result<()> {
    match col {
        Column::Labels(l) => out.push(quote(&l[i])?),
        Column::Vectors { rows, .. } => out.extend(rows[i].iter().map(|x| x.to_string())),
    }
    Ok(())
}

/// Renders a dataset in the format read by [`parse_samples_str`].
pub fn samples_to_csv(data: &SampleSet) -> Result<String> {
    let mut header = column_header(data.causes(), "c");
    header.extend(column_header(data.effects(), "e"));
    if data.has_utilities() {
        header.push("u".into());
    }
    let mut out = header.join(",");
    out.push('\n');
    for i in 0..data.len() {
        let mut fields = Vec::new();
        column_fields(data.causes(), i, &mut fields)?;
        column_fields(data.effects(), i, &mut fields)?;
        if let Some(u) = data.utilities() {
            fields.push(u[i].to_string());
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn write_samples_csv(data: &SampleSet, path: impl AsRef<Path>) -> Result<()> {
    Ok(std::fs::write(path, samples_to_csv(data)?)?)
}

/// What a matrix file holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    Cpt(CptKind),
    Utility,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Matrix {
    Cpt(Cpt<f64>),
    Utility(UtilityTable<f64>),
}

type RawMatrix = (ValueSpace, ValueSpace, Vec<Vec<f64>>, Vec<u64>);

fn parse_raw_matrix(text: &str) -> Result<RawMatrix> {
    let mut it = lines(text);
    let (hline, hraw) = it.next().ok_or_else(|| Error::Input("empty matrix file".into()))?;
    let header = split_fields(hraw, hline)?;
    if header.len() < 2 {
        return Err(Error::Parse {
            line: hline,
            message: "header needs a corner cell and at least one effect label".into(),
        });
    }
    let effects = ValueSpace::new(header[1..].iter().cloned())?;
    let mut causes = Vec::new();
    let mut rows = Vec::new();
    let mut line_nos = Vec::new();
    for (line, raw) in it {
        let fields = split_fields(raw, line)?;
        if fields.len() != header.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", header.len(), fields.len()),
            });
        }
        causes.push(fields[0].clone());
        rows.push(
            fields[1..]
                .iter()
                .map(|f| parse_f64(f, line, "entry"))
                .collect::<Result<Vec<f64>>>()?,
        );
        line_nos.push(line);
    }
    Ok((ValueSpace::new(causes)?, effects, rows, line_nos))
}

/// Parses a CPT: first row holds the effect labels (after a corner cell), first column the
/// cause labels. Rows within [`ROW_SUM_TOLERANCE`] of 1 are renormalized.
pub fn parse_cpt_str(text: &str, kind: CptKind) -> Result<Cpt<f64>> {
    let (causes, effects, mut rows, line_nos) = parse_raw_matrix(text)?;
    for (j, row) in rows.iter_mut().enumerate() {
        if let Some(p) = row.iter().find(|p| **p < 0.0 || **p > 1.0) {
            return Err(Error::InvalidProbability(format!(
                "line {}: entry {p} outside [0, 1]",
                line_nos[j]
            )));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(Error::NotStochastic {
                row: j,
                label: causes.label(j).to_string(),
                sum,
            });
        }
        row.iter_mut().for_each(|p| *p /= sum);
    }
    Cpt::new(causes, effects, rows, kind)
}

pub fn parse_utility_str(text: &str) -> Result<UtilityTable<f64>> {
    let (causes, effects, rows, _) = parse_raw_matrix(text)?;
    UtilityTable::new(causes, effects, rows)
}

pub fn parse_matrix_str(text: &str, kind: MatrixKind) -> Result<Matrix> {
    match kind {
        MatrixKind::Cpt(k) => parse_cpt_str(text, k).map(Matrix::Cpt),
        MatrixKind::Utility => parse_utility_str(text).map(Matrix::Utility),
    }
}

pub fn parse_matrix_csv(path: impl AsRef<Path>, kind: MatrixKind) -> Result<Matrix> {
    parse_matrix_str(&read(path.as_ref())?, kind)
}

pub fn parse_cpt_csv(path: impl AsRef<Path>, kind: CptKind) -> Result<Cpt<f64>> {
    parse_cpt_str(&read(path.as_ref())?, kind)
}

pub fn parse_utility_csv(path: impl AsRef<Path>) -> Result<UtilityTable<f64>> {
    parse_utility_str(&read(path.as_ref())?)
}

/// Renders a labelled matrix in the format read by [`parse_cpt_str`] / [`parse_utility_str`].
pub fn matrix_to_csv(causes: &ValueSpace, effects: &ValueSpace, rows: &[Vec<f64>]) -> Result<String> {
    let mut out = String::new();
    for l in effects.labels() {
        write!(out, ",{}", quote(l)?).expect("write to string");
    }
    out.push('\n');
    for (j, row) in rows.iter().enumerate() {
        out.push_str(&quote(causes.label(j))?);
        for x in row {
            write!(out, ",{x}").expect("write to string");
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn cpt_to_csv(cpt: &Cpt<f64>) -> Result<String> {
    matrix_to_csv(cpt.cause_space(), cpt.effect_space(), cpt.rows())
}

pub fn utility_to_csv(util: &UtilityTable<f64>) -> Result<String> {
    matrix_to_csv(util.cause_space(), util.effect_space(), util.values())
}

pub fn write_matrix_csv(matrix: &Matrix, path: impl AsRef<Path>) -> Result<()> {
    let text = match matrix {
        Matrix::Cpt(c) => cpt_to_csv(c)?,
        Matrix::Utility(u) => utility_to_csv(u)?,
    };
    Ok(std::fs::write(path, text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bracketed_label_is_one_field() {
        let s = parse_samples_str("c,e\nMarlboro,[70,90]").unwrap();
        assert_eq!(s.len(), 1);
        assert!(!s.has_utilities());
        assert_eq!(s.effects(), &Column::labels(["[70,90]"]));
    }

    #[test]
    fn utility_column() {
        let s = parse_samples_str("c,e,u\na,x,2.5").unwrap();
        assert_eq!(s.utilities(), Some(&[2.5][..]));
    }

    #[test]
    fn ragged_row_names_its_line() {
        let err = parse_samples_str("c,e\na,x,1").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!(err.to_string().contains("line 2"));
        let err = parse_samples_str("c,e,u\na,x,1\nb,y,oops").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn vector_headers() {
        let s = parse_samples_str("c_1,c_2,e,u\n0.5,1,x,3\n-1,2,y,4\n").unwrap();
        assert_eq!(s.causes(), &Column::vectors(vec![vec![0.5, 1.0], vec![-1.0, 2.0]]).unwrap());
        assert!(parse_samples_str("c_1,c_3,e\n1,2,x").is_err());
        assert!(parse_samples_str("c,e,w\na,x,1").is_err());
        assert!(parse_samples_str("c_1,e\nabc,x").is_err());
    }

    #[test]
    fn quoted_fields() {
        let s = parse_samples_str("c,e\n\"a,b\",\"say \"\"hi\"\"\"\n").unwrap();
        assert_eq!(s.causes(), &Column::labels(["a,b"]));
        assert_eq!(s.effects(), &Column::labels(["say \"hi\""]));
        assert!(parse_samples_str("c,e\n\"a,x").is_err());
    }

    #[test]
    fn cpt_parsing() {
        let cpt = parse_cpt_str(",x,y\na,0.25,0.75\nb,0.5000001,0.5\n", CptKind::Interventional).unwrap();
        assert_eq!(cpt.kind(), CptKind::Interventional);
        assert!((cpt.row(1).iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(matches!(
            parse_cpt_str(",x,y\na,0.3,0.6\n", CptKind::Observational),
            Err(Error::NotStochastic { .. })
        ));
        assert!(matches!(
            parse_cpt_str(",x,y\na,-0.1,1.1\n", CptKind::Observational),
            Err(Error::InvalidProbability(_))
        ));
        assert!(parse_cpt_str(",x,y\na,0.5\n", CptKind::Observational).is_err());
    }

    fn label() -> impl Strategy<Value = String> {
        prop_oneof![
            "[a-zA-Z][a-zA-Z0-9_]{0,6}",
            "\\[[0-9]{1,2},[0-9]{1,2}\\]",
            "[a-z ,\"]{1,6}".prop_filter("non-blank", |s| !s.trim().is_empty()),
        ]
    }

    proptest! {
        #[test]
        fn samples_round_trip(
            records in prop::collection::vec((label(), label(), -1e6f64..1e6), 1..20),
            with_u in any::<bool>(),
        ) {
            let data = SampleSet::new(
                Column::labels(records.iter().map(|r| r.0.clone())),
                Column::labels(records.iter().map(|r| r.1.clone())),
                with_u.then(|| records.iter().map(|r| r.2).collect()),
            ).unwrap();
            let text = samples_to_csv(&data).unwrap();
            prop_assert_eq!(parse_samples_str(&text).unwrap(), data);
        }

        #[test]
        fn vector_samples_round_trip(
            rows in prop::collection::vec((prop::collection::vec(-1e3f64..1e3, 3), -5.0f64..5.0), 1..10),
        ) {
            let data = SampleSet::new(
                Column::vectors(rows.iter().map(|r| r.0.clone()).collect()).unwrap(),
                Column::vectors(rows.iter().map(|r| vec![r.1]).collect()).unwrap(),
                None,
            ).unwrap();
            prop_assert_eq!(parse_samples_str(&samples_to_csv(&data).unwrap()).unwrap(), data);
        }

        #[test]
        fn utility_round_trip(values in prop::collection::vec(prop::collection::vec(-100f64..100.0, 3), 1..5)) {
            let util = UtilityTable::new(
                ValueSpace::indexed("[c,", values.len()).unwrap(),
                ValueSpace::new(["x", "[0,49]", "a b"]).unwrap(),
                values,
            ).unwrap();
            prop_assert_eq!(parse_utility_str(&utility_to_csv(&util).unwrap()).unwrap(), util);
        }

        #[test]
        fn cpt_round_trip(raw in prop::collection::vec(prop::collection::vec(0.01f64..1.0, 4), 1..5)) {
            let rows: Vec<Vec<f64>> = raw.iter().map(|r| {
                let s: f64 = r.iter().sum();
                r.iter().map(|x| x / s).collect()
            }).collect();
            let cpt = Cpt::new(
                ValueSpace::indexed("c", rows.len()).unwrap(),
                ValueSpace::numeric(&[-2, -1, 1, 2]).unwrap(),
                rows,
                CptKind::Observational,
            ).unwrap();
            let back = parse_cpt_str(&cpt_to_csv(&cpt).unwrap(), CptKind::Observational).unwrap();
            for (a, b) in back.rows().iter().flatten().zip(cpt.rows().iter().flatten()) {
                prop_assert!((a - b).abs() < 1e-15);
            }
            prop_assert_eq!(back.cause_space(), cpt.cause_space());
        }
    }
}
