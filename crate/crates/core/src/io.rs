//! File formats and deterministic report emission.
//!
//! Inputs are small CSV files with a header row. Reports are JSON (stable
//! field order, numbers rounded to 12 significant digits) or a CSV mirror.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::multitest::{HypothesisPool, Procedure, StepUpResult};
use crate::priors::{ComplexityPrior, SizePrior};

/// Significant digits printed for every floating-point value.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .unwrap_or(x)
}

/// Shortest decimal text of `x` rounded to 12 significant digits.
pub fn format_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let r = round_sig(x);
    let abs = r.abs();
    if abs != 0.0 && !(1e-6..1e15).contains(&abs) {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

fn open_input(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|source| Error::InputFile {
        path: path.display().to_string(),
        source,
    })?;
    Ok(csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(file))
}

fn csv_error(err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line() as usize);
    Error::Parse {
        line,
        msg: err.to_string(),
    }
}

fn parse_field<T: std::str::FromStr>(text: &str, line: usize, column: &str) -> Result<T> {
    text.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("cannot parse {column} value {text:?}"),
    })
}

/// Reads `hypothesis_id,p_value[,weight][,is_null]`.
///
/// Returns the pool and, when a weight column is present, the normalized
/// complexity prior.
pub fn parse_pvalue_csv(path: &Path) -> Result<(HypothesisPool<f64>, Option<ComplexityPrior<f64>>)> {
    let mut reader = open_input(path)?;
    let headers = reader.headers().map_err(csv_error)?.clone();
    let cols: Vec<&str> = headers.iter().collect();
    let (has_weight, has_null) = match cols.as_slice() {
        ["hypothesis_id", "p_value"] => (false, false),
        ["hypothesis_id", "p_value", "weight"] => (true, false),
        ["hypothesis_id", "p_value", "is_null"] => (false, true),
        ["hypothesis_id", "p_value", "weight", "is_null"] => (true, true),
        _ => {
            return Err(Error::Parse {
                line: 1,
                msg: format!(
                    "expected header hypothesis_id,p_value[,weight][,is_null], got {}",
                    cols.join(",")
                ),
            })
        }
    };

    let mut ids = Vec::new();
    let mut p_values = Vec::new();
    let mut weights = Vec::new();
    let mut nulls = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != cols.len() {
            return Err(Error::Parse {
                line,
                msg: format!("expected {} fields, found {}", cols.len(), record.len()),
            });
        }
        let id = record[0].to_string();
        if id.is_empty() {
            return Err(Error::Parse {
                line,
                msg: "empty hypothesis_id".into(),
            });
        }
        let p: f64 = parse_field(&record[1], line, "p_value")?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Validation {
                id,
                msg: format!("line {line}: p_value {p} outside [0, 1]"),
            });
        }
        let mut next = 2;
        if has_weight {
            weights.push(parse_field::<f64>(&record[next], line, "weight")?);
            next += 1;
        }
        if has_null {
            nulls.push(match &record[next] {
                "0" => false,
                "1" => true,
                other => {
                    return Err(Error::Parse {
                        line,
                        msg: format!("is_null must be 0 or 1, got {other:?}"),
                    })
                }
            });
        }
        ids.push(id);
        p_values.push(p);
    }
    if ids.is_empty() {
        return Err(Error::EmptyPool);
    }
    let pool = if has_null {
        HypothesisPool::with_nulls(ids, p_values, nulls)?
    } else {
        HypothesisPool::new(ids, p_values)?
    };
    let prior = if has_weight {
        Some(ComplexityPrior::from_weights(&weights)?)
    } else {
        None
    };
    Ok((pool, prior))
}

/// Writes a pool back in the input format.
pub fn write_pvalue_csv<W: Write>(
    out: W,
    pool: &HypothesisPool<f64>,
    weights: Option<&ComplexityPrior<f64>>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["hypothesis_id", "p_value"];
    if weights.is_some() {
        header.push("weight");
    }
    if pool.null_mask().is_some() {
        header.push("is_null");
    }
    w.write_record(&header).map_err(write_error)?;
    for i in 0..pool.len() {
        let mut row = vec![pool.ids()[i].clone(), format!("{:?}", pool.p_values()[i])];
        if let Some(pi) = weights {
            row.push(format!("{:?}", pi.weight(i)));
        }
        if let Some(mask) = pool.null_mask() {
            row.push(if mask[i] { "1" } else { "0" }.into());
        }
        w.write_record(&row).map_err(write_error)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: "<csv>".into(),
        source,
    })
}

fn write_error(err: csv::Error) -> Error {
    Error::Io {
        path: "<csv>".into(),
        source: io::Error::other(err.to_string()),
    }
}

fn two_column_rows(path: &Path, first: &str) -> Result<Vec<(usize, String, f64)>> {
    let mut reader = open_input(path)?;
    let headers = reader.headers().map_err(csv_error)?.clone();
    if headers.len() != 2 || &headers[0] != first {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected a two-column header starting with {first}"),
        });
    }
    let second = headers[1].to_string();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        rows.push((line, record[0].to_string(), parse_field(&record[1], line, &second)?));
    }
    Ok(rows)
}

/// Reads `index,weight` rows (sizes `1..=m`; absent sizes get weight 0).
pub fn parse_size_prior_csv(path: &Path, m: usize) -> Result<SizePrior<f64>> {
    let mut weights = vec![0.0; m];
    for (line, index, w) in two_column_rows(path, "index")? {
        let k: usize = parse_field(&index, line, "index")?;
        if k == 0 || k > m {
            return Err(Error::Parse {
                line,
                msg: format!("size index {k} outside 1..={m}"),
            });
        }
        weights[k - 1] = w;
    }
    SizePrior::custom(&weights)
}

/// Reads `hypothesis_id,weight` rows for the hypotheses of `pool`; absent
/// hypotheses get weight 0.
pub fn parse_complexity_prior_csv(path: &Path, pool: &HypothesisPool<f64>) -> Result<ComplexityPrior<f64>> {
    let index: HashMap<&str, usize> = pool
        .ids()
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let mut weights = vec![0.0; pool.len()];
    for (line, id, w) in two_column_rows(path, "hypothesis_id")? {
        let i = *index.get(id.as_str()).ok_or_else(|| Error::Parse {
            line,
            msg: format!("unknown hypothesis_id {id:?}"),
        })?;
        weights[i] = w;
    }
    ComplexityPrior::from_weights(&weights)
}

/// Reads `x,<value>` knot rows.
pub fn parse_knots_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    two_column_rows(path, "x")?
        .into_iter()
        .map(|(line, x, y)| Ok((parse_field(&x, line, "x")?, y)))
        .collect()
}

/// Replaces every non-integer number in a JSON tree by its 12-digit rounding.
pub fn round_json(value: Value) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap();
            serde_json::Number::from_f64(round_sig(x)).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_json).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

/// Pretty JSON with rounded numbers and a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let tree = serde_json::to_value(value).map_err(|e| Error::Internal(e.to_string()))?;
    let mut text =
        serde_json::to_string_pretty(&round_json(tree)).map_err(|e| Error::Internal(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// Output encoding of a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// Serializable record of a step-up run.
#[derive(Debug, Clone, Serialize)]
pub struct AdjustReport {
    pub procedure: String,
    pub alpha: f64,
    pub m: usize,
    pub k_star: usize,
    pub kappa_or_beta_spec: String,
    pub complexity_prior: String,
    pub rejected: Vec<String>,
    pub thresholds: BTreeMap<String, f64>,
    #[serde(skip)]
    rows: Vec<(String, f64, f64, bool)>,
}

pub fn procedure_name(p: Procedure) -> &'static str {
    match p {
        Procedure::Hammer => "hammer",
        Procedure::BenjaminiYekutieli => "by",
        Procedure::BenjaminiHochberg => "bh",
        Procedure::Bonferroni => "bonferroni",
    }
}

impl AdjustReport {
    pub fn new(
        result: &StepUpResult<f64>,
        pool: &HypothesisPool<f64>,
        size_spec: String,
        complexity_spec: String,
    ) -> Self {
        let rows: Vec<(String, f64, f64, bool)> = (0..pool.len())
            .map(|i| {
                (
                    pool.ids()[i].clone(),
                    pool.p_values()[i],
                    result.thresholds[i],
                    result.is_rejected(i),
                )
            })
            .collect();
        Self {
            procedure: procedure_name(result.procedure).into(),
            alpha: result.alpha,
            m: pool.len(),
            k_star: result.k_star,
            kappa_or_beta_spec: size_spec,
            complexity_prior: complexity_spec,
            rejected: result.rejected_ids(pool).into_iter().map(String::from).collect(),
            thresholds: rows.iter().map(|(id, _, t, _)| (id.clone(), *t)).collect(),
            rows,
        }
    }

    /// One row per hypothesis, in pool order.
    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["hypothesis_id", "p_value", "threshold", "rejected"])
            .map_err(write_error)?;
        for (id, p, t, r) in &self.rows {
            w.write_record([
                id.clone(),
                format_sig(*p),
                format_sig(*t),
                if *r { "1" } else { "0" }.to_string(),
            ])
            .map_err(write_error)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => to_json_string(self),
            Format::Csv => self.to_csv_string(),
        }
    }
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| Error::Io {
            path: p.display().to_string(),
            source,
        }),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())
                .and_then(|_| lock.flush())
                .map_err(|source| Error::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

/// Renders rows of plain floats as CSV with 12-digit values.
pub fn float_table_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(write_error)?;
    for row in rows {
        w.write_record(row.iter().map(|&x| format_sig(x)))
            .map_err(write_error)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn temp_csv(body: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(body.as_bytes()).unwrap();
        f
    }

    #[test]
    fn sig_formatting() {
        assert_eq!(format_sig(0.006), "0.006");
        assert_eq!(format_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_sig(2.0833333333333335), "2.08333333333");
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(1e-20), "1e-20");
        assert_eq!(round_sig(0.1 + 0.2), 0.3);
    }

    #[test]
    fn parses_worked_example() {
        let f = temp_csv("hypothesis_id,p_value\nh1,0.001\nh2,0.010\nh3,0.020\nh4,0.900\n");
        let (pool, prior) = parse_pvalue_csv(f.path()).unwrap();
        assert_eq!(pool.len(), 4);
        assert!(prior.is_none());
        assert_eq!(pool.p_values(), &[0.001, 0.010, 0.020, 0.900]);
    }

    #[test]
    fn weight_and_null_columns() {
        let f = temp_csv("hypothesis_id,p_value,weight,is_null\na,0.1,3,1\nb,0.2,1,0\n");
        let (pool, prior) = parse_pvalue_csv(f.path()).unwrap();
        assert_eq!(prior.unwrap().weights(), &[0.75, 0.25]);
        assert_eq!(pool.null_mask().unwrap(), &[true, false]);
    }

    #[test]
    fn input_errors() {
        let empty = temp_csv("hypothesis_id,p_value\n");
        assert!(matches!(parse_pvalue_csv(empty.path()), Err(Error::EmptyPool)));
        let bad_p = temp_csv("hypothesis_id,p_value\nh1,0.5\nh2,1.5\n");
        match parse_pvalue_csv(bad_p.path()) {
            Err(Error::Validation { id, msg }) => {
                assert_eq!(id, "h2");
                assert!(msg.contains("line 3"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let garbled = temp_csv("hypothesis_id,p_value\nh1,abc\n");
        assert!(matches!(parse_pvalue_csv(garbled.path()), Err(Error::Parse { line: 2, .. })));
        let dup = temp_csv("hypothesis_id,p_value\nh1,0.1\nh1,0.2\n");
        assert!(matches!(parse_pvalue_csv(dup.path()), Err(Error::DuplicateId(_))));
        let header = temp_csv("id,p\nh1,0.1\n");
        assert!(matches!(parse_pvalue_csv(header.path()), Err(Error::Parse { line: 1, .. })));
        let missing = parse_pvalue_csv(Path::new("/nonexistent/file.csv")).unwrap_err();
        assert!(missing.is_input_error());
    }

    #[test]
    fn prior_files() {
        let sizes = temp_csv("index,weight\n1,1\n2,1\n");
        let p = parse_size_prior_csv(sizes.path(), 3).unwrap();
        assert_eq!(p.gammas(), &[0.5, 0.5, 0.0]);
        assert!(parse_size_prior_csv(sizes.path(), 1).is_err());

        let f = temp_csv("hypothesis_id,p_value\na,0.1\nb,0.2\n");
        let (pool, _) = parse_pvalue_csv(f.path()).unwrap();
        let cp = temp_csv("hypothesis_id,weight\nb,1\na,3\n");
        assert_eq!(parse_complexity_prior_csv(cp.path(), &pool).unwrap().weights(), &[0.75, 0.25]);
        let unknown = temp_csv("hypothesis_id,weight\nzz,1\n");
        assert!(parse_complexity_prior_csv(unknown.path(), &pool).is_err());

        let knots = temp_csv("x,cdf\n0.5,0.25\n1,1\n");
        assert_eq!(parse_knots_csv(knots.path()).unwrap(), vec![(0.5, 0.25), (1.0, 1.0)]);
    }
}
