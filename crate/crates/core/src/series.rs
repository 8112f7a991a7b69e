//! Dataset model, UCR-format ingestion, and z-normalization.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

/// Errors produced while constructing, loading, or normalizing series.
#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("non-finite value at position {index}")]
    NonFinite { index: usize },
    #[error("line {line}: expected {expected} values, found {found}")]
    Ragged {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: cannot parse {what} token {token:?}")]
    Parse {
        line: usize,
        what: &'static str,
        token: String,
    },
    #[error("constant series (zero variance)")]
    DegenerateSeries,
    #[error("series too short for normalization: length {len}, need at least 2")]
    TooShort { len: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One labeled, real-valued, uniformly sampled sequence.
///
/// Values are guaranteed finite and non-empty after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    label: Option<i64>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self, SeriesError> {
        if values.is_empty() {
            return Err(SeriesError::Empty("time series"));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(SeriesError::NonFinite { index });
        }
        Ok(Self {
            values,
            label: None,
        })
    }

    pub fn with_label(values: Vec<f64>, label: i64) -> Result<Self, SeriesError> {
        let mut s = Self::new(values)?;
        s.label = Some(label);
        Ok(s)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> Option<i64> {
        self.label
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        // Construction rejects empty value vectors.
        false
    }
}

/// A set of equal-length time series.
#[derive(Debug, Clone)]
pub struct Dataset {
    items: Vec<TimeSeries>,
    series_len: usize,
}

impl Dataset {
    /// Builds a dataset, enforcing that every member has the same length.
    pub fn new(items: Vec<TimeSeries>) -> Result<Self, SeriesError> {
        let first = items.first().ok_or(SeriesError::Empty("dataset"))?;
        let series_len = first.len();
        for (i, s) in items.iter().enumerate() {
            if s.len() != series_len {
                return Err(SeriesError::Ragged {
                    line: i + 1,
                    expected: series_len,
                    found: s.len(),
                });
            }
        }
        Ok(Self { items, series_len })
    }

    /// Number of series (N).
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Common series length (T).
    pub fn series_len(&self) -> usize {
        self.series_len
    }

    pub fn items(&self) -> &[TimeSeries] {
        &self.items
    }

    pub fn get(&self, i: usize) -> &TimeSeries {
        &self.items[i]
    }

    pub fn labels(&self) -> Vec<Option<i64>> {
        self.items.iter().map(TimeSeries::label).collect()
    }
}

/// Column separator for the UCR text format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delimiter {
    /// Detect tab vs comma from the first line.
    Auto,
    Char(char),
}

fn detect_delimiter(first_line: &str) -> char {
    if first_line.contains('\t') {
        '\t'
    } else {
        ','
    }
}

/// Loads a UCR-format text file: one series per line,
/// `label<delim>v1<delim>...<delim>vT`.
///
/// The label token is parsed as a real number and truncated toward zero.
/// All rows must have the same number of values; blank lines are skipped.
pub fn load_ucr(path: impl AsRef<Path>, delimiter: Delimiter) -> Result<Dataset, SeriesError> {
    let text = fs::read_to_string(path)?;
    parse_ucr(&text, delimiter)
}

/// Parses UCR-format text. See [`load_ucr`].
pub fn parse_ucr(text: &str, delimiter: Delimiter) -> Result<Dataset, SeriesError> {
    let mut items = Vec::new();
    let mut expected: Option<usize> = None;
    let mut delim = match delimiter {
        Delimiter::Auto => None,
        Delimiter::Char(c) => Some(c),
    };
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let line_id = lineno + 1;
        let d = *delim.get_or_insert_with(|| detect_delimiter(line));
        let mut tokens = line.split(d).filter(|t| !t.trim().is_empty());
        let label_tok = tokens.next().ok_or(SeriesError::Empty("line"))?;
        let label = label_tok
            .trim()
            .parse::<f64>()
            .map_err(|_| SeriesError::Parse {
                line: line_id,
                what: "label",
                token: label_tok.trim().to_string(),
            })?;
        if !label.is_finite() {
            return Err(SeriesError::Parse {
                line: line_id,
                what: "label",
                token: label_tok.trim().to_string(),
            });
        }
        let mut values = Vec::with_capacity(expected.unwrap_or(0));
        for tok in tokens {
            let v = tok.trim().parse::<f64>().map_err(|_| SeriesError::Parse {
                line: line_id,
                what: "value",
                token: tok.trim().to_string(),
            })?;
            if !v.is_finite() {
                return Err(SeriesError::Parse {
                    line: line_id,
                    what: "value",
                    token: tok.trim().to_string(),
                });
            }
            values.push(v);
        }
        match expected {
            None => {
                if values.is_empty() {
                    return Err(SeriesError::Ragged {
                        line: line_id,
                        expected: 1,
                        found: 0,
                    });
                }
                expected = Some(values.len());
            }
            Some(t) if values.len() != t => {
                return Err(SeriesError::Ragged {
                    line: line_id,
                    expected: t,
                    found: values.len(),
                });
            }
            Some(_) => {}
        }
        items.push(TimeSeries::with_label(values, label.trunc() as i64)?);
    }
    if items.is_empty() {
        return Err(SeriesError::Empty("UCR file"));
    }
    Dataset::new(items)
}

/// Serializes a dataset back to UCR text. Values are printed with the
/// shortest representation that round-trips `f64`, so load → save → load
/// reproduces the numeric content exactly.
pub fn format_ucr(ds: &Dataset, delim: char) -> String {
    let mut out = String::new();
    for s in ds.items() {
        let _ = write!(out, "{}", s.label().unwrap_or(0));
        for v in s.values() {
            let _ = write!(out, "{delim}{v}");
        }
        out.push('\n');
    }
    out
}

pub fn save_ucr(ds: &Dataset, path: impl AsRef<Path>, delim: char) -> Result<(), SeriesError> {
    fs::write(path, format_ucr(ds, delim))?;
    Ok(())
}

/// Z-normalizes a series to mean 0 and population standard deviation 1
/// (divide by T, not T−1). The label is preserved.
///
/// Constant series have no normalization; the caller decides how to treat
/// them, so an error is surfaced instead of guessing.
pub fn znormalize(x: &TimeSeries) -> Result<TimeSeries, SeriesError> {
    let v = x.values();
    if v.len() < 2 {
        return Err(SeriesError::TooShort { len: v.len() });
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|&a| (a - mean) * (a - mean)).sum::<f64>() / n;
    let sd = var.sqrt();
    if sd == 0.0 {
        return Err(SeriesError::DegenerateSeries);
    }
    let out: Vec<f64> = v.iter().map(|&a| (a - mean) / sd).collect();
    let mut s = TimeSeries::new(out)?;
    s.label = x.label;
    Ok(s)
}

/// Z-normalizes every member series. Fails on the first constant series.
pub fn znormalize_dataset(ds: &Dataset) -> Result<Dataset, SeriesError> {
    let items = ds
        .items()
        .iter()
        .map(znormalize)
        .collect::<Result<Vec<_>, _>>()?;
    Dataset::new(items)
}

/// True when the series already has mean ≈ 0 and population σ ≈ 1.
pub fn is_znormalized(x: &TimeSeries, tol: f64) -> bool {
    let v = x.values();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|&a| (a - mean) * (a - mean)).sum::<f64>() / n;
    mean.abs() <= tol && (var.sqrt() - 1.0).abs() <= tol
}
