//! LIBSVM / SVMlight text format: `<label> <index>:<value> ...` per line.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

use super::dataset::{Dataset, Example};

fn parse_label(token: &str, line: usize) -> Result<f64> {
    let value: f64 = token.parse().map_err(|_| Error::Parse {
        line,
        message: format!("label {token:?} is not numeric"),
    })?;
    if value == 1.0 {
        Ok(1.0)
    } else if value == 0.0 || value == -1.0 {
        Ok(-1.0)
    } else {
        Err(Error::Parse {
            line,
            message: format!("label {token:?} is not binary; multiclass data is not supported"),
        })
    }
}

/// Parses binary-labelled LIBSVM text. `#` starts a comment, blank lines
/// are skipped, LF and CRLF endings are accepted. Labels `1`/`+1` map to
/// `+1`; `0`/`-1` map to `-1`.
pub fn parse_libsvm(text: &str) -> Result<Dataset> {
    let mut examples = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_ascii_whitespace();
        let label = parse_label(tokens.next().unwrap_or_default(), line_no)?;
        let mut features = Vec::new();
        let mut last = 0usize;
        for token in tokens {
            let (idx, val) = token.split_once(':').ok_or_else(|| Error::Parse {
                line: line_no,
                message: format!("malformed feature {token:?}, expected index:value"),
            })?;
            let idx: usize = idx.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("feature index {idx:?} is not a positive integer"),
            })?;
            if idx == 0 {
                return Err(Error::Parse {
                    line: line_no,
                    message: "feature indices are 1-based".into(),
                });
            }
            if idx <= last {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("feature index {idx} is not ascending (previous {last})"),
                });
            }
            let val: f64 = val.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("feature value {val:?} is not numeric"),
            })?;
            if !val.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("feature value {val:?} is not finite"),
                });
            }
            features.push((idx, val));
            last = idx;
        }
        examples.push(Example { features, label });
    }
    Ok(Dataset::new(examples))
}

pub fn read_libsvm(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_libsvm(&text)
}

/// Writes a dataset back out; values use the shortest representation that
/// parses back to the same `f64`.
pub fn serialize_libsvm(data: &Dataset) -> String {
    let mut out = String::new();
    for ex in &data.examples {
        out.push_str(if ex.label > 0.0 { "+1" } else { "-1" });
        for &(i, v) in &ex.features {
            let _ = write!(out, " {i}:{v}");
        }
        out.push('\n');
    }
    out
}
