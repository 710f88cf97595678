//! Text form of marginals: `family:key=val,...`.
//!
//! ```text
//! uniform:a=<f>,b=<f>        normal:mu=<f>,sigma=<f>     student:nu=<f>
//! laplace:mu=<f>,b=<f>       lognormal:mu=<f>,sigma=<f>
//! discrete:points=<f;f;...>,probs=<f;f;...>
//! empirical:<path.csv>
//! ```

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use super::{Kind, Marginal};
use crate::error::{Error, Result};

fn perr(pos: usize, msg: impl Into<String>) -> Error {
    Error::Parse { pos, msg: msg.into() }
}

/// Parses one marginal spec. Positions in errors are byte offsets into `spec`.
pub fn parse_marginal(spec: &str) -> Result<Marginal> {
    let colon = spec
        .find(':')
        .ok_or_else(|| perr(0, format!("expected `family:params`, got {spec:?}")))?;
    let family = spec[..colon].trim();
    let body_start = colon + 1;
    let body = &spec[body_start..];

    if family == "empirical" {
        let path = body.trim();
        if path.is_empty() {
            return Err(perr(body_start, "empirical needs a CSV path"));
        }
        return load_empirical(Path::new(path));
    }

    let params = split_params(body, body_start)?;
    let expected: &[&str] = match family {
        "uniform" => &["a", "b"],
        "normal" | "lognormal" => &["mu", "sigma"],
        "student" => &["nu"],
        "laplace" => &["mu", "b"],
        "discrete" => &["points", "probs"],
        _ => return Err(perr(0, format!("unknown family {family:?}"))),
    };
    for (key, &(pos, _, _)) in &params {
        if !expected.contains(&key.as_str()) {
            return Err(perr(pos, format!("unknown parameter {key:?} for {family}")));
        }
    }
    let raw = |key: &str| -> Result<(usize, &str)> {
        params
            .get(key)
            .map(|&(_, pos, text)| (pos, text))
            .ok_or_else(|| perr(spec.len(), format!("missing parameter {key:?} for {family}")))
    };
    let num = |key: &str| -> Result<f64> {
        let (pos, text) = raw(key)?;
        parse_f64(text, pos)
    };
    let list = |key: &str| -> Result<Vec<f64>> {
        let (pos, text) = raw(key)?;
        let mut offset = pos;
        let mut out = Vec::new();
        for item in text.split(';') {
            out.push(parse_f64(item, offset)?);
            offset += item.len() + 1;
        }
        Ok(out)
    };

    let kind = match family {
        "uniform" => Kind::Uniform {
            a: num("a")?,
            b: num("b")?,
        },
        "normal" => Kind::Normal {
            mu: num("mu")?,
            sigma: num("sigma")?,
        },
        "lognormal" => Kind::LogNormal {
            mu: num("mu")?,
            sigma: num("sigma")?,
        },
        "student" => Kind::StudentT { nu: num("nu")? },
        "laplace" => Kind::Laplace {
            mu: num("mu")?,
            b: num("b")?,
        },
        "discrete" => Kind::Discrete {
            points: list("points")?,
            probs: list("probs")?,
        },
        _ => unreachable!(),
    };
    if let Err(bad) = kind.validate() {
        let pos = params.get(bad.name).map_or(body_start, |&(_, p, _)| p);
        return Err(perr(pos, bad.msg));
    }
    Marginal::new(kind)
}

/// `key=value` pairs with the byte offsets of the key and of the value.
fn split_params(body: &str, start: usize) -> Result<HashMap<String, (usize, usize, &str)>> {
    let mut out = HashMap::new();
    let mut offset = start;
    for item in body.split(',') {
        let eq = item
            .find('=')
            .ok_or_else(|| perr(offset, format!("expected key=value, got {item:?}")))?;
        let key = item[..eq].trim().to_string();
        let value_pos = offset + eq + 1;
        if out.insert(key.clone(), (offset, value_pos, &item[eq + 1..])).is_some() {
            return Err(perr(offset, format!("duplicate parameter {key:?}")));
        }
        offset += item.len() + 1;
    }
    Ok(out)
}

fn parse_f64(text: &str, pos: usize) -> Result<f64> {
    let t = text.trim();
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(perr(pos, format!("invalid number {t:?}"))),
    }
}

/// Splits a `;`-separated list of specs.
///
/// `;` also separates the values of a discrete spec, so a new spec starts only
/// at a segment that begins with `family:`.
pub fn parse_marginal_list(specs: &str) -> Result<Vec<Marginal>> {
    let mut groups: Vec<(usize, String)> = Vec::new();
    let mut offset = 0;
    for seg in specs.split(';') {
        let starts_spec = seg
            .trim_start()
            .split_once(':')
            .is_some_and(|(head, _)| !head.is_empty() && head.chars().all(|c| c.is_ascii_alphabetic()));
        match groups.last_mut() {
            Some((_, text)) if !starts_spec => {
                text.push(';');
                text.push_str(seg);
            }
            _ => groups.push((offset, seg.to_string())),
        }
        offset += seg.len() + 1;
    }
    groups
        .into_iter()
        .filter(|(_, text)| !text.trim().is_empty())
        .map(|(pos, text)| {
            let lead = text.len() - text.trim_start().len();
            parse_marginal(text.trim()).map_err(|e| match e {
                Error::Parse { pos: p, msg } => Error::Parse {
                    pos: pos + lead + p,
                    msg,
                },
                other => other,
            })
        })
        .collect()
}

/// Reads one numeric column; a non-numeric first row is taken as a header.
fn load_empirical(path: &Path) -> Result<Marginal> {
    let data_err = |msg: String| Error::Data {
        path: path.to_path_buf(),
        msg,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| data_err(e.to_string()))?;
    let mut samples = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| data_err(e.to_string()))?;
        if record.len() != 1 {
            return Err(data_err(format!(
                "line {}: expected one column, found {}",
                line + 1,
                record.len()
            )));
        }
        match record[0].parse::<f64>() {
            Ok(v) if v.is_finite() => samples.push(v),
            _ if line == 0 => continue,
            _ => return Err(data_err(format!("line {}: invalid number {:?}", line + 1, &record[0]))),
        }
    }
    samples.sort_by(f64::total_cmp);
    Marginal::new(Kind::Empirical {
        samples,
        source: Some(PathBuf::from(path)),
    })
    .map_err(|e| data_err(e.to_string()))
}
