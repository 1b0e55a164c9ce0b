//! Series files, command-line value syntax and atomic output.
use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use meancount_core::zeros::Rectangle;
use meancount_core::{Complex64 as C64, DirichletPolynomial};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// On-disk series: `{"coeffs": [[n, re, im], ...]}`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesFile {
    pub coeffs: Vec<(serde_json::Number, f64, f64)>,
}

/// Parses a series document. Indices must be integers `>= 1`, each at most once.
pub fn parse_series(text: &str) -> Result<DirichletPolynomial, CliError> {
    let doc: SeriesFile =
        serde_json::from_str(text).map_err(|e| CliError::Parse(format!("series JSON: {e}")))?;
    let mut seen = BTreeSet::new();
    let mut terms = Vec::with_capacity(doc.coeffs.len());
    for (n, re, im) in doc.coeffs {
        let n = n
            .as_u64()
            .filter(|&n| n >= 1)
            .ok_or_else(|| CliError::Parse(format!("index {n} is not an integer >= 1")))?;
        if !seen.insert(n) {
            return Err(CliError::Parse(format!("duplicate index {n}")));
        }
        if !(re.is_finite() && im.is_finite()) {
            return Err(CliError::Parse(format!(
                "non-finite coefficient at index {n}"
            )));
        }
        terms.push((n, C64::new(re, im)));
    }
    Ok(DirichletPolynomial::from_terms(terms))
}

pub fn parse_series_file(path: &Path) -> Result<DirichletPolynomial, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    parse_series(&text).map_err(|e| match e {
        CliError::Parse(m) => CliError::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Canonical document for `f`, indices increasing.
pub fn series_json(f: &DirichletPolynomial) -> String {
    let coeffs: Vec<_> = f
        .terms()
        .map(|(n, a)| (serde_json::Number::from(n), a.re, a.im))
        .collect();
    serde_json::to_string(&SeriesFile { coeffs }).expect("finite coefficients serialize")
}

/// `a`, `bi`, `a+bi` or `a-bi`, with `i` alone standing for `1i`.
pub fn parse_complex(text: &str) -> Result<C64, CliError> {
    let bad = || CliError::Parse(format!("complex number `{text}`"));
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let real = |x: &str| x.parse::<f64>().ok().filter(|v| v.is_finite());
    let Some(body) = s.strip_suffix('i') else {
        return real(&s).map(|re| C64::new(re, 0.0)).ok_or_else(bad);
    };
    // Split at the last sign that is not the leading one or an exponent sign.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        x => real(x),
    };
    match (real(re), im) {
        (Some(re), Some(im)) => Ok(C64::new(re, im)),
        _ => Err(bad()),
    }
}

fn parse_range(text: &str) -> Result<(f64, f64, usize), CliError> {
    let bad = || CliError::Parse(format!("range `{text}` (expected a:b:n)"));
    let parts: Vec<&str> = text.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(bad());
    };
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if n == 0 || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    Ok((a, b, n))
}

fn linspace(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| {
        if n == 1 {
            a
        } else {
            a + (b - a) * k as f64 / (n - 1) as f64
        }
    })
}

/// A single complex number, or a grid `re0:re1:n,im0:im1:m` listed row by row
/// (imaginary part outermost).
pub fn parse_points(text: &str) -> Result<Vec<C64>, CliError> {
    if !text.contains(':') {
        return Ok(vec![parse_complex(text)?]);
    }
    let Some((re, im)) = text.split_once(',') else {
        return Err(CliError::Parse(format!(
            "grid `{text}` (expected re0:re1:n,im0:im1:m)"
        )));
    };
    let (r0, r1, n) = parse_range(re)?;
    let (i0, i1, m) = parse_range(im)?;
    Ok(linspace(i0, i1, m)
        .flat_map(|y| linspace(r0, r1, n).map(move |x| C64::new(x, y)))
        .collect())
}

/// Comma-separated reals.
pub fn parse_reals(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Parse(format!("real number `{x}`")))
        })
        .collect()
}

/// `s0:s1,t0:t1`.
pub fn parse_rect(text: &str) -> Result<Rectangle, CliError> {
    let bad = || CliError::Parse(format!("rectangle `{text}` (expected s0:s1,t0:t1)"));
    let (s, t) = text.split_once(',').ok_or_else(bad)?;
    let pair = |x: &str| -> Result<(f64, f64), CliError> {
        let (a, b) = x.split_once(':').ok_or_else(bad)?;
        let a: f64 = a.trim().parse().map_err(|_| bad())?;
        let b: f64 = b.trim().parse().map_err(|_| bad())?;
        if a < b && a.is_finite() && b.is_finite() {
            Ok((a, b))
        } else {
            Err(bad())
        }
    };
    let ((s0, s1), (t0, t1)) = (pair(s)?, pair(t)?);
    Ok(Rectangle::new(s0, s1, t0, t1))
}

/// Writes through a temporary file in the target directory, then renames it
/// over `path`, so readers see either the old file or the complete new one.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
