//! Text formats: histogram datasets, weight/cost matrix files, permutations
//! and Gram matrix CSV.
//!
//! Histogram files hold one histogram per line as comma-separated
//! nonnegative integers. Weight files hold `d` lines of `d` comma-separated
//! reals, optionally preceded by a `mode: cost` or `mode: weight` header.
//! In both, blank lines and lines starting with `#` are ignored.
//! Line numbers in errors are 1-based.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::histogram::{ContingencyTable, Histogram, Permutation};
use crate::psd::GramMatrix;
use crate::weights::{WeightOrigin, WeightSpec};

/// Histograms read from a file, with the line each came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistogramRecords {
    pub histograms: Vec<Histogram>,
    pub lines: Vec<usize>,
}

impl HistogramRecords {
    pub fn line_of(&self, index: usize) -> usize {
        self.lines[index]
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn strip_brackets(s: &str, open: char, close: char) -> &str {
    let s = s.trim();
    s.strip_prefix(open)
        .and_then(|t| t.strip_suffix(close))
        .unwrap_or(s)
}

/// Splits on commas when present, otherwise on whitespace.
fn fields(s: &str) -> Box<dyn Iterator<Item = &str> + '_> {
    if s.contains(',') {
        Box::new(s.split(','))
    } else {
        Box::new(s.split_whitespace())
    }
}

fn parse_counts(s: &str, line: usize) -> Result<Vec<u64>> {
    fields(strip_brackets(s, '[', ']'))
        .map(|tok| {
            let tok = tok.trim();
            tok.parse::<u64>()
                .map_err(|_| parse_error(line, format!("`{tok}` is not a nonnegative integer")))
        })
        .collect()
}

pub fn parse_histograms(text: &str) -> Result<HistogramRecords> {
    let mut histograms = Vec::new();
    let mut lines = Vec::new();
    for (line, s) in content_lines(text) {
        let counts = parse_counts(s, line)?;
        let h = Histogram::new(counts).map_err(|e| parse_error(line, e.to_string()))?;
        histograms.push(h);
        lines.push(line);
    }
    Ok(HistogramRecords { histograms, lines })
}

/// A single histogram such as `2,5,3` or `[2,5,3]`.
pub fn parse_histogram(s: &str) -> Result<Histogram> {
    Histogram::new(parse_counts(s, 1)?)
}

/// A permutation in 1-based notation such as `3,1,2` or `(3,1,2)`.
pub fn parse_permutation(s: &str) -> Result<Permutation> {
    let image = fields(strip_brackets(s, '(', ')'))
        .map(|tok| {
            let tok = tok.trim();
            tok.parse::<usize>()
                .map_err(|_| Error::InvalidPermutation(format!("`{tok}` is not an index")))
        })
        .collect::<Result<Vec<_>>>()?;
    Permutation::from_one_based(&image)
}

fn parse_mode(s: &str) -> Option<WeightOrigin> {
    match s.trim() {
        "cost" => Some(WeightOrigin::Cost),
        "weight" => Some(WeightOrigin::Weight),
        _ => None,
    }
}

/// Parses a weight/cost matrix file.
///
/// The header, when present, decides the mode; `mode` fills in for a missing
/// header and must agree with one that is present.
pub fn parse_weight_file(text: &str, mode: Option<WeightOrigin>) -> Result<WeightSpec> {
    let mut header: Option<(usize, WeightOrigin)> = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut first_line = 0;
    for (line, s) in content_lines(text) {
        if let Some(rest) = s.strip_prefix("mode:") {
            if header.is_some() || !rows.is_empty() {
                return Err(parse_error(
                    line,
                    "the mode header must come before the matrix",
                ));
            }
            let m = parse_mode(rest)
                .ok_or_else(|| parse_error(line, format!("unknown mode `{}`", rest.trim())))?;
            header = Some((line, m));
            continue;
        }
        if rows.is_empty() {
            first_line = line;
        }
        let row = fields(s)
            .map(|tok| {
                let tok = tok.trim();
                match tok.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(parse_error(line, format!("`{tok}` is not a finite real"))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(prev) = rows.first() {
            if prev.len() != row.len() {
                return Err(parse_error(
                    line,
                    format!("row has {} entries, expected {}", row.len(), prev.len()),
                ));
            }
        }
        rows.push(row);
    }
    let origin = match (header, mode) {
        (Some((line, h)), Some(m)) if h != m => {
            return Err(parse_error(
                line,
                format!(
                    "header says `{}` but `{}` was requested",
                    h.as_str(),
                    m.as_str()
                ),
            ))
        }
        (Some((_, h)), _) => h,
        (None, Some(m)) => m,
        (None, None) => {
            return Err(parse_error(
                1,
                "missing `mode: cost` or `mode: weight` header",
            ))
        }
    };
    if rows.is_empty() {
        return Err(parse_error(1, "no matrix rows"));
    }
    if rows.len() != rows[0].len() {
        return Err(parse_error(
            first_line,
            format!(
                "matrix is {}x{}, expected square",
                rows.len(),
                rows[0].len()
            ),
        ));
    }
    let parsed = match origin {
        WeightOrigin::Cost => WeightSpec::from_cost_rows(&rows),
        WeightOrigin::Weight => WeightSpec::from_weight_rows(&rows),
    };
    parsed.map_err(|e| parse_error(first_line, e.to_string()))
}

/// Renders a weight spec in the file format, header included.
pub fn format_weight_file(w: &WeightSpec) -> String {
    let mut out = format!("mode: {}\n", w.origin().as_str());
    for row in w.supplied_rows() {
        out.push_str(&join_floats(&row));
        out.push('\n');
    }
    out
}

fn join_floats(xs: &[f64]) -> String {
    let mut s = String::new();
    for (k, x) in xs.iter().enumerate() {
        if k > 0 {
            s.push(',');
        }
        write!(s, "{x:e}").expect("writing to a String");
    }
    s
}

/// One line per row; values in shortest round-trip exponent notation.
pub fn format_gram_csv(g: &GramMatrix) -> String {
    let mut out = String::new();
    for row in g.rows() {
        out.push_str(&join_floats(row));
        out.push('\n');
    }
    out
}

/// Parses a square CSV matrix of reals, returning its size and row-major values.
pub fn parse_matrix_csv(text: &str) -> Result<(usize, Vec<f64>)> {
    let mut values = Vec::new();
    let mut n = None;
    let mut rows = 0;
    for (line, s) in content_lines(text) {
        let row = fields(s)
            .map(|tok| {
                let tok = tok.trim();
                tok.parse::<f64>()
                    .map_err(|_| parse_error(line, format!("`{tok}` is not a real")))
            })
            .collect::<Result<Vec<_>>>()?;
        match n {
            None => n = Some(row.len()),
            Some(k) if k != row.len() => {
                return Err(parse_error(
                    line,
                    format!("row has {} entries, expected {k}", row.len()),
                ))
            }
            _ => {}
        }
        values.extend(row);
        rows += 1;
    }
    let n = n.ok_or_else(|| parse_error(1, "empty matrix"))?;
    if rows != n {
        return Err(parse_error(
            1,
            format!("matrix is {rows}x{n}, expected square"),
        ));
    }
    Ok((n, values))
}

/// A table flattened row-major onto one comma-separated line.
pub fn format_table_line(x: &ContingencyTable) -> String {
    x.entries()
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psd::KernelId;
    use proptest::prelude::*;

    #[test]
    fn histograms_with_comments() {
        let text = "# dataset\n1,2,3\n\n  0, 0 ,6\n# end\n";
        let recs = parse_histograms(text).unwrap();
        assert_eq!(recs.histograms.len(), 2);
        assert_eq!(recs.histograms[1].counts(), &[0, 0, 6]);
        assert_eq!(recs.lines, vec![2, 4]);
    }

    #[test]
    fn histogram_errors_carry_line_numbers() {
        let err = parse_histograms("1,2\n1,-2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_histograms("1,2\n\n1,,2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        assert!(parse_histograms("18446744073709551615,1\n").is_err());
    }

    #[test]
    fn inline_histograms_and_permutations() {
        assert_eq!(parse_histogram("[2,5,3]").unwrap().counts(), &[2, 5, 3]);
        assert_eq!(
            parse_permutation("(3,1,2)").unwrap().one_based(),
            vec![3, 1, 2]
        );
        assert!(parse_permutation("1,1").is_err());
        assert!(parse_permutation("0,1").is_err());
        assert!(parse_permutation("x").is_err());
    }

    #[test]
    fn weight_file_modes() {
        let w = parse_weight_file("mode: cost\n0,1\n1,0\n", None).unwrap();
        assert_eq!(w.origin(), WeightOrigin::Cost);
        assert_eq!(w.weight_at(0, 1), (-1f64).exp());
        let w = parse_weight_file(
            "# K\nmode: weight\n1, 0.5\n0.5, 1\n",
            Some(WeightOrigin::Weight),
        )
        .unwrap();
        assert_eq!(w.weight_at(1, 0), 0.5);
        let w = parse_weight_file("1\n", Some(WeightOrigin::Weight)).unwrap();
        assert_eq!(w.dim(), 1);

        assert!(parse_weight_file("1\n", None).is_err());
        assert!(parse_weight_file("mode: cost\n0\n", Some(WeightOrigin::Weight)).is_err());
        assert!(parse_weight_file("mode: other\n0\n", None).is_err());
        assert!(parse_weight_file("mode: weight\n-1\n", None).is_err());
        assert!(parse_weight_file("mode: weight\n1,2\n", None).is_err());
        assert!(parse_weight_file("mode: weight\n1,2\n3\n", None).is_err());
        assert!(parse_weight_file("mode: weight\n", None).is_err());
        assert!(parse_weight_file("mode: cost\n0\nmode: cost\n", None).is_err());
        assert!(parse_weight_file("mode: cost\nnan\n", None).is_err());
    }

    #[test]
    fn gram_csv_round_trip() {
        let g = GramMatrix::new(
            2,
            vec![1.0, 1e-300, 1e-300, 0.1 + 0.2],
            KernelId::Volume,
            String::new(),
        )
        .unwrap();
        let text = format_gram_csv(&g);
        assert_eq!(text, "1e0,1e-300\n1e-300,3.0000000000000004e-1\n");
        let (n, v) = parse_matrix_csv(&text).unwrap();
        assert_eq!(n, 2);
        assert_eq!(v, g.values());
        assert!(parse_matrix_csv("1,2\n").is_err());
        assert!(parse_matrix_csv("").is_err());
    }

    #[test]
    fn weight_file_round_trip() {
        let w = WeightSpec::from_cost_rows(&[vec![0.0, 0.25], vec![1.5, 0.0]]).unwrap();
        let back = parse_weight_file(&format_weight_file(&w), None).unwrap();
        assert_eq!(back, w);
    }

    proptest! {
        #[test]
        fn histogram_text_round_trip(rows in proptest::collection::vec(proptest::collection::vec(0u64..1000, 1..6), 0..8)) {
            let text: String = rows
                .iter()
                .map(|r| r.iter().map(u64::to_string).collect::<Vec<_>>().join(",") + "\n")
                .collect();
            let recs = parse_histograms(&text).unwrap();
            let back: Vec<Vec<u64>> = recs.histograms.iter().map(|h| h.counts().to_vec()).collect();
            prop_assert_eq!(back, rows);
        }

        #[test]
        fn parsers_never_panic(s in "\\PC*") {
            let _ = parse_histograms(&s);
            let _ = parse_weight_file(&s, None);
            let _ = parse_weight_file(&s, Some(WeightOrigin::Cost));
            let _ = parse_permutation(&s);
            let _ = parse_matrix_csv(&s);
        }
    }
}
