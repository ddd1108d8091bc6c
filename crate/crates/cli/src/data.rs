//! Dataset ingestion from `t,value` CSV files.

use std::path::Path;

use plc_core::fit::{DataPoint, Dataset};

use crate::CliError;

/// Reads a usage-fraction series.
///
/// With a header row the `t` and `value` columns are used when present,
/// otherwise the first two columns. A headerless file is read as `t,value`
/// with a warning; a single column is read as values indexed by row number.
/// Blank lines and lines starting with `#` are skipped.
pub fn read_dataset(path: &Path, percent: bool) -> Result<Dataset, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    parse_dataset(&text, &label, percent)
}

pub fn parse_dataset(text: &str, label: &str, percent: bool) -> Result<Dataset, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows: Vec<(u64, Vec<String>)> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| CliError::input(format!("malformed CSV: {e}")))?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let line = rec.position().map_or(0, |p| p.line());
        rows.push((line, rec.iter().map(str::to_owned).collect()));
    }
    if rows.is_empty() {
        return Err(CliError::input("input contains no data rows"));
    }

    let has_header = rows[0].1.iter().any(|f| f.parse::<f64>().is_err());
    let (t_col, v_col) = if has_header {
        let header: Vec<String> = rows[0].1.iter().map(|h| h.to_ascii_lowercase()).collect();
        rows.remove(0);
        let find = |names: &[&str]| header.iter().position(|h| names.contains(&h.as_str()));
        match header.len() {
            1 => (None, 0),
            _ => (
                Some(find(&["t", "time", "period"]).unwrap_or(0)),
                find(&["value", "f", "fraction", "share"]).unwrap_or(1),
            ),
        }
    } else {
        let width = rows[0].1.len();
        if width >= 2 {
            eprintln!("warning: no header row; reading columns as t,value");
            (Some(0), 1)
        } else {
            (None, 0)
        }
    };
    if rows.is_empty() {
        return Err(CliError::input("input contains no data rows"));
    }

    let scale = if percent { 0.01 } else { 1.0 };
    let mut points = Vec::with_capacity(rows.len());
    for (i, (line, fields)) in rows.iter().enumerate() {
        let get = |col: usize, what: &str| -> Result<f64, CliError> {
            let raw = fields
                .get(col)
                .ok_or_else(|| CliError::input(format!("line {line}: missing {what} column")))?;
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::input(format!("line {line}: malformed number `{raw}`")))
        };
        let t = match t_col {
            Some(c) => get(c, "time")?,
            None => i as f64,
        };
        let f = get(v_col, "value")? * scale;
        points.push(DataPoint { t, f });
    }
    Dataset::new(label, points).map_err(|e| {
        let hint = if percent {
            ""
        } else {
            " (use --percent for values given in percent)"
        };
        CliError::input(format!("{e}{hint}"))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_columns() {
        let d = parse_dataset("t,value\n0,0.1\n1,0.2\n", "x", false).unwrap();
        assert_eq!(d.times(), vec![0.0, 1.0]);
        let d = parse_dataset("value,t\n0.1,5\n0.2,6\n", "x", false).unwrap();
        assert_eq!(d.times(), vec![5.0, 6.0]);
        assert_eq!(d.values(), vec![0.1, 0.2]);
    }

    #[test]
    fn headerless_and_single_column() {
        let d = parse_dataset("3,0.1\n4,0.2\n", "x", false).unwrap();
        assert_eq!(d.times(), vec![3.0, 4.0]);
        let d = parse_dataset("0.1\n0.2\n0.4\n", "x", false).unwrap();
        assert_eq!(d.times(), vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn percent_and_errors() {
        let d = parse_dataset("t,value\n0,10\n1,20\n", "x", true).unwrap();
        assert_eq!(d.values(), vec![0.1, 0.2]);
        assert!(parse_dataset("", "x", false).is_err());
        assert!(parse_dataset("t,value\n", "x", false).is_err());
        assert!(parse_dataset("t,value\n0,abc\n", "x", false).is_err());
        assert!(parse_dataset("t,value\n0,10\n", "x", false).is_err());
    }
}
