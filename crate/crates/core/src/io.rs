//! Constellation file formats.
//!
//! CSV interchange: header `#gs4d-constellation v1,N=<n>,M=<m>,name=<tag>`
//! followed by M rows `label_int,x1,...,xN`. Labels 0..M-1 must each appear
//! exactly once; rows may arrive in any order and are stored by label. A JSON
//! mirror `{n_dims, points, name}` with points in label order is accepted on
//! load. Coordinates are written with shortest round-trip formatting, so a
//! save/load cycle is exact.

use crate::constellation::LabeledConstellation;
use crate::error::{Error, Result};
use serde::Deserialize;
use std::path::Path;

pub const CSV_MAGIC: &str = "#gs4d-constellation v1";

/// Serializes to the CSV interchange format.
pub fn constellation_to_csv(c: &LabeledConstellation) -> String {
    let mut out = format!(
        "{CSV_MAGIC},N={},M={},name={}\n",
        c.n_dims(),
        c.n_points(),
        c.name()
    );
    for i in 0..c.n_points() {
        out.push_str(&i.to_string());
        for x in c.point(i) {
            out.push(',');
            out.push_str(&x.to_string());
        }
        out.push('\n');
    }
    out
}

pub fn save_constellation(c: &LabeledConstellation, path: &Path) -> Result<()> {
    std::fs::write(path, constellation_to_csv(c)).map_err(|e| Error::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })
}

/// Parses the CSV interchange format. Row numbers in errors are 1-based file
/// lines, the header being line 1.
pub fn constellation_from_csv(text: &str) -> Result<LabeledConstellation> {
    let mut lines = text.lines();
    let header = lines.next().ok_or(Error::ParseError {
        row: 1,
        msg: "empty file".into(),
    })?;
    if !header.starts_with(CSV_MAGIC) {
        return Err(Error::ParseError {
            row: 1,
            msg: format!("missing '{CSV_MAGIC}' header"),
        });
    }
    let mut n_dims = 0usize;
    let mut m_points = 0usize;
    let mut name = String::new();
    for field in header[CSV_MAGIC.len()..].splitn(4, ',').skip(1).take(2) {
        match field.split_once('=') {
            Some(("N", v)) => {
                n_dims = v.trim().parse().map_err(|_| Error::ParseError {
                    row: 1,
                    msg: format!("bad N field '{v}'"),
                })?
            }
            Some(("M", v)) => {
                m_points = v.trim().parse().map_err(|_| Error::ParseError {
                    row: 1,
                    msg: format!("bad M field '{v}'"),
                })?
            }
            _ => {
                return Err(Error::ParseError {
                    row: 1,
                    msg: format!("unexpected header field '{field}'"),
                })
            }
        }
    }
    // The name may itself contain commas; everything after "name=" counts.
    if let Some(pos) = header.find(",name=") {
        name = header[pos + ",name=".len()..].to_string();
    }
    if n_dims == 0 || m_points == 0 {
        return Err(Error::ParseError {
            row: 1,
            msg: "header must declare N and M".into(),
        });
    }
    if !m_points.is_power_of_two() || m_points < 2 {
        return Err(Error::ParseError {
            row: 1,
            msg: format!("M={m_points} is not a power of two >= 2"),
        });
    }

    let mut points = vec![0.0f64; m_points * n_dims];
    let mut seen = vec![false; m_points];
    let mut n_rows = 0usize;
    for (idx, line) in lines.enumerate() {
        let row = idx + 2;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let label_txt = fields.next().unwrap();
        let label: usize = label_txt.trim().parse().map_err(|_| Error::ParseError {
            row,
            msg: format!("bad label '{label_txt}'"),
        })?;
        if label >= m_points {
            return Err(Error::ParseError {
                row,
                msg: format!("label {label} out of range for M={m_points}"),
            });
        }
        if seen[label] {
            return Err(Error::DuplicateLabel {
                label: label as u32,
            });
        }
        seen[label] = true;
        let mut got = 0usize;
        for (d, f) in fields.enumerate() {
            if d >= n_dims {
                got = d + 1;
                continue;
            }
            points[label * n_dims + d] = f.trim().parse().map_err(|_| Error::ParseError {
                row,
                msg: format!("bad coordinate '{}'", f.trim()),
            })?;
            got = d + 1;
        }
        if got != n_dims {
            return Err(Error::DimensionMismatch {
                row,
                expected: n_dims,
                got,
            });
        }
        n_rows += 1;
    }
    if n_rows != m_points {
        return Err(Error::ParseError {
            row: n_rows + 1,
            msg: format!("expected {m_points} rows, found {n_rows}"),
        });
    }
    LabeledConstellation::new(n_dims, points, &name)
}

#[derive(Deserialize)]
struct ConstellationJson {
    n_dims: usize,
    points: Vec<Vec<f64>>,
    #[serde(default)]
    name: String,
}

/// Parses the JSON mirror; points are rows in label order.
pub fn constellation_from_json(text: &str) -> Result<LabeledConstellation> {
    let parsed: ConstellationJson =
        serde_json::from_str(text).map_err(|e| Error::ParseError {
            row: e.line(),
            msg: e.to_string(),
        })?;
    let mut flat = Vec::with_capacity(parsed.points.len() * parsed.n_dims);
    for (i, row) in parsed.points.iter().enumerate() {
        if row.len() != parsed.n_dims {
            return Err(Error::DimensionMismatch {
                row: i + 1,
                expected: parsed.n_dims,
                got: row.len(),
            });
        }
        flat.extend_from_slice(row);
    }
    LabeledConstellation::new(parsed.n_dims, flat, &parsed.name)
}

/// Loads a constellation file, sniffing JSON (leading '{') vs CSV.
pub fn load_constellation(path: &Path) -> Result<LabeledConstellation> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    if text.trim_start().starts_with('{') {
        constellation_from_json(&text)
    } else {
        constellation_from_csv(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::build_catalog_format;

    #[test]
    fn csv_round_trip_is_exact_and_byte_stable() {
        let c = build_catalog_format("128SP-QAM16", None).unwrap();
        let text = constellation_to_csv(&c);
        let back = constellation_from_csv(&text).unwrap();
        assert_eq!(back.n_dims(), 4);
        assert_eq!(back.name(), "128SP-QAM16");
        assert_eq!(c.coords(), back.coords());
        assert_eq!(text, constellation_to_csv(&back));
    }

    #[test]
    fn csv_accepts_permuted_rows() {
        let c = build_catalog_format("PM-QPSK", None).unwrap();
        let text = constellation_to_csv(&c);
        let mut lines: Vec<&str> = text.lines().collect();
        lines[1..].reverse();
        let back = constellation_from_csv(&(lines.join("\n") + "\n")).unwrap();
        assert_eq!(c.coords(), back.coords());
    }

    #[test]
    fn duplicate_label_is_rejected() {
        let text = "#gs4d-constellation v1,N=2,M=2,name=t\n0,1.0,1.0\n0,-1.0,-1.0\n";
        assert_eq!(
            constellation_from_csv(text).unwrap_err(),
            Error::DuplicateLabel { label: 0 }
        );
    }

    #[test]
    fn non_power_of_two_is_a_parse_error() {
        let text = "#gs4d-constellation v1,N=2,M=3,name=t\n0,1,1\n1,2,2\n2,3,3\n";
        assert!(matches!(
            constellation_from_csv(text).unwrap_err(),
            Error::ParseError { row: 1, .. }
        ));
    }

    #[test]
    fn bad_coordinate_reports_the_row() {
        let text = "#gs4d-constellation v1,N=2,M=2,name=t\n0,1.0,oops\n1,-1.0,-1.0\n";
        match constellation_from_csv(text).unwrap_err() {
            Error::ParseError { row: 2, msg } => assert!(msg.contains("oops")),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn short_row_reports_dimension_mismatch() {
        let text = "#gs4d-constellation v1,N=4,M=2,name=t\n0,1,1,1\n1,2,2,2,2\n";
        assert_eq!(
            constellation_from_csv(text).unwrap_err(),
            Error::DimensionMismatch {
                row: 2,
                expected: 4,
                got: 3
            }
        );
    }

    #[test]
    fn json_mirror_loads() {
        let text = r#"{"n_dims": 2, "name": "j", "points": [[1,1],[1,-1],[-1,1],[-1,-1]]}"#;
        let c = constellation_from_json(text).unwrap();
        assert_eq!(c.n_points(), 4);
        assert_eq!(c.point(1), &[1.0, -1.0]);

        let ragged = r#"{"n_dims": 2, "points": [[1,1],[1]]}"#;
        assert!(matches!(
            constellation_from_json(ragged).unwrap_err(),
            Error::DimensionMismatch { row: 2, .. }
        ));
    }

    #[test]
    fn file_round_trip() {
        let dir = std::env::temp_dir().join("gs4d-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("pmqpsk.csv");
        let c = build_catalog_format("PM-QPSK", None).unwrap();
        save_constellation(&c, &path).unwrap();
        let back = load_constellation(&path).unwrap();
        assert_eq!(c.coords(), back.coords());
        std::fs::remove_dir_all(&dir).ok();
    }
}
