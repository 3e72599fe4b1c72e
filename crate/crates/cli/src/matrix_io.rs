//! Distance-matrix files: CSV for people, a small binary layout for large N.
//!
//! CSV: header `prompt_id,<model_id>,...`, then one row per prompt.
//! Binary: magic `MPSMAT01`, `u64` prompt count, `u64` model count, each id as
//! a `u32` byte length plus UTF-8, then row-major `f64` values. All integers
//! and floats are little-endian.

use std::fs;
use std::io::Write;
use std::path::Path;

use mps_core::{validate_matrix, DistanceMatrix};

use crate::error::{CliError, Result};

pub const BINARY_MAGIC: &[u8; 8] = b"MPSMAT01";

/// A matrix together with the prompt ids it was read with.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedMatrix {
    pub matrix: DistanceMatrix,
    pub prompt_ids: Vec<String>,
}

/// Reads either format, picking binary when the file starts with the magic.
pub fn read_matrix(path: &Path) -> Result<LoadedMatrix> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    if bytes.starts_with(BINARY_MAGIC) {
        decode_binary(path, &bytes)
    } else {
        parse_csv(path, &bytes)
    }
}

pub fn parse_csv(path: &Path, bytes: &[u8]) -> Result<LoadedMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut records = reader.records();

    let header = match records.next() {
        Some(rec) => rec.map_err(|e| csv_error(path, e))?,
        None => return Err(CliError::parse(path, Some(1), "empty file")),
    };
    if header.get(0) != Some("prompt_id") {
        return Err(CliError::parse(
            path,
            Some(1),
            "header must start with `prompt_id`",
        ));
    }
    let model_ids: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    if model_ids.is_empty() {
        return Err(CliError::parse(path, Some(1), "header lists no models"));
    }

    let mut prompt_ids = Vec::new();
    let mut rows = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map(|p| p.line());
        if rec.len() != model_ids.len() + 1 {
            return Err(CliError::parse(
                path,
                line,
                format!(
                    "expected {} fields, found {}",
                    model_ids.len() + 1,
                    rec.len()
                ),
            ));
        }
        prompt_ids.push(rec[0].to_string());
        let row = rec
            .iter()
            .skip(1)
            .map(|field| {
                field
                    .parse::<f64>()
                    .map_err(|_| CliError::parse(path, line, format!("`{field}` is not a number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let matrix = validate_matrix(rows, model_ids)?;
    Ok(LoadedMatrix { matrix, prompt_ids })
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    let line = e.position().map(|p| p.line());
    CliError::parse(path, line, e.to_string())
}

/// Writes CSV with shortest round-trip float formatting, so reading it back
/// gives bit-identical values.
pub fn write_csv<W: Write>(
    out: W,
    matrix: &DistanceMatrix,
    prompt_ids: &[String],
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["prompt_id".to_string()];
    header.extend(matrix.model_ids().iter().cloned());
    w.write_record(&header)?;
    for (t, row) in matrix.rows().enumerate() {
        let mut rec = vec![prompt_id(prompt_ids, t)];
        rec.extend(row.iter().map(|v| format!("{v}")));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn prompt_id(ids: &[String], t: usize) -> String {
    ids.get(t).cloned().unwrap_or_else(|| t.to_string())
}

pub fn encode_binary(matrix: &DistanceMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(24 + matrix.as_row_major().len() * 8);
    out.extend_from_slice(BINARY_MAGIC);
    out.extend_from_slice(&(matrix.prompt_count() as u64).to_le_bytes());
    out.extend_from_slice(&(matrix.model_count() as u64).to_le_bytes());
    for id in matrix.model_ids() {
        out.extend_from_slice(&(id.len() as u32).to_le_bytes());
        out.extend_from_slice(id.as_bytes());
    }
    for v in matrix.as_row_major() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_binary(path: &Path, bytes: &[u8]) -> Result<LoadedMatrix> {
    let mut cur = Cursor {
        path,
        bytes,
        pos: 0,
    };
    if cur.take(8)? != BINARY_MAGIC {
        return Err(CliError::parse(path, None, "bad magic"));
    }
    let n = cur.u64()? as usize;
    let m = cur.u64()? as usize;
    let mut model_ids = Vec::with_capacity(m.min(1 << 16));
    for _ in 0..m {
        let len = cur.u32()? as usize;
        let raw = cur.take(len)?;
        let id = std::str::from_utf8(raw)
            .map_err(|_| CliError::parse(path, None, "model id is not UTF-8"))?;
        model_ids.push(id.to_string());
    }
    let count = n
        .checked_mul(m)
        .ok_or_else(|| CliError::parse(path, None, "dimensions overflow"))?;
    let mut values = Vec::with_capacity(count.min(1 << 24));
    for _ in 0..count {
        values.push(f64::from_le_bytes(cur.take(8)?.try_into().unwrap()));
    }
    if cur.pos != bytes.len() {
        return Err(CliError::parse(path, None, "trailing bytes after values"));
    }
    let matrix = DistanceMatrix::from_row_major(n, model_ids, values)?;
    Ok(LoadedMatrix {
        matrix,
        prompt_ids: (0..n).map(|t| t.to_string()).collect(),
    })
}

struct Cursor<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| {
            CliError::parse(self.path, None, format!("truncated at byte {}", self.pos))
        })?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use mps_core::MpsError;

    fn p() -> &'static Path {
        Path::new("m.csv")
    }

    #[test]
    fn reads_csv() {
        let text = "prompt_id,a,b\nq1,0.1,0.9\nq2,0,1\n";
        let m = parse_csv(p(), text.as_bytes()).unwrap();
        assert_eq!(m.prompt_ids, vec!["q1", "q2"]);
        assert_eq!(m.matrix.model_ids(), &["a".to_string(), "b".to_string()]);
        assert_eq!(m.matrix.column(1), vec![0.9, 1.0]);
    }

    #[test]
    fn bad_float_reports_line() {
        let text = "prompt_id,a,b\nq1,0.1,0.9\nq2,zero,1\n";
        match parse_csv(p(), text.as_bytes()).unwrap_err() {
            CliError::Parse { line, .. } => assert_eq!(line, Some(3)),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn ragged_row_reports_line() {
        let text = "prompt_id,a,b\nq1,0.1\n";
        match parse_csv(p(), text.as_bytes()).unwrap_err() {
            CliError::Parse { line, message, .. } => {
                assert_eq!(line, Some(2));
                assert!(message.contains("expected 3"));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn missing_header_is_parse_error() {
        let err = parse_csv(p(), b"id,a\n1,0.5\n").unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert_eq!(parse_csv(p(), b"").unwrap_err().exit_code(), 3);
    }

    #[test]
    fn out_of_range_is_domain_error() {
        let err = parse_csv(p(), b"prompt_id,a,b\nq,0.5,1.5\n").unwrap_err();
        assert!(matches!(err, CliError::Domain(MpsError::OutOfRange { .. })));
        let err = parse_csv(p(), b"prompt_id,a,a\nq,0.5,0.5\n").unwrap_err();
        assert!(matches!(
            err,
            CliError::Domain(MpsError::DuplicateModelId(_))
        ));
    }

    #[test]
    fn binary_round_trip_and_truncation() {
        let m = DistanceMatrix::from_columns(
            vec!["x".into(), "yy".into()],
            &[vec![0.1, 1.0 / 3.0], vec![0.0, 1.0]],
        )
        .unwrap();
        let bytes = encode_binary(&m);
        assert_eq!(decode_binary(p(), &bytes).unwrap().matrix, m);
        let err = decode_binary(p(), &bytes[..bytes.len() - 3]).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }
}
