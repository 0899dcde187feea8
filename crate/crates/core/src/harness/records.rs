use std::io::{BufRead, Write};

use super::ExperimentRecord;
use crate::error::Result;

pub const CENSUS_HEADER: &str = "d,epsilon,seed,giant,second,max_nongiant_over_d";

/// Appends one record as a single JSON line.
pub fn write_record<W: Write>(out: &mut W, record: &ExperimentRecord) -> Result<()> {
    serde_json::to_writer(&mut *out, record)?;
    out.write_all(b"\n")?;
    Ok(())
}

/// The readable records of a line-delimited file and what was skipped.
#[derive(Clone, Debug, Default)]
pub struct RecordFile {
    pub records: Vec<ExperimentRecord>,
    /// 1-based line numbers with their parse errors.
    pub skipped: Vec<(usize, String)>,
}

impl RecordFile {
    /// Non-blank lines seen.
    pub fn lines(&self) -> usize {
        self.records.len() + self.skipped.len()
    }
}

/// Parses every non-blank line; malformed lines are skipped, not fatal.
pub fn read_records<R: BufRead>(input: R) -> Result<RecordFile> {
    let mut file = RecordFile::default();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line) {
            Ok(r) => file.records.push(r),
            Err(e) => file.skipped.push((i + 1, e.to_string())),
        }
    }
    Ok(file)
}

pub fn write_census_csv<W: Write>(out: &mut W, records: &[ExperimentRecord]) -> Result<()> {
    writeln!(out, "{CENSUS_HEADER}")?;
    for r in records {
        writeln!(out, "{},{},{},{},{},{}", r.d, r.epsilon, r.seed, r.giant, r.second, r.second as f64 / r.d as f64)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{run_trial, TrialConfig};

    #[test]
    fn round_trip_with_corrupt_line() {
        let mut buf = Vec::new();
        let mut originals = Vec::new();
        for seed in 0..9 {
            let r = run_trial(&TrialConfig::new(8, 0.2, seed)).unwrap();
            write_record(&mut buf, &r).unwrap();
            originals.push(r);
        }
        buf.extend_from_slice(b"{\"schema_version\": 1, truncated\n\n");
        let file = read_records(buf.as_slice()).unwrap();
        assert_eq!(file.records, originals);
        assert_eq!(file.skipped.len(), 1);
        assert_eq!(file.skipped[0].0, 10);
        assert_eq!(file.lines(), 10);
    }

    #[test]
    fn census_rows() {
        let r = run_trial(&TrialConfig::new(8, 0.2, 3)).unwrap();
        let mut out = Vec::new();
        write_census_csv(&mut out, std::slice::from_ref(&r)).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CENSUS_HEADER);
        assert_eq!(lines[1].split(',').count(), 6);
        assert!(lines[1].starts_with("8,0.2,3,"));
    }
}
