//! Raw record CSV and the grouped summary derived from it.
//!
//! Every float leaves the program as a fixed 6-decimal string. The summary
//! is always computed from those rounded values, so summarizing in memory
//! and summarizing a re-read CSV give bit-identical results.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::IoError;
use crate::harness::RunRecord;
use crate::stats::{summarize, BoxplotStats};

pub const CSV_HEADER: [&str; 11] = [
    "scenario",
    "repetition",
    "sampler",
    "budget",
    "estimator",
    "estimate_mean",
    "estimate_median",
    "estimate_q25",
    "estimate_q75",
    "true_baseline",
    "wall_ms",
];

/// One CSV row, with floats as written (already rounded).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordRow {
    pub scenario: String,
    pub repetition: usize,
    pub sampler: String,
    pub budget: usize,
    pub estimator: String,
    pub estimate_mean: f64,
    pub estimate_median: f64,
    pub estimate_q25: f64,
    pub estimate_q75: f64,
    pub true_baseline: f64,
    pub wall_ms: f64,
}

/// `value` with 6 fractional digits; rejects NaN and infinities.
pub fn format_decimal(column: &str, value: f64) -> Result<String, IoError> {
    if !value.is_finite() {
        return Err(IoError::NonFinite { column: column.to_string(), value });
    }
    // adding 0.0 turns −0 into +0
    Ok(format!("{:.6}", value + 0.0))
}

/// The value a 6-decimal round trip through text produces.
pub fn round6(column: &str, value: f64) -> Result<f64, IoError> {
    Ok(format_decimal(column, value)?.parse().expect("formatted decimal parses"))
}

impl RecordRow {
    pub fn from_record(r: &RunRecord) -> Result<Self, IoError> {
        Ok(Self {
            scenario: r.scenario.clone(),
            repetition: r.repetition,
            sampler: r.sampler.clone(),
            budget: r.budget,
            estimator: r.estimator.clone(),
            estimate_mean: round6("estimate_mean", r.estimate.mean)?,
            estimate_median: round6("estimate_median", r.estimate.median)?,
            estimate_q25: round6("estimate_q25", r.estimate.q25)?,
            estimate_q75: round6("estimate_q75", r.estimate.q75)?,
            true_baseline: round6("true_baseline", r.true_baseline)?,
            wall_ms: round6("wall_ms", r.wall_ms)?,
        })
    }

    fn fields(&self) -> Result<[String; 11], IoError> {
        Ok([
            self.scenario.clone(),
            self.repetition.to_string(),
            self.sampler.clone(),
            self.budget.to_string(),
            self.estimator.clone(),
            format_decimal("estimate_mean", self.estimate_mean)?,
            format_decimal("estimate_median", self.estimate_median)?,
            format_decimal("estimate_q25", self.estimate_q25)?,
            format_decimal("estimate_q75", self.estimate_q75)?,
            format_decimal("true_baseline", self.true_baseline)?,
            format_decimal("wall_ms", self.wall_ms)?,
        ])
    }
}

/// Writes the header and one row per record.
pub fn write_records_csv<W: Write>(records: &[RunRecord], out: W) -> Result<(), IoError> {
    let rows = records.iter().map(RecordRow::from_record).collect::<Result<Vec<_>, _>>()?;
    write_rows_csv(&rows, out)
}

pub fn write_rows_csv<W: Write>(rows: &[RecordRow], out: W) -> Result<(), IoError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(row.fields()?)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records_csv<R: Read>(input: R) -> Result<Vec<RecordRow>, IoError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(IoError::Csv(format!("unexpected header {:?}", header.join(","))));
    }
    let mut rows = Vec::new();
    for (i, row) in r.deserialize::<RecordRow>().enumerate() {
        let row = row.map_err(|e| IoError::Csv(format!("row {}: {e}", i + 2)))?;
        for (name, v) in [
            ("estimate_mean", row.estimate_mean),
            ("estimate_median", row.estimate_median),
            ("estimate_q25", row.estimate_q25),
            ("estimate_q75", row.estimate_q75),
            ("true_baseline", row.true_baseline),
            ("wall_ms", row.wall_ms),
        ] {
            if !v.is_finite() {
                return Err(IoError::Csv(format!("row {}: {name} is not finite", i + 2)));
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Distribution of one estimator over repetitions, for one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryGroup {
    pub scenario: String,
    pub sampler: String,
    pub budget: usize,
    pub estimator: String,
    /// Boxplot of the per-repetition estimate means.
    pub estimate: BoxplotStats,
    /// Boxplot of the per-repetition true baselines.
    pub true_baseline: BoxplotStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub groups: Vec<SummaryGroup>,
}

/// Groups rows by (scenario, sampler, budget, estimator), in order of first
/// appearance.
pub fn summarize_rows(rows: &[RecordRow]) -> Result<Summary, IoError> {
    let mut keys: Vec<(&str, &str, usize, &str)> = Vec::new();
    let mut values: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    for row in rows {
        let key = (row.scenario.as_str(), row.sampler.as_str(), row.budget, row.estimator.as_str());
        let slot = match keys.iter().position(|k| *k == key) {
            Some(i) => i,
            None => {
                keys.push(key);
                values.push((Vec::new(), Vec::new()));
                keys.len() - 1
            }
        };
        values[slot].0.push(row.estimate_mean);
        values[slot].1.push(row.true_baseline);
    }
    let groups = keys
        .into_iter()
        .zip(values)
        .map(|((scenario, sampler, budget, estimator), (est, tb))| {
            let stats = |v: &[f64]| summarize(v).map_err(|e| IoError::Csv(format!("{scenario}/{sampler}/{budget}/{estimator}: {e}")));
            Ok(SummaryGroup {
                scenario: scenario.to_string(),
                sampler: sampler.to_string(),
                budget,
                estimator: estimator.to_string(),
                estimate: stats(&est)?,
                true_baseline: stats(&tb)?,
            })
        })
        .collect::<Result<_, IoError>>()?;
    Ok(Summary { groups })
}

pub fn summarize_records(records: &[RunRecord]) -> Result<Summary, IoError> {
    let rows = records.iter().map(RecordRow::from_record).collect::<Result<Vec<_>, _>>()?;
    summarize_rows(&rows)
}

pub fn write_summary_json<W: Write>(summary: &Summary, mut out: W) -> Result<(), IoError> {
    for g in &summary.groups {
        for s in [&g.estimate, &g.true_baseline] {
            for (name, v) in [
                ("mean", s.mean),
                ("median", s.median),
                ("q25", s.q25),
                ("q75", s.q75),
                ("whisker_low", s.whisker_low),
                ("whisker_high", s.whisker_high),
            ] {
                if !v.is_finite() {
                    return Err(IoError::NonFinite { column: format!("summary {}/{}: {name}", g.sampler, g.estimator), value: v });
                }
            }
        }
    }
    serde_json::to_writer_pretty(&mut out, summary).map_err(|e| IoError::Csv(e.to_string()))?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(rep: usize, estimator: &str, mean: f64, tb: f64) -> RunRecord {
        RunRecord {
            scenario: "estimator-comparison".into(),
            repetition: rep,
            sampler: "unbiased".into(),
            budget: 10,
            estimator: estimator.into(),
            estimate: BoxplotStats::point(mean),
            true_baseline: tb,
            wall_ms: 1.25,
        }
    }

    fn csv_text(records: &[RunRecord]) -> String {
        let mut buf = Vec::new();
        write_records_csv(records, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn header_only_for_no_records() {
        assert_eq!(csv_text(&[]), format!("{}\n", CSV_HEADER.join(",")));
    }

    #[test]
    fn six_decimal_format() {
        assert_eq!(format_decimal("x", 0.5).unwrap(), "0.500000");
        assert_eq!(format_decimal("x", -0.0).unwrap(), "0.000000");
        assert_eq!(format_decimal("x", 1.0 / 3.0).unwrap(), "0.333333");
        let text = csv_text(&[record(0, "cv-3fold", 0.5, 0.9)]);
        let line = text.lines().nth(1).unwrap();
        assert_eq!(line, "estimator-comparison,0,unbiased,10,cv-3fold,0.500000,0.500000,0.500000,0.500000,0.900000,1.250000");
        assert!(!text.contains('\r'));
    }

    #[test]
    fn non_finite_values_rejected() {
        let mut buf = Vec::new();
        let err = write_records_csv(&[record(0, "cv", f64::NAN, 0.9)], &mut buf).unwrap_err();
        assert!(matches!(err, IoError::NonFinite { .. }), "{err}");
        assert!(write_records_csv(&[record(0, "cv", 0.5, f64::INFINITY)], &mut Vec::new()).is_err());
    }

    #[test]
    fn summary_round_trips_bit_exactly() {
        let records: Vec<RunRecord> = (0..40)
            .flat_map(|i| {
                let v = ((i * 7919) % 101) as f64 / 101.0 + 1e-9 * i as f64;
                [record(i, "a", v, 0.93 + v * 1e-3), record(i, "b", 1.0 - v / 3.0, 0.91)]
            })
            .collect();
        let in_memory = summarize_records(&records).unwrap();
        let rows = read_records_csv(csv_text(&records).as_bytes()).unwrap();
        assert_eq!(summarize_rows(&rows).unwrap(), in_memory);
        assert_eq!(in_memory.groups.len(), 2);
        assert_eq!(in_memory.groups[0].estimator, "a");
        assert_eq!(in_memory.groups[0].estimate.n, 40);

        let mut json = Vec::new();
        write_summary_json(&in_memory, &mut json).unwrap();
        let back: Summary = serde_json::from_slice(&json).unwrap();
        assert_eq!(back, in_memory);
    }

    #[test]
    fn reader_rejects_foreign_header() {
        let err = read_records_csv("a,b,c\n1,2,3\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("header"), "{err}");
        let bad = format!("{}\nx,notanumber,s,1,e,0,0,0,0,0,0\n", CSV_HEADER.join(","));
        assert!(read_records_csv(bad.as_bytes()).unwrap_err().to_string().contains("row 2"));
    }
}
