//! Result persistence: one per-replication file and one summary file per
//! run, comma-separated, overwritten idempotently. Floats are printed in
//! Rust's shortest round-trip form so reruns are byte-identical.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::experiment::{ExperimentOutput, ReplicationRecord, SummaryRow};

pub const SUMMARY_HEADER: &str = "label,criterion,n,M,family,reps,p_correct,se_correct,p_ordering,mean_pred_error,mean_pred_error_per_n";
pub const REPLICATION_HEADER: &str =
    "label,criterion,n,rep,selected,correct,ordering_correct,pred_error";

/// Paths written by [`emit_results`].
#[derive(Debug, Clone)]
pub struct EmittedFiles {
    pub summary: PathBuf,
    pub replications: PathBuf,
}

fn selected_field(record: &ReplicationRecord) -> String {
    record
        .selected
        .indices()
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

fn summary_line(row: &SummaryRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        row.label,
        row.criterion,
        row.n,
        row.m,
        row.family,
        row.reps,
        row.p_correct,
        row.se_correct,
        row.p_ordering,
        row.mean_pred_error,
        row.mean_pred_error_per_n
    )
}

fn replication_line(record: &ReplicationRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{}",
        record.label,
        record.criterion,
        record.n,
        record.rep,
        selected_field(record),
        record.correct,
        record.ordering_correct,
        record.pred_error
    )
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `<stem>_summary.csv` and `<stem>_replications.csv` under `dir`.
pub fn emit_results(output: &ExperimentOutput, dir: &Path, stem: &str) -> Result<EmittedFiles> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })?;
    let summary_path = dir.join(format!("{stem}_summary.csv"));
    let replication_path = dir.join(format!("{stem}_replications.csv"));

    let mut summary = String::from(SUMMARY_HEADER);
    summary.push('\n');
    for row in &output.summaries {
        summary.push_str(&summary_line(row));
        summary.push('\n');
    }
    write_file(&summary_path, &summary)?;

    let mut reps = String::from(REPLICATION_HEADER);
    reps.push('\n');
    for record in &output.records {
        reps.push_str(&replication_line(record));
        reps.push('\n');
    }
    write_file(&replication_path, &reps)?;

    Ok(EmittedFiles { summary: summary_path, replications: replication_path })
}

/// Reads a summary file back; the round-trip inverse of [`emit_results`].
pub fn parse_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line != SUMMARY_HEADER {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: 1,
                    msg: "unexpected summary header".into(),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 11 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                msg: format!("expected 11 fields, found {}", fields.len()),
            });
        }
        let parse_f = |s: &str, line_no: usize| -> Result<f64> {
            s.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                msg: format!("'{s}' is not a number"),
            })
        };
        let parse_u = |s: &str, line_no: usize| -> Result<usize> {
            s.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                msg: format!("'{s}' is not an integer"),
            })
        };
        rows.push(SummaryRow {
            label: fields[0].to_string(),
            criterion: fields[1].to_string(),
            n: parse_u(fields[2], i + 1)?,
            m: parse_u(fields[3], i + 1)?,
            family: fields[4].to_string(),
            reps: parse_u(fields[5], i + 1)?,
            p_correct: parse_f(fields[6], i + 1)?,
            se_correct: parse_f(fields[7], i + 1)?,
            p_ordering: parse_f(fields[8], i + 1)?,
            mean_pred_error: parse_f(fields[9], i + 1)?,
            mean_pred_error_per_n: parse_f(fields[10], i + 1)?,
        });
    }
    Ok(rows)
}

/// Fixed-width text table of the summary rows for terminal output.
pub fn format_summary_table(rows: &[SummaryRow]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<10} {:<14} {:>6} {:>4} {:>8} {:>6} {:>10} {:>10} {:>10} {:>14} {:>14}\n",
        "label", "criterion", "n", "M", "family", "reps", "p_correct", "se", "p_order", "pred_err", "pred_err/n"
    ));
    for row in rows {
        out.push_str(&format!(
            "{:<10} {:<14} {:>6} {:>4} {:>8} {:>6} {:>10.4} {:>10.4} {:>10.4} {:>14.6} {:>14.6}\n",
            row.label,
            row.criterion,
            row.n,
            row.m,
            row.family,
            row.reps,
            row.p_correct,
            row.se_correct,
            row.p_ordering,
            row.mean_pred_error,
            row.mean_pred_error_per_n
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regcore::SubsetIndex;

    fn sample_output() -> ExperimentOutput {
        ExperimentOutput {
            records: vec![ReplicationRecord {
                label: "demo".into(),
                criterion: "bic".into(),
                n: 40,
                rep: 0,
                selected: SubsetIndex::new(vec![1, 3], 4).unwrap(),
                correct: true,
                ordering_correct: false,
                pred_error: 0.12345678901234567,
            }],
            summaries: vec![SummaryRow {
                label: "demo".into(),
                criterion: "bic".into(),
                n: 40,
                m: 4,
                family: "greedy".into(),
                reps: 1,
                p_correct: 1.0,
                se_correct: 0.0,
                p_ordering: 0.0,
                mean_pred_error: 0.12345678901234567,
                mean_pred_error_per_n: 0.12345678901234567 / 40.0,
            }],
        }
    }

    #[test]
    fn round_trip_summary() {
        let dir = std::env::temp_dir().join("pvselect_emit_test");
        let output = sample_output();
        let files = emit_results(&output, &dir, "demo").unwrap();
        let parsed = parse_summary(&files.summary).unwrap();
        assert_eq!(parsed, output.summaries);
        // Idempotent overwrite.
        let files2 = emit_results(&output, &dir, "demo").unwrap();
        assert_eq!(files.summary, files2.summary);
        let parsed2 = parse_summary(&files2.summary).unwrap();
        assert_eq!(parsed2, output.summaries);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn empty_rows_produce_header_only_files() {
        let dir = std::env::temp_dir().join("pvselect_emit_empty");
        let output = ExperimentOutput { records: vec![], summaries: vec![] };
        let files = emit_results(&output, &dir, "empty").unwrap();
        let summary = std::fs::read_to_string(&files.summary).unwrap();
        assert_eq!(summary, format!("{SUMMARY_HEADER}\n"));
        let reps = std::fs::read_to_string(&files.replications).unwrap();
        assert_eq!(reps, format!("{REPLICATION_HEADER}\n"));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn replication_schema_columns() {
        let output = sample_output();
        let line = replication_line(&output.records[0]);
        assert_eq!(line, "demo,bic,40,0,1;3,true,false,0.12345678901234566");
    }
}
