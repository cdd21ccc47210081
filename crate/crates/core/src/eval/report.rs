use std::io::Write;

use sha2::{Digest, Sha256};

use super::metrics::MetricSet;
use crate::kernels::KernelKind;

pub const CSV_HEADER: &str = "dataset,kernel,ratio,repeat,accuracy,f1_micro,f1_macro,fingerprint";

/// First 16 hex digits of the SHA-256 of a canonical configuration string.
pub fn fingerprint(canonical: &str) -> String {
    let digest = Sha256::digest(canonical.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Results of one (dataset, kernel, ratio) cell over all repeats.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub dataset: String,
    pub kernel: KernelKind,
    pub ratio: f64,
    pub per_repeat: Vec<MetricSet>,
    pub mean: MetricSet,
    pub fingerprint: String,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvaluationReport {
    pub rows: Vec<ReportRow>,
}

impl EvaluationReport {
    pub fn push(&mut self, row: ReportRow) {
        self.rows.push(row);
    }

    pub fn extend(&mut self, other: EvaluationReport) {
        self.rows.extend(other.rows);
    }

    /// One line per repeat, then a `mean` line, for every row.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for row in &self.rows {
            let mut line = |repeat: &str, m: &MetricSet| {
                writeln!(
                    out,
                    "{},{},{:.4},{},{:.4},{:.4},{:.4},{}",
                    row.dataset, row.kernel, row.ratio, repeat, m.accuracy, m.f1_micro, m.f1_macro, row.fingerprint
                )
            };
            for (r, m) in row.per_repeat.iter().enumerate() {
                line(&r.to_string(), m)?;
            }
            line("mean", &row.mean)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("report is UTF-8")
    }

    /// Fixed-width summary of the mean rows, in percent.
    pub fn summary_table(&self) -> String {
        let mut s = format!(
            "{:<16} {:<10} {:>6} {:>9} {:>9} {:>9}\n",
            "dataset", "kernel", "ratio", "accuracy", "f1_micro", "f1_macro"
        );
        for row in &self.rows {
            s.push_str(&format!(
                "{:<16} {:<10} {:>5.0}% {:>9.2} {:>9.2} {:>9.2}\n",
                row.dataset,
                row.kernel.name(),
                row.ratio * 100.0,
                row.mean.accuracy * 100.0,
                row.mean.f1_micro * 100.0,
                row.mean.f1_macro * 100.0
            ));
        }
        s
    }
}
