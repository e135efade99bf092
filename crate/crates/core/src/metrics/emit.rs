use std::fmt::Write;

use super::report::{EvalReport, HISTOGRAM_BINS, HISTOGRAM_WIDTH};

pub const CSV_HEADER: &str = "qubits,max_gates,gen_time_s,conv_time_s,high_count,uniq_struct,uniq_hash,error_count";

const BAR_WIDTH: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Markdown,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "md" | "markdown" => Ok(Format::Markdown),
            _ => Err(format!("unknown format '{s}' (expected json, csv or md)")),
        }
    }
}

/// Renders one or more reports. Reports without samples contribute no rows.
pub fn emit(reports: &[EvalReport], format: Format) -> String {
    match format {
        Format::Json => {
            if let [one] = reports {
                one.to_json()
            } else {
                serde_json::to_string_pretty(reports).expect("reports always serialize")
            }
        }
        Format::Csv => emit_csv(reports),
        Format::Markdown => emit_markdown(reports),
    }
}

fn row_fields(r: &EvalReport) -> [String; 8] {
    let a = &r.aggregates;
    [
        r.config.num_qubits.to_string(),
        r.config.max_gates.to_string(),
        format!("{:.6}", a.gen_time_s),
        format!("{:.6}", a.conv_time_s),
        a.high_count.to_string(),
        a.unique_structures.to_string(),
        a.unique_hashes.to_string(),
        a.error_count.to_string(),
    ]
}

pub fn emit_csv(reports: &[EvalReport]) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for r in reports.iter().filter(|r| !r.records.is_empty()) {
        out.push_str(&row_fields(r).join(","));
        out.push('\n');
    }
    out
}

pub fn emit_markdown(reports: &[EvalReport]) -> String {
    let cols: Vec<&str> = CSV_HEADER.split(',').collect();
    let mut out = format!("| {} |\n|{}\n", cols.join(" | "), "---|".repeat(cols.len()));
    let present: Vec<&EvalReport> = reports.iter().filter(|r| !r.records.is_empty()).collect();
    for r in &present {
        let _ = writeln!(out, "| {} |", row_fields(r).join(" | "));
    }
    for r in present {
        let hist = &r.aggregates.histogram;
        let max = hist.iter().copied().max().unwrap_or(0).max(1);
        let _ = writeln!(
            out,
            "\n{} qubits, {} slots: {} values\n\n```\n{:<11} {:>6}  bar",
            r.config.num_qubits, r.config.max_gates, r.config.task, "bin", "count"
        );
        for (i, &count) in hist.iter().enumerate().take(HISTOGRAM_BINS) {
            let lo = i as f64 * HISTOGRAM_WIDTH;
            let len = (count * BAR_WIDTH).div_ceil(max);
            let _ = writeln!(
                out,
                "{:<11} {:>6}  {:<width$}",
                format!("{:.2}-{:.2}", lo, lo + HISTOGRAM_WIDTH),
                count,
                "#".repeat(len),
                width = BAR_WIDTH
            );
        }
        out.push_str("```\n");
    }
    out
}
