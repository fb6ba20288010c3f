//! CSV and plot-data output for sweep rows and bound estimates.

use std::io::Write;
use std::str::FromStr;

use fairbits_core::bounds::RdcEstimate;

use crate::sweep::ExperimentRow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    /// Whitespace-separated columns under a `#` header, for plotting tools.
    PlotData,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "plotdata" => Ok(OutputFormat::PlotData),
            _ => Err(format!("unknown format {s:?} (expected csv or plotdata)")),
        }
    }
}

pub const ROW_COLUMNS: [&str; 13] = [
    "protocol",
    "family",
    "n",
    "m",
    "trials",
    "mean_integer_bits",
    "mean_idealized_bits",
    "mean_bits_per_agent",
    "max_bits",
    "fairness_pass_rate",
    "mean_sad",
    "mean_attempts",
    "mean_queries",
];

pub const BOUND_COLUMNS: [&str; 9] =
    ["family", "notion", "n", "m", "trials", "p_hat", "ci_low", "ci_high", "bound_bits"];

/// One labelled bound estimate.
#[derive(Debug, Clone)]
pub struct BoundRow {
    pub family: String,
    pub notion: String,
    pub n: usize,
    pub m: usize,
    pub estimate: RdcEstimate,
}

fn write_table(
    out: &mut dyn Write,
    format: OutputFormat,
    header: &[&str],
    rows: &[Vec<String>],
) -> std::io::Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(header)?;
            for r in rows {
                w.write_record(r)?;
            }
            w.flush()
        }
        OutputFormat::PlotData => {
            writeln!(out, "# {}", header.join(" "))?;
            for r in rows {
                let cells: Vec<&str> = r.iter().map(|c| if c.is_empty() { "-" } else { c.as_str() }).collect();
                writeln!(out, "{}", cells.join(" "))?;
            }
            Ok(())
        }
    }
}

/// Writes sweep rows; the `wall_time` column appears only when `timing` is
/// set, so untimed output is byte-identical across runs.
pub fn write_rows(
    out: &mut dyn Write,
    rows: &[ExperimentRow],
    format: OutputFormat,
    timing: bool,
) -> std::io::Result<()> {
    let mut header: Vec<&str> = ROW_COLUMNS.to_vec();
    if timing {
        header.push("wall_time");
    }
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut cells = vec![
                r.protocol.clone(),
                r.family.clone(),
                r.n.to_string(),
                r.m.to_string(),
                r.trials.to_string(),
                r.mean_integer_bits.to_string(),
                r.mean_idealized_bits.to_string(),
                r.mean_bits_per_agent.to_string(),
                r.max_bits.to_string(),
                r.fairness_pass_rate.to_string(),
                r.mean_sad.map(|x| x.to_string()).unwrap_or_default(),
                r.mean_attempts.to_string(),
                r.mean_queries.to_string(),
            ];
            if timing {
                cells.push(r.wall_time.map(|x| format!("{x:.3}")).unwrap_or_default());
            }
            cells
        })
        .collect();
    write_table(out, format, &header, &body)
}

pub fn write_bounds(out: &mut dyn Write, rows: &[BoundRow], format: OutputFormat) -> std::io::Result<()> {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let e = &r.estimate;
            vec![
                r.family.clone(),
                r.notion.clone(),
                r.n.to_string(),
                r.m.to_string(),
                e.trials.to_string(),
                format!("{}/{}", e.p_hat.numer(), e.p_hat.denom()),
                e.ci_low.to_string(),
                e.ci_high.to_string(),
                e.bound_bits.to_string(),
            ]
        })
        .collect();
    write_table(out, format, &BOUND_COLUMNS, &body)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> ExperimentRow {
        ExperimentRow {
            protocol: "rud".into(),
            family: "ud-top-n".into(),
            n: 4,
            m: 8,
            trials: 2,
            mean_integer_bits: 12.5,
            mean_idealized_bits: 11.0,
            mean_bits_per_agent: 3.125,
            max_bits: 14,
            fairness_pass_rate: 1.0,
            mean_sad: None,
            mean_attempts: 0.0,
            mean_queries: 0.0,
            wall_time: Some(0.5),
            records: Vec::new(),
        }
    }

    #[test]
    fn csv_golden() {
        let mut out = Vec::new();
        write_rows(&mut out, &[row()], OutputFormat::Csv, false).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "protocol,family,n,m,trials,mean_integer_bits,mean_idealized_bits,mean_bits_per_agent,max_bits,\
             fairness_pass_rate,mean_sad,mean_attempts,mean_queries\n\
             rud,ud-top-n,4,8,2,12.5,11,3.125,14,1,,0,0\n"
        );
    }

    #[test]
    fn timing_adds_a_column() {
        let mut out = Vec::new();
        write_rows(&mut out, &[row()], OutputFormat::PlotData, true).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("# protocol family"));
        assert!(text.trim_end().ends_with("wall_time\nrud ud-top-n 4 8 2 12.5 11 3.125 14 1 - 0 0 0.500"));
    }
}
