use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{LpbError, Result};
use crate::lpb::{Direction, SummaryRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableFormat {
    Csv,
    Json,
    Markdown,
}

impl std::str::FromStr for TableFormat {
    type Err = LpbError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(TableFormat::Csv),
            "json" => Ok(TableFormat::Json),
            "md" | "markdown" => Ok(TableFormat::Markdown),
            other => Err(LpbError::InvalidArgument(format!("unknown table format `{other}`"))),
        }
    }
}

/// Percent with two significant digits, e.g. `0.57%`, `0.0086%`, `1.2%`.
pub fn format_pct(pct: f64) -> String {
    if pct == 0.0 {
        return "0%".into();
    }
    let digits = (1 - pct.abs().log10().floor() as i32).max(0) as usize;
    format!("{pct:.digits$}%")
}

fn opt_num(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn dir(d: Option<Direction>) -> &'static str {
    d.map(Direction::as_str).unwrap_or("")
}

fn md_cell(pct: Option<f64>, d: Option<Direction>) -> String {
    match (pct, d) {
        (Some(p), Some(d)) => format!("{} ({d})", format_pct(p)),
        (Some(p), None) => format_pct(p),
        (None, _) => "n/a".into(),
    }
}

fn md_size(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.0}")).unwrap_or_else(|| "n/a".into())
}

/// Rows are sorted by `state_year` so merged multi-file output is deterministic.
pub fn render_table(rows: &[SummaryRow], format: TableFormat) -> Result<String> {
    let mut rows = rows.to_vec();
    rows.sort_by(|a, b| a.state_year.cmp(&b.state_year));
    match format {
        TableFormat::Json => Ok(serde_json::to_string_pretty(&rows)? + "\n"),
        TableFormat::Csv => {
            let mut wtr = csv::Writer::from_writer(Vec::new());
            wtr.write_record([
                "state_year",
                "bluewin_mean_size",
                "bluewin_lpb_pct",
                "bluewin_direction",
                "redwin_mean_size",
                "redwin_lpb_pct",
                "redwin_direction",
            ])?;
            for r in &rows {
                wtr.write_record([
                    r.state_year.clone(),
                    opt_num(r.bluewin_mean_size),
                    opt_num(r.bluewin_lpb_pct),
                    dir(r.bluewin_direction).to_string(),
                    opt_num(r.redwin_mean_size),
                    opt_num(r.redwin_lpb_pct),
                    dir(r.redwin_direction).to_string(),
                ])?;
            }
            let bytes = wtr.into_inner().map_err(|e| LpbError::io("<table>", e.into_error()))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
        TableFormat::Markdown => {
            let header = [
                "State - year",
                "Blue-win mean size",
                "Blue-win LPB % of votes",
                "Red-win mean size",
                "Red-win LPB % of votes",
            ];
            let body: Vec<[String; 5]> = rows
                .iter()
                .map(|r| {
                    [
                        r.state_year.clone(),
                        md_size(r.bluewin_mean_size),
                        md_cell(r.bluewin_lpb_pct, r.bluewin_direction),
                        md_size(r.redwin_mean_size),
                        md_cell(r.redwin_lpb_pct, r.redwin_direction),
                    ]
                })
                .collect();
            let mut widths = header.map(str::len);
            for row in &body {
                for (w, cell) in widths.iter_mut().zip(row) {
                    *w = (*w).max(cell.len());
                }
            }
            let mut out = String::new();
            let line = |out: &mut String, cells: &[String]| {
                out.push('|');
                for (i, (c, w)) in cells.iter().zip(widths).enumerate() {
                    if i == 0 {
                        let _ = write!(out, " {c:<w$} |");
                    } else {
                        let _ = write!(out, " {c:>w$} |");
                    }
                }
                out.push('\n');
            };
            line(&mut out, &header.map(String::from));
            out.push('|');
            for (i, w) in widths.iter().enumerate() {
                out.push_str(&if i == 0 { format!(":{}|", "-".repeat(w + 1)) } else { format!("{}:|", "-".repeat(w + 1)) });
            }
            out.push('\n');
            for row in &body {
                line(&mut out, row);
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(label: &str) -> SummaryRow {
        SummaryRow {
            state_year: label.into(),
            bluewin_mean_size: Some(588.9),
            bluewin_lpb_pct: Some(0.5669),
            bluewin_direction: Some(Direction::Red),
            redwin_mean_size: None,
            redwin_lpb_pct: None,
            redwin_direction: None,
        }
    }

    #[test]
    fn pct_formatting() {
        assert_eq!(format_pct(0.5669), "0.57%");
        assert_eq!(format_pct(0.00861), "0.0086%");
        assert_eq!(format_pct(1.234), "1.2%");
        assert_eq!(format_pct(3.06), "3.1%");
        assert_eq!(format_pct(12.4), "12%");
        assert_eq!(format_pct(0.0), "0%");
    }

    #[test]
    fn csv_columns_and_sorting() {
        let out = render_table(&[row("WI-2008"), row("PA-2008")], TableFormat::Csv).unwrap();
        let lines: Vec<_> = out.lines().collect();
        assert_eq!(
            lines[0],
            "state_year,bluewin_mean_size,bluewin_lpb_pct,bluewin_direction,redwin_mean_size,redwin_lpb_pct,redwin_direction"
        );
        assert_eq!(lines[1], "PA-2008,588.9,0.5669,red,,,");
        assert!(lines[2].starts_with("WI-2008"));
    }

    #[test]
    fn markdown_layout() {
        let out = render_table(&[row("PA-2008")], TableFormat::Markdown).unwrap();
        let lines: Vec<_> = out.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[2].contains("0.57% (red)"));
        assert!(lines[2].contains("589"));
        assert!(lines[2].contains("n/a"));
        assert!(lines.iter().all(|l| l.len() == lines[0].len()));
    }

    #[test]
    fn json_rows() {
        let out = render_table(&[row("PA-2008")], TableFormat::Json).unwrap();
        let back: Vec<SummaryRow> = serde_json::from_str(&out).unwrap();
        assert_eq!(back, vec![row("PA-2008")]);
    }
}
