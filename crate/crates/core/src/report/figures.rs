//! SVG figures with plot-data CSV companions.
//!
//! Output is a pure function of the report: no timestamps, fixed float
//! formatting, fixed element order.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{AnalysisReport, PoolReport};
use crate::brackets::write_brackets_csv;
use crate::error::{LpbError, Result};
use crate::regression::RegressionFit;

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 520.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const BLUE: &str = "#1f4fd1";
const RED: &str = "#d1301f";
const GREEN: &str = "#1a9a3a";

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FigureOptions {
    /// Draw a vertical line at every bracket boundary on the scatter plots.
    pub bracket_grid: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FigureList {
    pub files: Vec<PathBuf>,
    /// Pools that produced no figure, with the reason.
    pub skipped: Vec<String>,
}

struct Frame {
    x_max: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + x / self.x_max * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - y * (HEIGHT - TOP - BOTTOM)
    }
}

fn nice_step(range: f64) -> f64 {
    let raw = range / 8.0;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 2.5, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag)
}

fn axes(svg: &mut String, frame: &Frame, x_label: &str, y_label: &str) {
    let x0 = frame.px(0.0);
    let x1 = frame.px(frame.x_max);
    let y0 = frame.py(0.0);
    let y1 = frame.py(1.0);
    let _ = writeln!(svg, r##"<g class="axes" stroke="#333" stroke-width="1" fill="none"><rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}"/></g>"##, x1 - x0, y0 - y1);
    let step = nice_step(frame.x_max);
    let mut t = 0.0;
    svg.push_str(r##"<g class="ticks" font-family="sans-serif" font-size="11" fill="#333">"##);
    svg.push('\n');
    while t <= frame.x_max + 1e-9 {
        let x = frame.px(t);
        let _ = writeln!(svg, r##"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="#333"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{t}</text>"##, y0 + 4.0, y0 + 17.0);
        t += step;
    }
    for k in 0..=4 {
        let v = k as f64 / 4.0;
        let y = frame.py(v);
        let _ = writeln!(svg, r##"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="#333"/><text x="{:.2}" y="{:.2}" text-anchor="end">{v}</text>"##, x0 - 4.0, x0 - 7.0, y + 4.0);
    }
    svg.push_str("</g>\n");
    let _ = writeln!(svg, r##"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle">{x_label}</text>"##, (x0 + x1) / 2.0, HEIGHT - 10.0);
    let _ = writeln!(svg, r##"<text transform="translate(18 {:.2}) rotate(-90)" font-family="sans-serif" font-size="13" text-anchor="middle">{y_label}</text>"##, (y0 + y1) / 2.0);
}

fn header(svg: &mut String, title: &str) {
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#);
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{:.2}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#, WIDTH / 2.0, xml_escape(title));
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn fit_line(svg: &mut String, frame: &Frame, fit: &RegressionFit, from: f64, to: f64, colour: &str, class: &str) {
    let (y1, y2) = (fit.predict(from), fit.predict(to));
    let _ = writeln!(
        svg,
        r#"<line class="{class}" data-x1="{from}" data-y1="{y1}" data-x2="{to}" data-y2="{y2}" data-slope="{}" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{colour}" stroke-width="2.5"/>"#,
        fit.slope,
        frame.px(from),
        frame.py(y1),
        frame.px(to),
        frame.py(y2)
    );
}

/// Fractions against precinct size, with fit lines over the large tail.
pub fn scatter_svg(report: &AnalysisReport, pool: &PoolReport, opts: &FigureOptions) -> String {
    let threshold = report.config.threshold as f64;
    let max_size = pool.points.iter().map(|p| p.size).max().unwrap_or(1) as f64;
    let frame = Frame {
        x_max: (max_size.max(threshold) * 1.02).ceil(),
    };
    let mut title = format!("{} {}: {} precincts", report.scope_label, pool.label, pool.precinct_count);
    if let Some(l) = &pool.lpb {
        let dir = l.direction.map(|d| d.as_str()).unwrap_or("none");
        let _ = write!(title, ", red slope {:.3e}, {dir} LPB {:.0} votes", pool.red_fit.map(|f| f.slope).unwrap_or(0.0), l.lpb_votes);
    }
    let mut svg = String::new();
    header(&mut svg, &title);
    axes(&mut svg, &frame, "precinct size (two-party votes)", "vote fraction");

    if opts.bracket_grid {
        let w = report.config.bracket_width as f64;
        svg.push_str(r##"<g class="bracket-grid" stroke="#999" stroke-width="0.6" stroke-dasharray="3 3">"##);
        svg.push('\n');
        let mut b = w;
        while b < frame.x_max {
            let x = frame.px(b);
            let _ = writeln!(svg, r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}"/>"#, frame.py(1.0), frame.py(0.0));
            b += w;
        }
        svg.push_str("</g>\n");
    }

    for (class, colour, frac) in [
        ("blue-points", BLUE, ScatterFraction::Blue),
        ("red-points", RED, ScatterFraction::Red),
    ] {
        let _ = writeln!(svg, r#"<g class="{class}" fill="{colour}" fill-opacity="0.45">"#);
        for p in &pool.points {
            let y = match frac {
                ScatterFraction::Blue => p.blue_fraction(),
                ScatterFraction::Red => p.red_fraction(),
            };
            let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="1.6"/>"#, frame.px(p.size as f64), frame.py(y));
        }
        svg.push_str("</g>\n");
    }

    let x = frame.px(threshold);
    let _ = writeln!(svg, r#"<line class="threshold" data-x="{threshold}" x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="{GREEN}" stroke-width="2"/>"#, frame.py(1.0), frame.py(0.0));

    if let (Some(red), Some(blue)) = (&pool.red_fit, &pool.blue_fit) {
        fit_line(&mut svg, &frame, blue, threshold, max_size, BLUE, "blue-fit");
        fit_line(&mut svg, &frame, red, threshold, max_size, RED, "red-fit");
    }
    svg.push_str("</svg>\n");
    svg
}

#[derive(Clone, Copy)]
enum ScatterFraction {
    Blue,
    Red,
}

/// Stacked blue/red mean-fraction bars; bar width proportional to vote share.
pub fn brackets_svg(report: &AnalysisReport, pool: &PoolReport) -> String {
    let mut svg = String::new();
    header(
        &mut svg,
        &format!("{} {}: mean fractions by {}-vote bracket", report.scope_label, pool.label, report.config.bracket_width),
    );
    let frame = Frame { x_max: 1.0 };
    let y0 = frame.py(0.0);
    let y1 = frame.py(1.0);
    let _ = writeln!(svg, r##"<rect x="{LEFT}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#333"/>"##, WIDTH - LEFT - RIGHT, y0 - y1);
    let mut cursor = 0.0;
    for b in &pool.brackets {
        let (Some(blue), Some(_red)) = (b.mean_blue_fraction, b.mean_red_fraction) else {
            continue;
        };
        let xa = frame.px(cursor);
        let xb = frame.px(cursor + b.vote_share_width);
        let yb = frame.py(blue);
        let _ = writeln!(
            svg,
            r##"<g class="bracket" data-bracket="{}" data-low="{}" data-high="{}" data-share="{}"><rect x="{xa:.2}" y="{yb:.2}" width="{:.2}" height="{:.2}" fill="{BLUE}" stroke="white" stroke-width="0.5"/><rect x="{xa:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="{RED}" stroke="white" stroke-width="0.5"/></g>"##,
            b.bracket_index,
            b.low,
            b.high,
            b.vote_share_width,
            xb - xa,
            y0 - yb,
            xb - xa,
            yb - y1
        );
        if xb - xa > 14.0 {
            let _ = writeln!(svg, r##"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10" text-anchor="middle" fill="#333">{}</text>"##, (xa + xb) / 2.0, y0 + 14.0, b.bracket_index);
        }
        cursor += b.vote_share_width;
    }
    let _ = writeln!(svg, r##"<line x1="{LEFT}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#333" stroke-dasharray="4 3"/>"##, frame.py(0.5), WIDTH - RIGHT, frame.py(0.5));
    for k in 0..=4 {
        let v = k as f64 / 4.0;
        let _ = writeln!(svg, r##"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{v}</text>"##, LEFT - 7.0, frame.py(v) + 4.0);
    }
    let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle">bracket (width proportional to share of pool votes)</text>"#, WIDTH / 2.0, HEIGHT - 10.0);
    svg.push_str("</svg>\n");
    svg
}

/// Plot data: `rank,size,dem,rep,blue_frac,red_frac,large`.
fn scatter_csv(report: &AnalysisReport, pool: &PoolReport) -> Result<String> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["rank", "size", "dem", "rep", "blue_frac", "red_frac", "large"])?;
    for (i, p) in pool.points.iter().enumerate() {
        wtr.write_record([
            (i + 1).to_string(),
            p.size.to_string(),
            p.dem.to_string(),
            p.rep.to_string(),
            p.blue_fraction().to_string(),
            p.red_fraction().to_string(),
            u8::from(p.size >= report.config.threshold).to_string(),
        ])?;
    }
    let bytes = wtr.into_inner().map_err(|e| LpbError::io("<plot csv>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn write_file(path: PathBuf, contents: &[u8], files: &mut Vec<PathBuf>) -> Result<()> {
    std::fs::write(&path, contents).map_err(|e| LpbError::io(&path, e))?;
    files.push(path);
    Ok(())
}

/// Per pool: scatter SVG + plot CSV, bracket SVG + bracket CSV.
pub fn emit_figures(report: &AnalysisReport, out_dir: impl AsRef<Path>, opts: &FigureOptions) -> Result<FigureList> {
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir).map_err(|e| LpbError::io(out_dir, e))?;
    let mut list = FigureList::default();
    for pool in &report.pools {
        let stem = pool.label.as_str().to_ascii_lowercase();
        if pool.points.is_empty() {
            list.skipped.push(format!("{}: empty pool, no figure", pool.label));
            continue;
        }
        write_file(out_dir.join(format!("{stem}_scatter.svg")), scatter_svg(report, pool, opts).as_bytes(), &mut list.files)?;
        write_file(out_dir.join(format!("{stem}_scatter.csv")), scatter_csv(report, pool)?.as_bytes(), &mut list.files)?;
        write_file(out_dir.join(format!("{stem}_brackets.svg")), brackets_svg(report, pool).as_bytes(), &mut list.files)?;
        let mut buf = Vec::new();
        write_brackets_csv(&mut buf, &pool.brackets)?;
        write_file(out_dir.join(format!("{stem}_brackets.csv")), &buf, &mut list.files)?;
    }
    Ok(list)
}
