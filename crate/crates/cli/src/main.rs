//! `lpb` command line.
//!
//! Exit status: 0 on success, 1 on usage errors, 2 on data errors.

mod args;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use lpb_core::brackets::write_brackets_csv;
use lpb_core::ingest::{parse_dataset, scope_filter, ColumnMapping, ParsedDataset, Scope};
use lpb_core::report::{self, emit_figures, render_table, AnalysisReport, FigureOptions, ShuffleRequest, TableFormat};
use lpb_core::{
    bracket_stats, combined_pool_fit, partition_pools, shuffle_baseline, summarize_state, synth,
    threshold_sweep, AnalysisConfig, BracketWeighting, LpbError, PartitionResult,
};

use args::{Cli, Command, DataArgs, DiagnoseCommand, Format, Grid, PoolChoice, ReportCommand};

enum CliError {
    Usage(String),
    Data(LpbError),
}

impl From<LpbError> for CliError {
    fn from(e: LpbError) -> Self {
        CliError::Data(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Validate(data) => validate(&data),
        Command::Analyze(a) => analyze(a),
        Command::Brackets(b) => brackets(b),
        Command::Diagnose(d) => diagnose(d),
        Command::Synth(s) => synth_cmd(s),
        Command::Report(r) => report_cmd(r),
    }
}

/// `--alpha`, then `LPB_ALPHA`, then the default.
fn resolve_alpha(flag: Option<f64>) -> CliResult<f64> {
    let alpha = match flag {
        Some(a) => a,
        None => match std::env::var("LPB_ALPHA") {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("LPB_ALPHA is not a number: `{v}`")))?,
            Err(_) => lpb_core::DEFAULT_ALPHA,
        },
    };
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CliError::Usage(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(alpha)
}

fn parse_scope(data: &DataArgs) -> CliResult<Scope> {
    let mut scope = Scope::all();
    if let Some(text) = &data.scope {
        for part in text.split(',').filter(|p| !p.trim().is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("scope entry `{part}` is not key=value")))?;
            match key.trim() {
                "state" => scope.state = Some(value.trim().to_ascii_uppercase()),
                "county" => scope.county = Some(value.trim().to_string()),
                other => return Err(CliError::Usage(format!("unknown scope key `{other}`"))),
            }
        }
    }
    if let Some(c) = &data.county {
        scope.county = Some(c.trim().to_string());
    }
    Ok(scope)
}

fn load_mapping(path: Option<&Path>) -> CliResult<ColumnMapping> {
    Ok(match path {
        Some(p) => ColumnMapping::from_json_file(p)?,
        None => ColumnMapping::default(),
    })
}

fn load(data: &DataArgs) -> CliResult<(ParsedDataset, ColumnMapping)> {
    let mapping = load_mapping(data.mapping.as_deref())?;
    let mut parsed = parse_dataset(&data.input, &mapping)?;
    if let Some(label) = &data.label {
        parsed.meta.election_label = label.clone();
    }
    Ok((parsed, mapping))
}

/// Parses, scopes and partitions; an empty scope is a data error.
fn load_partition(data: &DataArgs) -> CliResult<(ParsedDataset, PartitionResult)> {
    let scope = parse_scope(data)?;
    let (parsed, _) = load(data)?;
    let scoped = scope_filter(&parsed.records, &scope);
    if scoped.is_empty() {
        return Err(LpbError::InsufficientData(format!(
            "scope {} matched no records in {}",
            scope.label(),
            data.input.display()
        ))
        .into());
    }
    let partition = partition_pools(&scoped);
    Ok((parsed, partition))
}

fn write_output(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| {
            LpbError::InvalidArgument(format!("cannot write {}: {e}", p.display())).into()
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| LpbError::InvalidArgument(format!("stdout: {e}")).into())
        }
    }
}

fn validate(data: &DataArgs) -> CliResult<()> {
    let (parsed, _) = load(data)?;
    let dem: u64 = parsed.records.iter().map(|r| r.dem_votes).sum();
    let rep: u64 = parsed.records.iter().map(|r| r.rep_votes).sum();
    let summary = serde_json::json!({
        "meta": parsed.meta,
        "dem_votes": dem,
        "rep_votes": rep,
        "rejects_file": (!parsed.rejects.is_empty())
            .then(|| lpb_core::ingest::rejects_path(&data.input).display().to_string()),
    });
    write_output(None, &(serde_json::to_string_pretty(&summary).map_err(LpbError::from)? + "\n"))
}

fn summary_text(report: &AnalysisReport) -> String {
    let p = &report.partition;
    let mut out = format!(
        "scope {}: {} records, {} blue-win, {} red-win, {} ties, {} zero-vote, {} two-party votes\n",
        report.scope_label, p.record_count, p.bluewin_count, p.redwin_count, p.tie_count, p.zero_vote_count, p.scope_total_votes
    );
    for pool in &report.pools {
        match (&pool.red_fit, &pool.lpb) {
            (Some(fit), Some(l)) => out.push_str(&format!(
                "{}: mean size {:.1}, {} large, red slope {:e} (p {:.3}), {} LPB {:.0} votes = {}\n",
                pool.label,
                pool.mean_size.unwrap_or(0.0),
                l.n_large,
                fit.slope,
                fit.p_value,
                l.direction.map(|d| d.as_str()).unwrap_or("no"),
                l.lpb_votes,
                l.pct_of_scope.map(report::format_pct).unwrap_or_else(|| "n/a".into()),
            )),
            _ => out.push_str(&format!(
                "{}: {} precincts, {} large; too few large precincts for a fit\n",
                pool.label, pool.precinct_count, pool.large_count
            )),
        }
    }
    let s = &report.large_split;
    out.push_str(&format!(
        "precincts >= {}: blue {} ({}), red {} ({})\n",
        s.threshold,
        s.blue_votes,
        s.blue_pct.map(|v| format!("{v:.1}%")).unwrap_or_else(|| "n/a".into()),
        s.red_votes,
        s.red_pct.map(|v| format!("{v:.1}%")).unwrap_or_else(|| "n/a".into()),
    ));
    out
}

fn analyze(a: args::AnalyzeArgs) -> CliResult<()> {
    let alpha = resolve_alpha(a.fit.alpha)?;
    let scope = parse_scope(&a.data)?;
    let (parsed, mapping) = load(&a.data)?;
    let cfg = AnalysisConfig {
        mapping,
        scope,
        threshold: a.fit.threshold,
        bracket_width: a.bracket_width,
        bracket_weighting: if a.weighted { BracketWeighting::VoteWeighted } else { BracketWeighting::Unweighted },
        alpha,
        shuffle: a.shuffle.map(|n| ShuffleRequest { n_seeds: n, rng_seed: a.seed }),
        combined: a.combined,
        sweep: a.sweep.clone(),
    };
    let report = report::analyze(&parsed, &cfg)?;
    if let Some(dir) = &a.figures {
        let list = emit_figures(&report, dir, &FigureOptions { bracket_grid: a.grid == Some(Grid::Brackets) })?;
        for note in &list.skipped {
            eprintln!("{note}");
        }
    }
    match &a.out {
        Some(path) => {
            report.write_json(path)?;
            write_output(None, &summary_text(&report))
        }
        None => write_output(None, &(report.to_json()? + "\n")),
    }
}

fn selected(partition: &PartitionResult, choice: PoolChoice) -> Vec<&lpb_core::WinPool> {
    match choice {
        PoolChoice::Blue => vec![&partition.blue_pool],
        PoolChoice::Red => vec![&partition.red_pool],
        PoolChoice::Both => vec![&partition.blue_pool, &partition.red_pool],
    }
}

fn brackets(b: args::BracketArgs) -> CliResult<()> {
    let (_, partition) = load_partition(&b.data)?;
    let weighting = if b.weighted { BracketWeighting::VoteWeighted } else { BracketWeighting::Unweighted };
    let mut text = String::new();
    for pool in selected(&partition, b.pool) {
        let stats = bracket_stats(pool, b.width, weighting)?;
        let mut buf = Vec::new();
        write_brackets_csv(&mut buf, &stats)?;
        let csv = String::from_utf8(buf).expect("utf-8");
        if b.pool == PoolChoice::Both {
            // one labelled block per pool
            text.push_str(&format!("# {}\n", pool.label));
        }
        text.push_str(&csv);
    }
    write_output(b.out.as_deref(), &text)
}

fn diagnose(d: DiagnoseCommand) -> CliResult<()> {
    match d {
        DiagnoseCommand::Shuffle(s) => {
            let (_, partition) = load_partition(&s.data)?;
            let results = selected(&partition, s.pool)
                .into_iter()
                .map(|p| shuffle_baseline(p, s.seeds, s.seed))
                .collect::<Result<Vec<_>, _>>()?;
            let text = serde_json::to_string_pretty(&results).map_err(LpbError::from)? + "\n";
            write_output(s.out.as_deref(), &text)
        }
        DiagnoseCommand::Combined(c) => {
            let alpha = resolve_alpha(c.fit.alpha)?;
            let (_, partition) = load_partition(&c.data)?;
            let combined = combined_pool_fit(&partition, c.fit.threshold, alpha)?;
            let text = serde_json::to_string_pretty(&combined).map_err(LpbError::from)? + "\n";
            write_output(c.out.as_deref(), &text)
        }
        DiagnoseCommand::Sweep(s) => {
            let alpha = resolve_alpha(s.alpha)?;
            if s.thresholds.contains(&0) {
                return Err(CliError::Usage("thresholds must be at least 1".into()));
            }
            let (_, partition) = load_partition(&s.data)?;
            let sweep = threshold_sweep(&partition, &s.thresholds, alpha)?;
            let mut buf = Vec::new();
            sweep.write_csv(&mut buf)?;
            write_output(s.out.as_deref(), &String::from_utf8(buf).expect("utf-8"))
        }
    }
}

fn synth_cmd(s: args::SynthArgs) -> CliResult<()> {
    let mut cfg = synth::SynthConfig::from_json_file(&s.config)?;
    if let Some(seed) = s.seed {
        cfg.rng_seed = seed;
    }
    let data = synth::generate(&cfg)?;
    let file = std::fs::File::create(&s.out)
        .map_err(|e| LpbError::InvalidArgument(format!("cannot write {}: {e}", s.out.display())))?;
    lpb_core::ingest::write_records(file, &data.records)?;
    if let Some(path) = &s.truth {
        let body = serde_json::json!({
            "truth": data.truth,
            "clamp_events": data.clamp_events,
            "config": cfg,
        });
        write_output(Some(path), &(serde_json::to_string_pretty(&body).map_err(LpbError::from)? + "\n"))?;
    }
    eprintln!(
        "{} precincts written to {} ({} clamp events)",
        data.records.len(),
        s.out.display(),
        data.clamp_events
    );
    Ok(())
}

fn table(t: args::TableArgs) -> CliResult<()> {
    if !t.labels.is_empty() && t.labels.len() != t.inputs.len() {
        return Err(CliError::Usage(format!(
            "{} labels given for {} inputs",
            t.labels.len(),
            t.inputs.len()
        )));
    }
    let alpha = resolve_alpha(t.fit.alpha)?;
    let mapping = load_mapping(t.mapping.as_deref())?;
    let mut rows = Vec::with_capacity(t.inputs.len());
    for (i, input) in t.inputs.iter().enumerate() {
        let parsed = parse_dataset(input, &mapping)?;
        if parsed.records.is_empty() {
            return Err(LpbError::InsufficientData(format!("{} has no records", input.display())).into());
        }
        let label = t.labels.get(i).cloned().unwrap_or(parsed.meta.election_label);
        rows.push(summarize_state(&partition_pools(&parsed.records), t.fit.threshold, label, alpha));
    }
    let format = match t.format {
        Format::Csv => TableFormat::Csv,
        Format::Json => TableFormat::Json,
        Format::Markdown => TableFormat::Markdown,
    };
    write_output(t.out.as_deref(), &render_table(&rows, format)?)
}

fn report_cmd(r: ReportCommand) -> CliResult<()> {
    match r {
        ReportCommand::Table(t) => table(t),
        ReportCommand::Figures(f) => {
            let report = AnalysisReport::read_json(&f.report)?;
            let list = emit_figures(&report, &f.out_dir, &FigureOptions { bracket_grid: f.grid == Some(Grid::Brackets) })?;
            let mut text = String::new();
            for file in &list.files {
                text.push_str(&format!("{}\n", file.display()));
            }
            for note in &list.skipped {
                text.push_str(&format!("skipped {note}\n"));
            }
            write_output(None, &text)
        }
    }
}

