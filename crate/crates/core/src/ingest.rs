//! Precinct CSV ingestion.
//!
//! Input files are UTF-8, comma-delimited, with a header row. A
//! [`ColumnMapping`] names the source columns for each canonical field, so the
//! heterogeneous layouts published by state and county offices can be read
//! without rewriting them. Only the two major-party counts are read; every
//! other column is ignored.
//!
//! Rows whose vote cells are not non-negative integers are quarantined into a
//! `<input>.rejects.csv` sidecar with a reason column, and counted in
//! [`DatasetMeta::parse_error_count`]. Duplicate precinct keys abort the parse.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{LpbError, Result};

/// One precinct's two-party result.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrecinctRecord {
    pub state: String,
    pub county: String,
    pub precinct_id: String,
    pub dem_votes: u64,
    pub rep_votes: u64,
}

impl PrecinctRecord {
    pub fn new(
        state: impl Into<String>,
        county: impl Into<String>,
        precinct_id: impl Into<String>,
        dem_votes: u64,
        rep_votes: u64,
    ) -> Self {
        PrecinctRecord {
            state: state.into(),
            county: county.into(),
            precinct_id: precinct_id.into(),
            dem_votes,
            rep_votes,
        }
    }

    /// Precinct size: total two-party votes.
    #[inline]
    pub fn total(&self) -> u64 {
        self.dem_votes + self.rep_votes
    }

    /// Republican share of the two-party vote. NaN for a zero-vote precinct.
    #[inline]
    pub fn red_fraction(&self) -> f64 {
        self.rep_votes as f64 / self.total() as f64
    }

    #[inline]
    pub fn blue_fraction(&self) -> f64 {
        self.dem_votes as f64 / self.total() as f64
    }

    pub fn key(&self) -> (&str, &str, &str) {
        (&self.state, &self.county, &self.precinct_id)
    }

    /// Same precinct with the party columns exchanged.
    pub fn swapped(&self) -> Self {
        PrecinctRecord {
            dem_votes: self.rep_votes,
            rep_votes: self.dem_votes,
            ..self.clone()
        }
    }

    fn key_string(&self) -> String {
        format!("{}/{}/{}", self.state, self.county, self.precinct_id)
    }
}

/// Source column names for each canonical field.
///
/// Loaded from JSON with keys `state`, `county`, `precinct_id`, `dem_votes`,
/// `rep_votes` and `state_override`. `state` and `county` may be null; a
/// single-state file without a state column sets `state_override` instead.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMapping {
    #[serde(default)]
    pub state: Option<String>,
    #[serde(default)]
    pub county: Option<String>,
    pub precinct_id: String,
    pub dem_votes: String,
    pub rep_votes: String,
    #[serde(default)]
    pub state_override: Option<String>,
}

impl Default for ColumnMapping {
    /// The canonical layout written by [`write_records`].
    fn default() -> Self {
        ColumnMapping {
            state: Some("state".into()),
            county: Some("county".into()),
            precinct_id: "precinct_id".into(),
            dem_votes: "dem_votes".into(),
            rep_votes: "rep_votes".into(),
            state_override: None,
        }
    }
}

impl ColumnMapping {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| LpbError::io(path, e))?;
        let mapping: ColumnMapping = serde_json::from_reader(file)?;
        mapping.validate()?;
        Ok(mapping)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dem_votes == self.rep_votes {
            return Err(LpbError::InvalidMapping(format!(
                "dem_votes and rep_votes both map to `{}`",
                self.dem_votes
            )));
        }
        for (name, value) in [
            ("precinct_id", &self.precinct_id),
            ("dem_votes", &self.dem_votes),
            ("rep_votes", &self.rep_votes),
        ] {
            if value.trim().is_empty() {
                return Err(LpbError::InvalidMapping(format!("`{name}` is empty")));
            }
        }
        let has_state_column = self.state.as_deref().is_some_and(|s| !s.trim().is_empty());
        let has_override = self
            .state_override
            .as_deref()
            .is_some_and(|s| !s.trim().is_empty());
        if !has_state_column && !has_override {
            return Err(LpbError::InvalidMapping(
                "either `state` or `state_override` is required".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub record_count: usize,
    pub parse_error_count: usize,
    pub source_path: String,
    pub election_label: String,
}

/// A row that failed validation, kept for the rejects sidecar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RejectedRow {
    /// 1-based line number in the source, header being line 1.
    pub line: u64,
    pub reason: String,
    pub fields: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct ParsedDataset {
    pub records: Vec<PrecinctRecord>,
    pub meta: DatasetMeta,
    pub header: Vec<String>,
    pub rejects: Vec<RejectedRow>,
}

struct ColumnIndex {
    state: Option<usize>,
    county: Option<usize>,
    precinct_id: usize,
    dem: usize,
    rep: usize,
}

impl ColumnIndex {
    fn resolve(header: &csv::StringRecord, mapping: &ColumnMapping) -> Result<Self> {
        let find = |name: &str| {
            header
                .iter()
                .position(|h| h.trim() == name.trim())
                .ok_or_else(|| LpbError::MissingColumn(name.to_string()))
        };
        let state = match (&mapping.state_override, &mapping.state) {
            (Some(o), _) if !o.trim().is_empty() => None,
            (_, Some(col)) => Some(find(col)?),
            _ => None,
        };
        let county = mapping.county.as_deref().map(find).transpose()?;
        Ok(ColumnIndex {
            state,
            county,
            precinct_id: find(&mapping.precinct_id)?,
            dem: find(&mapping.dem_votes)?,
            rep: find(&mapping.rep_votes)?,
        })
    }
}

fn parse_count(raw: &str, column: &str) -> std::result::Result<u64, String> {
    let trimmed = raw.trim();
    match trimmed.parse::<i64>() {
        Ok(v) if v < 0 => Err(format!("negative {column}: {trimmed}")),
        Ok(v) => Ok(v as u64),
        Err(_) => Err(format!("{column} is not an integer: `{trimmed}`")),
    }
}

fn parse_row(
    row: &csv::StringRecord,
    cols: &ColumnIndex,
    mapping: &ColumnMapping,
) -> std::result::Result<PrecinctRecord, String> {
    let field = |idx: usize, name: &str| {
        row.get(idx)
            .map(str::trim)
            .ok_or_else(|| format!("missing field {name}"))
    };
    let state = match cols.state {
        Some(idx) => field(idx, "state")?.to_string(),
        None => mapping.state_override.clone().unwrap_or_default(),
    };
    let state = state.trim().to_ascii_uppercase();
    if state.is_empty() {
        return Err("empty state".into());
    }
    let county = match cols.county {
        Some(idx) => field(idx, "county")?.to_string(),
        None => String::new(),
    };
    let precinct_id = field(cols.precinct_id, "precinct_id")?;
    if precinct_id.is_empty() {
        return Err("empty precinct_id".into());
    }
    let dem_votes = parse_count(field(cols.dem, "dem_votes")?, "dem_votes")?;
    let rep_votes = parse_count(field(cols.rep, "rep_votes")?, "rep_votes")?;
    Ok(PrecinctRecord {
        state,
        county,
        precinct_id: precinct_id.to_string(),
        dem_votes,
        rep_votes,
    })
}

/// Parses precinct rows from any reader. Does not touch the filesystem.
pub fn parse_reader<R: Read>(
    reader: R,
    mapping: &ColumnMapping,
    source: &str,
) -> Result<ParsedDataset> {
    mapping.validate()?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    let cols = ColumnIndex::resolve(&header, mapping)?;

    let mut records = Vec::new();
    let mut rejects = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(i as u64 + 2);
        match parse_row(&row, &cols, mapping) {
            Ok(rec) => records.push(rec),
            Err(reason) => rejects.push(RejectedRow {
                line,
                reason,
                fields: row.iter().map(str::to_string).collect(),
            }),
        }
    }

    let mut seen: HashMap<(&str, &str, &str), usize> = HashMap::with_capacity(records.len());
    for rec in &records {
        *seen.entry(rec.key()).or_default() += 1;
    }
    let mut dups: Vec<String> = records
        .iter()
        .filter(|r| seen[&r.key()] > 1)
        .map(PrecinctRecord::key_string)
        .collect();
    if !dups.is_empty() {
        dups.sort();
        dups.dedup();
        return Err(LpbError::DuplicateKeys(dups));
    }

    let election_label = Path::new(source)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| source.to_string());
    Ok(ParsedDataset {
        meta: DatasetMeta {
            record_count: records.len(),
            parse_error_count: rejects.len(),
            source_path: source.to_string(),
            election_label,
        },
        records,
        header: header.iter().map(str::to_string).collect(),
        rejects,
    })
}

/// Sidecar path for rejected rows: `<input>.rejects.csv`.
pub fn rejects_path(input: &Path) -> PathBuf {
    let mut name = input.as_os_str().to_owned();
    name.push(".rejects.csv");
    PathBuf::from(name)
}

/// Parses a file and writes the rejects sidecar when any row was rejected.
pub fn parse_dataset(path: impl AsRef<Path>, mapping: &ColumnMapping) -> Result<ParsedDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| LpbError::io(path, e))?;
    let parsed = parse_reader(file, mapping, &path.to_string_lossy())?;
    if !parsed.rejects.is_empty() {
        let sidecar = rejects_path(path);
        let out = File::create(&sidecar).map_err(|e| LpbError::io(&sidecar, e))?;
        write_rejects(out, &parsed.header, &parsed.rejects)?;
        log::warn!(
            "{} rejected rows written to {}",
            parsed.rejects.len(),
            sidecar.display()
        );
    }
    Ok(parsed)
}

/// Rejects CSV: `line,reason` followed by the original columns.
pub fn write_rejects<W: Write>(out: W, header: &[String], rejects: &[RejectedRow]) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().flexible(true).from_writer(out);
    let mut head = vec!["line".to_string(), "reason".to_string()];
    head.extend(header.iter().cloned());
    wtr.write_record(&head)?;
    for r in rejects {
        let mut row = vec![r.line.to_string(), r.reason.clone()];
        row.extend(r.fields.iter().cloned());
        wtr.write_record(&row)?;
    }
    wtr.flush().map_err(|e| LpbError::io("<rejects>", e))?;
    Ok(())
}

/// Writes records in the canonical layout read by `ColumnMapping::default()`.
pub fn write_records<W: Write>(out: W, records: &[PrecinctRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    for rec in records {
        wtr.serialize(rec)?;
    }
    if records.is_empty() {
        wtr.write_record(["state", "county", "precinct_id", "dem_votes", "rep_votes"])?;
    }
    wtr.flush().map_err(|e| LpbError::io("<records>", e))?;
    Ok(())
}

/// Analysis scope: a state, optionally narrowed to one county.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scope {
    pub state: Option<String>,
    pub county: Option<String>,
}

impl Scope {
    pub fn all() -> Self {
        Scope::default()
    }

    pub fn state(code: &str) -> Self {
        Scope {
            state: Some(code.trim().to_ascii_uppercase()),
            county: None,
        }
    }

    pub fn county(code: &str, county: &str) -> Self {
        Scope {
            state: Some(code.trim().to_ascii_uppercase()),
            county: Some(county.trim().to_string()),
        }
    }

    pub fn matches(&self, rec: &PrecinctRecord) -> bool {
        let state_ok = self
            .state
            .as_deref()
            .is_none_or(|s| rec.state.eq_ignore_ascii_case(s.trim()));
        let county_ok = self
            .county
            .as_deref()
            .is_none_or(|c| rec.county.trim().eq_ignore_ascii_case(c.trim()));
        state_ok && county_ok
    }

    pub fn label(&self) -> String {
        match (&self.state, &self.county) {
            (None, None) => "all".into(),
            (Some(s), None) => s.clone(),
            (None, Some(c)) => format!("*/{c}"),
            (Some(s), Some(c)) => format!("{s}/{c}"),
        }
    }
}

/// Records inside `scope`, order preserved. An empty result is logged, not an error.
pub fn scope_filter(records: &[PrecinctRecord], scope: &Scope) -> Vec<PrecinctRecord> {
    let out: Vec<PrecinctRecord> = records.iter().filter(|r| scope.matches(r)).cloned().collect();
    if out.is_empty() {
        log::warn!("scope {} matched no records", scope.label());
    }
    out
}
