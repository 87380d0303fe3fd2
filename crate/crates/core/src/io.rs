//! CSV event logs and their JSON metadata sidecar.
//!
//! The CSV has one row per trial under the header
//! `n,t_left,setting_left,outcome_left,delay_left,t_right,setting_right,outcome_right,delay_right`.
//! Outcomes are written as `-1`/`+1` and absent delays as empty fields.
//! Delays use the shortest round-tripping decimal form, so a write/read cycle
//! is bit-exact.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::{EventLog, ProtocolMode, SettingPair, SettingsTable, StationRecord, Trial};

pub const CSV_HEADER: [&str; 9] = [
    "n",
    "t_left",
    "setting_left",
    "outcome_left",
    "delay_left",
    "t_right",
    "setting_right",
    "outcome_right",
    "delay_right",
];

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(String),
    #[error("unexpected csv header `{0}`")]
    Header(String),
    #[error("row {row}: {message}")]
    Row { row: u64, message: String },
    #[error("sidecar: {0}")]
    Sidecar(String),
}

/// Metadata stored next to a CSV log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sidecar {
    pub model_id: String,
    pub seed: u64,
    pub protocol: ProtocolMode,
    /// Label → angle in radians, per side.
    pub settings: SettingsTable,
    #[serde(default)]
    pub pair_counts: Option<BTreeMap<SettingPair, u64>>,
}

impl Sidecar {
    pub fn from_log(log: &EventLog) -> Self {
        Self {
            model_id: log.model_id.clone(),
            seed: log.seed,
            protocol: log.protocol,
            settings: log.settings.clone(),
            pair_counts: Some(log.pair_counts.clone()),
        }
    }

    /// Attaches trials to this metadata. Pair counts are tallied from the
    /// trials when the sidecar does not carry them.
    pub fn into_log(self, trials: Vec<Trial>) -> EventLog {
        let mut log = EventLog::new(trials, self.settings, self.protocol, self.model_id, self.seed);
        if let Some(counts) = self.pair_counts {
            log.pair_counts = counts;
        }
        log
    }
}

fn csv_err(e: csv::Error) -> IoError {
    IoError::Csv(e.to_string())
}

fn delay_field(d: Option<f64>) -> String {
    d.map(|d| d.to_string()).unwrap_or_default()
}

pub fn write_log_csv<W: Write>(log: &EventLog, writer: W) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for t in &log.trials {
        w.write_record([
            t.n.to_string(),
            t.left.tick.to_string(),
            t.left.setting.to_string(),
            t.left.outcome.to_string(),
            delay_field(t.left.delay),
            t.right.tick.to_string(),
            t.right.setting.to_string(),
            t.right.outcome.to_string(),
            delay_field(t.right.delay),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn parse_station(fields: &[&str], row: u64, side: &str) -> Result<StationRecord, IoError> {
    let bad = |what: &str, value: &str, err: String| IoError::Row {
        row,
        message: format!("{what}_{side} `{value}`: {err}"),
    };
    let tick = fields[0]
        .trim()
        .parse::<u64>()
        .map_err(|e| bad("t", fields[0], e.to_string()))?;
    let setting = fields[1]
        .parse()
        .map_err(|e: crate::types::TypeError| bad("setting", fields[1], e.to_string()))?;
    let outcome = fields[2]
        .parse()
        .map_err(|e: crate::types::TypeError| bad("outcome", fields[2], e.to_string()))?;
    let delay = match fields[3].trim() {
        "" => None,
        s => Some(
            s.parse::<f64>()
                .map_err(|e| bad("delay", fields[3], e.to_string()))?,
        ),
    };
    Ok(StationRecord {
        setting,
        tick,
        outcome,
        delay,
    })
}

/// Parses CSV trial rows. Row numbers in errors count data rows from 1.
pub fn read_log_csv<R: Read>(reader: R) -> Result<Vec<Trial>, IoError> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = r.headers().map_err(csv_err)?.clone();
    if header.iter().map(str::trim).ne(CSV_HEADER) {
        return Err(IoError::Header(header.iter().collect::<Vec<_>>().join(",")));
    }
    let mut trials = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let row = i as u64 + 1;
        let rec = rec.map_err(|e| IoError::Row {
            row,
            message: e.to_string(),
        })?;
        if rec.len() != CSV_HEADER.len() {
            return Err(IoError::Row {
                row,
                message: format!("expected {} fields, found {}", CSV_HEADER.len(), rec.len()),
            });
        }
        let f: Vec<&str> = rec.iter().collect();
        let n = f[0].trim().parse::<u64>().map_err(|e| IoError::Row {
            row,
            message: format!("n `{}`: {e}", f[0]),
        })?;
        let left = parse_station(&f[1..5], row, "left")?;
        let right = parse_station(&f[5..9], row, "right")?;
        trials.push(Trial { n, left, right });
    }
    Ok(trials)
}

pub fn write_sidecar<W: Write>(sidecar: &Sidecar, writer: W) -> Result<(), IoError> {
    serde_json::to_writer_pretty(writer, sidecar).map_err(|e| IoError::Sidecar(e.to_string()))
}

pub fn read_sidecar<R: Read>(reader: R) -> Result<Sidecar, IoError> {
    serde_json::from_reader(reader).map_err(|e| IoError::Sidecar(e.to_string()))
}

/// `run.csv` → `run.json`.
pub fn sidecar_path_for(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

fn open(path: &Path) -> Result<BufReader<File>, IoError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| IoError::File {
            path: path.to_path_buf(),
            source,
        })
}

fn create(path: &Path) -> Result<BufWriter<File>, IoError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| IoError::File {
            path: path.to_path_buf(),
            source,
        })
}

pub fn save_log(log: &EventLog, csv_path: &Path, sidecar_path: &Path) -> Result<(), IoError> {
    let mut w = create(csv_path)?;
    write_log_csv(log, &mut w)?;
    w.flush()?;
    let mut s = create(sidecar_path)?;
    write_sidecar(&Sidecar::from_log(log), &mut s)?;
    s.write_all(b"\n")?;
    s.flush()?;
    Ok(())
}

pub fn load_log(csv_path: &Path, sidecar_path: &Path) -> Result<EventLog, IoError> {
    let sidecar = read_sidecar(open(sidecar_path)?)?;
    let trials = read_log_csv(open(csv_path)?)?;
    Ok(sidecar.into_log(trials))
}
