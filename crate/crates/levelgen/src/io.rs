//! File formats: level text, latent JSON, event CSV, playthrough JSON and
//! optimizer histories.

use std::fs;
use std::path::{Path, PathBuf};

use levelgen_core::cmaes::GenerationRecord;
use levelgen_core::level::{content_stats, parse_level, serialize_level, Cell, ContentStats, Level};
use levelgen_core::sim::{EventRecord, EventType};
use levelgen_core::LatentVector;
use serde::Serialize;

use crate::error::{Error, IoContext, Result};

pub fn read_level(path: &Path) -> Result<Level> {
    let text = fs::read_to_string(path).at(path)?;
    parse_level(&text).map_err(|source| Error::Level {
        path: path.to_path_buf(),
        source,
    })
}

/// Level text with a trailing newline.
pub fn write_level(path: &Path, level: &Level) -> Result<()> {
    let mut text = serialize_level(level);
    text.push('\n');
    write_text(path, &text)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).at(parent)?;
    }
    fs::write(path, text).at(path)
}

/// Every `.txt` level in a directory, sorted by file name.
pub fn read_corpus(dir: &Path) -> Result<Vec<(String, Level)>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .at(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "txt"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::EmptyCorpus(dir.to_path_buf()));
    }
    paths
        .iter()
        .map(|p| {
            let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok((name, read_level(p)?))
        })
        .collect()
}

/// A latent is a JSON array of 32 numbers; components are clamped on read.
pub fn read_latent(path: &Path) -> Result<LatentVector> {
    let text = fs::read_to_string(path).at(path)?;
    let raw: Vec<f64> = serde_json::from_str(&text).at(path)?;
    Ok(levelgen_core::genspace::clamp(&raw)?)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).at(path)?;
    text.push('\n');
    write_text(path, &text)
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).at(path)?;
    serde_json::from_str(&text).at(path)
}

pub const EVENT_CSV_HEADER: [&str; 6] = ["tick", "kind", "x", "y", "row", "col"];

pub fn events_csv(events: &[EventRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(EVENT_CSV_HEADER).expect("in-memory write");
    for e in events {
        w.write_record([
            e.tick.to_string(),
            e.kind.name().to_string(),
            e.x.to_string(),
            e.y.to_string(),
            e.cell.row.to_string(),
            e.cell.col.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii csv")
}

/// Reads an event log. Without `row,col` columns the cell of each event is
/// the tile under its position. Cells are clamped to the level when one is given.
pub fn read_events(path: &Path, bounds: Option<(usize, usize)>) -> Result<Vec<EventRecord>> {
    let text = fs::read_to_string(path).at(path)?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.at(path)?;
        let bad = |message: String| Error::EventLog {
            path: path.to_path_buf(),
            line,
            message,
        };
        if record.len() != 4 && record.len() != 6 {
            return Err(bad(format!("expected 4 or 6 fields, got {}", record.len())));
        }
        let tick: u32 = record[0].trim().parse().map_err(|_| bad(format!("bad tick {:?}", &record[0])))?;
        let kind = EventType::from_name(record[1].trim()).ok_or_else(|| bad(format!("unknown event kind {:?}", &record[1])))?;
        let x: f64 = record[2].trim().parse().map_err(|_| bad(format!("bad x {:?}", &record[2])))?;
        let y: f64 = record[3].trim().parse().map_err(|_| bad(format!("bad y {:?}", &record[3])))?;
        let (mut row, mut col) = if record.len() == 6 {
            let index = |i: usize| record[i].trim().parse::<usize>().map_err(|_| bad(format!("bad cell {:?}", &record[i])));
            (index(4)?, index(5)?)
        } else {
            (y.max(0.0).floor() as usize, x.max(0.0).floor() as usize)
        };
        if let Some((rows, cols)) = bounds {
            row = row.min(rows.saturating_sub(1));
            col = col.min(cols.saturating_sub(1));
        }
        out.push(EventRecord {
            kind,
            x,
            y,
            tick,
            cell: Cell::new(row, col),
        });
    }
    Ok(out)
}

pub fn history_csv(history: &[GenerationRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(GenerationRecord::CSV_HEADER.split(',')).expect("in-memory write");
    for h in history {
        w.write_record([
            h.generation.to_string(),
            h.best.to_string(),
            h.mean.to_string(),
            h.worst.to_string(),
            h.evals.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii csv")
}

pub fn content_csv(levels: &[(String, Level)]) -> String {
    let mut out = format!("level,{}\n", ContentStats::CSV_HEADER);
    for (name, level) in levels {
        out.push_str(&format!("{name},{}\n", content_stats(level).csv_row()));
    }
    out
}

/// Serde adapter storing a level as its text form.
pub mod level_text {
    use levelgen_core::level::{parse_level, serialize_level, Level};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(level: &Level, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&serialize_level(level))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Level, D::Error> {
        let text = String::deserialize(d)?;
        parse_level(&text).map_err(serde::de::Error::custom)
    }
}
