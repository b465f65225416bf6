//! CSV formats for event data.
//!
//! A single path is a `time` column; an ensemble is `path_id,time`. Times
//! are written with the shortest decimal that parses back to the same
//! `f64`, so files round-trip bit-exactly.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::events::EventSequence;

pub fn write_events<W: Write>(events: &EventSequence, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["time"])?;
    for t in events.times() {
        wtr.write_record([t.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

fn parse_time(field: &str, row: usize, name: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::invalid(format!("row {row} `{name}`"), format!("`{field}` is not a number")))
}

/// Reads a `time` column. Without an explicit horizon the last event time
/// is used.
pub fn read_events<R: Read>(r: R, horizon: Option<f64>) -> Result<EventSequence> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers()?.clone();
    if headers.iter().map(str::trim).collect::<Vec<_>>() != ["time"] {
        return Err(Error::invalid("header", "expected a single `time` column"));
    }
    let mut times = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        times.push(parse_time(&rec[0], i + 1, "time")?);
    }
    let horizon = match horizon {
        Some(h) => h,
        None => *times.last().ok_or_else(|| Error::invalid("horizon", "needed when the file has no events"))?,
    };
    EventSequence::new(horizon, times)
}

pub fn write_ensemble<W: Write>(paths: &[EventSequence], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["path_id", "time"])?;
    for (i, p) in paths.iter().enumerate() {
        let id = i.to_string();
        for t in p.times() {
            wtr.write_record([id.as_str(), &t.to_string()])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Reads `path_id,time` rows. Paths without events do not appear in the
/// file, so the number of paths is `n_paths` or one past the largest id.
pub fn read_ensemble<R: Read>(r: R, horizon: f64, n_paths: Option<usize>) -> Result<Vec<EventSequence>> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers()?.clone();
    if headers.iter().map(str::trim).collect::<Vec<_>>() != ["path_id", "time"] {
        return Err(Error::invalid("header", "expected `path_id,time`"));
    }
    let mut rows: Vec<(usize, f64)> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let id = rec[0]
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::invalid(format!("row {} `path_id`", i + 1), "not an index"))?;
        rows.push((id, parse_time(&rec[1], i + 1, "time")?));
    }
    let n = n_paths.unwrap_or_else(|| rows.iter().map(|r| r.0 + 1).max().unwrap_or(0));
    let mut times = vec![Vec::new(); n];
    for (id, t) in rows {
        times.get_mut(id).ok_or_else(|| Error::invalid("path_id", format!("{id} is not below {n}")))?.push(t);
    }
    times.into_iter().map(|ts| EventSequence::new(horizon, ts)).collect()
}
