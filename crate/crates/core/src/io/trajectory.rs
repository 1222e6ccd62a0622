//! Crowd trajectory CSV: `frame,id,kind,x,y`, one row per agent per frame.
//! Extra columns are ignored, so SDD-style exports load once renamed.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::scene::{AgentId, AgentKind, Track, TrajectoryLog};

pub const TRAJECTORY_HEADER: [&str; 5] = ["frame", "id", "kind", "x", "y"];

/// Map an annotation label onto an agent kind, case-insensitively.
///
/// | label | kind |
/// |---|---|
/// | pedestrian, skater | pedestrian |
/// | bicycle, biker, cart | bicycle |
/// | car, bus | car |
pub fn parse_kind(label: &str) -> Option<AgentKind> {
    match label.trim().to_ascii_lowercase().as_str() {
        "pedestrian" | "skater" => Some(AgentKind::Pedestrian),
        "bicycle" | "biker" => Some(AgentKind::Bicycle),
        "cart" => {
            log::warn!("label {label:?} treated as bicycle");
            Some(AgentKind::Bicycle)
        }
        "car" | "bus" => Some(AgentKind::Car),
        _ => None,
    }
}

/// Parse rows at their source rate, scaling positions by `scale` (m/px).
pub fn read_trajectories<R: Read>(
    input: R,
    source: &str,
    scale: f64,
    source_rate: f64,
) -> Result<TrajectoryLog> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidLog("scale must be positive".into()));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = rdr.headers()?.clone();
    let mut columns = [0usize; 5];
    for (slot, name) in columns.iter_mut().zip(TRAJECTORY_HEADER) {
        *slot = headers.iter().position(|h| h == name).ok_or_else(|| Error::Data {
            path: source.into(),
            line: 1,
            message: format!("missing column {name:?}"),
        })?;
    }

    let mut rows: BTreeMap<AgentId, (AgentKind, Vec<(u64, Vec2)>)> = BTreeMap::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i as u64 + 2;
        let record = record?;
        let bad = |message: String| Error::Data {
            path: source.into(),
            line,
            message,
        };
        let field = |k: usize| record.get(columns[k]).ok_or_else(|| bad(format!("missing {}", TRAJECTORY_HEADER[k])));
        let frame: u64 = field(0)?.parse().map_err(|_| bad(format!("bad frame {:?}", field(0).unwrap_or(""))))?;
        let id: u32 = field(1)?.parse().map_err(|_| bad(format!("bad id {:?}", field(1).unwrap_or(""))))?;
        let label = field(2)?;
        let kind = parse_kind(label).ok_or_else(|| bad(format!("unknown agent kind {label:?}")))?;
        let coord = |k: usize| -> Result<f64> {
            let v: f64 = field(k)?
                .parse()
                .map_err(|_| bad(format!("bad {} {:?}", TRAJECTORY_HEADER[k], field(k).unwrap_or(""))))?;
            if v.is_finite() {
                Ok(v * scale)
            } else {
                Err(bad(format!("non-finite {}", TRAJECTORY_HEADER[k])))
            }
        };
        let p = Vec2::new(coord(3)?, coord(4)?);
        let entry = rows.entry(AgentId(id)).or_insert((kind, Vec::new()));
        if entry.0 != kind {
            return Err(bad(format!("agent {id} changes kind from {} to {kind}", entry.0)));
        }
        if let Some(&(last, _)) = entry.1.last() {
            if frame <= last {
                return Err(bad(format!("agent {id}: frame {frame} does not follow frame {last}")));
            }
        }
        entry.1.push((frame, p));
    }

    let mut tracks = BTreeMap::new();
    for (id, (kind, samples)) in rows {
        tracks.insert(id, Track::new(kind, samples)?);
    }
    TrajectoryLog::new(source_rate, tracks)
}

/// Load a trajectory file and resample it to `target_rate`.
pub fn ingest_trajectories(
    path: &Path,
    scale: f64,
    source_rate: f64,
    target_rate: f64,
) -> Result<TrajectoryLog> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let log = read_trajectories(file, &path.display().to_string(), scale, source_rate)?;
    log.resample(target_rate)
}

/// Write a log in metres (scale 1) in frame-major order.
pub fn write_trajectories<W: Write>(log: &TrajectoryLog, out: W) -> Result<()> {
    let mut rows: Vec<(u64, AgentId, AgentKind, Vec2)> = log
        .tracks()
        .iter()
        .flat_map(|(id, t)| t.samples().iter().map(move |(f, p)| (*f, *id, t.kind, *p)))
        .collect();
    rows.sort_by_key(|(f, id, _, _)| (*f, *id));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_HEADER)?;
    for (f, id, kind, p) in rows {
        w.write_record([f.to_string(), id.0.to_string(), kind.to_string(), p.x.to_string(), p.y.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<trajectories>", e))?;
    Ok(())
}
