//! Dataset directory format.
//!
//! A dataset is a directory holding `manifest.csv` plus one CSV per
//! demonstration. The manifest's first record is `duallqr-demoset,<version>`,
//! followed by the header
//! `file,start_x,start_y,start_z,start_roll,start_pitch,start_yaw,end_x,end_y,end_z,end_roll,end_pitch,end_yaw`
//! and one row per demonstration. Demonstration files have the header
//! `t,x,y,z,roll,pitch,yaw` with `t` counting from 1.

use std::fs;
use std::path::Path;

use super::{DemoSet, Demonstration};
use crate::error::{Error, Result};
use crate::geometry::Pose6;

pub const MANIFEST_FILE: &str = "manifest.csv";
pub const MANIFEST_VERSION: u32 = 1;
const MANIFEST_TAG: &str = "duallqr-demoset";
const DEMO_HEADER: [&str; 7] = ["t", "x", "y", "z", "roll", "pitch", "yaw"];
const MANIFEST_HEADER: [&str; 13] = [
    "file",
    "start_x",
    "start_y",
    "start_z",
    "start_roll",
    "start_pitch",
    "start_yaw",
    "end_x",
    "end_y",
    "end_z",
    "end_roll",
    "end_pitch",
    "end_yaw",
];

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line());
    Error::parse(path, line, e.to_string())
}

/// Writes `set` into directory `dir`, creating it if needed.
pub fn save_set(set: &DemoSet, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let manifest_path = dir.join(MANIFEST_FILE);
    let mut m = csv::WriterBuilder::new()
        .flexible(true)
        .from_path(&manifest_path)
        .map_err(|e| csv_err(&manifest_path, e))?;
    m.write_record([MANIFEST_TAG, &MANIFEST_VERSION.to_string()])
        .and_then(|_| m.write_record(MANIFEST_HEADER))
        .map_err(|e| csv_err(&manifest_path, e))?;

    for (i, demo) in set.demonstrations().iter().enumerate() {
        let name = format!("demo_{i:03}.csv");
        let mut row = vec![name.clone()];
        row.extend(demo.start_pose.to_array().iter().map(f64::to_string));
        row.extend(demo.end_pose.to_array().iter().map(f64::to_string));
        m.write_record(&row).map_err(|e| csv_err(&manifest_path, e))?;

        let demo_path = dir.join(&name);
        let mut w = csv::Writer::from_path(&demo_path).map_err(|e| csv_err(&demo_path, e))?;
        w.write_record(DEMO_HEADER).map_err(|e| csv_err(&demo_path, e))?;
        for (t, pose) in demo.global_trajectory.iter().enumerate() {
            let mut rec = vec![(t + 1).to_string()];
            rec.extend(pose.to_array().iter().map(f64::to_string));
            w.write_record(&rec).map_err(|e| csv_err(&demo_path, e))?;
        }
        w.flush()?;
    }
    m.flush()?;
    Ok(())
}

fn parse_f64(path: &Path, line: u64, field: &str, raw: &str) -> Result<f64> {
    raw.trim().parse::<f64>().map_err(|_| {
        Error::parse(
            path,
            Some(line),
            format!("field `{field}`: cannot parse {raw:?} as a number"),
        )
    })
}

fn parse_pose(path: &Path, line: u64, names: &[&str], raw: &[&str]) -> Result<Pose6> {
    let mut v = [0.0; 6];
    for d in 0..6 {
        v[d] = parse_f64(path, line, names[d], raw[d])?;
    }
    Ok(Pose6::from_array(v))
}

fn read_demo(path: &Path) -> Result<Vec<Pose6>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let header = r.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.iter().map(str::trim).ne(DEMO_HEADER) {
        return Err(Error::parse(
            path,
            Some(1),
            format!("expected header {}", DEMO_HEADER.join(",")),
        ));
    }
    let mut poses = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != DEMO_HEADER.len() {
            return Err(Error::parse(
                path,
                Some(line),
                format!("row {line} has {} columns, expected {}", rec.len(), DEMO_HEADER.len()),
            ));
        }
        let t = parse_f64(path, line, "t", &rec[0])?;
        if t != (poses.len() + 1) as f64 {
            return Err(Error::parse(
                path,
                Some(line),
                format!("row {line}: t = {t} out of sequence"),
            ));
        }
        let fields: Vec<&str> = rec.iter().skip(1).collect();
        poses.push(parse_pose(path, line, &DEMO_HEADER[1..], &fields)?);
    }
    Ok(poses)
}

/// Reads a dataset directory. With `horizon = None`, demonstrations of equal
/// length are kept as-is and unequal ones are resampled to the longest.
pub fn load_set(dir: &Path, horizon: Option<usize>) -> Result<DemoSet> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(&manifest_path)
        .map_err(|e| csv_err(&manifest_path, e))?;
    let mut records = r.records();

    let tag = records
        .next()
        .ok_or_else(|| Error::invalid(format!("{} is empty", manifest_path.display())))?
        .map_err(|e| csv_err(&manifest_path, e))?;
    if tag.len() != 2 || tag[0].trim() != MANIFEST_TAG {
        return Err(Error::parse(
            &manifest_path,
            Some(1),
            format!("expected `{MANIFEST_TAG},<version>`"),
        ));
    }
    let version: u32 = tag[1]
        .trim()
        .parse()
        .map_err(|_| Error::parse(&manifest_path, Some(1), "bad format version"))?;
    if version != MANIFEST_VERSION {
        return Err(Error::parse(
            &manifest_path,
            Some(1),
            format!("unsupported format version {version}"),
        ));
    }
    let header = records
        .next()
        .ok_or_else(|| Error::invalid(format!("{} lists no demonstrations", manifest_path.display())))?
        .map_err(|e| csv_err(&manifest_path, e))?;
    if header.iter().map(str::trim).ne(MANIFEST_HEADER) {
        return Err(Error::parse(&manifest_path, Some(2), "unexpected manifest header"));
    }

    let mut demos = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| csv_err(&manifest_path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != MANIFEST_HEADER.len() {
            return Err(Error::parse(
                &manifest_path,
                Some(line),
                format!(
                    "row {line} has {} columns, expected {}",
                    rec.len(),
                    MANIFEST_HEADER.len()
                ),
            ));
        }
        let fields: Vec<&str> = rec.iter().collect();
        let start = parse_pose(&manifest_path, line, &MANIFEST_HEADER[1..7], &fields[1..7])?;
        let end = parse_pose(&manifest_path, line, &MANIFEST_HEADER[7..13], &fields[7..13])?;
        let traj = read_demo(&dir.join(fields[0].trim()))?;
        demos.push(Demonstration::new(traj, start, end)?);
    }
    if demos.is_empty() {
        return Err(Error::invalid(format!(
            "{} lists no demonstrations",
            manifest_path.display()
        )));
    }

    match horizon {
        Some(t) => DemoSet::resampled(demos, t),
        None => {
            let longest = demos.iter().map(Demonstration::len).max().unwrap_or(2);
            if demos.iter().all(|d| d.len() == longest) {
                DemoSet::from_equal_length(demos)
            } else {
                DemoSet::resampled(demos, longest)
            }
        }
    }
}
