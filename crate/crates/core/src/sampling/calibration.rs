//! Isotropy calibration constants for ball-type samplers.
//!
//! The scaling constant that makes a uniform ball draw isotropic is measured
//! by a Monte Carlo pilot run (deterministic internal seed per key) and cached
//! per `(kind, p, m)`, optionally persisted as plain-text key-value rows.

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use super::lp_ball::lp_ball_raw;
use crate::error::Result;
use crate::seeding;
use rand::Rng;

/// Default number of pilot columns per calibration record.
pub const DEFAULT_PILOT_COLUMNS: usize = 200_000;

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationRecord {
    pub constant: f64,
    pub pilot_columns: usize,
}

/// Key: sampler family name, ℓp exponent (f64 bits; infinity allowed), dimension.
type Key = (String, u64, usize);

#[derive(Debug, Default)]
pub struct CalibrationCache {
    records: Mutex<HashMap<Key, CalibrationRecord>>,
    path: Option<PathBuf>,
}

impl CalibrationCache {
    /// Purely in-memory cache.
    pub fn in_memory() -> Self {
        CalibrationCache::default()
    }

    /// Cache backed by a plain-text file; existing records are loaded, new
    /// ones appended.
    pub fn with_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut records = HashMap::new();
        if path.exists() {
            let text = std::fs::read_to_string(&path)?;
            for line in text.lines() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                if let Some(entry) = parse_line(line) {
                    records.insert(entry.0, entry.1);
                }
            }
        }
        Ok(CalibrationCache { records: Mutex::new(records), path: Some(path) })
    }

    /// Scaling constant for the uniform ℓp-ball in dimension `m` (`p` may be
    /// infinite, meaning the unit cube). Computes and stores on miss.
    pub fn lp_constant(&self, p: f64, m: usize) -> Result<f64> {
        let key = ("lp_ball".to_string(), p.to_bits(), m);
        if let Some(r) = self.records.lock().unwrap().get(&key) {
            return Ok(r.constant);
        }
        let record = pilot_lp_constant(p, m, DEFAULT_PILOT_COLUMNS)?;
        let constant = record.constant;
        self.records.lock().unwrap().insert(key.clone(), record.clone());
        if let Some(path) = &self.path {
            append_record(path, &key, &record)?;
        }
        Ok(constant)
    }

    pub fn len(&self) -> usize {
        self.records.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Pilot Monte Carlo estimate of the isotropy constant `1/√(E u₁²)` for the
/// uniform law on the ℓp ball (cube for infinite p). The pilot RNG seed is a
/// fixed function of the key, so constants are reproducible everywhere.
pub fn pilot_lp_constant(p: f64, m: usize, pilot_columns: usize) -> Result<CalibrationRecord> {
    let seed = seeding::derive(0xCA11_B8A5_E000_0000, p.to_bits() ^ (m as u64).rotate_left(17));
    let mut rng = seeding::rng_from(seed);
    let mut acc = 0.0f64;
    if p.is_infinite() {
        // uniform product law; sampled directly
        for _ in 0..pilot_columns {
            for _ in 0..m {
                let v: f64 = rng.random_range(-1.0..1.0);
                acc += v * v;
            }
        }
    } else {
        for _ in 0..pilot_columns {
            let u = lp_ball_raw(p, m, &mut rng)?;
            acc += u.iter().map(|v| v * v).sum::<f64>();
        }
    }
    let mean_sq = acc / (pilot_columns * m) as f64;
    Ok(CalibrationRecord { constant: 1.0 / mean_sq.sqrt(), pilot_columns })
}

fn parse_line(line: &str) -> Option<(Key, CalibrationRecord)> {
    let mut kind = None;
    let mut p = None;
    let mut m = None;
    let mut constant = None;
    let mut pilot = None;
    for field in line.split_whitespace() {
        let (k, v) = field.split_once('=')?;
        match k {
            "kind" => kind = Some(v.to_string()),
            "p" => p = Some(if v == "inf" { f64::INFINITY } else { v.parse::<f64>().ok()? }),
            "m" => m = Some(v.parse::<usize>().ok()?),
            "constant" => constant = Some(v.parse::<f64>().ok()?),
            "pilot" => pilot = Some(v.parse::<usize>().ok()?),
            _ => return None,
        }
    }
    Some((
        (kind?, p?.to_bits(), m?),
        CalibrationRecord { constant: constant?, pilot_columns: pilot? },
    ))
}

fn append_record(path: &Path, key: &Key, record: &CalibrationRecord) -> Result<()> {
    let mut file = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
    let p = f64::from_bits(key.1);
    let p_str = if p.is_infinite() { "inf".to_string() } else { format!("{p}") };
    writeln!(
        file,
        "kind={} p={} m={} constant={} pilot={}",
        key.0, p_str, key.2, record.constant, record.pilot_columns
    )?;
    Ok(())
}
