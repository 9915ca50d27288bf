//! Resumable state for long champion runs, stored as versioned JSON.

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaps::{ChampionReport, GapHistogram};

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub limit: u64,
    pub segment_size: u64,
    /// Requested report bounds, ascending.
    pub checkpoints: Vec<u64>,
    /// Every integer up to and including this value has been sieved.
    pub processed_up_to: u64,
    pub last_prime: u64,
    pub histogram: GapHistogram,
    /// Reports for every checkpoint `<= processed_up_to`, in order.
    pub reports: Vec<ChampionReport>,
}

fn corrupt(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

impl Checkpoint {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cp: Checkpoint = serde_json::from_str(text)
            .map_err(|e| corrupt(format!("cannot parse checkpoint: {e}")))?;
        cp.validate()?;
        Ok(cp)
    }

    /// Structural checks that do not need re-sieving.
    pub fn validate(&self) -> Result<()> {
        if self.format_version != CHECKPOINT_FORMAT_VERSION {
            return Err(corrupt(format!(
                "unsupported format version {} (expected {CHECKPOINT_FORMAT_VERSION})",
                self.format_version
            )));
        }
        if self.processed_up_to > self.limit {
            return Err(corrupt(format!(
                "processed bound {} exceeds limit {}",
                self.processed_up_to, self.limit
            )));
        }
        if self.histogram.upper_bound_x() != self.processed_up_to {
            return Err(corrupt(format!(
                "histogram bound {} does not match processed bound {}",
                self.histogram.upper_bound_x(),
                self.processed_up_to
            )));
        }
        if self.last_prime < 2 || self.last_prime > self.processed_up_to {
            return Err(corrupt(format!(
                "last prime {} is outside [2, {}]",
                self.last_prime, self.processed_up_to
            )));
        }
        // Consecutive gaps telescope from 2 to the last prime.
        if self.histogram.weighted_sum() + 2 != self.last_prime {
            return Err(corrupt(format!(
                "histogram gaps sum to {} but the last prime is {}",
                self.histogram.weighted_sum() + 2,
                self.last_prime
            )));
        }
        let due = self
            .checkpoints
            .iter()
            .take_while(|&&c| c <= self.processed_up_to)
            .count();
        if self.reports.len() != due {
            return Err(corrupt(format!(
                "{} reports stored but {due} checkpoints lie at or below {}",
                self.reports.len(),
                self.processed_up_to
            )));
        }
        if let Some((r, c)) = self
            .reports
            .iter()
            .zip(&self.checkpoints)
            .find(|(r, &c)| r.x != c)
        {
            return Err(corrupt(format!(
                "report for {} stored where {c} was expected",
                r.x
            )));
        }
        Ok(())
    }

    /// Writes to a sibling temporary file, syncs it, then renames over `path`.
    pub fn save_atomic(&self, path: &Path) -> Result<()> {
        let tmp = temp_path(path);
        {
            let mut f = File::create(&tmp)?;
            f.write_all(self.to_json()?.as_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| corrupt(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

fn temp_path(path: &Path) -> PathBuf {
    let mut name = path
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".tmp");
    path.with_file_name(name)
}
