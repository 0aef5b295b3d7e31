//! Versioned JSON snapshots of trained models.
//!
//! Floats are written in shortest round-trip form and parsed with full
//! precision, so save → load reproduces every coefficient bit for bit.

use evoprog_core::prognoser::Fitted;
use serde::{Deserialize, Serialize};

pub const SNAPSHOT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSnapshot {
    pub schema: u32,
    pub algorithm: String,
    pub battery: String,
    pub lags: usize,
    /// Last observed cycle the model was trained on.
    pub origin: i64,
    pub fitted: Fitted,
}

impl ModelSnapshot {
    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    /// Parses a snapshot and rebuilds the per-rule caches.
    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let mut snap: Self = serde_json::from_str(text)?;
        anyhow::ensure!(
            snap.schema == SNAPSHOT_SCHEMA,
            "unsupported snapshot schema {} (expected {SNAPSHOT_SCHEMA})",
            snap.schema
        );
        if let Fitted::Efs { model, .. } = &mut snap.fitted {
            model.refresh_caches();
        }
        Ok(snap)
    }
}
