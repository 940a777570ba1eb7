use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::HypercubeId;
use crate::error::{Error, Result};
use crate::ids::{ClientId, EsId};

/// Counter and running-mean participation estimate for one `(client, es, cell)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EstimatorEntry {
    pub counter: u64,
    pub estimate: f64,
}

impl EstimatorEntry {
    fn observe(&mut self, participated: bool) {
        let x = if participated { 1.0 } else { 0.0 };
        let c = self.counter as f64;
        self.estimate = (self.estimate * c + x) / (c + 1.0);
        self.counter += 1;
    }
}

type Key = (ClientId, EsId, HypercubeId);

/// Sparse table of per-cell estimators. Absent keys read as `(0, 0.0)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EstimatorTable {
    entries: BTreeMap<Key, EstimatorEntry>,
}

/// One row of the JSON snapshot format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSnapshotRow {
    pub client: ClientId,
    pub es: EsId,
    pub cell_indices: Vec<u32>,
    pub counter: u64,
    pub estimate: f64,
}

impl EstimatorTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, client: ClientId, es: EsId, cell: &HypercubeId) -> EstimatorEntry {
        self.entries
            .get(&(client, es, cell.clone()))
            .copied()
            .unwrap_or_default()
    }

    pub fn counter(&self, client: ClientId, es: EsId, cell: &HypercubeId) -> u64 {
        self.get(client, es, cell).counter
    }

    pub fn estimate(&self, client: ClientId, es: EsId, cell: &HypercubeId) -> f64 {
        self.get(client, es, cell).estimate
    }

    pub fn record_observation(
        &mut self,
        client: ClientId,
        es: EsId,
        cell: &HypercubeId,
        participated: bool,
    ) -> EstimatorEntry {
        let entry = self.entries.entry((client, es, cell.clone())).or_default();
        entry.observe(participated);
        *entry
    }

    /// Number of keys that have been observed at least once.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Key, &EstimatorEntry)> {
        self.entries.iter()
    }

    pub fn snapshot(&self) -> Vec<EstimatorSnapshotRow> {
        self.entries
            .iter()
            .map(|((client, es, cell), e)| EstimatorSnapshotRow {
                client: *client,
                es: *es,
                cell_indices: cell.indices().to_vec(),
                counter: e.counter,
                estimate: e.estimate,
            })
            .collect()
    }

    pub fn from_snapshot(rows: Vec<EstimatorSnapshotRow>) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for row in rows {
            if !(0.0..=1.0).contains(&row.estimate) {
                return Err(Error::InvalidInput(format!(
                    "snapshot estimate {} outside [0, 1]",
                    row.estimate
                )));
            }
            if row.counter == 0 && row.estimate != 0.0 {
                return Err(Error::InvalidInput(
                    "snapshot row with zero counter must have zero estimate".into(),
                ));
            }
            let key = (row.client, row.es, HypercubeId::new(row.cell_indices));
            let entry = EstimatorEntry {
                counter: row.counter,
                estimate: row.estimate,
            };
            if entries.insert(key, entry).is_some() {
                return Err(Error::InvalidInput("duplicate key in snapshot".into()));
            }
        }
        Ok(Self { entries })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.snapshot())?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        Self::from_snapshot(serde_json::from_str(json)?)
    }
}
