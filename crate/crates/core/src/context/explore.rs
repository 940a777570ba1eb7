use std::collections::BTreeSet;

use super::{ContextVector, EstimatorTable, ExplorationSchedule, HypercubeId, Partition};
use crate::error::Result;
use crate::ids::{ClientId, EsId};

/// Per-ES under-explored cells and the clients whose current context falls in them.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct UnderExplored {
    pub cells: Vec<BTreeSet<HypercubeId>>,
    pub clients: Vec<BTreeSet<ClientId>>,
}

impl UnderExplored {
    pub fn is_empty(&self) -> bool {
        self.clients.iter().all(BTreeSet::is_empty)
    }

    pub fn contains(&self, client: ClientId, es: EsId) -> bool {
        self.clients
            .get(es.0)
            .is_some_and(|set| set.contains(&client))
    }
}

/// A pair is under-explored when the counter of its current cell is at most `K(t)`.
pub fn under_explored<'a>(
    table: &EstimatorTable,
    partition: &Partition,
    schedule: &ExplorationSchedule,
    t: u64,
    num_es: usize,
    feasible_pairs: impl IntoIterator<Item = (ClientId, EsId, &'a ContextVector)>,
) -> Result<UnderExplored> {
    let k = schedule.control_function(t)?;
    let mut out = UnderExplored {
        cells: vec![BTreeSet::new(); num_es],
        clients: vec![BTreeSet::new(); num_es],
    };
    for (client, es, phi) in feasible_pairs {
        let cell = partition.locate(phi)?;
        if table.counter(client, es, &cell) as f64 <= k {
            out.clients[es.0].insert(client);
            out.cells[es.0].insert(cell);
        }
    }
    Ok(out)
}
