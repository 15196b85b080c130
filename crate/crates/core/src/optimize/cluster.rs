//! Grouping of multi-start minima by energy.

use serde::{Deserialize, Serialize};

use super::SolutionSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub mean_energy: f64,
    pub min_energy: f64,
    pub max_energy: f64,
    /// Indices into the source records.
    pub members: Vec<usize>,
    /// Member with the lowest energy.
    pub representative: usize,
}

impl Cluster {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// Clusters sorted by ascending energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimaBranches {
    pub tolerance: f64,
    pub clusters: Vec<Cluster>,
}

impl MinimaBranches {
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn lowest(&self) -> Option<&Cluster> {
        self.clusters.first()
    }

    /// Cluster containing the most records (lowest energy on ties).
    pub fn most_populated(&self) -> Option<&Cluster> {
        self.clusters
            .iter()
            .enumerate()
            .max_by(|(i, a), (j, b)| a.size().cmp(&b.size()).then(j.cmp(i)))
            .map(|(_, c)| c)
    }
}

/// Single-linkage clustering of final energies: sorted energies closer than
/// `tolerance` to their neighbour share a cluster.
pub fn cluster_solutions(set: &SolutionSet, tolerance: f64) -> MinimaBranches {
    let mut order: Vec<usize> = (0..set.records.len()).collect();
    order.sort_by(|&a, &b| {
        set.records[a]
            .energy_final
            .total_cmp(&set.records[b].energy_final)
            .then(set.records[a].start_index.cmp(&set.records[b].start_index))
    });
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for idx in order {
        let e = set.records[idx].energy_final;
        match groups.last_mut() {
            Some(g) if e - last <= tolerance => g.push(idx),
            _ => groups.push(vec![idx]),
        }
        last = e;
    }
    let clusters = groups
        .into_iter()
        .map(|members| {
            let es: Vec<f64> = members.iter().map(|&i| set.records[i].energy_final).collect();
            Cluster {
                mean_energy: es.iter().sum::<f64>() / es.len() as f64,
                min_energy: es[0],
                max_energy: es[es.len() - 1],
                representative: members[0],
                members,
            }
        })
        .collect();
    MinimaBranches { tolerance, clusters }
}
