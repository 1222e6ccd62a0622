use std::collections::BTreeMap;

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::scene::{AgentId, AgentState};

/// Partition of the observed humans into walking groups.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupAssignment {
    group_of: BTreeMap<AgentId, usize>,
    groups: Vec<Vec<AgentId>>,
}

impl GroupAssignment {
    /// Every id in its own group.
    pub fn singletons(ids: impl IntoIterator<Item = AgentId>) -> Self {
        let mut ids: Vec<AgentId> = ids.into_iter().collect();
        ids.sort_unstable();
        ids.dedup();
        let group_of = ids.iter().enumerate().map(|(g, id)| (*id, g)).collect();
        let groups = ids.into_iter().map(|id| vec![id]).collect();
        GroupAssignment { group_of, groups }
    }

    pub fn group_id(&self, id: AgentId) -> Option<usize> {
        self.group_of.get(&id).copied()
    }

    /// Members of the group containing `id`, sorted by id.
    pub fn members_of(&self, id: AgentId) -> Option<&[AgentId]> {
        self.group_id(id).map(|g| self.groups[g].as_slice())
    }

    /// Groups sorted by their smallest member; members sorted by id.
    pub fn groups(&self) -> &[Vec<AgentId>] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

/// Connected components of the "walks together" relation: two humans are
/// linked when both their distance and their velocity difference are within
/// the thresholds.
pub fn detect_groups(
    humans: &[(AgentId, AgentState)],
    tau_group_dis: f64,
    tau_group_vel: f64,
) -> GroupAssignment {
    let mut sorted: Vec<(AgentId, AgentState)> = humans.to_vec();
    sorted.sort_by_key(|(id, _)| *id);
    sorted.dedup_by_key(|(id, _)| *id);

    let n = sorted.len();
    let mut uf = UnionFind::<usize>::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (&sorted[i].1, &sorted[j].1);
            if a.position.distance(b.position) <= tau_group_dis
                && a.velocity.distance(b.velocity) <= tau_group_vel
            {
                uf.union(i, j);
            }
        }
    }

    // label groups in order of their smallest member
    let mut label_of_root: BTreeMap<usize, usize> = BTreeMap::new();
    let mut groups: Vec<Vec<AgentId>> = Vec::new();
    let mut group_of = BTreeMap::new();
    for (i, (id, _)) in sorted.iter().enumerate() {
        let root = uf.find(i);
        let g = *label_of_root.entry(root).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(*id);
        group_of.insert(*id, g);
    }
    GroupAssignment { group_of, groups }
}
