//! BFS orderings and candidate host lists.
//!
//! Virtual nodes are mapped in BFS order from the most demanding node,
//! each level sorted by descending total resource (CPU plus incident
//! bandwidth). Substrate nodes are ranked the same way on available
//! resources, and each virtual node's candidate list filters that ranking
//! down to hosts that pass the CPU test and the incident-bandwidth screen.

use std::collections::VecDeque;

use crate::topology::{NodeId, SubstrateNetwork, VirtualNetwork};
use crate::{Result, VneError};

/// Candidate substrate hosts per virtual node, indexed like the BFS order
/// that produced them. Lists may be empty; the caller decides whether that
/// rejects the request.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateLists {
    pub lists: Vec<Vec<NodeId>>,
}

impl CandidateLists {
    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }

    pub fn list(&self, dim: usize) -> &[NodeId] {
        &self.lists[dim]
    }
}

/// BFS order of the virtual nodes: rooted at the node with the largest
/// total resource, each level sorted by descending resource, ties to the
/// lower id.
pub fn virtual_bfs_order(vn: &VirtualNetwork) -> Result<Vec<NodeId>> {
    if vn.node_count() == 0 {
        return Err(VneError::InvalidArgument(
            "virtual network has no nodes".into(),
        ));
    }
    if !vn.is_connected() {
        return Err(VneError::InvalidArgument(
            "virtual network must be connected for BFS ordering".into(),
        ));
    }
    let root = vn
        .nodes()
        .iter()
        .map(|n| n.id)
        .max_by(|&a, &b| {
            vn.total_resource(a)
                .total_cmp(&vn.total_resource(b))
                .then(b.cmp(&a))
        })
        .expect("nonempty");
    let order = bfs_levels(root, |v| vn.adjacent(v).iter().map(|&(n, _)| n).collect());
    Ok(sort_levels(order, |id| vn.total_resource(id)))
}

/// BFS ranking of the substrate on available resources. A disconnected
/// substrate is covered component by component, richest root first.
pub fn substrate_bfs_order(sn: &SubstrateNetwork) -> Vec<NodeId> {
    let mut visited = vec![false; sn.node_count()];
    let mut out = Vec::with_capacity(sn.node_count());
    loop {
        let root = (0..sn.node_count())
            .filter(|&v| !visited[v])
            .max_by(|&a, &b| {
                sn.total_resource(a)
                    .total_cmp(&sn.total_resource(b))
                    .then(b.cmp(&a))
            });
        let Some(root) = root else { break };
        let levels = bfs_levels(root, |v| sn.adjacent(v).iter().map(|&(n, _)| n).collect());
        for level in &levels {
            for &v in level {
                visited[v] = true;
            }
        }
        out.extend(sort_levels(levels, |id| sn.total_resource(id)));
    }
    out
}

fn bfs_levels<F>(root: NodeId, neighbors: F) -> Vec<Vec<NodeId>>
where
    F: Fn(NodeId) -> Vec<NodeId>,
{
    let mut levels: Vec<Vec<NodeId>> = vec![vec![root]];
    let mut seen = std::collections::HashSet::new();
    seen.insert(root);
    let mut frontier = VecDeque::from([root]);
    loop {
        let mut next = Vec::new();
        for _ in 0..frontier.len() {
            let v = frontier.pop_front().unwrap();
            for w in neighbors(v) {
                if seen.insert(w) {
                    next.push(w);
                    frontier.push_back(w);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        levels.push(next);
    }
    levels
}

fn sort_levels<F>(mut levels: Vec<Vec<NodeId>>, resource: F) -> Vec<NodeId>
where
    F: Fn(NodeId) -> f64,
{
    for level in levels.iter_mut() {
        level.sort_by(|&a, &b| resource(b).total_cmp(&resource(a)).then(a.cmp(&b)));
    }
    levels.into_iter().flatten().collect()
}

/// Builds the candidate list of every virtual node in `order`: substrate
/// nodes in BFS-ranked order whose available CPU covers the node's demand
/// and whose incident available bandwidth covers the node's incident
/// bandwidth demand.
pub fn build_candidate_lists(
    vn: &VirtualNetwork,
    order: &[NodeId],
    sn: &SubstrateNetwork,
) -> CandidateLists {
    let ranking = substrate_bfs_order(sn);
    let incident_avail: Vec<f64> = (0..sn.node_count())
        .map(|v| {
            sn.adjacent(v)
                .iter()
                .map(|&(_, l)| sn.link(l).bw_available)
                .sum()
        })
        .collect();
    let lists = order
        .iter()
        .map(|&vid| {
            let cpu_demand = vn.cpu_demand(vid);
            let bw_demand: f64 = vn
                .adjacent(vid)
                .iter()
                .map(|&(_, l)| vn.links()[l].bw_demand)
                .sum();
            ranking
                .iter()
                .copied()
                .filter(|&s| {
                    sn.node(s).cpu_available >= cpu_demand && incident_avail[s] >= bw_demand
                })
                .collect()
        })
        .collect();
    CandidateLists { lists }
}
