//! Graph data model for substrate and virtual networks.
//!
//! Substrate networks offer CPU on nodes and bandwidth on undirected links;
//! virtual networks demand them. Both are validated at construction: unique
//! node ids, no self-loops, no parallel links, link endpoints present.
//! Substrate node ids are always the contiguous range `0..n`; virtual
//! networks may carry arbitrary ids so that induced subgraphs keep the
//! original numbering.

use std::collections::HashMap;

use crate::{Result, VneError};

mod brite;
mod waxman;

pub use brite::{
    read_substrate_brite, read_virtual_brite, write_substrate_brite, write_virtual_brite,
};
pub use waxman::{
    generate_waxman_substrate, generate_waxman_virtual, generate_workload, VirtualNetParams,
};

pub type NodeId = usize;

/// Resource amounts are snapped to a 1/1024 grid. Sums and differences of
/// grid values are exact in f64 at the magnitudes used here, so allocation
/// and release round-trip bit-identically.
pub fn snap(x: f64) -> f64 {
    (x * 1024.0).round() / 1024.0
}

/// CPU capacity and the two power points of a server model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ServerProfile {
    /// Compute capacity in MIPS.
    pub cpu_capacity: f64,
    /// Power drawn by an idle but powered server, in watts.
    pub power_baseline: f64,
    /// Power drawn at full utilization, in watts.
    pub power_full: f64,
}

impl ServerProfile {
    pub fn validate(&self) -> Result<()> {
        if !(self.power_full > self.power_baseline && self.power_baseline > 0.0) {
            return Err(VneError::InvalidArgument(format!(
                "server profile requires power_full > power_baseline > 0, got {} / {}",
                self.power_full, self.power_baseline
            )));
        }
        if self.cpu_capacity <= 0.0 {
            return Err(VneError::InvalidArgument(
                "server profile cpu_capacity must be > 0".into(),
            ));
        }
        Ok(())
    }
}

/// HP ProLiant ML110 G4: 2 cores x 1860 MHz, SPECpower-style wattages.
pub const PROFILE_G4: ServerProfile = ServerProfile {
    cpu_capacity: 3720.0,
    power_baseline: 86.0,
    power_full: 117.0,
};

/// HP ProLiant ML110 G5: 2 cores x 2660 MHz, SPECpower-style wattages.
pub const PROFILE_G5: ServerProfile = ServerProfile {
    cpu_capacity: 5320.0,
    power_baseline: 93.7,
    power_full: 135.0,
};

#[derive(Clone, Debug, PartialEq)]
pub struct SubstrateNode {
    pub id: NodeId,
    pub x: f64,
    pub y: f64,
    pub cpu_capacity: f64,
    pub cpu_available: f64,
    pub power_baseline: f64,
    pub power_full: f64,
    pub powered_on: bool,
    /// Index into the server-profile table the node was drawn from.
    pub profile: usize,
    /// Owning data center; 0 for single-domain networks.
    pub dc_id: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubstrateLink {
    /// Normalized so that endpoints.0 < endpoints.1.
    pub endpoints: (NodeId, NodeId),
    pub bw_capacity: f64,
    pub bw_available: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubstrateNetwork {
    nodes: Vec<SubstrateNode>,
    links: Vec<SubstrateLink>,
    /// adjacency[v] = (neighbor, link index), sorted by neighbor id.
    adjacency: Vec<Vec<(NodeId, usize)>>,
}

impl SubstrateNetwork {
    /// Builds a network, validating node/link invariants. Substrate node
    /// ids must be exactly `0..nodes.len()` in order.
    pub fn new(nodes: Vec<SubstrateNode>, mut links: Vec<SubstrateLink>) -> Result<Self> {
        for (i, n) in nodes.iter().enumerate() {
            if n.id != i {
                return Err(VneError::InvalidArgument(format!(
                    "substrate node ids must be contiguous from 0; node {} has id {}",
                    i, n.id
                )));
            }
            if !(n.cpu_available >= 0.0 && n.cpu_available <= n.cpu_capacity) {
                return Err(VneError::InvalidArgument(format!(
                    "node {}: cpu_available {} outside [0, {}]",
                    n.id, n.cpu_available, n.cpu_capacity
                )));
            }
            if !(n.power_full > n.power_baseline && n.power_baseline > 0.0) {
                return Err(VneError::InvalidArgument(format!(
                    "node {}: requires power_full > power_baseline > 0",
                    n.id
                )));
            }
            if n.cpu_available < n.cpu_capacity && !n.powered_on {
                return Err(VneError::InvalidArgument(format!(
                    "node {}: hosts load (available < capacity) but is powered off",
                    n.id
                )));
            }
        }
        for l in links.iter_mut() {
            if l.endpoints.0 > l.endpoints.1 {
                l.endpoints = (l.endpoints.1, l.endpoints.0);
            }
        }
        let mut adjacency = vec![Vec::new(); nodes.len()];
        let mut seen = HashMap::new();
        for (idx, l) in links.iter().enumerate() {
            let (a, b) = l.endpoints;
            if a == b {
                return Err(VneError::InvalidArgument(format!(
                    "self-loop on node {}",
                    a
                )));
            }
            if b >= nodes.len() {
                return Err(VneError::InvalidArgument(format!(
                    "link ({}, {}) references unknown node",
                    a, b
                )));
            }
            if seen.insert((a, b), idx).is_some() {
                return Err(VneError::InvalidArgument(format!(
                    "parallel link ({}, {})",
                    a, b
                )));
            }
            if !(l.bw_available >= 0.0 && l.bw_available <= l.bw_capacity) {
                return Err(VneError::InvalidArgument(format!(
                    "link ({}, {}): bw_available {} outside [0, {}]",
                    a, b, l.bw_available, l.bw_capacity
                )));
            }
            adjacency[a].push((b, idx));
            adjacency[b].push((a, idx));
        }
        for adj in adjacency.iter_mut() {
            adj.sort_unstable();
        }
        Ok(Self {
            nodes,
            links,
            adjacency,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn node(&self, id: NodeId) -> &SubstrateNode {
        &self.nodes[id]
    }

    /// Mutable node access for the resource owner (simulator / committer).
    /// Only the availability and power-state fields may be changed.
    pub fn node_mut(&mut self, id: NodeId) -> &mut SubstrateNode {
        &mut self.nodes[id]
    }

    pub fn nodes(&self) -> &[SubstrateNode] {
        &self.nodes
    }

    pub fn link(&self, idx: usize) -> &SubstrateLink {
        &self.links[idx]
    }

    pub fn link_mut(&mut self, idx: usize) -> &mut SubstrateLink {
        &mut self.links[idx]
    }

    pub fn links(&self) -> &[SubstrateLink] {
        &self.links
    }

    /// Neighbors of `id` with the index of the connecting link, sorted by
    /// neighbor id.
    pub fn adjacent(&self, id: NodeId) -> &[(NodeId, usize)] {
        &self.adjacency[id]
    }

    pub fn link_between(&self, a: NodeId, b: NodeId) -> Option<usize> {
        self.adjacency[a]
            .iter()
            .find(|(n, _)| *n == b)
            .map(|(_, idx)| *idx)
    }

    /// Available CPU plus summed available bandwidth of incident links.
    pub fn total_resource(&self, id: NodeId) -> f64 {
        let bw: f64 = self.adjacency[id]
            .iter()
            .map(|&(_, l)| self.links[l].bw_available)
            .sum();
        self.nodes[id].cpu_available + bw
    }

    /// true iff every node is reachable from node 0 (vacuously for empty).
    pub fn is_connected(&self) -> bool {
        reachable_count(self.nodes.len(), |v| {
            self.adjacency[v].iter().map(|&(n, _)| n)
        }) == self.nodes.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VirtualNode {
    pub id: NodeId,
    /// Required compute in MIPS; strictly positive.
    pub cpu_demand: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VirtualLink {
    /// Normalized so that endpoints.0 < endpoints.1.
    pub endpoints: (NodeId, NodeId),
    pub bw_demand: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VirtualNetwork {
    /// Sorted by id.
    nodes: Vec<VirtualNode>,
    /// Sorted by endpoints.
    links: Vec<VirtualLink>,
    index: HashMap<NodeId, usize>,
    adjacency: Vec<Vec<(NodeId, usize)>>,
}

impl VirtualNetwork {
    pub fn new(mut nodes: Vec<VirtualNode>, mut links: Vec<VirtualLink>) -> Result<Self> {
        nodes.sort_by_key(|n| n.id);
        let mut index = HashMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if index.insert(n.id, i).is_some() {
                return Err(VneError::InvalidArgument(format!(
                    "duplicate virtual node id {}",
                    n.id
                )));
            }
            if n.cpu_demand <= 0.0 {
                return Err(VneError::InvalidArgument(format!(
                    "virtual node {}: cpu_demand must be > 0",
                    n.id
                )));
            }
        }
        for l in links.iter_mut() {
            if l.endpoints.0 > l.endpoints.1 {
                l.endpoints = (l.endpoints.1, l.endpoints.0);
            }
        }
        links.sort_by_key(|l| l.endpoints);
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for (idx, l) in links.iter().enumerate() {
            let (a, b) = l.endpoints;
            if a == b {
                return Err(VneError::InvalidArgument(format!(
                    "self-loop on virtual node {}",
                    a
                )));
            }
            if l.bw_demand <= 0.0 {
                return Err(VneError::InvalidArgument(format!(
                    "virtual link ({}, {}): bw_demand must be > 0",
                    a, b
                )));
            }
            let (ia, ib) = match (index.get(&a), index.get(&b)) {
                (Some(&ia), Some(&ib)) => (ia, ib),
                _ => {
                    return Err(VneError::InvalidArgument(format!(
                        "virtual link ({}, {}) references unknown node",
                        a, b
                    )))
                }
            };
            if idx > 0 && links[idx - 1].endpoints == l.endpoints {
                return Err(VneError::InvalidArgument(format!(
                    "parallel virtual link ({}, {})",
                    a, b
                )));
            }
            adjacency[ia].push((b, idx));
            adjacency[ib].push((a, idx));
        }
        for adj in adjacency.iter_mut() {
            adj.sort_unstable();
        }
        Ok(Self {
            nodes,
            links,
            index,
            adjacency,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    /// Nodes in ascending id order.
    pub fn nodes(&self) -> &[VirtualNode] {
        &self.nodes
    }

    pub fn links(&self) -> &[VirtualLink] {
        &self.links
    }

    pub fn node(&self, id: NodeId) -> Option<&VirtualNode> {
        self.index.get(&id).map(|&i| &self.nodes[i])
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn cpu_demand(&self, id: NodeId) -> f64 {
        self.nodes[self.index[&id]].cpu_demand
    }

    /// Neighbors of `id` with the index of the connecting link, sorted by
    /// neighbor id.
    pub fn adjacent(&self, id: NodeId) -> &[(NodeId, usize)] {
        &self.adjacency[self.index[&id]]
    }

    /// CPU demand plus summed bandwidth demand of incident links.
    pub fn total_resource(&self, id: NodeId) -> f64 {
        let i = self.index[&id];
        let bw: f64 = self.adjacency[i]
            .iter()
            .map(|&(_, l)| self.links[l].bw_demand)
            .sum();
        self.nodes[i].cpu_demand + bw
    }

    pub fn total_cpu_demand(&self) -> f64 {
        self.nodes.iter().map(|n| n.cpu_demand).sum()
    }

    pub fn is_connected(&self) -> bool {
        let index = &self.index;
        let adjacency = &self.adjacency;
        reachable_count(self.nodes.len(), |v| {
            adjacency[v].iter().map(move |&(n, _)| index[&n])
        }) == self.nodes.len()
    }
}

fn reachable_count<I, F>(n: usize, neighbors: F) -> usize
where
    I: Iterator<Item = usize>,
    F: Fn(usize) -> I,
{
    if n == 0 {
        return 0;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for w in neighbors(v) {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count
}

/// A virtual network request: the graph plus its arrival time and lifetime.
#[derive(Clone, Debug, PartialEq)]
pub struct Vnr {
    pub id: u64,
    pub graph: VirtualNetwork,
    pub arrival_time: f64,
    pub lifetime: f64,
}

impl Vnr {
    pub fn new(id: u64, graph: VirtualNetwork, arrival_time: f64, lifetime: f64) -> Result<Self> {
        if arrival_time < 0.0 {
            return Err(VneError::InvalidArgument(
                "arrival_time must be >= 0".into(),
            ));
        }
        if lifetime <= 0.0 {
            return Err(VneError::InvalidArgument("lifetime must be > 0".into()));
        }
        Ok(Self {
            id,
            graph,
            arrival_time,
            lifetime,
        })
    }
}
