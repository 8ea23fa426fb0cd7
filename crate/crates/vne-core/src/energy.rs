//! Power, energy, cost, revenue, and fitness arithmetic.
//!
//! Servers follow the linear power curve: an active server draws its
//! baseline wattage plus `utilization * (full - baseline)`. A request is
//! charged the baseline of every server it switches on and the dynamic
//! share of its own CPU demands; energy is that power times the request
//! lifetime. Cost charges CPU demands plus bandwidth demand per substrate
//! hop; revenue counts demands only. All functions are pure.

use std::collections::BTreeMap;

use crate::topology::{NodeId, SubstrateNetwork, SubstrateNode, VirtualNetwork, Vnr};
use crate::{Result, VneError};

/// Substrate paths as oriented link walks; an empty walk means the
/// endpoints share a host.
pub type LinkMap = BTreeMap<(NodeId, NodeId), Vec<(NodeId, NodeId)>>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerBreakdown {
    /// Utilization-proportional wattage.
    pub dynamic_watts: f64,
    /// Baseline wattage, charged only when this placement powers the node on.
    pub baseline_watts: f64,
    pub total_watts: f64,
}

/// Power drawn by `host` for the given co-located CPU demands.
pub fn node_power(
    host: &SubstrateNode,
    hosted_cpu_demands: &[f64],
    newly_powered: bool,
) -> Result<PowerBreakdown> {
    let total: f64 = hosted_cpu_demands.iter().sum();
    if total > host.cpu_capacity {
        return Err(VneError::InvalidArgument(format!(
            "demands {} exceed capacity {} of node {}",
            total, host.cpu_capacity, host.id
        )));
    }
    let dynamic_watts = total / host.cpu_capacity * (host.power_full - host.power_baseline);
    let baseline_watts = if newly_powered {
        host.power_baseline
    } else {
        0.0
    };
    Ok(PowerBreakdown {
        dynamic_watts,
        baseline_watts,
        total_watts: dynamic_watts + baseline_watts,
    })
}

/// Energy (watt x time units) a request consumes over its lifetime under
/// the given node assignment. Baseline power counts once per node the
/// assignment switches on; nodes already powered contribute only their
/// dynamic share.
pub fn vnr_energy(
    vn: &VirtualNetwork,
    node_map: &BTreeMap<NodeId, NodeId>,
    substrate: &SubstrateNetwork,
    lifetime: f64,
) -> Result<f64> {
    let mut per_host: BTreeMap<NodeId, Vec<f64>> = BTreeMap::new();
    for vnode in vn.nodes() {
        let host = node_map.get(&vnode.id).ok_or_else(|| {
            VneError::InvalidArgument(format!("virtual node {} is unmapped", vnode.id))
        })?;
        if *host >= substrate.node_count() {
            return Err(VneError::InvalidArgument(format!(
                "unknown substrate node {}",
                host
            )));
        }
        per_host.entry(*host).or_default().push(vnode.cpu_demand);
    }
    let mut watts = 0.0;
    for (host, demands) in &per_host {
        let node = substrate.node(*host);
        watts += node_power(node, demands, !node.powered_on)?.total_watts;
    }
    Ok(watts * lifetime)
}

/// Sum of `value` entries with `time <= horizon`, divided by `horizon`.
pub fn long_term_average(series: &[(f64, f64)], horizon: f64) -> Result<f64> {
    if horizon <= 0.0 {
        return Err(VneError::InvalidArgument("horizon must be > 0".into()));
    }
    let sum: f64 = series
        .iter()
        .filter(|(t, _)| *t <= horizon)
        .map(|(_, v)| v)
        .sum();
    Ok(sum / horizon)
}

/// Embedding cost: `(sum of CPU demands + sum of bw demand x hop count) x
/// lifetime`. Co-located virtual links (empty path) cost nothing.
pub fn embedding_cost(
    vnr: &Vnr,
    node_map: &BTreeMap<NodeId, NodeId>,
    link_map: &LinkMap,
) -> Result<f64> {
    let vn = &vnr.graph;
    let mut cpu = 0.0;
    for vnode in vn.nodes() {
        if !node_map.contains_key(&vnode.id) {
            return Err(VneError::InvalidArgument(format!(
                "incomplete embedding: virtual node {} unmapped",
                vnode.id
            )));
        }
        cpu += vnode.cpu_demand;
    }
    let mut bw = 0.0;
    for link in vn.links() {
        let path = link_map.get(&link.endpoints).ok_or_else(|| {
            VneError::InvalidArgument(format!(
                "incomplete embedding: virtual link {:?} unmapped",
                link.endpoints
            ))
        })?;
        bw += link.bw_demand * path.len() as f64;
    }
    Ok((cpu + bw) * vnr.lifetime)
}

/// Revenue of a request: the sum of its CPU and bandwidth demands. It
/// depends only on the request, never on the chosen embedding.
pub fn revenue(vnr: &Vnr) -> f64 {
    let cpu: f64 = vnr.graph.nodes().iter().map(|n| n.cpu_demand).sum();
    let bw: f64 = vnr.graph.links().iter().map(|l| l.bw_demand).sum();
    cpu + bw
}

/// The objective: `alpha * energy + cost`; lower is better.
pub fn fitness(energy: f64, cost: f64, alpha: f64) -> f64 {
    alpha * energy + cost
}
