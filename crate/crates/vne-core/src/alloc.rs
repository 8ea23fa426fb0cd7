//! Committing and releasing embeddings against substrate state.
//!
//! Resource amounts are generated on a dyadic grid (see
//! [`crate::topology::snap`]), so subtracting on commit and adding back on
//! release restores the exact prior bits.

use crate::pso::Embedding;
use crate::topology::{SubstrateNetwork, VirtualNetwork};

/// Reserves the embedding's CPU and bandwidth and powers on every chosen
/// host. `vn` must be the network the embedding was computed for.
pub fn apply_embedding(sn: &mut SubstrateNetwork, vn: &VirtualNetwork, emb: &Embedding) {
    for (&vid, &sid) in &emb.node_map {
        let demand = vn.cpu_demand(vid);
        let node = sn.node_mut(sid);
        node.cpu_available -= demand;
        debug_assert!(node.cpu_available >= 0.0, "over-allocation on node {}", sid);
        node.powered_on = true;
    }
    for (vlink, path) in &emb.link_map {
        let bw = link_demand(vn, *vlink);
        for &(u, v) in path {
            let idx = sn
                .link_between(u, v)
                .expect("embedding path uses existing links");
            let link = sn.link_mut(idx);
            link.bw_available -= bw;
            debug_assert!(
                link.bw_available >= 0.0,
                "over-allocation on link {:?}",
                (u, v)
            );
        }
    }
}

/// Returns the embedding's resources and powers off hosts that end up
/// fully idle (available CPU back at capacity).
pub fn release_embedding(sn: &mut SubstrateNetwork, vn: &VirtualNetwork, emb: &Embedding) {
    for (&vid, &sid) in &emb.node_map {
        let demand = vn.cpu_demand(vid);
        let node = sn.node_mut(sid);
        node.cpu_available += demand;
        debug_assert!(
            node.cpu_available <= node.cpu_capacity,
            "double release on node {}",
            sid
        );
        if node.cpu_available == node.cpu_capacity {
            node.powered_on = false;
        }
    }
    for (vlink, path) in &emb.link_map {
        let bw = link_demand(vn, *vlink);
        for &(u, v) in path {
            let idx = sn
                .link_between(u, v)
                .expect("embedding path uses existing links");
            let link = sn.link_mut(idx);
            link.bw_available += bw;
            debug_assert!(
                link.bw_available <= link.bw_capacity,
                "double release on link {:?}",
                (u, v)
            );
        }
    }
}

fn link_demand(vn: &VirtualNetwork, endpoints: (usize, usize)) -> f64 {
    vn.links()
        .iter()
        .find(|l| l.endpoints == endpoints)
        .map(|l| l.bw_demand)
        .expect("embedding maps a link of vn")
}
