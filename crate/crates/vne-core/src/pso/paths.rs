//! Feasibility checking with hop-bounded, bandwidth-aware link mapping.

use std::collections::{BTreeMap, HashMap};

use crate::energy::LinkMap;
use crate::topology::{NodeId, SubstrateNetwork, VirtualNetwork};

use super::Position;

/// Verifies a position and maps every virtual link, or returns `None`.
///
/// CPU demands are summed per chosen host and must fit the host's
/// available CPU. Virtual links are processed in descending bandwidth
/// order; each needs a path of at most `max_hops` whose links all retain
/// enough bandwidth after the reservations made earlier in this same check.
/// Co-located endpoints map to the empty path.
pub fn check_feasible(
    pos: &Position,
    order: &[NodeId],
    vn: &VirtualNetwork,
    sn: &SubstrateNetwork,
    max_hops: usize,
) -> Option<LinkMap> {
    debug_assert_eq!(pos.0.len(), order.len());
    let host_of: BTreeMap<NodeId, NodeId> =
        order.iter().copied().zip(pos.0.iter().copied()).collect();

    let mut cpu_load: BTreeMap<NodeId, f64> = BTreeMap::new();
    for (&vid, &sid) in &host_of {
        *cpu_load.entry(sid).or_insert(0.0) += vn.cpu_demand(vid);
    }
    for (&sid, &load) in &cpu_load {
        if load > sn.node(sid).cpu_available {
            return None;
        }
    }

    let mut vlinks: Vec<_> = vn.links().iter().collect();
    vlinks.sort_by(|a, b| {
        b.bw_demand
            .total_cmp(&a.bw_demand)
            .then(a.endpoints.cmp(&b.endpoints))
    });

    let mut reserved: HashMap<usize, f64> = HashMap::new();
    let mut link_map = LinkMap::new();
    for vlink in vlinks {
        let (a, b) = vlink.endpoints;
        let (sa, sb) = (host_of[&a], host_of[&b]);
        if sa == sb {
            link_map.insert(vlink.endpoints, Vec::new());
            continue;
        }
        let path = shortest_feasible_path(sn, &reserved, sa, sb, vlink.bw_demand, max_hops)?;
        for &(u, v) in &path {
            let idx = sn.link_between(u, v).expect("path uses existing links");
            *reserved.entry(idx).or_insert(0.0) += vlink.bw_demand;
        }
        link_map.insert(vlink.endpoints, path);
    }
    Some(link_map)
}

/// Minimum-hop path from `src` to `dst` over links whose unreserved
/// bandwidth covers `demand`, at most `max_hops` long. Among minimum-hop
/// paths the one with the largest bottleneck wins; remaining ties go to
/// the lexicographically smallest node sequence. Returns the path as an
/// oriented link walk.
pub fn shortest_feasible_path(
    sn: &SubstrateNetwork,
    reserved: &HashMap<usize, f64>,
    src: NodeId,
    dst: NodeId,
    demand: f64,
    max_hops: usize,
) -> Option<Vec<(NodeId, NodeId)>> {
    debug_assert_ne!(src, dst);
    let residual =
        |idx: usize| sn.link(idx).bw_available - reserved.get(&idx).copied().unwrap_or(0.0);
    let usable = |idx: usize| residual(idx) >= demand;

    let dist_src = bounded_bfs(sn, src, max_hops, &usable);
    let hops = dist_src[dst]?;
    let dist_dst = bounded_bfs(sn, dst, hops, &usable);

    // Enumerate the shortest-path DAG (depth <= max_hops keeps it small)
    // and pick (max bottleneck, lexicographically smallest nodes).
    let mut best: Option<(f64, Vec<NodeId>)> = None;
    let mut stack: Vec<NodeId> = vec![src];
    enumerate_paths(
        sn,
        &dist_src,
        &dist_dst,
        hops,
        dst,
        &usable,
        &residual,
        &mut stack,
        f64::INFINITY,
        &mut best,
    );
    let (_, nodes) = best?;
    Some(nodes.windows(2).map(|w| (w[0], w[1])).collect())
}

fn bounded_bfs(
    sn: &SubstrateNetwork,
    start: NodeId,
    limit: usize,
    usable: &impl Fn(usize) -> bool,
) -> Vec<Option<usize>> {
    let mut dist: Vec<Option<usize>> = vec![None; sn.node_count()];
    dist[start] = Some(0);
    let mut frontier = vec![start];
    for d in 1..=limit {
        let mut next = Vec::new();
        for &v in &frontier {
            for &(w, idx) in sn.adjacent(v) {
                if dist[w].is_none() && usable(idx) {
                    dist[w] = Some(d);
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    dist
}

#[allow(clippy::too_many_arguments)]
fn enumerate_paths(
    sn: &SubstrateNetwork,
    dist_src: &[Option<usize>],
    dist_dst: &[Option<usize>],
    hops: usize,
    dst: NodeId,
    usable: &impl Fn(usize) -> bool,
    residual: &impl Fn(usize) -> f64,
    stack: &mut Vec<NodeId>,
    bottleneck: f64,
    best: &mut Option<(f64, Vec<NodeId>)>,
) {
    let v = *stack.last().unwrap();
    if v == dst {
        let better = match best {
            None => true,
            Some((bw, nodes)) => bottleneck > *bw || (bottleneck == *bw && stack[..] < nodes[..]),
        };
        if better {
            *best = Some((bottleneck, stack.clone()));
        }
        return;
    }
    let depth = stack.len() - 1;
    for &(w, idx) in sn.adjacent(v) {
        if !usable(idx) {
            continue;
        }
        // Stay on the shortest-path DAG toward dst.
        if dist_src[w] != Some(depth + 1) || dist_dst[w] != Some(hops - depth - 1) {
            continue;
        }
        stack.push(w);
        enumerate_paths(
            sn,
            dist_src,
            dist_dst,
            hops,
            dst,
            usable,
            residual,
            stack,
            bottleneck.min(residual(idx)),
            best,
        );
        stack.pop();
    }
}
