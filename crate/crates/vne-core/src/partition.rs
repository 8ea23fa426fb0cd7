//! Distributed-cloud front end: heavy-clique-matching coarsening of a
//! request, data-center assignment, and the all-or-nothing distributed
//! embedding driver.
//!
//! Coarsening repeatedly matches each unmatched coarse node (visited in
//! descending-weight order) with the unmatched neighbor that maximizes the
//! edge density of the merged group, skipping merges that would exceed the
//! resource bound. Every coarse node is then reconstructed as an induced
//! subgraph, assigned to a data center by best fit, and embedded there with
//! the particle swarm. Virtual links crossing data centers are reserved on
//! the direct inter-DC link, charged one hop. Failures at any stage roll
//! back every reservation already made.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::alloc::apply_embedding;
use crate::pso::{
    build_candidate_lists, embed_eapso, virtual_bfs_order, Embedding, RejectReason, SwarmParams,
};
use crate::topology::{
    snap, NodeId, ServerProfile, SubstrateNetwork, VirtualLink, VirtualNetwork, VirtualNode, Vnr,
};
use crate::{Result, VneError};

/// A group of virtual nodes treated as one placement unit.
#[derive(Clone, Debug, PartialEq)]
pub struct CoarseNode {
    pub id: usize,
    pub members: BTreeSet<NodeId>,
    /// Sum of member CPU demands.
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoarseLink {
    pub endpoints: (usize, usize),
    /// Sum of the bandwidth demands of the crossing virtual links.
    pub bw: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoarseGraph {
    pub nodes: Vec<CoarseNode>,
    pub links: Vec<CoarseLink>,
}

impl CoarseGraph {
    /// Neighbor coarse ids of `id`, ascending.
    fn neighbors(&self, id: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .links
            .iter()
            .filter_map(|l| {
                if l.endpoints.0 == id {
                    Some(l.endpoints.1)
                } else if l.endpoints.1 == id {
                    Some(l.endpoints.0)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }
}

/// One substrate domain plus its designated gateway node.
#[derive(Clone, Debug, PartialEq)]
pub struct DataCenter {
    pub network: SubstrateNetwork,
    pub gateway: NodeId,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InterDcLink {
    /// Normalized so that dcs.0 < dcs.1.
    pub dcs: (usize, usize),
    pub bw_capacity: f64,
    pub bw_available: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DataCenterSet {
    dcs: Vec<DataCenter>,
    inter_dc_links: Vec<InterDcLink>,
}

impl DataCenterSet {
    pub fn new(dcs: Vec<DataCenter>, mut inter_dc_links: Vec<InterDcLink>) -> Result<Self> {
        if dcs.is_empty() {
            return Err(VneError::InvalidArgument(
                "need at least one data center".into(),
            ));
        }
        for (i, dc) in dcs.iter().enumerate() {
            if dc.gateway >= dc.network.node_count() {
                return Err(VneError::InvalidArgument(format!(
                    "data center {}: gateway {} does not exist",
                    i, dc.gateway
                )));
            }
        }
        let mut seen = BTreeSet::new();
        for l in inter_dc_links.iter_mut() {
            if l.dcs.0 > l.dcs.1 {
                l.dcs = (l.dcs.1, l.dcs.0);
            }
            if l.dcs.0 == l.dcs.1 || l.dcs.1 >= dcs.len() {
                return Err(VneError::InvalidArgument(format!(
                    "inter-DC link {:?} is invalid",
                    l.dcs
                )));
            }
            if !seen.insert(l.dcs) {
                return Err(VneError::InvalidArgument(format!(
                    "duplicate inter-DC link {:?}",
                    l.dcs
                )));
            }
            if !(l.bw_available >= 0.0 && l.bw_available <= l.bw_capacity) {
                return Err(VneError::InvalidArgument(format!(
                    "inter-DC link {:?}: bw_available outside [0, capacity]",
                    l.dcs
                )));
            }
        }
        inter_dc_links.sort_by_key(|l| l.dcs);
        Ok(Self {
            dcs,
            inter_dc_links,
        })
    }

    pub fn dc_count(&self) -> usize {
        self.dcs.len()
    }

    pub fn dc(&self, i: usize) -> &DataCenter {
        &self.dcs[i]
    }

    pub fn dc_mut(&mut self, i: usize) -> &mut DataCenter {
        &mut self.dcs[i]
    }

    pub fn dcs(&self) -> &[DataCenter] {
        &self.dcs
    }

    pub fn inter_dc_links(&self) -> &[InterDcLink] {
        &self.inter_dc_links
    }

    pub fn inter_link(&self, a: usize, b: usize) -> Option<&InterDcLink> {
        let key = (a.min(b), a.max(b));
        self.inter_dc_links.iter().find(|l| l.dcs == key)
    }

    fn inter_link_mut(&mut self, a: usize, b: usize) -> Option<&mut InterDcLink> {
        let key = (a.min(b), a.max(b));
        self.inter_dc_links.iter_mut().find(|l| l.dcs == key)
    }

    /// Total available CPU per data center.
    pub fn available_cpu_totals(&self) -> Vec<f64> {
        self.dcs
            .iter()
            .map(|dc| dc.network.nodes().iter().map(|n| n.cpu_available).sum())
            .collect()
    }
}

/// Generates `dc_count` independent substrate domains with a full mesh of
/// inter-DC links. Gateways are the node with the largest total resource
/// in each domain.
#[allow(clippy::too_many_arguments)]
pub fn generate_dc_set(
    dc_count: usize,
    nodes_per_dc: usize,
    links_per_dc: usize,
    bw_low: f64,
    bw_high: f64,
    inter_bw_low: f64,
    inter_bw_high: f64,
    profiles: &[ServerProfile],
    seed: u64,
) -> Result<DataCenterSet> {
    if dc_count == 0 {
        return Err(VneError::InvalidArgument(
            "dc_count must be positive".into(),
        ));
    }
    if !(inter_bw_low > 0.0 && inter_bw_low <= inter_bw_high) {
        return Err(VneError::InvalidArgument(format!(
            "inter-DC bandwidth range [{}, {}] invalid",
            inter_bw_low, inter_bw_high
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dcs = Vec::with_capacity(dc_count);
    for i in 0..dc_count {
        let dc_seed = rng.random::<u64>();
        let mut network = crate::topology::generate_waxman_substrate(
            nodes_per_dc,
            links_per_dc,
            bw_low,
            bw_high,
            profiles,
            dc_seed,
        )?;
        for id in 0..network.node_count() {
            network.node_mut(id).dc_id = i;
        }
        let gateway = (0..network.node_count())
            .max_by(|&a, &b| {
                network
                    .total_resource(a)
                    .total_cmp(&network.total_resource(b))
                    .then(b.cmp(&a))
            })
            .expect("nonempty");
        dcs.push(DataCenter { network, gateway });
    }
    let mut inter = Vec::new();
    for a in 0..dc_count {
        for b in a + 1..dc_count {
            let bw = if inter_bw_low == inter_bw_high {
                inter_bw_low
            } else {
                snap(rng.random_range(inter_bw_low..inter_bw_high))
            };
            inter.push(InterDcLink {
                dcs: (a, b),
                bw_capacity: bw,
                bw_available: bw,
            });
        }
    }
    DataCenterSet::new(dcs, inter)
}

/// Coarsens a virtual network by heavy clique matching until no merge fits
/// under `min_resource`. Fails when a single node already exceeds the
/// bound, since that node could never be placed.
pub fn coarsen_hcm(vn: &VirtualNetwork, min_resource: f64) -> Result<CoarseGraph> {
    for n in vn.nodes() {
        if n.cpu_demand > min_resource {
            return Err(VneError::Unsatisfiable(format!(
                "virtual node {} demands {} but min_resource is {}",
                n.id, n.cpu_demand, min_resource
            )));
        }
    }
    let mut members: Vec<BTreeSet<NodeId>> =
        vn.nodes().iter().map(|n| BTreeSet::from([n.id])).collect();

    loop {
        let groups = CoarseView::build(vn, &members);
        let mut visit: Vec<usize> = (0..members.len()).collect();
        visit.sort_by(|&a, &b| {
            groups.weight[b]
                .total_cmp(&groups.weight[a])
                .then(a.cmp(&b))
        });

        let mut matched = vec![false; members.len()];
        let mut merges: Vec<(usize, usize)> = Vec::new();
        for &u in &visit {
            if matched[u] {
                continue;
            }
            let mut best: Option<(f64, f64, usize)> = None;
            for &v in &groups.adjacency[u] {
                if matched[v] || groups.weight[u] + groups.weight[v] > min_resource {
                    continue;
                }
                let merged_size = members[u].len() + members[v].len();
                let pairs = (merged_size * (merged_size - 1) / 2) as f64;
                let internal =
                    (groups.internal[u] + groups.internal[v] + groups.cross_count(u, v)) as f64;
                let score = internal / pairs;
                let bw = groups.cross_bw(u, v);
                let better = match best {
                    None => true,
                    Some((bs, bb, _)) => score > bs || (score == bs && bw > bb),
                };
                if better {
                    best = Some((score, bw, v));
                }
            }
            if let Some((_, _, v)) = best {
                matched[u] = true;
                matched[v] = true;
                merges.push((u, v));
            }
        }
        if merges.is_empty() {
            break;
        }
        let mut next: Vec<BTreeSet<NodeId>> = Vec::new();
        for &(u, v) in &merges {
            let mut merged = members[u].clone();
            merged.extend(members[v].iter().copied());
            next.push(merged);
        }
        for (i, set) in members.iter().enumerate() {
            if !matched[i] {
                next.push(set.clone());
            }
        }
        next.sort_by_key(|set| *set.iter().next().expect("nonempty member set"));
        members = next;
    }

    let groups = CoarseView::build(vn, &members);
    let nodes = members
        .iter()
        .enumerate()
        .map(|(id, set)| CoarseNode {
            id,
            members: set.clone(),
            weight: groups.weight[id],
        })
        .collect();
    let links = groups
        .crossings
        .iter()
        .map(|(&(a, b), &(_, bw))| CoarseLink {
            endpoints: (a, b),
            bw,
        })
        .collect();
    Ok(CoarseGraph { nodes, links })
}

/// Per-pass aggregates over the current member partition.
struct CoarseView {
    weight: Vec<f64>,
    internal: Vec<usize>,
    adjacency: Vec<Vec<usize>>,
    /// (count, bandwidth) of original links crossing each coarse pair.
    crossings: BTreeMap<(usize, usize), (usize, f64)>,
}

impl CoarseView {
    fn build(vn: &VirtualNetwork, members: &[BTreeSet<NodeId>]) -> Self {
        let mut of: HashMap<NodeId, usize> = HashMap::new();
        for (i, set) in members.iter().enumerate() {
            for &m in set {
                of.insert(m, i);
            }
        }
        let weight = members
            .iter()
            .map(|set| set.iter().map(|&m| vn.cpu_demand(m)).sum())
            .collect();
        let mut internal = vec![0usize; members.len()];
        let mut crossings: BTreeMap<(usize, usize), (usize, f64)> = BTreeMap::new();
        for l in vn.links() {
            let (a, b) = (of[&l.endpoints.0], of[&l.endpoints.1]);
            if a == b {
                internal[a] += 1;
            } else {
                let key = (a.min(b), a.max(b));
                let e = crossings.entry(key).or_insert((0, 0.0));
                e.0 += 1;
                e.1 += l.bw_demand;
            }
        }
        let mut adjacency = vec![Vec::new(); members.len()];
        for &(a, b) in crossings.keys() {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for adj in adjacency.iter_mut() {
            adj.sort_unstable();
        }
        Self {
            weight,
            internal,
            adjacency,
            crossings,
        }
    }

    fn cross_count(&self, a: usize, b: usize) -> usize {
        self.crossings.get(&(a.min(b), a.max(b))).map_or(0, |e| e.0)
    }

    fn cross_bw(&self, a: usize, b: usize) -> f64 {
        self.crossings
            .get(&(a.min(b), a.max(b)))
            .map_or(0.0, |e| e.1)
    }
}

/// The virtual node ids collapsed inside a coarse node.
pub fn uncoarsen(cn: &CoarseNode) -> BTreeSet<NodeId> {
    cn.members.clone()
}

/// The subgraph of `vn` induced by `members`: those nodes plus every
/// original link with both endpoints inside, demands unchanged.
pub fn construct_subgraph(
    members: &BTreeSet<NodeId>,
    vn: &VirtualNetwork,
) -> Result<VirtualNetwork> {
    let mut nodes = Vec::with_capacity(members.len());
    for &m in members {
        let node = vn
            .node(m)
            .ok_or_else(|| VneError::InvalidArgument(format!("unknown member node id {}", m)))?;
        nodes.push(VirtualNode {
            id: node.id,
            cpu_demand: node.cpu_demand,
        });
    }
    let links: Vec<VirtualLink> = vn
        .links()
        .iter()
        .filter(|l| members.contains(&l.endpoints.0) && members.contains(&l.endpoints.1))
        .cloned()
        .collect();
    VirtualNetwork::new(nodes, links)
}

/// Best-fit data-center selection: among the DCs whose total available CPU
/// covers the subgraph and whose candidate screen passes (nonempty
/// candidate list per node), the one with the least CPU left over wins.
/// `sub` must be connected.
pub fn assign(sub: &VirtualNetwork, dcs: &DataCenterSet) -> Option<usize> {
    assign_with_totals(sub, dcs, &dcs.available_cpu_totals())
}

fn assign_with_totals(sub: &VirtualNetwork, dcs: &DataCenterSet, totals: &[f64]) -> Option<usize> {
    let demand = sub.total_cpu_demand();
    let order = virtual_bfs_order(sub).ok()?;
    let mut best: Option<(f64, usize)> = None;
    for (i, dc) in dcs.dcs.iter().enumerate() {
        if totals[i] < demand {
            continue;
        }
        let cands = build_candidate_lists(sub, &order, &dc.network);
        if cands.lists.iter().any(|l| l.is_empty()) {
            continue;
        }
        let leftover = totals[i] - demand;
        if best.is_none_or(|(bl, _)| leftover < bl) {
            best = Some((leftover, i));
        }
    }
    best.map(|(_, i)| i)
}

/// A reservation of bandwidth for one cut virtual link on the direct link
/// between two data centers.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct InterDcReservation {
    pub dc_a: usize,
    pub dc_b: usize,
    pub vlink: (NodeId, NodeId),
    pub bw: f64,
}

/// One data center's share of a distributed embedding.
#[derive(Clone, Debug, PartialEq)]
pub struct DcPlacement {
    pub dc: usize,
    /// Induced subgraph this DC hosts (union of its coarse nodes).
    pub sub: VirtualNetwork,
    pub embedding: Embedding,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistributedEmbedding {
    pub placements: Vec<DcPlacement>,
    pub reservations: Vec<InterDcReservation>,
    pub energy: f64,
    pub cost: f64,
    pub fitness: f64,
}

/// Outcome of [`embed_distributed`] with the per-DC best-fitness traces.
#[derive(Clone, Debug)]
pub struct DistributedOutcome {
    pub result: std::result::Result<DistributedEmbedding, RejectReason>,
    /// (dc, trace) in embedding order.
    pub gbest_histories: Vec<(usize, Vec<f64>)>,
}

/// Embeds a request across data centers: coarsen, assign every coarse node
/// by best fit, reserve cut links on direct inter-DC links, then run the
/// swarm inside each involved DC. On success all allocations are committed;
/// on rejection every reservation is rolled back, leaving `dcs`
/// bit-identical to the pre-call state.
pub fn embed_distributed(
    vnr: &Vnr,
    dcs: &mut DataCenterSet,
    params: &SwarmParams,
    seed: u64,
) -> Result<DistributedOutcome> {
    let vn = &vnr.graph;
    let totals = dcs.available_cpu_totals();
    let min_resource = totals.iter().copied().fold(f64::INFINITY, f64::min);
    let rejected = |reason: RejectReason| {
        Ok(DistributedOutcome {
            result: Err(reason),
            gbest_histories: Vec::new(),
        })
    };
    if let Some(n) = vn.nodes().iter().find(|n| n.cpu_demand > min_resource) {
        return rejected(RejectReason::OversizedNode {
            virtual_node: n.id,
            demand: n.cpu_demand,
            limit: min_resource,
        });
    }
    let coarse = coarsen_hcm(vn, min_resource)?;

    // Assign coarse nodes in BFS order with a running capacity view.
    let mut remaining = totals;
    let mut dc_of_coarse: BTreeMap<usize, usize> = BTreeMap::new();
    for &cid in &coarse_bfs_order(&coarse) {
        let cn = &coarse.nodes[cid];
        let sub = construct_subgraph(&cn.members, vn)?;
        match assign_with_totals(&sub, dcs, &remaining) {
            Some(dc) => {
                remaining[dc] -= cn.weight;
                dc_of_coarse.insert(cid, dc);
            }
            None => return rejected(RejectReason::AssignmentFailed { coarse_node: cid }),
        }
    }

    let mut dc_of_node: HashMap<NodeId, usize> = HashMap::new();
    for (cid, dc) in &dc_of_coarse {
        for &m in &coarse.nodes[*cid].members {
            dc_of_node.insert(m, *dc);
        }
    }

    // Reserve cut links (endpoints on different DCs) on direct inter-DC
    // links, widest demand first, rolling back on failure.
    let mut cut: Vec<&VirtualLink> = vn
        .links()
        .iter()
        .filter(|l| dc_of_node[&l.endpoints.0] != dc_of_node[&l.endpoints.1])
        .collect();
    cut.sort_by(|a, b| {
        b.bw_demand
            .total_cmp(&a.bw_demand)
            .then(a.endpoints.cmp(&b.endpoints))
    });
    let mut reservations: Vec<InterDcReservation> = Vec::new();
    let rollback = |dcs: &mut DataCenterSet, reservations: &[InterDcReservation]| {
        for r in reservations {
            dcs.inter_link_mut(r.dc_a, r.dc_b)
                .expect("reserved link exists")
                .bw_available += r.bw;
        }
    };
    for l in cut {
        let (da, db) = (dc_of_node[&l.endpoints.0], dc_of_node[&l.endpoints.1]);
        let Some(link) = dcs.inter_link_mut(da, db) else {
            rollback(dcs, &reservations);
            return rejected(RejectReason::MissingInterDcLink {
                dc_a: da.min(db),
                dc_b: da.max(db),
            });
        };
        if link.bw_available < l.bw_demand {
            let (available, needed) = (link.bw_available, l.bw_demand);
            rollback(dcs, &reservations);
            return rejected(RejectReason::InterDcBandwidth {
                dc_a: da.min(db),
                dc_b: db.max(da),
                needed,
                available,
            });
        }
        link.bw_available -= l.bw_demand;
        reservations.push(InterDcReservation {
            dc_a: da.min(db),
            dc_b: da.max(db),
            vlink: l.endpoints,
            bw: l.bw_demand,
        });
    }

    // Per-DC swarms over the union of members assigned to each DC. The
    // k-th involved DC (ascending id) derives its seed as seed + k, so a
    // single-DC run degenerates to a plain embed with the same seed.
    let mut members_of_dc: BTreeMap<usize, BTreeSet<NodeId>> = BTreeMap::new();
    for (cid, dc) in &dc_of_coarse {
        members_of_dc
            .entry(*dc)
            .or_default()
            .extend(coarse.nodes[*cid].members.iter().copied());
    }
    let mut placements = Vec::new();
    let mut histories = Vec::new();
    for (k, (&dc, members)) in members_of_dc.iter().enumerate() {
        let sub = construct_subgraph(members, vn)?;
        let sub_vnr = Vnr::new(vnr.id, sub, vnr.arrival_time, vnr.lifetime)?;
        let outcome = embed_eapso(
            &sub_vnr,
            &dcs.dcs[dc].network,
            params,
            seed.wrapping_add(k as u64),
        )?;
        histories.push((dc, outcome.gbest_history));
        match outcome.result {
            Ok(embedding) => placements.push(DcPlacement {
                dc,
                sub: sub_vnr.graph,
                embedding,
            }),
            Err(reason) => {
                rollback(dcs, &reservations);
                return Ok(DistributedOutcome {
                    result: Err(RejectReason::DcEmbeddingFailed {
                        dc,
                        reason: Box::new(reason),
                    }),
                    gbest_histories: histories,
                });
            }
        }
    }

    // Everything placed: commit DC-internal allocations. Cut links are
    // charged one hop each.
    for p in &placements {
        apply_embedding(&mut dcs.dcs[p.dc].network, &p.sub, &p.embedding);
    }
    let energy: f64 = placements.iter().map(|p| p.embedding.energy).sum();
    let cut_cost: f64 = reservations.iter().map(|r| r.bw).sum::<f64>() * vnr.lifetime;
    let cost: f64 = placements.iter().map(|p| p.embedding.cost).sum::<f64>() + cut_cost;
    let fitness = crate::energy::fitness(energy, cost, params.alpha);
    Ok(DistributedOutcome {
        result: Ok(DistributedEmbedding {
            placements,
            reservations,
            energy,
            cost,
            fitness,
        }),
        gbest_histories: histories,
    })
}

/// Releases everything a distributed embedding holds.
pub fn release_distributed(dcs: &mut DataCenterSet, emb: &DistributedEmbedding) {
    for p in &emb.placements {
        crate::alloc::release_embedding(&mut dcs.dcs[p.dc].network, &p.sub, &p.embedding);
    }
    for r in &emb.reservations {
        dcs.inter_link_mut(r.dc_a, r.dc_b)
            .expect("reserved link exists")
            .bw_available += r.bw;
    }
}

/// BFS order over the coarse graph: rooted at the heaviest coarse node,
/// levels sorted by descending weight, ties to the lower id; disconnected
/// coarse graphs are covered component by component, heaviest total first.
fn coarse_bfs_order(cg: &CoarseGraph) -> Vec<usize> {
    let n = cg.nodes.len();
    let mut visited = vec![false; n];
    let mut component_orders: Vec<(f64, Vec<usize>)> = Vec::new();
    loop {
        let root = (0..n).filter(|&v| !visited[v]).max_by(|&a, &b| {
            cg.nodes[a]
                .weight
                .total_cmp(&cg.nodes[b].weight)
                .then(b.cmp(&a))
        });
        let Some(root) = root else { break };
        let mut levels: Vec<Vec<usize>> = vec![vec![root]];
        visited[root] = true;
        let mut frontier = vec![root];
        loop {
            let mut next = Vec::new();
            for &v in &frontier {
                for w in cg.neighbors(v) {
                    if !visited[w] {
                        visited[w] = true;
                        next.push(w);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next.clone();
            levels.push(next);
        }
        for level in levels.iter_mut() {
            level.sort_by(|&a, &b| {
                cg.nodes[b]
                    .weight
                    .total_cmp(&cg.nodes[a].weight)
                    .then(a.cmp(&b))
            });
        }
        let order: Vec<usize> = levels.into_iter().flatten().collect();
        let total: f64 = order.iter().map(|&v| cg.nodes[v].weight).sum();
        component_orders.push((total, order));
    }
    component_orders.sort_by(|a, b| b.0.total_cmp(&a.0));
    component_orders.into_iter().flat_map(|(_, o)| o).collect()
}
