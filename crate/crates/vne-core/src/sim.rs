//! Discrete-event replay of a request workload against substrate state.
//!
//! Arrivals run the selected embedder; acceptance commits resources and
//! schedules the departure, rejection only records the demanded resources.
//! Departures release everything and power off hosts left idle. Events at
//! equal timestamps process departures first so freed resources are
//! visible to same-instant arrivals. The per-request log carries full
//! placement records, so every metric series can be recomputed from the
//! log alone.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::alloc::{apply_embedding, release_embedding};
use crate::energy::revenue;
use crate::partition::{
    embed_distributed, release_distributed, DataCenterSet, DistributedEmbedding, InterDcReservation,
};
use crate::pso::{check_feasible, embed_eapso, Embedding, Position, RejectReason, SwarmParams};
use crate::topology::{NodeId, SubstrateNetwork, VirtualNetwork, Vnr};
use crate::{Result, VneError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmbedderKind {
    Eapso,
    Greedy,
    Distributed,
}

impl std::fmt::Display for EmbedderKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            EmbedderKind::Eapso => "eapso",
            EmbedderKind::Greedy => "greedy",
            EmbedderKind::Distributed => "distributed",
        };
        write!(f, "{}", name)
    }
}

impl std::str::FromStr for EmbedderKind {
    type Err = VneError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eapso" => Ok(EmbedderKind::Eapso),
            "greedy" => Ok(EmbedderKind::Greedy),
            "distributed" => Ok(EmbedderKind::Distributed),
            other => Err(VneError::InvalidArgument(format!(
                "unknown embedder {:?} (expected eapso, greedy or distributed)",
                other
            ))),
        }
    }
}

/// What the simulation runs against.
#[derive(Clone, Debug, PartialEq)]
pub enum SimTarget {
    Single(SubstrateNetwork),
    Multi(DataCenterSet),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimParams {
    pub swarm: SwarmParams,
    pub bucket_width: f64,
    /// Re-derive allocations from the residency ledger after every event
    /// and compare against the live availability fields.
    pub strict_checks: bool,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            swarm: SwarmParams::default(),
            bucket_width: 1000.0,
            strict_checks: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum EventKind {
    Departure(u64),
    Arrival(u64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Event {
    time: f64,
    kind: EventKind,
}

impl Event {
    fn rank(&self) -> (u8, u64) {
        match self.kind {
            EventKind::Departure(id) => (0, id),
            EventKind::Arrival(id) => (1, id),
        }
    }
}

impl Eq for Event {}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.rank().cmp(&other.rank()))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Static facts about a run; first line of the JSON-lines log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub embedder: String,
    pub seed: u64,
    pub bucket_width: f64,
    pub max_hops: usize,
    pub alpha: f64,
    pub n_nodes: usize,
    /// Substrate links, inter-DC links included.
    pub n_links: usize,
    pub total_cpu_capacity: f64,
    pub total_bw_capacity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeAssignment {
    pub vnode: NodeId,
    pub host: NodeId,
    pub cpu: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathAssignment {
    pub vlink: (NodeId, NodeId),
    pub bw: f64,
    pub path: Vec<(NodeId, NodeId)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRecord {
    pub nodes: Vec<NodeAssignment>,
    pub links: Vec<PathAssignment>,
}

impl EmbeddingRecord {
    pub fn from_embedding(vn: &VirtualNetwork, emb: &Embedding) -> Self {
        let nodes = emb
            .node_map
            .iter()
            .map(|(&vnode, &host)| NodeAssignment {
                vnode,
                host,
                cpu: vn.cpu_demand(vnode),
            })
            .collect();
        let links = emb
            .link_map
            .iter()
            .map(|(&vlink, path)| PathAssignment {
                vlink,
                bw: vn
                    .links()
                    .iter()
                    .find(|l| l.endpoints == vlink)
                    .expect("embedding maps links of vn")
                    .bw_demand,
                path: path.clone(),
            })
            .collect();
        Self { nodes, links }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum LoggedEmbedding {
    Single(EmbeddingRecord),
    Distributed {
        per_dc: Vec<(usize, EmbeddingRecord)>,
        inter_dc: Vec<InterDcReservation>,
    },
}

impl LoggedEmbedding {
    /// Total CPU and bandwidth the placement holds (bandwidth counted once
    /// per substrate hop, inter-DC reservations one hop each).
    pub fn alloc_totals(&self) -> (f64, f64) {
        match self {
            LoggedEmbedding::Single(rec) => record_totals(rec),
            LoggedEmbedding::Distributed { per_dc, inter_dc } => {
                let (mut cpu, mut bw) = (0.0, 0.0);
                for (_, rec) in per_dc {
                    let (c, b) = record_totals(rec);
                    cpu += c;
                    bw += b;
                }
                for r in inter_dc {
                    bw += r.bw;
                }
                (cpu, bw)
            }
        }
    }
}

fn record_totals(rec: &EmbeddingRecord) -> (f64, f64) {
    let cpu = rec.nodes.iter().map(|n| n.cpu).sum();
    let bw = rec.links.iter().map(|l| l.bw * l.path.len() as f64).sum();
    (cpu, bw)
}

/// Per-request accounting: energy and cost are zero for rejected requests,
/// whose demanded revenue is still recorded for rejected-resource
/// reporting.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VnrAccounting {
    pub vnr_id: u64,
    pub energy: f64,
    pub cost: f64,
    pub revenue: f64,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VnrLogEntry {
    pub vnr_id: u64,
    pub arrival: f64,
    pub lifetime: f64,
    pub nodes: usize,
    pub links: usize,
    pub accepted: bool,
    pub reject_reason: Option<RejectReason>,
    pub energy: f64,
    pub cost: f64,
    pub revenue: f64,
    /// Wall-clock embedding time; the only nondeterministic field.
    pub embed_ms: f64,
    pub embedding: Option<LoggedEmbedding>,
    /// Per-iteration best fitness of each swarm run (one per involved DC
    /// in distributed mode, one total otherwise; empty for greedy).
    pub gbest_histories: Vec<Vec<f64>>,
}

impl VnrLogEntry {
    pub fn accounting(&self) -> VnrAccounting {
        VnrAccounting {
            vnr_id: self.vnr_id,
            energy: self.energy,
            cost: self.cost,
            revenue: self.revenue,
            accepted: self.accepted,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsBucket {
    pub bucket_start: f64,
    pub arrived_cum: u64,
    pub accepted_cum: u64,
    /// Cumulative acceptance ratio at bucket end.
    pub acceptance_cum: f64,
    /// Acceptance ratio among arrivals inside this bucket alone.
    pub acceptance_bucket: f64,
    /// Energy charged (at acceptance) inside this bucket.
    pub energy_bucket: f64,
    pub longterm_avg_energy: f64,
    pub revenue_bucket: f64,
    pub longterm_avg_revenue: f64,
    /// Cumulative revenue over cumulative cost of accepted requests.
    pub rc_cum: f64,
    pub achieved_bucket: f64,
    pub rejected_bucket: f64,
    pub avail_cpu_mean: f64,
    pub avail_bw_mean: f64,
    pub embed_ms_mean: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsSeries {
    pub bucket_width: f64,
    pub buckets: Vec<MetricsBucket>,
}

impl MetricsSeries {
    /// Copy with wall-clock fields zeroed, for determinism comparisons.
    pub fn without_timing(&self) -> MetricsSeries {
        let mut out = self.clone();
        for b in out.buckets.iter_mut() {
            b.embed_ms_mean = 0.0;
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct SimReport {
    pub meta: RunMeta,
    pub metrics: MetricsSeries,
    pub log: Vec<VnrLogEntry>,
    pub final_state: SimTarget,
}

enum Residency {
    Single {
        vn: VirtualNetwork,
        embedding: Embedding,
    },
    Distributed(DistributedEmbedding),
}

/// Deterministic greedy baseline: virtual nodes in descending
/// total-resource order each take the first substrate node, in descending
/// available-CPU order, that still fits; links map through the same
/// hop-bounded path search as the swarm.
pub fn greedy_embed(
    vnr: &Vnr,
    sn: &SubstrateNetwork,
    max_hops: usize,
    alpha: f64,
) -> Result<std::result::Result<Embedding, RejectReason>> {
    let vn = &vnr.graph;
    let mut order: Vec<NodeId> = vn.nodes().iter().map(|n| n.id).collect();
    order.sort_by(|&a, &b| {
        vn.total_resource(b)
            .total_cmp(&vn.total_resource(a))
            .then(a.cmp(&b))
    });
    let mut remaining: Vec<f64> = (0..sn.node_count())
        .map(|v| sn.node(v).cpu_available)
        .collect();
    let mut pos = Vec::with_capacity(order.len());
    for &vid in &order {
        let demand = vn.cpu_demand(vid);
        let mut hosts: Vec<NodeId> = (0..sn.node_count()).collect();
        hosts.sort_by(|&a, &b| remaining[b].total_cmp(&remaining[a]).then(a.cmp(&b)));
        match hosts.into_iter().find(|&s| remaining[s] >= demand) {
            Some(s) => {
                remaining[s] -= demand;
                pos.push(s);
            }
            None => return Ok(Err(RejectReason::NoCandidates { virtual_node: vid })),
        }
    }
    let position = Position(pos);
    let Some(link_map) = check_feasible(&position, &order, vn, sn, max_hops) else {
        return Ok(Err(RejectReason::NoFeasibleSolution));
    };
    let node_map: BTreeMap<NodeId, NodeId> = order
        .iter()
        .copied()
        .zip(position.0.iter().copied())
        .collect();
    let energy = crate::energy::vnr_energy(vn, &node_map, sn, vnr.lifetime)?;
    let cost = crate::energy::embedding_cost(vnr, &node_map, &link_map)?;
    let fitness = crate::energy::fitness(energy, cost, alpha);
    Ok(Ok(Embedding {
        node_map,
        link_map,
        energy,
        cost,
        fitness,
    }))
}

/// Replays the workload. Deterministic given identical inputs and seed,
/// except for the logged wall-clock embedding times.
pub fn run_simulation(
    target: SimTarget,
    workload: &[Vnr],
    embedder: EmbedderKind,
    params: &SimParams,
    seed: u64,
) -> Result<SimReport> {
    if params.bucket_width <= 0.0 {
        return Err(VneError::InvalidArgument("bucket_width must be > 0".into()));
    }
    if workload
        .windows(2)
        .any(|w| w[0].arrival_time > w[1].arrival_time)
    {
        return Err(VneError::InvalidArgument(
            "workload must be sorted by arrival time".into(),
        ));
    }
    let mut by_id: BTreeMap<u64, &Vnr> = BTreeMap::new();
    for vnr in workload {
        if by_id.insert(vnr.id, vnr).is_some() {
            return Err(VneError::InvalidArgument(format!(
                "duplicate vnr id {}",
                vnr.id
            )));
        }
    }
    let mut target = target;
    match (&target, embedder) {
        (SimTarget::Single(_), EmbedderKind::Eapso | EmbedderKind::Greedy) => {}
        (SimTarget::Multi(_), EmbedderKind::Distributed) => {}
        _ => {
            return Err(VneError::InvalidArgument(format!(
                "embedder {} does not match the simulation target",
                embedder
            )))
        }
    }

    let meta = build_meta(&target, embedder, params, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut heap: BinaryHeap<std::cmp::Reverse<Event>> = workload
        .iter()
        .map(|v| {
            std::cmp::Reverse(Event {
                time: v.arrival_time,
                kind: EventKind::Arrival(v.id),
            })
        })
        .collect();
    let mut residencies: BTreeMap<u64, Residency> = BTreeMap::new();
    let mut log: Vec<VnrLogEntry> = Vec::with_capacity(workload.len());

    while let Some(std::cmp::Reverse(event)) = heap.pop() {
        match event.kind {
            EventKind::Arrival(id) => {
                let vnr = by_id[&id];
                let embed_seed = rng.random::<u64>();
                let started = Instant::now();
                enum Placed {
                    One(Embedding),
                    Spread(DistributedEmbedding),
                }
                let (result, histories): (
                    std::result::Result<Placed, RejectReason>,
                    Vec<Vec<f64>>,
                ) = match (&mut target, embedder) {
                    (SimTarget::Single(sn), EmbedderKind::Eapso) => {
                        let out = embed_eapso(vnr, sn, &params.swarm, embed_seed)?;
                        (out.result.map(Placed::One), vec![out.gbest_history])
                    }
                    (SimTarget::Single(sn), EmbedderKind::Greedy) => (
                        greedy_embed(vnr, sn, params.swarm.max_hops, params.swarm.alpha)?
                            .map(Placed::One),
                        Vec::new(),
                    ),
                    (SimTarget::Multi(dcs), EmbedderKind::Distributed) => {
                        let out = embed_distributed(vnr, dcs, &params.swarm, embed_seed)?;
                        let histories = out.gbest_histories.into_iter().map(|(_, h)| h).collect();
                        (out.result.map(Placed::Spread), histories)
                    }
                    _ => unreachable!("validated above"),
                };
                let embed_ms = started.elapsed().as_secs_f64() * 1e3;
                let demand_revenue = revenue(vnr);
                let mut entry = VnrLogEntry {
                    vnr_id: id,
                    arrival: vnr.arrival_time,
                    lifetime: vnr.lifetime,
                    nodes: vnr.graph.node_count(),
                    links: vnr.graph.link_count(),
                    accepted: false,
                    reject_reason: None,
                    energy: 0.0,
                    cost: 0.0,
                    revenue: demand_revenue,
                    embed_ms,
                    embedding: None,
                    gbest_histories: histories,
                };
                match result {
                    Ok(placed) => {
                        entry.accepted = true;
                        match placed {
                            Placed::Spread(dist) => {
                                entry.energy = dist.energy;
                                entry.cost = dist.cost;
                                entry.embedding = Some(LoggedEmbedding::Distributed {
                                    per_dc: dist
                                        .placements
                                        .iter()
                                        .map(|p| {
                                            (
                                                p.dc,
                                                EmbeddingRecord::from_embedding(
                                                    &p.sub,
                                                    &p.embedding,
                                                ),
                                            )
                                        })
                                        .collect(),
                                    inter_dc: dist.reservations.clone(),
                                });
                                residencies.insert(id, Residency::Distributed(dist));
                            }
                            Placed::One(embedding) => {
                                if let SimTarget::Single(sn) = &mut target {
                                    apply_embedding(sn, &vnr.graph, &embedding);
                                }
                                entry.energy = embedding.energy;
                                entry.cost = embedding.cost;
                                entry.embedding = Some(LoggedEmbedding::Single(
                                    EmbeddingRecord::from_embedding(&vnr.graph, &embedding),
                                ));
                                residencies.insert(
                                    id,
                                    Residency::Single {
                                        vn: vnr.graph.clone(),
                                        embedding,
                                    },
                                );
                            }
                        }
                        heap.push(std::cmp::Reverse(Event {
                            time: vnr.arrival_time + vnr.lifetime,
                            kind: EventKind::Departure(id),
                        }));
                    }
                    Err(reason) => entry.reject_reason = Some(reason),
                }
                log.push(entry);
            }
            EventKind::Departure(id) => {
                let residency = residencies
                    .remove(&id)
                    .expect("departure of unknown residency");
                match (&mut target, residency) {
                    (SimTarget::Single(sn), Residency::Single { vn, embedding }) => {
                        release_embedding(sn, &vn, &embedding);
                    }
                    (SimTarget::Multi(dcs), Residency::Distributed(dist)) => {
                        release_distributed(dcs, &dist);
                    }
                    _ => unreachable!("residency kind matches target"),
                }
            }
        }
        if params.strict_checks {
            verify_conservation(&target, &residencies)?;
        }
    }

    let metrics = metrics_from_log(&meta, &log);
    Ok(SimReport {
        meta,
        metrics,
        log,
        final_state: target,
    })
}

fn build_meta(
    target: &SimTarget,
    embedder: EmbedderKind,
    params: &SimParams,
    seed: u64,
) -> RunMeta {
    let (n_nodes, n_links, cpu, bw) = match target {
        SimTarget::Single(sn) => (
            sn.node_count(),
            sn.link_count(),
            sn.nodes().iter().map(|n| n.cpu_capacity).sum(),
            sn.links().iter().map(|l| l.bw_capacity).sum(),
        ),
        SimTarget::Multi(dcs) => {
            let mut n_nodes = 0;
            let mut n_links = 0;
            let mut cpu = 0.0;
            let mut bw = 0.0;
            for dc in dcs.dcs() {
                n_nodes += dc.network.node_count();
                n_links += dc.network.link_count();
                cpu += dc
                    .network
                    .nodes()
                    .iter()
                    .map(|n| n.cpu_capacity)
                    .sum::<f64>();
                bw += dc
                    .network
                    .links()
                    .iter()
                    .map(|l| l.bw_capacity)
                    .sum::<f64>();
            }
            for l in dcs.inter_dc_links() {
                n_links += 1;
                bw += l.bw_capacity;
            }
            (n_nodes, n_links, cpu, bw)
        }
    };
    RunMeta {
        embedder: embedder.to_string(),
        seed,
        bucket_width: params.bucket_width,
        max_hops: params.swarm.max_hops,
        alpha: params.swarm.alpha,
        n_nodes,
        n_links,
        total_cpu_capacity: cpu,
        total_bw_capacity: bw,
    }
}

/// Recomputes available totals from the residency ledger and compares them
/// bit-for-bit against the live fields; also checks the power-state rule.
fn verify_conservation(target: &SimTarget, residencies: &BTreeMap<u64, Residency>) -> Result<()> {
    match target {
        SimTarget::Single(sn) => {
            let views: Vec<EmbeddingLike> = residencies
                .values()
                .map(|r| match r {
                    Residency::Single { vn, embedding } => {
                        EmbeddingLike::from_single(vn, embedding)
                    }
                    Residency::Distributed(_) => unreachable!("single target"),
                })
                .collect();
            verify_network(sn, views.iter())
        }
        SimTarget::Multi(dcs) => {
            let views: Vec<(usize, EmbeddingLike)> = residencies
                .values()
                .flat_map(|r| match r {
                    Residency::Distributed(dist) => dist
                        .placements
                        .iter()
                        .map(|p| (p.dc, EmbeddingLike::from_single(&p.sub, &p.embedding)))
                        .collect::<Vec<_>>(),
                    Residency::Single { .. } => unreachable!("multi target"),
                })
                .collect();
            for (i, dc) in dcs.dcs().iter().enumerate() {
                verify_network(
                    &dc.network,
                    views.iter().filter(|(d, _)| *d == i).map(|(_, v)| v),
                )?;
            }
            // Inter-DC bandwidth.
            let mut reserved: BTreeMap<(usize, usize), f64> = BTreeMap::new();
            for r in residencies.values() {
                if let Residency::Distributed(dist) = r {
                    for res in &dist.reservations {
                        *reserved.entry((res.dc_a, res.dc_b)).or_insert(0.0) += res.bw;
                    }
                }
            }
            for l in dcs.inter_dc_links() {
                let allocated = reserved.get(&l.dcs).copied().unwrap_or(0.0);
                if allocated + l.bw_available != l.bw_capacity {
                    return Err(VneError::Internal(format!(
                        "inter-DC link {:?}: allocated {} + available {} != capacity {}",
                        l.dcs, allocated, l.bw_available, l.bw_capacity
                    )));
                }
            }
            Ok(())
        }
    }
}

/// Flat allocation view of one resident embedding.
struct EmbeddingLike {
    node_allocs: Vec<(NodeId, f64)>,
    link_allocs: Vec<((NodeId, NodeId), f64)>,
}

impl EmbeddingLike {
    fn from_single(vn: &VirtualNetwork, emb: &Embedding) -> Self {
        let node_allocs = emb
            .node_map
            .iter()
            .map(|(&v, &s)| (s, vn.cpu_demand(v)))
            .collect();
        let mut link_allocs = Vec::new();
        for (vlink, path) in &emb.link_map {
            let bw = vn
                .links()
                .iter()
                .find(|l| l.endpoints == *vlink)
                .expect("mapped link exists")
                .bw_demand;
            for &(u, v) in path {
                link_allocs.push(((u.min(v), u.max(v)), bw));
            }
        }
        Self {
            node_allocs,
            link_allocs,
        }
    }
}

fn verify_network<'a>(
    sn: &SubstrateNetwork,
    residents: impl Iterator<Item = &'a EmbeddingLike>,
) -> Result<()> {
    let mut cpu = vec![0.0f64; sn.node_count()];
    let mut bw: BTreeMap<(NodeId, NodeId), f64> = BTreeMap::new();
    for r in residents {
        for &(host, demand) in &r.node_allocs {
            cpu[host] += demand;
        }
        for &(pair, demand) in &r.link_allocs {
            *bw.entry(pair).or_insert(0.0) += demand;
        }
    }
    for node in sn.nodes() {
        if cpu[node.id] + node.cpu_available != node.cpu_capacity {
            return Err(VneError::Internal(format!(
                "node {}: allocated {} + available {} != capacity {}",
                node.id, cpu[node.id], node.cpu_available, node.cpu_capacity
            )));
        }
        if node.powered_on != (cpu[node.id] > 0.0) {
            return Err(VneError::Internal(format!(
                "node {}: powered_on={} but allocated={}",
                node.id, node.powered_on, cpu[node.id]
            )));
        }
    }
    for link in sn.links() {
        let allocated = bw.get(&link.endpoints).copied().unwrap_or(0.0);
        if allocated + link.bw_available != link.bw_capacity {
            return Err(VneError::Internal(format!(
                "link {:?}: allocated {} + available {} != capacity {}",
                link.endpoints, allocated, link.bw_available, link.bw_capacity
            )));
        }
    }
    Ok(())
}

/// Cumulative acceptance ratio at time `t`; zero before the first arrival.
pub fn acceptance_ratio(log: &[VnrLogEntry], t: f64) -> f64 {
    let arrived = log.iter().filter(|e| e.arrival <= t).count();
    if arrived == 0 {
        return 0.0;
    }
    let accepted = log.iter().filter(|e| e.arrival <= t && e.accepted).count();
    accepted as f64 / arrived as f64
}

/// Demanded resources (CPU plus bandwidth) of accepted requests arriving in
/// `[bucket_start, bucket_start + width)`.
pub fn achieved_resources(log: &[VnrLogEntry], bucket_start: f64, width: f64) -> f64 {
    log.iter()
        .filter(|e| e.accepted && e.arrival >= bucket_start && e.arrival < bucket_start + width)
        .map(|e| e.revenue)
        .sum()
}

/// Demanded resources of rejected requests arriving in the bucket.
pub fn rejected_resources(log: &[VnrLogEntry], bucket_start: f64, width: f64) -> f64 {
    log.iter()
        .filter(|e| !e.accepted && e.arrival >= bucket_start && e.arrival < bucket_start + width)
        .map(|e| e.revenue)
        .sum()
}

/// Cumulative revenue over cumulative cost of accepted requests up to `t`.
pub fn rc_ratio(log: &[VnrLogEntry], t: f64) -> f64 {
    let mut rev = 0.0;
    let mut cost = 0.0;
    for e in log.iter().filter(|e| e.accepted && e.arrival <= t) {
        rev += e.revenue;
        cost += e.cost;
    }
    if cost == 0.0 {
        0.0
    } else {
        rev / cost
    }
}

/// Builds the full metric series from the run metadata and per-request log
/// alone (placement records carry everything needed to replay allocation
/// totals).
pub fn metrics_from_log(meta: &RunMeta, log: &[VnrLogEntry]) -> MetricsSeries {
    let width = meta.bucket_width;
    let mut last_time = 0.0f64;
    for e in log {
        last_time = last_time.max(e.arrival);
        if e.accepted {
            last_time = last_time.max(e.arrival + e.lifetime);
        }
    }
    let n_buckets = (last_time / width).floor() as usize + 1;

    #[derive(Default, Clone)]
    struct Acc {
        arrived: u64,
        accepted: u64,
        energy: f64,
        revenue: f64,
        cost: f64,
        achieved: f64,
        rejected: f64,
        embed_ms: f64,
    }
    let mut acc = vec![Acc::default(); n_buckets];
    // Allocation deltas for the availability replay.
    let mut deltas: Vec<(f64, f64, f64)> = Vec::new();
    for e in log {
        let b = ((e.arrival / width).floor() as usize).min(n_buckets - 1);
        let a = &mut acc[b];
        a.arrived += 1;
        a.embed_ms += e.embed_ms;
        if e.accepted {
            a.accepted += 1;
            a.energy += e.energy;
            a.revenue += e.revenue;
            a.cost += e.cost;
            a.achieved += e.revenue;
            let (cpu, bw) = e
                .embedding
                .as_ref()
                .expect("accepted entries log a placement")
                .alloc_totals();
            deltas.push((e.arrival, cpu, bw));
            deltas.push((e.arrival + e.lifetime, -cpu, -bw));
        } else {
            a.rejected += e.revenue;
        }
    }
    deltas.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut buckets = Vec::with_capacity(n_buckets);
    let mut cum = Acc::default();
    let mut delta_idx = 0usize;
    let mut alloc_cpu = 0.0f64;
    let mut alloc_bw = 0.0f64;
    for (k, a) in acc.iter().enumerate() {
        let end = (k as f64 + 1.0) * width;
        cum.arrived += a.arrived;
        cum.accepted += a.accepted;
        cum.energy += a.energy;
        cum.revenue += a.revenue;
        cum.cost += a.cost;
        // State after every event strictly before the bucket boundary.
        while delta_idx < deltas.len() && deltas[delta_idx].0 < end {
            alloc_cpu += deltas[delta_idx].1;
            alloc_bw += deltas[delta_idx].2;
            delta_idx += 1;
        }
        buckets.push(MetricsBucket {
            bucket_start: k as f64 * width,
            arrived_cum: cum.arrived,
            accepted_cum: cum.accepted,
            acceptance_cum: ratio(cum.accepted, cum.arrived),
            acceptance_bucket: ratio(a.accepted, a.arrived),
            energy_bucket: a.energy,
            longterm_avg_energy: cum.energy / end,
            revenue_bucket: a.revenue,
            longterm_avg_revenue: cum.revenue / end,
            rc_cum: if cum.cost == 0.0 {
                0.0
            } else {
                cum.revenue / cum.cost
            },
            achieved_bucket: a.achieved,
            rejected_bucket: a.rejected,
            avail_cpu_mean: (meta.total_cpu_capacity - alloc_cpu) / meta.n_nodes as f64,
            avail_bw_mean: (meta.total_bw_capacity - alloc_bw) / meta.n_links as f64,
            embed_ms_mean: if a.arrived == 0 {
                0.0
            } else {
                a.embed_ms / a.arrived as f64
            },
        });
    }
    MetricsSeries {
        bucket_width: width,
        buckets,
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}
