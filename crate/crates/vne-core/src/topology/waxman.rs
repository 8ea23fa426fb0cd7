//! Random topology and workload generation.
//!
//! The substrate generator places nodes uniformly on a 1000x1000 plane and
//! draws exactly the requested number of links by weighted sampling on the
//! Waxman probability `alpha * exp(-d / (beta * L))`, then repairs
//! connectivity by swapping the cheapest removable cycle edge for the best
//! bridging candidate. The virtual generator links each pair with a target
//! probability on top of a uniform random spanning tree, with the pair
//! probability adjusted so the expected link count still matches the
//! requested connectivity. All generators are pure functions of their seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::{Result, VneError};

use super::{
    snap, NodeId, ServerProfile, SubstrateLink, SubstrateNetwork, SubstrateNode, VirtualLink,
    VirtualNetwork, VirtualNode, Vnr,
};

const PLANE_SIDE: f64 = 1000.0;
const WAXMAN_ALPHA: f64 = 0.5;
const WAXMAN_BETA: f64 = 0.2;

/// Parameters of one generated virtual network.
#[derive(Clone, Debug, PartialEq)]
pub struct VirtualNetParams {
    /// Probability that a node pair is linked; also the expected edge
    /// density of the result.
    pub connectivity: f64,
    /// CPU demand is drawn uniformly from these values.
    pub cpu_choices: Vec<f64>,
    pub bw_low: f64,
    pub bw_high: f64,
}

impl VirtualNetParams {
    fn validate(&self) -> Result<()> {
        if !(self.connectivity > 0.0 && self.connectivity <= 1.0) {
            return Err(VneError::InvalidArgument(format!(
                "connectivity must be in (0, 1], got {}",
                self.connectivity
            )));
        }
        if self.cpu_choices.is_empty() {
            return Err(VneError::InvalidArgument(
                "cpu_choices must be nonempty".into(),
            ));
        }
        if self.cpu_choices.iter().any(|&c| c <= 0.0) {
            return Err(VneError::InvalidArgument(
                "cpu_choices must be positive".into(),
            ));
        }
        if !(self.bw_low > 0.0 && self.bw_low <= self.bw_high) {
            return Err(VneError::InvalidArgument(format!(
                "bandwidth range [{}, {}] invalid",
                self.bw_low, self.bw_high
            )));
        }
        Ok(())
    }
}

fn uniform_in(rng: &mut ChaCha8Rng, low: f64, high: f64) -> f64 {
    if low == high {
        low
    } else {
        rng.random_range(low..high)
    }
}

/// Generates a connected substrate with exactly `n_nodes` nodes and
/// `n_links` links. Node profiles are drawn uniformly from
/// `server_profiles`; link capacity is uniform in `[bw_low, bw_high]`.
/// All nodes start powered off with full availability.
pub fn generate_waxman_substrate(
    n_nodes: usize,
    n_links: usize,
    bw_low: f64,
    bw_high: f64,
    server_profiles: &[ServerProfile],
    seed: u64,
) -> Result<SubstrateNetwork> {
    if n_nodes < 2 {
        return Err(VneError::InvalidArgument(
            "substrate needs at least 2 nodes".into(),
        ));
    }
    let max_links = n_nodes * (n_nodes - 1) / 2;
    if n_links < n_nodes - 1 || n_links > max_links {
        return Err(VneError::InvalidArgument(format!(
            "link count {} outside [{}, {}]",
            n_links,
            n_nodes - 1,
            max_links
        )));
    }
    if !(bw_low > 0.0 && bw_low < bw_high) {
        return Err(VneError::InvalidArgument(format!(
            "bandwidth range [{}, {}] invalid",
            bw_low, bw_high
        )));
    }
    if server_profiles.is_empty() {
        return Err(VneError::InvalidArgument(
            "need at least one server profile".into(),
        ));
    }
    for p in server_profiles {
        p.validate()?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords: Vec<(f64, f64)> = (0..n_nodes)
        .map(|_| {
            (
                rng.random_range(0.0..PLANE_SIDE),
                rng.random_range(0.0..PLANE_SIDE),
            )
        })
        .collect();

    // Candidate pairs in lexicographic order with their Waxman weights.
    let mut max_dist = 0.0f64;
    let mut pairs = Vec::with_capacity(max_links);
    for a in 0..n_nodes {
        for b in a + 1..n_nodes {
            let d = dist(coords[a], coords[b]);
            max_dist = max_dist.max(d);
            pairs.push(((a, b), d));
        }
    }
    let scale = WAXMAN_BETA * max_dist.max(f64::MIN_POSITIVE);
    let weight = |d: f64| WAXMAN_ALPHA * (-d / scale).exp();

    // Weighted sampling without replacement (Efraimidis-Spirakis keys):
    // take the n_links largest u^(1/w).
    let mut keyed: Vec<(f64, usize)> = pairs
        .iter()
        .enumerate()
        .map(|(i, &(_, d))| {
            let u: f64 = rng.random();
            (u.powf(1.0 / weight(d)), i)
        })
        .collect();
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut selected: Vec<bool> = vec![false; pairs.len()];
    for &(_, i) in keyed.iter().take(n_links) {
        selected[i] = true;
    }

    repair_connectivity(n_nodes, &pairs, &mut selected, &weight);

    let nodes: Vec<SubstrateNode> = (0..n_nodes)
        .map(|id| {
            let profile = rng.random_range(0..server_profiles.len());
            let p = server_profiles[profile];
            SubstrateNode {
                id,
                x: coords[id].0,
                y: coords[id].1,
                cpu_capacity: p.cpu_capacity,
                cpu_available: p.cpu_capacity,
                power_baseline: p.power_baseline,
                power_full: p.power_full,
                powered_on: false,
                profile,
                dc_id: 0,
            }
        })
        .collect();
    let links: Vec<SubstrateLink> = pairs
        .iter()
        .enumerate()
        .filter(|&(i, _)| selected[i])
        .map(|(_, &((a, b), _))| {
            let bw = snap(uniform_in(&mut rng, bw_low, bw_high));
            SubstrateLink {
                endpoints: (a, b),
                bw_capacity: bw,
                bw_available: bw,
            }
        })
        .collect();
    SubstrateNetwork::new(nodes, links)
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Makes the selected edge set connected while keeping its size: repeatedly
/// add the highest-weight pair bridging two components and drop the
/// lowest-weight selected edge that lies on a cycle.
fn repair_connectivity(
    n: usize,
    pairs: &[((NodeId, NodeId), f64)],
    selected: &mut [bool],
    weight: &dyn Fn(f64) -> f64,
) {
    loop {
        let comp = components(n, pairs, selected);
        if comp.iter().max().map(|&c| c + 1).unwrap_or(1) <= 1 {
            return;
        }
        // Best bridging candidate among unselected pairs.
        let mut bridge: Option<(f64, usize)> = None;
        for (i, &((a, b), d)) in pairs.iter().enumerate() {
            if !selected[i] && comp[a] != comp[b] {
                let w = weight(d);
                if bridge.is_none_or(|(bw, bi)| w > bw || (w == bw && i < bi)) {
                    bridge = Some((w, i));
                }
            }
        }
        let (_, add) = bridge.expect("disconnected graph always has a bridging pair");
        selected[add] = true;

        // Cheapest removable edge: any selected non-bridge of the new graph.
        let bridges = bridge_edges(n, pairs, selected);
        let mut drop: Option<(f64, usize)> = None;
        for (i, &(_, d)) in pairs.iter().enumerate() {
            if selected[i] && !bridges.contains(&i) {
                let w = weight(d);
                if drop.is_none_or(|(dw, di)| w < dw || (w == dw && i < di)) {
                    drop = Some((w, i));
                }
            }
        }
        let (_, rm) = drop.expect("edge count above n-1 implies a cycle edge");
        selected[rm] = false;
    }
}

/// Component index per node, 0-based; a connected graph yields all zeros.
fn components(n: usize, pairs: &[((NodeId, NodeId), f64)], selected: &[bool]) -> Vec<usize> {
    let mut adj = vec![Vec::new(); n];
    for (i, &((a, b), _)) in pairs.iter().enumerate() {
        if selected[i] {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut next = 0;
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        comp[start] = next;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if comp[w] == usize::MAX {
                    comp[w] = next;
                    stack.push(w);
                }
            }
        }
        next += 1;
    }
    comp
}

/// Indices (into `pairs`) of selected edges whose removal would disconnect
/// their component, via one DFS lowpoint pass.
fn bridge_edges(
    n: usize,
    pairs: &[((NodeId, NodeId), f64)],
    selected: &[bool],
) -> std::collections::HashSet<usize> {
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (i, &((a, b), _)) in pairs.iter().enumerate() {
        if selected[i] {
            adj[a].push((b, i));
            adj[b].push((a, i));
        }
    }
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut cursor = vec![0usize; n];
    let mut bridges = std::collections::HashSet::new();
    let mut timer = 0usize;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        // Iterative DFS over (node, edge to parent).
        let mut stack: Vec<(usize, usize)> = vec![(root, usize::MAX)];
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        while let Some(&(v, pedge)) = stack.last() {
            if cursor[v] < adj[v].len() {
                let (w, e) = adj[v][cursor[v]];
                cursor[v] += 1;
                if e == pedge {
                    continue;
                }
                if disc[w] == usize::MAX {
                    disc[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    stack.push((w, e));
                } else {
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _)) = stack.last() {
                    low[p] = low[p].min(low[v]);
                    if low[v] > disc[p] {
                        bridges.insert(pedge);
                    }
                }
            }
        }
    }
    bridges
}

/// Generates a connected virtual network of `n_nodes` nodes; see module
/// docs for the linking rule.
pub fn generate_waxman_virtual(
    n_nodes: usize,
    connectivity: f64,
    cpu_choices: &[f64],
    bw_low: f64,
    bw_high: f64,
    seed: u64,
) -> Result<VirtualNetwork> {
    let params = VirtualNetParams {
        connectivity,
        cpu_choices: cpu_choices.to_vec(),
        bw_low,
        bw_high,
    };
    params.validate()?;
    if n_nodes < 2 {
        return Err(VneError::InvalidArgument(
            "virtual network needs at least 2 nodes".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_virtual_with(&mut rng, n_nodes, &params)
}

fn generate_virtual_with(
    rng: &mut ChaCha8Rng,
    n_nodes: usize,
    params: &VirtualNetParams,
) -> Result<VirtualNetwork> {
    let n = n_nodes;
    let tree = random_spanning_tree(rng, n);
    let total_pairs = n * (n - 1) / 2;
    let extra_pairs = total_pairs - (n - 1);
    // Expected edge count should match connectivity * total_pairs even
    // though the tree edges are forced.
    let q = if extra_pairs == 0 {
        0.0
    } else {
        ((params.connectivity * total_pairs as f64 - (n - 1) as f64) / extra_pairs as f64)
            .clamp(0.0, 1.0)
    };

    let in_tree: std::collections::HashSet<(NodeId, NodeId)> = tree.iter().copied().collect();
    let mut edges: Vec<(NodeId, NodeId)> = tree;
    for a in 0..n {
        for b in a + 1..n {
            if in_tree.contains(&(a, b)) {
                continue;
            }
            if rng.random::<f64>() < q {
                edges.push((a, b));
            }
        }
    }
    edges.sort_unstable();

    let nodes: Vec<VirtualNode> = (0..n)
        .map(|id| VirtualNode {
            id,
            cpu_demand: params.cpu_choices[rng.random_range(0..params.cpu_choices.len())],
        })
        .collect();
    let links: Vec<VirtualLink> = edges
        .into_iter()
        .map(|endpoints| VirtualLink {
            endpoints,
            bw_demand: snap(uniform_in(rng, params.bw_low, params.bw_high)),
        })
        .collect();
    VirtualNetwork::new(nodes, links)
}

/// Uniform random labeled tree on `0..n` via a Pruefer sequence.
fn random_spanning_tree(rng: &mut ChaCha8Rng, n: usize) -> Vec<(NodeId, NodeId)> {
    if n == 2 {
        return vec![(0, 1)];
    }
    let seq: Vec<usize> = (0..n - 2).map(|_| rng.random_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &s in &seq {
        degree[s] += 1;
    }
    let mut leaves: std::collections::BTreeSet<usize> =
        (0..n).filter(|&v| degree[v] == 1).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &s in &seq {
        let leaf = *leaves
            .iter()
            .next()
            .expect("pruefer decode always has a leaf");
        leaves.remove(&leaf);
        edges.push((leaf.min(s), leaf.max(s)));
        degree[s] -= 1;
        if degree[s] == 1 {
            leaves.insert(s);
        }
    }
    let mut last: Vec<usize> = leaves.into_iter().collect();
    debug_assert_eq!(last.len(), 2);
    let (a, b) = (last.remove(0), last.remove(0));
    edges.push((a.min(b), a.max(b)));
    edges
}

/// Generates an arrival-ordered workload of `n_requests` virtual network
/// requests. Inter-arrival gaps are exponential with mean
/// `100 / arrival_rate`; lifetimes are uniform in
/// `[lifetime_low, lifetime_high]`; sizes are uniform integers in
/// `[vn_size_low, vn_size_high]`.
#[allow(clippy::too_many_arguments)]
pub fn generate_workload(
    n_requests: usize,
    arrival_rate: f64,
    lifetime_low: f64,
    lifetime_high: f64,
    vn_size_low: usize,
    vn_size_high: usize,
    vn_params: &VirtualNetParams,
    seed: u64,
) -> Result<Vec<Vnr>> {
    if n_requests < 1 {
        return Err(VneError::InvalidArgument(
            "need at least one request".into(),
        ));
    }
    if arrival_rate <= 0.0 {
        return Err(VneError::InvalidArgument("arrival_rate must be > 0".into()));
    }
    if !(lifetime_low > 0.0 && lifetime_low <= lifetime_high) {
        return Err(VneError::InvalidArgument(format!(
            "lifetime range [{}, {}] invalid",
            lifetime_low, lifetime_high
        )));
    }
    if !(vn_size_low >= 2 && vn_size_low <= vn_size_high) {
        return Err(VneError::InvalidArgument(format!(
            "virtual network size range [{}, {}] invalid",
            vn_size_low, vn_size_high
        )));
    }
    vn_params.validate()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gap = Exp::new(arrival_rate / 100.0)
        .map_err(|e| VneError::InvalidArgument(format!("arrival_rate: {}", e)))?;
    let mut t = 0.0;
    let mut out = Vec::with_capacity(n_requests);
    for id in 0..n_requests as u64 {
        t += gap.sample(&mut rng);
        let size = rng.random_range(vn_size_low..=vn_size_high);
        let lifetime = uniform_in(&mut rng, lifetime_low, lifetime_high);
        let vn_seed = rng.random::<u64>();
        let mut vn_rng = ChaCha8Rng::seed_from_u64(vn_seed);
        let graph = generate_virtual_with(&mut vn_rng, size, vn_params)?;
        out.push(Vnr::new(id, graph, t, lifetime)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{PROFILE_G4, PROFILE_G5};

    fn paper_vn_params() -> VirtualNetParams {
        VirtualNetParams {
            connectivity: 0.5,
            cpu_choices: vec![2500.0, 2000.0, 1000.0, 500.0],
            bw_low: 1.0,
            bw_high: 50.0,
        }
    }

    #[test]
    fn substrate_paper_scale_shape_and_mean_bw() {
        let sn =
            generate_waxman_substrate(100, 500, 50.0, 150.0, &[PROFILE_G4, PROFILE_G5], 1).unwrap();
        assert_eq!(sn.node_count(), 100);
        assert_eq!(sn.link_count(), 500);
        assert!(sn.is_connected());
        let mean: f64 =
            sn.links().iter().map(|l| l.bw_capacity).sum::<f64>() / sn.link_count() as f64;
        assert!(
            (mean - 100.0).abs() < 10.0,
            "mean link capacity {} not near 100",
            mean
        );
    }

    #[test]
    fn substrate_two_nodes_forced_topology() {
        let sn = generate_waxman_substrate(2, 1, 50.0, 150.0, &[PROFILE_G4], 99).unwrap();
        assert_eq!(sn.node_count(), 2);
        assert_eq!(sn.link_count(), 1);
        assert_eq!(sn.links()[0].endpoints, (0, 1));
    }

    #[test]
    fn substrate_waxman_prefers_short_links() {
        let sn = generate_waxman_substrate(30, 90, 50.0, 150.0, &[PROFILE_G4], 7).unwrap();
        let d = |a: NodeId, b: NodeId| {
            let (na, nb) = (sn.node(a), sn.node(b));
            ((na.x - nb.x).powi(2) + (na.y - nb.y).powi(2)).sqrt()
        };
        let mean_present: f64 = sn
            .links()
            .iter()
            .map(|l| d(l.endpoints.0, l.endpoints.1))
            .sum::<f64>()
            / sn.link_count() as f64;
        let mut all = 0.0;
        let mut count = 0usize;
        for a in 0..30 {
            for b in a + 1..30 {
                all += d(a, b);
                count += 1;
            }
        }
        let mean_all = all / count as f64;
        assert!(
            mean_present < mean_all,
            "present links mean {} should be below all-pairs mean {}",
            mean_present,
            mean_all
        );
    }

    #[test]
    fn substrate_fresh_resources_and_power_state() {
        let sn =
            generate_waxman_substrate(20, 40, 50.0, 150.0, &[PROFILE_G4, PROFILE_G5], 3).unwrap();
        for n in sn.nodes() {
            assert_eq!(n.cpu_available, n.cpu_capacity);
            assert!(!n.powered_on);
            assert!([3720.0, 5320.0].contains(&n.cpu_capacity));
        }
        for l in sn.links() {
            assert_eq!(l.bw_available, l.bw_capacity);
            assert!(l.bw_capacity >= 50.0 && l.bw_capacity <= 150.0);
        }
    }

    #[test]
    fn substrate_invalid_ranges_rejected() {
        assert!(generate_waxman_substrate(10, 8, 50.0, 150.0, &[PROFILE_G4], 0).is_err());
        assert!(generate_waxman_substrate(10, 46, 50.0, 150.0, &[PROFILE_G4], 0).is_err());
        assert!(generate_waxman_substrate(10, 20, 150.0, 50.0, &[PROFILE_G4], 0).is_err());
        assert!(generate_waxman_substrate(10, 20, 50.0, 150.0, &[], 0).is_err());
    }

    #[test]
    fn virtual_two_nodes_forced_link() {
        let vn = generate_waxman_virtual(2, 0.5, &[500.0], 1.0, 50.0, 42).unwrap();
        assert_eq!(vn.node_count(), 2);
        assert_eq!(vn.link_count(), 1);
        assert!(vn.nodes().iter().all(|n| n.cpu_demand == 500.0));
    }

    #[test]
    fn virtual_edge_count_tracks_connectivity() {
        // Tree edges are forced, the rest follow an adjusted Bernoulli, so
        // the edge count is 19 + Binomial(171, q) with mean 95.
        let n = 20usize;
        let total = n * (n - 1) / 2;
        let extra = total - (n - 1);
        let q = (0.5 * total as f64 - (n - 1) as f64) / extra as f64;
        let sigma = (extra as f64 * q * (1.0 - q)).sqrt();
        let vn = generate_waxman_virtual(n, 0.5, &[2500.0, 2000.0, 1000.0, 500.0], 1.0, 50.0, 3)
            .unwrap();
        let mean = 0.5 * total as f64;
        assert!(
            (vn.link_count() as f64 - mean).abs() <= 3.0 * sigma,
            "{} links vs expected {} +/- {}",
            vn.link_count(),
            mean,
            3.0 * sigma
        );
        assert!(vn.is_connected());
    }

    #[test]
    fn virtual_full_connectivity_is_complete_graph() {
        let vn = generate_waxman_virtual(10, 1.0, &[1000.0], 1.0, 50.0, 9).unwrap();
        assert_eq!(vn.link_count(), 45);
    }

    #[test]
    fn workload_matches_requested_rates() {
        let vnrs =
            generate_workload(1000, 10.0, 300.0, 700.0, 2, 20, &paper_vn_params(), 5).unwrap();
        assert_eq!(vnrs.len(), 1000);
        let mean_life: f64 = vnrs.iter().map(|v| v.lifetime).sum::<f64>() / 1000.0;
        assert!(
            (mean_life - 500.0).abs() < 20.0,
            "mean lifetime {}",
            mean_life
        );
        let mut gaps = Vec::new();
        let mut prev = 0.0;
        for v in &vnrs {
            gaps.push(v.arrival_time - prev);
            prev = v.arrival_time;
        }
        let mean_gap: f64 = gaps.iter().sum::<f64>() / gaps.len() as f64;
        assert!(
            (mean_gap - 10.0).abs() < 1.0,
            "mean inter-arrival {}",
            mean_gap
        );
    }

    #[test]
    fn workload_degenerate_lifetime_range() {
        let vnrs = generate_workload(1, 5.0, 300.0, 300.0, 2, 2, &paper_vn_params(), 1).unwrap();
        assert_eq!(vnrs.len(), 1);
        assert_eq!(vnrs[0].lifetime, 300.0);
    }

    #[test]
    fn workload_arrivals_sorted() {
        let vnrs =
            generate_workload(500, 10.0, 300.0, 700.0, 2, 20, &paper_vn_params(), 11).unwrap();
        assert!(vnrs
            .windows(2)
            .all(|w| w[0].arrival_time <= w[1].arrival_time));
    }

    #[test]
    fn generators_deterministic() {
        let a =
            generate_waxman_substrate(30, 80, 50.0, 150.0, &[PROFILE_G4, PROFILE_G5], 17).unwrap();
        let b =
            generate_waxman_substrate(30, 80, 50.0, 150.0, &[PROFILE_G4, PROFILE_G5], 17).unwrap();
        assert_eq!(a, b);
        let va = generate_waxman_virtual(12, 0.5, &[500.0, 1000.0], 1.0, 50.0, 23).unwrap();
        let vb = generate_waxman_virtual(12, 0.5, &[500.0, 1000.0], 1.0, 50.0, 23).unwrap();
        assert_eq!(va, vb);
    }

    #[test]
    fn generated_graphs_connected_across_seeds() {
        for seed in 0..20 {
            let sn = generate_waxman_substrate(25, 30, 50.0, 150.0, &[PROFILE_G4], seed).unwrap();
            assert!(sn.is_connected(), "substrate seed {} disconnected", seed);
            let vn = generate_waxman_virtual(9, 0.3, &[500.0], 1.0, 50.0, seed).unwrap();
            assert!(vn.is_connected(), "virtual seed {} disconnected", seed);
        }
    }
}
