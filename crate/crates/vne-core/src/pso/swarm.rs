//! Swarm initialization and the embedding main loop.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::energy::{embedding_cost, fitness, vnr_energy, LinkMap};
use crate::topology::{NodeId, SubstrateNetwork, Vnr};
use crate::{Result, VneError};

use super::{
    add, build_candidate_lists, check_feasible, multiply, subtract, virtual_bfs_order,
    CandidateLists, Embedding, Particle, Position, RejectReason, Velocity, VelocityEntry,
};

/// How the initial particle positions sample their candidate lists.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitSampling {
    /// Roulette weighted by the candidate's remaining total resource;
    /// biases the initial swarm toward consolidated placements.
    WeightedByResource,
    /// Uniform over candidates that still fit; kept for ablation.
    Uniform,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SwarmParams {
    pub population: usize,
    pub iterations: usize,
    /// Weight of energy against cost in the objective.
    pub alpha: f64,
    /// Longest admissible substrate path per virtual link.
    pub max_hops: usize,
    /// Each particle may be re-initialized `backtrack_factor * n` times,
    /// where n is the number of virtual nodes.
    pub backtrack_factor: usize,
    /// Stop after this many iterations without improving the global best.
    pub no_improvement_limit: usize,
    pub init_sampling: InitSampling,
}

impl Default for SwarmParams {
    fn default() -> Self {
        Self {
            population: 30,
            iterations: 50,
            alpha: 1.0,
            max_hops: 2,
            backtrack_factor: 3,
            no_improvement_limit: 15,
            init_sampling: InitSampling::WeightedByResource,
        }
    }
}

/// Result of one embedding attempt, with the per-iteration best-fitness
/// trace (starting at the first iteration that had a feasible particle).
#[derive(Clone, Debug)]
pub struct EapsoOutcome {
    pub result: std::result::Result<Embedding, RejectReason>,
    pub gbest_history: Vec<f64>,
    pub iterations: usize,
}

/// Draws a position: every virtual node picks from its candidate list,
/// with a running per-host CPU view so one host is not oversubscribed
/// within the position. Fails with `NoCandidate` when some dimension has
/// no host left that fits.
pub fn init_position(
    cands: &CandidateLists,
    order: &[NodeId],
    demands: &[f64],
    sn: &SubstrateNetwork,
    sampling: InitSampling,
    rng: &mut impl Rng,
) -> Result<Position> {
    let incident_bw: Vec<f64> = (0..sn.node_count())
        .map(|v| {
            sn.adjacent(v)
                .iter()
                .map(|&(_, l)| sn.link(l).bw_available)
                .sum()
        })
        .collect();
    let mut remaining: Vec<f64> = (0..sn.node_count())
        .map(|v| sn.node(v).cpu_available)
        .collect();
    let mut out = Vec::with_capacity(cands.len());
    for dim in 0..cands.len() {
        let demand = demands[dim];
        let list = cands.list(dim);
        let eligible: Vec<NodeId> = list
            .iter()
            .copied()
            .filter(|&s| remaining[s] >= demand)
            .collect();
        if eligible.is_empty() {
            return Err(VneError::NoCandidate {
                virtual_node: order[dim],
            });
        }
        let chosen = match sampling {
            InitSampling::Uniform => eligible[rng.random_range(0..eligible.len())],
            InitSampling::WeightedByResource => {
                let weights: Vec<f64> = eligible
                    .iter()
                    .map(|&s| remaining[s] + incident_bw[s])
                    .collect();
                let total: f64 = weights.iter().sum();
                let mut spin = rng.random::<f64>() * total;
                let mut pick = eligible[eligible.len() - 1];
                for (&s, &w) in eligible.iter().zip(&weights) {
                    if spin < w {
                        pick = s;
                        break;
                    }
                    spin -= w;
                }
                pick
            }
        };
        remaining[chosen] -= demand;
        out.push(chosen);
    }
    Ok(Position(out))
}

fn random_velocity(cands: &CandidateLists, rng: &mut impl Rng) -> Velocity {
    Velocity(
        (0..cands.len())
            .map(|dim| {
                let list = cands.list(dim);
                VelocityEntry::Assign(list[rng.random_range(0..list.len())])
            })
            .collect(),
    )
}

/// Uniform draw from the 2-simplex, so the three weights sum to one.
fn simplex_weights(rng: &mut impl Rng) -> (f64, f64, f64) {
    let a: f64 = rng.random();
    let b: f64 = rng.random();
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    (lo, hi - lo, 1.0 - hi)
}

#[derive(Clone, Debug)]
struct Evaluation {
    link_map: LinkMap,
    energy: f64,
    cost: f64,
    fitness: f64,
}

struct Context<'a> {
    vnr: &'a Vnr,
    sn: &'a SubstrateNetwork,
    order: Vec<NodeId>,
    demands: Vec<f64>,
    cands: CandidateLists,
    alpha: f64,
    max_hops: usize,
}

impl Context<'_> {
    fn evaluate(&self, pos: &Position) -> Result<Option<Evaluation>> {
        let Some(link_map) =
            check_feasible(pos, &self.order, &self.vnr.graph, self.sn, self.max_hops)
        else {
            return Ok(None);
        };
        let node_map: BTreeMap<NodeId, NodeId> = self
            .order
            .iter()
            .copied()
            .zip(pos.0.iter().copied())
            .collect();
        let energy = vnr_energy(&self.vnr.graph, &node_map, self.sn, self.vnr.lifetime)?;
        let cost = embedding_cost(self.vnr, &node_map, &link_map)?;
        Ok(Some(Evaluation {
            link_map,
            energy,
            cost,
            fitness: fitness(energy, cost, self.alpha),
        }))
    }
}

struct Slot {
    alive: bool,
    particle: Particle,
    reinit_left: usize,
}

/// Embeds a request on a substrate with the discrete particle swarm.
/// Pure with respect to `sn`; the caller commits accepted embeddings.
/// Deterministic given identical inputs and seed.
pub fn embed_eapso(
    vnr: &Vnr,
    sn: &SubstrateNetwork,
    params: &SwarmParams,
    seed: u64,
) -> Result<EapsoOutcome> {
    if params.population == 0 || params.iterations == 0 {
        return Err(VneError::InvalidArgument(
            "population and iterations must be positive".into(),
        ));
    }
    let order = virtual_bfs_order(&vnr.graph)?;
    let cands = build_candidate_lists(&vnr.graph, &order, sn);
    for (dim, list) in cands.lists.iter().enumerate() {
        if list.is_empty() {
            return Ok(EapsoOutcome {
                result: Err(RejectReason::NoCandidates {
                    virtual_node: order[dim],
                }),
                gbest_history: Vec::new(),
                iterations: 0,
            });
        }
    }
    let demands: Vec<f64> = order.iter().map(|&v| vnr.graph.cpu_demand(v)).collect();
    let ctx = Context {
        vnr,
        sn,
        order,
        demands,
        cands,
        alpha: params.alpha,
        max_hops: params.max_hops,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budget = params.backtrack_factor * ctx.order.len();
    let mut slots: Vec<Slot> = (0..params.population)
        .map(|_| {
            let mut reinit_left = budget;
            let position = loop {
                match init_position(
                    &ctx.cands,
                    &ctx.order,
                    &ctx.demands,
                    sn,
                    params.init_sampling,
                    &mut rng,
                ) {
                    Ok(p) => break Some(p),
                    Err(_) => {
                        if reinit_left == 0 {
                            break None;
                        }
                        reinit_left -= 1;
                    }
                }
            };
            let velocity = random_velocity(&ctx.cands, &mut rng);
            match position {
                Some(position) => Slot {
                    alive: true,
                    particle: Particle {
                        position,
                        velocity,
                        personal_best: None,
                    },
                    reinit_left,
                },
                None => Slot {
                    alive: false,
                    particle: Particle {
                        position: Position(Vec::new()),
                        velocity,
                        personal_best: None,
                    },
                    reinit_left: 0,
                },
            }
        })
        .collect();

    let mut gbest: Option<(Position, Evaluation)> = None;
    let mut history = Vec::new();
    let mut no_improve = 0usize;
    let mut iterations = 0usize;

    for _ in 0..params.iterations {
        if slots.iter().all(|s| !s.alive) {
            break;
        }
        iterations += 1;
        let (p1, p2, p3) = simplex_weights(&mut rng);

        // Evaluate everyone, then refresh personal and global bests.
        let mut evals: Vec<Option<Evaluation>> = Vec::with_capacity(slots.len());
        let mut improved = false;
        for slot in slots.iter_mut() {
            if !slot.alive {
                evals.push(None);
                continue;
            }
            let ev = ctx.evaluate(&slot.particle.position)?;
            if let Some(ev) = &ev {
                let p = &mut slot.particle;
                let better_pbest = p
                    .personal_best
                    .as_ref()
                    .is_none_or(|(_, f)| ev.fitness < *f);
                if better_pbest {
                    p.personal_best = Some((p.position.clone(), ev.fitness));
                    let better_gbest = gbest.as_ref().is_none_or(|(_, g)| ev.fitness < g.fitness);
                    if better_gbest {
                        gbest = Some((p.position.clone(), ev.clone()));
                        improved = true;
                    }
                }
            }
            evals.push(ev);
        }
        if let Some((_, g)) = &gbest {
            history.push(g.fitness);
            no_improve = if improved { 0 } else { no_improve + 1 };
            if no_improve >= params.no_improvement_limit {
                break;
            }
        }

        // Move feasible particles along the discrete update; re-seed the
        // infeasible ones while their budget lasts.
        for (slot, ev) in slots.iter_mut().zip(&evals) {
            if !slot.alive {
                continue;
            }
            match ev {
                Some(ev) => {
                    let p = &mut slot.particle;
                    let (pb_pos, pb_fit) =
                        p.personal_best.as_ref().expect("feasible implies pbest");
                    let (gb_pos, gb) = gbest.as_ref().expect("feasible implies gbest");
                    let toward_pbest = subtract(pb_pos, &p.position, *pb_fit, ev.fitness)?;
                    let toward_gbest = subtract(gb_pos, &p.position, gb.fitness, ev.fitness)?;
                    let velocity = add(
                        &p.velocity,
                        &toward_pbest,
                        &toward_gbest,
                        p1,
                        p2,
                        p3,
                        &mut rng,
                    )?;
                    p.position = multiply(&p.position, &velocity, &ctx.cands, &mut rng)?;
                    p.velocity = velocity;
                }
                None => loop {
                    if slot.reinit_left == 0 {
                        slot.alive = false;
                        break;
                    }
                    slot.reinit_left -= 1;
                    match init_position(
                        &ctx.cands,
                        &ctx.order,
                        &ctx.demands,
                        sn,
                        params.init_sampling,
                        &mut rng,
                    ) {
                        Ok(pos) => {
                            slot.particle.position = pos;
                            slot.particle.velocity = random_velocity(&ctx.cands, &mut rng);
                            break;
                        }
                        Err(_) => continue,
                    }
                },
            }
        }
    }

    let result = match gbest {
        Some((pos, ev)) => {
            let node_map: BTreeMap<NodeId, NodeId> = ctx
                .order
                .iter()
                .copied()
                .zip(pos.0.iter().copied())
                .collect();
            Ok(Embedding {
                node_map,
                link_map: ev.link_map,
                energy: ev.energy,
                cost: ev.cost,
                fitness: ev.fitness,
            })
        }
        None => Err(RejectReason::NoFeasibleSolution),
    };
    Ok(EapsoOutcome {
        result,
        gbest_history: history,
        iterations,
    })
}
