//! Discrete particle swarm embedder for a single substrate domain.
//!
//! A particle's position assigns one substrate host per virtual node
//! (virtual nodes indexed in BFS order); its velocity is a vector of
//! substitution directives. The swarm moves with three discrete operators:
//! subtraction extracts the conflicting entries of the better of two
//! positions, addition merges three velocities by roulette selection, and
//! multiplication applies a velocity to a position, reselecting from the
//! candidate list where the directive would be a no-op.

use serde::{Deserialize, Serialize};

use crate::energy::LinkMap;
use crate::topology::NodeId;

mod candidates;
mod operators;
mod paths;
mod swarm;

pub use candidates::{
    build_candidate_lists, substrate_bfs_order, virtual_bfs_order, CandidateLists,
};
pub use operators::{add, multiply, subtract};
pub use paths::check_feasible;
pub use swarm::{embed_eapso, init_position, EapsoOutcome, InitSampling, SwarmParams};

/// Substrate host per virtual node, indexed by BFS order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Position(pub Vec<NodeId>);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VelocityEntry {
    /// Leave the position entry unchanged.
    Keep,
    /// Move the position entry to this substrate node.
    Assign(NodeId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Velocity(pub Vec<VelocityEntry>);

/// One member of the swarm.
#[derive(Clone, Debug)]
pub struct Particle {
    pub position: Position,
    pub velocity: Velocity,
    /// Best feasible position this particle has visited, with its fitness;
    /// unset until the particle first evaluates feasible.
    pub personal_best: Option<(Position, f64)>,
}

/// An accepted placement of a request on a substrate.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    /// Virtual node id to substrate node id.
    pub node_map: std::collections::BTreeMap<NodeId, NodeId>,
    /// Virtual link to oriented substrate link walk; empty when the
    /// endpoints share a host.
    pub link_map: LinkMap,
    pub energy: f64,
    pub cost: f64,
    pub fitness: f64,
}

/// Why an embedder declined a request. Rejection is a domain outcome, not
/// an error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum RejectReason {
    /// Some virtual node has no admissible substrate host at all.
    NoCandidates { virtual_node: NodeId },
    /// The swarm never found a feasible particle within its budgets.
    NoFeasibleSolution,
    /// A single virtual node exceeds the coarsening resource bound.
    OversizedNode {
        virtual_node: NodeId,
        demand: f64,
        limit: f64,
    },
    /// No data center passed the aggregate and candidate screens.
    AssignmentFailed { coarse_node: usize },
    /// A cut virtual link needs a direct inter-DC link that does not exist.
    MissingInterDcLink { dc_a: usize, dc_b: usize },
    /// The direct inter-DC link lacks bandwidth for the cut links.
    InterDcBandwidth {
        dc_a: usize,
        dc_b: usize,
        needed: f64,
        available: f64,
    },
    /// A per-DC embedding failed after assignment.
    DcEmbeddingFailed {
        dc: usize,
        reason: Box<RejectReason>,
    },
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RejectReason::NoCandidates { virtual_node } => {
                write!(f, "no candidate hosts for virtual node {}", virtual_node)
            }
            RejectReason::NoFeasibleSolution => write!(f, "no feasible particle found"),
            RejectReason::OversizedNode {
                virtual_node,
                demand,
                limit,
            } => write!(
                f,
                "virtual node {} demands {} but the resource bound is {}",
                virtual_node, demand, limit
            ),
            RejectReason::AssignmentFailed { coarse_node } => {
                write!(f, "no data center fits coarse node {}", coarse_node)
            }
            RejectReason::MissingInterDcLink { dc_a, dc_b } => {
                write!(
                    f,
                    "no direct link between data centers {} and {}",
                    dc_a, dc_b
                )
            }
            RejectReason::InterDcBandwidth {
                dc_a,
                dc_b,
                needed,
                available,
            } => write!(
                f,
                "inter-DC link {}-{} has {} bandwidth, {} needed",
                dc_a, dc_b, available, needed
            ),
            RejectReason::DcEmbeddingFailed { dc, reason } => {
                write!(f, "embedding inside data center {} failed: {}", dc, reason)
            }
        }
    }
}
