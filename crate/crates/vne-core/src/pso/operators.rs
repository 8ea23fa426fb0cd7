//! The discrete velocity/position operators.

use rand::Rng;

use crate::{Result, VneError};

use super::{CandidateLists, Position, Velocity, VelocityEntry};

/// Velocity pulling `b` toward whichever of the two positions has the
/// better (lower) fitness: conflicting dimensions carry the better
/// position's entry, agreeing dimensions are `Keep`. Fitness ties favor
/// `a`.
pub fn subtract(a: &Position, b: &Position, fit_a: f64, fit_b: f64) -> Result<Velocity> {
    if a.0.len() != b.0.len() {
        return Err(VneError::InvalidArgument(format!(
            "position dimensions differ: {} vs {}",
            a.0.len(),
            b.0.len()
        )));
    }
    let better = if fit_a <= fit_b { a } else { b };
    Ok(Velocity(
        a.0.iter()
            .zip(&b.0)
            .zip(&better.0)
            .map(|((&ea, &eb), &winner)| {
                if ea == eb {
                    VelocityEntry::Keep
                } else {
                    VelocityEntry::Assign(winner)
                }
            })
            .collect(),
    ))
}

/// Merges three velocities: every dimension is drawn from `v1`, `v2` or
/// `v3` by one roulette spin with weights `p1`, `p2`, `p3` (which must sum
/// to one).
pub fn add(
    v1: &Velocity,
    v2: &Velocity,
    v3: &Velocity,
    p1: f64,
    p2: f64,
    p3: f64,
    rng: &mut impl Rng,
) -> Result<Velocity> {
    if ((p1 + p2 + p3) - 1.0).abs() > 1e-9 {
        return Err(VneError::InvalidArgument(format!(
            "selection probabilities must sum to 1, got {}",
            p1 + p2 + p3
        )));
    }
    if p1 < 0.0 || p2 < 0.0 || p3 < 0.0 {
        return Err(VneError::InvalidArgument(
            "selection probabilities must be nonnegative".into(),
        ));
    }
    if v1.0.len() != v2.0.len() || v2.0.len() != v3.0.len() {
        return Err(VneError::InvalidArgument(
            "velocity dimensions differ".into(),
        ));
    }
    Ok(Velocity(
        v1.0.iter()
            .zip(&v2.0)
            .zip(&v3.0)
            .map(|((&e1, &e2), &e3)| {
                let spin: f64 = rng.random();
                if spin < p1 {
                    e1
                } else if spin < p1 + p2 {
                    e2
                } else {
                    e3
                }
            })
            .collect(),
    ))
}

/// Applies a velocity to a position. `Keep` leaves the entry; a directive
/// to a different host adopts it; a directive equal to the current entry
/// triggers a uniform reselection from that dimension's candidate list.
pub fn multiply(
    pos: &Position,
    vel: &Velocity,
    cands: &CandidateLists,
    rng: &mut impl Rng,
) -> Result<Position> {
    if pos.0.len() != vel.0.len() || pos.0.len() != cands.len() {
        return Err(VneError::InvalidArgument(
            "position/velocity/candidate dimensions differ".into(),
        ));
    }
    let mut out = Vec::with_capacity(pos.0.len());
    for (dim, (&p, &v)) in pos.0.iter().zip(&vel.0).enumerate() {
        let entry = match v {
            VelocityEntry::Keep => p,
            VelocityEntry::Assign(s) if s != p => s,
            VelocityEntry::Assign(_) => {
                let list = cands.list(dim);
                if list.is_empty() {
                    return Err(VneError::NoCandidate {
                        virtual_node: dim, // caller maps dimension back to the node id
                    });
                }
                list[rng.random_range(0..list.len())]
            }
        };
        out.push(entry);
    }
    Ok(Position(out))
}
