//! Backward paths through the graphical representation.
//!
//! A backward path from `(y, t)` runs down in time along `y` until it meets
//! a cross, and may jump from `w` to `z` at any arrow `z -> w`. The set of
//! vertices reachable at time `s` is computed by scanning the events of
//! `(s, t]` in decreasing time order.

use serde::{Deserialize, Serialize};

use super::timeline::{EventKind, EventTimeline};
use crate::error::{invalid, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimePoint<S> {
    pub vertex: u32,
    pub time: S,
}

impl<S> SpaceTimePoint<S> {
    pub fn new(vertex: u32, time: S) -> Self {
        Self { vertex, time }
    }
}

/// Outcome of a backward scan down to some floor time.
#[derive(Debug, Clone, PartialEq)]
pub struct BackwardScan<S> {
    /// Membership of the reachable set at the floor.
    pub reachable: Vec<bool>,
    /// Time at which the reachable set became empty, if it did.
    pub died_at: Option<S>,
}

fn scan<S: Scalar>(
    timeline: &EventTimeline<S>,
    starts: &[u32],
    t: S,
    s: S,
    allow: &mut dyn FnMut(u32, u32, u32) -> bool,
) -> Result<BackwardScan<S>> {
    timeline.check_time(t)?;
    timeline.check_time(s)?;
    if s > t {
        return Err(invalid("backward scan needs s <= t"));
    }
    let n = timeline.vertex_count();
    let mut active = vec![false; n];
    let mut count = 0usize;
    for &y in starts {
        if y as usize >= n {
            return Err(invalid(format!("vertex {y} not in topology")));
        }
        if !active[y as usize] {
            active[y as usize] = true;
            count += 1;
        }
    }
    if count == 0 {
        return Ok(BackwardScan {
            reachable: active,
            died_at: Some(t),
        });
    }
    let events = &timeline.events()[timeline.event_range(s, t)];
    for ev in events.iter().rev() {
        match ev.kind {
            EventKind::Cross { vertex } => {
                if active[vertex as usize] {
                    active[vertex as usize] = false;
                    count -= 1;
                    if count == 0 {
                        return Ok(BackwardScan {
                            reachable: active,
                            died_at: Some(ev.time),
                        });
                    }
                }
            }
            EventKind::Arrow { from, to, edge } => {
                if active[to as usize] && !active[from as usize] && allow(from, to, edge) {
                    active[from as usize] = true;
                    count += 1;
                }
            }
        }
    }
    Ok(BackwardScan {
        reachable: active,
        died_at: None,
    })
}

/// Vertices `x` with `(x, s) <- (y, t)`, increasing.
pub fn backward_reachable<S: Scalar>(
    timeline: &EventTimeline<S>,
    from: SpaceTimePoint<S>,
    s: S,
) -> Result<Vec<u32>> {
    backward_reachable_filtered(timeline, from, s, |_, _, _| true)
}

/// As [`backward_reachable`], following only arrows with `allow(from, to, edge)`.
pub fn backward_reachable_filtered<S: Scalar>(
    timeline: &EventTimeline<S>,
    from: SpaceTimePoint<S>,
    s: S,
    mut allow: impl FnMut(u32, u32, u32) -> bool,
) -> Result<Vec<u32>> {
    let res = scan(timeline, &[from.vertex], from.time, s, &mut allow)?;
    Ok(members(&res.reachable))
}

/// Backward scan from a set of vertices at time `t` down to `s`.
pub fn backward_scan<S: Scalar>(
    timeline: &EventTimeline<S>,
    starts: &[u32],
    t: S,
    s: S,
    mut allow: impl FnMut(u32, u32, u32) -> bool,
) -> Result<BackwardScan<S>> {
    scan(timeline, starts, t, s, &mut allow)
}

/// When the backward set from `from` dies out above `floor`, or `None` if it
/// is still nonempty at `floor`.
pub fn backward_death_time<S: Scalar>(
    timeline: &EventTimeline<S>,
    from: SpaceTimePoint<S>,
    floor: S,
) -> Result<Option<S>> {
    Ok(scan(timeline, &[from.vertex], from.time, floor, &mut |_, _, _| true)?.died_at)
}

fn members(mask: &[bool]) -> Vec<u32> {
    mask.iter()
        .enumerate()
        .filter_map(|(v, &b)| b.then_some(v as u32))
        .collect()
}
