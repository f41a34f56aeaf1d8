//! Forward evolution of a configuration through a timeline.
//!
//! Events are applied in increasing time order: a cross on an infected
//! vertex heals it, an arrow `y -> x` with `y` infected and `x` healthy
//! infects `x`. The state at time `t` includes every event at times `<= t`.

use std::fmt::Write as _;

use super::config::Configuration;
use super::timeline::{EventKind, EventTimeline};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flip<S> {
    pub time: S,
    pub vertex: u32,
    pub value: bool,
}

/// Piecewise-constant path: an initial configuration plus ordered flips.
#[derive(Debug, Clone)]
pub struct Trajectory<S: Scalar = f64> {
    window: (S, S),
    initial: Configuration,
    flips: Vec<Flip<S>>,
    final_state: Configuration,
    // CSR index: flips of vertex v are flips[by_vertex[offsets[v]..offsets[v+1]]]
    offsets: Vec<u32>,
    by_vertex: Vec<u32>,
}

impl<S: Scalar> Trajectory<S> {
    pub(crate) fn new(
        window: (S, S),
        initial: Configuration,
        flips: Vec<Flip<S>>,
        final_state: Configuration,
    ) -> Self {
        let n = initial.len();
        let mut offsets = vec![0u32; n + 1];
        for f in &flips {
            offsets[f.vertex as usize + 1] += 1;
        }
        for v in 0..n {
            offsets[v + 1] += offsets[v];
        }
        let mut cursor = offsets.clone();
        let mut by_vertex = vec![0u32; flips.len()];
        for (i, f) in flips.iter().enumerate() {
            let c = &mut cursor[f.vertex as usize];
            by_vertex[*c as usize] = i as u32;
            *c += 1;
        }
        Self {
            window,
            initial,
            flips,
            final_state,
            offsets,
            by_vertex,
        }
    }

    /// Trajectory that never leaves `config` on `window`.
    pub fn constant(window: (S, S), config: Configuration) -> Self {
        Self::new(window, config.clone(), Vec::new(), config)
    }

    pub fn window(&self) -> (S, S) {
        self.window
    }

    pub fn initial(&self) -> &Configuration {
        &self.initial
    }

    pub fn final_state(&self) -> &Configuration {
        &self.final_state
    }

    pub fn flips(&self) -> &[Flip<S>] {
        &self.flips
    }

    pub fn vertex_count(&self) -> usize {
        self.initial.len()
    }

    /// Flip times of `v`, increasing.
    pub fn flips_of(&self, v: u32) -> impl Iterator<Item = &Flip<S>> + '_ {
        let v = v as usize;
        self.by_vertex[self.offsets[v] as usize..self.offsets[v + 1] as usize]
            .iter()
            .map(move |&i| &self.flips[i as usize])
    }

    fn vertex_flip_times(&self, v: u32) -> (usize, usize) {
        let v = v as usize;
        (self.offsets[v] as usize, self.offsets[v + 1] as usize)
    }

    /// Number of flips of `v` at times `<= t`.
    fn flips_upto(&self, v: u32, t: S) -> usize {
        let (lo, hi) = self.vertex_flip_times(v);
        self.by_vertex[lo..hi].partition_point(|&i| self.flips[i as usize].time <= t)
    }

    /// Value of `v` at time `t` (right-continuous).
    pub fn value_at(&self, v: u32, t: S) -> bool {
        let k = self.flips_upto(v, t);
        // flips alternate, so parity decides
        self.initial.get(v) ^ (k % 2 == 1)
    }

    pub fn state_at(&self, t: S) -> Configuration {
        let mut c = self.initial.clone();
        for f in self.flips.iter().take_while(|f| f.time <= t) {
            c.set(f.vertex, f.value);
        }
        c
    }

    /// Whether `v` is 0 throughout `[a, b)`; true for empty intervals.
    pub fn zero_on(&self, v: u32, a: S, b: S) -> bool {
        if !(a < b) {
            return true;
        }
        if self.value_at(v, a) {
            return false;
        }
        let (lo, hi) = self.vertex_flip_times(v);
        let idx = &self.by_vertex[lo..hi];
        let k = idx.partition_point(|&i| self.flips[i as usize].time <= a);
        match idx.get(k) {
            Some(&i) => !(self.flips[i as usize].time < b),
            None => true,
        }
    }

    /// Time of the last flip of `v` to 0 at or before `t`, if any.
    pub fn last_healing_before(&self, v: u32, t: S) -> Option<S> {
        self.flips_of(v)
            .take_while(|f| f.time <= t)
            .filter(|f| !f.value)
            .last()
            .map(|f| f.time)
    }

    /// Time of the first flip of `v` to 1 strictly after `t`, if any.
    pub fn next_infection_after(&self, v: u32, t: S) -> Option<S> {
        self.flips_of(v)
            .find(|f| f.time > t && f.value)
            .map(|f| f.time)
    }

    /// Flip export: one `F <vertex> <time> <bit>` line per flip.
    pub fn to_flip_log(&self) -> String {
        let mut out = String::with_capacity(self.flips.len() * 20 + 64);
        let _ = writeln!(out, "# window {} {} initial {}", self.window.0, self.window.1, self.initial);
        for f in &self.flips {
            let _ = writeln!(out, "F {} {} {}", f.vertex, f.time, f.value as u8);
        }
        out
    }
}

/// Walks several trajectories over the same window jointly and calls `check`
/// on the initial states and after every group of simultaneous flips.
/// Returns `false` as soon as `check` does.
pub fn compare_pathwise<S: Scalar>(
    trajectories: &[&Trajectory<S>],
    mut check: impl FnMut(&[Configuration]) -> bool,
) -> bool {
    let mut states: Vec<Configuration> =
        trajectories.iter().map(|t| t.initial.clone()).collect();
    if !check(&states) {
        return false;
    }
    let mut cursors = vec![0usize; trajectories.len()];
    loop {
        let next = trajectories
            .iter()
            .zip(&cursors)
            .filter_map(|(t, &c)| t.flips.get(c).map(|f| f.time))
            .fold(None, |acc: Option<S>, t| Some(acc.map_or(t, |a| a.min(t))));
        let Some(now) = next else {
            return true;
        };
        for (k, t) in trajectories.iter().enumerate() {
            while let Some(f) = t.flips.get(cursors[k]) {
                if f.time != now {
                    break;
                }
                states[k].set(f.vertex, f.value);
                cursors[k] += 1;
            }
        }
        if !check(&states) {
            return false;
        }
    }
}

/// `lower <= upper` at every time of the window.
pub fn dominated_by<S: Scalar>(lower: &Trajectory<S>, upper: &Trajectory<S>) -> bool {
    compare_pathwise(&[lower, upper], |s| s[0].le(&s[1]))
}

/// Evolves `init` from the window start to the window end.
pub fn evolve<S: Scalar>(timeline: &EventTimeline<S>, init: &Configuration) -> Result<Trajectory<S>> {
    let (a, b) = timeline.window();
    evolve_between(timeline, init, a, b)
}

/// Evolves `init`, taken as the state at `start`, through events in `(start, end]`.
pub fn evolve_between<S: Scalar>(
    timeline: &EventTimeline<S>,
    init: &Configuration,
    start: S,
    end: S,
) -> Result<Trajectory<S>> {
    evolve_filtered(timeline, init, start, end, |_, _, _| true)
}

/// As [`evolve_between`], using only arrows for which `allow(from, to, edge)` holds.
pub fn evolve_filtered<S: Scalar>(
    timeline: &EventTimeline<S>,
    init: &Configuration,
    start: S,
    end: S,
    mut allow: impl FnMut(u32, u32, u32) -> bool,
) -> Result<Trajectory<S>> {
    if init.len() != timeline.vertex_count() || init.topology_id() != timeline.topology_id() {
        return Err(Error::TopologyMismatch(
            "initial configuration and timeline differ in topology".into(),
        ));
    }
    timeline.check_time(start)?;
    timeline.check_time(end)?;
    if end < start {
        return Err(Error::InvalidParameter("evolution end precedes start".into()));
    }
    let mut state = init.clone();
    let mut flips = Vec::new();
    let events = &timeline.events()[timeline.event_range(start, end)];
    for ev in events {
        match ev.kind {
            EventKind::Cross { vertex } => {
                if state.get(vertex) {
                    state.set(vertex, false);
                    flips.push(Flip {
                        time: ev.time,
                        vertex,
                        value: false,
                    });
                }
            }
            EventKind::Arrow { from, to, edge } => {
                if state.get(from) && !state.get(to) && allow(from, to, edge) {
                    state.set(to, true);
                    flips.push(Flip {
                        time: ev.time,
                        vertex: to,
                        value: true,
                    });
                }
            }
        }
    }
    Ok(Trajectory::new((start, end), init.clone(), flips, state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngKey;
    use crate::topology::{BoundaryPolicy, GraphTopology, TopologyKind};

    fn topo(kind: TopologyKind) -> GraphTopology {
        GraphTopology::build(&kind, &BoundaryPolicy::Free).unwrap()
    }

    #[test]
    fn healthy_state_is_absorbing() {
        let t = topo(TopologyKind::lattice(1, 10));
        let tl = EventTimeline::<f64>::generate(&t, 3.0, (0.0, 5.0), RngKey::new(1, 1)).unwrap();
        let tr = evolve(&tl, &Configuration::zeros(&t)).unwrap();
        assert!(tr.flips().is_empty());
        assert!(tr.final_state().is_healthy());
    }

    #[test]
    fn without_arrows_each_site_dies_at_first_cross() {
        let t = topo(TopologyKind::lattice(1, 20));
        let tl = EventTimeline::<f64>::generate(&t, 0.0, (0.0, 3.0), RngKey::new(2, 1)).unwrap();
        let tr = evolve(&tl, &Configuration::ones(&t)).unwrap();
        for v in 0..t.len() as u32 {
            let flips: Vec<_> = tr.flips_of(v).collect();
            match tl.crosses(v).first() {
                Some(&c) => {
                    assert_eq!(flips.len(), 1);
                    assert_eq!(flips[0].time, c);
                    assert!(!flips[0].value);
                }
                None => assert!(flips.is_empty()),
            }
        }
    }

    #[test]
    fn hand_built_infection_and_recovery() {
        let t = topo(TopologyKind::half_line(2));
        // edge 0 is 0 -> 1, edge 1 is 1 -> 0
        let tl = EventTimeline::<f64>::from_events(
            &t,
            1.0,
            (0.0, 4.0),
            vec![vec![2.0], vec![3.0]],
            vec![vec![1.0], vec![2.5]],
        )
        .unwrap();
        let init = Configuration::single(&t, 0).unwrap();
        let tr = evolve(&tl, &init).unwrap();
        let got: Vec<(f64, u32, bool)> = tr.flips().iter().map(|f| (f.time, f.vertex, f.value)).collect();
        assert_eq!(got, vec![(1.0, 1, true), (2.0, 0, false), (2.5, 0, true), (3.0, 1, false)]);
        assert!(tr.value_at(1, 1.0));
        assert!(!tr.value_at(1, 0.999));
        assert!(tr.zero_on(0, 2.0, 2.5));
        assert!(!tr.zero_on(0, 2.0, 2.6));
        assert!(tr.zero_on(1, 0.0, 1.0));
        assert!(tr.zero_on(1, 5.0, 5.0));
        assert_eq!(tr.last_healing_before(0, 2.4), Some(2.0));
        assert_eq!(tr.next_infection_after(0, 2.0), Some(2.5));
        assert_eq!(tr.state_at(2.7).to_string(), "11");
        assert_eq!(
            tr.to_flip_log().lines().skip(1).collect::<Vec<_>>(),
            vec!["F 1 1 1", "F 0 2 0", "F 0 2.5 1", "F 1 3 0"]
        );
    }

    #[test]
    fn restart_reproduces_trajectory() {
        let t = topo(TopologyKind::lattice(2, 3));
        let tl = EventTimeline::<f64>::generate(&t, 1.2, (0.0, 6.0), RngKey::new(9, 3)).unwrap();
        let full = evolve(&tl, &Configuration::ones(&t)).unwrap();
        let first = evolve_between(&tl, &Configuration::ones(&t), 0.0, 2.5).unwrap();
        let second = evolve_between(&tl, first.final_state(), 2.5, 6.0).unwrap();
        let mut joined = first.flips().to_vec();
        joined.extend_from_slice(second.flips());
        assert_eq!(full.flips(), &joined[..]);
        assert_eq!(full.final_state(), second.final_state());
    }

    #[test]
    fn mismatched_inputs_rejected() {
        let a = topo(TopologyKind::half_line(3));
        let b = topo(TopologyKind::half_line(4));
        let tl = EventTimeline::<f64>::generate(&a, 1.0, (0.0, 1.0), RngKey::new(1, 1)).unwrap();
        assert!(matches!(evolve(&tl, &Configuration::ones(&b)), Err(Error::TopologyMismatch(_))));
        assert!(matches!(
            evolve_between(&tl, &Configuration::ones(&a), 0.0, 2.0),
            Err(Error::OutOfWindow { .. })
        ));
    }
}
