//! Strand segments of one fiber.
//!
//! A segment is a maximal piece of strand between carried switches inside a
//! fiber. Naming segments lets independent switches be reordered, which is
//! an isotopy of the carried track through positions in general position.

use super::{Event, EventKind, Fiber, Strand};
use crate::error::{Result, TtError};
use crate::track_core::SwitchId;

#[derive(Clone, Debug)]
pub(crate) struct SegEvent {
    pub switch: SwitchId,
    pub kind: EventKind,
    /// Consumed segments, left to right.
    pub ins: Vec<usize>,
    /// Created segments, left to right.
    pub outs: Vec<usize>,
}

impl SegEvent {
    pub fn participants(&self) -> impl Iterator<Item = usize> + '_ {
        self.ins.iter().chain(self.outs.iter()).copied()
    }
}

#[derive(Clone, Debug)]
pub(crate) struct SegFiber {
    pub labels: Vec<Strand>,
    pub init: Vec<usize>,
    pub events: Vec<SegEvent>,
}

/// A replayed event order: slices as segment lists plus the events with
/// their insertion indices.
pub(crate) struct Replay {
    pub slices: Vec<Vec<usize>>,
    pub events: Vec<(usize, usize)>,
}

impl SegFiber {
    pub fn of(f: &Fiber) -> SegFiber {
        let mut labels: Vec<Strand> = f.first().to_vec();
        let init: Vec<usize> = (0..labels.len()).collect();
        let mut cur = init.clone();
        let mut events = Vec::new();
        for (k, ev) in f.events.iter().enumerate() {
            let post = &f.slices[k + 1];
            let fresh = |i: usize, labels: &mut Vec<Strand>| {
                labels.push(post[i]);
                labels.len() - 1
            };
            let (ins, outs) = match ev.kind {
                EventKind::Fork => {
                    let o = vec![fresh(ev.at, &mut labels), fresh(ev.at + 1, &mut labels)];
                    let i = vec![cur[ev.at]];
                    cur.splice(ev.at..ev.at + 1, o.iter().copied());
                    (i, o)
                }
                EventKind::Join => {
                    let o = vec![fresh(ev.at, &mut labels)];
                    let i = vec![cur[ev.at], cur[ev.at + 1]];
                    cur.splice(ev.at..ev.at + 2, o.iter().copied());
                    (i, o)
                }
            };
            events.push(SegEvent { switch: ev.switch, kind: ev.kind, ins, outs });
        }
        SegFiber { labels, init, events }
    }

    /// Replays the events in the given order.
    pub fn replay(&self, order: &[usize]) -> Result<Replay> {
        let mut cur = self.init.clone();
        let mut slices = vec![cur.clone()];
        let mut events = Vec::new();
        for &j in order {
            let ev = &self.events[j];
            let at = cur
                .iter()
                .position(|&s| s == ev.ins[0])
                .ok_or_else(|| TtError::Invalid(format!("switch {} replayed before its input exists", ev.switch)))?;
            if ev.ins.len() == 2 && cur.get(at + 1) != Some(&ev.ins[1]) {
                return Err(TtError::Invalid(format!("inputs of switch {} are not adjacent", ev.switch)));
            }
            cur.splice(at..at + ev.ins.len(), ev.outs.iter().copied());
            slices.push(cur.clone());
            events.push((j, at));
        }
        Ok(Replay { slices, events })
    }

    /// Events in the order that always runs the ready switch with the
    /// smallest id first. Two event orders of one picture give the same
    /// result.
    pub fn canonical_order(&self) -> Vec<usize> {
        let mut producer = vec![usize::MAX; self.labels.len()];
        for (j, ev) in self.events.iter().enumerate() {
            for &o in &ev.outs {
                producer[o] = j;
            }
        }
        let mut done = vec![false; self.events.len()];
        let mut order = Vec::with_capacity(self.events.len());
        while order.len() < self.events.len() {
            let next = (0..self.events.len())
                .filter(|&j| !done[j] && self.events[j].ins.iter().all(|&i| producer[i] == usize::MAX || done[producer[i]]))
                .min_by_key(|&j| self.events[j].switch)
                .expect("segment dependencies are acyclic");
            done[next] = true;
            order.push(next);
        }
        order
    }

    pub fn final_slice(&self) -> Vec<usize> {
        let order: Vec<usize> = (0..self.events.len()).collect();
        self.replay(&order).expect("original order replays").slices.pop().unwrap()
    }

    /// Rebuilds a fiber from a replay.
    pub fn fiber(&self, r: &Replay) -> Fiber {
        Fiber {
            slices: r.slices.iter().map(|s| s.iter().map(|&x| self.labels[x]).collect()).collect(),
            events: r
                .events
                .iter()
                .map(|&(j, at)| Event { switch: self.events[j].switch, kind: self.events[j].kind, at })
                .collect(),
        }
    }

    /// The part of a replay between slices `k0` and `k1` made of segments
    /// satisfying `keep`. Every switch in the range must involve either only
    /// kept segments or none.
    pub fn restrict(&self, r: &Replay, k0: usize, k1: usize, keep: impl Fn(usize) -> bool) -> Result<Fiber> {
        let filt = |s: &[usize]| -> Vec<Strand> { s.iter().filter(|&&x| keep(x)).map(|&x| self.labels[x]).collect() };
        let mut slices = vec![filt(&r.slices[k0])];
        let mut events = Vec::new();
        for k in k0..k1 {
            let (j, at) = r.events[k];
            let ev = &self.events[j];
            let kept = ev.participants().filter(|&x| keep(x)).count();
            if kept == 0 {
                continue;
            }
            if kept != ev.ins.len() + ev.outs.len() {
                return Err(TtError::IncompatibleLocalPicture(format!("switch {} straddles a cut", ev.switch)));
            }
            let at = r.slices[k][..at].iter().filter(|&&x| keep(x)).count();
            events.push(Event { switch: ev.switch, kind: ev.kind, at });
            slices.push(filt(&r.slices[k + 1]));
        }
        Ok(Fiber { slices, events })
    }
}
