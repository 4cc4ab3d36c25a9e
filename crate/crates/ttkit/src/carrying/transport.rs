//! Splits of the base and the carried picture over a large branch.
//!
//! Over a large base branch `e` with `e.0` at `v` (west) and `e.1` at `w`
//! (east), the first slice is the strands from `B_v` (north) followed by
//! those from `A_v` (south), and the last slice is the strands into `A_w`
//! (north) followed by those into `B_w` (south). Every segment of the fiber
//! gets a west class, the set of western groups it can be reached from, and
//! an east class, the set of eastern groups it reaches. A right split keeps
//! the north-west to north-east, south-west to south-east and south-west to
//! north-east connections, so it carries the position exactly when no
//! segment joins the north-west group to the south-east one; a left split is
//! the mirror image.

use std::collections::BTreeMap;

use super::segments::{Replay, SegFiber};
use super::{CarriedPosition, EventKind, Fiber, Strand};
use crate::error::{Result, TtError};
use crate::moves::{self, SplitDirection, SplitMove};
use crate::track_core::{BranchId, BranchKind, HalfBranchRef, SwitchId, SwitchRecord};

const N: u8 = 1;
const S: u8 = 2;
const NS: u8 = 3;

pub(crate) struct Classes {
    pub seg: SegFiber,
    pub west: Vec<u8>,
    pub east: Vec<u8>,
    pub v: SwitchRecord,
    pub w: SwitchRecord,
}

fn large_site(pos: &CarriedPosition, e: BranchId) -> Result<(SwitchRecord, SwitchRecord)> {
    if pos.base.classify_branch(e)? != BranchKind::Large {
        return Err(TtError::NotLargeBranch(e));
    }
    let v = *pos.base.switch_at(HalfBranchRef::new(e, 0))?;
    let w = *pos.base.switch_at(HalfBranchRef::new(e, 1))?;
    Ok((v, w))
}

pub(crate) fn classes(pos: &CarriedPosition, e: BranchId) -> Result<Classes> {
    let (v, w) = large_site(pos, e)?;
    let f = &pos.fibers[&e];
    let seg = SegFiber::of(f);
    let vgap = pos.fibers[&v.small_right.branch].end_slice(v.small_right.end).len();
    let wgap = pos.fibers[&w.small_left.branch].end_slice(w.small_left.end).len();
    let n = seg.labels.len();
    let mut west = vec![0u8; n];
    let mut east = vec![0u8; n];
    for (i, &s) in seg.init.iter().enumerate() {
        west[s] = if i < vgap { N } else { S };
    }
    for ev in &seg.events {
        let c = ev.ins.iter().fold(0, |a, &x| a | west[x]);
        for &o in &ev.outs {
            west[o] = c;
        }
    }
    for (i, &s) in seg.final_slice().iter().enumerate() {
        east[s] = if i < wgap { N } else { S };
    }
    for ev in seg.events.iter().rev() {
        let c = ev.outs.iter().fold(0, |a, &x| a | east[x]);
        for &i in &ev.ins {
            east[i] = c;
        }
    }
    Ok(Classes { seg, west, east, v, w })
}

impl Classes {
    fn carried_by(&self, d: SplitDirection) -> bool {
        let (bad_w, bad_e) = match d {
            SplitDirection::Right => (N, S),
            SplitDirection::Left => (S, N),
        };
        !(0..self.west.len()).any(|s| self.west[s] & bad_w != 0 && self.east[s] & bad_e != 0)
    }
}

/// Whether the split of the base at `e` in direction `d` still carries the
/// carried track in a way compatible with the strand picture.
pub fn carried_by_split(pos: &CarriedPosition, e: BranchId, d: SplitDirection) -> Result<bool> {
    Ok(classes(pos, e)?.carried_by(d))
}

/// Rewrites the position over the split base.
pub fn transport_through_base_split(pos: &CarriedPosition, mv: SplitMove) -> Result<CarriedPosition> {
    let e = mv.at;
    let cl = classes(pos, e)?;
    if !cl.carried_by(mv.direction) {
        return Err(TtError::NotCarriedBySplit(e));
    }
    // Winner classes on the two sides: the west winner is the large branch
    // of the new west switch, the east winner that of the new east switch.
    let (gw, ge) = match mv.direction {
        SplitDirection::Right => (S, N),
        SplitDirection::Left => (N, S),
    };
    // Switches that separate a segment reaching both eastern groups happen
    // first, diagonal switches next, switches merging both western groups
    // last. This respects every dependency, so it is an isotopy.
    let key = |j: usize| -> u8 {
        let ev = &cl.seg.events[j];
        if ev.participants().any(|x| cl.east[x] == NS) {
            0
        } else if ev.participants().any(|x| cl.west[x] == NS) {
            2
        } else if ev.participants().all(|x| cl.west[x] == gw && cl.east[x] == ge) {
            1
        } else {
            0
        }
    };
    let mut order: Vec<usize> = (0..cl.seg.events.len()).collect();
    order.sort_by_key(|&j| key(j));
    let r: Replay = cl.seg.replay(&order)?;
    let cp = order.iter().filter(|&&j| key(j) == 0).count();
    let cq = cp + order.iter().filter(|&&j| key(j) == 1).count();
    let last = order.len();

    let west_half = |c: u8| if c == N { cl.v.small_right } else { cl.v.small_left };
    let east_half = |c: u8| if c == N { cl.w.small_left } else { cl.w.small_right };
    let (wl, el) = (NS ^ gw, NS ^ ge);
    let (west, east) = (&cl.west, &cl.east);
    let exts_w = [
        (west_half(gw), cl.seg.restrict(&r, 0, cp, |x| west[x] == gw)?),
        (west_half(wl), cl.seg.restrict(&r, 0, cq, |x| west[x] == wl)?),
    ];
    let exts_e = [
        (east_half(ge), cl.seg.restrict(&r, cq, last, |x| east[x] == ge)?),
        (east_half(el), cl.seg.restrict(&r, cp, last, |x| east[x] == el)?),
    ];
    let diag = cl.seg.restrict(&r, cp, cq, |x| west[x] == gw && east[x] == ge)?;
    if diag.first().is_empty() {
        return Err(TtError::IncompatibleLocalPicture(format!("nothing runs along the diagonal at {}", e)));
    }

    let mut fibers: BTreeMap<BranchId, Fiber> = pos.fibers.clone();
    for (h, ext) in exts_w {
        let old = fibers.remove(&h.branch).unwrap();
        let new = if h.end == 1 { old.concat(ext)? } else { ext.reversed().concat(old)? };
        fibers.insert(h.branch, new);
    }
    for (h, ext) in exts_e {
        let old = fibers.remove(&h.branch).unwrap();
        let new = if h.end == 0 { ext.concat(old)? } else { old.concat(ext.reversed())? };
        fibers.insert(h.branch, new);
    }
    fibers.insert(e, diag);
    let base = moves::split(&pos.base, mv)?.track;
    let out = CarriedPosition::new(base, fibers)?;
    if out.carried != pos.carried {
        return Err(TtError::Invalid("transport changed the carried track".into()));
    }
    Ok(out)
}

/// How a cutting connector passes an interior switch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Turn {
    /// The connector arrives along the large branch.
    pub outgoing: bool,
    /// The branch off the connector lies to its right.
    pub right: bool,
}

/// The trainpath of the carried track over a large base branch joining the
/// two cutting-arc switches, oriented from west to east.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Connector {
    /// Branches in order, each with the end it is traversed toward.
    pub branches: Vec<Strand>,
    /// The `m + 1` switches met, endpoints included.
    pub switches: Vec<SwitchId>,
    /// The interior switches.
    pub turns: Vec<Turn>,
}

/// `None` when a split at `e` carries the position; otherwise the unique
/// connector made of the segments reaching both groups on both sides.
pub fn cutting_connector(pos: &CarriedPosition, e: BranchId) -> Result<Option<Connector>> {
    let cl = classes(pos, e)?;
    if cl.carried_by(SplitDirection::Right) || cl.carried_by(SplitDirection::Left) {
        return Ok(None);
    }
    let full = |x: usize| cl.west[x] == NS && cl.east[x] == NS;
    let nfull = (0..cl.west.len()).filter(|&x| full(x)).count();
    let created: BTreeMap<usize, usize> =
        cl.seg.events.iter().enumerate().flat_map(|(j, ev)| ev.outs.iter().map(move |&o| (o, j))).collect();
    let consumed: BTreeMap<usize, usize> =
        cl.seg.events.iter().enumerate().flat_map(|(j, ev)| ev.ins.iter().map(move |&i| (i, j))).collect();
    let starts: Vec<usize> = (0..cl.west.len())
        .filter(|&x| full(x) && created.get(&x).is_some_and(|&j| !cl.seg.events[j].ins.iter().any(|&i| full(i))))
        .collect();
    let bad = |m: &str| TtError::IncompatibleLocalPicture(format!("connector over {}: {}", e, m));
    if starts.len() != 1 {
        return Err(bad("no unique start"));
    }
    let mut segs = vec![starts[0]];
    let mut switches = vec![cl.seg.events[created[&starts[0]]].switch];
    let mut turns = Vec::new();
    loop {
        let cur = *segs.last().unwrap();
        let j = *consumed.get(&cur).ok_or_else(|| bad("runs off the fiber"))?;
        let ev = &cl.seg.events[j];
        switches.push(ev.switch);
        let nexts: Vec<usize> = ev.outs.iter().copied().filter(|&o| full(o)).collect();
        match nexts.len() {
            0 => break,
            1 => {
                let right = match ev.kind {
                    EventKind::Fork => ev.outs[0] == nexts[0],
                    EventKind::Join => ev.ins[0] == cur,
                };
                turns.push(Turn { outgoing: ev.kind == EventKind::Fork, right });
                segs.push(nexts[0]);
            }
            _ => return Err(bad("branches")),
        }
    }
    if segs.len() != nfull {
        return Err(bad("not connected"));
    }
    Ok(Some(Connector { branches: segs.iter().map(|&s| cl.seg.labels[s]).collect(), switches, turns }))
}
