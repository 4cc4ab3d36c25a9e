//! Moves of the carried track with the base fixed.
//!
//! Each move rewrites the strands along the route of one carried branch and
//! re-places the two switches at its ends. Routes are read in their travel
//! frame, running from the branch's end 0 (split, collapse) or from its small
//! end (shift); labels in that frame name the end a strand is heading for.
//! Shifts and collapses need neighboring strands to run beside the route;
//! when switches of other strands get in the way inside a single fiber they
//! are first slid out of the stretch, which is an isotopy.

use std::collections::BTreeMap;

use super::segments::SegFiber;
use super::{revflip, travel_index, travel_label, CarriedPosition, Cursor, Event, EventKind, Fiber, Step, Strand};
use crate::error::{Result, TtError};
use crate::moves::{self, Move, SplitDirection, SplitMove, SplitSite};
use crate::track_core::{BranchId, HalfBranchRef, Slot, SwitchId};

type Fibers = BTreeMap<BranchId, Fiber>;

/// Arriving at the end `h` names that end.
fn arriving(h: HalfBranchRef) -> Strand {
    Strand::new(h.branch, h.end)
}

/// Leaving from the end `h` heads for the other end.
fn leaving(h: HalfBranchRef) -> Strand {
    Strand::new(h.branch, 1 - h.end)
}

#[derive(Default)]
struct Edits {
    blocks: BTreeMap<(BranchId, usize), Vec<(usize, usize, Vec<Strand>)>>,
}

/// Where each rewritten block landed: `(fiber, slice, old start)` to the
/// new start.
struct Landing(BTreeMap<(BranchId, usize, usize), usize>);

impl Landing {
    /// The new travel index of the block that replaced `len` strands from
    /// travel index `t` at cursor `c` with `new_len` strands.
    fn travel(&self, old: &Fibers, new: &Fibers, c: Cursor, t: usize, len: usize, new_len: usize) -> usize {
        let n = old[&c.b].slices[c.k].len();
        let start = if c.fwd { t } else { n - t - len };
        let ns = self.0[&(c.b, c.k, start)];
        if c.fwd {
            ns
        } else {
            new[&c.b].slices[c.k].len() - ns - new_len
        }
    }
}

impl Edits {
    /// Replaces `len` strands from travel index `t` of the cursor's slice by
    /// `with`, given in travel order and travel labels.
    fn replace(&mut self, fibers: &Fibers, c: Cursor, t: usize, len: usize, with: Vec<Strand>) {
        let n = fibers[&c.b].slices[c.k].len();
        let (start, strands) = if c.fwd { (t, with) } else { (n - t - len, revflip(&with)) };
        self.blocks.entry((c.b, c.k)).or_default().push((start, len, strands));
    }

    /// Applies the rewrites and reindexes every switch except `fixed`.
    fn apply(self, fibers: &mut Fibers, fixed: &[SwitchId]) -> Result<Landing> {
        let mut landing = BTreeMap::new();
        for ((b, k), mut blocks) in self.blocks {
            blocks.sort_by_key(|x| x.0);
            let f = fibers.get_mut(&b).unwrap();
            let old = &f.slices[k];
            let mut new = Vec::with_capacity(old.len() + 2 * blocks.len());
            let mut map = vec![usize::MAX; old.len()];
            let mut i = 0;
            for (start, len, with) in blocks {
                if start < i {
                    return Err(TtError::IncompatibleLocalPicture("overlapping rewrites in one slice".into()));
                }
                while i < start {
                    map[i] = new.len();
                    new.push(old[i]);
                    i += 1;
                }
                landing.insert((b, k, start), new.len());
                new.extend(with);
                i += len;
            }
            while i < old.len() {
                map[i] = new.len();
                new.push(old[i]);
                i += 1;
            }
            f.slices[k] = new;
            if let Some(ev) = f.events.get_mut(k) {
                if !fixed.contains(&ev.switch) {
                    let m = map[ev.at];
                    if m == usize::MAX {
                        return Err(TtError::IncompatibleLocalPicture(format!("switch {} sits on a rewritten strand", ev.switch)));
                    }
                    ev.at = m;
                }
            }
        }
        Ok(Landing(landing))
    }
}

/// Re-places the switch at `(b, k)`, described in a travel frame: `fwd` is
/// the travel direction and `at` indexes the slice met before the switch.
fn place(fibers: &mut Fibers, (b, k): (BranchId, usize), switch: SwitchId, kind: EventKind, at: usize, fwd: bool) {
    let f = fibers.get_mut(&b).unwrap();
    let ev = if fwd {
        Event { switch, kind, at }
    } else {
        let n = f.slices[k + 1].len();
        match kind {
            EventKind::Fork => Event { switch, kind: EventKind::Join, at: n - 1 - at },
            EventKind::Join => Event { switch, kind: EventKind::Fork, at: n - 2 - at },
        }
    };
    f.events[k] = ev;
}

fn finish(pos: &CarriedPosition, fibers: Fibers, m: Move) -> Result<CarriedPosition> {
    let out = CarriedPosition::new(pos.base.clone(), fibers)?;
    let expect = moves::apply(&pos.carried, m)?.track;
    if out.carried != expect {
        return Err(TtError::Invalid(format!("carried {} disagrees with the track move", m)));
    }
    Ok(out)
}

/// Whether a strand starting at `c` runs beside `route` on travel side
/// `right`, optionally ending at switch `end` together with the route.
fn runs_beside(pos: &CarriedPosition, route: &[Cursor], mut c: Cursor, right: bool, end: Option<SwitchId>) -> Result<bool> {
    for (j, r) in route.iter().enumerate() {
        let i = if right == r.fwd { r.i + 1 } else { r.i.wrapping_sub(1) };
        if c != (Cursor { i, ..*r }) {
            return Ok(false);
        }
        let s = pos.step(c)?;
        if j + 1 < route.len() {
            match s {
                Step::Moved(n) => c = n,
                Step::Hit(..) => return Ok(false),
            }
        } else if let Some(end) = end {
            match s {
                Step::Hit(b, k) if pos.fibers[&b].events[k].switch == end => {}
                _ => return Ok(false),
            }
        }
    }
    Ok(true)
}

/// The cursor beside `r` on travel side `right`, if the slice has one.
fn beside(pos: &CarriedPosition, r: Cursor, right: bool) -> Option<Cursor> {
    let n = pos.fibers[&r.b].slices[r.k].len();
    let i = if right == r.fwd { r.i + 1 } else { r.i.checked_sub(1)? };
    (i < n).then_some(Cursor { i, ..r })
}

/// Slides the switches of strands on travel side `right` of a route that
/// stays in one fiber past the route's end (`late`) or before its start.
/// Returns `None` when nothing moves.
fn clear_side(
    pos: &CarriedPosition,
    route: &[Cursor],
    start: SwitchId,
    end: SwitchId,
    right: bool,
    late: bool,
) -> Result<Option<CarriedPosition>> {
    let b = route[0].b;
    let (Some((bs, ks)), Some((be, ke))) = (pos.event_location(start), pos.event_location(end)) else {
        return Ok(None);
    };
    if route.iter().any(|c| c.b != b) || bs != b || be != b {
        return Ok(None);
    }
    let fwd = route[0].fwd;
    let (lo, hi) = (ks.min(ke), ks.max(ke));
    let f = &pos.fibers[&b];
    let canon_right = right == fwd;
    let after = late == fwd;
    let mut moved = Vec::new();
    let mut stay = Vec::new();
    for j in lo + 1..hi {
        let r = route.iter().find(|c| c.k == j).expect("route crosses every slice between its ends");
        let is_right = f.events[j].at > r.i;
        if is_right == canon_right {
            moved.push(j);
        } else {
            stay.push(j);
        }
    }
    if moved.is_empty() {
        return Ok(None);
    }
    let mut order: Vec<usize> = (0..lo).collect();
    if !after {
        order.extend(&moved);
    }
    order.push(lo);
    order.extend(&stay);
    order.push(hi);
    if after {
        order.extend(&moved);
    }
    order.extend(hi + 1..f.events.len());
    let seg = SegFiber::of(f);
    let r = seg.replay(&order)?;
    let mut fibers = pos.fibers.clone();
    fibers.insert(b, seg.fiber(&r));
    let out = CarriedPosition::new(pos.base.clone(), fibers)?;
    debug_assert_eq!(out.carried, pos.carried);
    Ok(Some(out))
}

/// Split of the carried track at its large branch `at`. The new strands
/// run beside the route of `at`, so the rewrite always exists.
pub fn split_carried(pos: &CarriedPosition, at: BranchId, d: SplitDirection) -> Result<CarriedPosition> {
    let site = SplitSite::of(&pos.carried, at)?;
    let (v, w) = (site.v, site.w);
    let (route, y) = pos.route(HalfBranchRef::new(at, 0))?;
    let (first, last) = (route[0], *route.last().unwrap());
    let block = match d {
        SplitDirection::Right => vec![arriving(v.small_right), Strand::new(at, 1), leaving(w.small_right)],
        SplitDirection::Left => vec![leaving(w.small_left), Strand::new(at, 1), arriving(v.small_left)],
    };
    let mut edits = Edits::default();
    for c in &route {
        edits.replace(&pos.fibers, *c, travel_index(&pos.fibers, *c), 1, block.clone());
    }
    let mut fibers = pos.fibers.clone();
    let land = edits.apply(&mut fibers, &[v.id, y])?;
    let t0 = land.travel(&pos.fibers, &fibers, first, travel_index(&pos.fibers, first), 1, 3);
    let tl = land.travel(&pos.fibers, &fibers, last, travel_index(&pos.fibers, last), 1, 3);
    let (xa, ya) = match d {
        SplitDirection::Right => (t0 + 1, tl),
        SplitDirection::Left => (t0, tl + 1),
    };
    place(&mut fibers, pos.events[&v.id], v.id, EventKind::Fork, xa, first.fwd);
    place(&mut fibers, pos.events[&y], y, EventKind::Join, ya, last.fwd);
    finish(pos, fibers, Move::Split(SplitMove::new(at, d)))
}

/// Shift along the mixed carried branch `b`.
pub fn shift_carried(pos: &CarriedPosition, b: BranchId) -> Result<CarriedPosition> {
    let (v, w, _, bw) = moves::shift_site(&pos.carried, b)?;
    // The other small branch at `w` must run beside `b` up to `v`; it lies
    // right of `b` when `b` is the left small branch.
    let right = w.small_left == bw;
    let comp = if right { w.small_right } else { w.small_left };
    let mut cur = pos.clone();
    for attempt in 0..2 {
        let (route, _) = cur.route(bw)?;
        if runs_beside(&cur, &route, cur.start(comp)?, right, None)? {
            break;
        }
        let cleared = if attempt == 0 { clear_side(&cur, &route, w.id, v.id, right, true)? } else { None };
        match cleared {
            Some(p) => cur = p,
            None => {
                return Err(TtError::IncompatibleLocalPicture(format!(
                    "branch {} does not run beside {} up to the far switch",
                    comp.branch, b
                )))
            }
        }
    }
    let (route, _) = cur.route(bw)?;
    let (first, last) = (route[0], *route.last().unwrap());
    let lb = Strand::new(b, 1 - bw.end);
    let block_at = |c: Cursor| travel_index(&cur.fibers, c) - usize::from(!right);
    let mut edits = Edits::default();
    for c in &route {
        let with = if right { vec![leaving(v.small_left), lb] } else { vec![lb, leaving(v.small_right)] };
        edits.replace(&cur.fibers, *c, block_at(*c), 2, with);
    }
    let mut fibers = cur.fibers.clone();
    let land = edits.apply(&mut fibers, &[v.id, w.id])?;
    let s0 = land.travel(&cur.fibers, &fibers, first, block_at(first), 2, 2);
    let sl = land.travel(&cur.fibers, &fibers, last, block_at(last), 2, 2);
    let (wa, va) = if right { (s0, sl + 1) } else { (s0, sl) };
    place(&mut fibers, cur.events[&w.id], w.id, EventKind::Fork, wa, first.fwd);
    place(&mut fibers, cur.events[&v.id], v.id, EventKind::Fork, va, last.fwd);
    finish(&cur, fibers, Move::Shift(b))
}

/// Shift along the mixed carried branch `b` realized by pulling the switch
/// at its large end back to the switch at its small end. The two small
/// branches at the large end then run side by side along the old route of
/// `b`, so this always exists but raises `nu` along that route by one.
pub fn pull_shift_carried(pos: &CarriedPosition, b: BranchId) -> Result<CarriedPosition> {
    let (v, w, _, bw) = moves::shift_site(&pos.carried, b)?;
    let right = w.small_left == bw;
    let (route, _) = pos.route(bw)?;
    let (first, last) = (route[0], *route.last().unwrap());
    let pair = vec![leaving(v.small_left), leaving(v.small_right)];
    let mut edits = Edits::default();
    for c in &route {
        edits.replace(&pos.fibers, *c, travel_index(&pos.fibers, *c), 1, pair.clone());
    }
    let mut fibers = pos.fibers.clone();
    let land = edits.apply(&mut fibers, &[v.id, w.id])?;
    let s0 = land.travel(&pos.fibers, &fibers, first, travel_index(&pos.fibers, first), 1, 2);
    let _ = last;

    // The switch at the large end now joins nothing: drop it.
    let (fv, kv) = pos.events[&v.id];
    let f = fibers.get_mut(&fv).unwrap();
    if f.slices[kv] != f.slices[kv + 1] {
        return Err(TtError::Invalid(format!("strands around switch {} disagree after the pull", v.id)));
    }
    f.events.remove(kv);
    f.slices.remove(kv + 1);

    // Both switches now sit where `w` was, `w` first in travel order.
    let (fw, kw) = (pos.events[&w.id].0, fibers[&pos.events[&w.id].0].events.iter().position(|e| e.switch == w.id).unwrap());
    let f = fibers.get_mut(&fw).unwrap();
    let post: Vec<Strand> = if first.fwd { f.slices[kw + 1].clone() } else { revflip(&f.slices[kw]) };
    let lb = leaving(bw);
    let (cut, wa, va) = if right { (s0 + 1, s0, s0 + 1) } else { (s0 - 1, s0 - 1, s0 - 1) };
    let mut mid = post.clone();
    mid.splice(cut..cut + 2, [lb]);
    let fork = |at: usize, before: usize| {
        if first.fwd {
            (EventKind::Fork, at)
        } else {
            (EventKind::Join, before - 1 - at)
        }
    };
    let pre_len = post.len() - 2;
    let (kw1, aw) = fork(wa, pre_len);
    let (kv1, av) = fork(va, mid.len());
    let ew = Event { switch: w.id, kind: kw1, at: aw };
    let ev = Event { switch: v.id, kind: kv1, at: av };
    if first.fwd {
        f.events.splice(kw..kw + 1, [ew, ev]);
        f.slices.insert(kw + 1, mid);
    } else {
        f.events.splice(kw..kw + 1, [ev, ew]);
        f.slices.insert(kw + 1, revflip(&mid));
    }
    finish(pos, fibers, Move::Shift(b))
}

/// Collapse of the carried diagonal `d` of a split in direction `dir`.
pub fn collapse_carried(pos: &CarriedPosition, d: BranchId, dir: SplitDirection) -> Result<CarriedPosition> {
    if !moves::is_collapsible(&pos.carried, d, dir) {
        let label = if dir == SplitDirection::Right { "right" } else { "left" };
        return Err(TtError::NotCollapsible(d, label));
    }
    let p = *pos.carried.switch_at(HalfBranchRef::new(d, 0))?;
    let q = *pos.carried.switch_at(HalfBranchRef::new(d, 1))?;
    let slot = if dir == SplitDirection::Right { Slot::SmallRight } else { Slot::SmallLeft };
    // One neighbor leaves at `p` and runs beside `d` past `q`; the other
    // runs beside `d` from before `p` and ends at `q`.
    let (from_p, to_q) = (p.slot(slot), q.slot(slot));
    let from_p_right = dir == SplitDirection::Right;
    let mut cur = pos.clone();
    for attempt in 0..3 {
        let (route, _) = cur.route(HalfBranchRef::new(d, 0))?;
        let ok_p = runs_beside(&cur, &route, cur.start(from_p)?, from_p_right, None)?;
        let ok_q = match beside(&cur, route[0], !from_p_right) {
            Some(c) if travel_label(&cur.fibers, c) == arriving(to_q) => {
                runs_beside(&cur, &route, c, !from_p_right, Some(q.id))?
            }
            _ => false,
        };
        if ok_p && ok_q {
            break;
        }
        let cleared = match (attempt, ok_p) {
            (2, _) => None,
            (_, false) => clear_side(&cur, &route, p.id, q.id, from_p_right, true)?,
            (_, true) => clear_side(&cur, &route, p.id, q.id, !from_p_right, false)?,
        };
        match cleared {
            Some(np) => cur = np,
            None => {
                return Err(TtError::IncompatibleLocalPicture(format!(
                    "the neighbors of {} do not run beside it between its switches",
                    d
                )))
            }
        }
    }
    let (route, _) = cur.route(HalfBranchRef::new(d, 0))?;
    let (first, last) = (route[0], *route.last().unwrap());
    let block_at = |c: Cursor| travel_index(&cur.fibers, c) - 1;
    let mut edits = Edits::default();
    for c in &route {
        edits.replace(&cur.fibers, *c, block_at(*c), 3, vec![Strand::new(d, 1)]);
    }
    let mut fibers = cur.fibers.clone();
    let land = edits.apply(&mut fibers, &[p.id, q.id])?;
    let s0 = land.travel(&cur.fibers, &fibers, first, block_at(first), 3, 1);
    let sl = land.travel(&cur.fibers, &fibers, last, block_at(last), 3, 1);
    place(&mut fibers, cur.events[&p.id], p.id, EventKind::Join, s0, first.fwd);
    place(&mut fibers, cur.events[&q.id], q.id, EventKind::Fork, sl, last.fwd);
    finish(&cur, fibers, Move::Collapse(d, dir))
}

/// Any carried move.
pub fn apply_carried(pos: &CarriedPosition, m: Move) -> Result<CarriedPosition> {
    match m {
        Move::Split(s) => split_carried(pos, s.at, s.direction),
        Move::Shift(b) => shift_carried(pos, b),
        Move::Collapse(d, dir) => collapse_carried(pos, d, dir),
    }
}
