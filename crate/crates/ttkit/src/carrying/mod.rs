//! One track carried inside a fibered neighborhood of another.
//!
//! The neighborhood of the base track is a union of foliated rectangles, one
//! per branch. A carried track in general position meets the rectangle over
//! a base branch `b` in strands running along `b`, and each of its switches
//! sits on a tie of its own in the interior of some rectangle. A [`Fiber`]
//! records the picture over `b` as the slices met while traveling from end 0
//! to end 1, each slice listing strands from left to right, with exactly one
//! carried switch between consecutive slices.
//!
//! The strand data is the carrying map. `ν` counts are exact strand counts
//! of this taut picture rather than minima over all smooth maps; for
//! positions built by carried moves and transport the two agree.

mod agree;
mod format;
mod local;
mod segments;
mod transport;

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Result, TtError};
use crate::track_core::{BranchId, HalfBranchRef, Side, Slot, SwitchId, SwitchRecord, TrainTrack, TransverseMeasure};

pub use agree::{agree, normalize_over, shift_equivalent, Agreement};
pub use format::{parse_pos, write_pos};
pub use local::{apply_carried, collapse_carried, pull_shift_carried, shift_carried, split_carried};
pub use transport::{carried_by_split, cutting_connector, transport_through_base_split, Connector, Turn};

/// A piece of a carried branch over a base branch. Traveling along the base
/// branch from end 0 to end 1 runs along carried branch `branch` toward its
/// end `toward`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Strand {
    pub branch: BranchId,
    pub toward: u8,
}

impl Strand {
    pub fn new(branch: BranchId, toward: u8) -> Self {
        Strand { branch, toward }
    }

    /// The same strand seen while traveling the other way.
    pub fn flipped(self) -> Self {
        Strand { branch: self.branch, toward: 1 - self.toward }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventKind {
    /// One strand becomes two.
    Fork,
    /// Two adjacent strands become one.
    Join,
}

/// A carried switch between slice `k` and slice `k + 1` of a fiber. A fork
/// replaces the strand at `at` by the strands at `at` and `at + 1`; a join
/// replaces the strands at `at` and `at + 1` by one strand at `at`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Event {
    pub switch: SwitchId,
    pub kind: EventKind,
    pub at: usize,
}

/// The strands over one base branch.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Fiber {
    pub slices: Vec<Vec<Strand>>,
    pub events: Vec<Event>,
}

pub(crate) fn revflip(s: &[Strand]) -> Vec<Strand> {
    s.iter().rev().map(|x| x.flipped()).collect()
}

impl Fiber {
    /// A fiber without switches.
    pub fn plain(slice: Vec<Strand>) -> Self {
        Fiber { slices: vec![slice], events: Vec::new() }
    }

    pub fn first(&self) -> &[Strand] {
        &self.slices[0]
    }

    pub fn last(&self) -> &[Strand] {
        &self.slices[self.slices.len() - 1]
    }

    /// The slice at base end `end`.
    pub fn end_slice(&self, end: u8) -> &[Strand] {
        if end == 0 {
            self.first()
        } else {
            self.last()
        }
    }

    /// Least strand count over all slices.
    pub fn nu(&self) -> usize {
        self.slices.iter().map(Vec::len).min().unwrap_or(0)
    }

    /// The same picture with its switches in a canonical order. Two fibers
    /// that differ by sliding independent switches past each other have the
    /// same normal form.
    pub fn normal_form(&self) -> Fiber {
        let seg = segments::SegFiber::of(self);
        let order = seg.canonical_order();
        seg.fiber(&seg.replay(&order).expect("a topological order replays"))
    }

    /// The same picture described from end 1 to end 0.
    pub fn reversed(&self) -> Fiber {
        let slices: Vec<Vec<Strand>> = self.slices.iter().rev().map(|s| revflip(s)).collect();
        let n = self.events.len();
        let events = (0..n)
            .rev()
            .map(|k| {
                let ev = self.events[k];
                // `len` is the size of the slice before the event in the new order.
                let len = self.slices[k + 1].len();
                match ev.kind {
                    EventKind::Fork => Event { switch: ev.switch, kind: EventKind::Join, at: len - 2 - ev.at },
                    EventKind::Join => Event { switch: ev.switch, kind: EventKind::Fork, at: len - 1 - ev.at },
                }
            })
            .collect();
        Fiber { slices, events }
    }

    /// `self` followed by `next`; the last slice of `self` must be the first
    /// of `next`.
    pub(crate) fn concat(mut self, next: Fiber) -> Result<Fiber> {
        if self.last() != next.first() {
            return Err(TtError::Invalid("fibers do not match where they are joined".into()));
        }
        self.slices.extend(next.slices.into_iter().skip(1));
        self.events.extend(next.events);
        Ok(self)
    }

    fn check(&self, b: BranchId) -> Result<()> {
        let bad = |msg: String| Err(TtError::Invalid(format!("fiber over {}: {}", b, msg)));
        if self.slices.len() != self.events.len() + 1 {
            return bad("slice and switch counts disagree".into());
        }
        if self.slices.iter().any(Vec::is_empty) {
            return bad("empty slice".into());
        }
        for (k, ev) in self.events.iter().enumerate() {
            let (pre, post) = (&self.slices[k], &self.slices[k + 1]);
            let ok = match ev.kind {
                EventKind::Fork => {
                    ev.at < pre.len()
                        && post.len() == pre.len() + 1
                        && pre[..ev.at] == post[..ev.at]
                        && pre[ev.at + 1..] == post[ev.at + 2..]
                }
                EventKind::Join => {
                    ev.at + 1 < pre.len()
                        && post.len() + 1 == pre.len()
                        && pre[..ev.at] == post[..ev.at]
                        && pre[ev.at + 2..] == post[ev.at + 1..]
                }
            };
            if !ok {
                return bad(format!("switch {} does not match its slices", ev.switch));
            }
        }
        Ok(())
    }
}

/// A position inside a fiber, with a travel direction along the base branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub(crate) struct Cursor {
    pub b: BranchId,
    pub k: usize,
    pub i: usize,
    pub fwd: bool,
}

pub(crate) enum Step {
    Moved(Cursor),
    /// The strand ends at event `.1` of fiber `.0`.
    Hit(BranchId, usize),
}

type Fibers = BTreeMap<BranchId, Fiber>;

fn end_len(fibers: &Fibers, h: HalfBranchRef) -> usize {
    fibers[&h.branch].end_slice(h.end).len()
}

/// Enters the fiber of `h` at its end, traveling away from the switch, at
/// travel index `t`.
fn enter(fibers: &Fibers, h: HalfBranchRef, t: usize) -> Cursor {
    let f = &fibers[&h.branch];
    if h.end == 0 {
        Cursor { b: h.branch, k: 0, i: t, fwd: true }
    } else {
        let k = f.slices.len() - 1;
        Cursor { b: h.branch, k, i: f.slices[k].len() - 1 - t, fwd: false }
    }
}

/// One step along a strand: through the next carried switch of the fiber or
/// across the base switch at the end.
pub(crate) fn step(base: &TrainTrack, fibers: &Fibers, c: Cursor) -> Result<Step> {
    let f = &fibers[&c.b];
    let n = f.slices[c.k].len();
    if c.fwd && c.k < f.events.len() {
        let ev = f.events[c.k];
        let i = match ev.kind {
            EventKind::Fork if c.i == ev.at => return Ok(Step::Hit(c.b, c.k)),
            EventKind::Fork if c.i > ev.at => c.i + 1,
            EventKind::Join if c.i == ev.at || c.i == ev.at + 1 => return Ok(Step::Hit(c.b, c.k)),
            EventKind::Join if c.i > ev.at + 1 => c.i - 1,
            _ => c.i,
        };
        return Ok(Step::Moved(Cursor { k: c.k + 1, i, ..c }));
    }
    if !c.fwd && c.k > 0 {
        let ev = f.events[c.k - 1];
        let i = match ev.kind {
            EventKind::Fork if c.i == ev.at || c.i == ev.at + 1 => return Ok(Step::Hit(c.b, c.k - 1)),
            EventKind::Fork if c.i > ev.at + 1 => c.i - 1,
            EventKind::Join if c.i == ev.at => return Ok(Step::Hit(c.b, c.k - 1)),
            EventKind::Join if c.i > ev.at => c.i + 1,
            _ => c.i,
        };
        return Ok(Step::Moved(Cursor { k: c.k - 1, i, ..c }));
    }
    let (h, t) = if c.fwd { (HalfBranchRef::new(c.b, 1), c.i) } else { (HalfBranchRef::new(c.b, 0), n - 1 - c.i) };
    let loc = base.location(h)?;
    let sw = base.switches()[loc.switch];
    let (na, nb, nl) = (end_len(fibers, sw.small_left), end_len(fibers, sw.small_right), end_len(fibers, sw.large));
    let (out, t2) = match loc.slot {
        Slot::Large if t < na => (sw.small_left, t),
        Slot::Large => (sw.small_right, t - na),
        Slot::SmallLeft => (sw.large, nl - 1 - (na - 1 - t)),
        Slot::SmallRight => (sw.large, nl - 1 - (na + nb - 1 - t)),
    };
    Ok(Step::Moved(enter(fibers, out, t2)))
}

pub(crate) fn travel_index(fibers: &Fibers, c: Cursor) -> usize {
    if c.fwd {
        c.i
    } else {
        fibers[&c.b].slices[c.k].len() - 1 - c.i
    }
}

pub(crate) fn travel_label(fibers: &Fibers, c: Cursor) -> Strand {
    let s = fibers[&c.b].slices[c.k][c.i];
    if c.fwd {
        s
    } else {
        s.flipped()
    }
}

/// The cursor on the carried side of a switch from which half-branch `h`
/// leaves, traveling away from the switch.
fn leaving(fibers: &Fibers, b: BranchId, k: usize, h: HalfBranchRef) -> Option<Cursor> {
    let f = &fibers[&b];
    let ev = f.events[k];
    let (pre, post) = (&f.slices[k], &f.slices[k + 1]);
    let ins: Vec<usize> = match ev.kind {
        EventKind::Fork => vec![ev.at],
        EventKind::Join => vec![ev.at, ev.at + 1],
    };
    for i in ins {
        let s = pre[i];
        if HalfBranchRef::new(s.branch, s.toward) == h {
            return Some(Cursor { b, k, i, fwd: false });
        }
    }
    let outs: Vec<usize> = match ev.kind {
        EventKind::Fork => vec![ev.at, ev.at + 1],
        EventKind::Join => vec![ev.at],
    };
    for i in outs {
        let s = post[i];
        if HalfBranchRef::new(s.branch, 1 - s.toward) == h {
            return Some(Cursor { b, k: k + 1, i, fwd: true });
        }
    }
    None
}

fn switch_of_event(f: &Fiber, k: usize) -> SwitchRecord {
    let ev = f.events[k];
    let (pre, post) = (&f.slices[k], &f.slices[k + 1]);
    let arrive = |s: Strand| HalfBranchRef::new(s.branch, s.toward);
    let depart = |s: Strand| HalfBranchRef::new(s.branch, 1 - s.toward);
    match ev.kind {
        EventKind::Fork => SwitchRecord::new(ev.switch, arrive(pre[ev.at]), depart(post[ev.at]), depart(post[ev.at + 1])),
        // Traveling into a join along its large branch runs against the
        // fiber, so left and right trade places.
        EventKind::Join => SwitchRecord::new(ev.switch, depart(post[ev.at]), arrive(pre[ev.at + 1]), arrive(pre[ev.at])),
    }
}

/// A carried track together with its strand picture over the base.
/// Positions compare equal when their pictures differ only by the order of
/// independent switches within a fiber.
#[derive(Clone, Debug)]
pub struct CarriedPosition {
    base: TrainTrack,
    carried: TrainTrack,
    fibers: Fibers,
    /// Switch id of the carried track -> (base branch, event index).
    events: BTreeMap<SwitchId, (BranchId, usize)>,
}

impl PartialEq for CarriedPosition {
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base
            && self.carried == other.carried
            && self.fibers.len() == other.fibers.len()
            && self.fibers.iter().zip(&other.fibers).all(|((a, f), (b, g))| a == b && (f == g || f.normal_form() == g.normal_form()))
    }
}

impl Eq for CarriedPosition {}

impl CarriedPosition {
    /// Checks the strand picture against the base and derives the carried
    /// track from it.
    pub fn new(base: TrainTrack, fibers: BTreeMap<BranchId, Fiber>) -> Result<Self> {
        if !fibers.keys().copied().eq(base.branches()) {
            return Err(TtError::Invalid("fibers must cover exactly the base branches".into()));
        }
        let mut events = BTreeMap::new();
        let mut records = Vec::new();
        for (&b, f) in &fibers {
            f.check(b)?;
            for (k, ev) in f.events.iter().enumerate() {
                if events.insert(ev.switch, (b, k)).is_some() {
                    return Err(TtError::Invalid(format!("carried switch {} occurs twice", ev.switch)));
                }
                records.push(switch_of_event(f, k));
            }
        }
        for sw in base.switches() {
            let tin = |h: HalfBranchRef| {
                let f = &fibers[&h.branch];
                if h.end == 1 {
                    f.last().to_vec()
                } else {
                    revflip(f.first())
                }
            };
            let tout = |h: HalfBranchRef| {
                let f = &fibers[&h.branch];
                if h.end == 0 {
                    f.first().to_vec()
                } else {
                    revflip(f.last())
                }
            };
            let mut through = tout(sw.small_left);
            through.extend(tout(sw.small_right));
            if tin(sw.large) != through {
                return Err(TtError::Invalid(format!("strands do not continue across base switch {}", sw.id)));
            }
        }
        let bare = TrainTrack::new(records, std::iter::empty())?;
        let mut marks = Vec::new();
        for p in base.punctures() {
            let f = &fibers[&p.branch];
            marks.push(if p.toward == 1 {
                let s = f.first()[0];
                Side::new(s.branch, s.toward)
            } else {
                let s = *f.first().last().unwrap();
                Side::new(s.branch, 1 - s.toward)
            });
        }
        let carried = bare.with_punctures(marks)?;
        let pos = CarriedPosition { base, carried, fibers, events };
        pos.check_routes()?;
        Ok(pos)
    }

    /// Every carried branch runs as one strand from its end 0 to its end 1,
    /// and these strands account for every strand of every slice.
    fn check_routes(&self) -> Result<()> {
        let mut seen = 0usize;
        for b in self.carried.branches() {
            let (cursors, end) = self.route(HalfBranchRef::new(b, 0))?;
            for c in &cursors {
                if travel_label(&self.fibers, *c) != Strand::new(b, 1) {
                    return Err(TtError::Invalid(format!("carried branch {} changes label along its route", b)));
                }
            }
            let loc = self.carried.location(HalfBranchRef::new(b, 1))?;
            if self.carried.switches()[loc.switch].id != end {
                return Err(TtError::Invalid(format!("carried branch {} ends at the wrong switch", b)));
            }
            seen += cursors.len();
        }
        let total: usize = self.fibers.values().flat_map(|f| f.slices.iter()).map(Vec::len).sum();
        if seen != total {
            return Err(TtError::Invalid("some strands belong to no carried branch".into()));
        }
        Ok(())
    }

    pub fn base(&self) -> &TrainTrack {
        &self.base
    }

    pub fn carried(&self) -> &TrainTrack {
        &self.carried
    }

    pub fn fiber(&self, b: BranchId) -> Option<&Fiber> {
        self.fibers.get(&b)
    }

    pub fn fibers(&self) -> &BTreeMap<BranchId, Fiber> {
        &self.fibers
    }

    pub(crate) fn event_location(&self, s: SwitchId) -> Option<(BranchId, usize)> {
        self.events.get(&s).copied()
    }

    /// The cursor leaving the carried switch at half-branch `h`.
    pub(crate) fn start(&self, h: HalfBranchRef) -> Result<Cursor> {
        let sw = self.carried.switch_at(h)?;
        let (b, k) = self.events[&sw.id];
        leaving(&self.fibers, b, k, h).ok_or_else(|| TtError::Invalid(format!("half-branch {} not found at its switch", h)))
    }

    /// The slices crossed by the carried branch of `h`, starting at its end
    /// `h`, with the switch at the far end.
    pub(crate) fn route(&self, h: HalfBranchRef) -> Result<(Vec<Cursor>, SwitchId)> {
        let mut c = self.start(h)?;
        let mut out = vec![c];
        let limit: usize = self.fibers.values().map(|f| f.slices.len()).sum::<usize>() * 4 + 8;
        loop {
            match step(&self.base, &self.fibers, c)? {
                Step::Moved(n) => {
                    c = n;
                    out.push(c);
                    if out.len() > limit {
                        return Err(TtError::Invalid("strand runs in a closed loop".into()));
                    }
                }
                Step::Hit(b, k) => return Ok((out, self.fibers[&b].events[k].switch)),
            }
        }
    }

    pub(crate) fn step(&self, c: Cursor) -> Result<Step> {
        step(&self.base, &self.fibers, c)
    }
}

/// The base carried by itself: one strand over every branch, with each
/// carried switch just inside the large branch of its base switch.
pub fn identity_position(track: &TrainTrack) -> Result<CarriedPosition> {
    let mut fibers = BTreeMap::new();
    for b in track.branches() {
        let mid = vec![Strand::new(b, 1)];
        let mut slices = Vec::new();
        let mut events = Vec::new();
        let sw0 = track.switch_at(HalfBranchRef::new(b, 0))?;
        if sw0.large.branch == b && sw0.large.end == 0 {
            let (a, bb) = (sw0.small_left, sw0.small_right);
            slices.push(vec![Strand::new(bb.branch, bb.end), Strand::new(a.branch, a.end)]);
            events.push(Event { switch: sw0.id, kind: EventKind::Join, at: 0 });
        }
        slices.push(mid);
        let sw1 = track.switch_at(HalfBranchRef::new(b, 1))?;
        if sw1.large.branch == b && sw1.large.end == 1 {
            let (a, bb) = (sw1.small_left, sw1.small_right);
            events.push(Event { switch: sw1.id, kind: EventKind::Fork, at: 0 });
            slices.push(vec![Strand::new(a.branch, 1 - a.end), Strand::new(bb.branch, 1 - bb.end)]);
        }
        fibers.insert(b, Fiber { slices, events });
    }
    CarriedPosition::new(track.clone(), fibers)
}

/// `ν(b)` for every base branch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NuProfile(pub BTreeMap<BranchId, usize>);

impl NuProfile {
    pub fn get(&self, b: BranchId) -> usize {
        self.0.get(&b).copied().unwrap_or(0)
    }

    /// Number of base branches crossed exactly once.
    pub fn ones(&self) -> usize {
        self.0.values().filter(|&&n| n == 1).count()
    }
}

/// Least strand count over the tie positions of each base branch.
pub fn nu_profile(pos: &CarriedPosition) -> NuProfile {
    NuProfile(pos.fibers.iter().map(|(b, f)| (*b, f.nu())).collect())
}

/// Carried branches against base branches. Entry `(s, b)` counts the strands
/// of `s` in the first slice over `b` of least size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionMatrix {
    pub rows: Vec<BranchId>,
    pub cols: Vec<BranchId>,
    pub entries: Vec<Vec<u32>>,
}

impl TransitionMatrix {
    pub fn entry(&self, s: BranchId, b: BranchId) -> u32 {
        match (self.rows.binary_search(&s), self.cols.binary_search(&b)) {
            (Ok(i), Ok(j)) => self.entries[i][j],
            _ => 0,
        }
    }

    /// The base measure induced by a measure on the carried track.
    pub fn push_forward(&self, mu: &TransverseMeasure) -> TransverseMeasure {
        let mut out = BTreeMap::new();
        for (j, b) in self.cols.iter().enumerate() {
            let mut w = BigRational::zero();
            for (i, s) in self.rows.iter().enumerate() {
                if self.entries[i][j] > 0 {
                    w += mu.get(*s) * BigRational::from_integer(self.entries[i][j].into());
                }
            }
            out.insert(*b, w);
        }
        TransverseMeasure { weights: out }
    }
}

pub fn transition_matrix(pos: &CarriedPosition) -> TransitionMatrix {
    let rows: Vec<BranchId> = pos.carried.branches().collect();
    let cols: Vec<BranchId> = pos.base.branches().collect();
    let mut entries = vec![vec![0u32; cols.len()]; rows.len()];
    for (j, b) in cols.iter().enumerate() {
        let f = &pos.fibers[b];
        let n = f.nu();
        let slice = f.slices.iter().find(|s| s.len() == n).unwrap();
        for s in slice {
            let i = rows.binary_search(&s.branch).unwrap();
            entries[i][j] += 1;
        }
    }
    TransitionMatrix { rows, cols, entries }
}
