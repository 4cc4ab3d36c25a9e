//! Split, shift and collapse.
//!
//! Local picture for a large branch `e` with `e.0` at switch `v` and `e.1` at
//! switch `w`: draw `v` on the west. Then the small half-branches are
//! `B_v` (north-west), `A_v` (south-west), `A_w` (north-east) and `B_w`
//! (south-east). With the usual letters `a = A_w`, `b = B_v`, `c = A_v`,
//! `d = B_w`, a right split makes `a` and `c` the winners and a left split
//! makes `b` and `d` the winners. The split branch survives as the diagonal
//! and keeps its identifier, as do all other branches and both switches, so
//! every correspondence returned here is the identity.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::Signed;

use crate::carrying::CarriedPosition;
use crate::error::{Result, TtError};
use crate::track_core::{BranchId, BranchKind, HalfBranchRef, Slot, SwitchRecord, TrainTrack, TransverseMeasure};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SplitDirection {
    Right,
    Left,
}

impl SplitDirection {
    pub fn flip(self) -> Self {
        match self {
            SplitDirection::Right => SplitDirection::Left,
            SplitDirection::Left => SplitDirection::Right,
        }
    }

    pub fn letter(self) -> &'static str {
        match self {
            SplitDirection::Right => "R",
            SplitDirection::Left => "L",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SplitMove {
    pub at: BranchId,
    pub direction: SplitDirection,
}

impl SplitMove {
    pub fn new(at: BranchId, direction: SplitDirection) -> Self {
        SplitMove { at, direction }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Move {
    Split(SplitMove),
    Shift(BranchId),
    Collapse(BranchId, SplitDirection),
}

impl Move {
    /// The move undoing this one, valid on the track this one produces.
    pub fn inverse(self) -> Move {
        match self {
            Move::Split(s) => Move::Collapse(s.at, s.direction),
            Move::Shift(b) => Move::Shift(b),
            Move::Collapse(b, d) => Move::Split(SplitMove::new(b, d)),
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::Split(s) => write!(f, "split {} {}", s.at, s.direction.letter()),
            Move::Shift(b) => write!(f, "shift {}", b),
            Move::Collapse(b, d) => write!(f, "collapse {} {}", b, d.letter()),
        }
    }
}

fn parse_dir(s: &str) -> std::result::Result<SplitDirection, String> {
    match s {
        "R" => Ok(SplitDirection::Right),
        "L" => Ok(SplitDirection::Left),
        _ => Err(format!("direction must be R or L, found {:?}", s)),
    }
}

impl FromStr for Move {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let t: Vec<&str> = s.split_whitespace().collect();
        let branch = |x: &str| x.parse::<BranchId>().map_err(|_| format!("bad branch {:?}", x));
        match t.as_slice() {
            ["split", b, d] => Ok(Move::Split(SplitMove::new(branch(b)?, parse_dir(d)?))),
            ["shift", b] => Ok(Move::Shift(branch(b)?)),
            ["collapse", b, d] => Ok(Move::Collapse(branch(b)?, parse_dir(d)?)),
            _ => Err(format!("unrecognized move {:?}", s)),
        }
    }
}

/// Parses a move word, one move per line, `#` comments allowed.
pub fn parse_word(text: &str) -> std::result::Result<Vec<Move>, String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::parse)
        .collect()
}

pub fn write_word(word: &[Move]) -> String {
    word.iter().map(|m| format!("{}\n", m)).collect()
}

/// A new track plus the branch correspondence old id -> new id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MoveOutcome {
    pub track: TrainTrack,
    pub correspondence: BTreeMap<BranchId, BranchId>,
}

impl MoveOutcome {
    fn identity(track: TrainTrack) -> Self {
        let correspondence = track.branches().map(|b| (b, b)).collect();
        MoveOutcome { track, correspondence }
    }
}

/// The four neighbors of a large branch, as half-branch refs.
#[derive(Clone, Copy, Debug)]
pub struct SplitSite {
    pub v: SwitchRecord,
    pub w: SwitchRecord,
}

impl SplitSite {
    pub fn of(track: &TrainTrack, e: BranchId) -> Result<Self> {
        if track.classify_branch(e)? != BranchKind::Large {
            return Err(TtError::NotLargeBranch(e));
        }
        let v = *track.switch_at(HalfBranchRef::new(e, 0))?;
        let w = *track.switch_at(HalfBranchRef::new(e, 1))?;
        Ok(SplitSite { v, w })
    }

    /// Conventional letters `(a, b, c, d) = (A_w, B_v, A_v, B_w)`.
    pub fn abcd(&self) -> [HalfBranchRef; 4] {
        [self.w.small_left, self.v.small_right, self.v.small_left, self.w.small_right]
    }

    /// Winners of a split in the given direction.
    pub fn winners(&self, d: SplitDirection) -> [HalfBranchRef; 2] {
        let [a, b, c, dd] = self.abcd();
        match d {
            SplitDirection::Right => [a, c],
            SplitDirection::Left => [b, dd],
        }
    }
}

/// Rebuilds a track after replacing some switch records, carrying each
/// puncture mark along a side of a branch other than `moved`.
fn rebuild(track: &TrainTrack, replaced: &[SwitchRecord], moved: BranchId) -> Result<TrainTrack> {
    let mut sws: Vec<SwitchRecord> = track.switches().to_vec();
    for r in replaced {
        let i = sws.iter().position(|s| s.id == r.id).expect("replaced switch exists");
        sws[i] = *r;
    }
    let bare = TrainTrack::new(sws, std::iter::empty())?;
    if track.punctures().is_empty() {
        return Ok(bare);
    }
    let mut witness = Vec::new();
    for reg in track.regions().into_iter().filter(|r| r.punctured) {
        let s = reg
            .sides
            .iter()
            .find(|s| s.branch != moved)
            .copied()
            .ok_or_else(|| TtError::IncompatibleLocalPicture("punctured region bounded by the moved branch alone".into()))?;
        witness.push(s);
    }
    bare.with_punctures(witness)
}

/// Split at a large branch.
pub fn split(track: &TrainTrack, mv: SplitMove) -> Result<MoveOutcome> {
    let site = SplitSite::of(track, mv.at)?;
    let (v, w) = (site.v, site.w);
    let e = mv.at;
    let (nv, nw) = match mv.direction {
        SplitDirection::Right => (
            SwitchRecord::new(v.id, v.small_left, HalfBranchRef::new(e, 0), w.small_right),
            SwitchRecord::new(w.id, w.small_left, HalfBranchRef::new(e, 1), v.small_right),
        ),
        SplitDirection::Left => (
            SwitchRecord::new(v.id, v.small_right, w.small_left, HalfBranchRef::new(e, 0)),
            SwitchRecord::new(w.id, w.small_right, v.small_left, HalfBranchRef::new(e, 1)),
        ),
    };
    Ok(MoveOutcome::identity(rebuild(track, &[nv, nw], e)?))
}

/// The two switches at the ends of a collapsible diagonal, as `(p, q)` with
/// `d.0` at `p`.
fn collapse_site(track: &TrainTrack, d: BranchId, dir: SplitDirection) -> Result<(SwitchRecord, SwitchRecord)> {
    let l0 = track.location(HalfBranchRef::new(d, 0))?;
    let l1 = track.location(HalfBranchRef::new(d, 1))?;
    let want = match dir {
        SplitDirection::Right => Slot::SmallLeft,
        SplitDirection::Left => Slot::SmallRight,
    };
    let label = match dir {
        SplitDirection::Right => "right",
        SplitDirection::Left => "left",
    };
    if l0.slot != want || l1.slot != want || l0.switch == l1.switch {
        return Err(TtError::NotCollapsible(d, label));
    }
    Ok((track.switches()[l0.switch], track.switches()[l1.switch]))
}

/// True when `d` is the diagonal of a split in direction `dir`.
pub fn is_collapsible(track: &TrainTrack, d: BranchId, dir: SplitDirection) -> bool {
    collapse_site(track, d, dir).is_ok()
}

/// Inverse of a split: `d` must be the diagonal of a split in direction `dir`.
pub fn collapse(track: &TrainTrack, d: BranchId, dir: SplitDirection) -> Result<MoveOutcome> {
    let (p, q) = collapse_site(track, d, dir)?;
    let (nv, nw) = match dir {
        SplitDirection::Right => (
            SwitchRecord::new(p.id, HalfBranchRef::new(d, 0), p.large, q.small_right),
            SwitchRecord::new(q.id, HalfBranchRef::new(d, 1), q.large, p.small_right),
        ),
        SplitDirection::Left => (
            SwitchRecord::new(p.id, HalfBranchRef::new(d, 0), q.small_left, p.large),
            SwitchRecord::new(q.id, HalfBranchRef::new(d, 1), p.small_left, q.large),
        ),
    };
    Ok(MoveOutcome::identity(rebuild(track, &[nv, nw], d)?))
}

/// The switches of a mixed branch: `(v, w)` with the branch large at `v`.
pub fn shift_site(track: &TrainTrack, b: BranchId) -> Result<(SwitchRecord, SwitchRecord, HalfBranchRef, HalfBranchRef)> {
    if track.classify_branch(b)? != BranchKind::Mixed {
        return Err(TtError::NotMixedBranch(b));
    }
    let l0 = track.location(HalfBranchRef::new(b, 0))?;
    let (bv, bw) = if l0.slot == Slot::Large {
        (HalfBranchRef::new(b, 0), HalfBranchRef::new(b, 1))
    } else {
        (HalfBranchRef::new(b, 1), HalfBranchRef::new(b, 0))
    };
    let v = *track.switch_at(bv)?;
    let w = *track.switch_at(bw)?;
    if v.id == w.id {
        return Err(TtError::IncompatibleLocalPicture(format!("mixed branch {} is a loop", b)));
    }
    Ok((v, w, bv, bw))
}

/// Shift along a mixed branch. The move is an involution.
pub fn shift(track: &TrainTrack, b: BranchId) -> Result<MoveOutcome> {
    let (v, w, bv, bw) = shift_site(track, b)?;
    let (nw, nv) = if w.small_left == bw {
        (
            SwitchRecord::new(w.id, w.large, v.small_left, bw),
            SwitchRecord::new(v.id, bv, v.small_right, w.small_right),
        )
    } else {
        (
            SwitchRecord::new(w.id, w.large, bw, v.small_right),
            SwitchRecord::new(v.id, bv, w.small_left, v.small_left),
        )
    };
    Ok(MoveOutcome::identity(rebuild(track, &[nv, nw], b)?))
}

/// Applies one move.
pub fn apply(track: &TrainTrack, m: Move) -> Result<MoveOutcome> {
    match m {
        Move::Split(s) => split(track, s),
        Move::Shift(b) => shift(track, b),
        Move::Collapse(b, d) => collapse(track, b, d),
    }
}

/// Applies a word, composing correspondences. Failures carry the index of
/// the offending move.
pub fn apply_sequence(track: &TrainTrack, word: &[Move]) -> Result<MoveOutcome> {
    let mut out = MoveOutcome::identity(track.clone());
    for (i, m) in word.iter().enumerate() {
        let next = apply(&out.track, *m).map_err(|e| TtError::SequenceFailed { index: i, source: Box::new(e) })?;
        out.correspondence = out.correspondence.iter().map(|(k, v)| (*k, next.correspondence[v])).collect();
        out.track = next.track;
    }
    Ok(out)
}

/// Weight the diagonal would get in a split in direction `d`, possibly
/// nonpositive.
pub fn diagonal_weight(track: &TrainTrack, mu: &TransverseMeasure, e: BranchId, d: SplitDirection) -> Result<BigRational> {
    let site = SplitSite::of(track, e)?;
    let [a, b, _, _] = site.abcd();
    let diff = mu.get(a.branch) - mu.get(b.branch);
    Ok(match d {
        SplitDirection::Right => diff,
        SplitDirection::Left => -diff,
    })
}

/// The measure on the split track induced by the carrying map.
pub fn measure_after_split(track: &TrainTrack, mu: &TransverseMeasure, mv: SplitMove) -> Result<TransverseMeasure> {
    let dw = diagonal_weight(track, mu, mv.at, mv.direction)?;
    if !dw.is_positive() {
        return Err(TtError::TieCollision(mv.at));
    }
    let mut out = mu.clone();
    out.weights.insert(mv.at, dw);
    Ok(out)
}

/// The measure after a shift along `b`.
pub fn measure_after_shift(track: &TrainTrack, mu: &TransverseMeasure, b: BranchId) -> Result<TransverseMeasure> {
    let (v, w, _, bw) = shift_site(track, b)?;
    let nb = if w.small_left == bw {
        mu.get(v.small_right.branch) + mu.get(w.small_right.branch)
    } else {
        mu.get(w.small_left.branch) + mu.get(v.small_left.branch)
    };
    let mut out = mu.clone();
    out.weights.insert(b, nb);
    Ok(out)
}

/// The measure after a collapse at `d`.
pub fn measure_after_collapse(track: &TrainTrack, mu: &TransverseMeasure, d: BranchId, dir: SplitDirection) -> Result<TransverseMeasure> {
    let (p, q) = collapse_site(track, d, dir)?;
    let nw = match dir {
        SplitDirection::Right => mu.get(p.large.branch) + mu.get(q.small_right.branch),
        SplitDirection::Left => mu.get(q.small_left.branch) + mu.get(p.large.branch),
    };
    let mut out = mu.clone();
    out.weights.insert(d, nw);
    Ok(out)
}

/// The measure after an arbitrary move.
pub fn measure_after(track: &TrainTrack, mu: &TransverseMeasure, m: Move) -> Result<TransverseMeasure> {
    match m {
        Move::Split(s) => measure_after_split(track, mu, s),
        Move::Shift(b) => measure_after_shift(track, mu, b),
        Move::Collapse(b, d) => measure_after_collapse(track, mu, b, d),
    }
}

/// Operational stand-in for a complete lamination: enough to decide every
/// split direction the constructions ask for.
#[derive(Clone, Debug)]
pub enum LaminationProxy {
    /// A strictly positive transverse measure on the current track.
    Measure(TransverseMeasure),
    /// A recorded splitting word; the direction at a branch is the one of
    /// its first occurrence.
    Word(Vec<SplitMove>),
    /// Every split goes the same way; models leaves spiraling about every
    /// large branch in a fixed sense.
    Uniform(SplitDirection),
    /// A track carried by the current one.
    Carried(Box<CarriedPosition>),
}

impl LaminationProxy {
    /// The split direction the proxy prescribes at large branch `e`.
    pub fn direction(&self, track: &TrainTrack, e: BranchId) -> Result<SplitDirection> {
        match self {
            LaminationProxy::Measure(mu) => {
                let bad = crate::track_core::check_measure(track, mu)?;
                if !bad.is_empty() || !mu.is_positive() {
                    return Err(TtError::NotCarried("measure violates switch conditions or positivity".into()));
                }
                let r = diagonal_weight(track, mu, e, SplitDirection::Right)?;
                if r.is_positive() {
                    Ok(SplitDirection::Right)
                } else if r.is_negative() {
                    Ok(SplitDirection::Left)
                } else {
                    Err(TtError::TieCollision(e))
                }
            }
            LaminationProxy::Word(w) => {
                SplitSite::of(track, e)?;
                w.iter()
                    .find(|m| m.at == e)
                    .map(|m| m.direction)
                    .ok_or_else(|| TtError::NotCarried(format!("recorded word never splits branch {}", e)))
            }
            LaminationProxy::Uniform(d) => {
                SplitSite::of(track, e)?;
                Ok(*d)
            }
            LaminationProxy::Carried(pos) => {
                if pos.base() != track {
                    return Err(TtError::NotCarried("position lives over a different track".into()));
                }
                let r = crate::carrying::carried_by_split(pos, e, SplitDirection::Right)?;
                let l = crate::carrying::carried_by_split(pos, e, SplitDirection::Left)?;
                match (r, l) {
                    (true, false) => Ok(SplitDirection::Right),
                    (false, true) => Ok(SplitDirection::Left),
                    (true, true) => Err(TtError::Ambiguous(e)),
                    (false, false) => Err(TtError::NotCarriedBySplit(e)),
                }
            }
        }
    }

    /// The proxy as seen from the split track.
    pub fn after_split(&self, track: &TrainTrack, mv: SplitMove) -> Result<LaminationProxy> {
        Ok(match self {
            LaminationProxy::Measure(mu) => LaminationProxy::Measure(measure_after_split(track, mu, mv)?),
            LaminationProxy::Word(w) => {
                let mut w = w.clone();
                if let Some(i) = w.iter().position(|m| m.at == mv.at) {
                    w.remove(i);
                }
                LaminationProxy::Word(w)
            }
            LaminationProxy::Uniform(d) => LaminationProxy::Uniform(*d),
            LaminationProxy::Carried(pos) => {
                LaminationProxy::Carried(Box::new(crate::carrying::transport_through_base_split(pos, mv)?))
            }
        })
    }
}

/// The split at `at` that still carries the proxy, with the proxy
/// transported to the split track.
pub fn lambda_split(track: &TrainTrack, at: BranchId, lam: &LaminationProxy) -> Result<(MoveOutcome, SplitDirection, LaminationProxy)> {
    let d = lam.direction(track, at)?;
    let mv = SplitMove::new(at, d);
    let out = split(track, mv)?;
    let next = lam.after_split(track, mv)?;
    Ok((out, d, next))
}

/// One proxy-directed split at every branch that is large in `track`, in
/// identifier order.
pub fn full_lambda_split(track: &TrainTrack, lam: &LaminationProxy) -> Result<(MoveOutcome, Vec<SplitMove>, LaminationProxy)> {
    full_lambda_split_in_order(track, lam, &track.large_branches())
}

/// Same as [`full_lambda_split`] with an explicit order, which must be a
/// permutation of the large branches.
pub fn full_lambda_split_in_order(
    track: &TrainTrack,
    lam: &LaminationProxy,
    order: &[BranchId],
) -> Result<(MoveOutcome, Vec<SplitMove>, LaminationProxy)> {
    let large: BTreeSet<BranchId> = track.large_branches().into_iter().collect();
    let given: BTreeSet<BranchId> = order.iter().copied().collect();
    if large != given || given.len() != order.len() {
        return Err(TtError::Invalid("order is not a permutation of the large branches".into()));
    }
    let mut cur = MoveOutcome::identity(track.clone());
    let mut lam = lam.clone();
    let mut word = Vec::new();
    for &e in order {
        let (out, d, next) = lambda_split(&cur.track, e, &lam)?;
        word.push(SplitMove::new(e, d));
        cur.track = out.track;
        lam = next;
    }
    Ok((cur, word, lam))
}
