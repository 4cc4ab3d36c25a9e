//! Generic train tracks as ribbon graphs with largeness labels.
//!
//! A switch has three slots. The large slot `L` holds the half-branch on the
//! large side; `A` and `B` hold the two small half-branches, with `A` lying to
//! the left when one faces into the switch along the large half-branch.
//! Counterclockwise around a switch the slots read `L, B, A`.

mod format;
mod lp;
mod measure;
mod regions;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Result, TtError};

pub use format::{parse_tt, write_tt};
pub use lp::feasible_point;
pub use measure::{check_measure, is_recurrent, parse_measure, measure_space_basis, switch_matrix, TransverseMeasure};
pub use regions::{Region, Side};

pub type BranchId = u32;
pub type SwitchId = u32;

/// One end of a branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfBranchRef {
    pub branch: BranchId,
    pub end: u8,
}

impl HalfBranchRef {
    pub fn new(branch: BranchId, end: u8) -> Self {
        HalfBranchRef { branch, end }
    }

    /// The other end of the same branch.
    pub fn opposite(self) -> Self {
        HalfBranchRef { branch: self.branch, end: 1 - self.end }
    }
}

impl fmt::Display for HalfBranchRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.branch, self.end)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    Large,
    SmallLeft,
    SmallRight,
}

impl Slot {
    pub const ALL: [Slot; 3] = [Slot::Large, Slot::SmallLeft, Slot::SmallRight];

    pub fn index(self) -> usize {
        match self {
            Slot::Large => 0,
            Slot::SmallLeft => 1,
            Slot::SmallRight => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SwitchRecord {
    pub id: SwitchId,
    pub large: HalfBranchRef,
    pub small_left: HalfBranchRef,
    pub small_right: HalfBranchRef,
}

impl SwitchRecord {
    pub fn new(id: SwitchId, large: HalfBranchRef, small_left: HalfBranchRef, small_right: HalfBranchRef) -> Self {
        SwitchRecord { id, large, small_left, small_right }
    }

    pub fn slot(&self, s: Slot) -> HalfBranchRef {
        match s {
            Slot::Large => self.large,
            Slot::SmallLeft => self.small_left,
            Slot::SmallRight => self.small_right,
        }
    }

    pub fn slots(&self) -> [HalfBranchRef; 3] {
        [self.large, self.small_left, self.small_right]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BranchKind {
    Large,
    Mixed,
    Small,
}

impl fmt::Display for BranchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BranchKind::Large => "large",
            BranchKind::Mixed => "mixed",
            BranchKind::Small => "small",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SurfaceSignature {
    pub genus: u32,
    pub punctures: u32,
}

impl SurfaceSignature {
    /// Complexity `3g - 3 + k`.
    pub fn complexity(&self) -> i64 {
        3 * self.genus as i64 - 3 + self.punctures as i64
    }

    /// Rank of the measure cone of a maximal track, `6g - 6 + 2k`.
    pub fn cone_rank(&self) -> i64 {
        2 * self.complexity()
    }
}

impl fmt::Display for SurfaceSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g={} k={}", self.genus, self.punctures)
    }
}

/// Where a half-branch lives: index into the switch list plus its slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Location {
    pub switch: usize,
    pub slot: Slot,
}

/// A generic train track with explicit puncture marks.
///
/// Switches are kept sorted by id. The half-branch index is derived data and
/// is rebuilt by every constructor.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TrainTrack {
    switches: Vec<SwitchRecord>,
    punctures: BTreeSet<Side>,
    loc: BTreeMap<BranchId, [Location; 2]>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub slot_consistent: bool,
    pub generic: bool,
    pub connected: bool,
    pub maximal: bool,
    pub problems: Vec<String>,
}

impl ValidationReport {
    pub fn all_ok(&self) -> bool {
        self.slot_consistent && self.generic && self.connected && self.maximal
    }
}

impl TrainTrack {
    /// Builds a track from switch records, checking that every branch end
    /// occurs in exactly one slot. Puncture keys are normalized to the
    /// minimal side of their region.
    pub fn new(mut switches: Vec<SwitchRecord>, punctures: impl IntoIterator<Item = Side>) -> Result<Self> {
        switches.sort_by_key(|s| s.id);
        for w in switches.windows(2) {
            if w[0].id == w[1].id {
                return Err(TtError::MalformedSlots(format!("switch id {} repeated", w[0].id)));
            }
        }
        let mut seen: BTreeMap<HalfBranchRef, Location> = BTreeMap::new();
        for (i, sw) in switches.iter().enumerate() {
            for s in Slot::ALL {
                let h = sw.slot(s);
                if h.end > 1 {
                    return Err(TtError::MalformedSlots(format!("bad end in {}", h)));
                }
                if seen.insert(h, Location { switch: i, slot: s }).is_some() {
                    return Err(TtError::MalformedSlots(format!("half-branch {} occurs twice", h)));
                }
            }
        }
        let mut loc = BTreeMap::new();
        for (h, l) in &seen {
            let other = h.opposite();
            let Some(lo) = seen.get(&other) else {
                return Err(TtError::MalformedSlots(format!("half-branch {} is missing", other)));
            };
            if h.end == 0 {
                loc.insert(h.branch, [*l, *lo]);
            }
        }
        let mut t = TrainTrack { switches, punctures: BTreeSet::new(), loc };
        let mut marks = BTreeSet::new();
        for p in punctures {
            if !t.loc.contains_key(&p.branch) {
                return Err(TtError::UnknownBranch(p.branch));
            }
            marks.insert(p);
        }
        t.punctures = t.normalize_marks(&marks);
        Ok(t)
    }

    /// Same ribbon structure with a different puncture set.
    pub fn with_punctures(&self, punctures: impl IntoIterator<Item = Side>) -> Result<Self> {
        TrainTrack::new(self.switches.clone(), punctures)
    }

    fn normalize_marks(&self, marks: &BTreeSet<Side>) -> BTreeSet<Side> {
        if marks.is_empty() {
            return BTreeSet::new();
        }
        let key = self.region_key_map();
        marks.iter().map(|s| key[s]).collect()
    }

    pub fn switches(&self) -> &[SwitchRecord] {
        &self.switches
    }

    pub fn switch_count(&self) -> usize {
        self.switches.len()
    }

    pub fn branch_count(&self) -> usize {
        self.loc.len()
    }

    pub fn branches(&self) -> impl Iterator<Item = BranchId> + '_ {
        self.loc.keys().copied()
    }

    pub fn has_branch(&self, b: BranchId) -> bool {
        self.loc.contains_key(&b)
    }

    /// Region keys of the punctured regions.
    pub fn punctures(&self) -> &BTreeSet<Side> {
        &self.punctures
    }

    pub fn location(&self, h: HalfBranchRef) -> Result<Location> {
        self.loc.get(&h.branch).map(|l| l[h.end as usize]).ok_or(TtError::UnknownBranch(h.branch))
    }

    pub fn switch_at(&self, h: HalfBranchRef) -> Result<&SwitchRecord> {
        Ok(&self.switches[self.location(h)?.switch])
    }

    pub fn switch_by_id(&self, id: SwitchId) -> Option<&SwitchRecord> {
        self.switches.binary_search_by_key(&id, |s| s.id).ok().map(|i| &self.switches[i])
    }

    pub fn classify_branch(&self, b: BranchId) -> Result<BranchKind> {
        let l = self.loc.get(&b).ok_or(TtError::UnknownBranch(b))?;
        let n = l.iter().filter(|x| x.slot == Slot::Large).count();
        Ok(match n {
            2 => BranchKind::Large,
            1 => BranchKind::Mixed,
            _ => BranchKind::Small,
        })
    }

    pub fn branches_of_kind(&self, kind: BranchKind) -> Vec<BranchId> {
        self.branches().filter(|&b| self.classify_branch(b).ok() == Some(kind)).collect()
    }

    pub fn large_branches(&self) -> Vec<BranchId> {
        self.branches_of_kind(BranchKind::Large)
    }

    pub fn is_connected(&self) -> bool {
        if self.switches.is_empty() {
            return false;
        }
        let n = self.switches.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for h in self.switches[i].slots() {
                let j = self.loc[&h.branch][1 - h.end as usize].switch;
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|x| x)
    }

    pub fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport { slot_consistent: true, generic: true, ..Default::default() };
        r.connected = self.is_connected();
        if !r.connected {
            r.problems.push("track is not connected".into());
        }
        let regions = self.regions();
        let mut maximal = r.connected;
        for reg in &regions {
            let ok = match (reg.cusps, reg.punctured) {
                (3, false) | (1, true) => true,
                _ => false,
            };
            if !ok {
                maximal = false;
                r.problems.push(format!(
                    "region {} has {} cusps{}",
                    reg.key,
                    reg.cusps,
                    if reg.punctured { " and a puncture" } else { "" }
                ));
            }
        }
        r.maximal = maximal;
        r
    }

    /// Euler-characteristic bookkeeping on the filled surface.
    pub fn surface_signature(&self) -> Result<SurfaceSignature> {
        let rep = self.validate();
        if !rep.all_ok() {
            return Err(TtError::Invalid(rep.problems.join("; ")));
        }
        let f = self.regions().len() as i64;
        let chi = self.switch_count() as i64 - self.branch_count() as i64 + f;
        if chi > 2 || (2 - chi) % 2 != 0 {
            return Err(TtError::Invalid(format!("Euler characteristic {} is impossible", chi)));
        }
        let sig = SurfaceSignature { genus: ((2 - chi) / 2) as u32, punctures: self.punctures.len() as u32 };
        if sig.complexity() < 2 {
            return Err(TtError::ExceptionalSurface(sig.complexity()));
        }
        Ok(sig)
    }

    /// Rebuilds the track with branches and switches renamed. Both maps must
    /// be injective on the ids they touch; ids missing from a map are kept.
    pub fn relabel(&self, branch: &BTreeMap<BranchId, BranchId>, switch: &BTreeMap<SwitchId, SwitchId>) -> Result<Self> {
        let rb = |h: HalfBranchRef| HalfBranchRef::new(*branch.get(&h.branch).unwrap_or(&h.branch), h.end);
        let sws = self
            .switches
            .iter()
            .map(|s| {
                SwitchRecord::new(
                    *switch.get(&s.id).unwrap_or(&s.id),
                    rb(s.large),
                    rb(s.small_left),
                    rb(s.small_right),
                )
            })
            .collect();
        let marks = self.punctures.iter().map(|p| Side::new(*branch.get(&p.branch).unwrap_or(&p.branch), p.toward));
        TrainTrack::new(sws, marks)
    }

    /// Flips the orientation of branch `b`: its two ends trade names.
    pub fn reverse_branch(&self, b: BranchId) -> Result<Self> {
        if !self.has_branch(b) {
            return Err(TtError::UnknownBranch(b));
        }
        let f = |h: HalfBranchRef| if h.branch == b { h.opposite() } else { h };
        let sws = self.switches.iter().map(|s| SwitchRecord::new(s.id, f(s.large), f(s.small_left), f(s.small_right))).collect();
        // Traveling toward the old end e is traveling toward the new end 1 - e.
        let marks = self.punctures.iter().map(|p| if p.branch == b { Side::new(b, 1 - p.toward) } else { *p });
        TrainTrack::new(sws, marks)
    }

    /// The mirror image: every switch trades its small slots, and sides
    /// trade left for right.
    pub fn mirror(&self) -> Result<Self> {
        let sws = self.switches.iter().map(|s| SwitchRecord::new(s.id, s.large, s.small_right, s.small_left)).collect();
        // The left side toward e in the mirror is the old right side toward e,
        // which is the old left side toward 1 - e.
        let marks = self.punctures.iter().map(|p| Side::new(p.branch, 1 - p.toward));
        TrainTrack::new(sws, marks)
    }

    /// Number of large branches counted straight from the large slots.
    pub fn slot_scan_large(&self) -> usize {
        let mut count: BTreeMap<BranchId, usize> = BTreeMap::new();
        for s in &self.switches {
            *count.entry(s.large.branch).or_default() += 1;
        }
        count.values().filter(|&&c| c == 2).count()
    }
}

impl fmt::Display for TrainTrack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&write_tt(self))
    }
}
