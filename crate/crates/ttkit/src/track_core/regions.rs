//! Complementary regions, traced side by side.
//!
//! A side is a directed traversal of a branch with the region on its left.
//! Arriving at a switch through the large slot the boundary turns onto the
//! left small branch; arriving through the right small slot it continues
//! along the large branch; arriving through the left small slot it meets a
//! cusp and leaves along the right small branch.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::{BranchId, HalfBranchRef, Slot, TrainTrack};

/// The left side of `branch` traversed toward end `toward`.
///
/// Written `b.e.L`; the right-hand form `b.e.R` names the same side as
/// `b.(1-e).L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Side {
    pub branch: BranchId,
    pub toward: u8,
}

impl Side {
    pub fn new(branch: BranchId, toward: u8) -> Self {
        Side { branch, toward }
    }

    /// The half-branch this traversal arrives at.
    pub fn head(self) -> HalfBranchRef {
        HalfBranchRef::new(self.branch, self.toward)
    }

    /// The half-branch this traversal leaves from.
    pub fn tail(self) -> HalfBranchRef {
        HalfBranchRef::new(self.branch, 1 - self.toward)
    }

    /// The same branch traversed the other way, which sees the region on
    /// the other side.
    pub fn reversed(self) -> Side {
        Side::new(self.branch, 1 - self.toward)
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}.L", self.branch, self.toward)
    }
}

impl FromStr for Side {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.trim().split('.').collect();
        if parts.len() != 3 {
            return Err(format!("region key {:?} is not of the form b.e.L|R", s));
        }
        let b: BranchId = parts[0].parse().map_err(|_| format!("bad branch in {:?}", s))?;
        let e: u8 = match parts[1] {
            "0" => 0,
            "1" => 1,
            _ => return Err(format!("bad end in {:?}", s)),
        };
        match parts[2] {
            "L" => Ok(Side::new(b, e)),
            "R" => Ok(Side::new(b, 1 - e)),
            _ => return Err(format!("bad side letter in {:?}", s)),
        }
    }
}

/// One complementary region.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Region {
    /// Sides in boundary order, starting from the key.
    pub sides: Vec<Side>,
    /// `cusp_after[i]` is set when a cusp separates `sides[i]` from the next.
    pub cusp_after: Vec<bool>,
    pub cusps: usize,
    pub key: Side,
    pub punctured: bool,
}

impl Region {
    /// Lengths of the maximal smooth trainpaths between cusps, in order.
    pub fn side_lengths(&self) -> Vec<usize> {
        if self.cusps == 0 {
            return vec![self.sides.len()];
        }
        let start = self.cusp_after.iter().position(|&c| c).unwrap() + 1;
        let n = self.sides.len();
        let mut out = Vec::new();
        let mut run = 0;
        for i in 0..n {
            run += 1;
            if self.cusp_after[(start + i) % n] {
                out.push(run);
                run = 0;
            }
        }
        out
    }
}

impl TrainTrack {
    /// Successor of a side along its region boundary, with the cusp flag.
    pub fn next_side(&self, s: Side) -> (Side, bool) {
        let l = self.loc[&s.branch][s.toward as usize];
        let sw = &self.switches[l.switch];
        let leave = |h: HalfBranchRef| Side::new(h.branch, 1 - h.end);
        match l.slot {
            Slot::Large => (leave(sw.small_left), false),
            Slot::SmallRight => (leave(sw.large), false),
            Slot::SmallLeft => (leave(sw.small_right), true),
        }
    }

    /// All complementary regions, ordered by key.
    pub fn regions(&self) -> Vec<Region> {
        let mut done: BTreeMap<Side, ()> = BTreeMap::new();
        let mut out = Vec::new();
        for b in self.branches() {
            for t in 0..2u8 {
                let start = Side::new(b, t);
                if done.contains_key(&start) {
                    continue;
                }
                let mut sides = Vec::new();
                let mut cusp_after = Vec::new();
                let mut cur = start;
                loop {
                    done.insert(cur, ());
                    sides.push(cur);
                    let (nx, cusp) = self.next_side(cur);
                    cusp_after.push(cusp);
                    cur = nx;
                    if cur == start {
                        break;
                    }
                }
                let cusps = cusp_after.iter().filter(|&&c| c).count();
                out.push(Region { sides, cusp_after, cusps, key: start, punctured: false });
            }
        }
        // Branches are visited in increasing order, so `start` is already the
        // minimal side of each region.
        for r in &mut out {
            r.punctured = self.punctures.contains(&r.key);
        }
        out
    }

    /// Map from every side to the key of its region.
    pub fn region_key_map(&self) -> BTreeMap<Side, Side> {
        let mut m = BTreeMap::new();
        for r in self.regions() {
            for s in &r.sides {
                m.insert(*s, r.key);
            }
        }
        m
    }
}
