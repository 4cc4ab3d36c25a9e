//! Benchmark inputs: a fixed catalog and pants-form tracks.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::error::{Result, TtError};
use crate::moves::{SplitDirection, SplitMove};
use crate::track_core::{
    is_recurrent, measure_space_basis, parse_tt, BranchId, HalfBranchRef, Side, SurfaceSignature, SwitchRecord, TrainTrack,
    TransverseMeasure,
};

/// Names accepted by [`catalog`].
pub const CATALOG_NAMES: [&str; 5] = ["S05A", "S12A", "S20A", "pants_S05", "pants_S20"];

/// A fixed, hand-verified complete track.
///
/// | name | surface | switches | branches | trigons | monogons |
/// |------|---------|----------|----------|---------|----------|
/// | S05A | g=0 k=5 | 8 | 12 | 1 | 5 |
/// | S12A | g=1 k=2 | 8 | 12 | 2 | 2 |
/// | S20A | g=2 k=0 | 12 | 18 | 4 | 0 |
/// | pants_S05 | g=0 k=5 | 8 | 12 | 1 | 5 |
/// | pants_S20 | g=2 k=0 | 12 | 18 | 4 | 0 |
pub fn catalog(name: &str) -> Result<TrainTrack> {
    let text = match name {
        "S05A" => include_str!("../data/S05A.tt"),
        "S12A" => include_str!("../data/S12A.tt"),
        "S20A" => include_str!("../data/S20A.tt"),
        "pants_S05" => include_str!("../data/pants_S05.tt"),
        "pants_S20" => include_str!("../data/pants_S20.tt"),
        _ => return Err(TtError::UnknownName(name.to_string())),
    };
    parse_tt(text)
}

/// A random strictly positive integral measure: a large multiple of a
/// recurrence witness plus a random integral combination of a basis of the
/// measure space. `spread` bounds the random coefficients.
pub fn random_positive_measure<R: rand::Rng>(track: &TrainTrack, rng: &mut R, spread: i64) -> Option<TransverseMeasure> {
    let w0 = is_recurrent(track)?;
    let basis = measure_space_basis(track);
    let ids: Vec<BranchId> = track.branches().collect();
    // Clear denominators of the witness and of the basis.
    let mut den = BigInt::one();
    for x in w0.weights.values().chain(basis.iter().flatten()) {
        den = den.lcm(x.denom());
    }
    let den = BigRational::from_integer(den);
    loop {
        let scale = BigRational::from_integer(BigInt::from(rng.gen_range(spread..=4 * spread)));
        let mut v: Vec<BigRational> = ids.iter().map(|b| &w0.weights[b] * &scale * &den).collect();
        for z in &basis {
            let r = BigRational::from_integer(BigInt::from(rng.gen_range(-spread..=spread)));
            for (x, y) in v.iter_mut().zip(z.iter()) {
                *x += &r * y * &den;
            }
        }
        if v.iter().all(|x| x.is_positive()) {
            return Some(TransverseMeasure { weights: ids.iter().copied().zip(v).collect() });
        }
    }
}

/// One boundary component of a pair of pants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Boundary {
    Curve(usize),
    Puncture,
}

/// A pants decomposition: curves are numbered `0..curves` and every curve
/// bounds exactly two pants slots (possibly of the same pants).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PantsData {
    pub curves: usize,
    pub pants: Vec<[Boundary; 3]>,
}

impl PantsData {
    /// Sphere with five punctures cut along two curves.
    pub fn s05() -> Self {
        use Boundary::*;
        PantsData { curves: 2, pants: vec![[Puncture, Puncture, Curve(0)], [Curve(0), Puncture, Curve(1)], [Curve(1), Puncture, Puncture]] }
    }

    /// Closed genus two surface cut along three nonseparating curves.
    pub fn s20() -> Self {
        use Boundary::*;
        PantsData { curves: 3, pants: vec![[Curve(0), Curve(1), Curve(2)], [Curve(0), Curve(1), Curve(2)]] }
    }

    /// The surface the pants glue up to, after consistency checks.
    pub fn signature(&self) -> Result<SurfaceSignature> {
        let bad = |m: String| Err(TtError::InvalidGluing(m));
        let mut seen = vec![0usize; self.curves];
        let mut k = 0i64;
        for p in &self.pants {
            for b in p {
                match *b {
                    Boundary::Curve(c) if c < self.curves => seen[c] += 1,
                    Boundary::Curve(c) => return bad(format!("pants refer to curve {} of {}", c, self.curves)),
                    Boundary::Puncture => k += 1,
                }
            }
        }
        if let Some(c) = seen.iter().position(|&n| n != 2) {
            return bad(format!("curve {} bounds {} pants slots instead of 2", c, seen[c]));
        }
        let np = self.pants.len() as i64;
        // 2g - 2 + k pants and 3g - 3 + k curves.
        if (np + 2 - k) % 2 != 0 || np + 2 - k < 0 {
            return bad(format!("{} pants with {} punctures glue to no closed surface", np, k));
        }
        let g = (np + 2 - k) / 2;
        if self.curves as i64 != 3 * g - 3 + k {
            return bad(format!("expected {} curves, found {}", 3 * g - 3 + k, self.curves));
        }
        // The pants must glue to something connected.
        let mut parent: Vec<usize> = (0..self.pants.len()).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        for c in 0..self.curves {
            let holders: Vec<usize> =
                (0..self.pants.len()).filter(|&i| self.pants[i].contains(&Boundary::Curve(c))).collect();
            let (a, b) = (find(&mut parent, holders[0]), find(&mut parent, *holders.last().unwrap()));
            parent[a] = b;
        }
        let root = find(&mut parent, 0);
        if (0..self.pants.len()).any(|i| find(&mut parent, i) != root) {
            return bad("pants do not glue to a connected surface".into());
        }
        if self.pants.iter().any(|p| p.iter().all(|b| *b == Boundary::Puncture)) {
            return bad("a pants with three punctures is the whole surface".into());
        }
        let sig = SurfaceSignature { genus: g as u32, punctures: k as u32 };
        if sig.complexity() < 2 {
            return Err(TtError::ExceptionalSurface(sig.complexity()));
        }
        Ok(sig)
    }
}

/// A standard track together with the trainpath carrying each pants curve:
/// `curve_paths[i] = [large branch, small branch]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PantsTrack {
    pub track: TrainTrack,
    pub curve_paths: Vec<[BranchId; 2]>,
}

fn find_root(p: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while p[r] != r {
        r = p[r];
    }
    let mut y = x;
    while p[y] != r {
        let n = p[y];
        p[y] = r;
        y = n;
    }
    r
}

/// Cuts `track` along the given closed trainpaths and describes each piece
/// by the curves on its boundary (with multiplicity), its puncture count and
/// its Euler characteristic once punctures are filled.
pub fn pieces(track: &TrainTrack, curve_paths: &[[BranchId; 2]]) -> Vec<(Vec<usize>, usize, i64)> {
    let on_curve: BTreeSet<BranchId> = curve_paths.iter().flatten().copied().collect();
    let regions = track.regions();
    let key = track.region_key_map();
    let idx: BTreeMap<Side, usize> = regions.iter().enumerate().map(|(i, r)| (r.key, i)).collect();
    let region_of = |s: Side| idx[&key[&s]];
    let mut parent: Vec<usize> = (0..regions.len()).collect();
    for b in track.branches().filter(|b| !on_curve.contains(b)) {
        let (a, c) = (find_root(&mut parent, region_of(Side::new(b, 0))), find_root(&mut parent, region_of(Side::new(b, 1))));
        parent[a] = c;
    }
    let mut out: BTreeMap<usize, (Vec<usize>, usize, i64)> = BTreeMap::new();
    for (i, r) in regions.iter().enumerate() {
        let root = find_root(&mut parent, i);
        let e = out.entry(root).or_default();
        e.2 += 1;
        e.1 += r.punctured as usize;
    }
    for b in track.branches().filter(|b| !on_curve.contains(b)) {
        let root = find_root(&mut parent, region_of(Side::new(b, 0)));
        out.get_mut(&root).unwrap().2 -= 1;
    }
    let curve_switch: BTreeSet<u32> = curve_paths
        .iter()
        .flatten()
        .flat_map(|&b| [0, 1].map(|e| track.switch_at(HalfBranchRef::new(b, e)).unwrap().id))
        .collect();
    for s in track.switches().iter().filter(|s| !curve_switch.contains(&s.id)) {
        let root = find_root(&mut parent, region_of(Side::new(s.large.branch, 0)));
        out.get_mut(&root).unwrap().2 += 1;
    }
    for (c, path) in curve_paths.iter().enumerate() {
        for t in 0..2 {
            let root = find_root(&mut parent, region_of(Side::new(path[0], t)));
            out.get_mut(&root).unwrap().0.push(c);
        }
    }
    out.into_values()
        .map(|(mut c, p, chi)| {
            c.sort();
            (c, p, chi)
        })
        .collect()
}

struct Builder {
    switches: Vec<SwitchRecord>,
    next_branch: BranchId,
}

impl Builder {
    fn branch(&mut self) -> BranchId {
        self.next_branch += 1;
        self.next_branch - 1
    }

    fn switch(&mut self, l: HalfBranchRef, a: HalfBranchRef, b: HalfBranchRef, mirror: bool) {
        let id = self.switches.len() as u32;
        let (a, b) = if mirror { (b, a) } else { (a, b) };
        self.switches.push(SwitchRecord::new(id, l, a, b));
    }
}

fn h(b: BranchId, e: u8) -> HalfBranchRef {
    HalfBranchRef::new(b, e)
}

/// One candidate gluing; `choice` packs the free decisions.
fn assemble(data: &PantsData, mut choice: u64) -> Option<PantsTrack> {
    let n = data.curves as u32;
    let mut bld = Builder { switches: Vec::new(), next_branch: 4 * n };
    // Curve gadgets: switches 2i and 2i+1 joined by the large branch i and
    // the small branch n+i; exits 2n+2i and 2n+2i+1 leave on either side.
    for i in 0..n {
        let (e, s) = (i, n + i);
        bld.switch(h(e, 0), h(s, 0), h(2 * n + 2 * i, 0), false);
        bld.switch(h(e, 1), h(s, 1), h(2 * n + 2 * i + 1, 0), false);
    }
    let mut take = |k: u64| {
        let r = choice % k;
        choice /= k;
        r as usize
    };
    // Which exit meets which of the two pants slots of each curve.
    let mut slot_exit: BTreeMap<(usize, usize), HalfBranchRef> = BTreeMap::new();
    for c in 0..data.curves {
        let slots: Vec<(usize, usize)> = data
            .pants
            .iter()
            .enumerate()
            .flat_map(|(i, p)| (0..3).filter(move |&j| p[j] == Boundary::Curve(c)).map(move |j| (i, j)))
            .collect();
        let flip = take(2);
        slot_exit.insert(slots[flip], h(2 * n + 2 * c as u32, 1));
        slot_exit.insert(slots[1 - flip], h(2 * n + 2 * c as u32 + 1, 1));
    }
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for (i, p) in data.pants.iter().enumerate() {
        let mut ports: Vec<HalfBranchRef> = (0..3).filter_map(|j| slot_exit.get(&(i, j)).copied()).collect();
        let mirror = take(2) == 1;
        match ports.len() {
            3 => {
                let pm = PERMS[take(6)];
                ports = pm.iter().map(|&j| ports[j]).collect();
                let (pb, qb, rb) = (bld.branch(), bld.branch(), bld.branch());
                bld.switch(ports[0], h(pb, 0), ports[1], mirror);
                bld.switch(h(pb, 1), h(qb, 0), h(rb, 0), mirror);
                bld.switch(h(qb, 1), h(rb, 1), ports[2], mirror);
            }
            2 => {
                if take(2) == 1 {
                    ports.swap(0, 1);
                }
                let (cb, lb) = (bld.branch(), bld.branch());
                bld.switch(ports[0], ports[1], h(cb, 0), mirror);
                bld.switch(h(cb, 1), h(lb, 0), h(lb, 1), mirror);
            }
            1 => {
                let lb = bld.branch();
                bld.switch(ports[0], h(lb, 0), h(lb, 1), mirror);
            }
            _ => return None,
        }
        debug_assert!(p.iter().filter(|b| **b == Boundary::Puncture).count() == 3 - ports.len());
    }
    let track = TrainTrack::new(bld.switches, Vec::new()).ok()?;
    let monogons: Vec<Side> = track.regions().iter().filter(|r| r.cusps == 1).map(|r| r.key).collect();
    let track = track.with_punctures(monogons).ok()?;
    let curve_paths: Vec<[BranchId; 2]> = (0..n).map(|i| [i, n + i]).collect();
    Some(PantsTrack { track, curve_paths })
}

fn pants_profile(data: &PantsData) -> Vec<(Vec<usize>, usize, i64)> {
    let mut v: Vec<_> = data
        .pants
        .iter()
        .map(|p| {
            let mut c: Vec<usize> = p.iter().filter_map(|b| if let Boundary::Curve(c) = b { Some(*c) } else { None }).collect();
            c.sort();
            let bd = c.len() as i64;
            (c, 3 - bd as usize, 2 - bd)
        })
        .collect();
    v.sort();
    v
}

/// The standard track of a pants decomposition: each curve is carried by a
/// large branch followed by a small branch, every large branch arises this
/// way, and cutting along the curves recovers the pants.
///
/// The local gadgets fix the spiraling sense on the two sides of every
/// curve to be opposite; the free choices (which exit faces which pants,
/// port order and handedness of each pants gadget) are searched in a fixed
/// order and the first gluing whose pieces match `data` is returned.
pub fn pants_standard_track(data: &PantsData) -> Result<PantsTrack> {
    let sig = data.signature()?;
    let want = pants_profile(data);
    let mut space: u64 = 1 << data.curves;
    for p in &data.pants {
        let curves = p.iter().filter(|b| matches!(b, Boundary::Curve(_))).count();
        space *= 2 * [1, 1, 2, 6][curves];
    }
    for choice in 0..space {
        let Some(pt) = assemble(data, choice) else { continue };
        let t = &pt.track;
        if !t.validate().all_ok() || t.surface_signature().ok() != Some(sig) {
            continue;
        }
        let large: BTreeSet<BranchId> = t.large_branches().into_iter().collect();
        if large != pt.curve_paths.iter().map(|p| p[0]).collect() || is_recurrent(t).is_none() {
            continue;
        }
        let mut got = pieces(t, &pt.curve_paths);
        got.sort();
        if got == want {
            return Ok(pt);
        }
    }
    Err(TtError::InvalidGluing("no gadget gluing realizes the pants decomposition".into()))
}

/// Recovers curve trainpaths from a track in pants form: every large branch
/// `e` whose two small-left neighbors are the two ends of one branch `s`.
pub fn pants_curves(track: &TrainTrack) -> Vec<[BranchId; 2]> {
    track
        .large_branches()
        .into_iter()
        .filter_map(|e| {
            let v = track.switch_at(HalfBranchRef::new(e, 0)).ok()?;
            let w = track.switch_at(HalfBranchRef::new(e, 1)).ok()?;
            let s = v.small_left;
            (w.small_left == s.opposite()).then_some([e, s.branch])
        })
        .collect()
}

/// The length-two word realizing the twist about curve `curve`: a right
/// split at its large branch, which makes the small branch of the curve a
/// winner and large, then a right split there.
pub fn twist_word(pt: &PantsTrack, curve: usize) -> Result<Vec<SplitMove>> {
    let [e, s] = *pt.curve_paths.get(curve).ok_or(TtError::UnknownCurve(curve))?;
    Ok(vec![SplitMove::new(e, SplitDirection::Right), SplitMove::new(s, SplitDirection::Right)])
}
