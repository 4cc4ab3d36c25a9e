//! The ambient graph of complete tracks, explored at desk scale.
//!
//! A vertex of the ambient graph is a complete track on a fixed surface up
//! to isotopy, which the combinatorial data alone cannot see: a Dehn twist
//! maps the standard pants track to a track with the same switch records.
//! Tracks here therefore carry a marking, a homomorphism from the surface
//! group to a symmetric group written as one permutation per branch. Two
//! marked tracks are identified when some color-preserving isomorphism
//! matches their holonomies up to gauge at the switches and a global
//! conjugation. That is exact for the quotient of the ambient graph by the
//! finite-index subgroup of mapping classes fixing the marking, so ambient
//! distances computed here are lower bounds for the true ones and cone
//! distances, which never shrink under the quotient, stay upper bounds.

use std::collections::{BTreeMap, HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Result, TtError};
use crate::flat_cone::{cone_ball, phi_of_word, FlatCone};
use crate::moves::{apply, is_collapsible, LaminationProxy, Move, MoveOutcome, SplitDirection, SplitMove};
use crate::orbit::{canonical, colored_graph};
use crate::track_core::{is_recurrent, BranchId, BranchKind, HalfBranchRef, Side, TrainTrack};

/// Permutation of `0..n`, applied as `x -> p[x]`.
pub type Perm = Vec<u8>;

/// `a` then `b`.
fn then(a: &Perm, b: &Perm) -> Perm {
    a.iter().map(|&x| b[x as usize]).collect()
}

fn inverse(a: &Perm) -> Perm {
    let mut r = vec![0; a.len()];
    for (i, &x) in a.iter().enumerate() {
        r[x as usize] = i as u8;
    }
    r
}

fn identity(n: usize) -> Perm {
    (0..n as u8).collect()
}

/// Default number of sheets of the marking.
pub const MARKING_DEGREE: usize = 8;

/// A track with the holonomy of a marking along every branch, read from
/// end 0 to end 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkedTrack {
    pub track: TrainTrack,
    pub holonomy: BTreeMap<BranchId, Perm>,
}

impl MarkedTrack {
    fn degree(&self) -> usize {
        self.holonomy.values().next().map_or(0, Vec::len)
    }

    fn along(&self, s: Side) -> Perm {
        let g = &self.holonomy[&s.branch];
        if s.toward == 1 {
            g.clone()
        } else {
            inverse(g)
        }
    }

    /// Product of holonomies around a region boundary.
    fn around(&self, sides: &[Side]) -> Perm {
        sides.iter().fold(identity(self.degree()), |acc, s| then(&acc, &self.along(*s)))
    }

    /// Regions without a puncture must have trivial holonomy around them.
    pub fn is_consistent(&self) -> bool {
        let id = identity(self.degree());
        self.track.regions().iter().filter(|r| !r.punctured).all(|r| self.around(&r.sides) == id)
    }

    /// Whether the image of the surface group acts transitively.
    pub fn is_transitive(&self) -> bool {
        let n = self.degree();
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut stack = vec![0u8];
        while let Some(x) = stack.pop() {
            for g in self.holonomy.values() {
                for y in [g[x as usize], inverse(g)[x as usize]] {
                    if !seen[y as usize] {
                        seen[y as usize] = true;
                        stack.push(y);
                    }
                }
            }
        }
        seen.iter().all(|&s| s)
    }
}

/// A random transitive marking of `track`. Branches of a spanning tree get
/// the identity, branches of a spanning tree of the dual graph are solved
/// for region by region from the leaves, and the remaining `2g` branches
/// are free up to the surface relation.
pub fn random_marking<R: Rng>(track: &TrainTrack, rng: &mut R, degree: usize) -> MarkedTrack {
    let regions = track.regions();
    let key = track.region_key_map();
    let ridx: BTreeMap<Side, usize> = regions.iter().enumerate().map(|(i, r)| (r.key, i)).collect();
    // Spanning tree of the track graph.
    let sw_index: BTreeMap<u32, usize> = track.switches().iter().enumerate().map(|(i, s)| (s.id, i)).collect();
    let at = |h: HalfBranchRef| sw_index[&track.switch_at(h).unwrap().id];
    let mut in_tree: BTreeMap<BranchId, bool> = track.branches().map(|b| (b, false)).collect();
    let mut seen = vec![false; track.switch_count()];
    seen[0] = true;
    let mut q = VecDeque::from([0usize]);
    while let Some(v) = q.pop_front() {
        for hb in track.switches()[v].slots() {
            let u = at(hb.opposite());
            if !seen[u] {
                seen[u] = true;
                in_tree.insert(hb.branch, true);
                q.push_back(u);
            }
        }
    }
    // Spanning tree of the dual graph on the remaining branches, rooted at
    // a punctured region when there is one.
    let root = regions.iter().position(|r| r.punctured).unwrap_or(0);
    let mut parent_edge: Vec<Option<BranchId>> = vec![None; regions.len()];
    let mut rseen = vec![false; regions.len()];
    rseen[root] = true;
    let mut order = vec![root];
    let mut k = 0;
    let mut dual_tree: BTreeMap<BranchId, bool> = track.branches().map(|b| (b, false)).collect();
    while k < order.len() {
        let r = order[k];
        k += 1;
        for s in &regions[r].sides {
            let b = s.branch;
            if in_tree[&b] || dual_tree[&b] {
                continue;
            }
            let other = ridx[&key[&s.reversed()]];
            if !rseen[other] {
                rseen[other] = true;
                parent_edge[other] = Some(b);
                dual_tree.insert(b, true);
                order.push(other);
            }
        }
    }
    loop {
        let mut hol: BTreeMap<BranchId, Perm> = BTreeMap::new();
        for b in track.branches() {
            let g = if in_tree[&b] {
                identity(degree)
            } else {
                let mut p = identity(degree);
                p.shuffle(rng);
                p
            };
            hol.insert(b, g);
        }
        let mut m = MarkedTrack { track: track.clone(), holonomy: hol };
        for &r in order.iter().rev() {
            let Some(b) = parent_edge[r] else { continue };
            if regions[r].punctured {
                continue;
            }
            // Solve A . f . B = 1 for the single occurrence f of b.
            let sides = &regions[r].sides;
            let j = sides.iter().position(|s| s.branch == b).unwrap();
            let a = m.around(&sides[..j]);
            let bb = m.around(&sides[j + 1..]);
            let f = then(&inverse(&a), &inverse(&bb));
            let g = if sides[j].toward == 1 { f } else { inverse(&f) };
            m.holonomy.insert(b, g);
        }
        // On a closed surface the root relation is the surface relation in
        // the free branches and does not follow from the others; sample
        // until it holds.
        let closed = !regions[root].punctured;
        if closed && m.around(&regions[root].sides) != identity(degree) {
            continue;
        }
        if m.is_transitive() {
            debug_assert!(m.is_consistent());
            return m;
        }
    }
}

fn central_branch(m: Move) -> BranchId {
    match m {
        Move::Split(s) => s.at,
        Move::Shift(b) => b,
        Move::Collapse(d, _) => d,
    }
}

/// Carries a marking through a move. Half-branches that change switch
/// slide along the move's central branch, whose ends stay put.
pub fn transport_marking(old: &MarkedTrack, m: Move, out: &MoveOutcome) -> MarkedTrack {
    let c = central_branch(m);
    let t = &old.track;
    let sw = |tr: &TrainTrack, h: HalfBranchRef| tr.switch_at(h).unwrap().id;
    let (s0, s1) = (sw(t, HalfBranchRef::new(c, 0)), sw(t, HalfBranchRef::new(c, 1)));
    let gc = &old.holonomy[&c];
    let mut hol = BTreeMap::new();
    for (&b, g) in &old.holonomy {
        let mut g = g.clone();
        if b != c {
            for e in 0..2u8 {
                let h = HalfBranchRef::new(b, e);
                let (x, y) = (sw(t, h), sw(&out.track, h));
                if x == y {
                    continue;
                }
                // Path from the new switch back to the old one.
                let back = if (x, y) == (s0, s1) { inverse(gc) } else { gc.clone() };
                g = if e == 0 { then(&back, &g) } else { then(&g, &inverse(&back)) };
            }
        }
        hol.insert(out.correspondence[&b], g);
    }
    MarkedTrack { track: out.track.clone(), holonomy: hol }
}

/// Applies a move to a marked track.
pub fn apply_marked(m: &MarkedTrack, mv: Move) -> Result<MarkedTrack> {
    let out = apply(&m.track, mv)?;
    let r = transport_marking(m, mv, &out);
    debug_assert!(r.is_consistent());
    Ok(r)
}

/// Relabels points by first appearance from `x0`; `None` when the
/// sequence does not act transitively.
fn relabel_from(seq: &[Perm], x0: u8) -> Option<Vec<u8>> {
    let n = seq.first().map_or(0, Vec::len);
    let mut label = vec![u8::MAX; n];
    let mut order = vec![x0];
    label[x0 as usize] = 0;
    let mut k = 0;
    while k < order.len() {
        let x = order[k];
        k += 1;
        for p in seq {
            let y = p[x as usize];
            if label[y as usize] == u8::MAX {
                label[y as usize] = order.len() as u8;
                order.push(y);
            }
        }
    }
    if order.len() != n {
        return None;
    }
    Some(seq.iter().flat_map(|p| (0..n).map(|i| label[p[order[i] as usize] as usize])).collect::<Vec<u8>>())
}

/// Identity key of a marked track in the ambient quotient graph.
pub fn marked_key(m: &MarkedTrack) -> Vec<u8> {
    let t = &m.track;
    let g = colored_graph(t);
    let can = canonical(&g);
    let n = m.degree();
    let sws = t.switches();
    let mut best: Option<Vec<u8>> = None;
    for num in &can.labelings {
        let mut order = vec![0usize; num.len()];
        for (v, &k) in num.iter().enumerate() {
            order[k] = v;
        }
        // Gauge: identity along the breadth-first tree the code was read from.
        let mut gauge: Vec<Option<Perm>> = vec![None; sws.len()];
        gauge[order[0]] = Some(identity(n));
        for &v in &order {
            let hv = gauge[v].clone().expect("breadth-first order");
            for c in 0..3 {
                let (u, _) = g.partner[v][c];
                if gauge[u].is_some() {
                    continue;
                }
                let hb = sws[v].slots()[c];
                let gb = &m.holonomy[&hb.branch];
                gauge[u] = Some(if hb.end == 0 { then(&inverse(gb), &hv) } else { then(gb, &hv) });
            }
        }
        let gauge: Vec<Perm> = gauge.into_iter().map(Option::unwrap).collect();
        let sw_index: BTreeMap<u32, usize> = sws.iter().enumerate().map(|(i, s)| (s.id, i)).collect();
        let at = |h: HalfBranchRef| sw_index[&t.switch_at(h).unwrap().id];
        let mut seq = Vec::with_capacity(3 * order.len());
        for &v in &order {
            for hb in sws[v].slots() {
                let b = hb.branch;
                let (v0, v1) = (at(HalfBranchRef::new(b, 0)), at(HalfBranchRef::new(b, 1)));
                let gb = then(&then(&inverse(&gauge[v0]), &m.holonomy[&b]), &gauge[v1]);
                seq.push(if hb.end == 0 { gb } else { inverse(&gb) });
            }
        }
        let conj = (0..n as u8).filter_map(|x| relabel_from(&seq, x)).min();
        if let Some(c) = conj {
            if best.as_ref().is_none_or(|b| c < *b) {
                best = Some(c);
            }
        }
    }
    let mut key: Vec<u8> = can.code.iter().flat_map(|x| x.to_le_bytes()).collect();
    key.extend(best.unwrap_or_default());
    key
}

/// Which edges the ambient search follows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct AmbientOptions {
    /// Also step along shifts.
    pub with_shifts: bool,
    /// Only follow splits forward, no collapses.
    pub directed: bool,
}

#[derive(Clone, Debug)]
pub struct AmbientBall {
    pub radius: usize,
    pub vertices: Vec<MarkedTrack>,
    /// Distance from the center.
    pub depth: Vec<usize>,
    pub adjacency: Vec<Vec<(usize, Move)>>,
    index: HashMap<Vec<u8>, usize>,
}

impl AmbientBall {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn lookup(&self, m: &MarkedTrack) -> Option<usize> {
        self.index.get(&marked_key(m)).copied()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum()
    }

    /// Distances from `i` along edges inside the ball, ignoring direction.
    pub fn distances(&self, i: usize) -> Vec<Option<u32>> {
        let mut d = vec![None; self.len()];
        d[i] = Some(0);
        let mut q = VecDeque::from([i]);
        while let Some(v) = q.pop_front() {
            for &(u, _) in &self.adjacency[v] {
                if d[u].is_none() {
                    d[u] = Some(d[v].unwrap() + 1);
                    q.push_back(u);
                }
            }
        }
        d
    }

    /// Vertices per distance from the center.
    pub fn sphere_sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.radius + 1];
        for &d in &self.depth {
            s[d] += 1;
        }
        s
    }
}

fn neighbors(m: &MarkedTrack, opts: AmbientOptions) -> Vec<(Move, MarkedTrack)> {
    let t = &m.track;
    let mut moves = Vec::new();
    for e in t.large_branches() {
        for d in [SplitDirection::Right, SplitDirection::Left] {
            moves.push(Move::Split(SplitMove::new(e, d)));
        }
    }
    if !opts.directed {
        for b in t.branches() {
            for d in [SplitDirection::Right, SplitDirection::Left] {
                if is_collapsible(t, b, d) {
                    moves.push(Move::Collapse(b, d));
                }
            }
        }
    }
    if opts.with_shifts {
        moves.extend(t.branches_of_kind(BranchKind::Mixed).into_iter().map(Move::Shift));
    }
    moves
        .into_iter()
        .filter_map(|mv| {
            let n = apply_marked(m, mv).ok()?;
            // Splits can lose recurrence; such tracks are not vertices.
            let keep = !matches!(mv, Move::Split(_)) || is_recurrent(&n.track).is_some();
            keep.then_some((mv, n))
        })
        .collect()
}

/// Breadth-first ball of the given radius around a marked track.
pub fn tt_ball(center: &MarkedTrack, radius: usize, opts: AmbientOptions) -> AmbientBall {
    let mut ball = AmbientBall {
        radius,
        vertices: vec![center.clone()],
        depth: vec![0],
        adjacency: vec![Vec::new()],
        index: HashMap::from([(marked_key(center), 0)]),
    };
    let mut frontier = vec![0usize];
    for r in 0..radius {
        let found: Vec<Vec<(Move, MarkedTrack, Vec<u8>)>> = frontier
            .par_iter()
            .map(|&i| {
                neighbors(&ball.vertices[i], opts)
                    .into_iter()
                    .map(|(mv, n)| {
                        let k = marked_key(&n);
                        (mv, n, k)
                    })
                    .collect()
            })
            .collect();
        let mut next = Vec::new();
        for (&i, list) in frontier.iter().zip(found) {
            for (mv, n, k) in list {
                let j = match ball.index.get(&k) {
                    Some(&j) => j,
                    None => {
                        let j = ball.vertices.len();
                        ball.vertices.push(n);
                        ball.depth.push(r + 1);
                        ball.adjacency.push(Vec::new());
                        ball.index.insert(k, j);
                        next.push(j);
                        j
                    }
                };
                if j != i && !ball.adjacency[i].iter().any(|&(x, _)| x == j) {
                    ball.adjacency[i].push((j, mv));
                    ball.adjacency[j].push((i, mv.inverse()));
                }
            }
        }
        frontier = next;
    }
    ball
}

/// Marks a cone vertex by replaying its witness word on a marked basepoint.
pub fn mark_along(base: &MarkedTrack, word: &[SplitMove]) -> Result<MarkedTrack> {
    word.iter().try_fold(base.clone(), |m, mv| apply_marked(&m, Move::Split(*mv)))
}

#[derive(Clone, Debug)]
pub struct DistortionReport {
    pub cone_vertices: usize,
    pub ambient_vertices: usize,
    pub pairs: usize,
    /// Largest cone distance over ambient distance among distinct pairs.
    pub max_ratio: f64,
    /// A pair attaining it, as (cone distance, ambient distance).
    pub worst: (u32, u32),
    /// Pairs of distinct cone vertices the marking could not tell apart.
    pub identified: usize,
}

/// Compares cone distance with ambient distance on every pair of vertices
/// of a cone ball. Ambient distances are measured inside the ambient ball
/// of the same radius, which contains the cone ball.
pub fn distortion(base: &MarkedTrack, proxy: &LaminationProxy, radius: usize, opts: AmbientOptions) -> Result<DistortionReport> {
    let cone: FlatCone = cone_ball(&base.track, proxy, radius)?;
    let ball = tt_ball(base, radius, opts);
    let mut at = Vec::with_capacity(cone.len());
    for v in &cone.vertices {
        let m = mark_along(base, &v.witness)?;
        at.push(ball.lookup(&m).ok_or_else(|| TtError::Invalid("cone vertex missing from the ambient ball".into()))?);
    }
    let dist: Vec<Vec<Option<u32>>> = at.par_iter().map(|&i| ball.distances(i)).collect();
    let mut rep = DistortionReport {
        cone_vertices: cone.len(),
        ambient_vertices: ball.len(),
        pairs: 0,
        max_ratio: 1.0,
        worst: (0, 0),
        identified: 0,
    };
    for a in 0..cone.len() {
        for b in a + 1..cone.len() {
            rep.pairs += 1;
            let de = cone.vertices[a].phi.l1(&cone.vertices[b].phi);
            let da = dist[a][at[b]].expect("ball is connected");
            if da == 0 {
                rep.identified += 1;
                continue;
            }
            let r = de as f64 / da as f64;
            if r > rep.max_ratio || rep.worst == (0, 0) {
                rep.max_ratio = rep.max_ratio.max(r);
                rep.worst = (de, da);
            }
        }
    }
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistRow {
    pub power: usize,
    pub word_length: usize,
    pub phi_norm: u32,
    /// Ambient distance from the start when it is within the searched ball.
    pub ambient: Option<u32>,
    /// Whether the marking tells the twisted track from the start.
    pub marked_distinct: bool,
}

/// Powers of the twist about one pants curve: word length against cone
/// distance, with the ambient distance where a ball of `ambient_radius`
/// reaches.
pub fn twist_growth(
    pt: &crate::generators::PantsTrack,
    base: &MarkedTrack,
    curve: usize,
    n: usize,
    ambient_radius: usize,
) -> Result<Vec<TwistRow>> {
    let proxy = LaminationProxy::Uniform(SplitDirection::Right);
    let one = crate::generators::twist_word(pt, curve)?;
    let ball = tt_ball(base, ambient_radius, AmbientOptions::default());
    let key0 = marked_key(base);
    let d0 = ball.distances(0);
    let mut rows = Vec::new();
    let mut word = Vec::new();
    let mut cur = base.clone();
    for p in 1..=n {
        for mv in &one {
            cur = apply_marked(&cur, Move::Split(*mv))?;
        }
        word.extend(one.iter().copied());
        let phi = phi_of_word(&pt.track, &proxy, &word)?;
        rows.push(TwistRow {
            power: p,
            word_length: word.len(),
            phi_norm: phi.norm(),
            ambient: ball.lookup(&cur).and_then(|i| d0[i]),
            marked_distinct: marked_key(&cur) != key0,
        });
    }
    Ok(rows)
}
