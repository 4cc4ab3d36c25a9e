//! Flat cones: every track reachable from a basepoint by proxy-directed
//! splits, embedded in the nonnegative integer lattice.
//!
//! Moves keep branch identifiers, so the inherited numbering of a branch is
//! its identifier and Φ is simply the per-branch count of splits along any
//! witness word. Vertices are keyed by Φ; when two words reach the same
//! point the two tracks are compared label for label and any disagreement
//! is recorded rather than merged away.
//!
//! The lattice shortcuts (componentwise min for the meet, max for the join,
//! L1 for distance) each have a brute-force counterpart on the enumerated
//! graph so callers can check one against the other.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde_json::json;

use crate::error::{Result, TtError};
use crate::moves::{lambda_split, split, LaminationProxy, SplitMove};
use crate::track_core::{BranchId, TrainTrack};

/// Largest radius [`cone_ball`] accepts.
pub const DEFAULT_RADIUS_CAP: usize = 6;

/// A point of the nonnegative lattice, one coordinate per basepoint branch.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LatticePoint(pub Vec<u32>);

impl LatticePoint {
    pub fn zero(m: usize) -> Self {
        LatticePoint(vec![0; m])
    }

    pub fn norm(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn l1(&self, other: &LatticePoint) -> u32 {
        self.0.iter().zip(&other.0).map(|(a, b)| a.abs_diff(*b)).sum()
    }

    pub fn meet(&self, other: &LatticePoint) -> LatticePoint {
        LatticePoint(self.0.iter().zip(&other.0).map(|(a, b)| *a.min(b)).collect())
    }

    pub fn join(&self, other: &LatticePoint) -> LatticePoint {
        LatticePoint(self.0.iter().zip(&other.0).map(|(a, b)| *a.max(b)).collect())
    }

    pub fn le(&self, other: &LatticePoint) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl FromStr for LatticePoint {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim().trim_start_matches('(').trim_end_matches(')');
        if s.is_empty() {
            return Ok(LatticePoint(Vec::new()));
        }
        s.split(',')
            .map(|x| x.trim().parse::<u32>().map_err(|_| format!("bad coordinate {:?}", x)))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(LatticePoint)
    }
}

#[derive(Clone, Debug)]
pub struct ConeVertex {
    pub track: TrainTrack,
    pub phi: LatticePoint,
    /// One proxy-directed word from the basepoint to this vertex.
    pub witness: Vec<SplitMove>,
    /// The proxy as seen from this vertex.
    pub proxy: LaminationProxy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConeEdge {
    pub from: usize,
    pub to: usize,
    pub mv: SplitMove,
}

/// A split the proxy could not decide, cutting the cone short.
#[derive(Clone, Debug)]
pub struct Truncation {
    pub vertex: usize,
    pub branch: BranchId,
    pub error: String,
}

#[derive(Clone, Debug)]
pub struct FlatCone {
    pub basepoint: TrainTrack,
    pub proxy: LaminationProxy,
    pub radius: usize,
    /// Coordinate order: the basepoint's branch identifiers, ascending.
    pub branches: Vec<BranchId>,
    pub vertices: Vec<ConeVertex>,
    pub edges: Vec<ConeEdge>,
    pub truncations: Vec<Truncation>,
    /// How many times a second word reached an already known Φ.
    pub collisions: usize,
    /// Φ values reached by two words whose tracks differ.
    pub collision_failures: Vec<LatticePoint>,
    index: HashMap<LatticePoint, usize>,
    out: Vec<Vec<usize>>,
    inn: Vec<Vec<usize>>,
}

fn unit(branches: &[BranchId], p: &LatticePoint, b: BranchId) -> Result<LatticePoint> {
    let i = branches.binary_search(&b).map_err(|_| TtError::UnknownBranch(b))?;
    let mut q = p.clone();
    q.0[i] += 1;
    Ok(q)
}

/// Enumerates the cone out to `radius` splits, refusing radii above
/// [`DEFAULT_RADIUS_CAP`].
pub fn cone_ball(basepoint: &TrainTrack, proxy: &LaminationProxy, radius: usize) -> Result<FlatCone> {
    if radius > DEFAULT_RADIUS_CAP {
        return Err(TtError::RadiusExceeded);
    }
    cone_ball_uncapped(basepoint, proxy, radius)
}

/// [`cone_ball`] without the radius guard.
pub fn cone_ball_uncapped(basepoint: &TrainTrack, proxy: &LaminationProxy, radius: usize) -> Result<FlatCone> {
    // Fail early on a proxy that does not fit the basepoint at all.
    if let LaminationProxy::Measure(mu) = proxy {
        let bad = crate::track_core::check_measure(basepoint, mu)?;
        if !bad.is_empty() || !mu.is_positive() {
            return Err(TtError::NotCarried("measure is not a positive measure on the basepoint".into()));
        }
    }
    let branches: Vec<BranchId> = basepoint.branches().collect();
    let origin = LatticePoint::zero(branches.len());
    let mut cone = FlatCone {
        basepoint: basepoint.clone(),
        proxy: proxy.clone(),
        radius,
        branches,
        vertices: vec![ConeVertex { track: basepoint.clone(), phi: origin.clone(), witness: Vec::new(), proxy: proxy.clone() }],
        edges: Vec::new(),
        truncations: Vec::new(),
        collisions: 0,
        collision_failures: Vec::new(),
        index: HashMap::from([(origin, 0)]),
        out: vec![Vec::new()],
        inn: vec![Vec::new()],
    };
    let mut frontier = vec![0usize];
    for _ in 0..radius {
        let expansions: Vec<Vec<(BranchId, Result<(TrainTrack, SplitMove, LaminationProxy)>)>> = frontier
            .par_iter()
            .map(|&i| {
                let v = &cone.vertices[i];
                v.track
                    .large_branches()
                    .into_iter()
                    .map(|e| (e, lambda_split(&v.track, e, &v.proxy).map(|(out, d, p)| (out.track, SplitMove::new(e, d), p))))
                    .collect()
            })
            .collect();
        let mut next = Vec::new();
        for (&i, exp) in frontier.iter().zip(expansions) {
            for (e, res) in exp {
                let (track, mv, p) = match res {
                    Ok(x) => x,
                    Err(err) => {
                        cone.truncations.push(Truncation { vertex: i, branch: e, error: err.to_string() });
                        continue;
                    }
                };
                let phi = unit(&cone.branches, &cone.vertices[i].phi, e)?;
                let j = match cone.index.get(&phi) {
                    Some(&j) => {
                        cone.collisions += 1;
                        if cone.vertices[j].track != track {
                            cone.collision_failures.push(phi.clone());
                        }
                        j
                    }
                    None => {
                        let j = cone.vertices.len();
                        let mut witness = cone.vertices[i].witness.clone();
                        witness.push(mv);
                        cone.vertices.push(ConeVertex { track, phi: phi.clone(), witness, proxy: p });
                        cone.index.insert(phi, j);
                        cone.out.push(Vec::new());
                        cone.inn.push(Vec::new());
                        next.push(j);
                        j
                    }
                };
                let id = cone.edges.len();
                cone.edges.push(ConeEdge { from: i, to: j, mv });
                cone.out[i].push(id);
                cone.inn[j].push(id);
            }
        }
        frontier = next;
    }
    Ok(cone)
}

/// Φ of a proxy-directed word, replayed from `basepoint`. Each move must be
/// the split the proxy prescribes.
pub fn phi_of_word(basepoint: &TrainTrack, proxy: &LaminationProxy, word: &[SplitMove]) -> Result<LatticePoint> {
    let branches: Vec<BranchId> = basepoint.branches().collect();
    let mut p = LatticePoint::zero(branches.len());
    let mut track = basepoint.clone();
    let mut lam = proxy.clone();
    for (index, mv) in word.iter().enumerate() {
        let step = || -> Result<(TrainTrack, LaminationProxy)> {
            let d = lam.direction(&track, mv.at)?;
            if d != mv.direction {
                return Err(TtError::NotCarried(format!("the proxy splits branch {} the other way", mv.at)));
            }
            let next = lam.after_split(&track, *mv)?;
            Ok((split(&track, *mv)?.track, next))
        };
        let (t, l) = step().map_err(|e| TtError::SequenceFailed { index, source: Box::new(e) })?;
        track = t;
        lam = l;
        p = unit(&branches, &p, mv.at)?;
    }
    Ok(p)
}

/// Φ of a word relative to a cone's basepoint and proxy.
pub fn phi(cone: &FlatCone, word: &[SplitMove]) -> Result<LatticePoint> {
    phi_of_word(&cone.basepoint, &cone.proxy, word)
}

impl FlatCone {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn index_of(&self, p: &LatticePoint) -> Result<usize> {
        self.index.get(p).copied().ok_or(TtError::NotInCone)
    }

    pub fn vertex(&self, p: &LatticePoint) -> Result<&ConeVertex> {
        Ok(&self.vertices[self.index_of(p)?])
    }

    pub fn out_edges(&self, i: usize) -> impl Iterator<Item = &ConeEdge> + '_ {
        self.out[i].iter().map(move |&k| &self.edges[k])
    }

    pub fn in_edges(&self, i: usize) -> impl Iterator<Item = &ConeEdge> + '_ {
        self.inn[i].iter().map(move |&k| &self.edges[k])
    }

    /// Number of vertices with `|Φ|₁ ≤ k`.
    pub fn ball_size(&self, k: usize) -> usize {
        self.vertices.iter().filter(|v| v.phi.norm() as usize <= k).count()
    }

    fn closure(&self, start: usize, forward: bool) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            let next: Vec<usize> = if forward {
                self.out_edges(v).map(|e| e.to).collect()
            } else {
                self.in_edges(v).map(|e| e.from).collect()
            };
            for u in next {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen
    }

    /// Vertices this one splits to, itself included, found by graph search.
    pub fn descendants(&self, i: usize) -> Vec<bool> {
        self.closure(i, true)
    }

    /// Vertices splittable to this one, itself included.
    pub fn ancestors(&self, i: usize) -> Vec<bool> {
        self.closure(i, false)
    }

    /// Undirected edge distances from `i` inside the enumerated graph.
    pub fn bfs_distances(&self, i: usize) -> Vec<Option<u32>> {
        self.multi_source_bfs(&[i])
    }

    pub fn multi_source_bfs(&self, sources: &[usize]) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.len()];
        let mut q = VecDeque::new();
        for &s in sources {
            dist[s] = Some(0);
            q.push_back(s);
        }
        while let Some(v) = q.pop_front() {
            let d = dist[v].unwrap();
            let nbrs = self.out_edges(v).map(|e| e.to).chain(self.in_edges(v).map(|e| e.from));
            for u in nbrs.collect::<Vec<_>>() {
                if dist[u].is_none() {
                    dist[u] = Some(d + 1);
                    q.push_back(u);
                }
            }
        }
        dist
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.vertices[a].phi.cmp(&self.vertices[b].phi));
        let vertices: Vec<_> = order
            .iter()
            .map(|&i| {
                let v = &self.vertices[i];
                json!({
                    "phi": v.phi.0,
                    "witness": v.witness.iter().map(|m| format!("{}{}", m.at, m.direction.letter())).collect::<Vec<_>>(),
                    "track": crate::track_core::write_tt(&v.track),
                })
            })
            .collect();
        let mut edges: Vec<_> = self.edges.iter().map(|e| (&self.vertices[e.from].phi, &self.vertices[e.to].phi, e.mv)).collect();
        edges.sort();
        let edges: Vec<_> = edges
            .into_iter()
            .map(|(a, b, mv)| json!({"from": a.0, "to": b.0, "branch": mv.at, "direction": mv.direction.letter()}))
            .collect();
        json!({
            "schema": "ttkit-1",
            "kind": "flat-cone",
            "radius": self.radius,
            "branches": self.branches,
            "basepoint": crate::track_core::write_tt(&self.basepoint),
            "vertices": vertices,
            "edges": edges,
            "truncations": self.truncations.iter().map(|t| json!({"phi": self.vertices[t.vertex].phi.0, "branch": t.branch, "error": t.error})).collect::<Vec<_>>(),
        })
    }

    pub fn to_dot(&self) -> String {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.vertices[a].phi.cmp(&self.vertices[b].phi));
        let name: BTreeMap<usize, usize> = order.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let mut s = String::from("digraph cone {\n");
        for &i in &order {
            s += &format!("  v{} [label=\"{}\"];\n", name[&i], self.vertices[i].phi);
        }
        let mut edges: Vec<(usize, usize, SplitMove)> = self.edges.iter().map(|e| (name[&e.from], name[&e.to], e.mv)).collect();
        edges.sort();
        for (a, b, mv) in edges {
            s += &format!("  v{} -> v{} [label=\"{}{}\"];\n", a, b, mv.at, mv.direction.letter());
        }
        s += "}\n";
        s
    }

    /// Reads the vertex Φ values and edges back from [`FlatCone::to_json`]
    /// output, enough to answer distance queries without the tracks.
    pub fn lattice_from_json(v: &serde_json::Value) -> Result<(Vec<LatticePoint>, Vec<(LatticePoint, LatticePoint)>)> {
        let bad = |m: &str| TtError::Invalid(format!("cone json: {}", m));
        if v.get("schema").and_then(|s| s.as_str()) != Some("ttkit-1") {
            return Err(bad("missing or unknown schema"));
        }
        let pt = |x: &serde_json::Value| -> Result<LatticePoint> {
            x.as_array()
                .ok_or_else(|| bad("phi is not an array"))?
                .iter()
                .map(|c| c.as_u64().map(|c| c as u32).ok_or_else(|| bad("coordinate is not an integer")))
                .collect::<Result<Vec<_>>>()
                .map(LatticePoint)
        };
        let verts = v["vertices"].as_array().ok_or_else(|| bad("no vertices"))?.iter().map(|x| pt(&x["phi"])).collect::<Result<Vec<_>>>()?;
        let edges = v["edges"]
            .as_array()
            .ok_or_else(|| bad("no edges"))?
            .iter()
            .map(|e| Ok((pt(&e["from"])?, pt(&e["to"])?)))
            .collect::<Result<Vec<_>>>()?;
        Ok((verts, edges))
    }
}

/// Meet by the lattice shortcut: the vertex at the componentwise minimum.
pub fn theta_minus(cone: &FlatCone, a: usize, b: usize) -> Result<usize> {
    let p = cone.vertices[a].phi.meet(&cone.vertices[b].phi);
    cone.index_of(&p)
}

/// Meet by brute force: the common ancestors, and among them the one every
/// other common ancestor splits to.
pub fn theta_minus_brute(cone: &FlatCone, a: usize, b: usize) -> Result<usize> {
    let (x, y) = (cone.ancestors(a), cone.ancestors(b));
    let common: Vec<usize> = (0..cone.len()).filter(|&i| x[i] && y[i]).collect();
    for &c in &common {
        let up = cone.ancestors(c);
        if common.iter().all(|&o| up[o]) {
            return Ok(c);
        }
    }
    Err(TtError::NotInCone)
}

/// Join by the lattice shortcut. Fails with `RadiusExceeded` when the
/// join lies beyond the enumerated ball.
pub fn theta_plus(cone: &FlatCone, a: usize, b: usize) -> Result<usize> {
    let p = cone.vertices[a].phi.join(&cone.vertices[b].phi);
    if p.norm() as usize > cone.radius {
        return Err(TtError::RadiusExceeded);
    }
    cone.index_of(&p)
}

/// Join by brute force: the common descendant that splits to every other
/// common descendant in the ball.
pub fn theta_plus_brute(cone: &FlatCone, a: usize, b: usize) -> Result<usize> {
    let (x, y) = (cone.descendants(a), cone.descendants(b));
    let common: Vec<usize> = (0..cone.len()).filter(|&i| x[i] && y[i]).collect();
    if common.is_empty() {
        return Err(TtError::RadiusExceeded);
    }
    for &c in &common {
        let d = cone.descendants(c);
        if common.iter().all(|&o| d[o]) {
            return Ok(c);
        }
    }
    Err(TtError::NotInCone)
}

/// Distance by the lattice shortcut.
pub fn distance(cone: &FlatCone, a: usize, b: usize) -> u32 {
    cone.vertices[a].phi.l1(&cone.vertices[b].phi)
}

/// Distance by breadth-first search in the enumerated graph.
pub fn distance_bfs(cone: &FlatCone, a: usize, b: usize) -> Option<u32> {
    cone.bfs_distances(a)[b]
}

#[derive(Clone, Debug, Default)]
pub struct ConvexityReport {
    pub subcone_size: usize,
    pub pairs_checked: usize,
    /// Largest distance from a checked vertex to the sub-cone.
    pub hausdorff: u32,
    /// The bound it must respect, `d(basepoint, σ)`.
    pub bound: u32,
    pub violations: Vec<String>,
}

impl ConvexityReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that the sub-cone below `sigma` is convex and that every vertex
/// within `radius` of the basepoint lies within `d(basepoint, σ)` of it.
///
/// Geodesics are enumerated as the vertices `z` with
/// `d(x,z) + d(z,y) = d(x,y)` in the enumerated graph, for pairs whose join
/// still fits in the ball so that no geodesic can leave it. The Hausdorff
/// part needs `radius + |Φσ| ≤ cone.radius`; otherwise a violation saying
/// so is reported.
pub fn subcone_convexity_check(cone: &FlatCone, sigma: usize, radius: usize) -> ConvexityReport {
    let mut rep = ConvexityReport { bound: cone.vertices[sigma].phi.norm(), ..Default::default() };
    if radius + rep.bound as usize > cone.radius {
        rep.violations.push(format!("ball of radius {} too small to bound distances from radius {}", cone.radius, radius));
        return rep;
    }
    let inside = cone.descendants(sigma);
    let members: Vec<usize> = (0..cone.len()).filter(|&i| inside[i]).collect();
    rep.subcone_size = members.len();
    let dists: Vec<Vec<Option<u32>>> = members.par_iter().map(|&x| cone.bfs_distances(x)).collect();
    for (ix, &x) in members.iter().enumerate() {
        for (iy, &y) in members.iter().enumerate().skip(ix + 1) {
            if cone.vertices[x].phi.join(&cone.vertices[y].phi).norm() as usize > cone.radius {
                continue;
            }
            rep.pairs_checked += 1;
            let Some(dxy) = dists[ix][y] else {
                rep.violations.push(format!("{} and {} are disconnected", cone.vertices[x].phi, cone.vertices[y].phi));
                continue;
            };
            for z in 0..cone.len() {
                if let (Some(a), Some(b)) = (dists[ix][z], dists[iy][z]) {
                    if a + b == dxy && !inside[z] {
                        rep.violations.push(format!(
                            "geodesic from {} to {} passes {} outside the sub-cone",
                            cone.vertices[x].phi, cone.vertices[y].phi, cone.vertices[z].phi
                        ));
                    }
                }
            }
        }
    }
    let to_sub = cone.multi_source_bfs(&members);
    for (z, v) in cone.vertices.iter().enumerate() {
        if v.phi.norm() as usize > radius {
            continue;
        }
        match to_sub[z] {
            Some(d) => {
                rep.hausdorff = rep.hausdorff.max(d);
                if d > rep.bound {
                    rep.violations.push(format!("{} is {} from the sub-cone, bound {}", v.phi, d, rep.bound));
                }
            }
            None => rep.violations.push(format!("{} cannot reach the sub-cone", v.phi)),
        }
    }
    rep
}

/// Searches for a proxy-directed word from `track` (sitting at lattice
/// point `from`) to the vertex at `target`, stepping only through points
/// below `target`. Coordinates are indexed by `branches`.
pub fn search_word(
    track: &TrainTrack,
    proxy: &LaminationProxy,
    branches: &[BranchId],
    from: &LatticePoint,
    target: &LatticePoint,
) -> Result<Option<Vec<SplitMove>>> {
    if !from.le(target) {
        return Ok(None);
    }
    let mut seen = std::collections::HashSet::new();
    let mut stack = vec![(track.clone(), proxy.clone(), from.clone(), Vec::new())];
    while let Some((t, lam, p, word)) = stack.pop() {
        if &p == target {
            return Ok(Some(word));
        }
        if !seen.insert(p.clone()) {
            continue;
        }
        for e in t.large_branches() {
            let q = unit(branches, &p, e)?;
            if !q.le(target) || seen.contains(&q) {
                continue;
            }
            let (out, d, next) = lambda_split(&t, e, &lam)?;
            let mut w = word.clone();
            w.push(SplitMove::new(e, d));
            stack.push((out.track, next, q, w));
        }
    }
    Ok(None)
}
