//! The colored trivalent graph of a track and its canonical form.
//!
//! Each switch becomes a vertex whose large half-edge is red, left small
//! half-edge yellow and right small half-edge green. Because the three
//! half-edges at a vertex carry distinct colors, a connected colored graph
//! has at most one color-preserving isomorphism onto another once the image
//! of a single vertex is fixed. Canonicalization therefore refines colors
//! to pick a small class of start vertices and numbers the graph by a
//! port-ordered breadth-first search from each; the least code wins.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use crate::error::{Result, TtError};
use crate::track_core::{BranchId, HalfBranchRef, Side, Slot, SwitchId, TrainTrack};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Color {
    Red,
    Yellow,
    Green,
}

impl Color {
    pub const ALL: [Color; 3] = [Color::Red, Color::Yellow, Color::Green];

    pub fn index(self) -> usize {
        self as usize
    }

    fn from_slot(s: Slot) -> Color {
        match s {
            Slot::Large => Color::Red,
            Slot::SmallLeft => Color::Yellow,
            Slot::SmallRight => Color::Green,
        }
    }
}

/// A half-edge: vertex index plus color.
pub type Port = (usize, Color);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColoredGraph {
    /// `partner[v][c]` is the other half-edge of the edge leaving `v` in color `c`.
    pub partner: Vec<[Port; 3]>,
    /// `punctured[v][c]`: the region seen on the left when arriving at `(v, c)` is punctured.
    pub punctured: Vec<[bool; 3]>,
    /// Switch id behind each vertex.
    pub switch_ids: Vec<SwitchId>,
    /// Branch id behind each half-edge.
    pub branch_ids: Vec<[BranchId; 3]>,
}

/// A region traced from colors alone: cusp count, puncture flag and the
/// lengths of its smooth sides in boundary order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ColorRegion {
    pub cusps: usize,
    pub punctured: bool,
    pub arrivals: Vec<Port>,
}

impl ColoredGraph {
    pub fn vertex_count(&self) -> usize {
        self.partner.len()
    }

    pub fn edge_count(&self) -> usize {
        let ports = 3 * self.partner.len();
        ports / 2
    }

    /// Rebuilds the graph with vertices renumbered by `perm` (old -> new).
    pub fn permuted(&self, perm: &[usize]) -> ColoredGraph {
        let n = self.vertex_count();
        let mut partner = vec![[(0, Color::Red); 3]; n];
        let mut punctured = vec![[false; 3]; n];
        let mut switch_ids = vec![0; n];
        let mut branch_ids = vec![[0; 3]; n];
        for v in 0..n {
            let nv = perm[v];
            for c in Color::ALL {
                let (u, cu) = self.partner[v][c.index()];
                partner[nv][c.index()] = (perm[u], cu);
            }
            punctured[nv] = self.punctured[v];
            switch_ids[nv] = self.switch_ids[v];
            branch_ids[nv] = self.branch_ids[v];
        }
        ColoredGraph { partner, punctured, switch_ids, branch_ids }
    }

    /// The same graph with yellow and green exchanged at vertex `v`.
    pub fn with_swapped_smalls(&self, v: usize) -> ColoredGraph {
        let mut g = self.clone();
        let swap = |c: Color| match c {
            Color::Yellow => Color::Green,
            Color::Green => Color::Yellow,
            Color::Red => Color::Red,
        };
        let (y, gr) = (g.partner[v][1], g.partner[v][2]);
        g.partner[v][1] = gr;
        g.partner[v][2] = y;
        for u in 0..g.vertex_count() {
            for c in 0..3 {
                let (w, cw) = g.partner[u][c];
                if w == v && cw != Color::Red {
                    g.partner[u][c] = (w, swap(cw));
                }
            }
        }
        g
    }

    fn next_arrival(&self, (v, c): Port) -> (Port, bool) {
        let (out, cusp) = match c {
            Color::Red => (Color::Yellow, false),
            Color::Green => (Color::Red, false),
            Color::Yellow => (Color::Green, true),
        };
        (self.partner[v][out.index()], cusp)
    }
}

/// Reads colors straight off the switch slots.
pub fn colored_graph(track: &TrainTrack) -> ColoredGraph {
    let n = track.switch_count();
    let sws = track.switches();
    let index: BTreeMap<SwitchId, usize> = sws.iter().enumerate().map(|(i, s)| (s.id, i)).collect();
    let port = |h: HalfBranchRef| -> Port {
        let l = track.location(h).expect("half-branch in track");
        (index[&sws[l.switch].id], Color::from_slot(l.slot))
    };
    let mut partner = vec![[(0, Color::Red); 3]; n];
    let mut branch_ids = vec![[0; 3]; n];
    let mut punctured = vec![[false; 3]; n];
    let keys = track.region_key_map();
    for (i, s) in sws.iter().enumerate() {
        for slot in Slot::ALL {
            let h = s.slot(slot);
            let c = Color::from_slot(slot);
            partner[i][c.index()] = port(h.opposite());
            branch_ids[i][c.index()] = h.branch;
            // Arriving at this half-edge means traveling toward its end.
            let side = Side::new(h.branch, h.end);
            punctured[i][c.index()] = track.punctures().contains(&keys[&side]);
        }
    }
    ColoredGraph { partner, punctured, switch_ids: sws.iter().map(|s| s.id).collect(), branch_ids }
}

/// Region boundaries computed from colors: red in, yellow out; green in,
/// red out; yellow in is a cusp, green out.
pub fn regions_from_colors(g: &ColoredGraph) -> Vec<ColorRegion> {
    let n = g.vertex_count();
    let mut seen = vec![[false; 3]; n];
    let mut out = Vec::new();
    for v in 0..n {
        for c in Color::ALL {
            if seen[v][c.index()] {
                continue;
            }
            let start = (v, c);
            let mut cur = start;
            let mut cusps = 0;
            let mut arrivals = Vec::new();
            loop {
                seen[cur.0][cur.1.index()] = true;
                arrivals.push(cur);
                let (nx, cusp) = g.next_arrival(cur);
                cusps += cusp as usize;
                cur = nx;
                if cur == start {
                    break;
                }
            }
            out.push(ColorRegion { cusps, punctured: g.punctured[v][c.index()], arrivals });
        }
    }
    out
}

/// Canonical numbering data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Canonical {
    /// The certificate bytes.
    pub code: Vec<u32>,
    /// Every numbering (old vertex -> new vertex) that produces `code`; more
    /// than one exactly when the graph has nontrivial automorphisms.
    pub labelings: Vec<Vec<usize>>,
}

impl Canonical {
    pub fn hex(&self) -> String {
        let mut s = String::with_capacity(self.code.len() * 2);
        for x in &self.code {
            write!(s, "{:02x}", x).unwrap();
        }
        s
    }

    /// Order of the color-preserving automorphism group.
    pub fn automorphisms(&self) -> usize {
        self.labelings.len()
    }
}

fn rank<T: Ord + Clone>(keys: &[T]) -> Vec<u32> {
    let mut sorted: Vec<T> = keys.to_vec();
    sorted.sort();
    sorted.dedup();
    keys.iter().map(|k| sorted.binary_search(k).unwrap() as u32).collect()
}

/// Stable color refinement; returns a relabeling-invariant class per vertex.
pub fn refine(g: &ColoredGraph) -> Vec<u32> {
    let n = g.vertex_count();
    let init: Vec<Vec<u32>> = (0..n)
        .map(|v| {
            let mut k = Vec::new();
            for c in 0..3 {
                let (u, cu) = g.partner[v][c];
                k.push(cu as u32);
                k.push((u == v) as u32);
                k.push(g.punctured[v][c] as u32);
            }
            k
        })
        .collect();
    let mut col = rank(&init);
    loop {
        let keys: Vec<(u32, [(u32, u32); 3])> = (0..n)
            .map(|v| {
                let mut ks = [(0, 0); 3];
                for c in 0..3 {
                    let (u, cu) = g.partner[v][c];
                    ks[c] = (col[u], cu as u32);
                }
                (col[v], ks)
            })
            .collect();
        let next = rank(&keys);
        let classes = |c: &[u32]| c.iter().max().map_or(0, |m| m + 1);
        if classes(&next) == classes(&col) {
            return next;
        }
        col = next;
    }
}

fn code_from(g: &ColoredGraph, start: usize) -> Option<(Vec<u32>, Vec<usize>)> {
    let n = g.vertex_count();
    let mut num = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    let mut q = VecDeque::new();
    num[start] = 0;
    order.push(start);
    q.push_back(start);
    while let Some(v) = q.pop_front() {
        for c in 0..3 {
            let (u, _) = g.partner[v][c];
            if num[u] == usize::MAX {
                num[u] = order.len();
                order.push(u);
                q.push_back(u);
            }
        }
    }
    if order.len() != n {
        return None;
    }
    let mut code = Vec::with_capacity(7 * n);
    for &v in &order {
        for c in 0..3 {
            let (u, cu) = g.partner[v][c];
            code.push(num[u] as u32);
            code.push(cu as u32);
        }
        code.push(g.punctured[v].iter().enumerate().map(|(i, &p)| (p as u32) << i).sum());
    }
    Some((code, num))
}

/// Canonical form with every optimal numbering.
pub fn canonical(g: &ColoredGraph) -> Canonical {
    let col = refine(g);
    let best_class = col.iter().copied().min().unwrap_or(0);
    let mut best: Option<Canonical> = None;
    for v in (0..g.vertex_count()).filter(|&v| col[v] == best_class) {
        let Some((code, num)) = code_from(g, v) else { continue };
        match &mut best {
            None => best = Some(Canonical { code, labelings: vec![num] }),
            Some(b) => {
                if code < b.code {
                    *b = Canonical { code, labelings: vec![num] };
                } else if code == b.code {
                    b.labelings.push(num);
                }
            }
        }
    }
    best.unwrap_or(Canonical { code: Vec::new(), labelings: Vec::new() })
}

/// Hex certificate of a colored graph.
pub fn canonical_form(g: &ColoredGraph) -> String {
    canonical(g).hex()
}

/// Hex certificate of a track, puncture marks included.
pub fn orbit_certificate(track: &TrainTrack) -> String {
    canonical_form(&colored_graph(track))
}

/// Whether two complete tracks lie in one mapping class group orbit.
pub fn same_orbit(a: &TrainTrack, b: &TrainTrack) -> Result<bool> {
    let sa = a.surface_signature()?;
    let sb = b.surface_signature()?;
    if sa != sb {
        return Err(TtError::SignatureMismatch(sa.to_string(), sb.to_string()));
    }
    Ok(orbit_certificate(a) == orbit_certificate(b))
}
