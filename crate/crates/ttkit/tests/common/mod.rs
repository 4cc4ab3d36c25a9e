#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::{HashSet, VecDeque};

use ttkit::carrying::{transition_matrix, Agreement, CarriedPosition};
use ttkit::moves::{self, LaminationProxy, Move, SplitMove};
use ttkit::orbit::{colored_graph, regions_from_colors, ColoredGraph};
use ttkit::track_core::{
    check_measure, switch_matrix, BranchId, BranchKind, HalfBranchRef, Slot, SwitchId, TrainTrack, TransverseMeasure,
};

pub const SURFACES: [&str; 3] = ["S05A", "S12A", "S20A"];

pub fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Faces of the ribbon graph by the textbook rotation-system walk, each
/// reported as its number of cusp corners. Counterclockwise order at a
/// switch is large, small-right, small-left; the cusp is the corner between
/// the two small slots.
pub fn rotation_faces(t: &TrainTrack) -> Vec<usize> {
    let ccw = [Slot::Large, Slot::SmallRight, Slot::SmallLeft];
    let mut at: BTreeMap<HalfBranchRef, (SwitchId, usize)> = BTreeMap::new();
    let mut ring: BTreeMap<SwitchId, [HalfBranchRef; 3]> = BTreeMap::new();
    for s in t.switches() {
        let r = [s.slot(ccw[0]), s.slot(ccw[1]), s.slot(ccw[2])];
        for (i, h) in r.iter().enumerate() {
            at.insert(*h, (s.id, i));
        }
        ring.insert(s.id, r);
    }
    let mut seen = BTreeMap::new();
    let mut faces = Vec::new();
    for &start in at.keys() {
        if seen.contains_key(&start) {
            continue;
        }
        let mut cusps = 0;
        let mut d = start;
        loop {
            seen.insert(d, ());
            let o = d.opposite();
            let (s, i) = at[&o];
            let j = (i + 1) % 3;
            // corner between ring positions i and j at switch s
            let pair = [i.min(j), i.max(j)];
            if pair == [1, 2] {
                cusps += 1;
            }
            d = ring[&s][j];
            if d == start {
                break;
            }
        }
        faces.push(cusps);
    }
    faces.sort();
    faces
}

/// Fourier-Motzkin decision of `{A w = 0, w >= 1}`: eliminate the equalities
/// by exact row reduction, then project out the free variables one by one.
pub fn fm_recurrent(t: &TrainTrack) -> bool {
    let a = switch_matrix(t);
    let n = t.branch_count();
    // Constraints `c . x + c0 >= 0` over the kernel coordinates.
    let basis = ttkit::track_core::measure_space_basis(t);
    let k = basis.len();
    let _ = a;
    // w = sum_j x_j basis_j; each w_i >= 1.
    let mut cons: Vec<(Vec<BigRational>, BigRational)> = (0..n)
        .map(|i| ((0..k).map(|j| basis[j][i].clone()).collect(), -BigRational::one()))
        .collect();
    for var in (0..k).rev() {
        let (pos, rest): (Vec<_>, Vec<_>) = cons.into_iter().partition(|c| c.0[var].is_positive());
        let (neg, zero): (Vec<_>, Vec<_>) = rest.into_iter().partition(|c| c.0[var].is_negative());
        let mut next = zero;
        for p in &pos {
            for m in &neg {
                let fp = -m.0[var].clone();
                let fm = p.0[var].clone();
                let c: Vec<BigRational> = p.0.iter().zip(m.0.iter()).map(|(x, y)| x * &fp + y * &fm).collect();
                next.push((c, &p.1 * &fp + &m.1 * &fm));
            }
        }
        next.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.cmp(&y.1)));
        next.dedup();
        cons = next;
    }
    cons.iter().all(|c| !c.1.is_negative() || !c.0.iter().all(Zero::is_zero))
}

/// A random renaming of branches and switches.
pub fn random_relabel<R: Rng>(t: &TrainTrack, rng: &mut R) -> (TrainTrack, BTreeMap<BranchId, BranchId>) {
    let bs: Vec<BranchId> = t.branches().collect();
    let mut nb: Vec<BranchId> = (0..bs.len() as u32).map(|x| 100 + 3 * x).collect();
    nb.shuffle(rng);
    let bm: BTreeMap<BranchId, BranchId> = bs.iter().copied().zip(nb).collect();
    let ss: Vec<SwitchId> = t.switches().iter().map(|s| s.id).collect();
    let mut ns: Vec<SwitchId> = (0..ss.len() as u32).map(|x| 500 + 7 * x).collect();
    ns.shuffle(rng);
    let sm: BTreeMap<SwitchId, SwitchId> = ss.into_iter().zip(ns).collect();
    (t.relabel(&bm, &sm).unwrap(), bm)
}

/// Counts color-preserving isomorphisms `g -> h` by plain backtracking over
/// vertex bijections, checking every edge between assigned vertices.
pub fn brute_isomorphisms(g: &ttkit::orbit::ColoredGraph, h: &ttkit::orbit::ColoredGraph) -> usize {
    fn go(g: &ttkit::orbit::ColoredGraph, h: &ttkit::orbit::ColoredGraph, map: &mut Vec<usize>, used: &mut Vec<bool>) -> usize {
        let v = map.len();
        if v == g.vertex_count() {
            return 1;
        }
        let mut total = 0;
        for t in 0..h.vertex_count() {
            if used[t] || g.punctured[v] != h.punctured[t] {
                continue;
            }
            map.push(t);
            let ok = (0..=v).all(|u| {
                (0..3).all(|c| {
                    let (x, cx) = g.partner[u][c];
                    if x > v {
                        return true;
                    }
                    h.partner[map[u]][c] == (map[x], cx)
                })
            });
            if ok {
                used[t] = true;
                total += go(g, h, map, used);
                used[t] = false;
            }
            map.pop();
        }
        total
    }
    if g.vertex_count() != h.vertex_count() {
        return 0;
    }
    go(g, h, &mut Vec::new(), &mut vec![false; h.vertex_count()])
}

/// A track reached from a catalog track by a random walk of splits and
/// shifts, then renamed at random.
pub fn random_track<R: Rng>(rng: &mut R, steps: usize) -> TrainTrack {
    use ttkit::moves::{apply, Move, SplitDirection, SplitMove};
    let name = SURFACES[rng.gen_range(0..SURFACES.len())];
    let mut t = ttkit::generators::catalog(name).unwrap();
    for _ in 0..steps {
        let large = t.large_branches();
        let mixed = t.branches_of_kind(ttkit::track_core::BranchKind::Mixed);
        let m = if !mixed.is_empty() && rng.gen_bool(0.3) {
            Move::Shift(*mixed.choose(rng).unwrap())
        } else {
            let d = if rng.gen_bool(0.5) { SplitDirection::Right } else { SplitDirection::Left };
            // Arbitrary split directions can lose recurrence and with it
            // every large branch; stop there.
            let Some(&e) = large.choose(rng) else { break };
            Move::Split(SplitMove::new(e, d))
        };
        if let Ok(out) = apply(&t, m) {
            t = out.track;
        }
    }
    random_relabel(&t, rng).0
}

/// A carried position over a catalog track with a positive measure on its
/// carried track. Starting from the identity position it walks through
/// measure-directed carried splits, shifts of both realizations, carried
/// collapses that keep the measure positive, and base splits that still
/// carry.
pub fn random_position<R: Rng>(
    rng: &mut R,
    name: &str,
    steps: usize,
) -> (ttkit::carrying::CarriedPosition, ttkit::track_core::TransverseMeasure) {
    use ttkit::carrying::*;
    use ttkit::moves::{measure_after, LaminationProxy, Move, SplitDirection, SplitMove};
    use ttkit::track_core::BranchKind;
    let t = ttkit::generators::catalog(name).unwrap();
    let mut pos = identity_position(&t).unwrap();
    let mut mu = ttkit::generators::random_positive_measure(&t, rng, 1000).unwrap();
    for _ in 0..steps {
        let sig = pos.carried().clone();
        let r: f64 = rng.gen();
        let take = |p: ttkit::Result<CarriedPosition>, m: Move, pos: &mut CarriedPosition, mu: &mut TransverseMeasure| -> bool {
            let Ok(p) = p else { return false };
            match measure_after(&sig, mu, m) {
                Ok(next) if next.is_positive() => {
                    *mu = next;
                    *pos = p;
                    true
                }
                _ => false,
            }
        };
        if r < 0.3 {
            let Some(&e) = sig.large_branches().choose(rng) else { continue };
            let Ok(d) = LaminationProxy::Measure(mu.clone()).direction(&sig, e) else { continue };
            take(split_carried(&pos, e, d), Move::Split(SplitMove::new(e, d)), &mut pos, &mut mu);
        } else if r < 0.45 {
            let mut mixed = sig.branches_of_kind(BranchKind::Mixed);
            mixed.shuffle(rng);
            if let Some(&b) = mixed.first() {
                if rng.gen_bool(0.5) {
                    take(pull_shift_carried(&pos, b), Move::Shift(b), &mut pos, &mut mu);
                    continue;
                }
            }
            for b in mixed {
                if take(shift_carried(&pos, b), Move::Shift(b), &mut pos, &mut mu) {
                    break;
                }
            }
        } else if r < 0.6 {
            let mut small = sig.branches_of_kind(BranchKind::Small);
            small.shuffle(rng);
            'found: for b in small {
                for d in [SplitDirection::Right, SplitDirection::Left] {
                    if ttkit::moves::is_collapsible(&sig, b, d) && take(collapse_carried(&pos, b, d), Move::Collapse(b, d), &mut pos, &mut mu) {
                        break 'found;
                    }
                }
            }
        } else {
            let mut large = pos.base().large_branches();
            large.shuffle(rng);
            'found: for e in large {
                for d in [SplitDirection::Right, SplitDirection::Left] {
                    if carried_by_split(&pos, e, d).unwrap() {
                        pos = transport_through_base_split(&pos, SplitMove::new(e, d)).unwrap();
                        break 'found;
                    }
                }
            }
        }
    }
    (pos, mu)
}

/// Independent shift-class search: every track reachable by shifts, compared
/// with `b` by brute-force colored-graph isomorphism.
pub fn bfs_shift_equivalent(a: &TrainTrack, b: &TrainTrack) -> bool {
    let gb = colored_graph(b);
    let mut seen: HashSet<TrainTrack> = HashSet::new();
    let mut queue = VecDeque::from([a.clone()]);
    seen.insert(a.clone());
    while let Some(t) = queue.pop_front() {
        if brute_isomorphisms(&colored_graph(&t), &gb) > 0 {
            return true;
        }
        for m in t.branches_of_kind(BranchKind::Mixed) {
            if let Ok(out) = moves::shift(&t, m) {
                if seen.insert(out.track.clone()) {
                    queue.push_back(out.track);
                }
            }
        }
    }
    false
}

/// Everything wrong with an agreement run: both words replay, the carried
/// word keeps the measure positive, base splits follow the pushed measure,
/// and the certificate shifts the final base onto the final carried track.
pub fn agreement_problems(pos: &CarriedPosition, mu: &TransverseMeasure, a: &Agreement) -> Vec<String> {
    let mut bad = Vec::new();
    let splits: Vec<Move> = a.base_word.iter().map(|&m| Move::Split(m)).collect();
    match moves::apply_sequence(pos.base(), &splits) {
        Ok(b) if &b.track == a.position.base() => {}
        _ => bad.push("base word does not replay to the final base".to_string()),
    }
    let mut sigma = pos.carried().clone();
    let mut m = mu.clone();
    for mv in &a.carried_word {
        let (Ok(next), Ok(out)) = (moves::measure_after(&sigma, &m, *mv), moves::apply(&sigma, *mv)) else {
            bad.push(format!("carried move {} does not apply", mv));
            return bad;
        };
        m = next;
        sigma = out.track;
        if !check_measure(&sigma, &m).unwrap().is_empty() || !m.is_positive() {
            bad.push(format!("carried move {} loses the measure", mv));
        }
    }
    if &sigma != a.position.carried() {
        bad.push("carried word does not replay to the final carried track".into());
    }
    let mut tau = pos.base().clone();
    let mut bm = transition_matrix(pos).push_forward(mu);
    for s in &a.base_word {
        if LaminationProxy::Measure(bm.clone()).direction(&tau, s.at).ok() != Some(s.direction) {
            bad.push(format!("base split {}{} against the pushed measure", s.at, s.direction.letter()));
            return bad;
        }
        bm = moves::measure_after_split(&tau, &bm, *s).unwrap();
        tau = moves::split(&tau, *s).unwrap().track;
    }
    let shifts: Vec<Move> = a.certificate.iter().map(|&b| Move::Shift(b)).collect();
    match moves::apply_sequence(a.position.base(), &shifts) {
        Ok(s) if brute_isomorphisms(&colored_graph(&s.track), &colored_graph(a.position.carried())) > 0 => {}
        _ => bad.push("certificate does not validate".into()),
    }
    if a.phases > pos.base().branch_count() {
        bad.push(format!("{} phases", a.phases));
    }
    let log_base: Vec<SplitMove> = a.log.iter().filter_map(|x| x.0).collect();
    let log_carried: Vec<Move> = a.log.iter().filter_map(|x| x.1).collect();
    if (log_base, log_carried) != (a.base_word.clone(), a.carried_word.clone()) {
        bad.push("log disagrees with the words".into());
    }
    bad
}

pub fn region_profile_colors(g: &ColoredGraph) -> Vec<(usize, bool, usize)> {
    let mut v: Vec<_> = regions_from_colors(g).iter().map(|r| (r.cusps, r.punctured, r.arrivals.len())).collect();
    v.sort();
    v
}

pub fn region_profile_track(t: &ttkit::track_core::TrainTrack) -> Vec<(usize, bool, usize)> {
    let mut v: Vec<_> = t.regions().iter().map(|r| (r.cusps, r.punctured, r.sides.len())).collect();
    v.sort();
    v
}
