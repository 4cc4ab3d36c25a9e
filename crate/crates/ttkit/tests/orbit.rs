mod common;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ttkit::generators::catalog;
use ttkit::moves::*;
use ttkit::orbit::*;
use ttkit::TtError;

#[test]
fn graph_shape_on_catalog() {
    let g = colored_graph(&catalog("S05A").unwrap());
    assert_eq!(g.vertex_count(), 8);
    assert_eq!(g.edge_count(), 12);
    for v in 0..8 {
        for c in Color::ALL {
            let (u, cu) = g.partner[v][c.index()];
            assert_eq!(g.partner[u][cu.index()], (v, c), "partner map is an involution");
        }
    }
}

#[test]
fn certificate_survives_relabeling() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for name in SURFACES {
        let t = catalog(name).unwrap();
        let cert = orbit_certificate(&t);
        for _ in 0..100 {
            let (r, _) = random_relabel(&t, &mut rng);
            assert_eq!(orbit_certificate(&r), cert);
            assert!(same_orbit(&t, &r).unwrap());
        }
    }
}

#[test]
fn graph_permutation_keeps_certificate() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = colored_graph(&catalog("S20A").unwrap());
    let c = canonical_form(&g);
    for _ in 0..100 {
        let mut perm: Vec<usize> = (0..g.vertex_count()).collect();
        rand::seq::SliceRandom::shuffle(&mut perm[..], &mut rng);
        assert_eq!(canonical_form(&g.permuted(&perm)), c);
    }
}

#[test]
fn certificates_match_exhaustive_isomorphism_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut graphs: Vec<ColoredGraph> = SURFACES.iter().map(|n| colored_graph(&catalog(n).unwrap())).collect();
    for _ in 0..20 {
        graphs.push(colored_graph(&random_track(&mut rng, 6)));
    }
    // Exchanging yellow and green at a vertex.
    let swapped: Vec<ColoredGraph> = graphs[..3].iter().flat_map(|g| (0..g.vertex_count()).map(move |v| g.with_swapped_smalls(v))).collect();
    graphs.extend(swapped);
    for g in &graphs {
        assert_eq!(canonical(g).automorphisms(), brute_isomorphisms(g, g).max(1));
    }
    for (i, g) in graphs.iter().enumerate() {
        for h in graphs.iter().skip(i + 1) {
            let iso = brute_isomorphisms(g, h) > 0;
            assert_eq!(canonical_form(g) == canonical_form(h), iso);
        }
    }
}

#[test]
fn swapping_smalls_is_decided_by_search() {
    let mut differ = 0;
    for name in SURFACES {
        let g = colored_graph(&catalog(name).unwrap());
        for v in 0..g.vertex_count() {
            let h = g.with_swapped_smalls(v);
            let iso = brute_isomorphisms(&g, &h) > 0;
            assert_eq!(canonical_form(&g) == canonical_form(&h), iso);
            differ += !iso as usize;
        }
    }
    assert!(differ > 0);
}

#[test]
fn regions_from_colors_match_traced_regions() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut tracks: Vec<_> = SURFACES.iter().map(|n| catalog(n).unwrap()).collect();
    for _ in 0..100 {
        let steps = rng.gen_range(0..10);
        tracks.push(random_track(&mut rng, steps));
    }
    for t in &tracks {
        let g = colored_graph(t);
        assert_eq!(region_profile_colors(&g), region_profile_track(t));
        let regions = regions_from_colors(&g);
        // Every half-edge is the arrival point of exactly one side.
        let total: usize = regions.iter().map(|r| r.arrivals.len()).sum();
        assert_eq!(total, 3 * g.vertex_count());
        // Cusps are exactly the yellow arrivals.
        for r in &regions {
            assert_eq!(r.cusps, r.arrivals.iter().filter(|(_, c)| *c == Color::Yellow).count());
        }
    }
    let s05 = region_profile_colors(&colored_graph(&catalog("S05A").unwrap()));
    assert_eq!(s05.iter().filter(|r| r.0 == 3 && !r.1).count(), 1);
    assert_eq!(s05.iter().filter(|r| r.0 == 1 && r.1).count(), 5);
}

#[test]
fn split_neighbors_compared_by_search() {
    for name in SURFACES {
        let t = catalog(name).unwrap();
        let g = colored_graph(&t);
        for e in t.large_branches() {
            for d in [SplitDirection::Right, SplitDirection::Left] {
                let s = split(&t, SplitMove::new(e, d)).unwrap().track;
                let expect = brute_isomorphisms(&g, &colored_graph(&s)) > 0;
                assert_eq!(same_orbit(&t, &s).unwrap(), expect);
            }
        }
    }
}

#[test]
fn shift_graphs_compared_directly() {
    for name in SURFACES {
        let t = catalog(name).unwrap();
        for b in t.branches_of_kind(ttkit::track_core::BranchKind::Mixed) {
            let s = shift(&t, b).unwrap().track;
            let (g, h) = (colored_graph(&t), colored_graph(&s));
            assert_eq!(g.vertex_count(), h.vertex_count());
            assert_eq!(canonical_form(&g) == canonical_form(&h), brute_isomorphisms(&g, &h) > 0);
        }
    }
}

#[test]
fn mirror_images_are_kept_apart_when_chiral() {
    for name in SURFACES {
        let t = catalog(name).unwrap();
        let m = t.mirror().unwrap();
        let expect = brute_isomorphisms(&colored_graph(&t), &colored_graph(&m)) > 0;
        assert_eq!(same_orbit(&t, &m).unwrap(), expect);
    }
}

#[test]
fn signatures_must_agree() {
    let a = catalog("S05A").unwrap();
    let b = catalog("S20A").unwrap();
    assert!(matches!(same_orbit(&a, &b), Err(TtError::SignatureMismatch(..))));
}

#[test]
fn puncture_marks_enter_the_certificate() {
    // Moving the puncture to the trigon yields a different marked track.
    let t = catalog("S05A").unwrap();
    let trigon = t.regions().into_iter().find(|r| !r.punctured).unwrap();
    let monogon = t.regions().into_iter().find(|r| r.punctured).unwrap();
    let mut marks: Vec<_> = t.punctures().iter().copied().filter(|k| *k != monogon.key).collect();
    marks.push(trigon.key);
    let moved = t.with_punctures(marks).unwrap();
    assert_ne!(orbit_certificate(&t), orbit_certificate(&moved));
}
