mod common;

use common::*;
use num_traits::One;
use ttkit::generators::catalog;
use ttkit::track_core::*;
use ttkit::TtError;

#[test]
fn catalog_tracks_validate() {
    for name in SURFACES {
        let t = catalog(name).unwrap();
        let r = t.validate();
        assert!(r.all_ok(), "{}: {:?}", name, r.problems);
    }
}

#[test]
fn regions_match_rotation_system_faces() {
    for name in SURFACES {
        let t = catalog(name).unwrap();
        let mut ours: Vec<usize> = t.regions().iter().map(|r| r.cusps).collect();
        ours.sort();
        assert_eq!(ours, rotation_faces(&t), "{}", name);
    }
}

#[test]
fn region_counts_from_euler_characteristic() {
    // t = 4g - 4 + k trigons and k monogons on a surface of genus g with k punctures.
    for (name, g, k) in [("S05A", 0i64, 5i64), ("S12A", 1, 2), ("S20A", 2, 0)] {
        let t = catalog(name).unwrap();
        let regs = t.regions();
        let tri = regs.iter().filter(|r| r.cusps == 3).count() as i64;
        let mono = regs.iter().filter(|r| r.cusps == 1).count() as i64;
        assert_eq!(tri, 4 * g - 4 + k, "{}", name);
        assert_eq!(mono, k, "{}", name);
        assert_eq!(t.switch_count() as i64, 12 * g - 12 + 4 * k);
        assert_eq!(t.branch_count() as i64 * 2, t.switch_count() as i64 * 3);
    }
}

#[test]
fn sides_partition_and_cusps_sum_to_switches() {
    for name in SURFACES {
        let t = catalog(name).unwrap();
        let regs = t.regions();
        let mut all: Vec<Side> = regs.iter().flat_map(|r| r.sides.clone()).collect();
        let n = all.len();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), n);
        assert_eq!(n, 2 * t.branch_count());
        assert_eq!(regs.iter().map(|r| r.cusps).sum::<usize>(), t.switch_count());
    }
}

#[test]
fn signatures() {
    let s = |n| catalog(n).unwrap().surface_signature().unwrap();
    assert_eq!(s("S05A"), SurfaceSignature { genus: 0, punctures: 5 });
    assert_eq!(s("S12A"), SurfaceSignature { genus: 1, punctures: 2 });
    assert_eq!(s("S20A"), SurfaceSignature { genus: 2, punctures: 0 });
    for name in SURFACES {
        let t = catalog(name).unwrap();
        let sig = t.surface_signature().unwrap();
        let v = 2 - 2 * sig.genus as i64;
        assert_eq!(t.switch_count() as i64 - t.branch_count() as i64 + t.regions().len() as i64, v);
        assert_eq!(t.branch_count() as i64 - t.switch_count() as i64, sig.cone_rank());
        assert_eq!(measure_space_basis(&t).len() as i64, sig.cone_rank(), "{}", name);
    }
}

#[test]
fn once_punctured_torus_is_exceptional() {
    // A maximal track on the torus with one puncture: one trigon and one
    // punctured monogon, which the signature check must refuse.
    let text = "tt v1\nsw 0 L=0.0 A=4.1 B=4.0\nsw 1 L=0.1 A=1.0 B=2.0\nsw 2 L=5.1 A=3.1 B=2.1\nsw 3 L=1.1 A=5.0 B=3.0\npunct 4.1.L\n";
    let t = parse_tt(text).unwrap();
    assert!(t.validate().all_ok());
    assert!(matches!(t.surface_signature(), Err(TtError::ExceptionalSurface(1))));
}

#[test]
fn duplicated_slot_is_malformed() {
    let t = catalog("S05A").unwrap();
    let mut sws = t.switches().to_vec();
    sws[0].small_left = sws[1].large;
    assert!(matches!(TrainTrack::new(sws, []), Err(TtError::MalformedSlots(_))));
}

#[test]
fn swapping_small_slots_reruns_region_oracle() {
    for name in SURFACES {
        let t = catalog(name).unwrap();
        for i in 0..t.switch_count() {
            let mut sws = t.switches().to_vec();
            let s = &mut sws[i];
            (s.small_left, s.small_right) = (s.small_right, s.small_left);
            let u = TrainTrack::new(sws, []).unwrap();
            let r = u.validate();
            assert!(r.generic && r.connected);
            let mut ours: Vec<usize> = u.regions().iter().map(|r| r.cusps).collect();
            ours.sort();
            assert_eq!(ours, rotation_faces(&u));
            // unmarked monogons or merged regions cannot both vanish
            if r.maximal {
                assert!(u.regions().iter().all(|g| g.cusps == 3));
            }
        }
    }
}

#[test]
fn classification_agrees_with_slot_scan() {
    for name in SURFACES {
        let t = catalog(name).unwrap();
        assert_eq!(t.large_branches().len(), t.slot_scan_large());
        for b in t.branches() {
            let larges = t.switches().iter().flat_map(|s| [s.large]).filter(|h| h.branch == b).count();
            let want = match larges {
                2 => BranchKind::Large,
                1 => BranchKind::Mixed,
                _ => BranchKind::Small,
            };
            assert_eq!(t.classify_branch(b).unwrap(), want);
        }
        assert!(matches!(t.classify_branch(999), Err(TtError::UnknownBranch(999))));
    }
}

#[test]
fn recurrence_matches_fourier_motzkin() {
    for name in SURFACES {
        let t = catalog(name).unwrap();
        let w = is_recurrent(&t).expect("catalog tracks are recurrent");
        assert!(check_measure(&t, &w).unwrap().is_empty());
        assert!(w.is_positive());
        assert_eq!(w.min_weight().unwrap(), num_rational::BigRational::one());
        assert!(fm_recurrent(&t));
        let doubled = w.scale(&q(2));
        assert!(check_measure(&t, &doubled).unwrap().is_empty());
    }
}

#[test]
fn dead_end_track_is_not_recurrent() {
    // Branch 0 runs from the large slot back into a small slot of the same
    // switch, forcing weight 0 on branch 1 and then on branch 2.
    let t = TrainTrack::new(
        vec![
            SwitchRecord::new(0, HalfBranchRef::new(0, 0), HalfBranchRef::new(1, 0), HalfBranchRef::new(0, 1)),
            SwitchRecord::new(1, HalfBranchRef::new(1, 1), HalfBranchRef::new(2, 0), HalfBranchRef::new(2, 1)),
        ],
        [],
    )
    .unwrap();
    assert!(is_recurrent(&t).is_none());
    assert!(!fm_recurrent(&t));
}

#[test]
fn check_measure_flags_adjacent_switches() {
    for name in SURFACES {
        let t = catalog(name).unwrap();
        let z = TransverseMeasure::zero(&t);
        assert!(check_measure(&t, &z).unwrap().is_empty());
        let w = is_recurrent(&t).unwrap();
        for b in t.branches() {
            let mut p = w.clone();
            *p.weights.get_mut(&b).unwrap() += q(1);
            let bad = check_measure(&t, &p).unwrap();
            let mut expect: Vec<SwitchId> = [0u8, 1]
                .iter()
                .map(|&e| t.switch_at(HalfBranchRef::new(b, e)).unwrap().id)
                .collect();
            expect.sort();
            expect.dedup();
            // A branch with both ends at one switch, one large and one small,
            // would cancel; maximal tracks have none.
            assert_eq!(bad, expect, "{} branch {}", name, b);
        }
        let mut stray = w.clone();
        stray.weights.insert(999, q(1));
        assert!(matches!(check_measure(&t, &stray), Err(TtError::UnknownBranch(999))));
    }
}

#[test]
fn text_round_trip() {
    for name in SURFACES {
        let t = catalog(name).unwrap();
        let text = write_tt(&t);
        let u = parse_tt(&text).unwrap();
        assert_eq!(t, u);
        assert_eq!(text, write_tt(&u));
    }
}

#[test]
fn declared_surface_is_cross_checked() {
    let t = catalog("S05A").unwrap();
    let text = write_tt(&t).replace("surface g=0 k=5", "surface g=1 k=5");
    assert!(matches!(parse_tt(&text), Err(TtError::SignatureMismatch(..))));
}

#[test]
fn right_hand_region_keys_parse() {
    let a: Side = "3.1.R".parse().unwrap();
    assert_eq!(a, Side::new(3, 0));
    assert_eq!(a.to_string(), "3.0.L");
}

#[test]
fn relabeling_and_mirror_preserve_validity() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    for name in SURFACES {
        let t = catalog(name).unwrap();
        let (u, _) = random_relabel(&t, &mut rng);
        assert!(u.validate().all_ok());
        let m = t.mirror().unwrap();
        assert!(m.validate().all_ok(), "{} mirror", name);
        assert_eq!(m.mirror().unwrap(), t);
        for b in t.branches() {
            let r = t.reverse_branch(b).unwrap();
            assert!(r.validate().all_ok());
            assert_eq!(r.reverse_branch(b).unwrap(), t);
        }
    }
}
