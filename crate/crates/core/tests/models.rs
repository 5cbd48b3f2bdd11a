//! Cross-module checks on built models: move-set completeness, schedule
//! invariants, and agreement between audits and dynamics.

use spbm::thermal::build_memory_model;
use spbm::*;

fn spbm(l: usize, d: usize) -> StabilizerModel {
    build_spbm(build_lattice(l, l, d).unwrap()).unwrap()
}

#[test]
fn symmetric_moves_generate_every_complete_logical_at_smallest_size() {
    let m = spbm(2, 2);
    let ms = enumerate_allowed_moves(&m, 2, 1).unwrap();
    for name in m.logical_operator_names() {
        assert!(ms.generates(m.logical_operator(&name).unwrap()).unwrap(), "{name}");
    }
}

#[test]
fn bare_boundary_logicals_need_bulk_partners_beyond_smallest_size() {
    let m = spbm(3, 2);
    let ms = enumerate_allowed_moves(&m, 2, 1).unwrap();
    for name in ["composite_Z", "composite_X", "Zbar_e", "Xbar_f", "composite_Z_rot", "composite_X_rot"] {
        assert!(ms.generates(m.logical_operator(name).unwrap()).unwrap(), "{name}");
    }
    for name in ["Zbar_b", "Xbar_b"] {
        assert!(!ms.generates(m.logical_operator(name).unwrap()).unwrap(), "{name}");
    }
}

#[test]
fn every_canonical_schedule_is_prefix_legal_and_closes() {
    for (l, d) in [(2, 2), (3, 2), (3, 3), (4, 2)] {
        let m = spbm(l, d);
        for name in ["Zbar_e", "Xbar_f", "composite_Z", "composite_X", "composite_Z_rot", "composite_X_rot"] {
            let s = canonical_schedule(&m, name).unwrap();
            assert!(s.symmetry_violations.iter().all(|&v| v == 0), "{name} at L={l}");
            assert_eq!(*s.profile.last().unwrap(), 0, "{name} at L={l}");
            for step in &s.steps {
                assert!(symmetry::is_allowed(&step.op, &m).unwrap());
            }
        }
        // Bulk membranes ending on the boundary plane are only legal as
        // part of a composite with the boundary string.
        for name in ["Xbar_e", "Zbar_f", "Zbar_b", "Xbar_b"] {
            assert!(matches!(canonical_schedule(&m, name), Err(Error::NoLegalSchedule { .. })), "{name}");
        }
    }
}

#[test]
fn composite_barrier_is_nondecreasing_in_size() {
    let mut last = 0;
    for l in 2..=6 {
        let e = canonical_schedule(&spbm(l, 3), "composite_Z").unwrap().max_energy();
        assert!(e >= last);
        last = e;
    }
}

#[test]
fn symmetric_dynamics_never_excites_symmetry_generators() {
    let (m, ms) = build_memory_model(&ModelParams { lx: 3, lz: 3, depth: 2, symmetry: true, s_max: 2, radius: 1 }).unwrap();
    let d = Dynamics::new(&m, &ms.moves);
    let mut s = d.init_state();
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3);
    for _ in 0..50 {
        d.sweep(&mut s, 0.5, &mut rng);
        assert!(s.symmetry_syndrome.iter().all(|&c| c == 0));
    }
}

#[test]
fn unsymmetric_bath_loses_boundary_memory_at_smallest_size() {
    let mp = ModelParams { lx: 2, lz: 2, depth: 2, symmetry: false, s_max: 2, radius: 1 };
    let r = memory_experiment(&mp, &DynamicsParams::new(2.0, 10_000, 11, 50)).unwrap();
    let finite = r.records.iter().filter(|t| t.t_fail_zb.is_some()).count();
    assert!(2 * finite > r.records.len(), "{finite} of {} failed", r.records.len());
}

#[test]
fn memory_experiment_is_reproducible() {
    let mp = ModelParams { lx: 2, lz: 2, depth: 2, symmetry: false, s_max: 2, radius: 1 };
    let dp = DynamicsParams::new(1.5, 64, 5, 8);
    let a = memory_experiment(&mp, &dp).unwrap();
    let b = memory_experiment(&mp, &dp).unwrap();
    assert_eq!(a.records, b.records);
    assert_eq!(a.summary, b.summary);
}
