use std::f64::consts::PI;

use grabill_core::hamiltonian::{assemble, chiral_check, TBParams};
use grabill_core::lattice::{build_sector, reflection_map, Orientation, SectorSpec, Sublattice, NN_DISTANCE};
use grabill_core::lengthspec::{ray_trace, trace_length, ApexRule};
use grabill_core::qbilliard::{bessel_j, bessel_zeros};
use grabill_core::rmtstats::{delta3, ks_distance, nnsd, poisson_reference, sample_poisson};
use grabill_core::spectra::{full_spectrum, WindowSolver};
use grabill_core::unfold::{polynomial_unfold, UnfoldedSequence};
use proptest::prelude::*;

fn orientation() -> impl Strategy<Value = Orientation> {
    prop_oneof![Just(Orientation::ZigzagFirstEdge), Just(Orientation::ArmchairFirstEdge)]
}

/// Half-plane test against both straight edges; valid for `α ≤ π`.
fn in_wedge(p: [f64; 2], alpha: f64) -> bool {
    p[1] >= -1e-9 && alpha.sin() * p[0] - alpha.cos() * p[1] >= -1e-9
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bonds_have_honeycomb_geometry(n in 1u32..=12, size in 60usize..900, o in orientation()) {
        let lat = build_sector(&SectorSpec::with_target(n, size, o)).unwrap();
        let sites = lat.sites();
        for (i, j) in lat.nn_bonds() {
            let d = dist(sites[i].position, sites[j].position);
            prop_assert!((d / NN_DISTANCE - 1.0).abs() < 1e-12);
            prop_assert_ne!(sites[i].sublattice, sites[j].sublattice);
        }
        for (i, j) in lat.nnn_bonds() {
            prop_assert_eq!(sites[i].sublattice, sites[j].sublattice);
        }
        let alpha = PI / n as f64;
        for s in sites {
            prop_assert!(in_wedge(s.position, alpha));
            prop_assert!(s.rho() <= lat.radius() + 1e-9);
        }
        prop_assert_eq!(lat.components(), 1);
    }

    #[test]
    fn reflection_is_an_involution(size in 100usize..1200) {
        let lat = build_sector(&SectorSpec::with_target(3, size, Orientation::ArmchairFirstEdge)).unwrap();
        if let Some(perm) = reflection_map(&lat) {
            for (i, &j) in perm.iter().enumerate() {
                prop_assert_eq!(perm[j], i);
            }
        }
    }

    #[test]
    fn nn_spectrum_is_chiral(n in 1u32..=12, size in 40usize..500, o in orientation()) {
        let lat = build_sector(&SectorSpec::with_target(n, size, o)).unwrap();
        let h = assemble(&lat, &TBParams::default()).unwrap();
        prop_assert!(chiral_check(&h, &lat).unwrap());
        prop_assert!(h.max_asymmetry() == 0.0);
        let e = full_spectrum(&h).unwrap().eigenvalues;
        let m = e.len();
        for k in 0..m {
            prop_assert!((e[k] + e[m - 1 - k]).abs() < 1e-10);
        }
        let a = lat.sites().iter().filter(|s| s.sublattice == Sublattice::A).count();
        prop_assert!(a > 0 && a < m);
    }

    #[test]
    fn inertia_counts_match_dense(size in 100usize..600, shifts in prop::collection::vec(-3.5f64..3.5, 8), tp in 0.0f64..0.2) {
        let lat = build_sector(&SectorSpec::with_target(6, size, Orientation::ZigzagFirstEdge)).unwrap();
        let h = assemble(&lat, &TBParams::with_nnn_ratio(tp)).unwrap();
        let e = full_spectrum(&h).unwrap().eigenvalues;
        let solver = WindowSolver::new(&h);
        for s in shifts {
            if e.iter().any(|x| (x - s).abs() < 1e-9) {
                continue;
            }
            prop_assert_eq!(solver.count_below(s).unwrap(), e.iter().filter(|&&x| x < s).count());
        }
    }

    #[test]
    fn unfolding_preserves_order(seed in 0u64..1000, degree in 1usize..=8) {
        let seq = sample_poisson(400, seed);
        let window = (seq.values[0] - 0.5, seq.values[seq.len() - 1] + 0.5);
        let u = polynomial_unfold(&seq.values, window, degree).unwrap();
        prop_assert!(u.values.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn statistics_are_bounded(seed in 0u64..1000, shift in -100.0f64..100.0) {
        let seq = sample_poisson(300, seed);
        let moved = UnfoldedSequence::from_values(seq.values.iter().map(|v| v + shift).collect());
        let ks = ks_distance(&seq, &poisson_reference()).unwrap();
        prop_assert!((0.0..=1.0).contains(&ks));
        prop_assert!((ks - ks_distance(&moved, &poisson_reference()).unwrap()).abs() < 1e-9);
        prop_assert!((nnsd(&seq, 0.25).integral() - 1.0).abs() < 1e-9);
        for l in [1.0, 5.0, 20.0] {
            let a = delta3(&seq, l, None).unwrap();
            prop_assert!(a >= 0.0);
            prop_assert!((a - delta3(&moved, l, None).unwrap()).abs() < 1e-7 * a.max(1.0));
        }
    }

    #[test]
    fn bessel_zeros_are_roots(nu in 0.0f64..60.0, span in 5.0f64..60.0) {
        let zs = bessel_zeros(nu, nu + span, 1e-12).unwrap();
        for w in zs.windows(2) {
            prop_assert!(w[1] > w[0]);
        }
        for z in zs {
            prop_assert!(bessel_j(nu, z).unwrap().abs() < 1e-9);
        }
    }

    #[test]
    fn rays_stay_in_sector(n in 1u32..=12, r in 0.05f64..0.95, phi in 0.01f64..0.99, theta in 0.0f64..(2.0 * PI)) {
        let alpha = PI / n as f64;
        let start = [r * (phi * alpha).cos(), r * (phi * alpha).sin()];
        let t = ray_trace(alpha, start, [theta.cos(), theta.sin()], 500);
        for p in &t.points {
            prop_assert!(p[0].hypot(p[1]) <= 1.0 + 1e-9);
            prop_assert!(in_wedge(*p, alpha));
        }
        let u = trace_length(alpha, start, [theta.cos(), theta.sin()], 7.0, ApexRule::Unfold);
        prop_assert!((u.length - 7.0).abs() < 1e-9);
        prop_assert!((u.end_direction[0].hypot(u.end_direction[1]) - 1.0).abs() < 1e-9);
    }
}
