use ensemble_core::composite::{partial_trace, schmidt, BipartiteState, Side};
use ensemble_core::linalg::{gram_defect, hermitian_eig, inner, outer, Ket};
use ensemble_core::random::{haar_unitary, random_hermitian, random_unit_ket, seeded_rng};
use num_complex::Complex64;
use proptest::prelude::*;

fn ket_strategy(dim: usize) -> impl Strategy<Value = Ket> {
    prop::collection::vec((-2.0..2.0_f64, -2.0..2.0_f64), dim)
        .prop_map(|v| Ket::new(v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect()).unwrap())
}

fn ket_pair() -> impl Strategy<Value = (Ket, Ket)> {
    (1usize..8).prop_flat_map(|d| (ket_strategy(d), ket_strategy(d)))
}

proptest! {
    #[test]
    fn inner_is_conjugate_symmetric((a, b) in ket_pair()) {
        let ab = inner(&a, &b).unwrap();
        let ba = inner(&b, &a).unwrap();
        prop_assert!((ab - ba.conj()).norm() <= 1e-12 * (1.0 + ab.norm()));
        let aa = inner(&a, &a).unwrap();
        prop_assert!(aa.im == 0.0 && aa.re >= 0.0);
    }

    #[test]
    fn trace_of_outer_is_inner((v, w) in ket_pair()) {
        let t = outer(&v, &w).unwrap().trace();
        let i = inner(&w, &v).unwrap();
        prop_assert!((t - i).norm() <= 1e-12 * (1.0 + i.norm()));
    }

    #[test]
    fn jacobi_reconstructs_random_hermitian(dim in 1usize..=16, seed in any::<u64>()) {
        let m = random_hermitian(&mut seeded_rng(seed), dim).unwrap();
        let r = hermitian_eig(&m).unwrap();
        prop_assert!(r.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        let back = r.reconstruct().unwrap();
        prop_assert!(back.sub(&m).unwrap().max_abs() <= 1e-10);
        prop_assert!(gram_defect(&r.eigenvectors).unwrap() <= 1e-10);
        prop_assert!(r.residual <= 1e-10);
    }

    #[test]
    fn partial_trace_preserves_trace(da in 1usize..=5, db in 1usize..=5, seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let psi = random_unit_ket(&mut rng, da * db).unwrap();
        let phi = random_unit_ket(&mut rng, da * db).unwrap();
        // A genuinely mixed input: equal mixture of two pure states.
        let rho = outer(&psi, &psi).unwrap().add(&outer(&phi, &phi).unwrap()).unwrap().scale_real(0.5);
        for keep in [Side::A, Side::B] {
            let r = partial_trace(&rho, (da, db), keep).unwrap();
            prop_assert!((r.matrix().trace().re - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn schmidt_coefficients_are_local_unitary_invariant(
        da in 1usize..=5,
        db in 1usize..=5,
        seed in any::<u64>(),
    ) {
        let mut rng = seeded_rng(seed);
        let psi = random_unit_ket(&mut rng, da * db).unwrap();
        let state = BipartiteState::from_ket(&psi, da, db).unwrap();
        let ua = haar_unitary(&mut rng, da).unwrap();
        let ub = haar_unitary(&mut rng, db).unwrap();
        // (U_A ⊗ U_B) ψ, entry by entry.
        let amps: Vec<Complex64> = (0..da)
            .flat_map(|i| (0..db).map(move |j| (i, j)))
            .map(|(i, j)| {
                let mut z = Complex64::new(0.0, 0.0);
                for k in 0..da {
                    for l in 0..db {
                        z += ua.get(i, k) * ub.get(j, l) * state.amplitude(k, l);
                    }
                }
                z
            })
            .collect();
        let moved = BipartiteState::renormalized(da, db, amps).unwrap();
        let a = schmidt(&state).unwrap().coefficients;
        let b = schmidt(&moved).unwrap().coefficients;
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }
}

#[test]
fn partial_trace_matches_direct_summation() {
    // Independent route: ρ_A[i][j] = Σ_k A_ik conj(A_jk) straight from the grid.
    for (seed, (da, db)) in [(1u64, (2usize, 3usize)), (2, (4, 4)), (3, (3, 1)), (4, (5, 2))] {
        let psi = random_unit_ket(&mut seeded_rng(seed), da * db).unwrap();
        let state = BipartiteState::from_ket(&psi, da, db).unwrap();
        let rho_a = state.reduced(Side::A).unwrap();
        let rho_b = state.reduced(Side::B).unwrap();
        let amp = |i: usize, k: usize| psi.components()[i * db + k];
        for i in 0..da {
            for j in 0..da {
                let direct: Complex64 = (0..db).map(|k| amp(i, k) * amp(j, k).conj()).sum();
                assert!((rho_a.matrix().get(i, j) - direct).norm() <= 1e-12);
            }
        }
        for k in 0..db {
            for l in 0..db {
                let direct: Complex64 = (0..da).map(|i| amp(i, k) * amp(i, l).conj()).sum();
                assert!((rho_b.matrix().get(k, l) - direct).norm() <= 1e-12);
            }
        }
    }
}
