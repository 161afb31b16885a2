use ensemble_core::composite::{schmidt, BipartiteState};
use ensemble_core::ensemble::{
    build_density, eigen_decompose, eigenbasis_sensitivity, eigenvalue_gap,
    eigenvalue_gap_from_determinant, naive_interpretation_residual, reconstruct, ProjectorMixture,
};
use ensemble_core::linalg::{hermitian_eig, inner, Ket};
use ensemble_core::validation::{compare_with_oracle, suite_mixture};
use num_complex::Complex64;

const SUITE_SEED: u64 = 20_240_601;

fn suite() -> impl Iterator<Item = ProjectorMixture> {
    (0..1000).map(|i| suite_mixture(SUITE_SEED, i, (2, 8)).unwrap().1)
}

#[test]
fn closed_form_matches_oracle_on_random_mixtures() {
    for (i, m) in suite().enumerate() {
        let c = compare_with_oracle(&m).unwrap();
        assert!(c.eigenvalue_deviation <= 1e-10, "member {i}: {c:?}");
        assert!(c.max_angle <= 1e-8, "member {i}: {c:?}");
        assert!(c.orthogonality <= 1e-10, "member {i}: {c:?}");
        assert!(c.trace_defect <= 1e-12, "member {i}: {c:?}");
    }
}

#[test]
fn eigenpairs_satisfy_the_eigen_equation() {
    for m in suite().take(200) {
        let e = eigen_decompose(&m).unwrap();
        let rho = build_density(&m);
        for (lambda, v) in e.eigenvalues.iter().zip(&e.eigenvectors) {
            let r = rho.apply(v).unwrap().sub(&v.scale(Complex64::new(*lambda, 0.0))).unwrap();
            assert!(r.norm() <= 1e-10);
        }
        assert!(reconstruct(&e).sub(&rho).unwrap().max_abs() <= 1e-10);
        // Neither eigenvalue coincides with P_α, and they are distinct.
        assert!(e.eigenvalues.iter().all(|&l| l != m.p_alpha()));
        assert!(e.eigenvalues[0] > e.eigenvalues[1]);
    }
}

#[test]
fn naive_residual_matches_closed_form() {
    for m in suite() {
        let c = m.overlap();
        let expected = c * m.p_beta() * (1.0 - c * c).sqrt();
        assert!((naive_interpretation_residual(&m) - expected).abs() <= 1e-12);
    }
}

#[test]
fn gap_formulas_agree() {
    for m in suite() {
        let e = eigen_decompose(&m).unwrap();
        let a = eigenvalue_gap(&m);
        let b = eigenvalue_gap_from_determinant(&m);
        assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
        assert!((a - e.gap()).abs() <= 1e-10);
    }
}

#[test]
fn degenerate_flag_only_for_orthogonal_equal_weights() {
    let e0 = Ket::basis(3, 0).unwrap();
    let e1 = Ket::basis(3, 1).unwrap();
    let cases = [
        (0.0, 0.5, true),
        (0.0, 0.5 + 5e-13, true),
        (0.0, 0.5 + 1e-9, false),
        (1e-9, 0.5, false),
        (0.3, 0.5, false),
        (0.0, 0.2, false),
    ];
    for (c, p, expected) in cases {
        let beta = e0
            .scale(Complex64::new(c, 0.0))
            .add(&e1.scale(Complex64::new((1.0 - c * c).sqrt(), 0.0)))
            .unwrap();
        let m = ProjectorMixture::new(e0.clone(), beta, p).unwrap();
        assert_eq!(eigen_decompose(&m).unwrap().degenerate, expected, "c={c} p={p}");
    }
    assert!(suite().all(|m| !eigen_decompose(&m).unwrap().degenerate));
}

#[test]
fn probabilities_equal_schmidt_weights_of_a_purification() {
    // |Ψ> = sqrt(P_α) |α>|0> + sqrt(P_β) |β>|1> has ρ as its reduced state.
    for m in suite().take(100) {
        let d = m.dim();
        let mut amps = vec![Complex64::new(0.0, 0.0); d * 2];
        for i in 0..d {
            amps[i * 2] = m.alpha().components()[i] * m.p_alpha().sqrt();
            amps[i * 2 + 1] = m.beta().components()[i] * m.p_beta().sqrt();
        }
        let psi = BipartiteState::new(d, 2, amps).unwrap();
        let s = schmidt(&psi).unwrap();
        let e = eigen_decompose(&m).unwrap();
        assert_eq!(s.rank(), 2);
        for (coef, lambda) in s.coefficients.iter().zip(e.eigenvalues) {
            assert!((coef * coef - lambda).abs() <= 1e-10);
        }
    }
}

#[test]
fn orthogonality_reproduces_root_cancellation() {
    // <e₋|e₊> = 1 + (r₊ + r₋)c² + r₊r₋c² for the unnormalized vectors.
    for m in suite().take(300) {
        let e = eigen_decompose(&m).unwrap();
        let (rp, rm) = e.roots.unwrap();
        let c2 = e.c * e.c;
        let symbolic = 1.0 + (rp + rm) * c2 + rp * rm * c2;
        let scale = 1.0 + (rp.abs() + rm.abs()) * c2 + (rp * rm).abs() * c2;
        assert!(symbolic.abs() <= 1e-12 * scale, "{symbolic} at scale {scale}");
        assert!(inner(&e.eigenvectors[0], &e.eigenvectors[1]).unwrap().norm() <= 1e-10);
    }
}

fn real_mixture(c: f64, p_alpha: f64) -> ProjectorMixture {
    ProjectorMixture::new(
        Ket::from_real(&[1.0, 0.0]).unwrap(),
        Ket::from_real(&[c, (1.0 - c * c).sqrt()]).unwrap(),
        p_alpha,
    )
    .unwrap()
}

#[test]
fn sensitivity_tracks_perturbation_over_gap() {
    // First-order perturbation theory bounds the turn by about δ / gap.
    let m = real_mixture(0.6, 0.5);
    let gap = eigenvalue_gap(&m);
    for seed in 0..5 {
        let angle = eigenbasis_sensitivity(&m, 1e-6, seed).unwrap();
        assert!(angle <= 1e-5);
        assert!(angle <= 2.0 * 1e-6 / gap, "angle {angle} vs δ/gap {}", 1e-6 / gap);
    }
    let near = real_mixture(1e-4, 0.5 + 1e-6);
    let mut angles: Vec<f64> = (0..8).map(|s| eigenbasis_sensitivity(&near, 1e-3, s).unwrap()).collect();
    angles.sort_by(f64::total_cmp);
    assert!(angles[4] > 0.1, "median angle {}", angles[4]);
    // Angles grow as the gap closes.
    let wide = eigenbasis_sensitivity(&real_mixture(0.5, 0.3), 1e-4, 3).unwrap();
    let narrow = eigenbasis_sensitivity(&real_mixture(1e-3, 0.5), 1e-4, 3).unwrap();
    assert!(narrow > 10.0 * wide);
}

#[test]
fn oracle_eigenvalues_match_determinant_formula() {
    let m = real_mixture(0.5, 0.75);
    let rho = build_density(&m);
    let det = (rho.get(0, 0) * rho.get(1, 1) - rho.get(0, 1) * rho.get(1, 0)).re;
    let disc = (1.0 - 4.0 * det).sqrt();
    let oracle = hermitian_eig(&rho).unwrap();
    assert!((oracle.eigenvalues[0] - 0.5 * (1.0 + disc)).abs() <= 1e-12);
    assert!((oracle.eigenvalues[1] - 0.5 * (1.0 - disc)).abs() <= 1e-12);
}
