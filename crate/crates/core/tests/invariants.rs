use locdisc::bounds::{energy_alpha, fidelity_bound_delta, fidelity_bound_ps, helstrom, pe_reduced, ps_from_energy, ps_n};
use locdisc::ensembles::{axisymmetric_family, ensemble_density, reduced_state};
use locdisc::linalg::HermitianMatrix;
use locdisc::quantum::{partial_trace, Party};
use locdisc::scalar::C;
use locdisc::seesaw::{random_measurement, restart_rng};
use proptest::prelude::*;

fn hermitian(dim: usize, vals: &[f64]) -> HermitianMatrix<f64> {
    let mut m = locdisc::linalg::Matrix::<f64>::zeros(dim, dim);
    let mut k = 0;
    for i in 0..dim {
        for j in i..dim {
            let re = vals[k % vals.len()];
            let im = if i == j { 0.0 } else { vals[(k + 7) % vals.len()] };
            m[(i, j)] = C::new(re, im);
            m[(j, i)] = C::new(re, -im);
            k += 1;
        }
    }
    HermitianMatrix::from_matrix(m).unwrap()
}

proptest! {
    #[test]
    fn eigendecomposition_reconstructs(dim in 1usize..7, vals in prop::collection::vec(-1.0f64..1.0, 30)) {
        let h = hermitian(dim, &vals);
        let e = h.eig().unwrap();
        prop_assert!(e.reconstruct().max_abs_diff(h.as_matrix()) < 1e-12);
        for w in e.values.windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
        let sum: f64 = e.values.iter().sum();
        prop_assert!((sum - h.trace()).abs() < 1e-12);
    }

    #[test]
    fn partial_trace_keeps_trace(da in 1usize..4, db in 1usize..4, vals in prop::collection::vec(-1.0f64..1.0, 80)) {
        let h = hermitian(da * db, &vals);
        let ra = partial_trace(&h, da, db, Party::B).unwrap();
        let rb = partial_trace(&h, da, db, Party::A).unwrap();
        prop_assert_eq!(ra.dim(), da);
        prop_assert_eq!(rb.dim(), db);
        prop_assert!((ra.trace() - h.trace()).abs() < 1e-12);
        prop_assert!((rb.trace() - h.trace()).abs() < 1e-12);
    }

    #[test]
    fn random_measurements_are_projective(dim in 1usize..6, outcomes in 2usize..4, seed in any::<u64>(), k in 0usize..100) {
        let p = random_measurement::<f64, _>(dim, outcomes, &mut restart_rng(seed, k)).unwrap();
        let mut sum = HermitianMatrix::zeros(dim);
        for e in p.elements() {
            let sq = e.as_matrix().matmul(e.as_matrix()).unwrap();
            prop_assert!(sq.max_abs_diff(e.as_matrix()) < 1e-12);
            sum = &sum + e;
        }
        prop_assert!(sum.max_abs_diff(&HermitianMatrix::identity(dim)) < 1e-12);
    }

    #[test]
    fn success_and_error_rates_partition(n in 2usize..7, delta in 0.0f64..=1.0) {
        let ps = ps_n(n, delta).unwrap();
        let pe = pe_reduced(n, delta).unwrap();
        prop_assert!((ps + (n as f64 - 1.0) * pe - 1.0).abs() < 1e-12);
        prop_assert!(ps >= 1.0 / n as f64 - 1e-12 && ps <= 1.0 + 1e-12);
    }

    #[test]
    fn bounds_compose(n in 2usize..7, delta in 0.0f64..=1.0) {
        let ps = ps_n(n, delta).unwrap();
        let f = fidelity_bound_delta(n, delta).unwrap();
        prop_assert!((fidelity_bound_ps(n, ps).unwrap() - f).abs() < 1e-10);
        let alpha = energy_alpha(n, delta).unwrap();
        prop_assert!((ps_from_energy(n, alpha).unwrap() - ps).abs() < 1e-10);
    }

    #[test]
    fn helstrom_is_monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(helstrom(lo).unwrap() >= helstrom(hi).unwrap());
    }
}

#[test]
fn reduced_states_of_axisymmetric_family_are_normalized() {
    for n in 2..5 {
        for k in 0..=4 {
            let delta = k as f64 / 4.0;
            let e = axisymmetric_family(n, delta).unwrap();
            assert!((ensemble_density(&e).trace() - 1.0).abs() < 1e-12);
            for z in 0..n {
                let r = reduced_state(&e, z, Party::A).unwrap();
                assert!((r.trace() - 1.0).abs() < 1e-12);
                assert!(r.min_eigenvalue().unwrap() > -1e-12);
            }
        }
    }
}

#[test]
fn single_precision_path() {
    let h32 = helstrom(0.8f32).unwrap();
    let h64 = helstrom(0.8f64).unwrap();
    assert!((h32 as f64 - h64).abs() < 1e-6);
    let ps32 = ps_n(3, 0.5f32).unwrap();
    assert!((ps32 as f64 - ps_n(3, 0.5f64).unwrap()).abs() < 1e-6);
    let e = axisymmetric_family(3, 0.5f32).unwrap();
    assert!((ensemble_density(&e).trace() - 1.0).abs() < 1e-5);
}
