use locdisc::bounds::chsh_bound_overlap;
use locdisc::ensembles::{axisymmetric_qubit_family, two_state_family};
use locdisc::seesaw::{chsh_value, random_measurement, restart_rng, ChshTarget, MeasurementAssignment};

fn random_assignment(k: usize, d_a: usize, d_b: usize) -> MeasurementAssignment<f64> {
    let mut rng = restart_rng(2024, k);
    let alice = [random_measurement(d_a, 2, &mut rng).unwrap(), random_measurement(d_a, 2, &mut rng).unwrap()];
    let bob = [random_measurement(d_b, 2, &mut rng).unwrap(), random_measurement(d_b, 2, &mut rng).unwrap()];
    MeasurementAssignment::new(alice, bob).unwrap()
}

#[test]
fn random_local_strategies_stay_below_two_state_bound() {
    for delta in [0.0, 0.3, 0.7, 1.0] {
        let e = two_state_family(delta).unwrap();
        let t = ChshTarget::from(&e);
        let bound = chsh_bound_overlap(2, delta).unwrap().p_win_max;
        let mut best = 0.0f64;
        for k in 0..5_000 {
            let v = chsh_value(&t, &random_assignment(k, 2, 2)).unwrap();
            assert!(v <= bound + 1e-10, "delta {delta}: {v} > {bound}");
            best = best.max(v);
        }
        // random sampling gets reasonably close to the optimum
        assert!(best > bound - 0.05, "delta {delta}: best {best}");
    }
}

#[test]
fn random_local_strategies_stay_below_axisymmetric_bound() {
    for n in [3usize, 4] {
        for delta in [0.0, 0.4, 0.8] {
            let e = axisymmetric_qubit_family(n, delta).unwrap();
            let (da, db) = e.dims();
            let t = ChshTarget::from(&e);
            let bound = chsh_bound_overlap(n, delta).unwrap().p_win_max;
            for k in 0..2_000 {
                let v = chsh_value(&t, &random_assignment(k, da, db)).unwrap();
                assert!(v <= bound + 1e-10, "N={n} delta {delta}: {v} > {bound}");
            }
        }
    }
}
