use std::f64::consts::FRAC_1_SQRT_2;

use dipolar::{
    asymptotic_t_end, bell_state, concurrence_series, integrate_pseudomode,
    integrate_pseudomode_at, integrate_volterra, integrate_volterra_extrapolated, leak_series,
    residue_coefficients, BellSign, Complex64, InitialAmplitudes, IntegratorConfig, Model,
    SystemParams,
};

fn reference(k: f64) -> Model {
    Model::new(SystemParams::dimensionless(10.0, k, 3f64.sqrt() / 2.0)).unwrap()
}

#[test]
fn three_solvers_agree_on_reference_parameters() {
    for k in [0.0, 2.0, 7.0, 20.0] {
        let m = reference(k);
        for sign in [BellSign::Minus, BellSign::Plus] {
            let init = bell_state(sign);
            let volterra = integrate_volterra_extrapolated(&m, &init, 10.0, 20000);
            let times: Vec<f64> = volterra.times().collect();
            let ode =
                integrate_pseudomode_at(&m, &init, &times, &IntegratorConfig::default()).unwrap();
            let closed = residue_coefficients(&m, &init)
                .unwrap()
                .trajectory(&m, &init, &times);
            assert!(closed.sup_distance(&ode) < 1e-6, "K={k}");
            assert!(volterra.sup_distance(&ode) < 1e-5, "K={k}");
            assert!(volterra.sup_distance(&closed) < 1e-5, "K={k}");
        }
    }
}

#[test]
fn volterra_is_second_order_against_closed_form() {
    let m = reference(2.0);
    let init = bell_state(BellSign::Minus);
    let sol = residue_coefficients(&m, &init).unwrap();
    let error = |n: usize| {
        let traj = integrate_volterra(&m, &init, 4.0, n);
        traj.samples
            .iter()
            .map(|s| {
                let (c1, c2, b) = sol.evolve(s.t);
                (c1 - s.c1)
                    .norm()
                    .max((c2 - s.c2).norm())
                    .max((b - s.b).norm())
            })
            .fold(0.0, f64::max)
    };
    let (e1, e2, e3) = (error(2000), error(4000), error(8000));
    for ratio in [e1 / e2, e2 / e3] {
        assert!((3.7..4.3).contains(&ratio), "ratio {ratio}");
    }
}

#[test]
fn volterra_single_atom_tracks_damped_rabi() {
    let m = Model::new(SystemParams::dimensionless(10.0, 0.0, 1.0)).unwrap();
    let init = InitialAmplitudes::new(Complex64::new(1.0, 0.0), Complex64::default());
    let omega = (4.0 * 100.0 - 1.0f64).sqrt();
    let n = 4000;
    let traj = integrate_volterra(&m, &init, 4.0, n);
    let h = 4.0 / n as f64;
    for s in &traj.samples {
        let want =
            (-s.t / 2.0).exp() * ((omega * s.t / 2.0).cos() + (omega * s.t / 2.0).sin() / omega);
        // O(h^2) with a constant set by the Rabi frequency.
        assert!((s.c1 - want).norm() < 200.0 * h * h, "t={}", s.t);
        assert_eq!(s.c2, Complex64::default());
    }
}

#[test]
fn volterra_symmetric_pair_stays_symmetric() {
    let m = Model::new(SystemParams::dimensionless(10.0, 5.0, FRAC_1_SQRT_2)).unwrap();
    let traj = integrate_volterra(&m, &bell_state(BellSign::Plus), 10.0, 5000);
    for s in &traj.samples {
        assert!((s.c1 - s.c2).norm() < 1e-12);
    }
}

#[test]
fn zero_dipole_settles_to_plateau() {
    let m = reference(0.0);
    let init = bell_state(BellSign::Minus);
    let traj = integrate_pseudomode(&m, &init, 60.0, &IntegratorConfig::default()).unwrap();
    let tail: Vec<f64> = concurrence_series(&traj)
        .into_iter()
        .filter(|(t, _)| *t > 40.0)
        .map(|(_, c)| c)
        .collect();
    let (lo, hi) = tail
        .iter()
        .fold((f64::MAX, f64::MIN), |(a, b), &c| (a.min(c), b.max(c)));
    assert!(hi - lo < 1e-6 && lo > 0.8, "{lo}..{hi}");
}

#[test]
fn dipole_with_unequal_couplings_decays() {
    let m = reference(2.0);
    let init = bell_state(BellSign::Minus);
    let traj = integrate_pseudomode(
        &m,
        &init,
        asymptotic_t_end(&m),
        &IntegratorConfig::default(),
    )
    .unwrap();
    let last = traj.last();
    assert!(last.c1.norm() < 1e-3 && last.c2.norm() < 1e-3);
    // Damped oscillation: the concurrence is not monotone on the way down.
    let c: Vec<f64> = concurrence_series(&traj)
        .into_iter()
        .map(|(_, c)| c)
        .collect();
    assert!(c.windows(2).any(|w| w[1] > w[0] + 1e-3));
}

#[test]
fn decoherence_free_state_keeps_full_population() {
    let m = Model::new(SystemParams {
        width: 1.0,
        coupling: 10.0 * FRAC_1_SQRT_2,
        alpha1: 1.0,
        alpha2: 1.0,
        dipole: 20.0,
        omega0: 0.0,
    })
    .unwrap();
    let init = bell_state(BellSign::Minus);
    // The amplitude drift of the integrator grows like ~300 rel_tol over this span.
    let cfg = IntegratorConfig::adaptive(1e-12, 1e-15);
    let traj = integrate_pseudomode(&m, &init, 20.0, &cfg).unwrap();
    for s in &traj.samples {
        assert!((s.p1() + s.p2() - 1.0).abs() < 1e-9, "t={}", s.t);
    }
    assert!(leak_series(&traj).iter().all(|&(_, p)| p < 1e-9));
}

#[test]
fn single_atom_eventually_leaks_everything() {
    let m = Model::new(SystemParams::dimensionless(10.0, 0.0, 1.0)).unwrap();
    let init = InitialAmplitudes::new(Complex64::new(1.0, 0.0), Complex64::default());
    let traj = integrate_pseudomode(&m, &init, 40.0, &IntegratorConfig::default()).unwrap();
    let leak = leak_series(&traj);
    assert_eq!(leak[0].1, 0.0);
    assert!((leak.last().unwrap().1 - 1.0).abs() < 1e-8);
    assert!(concurrence_series(&traj).iter().all(|&(_, c)| c == 0.0));
}

#[test]
fn leak_rate_identity_on_dense_grid() {
    // d/dt (|c1|^2 + |c2|^2 + |b|^2) = -2 lambda |b|^2
    let m = reference(7.0);
    let init = bell_state(BellSign::Plus);
    let h = 1e-3;
    let times: Vec<f64> = (0..=5000).map(|i| i as f64 * h).collect();
    let traj =
        integrate_pseudomode_at(&m, &init, &times, &IntegratorConfig::adaptive(1e-12, 1e-14))
            .unwrap();
    let p: Vec<f64> = traj
        .samples
        .iter()
        .map(|s| s.tracked_population())
        .collect();
    for i in 2..p.len() - 2 {
        let dp = (p[i - 2] - 8.0 * p[i - 1] + 8.0 * p[i + 1] - p[i + 2]) / (12.0 * h);
        let want = -2.0 * m.lambda() * traj.samples[i].pb();
        assert!(
            (dp - want).abs() < 1e-6,
            "t={} {dp} vs {want}",
            traj.samples[i].t
        );
    }
}
