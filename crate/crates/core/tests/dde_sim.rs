use flockcert::dde_sim::{
    diagnostics_at, random_initial, run, velocity_fluctuation, SimConfig, SwarmState,
};
use flockcert::error::SimError;
use flockcert::{CommunicationRate, DelayDistribution};

fn config(beta: f64, dist: DelayDistribution, lambda: f64, t_end: f64, dt: f64) -> SimConfig {
    SimConfig::new(lambda, CommunicationRate::new(beta).unwrap(), dist, t_end).with_dt(dt)
}

fn exp(mu: f64) -> DelayDistribution {
    DelayDistribution::exponential(mu).unwrap()
}

#[test]
fn equal_velocities_move_in_straight_lines() {
    let cfg = config(0.3, exp(0.1), 1.0, 2.0, 0.01);
    let init = random_initial(6, 3, 11, 2.0, 0.0, &[0.5, -0.25, 1.0]).unwrap();
    let out = run(&cfg, &init).unwrap();
    for row in &out.diagnostics.rows {
        assert_eq!(row.v, 0.0);
        assert_eq!(row.d, 0.0);
        assert_eq!(row.l, 0.0);
    }
    let last = out.history.last_state();
    for (k, (&x, &x0)) in last.x.iter().zip(&init.x).enumerate() {
        let expected = x0 + init.v[k] * last.t;
        assert!((x - expected).abs() < 1e-12, "{x} vs {expected}");
    }
}

#[test]
fn momentum_is_conserved() {
    let cfg = config(0.5, DelayDistribution::uniform(0.2, 0.6).unwrap(), 2.0, 5.0, 0.01);
    let init = random_initial(7, 2, 3, 1.5, 1.0, &[0.3, -0.7]).unwrap();
    let out = run(&cfg, &init).unwrap();
    let p0 = out.diagnostics.rows[0].momentum.clone();
    let scale = 1.0 + p0.iter().map(|p| p * p).sum::<f64>().sqrt();
    for row in &out.diagnostics.rows {
        let drift: f64 = row.momentum.iter().zip(&p0).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(drift <= 1e-10 * scale, "t = {}: drift {drift}", row.t);
    }
}

#[test]
fn two_agents_relax_to_the_mean() {
    let init = SwarmState::new(0.0, 2, 1, vec![0.0, 1.0], vec![1.0, -1.0]).unwrap();
    let coarse = run(&config(0.0, exp(0.05), 1.0, 10.0, 0.01), &init).unwrap();
    let fine = run(&config(0.0, exp(0.05), 1.0, 10.0, 0.001), &init).unwrap();
    let vc = coarse.history.last_state().v;
    let vf = fine.history.last_state().v;
    assert!(vc[0].abs() < 1e-3 && (vc[0] + vc[1]).abs() < 1e-14);
    assert!((vc[0] - vf[0]).abs() < 1e-8, "{} vs {}", vc[0], vf[0]);
    // V is nonincreasing after the first delay window
    let rows = &coarse.diagnostics.rows;
    for pair in rows.windows(2).filter(|p| p[0].t >= 1.0) {
        assert!(pair[1].v <= pair[0].v * (1.0 + 1e-12));
    }
}

#[test]
fn diagnostics_hand_values() {
    let init = SwarmState::new(0.0, 2, 1, vec![0.0, 2.0], vec![1.0, -1.0]).unwrap();
    assert_eq!(velocity_fluctuation(2, 1, &init.v), 4.0);

    let (lambda, beta) = (0.7, 1.0);
    let d = exp(0.2);
    let cfg = config(beta, d, lambda, 1.0, 0.005);
    let out = run(&cfg, &init).unwrap();
    let row0 = &out.diagnostics.rows[0];
    // D(0) = ½ Σᵢⱼ ψ(|xᵢ - xⱼ|)|vᵢ - vⱼ|² = ψ(2)·4
    let d0 = 4.0 / 5.0;
    assert!((row0.d - d0).abs() < 1e-14);
    assert_eq!(row0.v, 4.0);
    let c = 2.0 * lambda * lambda * d.moment(3) / d.moment(2).sqrt();
    assert!((out.diagnostics.l_zero - (4.0 + c * d0)).abs() < 1e-14);
    // the functional itself starts at half the delay weight of L(0)
    assert!((row0.l - (4.0 + 0.5 * c * d0)).abs() < 1e-3 * c * d0, "{}", row0.l);

    // recomputed from the stored trajectory
    for k in [0usize, 37, 200] {
        let t = k as f64 * cfg.dt;
        let again = diagnostics_at(&out.history, t, &cfg).unwrap();
        let orig = &out.diagnostics.rows[k];
        assert!((again.l - orig.l).abs() <= 1e-12 * orig.l, "t = {t}");
        assert!((again.d - orig.d).abs() <= 1e-12 * orig.d.max(1e-300));
        assert_eq!(again.v, orig.v);
    }
}

#[test]
fn translation_and_rotation_commute_with_run() {
    let cfg = config(0.4, DelayDistribution::linear(0.3).unwrap(), 1.5, 3.0, 0.01);
    let init = random_initial(5, 2, 21, 1.0, 0.8, &[0.1, 0.2]).unwrap();
    let (c, s) = (0.6f64, 0.8f64);
    let rot = |p: &[f64]| p.chunks(2).flat_map(|q| [c * q[0] - s * q[1], s * q[0] + c * q[1]]).collect::<Vec<_>>();
    let moved = SwarmState::new(0.0, 5, 2, rot(&init.x).iter().map(|x| x + 3.0).collect(), rot(&init.v)).unwrap();
    let a = run(&cfg, &init).unwrap().history.last_state();
    let b = run(&cfg, &moved).unwrap().history.last_state();
    let ax: Vec<f64> = rot(&a.x).iter().map(|x| x + 3.0).collect();
    let av = rot(&a.v);
    for k in 0..10 {
        assert!((ax[k] - b.x[k]).abs() < 1e-12, "x[{k}]");
        assert!((av[k] - b.v[k]).abs() < 1e-12, "v[{k}]");
    }
}

/// Classical RK4 on the undelayed system.
fn reference_rk4(init: &SwarmState, lambda: f64, beta: f64, dt: f64, steps: usize) -> (Vec<f64>, Vec<f64>) {
    let (n, d) = (init.n, init.d);
    let rate = CommunicationRate::new(beta).unwrap();
    let rhs = |x: &[f64], v: &[f64]| -> Vec<f64> {
        let mut a = vec![0.0; n * d];
        for i in 0..n {
            for j in 0..n {
                let r = (0..d).map(|k| (x[i * d + k] - x[j * d + k]).powi(2)).sum::<f64>().sqrt();
                let p = rate.psi(r).unwrap();
                for k in 0..d {
                    a[i * d + k] += lambda / n as f64 * p * (v[j * d + k] - v[i * d + k]);
                }
            }
        }
        a
    };
    let axpy = |y: &[f64], h: f64, k: &[f64]| y.iter().zip(k).map(|(a, b)| a + h * b).collect::<Vec<_>>();
    let (mut x, mut v) = (init.x.clone(), init.v.clone());
    for _ in 0..steps {
        let (k1x, k1v) = (v.clone(), rhs(&x, &v));
        let (x2, v2) = (axpy(&x, dt / 2.0, &k1x), axpy(&v, dt / 2.0, &k1v));
        let (k2x, k2v) = (v2.clone(), rhs(&x2, &v2));
        let (x3, v3) = (axpy(&x, dt / 2.0, &k2x), axpy(&v, dt / 2.0, &k2v));
        let (k3x, k3v) = (v3.clone(), rhs(&x3, &v3));
        let (x4, v4) = (axpy(&x, dt, &k3x), axpy(&v, dt, &k3v));
        let (k4x, k4v) = (v4.clone(), rhs(&x4, &v4));
        for c in 0..n * d {
            x[c] += dt / 6.0 * (k1x[c] + 2.0 * k2x[c] + 2.0 * k3x[c] + k4x[c]);
            v[c] += dt / 6.0 * (k1v[c] + 2.0 * k2v[c] + 2.0 * k3v[c] + k4v[c]);
        }
    }
    (x, v)
}

#[test]
fn zero_delay_matches_undelayed_integrator() {
    let init = random_initial(6, 2, 5, 2.0, 1.0, &[]).unwrap();
    let cfg = config(0.8, DelayDistribution::dirac(0.0).unwrap(), 1.2, 4.0, 0.01);
    let out = run(&cfg, &init).unwrap();
    let (x, v) = reference_rk4(&init, 1.2, 0.8, 0.01, cfg.steps());
    let last = out.history.last_state();
    for c in 0..12 {
        assert!((last.x[c] - x[c]).abs() < 1e-10);
        assert!((last.v[c] - v[c]).abs() < 1e-10);
    }
}

#[test]
fn step_halving_shows_fourth_order() {
    // a single delay on the grid keeps the breakpoints at step boundaries
    let init = random_initial(4, 2, 9, 1.0, 1.0, &[]).unwrap();
    let v_end = |dt: f64| {
        let cfg = config(0.5, DelayDistribution::dirac(0.5).unwrap(), 1.0, 4.0, dt);
        run(&cfg, &init).unwrap().diagnostics.rows.last().unwrap().v
    };
    let (a, b, c) = (v_end(0.05), v_end(0.025), v_end(0.0125));
    let order = ((a - b) / (b - c)).abs().log2();
    assert!(order >= 3.5, "observed order {order}");
}

#[test]
fn config_errors() {
    let init = random_initial(3, 1, 1, 1.0, 1.0, &[]).unwrap();
    let coarse = config(0.0, exp(0.01), 1.0, 1.0, 0.1);
    assert!(matches!(run(&coarse, &init), Err(SimError::ConfigInvalid(_))));
    let long_dt = config(0.0, DelayDistribution::dirac(0.0).unwrap(), 1.0, 0.01, 0.1);
    assert!(matches!(run(&long_dt, &init), Err(SimError::ConfigInvalid(_))));
    assert!(SwarmState::new(0.0, 1, 1, vec![0.0], vec![0.0]).is_err());
}

#[test]
fn blow_up_aborts_with_partial_output() {
    // a huge coupling with a long delay overshoots and oscillates with growing amplitude
    let init = SwarmState::new(0.0, 2, 1, vec![0.0, 0.0], vec![1.0, -1.0]).unwrap();
    let cfg = config(0.0, DelayDistribution::dirac(1.0).unwrap(), 20.0, 40.0, 0.01);
    match run(&cfg, &init) {
        Err(SimError::NonFiniteState { t, partial }) => {
            assert!(t > 1.0);
            assert!(!partial.diagnostics.rows.is_empty());
            assert!(partial.diagnostics.rows.iter().all(|r| r.v.is_finite()));
        }
        other => panic!("expected an abort, got {other:?}"),
    }
}

#[test]
fn runs_are_deterministic() {
    let cfg = config(0.2, exp(0.1), 1.0, 2.0, 0.01);
    let init = random_initial(5, 2, 42, 1.0, 1.0, &[]).unwrap();
    let a = run(&cfg, &init).unwrap();
    let b = run(&cfg, &init).unwrap();
    assert_eq!(a, b);
}
