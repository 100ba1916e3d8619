use photoqpt::absorber::{integrate_hierarchy, integrate_hierarchy_sampled, AbsorberParams, IntegrationGrid};
use photoqpt::amplifier::{evolve, q_function, quantum_gain, DriveSchedule};
use photoqpt::dicke::{coherent_amplitudes, norm_sqr, DickeSpace};
use photoqpt::lmg::LmgParams;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn hierarchy_blocks_stay_physical(
        delta in 0.0..15.0f64,
        gamma in 1.0..30.0f64,
        eta in 0.2..=1.0f64,
        phase in 0.0..6.3f64,
    ) {
        let mut p = AbsorberParams::new(delta, gamma, 1.0, 0.0);
        p.eta_scatter = eta;
        p.phase = phase;
        let mut grid = IntegrationGrid::new(-5.0, 8.0, 1e-3);
        grid.sample_every = 50;
        let trace = integrate_hierarchy_sampled(&p, &grid, |_, s| s.check_invariants(1e-10)).unwrap();
        for &pe in &trace.pe {
            prop_assert!((-1e-8..=1.0 + 1e-8).contains(&pe));
        }
        // Past the pulse tail the stored population can only grow.
        for w in trace.times.windows(2).zip(trace.pe.windows(2)) {
            if w.0[0] > 5.0 {
                prop_assert!(w.1[1] >= w.1[0] - 1e-10);
            }
        }
        prop_assert_eq!(trace.pe_steady, trace.pe.iter().copied().fold(f64::MIN, f64::max));
    }

    #[test]
    fn absorber_step_halving(delta in 1.0..10.0f64, gamma in 2.0..20.0f64) {
        let p = AbsorberParams::new(delta, gamma, 1.0, 0.0);
        let a = integrate_hierarchy(&p, -5.0, 10.0, 1e-3).unwrap();
        let b = integrate_hierarchy(&p, -5.0, 10.0, 5e-4).unwrap();
        prop_assert!((a.pe.last().unwrap() - b.pe.last().unwrap()).abs() < 1e-6);
    }

    #[test]
    fn amplifier_norm_and_gain(n in 4usize..120, jx in 0.3..0.9f64, bx in 0.001..0.05f64) {
        let drive = DriveSchedule::new(vec![-1.0, 0.0, 1.0, 2.0], vec![0.0, 0.3, 0.9, 1.0], bx).unwrap();
        let p = LmgParams::new(n, jx, 0.7, 0.0);
        let traj = evolve(&p, &drive, -1.0, 4.0, 1e-3, 250).unwrap();
        prop_assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
        for s in &traj.states {
            prop_assert!((norm_sqr(s) - 1.0).abs() < 1e-6);
        }
        let gain = quantum_gain(&traj, -1.0, 0.0).unwrap();
        prop_assert_eq!(gain.gain[0], 1.0);
        prop_assert!(gain.gain.iter().all(|&g| g > 0.0));
    }

    #[test]
    fn amplifier_step_halving(n in 10usize..80, jx in 0.5..0.7f64) {
        let drive = DriveSchedule::new(vec![-1.0, 0.0, 1.0, 2.0], vec![0.0, 0.3, 0.9, 1.0], 0.01).unwrap();
        let p = LmgParams::new(n, jx, 0.7, 0.0);
        let a = evolve(&p, &drive, -1.0, 3.0, 1e-3, 4000).unwrap();
        let b = evolve(&p, &drive, -1.0, 3.0, 5e-4, 8000).unwrap();
        let (x, y) = (*a.sx2.last().unwrap(), *b.sx2.last().unwrap());
        prop_assert!(((x - y) / y).abs() < 1e-6);
    }

    #[test]
    fn q_function_normalized(n in 1usize..300, theta in 0.0..std::f64::consts::PI, phi in 0.0..std::f64::consts::TAU) {
        let space = DickeSpace::new(n).unwrap();
        let state = coherent_amplitudes(space, theta, phi).unwrap().amplitudes;
        let q = q_function(&state, space).unwrap();
        prop_assert!(q.values.iter().flatten().all(|&v| v >= 0.0));
        prop_assert!((q.normalization() - 1.0).abs() < 1e-3);
    }
}
