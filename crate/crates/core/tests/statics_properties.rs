use photoqpt::criticality::{field_sweep, fit_power_law, logspace, DEFAULT_REL_STEP};
use photoqpt::dicke::{build_collective_operator, coherent_amplitudes, norm_sqr, CollectiveOp, DickeSpace};
use photoqpt::lmg::{assemble_hamiltonian, observables, rescaled_correlation, solve_ground, statics, LmgParams};
use proptest::prelude::*;

fn couplings() -> impl Strategy<Value = (f64, f64)> {
    (0.0..1.2f64, 0.0..1.2f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn space_shape(n in 1usize..3000) {
        let space = DickeSpace::new(n).unwrap();
        prop_assert_eq!(space.dimension(), n + 1);
        prop_assert_eq!(space.two_s(), n);
        prop_assert_eq!(space.total_spin() * 2.0, n as f64);
    }

    #[test]
    fn operator_bandwidths(n in 1usize..200) {
        let space = DickeSpace::new(n).unwrap();
        let expected = [(CollectiveOp::Sz, 0), (CollectiveOp::Sx, 1), (CollectiveOp::Sy, 1), (CollectiveOp::Sx2, 2), (CollectiveOp::Sy2, 2)];
        for (op, bw) in expected {
            let o = build_collective_operator(space, op);
            prop_assert!(o.bandwidth() <= bw);
            for i in 0..o.dim() {
                for j in 0..o.dim() {
                    if i.abs_diff(j) > bw {
                        prop_assert_eq!(o.entry(i, j).norm(), 0.0);
                    }
                    prop_assert_eq!(o.entry(i, j), o.entry(j, i).conj());
                }
            }
        }
    }

    #[test]
    fn coherent_states_unit_norm(n in 1usize..2000, theta in 0.0..std::f64::consts::PI, phi in -10.0..10.0f64) {
        let s = coherent_amplitudes(DickeSpace::new(n).unwrap(), theta, phi).unwrap();
        prop_assert!((norm_sqr(&s.amplitudes) - 1.0).abs() < 1e-12);
        prop_assert!((0.0..2.0 * std::f64::consts::PI).contains(&s.phi));
    }

    #[test]
    fn ground_state_invariants(n in 2usize..300, (jx, jy) in couplings(), bx in -0.05..0.05f64) {
        let p = LmgParams::new(n, jx, jy, bx);
        let g = solve_ground(&p).unwrap();
        prop_assert!(g.gap >= -1e-10);
        let h = assemble_hamiltonian(&p).unwrap();
        let hpsi = h.apply(&g.ground);
        let residual = hpsi.iter().zip(&g.ground).map(|(a, b)| (a - b * g.e0).norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(residual <= 1e-8 * h.norm_inf());
        prop_assert!((norm_sqr(&g.ground) - 1.0).abs() < 1e-12);

        let obs = observables(&g);
        let bound = 0.25 + 0.5 / n as f64 + 1e-12;
        for z in [obs.order.zeta_x, obs.order.zeta_y] {
            prop_assert!((-1e-15..=bound).contains(&z), "zeta = {}", z);
        }
        prop_assert_eq!(obs.correlations.eta, rescaled_correlation(obs.correlations.c_xxyy, n));
    }

    #[test]
    fn swap_symmetry(n in 2usize..400, (jx, jy) in couplings()) {
        let a = statics(&LmgParams::new(n, jx, jy, 0.0)).unwrap();
        let b = statics(&LmgParams::new(n, jy, jx, 0.0)).unwrap();
        prop_assert!((a.order.zeta_x - b.order.zeta_y).abs() < 1e-12);
        prop_assert!((a.order.zeta_y - b.order.zeta_x).abs() < 1e-12);
        prop_assert!((a.e0 - b.e0).abs() < 1e-12 * a.e0.abs().max(1.0));
        prop_assert!((a.gap - b.gap).abs() < 1e-10);
    }

    #[test]
    fn field_sign_symmetry(n in 2usize..400, (jx, jy) in couplings(), bx in 1e-7..0.1f64) {
        let plus = statics(&LmgParams::new(n, jx, jy, bx)).unwrap();
        let minus = statics(&LmgParams::new(n, jx, jy, -bx)).unwrap();
        prop_assert!((plus.order.zeta_x - minus.order.zeta_x).abs() < 1e-12);
        prop_assert!((plus.magnetization_x + minus.magnetization_x).abs() < 1e-10);
    }

    #[test]
    fn power_law_recovery(exponent in -3.0..3.0f64, amp in 0.1..10.0f64, lo_exp in -8.0..-3.0f64) {
        let xs = logspace(10f64.powf(lo_exp), 10f64.powf(lo_exp + 2.0), 17);
        let pts: Vec<(f64, f64)> = xs.iter().map(|&x| (x, amp * x.powf(exponent))).collect();
        let fit = fit_power_law(&pts, (xs[0], xs[16])).unwrap();
        prop_assert!((fit.exponent - exponent).abs() < 1e-9);
        prop_assert!((fit.log_amplitude - amp.ln()).abs() < 1e-7);
        prop_assert!(fit.r_squared > 1.0 - 1e-12);
        prop_assert!(fit.window.0 < fit.window.1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn transition_line_sweep_bounds(n in 100usize..800, j in 0.55..1.0f64) {
        let bx = logspace(1e-6, 1e-2, 21);
        let pts = field_sweep(&LmgParams::new(n, j, j, 0.0), &bx, DEFAULT_REL_STEP).unwrap();
        let c_xy = pts.iter().map(|p| p.c_xy.abs()).fold(0.0, f64::max);
        prop_assert!(c_xy <= 1.0, "C_xy = {}", c_xy);
        for p in &pts {
            prop_assert!(p.chi.is_finite());
            prop_assert!(p.gap >= 0.0);
        }
    }
}

/// η must fall as B_x grows, at every fixed (J, N) on the transition line.
#[test]
fn eta_monotone_on_transition_line() {
    let bx = logspace(1e-6, 1e-2, 21);
    let mut violations = vec![];
    for j in [0.55, 0.7, 0.9] {
        for n in [100, 115, 205, 250, 500, 1000] {
            let pts = field_sweep(&LmgParams::new(n, j, j, 0.0), &bx, DEFAULT_REL_STEP).unwrap();
            let rise = pts.windows(2).map(|w| w[1].eta - w[0].eta).fold(0.0, f64::max);
            if rise > 0.0 {
                violations.push(format!("J = {j}, N = {n}: rise {rise:.1e}"));
            }
        }
    }
    assert!(violations.is_empty(), "eta increases with B_x at {}", violations.join("; "));
}
