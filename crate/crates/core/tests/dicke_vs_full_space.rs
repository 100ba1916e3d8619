use nalgebra::{DMatrix, SymmetricEigen};
use photoqpt::dicke::{build_collective_operator, coherent_amplitudes, CollectiveOp, DickeSpace};
use photoqpt::harness::oracle::brute_force_hamiltonian;
use photoqpt::harness::brute_force_statics;
use photoqpt::lmg::{assemble_hamiltonian, solve_ground, statics, transition_line_energies, LmgParams};
use photoqpt::C64;

fn dense(space: DickeSpace, op: CollectiveOp) -> DMatrix<C64> {
    build_collective_operator(space, op).to_dense()
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

#[test]
fn commutators_and_casimir() {
    for n in 1..=10 {
        let space = DickeSpace::new(n).unwrap();
        let (sx, sy, sz) = (
            dense(space, CollectiveOp::Sx),
            dense(space, CollectiveOp::Sy),
            dense(space, CollectiveOp::Sz),
        );
        let i = C64::new(0.0, 1.0);
        assert!(max_abs(&(&sx * &sy - &sy * &sx - &sz * i)) < 1e-12, "N = {n}");
        assert!(max_abs(&(&sy * &sz - &sz * &sy - &sx * i)) < 1e-12, "N = {n}");
        let s = n as f64 / 2.0;
        let casimir = &sx * &sx + &sy * &sy + &sz * &sz;
        let expect = DMatrix::<C64>::identity(n + 1, n + 1) * C64::from(s * (s + 1.0));
        assert!(max_abs(&(casimir - expect)) < 1e-11, "N = {n}");
    }
}

#[test]
fn squares_match_products() {
    for n in [1, 2, 5, 10, 31] {
        let space = DickeSpace::new(n).unwrap();
        let sx = dense(space, CollectiveOp::Sx);
        let sy = dense(space, CollectiveOp::Sy);
        assert!(max_abs(&(&sx * &sx - dense(space, CollectiveOp::Sx2))) < 1e-10);
        assert!(max_abs(&(&sy * &sy - dense(space, CollectiveOp::Sy2))) < 1e-10);
    }
}

#[test]
fn dicke_spectrum_is_contained_in_full_spectrum() {
    for n in [2, 3, 4, 6, 8] {
        for (jx, jy, bx) in [(0.7, 0.7, 0.0), (0.675, 0.7, 0.01), (0.2, 0.9, -0.03)] {
            let full = SymmetricEigen::new(brute_force_hamiltonian(n, jx, jy, bx).unwrap()).eigenvalues;
            let h = assemble_hamiltonian(&LmgParams::new(n, jx, jy, bx)).unwrap().to_dense();
            let re = h.map(|c| c.re);
            assert!(h.map(|c| c.im.abs()).max() < 1e-15);
            let sector = SymmetricEigen::new(re).eigenvalues;
            for e in sector.iter() {
                let nearest = full.iter().map(|f| (f - e).abs()).fold(f64::MAX, f64::min);
                assert!(nearest < 1e-10, "N = {n}: {e} missing from the full spectrum");
            }
            let fmin = full.iter().copied().fold(f64::MAX, f64::min);
            let smin = sector.iter().copied().fold(f64::MAX, f64::min);
            assert!((fmin - smin).abs() < 1e-10, "ground state lies in the symmetric sector");
        }
    }
}

#[test]
fn oracle_equivalence_small_n() {
    let cases = [
        (0.7, 0.7, 0.0),
        (0.7, 0.7, 1e-3),
        (0.675, 0.7, 0.01),
        (0.5, 0.7, 0.0),
        (0.9, 0.2, 0.05),
        (0.3, 0.3, -0.1),
    ];
    for n in [2, 4, 6, 8, 10] {
        for &(jx, jy, bx) in &cases {
            let a = brute_force_statics(n, jx, jy, bx).unwrap();
            let b = statics(&LmgParams::new(n, jx, jy, bx)).unwrap();
            let pairs = [
                ("e0", a.e0, b.e0),
                ("gap", a.gap, b.gap),
                ("zeta_x", a.zeta_x, b.order.zeta_x),
                ("zeta_y", a.zeta_y, b.order.zeta_y),
                ("c_xy", a.c_xy, b.correlations.c_xy),
                ("c_xxyy", a.c_xxyy, b.correlations.c_xxyy),
            ];
            for (name, x, y) in pairs {
                assert!((x - y).abs() < 1e-8, "N = {n}, ({jx}, {jy}, {bx}): {name} {x} vs {y}");
            }
        }
    }
}

#[test]
fn transition_line_ground_energy_n8() {
    let g = solve_ground(&LmgParams::new(8, 0.7, 0.7, 0.0)).unwrap();
    let e = transition_line_energies(8, 1.0, 0.7);
    let min = e.iter().copied().fold(f64::MAX, f64::min);
    assert!((g.e0 - min).abs() < 1e-12);
    let oracle = brute_force_statics(8, 0.7, 0.7, 0.0).unwrap();
    assert!((oracle.e0 - min).abs() < 1e-10);
}

#[test]
fn coherent_state_is_normalized_eigenstate_at_poles() {
    for n in [1, 7, 200] {
        let space = DickeSpace::new(n).unwrap();
        let up = coherent_amplitudes(space, 0.0, 0.3).unwrap().amplitudes;
        assert!((up[n].norm() - 1.0).abs() < 1e-12);
        let down = coherent_amplitudes(space, std::f64::consts::PI, 1.1).unwrap().amplitudes;
        assert!((down[0].norm() - 1.0).abs() < 1e-12);
        let mid = coherent_amplitudes(space, 1.2, 2.3).unwrap().amplitudes;
        let norm: f64 = mid.iter().map(|c| c.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }
}
