//! Full 2^N Hilbert-space reference for the amplifier statics.
//!
//! The Hamiltonian is built from Pauli strings on computational basis states
//! (bit j set = spin j up) with no use of collective-spin algebra, then
//! diagonalised densely.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

pub const ORACLE_MAX_QUBITS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleStatics {
    pub e0: f64,
    pub gap: f64,
    pub zeta_x: f64,
    pub zeta_y: f64,
    pub c_xy: f64,
    pub c_xxyy: f64,
}

/// (ε/2)Σσᶻ − (1/N)Σ_{i<j}(J_x σˣσˣ + J_y σʸσʸ) + B_x Σσˣ with ε = 1.
pub fn brute_force_hamiltonian(n: usize, jx: f64, jy: f64, bx: f64) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("oracle needs at least one qubit".into()));
    }
    if n > ORACLE_MAX_QUBITS {
        return Err(Error::OracleTooLarge(n));
    }
    let dim = 1usize << n;
    let nf = n as f64;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for b in 0..dim {
        let ups = b.count_ones() as f64;
        h[(b, b)] += 0.5 * (2.0 * ups - nf);
        for i in 0..n {
            h[(b ^ (1 << i), b)] += bx;
            for j in (i + 1)..n {
                let flipped = b ^ (1 << i) ^ (1 << j);
                // σʸσʸ on two flipped sites: i·i = −1 when the bits agree,
                // i·(−i) = +1 when they differ.
                let same = ((b >> i) & 1) == ((b >> j) & 1);
                let yy = if same { -1.0 } else { 1.0 };
                h[(flipped, b)] -= (jx + jy * yy) / nf;
            }
        }
    }
    Ok(h)
}

/// Σ_j σ_j^α / 2 applied to a full-space vector; α ∈ {x, y}.
fn collective(psi: &[C64], n: usize, y: bool) -> Vec<C64> {
    let mut out = vec![C64::default(); psi.len()];
    for (b, &amp) in psi.iter().enumerate() {
        if amp == C64::default() {
            continue;
        }
        for i in 0..n {
            let target = b ^ (1 << i);
            let factor = if y {
                // σʸ|↑⟩ = i|↓⟩, σʸ|↓⟩ = −i|↑⟩
                if (b >> i) & 1 == 1 {
                    C64::new(0.0, 0.5)
                } else {
                    C64::new(0.0, -0.5)
                }
            } else {
                C64::new(0.5, 0.0)
            };
            out[target] += amp * factor;
        }
    }
    out
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn covariance(a: &[C64], b: &[C64], psi: &[C64], ma: f64, mb: f64) -> f64 {
    let ca: Vec<C64> = a.iter().zip(psi).map(|(x, p)| x - p * ma).collect();
    let cb: Vec<C64> = b.iter().zip(psi).map(|(x, p)| x - p * mb).collect();
    dot(&ca, &cb).re
}

/// e0, gap and the order parameters and correlators of the lowest full-space
/// eigenvector.
pub fn brute_force_statics(n: usize, jx: f64, jy: f64, bx: f64) -> Result<OracleStatics> {
    let h = brute_force_hamiltonian(n, jx, jy, bx)?;
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let (i0, i1) = (order[0], order[1]);
    let psi: Vec<C64> = eig.eigenvectors.column(i0).iter().map(|&x| C64::new(x, 0.0)).collect();

    let sx = collective(&psi, n, false);
    let sy = collective(&psi, n, true);
    let sx2 = collective(&sx, n, false);
    let sy2 = collective(&sy, n, true);
    let mean = |v: &[C64]| dot(&psi, v).re;
    let (mx, my, mx2, my2) = (mean(&sx), mean(&sy), mean(&sx2), mean(&sy2));
    let n2 = (n * n) as f64;
    Ok(OracleStatics {
        e0: eig.eigenvalues[i0],
        gap: eig.eigenvalues[i1] - eig.eigenvalues[i0],
        zeta_x: mx2 / n2,
        zeta_y: my2 / n2,
        c_xy: covariance(&sx, &sy, &psi, mx, my),
        c_xxyy: covariance(&sx2, &sy2, &psi, mx2, my2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_free_spins() {
        let o = brute_force_statics(2, 0.0, 0.0, 0.0).unwrap();
        assert!((o.e0 + 1.0).abs() < 1e-12);
        assert!((o.gap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn refuses_large_systems() {
        assert!(matches!(brute_force_statics(13, 0.1, 0.1, 0.0), Err(Error::OracleTooLarge(13))));
        assert!(brute_force_statics(0, 0.1, 0.1, 0.0).is_err());
    }

    #[test]
    fn hamiltonian_is_symmetric() {
        let h = brute_force_hamiltonian(5, 0.4, 0.9, 0.3).unwrap();
        assert!((&h - h.transpose()).amax() < 1e-15);
    }

    #[test]
    fn single_spin_field() {
        // H = σᶻ/2 + B σˣ, E = ±√(1/4 + B²)
        let o = brute_force_statics(1, 0.0, 0.0, 0.3).unwrap();
        let e = (0.25f64 + 0.09).sqrt();
        assert!((o.e0 + e).abs() < 1e-12 && (o.gap - 2.0 * e).abs() < 1e-12);
    }
}
