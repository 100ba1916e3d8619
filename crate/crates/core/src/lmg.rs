//! Amplifier Hamiltonian (all-to-all LMG model with an in-plane field), its
//! lowest eigenpairs and the ground-state observables built on them.
//!
//! All energies are in units of the qubit splitting ε.

use serde::{Deserialize, Serialize};

use crate::dicke::{self, BandedHermitianOperator, CollectiveOps, DickeSpace};
use crate::eigen::{self, lowest_eigenpairs};
use crate::error::{Error, Result};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LmgParams {
    pub n_qubits: usize,
    pub epsilon: f64,
    pub jx: f64,
    pub jy: f64,
    pub bx: f64,
}

impl LmgParams {
    /// ε = 1.
    pub fn new(n_qubits: usize, jx: f64, jy: f64, bx: f64) -> Self {
        Self {
            n_qubits,
            epsilon: 1.0,
            jx,
            jy,
            bx,
        }
    }

    pub fn with_bx(self, bx: f64) -> Self {
        Self { bx, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 {
            return Err(Error::Precondition("n_qubits must be >= 1".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Precondition(format!("epsilon = {} must be > 0", self.epsilon)));
        }
        if !(self.jx >= 0.0 && self.jy >= 0.0) {
            return Err(Error::Precondition(format!(
                "couplings must be ferromagnetic (>= 0): jx = {}, jy = {}",
                self.jx, self.jy
            )));
        }
        if !self.bx.is_finite() {
            return Err(Error::Precondition(format!("bx = {} is not finite", self.bx)));
        }
        Ok(())
    }

    pub fn space(&self) -> Result<DickeSpace> {
        DickeSpace::new(self.n_qubits)
    }
}

/// H = ε S_z − (J_x/N)(2S_x² − N/2) − (J_y/N)(2S_y² − N/2) + 2 B_x S_x.
///
/// The pair sums Σ_{i<j} σᵢ^α σⱼ^α are replaced by 2S_α² − N/2; the resulting
/// constant (J_x + J_y)/2 is kept.
pub fn assemble_hamiltonian(params: &LmgParams) -> Result<BandedHermitianOperator> {
    params.validate()?;
    let ops = CollectiveOps::new(params.space()?);
    assemble_with(params, &ops)
}

fn assemble_with(params: &LmgParams, ops: &CollectiveOps) -> Result<BandedHermitianOperator> {
    let n = params.n_qubits as f64;
    let dim = params.n_qubits + 1;
    let id = BandedHermitianOperator::identity(dim);
    BandedHermitianOperator::linear_combination(&[
        (params.epsilon, &ops.sz),
        (-2.0 * params.jx / n, &ops.sx2),
        (-2.0 * params.jy / n, &ops.sy2),
        (2.0 * params.bx, &ops.sx),
        (0.5 * (params.jx + params.jy), &id),
    ])
}

/// E(m) = ε m − (2J/N)[S(S+1) − m²] + J on the line J_x = J_y = J, B_x = 0,
/// where the Hamiltonian is diagonal in |S,m⟩. Ascending m.
pub fn transition_line_energies(n_qubits: usize, epsilon: f64, j: f64) -> Vec<f64> {
    let n = n_qubits as f64;
    let s = n / 2.0;
    (0..=n_qubits)
        .map(|i| {
            let m = i as f64 - s;
            epsilon * m - (2.0 * j / n) * (s * (s + 1.0) - m * m) + j
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct GroundStateResult {
    pub params: LmgParams,
    pub e0: f64,
    pub e1: f64,
    pub gap: f64,
    /// Real in this model; stored complex so it feeds the propagator directly.
    pub ground: Vec<C64>,
}

impl GroundStateResult {
    pub fn space(&self) -> DickeSpace {
        DickeSpace::new(self.params.n_qubits).expect("validated on solve")
    }
}

struct Candidate {
    value: f64,
    block: usize,
    vector: Vec<f64>,
}

/// Two lowest eigenpairs of the assembled Hamiltonian.
///
/// At B_x = 0 the operator only couples m to m ± 2, so it splits into two
/// tridiagonal parity blocks; each block is solved separately and the two
/// lowest levels are taken across blocks (even block first on exact ties).
/// This keeps quasi-degenerate ground states at definite parity.
pub fn solve_ground(params: &LmgParams) -> Result<GroundStateResult> {
    params.validate()?;
    let h = assemble_hamiltonian(params)?;
    solve_assembled(params, &h)
}

fn solve_assembled(params: &LmgParams, h: &BandedHermitianOperator) -> Result<GroundStateResult> {
    let dim = h.dim();
    let wrap = |e: Error| e.context(format!("ground-state solve for {params:?}"));
    let bands = h.real_bands();

    let mut candidates: Vec<Candidate> = Vec::new();
    if params.bx == 0.0 {
        for block in 0..2 {
            let idx: Vec<usize> = (block..dim).step_by(2).collect();
            if idx.is_empty() {
                continue;
            }
            let diag: Vec<f64> = idx.iter().map(|&i| bands[0][i]).collect();
            let off: Vec<f64> = idx
                .iter()
                .skip(1)
                .map(|&i| bands.get(2).map_or(0.0, |b| b[i - 2]))
                .collect();
            let ep = lowest_eigenpairs(&[diag, off], 2).map_err(wrap)?;
            for (value, v) in ep.values.into_iter().zip(ep.vectors) {
                let mut full = vec![0.0; dim];
                for (&i, x) in idx.iter().zip(v) {
                    full[i] = x;
                }
                candidates.push(Candidate {
                    value,
                    block,
                    vector: full,
                });
            }
        }
    } else {
        let ep = lowest_eigenpairs(bands, 2).map_err(wrap)?;
        for (value, vector) in ep.values.into_iter().zip(ep.vectors) {
            candidates.push(Candidate {
                value,
                block: 0,
                vector,
            });
        }
    }
    candidates.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.block.cmp(&b.block)));
    if candidates.len() < 2 {
        return Err(wrap(Error::Numeric {
            dim,
            detail: "fewer than two eigenpairs".into(),
        }));
    }
    let mut ground = std::mem::take(&mut candidates[0].vector);
    eigen::fix_sign(&mut ground);
    let (e0, e1) = (candidates[0].value, candidates[1].value);
    let gap = e1 - e0;

    // Invariants asserted on every solve.
    let mut hv = vec![0.0; dim];
    h.apply_real_into(&ground, &mut hv);
    let residual = hv
        .iter()
        .zip(&ground)
        .map(|(a, g)| (a - e0 * g).powi(2))
        .sum::<f64>()
        .sqrt();
    let hnorm = h.norm_inf();
    if gap < -1e-10 || residual > 1e-8 * hnorm {
        return Err(wrap(Error::Numeric {
            dim,
            detail: format!("eigenpair check failed: gap {gap:e}, residual {residual:e}"),
        }));
    }

    Ok(GroundStateResult {
        params: *params,
        e0,
        e1,
        gap: gap.max(0.0),
        ground: ground.into_iter().map(|x| C64::new(x, 0.0)).collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderParameters {
    pub zeta_x: f64,
    pub zeta_y: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSet {
    pub c_xy: f64,
    pub c_xxyy: f64,
    pub eta: f64,
}

/// Every ground-state observable used downstream, from one set of operator
/// applications.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StaticObservables {
    pub e0: f64,
    pub gap: f64,
    pub order: OrderParameters,
    pub correlations: CorrelationSet,
    /// ⟨S_x⟩/N, the field-induced magnetisation.
    pub magnetization_x: f64,
}

fn centered(v: &mut [C64], psi: &[C64], mean: f64) {
    for (x, p) in v.iter_mut().zip(psi) {
        *x -= p * mean;
    }
}

/// ½⟨AB + BA⟩ − ⟨A⟩⟨B⟩ = Re⟨(A−⟨A⟩)ψ | (B−⟨B⟩)ψ⟩ for Hermitian A, B.
fn symmetric_covariance(a_psi: &[C64], b_psi: &[C64], psi: &[C64], mean_a: f64, mean_b: f64) -> f64 {
    let mut a = a_psi.to_vec();
    let mut b = b_psi.to_vec();
    centered(&mut a, psi, mean_a);
    centered(&mut b, psi, mean_b);
    dicke::inner(&a, &b).re
}

pub fn observables(result: &GroundStateResult) -> StaticObservables {
    let space = result.space();
    observables_with(result, &CollectiveOps::new(space))
}

pub fn observables_with(result: &GroundStateResult, ops: &CollectiveOps) -> StaticObservables {
    let psi = &result.ground;
    let n = result.params.n_qubits as f64;
    let sx = ops.sx.apply(psi);
    let sy = ops.sy.apply(psi);
    let sx2 = ops.sx2.apply(psi);
    let sy2 = ops.sy2.apply(psi);
    let mean = |v: &[C64]| dicke::inner(psi, v).re;
    let (mx, my, mx2, my2) = (mean(&sx), mean(&sy), mean(&sx2), mean(&sy2));

    let c_xy = symmetric_covariance(&sx, &sy, psi, mx, my);
    let c_xxyy = symmetric_covariance(&sx2, &sy2, psi, mx2, my2);
    StaticObservables {
        e0: result.e0,
        gap: result.gap,
        order: OrderParameters {
            zeta_x: mx2 / (n * n),
            zeta_y: my2 / (n * n),
        },
        correlations: CorrelationSet {
            c_xy,
            c_xxyy,
            eta: rescaled_correlation(c_xxyy, result.params.n_qubits),
        },
        magnetization_x: mx / n,
    }
}

/// η = (2/N)|C_xxyy|^{1/4}.
pub fn rescaled_correlation(c_xxyy: f64, n_qubits: usize) -> f64 {
    2.0 / n_qubits as f64 * c_xxyy.abs().powf(0.25)
}

/// ζ_α = ⟨S_α²⟩₀ / N².
pub fn order_parameters(result: &GroundStateResult) -> OrderParameters {
    let space = result.space();
    let ops = CollectiveOps::new(space);
    let n2 = (result.params.n_qubits as f64).powi(2);
    let psi = &result.ground;
    OrderParameters {
        zeta_x: dicke::inner(psi, &ops.sx2.apply(psi)).re / n2,
        zeta_y: dicke::inner(psi, &ops.sy2.apply(psi)).re / n2,
    }
}

pub fn correlations(result: &GroundStateResult) -> CorrelationSet {
    observables(result).correlations
}

/// Solve and evaluate in one call.
pub fn statics(params: &LmgParams) -> Result<StaticObservables> {
    params.validate()?;
    let ops = CollectiveOps::new(params.space()?);
    let h = assemble_with(params, &ops)?;
    let gs = solve_assembled(params, &h)?;
    Ok(observables_with(&gs, &ops))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn dense_real(h: &BandedHermitianOperator) -> DMatrix<f64> {
        h.to_dense().map(|c| c.re)
    }

    #[test]
    fn free_spins() {
        let p = LmgParams::new(4, 0.0, 0.0, 0.0);
        let h = assemble_hamiltonian(&p).unwrap();
        assert_eq!(h.real_bands()[0], vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        let gs = solve_ground(&p).unwrap();
        assert!((gs.e0 + 2.0).abs() < 1e-12);
        assert!((gs.gap - 1.0).abs() < 1e-12);

        let gs = solve_ground(&LmgParams::new(100, 0.0, 0.0, 0.0)).unwrap();
        assert!((gs.e0 + 50.0).abs() < 1e-10);
        assert!((gs.gap - 1.0).abs() < 1e-10);
        assert!((gs.ground[0].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn transition_line_is_diagonal() {
        for n in [3, 8, 51] {
            let h = assemble_hamiltonian(&LmgParams::new(n, 0.7, 0.7, 0.0)).unwrap();
            let e = transition_line_energies(n, 1.0, 0.7);
            for (a, b) in h.real_bands()[0].iter().zip(&e) {
                assert!((a - b).abs() < 1e-12);
            }
            assert!(h.real_bands()[1..].iter().flatten().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn transition_line_ground_at_large_n() {
        // argmin_m E(m) sits near m = −εN/(4J) = −357.14 → m* = −357.
        let gs = solve_ground(&LmgParams::new(1000, 0.7, 0.7, 0.0)).unwrap();
        let i = gs
            .ground
            .iter()
            .position(|c| (c.re - 1.0).abs() < 1e-10)
            .expect("basis state");
        assert_eq!(i as i64 - 500, -357);
        let e = transition_line_energies(1000, 1.0, 0.7);
        let mut sorted = e.clone();
        sorted.sort_by(f64::total_cmp);
        assert!((gs.e0 - sorted[0]).abs() < 1e-10);
        assert!((gs.gap - (sorted[1] - sorted[0])).abs() < 1e-10);
    }

    #[test]
    fn agrees_with_dense_diagonalisation() {
        for p in [
            LmgParams::new(30, 0.675, 0.7, 0.0),
            LmgParams::new(31, 0.3, 0.9, 0.02),
            LmgParams::new(64, 0.7, 0.7, 1e-3),
            LmgParams::new(12, 1.3, 0.2, -0.4),
        ] {
            let h = assemble_hamiltonian(&p).unwrap();
            let mut w: Vec<f64> = dense_real(&h).symmetric_eigen().eigenvalues.iter().cloned().collect();
            w.sort_by(f64::total_cmp);
            let gs = solve_ground(&p).unwrap();
            assert!((gs.e0 - w[0]).abs() < 1e-10, "{p:?}");
            assert!((gs.gap - (w[1] - w[0])).abs() < 1e-10, "{p:?}");
        }
    }

    #[test]
    fn parity_path_matches_full_band_path() {
        let p = LmgParams::new(40, 0.4, 0.9, 0.0);
        let gs = solve_ground(&p).unwrap();
        let h = assemble_hamiltonian(&p).unwrap();
        let full = lowest_eigenpairs(h.real_bands(), 2).unwrap();
        assert!((gs.e0 - full.values[0]).abs() < 1e-10);
        assert!((gs.e1 - full.values[1]).abs() < 1e-10);
        let overlap: f64 = gs.ground.iter().zip(&full.vectors[0]).map(|(a, b)| a.re * b).sum();
        assert!((overlap.abs() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn pole_state_observables() {
        let gs = solve_ground(&LmgParams::new(20, 0.0, 0.0, 0.0)).unwrap();
        let o = observables(&gs);
        assert!((o.order.zeta_x - 1.0 / 80.0).abs() < 1e-14);
        assert!((o.order.zeta_y - 1.0 / 80.0).abs() < 1e-14);
        assert!(o.correlations.c_xy.abs() < 1e-14);
        assert_eq!(order_parameters(&gs), o.order);
    }

    #[test]
    fn order_parameter_bounds_and_symmetry() {
        for n in [5, 40, 200] {
            let gs = solve_ground(&LmgParams::new(n, 0.8, 0.8, 0.0)).unwrap();
            let o = order_parameters(&gs);
            let bound = 0.25 + 0.5 / n as f64;
            assert!(o.zeta_x >= 0.0 && o.zeta_x <= bound);
            assert!((o.zeta_x - o.zeta_y).abs() < 1e-12);
        }
    }

    #[test]
    fn strong_negative_correlation_at_transition() {
        let c = correlations(&solve_ground(&LmgParams::new(1000, 0.7, 0.7, 1e-5)).unwrap());
        assert!(c.c_xxyy < -1e8, "{c:?}");
        assert!((c.eta - 2.0 / 1000.0 * c.c_xxyy.abs().powf(0.25)).abs() < 1e-15);
    }

    #[test]
    fn invalid_params() {
        assert!(solve_ground(&LmgParams::new(0, 0.1, 0.1, 0.0)).is_err());
        assert!(solve_ground(&LmgParams::new(4, -0.1, 0.1, 0.0)).is_err());
        let mut p = LmgParams::new(4, 0.1, 0.1, 0.0);
        p.epsilon = 0.0;
        assert!(matches!(assemble_hamiltonian(&p), Err(Error::Precondition(_))));
    }
}
