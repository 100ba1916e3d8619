//! Unitary amplifier dynamics under the absorber-controlled field
//! H(t) = H_Am + 2 P_e(t) B_x S_x, quantum gain and spin Q-function.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dicke::{self, CollectiveOps, DickeSpace, HalfLogBinomials};
use crate::error::{Error, Result};
use crate::lmg::{assemble_hamiltonian, solve_ground, LmgParams};
use crate::C64;

pub const MAX_DT: f64 = 1e-3;
pub const Q_THETA_POINTS: usize = 181;
pub const Q_PHI_POINTS: usize = 361;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveSchedule {
    times: Vec<f64>,
    pe: Vec<f64>,
    bx: f64,
}

impl DriveSchedule {
    pub fn new(times: Vec<f64>, pe: Vec<f64>, bx: f64) -> Result<Self> {
        if times.is_empty() || times.len() != pe.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                found: pe.len(),
            });
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Precondition("drive times must be strictly ascending".into()));
        }
        let offenders: Vec<usize> = pe
            .iter()
            .enumerate()
            .filter(|(_, &p)| !(-1e-8..=1.0 + 1e-8).contains(&p))
            .map(|(i, _)| i)
            .collect();
        if !offenders.is_empty() {
            return Err(Error::Domain { offenders });
        }
        if !bx.is_finite() {
            return Err(Error::Precondition(format!("bx = {bx} is not finite")));
        }
        Ok(Self { times, pe, bx })
    }

    /// P_e held at `value` for all times.
    pub fn constant(value: f64, bx: f64) -> Result<Self> {
        Self::new(vec![0.0], vec![value], bx)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn pe(&self) -> &[f64] {
        &self.pe
    }

    pub fn bx(&self) -> f64 {
        self.bx
    }

    /// Linear between samples, constant beyond either end.
    pub fn pe_at(&self, t: f64) -> f64 {
        let n = self.times.len();
        if t <= self.times[0] {
            return self.pe[0];
        }
        if t >= self.times[n - 1] {
            return self.pe[n - 1];
        }
        let k = self.times.partition_point(|&x| x <= t);
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let w = (t - t0) / (t1 - t0);
        self.pe[k - 1] * (1.0 - w) + self.pe[k] * w
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmplifierTrajectory {
    pub n_qubits: usize,
    pub times: Vec<f64>,
    pub pe: Vec<f64>,
    pub states: Vec<Vec<C64>>,
    pub sx2: Vec<f64>,
    pub sy2: Vec<f64>,
}

/// Pentadiagonal real H0 plus c·S_x, applied as −i(H0 + c S_x)ψ.
struct Propagator {
    h: [Vec<f64>; 3],
    sx1: Vec<f64>,
}

impl Propagator {
    fn rhs(&self, c: f64, psi: &[C64], out: &mut [C64]) {
        let n = psi.len();
        let [d, e1, e2] = &self.h;
        for i in 0..n {
            let mut acc = psi[i] * d[i];
            if i + 1 < n {
                acc += psi[i + 1] * (e1[i] + c * self.sx1[i]);
            }
            if i >= 1 {
                acc += psi[i - 1] * (e1[i - 1] + c * self.sx1[i - 1]);
            }
            if i + 2 < n {
                acc += psi[i + 2] * e2[i];
            }
            if i >= 2 {
                acc += psi[i - 2] * e2[i - 2];
            }
            out[i] = C64::new(acc.im, -acc.re);
        }
    }
}

fn band_or_zero(bands: &[Vec<f64>], k: usize, len: usize) -> Vec<f64> {
    bands.get(k).cloned().unwrap_or_else(|| vec![0.0; len])
}

/// Fixed-step RK4 from the zero-field ground state of `params`.
///
/// H_Am is shifted by its ground energy before propagating; this changes only
/// a global phase and keeps the integrator error proportional to the
/// dynamics rather than to |E0|.
pub fn evolve(
    params: &LmgParams,
    drive: &DriveSchedule,
    t_start: f64,
    t_end: f64,
    dt: f64,
    sample_every: usize,
) -> Result<AmplifierTrajectory> {
    params.validate()?;
    if params.bx != 0.0 {
        return Err(Error::Precondition(
            "amplifier bias must have zero static field; the field comes from the drive".into(),
        ));
    }
    if !(dt > 0.0 && dt <= MAX_DT * (1.0 + 1e-12)) {
        return Err(Error::Precondition(format!("dt = {dt} outside (0, {MAX_DT}]")));
    }
    if !(t_end > t_start) || sample_every == 0 {
        return Err(Error::Precondition(format!(
            "invalid run window [{t_start}, {t_end}] every {sample_every}"
        )));
    }
    if t_start > drive.times[0] {
        return Err(Error::Precondition(format!(
            "t_start = {t_start} is after the first drive sample {}",
            drive.times[0]
        )));
    }

    let space = params.space()?;
    let ops = CollectiveOps::new(space);
    let gs = solve_ground(params)?;
    let h0 = assemble_hamiltonian(params)?;
    let dim = space.dimension();
    let bands = h0.real_bands();
    let mut diag = bands[0].clone();
    for d in &mut diag {
        *d -= gs.e0;
    }
    let prop = Propagator {
        h: [
            diag,
            band_or_zero(bands, 1, dim.saturating_sub(1)),
            band_or_zero(bands, 2, dim.saturating_sub(2)),
        ],
        sx1: ops.sx.real_bands()[1].clone(),
    };
    let coupling = |t: f64| 2.0 * drive.bx * drive.pe_at(t);

    let steps = ((t_end - t_start) / dt).round() as usize;
    let mut psi = gs.ground.clone();
    let mut traj = AmplifierTrajectory {
        n_qubits: params.n_qubits,
        times: vec![],
        pe: vec![],
        states: vec![],
        sx2: vec![],
        sy2: vec![],
    };
    let record = |t: f64, psi: &[C64], traj: &mut AmplifierTrajectory| {
        traj.times.push(t);
        traj.pe.push(drive.pe_at(t));
        traj.sx2.push(dicke::inner(psi, &ops.sx2.apply(psi)).re);
        traj.sy2.push(dicke::inner(psi, &ops.sy2.apply(psi)).re);
        traj.states.push(psi.to_vec());
    };
    record(t_start, &psi, &mut traj);

    let mut k1 = vec![C64::default(); dim];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut tmp = k1.clone();
    for k in 0..steps {
        let t = t_start + k as f64 * dt;
        let (c0, ch, c1) = (coupling(t), coupling(t + 0.5 * dt), coupling(t + dt));
        prop.rhs(c0, &psi, &mut k1);
        for i in 0..dim {
            tmp[i] = psi[i] + k1[i] * (0.5 * dt);
        }
        prop.rhs(ch, &tmp, &mut k2);
        for i in 0..dim {
            tmp[i] = psi[i] + k2[i] * (0.5 * dt);
        }
        prop.rhs(ch, &tmp, &mut k3);
        for i in 0..dim {
            tmp[i] = psi[i] + k3[i] * dt;
        }
        prop.rhs(c1, &tmp, &mut k4);
        for i in 0..dim {
            psi[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0);
        }

        if (k + 1) % sample_every == 0 || k + 1 == steps {
            let tn = t_start + (k + 1) as f64 * dt;
            let norm2 = dicke::norm_sqr(&psi);
            let drift = (norm2.sqrt() - 1.0).abs();
            if !(drift < 1e-6) {
                return Err(Error::Integration {
                    dt,
                    detail: format!("norm drift {drift:e} at t = {tn}"),
                });
            }
            let scale = 1.0 / norm2.sqrt();
            psi.iter_mut().for_each(|x| *x *= scale);
            record(tn, &psi, &mut traj);
        }
    }
    Ok(traj)
}

/// ⟨H_Am + c S_x⟩ for a stored state.
pub fn energy(params: &LmgParams, coupling: f64, state: &[C64]) -> Result<f64> {
    let h0 = assemble_hamiltonian(&params.with_bx(0.0))?;
    let sx = dicke::build_collective_operator(params.space()?, dicke::CollectiveOp::Sx);
    Ok(dicke::expectation(&h0, state)? + coupling * dicke::expectation(&sx, state)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainTrace {
    pub times: Vec<f64>,
    pub gain: Vec<f64>,
    pub g_max: f64,
    /// First time G ≥ 0.95 g_max, relative to `t_arrival`.
    pub t_am: f64,
    pub t_arrival: f64,
}

/// G(t) = ⟨S_x²(t)⟩ / ⟨S_x²(t0)⟩ with t0 the first trajectory time.
pub fn quantum_gain(traj: &AmplifierTrajectory, t0: f64, t_arrival: f64) -> Result<GainTrace> {
    let first = *traj
        .times
        .first()
        .ok_or(Error::InsufficientData { needed: 1, found: 0 })?;
    if (first - t0).abs() > 1e-12 * first.abs().max(1.0) {
        return Err(Error::Precondition(format!(
            "t0 = {t0} is not the first trajectory time {first}"
        )));
    }
    let base = traj.sx2[0];
    if !(base.abs() >= 1e-300) {
        return Err(Error::DegenerateDenominator(base));
    }
    let gain: Vec<f64> = traj.sx2.iter().map(|v| v / base).collect();
    let g_max = gain.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let idx = gain
        .iter()
        .position(|&g| g >= 0.95 * g_max)
        .expect("maximum is attained");
    Ok(GainTrace {
        times: traj.times.clone(),
        gain,
        g_max,
        t_am: traj.times[idx] - t_arrival,
        t_arrival,
    })
}

/// Clenshaw-Curtis weights for ∫ f sinθ dθ on θ_k = kπ/(len−1). The nodes
/// cos θ_k are Chebyshev-Lobatto points, so the rule is exact for
/// polynomials in cos θ up to degree len − 1.
fn theta_weights(len: usize) -> Vec<f64> {
    let n = len - 1;
    if n == 0 {
        return vec![2.0];
    }
    (0..=n)
        .map(|k| {
            let c = if k == 0 || k == n { 1.0 } else { 2.0 };
            let sum: f64 = (1..=n / 2)
                .map(|j| {
                    let b = if 2 * j == n { 1.0 } else { 2.0 };
                    b / (4.0 * (j * j) as f64 - 1.0) * (2.0 * PI * (j * k) as f64 / n as f64).cos()
                })
                .sum();
            c / n as f64 * (1.0 - sum)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QFunctionGrid {
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    /// `values[k][l]` = Q(theta[k], phi[l]).
    pub values: Vec<Vec<f64>>,
}

impl QFunctionGrid {
    fn dphi(&self) -> f64 {
        2.0 * PI / self.phi.len() as f64
    }

    /// ∫ Q sinθ dθ dφ: Clenshaw-Curtis in cos θ, periodic rectangle rule in φ.
    pub fn normalization(&self) -> f64 {
        let dphi = self.dphi();
        theta_weights(self.theta.len())
            .iter()
            .zip(&self.values)
            .map(|(w, row)| w * row.iter().sum::<f64>() * dphi)
            .sum()
    }

    /// Fraction of the quadrature mass whose φ lies within `half_width` of any
    /// of `centers` (mod 2π).
    pub fn azimuthal_mass_near(&self, centers: &[f64], half_width: f64) -> f64 {
        let near = |phi: f64| {
            centers.iter().any(|&c| {
                let d = (phi - c).rem_euclid(2.0 * PI);
                d.min(2.0 * PI - d) <= half_width
            })
        };
        let (mut inside, mut total) = (0.0, 0.0);
        for (w, row) in theta_weights(self.theta.len()).into_iter().zip(&self.values) {
            for (l, &q) in row.iter().enumerate() {
                total += w * q;
                if near(self.phi[l]) {
                    inside += w * q;
                }
            }
        }
        inside / total
    }

    /// (θ, φ, Q) at the grid maximum.
    pub fn argmax(&self) -> (f64, f64, f64) {
        let mut best = (0.0, 0.0, f64::NEG_INFINITY);
        for (k, row) in self.values.iter().enumerate() {
            for (l, &q) in row.iter().enumerate() {
                if q > best.2 {
                    best = (self.theta[k], self.phi[l], q);
                }
            }
        }
        best
    }
}

/// Q(θ, φ) = (2S+1)/4π |⟨θ,φ|ψ⟩|² on 181 × 361 points.
///
/// With z = e^{iφ}, ⟨θ,φ|ψ⟩ = Σ_i |a_i(θ)| ψ_i z^{N−i}, evaluated by Horner's
/// rule along each θ row.
pub fn q_function(state: &[C64], space: DickeSpace) -> Result<QFunctionGrid> {
    let dim = space.dimension();
    if state.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: state.len(),
        });
    }
    let norm2 = dicke::norm_sqr(state);
    if (norm2 - 1.0).abs() > 1e-8 {
        return Err(Error::Precondition(format!("state norm² = {norm2}, expected 1")));
    }
    let theta: Vec<f64> = (0..Q_THETA_POINTS)
        .map(|k| PI * k as f64 / (Q_THETA_POINTS - 1) as f64)
        .collect();
    let phi: Vec<f64> = (0..Q_PHI_POINTS)
        .map(|l| 2.0 * PI * l as f64 / Q_PHI_POINTS as f64)
        .collect();
    let zs: Vec<C64> = phi.iter().map(|&p| C64::from_polar(1.0, p)).collect();
    let binoms = HalfLogBinomials::new(space);
    let prefactor = (dim as f64) / (4.0 * PI);

    let values = theta
        .par_iter()
        .map(|&th| {
            let coeffs: Vec<C64> = binoms
                .magnitudes(th)
                .into_iter()
                .zip(state)
                .map(|(r, &psi)| psi * r)
                .collect();
            zs.iter()
                .map(|&z| {
                    let acc = coeffs.iter().fold(C64::default(), |acc, &c| acc * z + c);
                    prefactor * acc.norm_sqr()
                })
                .collect()
        })
        .collect();
    Ok(QFunctionGrid { theta, phi, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn critical(n: usize) -> LmgParams {
        LmgParams::new(n, 0.675, 0.7, 0.0)
    }

    #[test]
    fn theta_rule_exact_on_polynomials() {
        let w = theta_weights(Q_THETA_POINTS);
        let n = (Q_THETA_POINTS - 1) as f64;
        for p in [0, 1, 2, 7, 40, 180] {
            let got: f64 = w
                .iter()
                .enumerate()
                .map(|(k, wk)| wk * (PI * k as f64 / n).cos().powi(p))
                .sum();
            let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
            assert!((got - exact).abs() < 1e-13, "degree {p}: {got} vs {exact}");
        }
    }

    fn pulse_drive(bx: f64) -> DriveSchedule {
        let times: Vec<f64> = (0..=250).map(|k| -5.0 + 0.1 * k as f64).collect();
        let pe = times
            .iter()
            .map(|&t| 0.5 * (1.0 + (t / 1.5f64).tanh()))
            .collect();
        DriveSchedule::new(times, pe, bx).unwrap()
    }

    #[test]
    fn interpolation() {
        let d = DriveSchedule::new(vec![0.0, 1.0, 3.0], vec![0.0, 1.0, 0.0], 0.01).unwrap();
        assert_eq!(d.pe_at(-1.0), 0.0);
        assert_eq!(d.pe_at(0.5), 0.5);
        assert_eq!(d.pe_at(2.0), 0.5);
        assert_eq!(d.pe_at(1.0), 1.0);
        assert_eq!(d.pe_at(9.0), 0.0);
        assert!(DriveSchedule::new(vec![0.0, 0.0], vec![0.0, 0.0], 0.0).is_err());
        assert!(DriveSchedule::new(vec![0.0, 1.0], vec![0.0, 1.5], 0.0).is_err());
    }

    #[test]
    fn undriven_ground_state_is_stationary() {
        let drive = DriveSchedule::constant(0.0, 0.01).unwrap();
        let traj = evolve(&critical(60), &drive, -1.0, 1.0, 1e-3, 100).unwrap();
        let s0 = traj.sx2[0];
        assert!(traj.sx2.iter().all(|v| (v - s0).abs() < 1e-8));
        let g = quantum_gain(&traj, -1.0, 0.0).unwrap();
        assert_eq!(g.gain[0], 1.0);
    }

    #[test]
    fn frozen_drive_conserves_energy() {
        let p = critical(50);
        let drive = DriveSchedule::constant(0.6, 0.05).unwrap();
        let traj = evolve(&p, &drive, 0.0, 3.0, 1e-3, 500).unwrap();
        let c = 2.0 * 0.05 * 0.6;
        let e0 = energy(&p, c, &traj.states[0]).unwrap();
        for s in &traj.states {
            let e = energy(&p, c, s).unwrap();
            assert!(((e - e0) / e0).abs() < 1e-8, "{e} vs {e0}");
        }
        // the quench actually moves the state
        assert!((traj.sx2.last().unwrap() - traj.sx2[0]).abs() > 1e-3);
    }

    #[test]
    fn step_halving() {
        let p = critical(40);
        let drive = pulse_drive(0.05);
        let a = evolve(&p, &drive, -5.0, 3.0, 1e-3, 1000).unwrap();
        let b = evolve(&p, &drive, -5.0, 3.0, 5e-4, 2000).unwrap();
        let (x, y) = (a.sx2.last().unwrap(), b.sx2.last().unwrap());
        assert!(((x - y) / y).abs() < 1e-6);
        for s in &a.states {
            assert!((dicke::norm_sqr(s) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn evolve_preconditions() {
        let d = DriveSchedule::constant(0.0, 0.01).unwrap();
        assert!(evolve(&critical(10), &d, 0.0, 1.0, 2e-3, 1).is_err());
        assert!(evolve(&critical(10).with_bx(0.1), &d, 0.0, 1.0, 1e-3, 1).is_err());
        assert!(evolve(&critical(10), &d, 0.5, 1.0, 1e-3, 1).is_err());
    }

    #[test]
    fn gain_errors() {
        let traj = AmplifierTrajectory {
            n_qubits: 1,
            times: vec![0.0, 1.0],
            pe: vec![0.0, 0.0],
            states: vec![],
            sx2: vec![0.0, 1.0],
            sy2: vec![0.0, 0.0],
        };
        assert!(matches!(quantum_gain(&traj, 0.0, 0.0), Err(Error::DegenerateDenominator(_))));
        assert!(quantum_gain(&traj, 0.5, 0.0).is_err());
    }

    #[test]
    fn q_function_of_pole_state() {
        let space = DickeSpace::new(30).unwrap();
        let mut psi = vec![C64::default(); 31];
        psi[0] = C64::new(1.0, 0.0);
        let q = q_function(&psi, space).unwrap();
        assert_eq!(q.theta.len(), 181);
        assert_eq!(q.phi.len(), 361);
        assert!(q.values[0].iter().all(|&v| v == 0.0));
        let (th, _, _) = q.argmax();
        assert_eq!(th, PI);
        assert!((q.normalization() - 1.0).abs() < 1e-3);
        assert!(q.values.iter().flatten().all(|&v| v >= 0.0));
    }

    #[test]
    fn q_function_peaks_on_coherent_direction() {
        for n in [20, 400] {
            let space = DickeSpace::new(n).unwrap();
            let cs = dicke::coherent_amplitudes(space, PI / 2.0, PI / 2.0).unwrap();
            let q = q_function(&cs.amplitudes, space).unwrap();
            let (th, ph, _) = q.argmax();
            assert!((th - PI / 2.0).abs() < 1e-9);
            assert!((ph - PI / 2.0).abs() < 2.0 * PI / 361.0);
            assert!((q.normalization() - 1.0).abs() < 1e-3);
            assert!(q.azimuthal_mass_near(&[PI / 2.0, 3.0 * PI / 2.0], PI / 4.0) > 0.8);
        }
    }

    #[test]
    fn q_function_rejects_bad_states() {
        let space = DickeSpace::new(4).unwrap();
        assert!(q_function(&[C64::new(1.0, 0.0)], space).is_err());
        assert!(q_function(&[C64::new(1.0, 0.0); 5], space).is_err());
    }
}
