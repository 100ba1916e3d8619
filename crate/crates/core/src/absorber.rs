//! Single-photon absorption in a four-level Λ system {g, f, h, e}.
//!
//! A Gaussian one-photon pulse drives g → f, Δ″ mixes f ↔ h, and the decays
//! f → g and h → e close the Λ; population in the metastable |e⟩ is the
//! detection event. The Fock-state master equation for a one-photon input is a
//! hierarchy of four generalized density blocks ρ_mn, m, n ∈ {0, 1}; the
//! physical state is ρ_11.
//!
//! Everything is in the rotating frame of the resonant carrier, so carrier and
//! level frequencies never appear.

use nalgebra::{Matrix4, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

pub const G: usize = 0;
pub const F: usize = 1;
pub const H: usize = 2;
pub const E: usize = 3;

type Block = Matrix4<C64>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbsorberParams {
    pub delta_pp: f64,
    pub gamma_fg: f64,
    pub gamma_he: f64,
    pub tau_f: f64,
    pub t_arrival: f64,
    pub eta_scatter: f64,
    pub phase: f64,
}

impl AbsorberParams {
    /// Equal decay rates Γ, η = 1, φ = 0.
    pub fn new(delta_pp: f64, gamma: f64, tau_f: f64, t_arrival: f64) -> Self {
        Self {
            delta_pp,
            gamma_fg: gamma,
            gamma_he: gamma,
            tau_f,
            t_arrival,
            eta_scatter: 1.0,
            phase: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gamma_fg", self.gamma_fg),
            ("gamma_he", self.gamma_he),
            ("tau_f", self.tau_f),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Precondition(format!("{name} = {v} must be positive")));
            }
        }
        if !(self.eta_scatter > 0.0 && self.eta_scatter <= 1.0) {
            return Err(Error::Precondition(format!(
                "eta_scatter = {} outside (0, 1]",
                self.eta_scatter
            )));
        }
        if !(self.delta_pp.is_finite() && self.t_arrival.is_finite() && self.phase.is_finite()) {
            return Err(Error::Precondition("non-finite absorber parameter".into()));
        }
        Ok(())
    }

    pub fn envelope(&self) -> PulseEnvelope {
        PulseEnvelope {
            tau_f: self.tau_f,
            t_arrival: self.t_arrival,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseEnvelope {
    pub tau_f: f64,
    pub t_arrival: f64,
}

impl PulseEnvelope {
    /// ξ(t) = (2π τ²)^{−1/4} exp(−(t − t₀)² / 4τ²).
    pub fn eval(&self, t: f64) -> f64 {
        let tau = self.tau_f;
        let x = t - self.t_arrival;
        (2.0 * std::f64::consts::PI * tau * tau).powf(-0.25) * (-x * x / (4.0 * tau * tau)).exp()
    }

    /// Trapezoid ∫|ξ|² dt on the grid t_start + k·dt.
    pub fn norm_on_grid(&self, t_start: f64, t_end: f64, dt: f64) -> f64 {
        let steps = step_count(t_start, t_end, dt);
        let mut sum = 0.0;
        for k in 0..=steps {
            let w = if k == 0 || k == steps { 0.5 } else { 1.0 };
            sum += w * self.eval(t_start + k as f64 * dt).powi(2);
        }
        sum * dt
    }
}

fn step_count(t_start: f64, t_end: f64, dt: f64) -> usize {
    ((t_end - t_start) / dt).round() as usize
}

/// Time grid for a fixed-step run; states are recorded every `sample_every`
/// steps plus the initial point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrationGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub dt: f64,
    pub sample_every: usize,
}

impl IntegrationGrid {
    pub fn new(t_start: f64, t_end: f64, dt: f64) -> Self {
        Self {
            t_start,
            t_end,
            dt,
            sample_every: 1,
        }
    }

    pub fn steps(&self) -> usize {
        step_count(self.t_start, self.t_end, self.dt)
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.t_end > self.t_start && self.sample_every >= 1) {
            return Err(Error::Precondition(format!("invalid time grid {self:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FockHierarchyState {
    pub rho_00: Block,
    pub rho_01: Block,
    pub rho_10: Block,
    pub rho_11: Block,
}

impl FockHierarchyState {
    /// ρ_mn = δ_mn |g⟩⟨g|.
    pub fn ground() -> Self {
        let mut gg = Block::zeros();
        gg[(G, G)] = C64::new(1.0, 0.0);
        Self {
            rho_00: gg,
            rho_01: Block::zeros(),
            rho_10: Block::zeros(),
            rho_11: gg,
        }
    }

    pub fn population(&self, level: usize) -> f64 {
        self.rho_11[(level, level)].re
    }

    fn axpy(&self, a: f64, k: &Self) -> Self {
        Self {
            rho_00: self.rho_00 + k.rho_00 * C64::new(a, 0.0),
            rho_01: self.rho_01 + k.rho_01 * C64::new(a, 0.0),
            rho_10: self.rho_10 + k.rho_10 * C64::new(a, 0.0),
            rho_11: self.rho_11 + k.rho_11 * C64::new(a, 0.0),
        }
    }

    /// Hermiticity of the diagonal blocks, ρ_10 = ρ_01†, unit trace and
    /// positivity of ρ_11.
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        let herm = |b: &Block| (b - b.adjoint()).map(|c| c.norm()).max();
        let h00 = herm(&self.rho_00);
        let h11 = herm(&self.rho_11);
        let cross = (self.rho_10 - self.rho_01.adjoint()).map(|c| c.norm()).max();
        if h00 > tol || h11 > tol || cross > tol {
            return Err(Error::Numeric {
                dim: 4,
                detail: format!("hierarchy lost Hermiticity: {h00:e}, {h11:e}, {cross:e}"),
            });
        }
        let tr = self.rho_11.trace().re;
        if (tr - 1.0).abs() > 1e-6 {
            return Err(Error::Numeric {
                dim: 4,
                detail: format!("trace(rho_11) = {tr}"),
            });
        }
        let sym = (self.rho_11 + self.rho_11.adjoint()) * C64::new(0.5, 0.0);
        let min = SymmetricEigen::new(sym).eigenvalues.min();
        if min < -1e-8 {
            return Err(Error::Numeric {
                dim: 4,
                detail: format!("rho_11 not positive: smallest eigenvalue {min:e}"),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransductionTrace {
    pub times: Vec<f64>,
    pub pe: Vec<f64>,
    pub pe_steady: f64,
}

struct Generator {
    h: Block,
    jumps: [Block; 2],
    l1: Block,
    l1_dag: Block,
    sqrt_eta: f64,
    phase: C64,
}

fn proj(i: usize, j: usize) -> Block {
    let mut m = Block::zeros();
    m[(i, j)] = C64::new(1.0, 0.0);
    m
}

impl Generator {
    fn new(p: &AbsorberParams) -> Self {
        let h = (proj(F, H) + proj(H, F)) * C64::new(p.delta_pp, 0.0);
        let l1 = proj(G, F) * C64::new(p.gamma_fg.sqrt(), 0.0);
        let l2 = proj(E, H) * C64::new(p.gamma_he.sqrt(), 0.0);
        Self {
            h,
            jumps: [l1, l2],
            l1,
            l1_dag: l1.adjoint(),
            sqrt_eta: p.eta_scatter.sqrt(),
            phase: C64::from_polar(1.0, p.phase),
        }
    }

    /// −i[H, ρ] + Σ_k D[L_k]ρ.
    fn free(&self, r: &Block) -> Block {
        let i = C64::new(0.0, 1.0);
        let mut out = (self.h * r - r * self.h) * (-i);
        for l in &self.jumps {
            let ld = l.adjoint();
            let ldl = ld * l;
            out += l * r * ld - (ldl * r + r * ldl) * C64::new(0.5, 0.0);
        }
        out
    }

    fn deriv(&self, xi: f64, s: &FockHierarchyState) -> FockHierarchyState {
        let a = self.phase * (self.sqrt_eta * xi);
        let a_conj = a.conj();
        // [ρ, L₁†] raises the ket photon index, [L₁, ρ] the bra index.
        let up_ket = |r: &Block| (r * self.l1_dag - self.l1_dag * r) * a;
        let up_bra = |r: &Block| (self.l1 * r - r * self.l1) * a_conj;
        FockHierarchyState {
            rho_00: self.free(&s.rho_00),
            rho_01: self.free(&s.rho_01) + up_bra(&s.rho_00),
            rho_10: self.free(&s.rho_10) + up_ket(&s.rho_00),
            rho_11: self.free(&s.rho_11) + up_ket(&s.rho_01) + up_bra(&s.rho_10),
        }
    }
}

fn check_pulse_window(params: &AbsorberParams, grid: &IntegrationGrid) -> Result<()> {
    if !(grid.t_start < params.t_arrival - 4.0 * params.tau_f) {
        return Err(Error::Precondition(format!(
            "t_start = {} must precede t_arrival - 4 tau_f = {}",
            grid.t_start,
            params.t_arrival - 4.0 * params.tau_f
        )));
    }
    if grid.dt > params.tau_f / 100.0 {
        return Err(Error::Precondition(format!(
            "dt = {} exceeds tau_f/100 = {}",
            grid.dt,
            params.tau_f / 100.0
        )));
    }
    Ok(())
}

/// P_e(t) sampled at every step.
pub fn integrate_hierarchy(params: &AbsorberParams, t_start: f64, t_end: f64, dt: f64) -> Result<TransductionTrace> {
    integrate_hierarchy_sampled(params, &IntegrationGrid::new(t_start, t_end, dt), |_, _| Ok(()))
}

/// As [`integrate_hierarchy`] on a sampled grid; `observe` sees the full
/// hierarchy at every sample.
pub fn integrate_hierarchy_sampled(
    params: &AbsorberParams,
    grid: &IntegrationGrid,
    observe: impl FnMut(f64, &FockHierarchyState) -> Result<()>,
) -> Result<TransductionTrace> {
    params.validate()?;
    grid.validate()?;
    check_pulse_window(params, grid)?;
    let env = params.envelope();
    integrate_with_envelope(params, grid, |t| env.eval(t), observe)
}

/// Fixed-step RK4 on the hierarchy with an arbitrary real envelope. Only the
/// parameter and grid sanity checks apply, not the pulse-window ones.
pub fn integrate_with_envelope(
    params: &AbsorberParams,
    grid: &IntegrationGrid,
    envelope: impl Fn(f64) -> f64,
    mut observe: impl FnMut(f64, &FockHierarchyState) -> Result<()>,
) -> Result<TransductionTrace> {
    params.validate()?;
    grid.validate()?;
    let gen = Generator::new(params);
    let dt = grid.dt;
    let steps = grid.steps();
    let mut state = FockHierarchyState::ground();
    let mut times = vec![grid.t_start];
    let mut pe = vec![state.population(E)];
    observe(grid.t_start, &state)?;

    for k in 0..steps {
        let t = grid.t_start + k as f64 * dt;
        let (x0, xh, x1) = (envelope(t), envelope(t + 0.5 * dt), envelope(t + dt));
        let k1 = gen.deriv(x0, &state);
        let k2 = gen.deriv(xh, &state.axpy(0.5 * dt, &k1));
        let k3 = gen.deriv(xh, &state.axpy(0.5 * dt, &k2));
        let k4 = gen.deriv(x1, &state.axpy(dt, &k3));
        state = state
            .axpy(dt / 6.0, &k1)
            .axpy(dt / 3.0, &k2)
            .axpy(dt / 3.0, &k3)
            .axpy(dt / 6.0, &k4);

        let last = k + 1 == steps;
        if (k + 1) % grid.sample_every == 0 || last {
            let tn = grid.t_start + (k + 1) as f64 * dt;
            let drift = (state.rho_11.trace().re - 1.0)
                .abs()
                .max((state.rho_00.trace().re - 1.0).abs());
            if drift > 1e-5 || !drift.is_finite() {
                return Err(Error::Integration {
                    dt,
                    detail: format!("trace drift {drift:e} at t = {tn}"),
                });
            }
            times.push(tn);
            pe.push(state.population(E));
            observe(tn, &state)?;
        }
    }
    let pe_steady = pe.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(TransductionTrace { times, pe, pe_steady })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransductionMap {
    pub delta_pp: Vec<f64>,
    pub gamma: Vec<f64>,
    /// `pe_steady[i][j]` at (delta_pp[i], gamma[j]).
    pub pe_steady: Vec<Vec<f64>>,
}

impl TransductionMap {
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.delta_pp.iter().enumerate().flat_map(move |(i, &d)| {
            self.gamma
                .iter()
                .enumerate()
                .map(move |(j, &g)| (d, g, self.pe_steady[i][j]))
        })
    }
}

/// pe_steady over a (Δ″, Γ) grid with γ_fg = γ_he = Γ, η = 1, φ = 0.
pub fn optimize_transduction(
    delta_values: &[f64],
    gamma_values: &[f64],
    pulse: PulseEnvelope,
    grid: &IntegrationGrid,
) -> Result<TransductionMap> {
    if delta_values.is_empty() || gamma_values.is_empty() {
        return Err(Error::InvalidArgument("empty transduction grid".into()));
    }
    let cells: Vec<(usize, usize)> = (0..delta_values.len())
        .flat_map(|i| (0..gamma_values.len()).map(move |j| (i, j)))
        .collect();
    let values: Vec<f64> = cells
        .par_iter()
        .map(|&(i, j)| {
            let (d, g) = (delta_values[i], gamma_values[j]);
            let p = AbsorberParams::new(d, g, pulse.tau_f, pulse.t_arrival);
            let run = || -> Result<f64> {
                params_check(&p, grid)?;
                Ok(integrate_with_envelope(&p, grid, |t| pulse.eval(t), |_, _| Ok(()))?.pe_steady)
            };
            run().map_err(|e| e.context(format!("transduction cell delta_pp = {d}, gamma = {g}")))
        })
        .collect::<Result<_>>()?;
    let pe_steady = values.chunks(gamma_values.len()).map(<[f64]>::to_vec).collect();
    Ok(TransductionMap {
        delta_pp: delta_values.to_vec(),
        gamma: gamma_values.to_vec(),
        pe_steady,
    })
}

fn params_check(p: &AbsorberParams, grid: &IntegrationGrid) -> Result<()> {
    p.validate()?;
    grid.validate()?;
    check_pulse_window(p, grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(dt: f64) -> IntegrationGrid {
        IntegrationGrid::new(-5.0, 15.0, dt)
    }

    #[test]
    fn severed_arm_never_reaches_e() {
        let p = AbsorberParams::new(0.0, 10.0, 1.0, 0.0);
        let tr = integrate_hierarchy(&p, -5.0, 10.0, 1e-2).unwrap();
        assert!(tr.pe.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn envelope_is_normalised() {
        let env = PulseEnvelope {
            tau_f: 1.0,
            t_arrival: 0.0,
        };
        assert!((env.norm_on_grid(-8.0, 8.0, 1e-3) - 1.0).abs() < 1e-6);
        assert!((env.norm_on_grid(-5.0, 20.0, 1e-3) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn invariants_hold_at_every_sample() {
        let p = AbsorberParams::new(5.0, 10.0, 1.0, 0.0);
        let mut g = grid(1e-3);
        g.sample_every = 50;
        let tr = integrate_hierarchy_sampled(&p, &g, |_, s| s.check_invariants(1e-10)).unwrap();
        assert!(tr.pe.iter().all(|&x| (-1e-8..=1.0 + 1e-8).contains(&x)));
        // rises after arrival, saturates without decreasing
        let after: Vec<f64> = tr.times.iter().zip(&tr.pe).filter(|(t, _)| **t > 4.0).map(|(_, p)| *p).collect();
        assert!(after.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        assert!(tr.pe_steady > 0.9);
    }

    #[test]
    fn step_halving_converges() {
        let p = AbsorberParams::new(5.0, 10.0, 1.0, 0.0);
        let a = integrate_hierarchy(&p, -5.0, 15.0, 2e-3).unwrap();
        let b = integrate_hierarchy(&p, -5.0, 15.0, 1e-3).unwrap();
        assert!((a.pe.last().unwrap() - b.pe.last().unwrap()).abs() < 1e-6);
    }

    #[test]
    fn no_pulse_reproduces_vacuum_block() {
        let p = AbsorberParams::new(5.0, 10.0, 1.0, 0.0);
        let tr = integrate_with_envelope(&p, &grid(1e-2), |_| 0.0, |_, s| {
            assert_eq!(s.rho_00, s.rho_11);
            Ok(())
        })
        .unwrap();
        assert!(tr.pe.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn phase_does_not_change_population() {
        let mut p = AbsorberParams::new(5.0, 10.0, 1.0, 0.0);
        let a = integrate_hierarchy(&p, -5.0, 8.0, 1e-2).unwrap();
        p.phase = 1.1;
        let b = integrate_hierarchy(&p, -5.0, 8.0, 1e-2).unwrap();
        for (x, y) in a.pe.iter().zip(&b.pe) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn preconditions() {
        let p = AbsorberParams::new(5.0, 10.0, 1.0, 0.0);
        assert!(matches!(integrate_hierarchy(&p, -3.0, 5.0, 1e-3), Err(Error::Precondition(_))));
        assert!(matches!(integrate_hierarchy(&p, -5.0, 5.0, 2e-2), Err(Error::Precondition(_))));
        let mut q = p;
        q.eta_scatter = 0.0;
        assert!(q.validate().is_err());
        q = p;
        q.gamma_fg = 0.0;
        assert!(q.validate().is_err());
    }

    #[test]
    fn map_has_zero_row_and_is_deterministic() {
        let pulse = PulseEnvelope {
            tau_f: 1.0,
            t_arrival: 0.0,
        };
        let g = IntegrationGrid::new(-5.0, 10.0, 1e-2);
        let a = optimize_transduction(&[0.0, 2.0], &[1.0, 4.0], pulse, &g).unwrap();
        let b = optimize_transduction(&[0.0, 2.0], &[1.0, 4.0], pulse, &g).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.pe_steady[0], vec![0.0, 0.0]);
        assert_eq!(a.cells().count(), 4);
    }
}
