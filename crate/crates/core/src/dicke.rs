//! Collective-spin algebra in the maximal-spin (Dicke) sector.
//!
//! Basis states |S,m⟩ with S = N/2 are indexed by `i = S + m`, so index 0 is
//! m = −S and the ordering is ascending in m. Spin quantum numbers are carried
//! as integers `2S`, `2m`; nothing here stores a floating-point spin.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::C64;

/// Symmetric sector of `n_qubits` spin-½ particles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DickeSpace {
    n_qubits: usize,
}

impl DickeSpace {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidArgument(
                "Dicke space needs at least one qubit".into(),
            ));
        }
        Ok(Self { n_qubits })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// 2S, exact.
    pub fn two_s(&self) -> usize {
        self.n_qubits
    }

    pub fn total_spin(&self) -> f64 {
        self.n_qubits as f64 / 2.0
    }

    pub fn dimension(&self) -> usize {
        self.n_qubits + 1
    }

    /// 2m for basis index `i`.
    pub fn two_m(&self, i: usize) -> i64 {
        2 * i as i64 - self.n_qubits as i64
    }

    pub fn m(&self, i: usize) -> f64 {
        self.two_m(i) as f64 / 2.0
    }

    /// ⟨S,m_i| S₋ |S,m_{i+1}⟩ = √((S−m_i)(S+m_i+1)) = √((N−i)(i+1)).
    fn ladder(&self, i: usize) -> f64 {
        (((self.n_qubits - i) * (i + 1)) as f64).sqrt()
    }

    /// S(S+1) − m², exact in quarter units.
    fn casimir_minus_m2(&self, i: usize) -> f64 {
        let n = self.n_qubits as i64;
        let tm = self.two_m(i);
        (n * (n + 2) - tm * tm) as f64 / 4.0
    }
}

/// Which collective operator to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CollectiveOp {
    Sz,
    Sx,
    Sy,
    Sx2,
    Sy2,
}

impl FromStr for CollectiveOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Sz" | "sz" => Ok(Self::Sz),
            "Sx" | "sx" => Ok(Self::Sx),
            "Sy" | "sy" => Ok(Self::Sy),
            "Sx2" | "sx2" => Ok(Self::Sx2),
            "Sy2" | "sy2" => Ok(Self::Sy2),
            other => Err(Error::InvalidArgument(format!(
                "unknown collective operator `{other}`"
            ))),
        }
    }
}

impl fmt::Display for CollectiveOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Sz => "Sz",
            Self::Sx => "Sx",
            Self::Sy => "Sy",
            Self::Sx2 => "Sx2",
            Self::Sy2 => "Sy2",
        };
        f.write_str(s)
    }
}

/// Hermitian operator stored by its upper diagonals.
///
/// `real[k][i]` and `imag[k][i]` hold the real and imaginary parts of the
/// element (i, i+k); the lower triangle follows by conjugate symmetry. The
/// imaginary part of the main diagonal is always zero.
#[derive(Clone, Debug, PartialEq)]
pub struct BandedHermitianOperator {
    dim: usize,
    real: Vec<Vec<f64>>,
    imag: Option<Vec<Vec<f64>>>,
}

impl BandedHermitianOperator {
    /// Real symmetric operator from its upper bands (`bands[0]` is the diagonal).
    pub fn from_real_bands(dim: usize, bands: Vec<Vec<f64>>) -> Result<Self> {
        check_bands(dim, &bands)?;
        Ok(Self {
            dim,
            real: bands,
            imag: None,
        })
    }

    /// Hermitian operator with an imaginary band extension.
    pub fn from_bands(dim: usize, real: Vec<Vec<f64>>, imag: Vec<Vec<f64>>) -> Result<Self> {
        check_bands(dim, &real)?;
        check_bands(dim, &imag)?;
        if imag.len() != real.len() {
            return Err(Error::InvalidArgument(
                "real and imaginary band counts differ".into(),
            ));
        }
        if imag[0].iter().any(|&v| v != 0.0) {
            return Err(Error::InvalidArgument(
                "Hermitian operator needs a real diagonal".into(),
            ));
        }
        Ok(Self {
            dim,
            real,
            imag: Some(imag),
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            real: vec![vec![1.0; dim]],
            imag: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandwidth(&self) -> usize {
        self.real.len() - 1
    }

    pub fn is_real(&self) -> bool {
        self.imag.is_none()
    }

    pub fn real_bands(&self) -> &[Vec<f64>] {
        &self.real
    }

    pub fn imag_bands(&self) -> Option<&[Vec<f64>]> {
        self.imag.as_deref()
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        let (lo, hi, conj) = if i <= j { (i, j, false) } else { (j, i, true) };
        let k = hi - lo;
        if k > self.bandwidth() {
            return C64::new(0.0, 0.0);
        }
        let re = self.real[k][lo];
        let im = self.imag.as_ref().map_or(0.0, |b| b[k][lo]);
        if conj {
            C64::new(re, -im)
        } else {
            C64::new(re, im)
        }
    }

    /// `out = A x`.
    pub fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        for (o, (&d, &xi)) in out.iter_mut().zip(self.real[0].iter().zip(x)) {
            *o = xi * d;
        }
        for k in 1..self.real.len() {
            let re = &self.real[k];
            match &self.imag {
                None => {
                    for i in 0..self.dim - k {
                        let a = re[i];
                        out[i] += x[i + k] * a;
                        out[i + k] += x[i] * a;
                    }
                }
                Some(im) => {
                    let im = &im[k];
                    for i in 0..self.dim - k {
                        let a = C64::new(re[i], im[i]);
                        out[i] += a * x[i + k];
                        out[i + k] += a.conj() * x[i];
                    }
                }
            }
        }
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.dim];
        self.apply_into(x, &mut out);
        out
    }

    /// Real matrix-vector product; only valid for real operators.
    pub fn apply_real_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert!(self.is_real());
        for (o, (&d, &xi)) in out.iter_mut().zip(self.real[0].iter().zip(x)) {
            *o = d * xi;
        }
        for k in 1..self.real.len() {
            let re = &self.real[k];
            for i in 0..self.dim - k {
                out[i] += re[i] * x[i + k];
                out[i + k] += re[i] * x[i];
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.entry(i, j))
    }

    /// Max absolute row sum; an upper bound on the spectral norm.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim)
            .map(|i| {
                let lo = i.saturating_sub(self.bandwidth());
                let hi = (i + self.bandwidth()).min(self.dim - 1);
                (lo..=hi).map(|j| self.entry(i, j).norm()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Σ cᵢ Aᵢ over operators of equal dimension.
    pub fn linear_combination(terms: &[(f64, &BandedHermitianOperator)]) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty linear combination".into()))?;
        let dim = first.1.dim;
        let width = terms.iter().map(|(_, op)| op.real.len()).max().unwrap_or(1);
        let any_imag = terms.iter().any(|(_, op)| op.imag.is_some());
        let mut real: Vec<Vec<f64>> = (0..width).map(|k| vec![0.0; dim - k.min(dim)]).collect();
        let mut imag = any_imag.then(|| real.clone());
        for &(c, op) in terms {
            if op.dim != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: op.dim,
                });
            }
            for (k, band) in op.real.iter().enumerate() {
                for (acc, &v) in real[k].iter_mut().zip(band) {
                    *acc += c * v;
                }
            }
            if let (Some(dst), Some(src)) = (imag.as_mut(), op.imag.as_ref()) {
                for (k, band) in src.iter().enumerate() {
                    for (acc, &v) in dst[k].iter_mut().zip(band) {
                        *acc += c * v;
                    }
                }
            }
        }
        Ok(Self { dim, real, imag })
    }
}

fn check_bands(dim: usize, bands: &[Vec<f64>]) -> Result<()> {
    if dim == 0 || bands.is_empty() {
        return Err(Error::InvalidArgument("empty banded operator".into()));
    }
    for (k, b) in bands.iter().enumerate() {
        let expect = dim.saturating_sub(k);
        if b.len() != expect {
            return Err(Error::DimensionMismatch {
                expected: expect,
                found: b.len(),
            });
        }
    }
    Ok(())
}

/// Build one of the collective operators in closed form.
pub fn build_collective_operator(space: DickeSpace, which: CollectiveOp) -> BandedHermitianOperator {
    let dim = space.dimension();
    let ladder: Vec<f64> = (0..dim - 1).map(|i| space.ladder(i)).collect();
    let zeros = |k: usize| vec![0.0; dim.saturating_sub(k)];
    match which {
        CollectiveOp::Sz => BandedHermitianOperator {
            dim,
            real: vec![(0..dim).map(|i| space.m(i)).collect()],
            imag: None,
        },
        CollectiveOp::Sx => BandedHermitianOperator {
            dim,
            real: vec![zeros(0), ladder.iter().map(|c| c / 2.0).collect()],
            imag: None,
        },
        CollectiveOp::Sy => BandedHermitianOperator {
            dim,
            real: vec![zeros(0), zeros(1)],
            imag: Some(vec![zeros(0), ladder.iter().map(|c| c / 2.0).collect()]),
        },
        CollectiveOp::Sx2 | CollectiveOp::Sy2 => {
            let sign = if which == CollectiveOp::Sx2 { 1.0 } else { -1.0 };
            let diag = (0..dim).map(|i| space.casimir_minus_m2(i) / 2.0).collect();
            let second = (0..dim.saturating_sub(2))
                .map(|i| sign * ladder[i] * ladder[i + 1] / 4.0)
                .collect();
            BandedHermitianOperator {
                dim,
                real: vec![diag, zeros(1), second],
                imag: None,
            }
        }
    }
}

/// The five collective operators of one space, built once.
#[derive(Clone, Debug)]
pub struct CollectiveOps {
    pub sz: BandedHermitianOperator,
    pub sx: BandedHermitianOperator,
    pub sy: BandedHermitianOperator,
    pub sx2: BandedHermitianOperator,
    pub sy2: BandedHermitianOperator,
}

impl CollectiveOps {
    pub fn new(space: DickeSpace) -> Self {
        Self {
            sz: build_collective_operator(space, CollectiveOp::Sz),
            sx: build_collective_operator(space, CollectiveOp::Sx),
            sy: build_collective_operator(space, CollectiveOp::Sy),
            sx2: build_collective_operator(space, CollectiveOp::Sx2),
            sy2: build_collective_operator(space, CollectiveOp::Sy2),
        }
    }
}

pub fn norm_sqr(state: &[C64]) -> f64 {
    state.iter().map(|c| c.norm_sqr()).sum()
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// ⟨state|op|state⟩ for a normalised state.
pub fn expectation(op: &BandedHermitianOperator, state: &[C64]) -> Result<f64> {
    if state.len() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            found: state.len(),
        });
    }
    let norm = norm_sqr(state);
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::Precondition(format!(
            "state not normalised: |ψ|² = {norm}"
        )));
    }
    let value = inner(state, &op.apply(state));
    if value.im.abs() > 1e-10 * value.re.abs().max(1.0) {
        return Err(Error::Numeric {
            dim: op.dim(),
            detail: format!("expectation of Hermitian operator has imaginary part {}", value.im),
        });
    }
    Ok(value.re)
}

/// Spin coherent state |θ,φ⟩ expanded in the Dicke basis.
#[derive(Clone, Debug)]
pub struct SpinCoherentState {
    pub theta: f64,
    pub phi: f64,
    pub amplitudes: Vec<C64>,
}

/// ½ ln C(N, i) for i = 0..=N, built incrementally.
#[derive(Clone, Debug)]
pub struct HalfLogBinomials(Vec<f64>);

impl HalfLogBinomials {
    pub fn new(space: DickeSpace) -> Self {
        let n = space.two_s();
        let mut out = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        out.push(0.0);
        for k in 0..n {
            acc += ((n - k) as f64 / (k + 1) as f64).ln();
            out.push(0.5 * acc);
        }
        Self(out)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// |⟨S,m_i|θ,φ⟩| for all i, assembled from log magnitudes.
    pub fn magnitudes(&self, theta: f64) -> Vec<f64> {
        let n = self.0.len() - 1;
        let (s, c) = (theta / 2.0).sin_cos();
        let (ln_c, ln_s) = (c.abs().ln(), s.abs().ln());
        let mut mags: Vec<f64> = self
            .0
            .iter()
            .enumerate()
            .map(|(i, &half_ln_binom)| {
                // 0·ln 0 contributes nothing: cos⁰ = sin⁰ = 1.
                let up = if i == 0 { 0.0 } else { i as f64 * ln_c };
                let down = if i == n { 0.0 } else { (n - i) as f64 * ln_s };
                (half_ln_binom + up + down).exp()
            })
            .collect();
        // The exact norm is 1; rescaling removes rounding accumulated in the
        // log sums, which reaches ~1e-12 by N ~ 2000.
        let norm = mags.iter().map(|m| m * m).sum::<f64>().sqrt();
        mags.iter_mut().for_each(|m| *m /= norm);
        mags
    }
}

/// ⟨S,m|θ,φ⟩ = √C(2S,S+m) cos^{S+m}(θ/2) sin^{S−m}(θ/2) e^{−i(S−m)φ}.
///
/// With this phase the mean spin is S (sin θ cos φ, −sin θ sin φ, cos θ);
/// planes through the z axis (φ and φ + π) map onto themselves under φ → −φ.
pub fn coherent_amplitudes(space: DickeSpace, theta: f64, phi: f64) -> Result<SpinCoherentState> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::Precondition(format!("theta = {theta} outside [0, π]")));
    }
    let n = space.two_s();
    let mags = HalfLogBinomials::new(space).magnitudes(theta);
    let amplitudes = mags
        .into_iter()
        .enumerate()
        .map(|(i, r)| C64::from_polar(r, -((n - i) as f64) * phi))
        .collect();
    Ok(SpinCoherentState {
        theta,
        phi: phi.rem_euclid(2.0 * PI),
        amplitudes,
    })
}
