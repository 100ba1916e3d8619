//! Field and size sweeps around the J_x = J_y transition line, finite
//! difference susceptibilities and log-log exponent fits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lmg::{statics, LmgParams, StaticObservables};

pub const DEFAULT_REL_STEP: f64 = 1e-2;
/// Field used for the one-sided χ in size sweeps.
pub const SIZE_SWEEP_FIELD: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub bx: f64,
    pub zeta_x: f64,
    pub zeta_y: f64,
    pub sqrt_zeta_x: f64,
    /// d√ζ_x/dB_x, central difference.
    pub chi: f64,
    pub gap: f64,
    pub c_xy: f64,
    pub c_xxyy: f64,
    pub eta: f64,
    /// ⟨S_x⟩/N at `bx`.
    pub magnetization_x: f64,
    /// −d(⟨S_x⟩/N)/dB_x, central difference with the same step as `chi`.
    pub chi_m: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub log_amplitude: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub n_points: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizePoint {
    pub n: usize,
    pub chi: f64,
    pub gap: f64,
    pub c_xxyy: f64,
}

fn check_field(bx: f64) -> Result<()> {
    if !(bx > 0.0 && bx.is_finite()) {
        return Err(Error::Precondition(format!("field must be positive, got {bx}")));
    }
    Ok(())
}

fn check_rel_step(h: f64) -> Result<()> {
    if !(h > 0.0 && h <= 0.1) {
        return Err(Error::Precondition(format!("rel_step {h} outside (0, 0.1]")));
    }
    Ok(())
}

fn at(params: &LmgParams, bx: f64) -> Result<StaticObservables> {
    statics(&params.with_bx(bx))
}

/// [√ζ_x(b(1+h)) − √ζ_x(b(1−h))] / (2bh). `params.bx` is ignored.
pub fn susceptibility_at(params: &LmgParams, bx: f64, rel_step: f64) -> Result<f64> {
    check_field(bx)?;
    check_rel_step(rel_step)?;
    let hi = at(params, bx * (1.0 + rel_step))?;
    let lo = at(params, bx * (1.0 - rel_step))?;
    Ok((hi.order.zeta_x.sqrt() - lo.order.zeta_x.sqrt()) / (2.0 * bx * rel_step))
}

/// [√ζ_x(b) − √ζ_x(0)] / b.
pub fn susceptibility_one_sided(params: &LmgParams, bx: f64) -> Result<f64> {
    check_field(bx)?;
    let on = at(params, bx)?;
    let off = at(params, 0.0)?;
    Ok((on.order.zeta_x.sqrt() - off.order.zeta_x.sqrt()) / bx)
}

/// −d(⟨S_x⟩/N)/dB_x by central difference; positive because the field
/// enters as +2B_x S_x.
pub fn magnetization_susceptibility_at(params: &LmgParams, bx: f64, rel_step: f64) -> Result<f64> {
    check_field(bx)?;
    check_rel_step(rel_step)?;
    let hi = at(params, bx * (1.0 + rel_step))?;
    let lo = at(params, bx * (1.0 - rel_step))?;
    Ok(-(hi.magnetization_x - lo.magnetization_x) / (2.0 * bx * rel_step))
}

fn sweep_point(params: &LmgParams, bx: f64, rel_step: f64) -> Result<SweepPoint> {
    let mid = at(params, bx)?;
    let hi = at(params, bx * (1.0 + rel_step))?;
    let lo = at(params, bx * (1.0 - rel_step))?;
    let denom = 2.0 * bx * rel_step;
    Ok(SweepPoint {
        bx,
        zeta_x: mid.order.zeta_x,
        zeta_y: mid.order.zeta_y,
        sqrt_zeta_x: mid.order.zeta_x.sqrt(),
        chi: (hi.order.zeta_x.sqrt() - lo.order.zeta_x.sqrt()) / denom,
        gap: mid.gap,
        c_xy: mid.correlations.c_xy,
        c_xxyy: mid.correlations.c_xxyy,
        eta: mid.correlations.eta,
        magnetization_x: mid.magnetization_x,
        chi_m: -(hi.magnetization_x - lo.magnetization_x) / denom,
    })
}

/// One point per field, computed independently and returned in input order.
pub fn field_sweep(params: &LmgParams, bx_values: &[f64], rel_step: f64) -> Result<Vec<SweepPoint>> {
    params.validate()?;
    check_rel_step(rel_step)?;
    if bx_values.is_empty() {
        return Err(Error::InvalidArgument("empty field sweep".into()));
    }
    for &b in bx_values {
        check_field(b)?;
    }
    if bx_values.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Precondition("field values must be ascending".into()));
    }
    bx_values
        .par_iter()
        .map(|&b| sweep_point(params, b, rel_step).map_err(|e| e.context(format!("field sweep at bx = {b:e}"))))
        .collect()
}

/// Per-N statics on the line J_x = J_y = j: one-sided χ and C_xxyy at `bx`,
/// gap at zero field.
pub fn size_sweep(j: f64, bx: f64, n_values: &[usize]) -> Result<Vec<SizePoint>> {
    check_field(bx)?;
    if let Some(&n) = n_values.iter().find(|&&n| n < 2) {
        return Err(Error::Precondition(format!("size sweep needs N >= 2, got {n}")));
    }
    n_values
        .par_iter()
        .map(|&n| {
            let base = LmgParams::new(n, j, j, 0.0);
            let point = || -> Result<SizePoint> {
                let off = at(&base, 0.0)?;
                let on = at(&base, bx)?;
                Ok(SizePoint {
                    n,
                    chi: (on.order.zeta_x.sqrt() - off.order.zeta_x.sqrt()) / bx,
                    gap: off.gap,
                    c_xxyy: on.correlations.c_xxyy,
                })
            };
            point().map_err(|e| e.context(format!("size sweep at N = {n}")))
        })
        .collect()
}

/// `points` values from `lo` to `hi` inclusive, evenly spaced in log10.
pub fn logspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..points)
                .map(|k| {
                    if k == points - 1 {
                        hi
                    } else {
                        10f64.powf(a + (b - a) * k as f64 / (points - 1) as f64)
                    }
                })
                .collect()
        }
    }
}

pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![lo],
        _ => (0..points)
            .map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64)
            .collect(),
    }
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    (slope, intercept, r2.clamp(0.0, 1.0))
}

/// Least squares on (ln x, ln y) over points with x inside `window`.
pub fn fit_power_law(points: &[(f64, f64)], window: (f64, f64)) -> Result<ScalingFit> {
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(Error::InvalidArgument(format!("fit window [{lo}, {hi}] is empty")));
    }
    let selected: Vec<(usize, f64, f64)> = points
        .iter()
        .enumerate()
        .filter(|(_, &(x, _))| x >= lo && x <= hi)
        .map(|(i, &(x, y))| (i, x, y))
        .collect();
    let offenders: Vec<usize> = selected
        .iter()
        .filter(|&&(_, x, y)| !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()))
        .map(|&(i, _, _)| i)
        .collect();
    if !offenders.is_empty() {
        return Err(Error::Domain { offenders });
    }
    if selected.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            found: selected.len(),
        });
    }
    let lx: Vec<f64> = selected.iter().map(|p| p.1.ln()).collect();
    let ly: Vec<f64> = selected.iter().map(|p| p.2.ln()).collect();
    let (slope, intercept, r_squared) = least_squares(&lx, &ly);
    Ok(ScalingFit {
        exponent: slope,
        log_amplitude: intercept,
        r_squared,
        window,
        n_points: selected.len(),
    })
}

/// Ordinary least squares with intercept.
pub fn fit_linear(points: &[(f64, f64)]) -> Result<LinearFit> {
    if points.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            found: points.len(),
        });
    }
    let offenders: Vec<usize> = points
        .iter()
        .enumerate()
        .filter(|(_, (x, y))| !(x.is_finite() && y.is_finite()))
        .map(|(i, _)| i)
        .collect();
    if !offenders.is_empty() {
        return Err(Error::Domain { offenders });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let (slope, intercept, r_squared) = least_squares(&xs, &ys);
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
        n_points: points.len(),
    })
}
