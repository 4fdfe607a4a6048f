//! Shear-parametrized Radon transform, the projection-slice check, fractional
//! derivatives of profiles and synthetic line singularities.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::{GridMeta, SampledField2D};

/// Largest |s| accepted by [`radon`].
pub const MAX_SLOPE: f64 = 4.0;

/// Rf(u, s) on a uniform grid of offsets u.
#[derive(Clone, Debug, PartialEq)]
pub struct RadonProfile {
    pub values: Vec<Complex64>,
    pub u_grid: Vec<f64>,
    pub slope: f64,
}

impl RadonProfile {
    pub fn step(&self) -> f64 {
        if self.u_grid.len() > 1 {
            self.u_grid[1] - self.u_grid[0]
        } else {
            1.0
        }
    }

    fn check_uniform(&self) -> Result<()> {
        let n = self.u_grid.len();
        if n < 4 || n % 2 != 0 {
            return Err(Error::invalid("profile needs an even number (at least 4) of offsets"));
        }
        let h = self.step();
        if !(h > 0.0) || self.u_grid.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h) {
            return Err(Error::invalid("profile offsets must be uniform and increasing"));
        }
        Ok(())
    }
}

/// Periodic 4-point Lagrange interpolation along x1 within row `i2`.
fn sample_row(f: &SampledField2D, x: f64, i2: usize) -> Complex64 {
    let m = f.meta;
    let n1 = m.n1 as i64;
    let p = (x - m.origin[0]) / m.spacing;
    let j = p.floor();
    let t = p - j;
    let j = j as i64;
    let w = [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ];
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, wk) in w.iter().enumerate() {
        let i1 = (j - 1 + k as i64).rem_euclid(n1) as usize;
        acc += f.values[i1 * m.n2 + i2] * *wk;
    }
    acc
}

/// Rf(u, s) = ∫ f(u − s x2, x2) dx2 over the periodized field, summed over grid rows in x2.
pub fn radon(f: &SampledField2D, s: f64, u_grid: &[f64]) -> Result<RadonProfile> {
    radon_with_limit(f, s, u_grid, MAX_SLOPE)
}

pub fn radon_with_limit(f: &SampledField2D, s: f64, u_grid: &[f64], max_slope: f64) -> Result<RadonProfile> {
    if !s.is_finite() || s.abs() > max_slope {
        return Err(Error::invalid(format!("slope {s} exceeds the supported range |s| <= {max_slope}")));
    }
    let m = f.meta;
    let values = u_grid
        .par_iter()
        .map(|&u| {
            let mut acc = Complex64::new(0.0, 0.0);
            for i2 in 0..m.n2 {
                acc += sample_row(f, u - s * m.x2(i2), i2);
            }
            acc * m.spacing
        })
        .collect();
    Ok(RadonProfile { values, u_grid: u_grid.to_vec(), slope: s })
}

/// The x1 nodes of a grid, the natural offsets for [`radon`].
pub fn default_u_grid(meta: &GridMeta) -> Vec<f64> {
    (0..meta.n1).map(|i| meta.x1(i)).collect()
}

/// 1-D transform ∫ I(u) e^{−2πiuω} du on the centered frequencies (k − n/2)/(n h).
fn profile_dft(p: &RadonProfile) -> Vec<Complex64> {
    let n = p.values.len();
    let h = p.step();
    let mut d = p.values.clone();
    fft::plan(n, false).process(&mut d);
    fft::shift1(&mut d);
    let u0 = p.u_grid[0];
    d.iter()
        .enumerate()
        .map(|(k, v)| {
            let w = (k as f64 - (n / 2) as f64) / (n as f64 * h);
            v * h * Complex64::from_polar(1.0, -2.0 * PI * u0 * w)
        })
        .collect()
}

fn profile_idft(p: &RadonProfile, spec: Vec<Complex64>) -> Vec<Complex64> {
    let n = spec.len();
    let h = p.step();
    let dw = 1.0 / (n as f64 * h);
    let u0 = p.u_grid[0];
    let mut d: Vec<Complex64> = spec
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let w = (k as f64 - (n / 2) as f64) * dw;
            v * dw * Complex64::from_polar(1.0, 2.0 * PI * u0 * w)
        })
        .collect();
    fft::shift1(&mut d);
    fft::plan(n, true).process(&mut d);
    d
}

/// f̂(ω(1, s)) at ω_k = (k − n1/2)/(n1 h), summed directly over the grid.
pub fn slice_of_spectrum(f: &SampledField2D, s: f64) -> Vec<Complex64> {
    let m = f.meta;
    let h = m.spacing;
    let omegas: Vec<f64> = (0..m.n1).map(|k| m.xi1(k)).collect();
    omegas
        .par_iter()
        .map(|&w| {
            let tw: Vec<Complex64> = (0..m.n1).map(|i1| Complex64::from_polar(1.0, -2.0 * PI * m.x1(i1) * w)).collect();
            let mut acc = Complex64::new(0.0, 0.0);
            for i2 in 0..m.n2 {
                let mut row = Complex64::new(0.0, 0.0);
                for (i1, t) in tw.iter().enumerate() {
                    row += f.values[i1 * m.n2 + i2] * t;
                }
                acc += row * Complex64::from_polar(1.0, -2.0 * PI * m.x2(i2) * s * w);
            }
            acc * h * h
        })
        .collect()
}

/// sup |(Rf)^(ω) − f̂(ω(1, s))| / sup |f̂(ω(1, s))| over |ω| ≤ Nyquist/2 · (1 + s²)^{−1/2}.
pub fn projection_slice_check(f: &SampledField2D, s: f64) -> Result<f64> {
    let m = f.meta;
    let prof = radon(f, s, &default_u_grid(&m))?;
    let lhs = profile_dft(&prof);
    let rhs = slice_of_spectrum(f, s);
    let nyq = 0.5 / m.spacing;
    let band = 0.5 * nyq / (1.0 + s * s).sqrt();
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for k in 0..m.n1 {
        if m.xi1(k).abs() <= band {
            num = num.max((lhs[k] - rhs[k]).norm());
            den = den.max(rhs[k].norm());
        }
    }
    if den == 0.0 {
        return Ok(num);
    }
    Ok(num / den)
}

/// I^{(N)} through the multiplier (2πiω)^N for integer N and |2πω|^N otherwise.
pub fn fractional_derivative(p: &RadonProfile, order: f64) -> Result<RadonProfile> {
    if !(order >= 0.0 && order.is_finite()) {
        return Err(Error::invalid(format!("derivative order {order} must be finite and non-negative")));
    }
    p.check_uniform()?;
    if order == 0.0 {
        return Ok(p.clone());
    }
    let n = p.values.len();
    let dw = 1.0 / (n as f64 * p.step());
    let integer = order.fract() == 0.0;
    let spec: Vec<Complex64> = profile_dft(p)
        .into_iter()
        .enumerate()
        .map(|(k, v)| {
            let w = (k as f64 - (n / 2) as f64) * dw;
            let m = if integer {
                Complex64::new(0.0, 2.0 * PI * w).powu(order as u32)
            } else {
                Complex64::new((2.0 * PI * w).abs().powf(order), 0.0)
            };
            v * m
        })
        .collect();
    Ok(RadonProfile { values: profile_idft(p, spec), u_grid: p.u_grid.clone(), slope: p.slope })
}

/// Smooth cutoff Φ(x) = ϕ(|x − center| / radius), equal to 1 for ρ ≤ 1/2 and 0 for ρ ≥ 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub center: [f64; 2],
    pub radius: f64,
}

fn smooth_step(t: f64) -> f64 {
    let e = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    let (a, b) = (e(t), e(1.0 - t));
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

impl Cutoff {
    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        let r = ((x1 - self.center[0]).powi(2) + (x2 - self.center[1]).powi(2)).sqrt() / self.radius;
        1.0 - smooth_step(2.0 * r - 1.0)
    }
}

/// A ridge of Gaussian cross-section along x1 + s0·x2 = u0, optionally localized by Φ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineSingularity {
    pub s0: f64,
    pub u0: f64,
    /// Standard deviation of the unit-mass profile across the ridge (in x1).
    pub width: f64,
    /// Without a cutoff the ridge is periodized across x1.
    pub cutoff: Option<Cutoff>,
}

#[derive(Clone, Debug)]
pub struct Synthesized {
    pub field: SampledField2D,
    pub warnings: Vec<String>,
}

pub fn make_line_singularity(ls: &LineSingularity, meta: &GridMeta) -> Result<Synthesized> {
    if !(ls.width > 0.0 && ls.width.is_finite()) {
        return Err(Error::invalid(format!("width {} must be positive for a rasterized line", ls.width)));
    }
    if !(ls.s0.is_finite() && ls.u0.is_finite()) {
        return Err(Error::invalid("line slope and offset must be finite"));
    }
    if let Some(c) = ls.cutoff {
        if !(c.radius > 0.0) {
            return Err(Error::invalid("cutoff radius must be positive"));
        }
    }
    let mut warnings = Vec::new();
    if ls.width < 2.0 * meta.spacing {
        warnings.push(format!(
            "width {} is below twice the grid spacing {}; the ridge is aliased",
            ls.width, meta.spacing
        ));
    }
    let [l1, l2] = meta.period();
    if ls.cutoff.is_none() {
        let turns = ls.s0 * l2 / l1;
        if (turns - turns.round()).abs() > 1e-9 {
            warnings.push(format!(
                "slope {} does not wrap onto the periodic grid; the ridge has a seam at the x2 boundary",
                ls.s0
            ));
        }
    }
    let norm = 1.0 / (ls.width * (2.0 * PI).sqrt());
    let field = SampledField2D::from_fn_real(*meta, |x1, x2| {
        let p = x1 + ls.s0 * x2 - ls.u0;
        match ls.cutoff {
            Some(c) => {
                let phi = c.eval(x1, x2);
                if phi == 0.0 {
                    0.0
                } else {
                    phi * norm * (-0.5 * (p / ls.width).powi(2)).exp()
                }
            }
            None => {
                let q = p - l1 * (p / l1).round();
                (-3..=3).map(|k| norm * (-0.5 * ((q + k as f64 * l1) / ls.width).powi(2)).exp()).sum()
            }
        }
    });
    Ok(Synthesized { field, warnings })
}

/// e^{−π|x − center|² / σ²}.
pub fn make_gaussian_field(meta: &GridMeta, center: [f64; 2], sigma: f64) -> Result<SampledField2D> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!("sigma {sigma} must be positive")));
    }
    Ok(SampledField2D::from_fn_real(*meta, |x1, x2| {
        (-PI * ((x1 - center[0]).powi(2) + (x2 - center[1]).powi(2)) / (sigma * sigma)).exp()
    }))
}
