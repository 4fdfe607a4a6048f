//! Admissibility constant, anisotropic moment integrals and Fourier decay orders.

use std::collections::BTreeMap;
use std::f64::consts::LN_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::ShearletSpec;

/// Growth factor under refinement above which an integral is declared divergent.
pub const DIVERGENCE_GROWTH: f64 = 10.0;

/// Fit window in |ξ| used by [`estimate_decay_orders`].
pub const DECAY_FIT_WINDOW: [f64; 2] = [8.0, 64.0];

/// Slopes steeper than this are reported as infinite decay.
pub const DECAY_INFINITE_SLOPE: f64 = -20.0;

#[derive(Clone, Copy, Debug)]
struct Level {
    /// Smallest |ω1| reached by the geometric grid.
    eps: f64,
    points_per_octave: usize,
    /// η steps across the half-width E2.
    eta_steps: usize,
}

const COARSE: Level = Level { eps: 1.0 / 4096.0, points_per_octave: 16, eta_steps: 256 };
const FINE: Level = Level { eps: 1.0 / 16_777_216.0, points_per_octave: 32, eta_steps: 512 };

/// ∫∫ |ψ̂(ω)|² / |ω1|^{2k} dω over eps ≤ |ω1| ≤ E1, |η| ≤ E2.
fn weighted_integral(spec: &ShearletSpec, k: u32, lv: Level) -> f64 {
    let [e1, e2] = spec.extent;
    let (lo, hi) = (lv.eps.ln(), e1.ln());
    let nu = (((hi - lo) / LN_2) * lv.points_per_octave as f64).ceil().max(1.0) as usize;
    let du = (hi - lo) / nu as f64;
    let ne = 2 * lv.eta_steps;
    let de = 2.0 * e2 / ne as f64;
    let rows: Vec<f64> = (0..=nu)
        .into_par_iter()
        .map(|i| {
            let w1 = (lo + i as f64 * du).exp();
            let wu = if i == 0 || i == nu { 0.5 } else { 1.0 } * du * w1;
            let mut acc = 0.0;
            for sign in [1.0, -1.0] {
                let om = sign * w1;
                let mut row = 0.0;
                for j in 0..=ne {
                    let eta = -e2 + j as f64 * de;
                    let we = if j == 0 || j == ne { 0.5 } else { 1.0 };
                    row += we * spec.psi_hat_sq(om, eta);
                }
                acc += row * de;
            }
            acc * wu / w1.powi(2 * k as i32)
        })
        .collect();
    rows.iter().sum()
}

/// Quadrature value with the change observed under one refinement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum MomentValue {
    Finite { value: f64, error: f64 },
    Divergent { coarse: f64, fine: f64 },
}

impl MomentValue {
    pub fn is_finite(&self) -> bool {
        matches!(self, MomentValue::Finite { .. })
    }
}

fn refined(spec: &ShearletSpec, k: u32) -> MomentValue {
    let coarse = weighted_integral(spec, k, COARSE);
    let fine = weighted_integral(spec, k, FINE);
    if coarse > 0.0 && fine > DIVERGENCE_GROWTH * coarse {
        MomentValue::Divergent { coarse, fine }
    } else {
        MomentValue::Finite { value: fine, error: (fine - coarse).abs() }
    }
}

/// C_ψ = ∫ |ψ̂(ω)|² / |ω1|² dω.
pub fn admissibility_constant(spec: &ShearletSpec) -> Result<Quadrature> {
    match refined(spec, 1) {
        MomentValue::Finite { value, error } => Ok(Quadrature { value, error }),
        MomentValue::Divergent { coarse, fine } => Err(Error::numerical(format!(
            "{} is not admissible: the admissibility integral grows from {coarse:.4e} to {fine:.4e} under refinement",
            spec.label
        ))),
    }
}

/// ∫ |ψ̂(ω)|² / |ω1|^{2k} dω, or a divergence verdict.
pub fn moment_integral(spec: &ShearletSpec, k: u32) -> Result<MomentValue> {
    if k == 0 {
        return Err(Error::invalid("moment order k must be at least 1"));
    }
    Ok(refined(spec, k))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFits {
    /// Decay of ψ̂ along ξ1 (at ξ2 = 0).
    #[serde(with = "crate::io::ext_f64")]
    pub l1: f64,
    /// Decay of ψ̂ along ξ2 (at ξ1 = 1).
    #[serde(with = "crate::io::ext_f64")]
    pub l: f64,
    /// Decay of θ̂ = ψ̂ / (−2πiξ1)^M along ξ2 (at ξ1 = 1).
    #[serde(with = "crate::io::ext_f64")]
    pub l2: f64,
    #[serde(with = "crate::io::ext_f64")]
    pub tau: f64,
    #[serde(with = "crate::io::ext_f64")]
    pub mu: f64,
    pub window: [f64; 2],
    pub diagnostics: Vec<String>,
}

/// Least-squares slope of log y against log x.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn fit_order(name: &str, f: impl Fn(f64) -> f64, diags: &mut Vec<String>) -> f64 {
    let [lo, hi] = DECAY_FIT_WINDOW;
    let n = 33;
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .map(|x| (x, f(x)))
        .filter(|&(_, y)| y > f64::MIN_POSITIVE)
        .collect();
    if pts.is_empty() {
        diags.push(format!("{name}: generator vanishes on the fit window; fit skipped, decay reported as infinite"));
        return f64::INFINITY;
    }
    if pts.len() < 3 {
        diags.push(format!("{name}: generator underflows on most of the fit window; decay reported as infinite"));
        return f64::INFINITY;
    }
    let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let slope = loglog_slope(&x, &y);
    if slope < DECAY_INFINITE_SLOPE {
        f64::INFINITY
    } else {
        (-slope).max(0.0)
    }
}

pub fn estimate_decay_orders(spec: &ShearletSpec) -> DecayFits {
    let mut diagnostics = Vec::new();
    let l1 = fit_order("l1", |x| spec.psi_hat(x, 0.0).norm().max(spec.psi_hat(-x, 0.0).norm()), &mut diagnostics);
    let l = fit_order("l", |x| spec.psi_hat(1.0, x).norm().max(spec.psi_hat(1.0, -x).norm()), &mut diagnostics);
    let l2 = match spec.declared_moments {
        Some(m) => {
            let scale = (2.0 * std::f64::consts::PI).powi(m as i32);
            fit_order("l2", |x| spec.psi_hat(1.0, x).norm().max(spec.psi_hat(1.0, -x).norm()) / scale, &mut diagnostics)
        }
        None => l,
    };
    diagnostics.push(format!(
        "slopes fitted by least squares on |xi| in [{}, {}]; slopes steeper than {} reported as infinite",
        DECAY_FIT_WINDOW[0], DECAY_FIT_WINDOW[1], DECAY_INFINITE_SLOPE
    ));
    DecayFits { l1, l, l2, tau: l, mu: l1, window: DECAY_FIT_WINDOW, diagnostics }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub label: String,
    pub c_psi: f64,
    pub c_psi_error: f64,
    pub moments: BTreeMap<String, MomentValue>,
    pub decay_fits: DecayFits,
}

/// Full report; moments are tabulated up to one past the declared order (at most 4 for infinite order).
pub fn analyze(spec: &ShearletSpec) -> Result<AdmissibilityReport> {
    let c = admissibility_constant(spec)?;
    let kmax = spec.declared_moments.map(|m| m + 1).unwrap_or(4);
    let mut moments = BTreeMap::new();
    for k in 1..=kmax {
        moments.insert(k.to_string(), moment_integral(spec, k)?);
    }
    Ok(AdmissibilityReport {
        label: spec.label.clone(),
        c_psi: c.value,
        c_psi_error: c.error,
        moments,
        decay_fits: estimate_decay_orders(spec),
    })
}
