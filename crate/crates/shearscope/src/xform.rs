//! Shearlet coefficients as Fourier multipliers, cone projections and coefficient energies.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{make_nu, ShearletSpec};
use crate::grid::{dft_forward, dft_inverse, GridMeta, SampledField2D, Spectrum2D};

/// Which shearlet system produced a volume.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chart {
    /// ψ_ast with shears of the horizontal cone.
    Horizontal,
    /// ψν_ast, the transposed system covering the vertical cone.
    Vertical,
}

impl Chart {
    pub fn as_str(self) -> &'static str {
        match self {
            Chart::Horizontal => "horizontal",
            Chart::Vertical => "vertical",
        }
    }

    pub fn parse(s: &str) -> Option<Chart> {
        match s {
            "horizontal" => Some(Chart::Horizontal),
            "vertical" => Some(Chart::Vertical),
            _ => None,
        }
    }
}

/// Coefficients `SH(a_i, s_j, t)` on a (possibly strided) copy of the field grid.
#[derive(Clone, Debug)]
pub struct CoeffVolume {
    pub label: String,
    /// Index order (i, j, q1, q2) with (q1, q2) row-major over the strided grid.
    pub coeffs: Vec<Complex64>,
    pub a_grid: Vec<f64>,
    pub s_grid: Vec<f64>,
    /// Every `t_stride`-th grid node along each axis is kept.
    pub t_stride: usize,
    pub field_meta: GridMeta,
    pub chart: Chart,
    pub warnings: Vec<String>,
}

pub fn strided_dims(meta: &GridMeta, stride: usize) -> (usize, usize) {
    (meta.n1.div_ceil(stride), meta.n2.div_ceil(stride))
}

impl CoeffVolume {
    pub fn t_dims(&self) -> (usize, usize) {
        strided_dims(&self.field_meta, self.t_stride)
    }

    pub fn plane_len(&self) -> usize {
        let (a, b) = self.t_dims();
        a * b
    }

    pub fn plane(&self, i: usize, j: usize) -> &[Complex64] {
        let n = self.plane_len();
        let k = i * self.s_grid.len() + j;
        &self.coeffs[k * n..(k + 1) * n]
    }

    pub fn get(&self, i: usize, j: usize, q1: usize, q2: usize) -> Complex64 {
        let (_, t2) = self.t_dims();
        self.plane(i, j)[q1 * t2 + q2]
    }

    /// Physical translation of strided node (q1, q2).
    pub fn t_node(&self, q1: usize, q2: usize) -> [f64; 2] {
        [self.field_meta.x1(q1 * self.t_stride), self.field_meta.x2(q2 * self.t_stride)]
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// `n` log-spaced scales from `a_min` to `a_max` inclusive with `per_octave` points per octave.
pub fn log_scale_grid(a_min: f64, a_max: f64, per_octave: usize) -> Result<Vec<f64>> {
    if !(a_min > 0.0 && a_max >= a_min && a_max.is_finite()) || per_octave == 0 {
        return Err(Error::invalid(format!(
            "scale grid needs 0 < a_min <= a_max and per_octave >= 1 (got {a_min}, {a_max}, {per_octave})"
        )));
    }
    let n = ((a_max / a_min).log2() * per_octave as f64).round() as usize;
    if n == 0 {
        return Ok(vec![a_min]);
    }
    let r = (a_max / a_min).ln() / n as f64;
    Ok((0..=n).map(|k| if k == n { a_max } else { a_min * (k as f64 * r).exp() }).collect())
}

/// Uniform shears from −Ξ to Ξ.
pub fn uniform_shear_grid(xi: f64, step: f64) -> Result<Vec<f64>> {
    if !(xi >= 0.0 && step > 0.0 && xi.is_finite()) {
        return Err(Error::invalid(format!("shear grid needs xi >= 0 and step > 0 (got {xi}, {step})")));
    }
    let n = (xi / step).round() as i64;
    Ok((-n..=n).map(|k| k as f64 * step).collect())
}

/// Trapezoid weights in log a: ∫ g(a) da ≈ Σ w_i g(a_i).
pub fn scale_weights(a_grid: &[f64]) -> Vec<f64> {
    let n = a_grid.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let u: Vec<f64> = a_grid.iter().map(|a| a.ln()).collect();
    (0..n)
        .map(|i| {
            let left = if i > 0 { u[i] - u[i - 1] } else { 0.0 };
            let right = if i + 1 < n { u[i + 1] - u[i] } else { 0.0 };
            0.5 * (left + right) * a_grid[i]
        })
        .collect()
}

/// Trapezoid weights on an increasing grid.
pub fn trapezoid_weights(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|i| {
            let left = if i > 0 { grid[i] - grid[i - 1] } else { 0.0 };
            let right = if i + 1 < n { grid[i + 1] - grid[i] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

fn check_grids(a_grid: &[f64], s_grid: &[f64]) -> Result<()> {
    if a_grid.is_empty() || s_grid.is_empty() {
        return Err(Error::invalid("scale and shear grids must be non-empty"));
    }
    if a_grid.iter().any(|a| !(a.is_finite() && *a > 0.0)) || a_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("scale grid must be positive and strictly increasing"));
    }
    if s_grid.iter().any(|s| !s.is_finite()) || s_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("shear grid must be finite and strictly increasing"));
    }
    Ok(())
}

/// conj(ψ̂(aξ1, √a(ξ2 − sξ1))) a^{3/4}, or the transposed system for the vertical chart.
fn analysis_multiplier(spec: &ShearletSpec, chart: Chart, a: f64, s: f64) -> impl Fn(f64, f64) -> Complex64 + Sync + '_ {
    let ra = a.sqrt();
    let norm = a.powf(0.75);
    move |x1, x2| {
        let v = match chart {
            Chart::Horizontal => spec.psi_hat(a * x1, ra * (x2 - s * x1)),
            Chart::Vertical => spec.psi_hat(ra * (x1 - s * x2), a * x2),
        };
        v.conj() * norm
    }
}

fn strided_plane(full: &SampledField2D, stride: usize) -> Vec<Complex64> {
    if stride == 1 {
        return full.values.clone();
    }
    let m = full.meta;
    let mut out = Vec::with_capacity(strided_dims(&m, stride).0 * strided_dims(&m, stride).1);
    for i1 in (0..m.n1).step_by(stride) {
        for i2 in (0..m.n2).step_by(stride) {
            out.push(full.values[i1 * m.n2 + i2]);
        }
    }
    out
}

fn transform_impl(
    f: &SampledField2D,
    spec: &ShearletSpec,
    chart: Chart,
    a_grid: &[f64],
    s_grid: &[f64],
    t_stride: usize,
) -> Result<CoeffVolume> {
    check_grids(a_grid, s_grid)?;
    if t_stride == 0 || f.meta.n1 % t_stride != 0 || f.meta.n2 % t_stride != 0 {
        return Err(Error::invalid(format!("t_stride {t_stride} must divide both grid sizes")));
    }
    let gen = match chart {
        Chart::Horizontal => spec.clone(),
        Chart::Vertical => make_nu(spec),
    };
    let fhat = dft_forward(f)?;
    let pairs: Vec<(usize, usize)> =
        (0..a_grid.len()).flat_map(|i| (0..s_grid.len()).map(move |j| (i, j))).collect();
    let planes: Vec<Vec<Complex64>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let m = analysis_multiplier(&gen, chart, a_grid[i], s_grid[j]);
            let plane = dft_inverse(&fhat.apply_multiplier(m))?;
            Ok(strided_plane(&plane, t_stride))
        })
        .collect::<Result<_>>()?;
    let mut warnings = Vec::new();
    let h = f.meta.spacing;
    if let Some(a) = a_grid.iter().find(|a| a.sqrt() < 2.0 * h) {
        warnings.push(format!(
            "scale a = {a:.4e} has sqrt(a) below twice the grid spacing {h:.4e}; the generator is under-resolved there"
        ));
    }
    Ok(CoeffVolume {
        label: spec.label.clone(),
        coeffs: planes.concat(),
        a_grid: a_grid.to_vec(),
        s_grid: s_grid.to_vec(),
        t_stride,
        field_meta: f.meta,
        chart,
        warnings,
    })
}

/// SH_ψ f(a, s, t) for every grid scale, shear and translation node.
pub fn shearlet_transform(f: &SampledField2D, spec: &ShearletSpec, a_grid: &[f64], s_grid: &[f64]) -> Result<CoeffVolume> {
    transform_impl(f, spec, Chart::Horizontal, a_grid, s_grid, 1)
}

/// As [`shearlet_transform`], keeping every `t_stride`-th translation node.
pub fn shearlet_transform_strided(
    f: &SampledField2D,
    spec: &ShearletSpec,
    a_grid: &[f64],
    s_grid: &[f64],
    t_stride: usize,
) -> Result<CoeffVolume> {
    transform_impl(f, spec, Chart::Horizontal, a_grid, s_grid, t_stride)
}

/// SH_{ψν} f(a, s, t) = ⟨f, ψν_ast⟩ with ψ̂ν_ast(ξ) = a^{3/4} e^{−2πi t·ξ} ψ̂(aξ2, √a(ξ1 − sξ2)).
pub fn dual_cone_transform(f: &SampledField2D, spec: &ShearletSpec, a_grid: &[f64], s_grid: &[f64]) -> Result<CoeffVolume> {
    transform_impl(f, spec, Chart::Vertical, a_grid, s_grid, 1)
}

pub fn dual_cone_transform_strided(
    f: &SampledField2D,
    spec: &ShearletSpec,
    a_grid: &[f64],
    s_grid: &[f64],
    t_stride: usize,
) -> Result<CoeffVolume> {
    transform_impl(f, spec, Chart::Vertical, a_grid, s_grid, t_stride)
}

/// Σ_{a,s} w_a w_s a^{−3} Σ_t |SH f|² Δt², streamed plane by plane.
///
/// With `both_signs` the reflected generator ψ(−x), which realizes negative
/// scales, contributes a second branch.
pub fn coefficient_energy(
    f: &SampledField2D,
    spec: &ShearletSpec,
    a_grid: &[f64],
    s_grid: &[f64],
    both_signs: bool,
) -> Result<f64> {
    check_grids(a_grid, s_grid)?;
    let fhat = dft_forward(f)?;
    let wa = scale_weights(a_grid);
    let ws = trapezoid_weights(s_grid);
    let mut gens = vec![spec.clone()];
    if both_signs {
        gens.push(spec.reflected());
    }
    let cell = f.meta.cell();
    let jobs: Vec<(usize, usize, usize)> = (0..gens.len())
        .flat_map(|g| (0..a_grid.len()).flat_map(move |i| (0..s_grid.len()).map(move |j| (g, i, j))))
        .collect();
    let parts: Vec<f64> = jobs
        .par_iter()
        .map(|&(g, i, j)| {
            let a = a_grid[i];
            let m = analysis_multiplier(&gens[g], Chart::Horizontal, a, s_grid[j]);
            let plane = dft_inverse(&fhat.apply_multiplier(m))?;
            let e: f64 = plane.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * cell;
            Ok(wa[i] * ws[j] * e / (a * a * a))
        })
        .collect::<Result<_>>()?;
    Ok(parts.iter().sum())
}

/// Horizontal (`|ξ1| ≥ u, |ξ2| ≤ v|ξ1|`) or vertical cone.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeSpec {
    pub u: f64,
    #[serde(with = "crate::io::ext_f64")]
    pub v: f64,
    pub orientation: Orientation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Horizontal,
    Vertical,
}

impl ConeSpec {
    pub fn new(u: f64, v: f64, orientation: Orientation) -> Result<Self> {
        if !(u >= 0.0 && u.is_finite()) {
            return Err(Error::invalid(format!("u = {u}: the cone cutoff must satisfy u >= 0")));
        }
        if !(v > 0.0) {
            return Err(Error::invalid(format!("v = {v}: the cone slope bound must satisfy v > 0")));
        }
        Ok(ConeSpec { u, v, orientation })
    }

    pub fn horizontal(u: f64, v: f64) -> Result<Self> {
        Self::new(u, v, Orientation::Horizontal)
    }

    /// Grid-node membership. The diagonal |ξ1| = v|ξ2| belongs to the
    /// horizontal cone, so the vertical cone excludes it.
    pub fn contains(&self, xi1: f64, xi2: f64) -> bool {
        match self.orientation {
            Orientation::Horizontal => xi1.abs() >= self.u && xi1 != 0.0 && xi2.abs() <= self.v * xi1.abs(),
            Orientation::Vertical => {
                xi2.abs() >= self.u && xi2 != 0.0 && (self.v.is_infinite() || xi1.abs() < self.v * xi2.abs())
            }
        }
    }
}

fn indicator(b: bool) -> Complex64 {
    Complex64::new(if b { 1.0 } else { 0.0 }, 0.0)
}

/// The low-pass square [−1, 1]² (closed).
pub fn in_lowpass_square(xi1: f64, xi2: f64) -> bool {
    xi1.abs() <= 1.0 && xi2.abs() <= 1.0
}

fn project(f: &SampledField2D, keep: impl Fn(f64, f64) -> bool + Sync) -> Result<SampledField2D> {
    let spec = dft_forward(f)?;
    let out = dft_inverse(&spec.apply_multiplier(|a, b| indicator(keep(a, b))))?;
    Ok(out.with_dtype_of(f.dtype))
}

pub fn cone_project(f: &SampledField2D, cone: &ConeSpec) -> Result<SampledField2D> {
    project(f, |a, b| cone.contains(a, b))
}

pub fn cone_project_spectrum(s: &Spectrum2D, cone: &ConeSpec) -> Spectrum2D {
    s.apply_multiplier(|a, b| indicator(cone.contains(a, b)))
}

pub fn lowpass_project(f: &SampledField2D) -> Result<SampledField2D> {
    project(f, in_lowpass_square)
}

/// Low-pass, horizontal and vertical parts for u = v = 1, partitioning the grid.
///
/// Square-boundary nodes go to the low-pass part and diagonal nodes to the horizontal cone.
pub fn split_three_way(f: &SampledField2D) -> Result<[SampledField2D; 3]> {
    let h = ConeSpec::new(1.0, 1.0, Orientation::Horizontal)?;
    let v = ConeSpec::new(1.0, 1.0, Orientation::Vertical)?;
    Ok([
        lowpass_project(f)?,
        project(f, |a, b| !in_lowpass_square(a, b) && h.contains(a, b))?,
        project(f, |a, b| !in_lowpass_square(a, b) && v.contains(a, b))?,
    ])
}
