//! Uniform periodic grids, sampled fields and their centered spectra.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;

/// Scalar type stored in a field file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    F64,
    C128,
}

impl Dtype {
    pub fn as_str(self) -> &'static str {
        match self {
            Dtype::F64 => "f64",
            Dtype::C128 => "c128",
        }
    }
}

/// Node counts, spacing and the physical position of node (0, 0).
///
/// Node `(i1, i2)` sits at `origin + spacing·(i1, i2)` and is stored at
/// `i1·n2 + i2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub n1: usize,
    pub n2: usize,
    pub spacing: f64,
    pub origin: [f64; 2],
}

impl GridMeta {
    pub fn new(n1: usize, n2: usize, spacing: f64, origin: [f64; 2]) -> Result<Self> {
        for (name, n) in [("n1", n1), ("n2", n2)] {
            if n < 8 || n % 2 != 0 {
                return Err(Error::invalid(format!("{name} = {n}: grid sizes must be even and at least 8")));
            }
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::invalid(format!("spacing = {spacing}: must be finite and positive")));
        }
        if !(origin[0].is_finite() && origin[1].is_finite()) {
            return Err(Error::invalid("origin must be finite"));
        }
        Ok(GridMeta { n1, n2, spacing, origin })
    }

    /// Grid whose node `(n1/2, n2/2)` is the physical origin.
    pub fn centered(n1: usize, n2: usize, spacing: f64) -> Result<Self> {
        Self::new(n1, n2, spacing, [-(n1 as f64) / 2.0 * spacing, -(n2 as f64) / 2.0 * spacing])
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x1(&self, i1: usize) -> f64 {
        self.origin[0] + i1 as f64 * self.spacing
    }

    pub fn x2(&self, i2: usize) -> f64 {
        self.origin[1] + i2 as f64 * self.spacing
    }

    pub fn period(&self) -> [f64; 2] {
        [self.n1 as f64 * self.spacing, self.n2 as f64 * self.spacing]
    }

    /// Area of one spatial cell.
    pub fn cell(&self) -> f64 {
        self.spacing * self.spacing
    }

    /// Area of one frequency cell.
    pub fn freq_cell(&self) -> f64 {
        1.0 / (self.period()[0] * self.period()[1])
    }

    pub fn xi1(&self, k1: usize) -> f64 {
        (k1 as f64 - (self.n1 / 2) as f64) / self.period()[0]
    }

    pub fn xi2(&self, k2: usize) -> f64 {
        (k2 as f64 - (self.n2 / 2) as f64) / self.period()[1]
    }

    pub fn frequency_grid(&self) -> FrequencyGrid {
        FrequencyGrid {
            xi1: (0..self.n1).map(|k| self.xi1(k)).collect(),
            xi2: (0..self.n2).map(|k| self.xi2(k)).collect(),
        }
    }

    pub fn same_grid(&self, other: &GridMeta) -> bool {
        self.n1 == other.n1
            && self.n2 == other.n2
            && self.spacing == other.spacing
            && self.origin == other.origin
    }

    /// Grid with the two axes exchanged.
    pub fn swapped(&self) -> GridMeta {
        GridMeta { n1: self.n2, n2: self.n1, spacing: self.spacing, origin: [self.origin[1], self.origin[0]] }
    }
}

/// Centered frequency axes of a grid; node `(k1, k2)` is `(xi1[k1], xi2[k2])`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyGrid {
    pub xi1: Vec<f64>,
    pub xi2: Vec<f64>,
}

impl FrequencyGrid {
    pub fn node(&self, k1: usize, k2: usize) -> [f64; 2] {
        [self.xi1[k1], self.xi2[k2]]
    }

    pub fn step(&self) -> [f64; 2] {
        [self.xi1[1] - self.xi1[0], self.xi2[1] - self.xi2[0]]
    }

    /// All nodes in storage order.
    pub fn nodes(&self) -> Vec<[f64; 2]> {
        let mut out = Vec::with_capacity(self.xi1.len() * self.xi2.len());
        for &a in &self.xi1 {
            for &b in &self.xi2 {
                out.push([a, b]);
            }
        }
        out
    }
}

pub fn make_frequency_grid(n1: usize, n2: usize, spacing: f64) -> Result<FrequencyGrid> {
    for (name, n) in [("n1", n1), ("n2", n2)] {
        if n < 8 || n % 2 != 0 {
            return Err(Error::invalid(format!("{name} = {n}: grid sizes must be even and at least 8")));
        }
    }
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(Error::invalid(format!("spacing = {spacing}: must be finite and positive")));
    }
    let axis = |n: usize| (0..n).map(|k| (k as f64 - (n / 2) as f64) / (n as f64 * spacing)).collect();
    Ok(FrequencyGrid { xi1: axis(n1), xi2: axis(n2) })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampledField2D {
    pub meta: GridMeta,
    pub values: Vec<Complex64>,
    pub dtype: Dtype,
}

impl SampledField2D {
    pub fn new(meta: GridMeta, values: Vec<Complex64>, dtype: Dtype) -> Result<Self> {
        if values.len() != meta.len() {
            return Err(Error::invalid(format!(
                "field has {} values for a {}x{} grid",
                values.len(),
                meta.n1,
                meta.n2
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::invalid(format!("non-finite field value at node {i}")));
        }
        if dtype == Dtype::F64 && values.iter().any(|v| v.im != 0.0) {
            return Err(Error::invalid("real field with nonzero imaginary parts"));
        }
        Ok(SampledField2D { meta, values, dtype })
    }

    pub fn from_real(meta: GridMeta, values: Vec<f64>) -> Result<Self> {
        Self::new(meta, values.into_iter().map(|v| Complex64::new(v, 0.0)).collect(), Dtype::F64)
    }

    pub fn zeros(meta: GridMeta) -> Self {
        SampledField2D { meta, values: vec![Complex64::new(0.0, 0.0); meta.len()], dtype: Dtype::F64 }
    }

    /// Samples `f(x1, x2)` at every node.
    pub fn from_fn_real(meta: GridMeta, f: impl Fn(f64, f64) -> f64 + Sync) -> Self {
        let values = (0..meta.len())
            .into_par_iter()
            .map(|idx| Complex64::new(f(meta.x1(idx / meta.n2), meta.x2(idx % meta.n2)), 0.0))
            .collect();
        SampledField2D { meta, values, dtype: Dtype::F64 }
    }

    pub fn from_fn(meta: GridMeta, f: impl Fn(f64, f64) -> Complex64 + Sync) -> Self {
        let values = (0..meta.len())
            .into_par_iter()
            .map(|idx| f(meta.x1(idx / meta.n2), meta.x2(idx % meta.n2)))
            .collect();
        SampledField2D { meta, values, dtype: Dtype::C128 }
    }

    pub fn get(&self, i1: usize, i2: usize) -> Complex64 {
        self.values[i1 * self.meta.n2 + i2]
    }

    /// Discrete L² norm approximating the continuous integral.
    pub fn norm_l2(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.meta.cell()).sqrt()
    }

    pub fn real_part(&self) -> SampledField2D {
        SampledField2D {
            meta: self.meta,
            values: self.values.iter().map(|v| Complex64::new(v.re, 0.0)).collect(),
            dtype: Dtype::F64,
        }
    }

    /// Keeps the stored type when the imaginary parts are negligible.
    pub(crate) fn with_dtype_of(self, like: Dtype) -> SampledField2D {
        match like {
            Dtype::F64 => self.real_part(),
            Dtype::C128 => self,
        }
    }

    /// Field with the axes exchanged: `g(x1, x2) = f(x2, x1)`.
    pub fn swap_axes(&self) -> SampledField2D {
        let (n1, n2) = (self.meta.n1, self.meta.n2);
        let mut values = vec![Complex64::new(0.0, 0.0); self.values.len()];
        fft::transpose(&self.values, &mut values, n1, n2);
        SampledField2D { meta: self.meta.swapped(), values, dtype: self.dtype }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Relative L² distance `‖self − other‖ / ‖other‖`.
    pub fn rel_l2_error(&self, reference: &SampledField2D) -> f64 {
        let num: f64 = self.values.iter().zip(&reference.values).map(|(a, b)| (a - b).norm_sqr()).sum();
        let den: f64 = reference.values.iter().map(|v| v.norm_sqr()).sum();
        if den == 0.0 {
            num.sqrt()
        } else {
            (num / den).sqrt()
        }
    }
}

/// Centered spectrum of a field; node `(k1, k2)` holds `f̂(xi1(k1), xi2(k2))`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum2D {
    /// Grid of the field this spectrum belongs to.
    pub meta: GridMeta,
    pub values: Vec<Complex64>,
}

impl Spectrum2D {
    pub fn zeros(meta: GridMeta) -> Self {
        Spectrum2D { meta, values: vec![Complex64::new(0.0, 0.0); meta.len()] }
    }

    pub fn frequencies(&self) -> FrequencyGrid {
        self.meta.frequency_grid()
    }

    pub fn get(&self, k1: usize, k2: usize) -> Complex64 {
        self.values[k1 * self.meta.n2 + k2]
    }

    /// Multiplies every node by `m(ξ1, ξ2)`.
    pub fn apply_multiplier(&self, m: impl Fn(f64, f64) -> Complex64 + Sync) -> Spectrum2D {
        let meta = self.meta;
        let fg = meta.frequency_grid();
        let values = self
            .values
            .par_iter()
            .enumerate()
            .map(|(idx, v)| v * m(fg.xi1[idx / meta.n2], fg.xi2[idx % meta.n2]))
            .collect();
        Spectrum2D { meta, values }
    }

    /// Σ |f̂|² Δξ-cell.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.meta.freq_cell()
    }
}

fn phase_axis(n: usize, period: f64, origin: f64, sign: f64) -> Vec<Complex64> {
    (0..n)
        .map(|k| {
            let xi = (k as f64 - (n / 2) as f64) / period;
            Complex64::from_polar(1.0, sign * 2.0 * PI * origin * xi)
        })
        .collect()
}

pub fn dft_forward(f: &SampledField2D) -> Result<Spectrum2D> {
    let meta = f.meta;
    if f.values.len() != meta.len() {
        return Err(Error::invalid("field storage does not match its grid"));
    }
    if f.values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::invalid("field contains non-finite values"));
    }
    let (n1, n2) = (meta.n1, meta.n2);
    let mut data = f.values.clone();
    fft::fft2(&mut data, n1, n2, false);
    fft::shift2(&mut data, n1, n2);
    let [p1, p2] = meta.period();
    let ph1 = phase_axis(n1, p1, meta.origin[0], -1.0);
    let ph2 = phase_axis(n2, p2, meta.origin[1], -1.0);
    let scale = meta.cell();
    data.par_chunks_mut(n2).enumerate().for_each(|(k1, row)| {
        let a = ph1[k1] * scale;
        for (v, b) in row.iter_mut().zip(&ph2) {
            *v *= a * b;
        }
    });
    Ok(Spectrum2D { meta, values: data })
}

/// Inverse of [`dft_forward`]; the result is complex-typed.
pub fn dft_inverse(spec: &Spectrum2D) -> Result<SampledField2D> {
    let meta = spec.meta;
    if spec.values.len() != meta.len() {
        return Err(Error::invalid(format!(
            "spectrum has {} values for a {}x{} grid",
            spec.values.len(),
            meta.n1,
            meta.n2
        )));
    }
    let (n1, n2) = (meta.n1, meta.n2);
    let [p1, p2] = meta.period();
    let ph1 = phase_axis(n1, p1, meta.origin[0], 1.0);
    let ph2 = phase_axis(n2, p2, meta.origin[1], 1.0);
    let scale = meta.freq_cell();
    let mut data = spec.values.clone();
    data.par_chunks_mut(n2).enumerate().for_each(|(k1, row)| {
        let a = ph1[k1] * scale;
        for (v, b) in row.iter_mut().zip(&ph2) {
            *v *= a * b;
        }
    });
    fft::shift2(&mut data, n1, n2);
    fft::fft2(&mut data, n1, n2, true);
    Ok(SampledField2D { meta, values: data, dtype: Dtype::C128 })
}

/// Applies a multiplier to the spectrum of `f` and returns to the spatial side.
pub fn filter(f: &SampledField2D, m: impl Fn(f64, f64) -> Complex64 + Sync) -> Result<SampledField2D> {
    let spec = dft_forward(f)?.apply_multiplier(m);
    dft_inverse(&spec)
}

/// Translates a field by `tau` exactly through the shift theorem.
pub fn translate(f: &SampledField2D, tau: [f64; 2]) -> Result<SampledField2D> {
    let g = filter(f, |a, b| Complex64::from_polar(1.0, -2.0 * PI * (tau[0] * a + tau[1] * b)))?;
    Ok(g.with_dtype_of(f.dtype))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(meta: GridMeta) -> SampledField2D {
        SampledField2D::from_fn_real(meta, |x1, x2| (-PI * (x1 * x1 + x2 * x2)).exp())
    }

    #[test]
    fn frequency_axis_examples() {
        let g = make_frequency_grid(8, 8, 1.0).unwrap();
        assert_eq!(g.xi1, vec![-0.5, -0.375, -0.25, -0.125, 0.0, 0.125, 0.25, 0.375]);
        let g = make_frequency_grid(8, 8, 0.5).unwrap();
        assert_eq!(g.xi1[0], -1.0);
        assert_eq!(g.xi1[7], 0.75);
        assert!(make_frequency_grid(7, 8, 1.0).is_err());
    }

    #[test]
    fn gaussian_is_self_dual() {
        let meta = GridMeta::centered(128, 128, 1.0 / 16.0).unwrap();
        let s = dft_forward(&gaussian(meta)).unwrap();
        let fg = s.frequencies();
        let mut err: f64 = 0.0;
        for k1 in 0..128 {
            for k2 in 0..128 {
                let [a, b] = fg.node(k1, k2);
                let exact = (-PI * (a * a + b * b)).exp();
                err = err.max((s.get(k1, k2) - exact).norm());
            }
        }
        assert!(err < 1e-10, "max error {err}");
    }

    #[test]
    fn shift_theorem_pointwise() {
        let meta = GridMeta::centered(64, 64, 1.0 / 8.0).unwrap();
        let t = [0.5, -0.25];
        let g = gaussian(meta);
        let tg = SampledField2D::from_fn_real(meta, |x1, x2| {
            (-PI * ((x1 - t[0]).powi(2) + (x2 - t[1]).powi(2))).exp()
        });
        let gs = dft_forward(&g).unwrap();
        let ts = dft_forward(&tg).unwrap();
        let fg = gs.frequencies();
        for k1 in 0..64 {
            for k2 in 0..64 {
                let [a, b] = fg.node(k1, k2);
                let expect = gs.get(k1, k2) * Complex64::from_polar(1.0, -2.0 * PI * (t[0] * a + t[1] * b));
                assert!((ts.get(k1, k2) - expect).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn zero_spectrum_inverts_to_zero() {
        let meta = GridMeta::centered(16, 8, 0.3).unwrap();
        let f = dft_inverse(&Spectrum2D::zeros(meta)).unwrap();
        assert!(f.values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn impulse_has_flat_modulus_and_round_trips() {
        let meta = GridMeta::new(16, 32, 0.25, [1.0, -2.0]).unwrap();
        let mut f = SampledField2D::zeros(meta);
        f.values[5 * 32 + 7] = Complex64::new(1.0, 0.0);
        let s = dft_forward(&f).unwrap();
        let m = meta.cell();
        assert!(s.values.iter().all(|v| (v.norm() - m).abs() < 1e-15));
        let back = dft_inverse(&s).unwrap();
        assert!(back.rel_l2_error(&f) < 1e-12);
    }

    #[test]
    fn rejects_non_finite_and_bad_grids() {
        assert!(GridMeta::new(9, 8, 1.0, [0.0, 0.0]).is_err());
        assert!(GridMeta::new(6, 8, 1.0, [0.0, 0.0]).is_err());
        assert!(GridMeta::new(8, 8, 0.0, [0.0, 0.0]).is_err());
        let meta = GridMeta::centered(8, 8, 1.0).unwrap();
        let mut vals = vec![0.0; 64];
        vals[3] = f64::NAN;
        assert!(SampledField2D::from_real(meta, vals).is_err());
        let bad = Spectrum2D { meta, values: vec![Complex64::new(0.0, 0.0); 10] };
        assert!(dft_inverse(&bad).is_err());
    }

    #[test]
    fn swap_axes_is_involutive() {
        let meta = GridMeta::new(8, 16, 0.5, [0.0, 1.0]).unwrap();
        let f = SampledField2D::from_fn_real(meta, |a, b| a + 10.0 * b);
        let g = f.swap_axes();
        assert_eq!(g.meta.n1, 16);
        assert_eq!(g.get(3, 5), f.get(5, 3));
        assert_eq!(g.swap_axes(), f);
    }
}
