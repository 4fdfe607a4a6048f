//! The Δ multiplier of cone-adapted systems: frame bounds, truncation, windows and reconstruction.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::ShearletSpec;
use crate::grid::{dft_forward, dft_inverse, GridMeta, SampledField2D};
use crate::xform::{cone_project, in_lowpass_square, scale_weights, trapezoid_weights, ConeSpec, Orientation};

/// Scale ceiling Γ, shear ceiling Ξ and the frequency cone of a truncated system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    #[serde(with = "crate::io::ext_f64")]
    pub gamma: f64,
    #[serde(with = "crate::io::ext_f64")]
    pub xi: f64,
    pub cone: ConeSpec,
}

impl SystemParams {
    pub fn new(gamma: f64, xi: f64, cone: ConeSpec) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(Error::invalid(format!("gamma = {gamma}: the scale ceiling must be positive")));
        }
        if !(xi > 0.0) {
            return Err(Error::invalid(format!("xi = {xi}: the shear ceiling must be positive")));
        }
        Ok(SystemParams { gamma, xi, cone })
    }

    /// Γ = Ξ = ∞ on the punctured plane {ξ1 ≠ 0}.
    pub fn untruncated_plane() -> Self {
        SystemParams {
            gamma: f64::INFINITY,
            xi: f64::INFINITY,
            cone: ConeSpec { u: 0.0, v: f64::INFINITY, orientation: Orientation::Horizontal },
        }
    }
}

const OMEGA_MIN: f64 = 1.0 / 1_073_741_824.0;
const POINTS_PER_OCTAVE: usize = 16;
const ETA_STEPS: usize = 1024;

/// Cumulative η-integrals of |ψ̂(±ω, η)|² on a log grid in ω, from which Δ is
/// evaluated for any (Γ, Ξ) and frequency.
///
/// Substituting ω = a|ξ1| and η = √a(ξ2 − sξ1) turns the (a, s) integral into
/// ∫_0^{Γ|ξ1|} ω^{−2} ∫_{η_lo(ω)}^{η_hi(ω)} |ψ̂(±ω, η)|² dη dω.
pub struct DeltaTable {
    lo: f64,
    du: f64,
    omegas: Vec<f64>,
    e2: f64,
    deta: f64,
    /// Rows for +ω and −ω, each `omegas.len() × (ETA_STEPS + 1)`.
    cum: [Vec<f64>; 2],
    c_total: f64,
}

impl DeltaTable {
    pub fn new(spec: &ShearletSpec) -> DeltaTable {
        let [e1, e2] = spec.extent;
        let lo = OMEGA_MIN.ln();
        let hi = e1.ln();
        let nu = (((hi - lo) / std::f64::consts::LN_2) * POINTS_PER_OCTAVE as f64).ceil() as usize;
        let du = (hi - lo) / nu as f64;
        let omegas: Vec<f64> = (0..=nu).map(|k| (lo + k as f64 * du).exp()).collect();
        let deta = 2.0 * e2 / ETA_STEPS as f64;
        let build = |sign: f64| -> Vec<f64> {
            let rows: Vec<Vec<f64>> = omegas
                .par_iter()
                .map(|&w| {
                    let mut row = Vec::with_capacity(ETA_STEPS + 1);
                    let mut acc = 0.0;
                    let mut prev = spec.psi_hat_sq(sign * w, -e2);
                    row.push(0.0);
                    for j in 1..=ETA_STEPS {
                        let cur = spec.psi_hat_sq(sign * w, -e2 + j as f64 * deta);
                        acc += 0.5 * (prev + cur) * deta;
                        row.push(acc);
                        prev = cur;
                    }
                    row
                })
                .collect();
            rows.concat()
        };
        let cum = [build(1.0), build(-1.0)];
        let mut t = DeltaTable { lo, du, omegas, e2, deta, cum, c_total: 0.0 };
        t.c_total = t.branch(0, 0.0, 1.0, f64::INFINITY, f64::INFINITY) + t.branch(1, 0.0, 1.0, f64::INFINITY, f64::INFINITY);
        t
    }

    /// ∫ |ψ̂|² / ω1² over the plane, on this table's quadrature.
    pub fn c_psi(&self) -> f64 {
        self.c_total
    }

    fn cum_at(&self, side: usize, k: usize, eta: f64) -> f64 {
        let row = &self.cum[side][k * (ETA_STEPS + 1)..(k + 1) * (ETA_STEPS + 1)];
        let p = ((eta + self.e2) / self.deta).clamp(0.0, ETA_STEPS as f64);
        let j = (p.floor() as usize).min(ETA_STEPS - 1);
        let f = p - j as f64;
        row[j] * (1.0 - f) + row[j + 1] * f
    }

    fn window(&self, side: usize, k: usize, w: f64, y2: f64, x: f64, xi: f64) -> f64 {
        if xi.is_infinite() {
            return self.cum[side][k * (ETA_STEPS + 1) + ETA_STEPS];
        }
        let r = (w / x).sqrt();
        self.cum_at(side, k, r * (y2 + xi * x)) - self.cum_at(side, k, r * (y2 - xi * x))
    }

    /// One sign branch at |ξ1| = x with ξ2 = y2.
    fn branch(&self, side: usize, y2: f64, x: f64, gamma: f64, xi: f64) -> f64 {
        let end = (gamma * x).min(*self.omegas.last().expect("non-empty"));
        if end <= self.omegas[0] {
            return 0.0;
        }
        let pos = (end.ln() - self.lo) / self.du;
        let kk = (pos.floor() as usize).min(self.omegas.len() - 1);
        let mut acc = 0.0;
        let mut prev = 0.0;
        for k in 0..=kk {
            let w = self.omegas[k];
            let g = self.window(side, k, w, y2, x, xi) / w;
            acc += if k == 0 || k == kk { 0.5 } else { 1.0 } * g;
            prev = g;
        }
        acc *= self.du;
        if kk == 0 {
            acc = 0.0;
        }
        let d = end.ln() - (self.lo + kk as f64 * self.du);
        if d > 1e-15 && kk + 1 < self.omegas.len() {
            let th = d / self.du;
            let ge = ((1.0 - th) * self.window(side, kk, end, y2, x, xi) + th * self.window(side, kk + 1, end, y2, x, xi)) / end;
            acc += 0.5 * d * (prev + ge);
        }
        acc
    }

    /// Truncated horizontal-cone integral at ξ, without the cone indicator.
    pub fn delta_horizontal(&self, gamma: f64, xi: f64, x1: f64, x2: f64) -> f64 {
        if x1 == 0.0 {
            return 0.0;
        }
        let (pos, neg) = if x1 > 0.0 { (0, 1) } else { (1, 0) };
        self.branch(pos, x2, x1.abs(), gamma, xi) + self.branch(neg, -x2, x1.abs(), gamma, xi)
    }

    /// Δ_{u,v}(ψ)(ξ) including the cone indicator; the vertical cone uses ψν.
    pub fn delta(&self, params: &SystemParams, x1: f64, x2: f64) -> f64 {
        if !params.cone.contains(x1, x2) {
            return 0.0;
        }
        match params.cone.orientation {
            Orientation::Horizontal => self.delta_horizontal(params.gamma, params.xi, x1, x2),
            Orientation::Vertical => self.delta_horizontal(params.gamma, params.xi, x2, x1),
        }
    }

    /// Mass lost to the truncations a > Γ and |s| > Ξ at ξ, each measured alone.
    pub fn tails(&self, params: &SystemParams, x1: f64, x2: f64) -> (f64, f64) {
        let (y1, y2) = match params.cone.orientation {
            Orientation::Horizontal => (x1, x2),
            Orientation::Vertical => (x2, x1),
        };
        let c = self.c_total;
        (
            (c - self.delta_horizontal(params.gamma, f64::INFINITY, y1, y2)).max(0.0),
            (c - self.delta_horizontal(f64::INFINITY, params.xi, y1, y2)).max(0.0),
        )
    }
}

fn check_moments(spec: &ShearletSpec) -> Result<()> {
    if spec.declared_moments == Some(0) {
        return Err(Error::invalid(format!(
            "{} has no vanishing moment and cannot generate a frame",
            spec.label
        )));
    }
    Ok(())
}

/// Δ_{u,v}(ψ) at each node; nodes outside the cone get 0.
pub fn compute_delta(spec: &ShearletSpec, params: &SystemParams, nodes: &[[f64; 2]]) -> Vec<f64> {
    let t = DeltaTable::new(spec);
    nodes.par_iter().map(|p| t.delta(params, p[0], p[1])).collect()
}

/// Δ on the centered frequency nodes of a grid, in spectrum layout.
pub fn delta_on_grid(table: &DeltaTable, params: &SystemParams, meta: &GridMeta) -> Vec<f64> {
    let fg = meta.frequency_grid();
    (0..meta.len())
        .into_par_iter()
        .map(|k| {
            let [a, b] = fg.node(k / meta.n2, k % meta.n2);
            table.delta(params, a, b)
        })
        .collect()
}

/// Σ_i Σ_j w_a w_s a^{−3/2} (|ψ̂(aξ1, √a(ξ2 − sξ1))|² + |ψ̂(−aξ1, −√a(ξ2 − sξ1))|²).
///
/// This is the multiplier realized by [`crate::xform::coefficient_energy`] with both signs.
pub fn discrete_delta(spec: &ShearletSpec, a_grid: &[f64], s_grid: &[f64], xi: [f64; 2]) -> f64 {
    let wa = scale_weights(a_grid);
    let ws = trapezoid_weights(s_grid);
    let mut acc = 0.0;
    for (i, &a) in a_grid.iter().enumerate() {
        let ra = a.sqrt();
        let mut row = 0.0;
        for (j, &s) in s_grid.iter().enumerate() {
            let e1 = a * xi[0];
            let e2 = ra * (xi[1] - s * xi[0]);
            row += ws[j] * (spec.psi_hat_sq(e1, e2) + spec.psi_hat_sq(-e1, -e2));
        }
        acc += wa[i] * row / (a * ra);
    }
    acc
}

/// Sampling of the cone used by [`frame_bounds`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameSampling {
    /// |ξ1| runs over [u, 2^octaves u] log-spaced.
    pub octaves: u32,
    pub per_octave: usize,
    /// Extra linear nodes across [u, 2u].
    pub ring: usize,
    /// Slopes ξ2/ξ1 step v / slope_steps.
    pub slope_steps: usize,
    /// Keep only samples with |slope| ≤ this fraction of v.
    pub max_slope_fraction: f64,
}

impl Default for FrameSampling {
    fn default() -> Self {
        FrameSampling { octaves: 6, per_octave: 8, ring: 8, slope_steps: 32, max_slope_fraction: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaSample {
    pub xi: [f64; 2],
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameReport {
    pub label: String,
    pub params: SystemParams,
    pub c_psi: f64,
    pub a_bound: f64,
    pub b_bound: f64,
    #[serde(with = "crate::io::ext_f64")]
    pub ratio: f64,
    pub is_frame: bool,
    pub verdict: String,
    pub argmin: [f64; 2],
    pub argmax: [f64; 2],
    pub delta_grid: Vec<DeltaSample>,
}

fn cone_samples(cone: &ConeSpec, r: &FrameSampling) -> Result<Vec<[f64; 2]>> {
    if !(cone.u > 0.0) || cone.v.is_infinite() {
        return Err(Error::invalid("frame bounds need a cone with u > 0 and finite v"));
    }
    if r.per_octave == 0 || r.slope_steps == 0 {
        return Err(Error::invalid("sampling resolution must be positive"));
    }
    let n = r.octaves as usize * r.per_octave;
    let mut radii: Vec<f64> = (0..=n).map(|k| cone.u * 2f64.powf(k as f64 / r.per_octave as f64)).collect();
    radii.extend((1..r.ring).map(|k| cone.u * (1.0 + k as f64 / r.ring as f64)));
    radii.sort_by(f64::total_cmp);
    let mut out = Vec::new();
    for &x in &radii {
        for k in -(r.slope_steps as i64)..=(r.slope_steps as i64) {
            let frac = k as f64 / r.slope_steps as f64;
            if frac.abs() > r.max_slope_fraction + 1e-12 {
                continue;
            }
            let m = frac * cone.v;
            for sgn in [1.0, -1.0] {
                let (a, b) = (sgn * x, sgn * x * m);
                out.push(match cone.orientation {
                    Orientation::Horizontal => [a, b],
                    Orientation::Vertical => [b, a],
                });
            }
        }
    }
    Ok(out)
}

/// Lower bound below which a system is not reported as a frame.
pub const FRAME_FLOOR: f64 = 1e-12;

pub fn frame_bounds(spec: &ShearletSpec, params: &SystemParams, resolution: &FrameSampling) -> Result<FrameReport> {
    check_moments(spec)?;
    let nodes = cone_samples(&params.cone, resolution)?;
    let table = DeltaTable::new(spec);
    let deltas: Vec<f64> = nodes
        .par_iter()
        .map(|p| match params.cone.orientation {
            Orientation::Horizontal => table.delta_horizontal(params.gamma, params.xi, p[0], p[1]),
            Orientation::Vertical => table.delta_horizontal(params.gamma, params.xi, p[1], p[0]),
        })
        .collect();
    let (mut imin, mut imax) = (0, 0);
    for (i, d) in deltas.iter().enumerate() {
        if *d < deltas[imin] {
            imin = i;
        }
        if *d > deltas[imax] {
            imax = i;
        }
    }
    let (a, b) = (deltas[imin], deltas[imax]);
    let is_frame = a >= FRAME_FLOOR;
    Ok(FrameReport {
        label: spec.label.clone(),
        params: *params,
        c_psi: table.c_psi(),
        a_bound: a,
        b_bound: b,
        ratio: if a > 0.0 { b / a } else { f64::INFINITY },
        is_frame,
        verdict: if is_frame { "frame".into() } else { "not a frame at this truncation".into() },
        argmin: nodes[imin],
        argmax: nodes[imax],
        delta_grid: nodes.iter().zip(&deltas).map(|(x, d)| DeltaSample { xi: *x, delta: *d }).collect(),
    })
}

/// Doublings allowed before [`select_truncation`] gives up.
pub const MAX_DOUBLINGS: usize = 20;

/// Doubles Γ and Ξ from (1, 2v) until both truncation tails are below ν·C_ψ/2 at every probe node.
pub fn select_truncation(spec: &ShearletSpec, cone: &ConeSpec, slack: f64) -> Result<SystemParams> {
    check_moments(spec)?;
    if !(slack > 0.0 && slack < 1.0) {
        return Err(Error::invalid(format!("slack {slack} must lie in (0, 1); zero slack cannot terminate")));
    }
    let nodes = cone_samples(cone, &FrameSampling::default())?;
    let table = DeltaTable::new(spec);
    let budget = 0.5 * slack * table.c_psi();
    let mut p = SystemParams::new(1.0, 2.0 * cone.v, *cone)?;
    for _ in 0..=MAX_DOUBLINGS {
        let (ta, ts) = nodes
            .par_iter()
            .map(|x| table.tails(&p, x[0], x[1]))
            .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
        if ta <= budget && ts <= budget {
            return Ok(p);
        }
        if ta > budget {
            p.gamma *= 2.0;
        }
        if ts > budget {
            p.xi *= 2.0;
        }
    }
    Err(Error::numerical(format!(
        "truncation for {} did not converge within {MAX_DOUBLINGS} doublings (reached gamma = {}, xi = {})",
        spec.label, p.gamma, p.xi
    )))
}

/// |Ŵ(ξ)|² on the frequency nodes of a grid, in spectrum layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub label: String,
    /// `"tight"`, `"tight-unclamped"` or `"bounds-box"`.
    pub provenance: String,
    pub params: Option<SystemParams>,
    pub c_psi: f64,
    pub max_clamp: f64,
    pub meta: GridMeta,
    #[serde(skip)]
    pub w_hat_sq: Vec<f64>,
}

impl WindowSpec {
    /// The payload as a real field in spectrum layout, for SF2D storage.
    pub fn payload(&self) -> SampledField2D {
        SampledField2D::from_real(self.meta, self.w_hat_sq.clone()).expect("window matches its grid")
    }

    pub fn with_payload(mut self, payload: &SampledField2D) -> Result<Self> {
        if !payload.meta.same_grid(&self.meta) {
            return Err(Error::Format("window payload grid differs from its header".into()));
        }
        self.w_hat_sq = payload.values.iter().map(|v| v.re).collect();
        Ok(self)
    }
}

/// Clamped magnitude above which the Δ quadrature is considered inconsistent.
pub const CLAMP_TOLERANCE: f64 = 1e-3;

fn tight_window(spec: &ShearletSpec, params: &SystemParams, meta: &GridMeta, clamp: bool) -> Result<WindowSpec> {
    check_moments(spec)?;
    if !(params.xi > params.cone.v) {
        return Err(Error::invalid(format!(
            "tight window needs xi > v (got xi = {}, v = {})",
            params.xi, params.cone.v
        )));
    }
    let table = DeltaTable::new(spec);
    let c = table.c_psi();
    let delta = delta_on_grid(&table, params, meta);
    let fg = meta.frequency_grid();
    let mut max_clamp = 0.0f64;
    let w: Vec<f64> = delta
        .iter()
        .enumerate()
        .map(|(k, d)| {
            let [a, b] = fg.node(k / meta.n2, k % meta.n2);
            if !params.cone.contains(a, b) {
                return 0.0;
            }
            let r = c - d;
            if r < 0.0 {
                max_clamp = max_clamp.max(-r);
                if clamp {
                    return 0.0;
                }
            }
            r
        })
        .collect();
    if max_clamp > CLAMP_TOLERANCE * c {
        return Err(Error::numerical(format!(
            "delta exceeds C_psi by {max_clamp:.3e} (C_psi = {c:.6e}); the quadrature is inconsistent"
        )));
    }
    Ok(WindowSpec {
        label: spec.label.clone(),
        provenance: if clamp { "tight".into() } else { "tight-unclamped".into() },
        params: Some(*params),
        c_psi: c,
        max_clamp,
        meta: *meta,
        w_hat_sq: w,
    })
}

/// |Ŵ|² = max(0, C_ψ χ_cone − Δ) on the grid's frequency nodes.
pub fn synthesize_tight_window(spec: &ShearletSpec, params: &SystemParams, meta: &GridMeta) -> Result<WindowSpec> {
    tight_window(spec, params, meta, true)
}

/// As [`synthesize_tight_window`] but without clamping negative values.
pub fn synthesize_exact_window(spec: &ShearletSpec, params: &SystemParams, meta: &GridMeta) -> Result<WindowSpec> {
    tight_window(spec, params, meta, false)
}

/// |Ŵ(ξ)|² = C_ψ e^{−π|ξ|²}, bounded between C_ψ e^{−2π} and C_ψ on [−1, 1]².
pub fn gaussian_window(spec: &ShearletSpec, meta: &GridMeta) -> WindowSpec {
    let c = DeltaTable::new(spec).c_psi();
    let fg = meta.frequency_grid();
    let w = (0..meta.len())
        .map(|k| {
            let [a, b] = fg.node(k / meta.n2, k % meta.n2);
            c * (-std::f64::consts::PI * (a * a + b * b)).exp()
        })
        .collect();
    WindowSpec {
        label: "gaussian-window".into(),
        provenance: "bounds-box".into(),
        params: None,
        c_psi: c,
        max_clamp: 0.0,
        meta: *meta,
        w_hat_sq: w,
    }
}

pub fn zero_window(spec: &ShearletSpec, meta: &GridMeta) -> WindowSpec {
    WindowSpec {
        label: "zero-window".into(),
        provenance: "bounds-box".into(),
        params: None,
        c_psi: DeltaTable::new(spec).c_psi(),
        max_clamp: 0.0,
        meta: *meta,
        w_hat_sq: vec![0.0; meta.len()],
    }
}

fn check_window(window: &WindowSpec, meta: &GridMeta) -> Result<()> {
    if !window.meta.same_grid(meta) || window.w_hat_sq.len() != meta.len() {
        return Err(Error::invalid("window was synthesized on a different grid than the field"));
    }
    Ok(())
}

/// (1/C_ψ)(|Ŵ|² + Δ)·P_C f̂, with the field projected onto the cone first.
pub fn reconstruct_cone(
    f_cone: &SampledField2D,
    spec: &ShearletSpec,
    params: &SystemParams,
    window: &WindowSpec,
) -> Result<SampledField2D> {
    check_window(window, &f_cone.meta)?;
    let table = DeltaTable::new(spec);
    let c = table.c_psi();
    let delta = delta_on_grid(&table, params, &f_cone.meta);
    let projected = cone_project(f_cone, &params.cone)?;
    let mut s = dft_forward(&projected)?;
    for (k, v) in s.values.iter_mut().enumerate() {
        *v *= (window.w_hat_sq[k] + delta[k]) / c;
    }
    Ok(dft_inverse(&s)?.with_dtype_of(f_cone.dtype))
}

/// Ω below which the full-plane multiplier is treated as singular.
pub const OMEGA_FLOOR: f64 = 1e-12;

/// Ω(ξ) = Δ_{0,∞}(ψ)(ξ) + Δ_{0,∞}(ψν)(ξ) + |Ŵ(ξ)|² for the untruncated system.
pub fn omega_multiplier(spec: &ShearletSpec, window: &WindowSpec) -> Vec<f64> {
    let table = DeltaTable::new(spec);
    let meta = window.meta;
    let fg = meta.frequency_grid();
    let p = SystemParams::untruncated_plane();
    (0..meta.len())
        .into_par_iter()
        .map(|k| {
            let [a, b] = fg.node(k / meta.n2, k % meta.n2);
            table.delta(&p, a, b) + table.delta(&p, b, a) + window.w_hat_sq[k]
        })
        .collect()
}

/// Inverts the full-plane frame operator: f̂_rec = Ω^{−1}·(analysis multipliers)·f̂.
pub fn reconstruct_full(f: &SampledField2D, spec: &ShearletSpec, window: &WindowSpec) -> Result<SampledField2D> {
    check_window(window, &f.meta)?;
    let meta = f.meta;
    let table = DeltaTable::new(spec);
    let fg = meta.frequency_grid();
    let p = SystemParams::untruncated_plane();
    let d1: Vec<f64> = (0..meta.len())
        .into_par_iter()
        .map(|k| {
            let [a, b] = fg.node(k / meta.n2, k % meta.n2);
            table.delta(&p, a, b)
        })
        .collect();
    let d2: Vec<f64> = (0..meta.len())
        .into_par_iter()
        .map(|k| {
            let [a, b] = fg.node(k / meta.n2, k % meta.n2);
            table.delta(&p, b, a)
        })
        .collect();
    let omega = omega_multiplier(spec, window);
    let bad: Vec<[f64; 2]> = omega
        .iter()
        .enumerate()
        .filter(|(_, o)| **o < OMEGA_FLOOR)
        .map(|(k, _)| fg.node(k / meta.n2, k % meta.n2))
        .collect();
    if !bad.is_empty() {
        let list: Vec<String> = bad.iter().take(10).map(|x| format!("({}, {})", x[0], x[1])).collect();
        return Err(Error::numerical(format!(
            "frame multiplier vanishes at {} frequency node(s), e.g. {}",
            bad.len(),
            list.join(", ")
        )));
    }
    let mut s = dft_forward(f)?;
    for (k, v) in s.values.iter_mut().enumerate() {
        let analysis = d1[k] + d2[k] + window.w_hat_sq[k];
        *v *= analysis / omega[k];
    }
    Ok(dft_inverse(&s)?.with_dtype_of(f.dtype))
}

/// Multiplier of the three-branch system: |Ŵ|² + Δ(ψ)χ_C + Δ(ψν)χ_Cν with u = v = 1 outside [−1, 1]².
pub fn three_branch_multiplier(spec: &ShearletSpec, gamma: f64, xi: f64, window: &WindowSpec) -> Result<Vec<f64>> {
    let table = DeltaTable::new(spec);
    let meta = window.meta;
    let fg = meta.frequency_grid();
    let h = SystemParams::new(gamma, xi, ConeSpec::new(1.0, 1.0, Orientation::Horizontal)?)?;
    let v = SystemParams::new(gamma, xi, ConeSpec::new(1.0, 1.0, Orientation::Vertical)?)?;
    Ok((0..meta.len())
        .into_par_iter()
        .map(|k| {
            let [a, b] = fg.node(k / meta.n2, k % meta.n2);
            let cones = if in_lowpass_square(a, b) { 0.0 } else { table.delta(&h, a, b) + table.delta(&v, a, b) };
            window.w_hat_sq[k] + cones
        })
        .collect())
}

/// Σ_ξ |f̂|² m(ξ) Δξ² for a multiplier in spectrum layout.
pub fn multiplier_energy(f: &SampledField2D, m: &[f64]) -> Result<f64> {
    let s = dft_forward(f)?;
    let cell = f.meta.freq_cell();
    Ok(s.values.iter().zip(m).map(|(v, w)| v.norm_sqr() * w).sum::<f64>() * cell)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::*;
    use num_complex::Complex64;

    fn cone11() -> ConeSpec {
        ConeSpec::horizontal(1.0, 1.0).unwrap()
    }

    #[test]
    fn table_constant_matches_closed_form() {
        let t = DeltaTable::new(&make_dog_generator(1).unwrap());
        let exact = 2.0 * std::f64::consts::PI.powi(2);
        assert!((t.c_psi() - exact).abs() / exact < 1e-4, "{}", t.c_psi());
    }

    #[test]
    fn untruncated_delta_is_constant() {
        let spec = make_dog_generator(2).unwrap();
        let p = SystemParams::new(4096.0, 1024.0, ConeSpec::horizontal(0.0, f64::INFINITY).unwrap()).unwrap();
        let t = DeltaTable::new(&spec);
        for x in [[1.0, 0.0], [2.0, 1.0], [-4.0, 2.0]] {
            let d = t.delta(&p, x[0], x[1]);
            assert!((d - t.c_psi()).abs() / t.c_psi() < 0.02, "{x:?}: {d}");
        }
    }

    #[test]
    fn outside_cone_is_zero_and_monotone_inside() {
        let spec = make_dog_generator(2).unwrap();
        let p = SystemParams::new(1.0, 2.0, cone11()).unwrap();
        let d = compute_delta(&spec, &p, &[[0.5, 0.0], [2.0, 3.0], [2.0, 1.0]]);
        assert_eq!(d[0], 0.0);
        assert_eq!(d[1], 0.0);
        assert!(d[2] > 0.0);
        let t = DeltaTable::new(&spec);
        let mut last = 0.0;
        for g in [0.25, 0.5, 1.0, 2.0, 4.0] {
            let v = t.delta(&SystemParams::new(g, 2.0, cone11()).unwrap(), 2.0, 1.0);
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn zero_generator_has_zero_delta() {
        let z = ShearletSpec::custom("zero", Some(1), [2.0, 2.0], |_, _| Complex64::new(0.0, 0.0));
        let p = SystemParams::new(1.0, 2.0, cone11()).unwrap();
        assert!(compute_delta(&z, &p, &[[1.5, 0.2], [3.0, -1.0]]).iter().all(|d| *d == 0.0));
    }

    #[test]
    fn discrete_delta_agrees_with_table() {
        let spec = make_dog_generator(2).unwrap();
        let p = SystemParams::new(1.0, 2.0, cone11()).unwrap();
        let a = crate::xform::log_scale_grid(1.0 / 4096.0, 1.0, 16).unwrap();
        let s = crate::xform::uniform_shear_grid(2.0, 1.0 / 64.0).unwrap();
        let t = DeltaTable::new(&spec);
        for x in [[1.5, 0.5], [3.0, -2.0], [-2.0, 1.0]] {
            let d = discrete_delta(&spec, &a, &s, x);
            let e = t.delta(&p, x[0], x[1]);
            assert!((d - e).abs() / e < 0.02, "{x:?}: {d} vs {e}");
        }
    }

    #[test]
    fn gaussian_generator_is_excluded() {
        let p = SystemParams::new(1.0, 2.0, cone11()).unwrap();
        assert!(frame_bounds(&make_gaussian_generator(), &p, &FrameSampling::default()).is_err());
        assert!(select_truncation(&make_dog_generator(2).unwrap(), &cone11(), 0.0).is_err());
    }

    #[test]
    fn classical_truncation_with_compact_support() {
        let spec = make_classical_cone_generator();
        let p = select_truncation(&spec, &ConeSpec::horizontal(2.0, 1.0).unwrap(), 0.1).unwrap();
        assert_eq!((p.gamma, p.xi), (1.0, 2.0));
        let p = select_truncation(&spec, &cone11(), 0.1).unwrap();
        assert_eq!((p.gamma, p.xi), (2.0, 2.0));
    }

    #[test]
    fn tight_window_vanishes_outside_cone() {
        let spec = make_dog_generator(2).unwrap();
        let meta = GridMeta::centered(32, 32, 1.0 / 8.0).unwrap();
        let p = SystemParams::new(1.0, 2.0, cone11()).unwrap();
        let w = synthesize_tight_window(&spec, &p, &meta).unwrap();
        let fg = meta.frequency_grid();
        for k in 0..meta.len() {
            let [a, b] = fg.node(k / 32, k % 32);
            if !p.cone.contains(a, b) {
                assert_eq!(w.w_hat_sq[k], 0.0);
            }
            assert!(w.w_hat_sq[k] >= 0.0);
        }
        let bad = SystemParams::new(1.0, 1.0, cone11()).unwrap();
        assert!(synthesize_tight_window(&spec, &bad, &meta).is_err());
    }
}
