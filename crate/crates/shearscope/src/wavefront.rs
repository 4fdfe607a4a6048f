//! Decay exponents of coefficient magnitudes in scale, the exponent budgets
//! behind them, and two-chart wavefront maps.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::admissibility::loglog_slope;
use crate::error::{Error, Result};
use crate::generators::ShearletSpec;
use crate::grid::SampledField2D;
use crate::io::{write_csv, write_pgm};
use crate::xform::{dual_cone_transform_strided, shearlet_transform_strided, Chart, CoeffVolume};

/// Fewest scales a slope is fitted on.
pub const MIN_FIT_SCALES: usize = 6;

/// Default noise floor relative to the largest coefficient of a volume.
pub const DEFAULT_FLOOR: f64 = 1e-12;

pub const DEFAULT_THRESHOLD: f64 = 2.0;

/// Exponent k of |SH| ≈ C·a^k, or decay beyond what the volume resolves.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SlopeFit {
    Fitted { k: f64, r2: f64 },
    AtFloor,
}

impl SlopeFit {
    /// At-floor counts as faster than any threshold.
    pub fn exceeds(&self, threshold: f64) -> bool {
        match self {
            SlopeFit::Fitted { k, .. } => *k >= threshold,
            SlopeFit::AtFloor => true,
        }
    }

    pub fn slope(&self) -> f64 {
        match self {
            SlopeFit::Fitted { k, .. } => *k,
            SlopeFit::AtFloor => f64::INFINITY,
        }
    }
}

fn fit_indices(vol: &CoeffVolume, range: [f64; 2]) -> Result<Vec<usize>> {
    let idx: Vec<usize> = (0..vol.a_grid.len())
        .filter(|&i| vol.a_grid[i] >= range[0] * (1.0 - 1e-12) && vol.a_grid[i] <= range[1] * (1.0 + 1e-12))
        .collect();
    if idx.len() < MIN_FIT_SCALES {
        return Err(Error::invalid(format!(
            "fit range [{}, {}] holds {} scales; at least {MIN_FIT_SCALES} are needed",
            range[0],
            range[1],
            idx.len()
        )));
    }
    Ok(idx)
}

fn fit_at(vol: &CoeffVolume, idx: &[usize], q: usize, j: usize, floor: f64) -> SlopeFit {
    let n = vol.plane_len();
    let ns = vol.s_grid.len();
    let mut x = Vec::with_capacity(idx.len());
    let mut y = Vec::with_capacity(idx.len());
    for &i in idx {
        let v = vol.coeffs[(i * ns + j) * n + q].norm();
        if v > floor {
            x.push(vol.a_grid[i]);
            y.push(v);
        }
    }
    if x.len() < MIN_FIT_SCALES {
        return SlopeFit::AtFloor;
    }
    let k = loglog_slope(&x, &y);
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / lx.len() as f64;
    let my = ly.iter().sum::<f64>() / ly.len() as f64;
    let b = my - k * mx;
    let ss_res: f64 = lx.iter().zip(&ly).map(|(a, c)| (c - (k * a + b)).powi(2)).sum();
    let ss_tot: f64 = ly.iter().map(|c| (c - my).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    SlopeFit::Fitted { k, r2 }
}

/// Least-squares slope of log|SH| against log a at one (t, s) node.
///
/// `t` is a node of the strided translation grid, `floor` an absolute magnitude.
pub fn decay_slope(vol: &CoeffVolume, t: (usize, usize), s: usize, range: [f64; 2], floor: f64) -> Result<SlopeFit> {
    let (t1, t2) = vol.t_dims();
    if t.0 >= t1 || t.1 >= t2 || s >= vol.s_grid.len() {
        return Err(Error::invalid("node outside the coefficient volume"));
    }
    let idx = fit_indices(vol, range)?;
    Ok(fit_at(vol, &idx, t.0 * t2 + t.1, s, floor))
}

/// Slopes at every (t, s) node of a volume.
#[derive(Clone, Debug)]
pub struct DecayReport {
    pub t_dims: (usize, usize),
    pub s_grid: Vec<f64>,
    /// Index `q * s_grid.len() + j` with q the row-major strided t index.
    pub fits: Vec<SlopeFit>,
    pub a_fit_range: [f64; 2],
    pub floor: f64,
}

impl DecayReport {
    pub fn fit(&self, q: usize, j: usize) -> SlopeFit {
        self.fits[q * self.s_grid.len() + j]
    }
}

/// `floor_rel` is relative to the largest magnitude in the volume.
pub fn decay_report(vol: &CoeffVolume, range: [f64; 2], floor_rel: f64) -> Result<DecayReport> {
    let idx = fit_indices(vol, range)?;
    let floor = floor_rel * vol.max_abs();
    let ns = vol.s_grid.len();
    let n = vol.plane_len();
    let fits = (0..n * ns).into_par_iter().map(|k| fit_at(vol, &idx, k / ns, k % ns, floor)).collect();
    Ok(DecayReport { t_dims: vol.t_dims(), s_grid: vol.s_grid.clone(), fits, a_fit_range: range, floor })
}

/// Smoothness and moment orders entering the decay estimates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectedExponentBudget {
    /// Fixed α in (1/2, 1); searched over a grid when unset.
    pub alpha: Option<f64>,
    #[serde(with = "crate::io::ext_f64")]
    pub m: f64,
    #[serde(with = "crate::io::ext_f64")]
    pub n: f64,
    #[serde(with = "crate::io::ext_f64")]
    pub l: f64,
    #[serde(with = "crate::io::ext_f64")]
    pub p: f64,
    #[serde(with = "crate::io::ext_f64")]
    pub k: f64,
    #[serde(with = "crate::io::ext_f64")]
    pub l1: f64,
    #[serde(with = "crate::io::ext_f64")]
    pub l2: f64,
}

impl ExpectedExponentBudget {
    pub fn all_infinite(k: f64) -> Self {
        let inf = f64::INFINITY;
        ExpectedExponentBudget { alpha: None, m: inf, n: inf, l: inf, p: inf, k, l1: inf, l2: inf }
    }

    fn alphas(&self) -> Result<Vec<f64>> {
        match self.alpha {
            Some(a) if a > 0.5 && a < 1.0 => Ok(vec![a]),
            Some(a) => Err(Error::invalid(format!("alpha = {a} must lie strictly between 1/2 and 1"))),
            None => Ok(alpha_grid()),
        }
    }
}

/// α = 1/2 + i/200 for i = 1, …, 99.
pub fn alpha_grid() -> Vec<f64> {
    (1..=99).map(|i| 0.5 + i as f64 / 200.0).collect()
}

/// min(−3/4 + P/2, (1−α)M, −3/4 + αN, (α−1/2)L), maximized over α.
pub fn expected_direct_exponent(b: &ExpectedExponentBudget) -> Result<f64> {
    let best = b
        .alphas()?
        .into_iter()
        .map(|a| {
            [-0.75 + b.p / 2.0, (1.0 - a) * b.m, -0.75 + a * b.n, (a - 0.5) * b.l]
                .into_iter()
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InverseBudget {
    /// Every N strictly below this bound is certified.
    #[serde(with = "crate::io::ext_f64")]
    pub n_sup: f64,
    pub alpha: f64,
    /// Whether N = 0 is certified.
    pub certified: bool,
}

/// Supremum of N with N + 2 < min(K − 3/4, (1−α)(M+N) − 3/4, (α−1/2)L − 3/4, 2(L2−M+1), 2(L1+1)).
///
/// The middle constraint is linear in N and is solved as αN < (1−α)M − 11/4.
pub fn expected_inverse_budget(b: &ExpectedExponentBudget) -> Result<InverseBudget> {
    let moment_gap = if b.l2.is_infinite() && b.l2 > 0.0 { f64::INFINITY } else { 2.0 * (b.l2 - b.m + 1.0) - 2.0 };
    let mut best = InverseBudget { n_sup: f64::NEG_INFINITY, alpha: f64::NAN, certified: false };
    for a in b.alphas()? {
        let n = [
            b.k - 2.75,
            ((1.0 - a) * b.m - 2.75) / a,
            (a - 0.5) * b.l - 2.75,
            moment_gap,
            2.0 * b.l1,
        ]
        .into_iter()
        .fold(f64::INFINITY, f64::min);
        if n > best.n_sup {
            best = InverseBudget { n_sup: n, alpha: a, certified: n > 0.0 };
        }
    }
    Ok(best)
}

/// Scales, shears and fit settings of a wavefront run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WavefrontGrids {
    pub a_grid: Vec<f64>,
    pub s_grid: Vec<f64>,
    pub t_stride: usize,
    pub fit_range: [f64; 2],
    pub floor_rel: f64,
}

/// One chart of the map: node (t, s) is in D when every node of its 3×3×3 box decays at least at the threshold.
#[derive(Clone, Debug)]
pub struct ChartMap {
    pub chart: Chart,
    pub report: DecayReport,
    pub in_d: Vec<bool>,
    /// Shear nodes owned by this chart; |s| = 1 belongs to D1 only.
    pub owned: Vec<bool>,
}

#[derive(Clone, Debug)]
pub struct WavefrontMap {
    pub threshold_k: f64,
    pub t_nodes: Vec<[f64; 2]>,
    pub d1: ChartMap,
    pub d2: ChartMap,
}

/// A detected (non-D) node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Detection {
    pub t: [f64; 2],
    /// Shear s in D1, or the inverse-slope parameter in D2.
    pub s: f64,
    pub chart: Chart,
}

fn uniform_mask(report: &DecayReport, threshold: f64) -> Vec<bool> {
    let (t1, t2) = report.t_dims;
    let ns = report.s_grid.len();
    let ok: Vec<bool> = report.fits.iter().map(|f| f.exceeds(threshold)).collect();
    (0..t1 * t2 * ns)
        .into_par_iter()
        .map(|k| {
            let (q, j) = (k / ns, k % ns);
            let (q1, q2) = ((q / t2) as i64, (q % t2) as i64);
            for d1 in -1..=1i64 {
                for d2 in -1..=1i64 {
                    let (r1, r2) = (q1 + d1, q2 + d2);
                    if r1 < 0 || r2 < 0 || r1 >= t1 as i64 || r2 >= t2 as i64 {
                        continue;
                    }
                    let r = r1 as usize * t2 + r2 as usize;
                    for dj in -1..=1i64 {
                        let jj = j as i64 + dj;
                        if jj < 0 || jj >= ns as i64 {
                            continue;
                        }
                        if !ok[r * ns + jj as usize] {
                            return false;
                        }
                    }
                }
            }
            true
        })
        .collect()
}

impl WavefrontMap {
    fn charts(&self) -> [&ChartMap; 2] {
        [&self.d1, &self.d2]
    }

    /// Nodes outside D, in both charts.
    pub fn detections(&self) -> Vec<Detection> {
        let mut out = Vec::new();
        for c in self.charts() {
            let ns = c.report.s_grid.len();
            for (k, inside) in c.in_d.iter().enumerate() {
                let j = k % ns;
                if c.owned[j] && !inside {
                    out.push(Detection { t: self.t_nodes[k / ns], s: c.report.s_grid[j], chart: c.chart });
                }
            }
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut rows = Vec::new();
        for c in self.charts() {
            let ns = c.report.s_grid.len();
            let tag = match c.chart {
                Chart::Horizontal => "D1",
                Chart::Vertical => "D2",
            };
            for (k, fit) in c.report.fits.iter().enumerate() {
                let j = k % ns;
                if !c.owned[j] {
                    continue;
                }
                let t = self.t_nodes[k / ns];
                let (slope, r2) = match fit {
                    SlopeFit::Fitted { k, r2 } => (format!("{k}"), format!("{r2}")),
                    SlopeFit::AtFloor => ("at-floor".to_string(), String::new()),
                };
                rows.push(vec![
                    format!("{}", t[0]),
                    format!("{}", t[1]),
                    format!("{}", c.report.s_grid[j]),
                    slope,
                    r2,
                    (if c.in_d[k] { "1" } else { "0" }).to_string(),
                    tag.to_string(),
                ]);
            }
        }
        write_csv(path, &["t1", "t2", "s", "slope", "r2", "in_D", "chart"], rows)
    }

    /// Smallest slope over both charts at each translation node.
    pub fn min_slope_image(&self) -> Vec<f64> {
        let n = self.t_nodes.len();
        (0..n)
            .map(|q| {
                let mut m = f64::INFINITY;
                for c in self.charts() {
                    let ns = c.report.s_grid.len();
                    for j in 0..ns {
                        if c.owned[j] {
                            m = m.min(c.report.fit(q, j).slope());
                        }
                    }
                }
                m
            })
            .collect()
    }

    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        let (t1, t2) = self.d1.report.t_dims;
        write_pgm(path, t2, t1, &self.min_slope_image(), -1.0, self.threshold_k + 2.0)
    }
}

/// Runs both charts and marks the nodes whose decay is uniformly fast.
pub fn wavefront_map(f: &SampledField2D, spec: &ShearletSpec, grids: &WavefrontGrids, threshold_k: f64) -> Result<WavefrontMap> {
    if !(threshold_k > 0.0) {
        return Err(Error::invalid(format!("threshold_k = {threshold_k} must be positive")));
    }
    let s = &grids.s_grid;
    if s.is_empty() || s[0] > -1.0 || s[s.len() - 1] < 1.0 {
        return Err(Error::invalid("the shear grid must cover [-1, 1]"));
    }
    let v1 = shearlet_transform_strided(f, spec, &grids.a_grid, s, grids.t_stride)?;
    let v2 = dual_cone_transform_strided(f, spec, &grids.a_grid, s, grids.t_stride)?;
    let build = |vol: &CoeffVolume, chart: Chart| -> Result<ChartMap> {
        let report = decay_report(vol, grids.fit_range, grids.floor_rel)?;
        let in_d = uniform_mask(&report, threshold_k);
        let owned = s
            .iter()
            .map(|v| match chart {
                Chart::Horizontal => v.abs() <= 1.0,
                Chart::Vertical => v.abs() < 1.0,
            })
            .collect();
        Ok(ChartMap { chart, report, in_d, owned })
    };
    let (t1, t2) = v1.t_dims();
    let t_nodes = (0..t1 * t2).map(|q| v1.t_node(q / t2, q % t2)).collect();
    Ok(WavefrontMap {
        threshold_k,
        t_nodes,
        d1: build(&v1, Chart::Horizontal)?,
        d2: build(&v2, Chart::Vertical)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_exponent_examples() {
        let inf = f64::INFINITY;
        let b = ExpectedExponentBudget::all_infinite(inf);
        assert!(expected_direct_exponent(&b).unwrap().is_infinite());
        let b = ExpectedExponentBudget { alpha: Some(0.75), m: 2.0, ..b };
        assert_eq!(expected_direct_exponent(&b).unwrap(), 0.5);
        let b = ExpectedExponentBudget { alpha: None, n: 0.0, ..ExpectedExponentBudget::all_infinite(inf) };
        assert!(expected_direct_exponent(&b).unwrap() <= -0.75);
        let b = ExpectedExponentBudget { alpha: Some(0.5), ..b };
        assert!(expected_direct_exponent(&b).is_err());
    }

    #[test]
    fn inverse_budget_examples() {
        let r = expected_inverse_budget(&ExpectedExponentBudget::all_infinite(6.0)).unwrap();
        assert_eq!(r.n_sup, 6.0 - 11.0 / 4.0);
        assert!(r.certified);
        let r = expected_inverse_budget(&ExpectedExponentBudget::all_infinite(2.75)).unwrap();
        assert!(!r.certified);
    }

    #[test]
    fn slope_fit_verdicts() {
        assert!(SlopeFit::AtFloor.exceeds(100.0));
        assert!(!SlopeFit::Fitted { k: 1.0, r2: 1.0 }.exceeds(2.0));
    }
}
