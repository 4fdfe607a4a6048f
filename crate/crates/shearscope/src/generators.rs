//! Shearlet generators given by closed-form Fourier transforms.

use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{dft_inverse, GridMeta, SampledField2D, Spectrum2D};

/// Decay orders of the generator; `f64::INFINITY` marks super-polynomial decay.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayOrders {
    /// Decay of ψ̂ in ξ1.
    #[serde(with = "crate::io::ext_f64")]
    pub l1: f64,
    /// Decay of θ̂ in ξ2, where ψ̂ = ξ1^M θ̂.
    #[serde(with = "crate::io::ext_f64")]
    pub l2: f64,
    /// Decay of ψ̂ in ξ2.
    #[serde(with = "crate::io::ext_f64")]
    pub l: f64,
    #[serde(with = "crate::io::ext_f64")]
    pub tau: f64,
    #[serde(with = "crate::io::ext_f64")]
    pub mu: f64,
}

impl DecayOrders {
    pub const INFINITE: DecayOrders = DecayOrders {
        l1: f64::INFINITY,
        l2: f64::INFINITY,
        l: f64::INFINITY,
        tau: f64::INFINITY,
        mu: f64::INFINITY,
    };
}

type PsiFn = Arc<dyn Fn(f64, f64) -> Complex64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Dog(u32),
    AnalyticDog(u32),
    Classical,
    Tensor(u32),
    Gaussian,
    Custom(PsiFn),
}

/// A generator ψ, evaluated through its Fourier transform.
#[derive(Clone)]
pub struct ShearletSpec {
    pub label: String,
    /// Vanishing moments in x1; `None` stands for infinitely many.
    pub declared_moments: Option<u32>,
    pub declared_decay: DecayOrders,
    /// Half-widths `(E1, E2)` of a box outside which |ψ̂|² is negligible.
    pub extent: [f64; 2],
    kind: Kind,
    swapped: bool,
    reflected: bool,
}

impl fmt::Debug for ShearletSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ShearletSpec")
            .field("label", &self.label)
            .field("declared_moments", &self.declared_moments)
            .field("declared_decay", &self.declared_decay)
            .field("extent", &self.extent)
            .field("swapped", &self.swapped)
            .field("reflected", &self.reflected)
            .finish()
    }
}

/// Scale, shear and translation of one shearlet.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShearParams {
    pub a: f64,
    pub s: f64,
    pub t: [f64; 2],
}

impl ShearParams {
    pub fn new(a: f64, s: f64, t: [f64; 2]) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::invalid(format!("scale a = {a} must be finite and positive")));
        }
        if !(s.is_finite() && t[0].is_finite() && t[1].is_finite()) {
            return Err(Error::invalid("shear and translation must be finite"));
        }
        Ok(ShearParams { a, s, t })
    }
}

fn dog_extent(n: u32) -> [f64; 2] {
    [(n as f64 / (2.0 * PI)).sqrt() + 5.0, 5.0]
}

fn dog_value(n: u32, x1: f64, x2: f64) -> Complex64 {
    let r = (-PI * (x1 * x1 + x2 * x2)).exp();
    Complex64::new(0.0, -2.0 * PI * x1).powu(n) * r
}

/// ν(t) = t⁴(35 − 84t + 70t² − 20t³) on [0, 1], clamped outside.
pub fn meyer_nu(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t.powi(4) * (35.0 - 84.0 * t + 70.0 * t * t - 20.0 * t.powi(3))
}

/// Radial bump supported in [1/2, 2], even in its argument.
pub fn classical_psi1(x: f64) -> f64 {
    let x = x.abs();
    if (0.5..=1.0).contains(&x) {
        (PI / 2.0 * meyer_nu(2.0 * x - 1.0)).sin()
    } else if x > 1.0 && x <= 2.0 {
        (PI / 2.0 * meyer_nu(x - 1.0)).cos()
    } else {
        0.0
    }
}

fn bump(eta: f64) -> f64 {
    if eta.abs() < 1.0 {
        (-1.0 / (1.0 - eta * eta)).exp()
    } else {
        0.0
    }
}

fn classical_norm() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| {
        // the integrand vanishes to all orders at ±1, so the plain trapezoid sum converges fast
        let n = 20_000;
        let h = 2.0 / n as f64;
        let s: f64 = (1..n).map(|i| bump(-1.0 + i as f64 * h).powi(2)).sum::<f64>() * h;
        1.0 / s.sqrt()
    })
}

/// Angular bump supported in [−1, 1] with unit L² norm.
pub fn classical_psi2(eta: f64) -> f64 {
    classical_norm() * bump(eta)
}

impl ShearletSpec {
    /// ψ̂ at `(xi1, xi2)`.
    pub fn psi_hat(&self, xi1: f64, xi2: f64) -> Complex64 {
        let (mut x1, mut x2) = if self.swapped { (xi2, xi1) } else { (xi1, xi2) };
        if self.reflected {
            x1 = -x1;
            x2 = -x2;
        }
        match &self.kind {
            Kind::Dog(n) => dog_value(*n, x1, x2),
            Kind::AnalyticDog(n) => {
                if x1 > 0.0 {
                    dog_value(*n, x1, x2) * 2.0
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            Kind::Classical => {
                let p1 = classical_psi1(x1);
                if p1 == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(p1 * classical_psi2(x2 / x1), 0.0)
                }
            }
            Kind::Tensor(m) => {
                Complex64::new(0.0, -2.0 * PI * x1).powu(*m) * (-PI * x1 * x1).exp() * (-PI * x2 * x2).exp()
            }
            Kind::Gaussian => Complex64::new((-PI * (x1 * x1 + x2 * x2)).exp(), 0.0),
            Kind::Custom(f) => f(x1, x2),
        }
    }

    pub fn psi_hat_sq(&self, xi1: f64, xi2: f64) -> f64 {
        self.psi_hat(xi1, xi2).norm_sqr()
    }

    /// Generator defined by an arbitrary closed form.
    pub fn custom(
        label: impl Into<String>,
        declared_moments: Option<u32>,
        extent: [f64; 2],
        f: impl Fn(f64, f64) -> Complex64 + Send + Sync + 'static,
    ) -> ShearletSpec {
        ShearletSpec {
            label: label.into(),
            declared_moments,
            declared_decay: DecayOrders::INFINITE,
            extent,
            kind: Kind::Custom(Arc::new(f)),
            swapped: false,
            reflected: false,
        }
    }

    /// ψ(−x), i.e. ψ̂(−ξ): the generator seen at negative scales.
    pub fn reflected(&self) -> ShearletSpec {
        let mut out = self.clone();
        out.reflected = !out.reflected;
        out
    }

    pub fn is_swapped(&self) -> bool {
        self.swapped
    }

    /// True when |ψ̂(−ξ)| = |ψ̂(ξ)| for every ξ, so both scale signs carry the same energy.
    pub fn has_even_modulus(&self) -> bool {
        matches!(self.kind, Kind::Dog(_) | Kind::Classical | Kind::Tensor(_) | Kind::Gaussian)
    }
}

pub fn make_dog_generator(n: u32) -> Result<ShearletSpec> {
    if n == 0 {
        return Err(Error::invalid("dog:0 is not admissible; the derivative order must be at least 1"));
    }
    Ok(ShearletSpec {
        label: format!("dog:{n}"),
        declared_moments: Some(n),
        declared_decay: DecayOrders::INFINITE,
        extent: dog_extent(n),
        kind: Kind::Dog(n),
        swapped: false,
        reflected: false,
    })
}

/// One-sided variant of the DoG generator: ψ̂ is doubled on ξ1 > 0 and zero elsewhere.
///
/// For real fields the coefficient modulus is then a smooth envelope without
/// the sign changes of the two-sided generator.
pub fn make_analytic_dog_generator(n: u32) -> Result<ShearletSpec> {
    if n == 0 {
        return Err(Error::invalid("adog:0 is not admissible; the derivative order must be at least 1"));
    }
    Ok(ShearletSpec {
        label: format!("adog:{n}"),
        declared_moments: Some(n),
        declared_decay: DecayOrders::INFINITE,
        extent: dog_extent(n),
        kind: Kind::AnalyticDog(n),
        swapped: false,
        reflected: false,
    })
}

pub fn make_classical_cone_generator() -> ShearletSpec {
    ShearletSpec {
        label: "classical".into(),
        declared_moments: None,
        declared_decay: DecayOrders::INFINITE,
        extent: [2.0, 2.0],
        kind: Kind::Classical,
        swapped: false,
        reflected: false,
    }
}

pub fn make_tensor_generator(m: u32) -> Result<ShearletSpec> {
    if m == 0 {
        return Err(Error::invalid("tensor:0 is not admissible; the moment order must be at least 1"));
    }
    Ok(ShearletSpec {
        label: format!("tensor:{m}"),
        declared_moments: Some(m),
        declared_decay: DecayOrders::INFINITE,
        extent: dog_extent(m),
        kind: Kind::Tensor(m),
        swapped: false,
        reflected: false,
    })
}

/// The Gaussian θ itself; it has no vanishing moment and is not a shearlet.
pub fn make_gaussian_generator() -> ShearletSpec {
    ShearletSpec {
        label: "gaussian".into(),
        declared_moments: Some(0),
        declared_decay: DecayOrders::INFINITE,
        extent: [5.0, 5.0],
        kind: Kind::Gaussian,
        swapped: false,
        reflected: false,
    }
}

/// Coordinate-swapped generator ψ̂ν(ξ1, ξ2) = ψ̂(ξ2, ξ1).
pub fn make_nu(spec: &ShearletSpec) -> ShearletSpec {
    let mut out = spec.clone();
    out.swapped = !out.swapped;
    out.extent = [spec.extent[1], spec.extent[0]];
    out.label = match spec.label.strip_prefix("nu(").and_then(|l| l.strip_suffix(')')) {
        Some(inner) => inner.to_string(),
        None => format!("nu({})", spec.label),
    };
    out
}

/// Parses `dog:<n>`, `adog:<n>`, `classical`, `tensor:<M>` or `gaussian`.
pub fn parse_generator(label: &str) -> Result<ShearletSpec> {
    let parse_order = |rest: &str| -> Result<u32> {
        rest.parse::<u32>()
            .map_err(|_| Error::invalid(format!("generator '{label}': expected a non-negative integer order")))
    };
    if let Some(rest) = label.strip_prefix("dog:") {
        make_dog_generator(parse_order(rest)?)
    } else if let Some(rest) = label.strip_prefix("adog:") {
        make_analytic_dog_generator(parse_order(rest)?)
    } else if let Some(rest) = label.strip_prefix("tensor:") {
        make_tensor_generator(parse_order(rest)?)
    } else if label == "classical" {
        Ok(make_classical_cone_generator())
    } else if label == "gaussian" {
        Ok(make_gaussian_generator())
    } else {
        Err(Error::invalid(format!(
            "unknown generator '{label}'; expected dog:<n>, adog:<n>, classical, tensor:<M> or gaussian"
        )))
    }
}

/// ψ̂_ast(ξ) = a^{3/4} e^{−2πi t·ξ} ψ̂(aξ1, √a(ξ2 − sξ1)).
pub fn psi_ast_hat(spec: &ShearletSpec, p: &ShearParams, xi: [f64; 2]) -> Complex64 {
    let phase = Complex64::from_polar(1.0, -2.0 * PI * (p.t[0] * xi[0] + p.t[1] * xi[1]));
    spec.psi_hat(p.a * xi[0], p.a.sqrt() * (xi[1] - p.s * xi[0])) * p.a.powf(0.75) * phase
}

/// Samples ψ_ast on a grid by inverting its sampled transform.
pub fn sample_psi_ast(spec: &ShearletSpec, p: &ShearParams, meta: GridMeta) -> Result<SampledField2D> {
    let fg = meta.frequency_grid();
    let mut spec_vals = Spectrum2D::zeros(meta);
    for k1 in 0..meta.n1 {
        for k2 in 0..meta.n2 {
            spec_vals.values[k1 * meta.n2 + k2] = psi_ast_hat(spec, p, fg.node(k1, k2));
        }
    }
    dft_inverse(&spec_vals)
}
