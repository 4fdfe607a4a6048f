#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shearscope::grid::{dft_inverse, GridMeta, SampledField2D, Spectrum2D};
use shearscope::xform::ConeSpec;
use shearscope::Complex64;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random spectrum on the nodes accepted by `keep`, inverted to a field.
pub fn random_field_from(meta: GridMeta, r: &mut ChaCha8Rng, keep: impl Fn(f64, f64) -> bool) -> SampledField2D {
    let fg = meta.frequency_grid();
    let mut s = Spectrum2D::zeros(meta);
    for k1 in 0..meta.n1 {
        for k2 in 0..meta.n2 {
            let [a, b] = fg.node(k1, k2);
            if keep(a, b) {
                s.values[k1 * meta.n2 + k2] = Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
            }
        }
    }
    dft_inverse(&s).unwrap()
}

/// Field whose spectrum lives in the cone with |ξ1| in [lo, hi].
pub fn random_cone_field(meta: GridMeta, cone: &ConeSpec, lo: f64, hi: f64, r: &mut ChaCha8Rng) -> SampledField2D {
    random_field_from(meta, r, |a, b| cone.contains(a, b) && a.abs() >= lo && a.abs() <= hi)
}

pub fn random_bandlimited_field(meta: GridMeta, radius: f64, r: &mut ChaCha8Rng) -> SampledField2D {
    random_field_from(meta, r, |a, b| a * a + b * b <= radius * radius)
}

pub fn random_real_field(meta: GridMeta, r: &mut ChaCha8Rng) -> SampledField2D {
    let v = (0..meta.len()).map(|_| r.gen_range(-1.0..1.0)).collect();
    SampledField2D::from_real(meta, v).unwrap()
}
