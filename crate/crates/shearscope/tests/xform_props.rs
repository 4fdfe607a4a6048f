mod common;

use std::f64::consts::PI;

use rand::Rng;
use shearscope::generators::*;
use shearscope::grid::{dft_forward, dft_inverse, translate, GridMeta, SampledField2D};
use shearscope::xform::*;
use shearscope::Complex64;

fn inner(f: &SampledField2D, g: &SampledField2D) -> Complex64 {
    f.values.iter().zip(&g.values).map(|(a, b)| a * b.conj()).sum::<Complex64>() * f.meta.cell()
}

#[test]
fn coefficient_of_the_generator_itself_is_its_energy() {
    let spec = make_dog_generator(1).unwrap();
    let meta = GridMeta::centered(256, 256, 1.0 / 32.0).unwrap();
    let (a0, s0) = (0.25, 0.5);
    let t0 = [meta.x1(140), meta.x2(120)];
    let f = sample_psi_ast(&spec, &ShearParams::new(a0, s0, t0).unwrap(), meta).unwrap();
    let vol = shearlet_transform(&f, &spec, &[a0], &[s0]).unwrap();
    let c = vol.get(0, 0, 140, 120);
    assert!((c.re - PI / 2.0).abs() / (PI / 2.0) < 1e-4, "{c}");
    assert!(c.im.abs() < 1e-10);
}

fn dog2_spatial(p: &ShearParams, x1: f64, x2: f64) -> f64 {
    let (y1, y2) = (x1 - p.t[0], x2 - p.t[1]);
    let (z1, z2) = ((y1 + p.s * y2) / p.a, y2 / p.a.sqrt());
    p.a.powf(-0.75) * (4.0 * PI * PI * z1 * z1 - 2.0 * PI) * (-PI * (z1 * z1 + z2 * z2)).exp()
}

#[test]
fn multiplier_path_matches_spatial_quadrature() {
    let spec = make_dog_generator(2).unwrap();
    let meta = GridMeta::centered(1024, 1024, 1.0 / 512.0).unwrap();
    let sigma = 0.25;
    let f = SampledField2D::from_fn_real(meta, |x1, x2| {
        (-PI * ((x1 - 0.05) * (x1 - 0.05) + x2 * x2) / (sigma * sigma)).exp()
    });
    let a_grid = [1.0 / 64.0, 1.0 / 16.0, 1.0 / 4.0];
    let s = 0.375;
    let vol = shearlet_transform(&f, &spec, &a_grid, &[s]).unwrap();
    let mut r = common::rng(21);
    for k in 0..5 {
        let (q1, q2) = (r.gen_range(448..576), r.gen_range(448..576));
        for (i, &a) in a_grid.iter().enumerate() {
            let t = vol.t_node(q1, q2);
            let p = ShearParams::new(a, s, t).unwrap();
            let direct: f64 = (0..meta.len())
                .map(|m| {
                    let (x1, x2) = (meta.x1(m / 1024), meta.x2(m % 1024));
                    f.values[m].re * dog2_spatial(&p, x1, x2)
                })
                .sum::<f64>()
                * meta.cell();
            let got = vol.get(i, 0, q1, q2);
            let scale = vol.plane(i, 0).iter().map(|v| v.norm()).fold(0.0, f64::max);
            assert!((got.re - direct).abs() <= 1e-3 * scale, "t #{k}, a = {a}: {} vs {direct}", got.re);
        }
    }
}

#[test]
fn translation_covariance_on_grid() {
    let spec = make_dog_generator(2).unwrap();
    let meta = GridMeta::centered(64, 64, 1.0 / 8.0).unwrap();
    let mut r = common::rng(2);
    let f = common::random_bandlimited_field(meta, 3.0, &mut r);
    let tau = [3.0 * meta.spacing, -5.0 * meta.spacing];
    let g = translate(&f, tau).unwrap();
    let (a, s) = ([0.05, 0.2, 0.8], [-1.0, 0.0, 0.5]);
    let vf = shearlet_transform(&f, &spec, &a, &s).unwrap();
    let vg = shearlet_transform(&g, &spec, &a, &s).unwrap();
    let scale = vf.max_abs();
    for i in 0..3 {
        for j in 0..3 {
            for q1 in 0..64 {
                for q2 in 0..64 {
                    let src = vf.get(i, j, (q1 + 64 - 3) % 64, (q2 + 5) % 64);
                    assert!((vg.get(i, j, q1, q2) - src).norm() < 1e-12 * scale);
                }
            }
        }
    }
}

#[test]
fn transform_is_linear() {
    let spec = make_dog_generator(1).unwrap();
    let meta = GridMeta::centered(32, 32, 1.0 / 4.0).unwrap();
    let mut r = common::rng(4);
    let f = common::random_real_field(meta, &mut r);
    let g = common::random_real_field(meta, &mut r);
    let h = SampledField2D::new(
        meta,
        f.values.iter().zip(&g.values).map(|(x, y)| x * 2.0 - y * 0.5).collect(),
        shearscope::grid::Dtype::F64,
    )
    .unwrap();
    let (a, s) = ([0.1, 0.5], [-0.5, 0.5]);
    let (vf, vg, vh) = (
        shearlet_transform(&f, &spec, &a, &s).unwrap(),
        shearlet_transform(&g, &spec, &a, &s).unwrap(),
        shearlet_transform(&h, &spec, &a, &s).unwrap(),
    );
    for k in 0..vh.coeffs.len() {
        assert!((vh.coeffs[k] - (vf.coeffs[k] * 2.0 - vg.coeffs[k] * 0.5)).norm() < 1e-12);
    }
}

#[test]
fn dual_cone_is_the_transform_of_the_swapped_field() {
    let spec = make_dog_generator(2).unwrap();
    let meta = GridMeta::new(64, 64, 1.0 / 8.0, [-4.0, -3.5]).unwrap();
    let mut r = common::rng(9);
    let f = common::random_bandlimited_field(meta, 3.0, &mut r);
    let (a, s) = ([0.1, 0.3], [-0.75, 0.0, 0.25]);
    let d = dual_cone_transform(&f, &spec, &a, &s).unwrap();
    let h = shearlet_transform(&f.swap_axes(), &spec, &a, &s).unwrap();
    let scale = h.max_abs();
    for i in 0..2 {
        for j in 0..3 {
            for q1 in 0..64 {
                for q2 in 0..64 {
                    assert!((d.get(i, j, q1, q2) - h.get(i, j, q2, q1)).norm() <= 1e-10 * scale);
                }
            }
        }
    }
    assert_eq!(d.chart, Chart::Vertical);
}

#[test]
fn symmetric_field_gives_matching_charts() {
    let spec = make_dog_generator(2).unwrap();
    let meta = GridMeta::centered(64, 64, 1.0 / 8.0).unwrap();
    let f = SampledField2D::from_fn_real(meta, |x1, x2| {
        (-PI * (x1 * x1 + x2 * x2)).exp() * (1.0 + (3.0 * x1 * x2).cos())
    });
    let (a, s) = ([0.1, 0.4], [-0.5, 0.5]);
    let v1 = shearlet_transform(&f, &spec, &a, &s).unwrap();
    let v2 = dual_cone_transform(&f, &spec, &a, &s).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            for q1 in 0..64 {
                for q2 in 0..64 {
                    assert!((v1.get(i, j, q1, q2) - v2.get(i, j, q2, q1)).norm() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn vertical_content_is_invisible_to_the_horizontal_cone() {
    let spec = make_classical_cone_generator();
    let meta = GridMeta::centered(64, 64, 1.0 / 8.0).unwrap();
    let mut r = common::rng(13);
    let vcone = ConeSpec::new(1.0, 1.0, Orientation::Vertical).unwrap();
    let f = common::random_cone_field(meta, &ConeSpec::horizontal(0.0, f64::INFINITY).unwrap(), 0.0, 4.0, &mut r);
    let fv = cone_project(&f, &vcone).unwrap();
    let pc = cone_project(&fv, &ConeSpec::horizontal(1.0, 1.0).unwrap()).unwrap();
    let vol = shearlet_transform(&pc, &spec, &[0.25, 0.5], &[-1.0, 0.0, 1.0]).unwrap();
    assert!(vol.max_abs() < 1e-14);
}

#[test]
fn projection_properties() {
    let meta = GridMeta::centered(64, 64, 1.0 / 8.0).unwrap();
    let mut r = common::rng(17);
    let f = common::random_bandlimited_field(meta, 4.0, &mut r);
    let cone = ConeSpec::horizontal(1.0, 1.0).unwrap();
    let p = cone_project(&f, &cone).unwrap();
    let pp = cone_project(&p, &cone).unwrap();
    assert!(pp.rel_l2_error(&p) < 1e-14);
    let rest = SampledField2D::new(meta, f.values.iter().zip(&p.values).map(|(a, b)| a - b).collect(), f.dtype).unwrap();
    assert!(inner(&p, &rest).norm() <= 1e-10 * f.norm_l2().powi(2));
    let inside = common::random_cone_field(meta, &cone, 1.0, 3.0, &mut r);
    assert!(cone_project(&inside, &cone).unwrap().rel_l2_error(&inside) < 1e-12);

    let [d, c, v] = split_three_way(&f).unwrap();
    let sum = SampledField2D::new(
        meta,
        (0..meta.len()).map(|k| d.values[k] + c.values[k] + v.values[k]).collect(),
        f.dtype,
    )
    .unwrap();
    assert!(sum.rel_l2_error(&f) < 1e-10);
    let hi = common::random_field_from(meta, &mut r, |a, b| a * a + b * b > 4.0);
    assert!(lowpass_project(&hi).unwrap().max_abs() < 1e-13 * hi.max_abs().max(1.0));
}

#[test]
fn brute_force_synthesis_matches_the_multiplier() {
    let spec = make_dog_generator(2).unwrap();
    let meta = GridMeta::centered(32, 32, 1.0 / 4.0).unwrap();
    let mut r = common::rng(23);
    let f = common::random_bandlimited_field(meta, 1.5, &mut r);
    let a_grid = [0.25, 0.5, 1.0, 2.0];
    let s_grid = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let wa = scale_weights(&a_grid);
    let ws = trapezoid_weights(&s_grid);
    let vol = shearlet_transform(&f, &spec, &a_grid, &s_grid).unwrap();
    let n = 32;
    let mut synth = vec![Complex64::new(0.0, 0.0); n * n];
    for (i, &a) in a_grid.iter().enumerate() {
        for (j, &s) in s_grid.iter().enumerate() {
            let psi = sample_psi_ast(&spec, &ShearParams::new(a, s, [0.0, 0.0]).unwrap(), meta).unwrap();
            let w = wa[i] * ws[j] / (a * a * a) * meta.cell();
            let plane = vol.plane(i, j);
            // the grid is centered, so node (16, 16) sits at the origin
            for q in 0..n * n {
                let (q1, q2) = (q / n, q % n);
                let c = plane[q] * w;
                for x in 0..n * n {
                    let (x1, x2) = (x / n, x % n);
                    let src = ((x1 + 2 * n - q1 + n / 2) % n) * n + (x2 + 2 * n - q2 + n / 2) % n;
                    synth[x] += c * psi.values[src];
                }
            }
        }
    }
    let fhat = dft_forward(&f).unwrap();
    let m = fhat.apply_multiplier(|x1, x2| {
        let mut acc = 0.0;
        for (i, &a) in a_grid.iter().enumerate() {
            for (j, &s) in s_grid.iter().enumerate() {
                let p = ShearParams::new(a, s, [0.0, 0.0]).unwrap();
                acc += wa[i] * ws[j] / (a * a * a) * psi_ast_hat(&spec, &p, [x1, x2]).norm_sqr();
            }
        }
        Complex64::new(acc, 0.0)
    });
    let want = dft_inverse(&m).unwrap();
    let got = SampledField2D::new(meta, synth, shearscope::grid::Dtype::C128).unwrap();
    assert!(got.rel_l2_error(&want) <= 1e-6, "{}", got.rel_l2_error(&want));
}

#[test]
fn under_resolved_scales_warn() {
    let meta = GridMeta::centered(32, 32, 1.0 / 4.0).unwrap();
    let f = SampledField2D::zeros(meta);
    let v = shearlet_transform(&f, &make_dog_generator(1).unwrap(), &[0.01, 1.0], &[0.0]).unwrap();
    assert_eq!(v.warnings.len(), 1);
    let v = shearlet_transform(&f, &make_dog_generator(1).unwrap(), &[1.0], &[0.0]).unwrap();
    assert!(v.warnings.is_empty());
}
