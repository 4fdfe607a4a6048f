mod common;

use proptest::prelude::*;
use shearscope::grid::{dft_forward, dft_inverse, make_frequency_grid, translate, GridMeta, SampledField2D};
use shearscope::io::{read_sf2d_from, write_sf2d_to};
use shearscope::Complex64;

fn field_strategy() -> impl Strategy<Value = SampledField2D> {
    (4usize..12, 4usize..12, 0.01f64..2.0, -3.0f64..3.0, -3.0f64..3.0, any::<bool>()).prop_flat_map(
        |(h1, h2, spacing, o1, o2, complex)| {
            let (n1, n2) = (2 * h1, 2 * h2);
            prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), n1 * n2).prop_map(move |vals| {
                let meta = GridMeta::new(n1, n2, spacing, [o1, o2]).unwrap();
                if complex {
                    let v = vals.iter().map(|(a, b)| Complex64::new(*a, *b)).collect();
                    SampledField2D::new(meta, v, shearscope::grid::Dtype::C128).unwrap()
                } else {
                    SampledField2D::from_real(meta, vals.iter().map(|p| p.0).collect()).unwrap()
                }
            })
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn forward_inverse_round_trip(f in field_strategy()) {
        let g = dft_inverse(&dft_forward(&f).unwrap()).unwrap();
        prop_assert!(g.rel_l2_error(&f) <= 1e-12);
    }

    #[test]
    fn parseval(f in field_strategy()) {
        let s = dft_forward(&f).unwrap();
        let lhs = s.energy();
        let rhs = f.norm_l2().powi(2);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn linearity(f in field_strategy(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let g = SampledField2D::from_fn(f.meta, |x1, x2| Complex64::new((x1 * 0.7).sin(), x2.cos()));
        let combo = SampledField2D::new(
            f.meta,
            f.values.iter().zip(&g.values).map(|(x, y)| x * a + y * b).collect(),
            shearscope::grid::Dtype::C128,
        ).unwrap();
        let lhs = dft_forward(&combo).unwrap();
        let (sf, sg) = (dft_forward(&f).unwrap(), dft_forward(&g).unwrap());
        let scale = lhs.values.iter().map(|v| v.norm()).fold(1e-300, f64::max);
        for k in 0..lhs.values.len() {
            prop_assert!((lhs.values[k] - (sf.values[k] * a + sg.values[k] * b)).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn sf2d_round_trip_bit_exact(f in field_strategy()) {
        let mut buf = Vec::new();
        write_sf2d_to(&mut buf, &f).unwrap();
        let g = read_sf2d_from(&mut std::io::Cursor::new(buf)).unwrap();
        prop_assert_eq!(g.meta, f.meta);
        for (x, y) in f.values.iter().zip(&g.values) {
            prop_assert_eq!(x.re.to_bits(), y.re.to_bits());
            prop_assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }

    #[test]
    fn frequency_step_times_extent_is_one(h1 in 4usize..64, spacing in 1e-3f64..10.0) {
        let fg = make_frequency_grid(2 * h1, 2 * h1, spacing).unwrap();
        let st = fg.step();
        prop_assert!((st[0] * (2 * h1) as f64 * spacing - 1.0).abs() < 1e-12);
        prop_assert!((fg.xi1[0] + 0.5 / spacing).abs() < 1e-12 / spacing);
    }
}

#[test]
fn random_bandlimited_round_trip() {
    let meta = GridMeta::centered(64, 64, 1.0 / 8.0).unwrap();
    let mut r = common::rng(7);
    for _ in 0..5 {
        let f = common::random_bandlimited_field(meta, 2.0, &mut r);
        assert!(dft_inverse(&dft_forward(&f).unwrap()).unwrap().rel_l2_error(&f) < 1e-12);
    }
}

#[test]
fn translation_by_whole_nodes_is_a_roll() {
    let meta = GridMeta::centered(16, 16, 0.5).unwrap();
    let mut r = common::rng(3);
    let f = common::random_real_field(meta, &mut r);
    let g = translate(&f, [1.0, -1.5]).unwrap();
    for i1 in 0..16 {
        for i2 in 0..16 {
            let src = f.get((i1 + 16 - 2) % 16, (i2 + 3) % 16);
            assert!((g.get(i1, i2) - src).norm() < 1e-12);
        }
    }
}

#[test]
fn odd_or_small_grids_are_rejected() {
    assert!(make_frequency_grid(7, 8, 1.0).is_err());
    assert!(make_frequency_grid(6, 6, 1.0).is_err());
    assert!(make_frequency_grid(8, 8, 0.0).is_err());
}
