use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};

type PlanKey = (usize, bool);

fn plans() -> &'static Mutex<HashMap<PlanKey, Arc<dyn Fft<f64>>>> {
    static PLANS: OnceLock<Mutex<HashMap<PlanKey, Arc<dyn Fft<f64>>>>> = OnceLock::new();
    PLANS.get_or_init(|| Mutex::new(HashMap::new()))
}

pub(crate) fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut map = plans().lock().expect("fft plan cache poisoned");
    map.entry((n, inverse))
        .or_insert_with(|| {
            let dir = if inverse { FftDirection::Inverse } else { FftDirection::Forward };
            FftPlanner::new().plan_fft(n, dir)
        })
        .clone()
}

/// Unnormalized transform of every contiguous row of length `n`.
pub(crate) fn fft_rows(data: &mut [Complex64], n: usize, inverse: bool) {
    let p = plan(n, inverse);
    let rows_per_task = (4096 / n).max(1);
    data.par_chunks_mut(n * rows_per_task).for_each(|chunk| {
        let mut scratch = vec![Complex64::new(0.0, 0.0); p.get_inplace_scratch_len()];
        p.process_with_scratch(chunk, &mut scratch);
    });
}

pub(crate) fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    const B: usize = 32;
    dst.par_chunks_mut(rows * B).enumerate().for_each(|(bj, block)| {
        let j0 = bj * B;
        let jn = block.len() / rows;
        for i0 in (0..rows).step_by(B) {
            for dj in 0..jn {
                let j = j0 + dj;
                for i in i0..(i0 + B).min(rows) {
                    block[dj * rows + i] = src[i * cols + j];
                }
            }
        }
    });
}

/// Unnormalized 2-D transform of a row-major `n1 × n2` array.
pub(crate) fn fft2(data: &mut [Complex64], n1: usize, n2: usize, inverse: bool) {
    fft_rows(data, n2, inverse);
    let mut tmp = vec![Complex64::new(0.0, 0.0); data.len()];
    transpose(data, &mut tmp, n1, n2);
    fft_rows(&mut tmp, n1, inverse);
    transpose(&tmp, data, n2, n1);
}

/// Swap halves along both axes; its own inverse for even sizes.
pub(crate) fn shift2(data: &mut [Complex64], n1: usize, n2: usize) {
    let h1 = n1 / 2;
    let h2 = n2 / 2;
    for i in 0..h1 {
        let (top, bottom) = data.split_at_mut((i + h1) * n2);
        let a = &mut top[i * n2..(i + 1) * n2];
        let b = &mut bottom[..n2];
        a.swap_with_slice(b);
    }
    data.par_chunks_mut(n2).for_each(|row| row.rotate_left(h2));
}

pub(crate) fn shift1(data: &mut [Complex64]) {
    let h = data.len() / 2;
    data.rotate_left(h);
}
