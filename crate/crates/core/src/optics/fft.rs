//! 2D FFT over row-major buffers.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::sync::Arc;

fn transpose(src: &[Complex64], nx: usize, ny: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); src.len()];
    const B: usize = 32;
    for by in (0..ny).step_by(B) {
        for bx in (0..nx).step_by(B) {
            for y in by..(by + B).min(ny) {
                for x in bx..(bx + B).min(nx) {
                    out[x * ny + y] = src[y * nx + x];
                }
            }
        }
    }
    out
}

fn rows(data: &mut [Complex64], len: usize, fft: &Arc<dyn Fft<f64>>) {
    let scratch_len = fft.get_inplace_scratch_len();
    data.par_chunks_mut(len).for_each_init(
        || vec![Complex64::new(0.0, 0.0); scratch_len],
        |scratch, row| fft.process_with_scratch(row, scratch),
    );
}

fn fft2(data: &mut Vec<Complex64>, nx: usize, ny: usize, direction: FftDirection) {
    let mut planner = FftPlanner::new();
    let fx = planner.plan_fft(nx, direction);
    let fy = planner.plan_fft(ny, direction);
    rows(data, nx, &fx);
    let mut t = transpose(data, nx, ny);
    rows(&mut t, ny, &fy);
    *data = transpose(&t, ny, nx);
}

/// Unnormalised forward transform.
pub(crate) fn forward(data: &mut Vec<Complex64>, nx: usize, ny: usize) {
    fft2(data, nx, ny, FftDirection::Forward);
}

/// Inverse transform including the `1/(nx·ny)` factor.
pub(crate) fn inverse(data: &mut Vec<Complex64>, nx: usize, ny: usize) {
    fft2(data, nx, ny, FftDirection::Inverse);
    let s = 1.0 / (nx * ny) as f64;
    data.par_iter_mut().for_each(|v| *v *= s);
}

/// Signed frequency of FFT bin `k` out of `n` with sample spacing `d`.
pub(crate) fn frequency(k: usize, n: usize, d: f64) -> f64 {
    let k = if k < n.div_ceil(2) { k as f64 } else { k as f64 - n as f64 };
    k / (n as f64 * d)
}
