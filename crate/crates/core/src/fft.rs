//! Multi-dimensional FFT over cubic periodic grids, built from 1D rustfft passes.
//!
//! Layout is row-major with x fastest: `index = x + n * (y + n * z)`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::par;

pub(crate) struct FftNd {
    n: usize,
    dims: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FftNd {
    pub(crate) fn new(dims: usize, n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { n, dims, forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) }
    }

    /// Unnormalized forward transform (e^{-ikx} kernel).
    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.forward);
    }

    /// Unnormalized inverse transform (e^{+ikx} kernel).
    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inverse);
    }

    fn run(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        debug_assert_eq!(data.len(), n.pow(self.dims as u32));
        // axis 0 is contiguous
        par::for_each_chunk_mut(data, n * lines_per_task(n), |_, chunk| {
            let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
            for line in chunk.chunks_mut(n) {
                fft.process_with_scratch(line, &mut scratch);
            }
        });
        let mut tmp = vec![Complex64::default(); data.len()];
        for axis in 1..self.dims {
            self.strided_pass(data, &mut tmp, axis, fft);
        }
    }

    /// Gathers lines along `axis` into contiguous storage, transforms, scatters back.
    fn strided_pass(&self, data: &mut [Complex64], tmp: &mut [Complex64], axis: usize, fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        let stride = n.pow(axis as u32);
        let block = stride * n;
        {
            let src: &[Complex64] = data;
            par::for_each_chunk_mut(tmp, n * lines_per_task(n), |ci, chunk| {
                let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
                let first = ci * lines_per_task(n);
                for (li, line) in chunk.chunks_mut(n).enumerate() {
                    let l = first + li;
                    let (outer, inner) = (l / stride, l % stride);
                    let base = outer * block + inner;
                    for (j, v) in line.iter_mut().enumerate() {
                        *v = src[base + j * stride];
                    }
                    fft.process_with_scratch(line, &mut scratch);
                }
            });
        }
        let src: &[Complex64] = tmp;
        // data run c = (outer, j) holds `stride` consecutive elements with inner = 0..stride
        par::for_each_chunk_mut(data, stride, |c, run| {
            let (outer, j) = (c / n, c % n);
            for (inner, v) in run.iter_mut().enumerate() {
                *v = src[(outer * stride + inner) * n + j];
            }
        });
    }
}

fn lines_per_task(n: usize) -> usize {
    (4096 / n).max(1)
}
