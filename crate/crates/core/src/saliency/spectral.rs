use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use super::{GrayImage, SaliencyMap};
use crate::error::{Error, Result};

/// Width of the image the residual is computed on.
pub const WORKING_WIDTH: usize = 64;

struct Fft2 {
    width: usize,
    height: usize,
    row: Arc<dyn Fft<f64>>,
    col: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    fn new(width: usize, height: usize, inverse: bool) -> Self {
        let mut planner = FftPlanner::new();
        let (row, col) = if inverse {
            (planner.plan_fft_inverse(width), planner.plan_fft_inverse(height))
        } else {
            (planner.plan_fft_forward(width), planner.plan_fft_forward(height))
        };
        Self {
            width,
            height,
            row,
            col,
        }
    }

    fn process(&self, data: &mut [Complex64]) {
        for r in data.chunks_exact_mut(self.width) {
            self.row.process(r);
        }
        let mut column = vec![Complex64::new(0.0, 0.0); self.height];
        for x in 0..self.width {
            for (y, c) in column.iter_mut().enumerate() {
                *c = data[y * self.width + x];
            }
            self.col.process(&mut column);
            for (y, c) in column.iter().enumerate() {
                data[y * self.width + x] = *c;
            }
        }
    }
}

/// 3x3 filter with replicated borders.
fn filter3(values: &[f64], width: usize, height: usize, kernel: [[f64; 3]; 3]) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    for y in 0..height {
        for x in 0..width {
            let mut acc = 0.0;
            for (dy, krow) in kernel.iter().enumerate() {
                let yy = (y + dy).saturating_sub(1).min(height - 1);
                for (dx, k) in krow.iter().enumerate() {
                    let xx = (x + dx).saturating_sub(1).min(width - 1);
                    acc += k * values[yy * width + xx];
                }
            }
            out[y * width + x] = acc;
        }
    }
    out
}

const BOX3: [[f64; 3]; 3] = [[1.0 / 9.0; 3]; 3];
const GAUSS3: [[f64; 3]; 3] = [
    [1.0 / 16.0, 2.0 / 16.0, 1.0 / 16.0],
    [2.0 / 16.0, 4.0 / 16.0, 2.0 / 16.0],
    [1.0 / 16.0, 2.0 / 16.0, 1.0 / 16.0],
];

/// Spectral-residual saliency before the final [0, 1] normalization,
/// resized back to the input size.
pub fn spectral_residual_unnormalized(image: &GrayImage) -> Result<GrayImage> {
    if image.width() < 8 || image.height() < 8 {
        return Err(Error::param("image", "saliency needs at least 8x8 pixels"));
    }
    let width = WORKING_WIDTH;
    let height = ((image.height() as f64 * width as f64 / image.width() as f64).round() as usize)
        .max(1);
    let work = image.resize(width, height);
    let (lo, hi) = (work.min(), work.max());
    if hi - lo <= 1e-12 * hi.abs().max(1.0) {
        return Ok(GrayImage::filled(image.width(), image.height(), 0.0));
    }

    // The DC term only offsets the reconstruction; drop it.
    let mean = work.data().iter().sum::<f64>() / work.data().len() as f64;
    let mut spectrum: Vec<Complex64> = work
        .data()
        .iter()
        .map(|&v| Complex64::new(v - mean, 0.0))
        .collect();
    Fft2::new(width, height, false).process(&mut spectrum);

    let amplitude: Vec<f64> = spectrum.iter().map(|c| c.norm()).collect();
    let floor = 1e-12 * amplitude.iter().copied().fold(0.0, f64::max);
    let log_amp: Vec<f64> = amplitude.iter().map(|&a| a.max(floor).ln()).collect();
    let smoothed = filter3(&log_amp, width, height, BOX3);
    for (i, c) in spectrum.iter_mut().enumerate() {
        *c = if i == 0 || amplitude[i] <= floor {
            Complex64::new(0.0, 0.0)
        } else {
            let residual = log_amp[i] - smoothed[i];
            *c / amplitude[i] * residual.exp()
        };
    }
    Fft2::new(width, height, true).process(&mut spectrum);

    let power: Vec<f64> = spectrum.iter().map(|c| c.norm_sqr()).collect();
    let smoothed = filter3(&power, width, height, GAUSS3);
    let map = GrayImage::new(width, height, smoothed)?;
    Ok(map.resize(image.width(), image.height()))
}

/// Spectral-residual saliency of a grayscale image, normalized to [0, 1].
pub fn spectral_residual(image: &GrayImage) -> Result<SaliencyMap> {
    spectral_residual_unnormalized(image).map(SaliencyMap::normalized)
}
