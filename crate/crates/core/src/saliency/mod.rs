//! Saliency maps and the fixation targets extracted from them.

mod maxima;
mod spectral;

pub use maxima::{jitter_targets, local_maxima};
pub use spectral::{spectral_residual, spectral_residual_unnormalized, WORKING_WIDTH};

use crate::error::{Error, Result};

/// Row-major grid of reals, used for grayscale images and saliency maps.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::param("image", "width and height must be positive"));
        }
        if width.checked_mul(height) != Some(data.len()) {
            return Err(Error::param(
                "image",
                format!("{} values for a {width}x{height} grid", data.len()),
            ));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("image", "values must be finite"));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Bilinear resize sampling at pixel centers.
    pub fn resize(&self, width: usize, height: usize) -> GrayImage {
        if width == self.width && height == self.height {
            return self.clone();
        }
        let sx = self.width as f64 / width as f64;
        let sy = self.height as f64 / height as f64;
        let mut out = GrayImage::filled(width, height, 0.0);
        for y in 0..height {
            let fy = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, (self.height - 1) as f64);
            let y0 = fy.floor() as usize;
            let y1 = (y0 + 1).min(self.height - 1);
            let wy = fy - y0 as f64;
            for x in 0..width {
                let fx = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, (self.width - 1) as f64);
                let x0 = fx.floor() as usize;
                let x1 = (x0 + 1).min(self.width - 1);
                let wx = fx - x0 as f64;
                let top = self.get(x0, y0) * (1.0 - wx) + self.get(x1, y0) * wx;
                let bottom = self.get(x0, y1) * (1.0 - wx) + self.get(x1, y1) * wx;
                out.set(x, y, top * (1.0 - wy) + bottom * wy);
            }
        }
        out
    }
}

/// Saliency values in [0, 1]; the maximum is 1 unless the map is all zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyMap(GrayImage);

impl SaliencyMap {
    /// Scale by the maximum. Maps whose maximum is at most 1e-12 become zero.
    pub fn normalized(mut grid: GrayImage) -> Self {
        let max = grid.max();
        if max > 1e-12 {
            for v in &mut grid.data {
                *v = (*v / max).clamp(0.0, 1.0);
            }
        } else {
            grid.data.iter_mut().for_each(|v| *v = 0.0);
        }
        SaliencyMap(grid)
    }

    /// Accept a precomputed map whose values already lie in [0, 1].
    pub fn from_precomputed(grid: GrayImage) -> Result<Self> {
        if grid.data.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::param("saliency", "precomputed values must lie in [0, 1]"));
        }
        Ok(SaliencyMap(grid))
    }

    pub fn grid(&self) -> &GrayImage {
        &self.0
    }

    pub fn into_grid(self) -> GrayImage {
        self.0
    }

    pub fn width(&self) -> usize {
        self.0.width
    }

    pub fn height(&self) -> usize {
        self.0.height
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.0.get(x, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    /// Pixels.
    pub x: f64,
    /// Pixels.
    pub y: f64,
    pub weight: f64,
}

impl Target {
    pub fn distance(&self, other: &Target) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Candidate fixation targets within a `width` x `height` stimulus.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSet {
    pub width: usize,
    pub height: usize,
    pub points: Vec<Target>,
}

impl TargetSet {
    pub fn new(width: usize, height: usize, points: Vec<Target>) -> Result<Self> {
        let set = Self {
            width,
            height,
            points,
        };
        set.validate()?;
        Ok(set)
    }

    /// Inside the pixel grid `[0, width-1] x [0, height-1]`.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.width > 0 && self.height > 0 && x >= 0.0 && y >= 0.0 && x <= (self.width - 1) as f64 && y <= (self.height - 1) as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::param("targets", "stimulus size must be positive"));
        }
        for p in &self.points {
            if !self.contains(p.x, p.y) {
                return Err(Error::param(
                    "targets",
                    format!(
                        "target ({}, {}) lies outside the {}x{} stimulus",
                        p.x, p.y, self.width, self.height
                    ),
                ));
            }
            if !(p.weight >= 0.0 && p.weight.is_finite()) {
                return Err(Error::param("targets", "weights must be finite and >= 0"));
            }
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resize_identity_and_constant() {
        let img = GrayImage::new(3, 2, vec![0., 1., 2., 3., 4., 5.]).unwrap();
        assert_eq!(img.resize(3, 2), img);
        let c = GrayImage::filled(10, 7, 0.4).resize(64, 45);
        assert!(c.data().iter().all(|v| (v - 0.4).abs() < 1e-12));
    }

    #[test]
    fn normalization_guard() {
        let z = SaliencyMap::normalized(GrayImage::filled(4, 4, 1e-13));
        assert!(z.grid().data().iter().all(|&v| v == 0.0));
        let m = SaliencyMap::normalized(GrayImage::new(2, 1, vec![1.0, 4.0]).unwrap());
        assert_eq!(m.grid().data(), &[0.25, 1.0]);
    }

    #[test]
    fn targets_outside_rejected() {
        let t = Target { x: 10.0, y: 0.0, weight: 1.0 };
        assert!(TargetSet::new(10, 10, vec![t]).is_err());
        assert!(GrayImage::new(2, 2, vec![0.0; 3]).is_err());
    }
}
