//! In-memory images and their file formats.

use std::path::Path;

use ndarray::Array3;

use crate::error::{Error, Result};
use crate::tensor::resize_bilinear;

/// Channel count carried by every [`ImageTensor`]; inputs are treated as
/// color throughout the pipeline.
pub const CHANNELS: usize = 3;

/// A raster image as channel-major `f64` in `[0, 1]`, shape `(3, h, w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageTensor {
    data: Array3<f64>,
}

impl ImageTensor {
    /// Wrap an array; panics unless it is `(3, h, w)` with finite values.
    pub fn new(data: Array3<f64>) -> Self {
        assert_eq!(data.dim().0, CHANNELS, "ImageTensor expects {CHANNELS} channels");
        assert!(data.iter().all(|v| v.is_finite()), "ImageTensor holds non-finite values");
        Self { data }
    }

    /// Build from a per-pixel function returning `(r, g, b)`.
    pub fn from_fn(h: usize, w: usize, mut f: impl FnMut(usize, usize) -> (f64, f64, f64)) -> Self {
        let mut data = Array3::zeros((CHANNELS, h, w));
        for y in 0..h {
            for x in 0..w {
                let (r, g, b) = f(y, x);
                data[[0, y, x]] = r;
                data[[1, y, x]] = g;
                data[[2, y, x]] = b;
            }
        }
        Self::new(data)
    }

    pub fn height(&self) -> usize {
        self.data.dim().1
    }

    pub fn width(&self) -> usize {
        self.data.dim().2
    }

    pub fn data(&self) -> &Array3<f64> {
        &self.data
    }

    pub fn into_array(self) -> Array3<f64> {
        self.data
    }

    /// Average of the three channels at one pixel.
    pub fn luma(&self, y: usize, x: usize) -> f64 {
        (self.data[[0, y, x]] + self.data[[1, y, x]] + self.data[[2, y, x]]) / 3.0
    }

    /// Decode a PNG or JPEG file.
    pub fn load(path: &Path) -> Result<Self> {
        let decoded = image::open(path).map_err(|source| Error::ImageDecode {
            path: path.to_path_buf(),
            source,
        })?;
        let rgb = decoded.to_rgb8();
        let (w, h) = rgb.dimensions();
        let mut data = Array3::zeros((CHANNELS, h as usize, w as usize));
        for (x, y, pixel) in rgb.enumerate_pixels() {
            for c in 0..CHANNELS {
                data[[c, y as usize, x as usize]] = pixel.0[c] as f64 / 255.0;
            }
        }
        Ok(Self { data })
    }

    /// Encode to PNG with values clamped to `[0, 1]` and rounded to 8 bits.
    pub fn save_png(&self, path: &Path) -> Result<()> {
        let (h, w) = (self.height(), self.width());
        let mut buf = image::RgbImage::new(w as u32, h as u32);
        for (x, y, pixel) in buf.enumerate_pixels_mut() {
            for c in 0..CHANNELS {
                let v = self.data[[c, y as usize, x as usize]].clamp(0.0, 1.0);
                pixel.0[c] = (v * 255.0).round() as u8;
            }
        }
        buf.save(path)
            .map_err(|e| Error::Checkpoint(format!("writing image {}: {e}", path.display())))?;
        Ok(())
    }

    /// Bilinear resize to `(h, w)` (shared kernel with the sampler).
    pub fn resize(&self, h: usize, w: usize) -> Self {
        Self {
            data: resize_bilinear(&self.data.view(), h, w),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_round_trip_preserves_quantized_values() {
        let img = ImageTensor::from_fn(5, 9, |y, x| {
            let v = ((y * 9 + x) as f64) / 44.0;
            (v, 1.0 - v, 0.5 * v)
        });
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("probe.png");
        img.save_png(&path).unwrap();
        let back = ImageTensor::load(&path).unwrap();
        assert_eq!(back.height(), 5);
        assert_eq!(back.width(), 9);
        for (a, b) in img.data().iter().zip(back.data().iter()) {
            assert!((a - b).abs() <= 0.5 / 255.0 + 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn resize_constant_image_stays_constant() {
        let img = ImageTensor::from_fn(10, 20, |_, _| (0.25, 0.5, 0.75));
        let out = img.resize(7, 13);
        assert_eq!(out.height(), 7);
        assert_eq!(out.width(), 13);
        for c in 0..3 {
            let expect = [0.25, 0.5, 0.75][c];
            for v in out.data().index_axis(ndarray::Axis(0), c).iter() {
                assert!((v - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn load_rejects_missing_file() {
        let err = ImageTensor::load(Path::new("/nonexistent/missing.png")).unwrap_err();
        assert!(matches!(err, Error::ImageDecode { .. }));
    }
}
