//! RGB raster images, ink rendering with augmentations, and aspect-preserving
//! image fitting.

mod augment;
mod fit;
mod render;

use std::io::Cursor;
use std::path::Path;

use image::{ImageFormat, RgbImage};
use thiserror::Error;

pub use augment::{
    sample_augmentation, sample_augmentation_with, AugmentationProbabilities, AugmentationSpec,
    LineStyle,
};
pub use fit::fit_image;
pub use render::{prepare_for_render, render, render_augmented};

/// Side of model-facing images.
pub const DEFAULT_IMAGE_SIZE: u32 = 224;
/// Smallest canvas [`render`] accepts.
pub const MIN_RENDER_SIZE: u32 = 8;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("image dimensions must be positive, got {width}x{height}")]
    ZeroDimension { width: u32, height: u32 },
    #[error("pixel buffer has {got} bytes, expected {expected}")]
    BufferSize { got: usize, expected: usize },
    #[error("canvas size {0} is below the minimum of {MIN_RENDER_SIZE}")]
    CanvasTooSmall(u32),
    #[error("augmentation field {field} = {value} is outside [{lo}, {hi}]")]
    OutOfRange {
        field: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("augmentation record: {0}")]
    Record(#[from] crate::kv::KvError),
    #[error(transparent)]
    Normalize(#[from] crate::normalize::NormalizeError),
    #[error("PNG: {0}")]
    Png(#[from] image::ImageError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Row-major 8-bit RGB image.
#[derive(Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl std::fmt::Debug for RasterImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "RasterImage({}x{})", self.width, self.height)
    }
}

impl RasterImage {
    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::ZeroDimension { width, height });
        }
        let n = width as usize * height as usize;
        let mut pixels = Vec::with_capacity(n * 3);
        for _ in 0..n {
            pixels.extend_from_slice(&rgb);
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn from_rgb(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::ZeroDimension { width, height });
        }
        let expected = width as usize * height as usize * 3;
        if pixels.len() != expected {
            return Err(RasterError::BufferSize {
                got: pixels.len(),
                expected,
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    fn offset(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * 3
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        let o = self.offset(x, y);
        [self.pixels[o], self.pixels[o + 1], self.pixels[o + 2]]
    }

    pub fn set(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let o = self.offset(x, y);
        self.pixels[o..o + 3].copy_from_slice(&rgb);
    }

    /// Copies the `w x h` region at `(x0, y0)`; the region is clipped to the image.
    pub fn crop(&self, x0: u32, y0: u32, w: u32, h: u32) -> Result<Self, RasterError> {
        let x1 = (x0.saturating_add(w)).min(self.width);
        let y1 = (y0.saturating_add(h)).min(self.height);
        let (cw, ch) = (x1.saturating_sub(x0), y1.saturating_sub(y0));
        if cw == 0 || ch == 0 {
            return Err(RasterError::ZeroDimension { width: cw, height: ch });
        }
        let mut pixels = Vec::with_capacity(cw as usize * ch as usize * 3);
        for y in y0..y1 {
            let a = self.offset(x0, y);
            pixels.extend_from_slice(&self.pixels[a..a + cw as usize * 3]);
        }
        Self::from_rgb(cw, ch, pixels)
    }

    /// Copies `src` onto `self` with its top-left corner at `(x0, y0)`, clipped.
    pub fn blit(&mut self, src: &RasterImage, x0: u32, y0: u32) {
        for y in 0..src.height {
            for x in 0..src.width {
                let (tx, ty) = (x0 + x, y0 + y);
                if tx < self.width && ty < self.height {
                    self.set(tx, ty, src.get(x, y));
                }
            }
        }
    }

    /// Channel value with coordinates clamped to the image.
    #[inline]
    pub(crate) fn sample_clamped(&self, x: i64, y: i64, c: usize) -> f64 {
        let x = x.clamp(0, self.width as i64 - 1) as u32;
        let y = y.clamp(0, self.height as i64 - 1) as u32;
        self.pixels[self.offset(x, y) + c] as f64
    }

    /// Bilinear sample at continuous coordinates (pixel centers at `i + 0.5`).
    pub fn sample_bilinear(&self, x: f64, y: f64) -> [f64; 3] {
        let fx = x - 0.5;
        let fy = y - 0.5;
        let x0 = fx.floor();
        let y0 = fy.floor();
        let ax = fx - x0;
        let ay = fy - y0;
        let (xi, yi) = (x0 as i64, y0 as i64);
        let mut out = [0.0; 3];
        for (c, o) in out.iter_mut().enumerate() {
            let top = self.sample_clamped(xi, yi, c) * (1.0 - ax) + self.sample_clamped(xi + 1, yi, c) * ax;
            let bottom =
                self.sample_clamped(xi, yi + 1, c) * (1.0 - ax) + self.sample_clamped(xi + 1, yi + 1, c) * ax;
            *o = top * (1.0 - ay) + bottom * ay;
        }
        out
    }

    pub fn encode_png(&self) -> Result<Vec<u8>, RasterError> {
        let img = RgbImage::from_raw(self.width, self.height, self.pixels.clone())
            .expect("buffer size checked at construction");
        let mut out = Cursor::new(Vec::new());
        img.write_to(&mut out, ImageFormat::Png)?;
        Ok(out.into_inner())
    }

    pub fn decode_png(bytes: &[u8]) -> Result<Self, RasterError> {
        let img = image::load_from_memory_with_format(bytes, ImageFormat::Png)?.to_rgb8();
        let (w, h) = img.dimensions();
        Self::from_rgb(w, h, img.into_raw())
    }

    pub fn read_png(path: impl AsRef<Path>) -> Result<Self, RasterError> {
        Self::decode_png(&std::fs::read(path)?)
    }

    pub fn write_png(&self, path: impl AsRef<Path>) -> Result<(), RasterError> {
        std::fs::write(path, self.encode_png()?)?;
        Ok(())
    }
}

/// Maps a `[0, 1]` channel to 8 bits.
#[inline]
pub(crate) fn to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}
