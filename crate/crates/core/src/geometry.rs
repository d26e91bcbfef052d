//! Boxes, crop-size computation, and image cropping with constant padding.
//!
//! Coordinates are continuous: pixel (i, j) covers the square
//! [i, i+1) x [j, j+1) with its sample point at the center (i+0.5, j+0.5).

use crate::error::{Error, Result};

/// Axis-aligned rectangle in pixel units, stored in center form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Box {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

impl Box {
    /// Validated constructor; width and height must be positive and finite.
    pub fn new(cx: f64, cy: f64, w: f64, h: f64) -> Result<Box> {
        let b = Box { cx, cy, w, h };
        b.validate()?;
        Ok(b)
    }

    /// Builds from corner form. Degenerate (zero-extent) boxes are allowed
    /// here since mapped point-boxes are legitimate.
    pub fn from_corners(x0: f64, y0: f64, x1: f64, y1: f64) -> Box {
        Box {
            cx: 0.5 * (x0 + x1),
            cy: 0.5 * (y0 + y1),
            w: x1 - x0,
            h: y1 - y0,
        }
    }

    /// Corner form (x0, y0, x1, y1).
    pub fn corners(&self) -> (f64, f64, f64, f64) {
        (
            self.cx - 0.5 * self.w,
            self.cy - 0.5 * self.h,
            self.cx + 0.5 * self.w,
            self.cy + 0.5 * self.h,
        )
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = self.cx.is_finite()
            && self.cy.is_finite()
            && self.w.is_finite()
            && self.h.is_finite();
        if !all_finite || self.w <= 0.0 || self.h <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "box ({}, {}, {}, {}) must be finite with positive extent",
                self.cx, self.cy, self.w, self.h
            )));
        }
        Ok(())
    }
}

/// How the unit context amount is derived from the reference box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContextMode {
    /// c_w = box width, c_h = box height.
    PerAxis,
    /// c_w = c_h = (width + height) / 2.
    Mean,
}

/// Row-major image with samples in [0, 1], one or three channels.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Image> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument("image extent must be non-zero".into()));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidArgument(format!(
                "unsupported channel count {channels}"
            )));
        }
        if data.len() != width * height * channels {
            return Err(Error::InvalidArgument(format!(
                "data length {} does not match {}x{}x{}",
                data.len(),
                width,
                height,
                channels
            )));
        }
        if let Some(bad) = data.iter().find(|v| !(v.is_finite() && (0.0..=1.0).contains(*v))) {
            return Err(Error::InvalidArgument(format!(
                "sample {bad} outside [0, 1]"
            )));
        }
        Ok(Image {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn constant(width: usize, height: usize, channels: usize, value: f64) -> Result<Image> {
        Image::new(width, height, channels, vec![value; width * height * channels])
    }

    /// Fills from a closure over (x, y, channel).
    pub fn from_fn<F>(width: usize, height: usize, channels: usize, f: F) -> Result<Image>
    where
        F: Fn(usize, usize, usize) -> f64,
    {
        let mut data = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(x, y, c));
                }
            }
        }
        Image::new(width, height, channels, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn sample(&self, x: usize, y: usize, c: usize) -> f64 {
        debug_assert!(x < self.width && y < self.height && c < self.channels);
        self.data[(y * self.width + x) * self.channels + c]
    }
}

/// Square crop extent from a reference box and a context factor.
///
/// A context factor of 1 keeps just the box; larger factors widen the
/// visual field around it.
pub fn crop_size(b: &Box, context_factor: f64, mode: ContextMode) -> Result<(f64, f64)> {
    b.validate()?;
    if !context_factor.is_finite() || context_factor < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "context factor {context_factor} must be finite and >= 1"
        )));
    }
    let (cw, ch) = match mode {
        ContextMode::PerAxis => (b.w, b.h),
        ContextMode::Mean => {
            let c = 0.5 * (b.w + b.h);
            (c, c)
        }
    };
    let side = ((b.w + (context_factor - 1.0) * cw) * (b.h + (context_factor - 1.0) * ch)).sqrt();
    if !(side > 0.0) || !side.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "degenerate crop extent {side}"
        )));
    }
    Ok((side, side))
}

/// Extracts the region of extent `crop_w` x `crop_h` centered on `b`,
/// padding out-of-image area with `pad_value`.
///
/// The buffer is ceil-sized; the crop origin is snapped to the integer
/// grid so no resampling happens here, and the sub-pixel residual is
/// folded into the returned box (the reference box in crop coordinates).
pub fn crop_image(
    img: &Image,
    b: &Box,
    crop_w: f64,
    crop_h: f64,
    pad_value: f64,
) -> Result<(Image, Box)> {
    b.validate()?;
    if !(crop_w > 0.0 && crop_h > 0.0 && crop_w.is_finite() && crop_h.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "crop extent ({crop_w}, {crop_h}) must be positive"
        )));
    }
    if !(pad_value.is_finite() && (0.0..=1.0).contains(&pad_value)) {
        return Err(Error::InvalidArgument(format!(
            "pad value {pad_value} outside [0, 1]"
        )));
    }

    let out_w = crop_w.ceil() as usize;
    let out_h = crop_h.ceil() as usize;
    let origin_x = (b.cx - 0.5 * crop_w).round();
    let origin_y = (b.cy - 0.5 * crop_h).round();
    let ox = origin_x as i64;
    let oy = origin_y as i64;

    let ch = img.channels();
    let mut data = vec![pad_value; out_w * out_h * ch];
    let (sw, sh) = (img.width() as i64, img.height() as i64);
    for y in 0..out_h as i64 {
        let sy = oy + y;
        if sy < 0 || sy >= sh {
            continue;
        }
        // copy the in-bounds span of this row in one shot
        let x0 = (-ox).max(0).min(out_w as i64);
        let x1 = (sw - ox).max(0).min(out_w as i64);
        if x0 >= x1 {
            continue;
        }
        let src_start = ((sy * sw + (ox + x0)) * ch as i64) as usize;
        let dst_start = ((y * out_w as i64 + x0) * ch as i64) as usize;
        let len = ((x1 - x0) * ch as i64) as usize;
        data[dst_start..dst_start + len]
            .copy_from_slice(&img.data()[src_start..src_start + len]);
    }

    let crop = Image::new(out_w, out_h, ch, data)?;
    let r = Box {
        cx: b.cx - origin_x,
        cy: b.cy - origin_y,
        w: b.w,
        h: b.h,
    };
    Ok((crop, r))
}
