//! Binary PPM (P6) and PGM (P5) image I/O with fixed 8-bit quantization,
//! plus optional PNG behind the `png` feature.
//!
//! Reads map samples to [0, 1] by v/255; writes quantize by
//! round-half-up of v*255, so golden files are stable across platforms.

use std::fs;
use std::path::Path;

use zoomgrid::Image;

#[derive(Debug)]
pub struct IoError(pub String);

impl std::fmt::Display for IoError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn read_image(path: &Path) -> Result<Image, IoError> {
    if is_png(path) {
        return read_png(path);
    }
    let bytes = fs::read(path).map_err(|e| IoError(format!("{}: {e}", path.display())))?;
    decode_netpbm(&bytes).map_err(|e| IoError(format!("{}: {e}", path.display())))
}

pub fn write_image(path: &Path, img: &Image) -> Result<(), IoError> {
    if is_png(path) {
        return write_png(path, img);
    }
    let bytes = encode_netpbm(img);
    fs::write(path, bytes).map_err(|e| IoError(format!("{}: {e}", path.display())))
}

fn is_png(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("png"))
}

pub fn encode_netpbm(img: &Image) -> Vec<u8> {
    let magic = if img.channels() == 3 { "P6" } else { "P5" };
    let mut out = format!("{magic}\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.data().iter().map(|&v| quantize(v)));
    out
}

pub fn decode_netpbm(bytes: &[u8]) -> Result<Image, String> {
    let mut pos = 0usize;
    let magic = next_token(bytes, &mut pos).ok_or("missing magic number")?;
    let channels = match magic.as_str() {
        "P6" => 3,
        "P5" => 1,
        other => return Err(format!("unsupported format {other:?}")),
    };
    let width: usize = next_token(bytes, &mut pos)
        .and_then(|t| t.parse().ok())
        .ok_or("bad width")?;
    let height: usize = next_token(bytes, &mut pos)
        .and_then(|t| t.parse().ok())
        .ok_or("bad height")?;
    let maxval: usize = next_token(bytes, &mut pos)
        .and_then(|t| t.parse().ok())
        .ok_or("bad maxval")?;
    if maxval != 255 {
        return Err(format!("unsupported maxval {maxval}, want 255"));
    }
    // exactly one whitespace byte separates the header from the raster
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err("missing raster separator".into());
    }
    pos += 1;
    let need = width * height * channels;
    let raster = &bytes[pos..];
    if raster.len() < need {
        return Err(format!("raster has {} bytes, need {need}", raster.len()));
    }
    let data = raster[..need].iter().map(|&b| b as f64 / 255.0).collect();
    Image::new(width, height, channels, data).map_err(|e| e.to_string())
}

/// Next header token, skipping whitespace and '#' comments.
fn next_token(bytes: &[u8], pos: &mut usize) -> Option<String> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if *pos > start {
        Some(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
    } else {
        None
    }
}

#[inline]
pub fn quantize(v: f64) -> u8 {
    (v * 255.0).round().clamp(0.0, 255.0) as u8
}

#[cfg(feature = "png")]
fn read_png(path: &Path) -> Result<Image, IoError> {
    let img = image::open(path).map_err(|e| IoError(format!("{}: {e}", path.display())))?;
    let rgb = img.to_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let data = rgb.as_raw().iter().map(|&b| b as f64 / 255.0).collect();
    Image::new(w, h, 3, data).map_err(|e| IoError(e.to_string()))
}

#[cfg(feature = "png")]
fn write_png(path: &Path, img: &Image) -> Result<(), IoError> {
    let w = img.width() as u32;
    let h = img.height() as u32;
    let err = |e: String| IoError(format!("{}: {e}", path.display()));
    if img.channels() == 3 {
        let buf: Vec<u8> = img.data().iter().map(|&v| quantize(v)).collect();
        image::RgbImage::from_raw(w, h, buf)
            .ok_or_else(|| err("buffer mismatch".into()))?
            .save(path)
            .map_err(|e| err(e.to_string()))
    } else {
        let buf: Vec<u8> = img.data().iter().map(|&v| quantize(v)).collect();
        image::GrayImage::from_raw(w, h, buf)
            .ok_or_else(|| err("buffer mismatch".into()))?
            .save(path)
            .map_err(|e| err(e.to_string()))
    }
}

#[cfg(not(feature = "png"))]
fn read_png(path: &Path) -> Result<Image, IoError> {
    Err(IoError(format!(
        "{}: png support not compiled in (enable the `png` feature)",
        path.display()
    )))
}

#[cfg(not(feature = "png"))]
fn write_png(path: &Path, _img: &Image) -> Result<(), IoError> {
    Err(IoError(format!(
        "{}: png support not compiled in (enable the `png` feature)",
        path.display()
    )))
}
