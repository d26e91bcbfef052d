//! Bilinear resampling of the source crop through an axis map.

use crate::geometry::Image;
use crate::warp_grid::AxisMap;

/// One axis worth of precomputed taps: indices of the two source
/// samples and the blend fraction.
fn taps(len: usize, size: usize, map: impl Fn(f64) -> f64) -> Vec<(usize, usize, f64)> {
    (0..len)
        .map(|i| {
            let s = map(i as f64 + 0.5) - 0.5;
            let i0 = s.floor();
            let frac = s - i0;
            // clamp to the border sample; the map itself never leaves the
            // source, so only the half-pixel rim is affected
            let a = (i0 as i64).clamp(0, size as i64 - 1) as usize;
            let b = (i0 as i64 + 1).clamp(0, size as i64 - 1) as usize;
            (a, b, frac)
        })
        .collect()
}

#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + t * (b - a)
}

/// Samples `src` through the axis map, producing the target-sized image.
pub fn warp(src: &Image, am: &AxisMap) -> Image {
    assert!(src.width() > 0 && src.height() > 0, "source must be non-empty");
    let (tw, th) = am.target_extent();
    let w = tw.round() as usize;
    let h = th.round() as usize;
    let ch = src.channels();

    let tx = taps(w, src.width(), |x| am.map_x(x));
    let ty = taps(h, src.height(), |y| am.map_y(y));

    let mut data = Vec::with_capacity(w * h * ch);
    for &(y0, y1, fy) in &ty {
        for &(x0, x1, fx) in &tx {
            for c in 0..ch {
                let top = lerp(src.sample(x0, y0, c), src.sample(x1, y0, c), fx);
                let bot = lerp(src.sample(x0, y1, c), src.sample(x1, y1, c), fx);
                // rounding can overshoot the sample range by one ulp
                data.push(lerp(top, bot, fy).clamp(0.0, 1.0));
            }
        }
    }
    Image::new(w, h, ch, data).expect("bilinear blend stays in range")
}

/// Standard bilinear resize: the uniform map through the same sampling
/// path, with the identity case short-circuited bit-exactly.
pub fn uniform_resize(src: &Image, w: usize, h: usize) -> Image {
    assert!(w > 0 && h > 0, "target extent must be positive");
    if w == src.width() && h == src.height() {
        return src.clone();
    }
    let am = AxisMap::uniform(
        src.width() as f64,
        src.height() as f64,
        w as f64,
        h as f64,
    );
    warp(src, &am)
}
