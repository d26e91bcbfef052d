//! Point and box transforms between source-crop coordinates and
//! resized-image coordinates.
//!
//! Forward maps labels from the crop onto the resized patch; reverse
//! maps predictions back. Both directions are exact piecewise-linear
//! inverses of each other, located by binary search over the
//! breakpoints.

use crate::error::{Error, Result};
use crate::geometry::Box;
use crate::warp_grid::AxisMap;

fn check_domain(x: f64, y: f64, max_x: f64, max_y: f64) -> Result<()> {
    if !(x.is_finite() && y.is_finite()) || !(0.0..=max_x).contains(&x) || !(0.0..=max_y).contains(&y)
    {
        return Err(Error::OutOfDomain { x, y, max_x, max_y });
    }
    Ok(())
}

/// Crop coordinates to resized coordinates.
pub fn map_point_forward(x: f64, y: f64, am: &AxisMap) -> Result<(f64, f64)> {
    let (sw, sh) = am.source_extent();
    check_domain(x, y, sw, sh)?;
    Ok((am.invert_x(x), am.invert_y(y)))
}

/// Resized coordinates back to crop coordinates.
pub fn map_point_reverse(x: f64, y: f64, am: &AxisMap) -> Result<(f64, f64)> {
    let (tw, th) = am.target_extent();
    check_domain(x, y, tw, th)?;
    Ok((am.map_x(x), am.map_y(y)))
}

/// Maps both corners forward and re-forms the box; axis alignment is
/// preserved by construction.
pub fn map_box_forward(b: &Box, am: &AxisMap) -> Result<Box> {
    let (x0, y0, x1, y1) = b.corners();
    let (fx0, fy0) = map_point_forward(x0, y0, am)?;
    let (fx1, fy1) = map_point_forward(x1, y1, am)?;
    Ok(Box::from_corners(fx0, fy0, fx1, fy1))
}

/// Maps both corners back to the crop and re-forms the box.
pub fn map_box_reverse(b: &Box, am: &AxisMap) -> Result<Box> {
    let (x0, y0, x1, y1) = b.corners();
    let (rx0, ry0) = map_point_reverse(x0, y0, am)?;
    let (rx1, ry1) = map_point_reverse(x1, y1, am)?;
    Ok(Box::from_corners(rx0, ry0, rx1, ry1))
}
