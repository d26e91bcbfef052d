//! Control grid from solved intervals and the separable axis mapping
//! used for sampling and coordinate transforms.
//!
//! Axis alignment makes the 2D mapping a product of two monotone
//! piecewise-linear 1D maps, so the dense sampling grid never has to be
//! materialized for correctness.

use serde::{Deserialize, Serialize};

use crate::error::{Axis, Error, Result};
use crate::qp::Intervals;

/// Cumulative grid-point positions on the source crop. `xs` has n+1
/// entries from 0 to the crop width, `ys` m+1 entries from 0 to the
/// crop height, both strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

/// Prefix-sums the intervals into grid-point positions, pinning the
/// endpoints so coverage of the source is exact.
pub fn control_grid(d: &Intervals, crop_w: f64, crop_h: f64) -> Result<ControlGrid> {
    let xs = prefix(&d.d_col, crop_w, Axis::Col)?;
    let ys = prefix(&d.d_row, crop_h, Axis::Row)?;
    Ok(ControlGrid { xs, ys })
}

fn prefix(d: &[f64], total: f64, axis: Axis) -> Result<Vec<f64>> {
    if d.is_empty() {
        return Err(Error::InvalidArgument("no intervals".into()));
    }
    let sum: f64 = d.iter().sum();
    if (sum - total).abs() > 1e-9 * (1.0 + total.abs()) {
        return Err(Error::InvalidArgument(format!(
            "{axis} intervals sum to {sum}, expected {total}"
        )));
    }
    let mut out = Vec::with_capacity(d.len() + 1);
    out.push(0.0);
    let mut acc = 0.0;
    for &v in d {
        acc += v;
        out.push(acc);
    }
    // absorb float drift of the running sum into the last interval
    *out.last_mut().unwrap() = total;
    for (i, pair) in out.windows(2).enumerate() {
        if !(pair[1] > pair[0]) {
            return Err(Error::DegenerateDeformation {
                axis,
                index: i,
                value: pair[1] - pair[0],
            });
        }
    }
    Ok(out)
}

/// The separable mapping between target coordinates [0,w] x [0,h] and
/// source coordinates [0,W] x [0,H].
///
/// Breakpoints pair the fixed uniform target grid with the solved source
/// grid; evaluation between breakpoints is linear, which is exactly what
/// bilinear interpolation of an axis-aligned control grid reduces to.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisMap {
    xs: Vec<f64>,
    ys: Vec<f64>,
    tx: Vec<f64>,
    ty: Vec<f64>,
    w: f64,
    h: f64,
}

/// Builds the axis maps for a target extent of w x h pixels.
pub fn axis_maps(g: &ControlGrid, w: f64, h: f64) -> Result<AxisMap> {
    if !(w > 0.0 && h > 0.0 && w.is_finite() && h.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "target extent ({w}, {h}) must be positive"
        )));
    }
    check_knots(&g.xs, Axis::Col)?;
    check_knots(&g.ys, Axis::Row)?;
    Ok(AxisMap {
        xs: g.xs.clone(),
        ys: g.ys.clone(),
        tx: uniform_knots(g.xs.len() - 1, w),
        ty: uniform_knots(g.ys.len() - 1, h),
        w,
        h,
    })
}

fn check_knots(knots: &[f64], axis: Axis) -> Result<()> {
    if knots.len() < 2 || knots[0] != 0.0 {
        return Err(Error::InvalidArgument(format!(
            "{axis} grid must start at 0 with at least one interval"
        )));
    }
    for (i, pair) in knots.windows(2).enumerate() {
        if !(pair[1] > pair[0] && pair[1].is_finite()) {
            return Err(Error::DegenerateDeformation {
                axis,
                index: i,
                value: pair[1] - pair[0],
            });
        }
    }
    Ok(())
}

fn uniform_knots(segments: usize, total: f64) -> Vec<f64> {
    let mut t: Vec<f64> = (0..=segments)
        .map(|i| i as f64 * total / segments as f64)
        .collect();
    *t.last_mut().unwrap() = total;
    t
}

impl AxisMap {
    /// The uniform map: plain linear scaling on both axes. Built as a
    /// single-segment piecewise map so uniform and non-uniform resizing
    /// share one code path.
    pub fn uniform(source_w: f64, source_h: f64, w: f64, h: f64) -> AxisMap {
        AxisMap {
            xs: vec![0.0, source_w],
            ys: vec![0.0, source_h],
            tx: vec![0.0, w],
            ty: vec![0.0, h],
            w,
            h,
        }
    }

    /// Target x to source x.
    #[inline]
    pub fn map_x(&self, x: f64) -> f64 {
        eval_piecewise(&self.tx, &self.xs, x)
    }

    /// Target y to source y.
    #[inline]
    pub fn map_y(&self, y: f64) -> f64 {
        eval_piecewise(&self.ty, &self.ys, y)
    }

    /// Source x to target x (exact inverse of `map_x`).
    #[inline]
    pub fn invert_x(&self, x: f64) -> f64 {
        eval_piecewise(&self.xs, &self.tx, x)
    }

    /// Source y to target y.
    #[inline]
    pub fn invert_y(&self, y: f64) -> f64 {
        eval_piecewise(&self.ys, &self.ty, y)
    }

    /// (W, H) covered on the source.
    pub fn source_extent(&self) -> (f64, f64) {
        (*self.xs.last().unwrap(), *self.ys.last().unwrap())
    }

    /// (w, h) of the target.
    pub fn target_extent(&self) -> (f64, f64) {
        (self.w, self.h)
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }
}

/// Monotone piecewise-linear evaluation with exact knot reproduction.
/// Out-of-range inputs clamp to the boundary values; domain policy is
/// the caller's job.
fn eval_piecewise(knots_in: &[f64], knots_out: &[f64], x: f64) -> f64 {
    debug_assert_eq!(knots_in.len(), knots_out.len());
    let idx = knots_in.partition_point(|&t| t <= x);
    if idx == 0 {
        return knots_out[0];
    }
    if idx == knots_in.len() {
        return *knots_out.last().unwrap();
    }
    let i = idx - 1;
    if x == knots_in[i] {
        return knots_out[i];
    }
    let t = (x - knots_in[i]) / (knots_in[i + 1] - knots_in[i]);
    knots_out[i] + t * (knots_out[i + 1] - knots_out[i])
}

/// Dense per-pixel sampling positions, materialized for export or debug.
/// Entry (x, y) at row r, column c is the fractional source sample index
/// for target pixel (c, r).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseGrid {
    pub width: usize,
    pub height: usize,
    pub points: Vec<(f64, f64)>,
}

pub fn dense_grid(am: &AxisMap) -> DenseGrid {
    let (w, h) = am.target_extent();
    let width = w.round() as usize;
    let height = h.round() as usize;
    let sx: Vec<f64> = (0..width).map(|x| am.map_x(x as f64 + 0.5) - 0.5).collect();
    let sy: Vec<f64> = (0..height).map(|y| am.map_y(y as f64 + 0.5) - 0.5).collect();
    let mut points = Vec::with_capacity(width * height);
    for &y in &sy {
        for &x in &sx {
            points.push((x, y));
        }
    }
    DenseGrid {
        width,
        height,
        points,
    }
}

/// On-disk form of an axis map. Round-trips the breakpoints bit-exactly
/// through JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridFile {
    #[serde(rename = "W")]
    pub source_w: f64,
    #[serde(rename = "H")]
    pub source_h: f64,
    pub w: f64,
    pub h: f64,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl GridFile {
    pub fn from_axis_map(am: &AxisMap) -> GridFile {
        let (source_w, source_h) = am.source_extent();
        GridFile {
            source_w,
            source_h,
            w: am.w,
            h: am.h,
            xs: am.xs.clone(),
            ys: am.ys.clone(),
        }
    }

    pub fn into_axis_map(self) -> Result<AxisMap> {
        if self.xs.last() != Some(&self.source_w) || self.ys.last() != Some(&self.source_h) {
            return Err(Error::InvalidArgument(
                "grid endpoints disagree with the declared source extent".into(),
            ));
        }
        axis_maps(
            &ControlGrid {
                xs: self.xs,
                ys: self.ys,
            },
            self.w,
            self.h,
        )
    }
}
