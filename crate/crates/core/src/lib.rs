//! QP-controlled non-uniform image resizing for tracking-style search
//! regions.
//!
//! Given a source frame, a reference box, and a temporal prior, the
//! pipeline crops a visual field around the reference, scores patch
//! importance with a Gaussian centered on the prior, solves a small
//! equality-constrained quadratic program for the grid intervals, and
//! resamples through the resulting separable mapping. The likely target
//! area comes out magnified by a controllable zoom factor while the full
//! visual field stays covered, and boxes can be mapped exactly between
//! crop and patch coordinates in both directions.

pub mod coord_map;
pub mod error;
pub mod geometry;
pub mod importance;
pub mod pipeline;
pub mod qp;
pub mod resample;
pub mod warp_grid;

pub use coord_map::{map_box_forward, map_box_reverse, map_point_forward, map_point_reverse};
pub use error::{Axis, Error, Result};
pub use geometry::{crop_image, crop_size, Box, ContextMode, Image};
pub use importance::{gaussian_value, score_grid, ImportanceParams, ScoreGrid};
pub use pipeline::{
    jitter_prior, make_search_patch, make_uniform_patch, target_size_stats, HyperParams,
    ResizeMode, ResizeResult, SequenceRecord, SizeStats,
};
pub use qp::{assemble, energy, solve, Intervals, QPProblem, ZoomParams};
pub use resample::{uniform_resize, warp};
pub use warp_grid::{axis_maps, control_grid, dense_grid, AxisMap, ControlGrid, DenseGrid, GridFile};
