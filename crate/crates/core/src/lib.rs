//! Layered vector clipart toolkit.
//!
//! Documents are stacks of filled closed paths built from line and cubic
//! Bézier segments. The crate covers sampling and geometric losses between
//! paths, hard and differentiable rasterization, random path synthesis,
//! post-fit shape regularization, an SVG subset reader/writer, and a
//! layer-by-layer vectorizer that turns a raster image into such a document.

pub mod document;
pub mod error;
pub mod fitter;
pub mod geometry;
pub mod image_io;
pub mod losses;
pub mod pathgen;
pub mod raster;
pub mod regularize;
pub mod svg_io;
