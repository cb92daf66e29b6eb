//! Sub-pixel measurement of silhouette boundaries by virtual image correlation.
//!
//! - [`curve`]: parametric curve families and their differential geometry.
//! - [`raster`]: grayscale images, PGM I/O, bilinear sampling.
//! - [`synth`]: exact-coverage synthetic silhouettes, noise and quantization.
//! - [`vic`]: the measurement engine.
//! - [`diagnostics`]: signed distance profile, spectrum, uncertainty predictors.
//! - [`bench`]: Monte-Carlo studies.

pub mod bench;
pub mod curve;
pub mod diagnostics;
pub mod raster;
pub mod synth;
pub mod vic;

pub type Vec2 = nalgebra::Vector2<f64>;
