//! Core pipeline for contextual privacy policies.
//!
//! A scan takes a GUI screenshot plus the app's privacy policy and produces one
//! annotated overlay per personal-data type found on screen. The three stages are
//! [`detect`] (which on-screen elements relate to which data type), [`segments`]
//! (which policy sentences talk about that type) and [`present`] (summarize, lay out
//! and draw the card). [`policy`] fetches and caches the policy text; [`wire`] holds
//! the response schema shared by the service and the client.
//!
//! Numeric kernels (box overlap, template correlation, detection scores) are generic
//! over [`Scalar`]; the aliases below pin the concrete types used by the service.

pub mod bundled;
pub mod detect;
pub mod geometry;
pub mod model;
pub mod policy;
pub mod present;
pub mod raster;
pub mod scalar;
pub mod segments;
pub mod wire;

pub use geometry::{iou, BoundingBox};
pub use model::{DataType, DetectionSource, ScanTimings, Taxonomy, UiElement};
pub use raster::RasterImage;
pub use scalar::Scalar;

/// Scalar used for scores on the wire and throughout the service.
pub type Real = f64;

pub type Detection = model::Detection<Real>;
pub type DetectionF32 = model::Detection<f32>;
pub type DetectionParams = detect::DetectionParams<Real>;
pub type DetectionParamsF32 = detect::DetectionParams<f32>;
