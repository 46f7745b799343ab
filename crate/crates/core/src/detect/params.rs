use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum ParamsError {
    #[error("ncc_threshold must lie in (0, 1], got {0}")]
    Threshold(f64),
    #[error("nms_iou must lie in (0, 1), got {0}")]
    NmsIou(f64),
    #[error("scales must be positive and strictly increasing")]
    Scales,
}

/// Tuning for template matching and duplicate suppression.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct DetectionParams<T: Scalar = f64> {
    pub ncc_threshold: T,
    pub scales: Vec<T>,
    pub nms_iou: T,
}

impl<T: Scalar> Default for DetectionParams<T> {
    fn default() -> Self {
        let f = T::from_f64_lossy;
        Self {
            ncc_threshold: f(0.85),
            scales: [0.5, 0.625, 0.78, 1.0, 1.25, 1.56, 2.0].into_iter().map(f).collect(),
            nms_iou: f(0.5),
        }
    }
}

impl<T: Scalar> DetectionParams<T> {
    pub fn validate(&self) -> Result<(), ParamsError> {
        let thr = self.ncc_threshold;
        if !(thr > T::zero() && thr <= T::one()) {
            return Err(ParamsError::Threshold(thr.to_f64_lossy()));
        }
        if !(self.nms_iou > T::zero() && self.nms_iou < T::one()) {
            return Err(ParamsError::NmsIou(self.nms_iou.to_f64_lossy()));
        }
        let increasing = self.scales.windows(2).all(|w| w[0] < w[1]);
        if self.scales.is_empty() || !increasing || self.scales[0] <= T::zero() {
            return Err(ParamsError::Scales);
        }
        Ok(())
    }
}
