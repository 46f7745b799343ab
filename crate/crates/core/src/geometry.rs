//! Integer pixel boxes. Origin top-left, `right`/`bottom` exclusive.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Scalar;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeometryError {
    #[error("degenerate box [{0}, {1}, {2}, {3}]: need left < right and top < bottom")]
    Degenerate(u32, u32, u32, u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "[i64; 4]", into = "[u32; 4]")]
pub struct BoundingBox {
    left: u32,
    top: u32,
    right: u32,
    bottom: u32,
}

impl BoundingBox {
    pub fn new(left: u32, top: u32, right: u32, bottom: u32) -> Result<Self, GeometryError> {
        if left < right && top < bottom {
            Ok(Self { left, top, right, bottom })
        } else {
            Err(GeometryError::Degenerate(left, top, right, bottom))
        }
    }

    /// Box of the given size anchored at `(left, top)`.
    pub fn from_origin(left: u32, top: u32, width: u32, height: u32) -> Result<Self, GeometryError> {
        Self::new(left, top, left.saturating_add(width), top.saturating_add(height))
    }

    pub fn left(&self) -> u32 {
        self.left
    }
    pub fn top(&self) -> u32 {
        self.top
    }
    pub fn right(&self) -> u32 {
        self.right
    }
    pub fn bottom(&self) -> u32 {
        self.bottom
    }
    pub fn width(&self) -> u32 {
        self.right - self.left
    }
    pub fn height(&self) -> u32 {
        self.bottom - self.top
    }
    pub fn area(&self) -> u64 {
        u64::from(self.width()) * u64::from(self.height())
    }

    pub fn intersection(&self, other: &Self) -> Option<Self> {
        let left = self.left.max(other.left);
        let top = self.top.max(other.top);
        let right = self.right.min(other.right);
        let bottom = self.bottom.min(other.bottom);
        Self::new(left, top, right, bottom).ok()
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.intersection(other).is_some()
    }

    pub fn fits_within(&self, width: u32, height: u32) -> bool {
        self.right <= width && self.bottom <= height
    }

    /// Clips to a `width x height` canvas; `None` when nothing is left.
    pub fn clip(&self, width: u32, height: u32) -> Option<Self> {
        Self::new(self.left, self.top, self.right.min(width), self.bottom.min(height)).ok()
    }

    pub fn center(&self) -> (u32, u32) {
        (self.left + self.width() / 2, self.top + self.height() / 2)
    }

    pub fn to_array(&self) -> [u32; 4] {
        [self.left, self.top, self.right, self.bottom]
    }
}

impl TryFrom<[i64; 4]> for BoundingBox {
    type Error = String;

    fn try_from([l, t, r, b]: [i64; 4]) -> Result<Self, Self::Error> {
        let conv = |v: i64| u32::try_from(v).map_err(|_| format!("coordinate {v} out of range"));
        BoundingBox::new(conv(l)?, conv(t)?, conv(r)?, conv(b)?).map_err(|e| e.to_string())
    }
}

impl From<BoundingBox> for [u32; 4] {
    fn from(b: BoundingBox) -> Self {
        b.to_array()
    }
}

/// Intersection over union; 0 for disjoint boxes.
pub fn iou<T: Scalar>(a: &BoundingBox, b: &BoundingBox) -> T {
    let inter = a.intersection(b).map_or(0, |i| i.area());
    if inter == 0 {
        return T::zero();
    }
    let union = a.area() + b.area() - inter;
    T::from_f64_lossy(inter as f64 / union as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bx(l: u32, t: u32, r: u32, b: u32) -> BoundingBox {
        BoundingBox::new(l, t, r, b).unwrap()
    }

    /// Counts covered cells on a raster grid.
    fn pixel_iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
        let w = a.right().max(b.right());
        let h = a.bottom().max(b.bottom());
        let (mut inter, mut union) = (0u64, 0u64);
        for y in 0..h {
            for x in 0..w {
                let ina = x >= a.left() && x < a.right() && y >= a.top() && y < a.bottom();
                let inb = x >= b.left() && x < b.right() && y >= b.top() && y < b.bottom();
                inter += u64::from(ina && inb);
                union += u64::from(ina || inb);
            }
        }
        inter as f64 / union as f64
    }

    #[test]
    fn iou_examples() {
        let a = bx(0, 0, 10, 10);
        assert_eq!(iou::<f64>(&a, &a), 1.0);
        assert_eq!(iou::<f64>(&a, &bx(20, 20, 30, 30)), 0.0);
        let half = iou::<f64>(&a, &bx(5, 0, 15, 10));
        assert!((half - 50.0 / 150.0).abs() < 1e-12);
        assert!((half - pixel_iou(&a, &bx(5, 0, 15, 10))).abs() < 1e-12);
        assert!((iou::<f32>(&a, &bx(5, 0, 15, 10)) - 0.333_333_34).abs() < 1e-6);
    }

    #[test]
    fn touching_edges_do_not_intersect() {
        assert_eq!(iou::<f64>(&bx(0, 0, 10, 10), &bx(10, 0, 20, 10)), 0.0);
    }

    #[test]
    fn rejects_degenerate() {
        assert!(BoundingBox::new(5, 0, 5, 10).is_err());
        assert!(BoundingBox::new(0, 7, 3, 2).is_err());
        assert!(serde_json::from_str::<BoundingBox>("[-1,0,3,3]").is_err());
        assert_eq!(serde_json::from_str::<BoundingBox>("[1,2,3,4]").unwrap(), bx(1, 2, 3, 4));
    }

    fn arb_box() -> impl Strategy<Value = BoundingBox> {
        (0u32..60, 0u32..60, 1u32..40, 1u32..40)
            .prop_map(|(l, t, w, h)| BoundingBox::from_origin(l, t, w, h).unwrap())
    }

    proptest! {
        #[test]
        fn iou_symmetric_and_bounded(a in arb_box(), b in arb_box()) {
            let ab = iou::<f64>(&a, &b);
            prop_assert_eq!(ab, iou::<f64>(&b, &a));
            prop_assert!((0.0..=1.0).contains(&ab));
            prop_assert_eq!(iou::<f64>(&a, &a), 1.0);
        }

        #[test]
        fn iou_matches_pixel_count(a in arb_box(), b in arb_box()) {
            prop_assert!((iou::<f64>(&a, &b) - pixel_iou(&a, &b)).abs() < 1e-12);
        }
    }
}
