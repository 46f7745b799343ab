use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::model::Detection;
use crate::{iou, Scalar};

/// Rank order for suppression: higher score first, then smaller top, then smaller left.
pub(crate) fn rank<T: Scalar>(a: &Detection<T>, b: &Detection<T>) -> Ordering {
    b.score
        .partial_cmp(&a.score)
        .unwrap_or(Ordering::Equal)
        .then(a.bbox.top().cmp(&b.bbox.top()))
        .then(a.bbox.left().cmp(&b.bbox.left()))
}

/// Output order used throughout the pipeline: data type, top, left, then rank.
pub fn canonical_order<T: Scalar>(a: &Detection<T>, b: &Detection<T>) -> Ordering {
    a.data_type
        .cmp(&b.data_type)
        .then(a.bbox.top().cmp(&b.bbox.top()))
        .then(a.bbox.left().cmp(&b.bbox.left()))
        .then_with(|| rank(a, b))
        .then(a.bbox.cmp(&b.bbox))
        .then(a.source.cmp(&b.source))
}

/// Greedy per-type non-maximum suppression. A detection survives iff its IoU with
/// every already kept detection of the same type is at most `nms_iou`.
/// Different data types never suppress each other.
pub fn dedup_nms<T: Scalar>(detections: &[Detection<T>], nms_iou: T) -> Vec<Detection<T>> {
    let mut by_type: BTreeMap<&str, Vec<&Detection<T>>> = BTreeMap::new();
    for d in detections {
        by_type.entry(d.data_type.as_str()).or_default().push(d);
    }
    let mut out = Vec::new();
    for (_, mut group) in by_type {
        group.sort_by(|a, b| rank(a, b));
        let mut kept: Vec<&Detection<T>> = Vec::new();
        for d in group {
            if kept.iter().all(|k| iou::<T>(&k.bbox, &d.bbox) <= nms_iou) {
                kept.push(d);
            }
        }
        out.extend(kept.into_iter().cloned());
    }
    out.sort_by(canonical_order);
    out
}
