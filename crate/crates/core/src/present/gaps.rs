use serde::{Deserialize, Serialize};

use crate::BoundingBox;

/// A horizontal band of the screen `[top, bottom)` that no detection box touches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerticalGap {
    pub top: u32,
    pub bottom: u32,
}

impl VerticalGap {
    pub fn height(&self) -> u32 {
        self.bottom - self.top
    }
}

/// Boundaries are the screen edges plus every box top and bottom. Each pair of
/// adjacent boundaries whose open interval meets no box becomes a gap.
pub fn compute_gaps(screen_height: u32, boxes: &[BoundingBox]) -> Vec<VerticalGap> {
    let mut bounds: Vec<u32> = Vec::with_capacity(2 + boxes.len() * 2);
    bounds.push(0);
    bounds.push(screen_height);
    for b in boxes {
        bounds.push(b.top().min(screen_height));
        bounds.push(b.bottom().min(screen_height));
    }
    bounds.sort_unstable();
    bounds.dedup();
    bounds
        .windows(2)
        .filter(|w| boxes.iter().all(|b| b.bottom() <= w[0] || b.top() >= w[1]))
        .map(|w| VerticalGap { top: w[0], bottom: w[1] })
        .collect()
}

/// Tallest gap; the topmost one wins a tie.
pub fn select_gap(gaps: &[VerticalGap]) -> Option<VerticalGap> {
    gaps.iter().copied().fold(None, |best, g| match best {
        Some(b) if b.height() > g.height() || (b.height() == g.height() && b.top <= g.top) => Some(b),
        _ => Some(g),
    })
}
