//! Masked normalized cross-correlation with a coarse-to-fine search.
//!
//! Scores are zero-mean NCC over the template's opaque pixels. A full pass runs on a
//! downsampled copy of the screen; every coarse local maximum above [`COARSE_FLOOR`]
//! is refined level by level and finally hill-climbed at full resolution, where a
//! peak must be a strict maximum of its 3x3 neighborhood.

use std::collections::{BTreeSet, HashMap};

use crate::Scalar;

/// Coarse score needed before a location is refined. Independent of the detection
/// threshold so that raising the threshold only ever filters peaks.
pub const COARSE_FLOOR: f64 = 0.5;
/// Smallest template side kept at the coarse level.
const MIN_COARSE_SIDE: u32 = 12;
const MAX_LEVEL: usize = 3;
/// Per-pixel variance under which a window counts as flat (score 0).
const FLAT_VARIANCE: f64 = 1e-5;
const MASK_ALPHA: f64 = 0.5;
const MAX_CLIMB: usize = 64;

/// Single-channel plane with a summed-area table for window statistics.
pub(crate) struct Plane<T> {
    pub width: u32,
    pub height: u32,
    pub data: Vec<T>,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    /// Per-row prefix sums, `width + 1` entries per row.
    row: Vec<(f64, f64)>,
}

impl<T: Scalar> Plane<T> {
    pub fn new(width: u32, height: u32, data: Vec<T>) -> Self {
        let (w, h) = (width as usize, height as usize);
        let stride = w + 1;
        let mut sum = vec![0.0; stride * (h + 1)];
        let mut sum_sq = vec![0.0; stride * (h + 1)];
        let mut prefix = vec![(0.0, 0.0); stride * h];
        for y in 0..h {
            let (mut row, mut row_sq) = (0.0, 0.0);
            for x in 0..w {
                let v = data[y * w + x].to_f64_lossy();
                row += v;
                row_sq += v * v;
                prefix[y * stride + x + 1] = (row, row_sq);
                sum[(y + 1) * stride + x + 1] = sum[y * stride + x + 1] + row;
                sum_sq[(y + 1) * stride + x + 1] = sum_sq[y * stride + x + 1] + row_sq;
            }
        }
        Self { width, height, data, sum, sum_sq, row: prefix }
    }

    /// Box-averaged copy at half resolution (floor dimensions, at least 1).
    pub fn half(&self) -> Self {
        let (w2, h2) = ((self.width / 2).max(1), (self.height / 2).max(1));
        let data = halve(&self.data, self.width, self.height);
        Self::new(w2, h2, data)
    }

    /// Sum and sum of squares of the `len` pixels starting at `(x, y)`.
    #[inline]
    fn run_sums(&self, x: usize, y: usize, len: usize) -> (f64, f64) {
        let i = y * (self.width as usize + 1) + x;
        let (a, b) = (self.row[i], self.row[i + len]);
        (b.0 - a.0, b.1 - a.1)
    }

    /// Sum and sum of squares over the rectangle `[x, x+w) x [y, y+h)`.
    fn rect_sums(&self, x: usize, y: usize, w: usize, h: usize) -> (f64, f64) {
        let stride = self.width as usize + 1;
        let (a, b, c, d) = (y * stride + x, y * stride + x + w, (y + h) * stride + x, (y + h) * stride + x + w);
        let area = |t: &[f64]| t[d] - t[b] - t[c] + t[a];
        (area(&self.sum), area(&self.sum_sq))
    }

    /// Sum of squared deviations over the rectangle `[x, x+w) x [y, y+h)`.
    fn rect_spread(&self, x: u32, y: u32, w: u32, h: u32) -> f64 {
        let (s, s2) = self.rect_sums(x as usize, y as usize, w as usize, h as usize);
        (s2 - s * s / f64::from(w * h)).max(0.0)
    }
}

pub(crate) fn halve<T: Scalar>(data: &[T], width: u32, height: u32) -> Vec<T> {
    let (w, h) = (width as usize, height as usize);
    let (w2, h2) = ((w / 2).max(1), (h / 2).max(1));
    let quarter = T::from_f64_lossy(0.25);
    let mut out = Vec::with_capacity(w2 * h2);
    for y in 0..h2 {
        for x in 0..w2 {
            let (xa, ya) = (2 * x, 2 * y);
            let (xb, yb) = ((xa + 1).min(w - 1), (ya + 1).min(h - 1));
            let v = data[ya * w + xa] + data[ya * w + xb] + data[yb * w + xa] + data[yb * w + xb];
            out.push(v * quarter);
        }
    }
    out
}

/// Zero-mean template taps laid out for one plane width.
pub(crate) struct Kernel<T> {
    pub width: u32,
    pub height: u32,
    runs: Vec<Run>,
    taps: Vec<T>,
    count: T,
    norm: T,
}

/// A contiguous horizontal stretch of masked template pixels.
#[derive(Clone, Copy)]
struct Run {
    x: usize,
    y: usize,
    len: usize,
    /// Offset of the first pixel in a plane of the kernel's plane width.
    offset: usize,
    first_tap: usize,
}

const LANES: usize = 4;

impl<T: Scalar> Kernel<T> {
    /// `None` when the mask is empty or the masked template is flat.
    pub fn new(gray: &[T], alpha: &[T], width: u32, height: u32, plane_width: u32) -> Option<Self> {
        let cut = T::from_f64_lossy(MASK_ALPHA);
        let (w, pw) = (width as usize, plane_width as usize);
        let mut runs: Vec<Run> = Vec::new();
        let mut taps = Vec::new();
        for y in 0..height as usize {
            let mut open = false;
            for x in 0..w {
                let i = y * w + x;
                if alpha[i] < cut {
                    open = false;
                    continue;
                }
                if open {
                    runs.last_mut().expect("open run").len += 1;
                } else {
                    runs.push(Run { x, y, len: 1, offset: y * pw + x, first_tap: taps.len() });
                    open = true;
                }
                taps.push(gray[i]);
            }
        }
        if taps.is_empty() {
            return None;
        }
        let count = T::from_count(taps.len());
        let mean = taps.iter().fold(T::zero(), |a, &v| a + v) / count;
        for t in &mut taps {
            *t = *t - mean;
        }
        let spread = taps.iter().fold(T::zero(), |a, &v| a + v * v);
        if spread.to_f64_lossy() <= FLAT_VARIANCE * count.to_f64_lossy() {
            return None;
        }
        Some(Self { width, height, runs, taps, count, norm: spread.sqrt() })
    }

    /// NCC of the window whose top-left corner is `(x, y)`; 0 for flat windows.
    pub fn score(&self, plane: &Plane<T>, x: u32, y: u32) -> T {
        let n = self.count.to_f64_lossy();
        if plane.rect_spread(x, y, self.width, self.height) <= FLAT_VARIANCE * n {
            return T::zero();
        }
        let (x, y) = (x as usize, y as usize);
        let window = &plane.data[y * plane.width as usize + x..];
        let (mut s1, mut s2) = (0.0, 0.0);
        let mut lanes = [T::zero(); LANES];
        for run in &self.runs {
            let (a, b) = plane.run_sums(x + run.x, y + run.y, run.len);
            s1 += a;
            s2 += b;
            let v = &window[run.offset..run.offset + run.len];
            let t = &self.taps[run.first_tap..run.first_tap + run.len];
            let (vc, tc) = (v.chunks_exact(LANES), t.chunks_exact(LANES));
            let (vr, tr) = (vc.remainder(), tc.remainder());
            for (a, b) in vc.zip(tc) {
                for k in 0..LANES {
                    lanes[k] = lanes[k] + a[k] * b[k];
                }
            }
            for (k, (&a, &b)) in vr.iter().zip(tr).enumerate() {
                lanes[k] = lanes[k] + a * b;
            }
        }
        let dot = lanes.iter().fold(T::zero(), |a, &v| a + v);
        let spread = s2 - s1 * s1 / n;
        if spread <= FLAT_VARIANCE * n {
            return T::zero();
        }
        let spread = T::from_f64_lossy(spread);
        (dot / (self.norm * spread.sqrt())).max(-T::one()).min(T::one())
    }
}

/// Screen planes at 1, 1/2, 1/4 and 1/8 resolution.
pub(crate) struct Pyramid<T> {
    pub levels: Vec<Plane<T>>,
}

impl<T: Scalar> Pyramid<T> {
    pub fn new(base: Plane<T>) -> Self {
        let mut levels = vec![base];
        while levels.len() <= MAX_LEVEL {
            let last = levels.last().expect("non-empty");
            if last.width < 2 || last.height < 2 {
                break;
            }
            let next = last.half();
            levels.push(next);
        }
        Self { levels }
    }
}

/// A template resampled to one scale: gray and alpha planes at full resolution.
pub(crate) struct ScaledTemplate<T> {
    pub width: u32,
    pub height: u32,
    pub gray: Vec<T>,
    pub alpha: Vec<T>,
}

/// A located correlation peak at full resolution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Peak<T> {
    pub x: u32,
    pub y: u32,
    pub score: T,
}

/// Full-resolution peaks of `template` on `pyramid` with score >= `min_score`.
pub(crate) fn find_peaks<T: Scalar>(pyramid: &Pyramid<T>, template: &ScaledTemplate<T>, min_score: T) -> Vec<Peak<T>> {
    let base = &pyramid.levels[0];
    if template.width > base.width || template.height > base.height {
        return Vec::new();
    }

    // kernels per level, down to the coarsest one whose template stays legible
    let mut kernels: Vec<Option<Kernel<T>>> = Vec::new();
    let (mut tg, mut ta) = (template.gray.clone(), template.alpha.clone());
    let (mut tw, mut th) = (template.width, template.height);
    for (level, plane) in pyramid.levels.iter().enumerate() {
        if level > 0 && (tw.min(th) < MIN_COARSE_SIDE || tw > plane.width || th > plane.height) {
            break;
        }
        kernels.push(Kernel::new(&tg, &ta, tw, th, plane.width));
        if tw < 2 || th < 2 {
            break;
        }
        tg = halve(&tg, tw, th);
        ta = halve(&ta, tw, th);
        tw /= 2;
        th /= 2;
    }
    let Some(Some(_)) = kernels.first() else {
        return Vec::new();
    };
    let coarse = (0..kernels.len()).rev().find(|&l| kernels[l].is_some()).expect("level 0 exists");

    let mut starts = coarse_candidates(&pyramid.levels[coarse], kernels[coarse].as_ref().expect("present"));
    let floor = T::from_f64_lossy(COARSE_FLOOR);
    let mut level = coarse;
    while level > 0 {
        level -= 1;
        let Some(kernel) = kernels[level].as_ref() else {
            starts = starts.into_iter().map(|(x, y)| (x * 2, y * 2)).collect();
            continue;
        };
        let mut scorer = Scorer::new(&pyramid.levels[level], kernel);
        starts = starts
            .into_iter()
            .map(|(x, y)| scorer.best_in_window(x * 2, y * 2, 2))
            .filter(|&(_, s)| s >= floor)
            .map(|(at, _)| at)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
    }

    let mut scorer = Scorer::new(base, kernels[0].as_ref().expect("level 0 present"));
    let peaks: BTreeSet<(u32, u32)> = starts.into_iter().filter_map(|start| scorer.climb(start)).collect();
    peaks
        .into_iter()
        .filter_map(|(x, y)| {
            let score = scorer.score(x, y);
            (score >= min_score).then_some(Peak { x, y, score })
        })
        .collect()
}

/// Dense coarse pass: non-strict 3x3 local maxima scoring at least [`COARSE_FLOOR`].
fn coarse_candidates<T: Scalar>(plane: &Plane<T>, kernel: &Kernel<T>) -> Vec<(u32, u32)> {
    let (cols, rows) = ((plane.width - kernel.width) as usize + 1, (plane.height - kernel.height) as usize + 1);
    let mut scores = vec![T::zero(); cols * rows];
    for y in 0..rows {
        for x in 0..cols {
            scores[y * cols + x] = kernel.score(plane, x as u32, y as u32);
        }
    }
    let floor = T::from_f64_lossy(COARSE_FLOOR);
    let mut out = Vec::new();
    for y in 0..rows {
        for x in 0..cols {
            let s = scores[y * cols + x];
            if s < floor {
                continue;
            }
            let mut is_max = true;
            'n: for ny in y.saturating_sub(1)..=(y + 1).min(rows - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(cols - 1) {
                    if scores[ny * cols + nx] > s {
                        is_max = false;
                        break 'n;
                    }
                }
            }
            if is_max {
                out.push((x as u32, y as u32));
            }
        }
    }
    out
}

/// Scores on one level, memoized so overlapping refinement windows share work.
struct Scorer<'a, T> {
    plane: &'a Plane<T>,
    kernel: &'a Kernel<T>,
    max: (u32, u32),
    memo: HashMap<(u32, u32), T>,
}

impl<'a, T: Scalar> Scorer<'a, T> {
    fn new(plane: &'a Plane<T>, kernel: &'a Kernel<T>) -> Self {
        let max = (plane.width - kernel.width, plane.height - kernel.height);
        Self { plane, kernel, max, memo: HashMap::new() }
    }

    fn score(&mut self, x: u32, y: u32) -> T {
        let (plane, kernel) = (self.plane, self.kernel);
        *self.memo.entry((x, y)).or_insert_with(|| kernel.score(plane, x, y))
    }

    /// Best-scoring position within `radius` of `(cx, cy)`; ties go to the smaller y, then x.
    fn best_in_window(&mut self, cx: u32, cy: u32, radius: u32) -> ((u32, u32), T) {
        let (mx, my) = self.max;
        let (cx, cy) = (cx.min(mx), cy.min(my));
        let mut best = ((cx, cy), T::neg_infinity());
        for y in cy.saturating_sub(radius)..=(cy + radius).min(my) {
            for x in cx.saturating_sub(radius)..=(cx + radius).min(mx) {
                let s = self.score(x, y);
                if s > best.1 {
                    best = ((x, y), s);
                }
            }
        }
        best
    }

    /// Hill-climbs to a local maximum; `Some` only if it is a strict 3x3 maximum.
    fn climb(&mut self, start: (u32, u32)) -> Option<(u32, u32)> {
        let (mx, my) = self.max;
        let mut at = (start.0.min(mx), start.1.min(my));
        for _ in 0..MAX_CLIMB {
            let here = self.score(at.0, at.1);
            let mut best = (at, here);
            let mut strict = true;
            for y in at.1.saturating_sub(1)..=(at.1 + 1).min(my) {
                for x in at.0.saturating_sub(1)..=(at.0 + 1).min(mx) {
                    if (x, y) == at {
                        continue;
                    }
                    let s = self.score(x, y);
                    strict &= s < here;
                    if s > best.1 {
                        best = ((x, y), s);
                    }
                }
            }
            if best.0 == at {
                return strict.then_some(at);
            }
            at = best.0;
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane_from(w: u32, h: u32, f: impl Fn(u32, u32) -> f64) -> Plane<f64> {
        let data = (0..h).flat_map(|y| (0..w).map(move |x| (x, y))).map(|(x, y)| f(x, y)).collect();
        Plane::new(w, h, data)
    }

    /// Direct masked NCC from the definition.
    fn reference_ncc(plane: &Plane<f64>, t: &[f64], mask: &[bool], tw: u32, x: u32, y: u32) -> f64 {
        let idx: Vec<usize> = (0..t.len()).filter(|&i| mask[i]).collect();
        let n = idx.len() as f64;
        let img: Vec<f64> = idx
            .iter()
            .map(|&i| {
                let (dx, dy) = (i as u32 % tw, i as u32 / tw);
                plane.data[((y + dy) * plane.width + x + dx) as usize]
            })
            .collect();
        let tm = idx.iter().map(|&i| t[i]).sum::<f64>() / n;
        let im = img.iter().sum::<f64>() / n;
        let (mut num, mut ta, mut ia) = (0.0, 0.0, 0.0);
        for (k, &i) in idx.iter().enumerate() {
            num += (t[i] - tm) * (img[k] - im);
            ta += (t[i] - tm).powi(2);
            ia += (img[k] - im).powi(2);
        }
        if ia <= FLAT_VARIANCE * n {
            0.0
        } else {
            num / (ta * ia).sqrt()
        }
    }

    #[test]
    fn kernel_score_matches_definition() {
        let plane = plane_from(20, 16, |x, y| ((x * 7 + y * 13) % 11) as f64 / 10.0);
        let (tw, th) = (5u32, 4u32);
        let t: Vec<f64> = (0..tw * th).map(|i| ((i * 5) % 7) as f64 / 6.0).collect();
        let mask: Vec<bool> = (0..tw * th).map(|i| i % 3 != 0).collect();
        let alpha: Vec<f64> = mask.iter().map(|&m| if m { 1.0 } else { 0.0 }).collect();
        let k = Kernel::new(&t, &alpha, tw, th, plane.width).unwrap();
        for (x, y) in [(0, 0), (3, 5), (15, 12), (7, 1)] {
            let got = k.score(&plane, x, y);
            let want = reference_ncc(&plane, &t, &mask, tw, x, y);
            assert!((got - want).abs() < 1e-9, "({x},{y}) {got} vs {want}");
        }
    }

    #[test]
    fn flat_window_scores_zero() {
        let plane = plane_from(10, 10, |_, _| 0.7);
        let t: Vec<f64> = (0..9).map(|i| (i % 2) as f64).collect();
        let k = Kernel::new(&t, &[1.0; 9], 3, 3, 10).unwrap();
        assert_eq!(k.score(&plane, 2, 2), 0.0);
        assert!(Kernel::new(&[0.5; 9], &[1.0; 9], 3, 3, 10).is_none());
        assert!(Kernel::new(&t, &[0.0; 9], 3, 3, 10).is_none());
    }

    #[test]
    fn finds_exact_copy() {
        // textured 32x32 patch pasted at (40, 25) in a 120x90 plane
        let patch = |x: u32, y: u32| {
            let (dx, dy) = (x as f64 - 15.5, y as f64 - 15.5);
            if (dx * dx + dy * dy).sqrt() < 9.0 { 0.1 } else if x % 8 < 3 { 0.6 } else { 0.9 }
        };
        let plane = plane_from(120, 90, |x, y| {
            if (40..72).contains(&x) && (25..57).contains(&y) { patch(x - 40, y - 25) } else { 1.0 }
        });
        let gray: Vec<f64> = (0..32 * 32).map(|i| patch(i % 32, i / 32)).collect();
        let tpl = ScaledTemplate { width: 32, height: 32, gray, alpha: vec![1.0; 32 * 32] };
        let peaks = find_peaks(&Pyramid::new(plane), &tpl, 0.85);
        assert_eq!(peaks.len(), 1, "{peaks:?}");
        assert_eq!((peaks[0].x, peaks[0].y), (40, 25));
        assert!((peaks[0].score - 1.0).abs() < 1e-9);
    }
}
