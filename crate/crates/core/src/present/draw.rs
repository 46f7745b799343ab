//! Small raster drawing kit: filled and outlined rounded rectangles, thick lines and
//! text in a fixed 8x8 bitmap font.

use font8x8::UnicodeFonts;

use crate::raster::Rgba;
use crate::{BoundingBox, RasterImage};

pub const GLYPH: u32 = 8;

pub fn fill_rect(img: &mut RasterImage, b: &BoundingBox, color: Rgba) {
    let Some(b) = b.clip(img.width(), img.height()) else { return };
    for y in b.top()..b.bottom() {
        for x in b.left()..b.right() {
            img.set_pixel(x, y, color);
        }
    }
}

/// Whether the pixel center lies inside the rounded rectangle `[l, r) x [t, b)`.
fn inside_rounded(px: f32, py: f32, l: f32, t: f32, r: f32, b: f32, radius: f32) -> bool {
    if px < l || px >= r || py < t || py >= b {
        return false;
    }
    let cx = px.clamp(l + radius, r - radius);
    let cy = py.clamp(t + radius, b - radius);
    let (dx, dy) = (px - cx, py - cy);
    dx * dx + dy * dy <= radius * radius
}

pub fn fill_rounded_rect(img: &mut RasterImage, b: &BoundingBox, radius: u32, color: Rgba) {
    let Some(b) = b.clip(img.width(), img.height()) else { return };
    let r = (radius.min(b.width() / 2).min(b.height() / 2)) as f32;
    let (l, t, rr, bb) = (b.left() as f32, b.top() as f32, b.right() as f32, b.bottom() as f32);
    for y in b.top()..b.bottom() {
        for x in b.left()..b.right() {
            if inside_rounded(x as f32 + 0.5, y as f32 + 0.5, l, t, rr, bb, r) {
                img.set_pixel(x, y, color);
            }
        }
    }
}

/// Outline drawn inside `b`, `thickness` pixels wide.
pub fn stroke_rounded_rect(img: &mut RasterImage, b: &BoundingBox, thickness: u32, radius: u32, color: Rgba) {
    let Some(b) = b.clip(img.width(), img.height()) else { return };
    let r = radius.min(b.width() / 2).min(b.height() / 2) as f32;
    let th = thickness as f32;
    let (l, t, rr, bb) = (b.left() as f32, b.top() as f32, b.right() as f32, b.bottom() as f32);
    let inner_r = (r - th).max(0.0);
    for y in b.top()..b.bottom() {
        for x in b.left()..b.right() {
            let (px, py) = (x as f32 + 0.5, y as f32 + 0.5);
            if inside_rounded(px, py, l, t, rr, bb, r) && !inside_rounded(px, py, l + th, t + th, rr - th, bb - th, inner_r) {
                img.set_pixel(x, y, color);
            }
        }
    }
}

/// Line with a square brush of side `thickness`.
pub fn line(img: &mut RasterImage, from: (i64, i64), to: (i64, i64), thickness: u32, color: Rgba) {
    let (mut x, mut y) = from;
    let dx = (to.0 - x).abs();
    let dy = -(to.1 - y).abs();
    let sx = if x < to.0 { 1 } else { -1 };
    let sy = if y < to.1 { 1 } else { -1 };
    let mut err = dx + dy;
    let half = i64::from(thickness) / 2;
    loop {
        for oy in -half..(i64::from(thickness) - half) {
            for ox in -half..(i64::from(thickness) - half) {
                let (px, py) = (x + ox, y + oy);
                if px >= 0 && py >= 0 {
                    img.set_pixel(px as u32, py as u32, color);
                }
            }
        }
        if (x, y) == to {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

/// Alpha-composites `src` onto `img` with its top-left corner at `(x, y)`.
pub fn overlay(img: &mut RasterImage, src: &RasterImage, x: u32, y: u32) {
    for sy in 0..src.height() {
        for sx in 0..src.width() {
            let p = src.pixel(sx, sy);
            img.blend_pixel(x + sx, y + sy, [p[0], p[1], p[2], 255], f32::from(p[3]) / 255.0);
        }
    }
}

/// Width in pixels of `s` drawn with [`text`] at `scale`.
pub fn text_width(s: &str, scale: u32) -> u32 {
    s.chars().count() as u32 * GLYPH * scale
}

fn glyph(c: char) -> [u8; 8] {
    font8x8::BASIC_FONTS
        .get(c)
        .or_else(|| font8x8::LATIN_FONTS.get(c))
        .or_else(|| font8x8::BASIC_FONTS.get('?'))
        .expect("'?' is in the basic font")
}

/// Draws one line of text with its top-left corner at `(x, y)`.
pub fn text(img: &mut RasterImage, x: u32, y: u32, s: &str, scale: u32, color: Rgba) {
    let mut cx = x;
    for c in s.chars() {
        let rows = glyph(c);
        for (gy, bits) in rows.iter().enumerate() {
            for gx in 0..GLYPH {
                if bits & (1 << gx) == 0 {
                    continue;
                }
                for sy in 0..scale {
                    for sx in 0..scale {
                        img.set_pixel(cx + gx * scale + sx, y + gy as u32 * scale + sy, color);
                    }
                }
            }
        }
        cx += GLYPH * scale;
    }
}

/// Greedy word wrap to at most `max_chars` characters per line; overlong words are split.
pub fn wrap(s: &str, max_chars: usize) -> Vec<String> {
    let max_chars = max_chars.max(1);
    let expanded = s.replace('\u{2026}', "...");
    let mut lines = Vec::new();
    let mut current = String::new();
    for word in expanded.split_whitespace() {
        let mut word: Vec<char> = word.chars().collect();
        while word.len() > max_chars {
            if !current.is_empty() {
                lines.push(std::mem::take(&mut current));
            }
            lines.push(word.drain(..max_chars).collect());
        }
        let word: String = word.into_iter().collect();
        let needed = if current.is_empty() { word.chars().count() } else { current.chars().count() + 1 + word.chars().count() };
        if needed > max_chars && !current.is_empty() {
            lines.push(std::mem::take(&mut current));
        }
        if !current.is_empty() {
            current.push(' ');
        }
        current.push_str(&word);
    }
    if !current.is_empty() {
        lines.push(current);
    }
    lines
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_respects_width() {
        let lines = wrap("We collect your precise location to show nearby stores.", 12);
        assert!(lines.iter().all(|l| l.chars().count() <= 12));
        assert_eq!(lines.join(" "), "We collect your precise location to show nearby stores.");
        assert_eq!(wrap("abcdefghij", 4), ["abcd", "efgh", "ij"]);
        assert!(wrap("   ", 5).is_empty());
        assert_eq!(wrap("end\u{2026}", 10), ["end..."]);
    }

    #[test]
    fn outline_stays_inside_box() {
        let mut img = RasterImage::filled(40, 40, [255; 4]).unwrap();
        let b = BoundingBox::new(10, 10, 30, 30).unwrap();
        stroke_rounded_rect(&mut img, &b, 3, 6, [0, 0, 0, 255]);
        for y in 0..40 {
            for x in 0..40 {
                let inside = (10..30).contains(&x) && (10..30).contains(&y);
                if !inside {
                    assert_eq!(img.pixel(x, y), [255; 4]);
                }
            }
        }
        assert_eq!(img.pixel(20, 10), [0, 0, 0, 255]);
        assert_eq!(img.pixel(20, 20), [255; 4]);
        // rounded corner leaves the very corner pixel untouched
        assert_eq!(img.pixel(10, 10), [255; 4]);
    }

    #[test]
    fn text_draws_pixels() {
        let mut img = RasterImage::filled(40, 20, [255; 4]).unwrap();
        text(&mut img, 0, 0, "Hi", 2, [0, 0, 0, 255]);
        let dark = img.as_bytes().chunks(4).filter(|p| p[0] == 0).count();
        assert!(dark > 20);
    }

    #[test]
    fn line_endpoints() {
        let mut img = RasterImage::filled(20, 20, [255; 4]).unwrap();
        line(&mut img, (2, 3), (15, 11), 1, [0, 0, 0, 255]);
        assert_eq!(img.pixel(2, 3), [0, 0, 0, 255]);
        assert_eq!(img.pixel(15, 11), [0, 0, 0, 255]);
    }
}
