//! Regenerates the bundled icon templates and demo app screens.
//!
//! ```text
//! cargo run -p privscan-core --example gen_assets
//! ```
//!
//! Output goes to `crates/core/assets/`. The files are checked in; rerun only when
//! the drawings change, then refresh the golden images.

use std::path::{Path, PathBuf};

use privscan_core::present::draw;
use privscan_core::{BoundingBox, RasterImage, UiElement};

const ICON: u32 = 48;
const SUPERSAMPLE: u32 = 4;
const INK: [u8; 4] = [38, 50, 56, 255];

type Shape = fn(f32, f32) -> bool;

fn circle(u: f32, v: f32, cx: f32, cy: f32, r: f32) -> bool {
    (u - cx).powi(2) + (v - cy).powi(2) <= r * r
}

fn rect(u: f32, v: f32, l: f32, t: f32, r: f32, b: f32) -> bool {
    u >= l && u <= r && v >= t && v <= b
}

fn triangle(u: f32, v: f32, a: (f32, f32), b: (f32, f32), c: (f32, f32)) -> bool {
    let s = |p: (f32, f32), q: (f32, f32)| (u - q.0) * (p.1 - q.1) - (p.0 - q.0) * (v - q.1);
    let (d1, d2, d3) = (s(a, b), s(b, c), s(c, a));
    let neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
    let pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
    !(neg && pos)
}

fn ring(u: f32, v: f32, cx: f32, cy: f32, r_out: f32, r_in: f32) -> bool {
    circle(u, v, cx, cy, r_out) && !circle(u, v, cx, cy, r_in)
}

fn location(u: f32, v: f32) -> bool {
    let body = circle(u, v, 0.5, 0.38, 0.22) || triangle(u, v, (0.29, 0.45), (0.71, 0.45), (0.5, 0.88));
    body && !circle(u, v, 0.5, 0.38, 0.09)
}

fn camera(u: f32, v: f32) -> bool {
    let body = rect(u, v, 0.16, 0.32, 0.84, 0.76) || rect(u, v, 0.36, 0.22, 0.62, 0.34);
    (body && !circle(u, v, 0.5, 0.54, 0.16)) || circle(u, v, 0.5, 0.54, 0.09) || rect(u, v, 0.7, 0.38, 0.76, 0.42)
}

fn photos(u: f32, v: f32) -> bool {
    let frame = rect(u, v, 0.18, 0.24, 0.82, 0.76) && !rect(u, v, 0.25, 0.31, 0.75, 0.69);
    let hills = triangle(u, v, (0.25, 0.69), (0.43, 0.42), (0.62, 0.69)) || triangle(u, v, (0.5, 0.69), (0.64, 0.52), (0.75, 0.69));
    frame || hills || circle(u, v, 0.66, 0.38, 0.06)
}

fn account(u: f32, v: f32) -> bool {
    let head = circle(u, v, 0.5, 0.36, 0.15);
    let shoulders = v >= 0.58 && ((u - 0.5) / 0.3).powi(2) + ((v - 0.86) / 0.28).powi(2) <= 1.0;
    head || shoulders
}

fn contacts(u: f32, v: f32) -> bool {
    let book = rect(u, v, 0.22, 0.16, 0.72, 0.84);
    let person = circle(u, v, 0.47, 0.42, 0.08) || (v >= 0.55 && v <= 0.68 && ((u - 0.47) / 0.15).powi(2) + ((v - 0.68) / 0.13).powi(2) <= 1.0);
    let tabs = rect(u, v, 0.72, 0.26, 0.8, 0.34) || rect(u, v, 0.72, 0.46, 0.8, 0.54) || rect(u, v, 0.72, 0.66, 0.8, 0.74);
    (book && !person) || tabs
}

fn microphone(u: f32, v: f32) -> bool {
    let capsule = rect(u, v, 0.4, 0.26, 0.6, 0.5) || circle(u, v, 0.5, 0.26, 0.1) || circle(u, v, 0.5, 0.5, 0.1);
    let cup = v >= 0.48 && ring(u, v, 0.5, 0.48, 0.21, 0.16);
    let stem = rect(u, v, 0.475, 0.68, 0.525, 0.8);
    let base = rect(u, v, 0.36, 0.78, 0.64, 0.83);
    capsule || cup || stem || base
}

fn identifiers(u: f32, v: f32) -> bool {
    let card = rect(u, v, 0.14, 0.3, 0.86, 0.72);
    let face = circle(u, v, 0.33, 0.46, 0.07) || (v >= 0.56 && v <= 0.64 && rect(u, v, 0.22, 0.56, 0.44, 0.64));
    let bars = rect(u, v, 0.52, 0.4, 0.78, 0.46) || rect(u, v, 0.52, 0.54, 0.72, 0.6);
    (card && !face && !bars) || rect(u, v, 0.4, 0.2, 0.6, 0.3)
}

fn icon(shape: Shape) -> RasterImage {
    let n = ICON * SUPERSAMPLE;
    let mut img = RasterImage::filled(ICON, ICON, [255, 255, 255, 0]).unwrap();
    for y in 0..ICON {
        for x in 0..ICON {
            let (mut covered, mut inked) = (0u32, 0u32);
            for sy in 0..SUPERSAMPLE {
                for sx in 0..SUPERSAMPLE {
                    let u = ((x * SUPERSAMPLE + sx) as f32 + 0.5) / n as f32;
                    let v = ((y * SUPERSAMPLE + sy) as f32 + 0.5) / n as f32;
                    if circle(u, v, 0.5, 0.5, 0.49) {
                        covered += 1;
                        inked += u32::from(shape(u, v));
                    }
                }
            }
            if covered == 0 {
                continue;
            }
            let ink = inked as f32 / covered as f32;
            let c = |k: usize| (255.0 + (f32::from(INK[k]) - 255.0) * ink).round() as u8;
            let alpha = (255 * covered / (SUPERSAMPLE * SUPERSAMPLE)) as u8;
            img.set_pixel(x, y, [c(0), c(1), c(2), alpha]);
        }
    }
    img
}

const BG: [u8; 4] = [246, 246, 246, 255];
const BAR: [u8; 4] = [93, 64, 55, 255];
const WHITE: [u8; 4] = [255, 255, 255, 255];
const TEXT: [u8; 4] = [33, 33, 33, 255];
const MUTED: [u8; 4] = [140, 140, 140, 255];
const BORDER: [u8; 4] = [220, 220, 220, 255];
const W: u32 = 540;
const H: u32 = 960;

struct Page {
    img: RasterImage,
    elements: Vec<UiElement>,
}

fn bx(l: u32, t: u32, r: u32, b: u32) -> BoundingBox {
    BoundingBox::new(l, t, r, b).unwrap()
}

impl Page {
    fn new(title: &str) -> Self {
        let mut page = Self { img: RasterImage::filled(W, H, BG).unwrap(), elements: Vec::new() };
        draw::fill_rect(&mut page.img, &bx(0, 0, W, 56), BAR);
        page.label(20, 16, title, 3, WHITE);
        draw::fill_rect(&mut page.img, &bx(0, 904, W, H), WHITE);
        draw::fill_rect(&mut page.img, &bx(0, 904, W, 906), BORDER);
        for (i, tab) in ["Home", "Menu", "Post", "Rewards", "More"].iter().enumerate() {
            let cx = 54 + i as u32 * 108;
            let x = cx - draw::text_width(tab, 2) / 2;
            page.label(x, 924, tab, 2, MUTED);
        }
        page
    }

    /// Draws text and records it in the sidecar.
    fn label(&mut self, x: u32, y: u32, s: &str, scale: u32, color: [u8; 4]) {
        draw::text(&mut self.img, x, y, s, scale, color);
        let b = bx(x, y, x + draw::text_width(s, scale), y + draw::GLYPH * scale);
        self.elements.push(UiElement { bbox: b, text: s.to_string() });
    }

    fn button(&mut self, b: BoundingBox, s: &str) {
        draw::fill_rounded_rect(&mut self.img, &b, 12, BAR);
        let x = b.left() + (b.width() - draw::text_width(s, 2)) / 2;
        let y = b.top() + (b.height() - 16) / 2;
        draw::text(&mut self.img, x, y, s, 2, WHITE);
        self.elements.push(UiElement { bbox: b, text: s.to_string() });
    }

    fn card(&mut self, b: BoundingBox) {
        draw::fill_rounded_rect(&mut self.img, &b, 10, BORDER);
        let inner = bx(b.left() + 1, b.top() + 1, b.right() - 1, b.bottom() - 1);
        draw::fill_rounded_rect(&mut self.img, &inner, 9, WHITE);
    }

    fn icon(&mut self, icon: &RasterImage, x: u32, y: u32, scale: f32) -> BoundingBox {
        let s = ((ICON as f32) * scale).round() as u32;
        let scaled = if s == ICON { icon.clone() } else { icon.resize(s, s) };
        draw::overlay(&mut self.img, &scaled, x, y);
        bx(x, y, x + s, y + s)
    }

    fn save(&self, dir: &Path, name: &str) {
        std::fs::write(dir.join(format!("{name}.png")), self.img.to_png()).unwrap();
        let json = serde_json::to_string_pretty(&serde_json::json!({ "elements": self.elements })).unwrap();
        std::fs::write(dir.join(format!("{name}.sidecar.json")), json + "\n").unwrap();
    }
}

fn home(icons: &Icons) -> Page {
    let mut p = Page::new("Home");
    p.icon(&icons.location, 24, 80, 1.0);
    p.label(88, 90, "Bean Corner", 2, TEXT);
    p.label(88, 112, "George St, Sydney", 2, MUTED);
    p.button(bx(24, 150, 516, 206), "Enable location services");
    p.label(24, 240, "Today's specials", 3, TEXT);
    for (i, (item, price)) in [("Flat white", "$4.50"), ("Cold brew", "$5.20"), ("Banana bread", "$3.80")].iter().enumerate() {
        let top = 286 + i as u32 * 104;
        p.card(bx(24, top, 516, top + 88));
        draw::fill_rounded_rect(&mut p.img, &bx(40, top + 14, 100, top + 74), 8, [161, 136, 127, 255]);
        p.label(116, top + 22, item, 2, TEXT);
        p.label(116, top + 50, price, 2, MUTED);
    }
    p.button(bx(24, 620, 516, 676), "Order ahead");
    p
}

fn posting(icons: &Icons) -> Page {
    let mut p = Page::new("New Post");
    p.icon(&icons.account, 24, 76, 1.25);
    p.label(100, 98, "Share with the community", 2, TEXT);
    p.card(bx(24, 160, 516, 540));
    p.label(40, 180, "What's on your mind?", 2, MUTED);
    p.icon(&icons.camera, 24, 572, 1.0);
    p.icon(&icons.photos, 96, 572, 1.0);
    p.button(bx(376, 572, 516, 620), "Publish");
    p.label(24, 660, "Tag a store", 2, TEXT);
    p.label(24, 690, "Add a drink rating", 2, TEXT);
    p
}

fn settings(_: &Icons) -> Page {
    let mut p = Page::new("Settings");
    let rows = ["Account", "Change password", "Notifications", "Language", "Dark mode", "Help centre", "About"];
    for (i, row) in rows.iter().enumerate() {
        let top = 76 + i as u32 * 72;
        p.card(bx(16, top, 524, top + 60));
        p.label(36, top + 22, row, 2, TEXT);
        draw::text(&mut p.img, 490, top + 22, ">", 2, MUTED);
    }
    p
}

fn rewards(_: &Icons) -> Page {
    let mut p = Page::new("Rewards");
    draw::fill_rounded_rect(&mut p.img, &bx(24, 80, 516, 260), 16, BAR);
    p.label(48, 110, "Your balance", 2, WHITE);
    p.label(48, 150, "1,250 pts", 4, WHITE);
    // gift box drawing
    draw::fill_rect(&mut p.img, &bx(408, 150, 480, 222), [255, 204, 128, 255]);
    draw::fill_rect(&mut p.img, &bx(400, 136, 488, 156), [255, 183, 77, 255]);
    draw::fill_rect(&mut p.img, &bx(438, 136, 450, 222), [229, 57, 53, 255]);
    p.button(bx(24, 290, 516, 346), "Redeem a free coffee");
    for (i, row) in ["Daily check-in", "Birthday treat", "Double points Friday"].iter().enumerate() {
        let top = 380 + i as u32 * 80;
        p.card(bx(24, top, 516, top + 64));
        p.label(44, top + 24, row, 2, TEXT);
    }
    p
}

struct Icons {
    location: RasterImage,
    camera: RasterImage,
    photos: RasterImage,
    account: RasterImage,
}

fn main() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("assets");
    let shapes: [(&str, Shape); 7] = [
        ("location", location),
        ("camera", camera),
        ("photos", photos),
        ("account", account),
        ("contacts", contacts),
        ("microphone", microphone),
        ("identifiers", identifiers),
    ];
    let templates = root.join("templates");
    for (name, shape) in shapes {
        std::fs::write(templates.join(format!("{name}.png")), icon(shape).to_png()).unwrap();
    }
    let icons = Icons { location: icon(location), camera: icon(camera), photos: icon(photos), account: icon(account) };
    let fixtures = root.join("fixtures");
    home(&icons).save(&fixtures, "home");
    posting(&icons).save(&fixtures, "posting");
    settings(&icons).save(&fixtures, "settings");
    rewards(&icons).save(&fixtures, "rewards");
    println!("assets written to {}", root.display());
}
