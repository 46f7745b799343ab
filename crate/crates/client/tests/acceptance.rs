//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant, SystemTime};

use common::{fixture_job, start, POLICY_URL};
use privscan_client::cli::{run, EXIT_OK, NO_ELEMENTS};
use privscan_client::{subsample_factor, BenchReport, ScanClient, SessionState, MAX_DECODE_DIM};
use privscan_core::bundled::{self, Condition, FIXTURES};
use privscan_core::detect::{dedup_nms, detect_context, parse_sidecar, TemplateSet};
use privscan_core::policy::PolicyDocument;
use privscan_core::present::{compute_gaps, draw, present, select_gap, ExtractiveSummarizer, LayoutConfig, VerticalGap, MAX_SUMMARY_CHARS};
use privscan_core::segments::extract_segments;
use privscan_core::wire::{decode_result, ScanResult};
use privscan_core::{iou, BoundingBox, Detection, DetectionParams, DetectionSource, RasterImage, ScanTimings};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reqwest::multipart::{Form, Part};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn runtime() -> tokio::runtime::Runtime {
    tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_all().build().unwrap()
}

// 1. Gap choice against a row scan.

fn brute_gap(height: u32, boxes: &[BoundingBox]) -> Option<VerticalGap> {
    let mut best: Option<VerticalGap> = None;
    let mut y = 0;
    while y < height {
        let covered = |y: u32| boxes.iter().any(|b| y >= b.top() && y < b.bottom());
        if covered(y) {
            y += 1;
            continue;
        }
        let start = y;
        while y < height && !covered(y) {
            y += 1;
        }
        if best.is_none_or(|b| y - start > b.height()) {
            best = Some(VerticalGap { top: start, bottom: y });
        }
    }
    best
}

fn gap_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    for case in 0..1000 {
        let height = rng.random_range(1..=4000);
        let n = rng.random_range(0..=12);
        let boxes: Vec<BoundingBox> = (0..n)
            .map(|_| {
                let t = rng.random_range(0..height);
                let b = rng.random_range(t + 1..=height);
                let l = rng.random_range(0..600);
                BoundingBox::new(l, t, l + rng.random_range(1..300), b).unwrap()
            })
            .collect();
        let got = select_gap(&compute_gaps(height, &boxes));
        let want = brute_gap(height, &boxes);
        ensure(got == want, || format!("layout {case}: {got:?} != {want:?}"))?;
    }
    Ok("1000 layouts identical".into())
}

// 2. Per-type greedy suppression against a quadratic re-implementation.

fn half_or_less(a: &BoundingBox, b: &BoundingBox) -> bool {
    let w = a.right().min(b.right()).saturating_sub(a.left().max(b.left()));
    let h = a.bottom().min(b.bottom()).saturating_sub(a.top().max(b.top()));
    let inter = u64::from(w) * u64::from(h);
    2 * inter <= a.area() + b.area() - inter
}

fn brute_nms(input: &[Detection]) -> Vec<(String, [u32; 4], u64)> {
    let mut order: Vec<&Detection> = input.iter().collect();
    order.sort_by(|a, b| {
        b.score.total_cmp(&a.score).then(a.bbox.top().cmp(&b.bbox.top())).then(a.bbox.left().cmp(&b.bbox.left()))
    });
    let mut kept: Vec<&Detection> = Vec::new();
    for d in order {
        if kept.iter().filter(|k| k.data_type == d.data_type).all(|k| half_or_less(&k.bbox, &d.bbox)) {
            kept.push(d);
        }
    }
    // stable: equal keys keep suppression order
    kept.sort_by(|a, b| a.data_type.cmp(&b.data_type).then(a.bbox.top().cmp(&b.bbox.top())).then(a.bbox.left().cmp(&b.bbox.left())));
    kept.into_iter().map(|d| (d.data_type.clone(), d.bbox.to_array(), d.score.to_bits())).collect()
}

fn nms_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2002);
    let types = ["account", "camera", "location", "photos"];
    for case in 0..500 {
        let n = rng.random_range(0..=50);
        let input: Vec<Detection> = (0..n)
            .map(|_| {
                let (l, t) = (rng.random_range(0..240), rng.random_range(0..240));
                let b = BoundingBox::new(l, t, l + rng.random_range(1..90), t + rng.random_range(1..90)).unwrap();
                let score = f64::from(rng.random_range(80..=100u32)) / 100.0;
                Detection::new(b, types[rng.random_range(0..types.len())], score, DetectionSource::Icon)
            })
            .collect();
        let got: Vec<_> = dedup_nms(&input, 0.5).iter().map(|d| (d.data_type.clone(), d.bbox.to_array(), d.score.to_bits())).collect();
        ensure(got == brute_nms(&input), || format!("set {case} differs"))?;
    }
    Ok("500 sets identical".into())
}

// 3. Subsample factor bound and minimality.

fn decode_bound() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3003);
    for _ in 0..10_000 {
        let (w, h) = (rng.random_range(1..=8192u32), rng.random_range(1..=8192u32));
        let f = subsample_factor(w, h, MAX_DECODE_DIM);
        let longest = f64::from(w.max(h));
        ensure(f.is_power_of_two(), || format!("{w}x{h}: f={f} not a power of two"))?;
        ensure(longest / f64::from(f) <= 2000.0, || format!("{w}x{h}: f={f} too small"))?;
        ensure(f == 1 || longest / f64::from(f / 2) > 2000.0, || format!("{w}x{h}: f={f} not minimal"))?;
    }
    Ok("10000 dimension pairs".into())
}

// 4, 5, 6. Service round trips.

fn fixture_form(c: Condition) -> Form {
    let fx = bundled::fixture(c);
    Form::new()
        .part("screenshot", Part::bytes(fx.png.to_vec()).file_name("screen.png"))
        .text("policy_url", POLICY_URL)
        .part("ui_sidecar", Part::bytes(fx.sidecar.to_vec()))
}

async fn post(endpoint: &str, form: Form) -> Result<(u16, ScanResult), String> {
    let resp = reqwest::Client::new().post(format!("{endpoint}/v1/scan")).multipart(form).send().await.map_err(|e| e.to_string())?;
    let status = resp.status().as_u16();
    let body = resp.bytes().await.map_err(|e| e.to_string())?;
    let result = decode_result(&body).map_err(|e| format!("status {status}: {e}"))?;
    Ok((status, result))
}

fn timings_consistent(t: &ScanTimings) -> bool {
    t.overall_ms >= t.context_detection_ms + t.segment_extraction_ms + t.cpp_presentation_ms
}

fn cache_contract() -> Check {
    runtime().block_on(async {
        let local = start(Duration::ZERO).await;
        let (s1, first) = post(&local.endpoint(), fixture_form(Condition::Mixed)).await?;
        let (s2, second) = post(&local.endpoint(), fixture_form(Condition::Mixed)).await?;
        ensure(s1 == 200 && s2 == 200, || format!("statuses {s1}, {s2}"))?;
        ensure(local.stub.calls() == 1, || format!("{} fetches", local.stub.calls()))?;
        ensure(!first.policy_from_cache && second.policy_from_cache, || "cache flags wrong".into())?;
        Ok("1 fetch for 2 scans, second from cache".into())
    })
}

fn fixtures_end_to_end() -> Check {
    runtime().block_on(async {
        let local = start(Duration::ZERO).await;
        let mut slowest = Duration::ZERO;
        let mut notes = Vec::new();
        for (c, want, exact) in [
            (Condition::IconOnly, &["account", "camera", "photos"][..], true),
            (Condition::TextOnly, &["account"][..], true),
            (Condition::Mixed, &["location"][..], false),
            (Condition::NoElements, &[][..], true),
        ] {
            let t0 = Instant::now();
            let (status, result) = post(&local.endpoint(), fixture_form(c)).await?;
            let took = t0.elapsed();
            slowest = slowest.max(took);
            let got: BTreeSet<&str> = result.images.keys().map(String::as_str).collect();
            let want: BTreeSet<&str> = want.iter().copied().collect();
            ensure(status == 200, || format!("{c:?}: status {status}"))?;
            ensure(if exact { got == want } else { got.is_superset(&want) }, || format!("{c:?}: got {got:?}"))?;
            if c == Condition::NoElements {
                ensure(result.detections.is_empty(), || "rewards has detections".into())?;
            }
            ensure(timings_consistent(&result.timings), || format!("{c:?}: {:?}", result.timings))?;
            ensure(took < Duration::from_secs(2), || format!("{c:?} took {took:?}"))?;
            notes.push(format!("{c:?} {:?}", got));
        }
        Ok(format!("{}; slowest {} ms", notes.join(", "), slowest.as_millis()))
    })
}

fn bench_report() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let json = dir.path().join("report.json");
    let argv: Vec<String> = ["privscan", "bench", "--n", "3", "--out", json.to_str().unwrap()].iter().map(|s| s.to_string()).collect();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = std::thread::spawn(move || {
        let code = run(argv, &mut out, &mut err);
        (code, out, err)
    })
    .join()
    .map_err(|_| "bench panicked".to_string())?;
    let (code, out, err) = code;
    ensure(code == EXIT_OK, || format!("exit {code}: {}", String::from_utf8_lossy(&err)))?;
    let table = String::from_utf8_lossy(&out).to_string();
    let lines: Vec<&str> = table.lines().collect();
    let header = ["Icon Only", "Text Only", "Mixed", "Average"];
    ensure(header.iter().all(|h| lines[0].contains(h)), || format!("header: {}", lines[0]))?;
    for (line, row) in lines[1..5].iter().zip(["Context Detection", "Segment Extraction", "CPP Presentation", "Overall"]) {
        ensure(line.starts_with(row) && line.matches(" ms").count() == 4, || format!("row: {line}"))?;
    }

    let report: BenchReport = serde_json::from_slice(&std::fs::read(&json).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    ensure(report.n == 3 && report.runs.values().all(|r| r.len() == 3), || "run counts".into())?;
    for runs in report.runs.values() {
        ensure(runs.iter().all(timings_consistent), || format!("inconsistent timings {runs:?}"))?;
    }
    for i in 0..4 {
        let conds = [report.icon_only.rows()[i], report.text_only.rows()[i], report.mixed.rows()[i]];
        let mean = conds.iter().sum::<f64>() / 3.0;
        ensure((report.average.rows()[i] - mean).abs() <= 1.0, || format!("row {i}: average {} vs {mean}", report.average.rows()[i]))?;
        let shown: Vec<f64> = lines[i + 1].split(" ms").filter_map(|c| c.split_whitespace().last()?.parse().ok()).collect();
        let shown_mean = shown[..3].iter().sum::<f64>() / 3.0;
        ensure((shown[3] - shown_mean).abs() <= 1.0, || format!("table row {i}: {shown:?}"))?;
    }
    ensure(report.average.overall_ms <= 12_000.0, || format!("overall mean {} ms", report.average.overall_ms))?;
    Ok(format!("4x4 table, overall mean {:.0} ms", report.average.overall_ms))
}

// 7, 9. Policy segments and rendering, in process.

fn policy() -> PolicyDocument {
    PolicyDocument::from_html(POLICY_URL.into(), bundled::DUMMY_POLICY_HTML.as_bytes().to_vec(), SystemTime::UNIX_EPOCH, false)
}

fn provenance() -> Check {
    let doc = policy();
    let map = extract_segments(&doc, &bundled::taxonomy());
    let mut n = 0;
    for (ty, segs) in &map {
        for s in segs {
            n += 1;
            ensure(doc.text.get(s.offset..s.offset + s.text.len()) == Some(s.text.as_str()), || format!("{ty}: offset {} not verbatim", s.offset))?;
            ensure(s.text.to_lowercase().contains(&s.matched_phrase.to_lowercase()), || format!("{ty}: `{}` lacks `{}`", s.text, s.matched_phrase))?;
        }
    }
    ensure(n > 0, || "no segments".into())?;
    Ok(format!("{n}/{n} segments verbatim with their phrase"))
}

fn presentation() -> Check {
    let taxonomy = bundled::taxonomy();
    let templates = bundled::templates();
    let segments = extract_segments(&policy(), &taxonomy);
    let render = |name: &str| -> Result<_, String> {
        let fx = FIXTURES.iter().find(|f| f.name == name).unwrap();
        let screen = RasterImage::from_png(fx.png).map_err(|e| e.to_string())?;
        let sidecar = parse_sidecar(fx.sidecar).map_err(|e| e.to_string())?;
        let dets = detect_context(&screen, Some(&sidecar), &taxonomy, &templates, &DetectionParams::default()).detections;
        let out = if dets.is_empty() {
            Default::default()
        } else {
            present(&screen, &dets, &segments, &taxonomy, &ExtractiveSummarizer, &LayoutConfig::default()).map_err(|e| e.to_string())?
        };
        Ok((dets, out))
    };
    let mut images = 0;
    for fx in FIXTURES.iter() {
        let (dets, out) = render(fx.name)?;
        let types: BTreeSet<&str> = dets.iter().map(|d| d.data_type.as_str()).collect();
        let shown: BTreeSet<&str> = out.images.iter().map(|i| i.data_type.as_str()).collect();
        ensure(out.images.len() == types.len() && shown == types, || format!("{}: {shown:?} vs {types:?}", fx.name))?;
        for img in &out.images {
            images += 1;
            ensure(img.card.summary.chars().count() <= MAX_SUMMARY_CHARS, || format!("{} summary too long", img.data_type))?;
            if img.overflow {
                continue;
            }
            let own: Vec<&BoundingBox> = dets.iter().filter(|d| d.data_type == img.data_type).map(|d| &d.bbox).collect();
            let c = img.card.bbox;
            for y in c.top()..c.bottom() {
                for x in c.left()..c.right() {
                    let hit = own.iter().any(|b| x >= b.left() && x < b.right() && y >= b.top() && y < b.bottom());
                    ensure(!hit, || format!("{}/{}: card covers ({x},{y})", fx.name, img.data_type))?;
                }
            }
        }
    }
    let golden = || -> Result<Vec<u8>, String> {
        let (_, out) = render("home")?;
        out.images.into_iter().find(|i| i.data_type == "location").map(|i| i.image.to_png()).ok_or("no location image".into())
    };
    let (a, b) = (golden()?, golden()?);
    ensure(a == b, || "consecutive renders differ".into())?;
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden/home-location.png");
    let stored = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    ensure(stored == a, || "render differs from stored golden".into())?;
    Ok(format!("{images} images checked, golden stable"))
}

// 8. Synthetic composites.

const WORDS: [&str; 8] = ["brew", "cart", "hello", "store", "menu", "sale", "pickup", "deals"];

fn composite(index: u64, templates: &TemplateSet) -> (RasterImage, Vec<(String, BoundingBox)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(8000 + index);
    let (w, h) = (360, 640);
    let bg = [rng.random_range(220..=255), rng.random_range(220..=255), rng.random_range(220..=255), 255];
    let mut img = RasterImage::filled(w, h, bg).unwrap();
    for _ in 0..5 {
        let (l, t) = (rng.random_range(0..w - 40), rng.random_range(0..h - 40));
        let b = BoundingBox::new(l, t, (l + rng.random_range(20..150)).min(w), (t + rng.random_range(10..70)).min(h)).unwrap();
        draw::fill_rounded_rect(&mut img, &b, rng.random_range(0..10), [rng.random(), rng.random(), rng.random(), 255]);
    }
    for _ in 0..8 {
        let (x, y) = (rng.random_range(0..w - 100), rng.random_range(0..h - 20));
        draw::text(&mut img, x, y, WORDS[rng.random_range(0..WORDS.len())], rng.random_range(1..=2), [40, 40, rng.random_range(0..90), 255]);
    }
    let all: Vec<_> = templates.iter().collect();
    let mut placed: Vec<(String, BoundingBox)> = Vec::new();
    for scale in [0.75, 1.0, 1.5] {
        let tpl = all[rng.random_range(0..all.len())];
        let side = (f64::from(tpl.image.width()) * scale).round() as u32;
        let bbox = loop {
            let (x, y) = (rng.random_range(0..w - side), rng.random_range(0..h - side));
            let pad = BoundingBox::new(x.saturating_sub(8), y.saturating_sub(8), x + side + 8, y + side + 8).unwrap();
            if placed.iter().all(|(_, p)| !p.intersects(&pad)) {
                break BoundingBox::from_origin(x, y, side, side).unwrap();
            }
        };
        draw::overlay(&mut img, &tpl.image.resize(side, side), bbox.left(), bbox.top());
        placed.push((tpl.data_type.clone(), bbox));
    }
    (img, placed)
}

fn composites() -> Check {
    let templates = bundled::templates();
    let taxonomy = bundled::taxonomy();
    let params = DetectionParams::default();
    let mut total = 0;
    for i in 0..20 {
        let (screen, truth) = composite(i, &templates);
        let found = detect_context(&screen, None, &taxonomy, &templates, &params).detections;
        for (ty, b) in &truth {
            total += 1;
            let hit = found.iter().any(|d| &d.data_type == ty && iou::<f64>(&d.bbox, b) >= 0.8);
            ensure(hit, || format!("screen {i}: {ty} at {:?} missed", b.to_array()))?;
        }
    }
    for color in [[255, 255, 255, 255], [0, 0, 0, 255], [240, 240, 240, 255], [30, 60, 120, 255]] {
        let blank = RasterImage::filled(360, 640, color).unwrap();
        let n = detect_context(&blank, None, &taxonomy, &templates, &params).detections.len();
        ensure(n == 0, || format!("blank {color:?}: {n} detections"))?;
    }
    Ok(format!("{total}/{total} icons at iou >= 0.8, blanks empty"))
}

// 10. Client state machine and the empty path.

fn client_states() -> Check {
    runtime().block_on(async {
        let local = start(Duration::from_millis(600)).await;
        let client = ScanClient::new(local.endpoint());
        let handle = client.submit_scan(fixture_job(Condition::Mixed)).map_err(|e| e.to_string())?;
        let before = client.session();
        ensure(before.state == SessionState::Uploading, || format!("state {:?}", before.state))?;
        let busy = client.submit_scan(fixture_job(Condition::IconOnly));
        ensure(matches!(busy, Err(ref e) if e.0 == SessionState::Uploading), || "second submit accepted".into())?;
        ensure(client.session() == before, || "busy submit touched the session".into())?;
        let done = handle.wait().await;
        ensure(done.state == SessionState::Presenting, || format!("first scan ended {:?}: {:?}", done.state, done.error))?;

        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let fx = bundled::fixture(Condition::NoElements);
        let png = dir.path().join("rewards.png");
        let side = dir.path().join("rewards.json");
        std::fs::write(&png, fx.png).map_err(|e| e.to_string())?;
        std::fs::write(&side, fx.sidecar).map_err(|e| e.to_string())?;
        let argv: Vec<String> = [
            "privscan", "scan", "--screenshot", png.to_str().unwrap(), "--sidecar", side.to_str().unwrap(),
            "--policy-url", POLICY_URL, "--out", dir.path().to_str().unwrap(), "--endpoint", &local.endpoint(),
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let (code, out) = tokio::task::spawn_blocking(move || {
            let (mut out, mut err) = (Vec::new(), Vec::new());
            (run(argv, &mut out, &mut err), String::from_utf8_lossy(&out).to_string())
        })
        .await
        .map_err(|e| e.to_string())?;
        ensure(code == EXIT_OK && out.trim() == NO_ELEMENTS, || format!("exit {code}, output {out:?}"))?;
        Ok("BusyError leaves session intact; empty scan prints marker, exit 0".into())
    })
}

type Criterion = (&'static str, Option<Duration>, fn() -> Check);

fn main() {
    let criteria: [Criterion; 10] = [
        ("gap heuristic matches row-scan oracle", Some(Duration::from_secs(10)), gap_oracle),
        ("suppression matches brute force", Some(Duration::from_secs(5)), nms_oracle),
        ("decode factor bound", Some(Duration::from_secs(1)), decode_bound),
        ("policy cache contract", None, cache_contract),
        ("fixture end-to-end", None, fixtures_end_to_end),
        ("timing schema and bench report", None, bench_report),
        ("segment provenance", None, provenance),
        ("composite detection accuracy", None, composites),
        ("presentation contracts", None, presentation),
        ("client state machine", None, client_states),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.into_iter().enumerate() {
        let t0 = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or("panic".into()))
        });
        let took = t0.elapsed();
        let outcome = match (outcome, budget) {
            (Ok(_), Some(b)) if took >= b => Err(format!("took {took:?}, budget {b:?}")),
            (o, _) => o,
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d.clone()),
            Err(e) => ("FAIL", e.clone()),
        };
        if outcome.is_err() {
            failed += 1;
        }
        println!("{tag} {:>2} {name}: {detail} [{:.2} s]", i + 1, took.as_secs_f64());
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
