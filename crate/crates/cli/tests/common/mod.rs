#![allow(dead_code)]

use emotion_isp::image::{LinearImage, Plane};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Hue sweep across x, value ramp down y, saturation varying by band,
/// with a little seeded texture so the guided filter has detail to keep.
pub fn test_chart(width: usize, height: usize) -> LinearImage {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC4A7);
    let mut pixels = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let hue = 6.0 * x as f64 / width as f64;
            let value = 0.04 + 0.8 * (y as f64 / (height - 1) as f64).powf(1.6);
            let sat = [0.0, 0.35, 0.7, 0.95][(x * 4 / width + y * 3 / height) % 4];
            let rgb = hsv(hue, sat, value);
            let n: f64 = rng.random_range(-0.015..0.015);
            pixels.push(rgb.map(|c| (c + n).clamp(0.0, 1.0)));
        }
    }
    LinearImage::new(width, height, pixels).unwrap()
}

fn hsv(h: f64, s: f64, v: f64) -> [f64; 3] {
    let c = v * s;
    let x = c * (1.0 - ((h % 2.0) - 1.0).abs());
    let (r, g, b) = match h as usize {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    [r + m, g + m, b + m]
}

pub fn random_plane(w: usize, h: usize, seed: u64) -> Plane {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Plane::new(w, h, (0..w * h).map(|_| rng.random()).collect()).unwrap()
}

pub fn random_image(w: usize, h: usize, seed: u64) -> LinearImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pixels = (0..w * h)
        .map(|_| [rng.random(), rng.random(), rng.random()])
        .collect();
    LinearImage::new(w, h, pixels).unwrap()
}

pub fn mean_luma(img: &LinearImage) -> f64 {
    emotion_isp::rgb_to_lumachroma(img).y.mean()
}

pub fn mean_chroma(img: &LinearImage) -> f64 {
    let lc = emotion_isp::rgb_to_lumachroma(img);
    let n = img.pixels().len();
    (0..n).map(|i| lc.chroma_magnitude(i)).sum::<f64>() / n as f64
}

/// Direct sliding-window self-guided filter: every window statistic is
/// summed explicitly from the samples it covers.
pub fn guided_filter_oracle(p: &Plane, r: usize, eps: f64) -> Plane {
    let (w, h) = (p.width(), p.height());
    let window = |x: usize, y: usize| {
        let ys = y.saturating_sub(r)..(y + r + 1).min(h);
        let xs = x.saturating_sub(r)..(x + r + 1).min(w);
        ys.flat_map(move |yy| xs.clone().map(move |xx| (xx, yy)))
    };
    let mut a = vec![0.0; w * h];
    let mut b = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let (mut s, mut s2, mut n) = (0.0, 0.0, 0.0);
            for (xx, yy) in window(x, y) {
                let v = p.get(xx, yy);
                s += v;
                s2 += v * v;
                n += 1.0;
            }
            let mean = s / n;
            let var = s2 / n - mean * mean;
            let ak = var / (var + eps);
            a[y * w + x] = ak;
            b[y * w + x] = mean - ak * mean;
        }
    }
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let (mut sa, mut sb, mut n) = (0.0, 0.0, 0.0);
            for (xx, yy) in window(x, y) {
                sa += a[yy * w + xx];
                sb += b[yy * w + xx];
                n += 1.0;
            }
            out.push(sa / n * p.get(x, y) + sb / n);
        }
    }
    Plane::new(w, h, out).unwrap()
}

/// Plain global histogram equalization over 256 codes, scaled into the
/// plane's range: `min + (max - min) * cdf(code) / n`.
pub fn global_hist_eq(p: &Plane) -> Vec<f64> {
    let code = |v: f64| (v * 255.0).round() as usize;
    let mut hist = [0usize; 256];
    for &v in p.data() {
        hist[code(v)] += 1;
    }
    let mut cdf = [0usize; 256];
    let mut acc = 0;
    for (c, h) in cdf.iter_mut().zip(hist) {
        acc += h;
        *c = acc;
    }
    let n = p.data().len() as f64;
    let lo = p.data().iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = p.data().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    p.data()
        .iter()
        .map(|&v| lo + (hi - lo) * cdf[code(v)] as f64 / n)
        .collect()
}

/// Smooth photo-like 8-bit scene: sky gradient, a lit disc, soft shadows
/// and seeded grain.
pub fn photo8(width: usize, height: usize) -> emotion_isp::inverse::Srgb8Image {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9407);
    let mut pixels = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let (u, v) = (x as f64 / width as f64, y as f64 / height as f64);
            let sky = [0.35 + 0.4 * (1.0 - v), 0.5 + 0.35 * (1.0 - v), 0.9 - 0.2 * v];
            let d = ((u - 0.62).powi(2) + (v - 0.4).powi(2)).sqrt();
            let disc = (1.0 - d / 0.22).clamp(0.0, 1.0);
            let ground = ((v - 0.7) / 0.3).clamp(0.0, 1.0);
            let grain: f64 = rng.random_range(-0.02..0.02);
            let mut rgb = [0.0; 3];
            for c in 0..3 {
                let warm = [0.95, 0.75, 0.4][c];
                let soil = [0.3, 0.22, 0.12][c] * (0.6 + 0.4 * (u * 9.0).sin().abs());
                let base = sky[c] * (1.0 - ground) + soil * ground;
                rgb[c] = (base * (1.0 - disc) + warm * disc + grain).clamp(0.0, 1.0);
            }
            pixels.push(rgb.map(|c| (c * 255.0).round() as u8));
        }
    }
    emotion_isp::inverse::Srgb8Image::new(width, height, pixels).unwrap()
}

pub fn linear16_fixture(width: usize, height: usize, seed: u64) -> emotion_isp::io::QuantizedImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    emotion_isp::io::QuantizedImage::Linear16 {
        width,
        height,
        samples: (0..width * height)
            .map(|_| [rng.random(), rng.random(), rng.random()])
            .collect(),
    }
}

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use emotion_isp::control::{ControlVector, Emotion};
use emotion_isp::io::{save_quantized, ImageFile, ImageFormat, QuantizedImage};
use emotion_isp::stats::records::to_json_line;
use emotion_isp::stats::{AbRecord, CalibrationRecord, Choice};
use emotion_isp::Side;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_emotion-isp"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

pub fn write_chart_ppm(dir: &Path, name: &str, w: usize, h: usize) -> PathBuf {
    let path = dir.join(name);
    let img = test_chart(w, h);
    emotion_isp::io::save_image(&img, &ImageFile::new(&path, ImageFormat::Ppm16)).unwrap();
    path
}

pub fn write_fixture_ppm(dir: &Path, name: &str, w: usize, h: usize, seed: u64) -> PathBuf {
    let path = dir.join(name);
    save_quantized(&linear16_fixture(w, h, seed), &ImageFile::new(&path, ImageFormat::Ppm16)).unwrap();
    path
}

pub fn write_photo_png(dir: &Path, name: &str, w: usize, h: usize) -> PathBuf {
    let path = dir.join(name);
    save_quantized(&QuantizedImage::Srgb8(photo8(w, h)), &ImageFile::new(&path, ImageFormat::Png8)).unwrap();
    path
}

pub const PASS_THROUGH: &str = "preserve_exposure = true\nzeta = 0\np = 0\nclahe_strength = 0\n";

pub const AB_LEVELS: [Emotion; 4] = [Emotion::Happy, Emotion::Calm, Emotion::Angry, Emotion::Sad];

/// Seeded calibration study: `n` subjects, one record per (subject, level),
/// with a level effect on every parameter.
pub fn calibration_records(n: usize, seed: u64) -> Vec<CalibrationRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for s in 0..n {
        let offset: f64 = rng.random_range(-0.1..0.1);
        for (j, level) in AB_LEVELS.iter().enumerate() {
            let mut v = [0.0; 6];
            for (k, slot) in v.iter_mut().enumerate() {
                let effect = 0.1 * ((j * 3 + k) % 5) as f64 - 0.2;
                *slot = effect + offset + rng.random_range(-0.15..0.15);
            }
            out.push(CalibrationRecord {
                subject_id: format!("p{s:02}"),
                image_id: format!("img{}", (s + j) % 7),
                target_emotion: *level,
                chosen: ControlVector::from_array(v).unwrap(),
                timestamp: 1_700_000_000_000 + (s * 4 + j) as u64,
                session_id: None,
                trial_id: None,
            });
        }
    }
    out
}

/// 384 records whose rows are (167 emotion, 25 neutral) for the correct
/// emotion and (46, 146) for a wrong one.
pub fn ab_fixture() -> Vec<AbRecord> {
    let mut out = Vec::new();
    let groups = [
        (true, 167, Choice::EmotionSide),
        (true, 25, Choice::NeutralSide),
        (false, 46, Choice::EmotionSide),
        (false, 146, Choice::NeutralSide),
    ];
    let mut t = 0u64;
    for (correct, count, choice) in groups {
        for i in 0..count {
            out.push(AbRecord {
                subject_id: format!("u{:02}", t % 24),
                clip_id: format!("clip{:02}", t % 16),
                shown_emotion: [Emotion::Happy, Emotion::Angry, Emotion::Sad][(i % 3) as usize],
                is_correct_emotion: correct,
                emotion_side: if t % 2 == 0 { Side::Left } else { Side::Right },
                choice,
                timestamp: 1_700_000_000_000 + t,
                session_id: None,
                trial_id: None,
            });
            t += 1;
        }
    }
    out
}

pub fn write_lines<T: serde::Serialize>(path: &Path, records: &[T]) {
    let text: String = records.iter().map(to_json_line).collect();
    std::fs::write(path, text).unwrap();
}
