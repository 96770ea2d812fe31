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
