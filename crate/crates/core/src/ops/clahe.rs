//! Contrast-limited adaptive histogram equalization on continuous planes.
//!
//! Each tile builds a 256-bin histogram of `round(v * 255)`, clips it at
//! `clip * n / 256` and spreads the clipped mass uniformly over all bins.
//! The tile mapping is the normalized cumulative histogram scaled into the
//! plane's `[min, max]` range (Zuiderveld's convention, so a constant plane
//! maps to itself). Lookups interpolate linearly between bin codes and
//! blend bilinearly between the four nearest tile centres.

use rayon::prelude::*;

use crate::image::Plane;

pub const BINS: usize = 256;
const LEVELS: f64 = (BINS - 1) as f64;

/// Per-tile lookup table indexed by bin code.
#[derive(Debug, Clone, PartialEq)]
pub struct TileMapping {
    lut: [f64; BINS],
}

impl TileMapping {
    pub fn table(&self) -> &[f64; BINS] {
        &self.lut
    }

    /// Piecewise-linear evaluation at a continuous sample.
    #[inline]
    pub fn eval(&self, v: f64) -> f64 {
        let x = v.clamp(0.0, 1.0) * LEVELS;
        let lo = (x.floor() as usize).min(BINS - 1);
        let hi = (lo + 1).min(BINS - 1);
        let t = x - lo as f64;
        self.lut[lo] + t * (self.lut[hi] - self.lut[lo])
    }
}

#[inline]
pub fn quantize(v: f64) -> usize {
    ((v.clamp(0.0, 1.0) * LEVELS).round() as usize).min(BINS - 1)
}

/// Builds the clipped, redistributed mapping for one set of samples.
/// `range` is the `[min, max]` interval the mapping spans.
pub fn tile_mapping<'a>(
    samples: impl Iterator<Item = &'a f64>,
    clip: f64,
    range: (f64, f64),
) -> TileMapping {
    let mut hist = [0.0f64; BINS];
    let mut n = 0usize;
    for &v in samples {
        hist[quantize(v)] += 1.0;
        n += 1;
    }
    let (lo, hi) = range;
    if n == 0 {
        return TileMapping { lut: [lo; BINS] };
    }
    let limit = clip * n as f64 / BINS as f64;
    if limit.is_finite() {
        let mut excess = 0.0;
        for h in hist.iter_mut() {
            if *h > limit {
                excess += *h - limit;
                *h = limit;
            }
        }
        let share = excess / BINS as f64;
        for h in hist.iter_mut() {
            *h += share;
        }
    }
    let scale = (hi - lo) / n as f64;
    let mut lut = [0.0; BINS];
    let mut cumulative = 0.0;
    for (slot, h) in lut.iter_mut().zip(hist) {
        cumulative += h;
        *slot = (lo + cumulative * scale).min(hi);
    }
    TileMapping { lut }
}

/// Tile edges along one axis: `count + 1` integer boundaries.
fn edges(len: usize, count: usize) -> Vec<usize> {
    (0..=count).map(|i| i * len / count).collect()
}

/// Equalizes `plane` over a `tiles = (columns, rows)` grid with clip limit
/// `clip` in multiples of the uniform bin height. The grid is reduced when
/// the plane has fewer pixels than tiles along an axis.
pub fn clahe(plane: &Plane, tiles: (usize, usize), clip: f64) -> Plane {
    let (w, h) = (plane.width(), plane.height());
    let cols = tiles.0.clamp(1, w);
    let rows = tiles.1.clamp(1, h);
    let xs = edges(w, cols);
    let ys = edges(h, rows);
    let data = plane.data();

    let (min, max) = data
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            let v = v.clamp(0.0, 1.0);
            (lo.min(v), hi.max(v))
        });

    let mappings: Vec<TileMapping> = (0..rows * cols)
        .into_par_iter()
        .map(|t| {
            let (ty, tx) = (t / cols, t % cols);
            let samples = (ys[ty]..ys[ty + 1])
                .flat_map(|y| data[y * w + xs[tx]..y * w + xs[tx + 1]].iter());
            tile_mapping(samples, clip, (min, max))
        })
        .collect();

    let centers = |e: &[usize]| -> Vec<f64> {
        e.windows(2).map(|p| (p[0] + p[1]) as f64 / 2.0).collect()
    };
    let cx = centers(&xs);
    let cy = centers(&ys);

    let mut out = vec![0.0; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        let (y0, y1, fy) = neighbours(&cy, y as f64 + 0.5);
        for (x, o) in row.iter_mut().enumerate() {
            let (x0, x1, fx) = neighbours(&cx, x as f64 + 0.5);
            let v = data[y * w + x];
            let top = lerp(
                mappings[y0 * cols + x0].eval(v),
                mappings[y0 * cols + x1].eval(v),
                fx,
            );
            let bottom = lerp(
                mappings[y1 * cols + x0].eval(v),
                mappings[y1 * cols + x1].eval(v),
                fx,
            );
            *o = lerp(top, bottom, fy).clamp(0.0, 1.0);
        }
    });
    plane.with_data(out)
}

#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    if t == 0.0 {
        a
    } else {
        a + t * (b - a)
    }
}

/// Indices of the tile centres bracketing `pos` and the blend weight
/// toward the second one. Outside the outermost centres a single tile applies.
fn neighbours(centers: &[f64], pos: f64) -> (usize, usize, f64) {
    let last = centers.len() - 1;
    if pos <= centers[0] {
        return (0, 0, 0.0);
    }
    if pos >= centers[last] {
        return (last, last, 0.0);
    }
    let i = centers.partition_point(|&c| c <= pos) - 1;
    let t = (pos - centers[i]) / (centers[i + 1] - centers[i]);
    (i, i + 1, t)
}
