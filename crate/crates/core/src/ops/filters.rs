//! Spatial filters shared by the tone and sharpening stages. All use
//! border-clamped windows: box means average only in-bounds samples,
//! the Gaussian replicates edge samples.

use rayon::prelude::*;

use crate::image::Plane;

/// Mean over the `(2r+1)^2` window centred on each sample, restricted to
/// samples inside the plane.
pub fn box_mean(plane: &Plane, radius: usize) -> Plane {
    let (w, h) = (plane.width(), plane.height());
    let stride = w + 1;
    // Summed-area table, rows computed independently then accumulated
    // down columns in a fixed order.
    let mut table = vec![0.0f64; stride * (h + 1)];
    table[stride..]
        .par_chunks_mut(stride)
        .zip(plane.data().par_chunks(w))
        .for_each(|(row, src)| {
            let mut acc = 0.0;
            for (x, v) in src.iter().enumerate() {
                acc += v;
                row[x + 1] = acc;
            }
        });
    for y in 1..=h {
        let (prev, cur) = table.split_at_mut(y * stride);
        let prev = &prev[(y - 1) * stride..];
        for (c, p) in cur[..stride].iter_mut().zip(prev) {
            *c += p;
        }
    }
    let mut out = vec![0.0; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        let y0 = y.saturating_sub(radius);
        let y1 = (y + radius + 1).min(h);
        for (x, o) in row.iter_mut().enumerate() {
            let x0 = x.saturating_sub(radius);
            let x1 = (x + radius + 1).min(w);
            let sum = table[y1 * stride + x1] - table[y0 * stride + x1] - table[y1 * stride + x0]
                + table[y0 * stride + x0];
            *o = sum / ((y1 - y0) * (x1 - x0)) as f64;
        }
    });
    plane.with_data(out)
}

/// Self-guided filter (guide = input): edge-preserving smoothing that
/// yields the base layer for local-contrast control.
///
/// The filter commutes with adding a constant, so it runs on the plane
/// shifted by its first sample. Flat regions then carry exact zeros
/// through the box sums and a constant plane comes back unchanged.
pub fn guided_filter(plane: &Plane, radius: usize, gf_eps: f64) -> Plane {
    let Some(&offset) = plane.data().first() else {
        return plane.clone();
    };
    let shifted = plane.with_data(plane.data().par_iter().map(|v| v - offset).collect());
    let out = guided_filter_centered(&shifted, radius, gf_eps);
    plane.with_data(out.data().par_iter().map(|v| v + offset).collect())
}

fn guided_filter_centered(plane: &Plane, radius: usize, gf_eps: f64) -> Plane {
    let mean = box_mean(plane, radius);
    let squares = plane.with_data(plane.data().par_iter().map(|v| v * v).collect());
    let mean_sq = box_mean(&squares, radius);
    let (a, b): (Vec<f64>, Vec<f64>) = mean
        .data()
        .par_iter()
        .zip(mean_sq.data().par_iter())
        .map(|(&m, &m2)| {
            let var = (m2 - m * m).max(0.0);
            let a = var / (var + gf_eps);
            (a, m - a * m)
        })
        .unzip();
    let mean_a = box_mean(&plane.with_data(a), radius);
    let mean_b = box_mean(&plane.with_data(b), radius);
    let out = mean_a
        .data()
        .par_iter()
        .zip(mean_b.data().par_iter())
        .zip(plane.data().par_iter())
        .map(|((a, b), i)| a * i + b)
        .collect();
    plane.with_data(out)
}

/// Normalized 1-D Gaussian taps over `[-ceil(3 sigma), ceil(3 sigma)]`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil().max(1.0) as isize;
    let taps: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = taps.iter().sum();
    taps.into_iter().map(|t| t / total).collect()
}

/// Separable Gaussian blur with edge replication.
pub fn gaussian_blur(plane: &Plane, sigma: f64) -> Plane {
    let kernel = gaussian_kernel(sigma);
    let horizontal = convolve_rows(plane, &kernel);
    let transposed = transpose(&horizontal);
    transpose(&convolve_rows(&transposed, &kernel))
}

fn convolve_rows(plane: &Plane, kernel: &[f64]) -> Plane {
    let w = plane.width();
    let r = (kernel.len() / 2) as isize;
    let mut out = vec![0.0; plane.data().len()];
    out.par_chunks_mut(w)
        .zip(plane.data().par_chunks(w))
        .for_each(|(dst, src)| {
            for (x, d) in dst.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (k, tap) in kernel.iter().enumerate() {
                    let sx = (x as isize + k as isize - r).clamp(0, w as isize - 1) as usize;
                    acc += tap * src[sx];
                }
                *d = acc;
            }
        });
    plane.with_data(out)
}

fn transpose(plane: &Plane) -> Plane {
    let (w, h) = (plane.width(), plane.height());
    let src = plane.data();
    let mut out = vec![0.0; w * h];
    out.par_chunks_mut(h).enumerate().for_each(|(x, col)| {
        for (y, v) in col.iter_mut().enumerate() {
            *v = src[y * w + x];
        }
    });
    Plane::new(h, w, out).expect("transpose keeps the sample count")
}

/// Local minimum and maximum over the `(2r+1)^2` window, border-clamped.
pub fn local_extrema(plane: &Plane, radius: usize) -> (Plane, Plane) {
    let min_rows = extremum_rows(plane, radius, f64::min);
    let max_rows = extremum_rows(plane, radius, f64::max);
    let min = transpose(&extremum_rows(&transpose(&min_rows), radius, f64::min));
    let max = transpose(&extremum_rows(&transpose(&max_rows), radius, f64::max));
    (min, max)
}

fn extremum_rows(plane: &Plane, radius: usize, pick: fn(f64, f64) -> f64) -> Plane {
    let w = plane.width();
    let mut out = vec![0.0; plane.data().len()];
    out.par_chunks_mut(w)
        .zip(plane.data().par_chunks(w))
        .for_each(|(dst, src)| {
            for (x, d) in dst.iter_mut().enumerate() {
                let lo = x.saturating_sub(radius);
                let hi = (x + radius + 1).min(w);
                *d = src[lo..hi].iter().copied().reduce(pick).expect("window is non-empty");
            }
        });
    plane.with_data(out)
}
