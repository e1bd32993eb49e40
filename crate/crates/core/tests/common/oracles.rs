//! Brute-force reference implementations, written independently of the
//! library: plain loops over row-major indices, same arithmetic order.

use stormdesk_core::analysis::{FeaturePoint, Tensor, TrackDelta};

pub const KM_PER_DEG: f64 = 111.0;

fn valid(t: &Tensor, cell: usize) -> bool {
    match &t.mask {
        Some(m) => m[cell],
        None => true,
    }
}

/// Smallest-index strict extremum per time slice.
pub fn locate(t: &Tensor, max: bool) -> Vec<FeaturePoint> {
    let g = t.grid;
    let n = g.nx * g.ny;
    let mut out = Vec::new();
    for ti in 0..t.times.len() {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..g.ny {
            for i in 0..g.nx {
                let k = j * g.nx + i;
                let v = t.values[ti * n + k];
                if !valid(t, k) || v.is_nan() {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((_, b)) => {
                        if max {
                            v > b
                        } else {
                            v < b
                        }
                    }
                };
                if better {
                    best = Some((k, v));
                }
            }
        }
        let (k, v) = best.expect("at least one valid cell");
        out.push(FeaturePoint {
            time_index: ti,
            time: t.times[ti],
            i: k % g.nx,
            j: k / g.nx,
            lat: g.ref_lat + (k / g.nx) as f64 * g.d_deg,
            lon: g.ref_lon + (k % g.nx) as f64 * g.d_deg,
            value: v,
        });
    }
    out
}

/// (mean, min, max) over valid cells of all slices.
pub fn area(t: &Tensor) -> (f64, f64, f64) {
    let n = t.grid.nx * t.grid.ny;
    let (mut sum, mut count, mut lo, mut hi) = (0.0, 0usize, f64::INFINITY, f64::NEG_INFINITY);
    for ti in 0..t.times.len() {
        for k in 0..n {
            if valid(t, k) {
                let v = t.values[ti * n + k];
                sum += v;
                count += 1;
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    (sum / count as f64, lo, hi)
}

pub fn compare(a: &[FeaturePoint], b: &[FeaturePoint]) -> (Vec<TrackDelta>, TrackDelta) {
    let deltas: Vec<TrackDelta> = a
        .iter()
        .zip(b)
        .enumerate()
        .map(|(k, (p, q))| TrackDelta { time_index: k, time: p.time, dlat: q.lat - p.lat, dlon: q.lon - p.lon })
        .collect();
    let mut best = 0;
    for k in 1..deltas.len() {
        if deltas[k].dlat.abs() > deltas[best].dlat.abs() {
            best = k;
        }
    }
    let extreme = deltas[best];
    (deltas, extreme)
}

/// Periodic centred-difference divergence.
pub fn divergence(u: &[f64], v: &[f64], nx: usize, ny: usize, dx: f64) -> Vec<f64> {
    let inv = 1.0 / (2.0 * dx);
    let mut out = vec![0.0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let east = u[j * nx + if i + 1 == nx { 0 } else { i + 1 }];
            let west = u[j * nx + if i == 0 { nx - 1 } else { i - 1 }];
            let north = v[(if j + 1 == ny { 0 } else { j + 1 }) * nx + i];
            let south = v[(if j == 0 { ny - 1 } else { j - 1 }) * nx + i];
            out[j * nx + i] = (east - west) * inv + (north - south) * inv;
        }
    }
    out
}

/// (bin, mean, count) for non-empty bins.
pub fn radial(t: &Tensor, lat: f64, lon: f64, r_max: f64, n_bins: usize) -> Vec<(usize, f64, usize)> {
    let g = t.grid;
    let n = g.nx * g.ny;
    let width = r_max / n_bins as f64;
    let mut sums = vec![0.0; n_bins];
    let mut counts = vec![0usize; n_bins];
    for ti in 0..t.times.len() {
        for k in 0..n {
            let dlat = g.ref_lat + (k / g.nx) as f64 * g.d_deg - lat;
            let dlon = g.ref_lon + (k % g.nx) as f64 * g.d_deg - lon;
            let d = (dlat * dlat + dlon * dlon).sqrt() * KM_PER_DEG;
            if d >= r_max || !valid(t, k) {
                continue;
            }
            let mut b = (d / width).floor() as usize;
            if b >= n_bins {
                b = n_bins - 1;
            }
            sums[b] += t.values[ti * n + k];
            counts[b] += 1;
        }
    }
    (0..n_bins).filter(|&b| counts[b] > 0).map(|b| (b, sums[b] / counts[b] as f64, counts[b])).collect()
}
