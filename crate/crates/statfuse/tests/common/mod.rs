//! Naive reference implementations shared by the integration and
//! acceptance tests.
//!
//! Every function here evaluates its statistic with plain double loops,
//! independent of the summed-area-table path in the library, so the two
//! can be checked against each other.

// each test binary uses its own subset of these helpers
#![allow(dead_code)]

use rand::Rng;
use statfuse::raster::Band;
use statfuse::window_stats::WindowSpec;

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

pub fn assert_planes_close(actual: &[f64], expected: &[f64], tol: f64, what: &str) {
    assert_eq!(actual.len(), expected.len(), "{what}: length mismatch");
    for (i, (a, e)) in actual.iter().zip(expected).enumerate() {
        assert!(
            rel_close(*a, *e, tol),
            "{what}: index {i}: got {a}, expected {e}"
        );
    }
}

/// Random band with samples uniform in [lo, hi).
pub fn random_band(rng: &mut impl Rng, w: usize, h: usize, lo: f64, hi: f64) -> Band {
    let data = (0..w * h).map(|_| rng.gen_range(lo..hi)).collect();
    Band::new(w, h, data, 8).unwrap()
}

#[inline]
fn sample(band: &Band, x: isize, y: isize) -> f64 {
    let cx = x.clamp(0, band.width() as isize - 1) as usize;
    let cy = y.clamp(0, band.height() as isize - 1) as usize;
    band.get(cx, cy)
}

fn window_mean_at(band: &Band, win: &WindowSpec, x: usize, y: usize) -> f64 {
    let (mx, my) = (win.width() as isize / 2, win.height() as isize / 2);
    let mut sum = 0.0;
    for dy in -my..=my {
        for dx in -mx..=mx {
            sum += sample(band, x as isize + dx, y as isize + dy);
        }
    }
    sum / (win.width() * win.height()) as f64
}

pub fn naive_local_mean(band: &Band, win: &WindowSpec) -> Vec<f64> {
    let mut out = Vec::with_capacity(band.data().len());
    for y in 0..band.height() {
        for x in 0..band.width() {
            out.push(window_mean_at(band, win, x, y));
        }
    }
    out
}

fn window_var_at(band: &Band, win: &WindowSpec, x: usize, y: usize) -> f64 {
    let (mx, my) = (win.width() as isize / 2, win.height() as isize / 2);
    let mean = window_mean_at(band, win, x, y);
    let mut ss = 0.0;
    for dy in -my..=my {
        for dx in -mx..=mx {
            let d = sample(band, x as isize + dx, y as isize + dy) - mean;
            ss += d * d;
        }
    }
    ss / (win.width() * win.height()) as f64
}

pub fn naive_local_std(band: &Band, win: &WindowSpec) -> Vec<f64> {
    let mut out = Vec::with_capacity(band.data().len());
    for y in 0..band.height() {
        for x in 0..band.width() {
            out.push(window_var_at(band, win, x, y).sqrt());
        }
    }
    out
}

fn window_cov_at(a: &Band, b: &Band, win: &WindowSpec, x: usize, y: usize) -> f64 {
    let (mx, my) = (win.width() as isize / 2, win.height() as isize / 2);
    let ma = window_mean_at(a, win, x, y);
    let mb = window_mean_at(b, win, x, y);
    let mut sum = 0.0;
    for dy in -my..=my {
        for dx in -mx..=mx {
            sum += (sample(a, x as isize + dx, y as isize + dy) - ma)
                * (sample(b, x as isize + dx, y as isize + dy) - mb);
        }
    }
    sum / (win.width() * win.height()) as f64
}

pub fn naive_local_cov(a: &Band, b: &Band, win: &WindowSpec) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.data().len());
    for y in 0..a.height() {
        for x in 0..a.width() {
            out.push(window_cov_at(a, b, win, x, y));
        }
    }
    out
}

/// (slope, intercept) at one pixel, with the same degenerate fallback rule
/// as the library: slope 0 and intercept mean(m) when var(p) < epsilon.
fn regression_at(m: &Band, p: &Band, win: &WindowSpec, x: usize, y: usize) -> (f64, f64) {
    let var_p = window_var_at(p, win, x, y);
    let mean_m = window_mean_at(m, win, x, y);
    if var_p < win.epsilon() || var_p == 0.0 {
        (0.0, mean_m)
    } else {
        let slope = window_cov_at(p, m, win, x, y) / var_p;
        (slope, mean_m - slope * window_mean_at(p, win, x, y))
    }
}

pub fn naive_local_regression(m: &Band, p: &Band, win: &WindowSpec) -> (Vec<f64>, Vec<f64>) {
    let mut slope = Vec::with_capacity(m.data().len());
    let mut intercept = Vec::with_capacity(m.data().len());
    for y in 0..m.height() {
        for x in 0..m.width() {
            let (s, i) = regression_at(m, p, win, x, y);
            slope.push(s);
            intercept.push(i);
        }
    }
    (slope, intercept)
}

pub fn naive_fuse_lmm(pan: &Band, ms: &Band, win: &WindowSpec) -> Vec<f64> {
    let mut out = Vec::with_capacity(pan.data().len());
    for y in 0..pan.height() {
        for x in 0..pan.width() {
            let mm = window_mean_at(ms, win, x, y);
            let mp = window_mean_at(pan, win, x, y);
            if mp.abs() < win.epsilon() || mp == 0.0 {
                out.push(mm);
            } else {
                out.push(pan.get(x, y) * (mm / mp));
            }
        }
    }
    out
}

pub fn naive_fuse_lmvm(pan: &Band, ms: &Band, win: &WindowSpec) -> Vec<f64> {
    let mut out = Vec::with_capacity(pan.data().len());
    for y in 0..pan.height() {
        for x in 0..pan.width() {
            let sp = window_var_at(pan, win, x, y).sqrt();
            let mm = window_mean_at(ms, win, x, y);
            if sp < win.epsilon() || sp == 0.0 {
                out.push(mm);
            } else {
                let sm = window_var_at(ms, win, x, y).sqrt();
                let mp = window_mean_at(pan, win, x, y);
                out.push((pan.get(x, y) - mp) * (sm / sp) + mm);
            }
        }
    }
    out
}

pub fn naive_fuse_rvs(pan: &Band, ms: &Band, win: &WindowSpec) -> Vec<f64> {
    let mut out = Vec::with_capacity(pan.data().len());
    for y in 0..pan.height() {
        for x in 0..pan.width() {
            let (slope, intercept) = regression_at(ms, pan, win, x, y);
            out.push(intercept + slope * pan.get(x, y));
        }
    }
    out
}

pub fn naive_degrade(band: &Band, factor: usize) -> Band {
    let (ow, oh) = (band.width() / factor, band.height() / factor);
    let mut data = Vec::with_capacity(ow * oh);
    for by in 0..oh {
        for bx in 0..ow {
            let mut sum = 0.0;
            for dy in 0..factor {
                for dx in 0..factor {
                    sum += band.get(bx * factor + dx, by * factor + dy);
                }
            }
            data.push(sum / (factor * factor) as f64);
        }
    }
    Band::new(ow, oh, data, band.bit_depth()).unwrap()
}

/// Hand-stepped LCM: degrade, regress at low resolution, re-apply the
/// coefficients and residual per block.
pub fn naive_fuse_lcm(pan: &Band, ms_low: &Band, factor: usize, win: &WindowSpec) -> Vec<f64> {
    let p_low = naive_degrade(pan, factor);
    let mut out = Vec::with_capacity(pan.data().len());
    for hy in 0..pan.height() {
        for hx in 0..pan.width() {
            let (lx, ly) = (hx / factor, hy / factor);
            let (a, b) = regression_at(ms_low, &p_low, win, lx, ly);
            let e = ms_low.get(lx, ly) - (b + a * p_low.get(lx, ly));
            out.push(b + a * pan.get(hx, hy) + e);
        }
    }
    out
}
