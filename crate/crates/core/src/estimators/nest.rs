use rustfft::FftPlanner;

use super::GridSpectrum;
use crate::coarray::CoarraySignal;
use num_complex::Complex64;

/// Grid estimate on the `2P - 1`-point dense grid.
///
/// `z̃ = DFT(z) / (2P - 1)` over the full lag window, then the real part of
/// every bin is soft-thresholded with `max(x - λ, 0)`.
pub fn nest(z: &CoarraySignal, lambda: f64) -> GridSpectrum {
    let p = z.window_size();
    let len = 2 * p - 1;
    // Lag l goes to DFT index l mod (2P - 1).
    let mut buf = vec![Complex64::default(); len];
    for (lag, v) in z.lags().zip(z.values()) {
        buf[lag.rem_euclid(len as i64) as usize] = *v;
    }
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let scale = 1.0 / len as f64;
    let half = (len / 2) as i64;
    let powers = (0..len)
        .map(|i| {
            let k = (i as i64 - half).rem_euclid(len as i64) as usize;
            (buf[k].re * scale - lambda).max(0.0)
        })
        .collect();
    GridSpectrum::new(powers)
}
