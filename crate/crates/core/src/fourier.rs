//! Unitary discrete Fourier transform with the centered-frequency convention.
//!
//! For a grid `x_k = -L/2 + k·dx` and momenta `p_m = (m - n/2)·dp` the
//! transform is
//!
//! ```text
//! (Fφ)_m = n^{-1/2} Σ_k exp(-i p_m x_k) φ_k
//! ```
//!
//! which is unitary because `dx·dp·n = 2π`. Expanding the phase gives
//! `exp(-i p_m x_k) = (-1)^(m + n/2) (-1)^k exp(-2πi mk/n)`, so `F` is a plain
//! FFT sandwiched between two sign flips.

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

use crate::grid::GridSpec;

fn sign(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Forward unitary transform `F`.
pub fn forward(grid: &GridSpec, amps: &DVector<C64>) -> DVector<C64> {
    let n = grid.n();
    assert_eq!(amps.len(), n, "amplitude length does not match grid");
    let mut buf: Vec<C64> = amps.iter().enumerate().map(|(k, a)| a * sign(k)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let norm = (n as f64).sqrt().recip();
    DVector::from_iterator(n, buf.into_iter().enumerate().map(|(m, c)| c * (sign(m + n / 2) * norm)))
}

/// Inverse transform `F†`.
pub fn inverse(grid: &GridSpec, coeffs: &DVector<C64>) -> DVector<C64> {
    let n = grid.n();
    assert_eq!(coeffs.len(), n, "coefficient length does not match grid");
    let mut buf: Vec<C64> = coeffs.iter().enumerate().map(|(m, c)| c * sign(m + n / 2)).collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let norm = (n as f64).sqrt().recip();
    DVector::from_iterator(n, buf.into_iter().enumerate().map(|(k, a)| a * (sign(k) * norm)))
}

/// Apply `f(p_m)` as a multiplier in momentum space: `F† diag(f(p)) F φ`.
pub fn momentum_multiplier(grid: &GridSpec, amps: &DVector<C64>, f: impl Fn(f64) -> C64) -> DVector<C64> {
    let mut c = forward(grid, amps);
    for (m, v) in c.iter_mut().enumerate() {
        *v *= f(grid.p(m));
    }
    inverse(grid, &c)
}

/// Translation `e^{-i s P}`: returns samples of `φ(x - s)` for band-limited φ.
pub fn translate(grid: &GridSpec, amps: &DVector<C64>, shift: f64) -> DVector<C64> {
    if shift == 0.0 {
        return amps.clone();
    }
    momentum_multiplier(grid, amps, |p| C64::from_polar(1.0, -shift * p))
}

/// Continuum-normalized momentum amplitudes `φ̂(p_m)`, with
/// `Σ_m |φ̂(p_m)|² dp = Σ_k |φ_k|² dx`.
pub fn momentum_amplitudes(grid: &GridSpec, amps: &DVector<C64>) -> DVector<C64> {
    forward(grid, amps) * C64::from((grid.dx() / grid.dp()).sqrt())
}

/// Projection onto momenta strictly inside `(lo, hi)`.
pub fn momentum_window(grid: &GridSpec, amps: &DVector<C64>, lo: f64, hi: f64) -> DVector<C64> {
    let guard = 1e-9 * grid.dp();
    momentum_multiplier(grid, amps, |p| {
        if p > lo + guard && p < hi - guard {
            C64::from(1.0)
        } else {
            C64::from(0.0)
        }
    })
}

/// Band-limited interpolant through the samples, evaluated at `y`.
/// Points off the grid's span evaluate to zero.
pub fn interpolate(grid: &GridSpec, amps: &DVector<C64>, y: f64) -> C64 {
    let half = 0.5 * grid.length();
    if y < -half - 1e-12 || y >= half + 1e-12 {
        return C64::from(0.0);
    }
    let coeffs = forward(grid, amps);
    interpolate_from_coeffs(grid, &coeffs, y)
}

/// Interpolant evaluated from precomputed `F φ` coefficients.
pub fn interpolate_from_coeffs(grid: &GridSpec, coeffs: &DVector<C64>, y: f64) -> C64 {
    let half = 0.5 * grid.length();
    if y < -half - 1e-12 || y >= half + 1e-12 {
        return C64::from(0.0);
    }
    let norm = (grid.n() as f64).sqrt().recip();
    coeffs
        .iter()
        .enumerate()
        .map(|(m, c)| c * C64::from_polar(norm, grid.p(m) * y))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct_dft(grid: &GridSpec, amps: &DVector<C64>) -> DVector<C64> {
        let n = grid.n();
        let norm = (n as f64).sqrt().recip();
        DVector::from_fn(n, |m, _| {
            (0..n).map(|k| amps[k] * C64::from_polar(norm, -grid.p(m) * grid.x(k))).sum()
        })
    }

    fn sample(n: usize) -> DVector<C64> {
        DVector::from_fn(n, |k, _| C64::new((k as f64 * 0.37).sin(), (k as f64 * 0.11).cos() - 0.2))
    }

    #[test]
    fn matches_direct_sum() {
        let g = GridSpec::new(32, 7.0).unwrap();
        let a = sample(32);
        let fast = forward(&g, &a);
        let slow = direct_dft(&g, &a);
        assert!((fast - slow).camax() < 1e-12);
    }

    #[test]
    fn round_trip_and_unitarity() {
        let g = GridSpec::new(128, 20.0).unwrap();
        let a = sample(128);
        let back = inverse(&g, &forward(&g, &a));
        assert!((back - &a).camax() < 1e-12);
        assert!((forward(&g, &a).norm() - a.norm()).abs() < 1e-12);
    }

    #[test]
    fn integer_translation_is_a_shift() {
        let g = GridSpec::new(64, 16.0).unwrap();
        let a = sample(64);
        let t = translate(&g, &a, 3.0 * g.dx());
        for k in 3..64 {
            assert!((t[k] - a[k - 3]).norm() < 1e-12);
        }
    }

    #[test]
    fn interpolation_reproduces_samples() {
        let g = GridSpec::new(64, 16.0).unwrap();
        let gauss = DVector::from_fn(64, |k, _| C64::from((-g.x(k).powi(2)).exp()));
        for k in [5, 20, 31, 40] {
            assert!((interpolate(&g, &gauss, g.x(k)) - gauss[k]).norm() < 1e-12);
        }
        let y = 0.3;
        assert!((interpolate(&g, &gauss, y).re - (-y * y).exp()).abs() < 1e-10);
    }
}
