//! Periodized discrete Meyer filter bank.
//!
//! The Meyer low-pass response is band-limited, so sampling it on the DFT grid
//! of a length-`N` periodic signal gives a circular two-channel filter bank that
//! is exactly orthonormal for every even `N`. Filtering is done in the DFT
//! domain.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Meyer auxiliary polynomial: smooth step on [0, 1] with `nu(x) + nu(1-x) = 1`.
fn nu(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x.powi(4) * (35.0 - 84.0 * x + 70.0 * x * x - 20.0 * x.powi(3))
}

/// Fourier transform of the Meyer scaling function at angular frequency `xi`.
fn scaling_hat(xi: f64) -> f64 {
    let a = xi.abs();
    if a <= 2.0 * PI / 3.0 {
        1.0
    } else if a < 4.0 * PI / 3.0 {
        (PI / 2.0 * nu(3.0 * a / (2.0 * PI) - 1.0)).cos()
    } else {
        0.0
    }
}

/// Low-pass response `H(omega) = sqrt(2) * phi_hat(2 omega)`, `omega` in [-pi, pi].
pub(crate) fn lowpass_response(omega: f64) -> f64 {
    std::f64::consts::SQRT_2 * scaling_hat(2.0 * omega)
}

fn wrapped_frequency(k: usize, n: usize) -> f64 {
    let k = k as f64;
    let n = n as f64;
    let w = 2.0 * PI * k / n;
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// DFT-domain analysis/synthesis bank for one even signal length.
pub(crate) struct MeyerBank {
    n: usize,
    lo: Vec<Complex64>,
    hi: Vec<Complex64>,
    fwd_n: Arc<dyn Fft<f64>>,
    inv_n: Arc<dyn Fft<f64>>,
    fwd_half: Arc<dyn Fft<f64>>,
    inv_half: Arc<dyn Fft<f64>>,
}

impl MeyerBank {
    pub(crate) fn new(n: usize) -> Self {
        assert!(n >= 2 && n.is_multiple_of(2), "Meyer bank needs an even length, got {n}");
        let half = n / 2;
        let h: Vec<f64> = (0..n)
            .map(|k| lowpass_response(wrapped_frequency(k, n)))
            .collect();
        let lo = h.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        // g[m] = (-1)^m h[1 - m]  <=>  G(w) = -exp(-i w) H(w + pi)
        let hi = (0..n)
            .map(|k| {
                let w = 2.0 * PI * k as f64 / n as f64;
                -Complex64::from_polar(1.0, -w) * h[(k + half) % n]
            })
            .collect();
        let mut planner = FftPlanner::new();
        Self {
            n,
            lo,
            hi,
            fwd_n: planner.plan_fft_forward(n),
            inv_n: planner.plan_fft_inverse(n),
            fwd_half: planner.plan_fft_forward(half),
            inv_half: planner.plan_fft_inverse(half),
        }
    }

    /// Circular analysis: `lo[j] = sum_m h[m] x[2j+m]`, `hi[j] = sum_m g[m] x[2j+m]`.
    pub(crate) fn analyze(&self, x: &[f64], lo: &mut [f64], hi: &mut [f64]) {
        let n = self.n;
        let half = n / 2;
        debug_assert_eq!(x.len(), n);
        let mut spec: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fwd_n.process(&mut spec);
        let mut bl = vec![Complex64::new(0.0, 0.0); half];
        let mut bh = vec![Complex64::new(0.0, 0.0); half];
        for k in 0..half {
            let (a, b) = (spec[k], spec[k + half]);
            bl[k] = 0.5 * (self.lo[k].conj() * a + self.lo[k + half].conj() * b);
            bh[k] = 0.5 * (self.hi[k].conj() * a + self.hi[k + half].conj() * b);
        }
        self.inv_half.process(&mut bl);
        self.inv_half.process(&mut bh);
        let scale = 1.0 / half as f64;
        for j in 0..half {
            lo[j] = bl[j].re * scale;
            hi[j] = bh[j].re * scale;
        }
    }

    /// Adjoint (= inverse) of [`MeyerBank::analyze`].
    pub(crate) fn synthesize(&self, lo: &[f64], hi: &[f64], x: &mut [f64]) {
        let n = self.n;
        let half = n / 2;
        let mut sl: Vec<Complex64> = lo.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let mut sh: Vec<Complex64> = hi.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fwd_half.process(&mut sl);
        self.fwd_half.process(&mut sh);
        let mut spec: Vec<Complex64> = (0..n)
            .map(|k| self.lo[k] * sl[k % half] + self.hi[k] * sh[k % half])
            .collect();
        self.inv_n.process(&mut spec);
        let scale = 1.0 / n as f64;
        for (o, s) in x.iter_mut().zip(&spec) {
            *o = s.re * scale;
        }
    }

    /// Time-domain taps `(h, g)` of the periodized bank.
    pub(crate) fn taps(&self) -> (Vec<f64>, Vec<f64>) {
        let to_time = |spec: &[Complex64]| {
            let mut buf = spec.to_vec();
            self.inv_n.process(&mut buf);
            buf.iter().map(|c| c.re / self.n as f64).collect::<Vec<_>>()
        };
        (to_time(&self.lo), to_time(&self.hi))
    }
}
