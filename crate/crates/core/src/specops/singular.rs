//! Desingularized quadrature of the singular-integral form of D^s,
//!
//!     D^s u(x) = C_s \int (u(x) - u(y)) / |x - y|^{1+s} dy,   s in (0, 1),
//!
//! used purely as an independent oracle for the spectral route.  The
//! normalization C_s = s 2^s Gamma((1+s)/2) / (2 sqrt(pi) Gamma(1-s/2)) is
//! pinned by requiring agreement with the Fourier multiplier (2 pi |xi|)^s
//! on Gaussian test inputs.

use super::{derivative, fft, upsample, RealField};
use crate::asym::gamma_fn;
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

const UPSAMPLE: usize = 8;

/// Normalization constant of the singular-integral representation.
pub fn riesz_singular_constant(s: f64) -> Result<f64> {
    if !(0.0 < s && s < 1.0) {
        return Err(Error::InvalidOrder(s, "s in (0,1)"));
    }
    let num = s * 2f64.powf(s) * gamma_fn((1.0 + s) / 2.0)?;
    let den = 2.0 * PI.sqrt() * gamma_fn(1.0 - s / 2.0)?;
    Ok(num / den)
}

/// Quadrature of the symmetrized difference kernel.
///
/// Writing d(r) = 2u(x) - u(x+r) - u(x-r), the two-sided integral becomes
/// int_0^inf d(r) r^{-1-s} dr.  The integrand is split at r = delta (one fine
/// step): below, d ~ -u''(x) r^2 - u''''(x) r^4 / 12 integrates analytically;
/// above, a quadratic product-integration rule with exact kernel moments runs
/// to r = L - delta; beyond, u is taken as negligible so the tail contributes
/// 2 u(x) R^{-s} / s.
pub fn apply_riesz_singular(f: &RealField, s: f64) -> Result<RealField> {
    let c_s = riesz_singular_constant(s)?;
    if !f.is_finite() {
        return Err(Error::NonFinite("apply_riesz_singular input"));
    }

    let fine = upsample(f, UPSAMPLE)?;
    let nf = fine.grid.len();
    let delta = fine.grid.spacing();
    let d2 = derivative(&derivative(&fine));
    let d4 = derivative(&derivative(&d2));

    // Radial nodes r_k = k delta, k = 1..=kmax, kmax odd so that quadratic
    // panels tile [delta, R] exactly.
    let mut kmax = nf / 2 - 1;
    if kmax % 2 == 0 {
        kmax -= 1;
    }
    let r_cut = kmax as f64 * delta;

    let weights = product_integration_weights(s, delta, kmax);
    let w_total: f64 = weights.iter().sum();

    // Circular correlation and convolution of u with the weight sequence.
    let mut u_hat: Vec<Complex64> = fft::forward(&fine.values);
    let mut a = vec![Complex64::new(0.0, 0.0); nf];
    for (k, &w) in weights.iter().enumerate() {
        a[k + 1] = Complex64::new(w, 0.0);
    }
    fft::forward_complex(&mut a);
    let mut corr_spec: Vec<Complex64> = u_hat.iter().zip(&a).map(|(u, v)| u * v.conj()).collect();
    for (u, v) in u_hat.iter_mut().zip(&a) {
        *u *= v;
    }
    fft::inverse_complex(&mut corr_spec);
    fft::inverse_complex(&mut u_hat);

    let inner_front = delta.powf(2.0 - s) / (2.0 - s);
    let inner_front4 = delta.powf(4.0 - s) / (12.0 * (4.0 - s));
    let tail_front = 2.0 * r_cut.powf(-s) / s;

    let n = f.grid.len();
    let mut out = vec![0.0; n];
    for (j, o) in out.iter_mut().enumerate() {
        let jf = j * UPSAMPLE;
        let u = fine.values[jf];
        let inner = -d2.values[jf] * inner_front - d4.values[jf] * inner_front4;
        let outer = 2.0 * u * w_total - corr_spec[jf].re - u_hat[jf].re;
        let tail = u * tail_front;
        *o = c_s * (inner + outer + tail);
    }
    RealField::new(f.grid, out)
}

/// Quadrature weights for int_{delta}^{R} d(r) r^{-1-s} dr with d interpolated
/// quadratically over node triples and the kernel moments taken exactly.
fn product_integration_weights(s: f64, delta: f64, kmax: usize) -> Vec<f64> {
    let mut w = vec![0.0; kmax];
    let moment = |q: f64, a: f64, b: f64| (b.powf(q - s) - a.powf(q - s)) / (q - s);
    let mut p = 1;
    while p + 2 <= kmax {
        let a = p as f64 * delta;
        let m = (p + 1) as f64 * delta;
        let b = (p + 2) as f64 * delta;
        let m0 = moment(0.0, a, b);
        let m1 = moment(1.0, a, b);
        let m2 = moment(2.0, a, b);
        let dd = delta * delta;
        w[p - 1] += (m2 - (m + b) * m1 + m * b * m0) / (2.0 * dd);
        w[p] += -(m2 - (a + b) * m1 + a * b * m0) / dd;
        w[p + 1] += (m2 - (a + m) * m1 + a * m * m0) / (2.0 * dd);
        p += 2;
    }
    w
}
