//! Closed-form Gamma-function prefactors, sharp tail laws, and the exact
//! alpha = 2 kink and alpha = 2, 4 resolvent kernels used as ground truth.

use crate::error::{Error, Result};
use crate::specops::{Grid, RealField};
use std::f64::consts::PI;

/// Exclusion band around the degenerate orders alpha = 2 and alpha = 4 where
/// the algebraic prefactors vanish and exponential decay takes over.
pub const ENDPOINT_EXCLUSION: f64 = 1e-6;

/// Lanczos approximation, g = 7, 9 coefficients, with the reflection formula
/// for arguments below 1/2.  Good to about 13 significant digits.
const LANCZOS: [f64; 9] = [
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
];

/// Gamma function for real arguments away from the poles {0, -1, -2, ...}.
pub fn gamma_fn(z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::NonFinite("gamma_fn argument"));
    }
    if z <= 0.5 && (z - z.round()).abs() < 1e-8 && z.round() <= 0.0 {
        return Err(Error::GammaPole(z));
    }
    Ok(gamma_unchecked(z))
}

fn gamma_unchecked(z: f64) -> f64 {
    if z < 0.5 {
        PI / ((PI * z).sin() * gamma_unchecked(1.0 - z))
    } else {
        let x = z - 1.0;
        let mut t = LANCZOS[0];
        for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
            t += c / (x + i as f64);
        }
        let w = x + 7.5;
        (2.0 * PI).sqrt() * w.powf(x + 0.5) * (-w).exp() * t
    }
}

/// Which side of alpha = 2 a tail law describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailRegime {
    SubLaplacian,
    SuperLaplacian,
}

/// Sharp algebraic tail of the kink: phi'(x) ~ c' |x|^{-1-alpha} and
/// sgn(x) - phi(x) ~ sgn(x) c |x|^{-alpha}, with c = c'/alpha.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailLaw {
    pub regime: TailRegime,
    pub alpha: f64,
    /// Coefficient of |x|^{-1-alpha} in phi'.
    pub prefactor_derivative: f64,
    /// Coefficient of |x|^{-alpha} in sgn(x) - phi.
    pub prefactor_profile: f64,
    /// Exponent of the error term in the derivative formula.
    pub remainder_order: i32,
}

/// Evaluate the tail prefactors for alpha in (1,2) u (2,4).
pub fn tail_law(alpha: f64) -> Result<TailLaw> {
    if !(1.0 < alpha && alpha < 4.0) {
        return Err(Error::InvalidOrder(alpha, "alpha in (1,2) u (2,4)"));
    }
    if (alpha - 2.0).abs() < ENDPOINT_EXCLUSION || alpha > 4.0 - ENDPOINT_EXCLUSION {
        return Err(Error::InvalidOrder(
            alpha,
            "alpha bounded away from the degenerate endpoints {2, 4}",
        ));
    }
    let sqrt_pi = PI.sqrt();
    if alpha < 2.0 {
        let cp = 2f64.powf(alpha - 2.0) * alpha * (alpha - 1.0) * gamma_fn((alpha - 1.0) / 2.0)?
            / (sqrt_pi * gamma_fn((2.0 - alpha) / 2.0)?);
        Ok(TailLaw {
            regime: TailRegime::SubLaplacian,
            alpha,
            prefactor_derivative: cp,
            prefactor_profile: cp / alpha,
            remainder_order: 3,
        })
    } else {
        let cp = -(2f64.powf(alpha - 3.0)) * alpha * (alpha - 1.0) * (alpha - 2.0)
            * gamma_fn((alpha - 1.0) / 2.0)?
            / (sqrt_pi * gamma_fn((4.0 - alpha) / 2.0)?);
        Ok(TailLaw {
            regime: TailRegime::SuperLaplacian,
            alpha,
            prefactor_derivative: cp,
            prefactor_profile: cp / alpha,
            remainder_order: 5,
        })
    }
}

/// Samples of the classical kink tanh(x / sqrt 2), the exact alpha = 2 solution.
pub fn exact_kink_alpha2(grid: Grid) -> RealField {
    RealField::from_fn(grid, |x| (x / 2f64.sqrt()).tanh())
}

/// Orders with a closed-form resolvent kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactKernelOrder {
    Alpha2,
    Alpha4,
}

/// Closed-form kernel of (D^alpha + 2)^{-1} at alpha = 2 and alpha = 4.
pub fn exact_kernel(order: ExactKernelOrder, x: f64) -> f64 {
    let r = x.abs();
    match order {
        ExactKernelOrder::Alpha2 => (-(2f64.sqrt()) * r).exp() / (2.0 * 2f64.sqrt()),
        ExactKernelOrder::Alpha4 => {
            let q = 2f64.powf(0.25);
            q * (-r / q).exp() / 4.0 * (r / q + PI / 4.0).sin()
        }
    }
}

/// Leading far-field term of the resolvent kernel: prefactor c'_alpha / 4
/// times |x|^{-1-alpha}.
pub fn kernel_asymptote(alpha: f64, x: f64) -> Result<f64> {
    if x.abs() <= 1.0 {
        return Err(Error::InvalidOrder(x, "|x| > 1 in the far field"));
    }
    let law = tail_law(alpha)?;
    Ok(law.prefactor_derivative / 4.0 * x.abs().powf(-1.0 - alpha))
}
