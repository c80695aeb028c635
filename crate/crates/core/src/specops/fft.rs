//! Cached FFT plans shared across threads.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

type PlanPair = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

fn plans(n: usize) -> PlanPair {
    static CACHE: OnceLock<Mutex<HashMap<usize, PlanPair>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap();
    map.entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        })
        .clone()
}

/// Forward DFT of real samples: F_k = sum_j f_j exp(-2 pi i j k / N).
pub fn forward(values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    plans(values.len()).0.process(&mut buf);
    buf
}

/// Forward DFT of complex samples, in place.
pub fn forward_complex(buf: &mut [Complex64]) {
    plans(buf.len()).0.process(buf);
}

/// Inverse DFT normalized by 1/N, in place.
pub fn inverse_complex(buf: &mut [Complex64]) {
    let n = buf.len();
    plans(n).1.process(buf);
    let scale = 1.0 / n as f64;
    for z in buf.iter_mut() {
        *z *= scale;
    }
}

/// Inverse DFT normalized by 1/N; returns the real part and the largest
/// absolute imaginary residue.
pub fn inverse(mut spec: Vec<Complex64>) -> (Vec<f64>, f64) {
    inverse_complex(&mut spec);
    let mut out = Vec::with_capacity(spec.len());
    let mut imag_max = 0.0f64;
    for z in &spec {
        out.push(z.re);
        imag_max = imag_max.max(z.im.abs());
    }
    (out, imag_max)
}
