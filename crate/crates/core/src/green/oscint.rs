//! Adaptive Gauss-Kronrod quadrature and integration-by-parts tails for
//! half-line cosine integrals int_0^inf f(xi) cos(2 pi x xi) dxi with f a
//! smooth rational-power symbol reciprocal.

/// 15-point Kronrod nodes (positive half) with the embedded 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One G7/K15 panel; returns (kronrod, |kronrod - gauss|).
fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = WGK[7] * f(c);
    let mut gauss = WG[3] * f(c);
    for i in 0..7 {
        let dx = h * XGK[i];
        let pair = f(c - dx) + f(c + dx);
        kron += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kron * h, (kron - gauss).abs() * h)
}

/// Globally adaptive quadrature: repeatedly bisect the panel with the largest
/// error estimate until the total is below `abs_tol` (or the panel budget is
/// exhausted, which caps the work on pathological integrands).
pub fn adaptive_quad(f: &impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64) -> f64 {
    use std::cmp::Ordering;
    use std::collections::BinaryHeap;

    struct Panel {
        a: f64,
        b: f64,
        val: f64,
        err: f64,
    }
    impl PartialEq for Panel {
        fn eq(&self, other: &Self) -> bool {
            self.err == other.err
        }
    }
    impl Eq for Panel {}
    impl PartialOrd for Panel {
        fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for Panel {
        fn cmp(&self, other: &Self) -> Ordering {
            self.err.partial_cmp(&other.err).unwrap_or(Ordering::Equal)
        }
    }

    const MAX_PANELS: usize = 20_000;
    let (val, err) = gk15(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, val, err });
    let mut total_err = err;
    let mut panels = 1usize;
    while total_err > abs_tol && panels < MAX_PANELS {
        let worst = heap.pop().unwrap();
        if (worst.b - worst.a) < 1e-15 * (worst.a.abs() + worst.b.abs() + 1.0) {
            // cannot refine further in double precision
            heap.push(worst);
            break;
        }
        let c = 0.5 * (worst.a + worst.b);
        let (v1, e1) = gk15(f, worst.a, c);
        let (v2, e2) = gk15(f, c, worst.b);
        total_err += e1 + e2 - worst.err;
        heap.push(Panel { a: worst.a, b: c, val: v1, err: e1 });
        heap.push(Panel { a: c, b: worst.b, val: v2, err: e2 });
        panels += 1;
    }
    heap.into_iter().map(|p| p.val).sum()
}

/// Truncated Taylor coefficients (value and derivatives / factorials).
#[derive(Clone, Copy)]
pub struct Jet {
    pub c: [f64; 10],
}

impl Jet {
    fn zero() -> Self {
        Jet { c: [0.0; 10] }
    }

    /// Series of (2 pi xi)^alpha around xi = a > 0.
    pub fn riesz_power(alpha: f64, a: f64, two_pi: f64) -> Self {
        let mut jet = Jet::zero();
        let lead = (two_pi * a).powf(alpha);
        let mut binom = 1.0;
        for (j, c) in jet.c.iter_mut().enumerate() {
            *c = lead * binom * a.powi(-(j as i32));
            binom *= (alpha - j as f64) / (j as f64 + 1.0);
        }
        jet
    }

    pub fn add_quadratic(&mut self, b: f64, a: f64) {
        self.c[0] += b * a * a;
        self.c[1] += 2.0 * b * a;
        self.c[2] += b;
    }

    pub fn add_const(&mut self, m: f64) {
        self.c[0] += m;
    }

    /// Series of 1/self.
    pub fn recip(&self) -> Self {
        let mut r = Jet::zero();
        r.c[0] = 1.0 / self.c[0];
        for n in 1..10 {
            let mut acc = 0.0;
            for j in 1..=n {
                acc += self.c[j] * r.c[n - j];
            }
            r.c[n] = -acc / self.c[0];
        }
        r
    }

    /// n-th derivative from the coefficients.
    pub fn deriv(&self, n: usize) -> f64 {
        let mut fact = 1.0;
        for k in 1..=n {
            fact *= k as f64;
        }
        self.c[n] * fact
    }
}

/// Tail int_A^inf f(xi) cos(omega xi) d xi by repeated integration by parts,
/// given the jet of f at A.  Valid when omega * A is a few dozen or larger;
/// also returns a bound on the truncation error.
pub fn ibp_cosine_tail(jet: &Jet, a: f64, omega: f64) -> (f64, f64) {
    let s = (omega * a).sin();
    let c = (omega * a).cos();
    let mut total = 0.0;
    let mut sign = 1.0; // (-1/omega^2)^k accumulator
    let mut last = f64::INFINITY;
    for k in 0..4 {
        let t = sign * (-jet.deriv(2 * k) * s / omega - jet.deriv(2 * k + 1) * c / (omega * omega));
        total += t;
        sign *= -1.0 / (omega * omega);
        last = (jet.deriv(2 * k + 1) / omega.powi(2 * k as i32 + 2)).abs();
    }
    (total, last)
}
