//! Stationary (D^alpha phi + phi(phi^2-1) = 0) and traveling
//! (-(1-c^2) phi'' + D^alpha phi + phi(phi^2-1) = 0) kinks by damped Newton
//! iteration on the correction v = phi - W, with continuation from the
//! classical alpha = 2 solution.

use crate::asym::{tail_law, TailLaw, TailRegime, ENDPOINT_EXCLUSION};
use crate::error::{Error, Result};
use crate::specops::{
    apply_symbol, derivative, inner, riesz_from_derivative, shift, Grid, RealField, RieszSymbol,
    TOL_PARITY,
};

/// Newton convergence tolerance in the discrete L2 norm.
pub const NEWTON_TOL: f64 = 1e-9;
pub const MAX_NEWTON: usize = 50;
const MAX_BACKTRACK: usize = 20;
const MAX_CG: usize = 800;
const MIN_CONTINUATION_STEP: f64 = 1e-3;

/// Background tag; W = tanh(x / sqrt 2) throughout.
pub const BACKGROUND_TAG: &str = "tanh(x/sqrt2)";

/// W samples.
pub fn background(grid: Grid) -> RealField {
    RealField::from_fn(grid, |x| (x / 2f64.sqrt()).tanh())
}

/// W' = (1 - W^2)/sqrt 2, localized and exactly periodic to machine precision.
pub fn background_derivative(grid: Grid) -> RealField {
    RealField::from_fn(grid, |x| {
        let w = (x / 2f64.sqrt()).tanh();
        (1.0 - w * w) / 2f64.sqrt()
    })
}

/// Exact alpha = 2 anchor.  The stationary equation (c = 0, no Laplacian
/// term) is solved by tanh(x / sqrt 2); the traveling equation carries the
/// extra -(1-c^2) phi'' and widens to tanh(x / sqrt(2 (2 - c^2))).
pub fn wave_anchor(grid: Grid, c: f64) -> RealField {
    let width = if c == 0.0 {
        2f64.sqrt()
    } else {
        (2.0 * (2.0 - c * c)).sqrt()
    };
    RealField::from_fn(grid, |x| (x / width).tanh())
}

/// Symbol_{alpha,c} applied to the background along the line: the Riesz part
/// comes from the localized W' through the multiplier
/// -i sgn(xi) (2 pi |xi|)^{alpha-1}; the traveling Laplacian part is analytic,
/// -(1-c^2) W'' = (1-c^2) W (1 - W^2).
fn symbol_on_background(grid: Grid, alpha: f64, c: f64) -> Result<RealField> {
    let wp = background_derivative(grid);
    let mut a_w = riesz_from_derivative(&wp, alpha)?;
    if c != 0.0 {
        let lap = RealField::from_fn(grid, |x| {
            let w = (x / 2f64.sqrt()).tanh();
            (1.0 - c * c) * w * (1.0 - w * w)
        });
        a_w = a_w.add(&lap)?;
    }
    Ok(a_w)
}

/// Precomputed pieces of the nonlinear problem F(v) = 0 at fixed (alpha, c).
pub struct KinkProblem {
    pub grid: Grid,
    pub alpha: f64,
    pub c: f64,
    w: RealField,
    a_w: RealField,
    symbol: RieszSymbol,
}

impl KinkProblem {
    pub fn new(grid: Grid, alpha: f64, c: f64) -> Result<Self> {
        if !(1.0 < alpha && alpha < 4.0) {
            return Err(Error::InvalidOrder(alpha, "alpha in (1, 4)"));
        }
        if !(c.abs() < 1.0) {
            return Err(Error::InvalidOrder(c, "|c| < 1"));
        }
        let symbol = if c == 0.0 {
            RieszSymbol::riesz(grid, alpha)?
        } else {
            RieszSymbol::wave(grid, alpha, c, 0.0)?
        };
        Ok(KinkProblem {
            grid,
            alpha,
            c,
            w: background(grid),
            a_w: symbol_on_background(grid, alpha, c)?,
            symbol,
        })
    }

    pub fn phi(&self, v: &RealField) -> Result<RealField> {
        self.w.add(v)
    }

    /// F(v) = Symbol_{alpha,c}[W + v] + (W+v)((W+v)^2 - 1).
    pub fn residual_field(&self, v: &RealField) -> Result<RealField> {
        let sv = apply_symbol(v, &self.symbol)?;
        let phi = self.phi(v)?;
        let mut out = sv.add(&self.a_w)?;
        for (o, &p) in out.values.iter_mut().zip(&phi.values) {
            *o += p * (p * p - 1.0);
            if !o.is_finite() {
                return Err(Error::NonFinite("kink residual"));
            }
        }
        Ok(out)
    }

    /// J[w] = Symbol[w] + (3 phi^2 - 1) w at the current iterate.
    fn jacobian_apply(&self, phi: &RealField, w: &RealField) -> Result<RealField> {
        let mut out = apply_symbol(w, &self.symbol)?;
        for ((o, &p), &wv) in out.values.iter_mut().zip(&phi.values).zip(&w.values) {
            *o += (3.0 * p * p - 1.0) * wv;
        }
        Ok(out)
    }

    /// Symbol preconditioner (Symbol_{alpha,c} + 2)^{-1}, diagonal in
    /// frequency; kept definite at the Nyquist bin.
    fn precondition(&self, r: &RealField) -> RealField {
        use crate::specops::fft;
        let mut spec = fft::forward(&r.values);
        for (m, z) in spec.iter_mut().enumerate() {
            *z /= self.symbol.sigma(r.grid.freq(m)) + 2.0;
        }
        let (values, _) = fft::inverse(spec);
        RealField::new(r.grid, values).unwrap()
    }

    /// Preconditioned conjugate gradients for J dx = b in the odd subspace.
    fn solve_newton_system(&self, phi: &RealField, b: &RealField) -> Result<RealField> {
        let b = b.odd_part();
        let b_norm = b.norm_l2();
        if b_norm == 0.0 {
            return Ok(RealField::zeros(self.grid));
        }
        let mut x = RealField::zeros(self.grid);
        let mut r = b.clone();
        let mut z = self.precondition(&r).odd_part();
        let mut p = z.clone();
        let mut rz = inner(&r, &z)?;
        for _ in 0..MAX_CG {
            let ap = self.jacobian_apply(phi, &p)?.odd_part();
            let pap = inner(&p, &ap)?;
            if !(pap > 0.0) || !pap.is_finite() {
                return Err(Error::KrylovBreakdown(format!(
                    "nonpositive curvature p.Jp = {pap:.3e}"
                )));
            }
            let alpha = rz / pap;
            x.axpy(alpha, &p)?;
            r.axpy(-alpha, &ap)?;
            if r.norm_l2() <= 1e-12 * b_norm {
                return Ok(x);
            }
            z = self.precondition(&r).odd_part();
            let rz_new = inner(&r, &z)?;
            let beta = rz_new / rz;
            rz = rz_new;
            let mut p_new = z.clone();
            p_new.axpy(beta, &p)?;
            p = p_new;
        }
        Err(Error::KrylovBreakdown(format!(
            "no convergence within {MAX_CG} iterations"
        )))
    }
}

/// A converged kink.
#[derive(Debug, Clone)]
pub struct KinkProfile {
    pub grid: Grid,
    pub alpha: f64,
    pub c: f64,
    pub phi: RealField,
    /// Spectral derivative of phi (even function).
    pub dphi: RealField,
    pub residual_norm: f64,
    pub iterations: usize,
    pub background: &'static str,
}

impl KinkProfile {
    /// Correction v = phi - W.
    pub fn correction(&self) -> RealField {
        self.phi.sub(&background(self.grid)).unwrap()
    }

    /// phi(. + delta): analytic shift of the background plus a spectral shift
    /// of the decaying correction.
    pub fn shifted_phi(&self, delta: f64) -> RealField {
        let v = shift(&self.correction(), delta);
        RealField::from_fn(self.grid, |x| ((x + delta) / 2f64.sqrt()).tanh())
            .add(&v)
            .unwrap()
    }

    /// phi'(. + delta), same splitting.
    pub fn shifted_dphi(&self, delta: f64) -> RealField {
        let dv = self.dphi.sub(&background_derivative(self.grid)).unwrap();
        let shifted_dv = shift(&dv, delta);
        RealField::from_fn(self.grid, |x| {
            let w = ((x + delta) / 2f64.sqrt()).tanh();
            (1.0 - w * w) / 2f64.sqrt()
        })
        .add(&shifted_dv)
        .unwrap()
    }

    /// Parity defect of the line profile: the reflection pairs x_j <-> x_{N-j}
    /// plus the pinned origin.  The node at x = -L is excluded; its mirror +L
    /// is off the grid and the background is odd there only as a line function.
    pub fn odd_defect(&self) -> f64 {
        let n = self.grid.len();
        let mut worst = self.phi.values[self.grid.origin_index()].abs();
        for j in 1..n {
            if j != n - j {
                worst = worst.max((self.phi.values[j] + self.phi.values[n - j]).abs());
            }
        }
        worst
    }

    /// Contract violations; empty when the profile honors every invariant
    /// applicable to its regime.
    pub fn validate(&self) -> Vec<String> {
        let mut bad = Vec::new();
        if self.odd_defect() > TOL_PARITY {
            bad.push(format!("odd-parity defect {:.3e}", self.odd_defect()));
        }
        if self.residual_norm > NEWTON_TOL * (2.0 * self.grid.half_length()).sqrt() {
            bad.push(format!("residual norm {:.3e}", self.residual_norm));
        }
        if let Ok(law) = tail_law(self.alpha) {
            let l = self.grid.half_length();
            let x_check = l - 10.0;
            let j = ((x_check + l) / self.grid.spacing()).round() as usize;
            let allowed = 10.0 * law.prefactor_profile.abs() * x_check.powf(-self.alpha);
            let defect = (self.phi.values[j] - 1.0).abs();
            if defect > allowed {
                bad.push(format!(
                    "boundary defect {defect:.3e} exceeds {allowed:.3e} at x = {x_check}"
                ));
            }
            match law.regime {
                TailRegime::SubLaplacian => {
                    let min_slope = self.dphi.values.iter().cloned().fold(f64::INFINITY, f64::min);
                    if min_slope < -1e-8 {
                        bad.push(format!("monotonicity defect: min phi' = {min_slope:.3e}"));
                    }
                    if self.phi.sup_norm() > 1.0 + 1e-8 {
                        bad.push(format!("|phi| exceeds 1 by {:.3e}", self.phi.sup_norm() - 1.0));
                    }
                }
                TailRegime::SuperLaplacian => {
                    if self.phi.sup_norm() <= 1.0 {
                        bad.push("no overshoot above 1 in the super-Laplacian regime".into());
                    }
                }
            }
        }
        bad
    }
}

/// Solver options; the default rejects traveling solves outside the
/// spectral-stability theorem's range alpha in (1, 2).
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub newton_tol: f64,
    pub max_newton: usize,
    pub allow_super_traveling: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            newton_tol: NEWTON_TOL,
            max_newton: MAX_NEWTON,
            allow_super_traveling: false,
        }
    }
}

/// Compute the kink at (alpha, c), seeding from `init` when given and from
/// alpha = 2 continuation otherwise.
pub fn solve_kink(
    grid: Grid,
    alpha: f64,
    c: f64,
    init: Option<&KinkProfile>,
) -> Result<KinkProfile> {
    solve_kink_opts(grid, alpha, c, init, &SolveOptions::default())
}

pub fn solve_kink_opts(
    grid: Grid,
    alpha: f64,
    c: f64,
    init: Option<&KinkProfile>,
    opts: &SolveOptions,
) -> Result<KinkProfile> {
    if c != 0.0 && alpha > 2.0 + ENDPOINT_EXCLUSION && !opts.allow_super_traveling {
        return Err(Error::InvalidOrder(
            alpha,
            "traveling kinks are supported for alpha in (1, 2]",
        ));
    }
    let problem = KinkProblem::new(grid, alpha, c)?;
    if let Some(p) = init {
        if p.grid != grid {
            return Err(Error::GridMismatch(
                grid.len(),
                grid.half_length(),
                p.grid.len(),
                p.grid.half_length(),
            ));
        }
        let v0 = p.phi.sub(&background(grid))?.odd_part();
        return newton(&problem, v0, opts);
    }
    if (alpha - 2.0).abs() < 1e-12 {
        let v0 = wave_anchor(grid, c).sub(&background(grid))?.odd_part();
        return newton(&problem, v0, opts);
    }
    let chain = continue_in_alpha_opts(grid, 2.0, alpha, 0.1, c, opts)?;
    Ok(chain.into_iter().last().unwrap())
}

fn newton(problem: &KinkProblem, v0: RealField, opts: &SolveOptions) -> Result<KinkProfile> {
    let mut v = v0;
    let mut res = problem.residual_field(&v)?;
    let mut rnorm = res.norm_l2();
    for it in 0..=opts.max_newton {
        if rnorm <= opts.newton_tol {
            return finish(problem, v, rnorm, it);
        }
        if it == opts.max_newton {
            break;
        }
        let phi = problem.phi(&v)?;
        let step = problem.solve_newton_system(&phi, &res.scale(-1.0))?;
        let mut eta = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_BACKTRACK {
            let mut trial = v.clone();
            trial.axpy(eta, &step)?;
            let trial = trial.odd_part();
            let trial_res = problem.residual_field(&trial)?;
            let trial_norm = trial_res.norm_l2();
            if trial_norm < rnorm {
                v = trial;
                res = trial_res;
                rnorm = trial_norm;
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if !accepted {
            return Err(Error::NoConvergence { residual: rnorm, iterations: it });
        }
    }
    Err(Error::NoConvergence { residual: rnorm, iterations: opts.max_newton })
}

fn finish(
    problem: &KinkProblem,
    v: RealField,
    rnorm: f64,
    iterations: usize,
) -> Result<KinkProfile> {
    let phi = problem.phi(&v)?;
    let dphi = background_derivative(problem.grid).add(&derivative(&v))?;
    Ok(KinkProfile {
        grid: problem.grid,
        alpha: problem.alpha,
        c: problem.c,
        phi,
        dphi,
        residual_norm: rnorm,
        iterations,
        background: BACKGROUND_TAG,
    })
}

/// Homotopy in alpha with adaptive step halving; returns every converged
/// profile along the path including the endpoints.
pub fn continue_in_alpha(
    grid: Grid,
    alpha_from: f64,
    alpha_to: f64,
    step: f64,
    c: f64,
) -> Result<Vec<KinkProfile>> {
    continue_in_alpha_opts(grid, alpha_from, alpha_to, step, c, &SolveOptions::default())
}

pub fn continue_in_alpha_opts(
    grid: Grid,
    alpha_from: f64,
    alpha_to: f64,
    step: f64,
    c: f64,
    opts: &SolveOptions,
) -> Result<Vec<KinkProfile>> {
    for a in [alpha_from, alpha_to] {
        if !(1.0 < a && a < 4.0) {
            return Err(Error::InvalidOrder(a, "continuation path inside (1, 4)"));
        }
    }
    if !(step > 0.0 && step <= 0.1 + 1e-12) {
        return Err(Error::InvalidOrder(step, "continuation step in (0, 0.1]"));
    }

    let first = if (alpha_from - 2.0).abs() < 1e-12 {
        let problem = KinkProblem::new(grid, 2.0, c)?;
        let v0 = wave_anchor(grid, c).sub(&background(grid))?.odd_part();
        newton(&problem, v0, opts)?
    } else {
        solve_kink_opts(grid, alpha_from, c, None, opts)?
    };

    let mut profiles = vec![first];
    if (alpha_to - alpha_from).abs() < 1e-14 {
        return Ok(profiles);
    }
    let direction = (alpha_to - alpha_from).signum();
    let mut current_step = step;
    let mut alpha = alpha_from;
    while (alpha - alpha_to).abs() > 1e-12 {
        let next = if direction > 0.0 {
            (alpha + current_step).min(alpha_to)
        } else {
            (alpha - current_step).max(alpha_to)
        };
        let problem = KinkProblem::new(grid, next, c)?;
        let seed = profiles.last().unwrap().phi.sub(&background(grid))?.odd_part();
        match newton(&problem, seed, opts) {
            Ok(p) => {
                profiles.push(p);
                alpha = next;
            }
            Err(Error::NoConvergence { .. }) | Err(Error::KrylovBreakdown(_)) => {
                current_step *= 0.5;
                if current_step < MIN_CONTINUATION_STEP {
                    return Err(Error::StepUnderflow {
                        last_good_alpha: alpha,
                        min_step: MIN_CONTINUATION_STEP,
                    });
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(profiles)
}

/// Which tail is fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailQuantity {
    /// |sgn(x) - phi|, exponent -alpha, prefactor |c_alpha|.
    ProfileDefect,
    /// |phi'|, exponent -(1+alpha), prefactor |c'_alpha|.
    Derivative,
}

/// Log-log least-squares fit of a tail against the sharp asymptotic law.
#[derive(Debug, Clone)]
pub struct TailFit {
    pub window: (f64, f64),
    pub quantity: TailQuantity,
    pub fitted_exponent: f64,
    pub fitted_prefactor: f64,
    pub n_nodes: usize,
    /// None at the degenerate order alpha = 2 (no algebraic law there).
    pub law: Option<TailLaw>,
    pub rel_exponent_err: f64,
    pub rel_prefactor_err: f64,
    /// Sample points (x, quantity) used by the fit.
    pub samples: Vec<(f64, f64)>,
}

/// Fit the tail of a converged profile on [x_lo, x_hi] (defaults to
/// [10, L/2]).  In the super-Laplacian regime the window is pushed past the
/// last sign change of the quantity, located by scanning from x_hi inward.
pub fn fit_tail(
    p: &KinkProfile,
    quantity: TailQuantity,
    window: Option<(f64, f64)>,
) -> Result<TailFit> {
    let l = p.grid.half_length();
    let (mut x_lo, x_hi) = window.unwrap_or((10.0, l / 2.0));
    if x_lo < 10.0 - 1e-12 || x_hi > l / 2.0 + 1e-12 || x_lo >= x_hi {
        return Err(Error::Config(format!(
            "tail window [{x_lo}, {x_hi}] outside [10, L/2]"
        )));
    }
    let law = tail_law(p.alpha).ok();
    let super_regime = matches!(law.map(|l| l.regime), Some(TailRegime::SuperLaplacian));

    // signed quantity whose positivity marks the clean tail
    let signed = |j: usize| -> f64 {
        match quantity {
            TailQuantity::ProfileDefect => {
                if super_regime {
                    p.phi.values[j] - 1.0
                } else {
                    1.0 - p.phi.values[j]
                }
            }
            TailQuantity::Derivative => {
                if super_regime {
                    -p.dphi.values[j]
                } else {
                    p.dphi.values[j]
                }
            }
        }
    };

    if super_regime {
        let mut crossing: Option<f64> = None;
        let mut j = ((x_hi + l) / p.grid.spacing()).floor() as usize;
        while p.grid.node(j) > 0.0 {
            if signed(j) <= 0.0 {
                crossing = Some(p.grid.node(j));
                break;
            }
            j -= 1;
        }
        if let Some(xc) = crossing {
            x_lo = x_lo.max(1.15 * xc + 2.0);
        }
    }

    let mut samples = Vec::new();
    for j in 0..p.grid.len() {
        let x = p.grid.node(j);
        if x >= x_lo && x <= x_hi {
            let q = signed(j);
            if q <= 0.0 {
                return Err(Error::WindowNotPositive(x_lo, x_hi));
            }
            samples.push((x, q));
        }
    }
    if samples.len() < 20 {
        return Err(Error::WindowTooNarrow(samples.len(), 20));
    }

    let n = samples.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, q) in &samples {
        let (lx, ly) = (x.ln(), q.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let prefactor = intercept.exp();

    let (rel_e, rel_p) = match law {
        Some(law) => {
            let (target_e, target_p) = match quantity {
                TailQuantity::ProfileDefect => (-p.alpha, law.prefactor_profile.abs()),
                TailQuantity::Derivative => (-(1.0 + p.alpha), law.prefactor_derivative.abs()),
            };
            (
                (slope - target_e).abs() / target_e.abs(),
                (prefactor - target_p).abs() / target_p,
            )
        }
        None => (f64::NAN, f64::NAN),
    };

    Ok(TailFit {
        window: (x_lo, x_hi),
        quantity,
        fitted_exponent: slope,
        fitted_prefactor: prefactor,
        n_nodes: samples.len(),
        law,
        rel_exponent_err: rel_e,
        rel_prefactor_err: rel_p,
        samples,
    })
}

/// Quadrature of (1 - phi^2) phi'; equals 4/3 for every admissible alpha.
pub fn flux_identity(p: &KinkProfile) -> Result<f64> {
    let integrand = p.phi.map(|v| 1.0 - v * v);
    inner(&integrand, &p.dphi)
}

/// Residual norm of the profile translated by `delta` (the equation is
/// autonomous, so this stays at the solver-tolerance scale).
pub fn shifted_residual_norm(p: &KinkProfile, delta: f64) -> Result<f64> {
    let problem = KinkProblem::new(p.grid, p.alpha, p.c)?;
    let shifted = p.shifted_phi(delta);
    let v = shifted.sub(&background(p.grid))?;
    Ok(problem.residual_field(&v)?.norm_l2())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_grid() -> Grid {
        Grid::new(50.0, 2048).unwrap()
    }

    #[test]
    fn alpha2_recovers_tanh() {
        let g = test_grid();
        let p = solve_kink(g, 2.0, 0.0, None).unwrap();
        assert!(p.residual_norm <= NEWTON_TOL);
        assert_eq!(p.iterations, 0);
        let w = background(g);
        let mut sup = 0.0f64;
        for (j, (a, b)) in p.phi.values.iter().zip(&w.values).enumerate() {
            if g.node(j).abs() <= 25.0 {
                sup = sup.max((a - b).abs());
            }
        }
        assert!(sup <= 1e-8, "sup error {sup}");
    }

    #[test]
    fn starting_defect_alpha15_matches_reference() {
        // grid chosen so x = 1 falls on a node
        let g = Grid::new(50.0, 2000).unwrap();
        let problem = KinkProblem::new(g, 1.5, 0.0).unwrap();
        let r = problem.residual_field(&RealField::zeros(g)).unwrap();
        // F(0) = D^{1.5} W - D^2 W; frozen from high-precision quadrature of
        // the tanh transform: D^{1.5}W(1) = 0.36845257545, D^2 W(1) = 0.38314927641
        let j = ((1.0 + 50.0) / g.spacing()).round() as usize;
        assert!((g.node(j) - 1.0).abs() < 1e-12);
        let expect = 0.36845257545024903 - 0.38314927641474907;
        assert!((r.values[j] - expect).abs() < 1e-4, "{} vs {expect}", r.values[j]);
        assert!(r.norm_l2() > 1e-2);
    }

    #[test]
    fn sub_laplacian_kink_is_monotone_bounded() {
        let g = test_grid();
        let p = solve_kink(g, 1.5, 0.0, None).unwrap();
        assert!(p.residual_norm <= NEWTON_TOL);
        assert!(p.validate().is_empty(), "{:?}", p.validate());
        assert!(p.phi.sup_norm() <= 1.0 + 1e-8);
        let min_slope = p.dphi.values.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min_slope >= -1e-8);
        assert!(p.odd_defect() <= 1e-12);
    }

    #[test]
    fn super_laplacian_kink_overshoots_once() {
        let g = test_grid();
        let p = solve_kink(g, 2.5, 0.0, None).unwrap();
        assert!(p.residual_norm <= NEWTON_TOL);
        assert!(p.phi.sup_norm() > 1.0);
        let mut crossings = 0;
        let mut prev = 0.0f64;
        for j in g.origin_index()..g.len() {
            let d = p.phi.values[j] - 1.0;
            if prev != 0.0 && d != 0.0 && d.signum() != prev.signum() {
                crossings += 1;
            }
            if d != 0.0 {
                prev = d;
            }
        }
        assert_eq!(crossings, 1, "expected a single crossing of phi = 1");
    }

    #[test]
    fn continuation_trivial_and_chain() {
        let g = test_grid();
        let chain = continue_in_alpha(g, 2.0, 2.0, 0.05, 0.0).unwrap();
        assert_eq!(chain.len(), 1);
        let chain = continue_in_alpha(g, 2.0, 1.5, 0.05, 0.0).unwrap();
        assert_eq!(chain.len(), 11);
        for p in &chain {
            assert!(p.residual_norm <= NEWTON_TOL);
            let min_slope = p.dphi.values.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(min_slope >= -1e-8, "alpha = {}", p.alpha);
        }
    }

    #[test]
    fn continuation_toward_super_overshoots() {
        let g = test_grid();
        let chain = continue_in_alpha(g, 2.0, 2.5, 0.05, 0.0).unwrap();
        for p in &chain {
            if p.alpha > 2.1 {
                assert!(p.phi.sup_norm() > 1.0, "alpha = {} lacks overshoot", p.alpha);
            }
        }
    }

    #[test]
    fn continuation_rejects_bad_steps() {
        let g = test_grid();
        assert!(continue_in_alpha(g, 2.0, 1.5, 0.2, 0.0).is_err());
        assert!(continue_in_alpha(g, 2.0, 4.2, 0.1, 0.0).is_err());
    }

    #[test]
    fn flux_identity_all_regimes() {
        let g = test_grid();
        for alpha in [2.0, 1.5, 2.5] {
            let p = solve_kink(g, alpha, 0.0, None).unwrap();
            let flux = flux_identity(&p).unwrap();
            assert!(
                (flux - 4.0 / 3.0).abs() <= 4.0 / 3.0 * 2e-6,
                "alpha={alpha}: flux {flux}"
            );
        }
    }

    #[test]
    fn traveling_kink_exists_and_is_monotone() {
        let g = test_grid();
        let p = solve_kink(g, 1.5, 0.5, None).unwrap();
        assert!(p.residual_norm <= NEWTON_TOL);
        assert!(p.phi.sup_norm() <= 1.0 + 1e-8);
        let min_slope = p.dphi.values.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min_slope >= -1e-8);
        assert!(solve_kink(g, 2.5, 0.5, None).is_err());
        let opts = SolveOptions { allow_super_traveling: true, ..Default::default() };
        assert!(solve_kink_opts(g, 2.2, 0.3, None, &opts).is_ok());
    }

    #[test]
    fn translation_covariance_of_the_residual() {
        let g = test_grid();
        let p = solve_kink(g, 1.5, 0.0, None).unwrap();
        let r = shifted_residual_norm(&p, 0.5 * g.spacing()).unwrap();
        assert!(r <= 10.0 * NEWTON_TOL, "shifted residual {r}");
    }

    #[test]
    fn grid_refinement_stability() {
        let coarse = Grid::new(50.0, 1024).unwrap();
        let fine = Grid::new(50.0, 2048).unwrap();
        let pc = solve_kink(coarse, 1.5, 0.0, None).unwrap();
        let pf = solve_kink(fine, 1.5, 0.0, None).unwrap();
        let mut sup = 0.0f64;
        for j in 0..coarse.len() {
            if coarse.node(j).abs() <= 25.0 {
                sup = sup.max((pc.phi.values[j] - pf.phi.values[2 * j]).abs());
            }
        }
        assert!(sup <= 1e-6, "refinement drift {sup}");
    }

    #[test]
    fn rejects_out_of_scope_orders() {
        let g = test_grid();
        assert!(solve_kink(g, 1.0, 0.0, None).is_err());
        assert!(solve_kink(g, 0.8, 0.0, None).is_err());
        assert!(solve_kink(g, 4.0, 0.0, None).is_err());
        assert!(solve_kink(g, 1.5, 1.0, None).is_err());
    }

    #[test]
    fn tail_fit_alpha2_rejects_power_law() {
        // tanh has an exponential tail: the fitted slope drifts with the window
        let g = Grid::new(200.0, 4096).unwrap();
        let p = solve_kink(g, 2.0, 0.0, None).unwrap();
        // windows chosen so 1 - phi stays above the double-precision floor
        let f1 = fit_tail(&p, TailQuantity::ProfileDefect, Some((10.0, 16.0))).unwrap();
        let f2 = fit_tail(&p, TailQuantity::ProfileDefect, Some((16.0, 22.0))).unwrap();
        assert!(f1.law.is_none());
        assert!(
            (f2.fitted_exponent - f1.fitted_exponent).abs() > 5.0,
            "slopes {} vs {}",
            f1.fitted_exponent,
            f2.fitted_exponent
        );
    }
}
