//! Riemann-Liouville fractional integration `I_alpha` on nonnegative-support
//! time traces: `I_alpha f = (t_+^{alpha-1}/Gamma(alpha)) * f`, with
//! `I_0 = id`, `I_1` the running integral and `I_{-1}` the derivative.
//!
//! Quadrature: product integration that is exact when the trace is replaced
//! by its piecewise-quadratic interpolant, so the `(t-s)^{alpha-1}` endpoint
//! singularity costs no accuracy order. Fractional derivatives use
//! `I_{-alpha} f = I_{k-alpha}(d^k f/dt^k)` (valid for traces vanishing at
//! t = 0), differentiating first so that the fractional kernel never has to
//! be differentiated numerically.

use crate::error::{Error, Result};
use crate::grid::{Support, TimeTrace};
use crate::{par, C64};
use statrs::function::gamma::gamma;

/// Order of fractional integration; negative values differentiate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracOrder(pub f64);

impl FracOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha.abs() > 4.0 {
            return Err(Error::UnsupportedOrder(format!(
                "fractional order {alpha} outside implementation range |alpha| <= 4"
            )));
        }
        Ok(FracOrder(alpha))
    }
}

/// A value plus an optional accuracy warning (non-fatal diagnostics).
#[derive(Debug, Clone)]
pub struct WithWarning<T> {
    pub value: T,
    pub warning: Option<String>,
}

fn require_nonneg_support(f: &TimeTrace) -> Result<()> {
    if f.support != Support::Nonnegative {
        return Err(Error::InvalidInput(
            "fractional integration requires a nonnegative-support trace".into(),
        ));
    }
    Ok(())
}

/// `I_alpha f` for `alpha >= 0` by product integration.
pub fn frac_integral(f: &TimeTrace, alpha: f64, dt: f64) -> Result<TimeTrace> {
    FracOrder::new(alpha)?;
    require_nonneg_support(f)?;
    if alpha < 0.0 {
        return Err(Error::UnsupportedOrder(
            "negative order: use frac_derivative".into(),
        ));
    }
    if alpha == 0.0 {
        return Ok(f.clone());
    }
    let nt = f.len();
    if nt < 3 {
        return Err(Error::InvalidInput("trace too short".into()));
    }
    let a = alpha;
    // lag powers (m dt)^a, (m dt)^{a+1}, (m dt)^{a+2}
    let p0: Vec<f64> = (0..=nt).map(|m| (m as f64 * dt).powf(a)).collect();
    let p1: Vec<f64> = (0..=nt).map(|m| (m as f64 * dt).powf(a + 1.0)).collect();
    let p2: Vec<f64> = (0..=nt).map(|m| (m as f64 * dt).powf(a + 2.0)).collect();
    let inv_gamma = 1.0 / gamma(a);
    let vals = &f.values;
    let out: Vec<C64> = par::map_indexed(nt, |i| {
        if i == 0 {
            return C64::new(0.0, 0.0);
        }
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..i {
            // moments of (t_i - s)^{a-1} over [t_j, t_{j+1}] against powers of
            // (s - t_j); A = (i-j) dt, B = (i-j-1) dt
            let big_a = (i - j) as f64 * dt;
            let d0 = (p0[i - j] - p0[i - j - 1]) / a;
            let d1 = (p1[i - j] - p1[i - j - 1]) / (a + 1.0);
            let d2 = (p2[i - j] - p2[i - j - 1]) / (a + 2.0);
            let m0 = d0;
            let m1 = big_a * d0 - d1;
            let m2 = big_a * big_a * d0 - 2.0 * big_a * d1 + d2;
            // quadratic interpolant around t_j: value + slope + curvature
            let (fa, slope, curv) = if j == 0 {
                let (f0, f1, f2) = (vals[0], vals[1], vals[2]);
                (
                    f0,
                    (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * dt),
                    (f0 - 2.0 * f1 + f2) / (2.0 * dt * dt),
                )
            } else {
                let (fm, f0, f1) = (vals[j - 1], vals[j], vals[j + 1]);
                (
                    f0,
                    (f1 - fm) / (2.0 * dt),
                    (f1 - 2.0 * f0 + fm) / (2.0 * dt * dt),
                )
            };
            acc += fa * m0 + slope * m1 + curv * m2;
        }
        acc * inv_gamma
    });
    Ok(TimeTrace::nonneg(out))
}

/// Fourth-order finite-difference first derivative on a uniform grid.
pub fn deriv_fd4(values: &[C64], dt: f64) -> Vec<C64> {
    let n = values.len();
    assert!(n >= 6, "need at least 6 samples for the FD stencil");
    let v = values;
    let mut out = vec![C64::new(0.0, 0.0); n];
    let h12 = 1.0 / (12.0 * dt);
    for (i, o) in out.iter_mut().enumerate() {
        *o = if i >= 2 && i + 2 < n {
            (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) * h12
        } else if i < 2 {
            (-25.0 * v[i] + 48.0 * v[i + 1] - 36.0 * v[i + 2] + 16.0 * v[i + 3] - 3.0 * v[i + 4])
                * h12
        } else {
            (25.0 * v[i] - 48.0 * v[i - 1] + 36.0 * v[i - 2] - 16.0 * v[i - 3] + 3.0 * v[i - 4])
                * h12
        };
    }
    out
}

/// `I_{-alpha} f` for `alpha > 0`, computed as `I_{k-alpha}(f^{(k)})` with
/// `k = ceil(alpha)`. Flags (without failing) traces that do not vanish at
/// t = 0 to the required order.
pub fn frac_derivative(f: &TimeTrace, alpha: f64, dt: f64) -> Result<WithWarning<TimeTrace>> {
    FracOrder::new(alpha)?;
    require_nonneg_support(f)?;
    if alpha <= 0.0 {
        return Err(Error::UnsupportedOrder(
            "frac_derivative requires alpha > 0".into(),
        ));
    }
    let k = alpha.ceil() as usize;
    let max_mod = f.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let warning = if max_mod > 0.0 && f.values[0].norm() > 1e-8 * max_mod {
        Some(format!(
            "trace does not vanish at t=0 (|f(0)| = {:.3e} of max); accuracy degraded",
            f.values[0].norm() / max_mod
        ))
    } else {
        None
    };
    let mut d = f.values.clone();
    for _ in 0..k {
        d = deriv_fd4(&d, dt);
    }
    let trace = frac_integral(&TimeTrace::nonneg(d), k as f64 - alpha, dt)?;
    Ok(WithWarning {
        value: trace,
        warning,
    })
}

/// Signed-order dispatch: `alpha >= 0` integrates, `alpha < 0` differentiates.
pub fn frac_apply(f: &TimeTrace, alpha: f64, dt: f64) -> Result<TimeTrace> {
    if alpha >= 0.0 {
        frac_integral(f, alpha, dt)
    } else {
        Ok(frac_derivative(f, -alpha, dt)?.value)
    }
}

/// Spectral-path `I_alpha`: multiplies the padded temporal transform by the
/// discrete symbol of `t_+^{alpha-1}/Gamma(alpha)` (the DFT of its cell
/// averages, truncated so the circular convolution is exactly causal). The
/// branch is the lower-half-plane limit `(tau - i0)^{-alpha}`, carrying the
/// prefactor `e^{-i pi alpha/2}`; the result is validated against the
/// time-domain path on a built-in smoke function and the call aborts on
/// disagreement.
pub fn frac_integral_spectral(f: &TimeTrace, alpha: f64, dt: f64) -> Result<TimeTrace> {
    FracOrder::new(alpha)?;
    require_nonneg_support(f)?;
    if alpha == 0.0 {
        return Ok(f.clone());
    }
    if alpha < 0.0 {
        let k = (-alpha).ceil() as usize;
        let mut d = f.values.clone();
        for _ in 0..k {
            d = deriv_fd4(&d, dt);
        }
        return frac_integral_spectral(&TimeTrace::nonneg(d), k as f64 + alpha, dt);
    }
    let nt = f.len();
    // built-in smoke validation: t^3 e^{-t} against the product-integration path
    let smoke: Vec<C64> = (0..nt)
        .map(|i| {
            let t = i as f64 * dt;
            C64::new(t * t * t * (-t).exp(), 0.0)
        })
        .collect();
    let smoke = TimeTrace::nonneg(smoke);
    let spectral_smoke = spectral_conv(&smoke.values, alpha, dt);
    let direct_smoke = frac_integral(&smoke, alpha, dt)?;
    let num: f64 = spectral_smoke
        .iter()
        .zip(&direct_smoke.values)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let den: f64 = direct_smoke
        .values
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    if den > 0.0 && num / den > 1e-4 {
        return Err(Error::BranchConfiguration(format!(
            "spectral symbol disagrees with time-domain path: rel err {:.3e}",
            num / den
        )));
    }
    Ok(TimeTrace::nonneg(spectral_conv(&f.values, alpha, dt)))
}

/// Causal FFT convolution with cell-averaged samples of the kernel
/// `t_+^{alpha-1}/Gamma(alpha)`.
fn spectral_conv(values: &[C64], alpha: f64, dt: f64) -> Vec<C64> {
    let nt = values.len();
    let p = (2 * nt).next_power_of_two();
    let mut kernel = vec![C64::new(0.0, 0.0); p];
    let scale = dt.powf(alpha) / (gamma(alpha) * alpha * dt);
    // kernel limited to lags < p - nt so the wrap contributes nothing on 0..nt
    for (m, k) in kernel.iter_mut().enumerate().take(p - nt) {
        let hi = (m as f64 + 0.5).powf(alpha);
        let lo = if m == 0 {
            0.0
        } else {
            (m as f64 - 0.5).powf(alpha)
        };
        *k = C64::new(scale * (hi - lo), 0.0);
    }
    let mut sig = vec![C64::new(0.0, 0.0); p];
    sig[..nt].copy_from_slice(values);
    let mut planner = rustfft::FftPlanner::new();
    let fwd = planner.plan_fft_forward(p);
    let inv = planner.plan_fft_inverse(p);
    fwd.process(&mut kernel);
    fwd.process(&mut sig);
    for (s, k) in sig.iter_mut().zip(&kernel) {
        *s *= k;
    }
    inv.process(&mut sig);
    let norm = dt / p as f64;
    sig[..nt].iter().map(|z| z * norm).collect()
}

/// Discrete symbol actually applied by the spectral path at frequency bin `n`
/// of the padded axis (exposed for branch-calibration tests).
pub fn spectral_symbol(alpha: f64, dt: f64, nt: usize, n: usize) -> C64 {
    let p = (2 * nt).next_power_of_two();
    let mut kernel = vec![C64::new(0.0, 0.0); p];
    let scale = dt.powf(alpha) / (gamma(alpha) * alpha * dt);
    for (m, k) in kernel.iter_mut().enumerate().take(p - nt) {
        let hi = (m as f64 + 0.5).powf(alpha);
        let lo = if m == 0 {
            0.0
        } else {
            (m as f64 - 0.5).powf(alpha)
        };
        *k = C64::new(scale * (hi - lo), 0.0);
    }
    let mut planner = rustfft::FftPlanner::new();
    planner.plan_fft_forward(p).process(&mut kernel);
    kernel[n] * dt
}
