//! Discretization backbone: truncated periodic spatial domain, uniform time
//! axis, spectral transforms with the continuum convention, discrete Sobolev
//! norms, smooth cutoffs, and half-line restriction/extension.
//!
//! Conventions. The whole line is truncated to `[-L, L)` with `Nx` nodes
//! `x_j = -L + j dx`, `dx = 2L/Nx`; `Nx` even so `x = 0` is the node
//! `j = Nx/2`. Frequencies are `xi_m = pi m / L`, `m = -Nx/2 .. Nx/2-1`.
//! The forward transform approximates `phihat(xi) = int e^{-i xi x} phi dx`
//! and the inverse carries the `1/(2 pi)` factor, so Plancherel reads
//! `||phi||_{L^2}^2 = (1/2pi) int |phihat|^2 dxi`.
//!
//! The time axis is `t_i = i dt`, `i = 0 .. Nt-1`, `dt = T_max/(Nt-1)`; all
//! traces live on `t >= 0` (nonnegative support is the representation, not a
//! runtime case).

use crate::error::{Error, Result};
use crate::C64;
use ndarray::Array2;
use rustfft::FftPlanner;
use std::f64::consts::PI;
use std::sync::Arc;

/// Which half-line the problem is posed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Right,
    Left,
}

/// Support tag for boundary traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Support {
    TwoSided,
    Nonnegative,
}

/// Physical interpretation tag for sampled fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Schrodinger,
    Kdv,
    Generic,
}

/// Uniform space-time grid; immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeGrid {
    pub l: f64,
    pub nx: usize,
    pub t_max: f64,
    pub nt: usize,
}

/// Complex time series at a fixed spatial point.
#[derive(Debug, Clone)]
pub struct TimeTrace {
    pub values: Vec<C64>,
    pub support: Support,
}

impl TimeTrace {
    pub fn nonneg(values: Vec<C64>) -> Self {
        TimeTrace {
            values,
            support: Support::Nonnegative,
        }
    }

    pub fn two_sided(values: Vec<C64>) -> Self {
        TimeTrace {
            values,
            support: Support::TwoSided,
        }
    }

    pub fn from_real(values: &[f64]) -> Self {
        TimeTrace::nonneg(values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn zeros(nt: usize) -> Self {
        TimeTrace::nonneg(vec![C64::new(0.0, 0.0); nt])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Complex samples over the full space-time grid, shape `(nx, nt)`.
#[derive(Debug, Clone)]
pub struct SampledField {
    pub values: Array2<C64>,
    pub kind: FieldKind,
}

impl SampledField {
    pub fn zeros(grid: &SpaceTimeGrid, kind: FieldKind) -> Self {
        SampledField {
            values: Array2::zeros((grid.nx, grid.nt)),
            kind,
        }
    }

    /// Spatial slice at time index `i`.
    pub fn slice_at(&self, i: usize) -> Vec<C64> {
        self.values.column(i).to_vec()
    }

    pub fn max_modulus(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl SpaceTimeGrid {
    /// Builds a grid, rejecting invalid dimensions.
    pub fn new(l: f64, nx: usize, t_max: f64, nt: usize) -> Result<Self> {
        if nx % 2 != 0 {
            return Err(Error::InvalidGrid("Nx must be even".into()));
        }
        if nx < 16 {
            return Err(Error::InvalidGrid("Nx must be at least 16".into()));
        }
        if nt < 2 {
            return Err(Error::InvalidGrid("Nt must be at least 2".into()));
        }
        if l <= 0.0 || t_max <= 0.0 {
            return Err(Error::InvalidGrid(
                "domain extents must be positive".into(),
            ));
        }
        Ok(SpaceTimeGrid { l, nx, t_max, nt })
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.l / self.nx as f64
    }

    pub fn dt(&self) -> f64 {
        self.t_max / (self.nt - 1) as f64
    }

    /// Index of the node x = 0.
    pub fn x0_index(&self) -> usize {
        self.nx / 2
    }

    pub fn x_at(&self, j: usize) -> f64 {
        -self.l + j as f64 * self.dx()
    }

    pub fn t_at(&self, i: usize) -> f64 {
        i as f64 * self.dt()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|j| self.x_at(j)).collect()
    }

    pub fn ts(&self) -> Vec<f64> {
        (0..self.nt).map(|i| self.t_at(i)).collect()
    }

    /// Signed spatial frequency for FFT bin `m`.
    pub fn xi_at(&self, m: usize) -> f64 {
        let signed = if m < self.nx / 2 {
            m as f64
        } else {
            m as f64 - self.nx as f64
        };
        PI * signed / self.l
    }

    pub fn xi_max(&self) -> f64 {
        PI * (self.nx / 2) as f64 / self.l
    }

    /// Signed temporal frequency for FFT bin `n` over the `Nt`-periodic axis.
    pub fn tau_at(&self, n: usize) -> f64 {
        let signed = if n <= self.nt / 2 {
            n as f64
        } else {
            n as f64 - self.nt as f64
        };
        2.0 * PI * signed / (self.nt as f64 * self.dt())
    }

    /// Forward spatial transform of one slice: `phihat_m = dx (-1)^m FFT_m`.
    pub fn forward_transform(&self, profile: &[C64]) -> Vec<C64> {
        assert_eq!(profile.len(), self.nx, "profile length must match Nx");
        let mut buf = profile.to_vec();
        plan(self.nx, true).process(&mut buf);
        let dx = self.dx();
        for (m, v) in buf.iter_mut().enumerate() {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            *v *= sign * dx;
        }
        buf
    }

    /// Inverse of `forward_transform`.
    pub fn inverse_transform(&self, spectrum: &[C64]) -> Vec<C64> {
        assert_eq!(spectrum.len(), self.nx, "spectrum length must match Nx");
        let mut buf = spectrum.to_vec();
        for (m, v) in buf.iter_mut().enumerate() {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            *v *= sign;
        }
        plan(self.nx, false).process(&mut buf);
        let scale = 1.0 / (self.nx as f64 * self.dx());
        for v in buf.iter_mut() {
            *v *= scale;
        }
        buf
    }

    /// Forward temporal transform of a trace (no node offset, so no phase).
    pub fn forward_time_transform(&self, trace: &[C64]) -> Vec<C64> {
        assert_eq!(trace.len(), self.nt, "trace length must match Nt");
        let mut buf = trace.to_vec();
        plan(self.nt, true).process(&mut buf);
        let dt = self.dt();
        for v in buf.iter_mut() {
            *v *= dt;
        }
        buf
    }

    pub fn inverse_time_transform(&self, spectrum: &[C64]) -> Vec<C64> {
        assert_eq!(spectrum.len(), self.nt, "spectrum length must match Nt");
        let mut buf = spectrum.to_vec();
        plan(self.nt, false).process(&mut buf);
        let scale = 1.0 / (self.nt as f64 * self.dt());
        for v in buf.iter_mut() {
            *v *= scale;
        }
        buf
    }

    /// Discrete H^s norm with the continuum normalization
    /// `((1/2pi) sum <xi_m>^{2s} |phihat_m|^2 dxi)^{1/2}`; equals the L^2
    /// norm at s = 0.
    pub fn sobolev_norm(&self, profile: &[C64], s: f64) -> f64 {
        let spec = self.forward_transform(profile);
        let dxi = PI / self.l;
        let mut acc = 0.0;
        for (m, v) in spec.iter().enumerate() {
            let w = (1.0 + self.xi_at(m).abs()).powf(2.0 * s);
            acc += w * v.norm_sqr();
        }
        (acc * dxi / (2.0 * PI)).sqrt()
    }

    /// Discrete L^2(dx) norm of a slice.
    pub fn l2_norm(&self, profile: &[C64]) -> f64 {
        (profile.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.dx()).sqrt()
    }

    /// Discrete H^sigma norm of a time trace over the periodic time axis.
    pub fn trace_sobolev_norm(&self, trace: &[C64], sigma: f64) -> f64 {
        let spec = self.forward_time_transform(trace);
        let dtau = 2.0 * PI / (self.nt as f64 * self.dt());
        let mut acc = 0.0;
        for (n, v) in spec.iter().enumerate() {
            let w = (1.0 + self.tau_at(n).abs()).powf(2.0 * sigma);
            acc += w * v.norm_sqr();
        }
        (acc * dtau / (2.0 * PI)).sqrt()
    }

    /// Discrete L^2(dt) norm of a trace.
    pub fn trace_l2_norm(&self, trace: &[C64]) -> f64 {
        (trace.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.dt()).sqrt()
    }

    /// Restriction to one closed half-line (x = 0 node included on both).
    pub fn restrict_half_line(&self, profile: &[C64], side: Side) -> Vec<C64> {
        assert_eq!(profile.len(), self.nx);
        let j0 = self.x0_index();
        match side {
            Side::Right => profile[j0..].to_vec(),
            Side::Left => profile[..=j0].to_vec(),
        }
    }

    /// Odd-type reflection extension of half-line samples to the full grid:
    /// `ext(-y) = 2 v(0) - v(y)`, tapered so the reflected part is supported
    /// in `|x| <= L/2`.  The extension matches the data to first order at the
    /// boundary and, unlike scale-compressed reflections, is exactly as
    /// smooth in frequency as the data itself, so its free evolution stays
    /// resolved on the grid.  Returns the extension together with the
    /// measured norm ratio `||ext||_{H^s} / ||half||_{H^s}` (half-line norm
    /// taken as the norm of the zero-padded half data).
    pub fn extend_half_line(&self, half: &[C64], side: Side, s: f64) -> (Vec<C64>, f64) {
        let j0 = self.x0_index();
        let expected = match side {
            Side::Right => self.nx - j0,
            Side::Left => j0 + 1,
        };
        assert_eq!(half.len(), expected, "half-line sample count mismatch");
        let mut full = vec![C64::new(0.0, 0.0); self.nx];
        let zero = C64::new(0.0, 0.0);
        // Sample of the half-line data at distance y >= 0 from the boundary,
        // zero beyond the stored range.
        let at = |idx: i64| -> C64 {
            if idx >= 0 && (idx as usize) < half.len() {
                half[idx as usize]
            } else {
                zero
            }
        };
        match side {
            Side::Right => {
                full[j0..].copy_from_slice(half);
                for j in 0..j0 {
                    let steps = (j0 - j) as i64; // distance in nodes, x = -steps*dx
                    let y = steps as f64 * self.dx();
                    let w = cutoff_psi(4.0 * y / self.l);
                    full[j] = w * (2.0 * at(0) - at(steps));
                }
            }
            Side::Left => {
                full[..=j0].copy_from_slice(half);
                for j in (j0 + 1)..self.nx {
                    let steps = (j - j0) as i64;
                    let y = steps as f64 * self.dx();
                    let w = cutoff_psi(4.0 * y / self.l);
                    let rev = |k: i64| at(j0 as i64 - k);
                    full[j] = w * (2.0 * rev(0) - rev(steps));
                }
            }
        }
        let mut padded = vec![zero; self.nx];
        match side {
            Side::Right => padded[j0..].copy_from_slice(half),
            Side::Left => padded[..=j0].copy_from_slice(half),
        }
        let denom = self.sobolev_norm(&padded, s);
        let ratio = if denom > 0.0 {
            self.sobolev_norm(&full, s) / denom
        } else {
            0.0
        };
        (full, ratio)
    }

    /// Refines both axes by a factor two (cell split; Nt-1 doubles).
    pub fn refined(&self) -> SpaceTimeGrid {
        SpaceTimeGrid {
            l: self.l,
            nx: self.nx * 2,
            t_max: self.t_max,
            nt: (self.nt - 1) * 2 + 1,
        }
    }
}

/// Smooth cutoff: 1 on |t| <= 1, 0 on |t| >= 2, C-infinity monotone bridge.
pub fn cutoff_psi(t: f64) -> f64 {
    let a = t.abs();
    if a <= 1.0 {
        1.0
    } else if a >= 2.0 {
        0.0
    } else {
        let s = a - 1.0;
        let q = |x: f64| (-1.0 / x).exp();
        q(1.0 - s) / (q(s) + q(1.0 - s))
    }
}

/// Rescaled cutoff `psi(t/T)`; equals 1 on |t| <= T.
pub fn cutoff_psi_t(t: f64, big_t: f64) -> Result<f64> {
    if big_t <= 0.0 {
        return Err(Error::InvalidInput("cutoff scale T must be positive".into()));
    }
    Ok(cutoff_psi(t / big_t))
}

/// Smooth left cutoff vanishing for `t <= lo` and equal to 1 for `t >= hi`;
/// used to produce strictly-positive-support surrogates of boundary traces.
pub fn left_cutoff(t: f64, lo: f64, hi: f64) -> f64 {
    debug_assert!(hi > lo);
    // map [lo, hi] onto the decreasing branch [1,2] of psi, reversed
    let u = (t - lo) / (hi - lo);
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        cutoff_psi(2.0 - u)
    }
}

pub(crate) fn plan(n: usize, forward: bool) -> Arc<dyn rustfft::Fft<f64>> {
    let mut planner = FftPlanner::new();
    if forward {
        planner.plan_fft_forward(n)
    } else {
        planner.plan_fft_inverse(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> SpaceTimeGrid {
        SpaceTimeGrid::new(32.0, 512, 1.0, 257).unwrap()
    }

    #[test]
    fn make_grid_basics() {
        let g = grid();
        assert!((g.dx() - 0.125).abs() < 1e-15);
        assert_eq!(g.x0_index(), 256);
        assert!((g.x_at(256)).abs() < 1e-12);
        let g2 = SpaceTimeGrid::new(1.0, 16, 1.0, 2).unwrap();
        assert!((g2.dx() - 0.125).abs() < 1e-15);
        assert!((g2.dt() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn make_grid_rejects_bad_dims() {
        assert!(SpaceTimeGrid::new(32.0, 511, 1.0, 257).is_err());
        assert!(SpaceTimeGrid::new(32.0, 8, 1.0, 257).is_err());
        assert!(SpaceTimeGrid::new(-1.0, 512, 1.0, 257).is_err());
        assert!(SpaceTimeGrid::new(32.0, 512, 0.0, 257).is_err());
        assert!(SpaceTimeGrid::new(32.0, 512, 1.0, 1).is_err());
    }

    #[test]
    fn single_mode_concentrates() {
        let g = grid();
        let m_sel = 7usize;
        let xi = g.xi_at(m_sel);
        let profile: Vec<C64> = g
            .xs()
            .iter()
            .map(|&x| C64::new(0.0, xi * x).exp())
            .collect();
        let spec = g.forward_transform(&profile);
        let peak = spec[m_sel].norm();
        for (m, v) in spec.iter().enumerate() {
            if m != m_sel {
                assert!(v.norm() <= 1e-10 * peak, "leakage at bin {m}");
            }
        }
        // mass: dx * Nx = 2L
        assert!((peak - 2.0 * g.l).abs() < 1e-8);
    }

    #[test]
    fn roundtrip_identity() {
        let g = grid();
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let profile: Vec<C64> = (0..g.nx)
            .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let back = g.inverse_transform(&g.forward_transform(&profile));
        let num: f64 = profile
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let den: f64 = profile.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(num / den < 1e-12);
    }

    #[test]
    fn gaussian_transform_oracle() {
        let g = grid();
        let profile: Vec<C64> = g.xs().iter().map(|&x| C64::new((-x * x).exp(), 0.0)).collect();
        let spec = g.forward_transform(&profile);
        for m in 0..g.nx {
            let xi = g.xi_at(m);
            let exact = PI.sqrt() * (-xi * xi / 4.0).exp();
            assert!(
                (spec[m].re - exact).abs() < 1e-8 && spec[m].im.abs() < 1e-8,
                "bin {m}: got {}, want {exact}",
                spec[m].re
            );
        }
    }

    #[test]
    fn sobolev_norm_single_mode() {
        let g = grid();
        // unit-L2-mass single mode at xi0 = 3 (needs pi*m/L = 3 -> not a node;
        // use an exact node and the weight formula instead)
        let m_sel = ((3.0 * g.l / PI).round()) as usize;
        let xi0 = g.xi_at(m_sel);
        let raw: Vec<C64> = g
            .xs()
            .iter()
            .map(|&x| C64::new(0.0, xi0 * x).exp())
            .collect();
        let l2 = g.l2_norm(&raw);
        let profile: Vec<C64> = raw.iter().map(|z| z / l2).collect();
        let ns = g.sobolev_norm(&profile, 0.5);
        assert!((ns - (1.0 + xi0.abs()).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn sobolev_norm_zero_order_is_l2() {
        let g = grid();
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let profile: Vec<C64> = (0..g.nx)
            .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        assert!((g.sobolev_norm(&profile, 0.0) - g.l2_norm(&profile)).abs() < 1e-12);
    }

    #[test]
    fn sobolev_norm_gaussian_quadrature_oracle() {
        let g = grid();
        let profile: Vec<C64> = g.xs().iter().map(|&x| C64::new((-x * x).exp(), 0.0)).collect();
        let got = g.sobolev_norm(&profile, 1.0);
        // oracle: quadrature of (1+|xi|)^2 pi e^{-xi^2/2} over the same
        // frequency nodes, using the closed-form Gaussian transform instead of
        // the FFT path
        let dxi = PI / g.l;
        let mut acc = 0.0;
        for m in 0..g.nx {
            let xi = g.xi_at(m);
            acc += (1.0 + xi.abs()).powi(2) * PI * (-xi * xi / 2.0).exp();
        }
        let exact = (acc * dxi / (2.0 * PI)).sqrt();
        assert!((got - exact).abs() < 1e-6, "got {got}, want {exact}");
    }

    #[test]
    fn sobolev_norm_monotone_in_s() {
        let g = grid();
        let profile: Vec<C64> = g.xs().iter().map(|&x| C64::new((-x * x).exp(), x.sin())).collect();
        let mut prev = g.sobolev_norm(&profile, -1.0);
        for i in 0..8 {
            let s = -1.0 + 0.3 * (i + 1) as f64;
            let cur = g.sobolev_norm(&profile, s);
            assert!(cur >= prev - 1e-12);
            prev = cur;
        }
    }

    #[test]
    fn cutoff_psi_shape() {
        assert_eq!(cutoff_psi(0.5), 1.0);
        assert_eq!(cutoff_psi(-0.9), 1.0);
        assert_eq!(cutoff_psi(3.0), 0.0);
        assert_eq!(cutoff_psi(-2.5), 0.0);
        let v = cutoff_psi(1.5);
        assert!(v > 0.0 && v < 1.0);
        // monotone decreasing on [1,2]
        let mut prev = cutoff_psi(1.0);
        for i in 1..=20 {
            let cur = cutoff_psi(1.0 + 0.05 * i as f64);
            assert!(cur <= prev + 1e-15);
            prev = cur;
        }
    }

    #[test]
    fn cutoff_psi_t_scaling() {
        assert_eq!(cutoff_psi_t(0.4, 0.5).unwrap(), 1.0);
        assert_eq!(cutoff_psi_t(1.2, 0.5).unwrap(), 0.0);
        assert_eq!(cutoff_psi_t(0.5, 0.5).unwrap(), 1.0);
        for &t in &[0.0, 0.3, 0.7, 1.1, 1.9] {
            assert_eq!(cutoff_psi_t(t, 0.37).unwrap(), cutoff_psi(t / 0.37));
        }
        assert!(cutoff_psi_t(1.0, 0.0).is_err());
    }

    #[test]
    fn restrict_extend_retraction() {
        let g = grid();
        let half: Vec<C64> = (0..g.nx - g.x0_index())
            .map(|j| C64::new((-(j as f64) * g.dx()).exp(), 0.0))
            .collect();
        let (full, ratio) = g.extend_half_line(&half, Side::Right, 1.0);
        let back = g.restrict_half_line(&full, Side::Right);
        assert_eq!(back, half);
        assert!(ratio.is_finite() && ratio > 0.0);

        let zeros = vec![C64::new(0.0, 0.0); half.len()];
        let (zfull, _) = g.extend_half_line(&zeros, Side::Right, 1.0);
        assert!(zfull.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn restrict_keeps_x0_node() {
        let g = grid();
        let profile: Vec<C64> = g.xs().iter().map(|&x| C64::new(x, 0.0)).collect(); // odd
        let right = g.restrict_half_line(&profile, Side::Right);
        let left = g.restrict_half_line(&profile, Side::Left);
        assert_eq!(right[0], C64::new(0.0, 0.0));
        assert_eq!(left[left.len() - 1], C64::new(0.0, 0.0));
        let ones = vec![C64::new(1.0, 0.0); g.nx];
        assert!(g
            .restrict_half_line(&ones, Side::Left)
            .iter()
            .all(|z| *z == C64::new(1.0, 0.0)));
    }

    #[test]
    fn extension_norm_ratio_bounded() {
        // Monte-Carlo measurement: H^1 extension constant stays below a fixed C
        let g = grid();
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let n_half = g.nx - g.x0_index();
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            // random smooth decaying half-line profile: few low-frequency waves
            // under a decaying envelope
            let a: f64 = rng.gen_range(0.5..2.0);
            let k1: f64 = rng.gen_range(0.1..1.0);
            let k2: f64 = rng.gen_range(0.1..1.0);
            let c2: f64 = rng.gen_range(-1.0..1.0);
            let half: Vec<C64> = (0..n_half)
                .map(|j| {
                    let y = j as f64 * g.dx();
                    let env = (-a * y * y / 8.0).exp();
                    C64::new(env * (k1 * y).cos(), env * c2 * (k2 * y).sin())
                })
                .collect();
            let (_, ratio) = g.extend_half_line(&half, Side::Right, 1.0);
            worst = worst.max(ratio);
        }
        assert!(worst < 25.0, "measured extension constant {worst}");
    }

    #[test]
    fn left_extension_mirrors_right() {
        let g = grid();
        let n_half_r = g.nx - g.x0_index();
        let half_r: Vec<C64> = (0..n_half_r)
            .map(|j| {
                let y = j as f64 * g.dx();
                C64::new((-y * y / 4.0).exp(), 0.0)
            })
            .collect();
        // mirrored data on the left half
        let half_l: Vec<C64> = (0..=g.x0_index())
            .map(|j| {
                let y = (g.x0_index() - j) as f64 * g.dx();
                C64::new((-y * y / 4.0).exp(), 0.0)
            })
            .collect();
        let (full_r, _) = g.extend_half_line(&half_r, Side::Right, 0.0);
        let (full_l, _) = g.extend_half_line(&half_l, Side::Left, 0.0);
        // mirror symmetry: full_l(x) = full_r(-x) wherever both reflected
        // arguments are inside the stored ranges
        for j in 1..g.nx {
            let jm = g.nx - j;
            if jm < g.nx {
                let d = (full_l[j] - full_r[jm]).norm();
                assert!(d < 1e-12, "asymmetry at node {j}: {d}");
            }
        }
    }

    #[test]
    fn time_transform_roundtrip() {
        let g = grid();
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let trace: Vec<C64> = (0..g.nt)
            .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let back = g.inverse_time_transform(&g.forward_time_transform(&trace));
        let err: f64 = trace
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(err < 1e-10);
    }
}
