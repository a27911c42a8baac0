//! Free evolution groups `e^{it dxx}` (Schrodinger) and `e^{-t dxxx}` (Airy),
//! the Airy kernel `A(x) = (1/2pi) int e^{i x xi + i xi^3} dxi`, and the
//! Duhamel inhomogeneous operators
//! `Sw = -i int_0^t e^{i(t-t') dxx} w dt'` and
//! `Kw =    int_0^t e^{-(t-t') dxxx} w dt'`.
//!
//! All time integrals are evaluated per spatial mode with a quadrature that is
//! exact in time for piecewise-linear sources against the oscillatory factor,
//! so no accuracy is lost to mode stiffness at large `xi`.

use crate::error::{Error, Result};
use crate::grid::{FieldKind, SampledField, SpaceTimeGrid};
use crate::{par, C64};
use ndarray::Array2;
use std::f64::consts::PI;

/// Which linear group a multiplier belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropagatorKind {
    /// multiplier e^{-i t xi^2}
    Schrodinger,
    /// multiplier e^{+i t xi^3}
    Airy,
}

impl PropagatorKind {
    /// Phase `mu(xi)` such that the mode evolves as `e^{t mu}`.
    pub fn mode_rate(self, xi: f64) -> C64 {
        match self {
            PropagatorKind::Schrodinger => C64::new(0.0, -xi * xi),
            PropagatorKind::Airy => C64::new(0.0, xi * xi * xi),
        }
    }
}

/// Applies the free group to a spatial profile: spectral multiplication by a
/// unimodular factor. `t = 0` is the identity; the L^2 norm is preserved.
pub fn evolve(kind: PropagatorKind, grid: &SpaceTimeGrid, phi: &[C64], t: f64) -> Vec<C64> {
    let mut spec = grid.forward_transform(phi);
    for (m, v) in spec.iter_mut().enumerate() {
        let mu = kind.mode_rate(grid.xi_at(m));
        *v *= (mu * t).exp();
    }
    grid.inverse_transform(&spec)
}

/// Rescaled Airy kernel `A(x) = 3^{-1/3} Ai(3^{-1/3} x)`, the fundamental
/// solution normalization for `v_t + v_xxx = 0`.
pub fn airy_function(x: f64) -> Result<f64> {
    if x.abs() > 50.0 {
        return Err(Error::InvalidInput(format!(
            "airy_function argument {x} outside |x| <= 50"
        )));
    }
    let c = 3f64.powf(-1.0 / 3.0);
    Ok(c * airy_ai(c * x).0)
}

/// Derivative of the Airy kernel: `A'(x) = 3^{-2/3} Ai'(3^{-1/3} x)`.
pub fn airy_function_deriv(x: f64) -> Result<f64> {
    if x.abs() > 50.0 {
        return Err(Error::InvalidInput(format!(
            "airy_function argument {x} outside |x| <= 50"
        )));
    }
    let c = 3f64.powf(-1.0 / 3.0);
    Ok(c * c * airy_ai(c * x).1)
}

/// Standard Airy function `(Ai(x), Ai'(x))`: Maclaurin series on |x| < 6,
/// asymptotic expansions beyond.
pub fn airy_ai(x: f64) -> (f64, f64) {
    if x.abs() < 6.0 {
        airy_series(x)
    } else if x > 0.0 {
        airy_asymptotic_pos(x)
    } else {
        airy_asymptotic_neg(-x)
    }
}

fn airy_series(x: f64) -> (f64, f64) {
    // Ai = c1 f - c2 g with f = sum a_k x^{3k}, g = sum b_k x^{3k+1}
    const C1: f64 = 0.355_028_053_887_817_24; // Ai(0)
    const C2: f64 = 0.258_819_403_792_806_8; // -Ai'(0)
    let x3 = x * x * x;
    let (mut f, mut fp, mut g, mut gp) = (1.0, 0.0, x, 1.0);
    let (mut ak, mut bk) = (1.0_f64, x); // a_k x^{3k}, b_k x^{3k+1}
    for k in 0..200 {
        let kf = k as f64;
        ak *= x3 / ((3.0 * kf + 2.0) * (3.0 * kf + 3.0));
        bk *= x3 / ((3.0 * kf + 3.0) * (3.0 * kf + 4.0));
        f += ak;
        g += bk;
        // derivative terms: a_{k+1} (3k+3) x^{3k+2}, b_{k+1} (3k+4) x^{3k+3}
        if x != 0.0 {
            fp += ak * (3.0 * kf + 3.0) / x;
            gp += bk * (3.0 * kf + 4.0) / x;
        }
        if ak.abs() < 1e-20 * (1.0 + f.abs()) && bk.abs() < 1e-20 * (1.0 + g.abs()) {
            break;
        }
    }
    (C1 * f - C2 * g, C1 * fp - C2 * gp)
}

/// Poincare coefficients u_k (and v_k = (6k+1)/(1-6k) u_k) of the Airy
/// asymptotic expansions.
fn airy_uv(kmax: usize) -> (Vec<f64>, Vec<f64>) {
    let mut u = vec![1.0; kmax];
    let mut v = vec![1.0; kmax];
    for k in 0..kmax - 1 {
        let kf = k as f64;
        u[k + 1] = u[k] * (6.0 * kf + 1.0) * (6.0 * kf + 5.0) / (72.0 * (kf + 1.0));
        v[k + 1] = u[k + 1] * (6.0 * (kf + 1.0) + 1.0) / (1.0 - 6.0 * (kf + 1.0));
    }
    (u, v)
}

fn airy_asymptotic_pos(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let (u, v) = airy_uv(30);
    let (mut su, mut sv) = (0.0, 0.0);
    let mut pw = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..30 {
        let tu = u[k] * pw;
        if tu.abs() > last {
            break; // past the optimal truncation point
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        su += sign * tu;
        sv += sign * v[k] * pw;
        last = tu.abs();
        pw /= zeta;
    }
    let amp = (-zeta).exp() / (2.0 * PI.sqrt());
    (
        amp * su / x.powf(0.25),
        -amp * x.powf(0.25) * sv, // v-series sign convention gives -Ai' directly
    )
}

fn airy_asymptotic_neg(z: f64) -> (f64, f64) {
    // Ai(-z) and Ai'(-z) for z > 0
    let zeta = 2.0 / 3.0 * z.powf(1.5);
    let omega = zeta - PI / 4.0;
    let (u, v) = airy_uv(30);
    let (mut pe, mut po, mut re, mut ro) = (0.0, 0.0, 0.0, 0.0);
    let mut pw = 1.0; // zeta^{-k}
    let mut last = f64::INFINITY;
    for k in 0..30 {
        let t = u[k].abs() * pw;
        if t > last {
            break;
        }
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            pe += sign * u[k] * pw;
            re += sign * v[k] * pw;
        } else {
            po += sign * u[k] * pw;
            ro += sign * v[k] * pw;
        }
        last = t;
        pw /= zeta;
    }
    let sp = PI.sqrt();
    let ai = (omega.cos() * pe + omega.sin() * po) / (sp * z.powf(0.25));
    let aip = z.powf(0.25) / sp * (omega.sin() * re - omega.cos() * ro);
    (ai, aip)
}

/// phi1(z) = (e^z - 1)/z, stable near z = 0.
fn phi1(z: C64) -> C64 {
    if z.norm() < 0.25 {
        let mut acc = C64::new(0.0, 0.0);
        let mut term = C64::new(1.0, 0.0);
        for n in 1..24 {
            acc += term;
            term = term * z / (n + 1) as f64;
        }
        acc
    } else {
        (z.exp() - 1.0) / z
    }
}

/// psi2(z) = (e^z (z - 1) + 1)/z^2 = sum_{n>=0} (n+1)/(n+2)! z^n.
fn psi2(z: C64) -> C64 {
    if z.norm() < 0.25 {
        let mut acc = C64::new(0.0, 0.0);
        let mut pw = C64::new(1.0, 0.0);
        let mut fact = 2.0; // (n+2)!
        for n in 0..24 {
            acc += pw * ((n + 1) as f64 / fact);
            pw *= z;
            fact *= (n + 3) as f64;
        }
        acc
    } else {
        (z.exp() * (z - 1.0) + 1.0) / (z * z)
    }
}

/// Causal per-mode convolution: `c(t_i) = int_0^{t_i} e^{(t_i - t') mu} h(t') dt'`
/// with `h` piecewise linear on the uniform grid; exact for that interpolant.
pub fn causal_mode_conv(h: &[C64], mu: C64, dt: f64) -> Vec<C64> {
    let n = h.len();
    let mut out = vec![C64::new(0.0, 0.0); n];
    if n == 0 {
        return out;
    }
    let z = mu * dt;
    let e = z.exp();
    let f1 = phi1(z) * dt;
    let f2 = psi2(z) * dt;
    let mut c = C64::new(0.0, 0.0);
    for i in 0..n - 1 {
        let (a, b) = (h[i], h[i + 1]);
        c = e * c + b * f1 - (b - a) * f2;
        out[i + 1] = c;
    }
    out
}

/// Spectral representation of a space-time field: spatial transform of every
/// time slice, stored mode-major `(nx, nt)`.
pub fn field_to_modes(grid: &SpaceTimeGrid, field: &SampledField) -> Array2<C64> {
    let mut modes = Array2::zeros((grid.nx, grid.nt));
    for i in 0..grid.nt {
        let spec = grid.forward_transform(&field.slice_at(i));
        for (m, v) in spec.into_iter().enumerate() {
            modes[(m, i)] = v;
        }
    }
    modes
}

/// Inverse of [`field_to_modes`].
pub fn modes_to_field(grid: &SpaceTimeGrid, modes: &Array2<C64>, kind: FieldKind) -> SampledField {
    let mut out = SampledField::zeros(grid, kind);
    for i in 0..grid.nt {
        let col: Vec<C64> = modes.column(i).to_vec();
        let slice = grid.inverse_transform(&col);
        for (j, v) in slice.into_iter().enumerate() {
            out.values[(j, i)] = v;
        }
    }
    out
}

fn duhamel(grid: &SpaceTimeGrid, w: &SampledField, kind: PropagatorKind, scale: C64) -> SampledField {
    let modes = field_to_modes(grid, w);
    let dt = grid.dt();
    let rows: Vec<Vec<C64>> = par::map_indexed(grid.nx, |m| {
        let h: Vec<C64> = modes.row(m).to_vec();
        let mut c = causal_mode_conv(&h, kind.mode_rate(grid.xi_at(m)), dt);
        for v in c.iter_mut() {
            *v *= scale;
        }
        c
    });
    let mut conv = Array2::zeros((grid.nx, grid.nt));
    for (m, row) in rows.into_iter().enumerate() {
        for (i, v) in row.into_iter().enumerate() {
            conv[(m, i)] = v;
        }
    }
    modes_to_field(grid, &conv, w.kind)
}

/// `Sw(x,t) = -i int_0^t e^{i(t-t') dxx} w(x,t') dt'`; satisfies
/// `(i d_t + dxx) Sw = w` with `Sw(.,0) = 0`.
pub fn duhamel_s(grid: &SpaceTimeGrid, w: &SampledField) -> SampledField {
    duhamel(grid, w, PropagatorKind::Schrodinger, C64::new(0.0, -1.0))
}

/// `Kw(x,t) = int_0^t e^{-(t-t') dxxx} w(x,t') dt'`; satisfies
/// `(d_t + dxxx) Kw = w` with `Kw(.,0) = 0`.
pub fn duhamel_k(grid: &SpaceTimeGrid, w: &SampledField) -> SampledField {
    duhamel(grid, w, PropagatorKind::Airy, C64::new(1.0, 0.0))
}

/// Spatial derivative of one slice by spectral multiplication with `(i xi)^n`.
pub fn spectral_dx(grid: &SpaceTimeGrid, slice: &[C64], order: u32) -> Vec<C64> {
    let mut spec = grid.forward_transform(slice);
    for (m, v) in spec.iter_mut().enumerate() {
        let ixi = C64::new(0.0, grid.xi_at(m));
        *v *= ixi.powu(order);
    }
    grid.inverse_transform(&spec)
}

/// Interior residual of `(i d_t + dxx) u - w` (Schrodinger) or
/// `(d_t + dxxx) v - w` (Airy/KdV) with centered second-order time differences
/// and spectral space derivatives; columns 1..nt-1 are meaningful.
pub fn pde_residual(
    grid: &SpaceTimeGrid,
    u: &SampledField,
    w: Option<&SampledField>,
    kind: PropagatorKind,
) -> Array2<C64> {
    let dt = grid.dt();
    let mut res = Array2::zeros((grid.nx, grid.nt));
    for i in 1..grid.nt - 1 {
        let slice = u.slice_at(i);
        let dx_term = match kind {
            PropagatorKind::Schrodinger => spectral_dx(grid, &slice, 2),
            PropagatorKind::Airy => spectral_dx(grid, &slice, 3),
        };
        for j in 0..grid.nx {
            let ddt = (u.values[(j, i + 1)] - u.values[(j, i - 1)]) / (2.0 * dt);
            let lhs = match kind {
                PropagatorKind::Schrodinger => C64::new(0.0, 1.0) * ddt + dx_term[j],
                PropagatorKind::Airy => ddt + dx_term[j],
            };
            res[(j, i)] = lhs - w.map_or(C64::new(0.0, 0.0), |w| w.values[(j, i)]);
        }
    }
    res
}
