//! Picard iteration of the boundary-forced contraction maps for the coupled
//! Schrodinger-KdV system posed on a half-line, plus linear solvers,
//! compatibility validation and the L2 flux-identity check.
//!
//! The iteration runs on whole-line fields: the half-line initial profiles
//! are extended across x = 0, free evolutions and Duhamel terms are computed
//! globally, and boundary forcing terms correct the traces at x = 0 after
//! every application of the map.  The half-line restriction of the converged
//! pair is the solution; restriction happens only at output.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use std::f64::consts::FRAC_PI_4;

use crate::bourgain::{
    bourgain_norm, classify_region, EstimateParams, NormSpace, RegionTag, RegularityPair,
};
use crate::error::{Error, Result};
use crate::forcing::{
    assemble_left_kdv_constant, assemble_left_kdv_lambda, l_forcing, one_sided_dx_traces,
    one_sided_limits, prepare_trace, trace_at_zero, v_forcing, v_inv, v_lambda, ForcingEquation,
    ForcingLambda, ForcingSign,
};
use crate::fracint::frac_apply;
use crate::grid::{cutoff_psi, FieldKind, SampledField, Side, SpaceTimeGrid, Support, TimeTrace};
use crate::par;
use crate::propagators::{duhamel_k, duhamel_s, evolve, spectral_dx, PropagatorKind};

/// Which of the two coupled equations a linear solve addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquationTag {
    Schrodinger,
    Kdv,
}

/// One half-line initial-boundary-value problem: initial profiles sampled on
/// the half-line nodes (layout of `SpaceTimeGrid::restrict_half_line`, so the
/// x = 0 node comes first on the right half-line and last on the left),
/// boundary traces on the time grid, coupling coefficients and the Sobolev
/// regularity pair.
#[derive(Debug, Clone)]
pub struct IBVPData {
    pub side: Side,
    pub u0: Vec<C64>,
    pub v0: Vec<C64>,
    pub f: TimeTrace,
    pub g: TimeTrace,
    /// Derivative trace `dx v(0, t)`; prescribed on the left half-line only.
    pub h: Option<TimeTrace>,
    pub alpha_c: f64,
    pub beta_c: f64,
    pub gamma_c: f64,
    pub reg: RegularityPair,
}

impl IBVPData {
    /// Value of a half-line profile at the x = 0 node.
    fn boundary_value(&self, profile: &[C64]) -> C64 {
        match self.side {
            Side::Right => profile[0],
            Side::Left => *profile.last().expect("validated profile is nonempty"),
        }
    }
}

/// Checks the structural invariants of one problem against a grid: profile
/// and trace lengths, presence of the derivative trace exactly on the left
/// half-line, the vanishing of beta where the admissible region demands it,
/// and the pointwise compatibility conditions attached to whichever
/// regularity index exceeds 1/2.
pub fn validate(data: &IBVPData, grid: &SpaceTimeGrid) -> Result<()> {
    let half_len = match data.side {
        Side::Right => grid.nx - grid.x0_index(),
        Side::Left => grid.x0_index() + 1,
    };
    if data.u0.len() != half_len || data.v0.len() != half_len {
        return Err(Error::Validation(format!(
            "initial profiles must have {half_len} half-line samples, got {} and {}",
            data.u0.len(),
            data.v0.len()
        )));
    }
    for (name, trace) in [("f", &data.f), ("g", &data.g)] {
        if trace.len() != grid.nt {
            return Err(Error::Validation(format!(
                "boundary trace {name} must have {} samples, got {}",
                grid.nt,
                trace.len()
            )));
        }
        if trace.support != Support::Nonnegative {
            return Err(Error::Validation(format!(
                "boundary trace {name} must have nonnegative support"
            )));
        }
    }
    match (data.side, &data.h) {
        (Side::Right, Some(_)) => {
            return Err(Error::Validation(
                "the right half-line problem takes no derivative trace h".into(),
            ))
        }
        (Side::Left, None) => {
            return Err(Error::Validation(
                "the left half-line problem requires the derivative trace h".into(),
            ))
        }
        (Side::Left, Some(h)) => {
            if h.len() != grid.nt {
                return Err(Error::Validation(format!(
                    "boundary trace h must have {} samples, got {}",
                    grid.nt,
                    h.len()
                )));
            }
        }
        (Side::Right, None) => {}
    }
    let region = classify_region(data.side, data.reg.s, data.reg.k);
    if region.beta_zero_required() && data.beta_c != 0.0 {
        return Err(Error::Validation(format!(
            "region {region:?} requires beta = 0, got beta = {}",
            data.beta_c
        )));
    }
    if data.reg.s > 0.5 {
        let d = (data.boundary_value(&data.u0) - data.f.values[0]).norm();
        if d > 1e-8 {
            return Err(Error::Validation(format!(
                "compatibility u0(0) = f(0) violated by {d:.3e} (required for s > 1/2)"
            )));
        }
    }
    if data.reg.k > 0.5 {
        let d = (data.boundary_value(&data.v0) - data.g.values[0]).norm();
        if d > 1e-8 {
            return Err(Error::Validation(format!(
                "compatibility v0(0) = g(0) violated by {d:.3e} (required for k > 1/2)"
            )));
        }
    }
    Ok(())
}

/// Fixed-point solver configuration.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub grid: SpaceTimeGrid,
    /// Local existence time; the nonlinearity is cut off at `|t| <= t_local`
    /// and may be shrunk automatically until the first iterations contract.
    pub t_local: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub params: EstimateParams,
    /// Smallness gate for the KdV data norm in the small-data regions.
    pub delta: f64,
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_local > 0.0 && self.t_local <= self.grid.t_max / 4.0) {
            return Err(Error::Validation(format!(
                "t_local must lie in (0, T_max/4] = (0, {}], got {}",
                self.grid.t_max / 4.0,
                self.t_local
            )));
        }
        if self.tol <= 0.0 {
            return Err(Error::Validation("tolerance must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Validation("max_iter must be at least 1".into()));
        }
        if self.delta <= 0.0 {
            return Err(Error::Validation("smallness gate delta must be positive".into()));
        }
        self.params.validate()
    }
}

/// Diagnostics of one fixed-point (or linear) solve.
#[derive(Debug, Clone)]
pub struct IterationReport {
    pub iterates: usize,
    /// Successive-difference norms in the X/Y/V-alpha surrogates of Z1 x Z2.
    pub residual_history: Vec<f64>,
    /// Geometric mean of the successive residual ratios.
    pub contraction_ratio: f64,
    /// Relative boundary trace mismatches over the local time window:
    /// `[u(0,.) vs f, v(0,.) vs g]` plus `dx v(0,.) vs h` on the left.
    pub trace_errors: Vec<f64>,
    /// Relative interior L2 residuals `[schrodinger, kdv]` over the local
    /// time window.
    pub pde_residuals: Vec<f64>,
    /// Ball radii `2 c (||u0|| + ||f||)` and `2 c (||v0|| + ||g|| (+ ||h||))`
    /// with `c` the measured operator constant on this grid.
    pub m1: f64,
    pub m2: f64,
    /// Existence time actually used after automatic halving.
    pub t_local: f64,
    pub halvings: usize,
    pub converged: bool,
    /// Largest imaginary part of the KdV component, relative to its modulus.
    pub v_imag_fraction: f64,
}

impl IterationReport {
    fn empty() -> Self {
        IterationReport {
            iterates: 0,
            residual_history: Vec::new(),
            contraction_ratio: 0.0,
            trace_errors: Vec::new(),
            pde_residuals: Vec::new(),
            m1: 0.0,
            m2: 0.0,
            t_local: 0.0,
            halvings: 0,
            converged: false,
            v_imag_fraction: 0.0,
        }
    }
}

fn add_fields(a: &SampledField, b: &SampledField) -> SampledField {
    SampledField {
        values: &a.values + &b.values,
        kind: a.kind,
    }
}

fn weight_columns(field: &mut SampledField, w: &[f64]) {
    for (i, &wi) in w.iter().enumerate() {
        for v in field.values.column_mut(i).iter_mut() {
            *v *= wi;
        }
    }
}

fn psi_weights(grid: &SpaceTimeGrid) -> Vec<f64> {
    (0..grid.nt).map(|i| cutoff_psi(grid.t_at(i))).collect()
}

fn psi_t_weights(grid: &SpaceTimeGrid, t_local: f64) -> Vec<f64> {
    (0..grid.nt).map(|i| cutoff_psi(grid.t_at(i) / t_local)).collect()
}

/// Drops the unpaired Nyquist bin of a profile so that real data stay
/// exactly real under the propagators (the bin has no conjugate partner).
fn band_limit(grid: &SpaceTimeGrid, profile: &[C64]) -> Vec<C64> {
    let mut spec = grid.forward_transform(profile);
    spec[grid.nx / 2] = C64::new(0.0, 0.0);
    grid.inverse_transform(&spec)
}

/// One-sided derivative trace at x = 0 on the given half-line side (the
/// boundary fields have a derivative jump across the origin, so the limit
/// must be taken from inside the half-line).
fn dx_trace_on_side(grid: &SpaceTimeGrid, field: &SampledField, side: Side) -> TimeTrace {
    let (dl, dr) = one_sided_dx_traces(grid, field, 1);
    match side {
        Side::Left => dl,
        Side::Right => dr,
    }
}

/// Zero-pads half-line samples into a whole-line profile.
fn embed_half(grid: &SpaceTimeGrid, half: &[C64], side: Side) -> Vec<C64> {
    let mut full = vec![C64::new(0.0, 0.0); grid.nx];
    let j0 = grid.x0_index();
    match side {
        Side::Right => full[j0..].copy_from_slice(half),
        Side::Left => full[..=j0].copy_from_slice(half),
    }
    full
}

/// Free evolution field `psi(t) e^{t A} phi` sampled on the grid.
fn free_field(
    grid: &SpaceTimeGrid,
    kind: PropagatorKind,
    phi: &[C64],
    psi: &[f64],
    fkind: FieldKind,
) -> SampledField {
    let cols: Vec<Vec<C64>> = par::map_indexed(grid.nt, |i| {
        let mut col = evolve(kind, grid, phi, grid.t_at(i));
        for v in col.iter_mut() {
            *v *= psi[i];
        }
        col
    });
    let mut out = SampledField::zeros(grid, fkind);
    for (i, col) in cols.into_iter().enumerate() {
        for (j, v) in col.into_iter().enumerate() {
            out.values[(j, i)] = v;
        }
    }
    out
}

/// 2/3-rule dealiasing of one spatial slice.
fn dealias_slice(grid: &SpaceTimeGrid, slice: &[C64]) -> Vec<C64> {
    let mut spec = grid.forward_transform(slice);
    let cut = grid.nx / 3;
    for (m, v) in spec.iter_mut().enumerate() {
        let signed = if m <= grid.nx / 2 {
            m
        } else {
            grid.nx - m
        };
        if signed > cut {
            *v = C64::new(0.0, 0.0);
        }
    }
    grid.inverse_transform(&spec)
}

/// Nonlinearities of both equations with the local-time cutoff applied:
/// `psi_T (alpha u v + beta |u|^2 u)` and
/// `psi_T (gamma dx(|u|^2) - (1/2) dx(v^2))`, pointwise products dealiased
/// by the 2/3 rule before the spectral derivative.
fn nonlinear_fields(
    grid: &SpaceTimeGrid,
    u: &SampledField,
    v: &SampledField,
    data: &IBVPData,
    psi_t: &[f64],
) -> (SampledField, SampledField) {
    let cols: Vec<(Vec<C64>, Vec<C64>)> = par::map_indexed(grid.nt, |i| {
        let us = u.slice_at(i);
        let vs = v.slice_at(i);
        let mut w1 = vec![C64::new(0.0, 0.0); grid.nx];
        let mut q = vec![C64::new(0.0, 0.0); grid.nx];
        for j in 0..grid.nx {
            let uu = us[j];
            w1[j] = data.alpha_c * uu * vs[j] + data.beta_c * uu * uu.norm_sqr();
            q[j] = data.gamma_c * uu.norm_sqr() - 0.5 * vs[j] * vs[j];
        }
        let w1 = dealias_slice(grid, &w1);
        let q = dealias_slice(grid, &q);
        let mut w2 = spectral_dx(grid, &q, 1);
        let w1 = w1.into_iter().map(|z| z * psi_t[i]).collect();
        for z in w2.iter_mut() {
            *z *= psi_t[i];
        }
        (w1, w2)
    });
    let mut f1 = SampledField::zeros(grid, FieldKind::Schrodinger);
    let mut f2 = SampledField::zeros(grid, FieldKind::Kdv);
    for (i, (c1, c2)) in cols.into_iter().enumerate() {
        for j in 0..grid.nx {
            f1.values[(j, i)] = c1[j];
            f2.values[(j, i)] = c2[j];
        }
    }
    (f1, f2)
}

/// Boundary defect traces of the current stage fields (free evolution plus
/// Duhamel term, before any boundary forcing): the Schrodinger defect
/// `f - u_stage(0, .)`, and the KdV defect(s).  On the right the single trace
/// `g - v_stage(0, .)` feeds the base forcing operator; on the left the pair
/// `(g, h)` is routed through the 2x2 boundary assembly, either the
/// constant-coefficient `V`/`V^{-1}` system (`lambda_pair = None`) or the
/// lambda-pair system.
pub fn reconstruct_boundary_defect(
    grid: &SpaceTimeGrid,
    data: &IBVPData,
    u_stage: &SampledField,
    v_stage: &SampledField,
    lambda_pair: Option<(f64, f64)>,
) -> Result<(TimeTrace, TimeTrace, Option<TimeTrace>)> {
    let u_trace = trace_at_zero(grid, u_stage);
    let h1 = TimeTrace::nonneg(
        data.f
            .values
            .iter()
            .zip(&u_trace.values)
            .map(|(a, b)| a - b)
            .collect(),
    );
    match data.side {
        Side::Right => {
            let v_trace = trace_at_zero(grid, v_stage);
            let h2 = TimeTrace::nonneg(
                data.g
                    .values
                    .iter()
                    .zip(&v_trace.values)
                    .map(|(a, b)| a - b)
                    .collect(),
            );
            Ok((h1, h2, None))
        }
        Side::Left => {
            let h = data.h.as_ref().ok_or_else(|| {
                Error::Validation("left-side defect assembly requires h".into())
            })?;
            let v_trace = trace_at_zero(grid, v_stage);
            let v_dtrace = dx_trace_on_side(grid, v_stage, Side::Left);
            let (h2, h3) = match lambda_pair {
                None => assemble_left_kdv_constant(&data.g, h, &v_trace, &v_dtrace, grid.dt())?,
                Some((l2, l3)) => {
                    assemble_left_kdv_lambda(l2, l3, &data.g, h, &v_trace, &v_dtrace, grid.dt())?
                }
            };
            Ok((h1, h2, Some(h3)))
        }
    }
}

/// KdV boundary correction for one defect assembly.
fn kdv_boundary_field(
    grid: &SpaceTimeGrid,
    h2: &TimeTrace,
    h3: Option<&TimeTrace>,
    lambda_pair: Option<(f64, f64)>,
) -> Result<SampledField> {
    match (h3, lambda_pair) {
        (None, _) => v_forcing(grid, h2),
        (Some(h3), None) => Ok(add_fields(&v_forcing(grid, h2)?, &v_inv(grid, h3)?)),
        (Some(h3), Some((l2, l3))) => {
            let mk = |l: f64| ForcingLambda {
                lambda: l,
                sign: ForcingSign::Minus,
                equation: ForcingEquation::Kdv,
            };
            Ok(add_fields(
                &v_lambda(grid, h2, mk(l2))?,
                &v_lambda(grid, h3, mk(l3))?,
            ))
        }
    }
}

/// The exact on-grid forcing exerted by one delta-forced boundary operator,
/// reconstructed for residual verification: every occupied mode obeys
/// `c' = mu c + fac (i xi)^p src(t)` with `src` the fractionally integrated
/// prepared trace.
fn delta_forcing_field(
    grid: &SpaceTimeGrid,
    trace: &TimeTrace,
    eq: EquationTag,
    derivative: bool,
) -> Result<SampledField> {
    let (order, fac, fkind) = match eq {
        EquationTag::Schrodinger => (
            -0.5,
            C64::new(0.0, 1.0) * 2.0 * C64::from_polar(1.0, FRAC_PI_4),
            FieldKind::Schrodinger,
        ),
        EquationTag::Kdv => {
            let order = if derivative { -1.0 / 3.0 } else { -2.0 / 3.0 };
            (order, C64::new(3.0, 0.0), FieldKind::Kdv)
        }
    };
    let src = frac_apply(&prepare_trace(grid, trace), order, grid.dt())?;
    let mut out = SampledField::zeros(grid, fkind);
    for i in 0..grid.nt {
        let mut spec = vec![C64::new(0.0, 0.0); grid.nx];
        for (m, v) in spec.iter_mut().enumerate() {
            *v = if m == grid.nx / 2 {
                C64::new(0.0, 0.0)
            } else if derivative {
                fac * src.values[i] * C64::new(0.0, grid.xi_at(m))
            } else {
                fac * src.values[i]
            };
        }
        for (j, v) in grid.inverse_transform(&spec).into_iter().enumerate() {
            out.values[(j, i)] = v;
        }
    }
    Ok(out)
}

/// Maximum relative interior residual of `field` against the forcing `w`,
/// restricted to the window where both cutoffs are identically one.
fn interior_residual(
    grid: &SpaceTimeGrid,
    field: &SampledField,
    w: &SampledField,
    kind: PropagatorKind,
    t_cap: f64,
) -> f64 {
    let res = crate::propagators::pde_residual(grid, field, Some(w), kind);
    // Two measurement choices keep the residual an honest fixed observable
    // under grid refinement.  First, the opening fraction of the window is
    // skipped: the boundary-defect traces ramp up over a few grid steps
    // there, a layer that sharpens with dt.  Second, both residual and field
    // are compared in a fixed frequency band: the boundary forcing carries
    // spatial cusps at x = 0 whose ever-growing resolved tail would
    // otherwise dominate the norm on every finer grid.
    let t_lo = 0.2 * t_cap;
    let xi_band = 0.25 * std::f64::consts::PI / grid.dx().max(grid.l / 512.0);
    let band_l2 = |slice: &[C64]| -> f64 {
        let spec = grid.forward_transform(slice);
        (0..grid.nx)
            .filter(|&m| grid.xi_at(m).abs() <= xi_band)
            .map(|m| spec[m].norm_sqr())
            .sum::<f64>()
    };
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for i in 1..grid.nt - 1 {
        if grid.t_at(i + 1) > t_cap {
            break;
        }
        if grid.t_at(i - 1) < t_lo {
            continue;
        }
        let row: Vec<C64> = (0..grid.nx).map(|j| res[(j, i)]).collect();
        num += band_l2(&row);
        den += band_l2(&field.slice_at(i));
    }
    (num / den.max(1e-300)).sqrt()
}

/// Measured operator constant on this grid: the worst of the extension norm
/// ratios and the group trace constants probed with a unit gaussian, floored
/// at one.
fn measured_constant(grid: &SpaceTimeGrid, reg: &RegularityPair, ext_ratios: &[f64]) -> f64 {
    let probe: Vec<C64> = grid
        .xs()
        .iter()
        .map(|&x| C64::new((-x * x).exp(), 0.0))
        .collect();
    let psi = psi_weights(grid);
    let mut c = 1.0f64;
    for &r in ext_ratios {
        c = c.max(r);
    }
    for (kind, src_idx, trace_idx) in [
        (PropagatorKind::Schrodinger, reg.s, reg.schrodinger_trace()),
        (PropagatorKind::Airy, reg.k, reg.kdv_trace()),
    ] {
        let denom = grid.sobolev_norm(&probe, src_idx);
        if denom > 0.0 {
            let j0 = grid.x0_index();
            let trace: Vec<C64> = (0..grid.nt)
                .map(|i| evolve(kind, grid, &probe, grid.t_at(i))[j0] * psi[i])
                .collect();
            c = c.max(grid.trace_sobolev_norm(&trace, trace_idx) / denom);
        }
    }
    c
}

/// Relative L2(0, t_cap) mismatch between a measured trace and its target.
fn trace_mismatch(grid: &SpaceTimeGrid, measured: &[C64], target: &[C64], t_cap: f64) -> f64 {
    let n = (0..grid.nt)
        .take_while(|&i| grid.t_at(i) <= t_cap)
        .count()
        .max(2);
    let num = grid.trace_l2_norm(
        &measured[..n]
            .iter()
            .zip(&target[..n])
            .map(|(a, b)| a - b)
            .collect::<Vec<_>>(),
    );
    let den = grid.trace_l2_norm(&target[..n]);
    if den > 1e-14 {
        num / den
    } else {
        num
    }
}

struct Stage {
    u: SampledField,
    v: SampledField,
    w1: SampledField,
    w2: SampledField,
    h1: TimeTrace,
    h2: TimeTrace,
    h3: Option<TimeTrace>,
}

/// One application of the contraction map to the iterate `(u, v)`.
fn apply_map(
    grid: &SpaceTimeGrid,
    data: &IBVPData,
    u_free: &SampledField,
    v_free: &SampledField,
    u: &SampledField,
    v: &SampledField,
    psi: &[f64],
    psi_t: &[f64],
    lambda_pair: Option<(f64, f64)>,
) -> Result<Stage> {
    let (w1, w2) = nonlinear_fields(grid, u, v, data, psi_t);
    let mut s1 = duhamel_s(grid, &w1);
    weight_columns(&mut s1, psi);
    let mut k2 = duhamel_k(grid, &w2);
    weight_columns(&mut k2, psi);
    let u_stage = add_fields(u_free, &s1);
    let v_stage = add_fields(v_free, &k2);
    let (h1, h2, h3) = reconstruct_boundary_defect(grid, data, &u_stage, &v_stage, lambda_pair)?;
    let mut lu = l_forcing(grid, &h1)?;
    weight_columns(&mut lu, psi);
    let mut lv = kdv_boundary_field(grid, &h2, h3.as_ref(), lambda_pair)?;
    weight_columns(&mut lv, psi);
    Ok(Stage {
        u: add_fields(&u_stage, &lu),
        v: add_fields(&v_stage, &lv),
        w1,
        w2,
        h1,
        h2,
        h3,
    })
}

fn diff_field(a: &SampledField, b: &SampledField) -> SampledField {
    SampledField {
        values: &a.values - &b.values,
        kind: a.kind,
    }
}

fn z_diff_norm(
    grid: &SpaceTimeGrid,
    du: &SampledField,
    dv: &SampledField,
    reg: &RegularityPair,
    p: &EstimateParams,
) -> f64 {
    bourgain_norm(grid, du, NormSpace::X, reg.s, p.b)
        + bourgain_norm(grid, dv, NormSpace::Y, reg.k, p.b)
        + bourgain_norm(grid, dv, NormSpace::Valpha, 0.0, p.alpha)
}

/// Names the nonlinear term with the largest L2 norm, for divergence
/// diagnostics.
fn dominant_term(
    grid: &SpaceTimeGrid,
    u: &SampledField,
    v: &SampledField,
    data: &IBVPData,
) -> String {
    let mut best = ("coupling alpha u v", 0.0f64);
    for i in 0..grid.nt {
        let us = u.slice_at(i);
        let vs = v.slice_at(i);
        let mut acc = [0.0f64; 4];
        for j in 0..grid.nx {
            acc[0] += (data.alpha_c * us[j] * vs[j]).norm_sqr();
            acc[1] += (data.beta_c * us[j] * us[j].norm_sqr()).norm_sqr();
            acc[2] += (0.5 * vs[j] * vs[j]).norm_sqr();
            acc[3] += (data.gamma_c * us[j].norm_sqr()).powi(2);
        }
        for (name, a) in [
            ("coupling alpha u v", acc[0]),
            ("cubic beta |u|^2 u", acc[1]),
            ("kdv self-interaction dx(v^2)/2", acc[2]),
            ("coupling gamma dx(|u|^2)", acc[3]),
        ] {
            if a > best.1 {
                best = (name, a);
            }
        }
    }
    best.0.to_string()
}

/// KdV data norm entering the small-data gate: `H^k` norm of the initial
/// profile plus the trace norms of `g` (and `h` on the left).
pub fn kdv_data_norm(data: &IBVPData, grid: &SpaceTimeGrid) -> f64 {
    let v0_full = embed_half(grid, &data.v0, data.side);
    let mut n = grid.sobolev_norm(&v0_full, data.reg.k)
        + grid.trace_sobolev_norm(&data.g.values, data.reg.kdv_trace());
    if let Some(h) = &data.h {
        n += grid.trace_sobolev_norm(&h.values, data.reg.kdv_dtrace());
    }
    n
}

/// Solves the coupled system by Picard iteration of the contraction map.
/// Returns the whole-line iterate fields (restrict with
/// [`SpaceTimeGrid::restrict_half_line`] per time slice to read off the
/// half-line solution) and the iteration diagnostics.
pub fn solve(
    data: &IBVPData,
    config: &SolverConfig,
) -> Result<(SampledField, SampledField, IterationReport)> {
    validate(data, &config.grid)?;
    config.validate()?;
    let grid = &config.grid;
    let reg = &data.reg;
    let region = classify_region(data.side, reg.s, reg.k);
    if region == RegionTag::None {
        return Err(Error::Infeasible(format!(
            "(s, k) = ({}, {}) lies outside every admissible region of the {:?} half-line",
            reg.s, reg.k, data.side
        )));
    }
    if region.smallness_required() {
        let n = kdv_data_norm(data, grid);
        if n > config.delta {
            return Err(Error::Validation(format!(
                "region {region:?} requires small KdV data: norm {n:.3e} exceeds the gate {:.3e}",
                config.delta
            )));
        }
    }
    // The constant-coefficient V/V^{-1} boundary system is used on the left
    // for k in [0, 1/2); other left regions take the lambda pair.
    let lambda_pair = match data.side {
        Side::Left if !(0.0..0.5).contains(&reg.k) => {
            Some((config.params.lambda2, config.params.lambda3))
        }
        _ => None,
    };

    let (u0_ext, eu) = grid.extend_half_line(&data.u0, data.side, reg.s);
    let (v0_ext, ev) = grid.extend_half_line(&data.v0, data.side, reg.k);
    let u0_ext = band_limit(grid, &u0_ext);
    let v0_ext = band_limit(grid, &v0_ext);
    let psi = psi_weights(grid);
    let u_free = free_field(grid, PropagatorKind::Schrodinger, &u0_ext, &psi, FieldKind::Schrodinger);
    let v_free = free_field(grid, PropagatorKind::Airy, &v0_ext, &psi, FieldKind::Kdv);

    let c = measured_constant(grid, reg, &[eu, ev]);
    let m1 = 2.0
        * c
        * (grid.sobolev_norm(&embed_half(grid, &data.u0, data.side), reg.s)
            + grid.trace_sobolev_norm(&data.f.values, reg.schrodinger_trace()));
    let m2 = 2.0 * c * kdv_data_norm(data, grid);

    let mut t_local = config.t_local;
    let mut halvings = 0usize;
    'outer: loop {
        let psi_t = psi_t_weights(grid, t_local);
        let mut u = SampledField::zeros(grid, FieldKind::Schrodinger);
        let mut v = SampledField::zeros(grid, FieldKind::Kdv);
        let mut history: Vec<f64> = Vec::new();
        let mut last_stage: Option<Stage> = None;
        let mut bad_streak = 0usize;
        let mut converged = false;
        for _ in 0..config.max_iter {
            let stage = apply_map(
                grid, data, &u_free, &v_free, &u, &v, &psi, &psi_t, lambda_pair,
            )?;
            let diff = z_diff_norm(
                grid,
                &diff_field(&stage.u, &u),
                &diff_field(&stage.v, &v),
                reg,
                &config.params,
            );
            history.push(diff);
            u = stage.u.clone();
            v = stage.v.clone();
            last_stage = Some(stage);
            let n = history.len();
            if n == 2
                && history[1] >= history[0]
                && history[0] > 0.0
                && halvings < 10
                && t_local / 2.0 >= 4.0 * grid.dt()
            {
                t_local /= 2.0;
                halvings += 1;
                continue 'outer;
            }
            if !diff.is_finite() {
                return Err(Error::NonContraction(format!(
                    "iterates left the floating-point range; dominant term: {}",
                    dominant_term(grid, &u, &v, data)
                )));
            }
            let scale = z_diff_norm(
                grid,
                &u,
                &v,
                reg,
                &config.params,
            )
            .max(1.0);
            if diff <= config.tol * scale {
                converged = true;
                break;
            }
            if n >= 2 {
                if history[n - 1] >= history[n - 2] {
                    bad_streak += 1;
                } else {
                    bad_streak = 0;
                }
                if bad_streak >= 5 {
                    return Err(Error::NonContraction(format!(
                        "successive differences non-decreasing for 5 iterations; \
                         dominant term: {}",
                        dominant_term(grid, &u, &v, data)
                    )));
                }
            }
        }

        let stage = last_stage.expect("max_iter >= 1 guarantees one application");
        let mut report = IterationReport::empty();
        report.iterates = history.len();
        report.contraction_ratio = fitted_ratio(&history);
        report.residual_history = history;
        report.m1 = m1;
        report.m2 = m2;
        report.t_local = t_local;
        report.halvings = halvings;
        report.converged = converged;

        let t_cap = t_local.min(1.0);
        let u_trace = trace_at_zero(grid, &u);
        let v_trace = trace_at_zero(grid, &v);
        report.trace_errors = vec![
            trace_mismatch(grid, &u_trace.values, &data.f.values, t_cap),
            trace_mismatch(grid, &v_trace.values, &data.g.values, t_cap),
        ];
        if let Some(h) = &data.h {
            let dv = dx_trace_on_side(grid, &v, Side::Left);
            report.trace_errors.push(trace_mismatch(grid, &dv.values, &h.values, t_cap));
        }

        // Interior residual against the nonlinearity plus the reconstructed
        // delta forcing of the boundary operators.  The lambda-pair forcing
        // has no elementary on-grid representation, so its residual is
        // reported against the nonlinearity alone (diagnostic only).
        let ws = add_fields(
            &stage.w1,
            &delta_forcing_field(grid, &stage.h1, EquationTag::Schrodinger, false)?,
        );
        let wk = if lambda_pair.is_none() {
            let mut w = add_fields(
                &stage.w2,
                &delta_forcing_field(grid, &stage.h2, EquationTag::Kdv, false)?,
            );
            if let Some(h3) = &stage.h3 {
                w = add_fields(&w, &delta_forcing_field(grid, h3, EquationTag::Kdv, true)?);
            }
            w
        } else {
            stage.w2.clone()
        };
        report.pde_residuals = vec![
            interior_residual(grid, &u, &ws, PropagatorKind::Schrodinger, t_cap),
            interior_residual(grid, &v, &wk, PropagatorKind::Airy, t_cap),
        ];

        let vmax = v.max_modulus().max(1e-300);
        report.v_imag_fraction =
            v.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max) / vmax;

        return Ok((u, v, report));
    }
}

/// Geometric mean of the successive residual ratios (0 when fewer than two
/// positive entries are available).
fn fitted_ratio(history: &[f64]) -> f64 {
    let mut logs = Vec::new();
    for w in history.windows(2) {
        if w[0] > 0.0 && w[1] > 0.0 {
            logs.push((w[1] / w[0]).ln());
        }
    }
    if logs.is_empty() {
        0.0
    } else {
        (logs.iter().sum::<f64>() / logs.len() as f64).exp()
    }
}

/// Solves one linear half-line problem (couplings ignored) by superposition
/// of the free evolution and the boundary forcing of the data defect.
pub fn solve_linear(
    side: Side,
    equation: EquationTag,
    data: &IBVPData,
    grid: &SpaceTimeGrid,
) -> Result<(SampledField, IterationReport)> {
    validate(data, grid)?;
    if side != data.side {
        return Err(Error::Validation("side does not match the problem data".into()));
    }
    let psi = psi_weights(grid);
    let mut report = IterationReport::empty();
    report.iterates = 1;
    report.t_local = grid.t_max;
    let t_cap = 1.0f64.min(grid.t_max);
    match equation {
        EquationTag::Schrodinger => {
            let (u0_ext, _) = grid.extend_half_line(&data.u0, side, data.reg.s);
            let u0_ext = band_limit(grid, &u0_ext);
            let free = free_field(grid, PropagatorKind::Schrodinger, &u0_ext, &psi, FieldKind::Schrodinger);
            let trace = trace_at_zero(grid, &free);
            let h1 = TimeTrace::nonneg(
                data.f
                    .values
                    .iter()
                    .zip(&trace.values)
                    .map(|(a, b)| a - b)
                    .collect(),
            );
            let mut lf = l_forcing(grid, &h1)?;
            weight_columns(&mut lf, &psi);
            let u = add_fields(&free, &lf);
            let ut = trace_at_zero(grid, &u);
            report.trace_errors = vec![trace_mismatch(grid, &ut.values, &data.f.values, t_cap)];
            let w = delta_forcing_field(grid, &h1, EquationTag::Schrodinger, false)?;
            report.pde_residuals =
                vec![interior_residual(grid, &u, &w, PropagatorKind::Schrodinger, t_cap)];
            report.converged = true;
            Ok((u, report))
        }
        EquationTag::Kdv => {
            let (v0_ext, _) = grid.extend_half_line(&data.v0, side, data.reg.k);
            let v0_ext = band_limit(grid, &v0_ext);
            let free = free_field(grid, PropagatorKind::Airy, &v0_ext, &psi, FieldKind::Kdv);
            let (v, w) = match side {
                Side::Right => {
                    let trace = trace_at_zero(grid, &free);
                    let h2 = TimeTrace::nonneg(
                        data.g
                            .values
                            .iter()
                            .zip(&trace.values)
                            .map(|(a, b)| a - b)
                            .collect(),
                    );
                    let mut vf = v_forcing(grid, &h2)?;
                    weight_columns(&mut vf, &psi);
                    let w = delta_forcing_field(grid, &h2, EquationTag::Kdv, false)?;
                    (add_fields(&free, &vf), w)
                }
                Side::Left => {
                    let h = data.h.as_ref().expect("validated left data carries h");
                    let trace = trace_at_zero(grid, &free);
                    let dtrace = dx_trace_on_side(grid, &free, Side::Left);
                    let (h2, h3) =
                        assemble_left_kdv_constant(&data.g, h, &trace, &dtrace, grid.dt())?;
                    let mut vf = add_fields(&v_forcing(grid, &h2)?, &v_inv(grid, &h3)?);
                    weight_columns(&mut vf, &psi);
                    let w = add_fields(
                        &delta_forcing_field(grid, &h2, EquationTag::Kdv, false)?,
                        &delta_forcing_field(grid, &h3, EquationTag::Kdv, true)?,
                    );
                    (add_fields(&free, &vf), w)
                }
            };
            let vt = trace_at_zero(grid, &v);
            report.trace_errors = vec![trace_mismatch(grid, &vt.values, &data.g.values, t_cap)];
            if let Some(h) = &data.h {
                let dv = dx_trace_on_side(grid, &v, Side::Left);
                report.trace_errors.push(trace_mismatch(grid, &dv.values, &h.values, t_cap));
            }
            report.pde_residuals =
                vec![interior_residual(grid, &v, &w, PropagatorKind::Airy, t_cap)];
            report.converged = true;
            Ok((v, report))
        }
    }
}

/// Both sides of the L2 flux identity and their mismatch.
#[derive(Debug, Clone)]
pub struct FluxReport {
    /// `int v^2(x, T) dx - int v^2(x, 0) dx` over the half-line.
    pub lhs: f64,
    /// Signed boundary flux `+- int_0^T [2 v vxx - vx^2](0, t) dt`.
    pub rhs: f64,
    /// `|lhs - rhs|`, relative when the sides are not both negligible.
    pub defect: f64,
}

/// Verifies the L2 flux identity for a (real) KdV field: the half-line mass
/// change equals the boundary flux, with a positive sign on the right
/// half-line and a negative one on the left.  Boundary values are one-sided
/// limits at x = 0; both integrals use trapezoidal quadrature.
pub fn flux_identity_check(
    grid: &SpaceTimeGrid,
    v: &SampledField,
    side: Side,
    t_end: f64,
) -> FluxReport {
    let i_end = (0..grid.nt)
        .take_while(|&i| grid.t_at(i) <= t_end + 1e-12)
        .count()
        .saturating_sub(1)
        .max(1);
    let mass = |i: usize| -> f64 {
        let half = grid.restrict_half_line(&v.slice_at(i), side);
        let mut acc = 0.0;
        for (j, z) in half.iter().enumerate() {
            let w = if j == 0 || j == half.len() - 1 { 0.5 } else { 1.0 };
            acc += w * z.re * z.re;
        }
        acc * grid.dx()
    };
    let pick = |pair: (C64, C64)| match side {
        Side::Right => pair.1,
        Side::Left => pair.0,
    };
    let boundary: Vec<f64> = par::map_indexed(i_end + 1, |i| {
        let slice = v.slice_at(i);
        let v0 = pick(one_sided_limits(grid, &slice)).re;
        let v1 = pick(one_sided_limits(grid, &spectral_dx(grid, &slice, 1))).re;
        let v2 = pick(one_sided_limits(grid, &spectral_dx(grid, &slice, 2))).re;
        2.0 * v0 * v2 - v1 * v1
    });
    let mut flux = 0.0;
    for (i, b) in boundary.iter().enumerate() {
        let w = if i == 0 || i == i_end { 0.5 } else { 1.0 };
        flux += w * b;
    }
    flux *= grid.dt();
    let sign = match side {
        Side::Right => 1.0,
        Side::Left => -1.0,
    };
    let lhs = mass(i_end) - mass(0);
    let rhs = sign * flux;
    let scale = lhs.abs().max(rhs.abs());
    let defect = if scale > 1e-12 {
        (lhs - rhs).abs() / scale
    } else {
        (lhs - rhs).abs()
    };
    FluxReport { lhs, rhs, defect }
}

/// Restriction of a whole-line field to one half-line (rows are the
/// half-line nodes in the layout of `restrict_half_line`).
pub fn restrict_field(grid: &SpaceTimeGrid, field: &SampledField, side: Side) -> Array2<C64> {
    let rows = match side {
        Side::Right => grid.nx - grid.x0_index(),
        Side::Left => grid.x0_index() + 1,
    };
    let mut out = Array2::zeros((rows, grid.nt));
    for i in 0..grid.nt {
        for (j, z) in grid.restrict_half_line(&field.slice_at(i), side).into_iter().enumerate() {
            out[(j, i)] = z;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::Profile;

    fn grid() -> SpaceTimeGrid {
        SpaceTimeGrid::new(64.0, 1024, 2.0, 257).unwrap()
    }

    fn bump_trace(grid: &SpaceTimeGrid, amp: f64, center: f64, width: f64) -> TimeTrace {
        Profile::Gaussian { amplitude: amp, center, width }.sample_trace(grid)
    }

    fn half_gaussian(grid: &SpaceTimeGrid, side: Side, amp: f64, center: f64) -> Vec<C64> {
        Profile::Gaussian { amplitude: amp, center, width: 1.0 }.sample_half_line(grid, side)
    }

    fn zeros_half(grid: &SpaceTimeGrid, side: Side) -> Vec<C64> {
        let n = match side {
            Side::Right => grid.nx / 2,
            Side::Left => grid.nx / 2 + 1,
        };
        vec![C64::new(0.0, 0.0); n]
    }

    fn right_data(grid: &SpaceTimeGrid, s: f64, k: f64, amp: f64) -> IBVPData {
        IBVPData {
            side: Side::Right,
            u0: half_gaussian(grid, Side::Right, amp, 4.0),
            v0: half_gaussian(grid, Side::Right, amp, 4.0),
            f: bump_trace(grid, amp, 0.25, 0.08),
            g: bump_trace(grid, amp, 0.25, 0.08),
            h: None,
            alpha_c: 1.0,
            beta_c: 1.0,
            gamma_c: 1.0,
            reg: RegularityPair::new(s, k),
        }
    }

    fn left_data(grid: &SpaceTimeGrid, s: f64, k: f64, amp: f64) -> IBVPData {
        IBVPData {
            side: Side::Left,
            u0: half_gaussian(grid, Side::Left, amp, -4.0),
            v0: half_gaussian(grid, Side::Left, amp, -4.0),
            f: bump_trace(grid, amp, 0.25, 0.08),
            g: bump_trace(grid, amp, 0.25, 0.08),
            h: Some(bump_trace(grid, amp, 0.25, 0.08)),
            alpha_c: 1.0,
            beta_c: 1.0,
            gamma_c: 1.0,
            reg: RegularityPair::new(s, k),
        }
    }

    fn config(grid: &SpaceTimeGrid, reg: &RegularityPair, side: Side) -> SolverConfig {
        let region = classify_region(side, reg.s, reg.k);
        let params = crate::bourgain::default_params(region, reg)
            .unwrap_or(EstimateParams {
                a: 0.40,
                b: 0.45,
                alpha: 0.6,
                lambda1: 0.0,
                lambda2: 0.0,
                lambda3: -1.0,
            });
        SolverConfig {
            grid: grid.clone(),
            t_local: grid.t_max / 4.0,
            tol: 1e-9,
            max_iter: 30,
            params,
            delta: 1e3,
        }
    }

    #[test]
    fn validate_rejects_structural_errors() {
        let g = grid();
        let mut d = right_data(&g, 0.0, -0.6, 0.1);
        validate(&d, &g).unwrap();

        d.h = Some(bump_trace(&g, 0.1, 0.5, 0.12));
        assert!(matches!(validate(&d, &g), Err(Error::Validation(_))));
        d.h = None;

        let mut dl = left_data(&g, 0.3, 0.2, 0.1);
        validate(&dl, &g).unwrap();
        dl.h = None;
        assert!(matches!(validate(&dl, &g), Err(Error::Validation(_))));

        // beta must vanish in a beta-zero region
        let mut d0 = right_data(&g, 0.7, 0.2, 0.1);
        d0.f.values[0] = d0.u0[0]; // satisfy compatibility first
        let err = validate(&d0, &g).unwrap_err();
        assert!(err.to_string().contains("beta"), "{err}");
        d0.beta_c = 0.0;
        validate(&d0, &g).unwrap();

        // compatibility u0(0) = f(0) for s > 1/2
        let mut dc = right_data(&g, 0.75, 0.2, 0.1);
        dc.beta_c = 0.0;
        dc.u0[0] = C64::new(1.0, 0.0);
        let err = validate(&dc, &g).unwrap_err();
        assert!(err.to_string().contains("compatibility"), "{err}");

        // no pointwise condition below 1/2
        let dfree = right_data(&g, 0.0, -0.6, 0.1);
        validate(&dfree, &g).unwrap();

        // length mismatches
        let mut dn = right_data(&g, 0.0, -0.6, 0.1);
        dn.u0.pop();
        assert!(validate(&dn, &g).is_err());
    }

    #[test]
    fn config_validation() {
        let g = grid();
        let reg = RegularityPair::new(0.0, -0.6);
        let mut c = config(&g, &reg, Side::Right);
        c.validate().unwrap();
        c.t_local = g.t_max; // exceeds T_max / 4
        assert!(c.validate().is_err());
        c.t_local = g.t_max / 4.0;
        c.tol = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let g = grid();
        let mut d = right_data(&g, 0.0, -0.6, 0.0);
        d.u0 = zeros_half(&g, Side::Right);
        d.v0 = zeros_half(&g, Side::Right);
        d.f = TimeTrace::zeros(g.nt);
        d.g = TimeTrace::zeros(g.nt);
        let c = config(&g, &d.reg, Side::Right);
        let (u, v, report) = solve(&d, &c).unwrap();
        assert!(report.converged);
        assert!(report.iterates <= 2, "iterates = {}", report.iterates);
        assert!(u.max_modulus() < 1e-12);
        assert!(v.max_modulus() < 1e-12);
    }

    #[test]
    fn picard_contracts_on_region_d() {
        let g = grid();
        let d = right_data(&g, 0.0, -0.6, 0.2);
        let c = config(&g, &d.reg, Side::Right);
        let (_, v, report) = solve(&d, &c).unwrap();
        assert!(report.converged, "history = {:?}", report.residual_history);
        assert!(
            report.contraction_ratio < 0.9,
            "ratio = {}",
            report.contraction_ratio
        );
        assert!(report.v_imag_fraction < 1e-8, "{}", report.v_imag_fraction);
        assert!(v.max_modulus() > 0.0);
        assert!(report.m1 > 0.0 && report.m2 > 0.0);
        for (i, e) in report.trace_errors.iter().enumerate() {
            assert!(*e < 0.1, "trace error {i} = {e}");
        }
    }

    #[test]
    fn left_solve_matches_three_traces() {
        let g = grid();
        let d = left_data(&g, 0.3, 0.2, 0.15);
        let c = config(&g, &d.reg, Side::Left);
        let (_, v, report) = solve(&d, &c).unwrap();
        assert!(report.converged);
        assert!(report.v_imag_fraction < 1e-8);
        assert_eq!(report.trace_errors.len(), 3);
        for (i, e) in report.trace_errors.iter().enumerate() {
            assert!(*e < 0.2, "trace error {i} = {e}");
        }
        assert!(v.max_modulus() > 0.0);
    }

    #[test]
    fn left_lambda_pair_solve_converges() {
        let g = grid();
        let mut d = left_data(&g, 0.3, -0.3, 0.05);
        d.beta_c = 1.0;
        let c = config(&g, &d.reg, Side::Left);
        let (_, v, report) = solve(&d, &c).unwrap();
        assert!(report.converged, "history = {:?}", report.residual_history);
        assert!(report.v_imag_fraction < 1e-6, "{}", report.v_imag_fraction);
        assert!(v.max_modulus() > 0.0);
    }

    #[test]
    fn gauge_decoupling_of_the_kdv_component() {
        let g = grid();
        let mut d = right_data(&g, 0.0, -0.6, 0.2);
        d.alpha_c = 0.0;
        d.gamma_c = 0.0;
        let c = config(&g, &d.reg, Side::Right);
        let (_, v_full, _) = solve(&d, &c).unwrap();

        let mut d_alone = d.clone();
        d_alone.u0 = zeros_half(&g, Side::Right);
        d_alone.f = TimeTrace::zeros(g.nt);
        let (u_zero, v_alone, _) = solve(&d_alone, &c).unwrap();
        assert!(u_zero.max_modulus() < 1e-10);
        let num = (&v_full.values - &v_alone.values)
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt();
        let den = v_full
            .values
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(num / den < 1e-6, "relative split = {}", num / den);
    }

    #[test]
    fn smallness_gate_refuses_large_data() {
        let g = grid();
        let mut d = right_data(&g, 0.45, 0.6, 1.0);
        d.beta_c = 0.0;
        // keep the k > 1/2 compatibility condition satisfied
        d.g = bump_trace(&g, 1.0, 0.5, 0.08);
        d.v0 = zeros_half(&g, Side::Right);
        let mut c = config(&g, &d.reg, Side::Right);
        c.delta = 1e-6;
        let err = solve(&d, &c).unwrap_err();
        assert!(err.to_string().contains("small"), "{err}");
    }

    #[test]
    fn infeasible_regularity_is_rejected() {
        let g = grid();
        let d = right_data(&g, 0.0, 0.0, 0.1);
        let c = config(&g, &d.reg, Side::Right);
        assert!(matches!(solve(&d, &c), Err(Error::Infeasible(_))));
    }

    #[test]
    fn noncontraction_reports_dominant_term() {
        let g = SpaceTimeGrid::new(16.0, 128, 1.0, 65).unwrap();
        let mut d = right_data(&g, 0.0, -0.6, 40.0);
        d.beta_c = 4.0;
        let mut c = config(&g, &d.reg, Side::Right);
        c.max_iter = 30;
        match solve(&d, &c) {
            Err(Error::NonContraction(msg)) => {
                assert!(msg.contains("dominant term"), "{msg}");
            }
            other => panic!("expected non-contraction, got {other:?}"),
        }
    }

    #[test]
    fn linear_right_kdv_zero_data_is_zero() {
        let g = grid();
        let mut d = right_data(&g, 0.0, -0.6, 0.0);
        d.u0 = zeros_half(&g, Side::Right);
        d.v0 = zeros_half(&g, Side::Right);
        d.f = TimeTrace::zeros(g.nt);
        d.g = TimeTrace::zeros(g.nt);
        let (v, report) = solve_linear(Side::Right, EquationTag::Kdv, &d, &g).unwrap();
        assert!(report.converged);
        assert!(v.max_modulus() < 1e-8);
    }

    #[test]
    fn linear_left_kdv_h_bump_is_nonzero() {
        let g = grid();
        let mut d = left_data(&g, 0.3, 0.2, 0.0);
        d.u0 = zeros_half(&g, Side::Left);
        d.v0 = zeros_half(&g, Side::Left);
        d.f = TimeTrace::zeros(g.nt);
        d.g = TimeTrace::zeros(g.nt);
        d.h = Some(bump_trace(&g, 1.0, 0.5, 0.12));
        let (v, _) = solve_linear(Side::Left, EquationTag::Kdv, &d, &g).unwrap();
        let tol = 1e-6;
        let mid = g.l2_norm(&v.slice_at((g.nt - 1) / 2));
        assert!(mid > 10.0 * tol, "norm at t = 1 is {mid}");
        // the solution lives on the left half-line
        let left_part: f64 = restrict_field(&g, &v, Side::Left)
            .iter()
            .map(|z| z.norm_sqr())
            .sum();
        assert!(left_part > 0.0);
    }

    #[test]
    fn linear_schrodinger_free_trace_reproduces_free_evolution() {
        let g = grid();
        let mut d = right_data(&g, 0.0, -0.6, 0.3);
        let (u0_ext, _) = g.extend_half_line(&d.u0, Side::Right, d.reg.s);
        let u0_ext = band_limit(&g, &u0_ext);
        let psi = psi_weights(&g);
        let free = free_field(&g, PropagatorKind::Schrodinger, &u0_ext, &psi, FieldKind::Schrodinger);
        d.f = trace_at_zero(&g, &free);
        let (u, report) = solve_linear(Side::Right, EquationTag::Schrodinger, &d, &g).unwrap();
        let num = (&u.values - &free.values)
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt();
        let den = free.values.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(num / den < 1e-6, "relative deviation = {}", num / den);
        assert!(report.trace_errors[0] < 1e-6);
    }

    #[test]
    fn flux_identity_zero_field_and_refinement() {
        let g0 = SpaceTimeGrid::new(32.0, 256, 0.25, 129).unwrap();
        let zero = SampledField::zeros(&g0, FieldKind::Kdv);
        let r = flux_identity_check(&g0, &zero, Side::Right, 0.25);
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.rhs, 0.0);
        assert_eq!(r.defect, 0.0);

        let airy_evolution = |g: &SpaceTimeGrid| -> SampledField {
            let phi: Vec<C64> = g
                .xs()
                .iter()
                .map(|&x| C64::new((-x * x).exp(), 0.0))
                .collect();
            let mut field = SampledField::zeros(g, FieldKind::Kdv);
            for i in 0..g.nt {
                for (j, z) in evolve(PropagatorKind::Airy, g, &phi, g.t_at(i))
                    .into_iter()
                    .enumerate()
                {
                    field.values[(j, i)] = z;
                }
            }
            field
        };
        let coarse = flux_identity_check(&g0, &airy_evolution(&g0), Side::Right, 0.25);
        let g1 = g0.refined();
        let fine = flux_identity_check(&g1, &airy_evolution(&g1), Side::Right, 0.25);
        assert!(coarse.defect < 0.1, "coarse defect = {}", coarse.defect);
        assert!(
            fine.defect < coarse.defect / 1.8,
            "defects {} -> {}",
            coarse.defect,
            fine.defect
        );
        // opposite sign convention on the left half-line
        let left = flux_identity_check(&g0, &airy_evolution(&g0), Side::Left, 0.25);
        assert!(left.defect < 0.1, "left defect = {}", left.defect);
    }
}

