//! Discrete Bourgain-space norms, admissibility-region classification for the
//! regularity pair (s, k), Monte-Carlo verification of the coupled nonlinear
//! estimates, and quadrature checkers for the elementary 1-d integral bounds
//! they rest on.
//!
//! The Monte-Carlo harness does not prove anything: for each estimate it
//! samples random band-limited space-time fields, normalizes the right-hand
//! side, and reports the distribution of left/right norm ratios together with
//! their growth under frequency-cutoff doubling. A bounded, cutoff-stable
//! ratio is the expected signature of a true inequality; unbounded growth
//! flags a misconfigured exponent set.

use crate::error::{Error, Result};
use crate::grid::{cutoff_psi_t, FieldKind, SampledField, Side, SpaceTimeGrid};
use crate::propagators::spectral_dx;
use crate::{par, C64};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Sobolev regularity pair: `s` for the Schrodinger component, `k` for KdV.
/// The boundary-trace exponents are derived, never stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityPair {
    pub s: f64,
    pub k: f64,
}

impl RegularityPair {
    pub fn new(s: f64, k: f64) -> Self {
        RegularityPair { s, k }
    }

    /// Trace regularity of the Schrodinger component, `(2s+1)/4`.
    pub fn schrodinger_trace(&self) -> f64 {
        (2.0 * self.s + 1.0) / 4.0
    }

    /// Trace regularity of the KdV component, `(k+1)/3`.
    pub fn kdv_trace(&self) -> f64 {
        (self.k + 1.0) / 3.0
    }

    /// Regularity of the KdV derivative trace, `k/3`.
    pub fn kdv_dtrace(&self) -> f64 {
        self.k / 3.0
    }
}

/// Bourgain time exponents and forcing-class orders used by the contraction
/// argument: `0 < a < b < 1/2`, low-frequency exponent `alpha`, and the
/// lambda-family orders `lambda1` (Schrodinger) and `lambda2`, `lambda3`
/// (KdV pair).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateParams {
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
}

impl EstimateParams {
    /// The dual exponent `d = -a` used on left-hand-side norms.
    pub fn d(&self) -> f64 {
        -self.a
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.a && self.a < self.b && self.b < 0.5) {
            return Err(Error::Validation(format!(
                "estimate parameters must satisfy 0 < a < b < 1/2, got a = {}, b = {}",
                self.a, self.b
            )));
        }
        Ok(())
    }
}

/// Admissibility-region tags. The `D` family covers the right half-line
/// problem, the `E` family the left one; `t`-suffixed regions require small
/// boundary data, `0`-suffixed ones require the coupling beta to vanish.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionTag {
    D,
    D0,
    Dt,
    Dt0,
    E,
    E0,
    Et1,
    Et2,
    Et10,
    Et20,
    None,
}

impl RegionTag {
    pub fn smallness_required(self) -> bool {
        matches!(
            self,
            RegionTag::Dt
                | RegionTag::Dt0
                | RegionTag::Et1
                | RegionTag::Et2
                | RegionTag::Et10
                | RegionTag::Et20
        )
    }

    pub fn beta_zero_required(self) -> bool {
        matches!(
            self,
            RegionTag::D0 | RegionTag::Dt0 | RegionTag::E0 | RegionTag::Et10 | RegionTag::Et20
        )
    }

    pub fn side(self) -> Option<Side> {
        match self {
            RegionTag::D | RegionTag::D0 | RegionTag::Dt | RegionTag::Dt0 => Some(Side::Right),
            RegionTag::None => None,
            _ => Some(Side::Left),
        }
    }
}

/// Membership test for one region, with the inequalities exactly as strict
/// as printed in the well-posedness theorems.
pub fn region_contains(tag: RegionTag, s: f64, k: f64) -> bool {
    match tag {
        RegionTag::D => {
            (0.0..0.5).contains(&s)
                && (-0.75f64).max(s - 1.0) < k
                && k < (4.0 * s - 0.5).min(0.5)
        }
        RegionTag::D0 => 0.5 < s && s < 1.0 && s - 1.0 < k && k < 0.5,
        RegionTag::Dt => {
            0.25 < s && s < 0.5 && 0.5 < k && k < (4.0 * s - 0.5).min(s + 0.5)
        }
        RegionTag::Dt0 => 0.5 < s && s < 1.0 && 0.5 < k && k < s + 0.5,
        RegionTag::E => {
            0.125 < s && s < 0.5 && (0.0..(4.0 * s - 0.5).min(0.5)).contains(&k)
        }
        RegionTag::E0 => 0.5 < s && s < 1.0 && (0.0..0.5).contains(&k),
        RegionTag::Et1 => {
            0.0 < s && s < 0.5 && (-0.75f64).max(s - 1.0) < k && k < (4.0 * s - 0.5).min(0.0)
        }
        RegionTag::Et2 => {
            0.25 < s && s < 0.5 && 0.5 < k && k < (4.0 * s - 0.5).min(s + 0.5)
        }
        RegionTag::Et10 => 0.5 < s && s < 1.0 && s - 1.0 < k && k < 0.0,
        RegionTag::Et20 => 0.5 < s && s < 1.0 && 0.5 < k && k <= s + 0.5,
        RegionTag::None => false,
    }
}

const RIGHT_REGIONS: [RegionTag; 4] = [RegionTag::D, RegionTag::D0, RegionTag::Dt, RegionTag::Dt0];
const LEFT_REGIONS: [RegionTag; 6] = [
    RegionTag::E,
    RegionTag::E0,
    RegionTag::Et1,
    RegionTag::Et2,
    RegionTag::Et10,
    RegionTag::Et20,
];

/// Classifies a regularity pair into the admissibility region for the given
/// half-line; boundary points fall through to `None`.
pub fn classify_region(side: Side, s: f64, k: f64) -> RegionTag {
    let list: &[RegionTag] = match side {
        Side::Right => &RIGHT_REGIONS,
        Side::Left => &LEFT_REGIONS,
    };
    list.iter()
        .copied()
        .find(|&t| region_contains(t, s, k))
        .unwrap_or(RegionTag::None)
}

/// The discrete Bourgain and modified Bourgain norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormSpace {
    /// `<xi>^s <tau + xi^2>^b` (Schrodinger).
    X,
    /// `<xi>^k <tau - xi^3>^b` (KdV).
    Y,
    /// `<tau>^{s/2} <tau + xi^2>^b`.
    W,
    /// `<tau>^{s/3} <tau - xi^3>^b`.
    U,
    /// `<tau>^alpha` (low-frequency correction space).
    Valpha,
}

fn jbr(y: f64, e: f64) -> f64 {
    // bracket power <y>^e with <y> = 1 + |y|
    (1.0 + y.abs()).powf(e)
}

fn norm_weight(space: NormSpace, xi: f64, tau: f64, idx: f64, exp: f64) -> f64 {
    match space {
        NormSpace::X => jbr(xi, idx) * jbr(tau + xi * xi, exp),
        NormSpace::Y => jbr(xi, idx) * jbr(tau - xi * xi * xi, exp),
        NormSpace::W => jbr(tau, idx / 2.0) * jbr(tau + xi * xi, exp),
        NormSpace::U => jbr(tau, idx / 3.0) * jbr(tau - xi * xi * xi, exp),
        NormSpace::Valpha => jbr(tau, exp),
    }
}

/// 2-d DFT of a sampled field along both axes; forward uses negative
/// exponents and no scaling, matching the coefficient convention
/// `w_{ji} = sum c_{mn} e^{i(xi_m x_j + tau_n t_i)}` after division by Nx Nt.
fn fft2_forward(grid: &SpaceTimeGrid, values: &Array2<C64>) -> Array2<C64> {
    let (nx, nt) = (grid.nx, grid.nt);
    let mut out = values.clone();
    let px = crate::grid::plan(nx, true);
    let mut col = vec![C64::new(0.0, 0.0); nx];
    for i in 0..nt {
        for j in 0..nx {
            col[j] = out[(j, i)];
        }
        px.process(&mut col);
        for j in 0..nx {
            out[(j, i)] = col[j];
        }
    }
    let pt = crate::grid::plan(nt, true);
    let mut row = vec![C64::new(0.0, 0.0); nt];
    for j in 0..nx {
        for i in 0..nt {
            row[i] = out[(j, i)];
        }
        pt.process(&mut row);
        for i in 0..nt {
            out[(j, i)] = row[i];
        }
    }
    out
}

fn ifft2(grid: &SpaceTimeGrid, spec: &Array2<C64>) -> Array2<C64> {
    let (nx, nt) = (grid.nx, grid.nt);
    let mut out = spec.clone();
    let px = crate::grid::plan(nx, false);
    let mut col = vec![C64::new(0.0, 0.0); nx];
    for i in 0..nt {
        for j in 0..nx {
            col[j] = out[(j, i)];
        }
        px.process(&mut col);
        for j in 0..nx {
            out[(j, i)] = col[j];
        }
    }
    let pt = crate::grid::plan(nt, false);
    let mut row = vec![C64::new(0.0, 0.0); nt];
    for j in 0..nx {
        for i in 0..nt {
            row[i] = out[(j, i)];
        }
        pt.process(&mut row);
        for i in 0..nt {
            out[(j, i)] = row[i] / (nx * nt) as f64;
        }
    }
    out
}

/// Weighted L2 norm of the 2-d discrete transform: the discrete analogue of
/// `|| w(xi,tau) what ||_{L^2}`, normalized so that zero weight exponents
/// reproduce the space-time L2 norm. `idx` is the spatial (or, for W/U, the
/// reused temporal) Sobolev index, `exp` the modulation exponent (or alpha).
pub fn bourgain_norm(
    grid: &SpaceTimeGrid,
    w: &SampledField,
    space: NormSpace,
    idx: f64,
    exp: f64,
) -> f64 {
    let spec = fft2_forward(grid, &w.values);
    let scale = 1.0 / (grid.nx * grid.nt) as f64;
    let period = grid.nt as f64 * grid.dt();
    let mut acc = 0.0;
    for m in 0..grid.nx {
        let xi = grid.xi_at(m);
        for n in 0..grid.nt {
            let wt = norm_weight(space, xi, grid.tau_at(n), idx, exp);
            acc += (wt * scale * spec[(m, n)].norm()).powi(2);
        }
    }
    (2.0 * grid.l * period * acc).sqrt()
}

/// The nonlinear estimates whose hypotheses the harness can check and whose
/// ratio behaviour it can sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateKind {
    /// Cubic NLS trilinear bound `||u1 u2 conj(u3)||_{X^{s,-a}}`.
    Trilinear51,
    /// KdV bilinear bound `||dx(v1 v2)||_{Y^{k,-b}}` with the `V^alpha`
    /// low-frequency correction.
    KdvBilinear52,
    /// Coupling bound `||uv||_{X^{s,-a}} <= c ||u||_{X^{s,b}} ||v||_{Y^{k,b}}`.
    Prop51,
    /// Coupling bound in the modified space, `||uv||_{W^{s,-a}}`.
    Prop52,
    /// Coupling bound `||dx(u1 conj(u2))||_{Y^{k,-a}}`.
    Prop53,
    /// Coupling bound `||dx(u1 conj(u2))||_{U^{k,-a}}`, variant (a): `k >= 0`.
    Prop54a,
    /// Same left-hand side, variant (b): `k <= 0`.
    Prop54b,
}

impl EstimateKind {
    pub fn label(self) -> &'static str {
        match self {
            EstimateKind::Trilinear51 => "trilinear-5.1",
            EstimateKind::KdvBilinear52 => "kdv-bilinear-5.2",
            EstimateKind::Prop51 => "prop-5.1",
            EstimateKind::Prop52 => "prop-5.2",
            EstimateKind::Prop53 => "prop-5.3",
            EstimateKind::Prop54a => "prop-5.4a",
            EstimateKind::Prop54b => "prop-5.4b",
        }
    }
}

fn hypothesis_err(kind: EstimateKind, msg: &str) -> Error {
    Error::HypothesisViolated(format!("{} requires {msg}", kind.label()))
}

/// Checks the printed hypothesis of one estimate for `(s, k)` and the given
/// exponents; the error names the violated inequality.
pub fn check_hypothesis(kind: EstimateKind, reg: &RegularityPair, p: &EstimateParams) -> Result<()> {
    let (s, k) = (reg.s, reg.k);
    let (a, b) = (p.a, p.b);
    match kind {
        EstimateKind::Trilinear51 => {
            if !(0.375 < b && b < 0.5) {
                return Err(hypothesis_err(kind, "3/8 < b < 1/2"));
            }
            if s < 0.0 {
                return Err(hypothesis_err(kind, "s >= 0"));
            }
            if !(0.0 < a && a < 0.5) {
                return Err(hypothesis_err(kind, "0 < a < 1/2"));
            }
        }
        EstimateKind::KdvBilinear52 => {
            if k <= -0.75 {
                return Err(hypothesis_err(kind, "k > -3/4"));
            }
            if p.alpha <= 0.5 {
                return Err(hypothesis_err(kind, "alpha > 1/2"));
            }
            let lo = (5.0 / 12.0 - k / 9.0)
                .max(0.25 - k / 3.0)
                .max(0.3 - k / 15.0)
                .max(0.25);
            if !(lo < b && b < 0.5) {
                return Err(hypothesis_err(
                    kind,
                    "max{5/12 - k/9, 1/4 - k/3, 3/10 - k/15, 1/4} < b < 1/2",
                ));
            }
        }
        EstimateKind::Prop51 => {
            if !(7.0 / 18.0 < 2.0 * b - 0.5 && 2.0 * b - 0.5 <= a && a < b) {
                return Err(hypothesis_err(kind, "7/18 < 2b - 1/2 <= a < b"));
            }
            if k - s.abs() <= (2.0 - 6.0 * b).max(2.5 - 9.0 * a) {
                return Err(hypothesis_err(kind, "k - |s| > max{2 - 6b, 5/2 - 9a}"));
            }
        }
        EstimateKind::Prop52 => {
            if !(0.5 < s && s <= 2.0 * a) {
                return Err(hypothesis_err(kind, "1/2 < s <= 2a"));
            }
            if !(1.0 / 3.0 < a && a < b && b < 0.5) {
                return Err(hypothesis_err(kind, "1/3 < a < b < 1/2"));
            }
            if k <= s - 2.0 * a {
                return Err(hypothesis_err(kind, "k > s - 2a"));
            }
        }
        EstimateKind::Prop53 => {
            if s < 0.0 {
                return Err(hypothesis_err(kind, "s >= 0"));
            }
            if !(0.375 < a && a <= b && b < 0.5) {
                return Err(hypothesis_err(kind, "3/8 < a <= b < 1/2"));
            }
            let cap = (s + 6.0 * b + 3.0 * a - 3.5)
                .min(s + 3.0 * b - 1.0)
                .min(4.0 * s + 2.0 * a - 1.5)
                .min(4.0 * s + 3.0 * a + 6.0 * b - 3.5);
            if k > cap {
                return Err(hypothesis_err(
                    kind,
                    "k <= min{s + 6b + 3a - 7/2, s + 3b - 1, 4s + 2a - 3/2, 4s + 3a + 6b - 7/2}",
                ));
            }
        }
        EstimateKind::Prop54a => {
            if !(0.25 < b && b < 0.5) {
                return Err(hypothesis_err(kind, "1/4 < b < 1/2"));
            }
            if s <= 0.25 {
                return Err(hypothesis_err(kind, "s > 1/4"));
            }
            let cap = (3.0 * a).min(2.0 * s + 6.0 * b + 3.0 * a - 3.5);
            if !(0.0 <= k && k <= cap) {
                return Err(hypothesis_err(
                    kind,
                    "0 <= k <= min{3a, 2s + 6b + 3a - 7/2}",
                ));
            }
        }
        EstimateKind::Prop54b => {
            if !(0.25 < b && b < 0.5) {
                return Err(hypothesis_err(kind, "1/4 < b < 1/2"));
            }
            if !(1.0 - 2.0 * b < s && s <= 3.0 * a - 0.5) {
                return Err(hypothesis_err(kind, "1 - 2b < s <= 3a - 1/2"));
            }
            if k > 0.0 {
                return Err(hypothesis_err(kind, "k <= 0"));
            }
        }
    }
    Ok(())
}

/// The set of estimates the contraction argument invokes for a region: the
/// trilinear, KdV bilinear and both coupling bounds are always needed; the
/// modified-space variants enter for `s > 1/2` (W) and on the left half-line
/// (U, with the variant selected by the sign of k).
pub fn required_estimates(region: RegionTag, reg: &RegularityPair) -> Vec<EstimateKind> {
    let mut list = vec![
        EstimateKind::Trilinear51,
        EstimateKind::KdvBilinear52,
        EstimateKind::Prop51,
        EstimateKind::Prop53,
    ];
    if reg.s > 0.5 {
        list.push(EstimateKind::Prop52);
    }
    if region.side() == Some(Side::Left) {
        list.push(if reg.k >= 0.0 {
            EstimateKind::Prop54a
        } else {
            EstimateKind::Prop54b
        });
    }
    list
}

/// Deterministic parameter selection for a region: a grid search over
/// `(a, b) in {0.30, 0.31, ..., 0.49}^2` intersected with every required
/// hypothesis, preferring maximal `b` and then maximal `a`. `alpha` is set
/// just above the KdV bilinear threshold, and the forcing-class orders follow
/// the fixed rules below (left half-line: distinct orders inside
/// `(-1, min{1/2, k + 1/2})`; right: the plain pair `(0, -1)`).
pub fn default_params(region: RegionTag, reg: &RegularityPair) -> Result<EstimateParams> {
    if region == RegionTag::None {
        return Err(Error::Infeasible(
            "cannot select parameters for the empty region".into(),
        ));
    }
    let needed = required_estimates(region, reg);
    let (lambda2, lambda3) = match region.side() {
        Some(Side::Left) => {
            let hi = 0.5f64.min(reg.k + 0.5);
            (hi - 0.3, hi - 0.6)
        }
        _ => (0.0, -1.0),
    };
    for bi in (30..=49).rev() {
        let b = bi as f64 / 100.0;
        for ai in (30..bi).rev() {
            let a = ai as f64 / 100.0;
            let p = EstimateParams {
                a,
                b,
                alpha: 0.55f64.max(1.05 - b),
                lambda1: 0.0,
                lambda2,
                lambda3,
            };
            if needed.iter().all(|&kind| check_hypothesis(kind, reg, &p).is_ok()) {
                p.validate()?;
                return Ok(p);
            }
        }
    }
    Err(Error::Infeasible(format!(
        "no (a, b) on the search grid satisfies every hypothesis for {region:?} at (s, k) = ({}, {})",
        reg.s, reg.k
    )))
}

/// Ratio statistics from one Monte-Carlo verification run.
#[derive(Debug, Clone)]
pub struct RatioReport {
    pub which: EstimateKind,
    pub trials: usize,
    pub seed: u64,
    /// Base-level cutoff as a fraction of the grid Nyquist frequency.
    pub base_cutoff: f64,
    /// Max ratio per cutoff level (base, 2x, 4x).
    pub level_max: Vec<f64>,
    /// Per-trial ratios at the base cutoff (skipped trials omitted).
    pub ratios: Vec<f64>,
    /// `level_max` growth from the base to the finest cutoff.
    pub cutoff_growth: f64,
}

impl RatioReport {
    pub fn max_ratio(&self) -> f64 {
        self.level_max.iter().copied().fold(0.0, f64::max)
    }

    pub fn csv_row(&self, p: &EstimateParams) -> String {
        format!(
            "{},{},{},{},{},{:.6e},{:.4},{}",
            self.which.label(),
            p.a,
            p.b,
            p.alpha,
            self.trials,
            self.max_ratio(),
            self.cutoff_growth,
            self.seed
        )
    }
}

/// Random band-limited field: white noise in `(xi, tau)` below the cutoff
/// fraction of both Nyquist frequencies; real-valued when requested (KdV
/// inputs). The band filter is symmetric, so realness is preserved exactly.
fn noise_field(grid: &SpaceTimeGrid, frac: f64, rng: &mut ChaCha8Rng, real: bool) -> SampledField {
    let mut phys = Array2::zeros((grid.nx, grid.nt));
    for v in phys.iter_mut() {
        let re = rng.gen::<f64>() - 0.5;
        let im = if real { 0.0 } else { rng.gen::<f64>() - 0.5 };
        *v = C64::new(re, im);
    }
    let mut spec = fft2_forward(grid, &phys);
    let xcut = frac * grid.xi_max();
    let tcut = frac * std::f64::consts::PI / grid.dt();
    for m in 0..grid.nx {
        for n in 0..grid.nt {
            if grid.xi_at(m).abs() > xcut || grid.tau_at(n).abs() > tcut {
                spec[(m, n)] = C64::new(0.0, 0.0);
            }
        }
    }
    SampledField {
        values: ifft2(grid, &spec),
        kind: FieldKind::Generic,
    }
}

fn dx_field(grid: &SpaceTimeGrid, values: &Array2<C64>) -> SampledField {
    let mut out = Array2::zeros((grid.nx, grid.nt));
    for i in 0..grid.nt {
        let col: Vec<C64> = (0..grid.nx).map(|j| values[(j, i)]).collect();
        let d = spectral_dx(grid, &col, 1);
        for (j, v) in d.into_iter().enumerate() {
            out[(j, i)] = v;
        }
    }
    SampledField {
        values: out,
        kind: FieldKind::Generic,
    }
}

fn product(a: &Array2<C64>, b: &Array2<C64>, conj_b: bool) -> Array2<C64> {
    let mut out = a.clone();
    for (x, y) in out.iter_mut().zip(b.iter()) {
        *x *= if conj_b { y.conj() } else { *y };
    }
    out
}

/// Number of random input fields an estimate consumes.
fn arity(kind: EstimateKind) -> usize {
    match kind {
        EstimateKind::Trilinear51 => 3,
        _ => 2,
    }
}

/// Whether each input field must be real (KdV component).
fn input_real(kind: EstimateKind, pos: usize) -> bool {
    match kind {
        EstimateKind::KdvBilinear52 => true,
        EstimateKind::Prop51 | EstimateKind::Prop52 => pos == 1,
        _ => false,
    }
}

/// Left-norm over right-norm-product ratio for one concrete input tuple;
/// `None` when a right-hand factor degenerates to zero (skipped trial).
fn estimate_ratio(
    grid: &SpaceTimeGrid,
    kind: EstimateKind,
    reg: &RegularityPair,
    p: &EstimateParams,
    fields: &[SampledField],
) -> Option<f64> {
    let (s, k) = (reg.s, reg.k);
    let (a, b) = (p.a, p.b);
    let xnorm = |f: &SampledField| bourgain_norm(grid, f, NormSpace::X, s, b);
    let (lhs, rhs) = match kind {
        EstimateKind::Trilinear51 => {
            let prod = product(&product(&fields[0].values, &fields[1].values, false).clone(), &fields[2].values, true);
            let w = SampledField { values: prod, kind: FieldKind::Generic };
            (
                bourgain_norm(grid, &w, NormSpace::X, s, -a),
                xnorm(&fields[0]) * xnorm(&fields[1]) * xnorm(&fields[2]),
            )
        }
        EstimateKind::KdvBilinear52 => {
            let inorm = |f: &SampledField| {
                bourgain_norm(grid, f, NormSpace::Y, k, b)
                    + bourgain_norm(grid, f, NormSpace::Valpha, 0.0, p.alpha)
            };
            let w = SampledField {
                values: product(&fields[0].values, &fields[1].values, false),
                kind: FieldKind::Generic,
            };
            let dw = dx_field(grid, &w.values);
            (
                bourgain_norm(grid, &dw, NormSpace::Y, k, -b),
                inorm(&fields[0]) * inorm(&fields[1]),
            )
        }
        EstimateKind::Prop51 | EstimateKind::Prop52 => {
            let w = SampledField {
                values: product(&fields[0].values, &fields[1].values, false),
                kind: FieldKind::Generic,
            };
            let space = if kind == EstimateKind::Prop51 { NormSpace::X } else { NormSpace::W };
            (
                bourgain_norm(grid, &w, space, s, -a),
                xnorm(&fields[0]) * bourgain_norm(grid, &fields[1], NormSpace::Y, k, b),
            )
        }
        EstimateKind::Prop53 | EstimateKind::Prop54a | EstimateKind::Prop54b => {
            let w = product(&fields[0].values, &fields[1].values, true);
            let dw = dx_field(grid, &w);
            let space = if kind == EstimateKind::Prop53 { NormSpace::Y } else { NormSpace::U };
            (
                bourgain_norm(grid, &dw, space, k, -a),
                xnorm(&fields[0]) * xnorm(&fields[1]),
            )
        }
    };
    if rhs < 1e-14 {
        None
    } else {
        Some(lhs / rhs)
    }
}

/// Monte-Carlo verification of one estimate: random band-limited inputs, the
/// ratio distribution at a base frequency cutoff, and the same sweep at 2x
/// and 4x the cutoff. Hypotheses are checked first and violations refused.
/// Trials are independent with a seed-per-trial scheme, so the report does
/// not depend on execution order.
pub fn verify_estimate(
    kind: EstimateKind,
    reg: &RegularityPair,
    p: &EstimateParams,
    trials: usize,
    seed: u64,
) -> Result<RatioReport> {
    check_hypothesis(kind, reg, p)?;
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be >= 1".into()));
    }
    let grid = SpaceTimeGrid::new(16.0, 64, 8.0, 64)?;
    // keep every product inside the representable band: three-factor products
    // need a lower base cutoff than two-factor ones
    let base = if arity(kind) == 3 { 1.0 / 12.0 } else { 0.125 };
    let mut level_max = Vec::new();
    let mut base_ratios = Vec::new();
    for (level, mult) in [1.0, 2.0, 4.0].into_iter().enumerate() {
        let frac = base * mult;
        let ratios: Vec<Option<f64>> = par::map_indexed(trials, |trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(
                seed ^ (0x9E37_79B9_7F4A_7C15u64
                    .wrapping_mul((level * trials + trial + 1) as u64)),
            );
            let fields: Vec<SampledField> = (0..arity(kind))
                .map(|pos| noise_field(&grid, frac, &mut rng, input_real(kind, pos)))
                .collect();
            estimate_ratio(&grid, kind, reg, p, &fields)
        });
        let kept: Vec<f64> = ratios.into_iter().flatten().collect();
        level_max.push(kept.iter().copied().fold(0.0, f64::max));
        if level == 0 {
            base_ratios = kept;
        }
    }
    let growth = if level_max[0] > 0.0 { level_max[2] / level_max[0] } else { 0.0 };
    Ok(RatioReport {
        which: kind,
        trials,
        seed,
        base_cutoff: base,
        level_max,
        ratios: base_ratios,
        cutoff_growth: growth,
    })
}

/// The elementary 1-d integral bounds behind the nonlinear estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntegralLemma {
    /// `int dx <a0 + a1 x + x^2>^{-b} <= c` for `b > 1/2`.
    Quadratic { b: f64 },
    /// `int dx <a0 + a1 x + a2 x^2 + x^3>^{-b} <= c` for `b > 1/3`.
    Cubic { b: f64 },
    /// `int dy <y - alpha>^{-2b1} <y - beta>^{-2b2} <= c <alpha - beta>^{1 - 2b1 - 2b2}`.
    Gtv { b1: f64, b2: f64 },
    /// `int_{|x| < beta} <x>^{1-4b} |alpha - x|^{-1/2} dx <= c (1+beta)^{2-4b} <alpha>^{-1/2}`.
    Holmer { b: f64 },
}

/// Sup of integral/claimed-bound ratios over the sampled parameter tuples.
#[derive(Debug, Clone)]
pub struct SupReport {
    pub sup: f64,
    /// Sample tuple attaining the sup.
    pub worst: [f64; 3],
    pub samples: usize,
    /// Tuples whose ratio exceeded the headroom factor.
    pub flagged: usize,
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    debug_assert!(n % 2 == 0 && n >= 2);
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

fn integral_value(lemma: IntegralLemma, t: &[f64; 3]) -> f64 {
    match lemma {
        IntegralLemma::Quadratic { b } => {
            // complete the square: a0 + a1 x + x^2 = c + u^2
            let c = t[0] - t[1] * t[1] / 4.0;
            let r = 50.0 + 10.0 * (1.0 + c.abs()).sqrt();
            simpson(|u| jbr(c + u * u, -b), -r, r, 40_000)
                + 2.0 * (1.0 + r).powf(1.0 - 2.0 * b) / (2.0 * b - 1.0)
        }
        IntegralLemma::Cubic { b } => {
            let p = |x: f64| t[0] + t[1] * x + t[2] * x * x + x * x * x;
            let r = 100.0 + 4.0 * (t[0].abs().cbrt() + t[1].abs().sqrt() + t[2].abs());
            simpson(|x| jbr(p(x), -b), -r, r, 100_000)
                + 2.0f64.powf(b) * 2.0 * (1.0 + r).powf(1.0 - 3.0 * b) / (3.0 * b - 1.0)
        }
        IntegralLemma::Gtv { b1, b2 } => {
            let (al, be) = (t[0], t[1]);
            let mid = 0.5 * (al + be);
            let r = 200.0 + (al - be).abs();
            let bb = b1 + b2;
            simpson(
                |y| jbr(y - al, -2.0 * b1) * jbr(y - be, -2.0 * b2),
                mid - r,
                mid + r,
                100_000,
            ) + 2.0 * (1.0 + r).powf(1.0 - 2.0 * bb) / (2.0 * bb - 1.0)
        }
        IntegralLemma::Holmer { b } => {
            // substitute u = sqrt(|alpha - x|) on each side of the singularity
            let (al, be) = (t[0], t[1]);
            let e = 1.0 - 4.0 * b;
            let mut acc = 0.0;
            if al > -be {
                // x in [-beta, min(beta, alpha)], x = alpha - u^2
                let (u0, u1) = ((al - be).max(0.0).sqrt(), (al + be).sqrt());
                if u1 > u0 {
                    acc += simpson(|u| 2.0 * jbr(al - u * u, e), u0, u1, 20_000);
                }
            }
            if al < be {
                // x in [max(-beta, alpha), beta], x = alpha + u^2
                let (u0, u1) = ((-be - al).max(0.0).sqrt(), (be - al).sqrt());
                if u1 > u0 {
                    acc += simpson(|u| 2.0 * jbr(al + u * u, e), u0, u1, 20_000);
                }
            }
            acc
        }
    }
}

fn claimed_bound(lemma: IntegralLemma, t: &[f64; 3]) -> f64 {
    match lemma {
        IntegralLemma::Quadratic { .. } | IntegralLemma::Cubic { .. } => 1.0,
        IntegralLemma::Gtv { b1, b2 } => jbr(t[0] - t[1], 1.0 - 2.0 * (b1 + b2)),
        IntegralLemma::Holmer { b } => (1.0 + t[1]).powf(2.0 - 4.0 * b) * jbr(t[0], -0.5),
    }
}

/// Quadrature check of one integral lemma over sampled parameter tuples:
/// reports the sup of integral/claimed-bound ratios and flags tuples beyond
/// the headroom factor. Out-of-range exponents are refused.
pub fn integral_bound_check(
    lemma: IntegralLemma,
    samples: &[[f64; 3]],
    headroom: f64,
) -> Result<SupReport> {
    match lemma {
        IntegralLemma::Quadratic { b } => {
            if b <= 0.5 {
                return Err(Error::HypothesisViolated("quadratic-2.5 requires b > 1/2".into()));
            }
        }
        IntegralLemma::Cubic { b } => {
            if b <= 1.0 / 3.0 {
                return Err(Error::HypothesisViolated("cubic-2.5 requires b > 1/3".into()));
            }
        }
        IntegralLemma::Gtv { b1, b2 } => {
            if !(0.0..0.5).contains(&b1) || !(0.0..0.5).contains(&b2) || b1 + b2 <= 0.5 {
                return Err(Error::HypothesisViolated(
                    "gtv-2.7 requires 0 <= b1, b2 < 1/2 and b1 + b2 > 1/2".into(),
                ));
            }
        }
        IntegralLemma::Holmer { b } => {
            if b >= 0.5 {
                return Err(Error::HypothesisViolated("holmer-2.8 requires b < 1/2".into()));
            }
        }
    }
    if samples.is_empty() {
        return Err(Error::InvalidInput("at least one parameter sample required".into()));
    }
    let ratios: Vec<f64> = par::map_indexed(samples.len(), |i| {
        integral_value(lemma, &samples[i]) / claimed_bound(lemma, &samples[i])
    });
    let (mut sup, mut worst) = (0.0f64, samples[0]);
    let mut flagged = 0;
    for (r, t) in ratios.iter().zip(samples) {
        if *r > sup {
            sup = *r;
            worst = *t;
        }
        if *r > headroom {
            flagged += 1;
        }
    }
    Ok(SupReport { sup, worst, samples: samples.len(), flagged })
}

/// Slope diagnostics of the time-localization estimate
/// `||psi_T w||_{X^{s,b'}} <= c T^{b-b'} ||w||_{X^{s,b}}`.
#[derive(Debug, Clone)]
pub struct SlopeReport {
    pub ts: Vec<f64>,
    pub norms: Vec<f64>,
    /// Fitted log-log slope; `None` when a norm vanishes.
    pub slope: Option<f64>,
    /// Expected exponent `b - b'`.
    pub target: f64,
}

/// Evaluates `||psi_T w||_{X^{s,b'}}` over the given `T` sweep and fits the
/// log-log slope, to be compared with the predicted `b - b'`.
pub fn time_localization_check(
    grid: &SpaceTimeGrid,
    w: &SampledField,
    s: f64,
    b: f64,
    bprime: f64,
    ts: &[f64],
) -> Result<SlopeReport> {
    let ordered = (0.0 <= bprime && bprime < b && b < 0.5)
        || (-0.5 < bprime && bprime < b && b <= 0.0);
    if !ordered {
        return Err(Error::HypothesisViolated(
            "time localization requires 0 <= b' < b < 1/2 or -1/2 < b' < b <= 0".into(),
        ));
    }
    if ts.iter().any(|&t| t <= 0.0) {
        return Err(Error::InvalidInput("T sweep values must be positive".into()));
    }
    let norms: Vec<f64> = par::map_indexed(ts.len(), |i| {
        let big_t = ts[i];
        let mut cut = w.clone();
        for ti in 0..grid.nt {
            let c = cutoff_psi_t(grid.t_at(ti), big_t).unwrap();
            for j in 0..grid.nx {
                cut.values[(j, ti)] *= c;
            }
        }
        bourgain_norm(grid, &cut, NormSpace::X, s, bprime)
    });
    let slope = if norms.iter().all(|&n| n > 0.0) && ts.len() >= 2 {
        let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
        let ys: Vec<f64> = norms.iter().map(|n| n.ln()).collect();
        let n = xs.len() as f64;
        let (sx, sy) = (xs.iter().sum::<f64>(), ys.iter().sum::<f64>());
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
        Some((n * sxy - sx * sy) / (n * sxx - sx * sx))
    } else {
        None
    };
    Ok(SlopeReport { ts: ts.to_vec(), norms, slope, target: b - bprime })
}
