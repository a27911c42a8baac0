//! TOML run configuration: schema types, strict parsing (unknown keys are
//! rejected with the offending key named), and assembly of library inputs.

use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use serde::Deserialize;

use skdv::bourgain::{classify_region, default_params, EstimateParams, RegionTag, RegularityPair};
use skdv::grid::{Side, SpaceTimeGrid, TimeTrace};
use skdv::profiles::Profile;
use skdv::solver::{IBVPData, SolverConfig};

use crate::CliError;

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: Option<GridBlock>,
    pub problem: Option<ProblemBlock>,
    pub solver: Option<SolverBlock>,
    pub harness: Option<HarnessBlock>,
    pub sweep: Option<SweepBlock>,
    pub output: Option<OutputBlock>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub l: f64,
    pub nx: usize,
    pub t_max: f64,
    pub nt: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemBlock {
    pub side: String,
    pub s: f64,
    pub k: f64,
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default = "one")]
    pub gamma: f64,
    pub u0: DataSpec,
    pub v0: DataSpec,
    pub f: DataSpec,
    pub g: DataSpec,
    pub h: Option<DataSpec>,
}

fn one() -> f64 {
    1.0
}

/// A data specification: either a named analytic profile with parameters or
/// a plain-text sample file (one `re [im]` pair per line).
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    pub profile: Option<String>,
    pub params: Option<Vec<f64>>,
    pub file: Option<PathBuf>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SolverBlock {
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub delta: Option<f64>,
    pub t_local: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub alpha: Option<f64>,
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub lambda3: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnessBlock {
    pub which: Option<String>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub s: Option<f64>,
    pub k: Option<f64>,
    pub side: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub side: String,
    pub s: Vec<f64>,
    pub k: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub dir: Option<PathBuf>,
    pub formats: Option<Vec<String>>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<RunConfig, CliError> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    CliError::validation(format!("cannot read config {}: {e}", p.display()))
                })?;
                toml::from_str(&text).map_err(|e| {
                    CliError::validation(format!("malformed config {}: {e}", p.display()))
                })
            }
        }
    }

    pub fn grid(&self) -> Result<SpaceTimeGrid, CliError> {
        let b = self
            .grid
            .as_ref()
            .ok_or_else(|| CliError::validation("config is missing the [grid] block".into()))?;
        SpaceTimeGrid::new(b.l, b.nx, b.t_max, b.nt).map_err(CliError::from)
    }

    pub fn output_dir(&self, flag: Option<&Path>) -> PathBuf {
        if let Some(d) = flag {
            return d.to_path_buf();
        }
        self.output
            .as_ref()
            .and_then(|o| o.dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn wants_format(&self, fmt: &str) -> bool {
        match self.output.as_ref().and_then(|o| o.formats.as_ref()) {
            None => fmt != "svg",
            Some(list) => list.iter().any(|f| f == fmt),
        }
    }
}

pub fn parse_side(name: &str) -> Result<Side, CliError> {
    match name {
        "right" => Ok(Side::Right),
        "left" => Ok(Side::Left),
        other => Err(CliError::validation(format!(
            "side must be \"right\" or \"left\", got \"{other}\""
        ))),
    }
}

impl DataSpec {
    fn build_profile(&self, what: &str) -> Result<Option<Profile>, CliError> {
        match (&self.profile, &self.file) {
            (Some(_), Some(_)) => Err(CliError::validation(format!(
                "data spec {what} sets both profile and file; choose one"
            ))),
            (None, None) => Err(CliError::validation(format!(
                "data spec {what} needs either profile or file"
            ))),
            (Some(name), None) => {
                let params = self.params.clone().unwrap_or_default();
                Ok(Some(Profile::from_name(name, &params)?))
            }
            (None, Some(_)) => {
                if self.params.is_some() {
                    return Err(CliError::validation(format!(
                        "data spec {what} is file-based and takes no params"
                    )));
                }
                Ok(None)
            }
        }
    }

    fn read_samples(&self, what: &str, expect: usize) -> Result<Vec<C64>, CliError> {
        let path = self.file.as_ref().expect("caller checked the file variant");
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::validation(format!("cannot read sample file {}: {e}", path.display()))
        })?;
        let mut out = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            let parse = |v: &str| -> Result<f64, CliError> {
                v.parse().map_err(|_| {
                    CliError::validation(format!(
                        "bad number \"{v}\" at line {} of {}",
                        ln + 1,
                        path.display()
                    ))
                })
            };
            let (re, im) = match cols.len() {
                1 => (parse(cols[0])?, 0.0),
                2 => (parse(cols[0])?, parse(cols[1])?),
                n => {
                    return Err(CliError::validation(format!(
                        "expected 1 or 2 columns at line {} of {}, got {n}",
                        ln + 1,
                        path.display()
                    )))
                }
            };
            out.push(C64::new(re, im));
        }
        if out.len() != expect {
            return Err(CliError::validation(format!(
                "sample file for {what} has {} rows, the grid needs {expect}",
                out.len()
            )));
        }
        Ok(out)
    }

    pub fn half_line(
        &self,
        what: &str,
        grid: &SpaceTimeGrid,
        side: Side,
    ) -> Result<Vec<C64>, CliError> {
        let expect = match side {
            Side::Right => grid.nx - grid.x0_index(),
            Side::Left => grid.x0_index() + 1,
        };
        match self.build_profile(what)? {
            Some(p) => Ok(p.sample_half_line(grid, side)),
            None => self.read_samples(what, expect),
        }
    }

    pub fn trace(&self, what: &str, grid: &SpaceTimeGrid) -> Result<TimeTrace, CliError> {
        match self.build_profile(what)? {
            Some(p) => Ok(p.sample_trace(grid)),
            None => Ok(TimeTrace::nonneg(self.read_samples(what, grid.nt)?)),
        }
    }
}

/// Builds the IBVP data block from the config.
pub fn build_data(cfg: &RunConfig, grid: &SpaceTimeGrid) -> Result<IBVPData, CliError> {
    let p = cfg
        .problem
        .as_ref()
        .ok_or_else(|| CliError::validation("config is missing the [problem] block".into()))?;
    let side = parse_side(&p.side)?;
    let h = match &p.h {
        Some(spec) => Some(spec.trace("h", grid)?),
        None => None,
    };
    Ok(IBVPData {
        side,
        u0: p.u0.half_line("u0", grid, side)?,
        v0: p.v0.half_line("v0", grid, side)?,
        f: p.f.trace("f", grid)?,
        g: p.g.trace("g", grid)?,
        h,
        alpha_c: p.alpha,
        beta_c: p.beta,
        gamma_c: p.gamma,
        reg: RegularityPair::new(p.s, p.k),
    })
}

/// Region-default estimate parameters with any explicit [solver] overrides
/// patched on top.
pub fn build_params(
    cfg: &RunConfig,
    side: Side,
    reg: &RegularityPair,
) -> Result<EstimateParams, CliError> {
    let region = classify_region(side, reg.s, reg.k);
    if region == RegionTag::None {
        return Err(CliError::validation(format!(
            "(s, k) = ({}, {}) lies outside every admissible region of the {:?} half-line",
            reg.s, reg.k, side
        )));
    }
    let mut params = default_params(region, reg)?;
    if let Some(s) = &cfg.solver {
        if let Some(v) = s.a {
            params.a = v;
        }
        if let Some(v) = s.b {
            params.b = v;
        }
        if let Some(v) = s.alpha {
            params.alpha = v;
        }
        if let Some(v) = s.lambda1 {
            params.lambda1 = v;
        }
        if let Some(v) = s.lambda2 {
            params.lambda2 = v;
        }
        if let Some(v) = s.lambda3 {
            params.lambda3 = v;
        }
    }
    Ok(params)
}

/// Builds the solver configuration (grid, tolerances, estimate parameters).
pub fn build_solver_config(
    cfg: &RunConfig,
    grid: &SpaceTimeGrid,
    side: Side,
    reg: &RegularityPair,
) -> Result<SolverConfig, CliError> {
    let params = build_params(cfg, side, reg)?;
    let s = cfg.solver.as_ref();
    Ok(SolverConfig {
        grid: grid.clone(),
        t_local: s
            .and_then(|s| s.t_local)
            .unwrap_or(grid.t_max / 4.0),
        tol: s.and_then(|s| s.tol).unwrap_or(1e-8),
        max_iter: s.and_then(|s| s.max_iter).unwrap_or(30),
        params,
        delta: s.and_then(|s| s.delta).unwrap_or(1e3),
    })
}
