//! Named analytic data profiles used for reproducible experiments: smooth
//! bumps for initial data and boundary traces.  The half-line samplers follow
//! the node layout of `SpaceTimeGrid::restrict_half_line`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::grid::{Side, SpaceTimeGrid, TimeTrace};
use crate::propagators::airy_function;

/// A named analytic profile with parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    /// `amplitude * exp(-((x - center)/width)^2)`
    Gaussian { amplitude: f64, center: f64, width: f64 },
    /// `amplitude * sech((x - center)/width)`
    Sech { amplitude: f64, center: f64, width: f64 },
    /// `amplitude * Ai((x - center)/width) * exp(-((x - center)/(4 width))^2)`
    AiryBump { amplitude: f64, center: f64, width: f64 },
    /// `amplitude * x^degree * exp(-rate x)` for `x >= 0`, zero otherwise.
    PolyExp { amplitude: f64, degree: u32, rate: f64 },
}

impl Profile {
    /// Builds a profile from its CLI name and parameter list.
    pub fn from_name(name: &str, params: &[f64]) -> Result<Profile> {
        let need = |n: usize| -> Result<()> {
            if params.len() != n {
                return Err(Error::Validation(format!(
                    "profile {name} takes {n} parameters, got {}",
                    params.len()
                )));
            }
            Ok(())
        };
        match name {
            "gaussian" => {
                need(3)?;
                Ok(Profile::Gaussian { amplitude: params[0], center: params[1], width: params[2] })
            }
            "sech" => {
                need(3)?;
                Ok(Profile::Sech { amplitude: params[0], center: params[1], width: params[2] })
            }
            "airy-bump" => {
                need(3)?;
                Ok(Profile::AiryBump { amplitude: params[0], center: params[1], width: params[2] })
            }
            "poly-exp" => {
                need(3)?;
                if params[1] < 0.0 || params[1].fract() != 0.0 {
                    return Err(Error::Validation(
                        "poly-exp degree must be a nonnegative integer".into(),
                    ));
                }
                Ok(Profile::PolyExp {
                    amplitude: params[0],
                    degree: params[1] as u32,
                    rate: params[2],
                })
            }
            _ => Err(Error::Validation(format!("unknown profile name: {name}"))),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Profile::Gaussian { amplitude, center, width } => {
                let z = (x - center) / width;
                amplitude * (-z * z).exp()
            }
            Profile::Sech { amplitude, center, width } => {
                let z = (x - center) / width;
                amplitude / z.cosh()
            }
            Profile::AiryBump { amplitude, center, width } => {
                let z = (x - center) / width;
                let env = (-(z / 4.0) * (z / 4.0)).exp();
                amplitude * airy_function(z).unwrap_or(0.0) * env
            }
            Profile::PolyExp { amplitude, degree, rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    amplitude * x.powi(degree as i32) * (-rate * x).exp()
                }
            }
        }
    }

    /// Samples the profile on the half-line nodes of one side.
    pub fn sample_half_line(&self, grid: &SpaceTimeGrid, side: Side) -> Vec<C64> {
        let j0 = grid.x0_index();
        let idx: Vec<usize> = match side {
            Side::Right => (j0..grid.nx).collect(),
            Side::Left => (0..=j0).collect(),
        };
        idx.into_iter()
            .map(|j| C64::new(self.eval(grid.x_at(j)), 0.0))
            .collect()
    }

    /// Samples the profile on the time grid as a boundary trace.
    pub fn sample_trace(&self, grid: &SpaceTimeGrid) -> TimeTrace {
        TimeTrace::nonneg(
            (0..grid.nt)
                .map(|i| C64::new(self.eval(grid.t_at(i)), 0.0))
                .collect(),
        )
    }
}
