//! Named analytic profiles with closed-form derivatives, used for initial
//! conditions and manufactured states.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::state::State;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Uniform {
        value: f64,
    },
    /// `mean + amplitude * sin(2 pi wavenumber x + phase)`.
    Sine {
        mean: f64,
        amplitude: f64,
        wavenumber: f64,
        #[serde(default)]
        phase: f64,
    },
    /// `base + amplitude * exp(-((x - center) / width)^2)`.
    Gaussian {
        base: f64,
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// `sum_k coeffs[k] x^k`.
    Polynomial {
        coeffs: Vec<f64>,
    },
}

impl Profile {
    pub fn uniform(value: f64) -> Self {
        Profile::Uniform { value }
    }

    pub fn sine(mean: f64, amplitude: f64, wavenumber: f64) -> Self {
        Profile::Sine {
            mean,
            amplitude,
            wavenumber,
            phase: 0.0,
        }
    }

    pub fn cosine(mean: f64, amplitude: f64, wavenumber: f64) -> Self {
        Profile::Sine {
            mean,
            amplitude,
            wavenumber,
            phase: 0.5 * PI,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |x: f64| x.is_finite();
        let ok = match self {
            Profile::Uniform { value } => finite(*value),
            Profile::Sine {
                mean,
                amplitude,
                wavenumber,
                phase,
            } => [*mean, *amplitude, *wavenumber, *phase].into_iter().all(finite),
            Profile::Gaussian {
                base,
                amplitude,
                center,
                width,
            } => [*base, *amplitude, *center].into_iter().all(finite) && *width > 0.0,
            Profile::Polynomial { coeffs } => coeffs.iter().all(|c| finite(*c)),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::config(format!("invalid profile parameters: {self:?}")))
        }
    }

    /// Value and first two derivatives at `x`.
    pub fn eval(&self, x: f64) -> [f64; 3] {
        match self {
            Profile::Uniform { value } => [*value, 0.0, 0.0],
            Profile::Sine {
                mean,
                amplitude,
                wavenumber,
                phase,
            } => {
                let k = 2.0 * PI * wavenumber;
                let (s, c) = (k * x + phase).sin_cos();
                [mean + amplitude * s, amplitude * k * c, -amplitude * k * k * s]
            }
            Profile::Gaussian {
                base,
                amplitude,
                center,
                width,
            } => {
                let xi = (x - center) / width;
                let g = amplitude * (-xi * xi).exp();
                let d1 = -2.0 * xi / width * g;
                let d2 = (4.0 * xi * xi - 2.0) / (width * width) * g;
                [base + g, d1, d2]
            }
            Profile::Polynomial { coeffs } => {
                let mut out = [0.0; 3];
                for c in coeffs.iter().rev() {
                    out[2] = out[2] * x + 2.0 * out[1];
                    out[1] = out[1] * x + out[0];
                    out[0] = out[0] * x + c;
                }
                out
            }
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval(x)[0]
    }
}

/// Analytic `(rho, M, u)` fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldProfiles {
    pub rho: Profile,
    #[serde(rename = "m")]
    pub mom: Profile,
    pub u: Profile,
}

impl FieldProfiles {
    pub fn new(rho: Profile, mom: Profile, u: Profile) -> Self {
        FieldProfiles { rho, mom, u }
    }

    pub fn validate(&self) -> Result<()> {
        self.rho.validate()?;
        self.mom.validate()?;
        self.u.validate()
    }

    /// Nodal interpolant on `mesh`.
    pub fn interpolate(&self, mesh: &Mesh) -> State {
        State::new(
            mesh.interpolate_fn(|x| self.rho.value(x)),
            mesh.interpolate_fn(|x| self.mom.value(x)),
            mesh.interpolate_fn(|x| self.u.value(x)),
        )
        .expect("interpolants share the node count")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fd(p: &Profile, x: f64) -> [f64; 2] {
        let h = 1e-4;
        let f = |x| p.value(x);
        [
            (f(x + h) - f(x - h)) / (2.0 * h),
            (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h),
        ]
    }

    #[test]
    fn derivatives_match_differences() {
        let profiles = [
            Profile::uniform(2.0),
            Profile::sine(1.0, 0.3, 2.0),
            Profile::cosine(1.0, 0.3, 1.0),
            Profile::Gaussian {
                base: 1.0,
                amplitude: 0.5,
                center: 0.4,
                width: 0.2,
            },
            Profile::Polynomial {
                coeffs: vec![1.0, 2.0, 1.0, -0.5],
            },
        ];
        for p in &profiles {
            for x in [0.1, 0.37, 0.8] {
                let [_, d1, d2] = p.eval(x);
                let [f1, f2] = fd(p, x);
                assert_relative_eq!(d1, f1, epsilon = 1e-6, max_relative = 1e-6);
                assert_relative_eq!(d2, f2, epsilon = 1e-4, max_relative = 1e-5);
            }
        }
    }

    #[test]
    fn polynomial_values() {
        let p = Profile::Polynomial {
            coeffs: vec![1.0, 2.0, 1.0],
        };
        assert_eq!(p.eval(1.0), [4.0, 4.0, 2.0]);
        assert_eq!(Profile::Polynomial { coeffs: vec![] }.eval(3.0), [0.0; 3]);
    }

    #[test]
    fn gaussian_width_must_be_positive() {
        let g = Profile::Gaussian {
            base: 1.0,
            amplitude: 1.0,
            center: 0.0,
            width: 0.0,
        };
        assert!(g.validate().is_err());
        assert!(Profile::sine(1.0, f64::NAN, 1.0).validate().is_err());
    }
}
