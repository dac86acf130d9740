use serde::Serialize;

use super::integrate::StepRecord;
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::state::State;
use crate::thermo::Material;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BalanceReport {
    pub t: f64,
    pub h: f64,
    pub s: f64,
    pub e: f64,
    pub dh_dt: f64,
    pub ds_dt: f64,
    pub de_dt: f64,
    pub pair_h: f64,
    pub pair_s: f64,
    pub pair_e: f64,
    /// `<dE, C D C^* dE>`, the exergy destruction rate.
    pub dissipation: f64,
    /// `dH/dt - <y_H, u>`; zero for an exact energy balance.
    pub res_h: f64,
    /// `dS/dt - <y_S, u>`; the entropy production, nonnegative.
    pub res_s: f64,
    /// `dE/dt - <y_E, u>`; nonpositive, equal to `-dissipation`.
    pub res_e: f64,
}

impl BalanceReport {
    pub(crate) fn from_record(r: &StepRecord, rate: [f64; 3]) -> Self {
        let [dh, ds, de] = rate;
        BalanceReport {
            t: r.t,
            h: r.h,
            s: r.s,
            e: r.e,
            dh_dt: dh,
            ds_dt: ds,
            de_dt: de,
            pair_h: r.pair_h,
            pair_s: r.pair_s,
            pair_e: r.pair_e,
            dissipation: r.dissipation,
            res_h: dh - r.pair_h,
            res_s: ds - r.pair_s,
            res_e: de - r.pair_e,
        }
    }

    pub fn has_rates(&self) -> bool {
        self.dh_dt.is_finite() && self.ds_dt.is_finite() && self.de_dt.is_finite()
    }
}

/// Second-order rates of `(H, S, E)` at every sample: centered inside,
/// one-sided three-point at the ends, NaN with fewer than three samples.
pub(crate) fn rates(steps: &[StepRecord], dt: f64) -> Vec<[f64; 3]> {
    let n = steps.len();
    let get = |k: usize| [steps[k].h, steps[k].s, steps[k].e];
    (0..n)
        .map(|k| {
            if n < 3 {
                return [f64::NAN; 3];
            }
            let (a, b, c, w) = if k == 0 {
                (get(0), get(1), get(2), [-3.0, 4.0, -1.0])
            } else if k == n - 1 {
                (get(n - 3), get(n - 2), get(n - 1), [1.0, -4.0, 3.0])
            } else {
                (get(k - 1), get(k), get(k + 1), [-1.0, 0.0, 1.0])
            };
            [0, 1, 2].map(|i| (w[0] * a[i] + w[1] * b[i] + w[2] * c[i]) / (2.0 * dt))
        })
        .collect()
}

/// Absolute tolerances for the three balance laws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalanceTolerance {
    pub energy: f64,
    pub entropy: f64,
    pub exergy: f64,
}

impl BalanceTolerance {
    pub fn uniform(tol: f64) -> Self {
        BalanceTolerance {
            energy: tol,
            entropy: tol,
            exergy: tol,
        }
    }

    /// `4 (dt^2 + h^2) scale`.
    pub fn combined(dt: f64, h: f64, scale: f64) -> Self {
        Self::uniform(4.0 * (dt * dt + h * h) * scale)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BalanceVerdict {
    /// `|dH/dt - <y_H,u>| <= tol`.
    pub energy: bool,
    /// `dS/dt >= <y_S,u> - tol`.
    pub entropy: bool,
    /// `dE/dt <= <y_E,u> + tol`.
    pub exergy: bool,
    /// `|dE/dt - <y_E,u> + dissipation| <= tol`.
    pub exergy_identity: bool,
}

impl BalanceVerdict {
    pub fn all(&self) -> bool {
        self.energy && self.entropy && self.exergy && self.exergy_identity
    }
}

/// Verdicts for one report; reports without rates pass vacuously.
pub fn balance_check(report: &BalanceReport, tol: &BalanceTolerance) -> BalanceVerdict {
    if !report.has_rates() {
        return BalanceVerdict {
            energy: true,
            entropy: true,
            exergy: true,
            exergy_identity: true,
        };
    }
    BalanceVerdict {
        energy: report.res_h.abs() <= tol.energy,
        entropy: report.res_s >= -tol.entropy,
        exergy: report.res_e <= tol.exergy,
        exergy_identity: (report.res_e + report.dissipation).abs() <= tol.exergy,
    }
}

/// Steps whose entropy decreased by more than `rel * |S|`, as indices
/// into `steps`.
pub fn entropy_monotone(steps: &[StepRecord], rel: f64) -> Vec<usize> {
    steps
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1].s - w[0].s < -rel * w[0].s.abs())
        .map(|(k, _)| k + 1)
        .collect()
}

/// `int kappa (tau0 / tau^2) (d(tau / tau0)/dx)^2 dx` by quadrature.
pub fn exergy_dissipation(mesh: &Mesh, z: &State, m: &Material) -> Result<f64> {
    if !m.is_inviscid() {
        return Err(Error::config("exergy dissipation requires eta = zeta = 0"));
    }
    let qp = mesh.eval_with_gradients(z, m)?;
    Ok(qp
        .iter()
        .map(|d| {
            let force = d.grad.tau / m.tau0;
            d.weight * m.kappa * m.tau0 / (d.thermo.tau * d.thermo.tau) * force * force
        })
        .sum())
}
