//! Strong-form finite-difference solver on a periodic collocation grid.
//!
//! Second-order central differences in space and classical RK4 in time. It
//! shares only [`Material`] and the equation of state with the Galerkin
//! path and serves as an independent oracle for it.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::state::State;
use crate::thermo::{eval_eos, Material};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdGrid {
    a: f64,
    b: f64,
    n: usize,
}

impl FdGrid {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(b > a) || !a.is_finite() || !b.is_finite() {
            return Err(Error::config(format!("invalid interval [{a}, {b}]")));
        }
        if n < 3 {
            return Err(Error::config("finite-difference grid needs at least 3 points"));
        }
        Ok(FdGrid { a, b, n })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / self.n as f64
    }

    /// Collocation points `a + i h`, `i < n`; `b` is identified with `a`.
    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.a + i as f64 * self.h()).collect()
    }
}

/// Point values of `(rho, M, u)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdFields {
    pub rho: Vec<f64>,
    pub mom: Vec<f64>,
    pub u: Vec<f64>,
}

impl FdFields {
    pub fn sample<F: Fn(f64) -> [f64; 3]>(grid: &FdGrid, f: F) -> Self {
        let vals: Vec<[f64; 3]> = grid.points().into_iter().map(f).collect();
        FdFields {
            rho: vals.iter().map(|v| v[0]).collect(),
            mom: vals.iter().map(|v| v[1]).collect(),
            u: vals.iter().map(|v| v[2]).collect(),
        }
    }

    fn axpy(&self, s: f64, d: &FdFields) -> FdFields {
        let comb = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a + s * b).collect();
        FdFields {
            rho: comb(&self.rho, &d.rho),
            mom: comb(&self.mom, &d.mom),
            u: comb(&self.u, &d.u),
        }
    }

    fn len(&self) -> usize {
        self.rho.len()
    }
}

/// Central-difference time derivatives of the mass, momentum and
/// internal-energy balances with `T = -p + sigma`, `sigma = (lambda + 2 eta)
/// v'` when `viscous`, and `q = -kappa theta'`.
pub fn fd_rhs(grid: &FdGrid, f: &FdFields, m: &Material, viscous: bool) -> Result<FdFields> {
    let n = grid.n();
    if f.len() != n || f.mom.len() != n || f.u.len() != n {
        return Err(Error::config("field length does not match the grid"));
    }
    let h = grid.h();
    let mut p = vec![0.0; n];
    let mut theta = vec![0.0; n];
    let mut v = vec![0.0; n];
    for i in 0..n {
        let eos = eval_eos(f.rho[i], f.u[i], m)?;
        p[i] = eos.p;
        theta[i] = eos.theta;
        v[i] = f.mom[i] / f.rho[i];
    }
    let nb = |i: usize| ((i + n - 1) % n, (i + 1) % n);
    let d = |g: &[f64], i: usize| {
        let (l, r) = nb(i);
        (g[r] - g[l]) / (2.0 * h)
    };
    let mv: Vec<f64> = (0..n).map(|i| f.mom[i] * v[i]).collect();
    let uv: Vec<f64> = (0..n).map(|i| f.u[i] * v[i]).collect();
    let visc = if viscous { m.longitudinal_viscosity() } else { 0.0 };
    // Stress at i + 1/2.
    let sigma_half: Vec<f64> = (0..n).map(|i| visc * (v[(i + 1) % n] - v[i]) / h).collect();

    let mut out = FdFields {
        rho: vec![0.0; n],
        mom: vec![0.0; n],
        u: vec![0.0; n],
    };
    for i in 0..n {
        let (l, r) = nb(i);
        let dv = d(&v, i);
        out.rho[i] = -d(&f.mom, i);
        out.mom[i] = -d(&mv, i) - d(&p, i) + (sigma_half[i] - sigma_half[l]) / h;
        out.u[i] = -d(&uv, i) - p[i] * dv
            + m.kappa * (theta[r] - 2.0 * theta[i] + theta[l]) / (h * h)
            + visc * dv * dv;
    }
    Ok(out)
}

/// Snapshots of a run at fixed times.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sampled {
    pub a: f64,
    pub b: f64,
    pub x: Vec<f64>,
    pub times: Vec<f64>,
    pub fields: Vec<FdFields>,
}

impl Sampled {
    /// Wraps nodal states that live at `x` on the periodic interval `[a, b)`.
    pub fn from_states(a: f64, b: f64, x: Vec<f64>, times: Vec<f64>, states: &[State]) -> Self {
        let fields = states
            .iter()
            .map(|z| FdFields {
                rho: z.rho().to_vec(),
                mom: z.mom().to_vec(),
                u: z.u().to_vec(),
            })
            .collect();
        Sampled {
            a,
            b,
            x,
            times,
            fields,
        }
    }

    /// Periodic linear interpolation of snapshot `k` at `xs`.
    fn resample(&self, k: usize, xs: &[f64]) -> FdFields {
        let len = self.b - self.a;
        let n = self.x.len();
        let h = len / n as f64;
        let at = |g: &[f64], x: f64| {
            let s = (x - self.a).rem_euclid(len) / h;
            let i = (s.floor() as usize).min(n - 1);
            let t = s - i as f64;
            (1.0 - t) * g[i] + t * g[(i + 1) % n]
        };
        let f = &self.fields[k];
        FdFields {
            rho: xs.iter().map(|&x| at(&f.rho, x)).collect(),
            mom: xs.iter().map(|&x| at(&f.mom, x)).collect(),
            u: xs.iter().map(|&x| at(&f.u, x)).collect(),
        }
    }
}

/// Integrates `fd_rhs` with RK4, storing every `stride`-th step and the last.
pub fn fd_run(
    grid: &FdGrid,
    f0: &FdFields,
    m: &Material,
    viscous: bool,
    dt: f64,
    t_final: f64,
    output_interval: f64,
) -> Result<Sampled> {
    if !(dt > 0.0) || !(t_final >= 0.0) {
        return Err(Error::config("dt must be positive and t_final nonnegative"));
    }
    let steps = (t_final / dt).round() as usize;
    let dt = if steps == 0 { dt } else { t_final / steps as f64 };
    let stride = ((output_interval / dt).round() as usize).max(1);
    let mut out = Sampled {
        a: grid.a(),
        b: grid.b(),
        x: grid.points(),
        times: vec![0.0],
        fields: vec![f0.clone()],
    };
    let mut f = f0.clone();
    for k in 1..=steps {
        let k1 = fd_rhs(grid, &f, m, viscous)?;
        let k2 = fd_rhs(grid, &f.axpy(0.5 * dt, &k1), m, viscous)?;
        let k3 = fd_rhs(grid, &f.axpy(0.5 * dt, &k2), m, viscous)?;
        let k4 = fd_rhs(grid, &f.axpy(dt, &k3), m, viscous)?;
        f = f
            .axpy(dt / 6.0, &k1)
            .axpy(dt / 3.0, &k2)
            .axpy(dt / 3.0, &k3)
            .axpy(dt / 6.0, &k4);
        if k % stride == 0 || k == steps {
            out.times.push(k as f64 * dt);
            out.fields.push(f.clone());
        }
    }
    Ok(out)
}

/// L2 differences per field at one output time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldErrors {
    pub t: f64,
    pub rho: f64,
    pub mom: f64,
    pub u: f64,
}

impl FieldErrors {
    pub fn max(&self) -> f64 {
        self.rho.max(self.mom).max(self.u)
    }
}

/// Resamples both runs onto the finer point set and returns the discrete
/// L2 difference of each field at each stored time.
pub fn compare(weak: &Sampled, fd: &Sampled) -> Result<Vec<FieldErrors>> {
    let tol = 1e-12 * (weak.b - weak.a).abs().max(1.0);
    if (weak.a - fd.a).abs() > tol || (weak.b - fd.b).abs() > tol {
        return Err(Error::config(format!(
            "intervals differ: [{}, {}] vs [{}, {}]",
            weak.a, weak.b, fd.a, fd.b
        )));
    }
    if weak.times.len() != fd.times.len()
        || weak
            .times
            .iter()
            .zip(&fd.times)
            .any(|(s, t)| (s - t).abs() > 1e-9 * t.abs().max(1.0))
    {
        return Err(Error::config("output times differ"));
    }
    let xs = if weak.x.len() >= fd.x.len() {
        &weak.x
    } else {
        &fd.x
    };
    let h = (weak.b - weak.a) / xs.len() as f64;
    let l2 = |p: &[f64], q: &[f64]| {
        (h * p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()).sqrt()
    };
    Ok((0..weak.times.len())
        .map(|k| {
            let p = weak.resample(k, xs);
            let q = fd.resample(k, xs);
            FieldErrors {
                t: weak.times[k],
                rho: l2(&p.rho, &q.rho),
                mom: l2(&p.mom, &q.mom),
                u: l2(&p.u, &q.u),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn gas(kappa: f64, eta: f64) -> Material {
        Material {
            c_v: 1.0,
            r_g: 1.0,
            s_ref: 0.0,
            kappa,
            eta,
            zeta: 0.0,
            tau0: 1.0,
        }
    }

    #[test]
    fn uniform_state_is_steady() {
        let grid = FdGrid::new(0.0, 1.0, 16).unwrap();
        let f = FdFields::sample(&grid, |_| [1.2, 0.0, 2.0]);
        let r = fd_rhs(&grid, &f, &gas(0.3, 0.2), true).unwrap();
        for v in r.rho.iter().chain(&r.mom).chain(&r.u) {
            assert_eq!(*v, 0.0);
        }
    }

    #[test]
    fn mass_and_momentum_telescope() {
        let grid = FdGrid::new(0.0, 1.0, 32).unwrap();
        let f = FdFields::sample(&grid, |x| {
            [
                1.0 + 0.3 * (2.0 * PI * x).sin(),
                0.2 * (4.0 * PI * x).cos(),
                1.5 + 0.2 * (2.0 * PI * x).cos(),
            ]
        });
        let r = fd_rhs(&grid, &f, &gas(0.1, 0.05), true).unwrap();
        let (dr, dm): (f64, f64) = (r.rho.iter().sum(), r.mom.iter().sum());
        assert!(dr.abs() * grid.h() < 1e-13);
        assert!(dm.abs() * grid.h() < 1e-13);
    }

    #[test]
    fn matches_analytic_derivatives() {
        // rho = 1, u = 1 + 0.1 sin(2 pi x), M = 0: only conduction acts and
        // u_t = kappa u'' with c_v = 1.
        let grid = FdGrid::new(0.0, 1.0, 64).unwrap();
        let f = FdFields::sample(&grid, |x| [1.0, 0.0, 1.0 + 0.1 * (2.0 * PI * x).sin()]);
        let kappa = 0.2;
        let r = fd_rhs(&grid, &f, &gas(kappa, 0.0), false).unwrap();
        for (x, ut) in grid.points().iter().zip(&r.u) {
            let exact = -kappa * 0.1 * 4.0 * PI * PI * (2.0 * PI * x).sin();
            assert!((ut - exact).abs() < 1e-2 * 0.1 * kappa * 4.0 * PI * PI);
        }
        // The momentum rate is the pressure gradient -R u'.
        for (x, mt) in grid.points().iter().zip(&r.mom) {
            let exact = -0.1 * 2.0 * PI * (2.0 * PI * x).cos();
            assert_relative_eq!(*mt, exact, epsilon = 2e-3);
        }
    }

    /// Amplitude of the `sin(2 pi x)` mode of `g` on the grid.
    fn sine_mode(grid: &FdGrid, g: &[f64]) -> f64 {
        let k = 2.0 * PI;
        let s: f64 = grid.points().iter().zip(g).map(|(x, v)| v * (k * x).sin()).sum();
        2.0 * s / grid.n() as f64
    }

    #[test]
    fn acoustic_phase_speed() {
        // Linearized about rho = 1, u = 1: M = eps sin(kx) cos(c k t) with
        // c^2 = gamma p / rho = 2.
        let grid = FdGrid::new(0.0, 1.0, 256).unwrap();
        let eps = 1e-4;
        let f0 = FdFields::sample(&grid, |x| [1.0, eps * (2.0 * PI * x).sin(), 1.0]);
        let t = 0.25;
        let run = fd_run(&grid, &f0, &gas(0.0, 0.0), false, 0.2 * grid.h(), t, t).unwrap();
        let a = sine_mode(&grid, &run.fields.last().unwrap().mom) / eps;
        let c = a.acos() / (2.0 * PI * t);
        let target = 2f64.sqrt();
        assert!((c - target).abs() / target < 0.05, "c = {c}");
    }

    #[test]
    fn heat_mode_decays_at_the_conduction_rate() {
        // A vanishing gas constant decouples pressure, leaving
        // u_t = kappa / (rho c_v) u_xx.
        let grid = FdGrid::new(0.0, 1.0, 256).unwrap();
        let mut m = gas(0.1, 0.0);
        m.r_g = 1e-10;
        let (rho, amp) = (2.0, 0.1);
        let f0 = FdFields::sample(&grid, |x| [rho, 0.0, 1.0 + amp * (2.0 * PI * x).sin()]);
        let t = 0.2;
        let run = fd_run(&grid, &f0, &m, false, 5e-5, t, t).unwrap();
        let measured = sine_mode(&grid, &run.fields.last().unwrap().u) / amp;
        let expected = (-m.kappa * 4.0 * PI * PI * t / (rho * m.c_v)).exp();
        assert!((measured - expected).abs() / expected < 0.02, "{measured} vs {expected}");
    }

    #[test]
    fn runs_conserve_mass_and_momentum() {
        let grid = FdGrid::new(0.0, 1.0, 64).unwrap();
        let f0 = FdFields::sample(&grid, |x| {
            [1.0 + 0.1 * (2.0 * PI * x).sin(), 0.05, 1.0 + 0.1 * (2.0 * PI * x).cos()]
        });
        let run = fd_run(&grid, &f0, &gas(0.05, 0.02), true, 1e-3, 0.05, 1e-3).unwrap();
        let total = |g: &[f64]| g.iter().sum::<f64>() * grid.h();
        for w in run.fields.windows(2) {
            assert!((total(&w[1].rho) - total(&w[0].rho)).abs() <= 1e-12);
            assert!((total(&w[1].mom) - total(&w[0].mom)).abs() <= 1e-12);
        }
    }

    #[test]
    fn rejects_inadmissible_fields() {
        let grid = FdGrid::new(0.0, 1.0, 4).unwrap();
        let f = FdFields::sample(&grid, |x| [x - 0.5, 0.0, 1.0]);
        assert!(matches!(fd_rhs(&grid, &f, &gas(0.0, 0.0), false), Err(Error::Domain(_))));
    }

    #[test]
    fn compare_identical_and_mismatched() {
        let grid = FdGrid::new(0.0, 1.0, 8).unwrap();
        let f = FdFields::sample(&grid, |x| [1.0 + 0.1 * x, 0.0, 1.0]);
        let run = fd_run(&grid, &f, &gas(0.1, 0.0), false, 0.01, 0.05, 0.05).unwrap();
        let errs = compare(&run, &run).unwrap();
        assert!(errs.iter().all(|e| e.max() == 0.0));
        let mut shifted = run.clone();
        shifted.b = 2.0;
        assert!(matches!(compare(&run, &shifted), Err(Error::Config(_))));
        let mut retimed = run.clone();
        retimed.times[1] = 0.04;
        assert!(matches!(compare(&run, &retimed), Err(Error::Config(_))));
    }

    #[test]
    fn resampling_is_exact_for_piecewise_linear_data() {
        let coarse = FdGrid::new(0.0, 1.0, 4).unwrap();
        let f = FdFields::sample(&coarse, |x| [1.0 + x, 0.0, 1.0]);
        let s = Sampled {
            a: 0.0,
            b: 1.0,
            x: coarse.points(),
            times: vec![0.0],
            fields: vec![f],
        };
        let r = s.resample(0, &[0.125, 0.5, 0.875]);
        assert_relative_eq!(r.rho[0], 1.125);
        assert_relative_eq!(r.rho[1], 1.5);
        // Between the last point and the periodic image of the first.
        assert_relative_eq!(r.rho[2], 0.5 * (1.75 + 1.0));
    }
}
