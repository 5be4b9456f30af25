//! Backward-Euler finite-volume solver for `∂_t u = div(φ'(|∇u|)/|∇u| ∇u) + f`
//! on rectangles with Dirichlet data, and its stationary counterpart.
//!
//! The degeneracy is regularised by evaluating the flux with the shifted
//! function `φ_ε`; `ε` follows a decreasing schedule.

pub(crate) mod field;
mod grid;
mod newton;
mod presets;
mod snapshot;
mod stencil;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orlicz::OrliczFunction;

pub use field::{discrete_fields, DerivedFields, ErrorNorms, GradOrField, Snapshot};
pub use grid::{Geometry, GridSpec};
pub use presets::{Barenblatt, DataSource, PresetInfo, PresetSpec, PRESETS};
pub use snapshot::{read_snapshot_binary, read_snapshot_csv, write_snapshot_binary, write_snapshot_csv, SnapshotHeader};
pub use stencil::FaceStencil;

use newton::{conjugate_gradient, norm, FaceState, Operator};

/// `ε_k = max(floor, start · factor^k)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsSchedule {
    pub start: f64,
    pub factor: f64,
    pub floor: f64,
}

impl Default for EpsSchedule {
    fn default() -> Self {
        Self {
            start: 1e-2,
            factor: 0.5,
            floor: 1e-8,
        }
    }
}

impl EpsSchedule {
    pub fn constant(eps: f64) -> Self {
        Self {
            start: eps,
            factor: 1.0,
            floor: eps,
        }
    }

    pub fn at(&self, k: usize) -> f64 {
        (self.start * self.factor.powi(k.min(10_000) as i32)).max(self.floor)
    }

    /// Same schedule with the floor divided by `d` (for ε-sensitivity runs).
    pub fn with_floor_divided(&self, d: f64) -> Self {
        Self {
            floor: self.floor / d,
            ..*self
        }
    }
}

/// Stopping rules of the nonlinear and linear solves.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Newton stops once the residual norm is below `tol · scale`.
    pub tol: f64,
    /// Accepted residual when the line search stalls at roundoff.
    pub floor_tol: f64,
    pub max_iterations: usize,
    pub cg_tol: f64,
    pub max_halvings: usize,
    pub picard_sweeps: usize,
    pub eps: EpsSchedule,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            floor_tol: 1e-8,
            max_iterations: 50,
            cg_tol: 1e-9,
            max_halvings: 20,
            picard_sweeps: 5,
            eps: EpsSchedule::default(),
        }
    }
}

/// Per-solve diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub t: f64,
    pub eps: f64,
    pub iterations: usize,
    pub picard_sweeps: usize,
    pub cg_iterations: usize,
    /// Residual norm before each iteration and after the last.
    pub residuals: Vec<f64>,
    pub scale: f64,
    /// Converged only to the roundoff floor.
    pub floor_accepted: bool,
    /// `Σ_f w_f φ_ε(|∇u|)` before and after the step (same `ε`).
    pub energy_before: f64,
    pub energy_after: f64,
}

/// Grid plus initial/boundary/forcing data.
#[derive(Clone)]
pub struct Problem {
    pub grid: GridSpec,
    pub data: Arc<dyn DataSource>,
}

impl Problem {
    pub fn new(grid: GridSpec, data: Arc<dyn DataSource>) -> Self {
        Self { grid, data }
    }

    pub fn from_preset(phi: &OrliczFunction, grid: GridSpec, preset: &PresetSpec, amplitude: f64, seed: u64) -> Result<Self> {
        let data = preset.build(phi, &grid, amplitude, seed)?;
        Ok(Self { grid, data })
    }

    /// Initial state sampled at cell centres.
    pub fn initial_state(&self, geo: &Geometry) -> Vec<f64> {
        let comps = geo.components;
        let mut u = vec![0.0; geo.len()];
        for cell in 0..geo.cell_count() {
            let x = geo.cell_center(cell);
            for c in 0..comps {
                u[cell * comps + c] = self.data.initial(x, c);
            }
        }
        u
    }

    fn forcing(&self, geo: &Geometry, t: f64) -> Vec<f64> {
        let comps = geo.components;
        let mut f = vec![0.0; geo.len()];
        if self.data.has_forcing() {
            for cell in 0..geo.cell_count() {
                let x = geo.cell_center(cell);
                for c in 0..comps {
                    f[cell * comps + c] = self.data.forcing(t, x, c);
                }
            }
        }
        f
    }
}

/// Reusable stencil and geometry for repeated implicit steps.
pub struct Stepper {
    pub geo: Geometry,
    pub stencil: FaceStencil,
    pub options: SolverOptions,
}

struct NewtonOutcome {
    iterations: usize,
    picard: usize,
    cg: usize,
    residuals: Vec<f64>,
    scale: f64,
    floor: bool,
}

impl Stepper {
    pub fn new(grid: &GridSpec, options: SolverOptions) -> Result<Self> {
        let geo = grid.geometry()?;
        let stencil = FaceStencil::new(&geo);
        Ok(Self { geo, stencil, options })
    }

    fn cg_limit(&self) -> usize {
        50 * (self.geo.len() as f64).sqrt() as usize + 500
    }

    fn boundary(&self, data: &dyn DataSource, t: f64) -> Vec<f64> {
        self.stencil.boundary_values(self.geo.components, |x, c| data.boundary(t, x, c))
    }

    fn residual(op: &Operator, st: &FaceState, inv_dt: f64, u: &[f64], u_prev: &[f64], f: &[f64]) -> Vec<f64> {
        let mut r = op.divergence(st);
        for i in 0..r.len() {
            r[i] += inv_dt * (u[i] - u_prev[i]) - f[i];
        }
        r
    }

    /// Damped Newton with Picard fallback on `inv_dt (u - u_prev) - f - div A(∇u) = 0`.
    #[allow(clippy::too_many_arguments)]
    fn newton(
        &self,
        op: &Operator,
        bvals: &[f64],
        inv_dt: f64,
        u_prev: &[f64],
        f: &[f64],
        u: &mut Vec<f64>,
        t: f64,
    ) -> Result<NewtonOutcome> {
        let o = &self.options;
        let mut st = op.face_state(u, bvals);
        let mut r = Self::residual(op, &st, inv_dt, u, u_prev, f);
        let mut rn = norm(&r);
        let scale = rn + inv_dt * norm(u_prev) + norm(f) + norm(&op.flux_magnitude(&st));
        let mut out = NewtonOutcome {
            iterations: 0,
            picard: 0,
            cg: 0,
            residuals: vec![rn],
            scale,
            floor: false,
        };
        let mut picard_left = 0usize;
        let cg_max = self.cg_limit();
        while rn > o.tol * scale {
            if !rn.is_finite() {
                return Err(Error::NumericalBlowup(format!("non-finite residual at t={t:e}")));
            }
            if out.iterations >= o.max_iterations {
                break;
            }
            out.iterations += 1;
            let picard = picard_left > 0;
            let rhs: Vec<f64> = r.iter().map(|x| -x).collect();
            let (delta, cg) = conjugate_gradient(op, &st, picard, inv_dt, &rhs, o.cg_tol, cg_max);
            out.cg += cg.iterations;
            if picard {
                picard_left -= 1;
                out.picard += 1;
                for (ui, di) in u.iter_mut().zip(&delta) {
                    *ui += di;
                }
                st = op.face_state(u, bvals);
                r = Self::residual(op, &st, inv_dt, u, u_prev, f);
                rn = norm(&r);
                out.residuals.push(rn);
                continue;
            }
            let mut lambda = 1.0;
            let mut accepted = None;
            for _ in 0..=o.max_halvings {
                let trial: Vec<f64> = u.iter().zip(&delta).map(|(a, d)| a + lambda * d).collect();
                let ts = op.face_state(&trial, bvals);
                let tr = Self::residual(op, &ts, inv_dt, &trial, u_prev, f);
                let tn = norm(&tr);
                if tn <= (1.0 - 1e-4 * lambda) * rn {
                    accepted = Some((trial, ts, tr, tn));
                    break;
                }
                lambda *= 0.5;
            }
            match accepted {
                Some((trial, ts, tr, tn)) => {
                    *u = trial;
                    st = ts;
                    r = tr;
                    rn = tn;
                    out.residuals.push(rn);
                }
                None => {
                    if rn <= o.floor_tol * scale {
                        out.floor = true;
                        return Ok(out);
                    }
                    picard_left = o.picard_sweeps;
                }
            }
        }
        if rn <= o.tol * scale {
            return Ok(out);
        }
        if rn <= o.floor_tol * scale {
            out.floor = true;
            return Ok(out);
        }
        if u.iter().any(|x| !x.is_finite()) {
            return Err(Error::NumericalBlowup(format!("non-finite state at t={t:e}")));
        }
        Err(Error::NonConvergence {
            time: t,
            iterations: out.iterations,
            residual: rn / scale,
        })
    }

    /// One backward-Euler step from `u_prev` to time `t_new` with `φ_ε`.
    pub fn step(
        &self,
        phi: &OrliczFunction,
        problem: &Problem,
        u_prev: &[f64],
        t_new: f64,
        dt: f64,
        eps: f64,
    ) -> Result<(Vec<f64>, StepStats)> {
        if u_prev.iter().any(|x| !x.is_finite()) {
            return Err(Error::NumericalBlowup("non-finite previous state".into()));
        }
        let phi_eps = phi.shift(eps)?;
        let op = Operator {
            geo: &self.geo,
            stencil: &self.stencil,
            phi: &phi_eps,
        };
        let bvals = self.boundary(problem.data.as_ref(), t_new);
        let f = problem.forcing(&self.geo, t_new);
        let energy_before = op.energy(&op.face_state(u_prev, &bvals));
        let mut u = u_prev.to_vec();
        let res = self.newton(&op, &bvals, 1.0 / dt, u_prev, &f, &mut u, t_new)?;
        let energy_after = op.energy(&op.face_state(&u, &bvals));
        Ok((
            u,
            StepStats {
                t: t_new,
                eps,
                iterations: res.iterations,
                picard_sweeps: res.picard,
                cg_iterations: res.cg,
                residuals: res.residuals,
                scale: res.scale,
                floor_accepted: res.floor,
                energy_before,
                energy_after,
            },
        ))
    }
}

/// One implicit step (builds the stencil; use [`Stepper`] in loops).
pub fn step_implicit(
    phi: &OrliczFunction,
    problem: &Problem,
    u_prev: &[f64],
    t_new: f64,
    eps_reg: f64,
    options: SolverOptions,
) -> Result<(Vec<f64>, StepStats)> {
    let stepper = Stepper::new(&problem.grid, options)?;
    stepper.step(phi, problem, u_prev, t_new, problem.grid.dt, eps_reg)
}

/// Marches from `t = 0` to `t_end`, recording snapshots every `snapshot_stride` steps.
pub fn solve_parabolic(phi: &OrliczFunction, problem: &Problem, options: SolverOptions) -> Result<GradOrField> {
    let stepper = Stepper::new(&problem.grid, options)?;
    let geo = stepper.geo.clone();
    let grid = &problem.grid;
    let mut u = problem.initial_state(&geo);
    let mut field = GradOrField::new(grid.clone(), geo);
    field.push(Snapshot { t: 0.0, u: u.clone() });
    let steps = grid.steps();
    for k in 0..steps {
        let t_new = (k + 1) as f64 * grid.dt;
        let eps = options.eps.at(k);
        let (next, stats) = stepper.step(phi, problem, &u, t_new, grid.dt, eps)?;
        u = next;
        field.stats.push(stats);
        if (k + 1) % grid.snapshot_stride == 0 || k + 1 == steps {
            field.push(Snapshot { t: t_new, u: u.clone() });
        }
    }
    Ok(field)
}

/// Stationary solve `-div A(∇u) = f`: Laplace initial guess, pseudo-transient
/// continuation while `ε` decreases, then Newton at the final `ε`.
pub fn solve_elliptic(phi: &OrliczFunction, problem: &Problem, options: SolverOptions) -> Result<GradOrField> {
    let stepper = Stepper::new(&problem.grid, options)?;
    let geo = &stepper.geo;
    let bvals = stepper.boundary(problem.data.as_ref(), 0.0);
    let f = problem.forcing(geo, 0.0);
    let zeros = vec![0.0; geo.len()];

    let heat = OrliczFunction::power(2.0)?;
    let heat_op = Operator {
        geo,
        stencil: &stepper.stencil,
        phi: &heat,
    };
    let mut u = zeros.clone();
    stepper.newton(&heat_op, &bvals, 0.0, &zeros, &f, &mut u, 0.0)?;

    let mut stats = Vec::new();
    let mut tau_inv: Option<f64> = None;
    let mut tau_inv0 = 0.0;
    let max_ptc = 400;
    let mut k = 0;
    loop {
        let eps = options.eps.at(k);
        let at_floor = eps <= options.eps.floor;
        let phi_eps = phi.shift(eps)?;
        let op = Operator {
            geo,
            stencil: &stepper.stencil,
            phi: &phi_eps,
        };
        let st = op.face_state(&u, &bvals);
        let r = Stepper::residual(&op, &st, 0.0, &u, &zeros, &f);
        let rn = norm(&r);
        let inv = *tau_inv.get_or_insert_with(|| {
            let d = op.jacobian_diag(&st, false);
            tau_inv0 = 0.1 * d.iter().sum::<f64>() / d.len() as f64;
            tau_inv0
        });
        // once the pseudo step is negligible, finish with plain Newton
        let scale = rn + norm(&f) + norm(&op.flux_magnitude(&st));
        if at_floor && (inv < 1e-9 * tau_inv0 || rn <= 1e-6 * scale || k >= max_ptc) {
            let energy_before = op.energy(&st);
            let res = stepper.newton(&op, &bvals, 0.0, &zeros, &f, &mut u, 0.0)?;
            let energy_after = op.energy(&op.face_state(&u, &bvals));
            stats.push(StepStats {
                t: 0.0,
                eps,
                iterations: res.iterations,
                picard_sweeps: res.picard,
                cg_iterations: res.cg,
                residuals: res.residuals,
                scale: res.scale,
                floor_accepted: res.floor,
                energy_before,
                energy_after,
            });
            break;
        }
        let rhs: Vec<f64> = r.iter().map(|x| -x).collect();
        let (delta, cg) = conjugate_gradient(&op, &st, false, inv, &rhs, options.cg_tol, stepper.cg_limit());
        let trial: Vec<f64> = u.iter().zip(&delta).map(|(a, d)| a + d).collect();
        let trial_state = op.face_state(&trial, &bvals);
        let tn = norm(&Stepper::residual(&op, &trial_state, 0.0, &trial, &zeros, &f));
        let energy_before = op.energy(&st);
        let mut energy_after = energy_before;
        if tn.is_finite() && tn < 2.0 * rn {
            energy_after = op.energy(&trial_state);
            u = trial;
            tau_inv = Some(inv / (rn / tn.max(1e-300)).clamp(0.5, 10.0));
            k += 1;
        } else {
            tau_inv = Some(inv * 4.0);
        }
        stats.push(StepStats {
            t: 0.0,
            eps,
            iterations: 1,
            picard_sweeps: 0,
            cg_iterations: cg.iterations,
            residuals: if tn.is_finite() { vec![rn, tn] } else { vec![rn] },
            scale,
            floor_accepted: false,
            energy_before,
            energy_after,
        });
        if stats.len() > 4 * max_ptc {
            return Err(Error::NonConvergence {
                time: 0.0,
                iterations: stats.len(),
                residual: rn / scale,
            });
        }
    }
    let mut field = GradOrField::new(problem.grid.clone(), stepper.geo.clone());
    field.push(Snapshot { t: 0.0, u });
    field.stats = stats;
    Ok(field)
}
