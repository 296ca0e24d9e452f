//! Steady lid-driven cavity flow in streamfunction-vorticity form.
//!
//! `psi` and `omega` live on the `(nx+1) x (ny+1)` grid nodes; `psi = 0` on
//! every wall. Wall vorticity follows Thom's formula. Each outer iteration
//! does one relaxed Gauss-Seidel sweep of the vorticity transport equation
//! (upwind implicit part, central advection through deferred correction)
//! followed by SOR sweeps of `lap(psi) = -omega`. Velocities come out at
//! cell centres.

use crate::error::{Result, RomError};

/// Rectangular cavity `[0, lx] x [0, ly]` with the lid on top.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams {
    pub lx: f64,
    pub ly: f64,
    pub re: f64,
    pub lid_speed: f64,
    pub nx: usize,
    pub ny: usize,
}

impl CavityParams {
    pub fn new(lx: f64, ly: f64, re: f64, nx: usize, ny: usize) -> Result<Self> {
        let p = CavityParams {
            lx,
            ly,
            re,
            lid_speed: 1.0,
            nx,
            ny,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_lid_speed(mut self, lid_speed: f64) -> Result<Self> {
        self.lid_speed = lid_speed;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lx > 0.0 && self.ly > 0.0 && self.lx.is_finite() && self.ly.is_finite()) {
            return Err(RomError::arg(format!(
                "cavity edges must be positive, got {} x {}",
                self.lx, self.ly
            )));
        }
        if !(self.re > 0.0 && self.re.is_finite()) {
            return Err(RomError::arg(format!(
                "Reynolds number must be positive, got {}",
                self.re
            )));
        }
        if !self.lid_speed.is_finite() {
            return Err(RomError::arg("lid speed must be finite"));
        }
        if self.nx < 8 || self.ny < 8 {
            return Err(RomError::arg(format!(
                "grid {}x{} is below the 8x8 minimum",
                self.nx, self.ny
            )));
        }
        Ok(())
    }
}

/// `nu = max(lx, ly) * |U| / Re`. A resting lid uses unit speed so the
/// viscosity stays positive.
pub fn reynolds_to_viscosity(params: &CavityParams) -> Result<f64> {
    if !(params.re > 0.0) {
        return Err(RomError::arg(format!(
            "Reynolds number must be positive, got {}",
            params.re
        )));
    }
    let speed = if params.lid_speed == 0.0 {
        1.0
    } else {
        params.lid_speed.abs()
    };
    Ok(params.lx.max(params.ly) * speed / params.re)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Stop when the relative max-norm change of `psi` and `omega` over one
    /// outer iteration falls to this value.
    pub tol: f64,
    pub max_iters: usize,
    pub sor_omega: f64,
    pub vorticity_relax: f64,
    /// Weight of central advection in the deferred correction (0 = upwind).
    pub central_blend: f64,
    pub poisson_sweeps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-6,
            max_iters: 50_000,
            sor_omega: 1.5,
            vorticity_relax: 0.7,
            central_blend: 1.0,
            poisson_sweeps: 1,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.max_iters == 0 || self.poisson_sweeps == 0 {
            return Err(RomError::arg(
                "solver needs tol > 0, max_iters >= 1 and poisson_sweeps >= 1",
            ));
        }
        if !(self.sor_omega > 0.0 && self.sor_omega < 2.0) {
            return Err(RomError::arg(format!(
                "SOR factor {} outside (0, 2)",
                self.sor_omega
            )));
        }
        if !(self.vorticity_relax > 0.0 && self.vorticity_relax <= 1.0) {
            return Err(RomError::arg(format!(
                "vorticity relaxation {} outside (0, 1]",
                self.vorticity_relax
            )));
        }
        if !(0.0..=1.0).contains(&self.central_blend) {
            return Err(RomError::arg("central blend must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Cell-centred velocity components, each flattened row-major with row `j`
/// counted from the bottom wall: index `j * nx + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub nx: usize,
    pub ny: usize,
}

impl FieldPair {
    pub fn u_at(&self, i: usize, j: usize) -> f64 {
        self.u[j * self.nx + i]
    }

    pub fn v_at(&self, i: usize, j: usize) -> f64 {
        self.v[j * self.nx + i]
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub fields: FieldPair,
    pub iterations: usize,
    /// Residual after each outer iteration.
    pub residuals: Vec<f64>,
    pub psi: Vec<f64>,
    pub omega: Vec<f64>,
}

pub fn solve_cavity(params: &CavityParams, config: &SolverConfig) -> Result<FieldPair> {
    Ok(solve_cavity_report(params, config)?.fields)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn relative_change(new: &[f64], old: &[f64]) -> f64 {
    let delta = new
        .iter()
        .zip(old)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if delta == 0.0 {
        0.0
    } else {
        delta / max_abs(new).max(f64::MIN_POSITIVE)
    }
}

pub fn solve_cavity_report(params: &CavityParams, config: &SolverConfig) -> Result<SolveReport> {
    params.validate()?;
    config.validate()?;
    let (nx, ny) = (params.nx, params.ny);
    let dx = params.lx / nx as f64;
    let dy = params.ly / ny as f64;
    let (dx2, dy2) = (dx * dx, dy * dy);
    let nu = reynolds_to_viscosity(params)?;
    let lid = params.lid_speed;
    let stride = nx + 1;
    let id = |i: usize, j: usize| j * stride + i;

    let n_nodes = stride * (ny + 1);
    let mut psi = vec![0.0; n_nodes];
    let mut omega = vec![0.0; n_nodes];
    let mut psi_old = vec![0.0; n_nodes];
    let mut omega_old = vec![0.0; n_nodes];
    let mut residuals = Vec::new();
    let beta = config.central_blend;
    let relax = config.vorticity_relax;
    let sor = config.sor_omega;
    let poisson_diag = 2.0 / dx2 + 2.0 / dy2;

    for iter in 1..=config.max_iters {
        psi_old.copy_from_slice(&psi);
        omega_old.copy_from_slice(&omega);

        for i in 1..nx {
            omega[id(i, 0)] = -2.0 * psi[id(i, 1)] / dy2;
            omega[id(i, ny)] = -2.0 * psi[id(i, ny - 1)] / dy2 - 2.0 * lid / dy;
        }
        for j in 1..ny {
            omega[id(0, j)] = -2.0 * psi[id(1, j)] / dx2;
            omega[id(nx, j)] = -2.0 * psi[id(nx - 1, j)] / dx2;
        }

        for j in 1..ny {
            for i in 1..nx {
                let p = id(i, j);
                let u = (psi[p + stride] - psi[p - stride]) / (2.0 * dy);
                let v = -(psi[p + 1] - psi[p - 1]) / (2.0 * dx);
                let (we, ww, wn, ws, wp) = (
                    omega[p + 1],
                    omega[p - 1],
                    omega[p + stride],
                    omega[p - stride],
                    omega[p],
                );
                let a_e = nu / dx2 + (-u).max(0.0) / dx;
                let a_w = nu / dx2 + u.max(0.0) / dx;
                let a_n = nu / dy2 + (-v).max(0.0) / dy;
                let a_s = nu / dy2 + v.max(0.0) / dy;
                let a_p = a_e + a_w + a_n + a_s;
                let central = u * (we - ww) / (2.0 * dx) + v * (wn - ws) / (2.0 * dy);
                let upwind_x = if u > 0.0 {
                    u * (wp - ww) / dx
                } else {
                    u * (we - wp) / dx
                };
                let upwind_y = if v > 0.0 {
                    v * (wp - ws) / dy
                } else {
                    v * (wn - wp) / dy
                };
                let source = -beta * (central - upwind_x - upwind_y);
                let target = (a_e * we + a_w * ww + a_n * wn + a_s * ws + source) / a_p;
                omega[p] = wp + relax * (target - wp);
            }
        }

        for _ in 0..config.poisson_sweeps {
            for j in 1..ny {
                for i in 1..nx {
                    let p = id(i, j);
                    let target = ((psi[p + 1] + psi[p - 1]) / dx2
                        + (psi[p + stride] + psi[p - stride]) / dy2
                        + omega[p])
                        / poisson_diag;
                    psi[p] += sor * (target - psi[p]);
                }
            }
        }

        let residual = relative_change(&psi, &psi_old).max(relative_change(&omega, &omega_old));
        if !residual.is_finite() {
            return Err(RomError::Convergence {
                iterations: iter,
                residual,
            });
        }
        residuals.push(residual);
        if residual <= config.tol {
            let fields = cell_velocities(&psi, nx, ny, dx, dy);
            return Ok(SolveReport {
                fields,
                iterations: iter,
                residuals,
                psi,
                omega,
            });
        }
    }
    Err(RomError::Convergence {
        iterations: config.max_iters,
        residual: residuals.last().copied().unwrap_or(f64::NAN),
    })
}

/// `u = dpsi/dy`, `v = -dpsi/dx` at cell centres from the four surrounding
/// nodes.
fn cell_velocities(psi: &[f64], nx: usize, ny: usize, dx: f64, dy: f64) -> FieldPair {
    let stride = nx + 1;
    let mut u = vec![0.0; nx * ny];
    let mut v = vec![0.0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let sw = psi[j * stride + i];
            let se = psi[j * stride + i + 1];
            let nw = psi[(j + 1) * stride + i];
            let ne = psi[(j + 1) * stride + i + 1];
            u[j * nx + i] = ((nw + ne) - (sw + se)) / (2.0 * dy);
            v[j * nx + i] = -((se + ne) - (sw + nw)) / (2.0 * dx);
        }
    }
    FieldPair { u, v, nx, ny }
}

/// Discrete divergence at every interior grid node, from the four cells that
/// share it.
pub fn discrete_divergence(fields: &FieldPair, lx: f64, ly: f64) -> Vec<f64> {
    let (nx, ny) = (fields.nx, fields.ny);
    let dx = lx / nx as f64;
    let dy = ly / ny as f64;
    let mut div = Vec::with_capacity((nx - 1) * (ny - 1));
    for j in 1..ny {
        for i in 1..nx {
            let du = (fields.u_at(i, j - 1) + fields.u_at(i, j))
                - (fields.u_at(i - 1, j - 1) + fields.u_at(i - 1, j));
            let dv = (fields.v_at(i - 1, j) + fields.v_at(i, j))
                - (fields.v_at(i - 1, j - 1) + fields.v_at(i, j - 1));
            div.push(du / (2.0 * dx) + dv / (2.0 * dy));
        }
    }
    div
}

/// `u` along the vertical line `x = lx / 2`, one value per cell row. For an
/// even `nx` the two centre columns are averaged.
pub fn vertical_midline_u(fields: &FieldPair) -> Vec<f64> {
    let (nx, ny) = (fields.nx, fields.ny);
    (0..ny)
        .map(|j| {
            if nx % 2 == 0 {
                0.5 * (fields.u_at(nx / 2 - 1, j) + fields.u_at(nx / 2, j))
            } else {
                fields.u_at(nx / 2, j)
            }
        })
        .collect()
}
