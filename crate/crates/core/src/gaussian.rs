//! Gaussian additive paths on a time grid: simulation, the Girsanov
//! log-likelihood ratio against standard Brownian motion, and the
//! equal-variance check that decides equivalence with it.

use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::RandomStream;

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 || grid[0] != 0.0 {
        return Err(Error::invalid("grid", "need at least two points starting at 0"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0] || !w[1].is_finite()) {
        return Err(Error::invalid("grid", "must be strictly increasing and finite"));
    }
    Ok(())
}

/// Grid `0 = t_0 < ... < t_n` with `n` equal cells.
pub fn uniform_grid(end: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| end * k as f64 / n as f64).collect()
}

/// Values of a path on its grid, with `value[0] = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPath {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl GaussianPath {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_grid(&grid)?;
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!("{} values on {} grid points", values.len(), grid.len())));
        }
        if values[0] != 0.0 || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("values", "must be finite with W_0 = 0"));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn last(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// Adds the drift `\int_0^t phi_s ds` (left-point rule) to the path.
    pub fn shifted(&self, velocity: &VelocityPath) -> Result<Self> {
        velocity.check_aligned(&self.grid)?;
        let mut drift = 0.0;
        let mut values = vec![0.0];
        for k in 0..self.grid.len() - 1 {
            drift += velocity.values[k] * (self.grid[k + 1] - self.grid[k]);
            values.push(self.values[k + 1] + drift);
        }
        Self::new(self.grid.clone(), values)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_grid_csv(w, &self.grid, &self.values)
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let (grid, values) = read_grid_csv(r)?;
        Self::new(grid, values)
    }
}

/// Deterministic variance function `A_t` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VariancePath {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl VariancePath {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_grid(&grid)?;
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!("{} values on {} grid points", values.len(), grid.len())));
        }
        if values[0] != 0.0 || values.iter().any(|v| !v.is_finite()) || values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("variance", "must be finite, non-decreasing, with A_0 = 0"));
        }
        Ok(Self { grid, values })
    }

    /// `A_t = scale * t` sampled on `grid`.
    pub fn linear(grid: Vec<f64>, scale: f64) -> Result<Self> {
        let values = grid.iter().map(|t| scale * t).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Covariance `R(t_i, t_j) = A_{min(t_i, t_j)}`.
    pub fn covariance(&self, i: usize, j: usize) -> f64 {
        self.values[i.min(j)]
    }
}

/// Velocity `phi` on a grid; `values[k]` acts on `(t_k, t_{k+1}]`.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityPath {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl VelocityPath {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_grid(&grid)?;
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!("{} values on {} grid points", values.len(), grid.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("velocity", "values must be finite"));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: Vec<f64>, c: f64) -> Result<Self> {
        let values = vec![c; grid.len()];
        Self::new(grid, values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn check_aligned(&self, grid: &[f64]) -> Result<()> {
        if self.grid != grid {
            return Err(Error::GridMismatch("velocity grid differs from the path grid".into()));
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_grid_csv(w, &self.grid, &self.values)
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let (grid, values) = read_grid_csv(r)?;
        Self::new(grid, values)
    }
}

/// Path with independent increments `W_{k+1} - W_k ~ N(0, A_{k+1} - A_k)`.
pub fn simulate_wiener_additive(variance: &VariancePath, stream: RandomStream) -> GaussianPath {
    let mut rng = stream.rng();
    let mut w = 0.0;
    let mut values = vec![0.0];
    for v in variance.values.windows(2) {
        let var = v[1] - v[0];
        if var > 0.0 {
            w += var.sqrt() * rng.standard_normal();
        }
        values.push(w);
    }
    GaussianPath { grid: variance.grid.clone(), values }
}

/// `sum_k phi_k (W_{k+1} - W_k) - 1/2 sum_k phi_k^2 (t_{k+1} - t_k)`, the
/// left-point (Ito) discretization of the Girsanov exponent.
pub fn girsanov_log_ratio(path: &GaussianPath, velocity: &VelocityPath) -> Result<f64> {
    velocity.check_aligned(&path.grid)?;
    let mut stochastic = 0.0;
    let mut energy = 0.0;
    for k in 0..path.grid.len() - 1 {
        let phi = velocity.values[k];
        stochastic += phi * (path.values[k + 1] - path.values[k]);
        energy += phi * phi * (path.grid[k + 1] - path.grid[k]);
    }
    Ok(stochastic - 0.5 * energy)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Equivalence {
    Equivalent,
    Singular,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceVerdict {
    pub verdict: Equivalence,
    /// Total length of cells whose slope differs from 1 by more than `tol`.
    pub exceptional_measure: f64,
    pub widest_cell: f64,
}

/// A Gaussian additive path is equivalent to standard Brownian motion only
/// if `A'_t = 1` almost everywhere. At grid resolution "almost everywhere"
/// means the cells with `|slope - 1| > tol` cover at most one cell.
pub fn variance_equivalence_check(variance: &VariancePath, tol: f64) -> Result<VarianceVerdict> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::invalid("tol", format!("{tol} must be > 0")));
    }
    let g = &variance.grid;
    let mut measure = 0.0;
    let mut widest: f64 = 0.0;
    for k in 0..g.len() - 1 {
        let dt = g[k + 1] - g[k];
        widest = widest.max(dt);
        let slope = (variance.values[k + 1] - variance.values[k]) / dt;
        if (slope - 1.0).abs() > tol {
            measure += dt;
        }
    }
    let verdict = if measure <= widest * (1.0 + 1e-12) { Equivalence::Equivalent } else { Equivalence::Singular };
    Ok(VarianceVerdict { verdict, exceptional_measure: measure, widest_cell: widest })
}

fn write_grid_csv<W: Write>(w: W, grid: &[f64], values: &[f64]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["t", "value"])?;
    for (t, v) in grid.iter().zip(values) {
        wtr.write_record([t.to_string(), v.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

fn read_grid_csv<R: Read>(r: R) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["t", "value"] {
        return Err(Error::invalid("header", "expected `t,value`"));
    }
    let mut grid = Vec::new();
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parse = |j: usize, name: &str| -> Result<f64> {
            rec.get(j)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::invalid(format!("row {} `{name}`", i + 1), "not a number"))
        };
        grid.push(parse(0, "t")?);
        values.push(parse(1, "value")?);
    }
    Ok((grid, values))
}
