//! Limiting spectral density of B = H₁H₂H₂ᴴH₁ᴴ + s̄H₁H₁ᴴ by Stieltjes
//! inversion of the deterministic equivalent (1/N)Tr F_δ(s̄, −ζ).

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{param, Error, Result};
use crate::fixed_point::{ComplexOptions, ComplexSolutionS1, Kernel};
use crate::model::CorrelationSet;
use crate::montecarlo::Histogram;
use crate::output::{csv_table, fmt_num};

/// Sampled density with its inversion offset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralDensity {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    /// Imaginary offset y of the evaluation points x + iy.
    pub y: f64,
    /// Trapezoid integral of the density over the grid.
    pub mass: f64,
    /// 1 − mass when positive: the part of the measure the inversion cannot
    /// resolve, attributed to an atom at 0.
    pub zero_atom: f64,
    /// Grid indices whose solve failed; their values are interpolated.
    pub interpolated: Vec<usize>,
}

impl SpectralDensity {
    fn new(grid: Vec<f64>, density: Vec<f64>, y: f64, interpolated: Vec<usize>) -> Self {
        let mass = trapezoid(&grid, &density);
        Self { zero_atom: (1.0 - mass).max(0.0), grid, density, y, mass, interpolated }
    }

    /// ∫x f(x) dx over the grid.
    pub fn first_moment(&self) -> f64 {
        let xf: Vec<f64> = self.grid.iter().zip(&self.density).map(|(x, f)| x * f).collect();
        trapezoid(&self.grid, &xf)
    }

    /// Linear interpolation, zero outside the grid.
    pub fn at(&self, x: f64) -> f64 {
        let g = &self.grid;
        if g.is_empty() || x < g[0] || x > g[g.len() - 1] {
            return 0.0;
        }
        let k = g.partition_point(|v| *v <= x).clamp(1, g.len() - 1);
        let (x0, x1) = (g[k - 1], g[k]);
        if x1 == x0 {
            return self.density[k];
        }
        let t = (x - x0) / (x1 - x0);
        (1.0 - t) * self.density[k - 1] + t * self.density[k]
    }

    /// Σ_k |f̄_k − h_k|·w over the histogram bins, f̄_k the bin average of the
    /// interpolated density.
    pub fn l1_distance(&self, hist: &Histogram) -> f64 {
        const SUB: usize = 16;
        let w = hist.width();
        hist.edges
            .windows(2)
            .zip(&hist.density)
            .map(|(e, h)| {
                let avg = (0..SUB).map(|j| self.at(e[0] + (j as f64 + 0.5) * w / SUB as f64)).sum::<f64>() / SUB as f64;
                (avg - h).abs() * w
            })
            .sum()
    }

    /// CSV with header `x,f`.
    pub fn to_csv(&self) -> String {
        csv_table(&["x", "f"], self.grid.iter().zip(&self.density).map(|(x, f)| vec![fmt_num(*x), fmt_num(*f)]))
    }
}

fn trapezoid(x: &[f64], f: &[f64]) -> f64 {
    x.windows(2).zip(f.windows(2)).map(|(xs, fs)| 0.5 * (xs[1] - xs[0]) * (fs[0] + fs[1])).sum()
}

/// ‖R₁‖‖T₁‖(1+√(N/L))²·(s̄ + ‖R₂‖‖T₂‖(1+√(L/M))²): an upper estimate of the
/// right support edge built from the Marčenko–Pastur edges of each hop.
pub fn support_scale(corr: &CorrelationSet, s_bar: f64) -> f64 {
    let (n, l, m) = (corr.n() as f64, corr.l() as f64, corr.m() as f64);
    let hop = |ratio: f64| (1.0 + ratio.sqrt()).powi(2);
    let first = corr.r1.norm() * corr.t1.norm() * hop(n / l);
    let second = corr.r2.norm() * corr.t2.norm() * hop(l / m);
    first * (s_bar + second)
}

pub const DEFAULT_POINTS: usize = 400;

/// `points` equispaced values on [0, 1.2·support scale].
pub fn default_grid(corr: &CorrelationSet, s_bar: f64, points: usize) -> Vec<f64> {
    let hi = 1.2 * support_scale(corr, s_bar);
    let k = points.max(2) - 1;
    (0..=k).map(|i| hi * i as f64 / k as f64).collect()
}

pub fn default_offset(corr: &CorrelationSet, s_bar: f64) -> f64 {
    1e-3 * support_scale(corr, s_bar)
}

/// (1/N)Tr F_δ(s̄, −ζ) together with the fixed point, for use as a warm start.
pub fn stieltjes_m(
    corr: &CorrelationSet,
    s_bar: f64,
    zeta: Complex64,
    warm: Option<&ComplexSolutionS1>,
) -> Result<(Complex64, ComplexSolutionS1)> {
    if !(s_bar >= 0.0) {
        return param("s_bar must be nonnegative");
    }
    let kernel = Kernel::new(corr);
    let sol = kernel.solve_system1_complex(s_bar, zeta, warm, &ComplexOptions::default())?;
    Ok((kernel.stieltjes1(s_bar, &sol), sol))
}

fn check_grid(grid: &[f64], y: f64) -> Result<()> {
    if grid.is_empty() {
        return param("density grid is empty");
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|x| !x.is_finite()) {
        return param("density grid must be finite and strictly ascending");
    }
    if !(y > 0.0) || !y.is_finite() {
        return param(format!("inversion offset must be positive, got {y}"));
    }
    Ok(())
}

/// Left-to-right sweep with warm starts. `step` returns Im m / π at one point
/// or fails; failed points are interpolated from their neighbours.
fn sweep<W: Clone>(
    grid: &[f64],
    y: f64,
    mut step: impl FnMut(Complex64, Option<&W>) -> Result<(Complex64, W)>,
) -> Result<SpectralDensity> {
    check_grid(grid, y)?;
    let mut warm: Option<W> = None;
    let mut values: Vec<Option<f64>> = Vec::with_capacity(grid.len());
    let mut last_err = None;
    for &x in grid {
        match step(Complex64::new(x, y), warm.as_ref()) {
            Ok((m, w)) => {
                let f = m.im / std::f64::consts::PI;
                if f < -1e-10 {
                    values.push(None);
                    last_err = Some(Error::Numerical(format!("negative density {f:e} at x = {x}")));
                } else {
                    values.push(Some(f.max(0.0)));
                    warm = Some(w);
                }
            }
            Err(e @ (Error::NonConvergence { .. } | Error::Numerical(_))) => {
                values.push(None);
                last_err = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    let failed: Vec<usize> = (0..values.len()).filter(|&i| values[i].is_none()).collect();
    if failed.len() * 20 > grid.len() || failed.len() == grid.len() {
        let detail = last_err.map(|e| e.to_string()).unwrap_or_default();
        return Err(Error::Numerical(format!(
            "density failed at {} of {} grid points (last: {detail})",
            failed.len(),
            grid.len()
        )));
    }
    let density = (0..values.len())
        .map(|i| match values[i] {
            Some(v) => v,
            None => {
                let left = (0..i).rev().find_map(|j| values[j].map(|v| (grid[j], v)));
                let right = (i + 1..values.len()).find_map(|j| values[j].map(|v| (grid[j], v)));
                match (left, right) {
                    (Some((x0, f0)), Some((x1, f1))) => f0 + (f1 - f0) * (grid[i] - x0) / (x1 - x0),
                    (Some((_, f)), None) | (None, Some((_, f))) => f,
                    (None, None) => unreachable!("at least one grid point converged"),
                }
            }
        })
        .collect();
    Ok(SpectralDensity::new(grid.to_vec(), density, y, failed))
}

/// density(x) = Im m(x + iy)/π on `grid`.
pub fn lsd_density(corr: &CorrelationSet, s_bar: f64, grid: &[f64], y: f64) -> Result<SpectralDensity> {
    if !(s_bar >= 0.0) {
        return param("s_bar must be nonnegative");
    }
    let kernel = Kernel::new(corr);
    let opts = ComplexOptions::default();
    sweep(grid, y, |zeta, warm| {
        let sol = kernel.solve_system1_complex(s_bar, zeta, warm, &opts)?;
        Ok((kernel.stieltjes1(s_bar, &sol), sol))
    })
}

/// Density of the single-hop matrix s·H₁H₁ᴴ from system 2.
pub fn single_hop_density(corr: &CorrelationSet, s: f64, grid: &[f64], y: f64) -> Result<SpectralDensity> {
    let kernel = Kernel::new(corr);
    let opts = ComplexOptions::default();
    sweep(grid, y, |zeta, warm: Option<&(Complex64, Complex64)>| {
        let (tau, tau_bar, m) = kernel.solve_system2_complex(s, zeta, warm.copied(), &opts)?;
        Ok((m, (tau, tau_bar)))
    })
}

#[cfg(test)]
mod tests;
