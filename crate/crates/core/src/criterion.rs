//! The empirical contrast functional M_n, evaluated by midpoint Riemann
//! quadrature over [−ν_est, ν_est]².
//!
//! M_n(φ) integrates |φ(t₁+t₂)·φ̃_n(t₁,0)·φ̃_n(0,t₂) − φ̃_n(t₁,t₂)·φ(t₁)·φ(t₂)|²
//! over the grid; it vanishes in population exactly at the signal's
//! characteristic function (up to translation), which makes it the objective
//! the coefficient search minimizes.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cf_model::PolyCF;
use crate::ecf::{self, EcfTable, PairedSample};
use crate::error::{DeconvError, Result};

/// Rows per parallel work unit; fixed so sums do not depend on thread count.
const ROW_CHUNK: usize = 32;

/// Default finite-difference step (relative) for the contrast gradient.
pub const DEFAULT_FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum QuadRule {
    #[default]
    MidpointRiemann,
}

/// Rectangular quadrature specification for [−ν, ν]².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadGrid {
    pub nu: f64,
    pub k1: usize,
    pub k2: usize,
    pub rule: QuadRule,
}

impl QuadGrid {
    pub fn new(nu: f64, k1: usize, k2: usize) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(DeconvError::InvalidParameter(format!("grid half-width must be > 0, got {nu}")));
        }
        if k1 < 2 || k2 < 2 {
            return Err(DeconvError::InvalidParameter(format!(
                "grid needs at least 2 nodes per axis, got {k1}x{k2}"
            )));
        }
        Ok(QuadGrid { nu, k1, k2, rule: QuadRule::MidpointRiemann })
    }

    /// Midpoint nodes along t₁.
    pub fn nodes1(&self) -> Vec<f64> {
        midpoint_nodes(self.nu, self.k1)
    }

    /// Midpoint nodes along t₂.
    pub fn nodes2(&self) -> Vec<f64> {
        midpoint_nodes(self.nu, self.k2)
    }

    /// Area weight of one grid cell.
    pub fn cell_weight(&self) -> f64 {
        (2.0 * self.nu / self.k1 as f64) * (2.0 * self.nu / self.k2 as f64)
    }
}

fn midpoint_nodes(nu: f64, k: usize) -> Vec<f64> {
    let step = 2.0 * nu / k as f64;
    (0..k).map(|i| -nu + (i as f64 + 0.5) * step).collect()
}

/// Precomputed state shared by every contrast evaluation on one dataset:
/// the tabulated ECF and, on square grids, the de-duplicated t₁+t₂ values
/// (a k1×k2 midpoint grid with equal spacing has only k1+k2−1 distinct sums,
/// so φ(t₁+t₂) is evaluated once per distinct sum rather than once per pair).
#[derive(Debug, Clone)]
pub struct CriterionContext {
    table: EcfTable,
    grid: QuadGrid,
    /// Sum value at index i+j; `None` when per-axis spacing differs.
    sums: Option<Vec<f64>>,
}

impl CriterionContext {
    pub fn new(sample: &PairedSample, grid: QuadGrid) -> Result<Self> {
        let nodes1 = grid.nodes1();
        let nodes2 = grid.nodes2();
        let table = ecf::ecf_table_on(sample, &nodes1, &nodes2)?;
        let sums = if grid.k1 == grid.k2 {
            let mut sums = Vec::with_capacity(grid.k1 + grid.k2 - 1);
            for s in 0..(grid.k1 + grid.k2 - 1) {
                let i = s.min(grid.k1 - 1);
                sums.push(nodes1[i] + nodes2[s - i]);
            }
            Some(sums)
        } else {
            None
        };
        Ok(CriterionContext { table, grid, sums })
    }

    pub fn grid(&self) -> &QuadGrid {
        &self.grid
    }

    pub fn table(&self) -> &EcfTable {
        &self.table
    }

    /// M_n(φ) by the cached-sum path (falls back to per-pair evaluation on
    /// rectangular grids with unequal spacing).
    pub fn value(&self, p: &PolyCF) -> f64 {
        match &self.sums {
            Some(sums) => {
                let w: Vec<Complex64> = sums.iter().map(|&s| p.evaluate(s)).collect();
                self.accumulate(p, |i, j| w[i + j])
            }
            None => self.value_per_pair(p),
        }
    }

    /// M_n(φ) evaluating φ(t₁+t₂) for every node pair. Slow path; also the
    /// reference the cached path is tested against.
    pub fn value_per_pair(&self, p: &PolyCF) -> f64 {
        let nodes1 = &self.table.grid1;
        let nodes2 = &self.table.grid2;
        self.accumulate(p, |i, j| p.evaluate(nodes1[i] + nodes2[j]))
    }

    fn accumulate<F>(&self, p: &PolyCF, phi_sum: F) -> f64
    where
        F: Fn(usize, usize) -> Complex64 + Sync,
    {
        let nodes1 = &self.table.grid1;
        let nodes2 = &self.table.grid2;
        let u: Vec<Complex64> = nodes1.iter().map(|&t| p.evaluate(t)).collect();
        let v: Vec<Complex64> = nodes2.iter().map(|&t| p.evaluate(t)).collect();
        let g1 = &self.table.marginal1;
        let g2 = &self.table.marginal2;

        let row_indices: Vec<usize> = (0..nodes1.len()).collect();
        let partials: Vec<f64> = row_indices
            .par_chunks(ROW_CHUNK)
            .map(|rows| {
                let mut chunk_acc = 0.0;
                for &i in rows {
                    let row = self.table.row(i);
                    let a = g1[i];
                    let ui = u[i];
                    let mut row_acc = 0.0;
                    for j in 0..nodes2.len() {
                        let d = phi_sum(i, j) * a * g2[j] - row[j] * ui * v[j];
                        row_acc += d.norm_sqr();
                    }
                    chunk_acc += row_acc;
                }
                chunk_acc
            })
            .collect();

        partials.iter().sum::<f64>() * self.grid.cell_weight()
    }

    /// Central-difference gradient of the contrast in the m stored
    /// parameters; step per coordinate is `h_fd · (1 + |coefficient|)`.
    pub fn gradient(&self, p: &PolyCF, h_fd: f64) -> Vec<f64> {
        let base = p.stored().to_vec();
        (0..base.len())
            .map(|k| {
                let h = h_fd * (1.0 + base[k].abs());
                let mut up = base.clone();
                up[k] += h;
                let mut down = base.clone();
                down[k] -= h;
                let f_up = self.value(&PolyCF::from_stored(up));
                let f_down = self.value(&PolyCF::from_stored(down));
                (f_up - f_down) / (2.0 * h)
            })
            .collect()
    }
}
