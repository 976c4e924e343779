//! From fitted characteristic function to density estimate: truncation,
//! Fourier inversion over [−h, h] by midpoint quadrature, clipping at zero,
//! L2 loss against an analytic target, and the theoretical (m, h) formulas.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cf_model::PolyCF;
use crate::distributions::Law;
use crate::error::{DeconvError, Result};

/// The estimator's defining triple: truncation degree m, contrast half-width
/// ν_est, inversion cutoff h.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorParams {
    pub m: usize,
    pub nu_est: f64,
    pub h: f64,
}

impl EstimatorParams {
    pub fn new(m: usize, nu_est: f64, h: f64) -> Result<Self> {
        if !(nu_est > 0.0) {
            return Err(DeconvError::InvalidParameter(format!("nu_est must be > 0, got {nu_est}")));
        }
        if !(h > 0.0) {
            return Err(DeconvError::InvalidParameter(format!("inversion cutoff h must be > 0, got {h}")));
        }
        Ok(EstimatorParams { m, nu_est, h })
    }
}

/// A real-valued function tabulated on a regular, strictly increasing grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    grid: Vec<f64>,
    values: Vec<f64>,
    pub params: EstimatorParams,
    pub clipped: bool,
}

impl DensityEstimate {
    pub fn new(grid: Vec<f64>, values: Vec<f64>, params: EstimatorParams, clipped: bool) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(DeconvError::InvalidParameter(format!(
                "grid and values lengths differ: {} vs {}",
                grid.len(),
                values.len()
            )));
        }
        if grid.len() < 2 {
            return Err(DeconvError::InvalidParameter("evaluation grid needs at least 2 points".into()));
        }
        let step = grid[1] - grid[0];
        if !(step > 0.0) {
            return Err(DeconvError::InvalidParameter("evaluation grid must be strictly increasing".into()));
        }
        for w in grid.windows(2) {
            if ((w[1] - w[0]) - step).abs() > 1e-9 * step.max(1.0) {
                return Err(DeconvError::InvalidParameter("evaluation grid must be regularly spaced".into()));
            }
        }
        if clipped && values.iter().any(|&v| v < 0.0) {
            return Err(DeconvError::InvalidParameter(
                "a clipped estimate cannot hold negative values".into(),
            ));
        }
        Ok(DensityEstimate { grid, values, params, clipped })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn spacing(&self) -> f64 {
        self.grid[1] - self.grid[0]
    }

    /// Pointwise max(0, ·); clipping is idempotent and 1-Lipschitz.
    pub fn clip(&self) -> DensityEstimate {
        DensityEstimate {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v.max(0.0)).collect(),
            params: self.params,
            clipped: true,
        }
    }

    /// Linear interpolation on the grid, zero outside its span.
    pub fn interp(&self, x: f64) -> f64 {
        let pos = (x - self.grid[0]) / self.spacing();
        if pos < 0.0 || pos > (self.grid.len() - 1) as f64 {
            return 0.0;
        }
        let i = (pos.floor() as usize).min(self.grid.len() - 2);
        let frac = pos - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }

    /// L2 distance to another estimate tabulated on the same grid.
    pub fn l2_distance(&self, other: &DensityEstimate) -> Result<f64> {
        self.check_same_grid(other)?;
        let sum: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        Ok((sum * self.spacing()).sqrt())
    }

    pub(crate) fn check_same_grid(&self, other: &DensityEstimate) -> Result<()> {
        if self.grid.len() != other.grid.len()
            || self
                .grid
                .iter()
                .zip(&other.grid)
                .any(|(a, b)| (a - b).abs() > 1e-9 * (1.0 + a.abs()))
        {
            return Err(DeconvError::MismatchedGrids(format!(
                "{} points on [{}, {}] vs {} points on [{}, {}]",
                self.grid.len(),
                self.grid[0],
                self.grid[self.grid.len() - 1],
                other.grid.len(),
                other.grid[0],
                other.grid[other.grid.len() - 1],
            )));
        }
        Ok(())
    }

    /// Riemann integral of the tabulated values over the grid span.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.spacing()
    }

    /// Plot-ready CSV: header `t,value`, shortest round-trip decimals.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,value")?;
        for (t, v) in self.grid.iter().zip(&self.values) {
            writeln!(w, "{t},{v}")?;
        }
        Ok(())
    }

    /// Parse the CSV written by [`DensityEstimate::write_csv`]; params and
    /// clipped flag come from the sidecar, not the CSV.
    pub fn read_csv<R: BufRead>(r: R, params: EstimatorParams, clipped: bool) -> Result<Self> {
        let mut grid = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line.map_err(|e| DeconvError::Parse { line: lineno + 1, message: e.to_string() })?;
            let line = line.trim();
            if lineno == 0 {
                if line != "t,value" {
                    return Err(DeconvError::Parse {
                        line: 1,
                        message: format!("expected header 't,value', got '{line}'"),
                    });
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let (t, v) = line.split_once(',').ok_or_else(|| DeconvError::Parse {
                line: lineno + 1,
                message: "expected two comma-separated values".into(),
            })?;
            let parse = |s: &str| -> Result<f64> {
                s.trim().parse::<f64>().map_err(|e| DeconvError::Parse {
                    line: lineno + 1,
                    message: e.to_string(),
                })
            };
            grid.push(parse(t)?);
            values.push(parse(v)?);
        }
        DensityEstimate::new(grid, values, params, clipped)
    }
}

/// Regular grid of `points` nodes spanning [lo, hi] inclusive.
pub fn regular_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(|i| lo + i as f64 * step).collect()
}

/// Fourier inversion of an arbitrary characteristic-function callable:
/// f(t) = (1/2π) ∫_{−h}^{h} e^{−itu} φ(u) du by the midpoint rule.
///
/// For a Hermitian φ the integral is real; the imaginary residual is
/// checked at every point (|Im| < 1e-8·(1+|Re|)) and only the real parts
/// are returned.
pub fn invert_cf_fn<F>(cf: F, h: f64, eval_grid: &[f64], quad_points: usize) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    if quad_points < 64 {
        return Err(DeconvError::InvalidParameter(format!(
            "inversion quadrature needs at least 64 nodes, got {quad_points}"
        )));
    }
    if !(h > 0.0) {
        return Err(DeconvError::InvalidParameter(format!("inversion cutoff h must be > 0, got {h}")));
    }
    let du = 2.0 * h / quad_points as f64;
    let nodes: Vec<f64> = (0..quad_points).map(|q| -h + (q as f64 + 0.5) * du).collect();
    let phi: Vec<Complex64> = nodes.iter().map(|&u| cf(u)).collect();

    eval_grid
        .par_iter()
        .map(|&t| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (&u, &p) in nodes.iter().zip(&phi) {
                acc += Complex64::from_polar(1.0, -t * u) * p;
            }
            acc *= du / (2.0 * PI);
            if acc.im.abs() >= 1e-8 * (1.0 + acc.re.abs()) {
                return Err(DeconvError::SymmetryViolation { t, imag: acc.im, real: acc.re });
            }
            Ok(acc.re)
        })
        .collect()
}

/// Invert a fitted polynomial candidate into a density estimate
/// (truncates to `params.m` first; `clipped` starts false).
pub fn invert(
    p: &PolyCF,
    params: &EstimatorParams,
    eval_grid: &[f64],
    quad_points: usize,
) -> Result<DensityEstimate> {
    let truncated = p.truncated(params.m);
    let values = invert_cf_fn(|u| truncated.evaluate(u), params.h, eval_grid, quad_points)?;
    DensityEstimate::new(eval_grid.to_vec(), values, *params, false)
}

/// Squared-error Riemann sum of the estimate against an analytic density.
pub fn l2_loss(est: &DensityEstimate, truth: &Law) -> Result<f64> {
    if !truth.has_density() {
        return Err(DeconvError::NoDensity(truth.to_string()));
    }
    let mut acc = 0.0;
    for (&t, &v) in est.grid().iter().zip(est.values()) {
        let f = truth.density(t)?;
        acc += (v - f) * (v - f);
    }
    Ok(acc * est.spacing())
}

/// The rate-optimal truncation degree and inversion cutoff:
/// m = ⌊ρ/4 · ln n / ln ln n⌋ and h = c_h · m^{1/ρ} / S, valid for
/// c_h ≤ exp(−(5d+3)/2). The contrast half-width ν_est has no theoretical
/// formula and is supplied by the caller.
pub fn theoretical_params(
    n: usize,
    rho: f64,
    s: f64,
    c_h: f64,
    d: u32,
    nu_est: f64,
) -> Result<EstimatorParams> {
    if n < 16 {
        return Err(DeconvError::Domain(format!("sample size must be >= 16, got {n}")));
    }
    if !(rho >= 1.0) {
        return Err(DeconvError::InvalidParameter(format!("rho must be >= 1, got {rho}")));
    }
    if !(s > 0.0) {
        return Err(DeconvError::InvalidParameter(format!("S must be > 0, got {s}")));
    }
    let c_h_max = (-(5.0 * d as f64 + 3.0) / 2.0).exp();
    if !(c_h > 0.0) || c_h > c_h_max {
        return Err(DeconvError::InvalidParameter(format!(
            "c_h must lie in (0, {c_h_max:e}] for d = {d}, got {c_h}"
        )));
    }
    let ln_n = (n as f64).ln();
    let m = (rho / 4.0 * ln_n / ln_n.ln()).floor() as usize;
    if m == 0 {
        return Err(DeconvError::DegenerateParameters(format!(
            "formula gives m = 0 at n = {n}, rho = {rho}; supply a larger degree explicitly"
        )));
    }
    let h = c_h * (m as f64).powf(1.0 / rho) / s;
    EstimatorParams::new(m, nu_est, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_params() -> EstimatorParams {
        EstimatorParams::new(0, 1.0, 2.0).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(EstimatorParams::new(3, 0.0, 1.0).is_err());
        assert!(EstimatorParams::new(3, 1.0, 0.0).is_err());
        assert!(EstimatorParams::new(0, 1.0, 1.0).is_ok());
    }

    #[test]
    fn estimate_grid_validation() {
        let p = flat_params();
        assert!(DensityEstimate::new(vec![0.0, 1.0, 1.5], vec![0.0; 3], p, false).is_err());
        assert!(DensityEstimate::new(vec![1.0, 0.0], vec![0.0; 2], p, false).is_err());
        assert!(DensityEstimate::new(vec![0.0, 1.0], vec![-0.1, 0.0], p, true).is_err());
        assert!(DensityEstimate::new(vec![0.0, 1.0], vec![-0.1, 0.0], p, false).is_ok());
    }

    #[test]
    fn constant_cf_at_zero_matches_h_over_pi() {
        let grid = regular_grid(-1.0, 1.0, 201);
        let est = invert(&PolyCF::constant(), &flat_params(), &grid, 4096).unwrap();
        let at0 = est.interp(0.0);
        assert!((at0 - 2.0 / PI).abs() < 1e-6, "f(0) = {at0}");
    }

    #[test]
    fn constant_cf_matches_sinc() {
        // (1/2π)∫_{-h}^{h} e^{-itu} du = sin(ht)/(πt)
        let h = 2.0;
        let grid = regular_grid(-2.0, 2.0, 101);
        let params = EstimatorParams::new(0, 1.0, h).unwrap();
        let est = invert(&PolyCF::constant(), &params, &grid, 1 << 17).unwrap();
        for (&t, &v) in est.grid().iter().zip(est.values()) {
            let exact = if t.abs() < 1e-12 { h / PI } else { (h * t).sin() / (PI * t) };
            assert!((v - exact).abs() < 1e-8, "t = {t}: {v} vs {exact}");
        }
        // Spot value from the closed form: t = π/2 gives sin(π)/(π²/2) = 0.
        let v = est.interp(PI / 2.0);
        assert!(v.abs() < 1e-4, "{v}");
    }

    #[test]
    fn gaussian_cf_fixture_recovers_normal_density() {
        let grid = regular_grid(-5.0, 5.0, 501);
        let values =
            invert_cf_fn(|u| Complex64::new((-0.5 * u * u).exp(), 0.0), 6.0, &grid, 8192).unwrap();
        let at0 = values[250];
        assert!((at0 - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-4, "f(0) = {at0}");
    }

    #[test]
    fn inversion_is_linear() {
        let grid = regular_grid(-3.0, 3.0, 101);
        let cf1 = |u: f64| Complex64::new((-0.5 * u * u).exp(), 0.0);
        let cf2 = |u: f64| Complex64::new(1.0, 0.0) / (1.0 + u * u);
        let mix = |u: f64| 0.3 * cf1(u) + 0.7 * cf2(u);
        let v1 = invert_cf_fn(cf1, 2.0, &grid, 2048).unwrap();
        let v2 = invert_cf_fn(cf2, 2.0, &grid, 2048).unwrap();
        let vm = invert_cf_fn(mix, 2.0, &grid, 2048).unwrap();
        for i in 0..grid.len() {
            assert!((vm[i] - (0.3 * v1[i] + 0.7 * v2[i])).abs() < 1e-10);
        }
    }

    #[test]
    fn symmetry_violation_detected_for_non_hermitian_cf() {
        let grid = regular_grid(-1.0, 1.0, 11);
        let res = invert_cf_fn(|u| Complex64::new(0.0, u.exp()), 1.0, &grid, 128);
        assert!(matches!(res, Err(DeconvError::SymmetryViolation { .. })));
    }

    #[test]
    fn quadrature_node_floor() {
        let grid = regular_grid(-1.0, 1.0, 11);
        assert!(invert(&PolyCF::constant(), &flat_params(), &grid, 32).is_err());
    }

    #[test]
    fn realness_holds_for_every_polynomial_candidate() {
        // Hermitian parametrization keeps the inversion real for any stored
        // coefficients, even wild ones.
        let grid = regular_grid(-4.0, 4.0, 41);
        for stored in [vec![1.0, 1.0, 1.0, 1.0], vec![-3.0, 0.5, 7.0], vec![0.0; 5]] {
            let p = PolyCF::from_stored(stored);
            let params = EstimatorParams::new(p.degree(), 1.0, 2.0).unwrap();
            invert(&p, &params, &grid, 512).unwrap();
        }
    }

    #[test]
    fn quadrature_convergence() {
        let grid = regular_grid(-5.0, 5.0, 101);
        let p = PolyCF::from_stored(vec![0.0, -0.5, 0.0, 0.125, 0.0, -1.0 / 48.0]);
        let params = EstimatorParams::new(6, 1.0, 2.0).unwrap();
        let coarse = invert(&p, &params, &grid, 4096).unwrap();
        let fine = invert(&p, &params, &grid, 8192).unwrap();
        for (a, b) in coarse.values().iter().zip(fine.values()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn clip_examples_and_properties() {
        let params = flat_params();
        let est = DensityEstimate::new(vec![0.0, 1.0], vec![-0.1, 0.2], params, false).unwrap();
        let clipped = est.clip();
        assert_eq!(clipped.values(), &[0.0, 0.2]);
        assert!(clipped.clipped);
        // Idempotent and 1-Lipschitz in sup norm.
        assert_eq!(clipped.clip().values(), clipped.values());
        let other = DensityEstimate::new(vec![0.0, 1.0], vec![-0.3, 0.4], params, false).unwrap();
        let sup_before = est
            .values()
            .iter()
            .zip(other.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let sup_after = est
            .clip()
            .values()
            .iter()
            .zip(other.clip().values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(sup_after <= sup_before + 1e-15);
    }

    #[test]
    fn l2_loss_of_exact_tabulation_is_zero() {
        let law = Law::Gaussian { mean: 0.0, sd: 1.0 };
        let grid = regular_grid(-5.0, 5.0, 401);
        let values: Vec<f64> = grid.iter().map(|&t| law.density(t).unwrap()).collect();
        let est = DensityEstimate::new(grid, values, flat_params(), true).unwrap();
        assert!(l2_loss(&est, &law).unwrap() < 1e-12);
    }

    #[test]
    fn l2_loss_of_zero_estimate_is_density_energy() {
        // ∫ φ² = 1/(2√π) for the standard normal.
        let law = Law::Gaussian { mean: 0.0, sd: 1.0 };
        let grid = regular_grid(-5.0, 5.0, 4001);
        let est = DensityEstimate::new(grid.clone(), vec![0.0; grid.len()], flat_params(), true).unwrap();
        let loss = l2_loss(&est, &law).unwrap();
        let exact = 1.0 / (2.0 * PI.sqrt());
        assert!((loss - exact).abs() < 1e-4, "{loss} vs {exact}");
    }

    #[test]
    fn l2_loss_rejects_atomic_truth() {
        let grid = regular_grid(-1.0, 1.0, 11);
        let est = DensityEstimate::new(grid, vec![0.0; 11], flat_params(), true).unwrap();
        assert!(matches!(l2_loss(&est, &Law::DiracUniformMix), Err(DeconvError::NoDensity(_))));
    }

    #[test]
    fn theoretical_params_formula() {
        let p = theoretical_params(1000, 4.0, 1.0, (-4.0f64).exp(), 1, 2.0).unwrap();
        assert_eq!(p.m, 3);
        // h = c_h · 3^{1/4} / 1
        assert!((p.h - (-4.0f64).exp() * 3.0f64.powf(0.25)).abs() < 1e-12);

        assert!(matches!(
            theoretical_params(1000, 1.0, 1.0, (-4.0f64).exp(), 1, 2.0),
            Err(DeconvError::DegenerateParameters(_))
        ));
        // Boundary c_h = exp(−4) is accepted at d = 1; anything above is not.
        assert!(theoretical_params(1000, 4.0, 1.0, (-4.0f64).exp() * 1.01, 1, 2.0).is_err());
        assert!(theoretical_params(15, 4.0, 1.0, (-4.0f64).exp(), 1, 2.0).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let grid = regular_grid(-1.0, 1.0, 21);
        let values: Vec<f64> = grid.iter().map(|t| t.cos()).collect();
        let est = DensityEstimate::new(grid, values, flat_params(), false).unwrap();
        let mut buf = Vec::new();
        est.write_csv(&mut buf).unwrap();
        let back = DensityEstimate::read_csv(&buf[..], est.params, false).unwrap();
        assert_eq!(est, back);
    }
}
