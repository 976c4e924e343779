//! Data-driven adaptation layers: tail-parameter selection by the
//! bias-proxy/variance-bound trade-off, threshold combination with an
//! alternative estimator, a characteristic-function-ratio plug-in for the
//! noise density, and cross-validated hyperparameter selection.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cf_model::PolyCF;
use crate::density::{invert_cf_fn, DensityEstimate, EstimatorParams};
use crate::ecf::{ecf_at, PairedSample};
use crate::error::{DeconvError, Result};

// ── Tail-parameter selection ─────────────────────────────────────────

/// Candidate tail parameters with the constants entering the variance bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoGrid {
    pub rhos: Vec<f64>,
    /// Regularity parameter of the target density (no default inference;
    /// a required input).
    pub beta: f64,
    pub c_sigma: f64,
    pub n: usize,
}

impl RhoGrid {
    pub fn new(rhos: Vec<f64>, beta: f64, c_sigma: f64, n: usize) -> Result<Self> {
        if rhos.is_empty() {
            return Err(DeconvError::InvalidParameter("rho grid must be nonempty".into()));
        }
        if rhos[0] < 1.0 {
            return Err(DeconvError::InvalidParameter(format!(
                "tail parameters must be >= 1, got {}",
                rhos[0]
            )));
        }
        if rhos.windows(2).any(|w| w[0] >= w[1]) {
            return Err(DeconvError::InvalidParameter("rho grid must be strictly increasing".into()));
        }
        if !(beta > 0.0) || !(c_sigma > 0.0) {
            return Err(DeconvError::InvalidParameter(format!(
                "beta and c_sigma must be > 0, got ({beta}, {c_sigma})"
            )));
        }
        Ok(RhoGrid { rhos, beta, c_sigma, n })
    }

    pub fn rho_max(&self) -> f64 {
        *self.rhos.last().expect("nonempty by construction")
    }
}

/// Variance bound σ_n(ρ) = c_σ (ln ln n / ln n)^{2β/ρ}.
pub fn sigma_n(g: &RhoGrid, rho: f64) -> Result<f64> {
    if g.n < 16 {
        return Err(DeconvError::Domain(format!("sample size must be >= 16, got {}", g.n)));
    }
    if rho < 1.0 || rho > g.rho_max() {
        return Err(DeconvError::Domain(format!(
            "rho = {rho} outside [1, {}]",
            g.rho_max()
        )));
    }
    let ln_n = (g.n as f64).ln();
    Ok(g.c_sigma * (ln_n.ln() / ln_n).powf(2.0 * g.beta / rho))
}

/// Select ρ̂ minimizing A_n(ρ) + σ_n(ρ), where the bias proxy is
/// A_n(ρ) = max(0, max_{ρ' ≥ ρ} { ‖f̂_{ρ'} − f̂_ρ‖₂ − σ_n(ρ') }).
///
/// `fits` pairs each grid ρ with its clipped estimate on a common grid,
/// in the order of `g.rhos`. Ties break toward the smallest ρ. Returns ρ̂
/// and the table of A_n values.
pub fn select_rho(fits: &[(f64, DensityEstimate)], g: &RhoGrid) -> Result<(f64, Vec<(f64, f64)>)> {
    if fits.len() != g.rhos.len()
        || fits
            .iter()
            .zip(&g.rhos)
            .any(|((rho, _), grid_rho)| (rho - grid_rho).abs() > 1e-12)
    {
        return Err(DeconvError::Domain(
            "estimates must match the rho grid entries one-to-one, in order".into(),
        ));
    }
    for (_, est) in &fits[1..] {
        fits[0].1.check_same_grid(est)?;
    }

    let sigmas: Vec<f64> = g
        .rhos
        .iter()
        .map(|&rho| sigma_n(g, rho))
        .collect::<Result<_>>()?;

    let mut a_values = Vec::with_capacity(fits.len());
    for (idx, (rho, est)) in fits.iter().enumerate() {
        let mut sup = f64::NEG_INFINITY;
        for (jdx, (_, other)) in fits.iter().enumerate().skip(idx) {
            let dist = est.l2_distance(other)?;
            sup = sup.max(dist - sigmas[jdx]);
        }
        a_values.push((*rho, sup.max(0.0)));
    }

    let mut best_idx = 0;
    let mut best_score = a_values[0].1 + sigmas[0];
    for idx in 1..fits.len() {
        let score = a_values[idx].1 + sigmas[idx];
        if score < best_score {
            best_score = score;
            best_idx = idx;
        }
    }
    Ok((g.rhos[best_idx], a_values))
}

// ── Combination with an alternative estimator ────────────────────────

/// Threshold constants for switching to the alternative estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CombinationConfig {
    pub c_adapt: f64,
    pub beta: f64,
    pub rho: f64,
}

impl CombinationConfig {
    pub fn threshold(&self, n: usize) -> Result<f64> {
        if n < 16 {
            return Err(DeconvError::Domain(format!("sample size must be >= 16, got {n}")));
        }
        if !(self.c_adapt > 0.0) || !(self.beta > 0.0) || self.rho < 1.0 {
            return Err(DeconvError::InvalidParameter(format!(
                "combination needs c_adapt > 0, beta > 0, rho >= 1, got {self:?}"
            )));
        }
        let ln_n = (n as f64).ln();
        Ok(self.c_adapt * (ln_n.ln() / ln_n).powf(2.0 * self.beta / self.rho))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Alt,
    Main,
}

/// The case split itself: the alternative wins exactly when the squared
/// distance does not exceed the threshold (boundary inclusive).
pub fn combine_branch(dist_sq: f64, threshold: f64) -> Branch {
    if dist_sq <= threshold {
        Branch::Alt
    } else {
        Branch::Main
    }
}

/// Keep the alternative estimator when it sits within the adaptation
/// threshold of the main one, otherwise keep the main estimator.
pub fn combine(
    f_main: &DensityEstimate,
    f_alt: &DensityEstimate,
    cfg: &CombinationConfig,
    n: usize,
) -> Result<(DensityEstimate, Branch)> {
    let dist = f_main.l2_distance(f_alt)?;
    let threshold = cfg.threshold(n)?;
    Ok(match combine_branch(dist * dist, threshold) {
        Branch::Alt => (f_alt.clone(), Branch::Alt),
        Branch::Main => (f_main.clone(), Branch::Main),
    })
}

// ── Noise-density plug-in ────────────────────────────────────────────

/// Which observation coordinate's noise is being estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coordinate {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseDensityOptions {
    /// Largest admissible CF cutoff q.
    pub q_limit: f64,
    /// Below this signal-CF modulus the ratio is zeroed instead of divided.
    pub modulus_floor: f64,
    pub quad_points: usize,
}

impl Default for NoiseDensityOptions {
    fn default() -> Self {
        NoiseDensityOptions { q_limit: 50.0, modulus_floor: 0.05, quad_points: 2048 }
    }
}

/// Noise density from the CF ratio φ̃_n(t, 0)/φ̂(t) (first coordinate) or
/// φ̃_n(0, t)/φ̂(t) (second), inverted over [−q, q] and clipped at zero.
///
/// The ratio modulus is capped at 1 and zeroed wherever |φ̂| falls below
/// the modulus floor, preventing blow-ups near zeros of the fitted CF.
pub fn estimate_noise_density(
    sample: &PairedSample,
    phi_hat: &PolyCF,
    coordinate: Coordinate,
    q: f64,
    eval_grid: &[f64],
    opts: &NoiseDensityOptions,
) -> Result<DensityEstimate> {
    estimate_noise_density_with_cf(sample, |t| phi_hat.evaluate(t), coordinate, q, eval_grid, opts)
        .map(|mut est| {
            est.params.m = phi_hat.degree();
            est
        })
}

/// Same plug-in with an arbitrary signal-CF callable (test fixtures).
pub fn estimate_noise_density_with_cf<F>(
    sample: &PairedSample,
    signal_cf: F,
    coordinate: Coordinate,
    q: f64,
    eval_grid: &[f64],
    opts: &NoiseDensityOptions,
) -> Result<DensityEstimate>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    if !(q > 0.0) {
        return Err(DeconvError::InvalidParameter(format!("cutoff q must be > 0, got {q}")));
    }
    if q > opts.q_limit {
        return Err(DeconvError::Domain(format!(
            "cutoff q = {q} exceeds the CF evaluation limit {}",
            opts.q_limit
        )));
    }
    let ratio = |t: f64| -> Complex64 {
        let denom = signal_cf(t);
        if denom.norm() < opts.modulus_floor {
            return Complex64::new(0.0, 0.0);
        }
        let marginal = match coordinate {
            Coordinate::First => ecf_at(sample, t, 0.0),
            Coordinate::Second => ecf_at(sample, 0.0, t),
        };
        let r = marginal / denom;
        let norm = r.norm();
        if norm > 1.0 {
            r / norm
        } else {
            r
        }
    };
    let values = invert_cf_fn(ratio, q, eval_grid, opts.quad_points)?;
    let params = EstimatorParams::new(0, q, q)?;
    Ok(DensityEstimate::new(eval_grid.to_vec(), values, params, false)?.clip())
}

// ── Numeric convolution ──────────────────────────────────────────────

/// Trapezoid convolution of two tabulated functions, each linearly
/// interpolated (zero outside its span). The output grid spans the
/// Minkowski sum of the input windows at the finer of the two spacings.
pub fn convolve(f: &DensityEstimate, g: &DensityEstimate) -> Result<DensityEstimate> {
    let step = f.spacing().min(g.spacing());
    let f_lo = f.grid()[0];
    let f_hi = *f.grid().last().expect("nonempty");
    let g_lo = g.grid()[0];
    let g_hi = *g.grid().last().expect("nonempty");
    let lo = f_lo + g_lo;
    let hi = f_hi + g_hi;
    let out_points = ((hi - lo) / step).round() as usize + 1;
    let x_points = ((f_hi - f_lo) / step).round() as usize + 1;

    let values: Vec<f64> = (0..out_points)
        .into_par_iter()
        .map(|j| {
            let y = lo + j as f64 * step;
            let mut acc = 0.0;
            for k in 0..x_points {
                let x = f_lo + k as f64 * step;
                let w = if k == 0 || k == x_points - 1 { 0.5 } else { 1.0 };
                acc += w * f.interp(x) * g.interp(y - x);
            }
            acc * step
        })
        .collect();

    let grid: Vec<f64> = (0..out_points).map(|j| lo + j as f64 * step).collect();
    DensityEstimate::new(grid, values, f.params, f.clipped && g.clipped)
}

// ── Cross-validated hyperparameter selection ─────────────────────────

/// The cutoff grid for the noise plug-in: {k/(4π) : k ∈ ℕ*, k ≤ n^{1/4}}.
pub fn q_grid(n: usize) -> Vec<f64> {
    let k_max = (n as f64).powf(0.25).floor() as usize;
    (1..=k_max).map(|k| k as f64 / (4.0 * std::f64::consts::PI)).collect()
}

/// Three-way data split plus the candidate hyperparameters to score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    /// Fit block for φ̂.
    pub e1: Vec<usize>,
    /// Noise-estimation block.
    pub e2: Vec<usize>,
    /// Held-out block scored by the log-likelihood criterion.
    pub t: Vec<usize>,
    pub candidates: Vec<EstimatorParams>,
    pub q_grid: Vec<f64>,
    /// Density floor applied before taking logs.
    pub floor_eps: f64,
}

impl CvConfig {
    /// Default 40/40/20 split of a shuffled index set under the given seed.
    pub fn new(n: usize, candidates: Vec<EstimatorParams>, seed: u64) -> Result<Self> {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        if n < 81 {
            return Err(DeconvError::InvalidParameter(format!(
                "cross-validation needs n >= 81 (so the q grid has >= 3 points), got {n}"
            )));
        }
        if candidates.is_empty() {
            return Err(DeconvError::InvalidParameter("candidate list must be nonempty".into()));
        }
        let mut idx: Vec<usize> = (0..n).collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        idx.shuffle(&mut rng);
        let cut1 = (n as f64 * 0.4).floor() as usize;
        let cut2 = (n as f64 * 0.8).floor() as usize;
        Ok(CvConfig {
            e1: idx[..cut1].to_vec(),
            e2: idx[cut1..cut2].to_vec(),
            t: idx[cut2..].to_vec(),
            candidates,
            q_grid: q_grid(n),
            floor_eps: 1e-8,
        })
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.e1.len() < 10 || self.e2.len() < 10 || self.t.len() < 10 {
            return Err(DeconvError::InvalidParameter(
                "each cross-validation block needs at least 10 observations".into(),
            ));
        }
        let mut seen = vec![false; n];
        for &i in self.e1.iter().chain(&self.e2).chain(&self.t) {
            if i >= n {
                return Err(DeconvError::InvalidParameter(format!("split index {i} out of range")));
            }
            if seen[i] {
                return Err(DeconvError::InvalidParameter(format!("split index {i} repeated")));
            }
            seen[i] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(DeconvError::InvalidParameter(
                "split must cover every observation exactly once".into(),
            ));
        }
        if self.candidates.is_empty() || self.q_grid.is_empty() {
            return Err(DeconvError::InvalidParameter(
                "candidates and q grid must be nonempty".into(),
            ));
        }
        Ok(())
    }
}

/// A fitted candidate CF together with its clipped density estimate.
#[derive(Debug, Clone)]
pub struct FittedDensity {
    pub phi: PolyCF,
    pub density: DensityEstimate,
}

/// One scored (candidate, q) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvEntry {
    pub params: EstimatorParams,
    pub q: f64,
    pub cv: f64,
}

/// Score every candidate by the held-out log-likelihood of the convolved
/// signal/noise density estimates and return the winner plus the full
/// (candidate, q) table.
///
/// `pipeline` fits a candidate on a sub-sample. A failed pipeline or
/// noise-estimation cell scores −∞ rather than aborting the sweep. The
/// winning candidate maximizes max-over-q of CV; ties keep the earliest
/// candidate.
pub fn cross_validate<F>(
    sample: &PairedSample,
    cfg: &CvConfig,
    pipeline: F,
) -> Result<(EstimatorParams, Vec<CvEntry>)>
where
    F: Fn(&PairedSample, &EstimatorParams) -> Result<FittedDensity> + Sync,
{
    cfg.validate(sample.n())?;
    let fit_sample = sample.subset(&cfg.e1)?;
    let noise_sample = sample.subset(&cfg.e2)?;
    let held_out = sample.subset(&cfg.t)?;

    // Noise window wide enough to cover the observations themselves.
    let y_min = sample.y1().iter().chain(sample.y2()).fold(f64::INFINITY, |a, &b| a.min(b));
    let y_max = sample.y1().iter().chain(sample.y2()).fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let noise_grid = crate::density::regular_grid(y_min - 2.0, y_max + 2.0, 601);
    let opts = NoiseDensityOptions::default();

    let per_candidate: Vec<Vec<CvEntry>> = cfg
        .candidates
        .par_iter()
        .map(|params| {
            let fitted = match pipeline(&fit_sample, params) {
                Ok(f) => f,
                Err(_) => {
                    return cfg
                        .q_grid
                        .iter()
                        .map(|&q| CvEntry { params: *params, q, cv: f64::NEG_INFINITY })
                        .collect();
                }
            };
            cfg.q_grid
                .iter()
                .map(|&q| {
                    let cv = cv_score(&fitted, &noise_sample, &held_out, q, &noise_grid, &opts, cfg.floor_eps)
                        .unwrap_or(f64::NEG_INFINITY);
                    CvEntry { params: *params, q, cv: if cv.is_finite() { cv } else { f64::NEG_INFINITY } }
                })
                .collect()
        })
        .collect();

    let table: Vec<CvEntry> = per_candidate.into_iter().flatten().collect();
    let mut best_idx = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (c_idx, params) in cfg.candidates.iter().enumerate() {
        let score = table
            .iter()
            .filter(|e| e.params == *params)
            .map(|e| e.cv)
            .fold(f64::NEG_INFINITY, f64::max);
        if score > best_score {
            best_score = score;
            best_idx = c_idx;
        }
    }
    Ok((cfg.candidates[best_idx], table))
}

fn cv_score(
    fitted: &FittedDensity,
    noise_sample: &PairedSample,
    held_out: &PairedSample,
    q: f64,
    noise_grid: &[f64],
    opts: &NoiseDensityOptions,
    floor_eps: f64,
) -> Result<f64> {
    let g1 = estimate_noise_density(noise_sample, &fitted.phi, Coordinate::First, q, noise_grid, opts)?;
    let g2 = estimate_noise_density(noise_sample, &fitted.phi, Coordinate::Second, q, noise_grid, opts)?;
    let p1 = convolve(&fitted.density, &g1)?;
    let p2 = convolve(&fitted.density, &g2)?;
    let mut cv = 0.0;
    for (&y1, &y2) in held_out.y1().iter().zip(held_out.y2()) {
        cv += p1.interp(y1).max(floor_eps).ln();
        cv += p2.interp(y2).max(floor_eps).ln();
    }
    Ok(cv)
}

// ── Naive alternative estimator ──────────────────────────────────────

/// Gaussian kernel density of the averaged coordinates (y⁽¹⁾+y⁽²⁾)/2 with
/// the normal-reference bandwidth. A deliberately simple stand-in for an
/// external alternative estimator when exercising [`combine`].
pub fn kde_baseline(sample: &PairedSample, eval_grid: &[f64]) -> Result<DensityEstimate> {
    let n = sample.n() as f64;
    let z: Vec<f64> = sample
        .y1()
        .iter()
        .zip(sample.y2())
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    let mean = z.iter().sum::<f64>() / n;
    let sd = if sample.n() > 1 {
        (z.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        1.0
    };
    let bw = (1.06 * sd * n.powf(-0.2)).max(1e-6);
    let norm = 1.0 / (n * bw * (2.0 * std::f64::consts::PI).sqrt());
    let values: Vec<f64> = eval_grid
        .iter()
        .map(|&x| {
            let mut acc = 0.0;
            for &zi in &z {
                let u = (x - zi) / bw;
                acc += (-0.5 * u * u).exp();
            }
            acc * norm
        })
        .collect();
    let params = EstimatorParams::new(0, bw, bw)?;
    DensityEstimate::new(eval_grid.to_vec(), values, params, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::regular_grid;

    fn grid_estimate(values: Vec<f64>, clipped: bool) -> DensityEstimate {
        let grid = regular_grid(0.0, 1.0, values.len());
        let params = EstimatorParams::new(0, 1.0, 1.0).unwrap();
        DensityEstimate::new(grid, values, params, clipped).unwrap()
    }

    #[test]
    fn sigma_n_formula() {
        let g = RhoGrid::new(vec![1.0, 2.0, 4.0], 1.0, 1.0, 1000).unwrap();
        let s = sigma_n(&g, 2.0).unwrap();
        // (ln ln 1000 / ln 1000)^{2·1/2} = 0.27977...
        assert!((s - 0.2798).abs() < 2e-4, "{s}");
        // Increasing in rho (base < 1, exponent decreasing).
        assert!(sigma_n(&g, 1.0).unwrap() < sigma_n(&g, 2.0).unwrap());
        assert!(sigma_n(&g, 2.0).unwrap() < sigma_n(&g, 4.0).unwrap());
        // Linear in c_sigma.
        let g2 = RhoGrid::new(vec![1.0, 2.0, 4.0], 1.0, 2.0, 1000).unwrap();
        assert!((sigma_n(&g2, 2.0).unwrap() - 2.0 * s).abs() < 1e-12);
    }

    #[test]
    fn sigma_n_domain_errors() {
        let g = RhoGrid::new(vec![1.5, 2.0], 1.0, 1.0, 10).unwrap();
        assert!(sigma_n(&g, 1.5).is_err());
        let g = RhoGrid::new(vec![1.5, 2.0], 1.0, 1.0, 1000).unwrap();
        assert!(sigma_n(&g, 3.0).is_err());
    }

    #[test]
    fn rho_grid_validation() {
        assert!(RhoGrid::new(vec![], 1.0, 1.0, 100).is_err());
        assert!(RhoGrid::new(vec![0.5, 2.0], 1.0, 1.0, 100).is_err());
        assert!(RhoGrid::new(vec![2.0, 2.0], 1.0, 1.0, 100).is_err());
        assert!(RhoGrid::new(vec![1.0, 2.0], 0.0, 1.0, 100).is_err());
    }

    #[test]
    fn select_rho_singleton_grid() {
        let g = RhoGrid::new(vec![2.0], 1.0, 1.0, 1000).unwrap();
        let est = grid_estimate(vec![0.5; 32], true);
        let (rho, a) = select_rho(&[(2.0, est)], &g).unwrap();
        assert_eq!(rho, 2.0);
        assert_eq!(a, vec![(2.0, 0.0)]);
    }

    #[test]
    fn identical_estimates_pick_smallest_rho() {
        let g = RhoGrid::new(vec![1.5, 2.0, 3.0], 1.0, 1.0, 1000).unwrap();
        let est = grid_estimate(vec![0.25; 64], true);
        let fits: Vec<_> = g.rhos.iter().map(|&r| (r, est.clone())).collect();
        let (rho, a) = select_rho(&fits, &g).unwrap();
        assert_eq!(rho, 1.5);
        assert!(a.iter().all(|&(_, v)| v == 0.0));
    }

    #[test]
    fn hand_computed_three_estimate_case() {
        // Constant tabulations on [0, 1]: ‖f_i − f_j‖₂ = |c_i − c_j|.
        // c = (0, 0.8, 1.0) on rhos (1.5, 2, 3), beta = 1, n = 1000,
        // c_sigma = 0.5 → base = lnln(1000)/ln(1000) = 0.279767.
        //   σ(1.5) = 0.5·base^{4/3} = 0.091512
        //   σ(2)   = 0.5·base^{1}   = 0.139883
        //   σ(3)   = 0.5·base^{2/3} = 0.213864
        // A(1.5) = max(0, 0.8−σ(2), 1.0−σ(3)) = 0.786136
        // A(2)   = max(0, 0.2−σ(3)) = 0 (negative)
        // A(3)   = 0
        // Scores: 0.877648, 0.139883, 0.213864 → argmin at rho = 2.
        let g = RhoGrid::new(vec![1.5, 2.0, 3.0], 1.0, 0.5, 1000).unwrap();
        let n_pts = 101;
        let fits = vec![
            (1.5, grid_estimate(vec![0.0; n_pts], true)),
            (2.0, grid_estimate(vec![0.8; n_pts], true)),
            (3.0, grid_estimate(vec![1.0; n_pts], true)),
        ];
        let (rho, a) = select_rho(&fits, &g).unwrap();
        assert_eq!(rho, 2.0);
        assert!((a[0].1 - 0.786136).abs() < 1e-5, "{:?}", a);
        assert_eq!(a[1].1, 0.0);
        assert_eq!(a[2].1, 0.0);
    }

    #[test]
    fn bias_proxy_vanishes_at_rho_max() {
        // Whatever the estimates, the sup at the last grid point is over the
        // singleton {rho_max}, giving max(0, −σ) = 0.
        let g = RhoGrid::new(vec![1.0, 2.5], 1.0, 0.3, 500).unwrap();
        let fits = vec![
            (1.0, grid_estimate(vec![0.9; 16], true)),
            (
                2.5,
                grid_estimate(
                    vec![
                        -0.4, 0.7, 0.1, 0.0, 0.2, 0.2, 0.0, 0.0, 0.1, 0.3, 0.0, 0.0, 0.0, 0.0,
                        0.0, 0.9,
                    ],
                    false,
                ),
            ),
        ];
        let (_, a) = select_rho(&fits, &g).unwrap();
        assert_eq!(a.last().unwrap().1, 0.0);
    }

    #[test]
    fn select_rho_rejects_mismatched_grids() {
        let g = RhoGrid::new(vec![1.0, 2.0], 1.0, 1.0, 1000).unwrap();
        let params = EstimatorParams::new(0, 1.0, 1.0).unwrap();
        let a = grid_estimate(vec![0.0; 16], true);
        let b = DensityEstimate::new(regular_grid(0.0, 2.0, 16), vec![0.0; 16], params, true).unwrap();
        assert!(select_rho(&[(1.0, a), (2.0, b)], &g).is_err());
    }

    #[test]
    fn combine_branch_boundary_is_inclusive() {
        assert_eq!(combine_branch(1.0, 1.0), Branch::Alt);
        assert_eq!(combine_branch(0.0, 1.0), Branch::Alt);
        assert_eq!(combine_branch(1.0 + 1e-15, 1.0), Branch::Main);
    }

    #[test]
    fn combine_zero_distance_keeps_alternative() {
        let est = grid_estimate(vec![0.3; 32], true);
        let cfg = CombinationConfig { c_adapt: 1.0, beta: 1.0, rho: 2.0 };
        let (_, branch) = combine(&est, &est.clone(), &cfg, 1000).unwrap();
        assert_eq!(branch, Branch::Alt);
    }

    #[test]
    fn combine_double_threshold_keeps_main() {
        let cfg = CombinationConfig { c_adapt: 1.0, beta: 1.0, rho: 2.0 };
        let thr = cfg.threshold(1000).unwrap();
        // Constant offset c over [0, 1] gives dist² = c²; pick c² = 2·thr.
        let c = (2.0 * thr).sqrt();
        let f_main = grid_estimate(vec![0.5; 64], true);
        let f_alt = grid_estimate(vec![0.5 + c; 64], true);
        let (kept, branch) = combine(&f_main, &f_alt, &cfg, 1000).unwrap();
        assert_eq!(branch, Branch::Main);
        assert_eq!(kept.values(), f_main.values());
    }

    #[test]
    fn combine_threshold_monotone_in_c_adapt() {
        // Quadrupling c_adapt can move a branch from Main to Alt, never back.
        let cfg1 = CombinationConfig { c_adapt: 1.0, beta: 1.0, rho: 2.0 };
        let cfg4 = CombinationConfig { c_adapt: 4.0, beta: 1.0, rho: 2.0 };
        let f_main = grid_estimate(vec![0.0; 64], true);
        for offset in [0.0, 0.1, 0.3, 0.6, 1.0, 2.0] {
            let f_alt = grid_estimate(vec![offset; 64], true);
            let b1 = combine(&f_main, &f_alt, &cfg1, 1000).unwrap().1;
            let b4 = combine(&f_main, &f_alt, &cfg4, 1000).unwrap().1;
            if b1 == Branch::Alt {
                assert_eq!(b4, Branch::Alt, "offset {offset}");
            }
        }
    }

    #[test]
    fn q_grid_matches_formula() {
        let qs = q_grid(1000);
        assert_eq!(qs.len(), 5);
        for (k, q) in qs.iter().enumerate() {
            assert!((q - (k + 1) as f64 / (4.0 * std::f64::consts::PI)).abs() < 1e-15);
        }
        assert_eq!(q_grid(81).len(), 3);
        assert_eq!(q_grid(80).len(), 2);
    }

    #[test]
    fn cv_config_split_partitions() {
        let params = EstimatorParams::new(5, 1.0, 1.0).unwrap();
        let cfg = CvConfig::new(100, vec![params], 7).unwrap();
        assert_eq!(cfg.e1.len(), 40);
        assert_eq!(cfg.e2.len(), 40);
        assert_eq!(cfg.t.len(), 20);
        cfg.validate(100).unwrap();
        assert!(CvConfig::new(80, vec![params], 7).is_err());
        assert!(CvConfig::new(100, vec![], 7).is_err());
    }

    #[test]
    fn noise_cutoff_limits() {
        let sample = PairedSample::new(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
        let grid = regular_grid(-2.0, 2.0, 41);
        let opts = NoiseDensityOptions::default();
        let p = PolyCF::constant();
        assert!(estimate_noise_density(&sample, &p, Coordinate::First, 0.0, &grid, &opts).is_err());
        assert!(
            estimate_noise_density(&sample, &p, Coordinate::First, 51.0, &grid, &opts).is_err()
        );
    }

    #[test]
    fn small_cutoff_approaches_flat_sinc_profile() {
        // With q one Fourier-mode wide the ratio is ≈ 1 near 0 and the
        // inversion degenerates to the sinc kernel scaled by q/π at 0.
        let sample = PairedSample::new(vec![0.01, -0.02, 0.005], vec![0.0, 0.01, -0.01]).unwrap();
        let grid = regular_grid(-1.0, 1.0, 81);
        let opts = NoiseDensityOptions { quad_points: 256, ..Default::default() };
        let q = 0.05;
        let est = estimate_noise_density_with_cf(
            &sample,
            |_| Complex64::new(1.0, 0.0),
            Coordinate::First,
            q,
            &grid,
            &opts,
        )
        .unwrap();
        let expected = q / std::f64::consts::PI;
        for &v in est.values() {
            assert!((v - expected).abs() < 0.01 * expected, "{v} vs {expected}");
        }
    }

    #[test]
    fn convolve_conserves_mass() {
        // Two unit-mass triangles convolve to (approximately) unit mass.
        let tri: Vec<f64> = regular_grid(-1.0, 1.0, 201)
            .iter()
            .map(|&x| (1.0 - x.abs()).max(0.0))
            .collect();
        let f = grid_estimate_on(-1.0, 1.0, tri.clone());
        let g = grid_estimate_on(-1.0, 1.0, tri);
        let p = convolve(&f, &g).unwrap();
        assert!((p.integral() - 1.0).abs() < 0.05, "mass {}", p.integral());
        // Convolution of triangles peaks at 0.
        let peak_idx = p
            .values()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert!((p.grid()[peak_idx]).abs() < 0.05);
    }

    fn grid_estimate_on(lo: f64, hi: f64, values: Vec<f64>) -> DensityEstimate {
        let grid = regular_grid(lo, hi, values.len());
        let params = EstimatorParams::new(0, 1.0, 1.0).unwrap();
        DensityEstimate::new(grid, values, params, true).unwrap()
    }

    #[test]
    fn kde_baseline_integrates_to_one() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let law = crate::distributions::Law::Gaussian { mean: 0.0, sd: 1.0 };
        let y1 = law.sample(400, &mut rng).unwrap();
        let y2 = law.sample(400, &mut rng).unwrap();
        let sample = PairedSample::new(y1, y2).unwrap();
        let est = kde_baseline(&sample, &regular_grid(-6.0, 6.0, 601)).unwrap();
        assert!((est.integral() - 1.0).abs() < 0.02);
        assert!(est.clipped);
    }
}
