//! Coefficient search for the near-minimizer of the contrast functional.
//!
//! The search contract is the defining inequality of the estimator: the
//! returned candidate never scores worse than its starting point (enforced
//! by falling back to the initialization), hence always satisfies
//! `objective ≤ M_n(init) + 1/n`. Two methods are provided: a BFGS-style
//! quasi-Newton loop on finite-difference gradients (default, mirroring a
//! generic minimizer run with default settings) and Nelder–Mead for
//! robustness at small degrees.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cf_model::{clamp_to_upsilon, project_cf, PolyCF, UpsilonBound};
use crate::criterion::{CriterionContext, DEFAULT_FD_STEP};
use crate::distributions::Law;
use crate::error::{DeconvError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    NelderMead,
    #[default]
    QuasiNewtonFd,
}

/// How the starting coefficients are chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum Init {
    /// Taylor projection of a known signal characteristic function
    /// (simulation-only oracle).
    OracleProjection,
    /// All coefficients zero, i.e. the constant candidate.
    #[default]
    Zeros,
    /// Explicit starting polynomial (resized to the fit degree).
    Given(PolyCF),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub method: Method,
    pub max_iters: usize,
    /// Relative objective-decrease tolerance.
    pub ftol: f64,
    pub init: Init,
    /// Project onto the admissible coefficient box after every iteration.
    pub clamp: bool,
    pub restarts: usize,
    /// Seed for restart jitter; part of the determinism contract.
    pub seed: u64,
    /// Bounds used when `clamp` is set (and for restart jitter scale).
    pub upsilon: UpsilonBound,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            method: Method::QuasiNewtonFd,
            max_iters: 300,
            ftol: 1e-9,
            init: Init::Zeros,
            clamp: false,
            restarts: 0,
            seed: 0,
            upsilon: UpsilonBound::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(DeconvError::InvalidParameter("max_iters must be >= 1".into()));
        }
        if !(self.ftol > 0.0) {
            return Err(DeconvError::InvalidParameter(format!("ftol must be > 0, got {}", self.ftol)));
        }
        Ok(())
    }
}

/// Outcome of one coefficient search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    pub phi_hat: PolyCF,
    /// Final contrast value; never exceeds `init_objective`.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub init_objective: f64,
}

/// Search for a near-minimizer of the contrast at the given degree.
///
/// `oracle_law` is required for [`Init::OracleProjection`] and ignored
/// otherwise. Fails with a numerical error if the initialization already
/// scores non-finite.
pub fn fit_cf(
    ctx: &CriterionContext,
    m: usize,
    cfg: &OptimizerConfig,
    oracle_law: Option<&Law>,
) -> Result<FitResult> {
    cfg.validate()?;
    let init = initial_point(m, cfg, oracle_law)?;
    let init = if cfg.clamp { clamp_to_upsilon(&init, &cfg.upsilon) } else { init };
    let init_objective = ctx.value(&init);
    if !init_objective.is_finite() {
        return Err(DeconvError::NumericalFailure {
            message: format!("contrast at initialization is {init_objective}"),
            iterate: init.stored().to_vec(),
        });
    }

    let mut best = run_search(ctx, init.clone(), init_objective, cfg);
    if cfg.restarts > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for _ in 0..cfg.restarts {
            let mut jittered: Vec<f64> = init
                .stored()
                .iter()
                .enumerate()
                .map(|(idx, &c)| {
                    let sd = if cfg.clamp { 0.1 * cfg.upsilon.coeff_bound(idx + 1) } else { 0.1 };
                    c + sd * standard_normal(&mut rng)
                })
                .collect();
            if cfg.clamp {
                jittered = clamp_to_upsilon(&PolyCF::from_stored(jittered), &cfg.upsilon)
                    .stored()
                    .to_vec();
            }
            let start = PolyCF::from_stored(jittered);
            let start_obj = ctx.value(&start);
            if !start_obj.is_finite() {
                continue;
            }
            let run = run_search(ctx, start, start_obj, cfg);
            if run.objective < best.objective {
                best = run;
            }
        }
    }

    // Fallback keeps the near-minimizer contract unconditionally.
    if best.objective > init_objective {
        return Ok(FitResult {
            phi_hat: init,
            objective: init_objective,
            iterations: best.iterations,
            converged: false,
            init_objective,
        });
    }
    Ok(FitResult { init_objective, ..best })
}

/// Independent searches over several degrees sharing one context. Failed
/// degrees are reported in place rather than aborting the sweep.
pub fn fit_cf_over_degrees(
    ctx: &CriterionContext,
    degrees: &[usize],
    cfg: &OptimizerConfig,
    oracle_law: Option<&Law>,
) -> Result<BTreeMap<usize, Result<FitResult>>> {
    if degrees.is_empty() {
        return Err(DeconvError::InvalidParameter("degree list must be nonempty".into()));
    }
    let mut seen = std::collections::BTreeSet::new();
    for &d in degrees {
        if !seen.insert(d) {
            return Err(DeconvError::InvalidParameter(format!("duplicate degree {d} in sweep")));
        }
    }
    Ok(degrees
        .iter()
        .map(|&d| (d, fit_cf(ctx, d, cfg, oracle_law)))
        .collect())
}

fn initial_point(m: usize, cfg: &OptimizerConfig, oracle_law: Option<&Law>) -> Result<PolyCF> {
    match &cfg.init {
        Init::Zeros => Ok(PolyCF::from_stored(vec![0.0; m])),
        Init::Given(p) => Ok(p.resized(m)),
        Init::OracleProjection => {
            let law = oracle_law.ok_or_else(|| {
                DeconvError::UnsupportedInit("oracle projection requires the signal law".into())
            })?;
            project_cf(law, m)
        }
    }
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    use rand_distr::Distribution;
    rand_distr::StandardNormal.sample(rng)
}

struct SearchOutcome {
    phi: PolyCF,
    objective: f64,
    iterations: usize,
    converged: bool,
}

impl From<SearchOutcome> for FitResult {
    fn from(s: SearchOutcome) -> FitResult {
        FitResult {
            phi_hat: s.phi,
            objective: s.objective,
            iterations: s.iterations,
            converged: s.converged,
            init_objective: f64::NAN,
        }
    }
}

fn run_search(ctx: &CriterionContext, start: PolyCF, start_obj: f64, cfg: &OptimizerConfig) -> FitResult {
    if start.degree() == 0 {
        return FitResult {
            phi_hat: start,
            objective: start_obj,
            iterations: 0,
            converged: true,
            init_objective: f64::NAN,
        };
    }
    let outcome = match cfg.method {
        Method::NelderMead => nelder_mead(ctx, start, start_obj, cfg),
        Method::QuasiNewtonFd => quasi_newton(ctx, start, start_obj, cfg),
    };
    outcome.into()
}

/// Objective wrapper: non-finite values are treated as +inf so they are
/// never accepted as iterates.
fn eval(ctx: &CriterionContext, cfg: &OptimizerConfig, x: &[f64]) -> (f64, PolyCF) {
    let mut p = PolyCF::from_stored(x.to_vec());
    if cfg.clamp {
        p = clamp_to_upsilon(&p, &cfg.upsilon);
    }
    let f = ctx.value(&p);
    (if f.is_finite() { f } else { f64::INFINITY }, p)
}

// ── BFGS with finite-difference gradients ────────────────────────────

fn quasi_newton(
    ctx: &CriterionContext,
    start: PolyCF,
    start_obj: f64,
    cfg: &OptimizerConfig,
) -> SearchOutcome {
    let m = start.degree();
    let mut x = start.stored().to_vec();
    let mut fx = start_obj;
    let mut best = (start.clone(), start_obj);
    // Inverse-Hessian approximation, row-major identity.
    let mut h_inv = identity(m);
    let mut grad = ctx.gradient(&start, DEFAULT_FD_STEP);
    let mut converged = false;
    let mut iterations = 0;

    let gtol = |f: f64| 1e-8 * (1.0 + f.abs());

    for iter in 0..cfg.max_iters {
        iterations = iter + 1;
        let gnorm = norm(&grad);
        if gnorm <= gtol(fx) {
            converged = true;
            break;
        }
        // d = -H g
        let mut dir = mat_vec(&h_inv, &grad);
        for d in dir.iter_mut() {
            *d = -*d;
        }
        // Fall back to steepest descent if the direction fails to point
        // downhill (stale curvature).
        if dot(&dir, &grad) >= 0.0 {
            h_inv = identity(m);
            dir = grad.iter().map(|g| -g).collect();
        }

        // Backtracking Armijo line search.
        let slope = dot(&dir, &grad);
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..50 {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            let (f_trial, p_trial) = eval(ctx, cfg, &trial);
            if f_trial <= fx + 1e-4 * step * slope {
                accepted = Some((p_trial.stored().to_vec(), f_trial));
                break;
            }
            step *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            // No acceptable step in the search direction.
            converged = gnorm <= 1e-5 * (1.0 + fx.abs());
            break;
        };

        let grad_new = ctx.gradient(&PolyCF::from_stored(x_new.clone()), DEFAULT_FD_STEP);
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = grad_new.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 {
            bfgs_update(&mut h_inv, &s, &y, sy);
        }

        let rel_decrease = (fx - f_new) / fx.abs().max(f_new.abs()).max(1e-300);
        x = x_new;
        fx = f_new;
        grad = grad_new;
        if fx < best.1 {
            best = (PolyCF::from_stored(x.clone()), fx);
        }
        if rel_decrease >= 0.0 && rel_decrease < cfg.ftol {
            converged = true;
            break;
        }
    }

    SearchOutcome { phi: best.0, objective: best.1, iterations, converged }
}

fn identity(m: usize) -> Vec<f64> {
    let mut h = vec![0.0; m * m];
    for i in 0..m {
        h[i * m + i] = 1.0;
    }
    h
}

fn mat_vec(a: &[f64], v: &[f64]) -> Vec<f64> {
    let m = v.len();
    (0..m).map(|i| dot(&a[i * m..(i + 1) * m], v)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ with ρ = 1/(sᵀy).
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let m = s.len();
    let rho = 1.0 / sy;
    let hy = mat_vec(h, y);
    let yhy = dot(y, &hy);
    // Expanded form: H + ρ²(yᵀHy)ssᵀ + ρssᵀ − ρ(s(Hy)ᵀ + (Hy)sᵀ)
    for i in 0..m {
        for j in 0..m {
            h[i * m + j] += rho * rho * yhy * s[i] * s[j] + rho * s[i] * s[j]
                - rho * (s[i] * hy[j] + hy[i] * s[j]);
        }
    }
}

// ── Nelder–Mead ──────────────────────────────────────────────────────

fn nelder_mead(
    ctx: &CriterionContext,
    start: PolyCF,
    start_obj: f64,
    cfg: &OptimizerConfig,
) -> SearchOutcome {
    let m = start.degree();
    let x0 = start.stored().to_vec();

    // Initial simplex: start point plus one perturbed vertex per coordinate.
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(m + 1);
    simplex.push((x0.clone(), start_obj));
    for k in 0..m {
        let mut v = x0.clone();
        v[k] += 0.1 * (1.0 + v[k].abs());
        let (f, p) = eval(ctx, cfg, &v);
        simplex.push((p.stored().to_vec(), f));
    }

    let (alpha, gamma, beta, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut iterations = 0;
    let mut converged = false;

    for iter in 0..cfg.max_iters {
        iterations = iter + 1;
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let f_best = simplex[0].1;
        let f_worst = simplex[m].1;
        let spread = 2.0 * (f_worst - f_best).abs() / (f_worst.abs() + f_best.abs() + 1e-300);
        if spread < cfg.ftol {
            converged = true;
            break;
        }

        // Centroid of all but the worst vertex.
        let mut centroid = vec![0.0; m];
        for v in &simplex[..m] {
            for (c, xi) in centroid.iter_mut().zip(&v.0) {
                *c += xi;
            }
        }
        for c in centroid.iter_mut() {
            *c /= m as f64;
        }

        let reflect: Vec<f64> = centroid
            .iter()
            .zip(&simplex[m].0)
            .map(|(c, w)| c + alpha * (c - w))
            .collect();
        let (f_reflect, _) = eval(ctx, cfg, &reflect);

        if f_reflect < simplex[0].1 {
            let expand: Vec<f64> = centroid
                .iter()
                .zip(&simplex[m].0)
                .map(|(c, w)| c + gamma * (c - w))
                .collect();
            let (f_expand, _) = eval(ctx, cfg, &expand);
            simplex[m] = if f_expand < f_reflect { (expand, f_expand) } else { (reflect, f_reflect) };
        } else if f_reflect < simplex[m - 1].1 {
            simplex[m] = (reflect, f_reflect);
        } else {
            let contract: Vec<f64> = centroid
                .iter()
                .zip(&simplex[m].0)
                .map(|(c, w)| c + beta * (w - c))
                .collect();
            let (f_contract, _) = eval(ctx, cfg, &contract);
            if f_contract < simplex[m].1 {
                simplex[m] = (contract, f_contract);
            } else {
                // Shrink toward the best vertex.
                let best_v = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    let shrunk: Vec<f64> = best_v
                        .iter()
                        .zip(&v.0)
                        .map(|(b, xi)| b + sigma * (xi - b))
                        .collect();
                    let (f, _) = eval(ctx, cfg, &shrunk);
                    *v = (shrunk, f);
                }
            }
        }
    }

    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    let (x_best, f_best) = simplex.swap_remove(0);
    let phi = if cfg.clamp {
        clamp_to_upsilon(&PolyCF::from_stored(x_best), &cfg.upsilon)
    } else {
        PolyCF::from_stored(x_best)
    };
    SearchOutcome { phi, objective: f_best, iterations, converged }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criterion::QuadGrid;
    use crate::ecf::PairedSample;

    fn tiny_ctx() -> CriterionContext {
        let s = PairedSample::new(vec![0.4], vec![0.9]).unwrap();
        CriterionContext::new(&s, QuadGrid::new(1.0, 10, 10).unwrap()).unwrap()
    }

    #[test]
    fn zeros_init_on_single_observation_is_global_minimum() {
        let ctx = tiny_ctx();
        let cfg = OptimizerConfig::default();
        let fit = fit_cf(&ctx, 2, &cfg, None).unwrap();
        assert!(fit.objective < 1e-12, "objective {}", fit.objective);
        assert!(fit.objective <= fit.init_objective);
    }

    #[test]
    fn oracle_init_requires_law() {
        let ctx = tiny_ctx();
        let cfg = OptimizerConfig { init: Init::OracleProjection, ..Default::default() };
        assert!(matches!(fit_cf(&ctx, 2, &cfg, None), Err(DeconvError::UnsupportedInit(_))));
    }

    #[test]
    fn degree_zero_is_constant_candidate() {
        let ctx = tiny_ctx();
        let fit = fit_cf(&ctx, 0, &OptimizerConfig::default(), None).unwrap();
        assert_eq!(fit.phi_hat, PolyCF::constant());
        assert_eq!(fit.objective, fit.init_objective);
    }

    #[test]
    fn duplicate_degrees_rejected() {
        let ctx = tiny_ctx();
        let cfg = OptimizerConfig::default();
        assert!(fit_cf_over_degrees(&ctx, &[2, 3, 2], &cfg, None).is_err());
        assert!(fit_cf_over_degrees(&ctx, &[], &cfg, None).is_err());
    }

    #[test]
    fn config_validation() {
        let ctx = tiny_ctx();
        let cfg = OptimizerConfig { max_iters: 0, ..Default::default() };
        assert!(fit_cf(&ctx, 2, &cfg, None).is_err());
        let cfg = OptimizerConfig { ftol: 0.0, ..Default::default() };
        assert!(fit_cf(&ctx, 2, &cfg, None).is_err());
    }
}
