//! Candidate characteristic functions: complex polynomials with Hermitian
//! coefficient symmetry, the truncation operator, and the coefficient-decay
//! bounds of the analytic class Υ_{ρ,S}.
//!
//! A degree-m candidate is 1 + Σ_{k=1..m} c_k t^k with c_k real for even k
//! and purely imaginary for odd k; this forces φ(0) = 1 and
//! φ(−t) = conj(φ(t)) for real t, exactly the constraints the class needs.
//! Only the m free real numbers are stored.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::distributions::Law;
use crate::error::{DeconvError, Result};

/// Storage convention recorded in the JSON form of a [`PolyCF`].
pub const COEFF_CONVENTION: &str = "even-real-odd-imag";

/// A polynomial candidate characteristic function.
///
/// `stored[k-1]` holds the free real parameter of degree k: the coefficient
/// itself for even k, its imaginary part for odd k.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyCF {
    stored: Vec<f64>,
}

impl PolyCF {
    /// The constant candidate φ ≡ 1 (degree 0).
    pub fn constant() -> Self {
        PolyCF { stored: Vec::new() }
    }

    /// Wrap stored parameters; degree is the vector length.
    pub fn from_stored(stored: Vec<f64>) -> Self {
        PolyCF { stored }
    }

    pub fn degree(&self) -> usize {
        self.stored.len()
    }

    pub fn stored(&self) -> &[f64] {
        &self.stored
    }

    /// Complex coefficient of degree k (k = 0 gives the fixed constant 1).
    pub fn coefficient(&self, k: usize) -> Complex64 {
        if k == 0 {
            Complex64::new(1.0, 0.0)
        } else if k > self.degree() {
            Complex64::new(0.0, 0.0)
        } else if k % 2 == 0 {
            Complex64::new(self.stored[k - 1], 0.0)
        } else {
            Complex64::new(0.0, self.stored[k - 1])
        }
    }

    /// Horner evaluation of 1 + Σ c_k t^k at real t.
    pub fn evaluate(&self, t: f64) -> Complex64 {
        let m = self.degree();
        if m == 0 {
            return Complex64::new(1.0, 0.0);
        }
        let mut acc = self.coefficient(m);
        for k in (1..m).rev() {
            acc = acc * t + self.coefficient(k);
        }
        acc * t + Complex64::new(1.0, 0.0)
    }

    /// Keep terms of degree ≤ m (identity when the degree is already ≤ m).
    pub fn truncated(&self, m: usize) -> PolyCF {
        let keep = m.min(self.degree());
        PolyCF { stored: self.stored[..keep].to_vec() }
    }

    /// Stored parameters resized to exactly length m (drop or zero-pad).
    pub fn resized(&self, m: usize) -> PolyCF {
        let mut stored = self.stored.clone();
        stored.resize(m, 0.0);
        PolyCF { stored }
    }
}

/// Serialized form: degree, the stored parameters, and the convention tag.
#[derive(Serialize, Deserialize)]
struct PolyCFRepr {
    m: usize,
    convention: String,
    coeffs: Vec<f64>,
}

impl Serialize for PolyCF {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        PolyCFRepr {
            m: self.degree(),
            convention: COEFF_CONVENTION.to_string(),
            coeffs: self.stored.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PolyCF {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = PolyCFRepr::deserialize(deserializer)?;
        if repr.convention != COEFF_CONVENTION {
            return Err(serde::de::Error::custom(format!(
                "unknown coefficient convention '{}'",
                repr.convention
            )));
        }
        if repr.coeffs.len() != repr.m {
            return Err(serde::de::Error::custom(format!(
                "degree {} does not match {} stored coefficients",
                repr.m,
                repr.coeffs.len()
            )));
        }
        Ok(PolyCF { stored: repr.coeffs })
    }
}

/// Truncation operator on a raw coefficient sequence (constant term first).
///
/// The constant term must be 1; higher coefficients are read through the
/// Hermitian parametrization (real part for even degrees, imaginary part
/// for odd degrees).
pub fn truncate(series: &[Complex64], m: usize) -> Result<PolyCF> {
    let c0 = series.first().copied().unwrap_or_else(|| Complex64::new(0.0, 0.0));
    if (c0 - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
        return Err(DeconvError::ModelClass(format!(
            "constant term must be 1, got {c0}"
        )));
    }
    let keep = m.min(series.len().saturating_sub(1));
    let stored = (1..=keep)
        .map(|k| if k % 2 == 0 { series[k].re } else { series[k].im })
        .collect();
    Ok(PolyCF { stored })
}

/// Degree-m Taylor polynomial of the law's characteristic function at 0,
/// built from the analytic raw moments: c_k = i^k μ_k / k!.
///
/// This is the oracle initialization of the contrast minimizer.
pub fn project_cf(law: &Law, m: usize) -> Result<PolyCF> {
    let mut stored = Vec::with_capacity(m);
    let mut k_factorial = 1.0;
    for k in 1..=m {
        k_factorial *= k as f64;
        let mu = law.raw_moment(k).ok_or_else(|| {
            DeconvError::UnsupportedInit(format!("law {law} lacks moment {k}"))
        })?;
        // i^k cycles 1, i, -1, -i; keep the coordinate the parametrization stores.
        let sign = if k % 4 == 1 || k % 4 == 0 { 1.0 } else { -1.0 };
        stored.push(sign * mu / k_factorial);
    }
    Ok(PolyCF { stored })
}

/// Coefficient-decay bounds of the analytic class: |c_j| ≤ S^j / j^{j/ρ}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpsilonBound {
    pub rho: f64,
    pub s: f64,
}

impl Default for UpsilonBound {
    /// The simulations never pin S numerically; these defaults only matter
    /// in opt-in clamped optimization.
    fn default() -> Self {
        UpsilonBound { rho: 2.0, s: 10.0 }
    }
}

impl UpsilonBound {
    pub fn new(rho: f64, s: f64) -> Result<Self> {
        if !(rho >= 1.0) || !(s > 0.0) {
            return Err(DeconvError::InvalidParameter(format!(
                "admissibility bounds require rho >= 1 and S > 0, got ({rho}, {s})"
            )));
        }
        Ok(UpsilonBound { rho, s })
    }

    /// Admissible magnitude for the degree-j coefficient, j ≥ 1.
    pub fn coeff_bound(&self, j: usize) -> f64 {
        let j = j as f64;
        // j^{j/rho} through the exponential to stay stable for large j.
        self.s.powf(j) * (-(j / self.rho) * j.ln()).exp()
    }
}

/// Clip each coefficient magnitude to the admissible bound, preserving sign.
pub fn clamp_to_upsilon(p: &PolyCF, b: &UpsilonBound) -> PolyCF {
    let stored = p
        .stored
        .iter()
        .enumerate()
        .map(|(idx, &c)| {
            let bound = b.coeff_bound(idx + 1);
            c.clamp(-bound, bound)
        })
        .collect();
    PolyCF { stored }
}
