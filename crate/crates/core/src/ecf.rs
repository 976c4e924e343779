//! Empirical bivariate characteristic function of the paired observations.
//!
//! The sample enters the whole estimation pipeline only through
//! φ̃_n(t₁, t₂) = (1/n) Σ_ℓ exp{i t₁ y⁽¹⁾_ℓ + i t₂ y⁽²⁾_ℓ}, tabulated once per
//! (dataset, quadrature grid) pair and reused by every contrast evaluation.

use std::io::{BufRead, Write};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::criterion::QuadGrid;
use crate::error::{DeconvError, Result};

/// Number of table rows a worker processes at a time. Fixed so results do
/// not depend on the thread count.
const ROW_CHUNK: usize = 32;

/// The n paired observations (y⁽¹⁾, y⁽²⁾) of one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSample {
    y1: Vec<f64>,
    y2: Vec<f64>,
}

impl PairedSample {
    /// Build a sample, checking equal lengths, n ≥ 1 and finiteness.
    pub fn new(y1: Vec<f64>, y2: Vec<f64>) -> Result<Self> {
        if y1.len() != y2.len() {
            return Err(DeconvError::InvalidParameter(format!(
                "column lengths differ: {} vs {}",
                y1.len(),
                y2.len()
            )));
        }
        if y1.is_empty() {
            return Err(DeconvError::InvalidParameter("sample must contain at least one observation".into()));
        }
        if y1.iter().chain(y2.iter()).any(|v| !v.is_finite()) {
            return Err(DeconvError::InvalidParameter("sample contains non-finite values".into()));
        }
        Ok(PairedSample { y1, y2 })
    }

    pub fn n(&self) -> usize {
        self.y1.len()
    }

    pub fn y1(&self) -> &[f64] {
        &self.y1
    }

    pub fn y2(&self) -> &[f64] {
        &self.y2
    }

    /// Observations with the given indices, in the given order.
    pub fn subset(&self, idx: &[usize]) -> Result<Self> {
        let mut y1 = Vec::with_capacity(idx.len());
        let mut y2 = Vec::with_capacity(idx.len());
        for &i in idx {
            if i >= self.n() {
                return Err(DeconvError::Domain(format!("subset index {i} out of range (n = {})", self.n())));
            }
            y1.push(self.y1[i]);
            y2.push(self.y2[i]);
        }
        PairedSample::new(y1, y2)
    }

    /// Write the dataset CSV: header `y1,y2`, one observation per line.
    /// Values use the shortest decimal form that round-trips in IEEE-754.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "y1,y2")?;
        for (a, b) in self.y1.iter().zip(&self.y2) {
            writeln!(w, "{a},{b}")?;
        }
        Ok(())
    }

    /// Parse the dataset CSV written by [`PairedSample::write_csv`].
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut y1 = Vec::new();
        let mut y2 = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line.map_err(|e| DeconvError::Parse {
                line: lineno + 1,
                message: e.to_string(),
            })?;
            let line = line.trim();
            if lineno == 0 {
                if line != "y1,y2" {
                    return Err(DeconvError::Parse {
                        line: 1,
                        message: format!("expected header 'y1,y2', got '{line}'"),
                    });
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let parse = |field: Option<&str>, lineno: usize| -> Result<f64> {
                field
                    .ok_or_else(|| DeconvError::Parse {
                        line: lineno + 1,
                        message: "expected two comma-separated values".into(),
                    })?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| DeconvError::Parse {
                        line: lineno + 1,
                        message: e.to_string(),
                    })
            };
            y1.push(parse(parts.next(), lineno)?);
            y2.push(parse(parts.next(), lineno)?);
            if parts.next().is_some() {
                return Err(DeconvError::Parse {
                    line: lineno + 1,
                    message: "expected exactly two columns".into(),
                });
            }
        }
        PairedSample::new(y1, y2)
    }
}

/// φ̃_n at a single point; summation in index order for determinism.
pub fn ecf_at(sample: &PairedSample, t1: f64, t2: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (a, b) in sample.y1.iter().zip(&sample.y2) {
        acc += Complex64::from_polar(1.0, t1 * a + t2 * b);
    }
    acc / sample.n() as f64
}

/// φ̃_n tabulated on a rectangular grid, together with both marginals
/// φ̃_n(·, 0) and φ̃_n(0, ·) (recomputed, since 0 need not be a grid node).
#[derive(Debug, Clone)]
pub struct EcfTable {
    pub grid1: Vec<f64>,
    pub grid2: Vec<f64>,
    /// Row-major |grid1| × |grid2|.
    pub values: Vec<Complex64>,
    pub marginal1: Vec<Complex64>,
    pub marginal2: Vec<Complex64>,
}

impl EcfTable {
    #[inline]
    pub fn value(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.grid2.len() + j]
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        let k2 = self.grid2.len();
        &self.values[i * k2..(i + 1) * k2]
    }
}

/// Tabulate φ̃_n on `grid1 × grid2`.
///
/// The separable identity exp(i t₁ y₁ + i t₂ y₂) = exp(i t₁ y₁)·exp(i t₂ y₂)
/// confines the transcendental work to O(n·(|grid1|+|grid2|)) phase vectors;
/// the table itself is accumulated from outer products in fixed index order
/// (observations ascending within each row, rows independent).
pub fn ecf_table_on(sample: &PairedSample, grid1: &[f64], grid2: &[f64]) -> Result<EcfTable> {
    if grid1.is_empty() || grid2.is_empty() {
        return Err(DeconvError::Domain("empty characteristic-function grid".into()));
    }
    let n = sample.n();
    let k2 = grid2.len();
    let inv_n = 1.0 / n as f64;

    // Axis-2 phases, one contiguous row per observation.
    let phases2: Vec<Complex64> = sample
        .y2
        .iter()
        .flat_map(|&y| grid2.iter().map(move |&t| Complex64::from_polar(1.0, t * y)))
        .collect();

    let mut values = vec![Complex64::new(0.0, 0.0); grid1.len() * k2];
    values
        .par_chunks_mut(ROW_CHUNK * k2)
        .enumerate()
        .for_each(|(chunk_idx, chunk)| {
            let row0 = chunk_idx * ROW_CHUNK;
            for (r, row) in chunk.chunks_mut(k2).enumerate() {
                let t1 = grid1[row0 + r];
                for (l, &y) in sample.y1.iter().enumerate() {
                    let a = Complex64::from_polar(1.0, t1 * y);
                    let b = &phases2[l * k2..(l + 1) * k2];
                    for (cell, &p2) in row.iter_mut().zip(b) {
                        *cell += a * p2;
                    }
                }
                for cell in row.iter_mut() {
                    *cell *= inv_n;
                }
            }
        });

    let marginal1 = grid1.iter().map(|&t| ecf_at(sample, t, 0.0)).collect();
    let marginal2 = grid2.iter().map(|&t| ecf_at(sample, 0.0, t)).collect();

    Ok(EcfTable {
        grid1: grid1.to_vec(),
        grid2: grid2.to_vec(),
        values,
        marginal1,
        marginal2,
    })
}

/// Tabulate φ̃_n on the quadrature grid's midpoint nodes.
pub fn ecf_table(sample: &PairedSample, grid: &QuadGrid) -> Result<EcfTable> {
    ecf_table_on(sample, &grid.nodes1(), &grid.nodes2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criterion::QuadGrid;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    #[test]
    fn rejects_bad_samples() {
        assert!(PairedSample::new(vec![1.0], vec![1.0, 2.0]).is_err());
        assert!(PairedSample::new(vec![], vec![]).is_err());
        assert!(PairedSample::new(vec![f64::NAN], vec![0.0]).is_err());
    }

    #[test]
    fn single_observation_phase() {
        let s = PairedSample::new(vec![1.0], vec![2.0]).unwrap();
        let v = ecf_at(&s, PI, 0.0);
        assert!((v - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn origin_is_normalized() {
        let s = PairedSample::new(vec![0.3, -1.7, 2.2], vec![0.1, 0.0, -5.0]).unwrap();
        let v = ecf_at(&s, 0.0, 0.0);
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn two_term_hand_sum() {
        // Pairs (0,0) and (π,0) at t = (1,0): (e^{i0} + e^{iπ})/2 = 0.
        let s = PairedSample::new(vec![0.0, PI], vec![0.0, 0.0]).unwrap();
        let v = ecf_at(&s, 1.0, 0.0);
        assert!(v.norm() < 1e-15, "{v}");
    }

    #[test]
    fn table_matches_pointwise_calls() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let y1: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let y2: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let s = PairedSample::new(y1, y2).unwrap();
        let grid = QuadGrid::new(1.5, 4, 4).unwrap();
        let table = ecf_table(&s, &grid).unwrap();
        for (i, &t1) in table.grid1.iter().enumerate() {
            for (j, &t2) in table.grid2.iter().enumerate() {
                let direct = ecf_at(&s, t1, t2);
                assert!((table.value(i, j) - direct).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn single_observation_table_factorizes() {
        let s = PairedSample::new(vec![0.7], vec![0.7]).unwrap();
        let grid = QuadGrid::new(2.0, 5, 5).unwrap();
        let table = ecf_table(&s, &grid).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let prod = table.marginal1[i] * table.marginal2[j];
                assert!((table.value(i, j) - prod).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn marginal_at_zero_grid() {
        let s = PairedSample::new(vec![0.5, -0.25], vec![1.0, 2.0]).unwrap();
        let table = ecf_table_on(&s, &[0.0], &[0.0]).unwrap();
        assert!((table.marginal1[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn empty_grid_is_a_domain_error() {
        let s = PairedSample::new(vec![0.0], vec![0.0]).unwrap();
        assert!(matches!(ecf_table_on(&s, &[], &[1.0]), Err(DeconvError::Domain(_))));
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let s = PairedSample::new(vec![0.1, -2.5e-11, 3.0], vec![1.0 / 3.0, 7.25, -0.0]).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let back = PairedSample::read_csv(&buf[..]).unwrap();
        assert_eq!(s, back);

        let bad = b"y1,y2\n1.0,2.0\noops,3.0\n";
        match PairedSample::read_csv(&bad[..]) {
            Err(DeconvError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        let bad_header = b"a,b\n1.0,2.0\n";
        assert!(matches!(
            PairedSample::read_csv(&bad_header[..]),
            Err(DeconvError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn subset_extracts_rows() {
        let s = PairedSample::new(vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]).unwrap();
        let sub = s.subset(&[2, 0]).unwrap();
        assert_eq!(sub.y1(), &[3.0, 1.0]);
        assert_eq!(sub.y2(), &[6.0, 4.0]);
        assert!(s.subset(&[3]).is_err());
    }
}
