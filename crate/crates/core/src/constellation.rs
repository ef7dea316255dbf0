//! Unipolar PAM, linear space codes and codeword-difference (error) sets.
//!
//! A space code maps `L` PAM symbols to `N` nonnegative aperture intensities
//! through a nonnegative `N x L` matrix `F`: `x = F s`. Two power conventions
//! are in use and every code carries its tag:
//!
//! - [`Normalization::EntrySumOne`]: `sum_ij f_ij = 1`, the convention of the
//!   design problem solved in [`crate::optimizer`].
//! - [`Normalization::MeanPowerOne`]: `E[sum_i x_i] = 1` over equiprobable
//!   symbols, the convention used by [`crate::simulator`].
//!
//! The tag states intent; [`SpaceCode::check_normalization`] verifies it for a
//! given PAM order and [`SpaceCode::rescale`] converts between conventions.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::farey::gcd;
use crate::{Error, Result};

/// Largest supported bits per PAM symbol.
pub const MAX_BITS: u32 = 8;

/// Cap on the number of ordered symbol-vector pairs enumerated by [`error_set`].
pub const MAX_ERROR_PAIRS: u128 = 1 << 16;

/// Tolerance for normalization checks.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Tolerance used to merge error vectors of codes without an exact form.
pub const DEDUP_TOL: f64 = 1e-12;

fn check_bits(p: u32) -> Result<()> {
    if p == 0 || p > MAX_BITS {
        return Err(Error::invalid(format!("bits per symbol must be in 1..={MAX_BITS}, got {p}")));
    }
    Ok(())
}

/// Unipolar `2^p`-PAM amplitudes `0, 1, ..., 2^p - 1`.
pub fn pam_points(p: u32) -> Result<Vec<u32>> {
    check_bits(p)?;
    Ok((0..1u32 << p).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PamConstellation {
    bits: u32,
}

impl PamConstellation {
    pub fn new(p: u32) -> Result<Self> {
        check_bits(p)?;
        Ok(PamConstellation { bits: p })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn size(&self) -> u32 {
        1 << self.bits
    }

    pub fn max_level(&self) -> u32 {
        self.size() - 1
    }

    pub fn points(&self) -> Vec<u32> {
        (0..self.size()).collect()
    }

    /// `(c1, c2)` in `SEP = c1 E[Q(sqrt(c2 rho) h / P_op)]`:
    /// `c1 = 2 - 2^(1-p)`, `c2 = 3p / (2^(2p) - 1)`.
    pub fn sep_coefficients(&self) -> (f64, f64) {
        let p = self.bits as f64;
        let c1 = 2.0 - 2f64.powf(1.0 - p);
        let c2 = 3.0 * p / (4f64.powf(p) - 1.0);
        (c1, c2)
    }

    /// Mean amplitude `(2^p - 1)/2` of equiprobable symbols.
    pub fn mean_level(&self) -> f64 {
        self.max_level() as f64 / 2.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    EntrySumOne,
    MeanPowerOne,
}

/// Exact form `F = ints / denominator`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct ExactEntries {
    ints: Vec<u64>,
    denominator: u64,
}

/// A nonnegative `rows x cols` (`N x L`) linear space code.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceCode {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
    normalization: Normalization,
    exact: Option<ExactEntries>,
}

impl SpaceCode {
    /// Row-major entries; all must be finite and nonnegative.
    pub fn new(
        rows: usize,
        cols: usize,
        entries: Vec<f64>,
        normalization: Normalization,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("code dimensions must be positive"));
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: entries.len(),
            });
        }
        if let Some(f) = entries.iter().find(|f| !(**f >= 0.0 && f.is_finite())) {
            return Err(Error::invalid(format!("code entries must be finite and >= 0, got {f}")));
        }
        Ok(SpaceCode {
            rows,
            cols,
            entries,
            normalization,
            exact: None,
        })
    }

    /// `F = ints / denominator`, kept exactly for error-set deduplication.
    pub fn from_integer_matrix(
        rows: usize,
        cols: usize,
        ints: Vec<u64>,
        denominator: u64,
        normalization: Normalization,
    ) -> Result<Self> {
        if denominator == 0 {
            return Err(Error::invalid("zero denominator"));
        }
        let g = ints.iter().fold(denominator, |g, &v| gcd(g, v));
        let ints: Vec<u64> = ints.iter().map(|v| v / g).collect();
        let denominator = denominator / g;
        let entries = ints.iter().map(|&v| v as f64 / denominator as f64).collect();
        let mut code = Self::new(rows, cols, entries, normalization)?;
        code.exact = Some(ExactEntries { ints, denominator });
        Ok(code)
    }

    /// `n x n` identity, which has unit mean power for OOK with `n = 2`.
    pub fn identity(n: usize, normalization: Normalization) -> Result<Self> {
        let ints = (0..n * n).map(|k| u64::from(k % (n + 1) == 0)).collect();
        Self::from_integer_matrix(n, n, ints, 1, normalization)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    /// Integer numerators and common denominator, when the code is rational.
    pub fn exact(&self) -> Option<(&[u64], u64)> {
        self.exact.as_ref().map(|e| (e.ints.as_slice(), e.denominator))
    }

    pub fn entry_sum(&self) -> f64 {
        self.entries.iter().sum()
    }

    /// Verifies the declared convention for `2^p`-PAM inputs.
    pub fn check_normalization(&self, p: u32) -> Result<()> {
        let found = match self.normalization {
            Normalization::EntrySumOne => self.entry_sum(),
            Normalization::MeanPowerOne => mean_optical_power(self, p)?,
        };
        if (found - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::invalid(format!(
                "{:?} code has normalization value {found}",
                self.normalization
            )));
        }
        Ok(())
    }

    /// Scales the code to satisfy `target` for `2^p`-PAM.
    pub fn rescale(&self, target: Normalization, p: u32) -> Result<Self> {
        let pam = PamConstellation::new(p)?;
        let sum = self.entry_sum();
        if !(sum > 0.0) {
            return Err(Error::invalid("cannot rescale the all-zero code"));
        }
        if let Some(ex) = &self.exact {
            let total: u64 = ex.ints.iter().sum();
            let (num_scale, den) = match target {
                Normalization::EntrySumOne => (1, total),
                // sum f = 2 / (2^p - 1)
                Normalization::MeanPowerOne => (
                    2,
                    total
                        .checked_mul(u64::from(pam.max_level()))
                        .ok_or(Error::Overflow("rescale"))?,
                ),
            };
            let ints = ex.ints.iter().map(|v| v * num_scale).collect();
            return Self::from_integer_matrix(self.rows, self.cols, ints, den, target);
        }
        let want = match target {
            Normalization::EntrySumOne => 1.0,
            Normalization::MeanPowerOne => 1.0 / pam.mean_level(),
        };
        let entries = self.entries.iter().map(|f| f * want / sum).collect();
        Self::new(self.rows, self.cols, entries, target)
    }

    /// Codeword `x = F s`.
    pub fn encode(&self, s: &[u32]) -> Result<Vec<f64>> {
        if s.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: s.len(),
            });
        }
        Ok(self
            .entries
            .chunks(self.cols)
            .map(|row| row.iter().zip(s).map(|(f, &v)| f * v as f64).sum())
            .collect())
    }
}

/// Average of `sum_i x_i` over equiprobable `2^p`-PAM symbol vectors:
/// `sum_ij f_ij (2^p - 1)/2`.
pub fn mean_optical_power(code: &SpaceCode, p: u32) -> Result<f64> {
    let pam = PamConstellation::new(p)?;
    Ok(code.entry_sum() * pam.mean_level())
}

/// A nonzero codeword difference `e = F (s - s_hat)`.
///
/// With `M` receive apertures the codeword-matrix correlation is
/// `I_M kron (e e^T)`, so `e` alone determines every pairwise quantity.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorVector {
    pub e: Vec<f64>,
    /// Indices of `(s, s_hat)` in [`symbol_vectors`] order.
    pub source_pair: (usize, usize),
}

impl ErrorVector {
    pub fn has_zero(&self) -> bool {
        self.e.contains(&0.0)
    }

    /// All entries nonzero and of one sign.
    pub fn is_unipolar(&self) -> bool {
        !self.has_zero() && (self.e.iter().all(|&v| v > 0.0) || self.e.iter().all(|&v| v < 0.0))
    }

    pub fn norm_sq(&self) -> f64 {
        self.e.iter().map(|v| v * v).sum()
    }
}

/// Symbol vector with index `idx` in lexicographic order over `{0..2^p-1}^L`.
pub fn symbol_vector(idx: usize, p: u32, l: usize) -> Vec<u32> {
    let mask = (1usize << p) - 1;
    (0..l)
        .map(|k| ((idx >> (p as usize * (l - 1 - k))) & mask) as u32)
        .collect()
}

/// All `2^(pL)` symbol vectors in lexicographic order.
pub fn symbol_vectors(p: u32, l: usize) -> Result<Vec<Vec<u32>>> {
    check_bits(p)?;
    let total_bits = p as usize * l;
    if l == 0 || total_bits > 24 {
        return Err(Error::invalid(format!("symbol space 2^{total_bits} is not enumerable")));
    }
    Ok((0..1usize << total_bits).map(|i| symbol_vector(i, p, l)).collect())
}

/// Every distinct nonzero `F (s - s_hat)` over ordered pairs `s != s_hat` of
/// `2^p`-PAM vectors of length `l`, in order of first appearance.
///
/// Rational codes are deduplicated exactly; others merge vectors that agree
/// within [`DEDUP_TOL`] and snap entries below it to zero.
pub fn error_set(code: &SpaceCode, p: u32, l: usize) -> Result<Vec<ErrorVector>> {
    check_bits(p)?;
    if l != code.cols {
        return Err(Error::DimensionMismatch {
            expected: code.cols,
            found: l,
        });
    }
    let size = 1u128 << (p as u128 * l as u128).min(127);
    let pairs = size * (size - 1);
    if p as usize * l > 16 || pairs > MAX_ERROR_PAIRS {
        return Err(Error::CapExceeded {
            requested: pairs,
            cap: MAX_ERROR_PAIRS,
        });
    }
    let symbols = symbol_vectors(p, l)?;

    // Distinct symbol differences with their first source pair.
    let mut seen = HashSet::new();
    let mut deltas: Vec<(Vec<i64>, (usize, usize))> = Vec::new();
    for (a, s) in symbols.iter().enumerate() {
        for (b, t) in symbols.iter().enumerate() {
            if a == b {
                continue;
            }
            let d: Vec<i64> = s.iter().zip(t).map(|(&x, &y)| x as i64 - y as i64).collect();
            if seen.insert(d.clone()) {
                deltas.push((d, (a, b)));
            }
        }
    }

    match code.exact() {
        Some((ints, den)) => {
            let mut keys = HashSet::new();
            let mut out = Vec::new();
            for (d, pair) in deltas {
                let key: Vec<i64> = ints
                    .chunks(code.cols)
                    .map(|row| row.iter().zip(&d).map(|(&f, &v)| f as i64 * v).sum())
                    .collect();
                if key.iter().all(|&v| v == 0) || !keys.insert(key.clone()) {
                    continue;
                }
                out.push(ErrorVector {
                    e: key.iter().map(|&v| v as f64 / den as f64).collect(),
                    source_pair: pair,
                });
            }
            Ok(out)
        }
        None => {
            let mut candidates: Vec<ErrorVector> = Vec::new();
            for (d, pair) in deltas {
                let e: Vec<f64> = code
                    .entries
                    .chunks(code.cols)
                    .map(|row| {
                        let v: f64 = row.iter().zip(&d).map(|(f, &v)| f * v as f64).sum();
                        if v.abs() <= DEDUP_TOL { 0.0 } else { v }
                    })
                    .collect();
                if e.iter().all(|&v| v == 0.0) {
                    continue;
                }
                candidates.push(ErrorVector { e, source_pair: pair });
            }
            Ok(dedup_with_tolerance(candidates))
        }
    }
}

fn dedup_with_tolerance(candidates: Vec<ErrorVector>) -> Vec<ErrorVector> {
    // Kept vectors sorted by first component; earlier candidates win.
    let mut kept: Vec<ErrorVector> = Vec::new();
    let mut by_first: Vec<(f64, usize)> = Vec::new();
    for c in candidates {
        let x = c.e[0];
        let from = by_first.partition_point(|&(v, _)| v < x - DEDUP_TOL);
        let duplicate = by_first[from..]
            .iter()
            .take_while(|&&(v, _)| v <= x + DEDUP_TOL)
            .any(|&(_, k)| {
                kept[k]
                    .e
                    .iter()
                    .zip(&c.e)
                    .all(|(a, b)| (a - b).abs() <= DEDUP_TOL)
            });
        if !duplicate {
            let at = by_first.partition_point(|&(v, _)| v < x);
            by_first.insert(at, (x, kept.len()));
            kept.push(c);
        }
    }
    kept
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fdsc_p1() -> SpaceCode {
        SpaceCode::from_integer_matrix(2, 2, vec![1, 2, 1, 2], 6, Normalization::EntrySumOne)
            .unwrap()
    }

    #[test]
    fn pam_points_and_coefficients() {
        assert_eq!(pam_points(1).unwrap(), vec![0, 1]);
        assert_eq!(pam_points(2).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(pam_points(3).unwrap(), (0..8).collect::<Vec<_>>());
        assert!(pam_points(0).is_err());
        assert!(pam_points(9).is_err());
        assert_eq!(PamConstellation::new(1).unwrap().sep_coefficients(), (1.0, 1.0));
        let (c1, c2) = PamConstellation::new(2).unwrap().sep_coefficients();
        assert!((c1 - 1.5).abs() < 1e-15 && (c2 - 0.4).abs() < 1e-15);
    }

    #[test]
    fn encode_examples() {
        let id = SpaceCode::identity(2, Normalization::MeanPowerOne).unwrap();
        assert_eq!(id.encode(&[1, 0]).unwrap(), vec![1.0, 0.0]);
        let f = fdsc_p1();
        let x = f.encode(&[1, 1]).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-15 && (x[1] - 0.5).abs() < 1e-15);
        assert_eq!(f.encode(&[0, 0]).unwrap(), vec![0.0, 0.0]);
        assert!(matches!(f.encode(&[1]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn rejects_negative_entries() {
        assert!(SpaceCode::new(1, 2, vec![0.5, -0.1], Normalization::EntrySumOne).is_err());
        assert!(SpaceCode::new(1, 2, vec![0.5], Normalization::EntrySumOne).is_err());
    }

    #[test]
    fn error_set_identity_ook() {
        let id = SpaceCode::identity(2, Normalization::MeanPowerOne).unwrap();
        let es = error_set(&id, 1, 2).unwrap();
        assert_eq!(es.len(), 8);
        for v in &es {
            assert!(v.e.iter().all(|&x| x == -1.0 || x == 0.0 || x == 1.0));
            assert!(v.e.iter().any(|&x| x != 0.0));
        }
    }

    #[test]
    fn error_set_fdsc_ook() {
        // Delta = (1, 0) and (-1, 1) both give e = (1/6, 1/6), so the 8 symbol
        // differences collapse to 6 values.
        let es = error_set(&fdsc_p1(), 1, 2).unwrap();
        assert_eq!(es.len(), 6);
        assert!(es.iter().all(|v| v.e[0] == v.e[1]));
        assert!(es.iter().all(ErrorVector::is_unipolar));
    }

    #[test]
    fn error_set_single_symbol() {
        let f = SpaceCode::new(2, 1, vec![0.3, 0.7], Normalization::EntrySumOne).unwrap();
        let es = error_set(&f, 1, 1).unwrap();
        assert_eq!(es.len(), 2);
        assert_eq!(es[0].e, vec![-0.3, -0.7]);
        assert_eq!(es[1].e, vec![0.3, 0.7]);
    }

    #[test]
    fn float_and_exact_dedup_agree() {
        let exact = fdsc_p1();
        let float =
            SpaceCode::new(2, 2, exact.entries().to_vec(), Normalization::EntrySumOne).unwrap();
        for p in 1..=3 {
            let a = error_set(&exact, p, 2).unwrap();
            let b = error_set(&float, p, 2).unwrap();
            assert_eq!(a.len(), b.len(), "p = {p}");
            for (x, y) in a.iter().zip(&b) {
                assert_eq!(x.source_pair, y.source_pair);
            }
        }
    }

    #[test]
    fn error_set_cap() {
        let f = SpaceCode::new(1, 3, vec![0.2, 0.3, 0.5], Normalization::EntrySumOne).unwrap();
        // 2^9 symbols give ~2^18 ordered pairs.
        assert!(matches!(error_set(&f, 3, 3), Err(Error::CapExceeded { .. })));
        assert!(error_set(&fdsc_p1(), 4, 2).is_ok());
    }

    #[test]
    fn mean_power_examples() {
        let id = SpaceCode::identity(2, Normalization::MeanPowerOne).unwrap();
        assert_eq!(mean_optical_power(&id, 1).unwrap(), 1.0);
        let two = SpaceCode::new(2, 2, vec![0.5; 4], Normalization::MeanPowerOne).unwrap();
        assert_eq!(mean_optical_power(&two, 1).unwrap(), 1.0);
        let zero = SpaceCode::new(2, 2, vec![0.0; 4], Normalization::EntrySumOne).unwrap();
        assert_eq!(mean_optical_power(&zero, 1).unwrap(), 0.0);
    }

    #[test]
    fn rescale_between_conventions() {
        let f = fdsc_p1();
        f.check_normalization(1).unwrap();
        for p in 1..=3 {
            let g = f.rescale(Normalization::MeanPowerOne, p).unwrap();
            g.check_normalization(p).unwrap();
            assert!(g.exact().is_some());
            let back = g.rescale(Normalization::EntrySumOne, p).unwrap();
            assert_eq!(back.exact(), f.exact());
        }
        let float = SpaceCode::new(1, 2, vec![0.2, 0.6], Normalization::EntrySumOne).unwrap();
        assert!(float.check_normalization(1).is_err());
        float.rescale(Normalization::EntrySumOne, 1).unwrap().check_normalization(1).unwrap();
    }

    #[test]
    fn symbol_vectors_are_lexicographic() {
        let v = symbol_vectors(2, 2).unwrap();
        assert_eq!(v.len(), 16);
        assert_eq!(v[0], vec![0, 0]);
        assert_eq!(v[1], vec![0, 1]);
        assert_eq!(v[4], vec![1, 0]);
        assert_eq!(v[15], vec![3, 3]);
    }
}
