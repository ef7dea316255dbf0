//! Max-min design of 2x2 linear space codes for unipolar `2^p`-PAM.
//!
//! For `F = [[f11, f12], [f21, f22]]` (entries positive, summing to one) and
//! symbol differences `Delta in {-K..K}^2 \ {0}`, `K = 2^p - 1`, the design
//! maximises the worst product `e1 e2` of `e = F Delta`. Writing
//! `F_mn = (m f11 - n f12)(m f21 - n f22)`, the worst case is attained among
//! `F_10 = f11 f21`, `F_01 = f12 f22` and `F_mn` for coprime `1 <= m, n <= K`;
//! each `F_mn` changes sign when `f11/f12` or `f21/f22` crosses `n/m`, so the
//! objective is piecewise over the Farey breakpoints of order `K`.
//!
//! The optimum puts both ratios at the mediant `1/2^p` of the first Farey
//! interval, `F = [[1, 2^p], [1, 2^p]] / (2 + 2^(p+1))`, with value
//! `1/(4 (1 + 2^p)^2)`. The column-swapped code is equally optimal; the
//! orientation above is the one returned.

use rayon::prelude::*;

use crate::constellation::{Normalization, SpaceCode};
use crate::farey::{bracket, gcd, is_unimodular, Rational};
use crate::{Error, Result};

/// Largest `p` for which the exhaustive difference set is used by
/// [`objective_min`].
pub const EXHAUSTIVE_MAX_BITS: u32 = 3;

/// Largest supported `p` for the design routines.
pub const MAX_DESIGN_BITS: u32 = 8;

/// Largest `p` accepted by the grid-search oracle.
pub const MAX_ORACLE_BITS: u32 = 4;

/// Minimum entry size accepted by the objective.
pub const MIN_ENTRY: f64 = 1e-9;

/// Worst-case product of a code, or the difference that breaks full diversity.
#[derive(Clone, Debug, PartialEq)]
pub enum Objective {
    Achieved(f64),
    Failure { delta: (i64, i64), e: [f64; 2], product: f64 },
}

impl Objective {
    pub fn value(&self) -> Option<f64> {
        match self {
            Objective::Achieved(v) => Some(*v),
            Objective::Failure { .. } => None,
        }
    }
}

/// Exact counterpart of [`Objective`] for rational codes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExactObjective {
    Achieved(Rational),
    Failure { delta: (i64, i64) },
}

fn check_bits(p: u32) -> Result<u32> {
    if p == 0 || p > MAX_DESIGN_BITS {
        return Err(Error::invalid(format!("p must be in 1..={MAX_DESIGN_BITS}, got {p}")));
    }
    Ok((1u32 << p) - 1)
}

fn entries_2x2(code: &SpaceCode) -> Result<[f64; 4]> {
    if code.rows() != 2 || code.cols() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: code.rows() * code.cols(),
        });
    }
    let e = code.entries();
    if let Some(f) = e.iter().find(|&&f| f < MIN_ENTRY) {
        return Err(Error::invalid(format!("code entries must be positive, got {f}")));
    }
    Ok([e[0], e[1], e[2], e[3]])
}

/// Nonzero differences up to sign: `d1 > 0`, or `d1 = 0` and `d2 > 0`.
fn half_deltas(k: i64) -> impl Iterator<Item = (i64, i64)> {
    (0..=k)
        .flat_map(move |d1| (-k..=k).map(move |d2| (d1, d2)))
        .filter(|&(d1, d2)| d1 > 0 || d2 > 0)
}

/// Reduced candidates as `(m, n)`: `(1,0)`, `(0,1)` and coprime `m, n in 1..=k`.
fn reduced_pairs(k: i64) -> impl Iterator<Item = (i64, i64)> {
    [(1, 0), (0, 1)].into_iter().chain(
        (1..=k)
            .flat_map(move |m| (1..=k).map(move |n| (m, n)))
            .filter(|&(m, n)| gcd(m as u64, n as u64) == 1),
    )
}

fn product(f: &[f64; 4], d: (i64, i64)) -> (f64, f64) {
    let (d1, d2) = (d.0 as f64, d.1 as f64);
    (f[0] * d1 + f[1] * d2, f[2] * d1 + f[3] * d2)
}

fn min_over<I: Iterator<Item = (i64, i64)>>(f: &[f64; 4], deltas: I) -> Objective {
    let mut best = f64::INFINITY;
    for d in deltas {
        let (e1, e2) = product(f, d);
        let v = e1 * e2;
        if v <= 0.0 {
            return Objective::Failure {
                delta: d,
                e: [e1, e2],
                product: v,
            };
        }
        best = best.min(v);
    }
    Objective::Achieved(best)
}

/// Minimum of `e1 e2` over every nonzero difference.
pub fn objective_exhaustive(code: &SpaceCode, p: u32) -> Result<Objective> {
    let k = check_bits(p)? as i64;
    let f = entries_2x2(code)?;
    Ok(min_over(&f, half_deltas(k)))
}

/// Minimum over the reduced candidates `F_10`, `F_01` and coprime `F_mn`
/// (differences `(m, -n)`).
pub fn objective_reduced(code: &SpaceCode, p: u32) -> Result<Objective> {
    let k = check_bits(p)? as i64;
    let f = entries_2x2(code)?;
    Ok(min_over(&f, reduced_pairs(k).map(|(m, n)| (m, -n))))
}

/// Design objective: exhaustive for `p <= 3`, reduced above.
pub fn objective_min(code: &SpaceCode, p: u32) -> Result<Objective> {
    if p <= EXHAUSTIVE_MAX_BITS {
        objective_exhaustive(code, p)
    } else {
        objective_reduced(code, p)
    }
}

fn exact_ints(code: &SpaceCode) -> Result<([i128; 4], u64)> {
    entries_2x2(code)?;
    let (ints, den) = code
        .exact()
        .ok_or_else(|| Error::invalid("code has no exact rational form"))?;
    Ok((
        [ints[0] as i128, ints[1] as i128, ints[2] as i128, ints[3] as i128],
        den,
    ))
}

fn exact_min_over<I: Iterator<Item = (i64, i64)>>(
    f: &[i128; 4],
    den: u64,
    deltas: I,
) -> Result<ExactObjective> {
    let mut best: Option<i128> = None;
    for (d1, d2) in deltas {
        let (a, b) = (d1 as i128, d2 as i128);
        let v = (f[0] * a + f[1] * b) * (f[2] * a + f[3] * b);
        if v <= 0 {
            return Ok(ExactObjective::Failure { delta: (d1, d2) });
        }
        best = Some(best.map_or(v, |b| b.min(v)));
    }
    let v = best.ok_or_else(|| Error::invalid("empty difference set"))?;
    let num = u64::try_from(v).map_err(|_| Error::Overflow("objective numerator"))?;
    let d2 = den.checked_mul(den).ok_or(Error::Overflow("objective denominator"))?;
    Ok(ExactObjective::Achieved(Rational::new(num, d2)?))
}

/// [`objective_exhaustive`] in exact integer arithmetic.
pub fn objective_exhaustive_exact(code: &SpaceCode, p: u32) -> Result<ExactObjective> {
    let k = check_bits(p)? as i64;
    let (f, den) = exact_ints(code)?;
    exact_min_over(&f, den, half_deltas(k))
}

/// [`objective_reduced`] in exact integer arithmetic.
pub fn objective_reduced_exact(code: &SpaceCode, p: u32) -> Result<ExactObjective> {
    let k = check_bits(p)? as i64;
    let (f, den) = exact_ints(code)?;
    exact_min_over(&f, den, reduced_pairs(k).map(|(m, n)| (m, -n)))
}

/// `F_mn = (m f11 - n f12)(m f21 - n f22)` for coprime `(m, n)`, including
/// `F_10 = f11 f21` and `F_01 = f12 f22`.
pub fn f_mn(code: &SpaceCode, m: u64, n: u64) -> Result<f64> {
    let f = entries_2x2(code)?;
    if gcd(m, n) != 1 {
        return Err(Error::invalid(format!("(m, n) = ({m}, {n}) is not coprime")));
    }
    let (m, n) = (m as f64, n as f64);
    Ok((m * f[0] - n * f[1]) * (m * f[2] - n * f[3]))
}

/// `(m, n)` indexing the `F_mn` whose sign changes at breakpoint `n/m`.
pub fn breakpoint_index(t: &Rational) -> (u64, u64) {
    (t.denom(), t.numer())
}

/// The two candidates that decide the objective when both ratios
/// `x = f11/f12` and `y = f21/f22` lie strictly inside one breakpoint
/// interval of order `k`: those indexed by the interval's end points.
pub fn two_worst_cases(x: f64, y: f64, k: u64) -> Result<((u64, u64), (u64, u64))> {
    let (xl, xh) = bracket(x, k)?;
    let (yl, yh) = bracket(y, k)?;
    if xl == xh || yl == yh {
        return Err(Error::invalid(format!("ratio on a breakpoint: x = {x}, y = {y}")));
    }
    if (xl, xh) != (yl, yh) {
        return Err(Error::invalid(format!(
            "x = {x} in ({xl}, {xh}) and y = {y} in ({yl}, {yh}) lie in different intervals"
        )));
    }
    Ok((breakpoint_index(&xl), breakpoint_index(&xh)))
}

/// Optimum of the design restricted to one Farey interval.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalOptimum {
    /// Common optimal ratio `f11/f12 = f21/f22`: the mediant of the pair.
    pub ratio: Rational,
    /// `[f11, f12, f21, f22]` with `f11 = f21 = (n1+n2)/(2S)`,
    /// `f12 = f22 = (m1+m2)/(2S)`, `S = m1+m2+n1+n2`.
    pub entries: [Rational; 4],
    /// `1/(4 S^2)`.
    pub value: Rational,
}

/// Local optimum for successive Farey terms `lo = n1/m1 < hi = n2/m2` in `[0, 1]`.
pub fn local_optimum(lo: &Rational, hi: &Rational) -> Result<LocalOptimum> {
    if lo.is_infinite() || hi.is_infinite() || *hi > Rational::ONE {
        return Err(Error::invalid(format!("pair ({lo}, {hi}) must lie in [0, 1]")));
    }
    if !is_unimodular(lo, hi) {
        return Err(Error::invalid(format!("{lo} and {hi} are not successive Farey terms")));
    }
    let (n1, m1, n2, m2) = (lo.numer(), lo.denom(), hi.numer(), hi.denom());
    let s = m1 + m2 + n1 + n2;
    let a = Rational::new(n1 + n2, 2 * s)?;
    let b = Rational::new(m1 + m2, 2 * s)?;
    Ok(LocalOptimum {
        ratio: Rational::new(n1 + n2, m1 + m2)?,
        entries: [a, b, a, b],
        value: Rational::new(1, 4 * s * s)?,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DesignSolution {
    pub code: SpaceCode,
    pub objective: f64,
    pub objective_exact: Rational,
    /// Successive breakpoints bracketing the optimal ratio `f11/f12`.
    pub breakpoint_pair: (Rational, Rational),
}

/// `F = [[1, 2^p], [1, 2^p]] / (2 + 2^(p+1))` with objective `1/(4 (1+2^p)^2)`.
pub fn closed_form_fdsc(p: u32) -> Result<DesignSolution> {
    let k = check_bits(p)? as u64;
    let q = k + 1;
    let code = SpaceCode::from_integer_matrix(
        2,
        2,
        vec![1, q, 1, q],
        2 + 2 * q,
        Normalization::EntrySumOne,
    )?;
    let objective_exact = Rational::new(1, 4 * (1 + q) * (1 + q))?;
    Ok(DesignSolution {
        code,
        objective: objective_exact.to_f64(),
        objective_exact,
        breakpoint_pair: (Rational::ZERO, Rational::new(1, k)?),
    })
}

/// Smallest admissible grid resolution for [`grid_search_fdsc`]:
/// `8 (1 + 2^p)` divisions of the unit simplex.
pub fn min_grid_divisions(p: u32) -> u64 {
    8 * (1 + (1u64 << p))
}

/// Exhaustive search over codes with entries `a/K, b/K, c/K, d/K`,
/// `a, b, c, d >= 1`, `a + b + c + d = K`, using the exact exhaustive
/// objective. Ties go to the lexicographically smallest `(a, b, c)`.
pub fn grid_search_fdsc(p: u32, divisions: u64) -> Result<DesignSolution> {
    if p == 0 || p > MAX_ORACLE_BITS {
        return Err(Error::invalid(format!("oracle supports p in 1..={MAX_ORACLE_BITS}, got {p}")));
    }
    if divisions < min_grid_divisions(p) {
        return Err(Error::invalid(format!(
            "grid step 1/{divisions} is coarser than 1/{}",
            min_grid_divisions(p)
        )));
    }
    if divisions > 2_000 {
        return Err(Error::invalid(format!("grid of 1/{divisions} is too fine")));
    }
    let k = check_bits(p)? as i64;
    let deltas: Vec<(i128, i128)> = half_deltas(k).map(|(a, b)| (a as i128, b as i128)).collect();
    let big_k = divisions as i64;

    // Each shard fixes `a`; the best of a shard is its first maximiser.
    let best = (1..=big_k - 3)
        .into_par_iter()
        .map(|a| {
            let mut best: Option<(i128, [i64; 4])> = None;
            for b in 1..=big_k - a - 2 {
                for c in 1..=big_k - a - b - 1 {
                    let d = big_k - a - b - c;
                    let f = [a as i128, b as i128, c as i128, d as i128];
                    let floor = best.map_or(i128::MIN, |(v, _)| v);
                    let mut worst = i128::MAX;
                    for &(d1, d2) in &deltas {
                        let v = (f[0] * d1 + f[1] * d2) * (f[2] * d1 + f[3] * d2);
                        worst = worst.min(v);
                        if worst <= floor || worst <= 0 {
                            break;
                        }
                    }
                    if worst > 0 && worst > floor {
                        best = Some((worst, [a, b, c, d]));
                    }
                }
            }
            best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .fold(None::<(i128, [i64; 4])>, |acc, cand| match acc {
            Some(cur) if cur.0 >= cand.0 => Some(cur),
            _ => Some(cand),
        })
        .ok_or_else(|| Error::invalid("no full-diversity point on the grid"))?;

    let (value, ints) = best;
    let code = SpaceCode::from_integer_matrix(
        2,
        2,
        ints.iter().map(|&v| v as u64).collect(),
        divisions,
        Normalization::EntrySumOne,
    )?;
    let objective_exact = Rational::new(value as u64, divisions * divisions)?;
    let ratio = ints[0] as f64 / ints[1] as f64;
    Ok(DesignSolution {
        code,
        objective: objective_exact.to_f64(),
        objective_exact,
        breakpoint_pair: bracket(ratio, k as u64)?,
    })
}
