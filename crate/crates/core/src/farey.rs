//! Exact nonnegative rationals and Farey sequences.
//!
//! The Farey sequence of order `k` lists every irreducible fraction `a/b`
//! with `0 <= a <= b <= k` in increasing order. Its terms (together with
//! their reciprocals) are exactly the breakpoints of the piecewise objective
//! of the 2x2 code design problem, see [`crate::optimizer`].
//!
//! Throughout, a fraction `n/m` is read with `n` the numerator and `m` the
//! denominator, so successive terms `n1/m1 < n2/m2` satisfy
//! `m1 * n2 - m2 * n1 == 1`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// Largest Farey order accepted by [`farey`].
pub const MAX_FAREY_ORDER: u64 = 10_000;

/// Largest order accepted by the sort-and-filter generator, which is
/// quadratic in `k`.
pub const MAX_SORTED_ORDER: u64 = 2_000;

/// Largest PAM exponent accepted by [`breakpoints`].
pub const MAX_PAM_BITS: u32 = 8;

/// A reduced nonnegative fraction. `1/0` is the infinity sentinel and is
/// the largest element of the order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rational {
    num: u64,
    den: u64,
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Rational {
    pub const ZERO: Rational = Rational { num: 0, den: 1 };
    pub const ONE: Rational = Rational { num: 1, den: 1 };
    pub const INFINITY: Rational = Rational { num: 1, den: 0 };

    /// Builds `num/den` in lowest terms. Any `x/0` with `x > 0` becomes the
    /// infinity sentinel; `0/0` is rejected.
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if num == 0 && den == 0 {
            return Err(Error::invalid("0/0 is not a rational"));
        }
        if den == 0 {
            return Ok(Self::INFINITY);
        }
        let g = gcd(num, den);
        Ok(Rational {
            num: num / g,
            den: den / g,
        })
    }

    pub const fn integer(n: u64) -> Self {
        Rational { num: n, den: 1 }
    }

    pub fn numer(&self) -> u64 {
        self.num
    }

    pub fn denom(&self) -> u64 {
        self.den
    }

    pub fn is_infinite(&self) -> bool {
        self.den == 0
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_infinite() {
            f64::INFINITY
        } else {
            self.num as f64 / self.den as f64
        }
    }

    /// `x -> 1/x` with `0 <-> inf`.
    pub fn recip(&self) -> Self {
        if self.num == 0 {
            Self::INFINITY
        } else {
            Rational {
                num: self.den,
                den: self.num,
            }
        }
    }

    /// `self * other`, reduced; overflow is reported instead of wrapping.
    pub fn checked_mul(&self, other: &Rational) -> Result<Self> {
        if self.is_infinite() || other.is_infinite() {
            return Err(Error::invalid("multiplication by infinity"));
        }
        let num = self
            .num
            .checked_mul(other.num)
            .ok_or(Error::Overflow("rational multiply"))?;
        let den = self
            .den
            .checked_mul(other.den)
            .ok_or(Error::Overflow("rational multiply"))?;
        Rational::new(num, den)
    }

    /// Compares `self` with a real number, exactly when `x * den` is
    /// representable (the case for every ratio built from small integers).
    pub fn cmp_f64(&self, x: f64) -> Ordering {
        if self.is_infinite() {
            return if x == f64::INFINITY {
                Ordering::Equal
            } else {
                Ordering::Greater
            };
        }
        let scaled = x * self.den as f64;
        (self.num as f64).partial_cmp(&scaled).unwrap_or(Ordering::Less)
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = self.num as u128 * other.den as u128;
        let rhs = other.num as u128 * self.den as u128;
        lhs.cmp(&rhs)
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts `n/m`, a bare integer `n`, or `inf`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s == "∞" {
            return Ok(Self::INFINITY);
        }
        let parse = |t: &str| -> Result<u64> {
            let t = t.trim();
            if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
                return Err(Error::Parse(format!("not a nonnegative integer: {t:?}")));
            }
            t.parse::<u64>()
                .map_err(|e| Error::Parse(format!("{t:?}: {e}")))
        };
        match s.split_once('/') {
            Some((n, d)) => {
                let d = parse(d)?;
                if d == 0 {
                    return Err(Error::Parse(format!("zero denominator in {s:?}")));
                }
                Rational::new(parse(n)?, d)
            }
            None => Ok(Rational::integer(parse(s)?)),
        }
    }
}

/// `true` when `a < b` are Farey neighbours, i.e. `m1*n2 - m2*n1 == 1`.
/// The infinity sentinel `1/0` is a neighbour of every `k/1`.
pub fn is_unimodular(a: &Rational, b: &Rational) -> bool {
    let lhs = a.den as u128 * b.num as u128;
    let rhs = b.den as u128 * a.num as u128;
    lhs == rhs + 1
}

/// Farey sequence of order `k` by the next-term recurrence: from successive
/// `a/b, c/d` the next term is `(t*c - a)/(t*d - b)` with `t = (k + b) / d`.
pub fn farey(k: u64) -> Result<Vec<Rational>> {
    if k == 0 || k > MAX_FAREY_ORDER {
        return Err(Error::invalid(format!(
            "Farey order must be in 1..={MAX_FAREY_ORDER}, got {k}"
        )));
    }
    let (mut a, mut b, mut c, mut d) = (0u64, 1u64, 1u64, k);
    let mut out = vec![Rational::ZERO];
    while c <= k {
        out.push(Rational { num: c, den: d });
        if c == d {
            break;
        }
        let t = (k + b) / d;
        let next_num = t
            .checked_mul(c)
            .and_then(|v| v.checked_sub(a))
            .ok_or(Error::Overflow("farey recurrence"))?;
        let next_den = t
            .checked_mul(d)
            .and_then(|v| v.checked_sub(b))
            .ok_or(Error::Overflow("farey recurrence"))?;
        (a, b, c, d) = (c, d, next_num, next_den);
    }
    Ok(out)
}

/// Farey sequence of order `k` by enumerating all reduced `a/b` and sorting.
/// Independent of [`farey`]; the two are cross-checked in tests.
pub fn farey_by_sorting(k: u64) -> Result<Vec<Rational>> {
    if k == 0 || k > MAX_SORTED_ORDER {
        return Err(Error::invalid(format!(
            "sorted Farey order must be in 1..={MAX_SORTED_ORDER}, got {k}"
        )));
    }
    let mut terms: Vec<Rational> = (1..=k)
        .flat_map(|b| (0..=b).map(move |a| (a, b)))
        .filter(|&(a, b)| gcd(a, b) == 1)
        .map(|(a, b)| Rational { num: a, den: b })
        .collect();
    terms.sort();
    Ok(terms)
}

/// Breakpoints of the design objective for order `k`: the Farey sequence
/// followed by the reciprocals of its interior terms and infinity.
pub fn breakpoints_of_order(k: u64) -> Result<Vec<Rational>> {
    let mut seq = farey(k)?;
    let upper: Vec<Rational> = seq[1..seq.len() - 1]
        .iter()
        .rev()
        .map(Rational::recip)
        .collect();
    seq.extend(upper);
    seq.push(Rational::INFINITY);
    Ok(seq)
}

/// Breakpoints for unipolar `2^p`-PAM, i.e. [`breakpoints_of_order`] with
/// `k = 2^p - 1`.
pub fn breakpoints(p: u32) -> Result<Vec<Rational>> {
    if p == 0 || p > MAX_PAM_BITS {
        return Err(Error::invalid(format!(
            "PAM exponent must be in 1..={MAX_PAM_BITS}, got {p}"
        )));
    }
    breakpoints_of_order((1u64 << p) - 1)
}

/// `(n1 + n2)/(m1 + m2)`, which lies strictly between `a < b`.
pub fn mediant(a: &Rational, b: &Rational) -> Result<Rational> {
    if a.is_infinite() || b.is_infinite() {
        return Err(Error::invalid("mediant of infinity"));
    }
    if a >= b {
        return Err(Error::invalid(format!("mediant needs {a} < {b}")));
    }
    let num = a.num.checked_add(b.num).ok_or(Error::Overflow("mediant"))?;
    let den = a.den.checked_add(b.den).ok_or(Error::Overflow("mediant"))?;
    Rational::new(num, den)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PropertyKind {
    /// `m1*n2 - m2*n1 != 1` for a successive pair.
    Determinant,
    /// `m1 + m2 < k + 1` for a successive pair.
    DenominatorSum,
    /// Middle term of a triple differs from the mediant of its neighbours.
    MiddleMediant,
    /// Mediant of a pair escapes the open interval spanned by the triple.
    MediantInterval,
    /// `(n1+n3)/(m1+m3) < n2/m2` for successive `n1/m1, n2/m2` and a later term.
    RightNeighbour,
    /// `(n0+n2)/(m0+m2) > n1/m1` for successive `n1/m1, n2/m2` and an earlier term.
    LeftNeighbour,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertyViolation {
    pub kind: PropertyKind,
    pub terms: Vec<Rational>,
}

/// Outcome of an exhaustive property sweep over one Farey sequence.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PropertyReport {
    pub order: u64,
    pub checks: usize,
    pub violations: Vec<PropertyViolation>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn require_order_above_three(k: u64) -> Result<()> {
    if k < 4 {
        return Err(Error::invalid(format!(
            "successive-term properties are stated for k >= 4, got {k}"
        )));
    }
    Ok(())
}

/// Checks the classical successive-term facts on `F_k`: every successive
/// pair is unimodular with `m1 + m2 >= k + 1`, and every middle term of a
/// successive triple is the mediant of its neighbours.
pub fn successive_properties(k: u64) -> Result<PropertyReport> {
    require_order_above_three(k)?;
    let seq = farey(k)?;
    let mut report = PropertyReport {
        order: k,
        ..Default::default()
    };

    for w in seq.windows(2) {
        let (a, b) = (w[0], w[1]);
        report.checks += 2;
        if !is_unimodular(&a, &b) {
            report.violations.push(PropertyViolation {
                kind: PropertyKind::Determinant,
                terms: vec![a, b],
            });
        }
        if a.den + b.den < k + 1 {
            report.violations.push(PropertyViolation {
                kind: PropertyKind::DenominatorSum,
                terms: vec![a, b],
            });
        }
    }

    for w in seq.windows(3) {
        let (a, b, c) = (w[0], w[1], w[2]);
        report.checks += 2;
        let outer = Rational::new(a.num + c.num, a.den + c.den)?;
        if outer != b {
            report.violations.push(PropertyViolation {
                kind: PropertyKind::MiddleMediant,
                terms: vec![a, b, c],
            });
        }
        let inner = mediant(&a, &b)?;
        if !(a < inner && inner < c) {
            report.violations.push(PropertyViolation {
                kind: PropertyKind::MediantInterval,
                terms: vec![a, b, c],
            });
        }
    }
    Ok(report)
}

/// Checks, for every successive pair `n1/m1 < n2/m2` of `F_k` and every other
/// term, that `(n1+n3)/(m1+m3) >= n2/m2` for all later `n3/m3` and
/// `(n0+n2)/(m0+m2) <= n1/m1` for all earlier `n0/m0`.
pub fn neighbor_properties(k: u64) -> Result<PropertyReport> {
    require_order_above_three(k)?;
    let seq = farey(k)?;
    let mut report = PropertyReport {
        order: k,
        ..Default::default()
    };
    for i in 0..seq.len() - 1 {
        let (t1, t2) = (seq[i], seq[i + 1]);
        for t3 in &seq[i + 2..] {
            report.checks += 1;
            if Rational::new(t1.num + t3.num, t1.den + t3.den)? < t2 {
                report.violations.push(PropertyViolation {
                    kind: PropertyKind::RightNeighbour,
                    terms: vec![t1, t2, *t3],
                });
            }
        }
        for t0 in &seq[..i] {
            report.checks += 1;
            if Rational::new(t0.num + t2.num, t0.den + t2.den)? > t1 {
                report.violations.push(PropertyViolation {
                    kind: PropertyKind::LeftNeighbour,
                    terms: vec![*t0, t1, t2],
                });
            }
        }
    }
    Ok(report)
}

fn bracket_in<F>(seq: &[Rational], cmp_term: F) -> (Rational, Rational)
where
    F: Fn(&Rational) -> Ordering,
{
    // First index whose term is >= x.
    let idx = seq.partition_point(|t| cmp_term(t) == Ordering::Less);
    let hi = seq[idx];
    if cmp_term(&hi) == Ordering::Equal {
        (hi, hi)
    } else {
        (seq[idx - 1], hi)
    }
}

/// Locates `x >= 0` among the breakpoints of order `k` (the Farey sequence on
/// `[0, 1]` and its reciprocals above 1). Returns the successive pair
/// `lo <= x <= hi`, or `(x, x)` when `x` is itself a breakpoint.
pub fn bracket(x: f64, k: u64) -> Result<(Rational, Rational)> {
    if !(x >= 0.0) {
        return Err(Error::invalid(format!("cannot bracket {x}")));
    }
    let seq = breakpoints_of_order(k)?;
    Ok(bracket_in(&seq, |t| t.cmp_f64(x)))
}

/// Exact-rational variant of [`bracket`].
pub fn bracket_rational(x: &Rational, k: u64) -> Result<(Rational, Rational)> {
    let seq = breakpoints_of_order(k)?;
    Ok(bracket_in(&seq, |t| t.cmp(x)))
}
