//! One-dimensional hard-core model: partition functions, exact samplers on
//! cycles, occupation probabilities and the conditional occupation tables
//! used by the gap chain.
//!
//! Path partition functions obey `Z(k) = Z(k-1) + lambda Z(k-2)` with
//! `Z(-1) = Z(0) = 1`. Samplers and conditional probabilities are driven by
//! the ratios `t_k = Z(k-1) / Z(k)`, which satisfy `t_k = 1 / (1 + lambda t_{k-1})`
//! and never overflow.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::{Exact, Real, Scaled};

/// Hard-core activity `lambda > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Activity<T>(T);

impl<T: Real> Activity<T> {
    pub fn new(lambda: T) -> Result<Self> {
        if lambda > T::zero() && lambda.is_finite() {
            Ok(Self(lambda))
        } else {
            Err(invalid("lambda", format!("activity must be positive, got {lambda}")))
        }
    }

    pub fn value(&self) -> T {
        self.0
    }

    /// Probability that a site with two vacant neighbours is occupied after a
    /// heat-bath update.
    pub fn occupy_prob(&self) -> T {
        self.0 / (T::one() + self.0)
    }
}

/// Indicator of an independent set on the cycle `C_m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HardCoreColumn {
    occ: Vec<bool>,
}

/// No two cyclically adjacent entries both set.
pub fn is_independent(occ: &[bool]) -> bool {
    let m = occ.len();
    (0..m).all(|k| !(occ[k] && occ[(k + 1) % m]))
}

impl HardCoreColumn {
    pub fn empty(m: usize) -> Self {
        Self { occ: vec![false; m] }
    }

    pub fn from_bits(occ: Vec<bool>) -> Result<Self> {
        if occ.len() < 2 {
            return Err(invalid("m", "columns need at least two sites"));
        }
        if !is_independent(&occ) {
            return Err(invalid("occ", "adjacent occupied sites"));
        }
        Ok(Self { occ })
    }

    pub fn from_occupied(m: usize, sites: &[usize]) -> Result<Self> {
        let mut occ = vec![false; m];
        for &k in sites {
            if k >= m {
                return Err(invalid("sites", format!("site {k} outside column of length {m}")));
            }
            occ[k] = true;
        }
        Self::from_bits(occ)
    }

    pub(crate) fn from_bits_unchecked(occ: Vec<bool>) -> Self {
        debug_assert!(is_independent(&occ));
        Self { occ }
    }

    pub fn len(&self) -> usize {
        self.occ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occ.is_empty()
    }

    #[inline]
    pub fn is_occupied(&self, k: usize) -> bool {
        self.occ[k]
    }

    pub fn occupied_count(&self) -> usize {
        self.occ.iter().filter(|&&b| b).count()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.occ
    }

    /// Bitmask with bit `k` set when site `k` is occupied (`m <= 64`).
    pub fn mask(&self) -> u64 {
        assert!(self.occ.len() <= 64);
        self.occ
            .iter()
            .enumerate()
            .fold(0, |acc, (k, &b)| acc | ((b as u64) << k))
    }
}

/// Ratios `t_k = Z(k-1)/Z(k)` for `k` in `0..=max_len`.
pub(crate) fn path_ratios<T: Real>(max_len: usize, lambda: T) -> Vec<T> {
    let mut t = Vec::with_capacity(max_len + 1);
    t.push(T::one());
    for k in 1..=max_len {
        let prev = t[k - 1];
        t.push(T::one() / (T::one() + lambda * prev));
    }
    t
}

/// Total hard-core weight `sum lambda^|A|` over independent sets of the path
/// with `len` vertices.
pub fn partition_path<T: Real>(len: usize, act: Activity<T>) -> Scaled<T> {
    let lambda = act.value();
    // (Z(k-2), Z(k-1)) sharing one exponent
    let (mut a, mut b) = (T::one(), T::one());
    let mut exponent = 0i64;
    let hi = T::lit(2f64.powi(32));
    let lo = T::lit(2f64.powi(-32));
    for _ in 0..len {
        let next = b + lambda * a;
        a = b;
        b = next;
        if b > hi {
            a = a * lo;
            b = b * lo;
            exponent += 32;
        }
    }
    Scaled {
        mantissa: b,
        exponent,
    }
}

/// Exact path partition function by the recurrence.
pub fn partition_path_exact<T: Exact>(len: usize, lambda: &T) -> T {
    let (mut a, mut b) = (T::one(), T::one());
    for _ in 0..len {
        let next = b.clone() + lambda.clone() * a;
        a = b;
        b = next;
    }
    b
}

/// Partition function of `C_m`, split on the state of vertex 0:
/// `Z(m-1) + lambda Z(m-3)`.
pub fn partition_cycle<T: Real>(m: usize, act: Activity<T>) -> Result<Scaled<T>> {
    check_cycle_len(m)?;
    let vacant = partition_path(m - 1, act);
    let occupied = partition_path(m - 3, act).scale(act.value());
    Ok(vacant.add(&occupied))
}

pub fn partition_cycle_exact<T: Exact>(m: usize, lambda: &T) -> Result<T> {
    check_cycle_len(m)?;
    Ok(partition_path_exact(m - 1, lambda) + lambda.clone() * partition_path_exact(m - 3, lambda))
}

fn check_cycle_len(m: usize) -> Result<()> {
    if m < 3 {
        Err(invalid("m", format!("hard-core cycles need m >= 3, got {m}")))
    } else {
        Ok(())
    }
}

/// Translation-invariant single-site occupation probability on `C_m`.
pub fn occupation_prob<T: Real>(m: usize, act: Activity<T>) -> Result<T> {
    check_cycle_len(m)?;
    let t = path_ratios(m - 1, act.value());
    // Z(m-3)/Z(m-1)
    let r = t[m - 2] * t[m - 1];
    let w = act.value() * r;
    Ok(w / (T::one() + w))
}

#[inline]
fn prob_to_threshold(p: f64) -> u64 {
    if p >= 1.0 {
        u64::MAX
    } else if p <= 0.0 {
        0
    } else {
        (p * 18446744073709551616.0) as u64
    }
}

/// Exact sampler for the hard-core measure on `C_m`.
///
/// Vertex 0 is decided first with weights `lambda Z(m-3)` against `Z(m-1)`;
/// the remaining free path is filled left to right, occupying its first site
/// with probability `lambda Z(k-2)/Z(k)` for a path of `k` sites.
#[derive(Debug, Clone)]
pub struct ColumnSampler {
    m: usize,
    root: u64,
    /// Threshold for "first site occupied", indexed by remaining path length.
    first: Vec<u64>,
}

impl ColumnSampler {
    pub fn new<T: Real>(m: usize, act: Activity<T>) -> Result<Self> {
        check_cycle_len(m)?;
        let lambda = act.value();
        let t = path_ratios(m, lambda);
        let mut first = vec![0u64; m + 1];
        for k in 1..=m {
            let p = lambda * t[k - 1] * t[k];
            first[k] = prob_to_threshold(p.to_f64().unwrap());
        }
        let root = occupation_prob(m, act)?.to_f64().unwrap();
        Ok(Self {
            m,
            root: prob_to_threshold(root),
            first,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> HardCoreColumn {
        let mut occ = vec![false; self.m];
        self.sample_into(rng, &mut occ);
        HardCoreColumn::from_bits_unchecked(occ)
    }

    /// Overwrites `occ` (length `m`) with a fresh sample.
    pub fn sample_into<R: RngCore + ?Sized>(&self, rng: &mut R, occ: &mut [bool]) {
        let m = self.m;
        debug_assert_eq!(occ.len(), m);
        occ.fill(false);
        if rng.next_u64() < self.root {
            occ[0] = true;
            self.fill_path(rng, &mut occ[2..m - 1]);
        } else {
            self.fill_path(rng, &mut occ[1..]);
        }
    }

    fn fill_path<R: RngCore + ?Sized>(&self, rng: &mut R, path: &mut [bool]) {
        let len = path.len();
        let mut i = 0;
        while i < len {
            if rng.next_u64() < self.first[len - i] {
                path[i] = true;
                i += 2;
            } else {
                i += 1;
            }
        }
    }
}

/// One exact draw from the hard-core measure on `C_m` (`m >= 3`).
pub fn sample_column<T: Real, R: Rng + ?Sized>(
    m: usize,
    act: Activity<T>,
    rng: &mut R,
) -> Result<HardCoreColumn> {
    Ok(ColumnSampler::new(m, act)?.sample(rng))
}

/// Every independent set of `C_m` with its exact probability.
///
/// Sets are listed in increasing bitmask order. Intended as a test oracle;
/// `m` is capped at 24.
pub fn enumerate_columns<T: Exact>(m: usize, lambda: &T) -> Result<Vec<(HardCoreColumn, T)>> {
    if !(2..=24).contains(&m) {
        return Err(invalid("m", format!("enumeration supports 2 <= m <= 24, got {m}")));
    }
    let full = (1u32 << m) - 1;
    let mut powers = vec![T::one()];
    for i in 1..=m {
        powers.push(powers[i - 1].clone() * lambda.clone());
    }
    let mut sets = Vec::new();
    let mut total = T::zero();
    for mask in 0..=full {
        let rot = ((mask << 1) | (mask >> (m - 1))) & full;
        if mask & rot != 0 {
            continue;
        }
        let w = powers[mask.count_ones() as usize].clone();
        total = total + w.clone();
        let occ = (0..m).map(|k| mask >> k & 1 == 1).collect();
        sets.push((HardCoreColumn { occ }, w));
    }
    Ok(sets
        .into_iter()
        .map(|(c, w)| (c, w / total.clone()))
        .collect())
}

/// Conditional occupation probabilities of the hard-core model on `Z + 1/2`.
///
/// Index `i` refers to site `i + 1/2`: `q_minus[i]` conditions on `-1/2`
/// being occupied, `q_plus[i]` on `+1/2`, and `q_zero[i]` on both `-1/2` and
/// `+1/2` vacant. By the Markov property `q_zero` coincides with `q_minus`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTable<T> {
    pub p: T,
    pub q_minus: Vec<T>,
    pub q_plus: Vec<T>,
    pub q_zero: Vec<T>,
    pub i_max: usize,
    pub path_len: usize,
}

pub const QTABLE_TOLERANCE: f64 = 1e-10;

impl<T: Real> QTable<T> {
    pub fn max_shift(&self, other: &Self) -> f64 {
        let d = |a: &[T], b: &[T]| {
            a.iter()
                .zip(b)
                .map(|(x, y)| (*x - *y).abs().to_f64().unwrap())
                .fold(0.0, f64::max)
        };
        d(&self.q_minus, &other.q_minus)
            .max(d(&self.q_plus, &other.q_plus))
            .max(d(&self.q_zero, &other.q_zero))
            .max((self.p - other.p).abs().to_f64().unwrap())
    }
}

/// Conditional table on a finite path of `len` sites; site `len/2 - 1`
/// plays the role of `-1/2`. No convergence check.
pub(crate) fn qtable_on_path<T: Real>(lambda: T, i_max: usize, len: usize) -> QTable<T> {
    let c = len / 2 - 1;
    assert!(c >= 1 && c + i_max + 1 < len, "path too short for the table");
    let t = path_ratios(len, lambda);
    // P[site r occupied] on a free path of `r_len` sites; splitting the
    // partition function at r gives odds lambda t_r t_{r_len - 1 - r}
    let free = |r_len: usize, r: usize| -> T {
        let w = lambda * t[r] * t[r_len - 1 - r];
        w / (T::one() + w)
    };
    let right_of_minus = len - (c + 2);
    let right_of_plus = len - (c + 3);
    let mut q_minus = Vec::with_capacity(i_max + 1);
    let mut q_plus = Vec::with_capacity(i_max + 1);
    let mut q_zero = Vec::with_capacity(i_max + 1);
    for i in 0..=i_max {
        q_minus.push(if i == 0 { T::zero() } else { free(right_of_minus, i - 1) });
        q_plus.push(match i {
            0 => T::one(),
            1 => T::zero(),
            _ => free(right_of_plus, i - 2),
        });
        q_zero.push(if i == 0 { T::zero() } else { free(right_of_minus, i - 1) });
    }
    let p = free(len, c + 1);
    QTable {
        p,
        q_minus,
        q_plus,
        q_zero,
        i_max,
        path_len: len,
    }
}

/// Builds the conditional table on a path of `path_len` sites and certifies
/// it against a path of twice that length.
pub fn build_qtable<T: Real>(act: Activity<T>, i_max: usize, path_len: usize) -> Result<QTable<T>> {
    if i_max < 2 {
        return Err(invalid("i_max", "need i_max >= 2"));
    }
    if path_len < 50 * i_max {
        return Err(invalid(
            "path_len",
            format!("need path_len >= 50 * i_max = {}, got {path_len}", 50 * i_max),
        ));
    }
    let table = qtable_on_path(act.value(), i_max, path_len);
    let doubled = qtable_on_path(act.value(), i_max, 2 * path_len);
    let max_shift = table.max_shift(&doubled);
    if max_shift > QTABLE_TOLERANCE {
        return Err(Error::NonConvergence { max_shift });
    }
    Ok(table)
}
