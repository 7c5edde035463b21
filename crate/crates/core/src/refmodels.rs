//! Reference laws: PD(1) by stick breaking, cycle lengths of uniform
//! permutations, and the random transposition chain.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::tracker::{CycleTracker, Effect};
use crate::Rational;

pub use crate::stats::{two_sample_stats, TwoSampleStats};

pub const DEFAULT_TAIL_EPS: f64 = 1e-9;

/// A truncated point of the infinite simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexPoint {
    /// Non-increasing.
    pub parts: Vec<f64>,
    /// Mass not assigned to any part.
    pub tail_mass: f64,
}

impl SimplexPoint {
    pub fn largest(&self) -> f64 {
        self.parts.first().copied().unwrap_or(0.0)
    }

    pub fn is_valid(&self, tail_eps: f64) -> bool {
        let total: f64 = self.parts.iter().sum::<f64>() + self.tail_mass;
        (total - 1.0).abs() < 1e-12
            && self.parts.windows(2).all(|w| w[0] >= w[1])
            && self.parts.iter().all(|&x| x >= 0.0)
            && self.tail_mass >= 0.0
            && self.tail_mass < tail_eps
    }
}

fn check_eps(tail_eps: f64) -> Result<()> {
    if tail_eps > 0.0 && tail_eps < 1.0 {
        Ok(())
    } else {
        Err(invalid("tail_eps", format!("need 0 < tail_eps < 1, got {tail_eps}")))
    }
}

/// Stick breaking driven by the given uniforms: `x_i = U_i` times the
/// remaining stick, until the remainder drops below `tail_eps` or the
/// uniforms run out.
pub fn pd1_from_uniforms(us: impl IntoIterator<Item = f64>, tail_eps: f64) -> Result<SimplexPoint> {
    check_eps(tail_eps)?;
    let mut rest = 1.0;
    let mut parts = Vec::new();
    let mut us = us.into_iter();
    while rest >= tail_eps {
        let Some(u) = us.next() else { break };
        let x = u * rest;
        parts.push(x);
        rest -= x;
    }
    parts.sort_unstable_by(|a, b| b.total_cmp(a));
    Ok(SimplexPoint {
        parts,
        tail_mass: rest,
    })
}

pub fn pd1_sample<R: RngCore + ?Sized>(rng: &mut R, tail_eps: f64) -> Result<SimplexPoint> {
    check_eps(tail_eps)?;
    pd1_from_uniforms(std::iter::repeat_with(|| rng.random::<f64>()), tail_eps)
}

/// Cycle lengths of a uniform permutation of `n` elements, normalized and
/// non-increasing. The cycle through the least unplaced element has a
/// uniform length among the remaining elements.
pub fn uniform_cycles<R: RngCore + ?Sized>(n: usize, rng: &mut R) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(invalid("n", "need n >= 1"));
    }
    let mut rest = n;
    let mut lens = Vec::new();
    while rest > 0 {
        let l = rng.random_range(1..=rest);
        lens.push(l);
        rest -= l;
    }
    lens.sort_unstable_by(|a, b| b.cmp(a));
    Ok(lens.into_iter().map(|l| l as f64 / n as f64).collect())
}

/// A permutation of `0..n` under the random transposition chain.
#[derive(Debug, Clone)]
pub struct PartitionState {
    tracker: CycleTracker,
}

impl PartitionState {
    pub fn identity(n: usize) -> Self {
        Self {
            tracker: CycleTracker::identity(n),
        }
    }

    pub fn from_perm(perm: Vec<u32>) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &p in &perm {
            if p as usize >= n || std::mem::replace(&mut seen[p as usize], true) {
                return Err(invalid("perm", "not a permutation"));
            }
        }
        Ok(Self {
            tracker: CycleTracker::new(perm),
        })
    }

    pub fn n(&self) -> usize {
        self.tracker.len()
    }

    pub fn perm(&self) -> &[u32] {
        self.tracker.perm()
    }

    pub fn cycle_count(&self) -> usize {
        self.tracker.cycle_count()
    }

    /// Cycle lengths, non-increasing.
    pub fn cycle_type(&self) -> Vec<usize> {
        self.tracker.sizes()
    }

    /// `pi <- (a b) pi`.
    pub fn compose_left(&mut self, a: usize, b: usize) -> Effect {
        let (x, y) = (self.tracker.preimage(a), self.tracker.preimage(b));
        self.tracker.swap_images(x, y)
    }

    /// Left-multiplies by a uniform transposition of two distinct elements.
    /// Elements in one cycle split it, elements in two cycles merge them.
    pub fn transposition_step<R: RngCore + ?Sized>(&mut self, rng: &mut R) -> Result<Effect> {
        let n = self.n();
        if n < 2 {
            return Err(invalid("n", "need n >= 2"));
        }
        let a = rng.random_range(0..n);
        let mut b = rng.random_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        Ok(self.compose_left(a, b))
    }
}

/// Partitions of `n`, each non-increasing, in reverse lexicographic order.
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 0 {
            out.push(cur.clone());
            return;
        }
        for k in (1..=max.min(n)).rev() {
            cur.push(k);
            rec(n - k, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

fn factorial(k: usize) -> BigInt {
    (1..=k).fold(BigInt::from(1), |acc, i| acc * BigInt::from(i))
}

/// Law of the cycle type of a uniform permutation of `n` elements:
/// `1 / prod_k (k^{m_k} m_k!)`.
pub fn cycle_type_law(n: usize) -> Vec<(Vec<usize>, Rational)> {
    partitions(n)
        .into_iter()
        .map(|p| {
            let mut mult: BTreeMap<usize, usize> = BTreeMap::new();
            for &k in &p {
                *mult.entry(k).or_default() += 1;
            }
            let den = mult.iter().fold(BigInt::from(1), |acc, (&k, &c)| {
                acc * BigInt::from(k).pow(c as u32) * factorial(c)
            });
            (p, Rational::new(BigInt::from(1), den))
        })
        .collect()
}

fn representative(cycle_type: &[usize]) -> Vec<u32> {
    let mut perm = Vec::new();
    let mut start = 0u32;
    for &l in cycle_type {
        for i in 0..l as u32 {
            perm.push(start + (i + 1) % l as u32);
        }
        start += l as u32;
    }
    perm
}

pub type CycleTypeKernel = BTreeMap<Vec<usize>, BTreeMap<Vec<usize>, Rational>>;

/// One-step law on cycle types by composing a representative with every
/// transposition.
pub fn transposition_kernel_literal(n: usize) -> CycleTypeKernel {
    let pairs = Rational::from_integer(BigInt::from(n * (n - 1) / 2));
    let mut kernel = CycleTypeKernel::new();
    for ct in partitions(n) {
        let row = kernel.entry(ct.clone()).or_default();
        for a in 0..n {
            for b in a + 1..n {
                let mut st = PartitionState::from_perm(representative(&ct)).unwrap();
                st.compose_left(a, b);
                let e = row.entry(st.cycle_type()).or_insert_with(|| Rational::from_integer(0.into()));
                *e += Rational::from_integer(1.into()) / &pairs;
            }
        }
    }
    kernel
}

/// The same kernel from split/merge counting over ordered pairs of
/// distinct elements: a cycle of length `l` splits into `(d, l - d)` for
/// `l` ordered pairs per offset `d`, and cycles `a != b` merge for
/// `l_a l_b` ordered pairs each way.
pub fn transposition_kernel_split_merge(n: usize) -> CycleTypeKernel {
    let ordered = Rational::from_integer(BigInt::from(n * (n - 1)));
    let mut kernel = CycleTypeKernel::new();
    let normalize = |mut v: Vec<usize>| {
        v.sort_unstable_by(|a, b| b.cmp(a));
        v
    };
    for ct in partitions(n) {
        let mut row: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
        let mut add = |to: Vec<usize>, count: usize| {
            let e = row.entry(normalize(to)).or_insert_with(|| Rational::from_integer(0.into()));
            *e += Rational::from_integer(BigInt::from(count)) / &ordered;
        };
        for (c, &l) in ct.iter().enumerate() {
            for d in 1..l {
                let mut to: Vec<usize> = ct.clone();
                to.remove(c);
                to.extend([d, l - d]);
                add(to, l);
            }
            for (c2, &l2) in ct.iter().enumerate() {
                if c2 == c {
                    continue;
                }
                let to: Vec<usize> = ct
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != c && i != c2)
                    .map(|(_, &x)| x)
                    .chain([l + l2])
                    .collect();
                add(to, l * l2);
            }
        }
        kernel.insert(ct, row);
    }
    kernel
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub sample_id: u64,
    pub rank: usize,
    pub value: f64,
}

pub fn sample_rows(sample_id: u64, values: &[f64]) -> Vec<SampleRow> {
    values
        .iter()
        .enumerate()
        .map(|(rank, &value)| SampleRow { sample_id, rank, value })
        .collect()
}
