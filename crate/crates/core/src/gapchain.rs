//! The ideal gap chain: the vertical distance between two idealized strands
//! driven by independent hard-core configurations on `Z + 1/2`.
//!
//! Jumps are indexed `0..5` for `-2..=2`. Beyond the table cutoff every
//! conditional probability equals `p`, and the row is the law of `X + X'`
//! for independent `X ~ (p, 1 - 2p, p)`.

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::hardcore::{build_qtable, Activity, QTable};
use crate::rng::derive_stream;
use crate::scalar::Real;

pub const JUMPS: [i64; 5] = [-2, -1, 0, 1, 2];
pub const DEFAULT_I_MAX: usize = 64;

#[derive(Debug, Clone)]
pub struct GapChain<T> {
    qt: QTable<T>,
    /// `rows[i]` for `1 <= i <= i_max + 1`; `rows[0]` is unused.
    rows: Vec<[T; 5]>,
    far: [T; 5],
    cdf: Vec<[u64; 4]>,
}

fn to_cdf<T: Real>(row: &[T; 5]) -> [u64; 4] {
    let mut out = [0u64; 4];
    let mut acc = 0.0;
    for (o, p) in out.iter_mut().zip(row) {
        acc += p.to_f64().unwrap();
        *o = if acc >= 1.0 { u64::MAX } else { (acc * 18446744073709551616.0) as u64 };
    }
    out
}

impl<T: Real> GapChain<T> {
    pub fn new(qt: QTable<T>) -> Self {
        let p = qt.p;
        let two = T::lit(2.0);
        let blank = T::one() - two * p;
        let i_max = qt.i_max;
        let q = |v: &[T], i: usize| if i <= i_max { v[i] } else { p };
        let mut rows = vec![[T::zero(); 5]];
        for i in 1..=i_max + 1 {
            let (qm, qp, qz) = (q(&qt.q_minus, i), q(&qt.q_plus, i), q(&qt.q_zero, i));
            let (qm1, qp1, qz1) = (q(&qt.q_minus, i - 1), q(&qt.q_plus, i - 1), q(&qt.q_zero, i - 1));
            let row = if i == 1 {
                [
                    T::zero(),
                    T::zero(),
                    blank * (T::one() - qz) + p,
                    blank * qz + p * (T::one() - qm - qm1),
                    p * qm,
                ]
            } else {
                [
                    p * qp1,
                    blank * qz1 + p * (T::one() - qp - qp1),
                    blank * (T::one() - qz - qz1) + p * (qp + qm1),
                    blank * qz + p * (T::one() - qm - qm1),
                    p * qm,
                ]
            };
            rows.push(row);
        }
        let far = [
            p * p,
            two * p * blank,
            blank * blank + two * p * p,
            two * p * blank,
            p * p,
        ];
        let mut cdf: Vec<[u64; 4]> = rows.iter().map(to_cdf).collect();
        cdf.push(to_cdf(&far));
        Self { qt, rows, far, cdf }
    }

    /// Chain for activity `act`, with the table certified on a path of
    /// `max(50 i_max, 4000)` sites.
    pub fn from_activity(act: Activity<T>, i_max: usize) -> Result<Self> {
        Ok(Self::new(build_qtable(act, i_max, (50 * i_max).max(4000))?))
    }

    pub fn qtable(&self) -> &QTable<T> {
        &self.qt
    }

    pub fn i_max(&self) -> usize {
        self.qt.i_max
    }

    /// Jump law from state `i`, indexed by [`JUMPS`].
    pub fn transition_row(&self, i: u64) -> Result<[T; 5]> {
        if i < 1 {
            return Err(invalid("i", "states start at 1"));
        }
        Ok(*self.rows.get(i as usize).unwrap_or(&self.far))
    }

    #[inline]
    fn jump(&self, i: u64, u: u64) -> i64 {
        let c = &self.cdf[(i as usize).min(self.cdf.len() - 1)];
        let idx = c.iter().position(|&t| u < t).unwrap_or(4);
        JUMPS[idx]
    }

    #[inline]
    pub fn step<R: RngCore + ?Sized>(&self, z: u64, rng: &mut R) -> u64 {
        let next = z as i64 + self.jump(z, rng.next_u64());
        debug_assert!(next >= 1, "chain left the positive integers");
        next as u64
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopRule {
    /// Run exactly this many steps.
    Steps(u64),
    /// Stop on entering any listed state, or after `max_steps`.
    Hit { targets: Vec<u64>, max_steps: u64 },
}

pub fn simulate<T: Real, R: RngCore + ?Sized>(
    chain: &GapChain<T>,
    z0: u64,
    stop: &StopRule,
    rng: &mut R,
) -> Result<Vec<u64>> {
    if z0 < 1 {
        return Err(invalid("z0", "states start at 1"));
    }
    let mut traj = vec![z0];
    let mut z = z0;
    match stop {
        StopRule::Steps(k) => {
            for _ in 0..*k {
                z = chain.step(z, rng);
                traj.push(z);
            }
        }
        StopRule::Hit { targets, max_steps } => {
            let mut t = 0;
            while !targets.contains(&z) && t < *max_steps {
                z = chain.step(z, rng);
                traj.push(z);
                t += 1;
            }
        }
    }
    Ok(traj)
}

/// Monte Carlo estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub estimate: f64,
    pub stderr: f64,
    pub reps: u64,
}

impl Estimate {
    fn binomial(hits: u64, reps: u64) -> Self {
        let p = hits as f64 / reps as f64;
        Self {
            estimate: p,
            stderr: (p * (1.0 - p) / reps as f64).sqrt(),
            reps,
        }
    }
}

/// Whether the chain from `j1` reaches `[j2, inf)` before state 1.
pub fn reaches_up<T: Real, R: RngCore + ?Sized>(chain: &GapChain<T>, j1: u64, j2: u64, rng: &mut R) -> bool {
    let mut z = j1;
    while z < j2 {
        if z == 1 {
            return false;
        }
        z = chain.step(z, rng);
    }
    true
}

fn check_levels(j1: u64, j2: u64) -> Result<()> {
    if j1 <= 1 || j1 > j2 {
        return Err(invalid("j1", format!("need 1 < j1 <= j2, got j1 = {j1}, j2 = {j2}")));
    }
    Ok(())
}

/// `P[tau+_{j2} < tau_1 | Z_0 = j1]`; equals 1 when `j1 = j2`.
pub fn hitting_prob_up<T: Real, R: RngCore + ?Sized>(
    chain: &GapChain<T>,
    j1: u64,
    j2: u64,
    reps: u64,
    rng: &mut R,
) -> Result<Estimate> {
    check_levels(j1, j2)?;
    let hits = (0..reps).filter(|_| reaches_up(chain, j1, j2, rng)).count() as u64;
    Ok(Estimate::binomial(hits, reps))
}

/// As [`hitting_prob_up`], with replica `r` driven by stream
/// `"{label}/rep/{r}"`. Chains sharing `(seed, label)` use common random
/// numbers.
pub fn hitting_prob_up_streams<T: Real>(
    chain: &GapChain<T>,
    j1: u64,
    j2: u64,
    reps: u64,
    seed: u64,
    label: &str,
) -> Result<Estimate> {
    check_levels(j1, j2)?;
    let hits = (0..reps)
        .into_par_iter()
        .filter(|r| reaches_up(chain, j1, j2, &mut derive_stream(seed, &format!("{label}/rep/{r}"))))
        .count() as u64;
    Ok(Estimate::binomial(hits, reps))
}

/// Visits to state 1 before the chain enters `until`.
pub fn local_time_at_one<T: Real, R: RngCore + ?Sized>(
    chain: &GapChain<T>,
    z0: u64,
    until: &[u64],
    rng: &mut R,
) -> Result<u64> {
    if z0 < 1 {
        return Err(invalid("z0", "states start at 1"));
    }
    if until.is_empty() {
        return Err(invalid("until", "empty stopping set"));
    }
    let mut z = z0;
    let mut visits = 0;
    while !until.contains(&z) {
        visits += (z == 1) as u64;
        z = chain.step(z, rng);
    }
    Ok(visits)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingRow {
    pub lambda: f64,
    pub j1: u64,
    pub j2: u64,
    pub reps: u64,
    pub estimate: f64,
    pub stderr: f64,
}
