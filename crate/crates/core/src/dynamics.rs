//! Glauber dynamics on the per-column hard-core configurations and the
//! split/merge moves it induces on cycles.
//!
//! A site whose neighbours are vacant is exactly a contact, and toggling it
//! exchanges the tails of the two strands through its endpoints. On the
//! column-0 return map this is `R <- R o (a1 a2)`, which [`CycleTracker`]
//! applies in time proportional to the smaller affected cycle.

use std::io::Write;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::cycles::{decompose, preimage_row, return_map, vertex_cycle_labels, CycleDecomposition};
use crate::error::Result;
use crate::hardcore::{Activity, HardCoreColumn};
use crate::permutation::ArrowField;
use crate::scalar::{Exact, Real};
use crate::torus::TorusDims;
use crate::tracker::{CycleTracker, Effect};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Proposal {
    Occupy,
    Vacate,
}

/// One Glauber step.
///
/// `accepted` is false when a neighbour of the site is occupied and the
/// site is forced vacant; `changed` marks accepted steps whose resampled
/// value differs from the old one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpdateRecord {
    pub step: u64,
    pub column: usize,
    pub dual_site: usize,
    pub proposal: Proposal,
    pub accepted: bool,
    pub changed: bool,
    pub effect: Effect,
    pub cycle_count_after: usize,
}

/// Field, cycle tracker and clock of one chain.
#[derive(Debug, Clone)]
pub struct DynState {
    field: ArrowField,
    tracker: CycleTracker,
    occupy: u64,
    step: u64,
    swaps: usize,
    /// Re-extract cycles after every change and compare.
    pub verify: bool,
}

fn threshold(p: f64) -> u64 {
    if p >= 1.0 {
        u64::MAX
    } else {
        (p * 18446744073709551616.0) as u64
    }
}

impl DynState {
    pub fn new<T: Real>(field: ArrowField, act: Activity<T>) -> Self {
        let tracker = CycleTracker::new(return_map(&field));
        let swaps = field.swap_count();
        Self {
            field,
            tracker,
            occupy: threshold(act.occupy_prob().to_f64().unwrap()),
            step: 0,
            swaps,
            verify: false,
        }
    }

    pub fn field(&self) -> &ArrowField {
        &self.field
    }

    pub fn into_field(self) -> ArrowField {
        self.field
    }

    pub fn dims(&self) -> &TorusDims {
        self.field.dims()
    }

    pub fn step_index(&self) -> u64 {
        self.step
    }

    pub fn cycle_count(&self) -> usize {
        self.tracker.cycle_count()
    }

    pub fn swap_count(&self) -> usize {
        self.swaps
    }

    pub fn swap_density(&self) -> f64 {
        self.swaps as f64 / self.dims().vertex_count() as f64
    }

    /// Normalized size of the largest cycle.
    pub fn largest(&self) -> f64 {
        self.tracker.sizes().first().copied().unwrap_or(0) as f64 / self.dims().m as f64
    }

    /// Non-increasing normalized cycle lengths.
    pub fn structure(&self) -> Vec<f64> {
        let m = self.dims().m as f64;
        self.tracker.sizes().into_iter().map(|k| k as f64 / m).collect()
    }

    pub fn column(&self, j: usize) -> HardCoreColumn {
        self.field.column_occupancy(j)
    }

    pub fn columns(&self) -> Vec<HardCoreColumn> {
        (0..self.dims().n).map(|j| self.column(j)).collect()
    }

    /// Column-0 strands through `(j, k)` and `(j, k + 1)`.
    fn strands_through(&self, j: usize, k: usize) -> (usize, usize) {
        let dims = self.field.dims();
        let (m, n) = (dims.m, dims.n);
        let (mut r1, mut r2) = (k, (k + 1) % m);
        if j <= n - j {
            for jj in (0..j).rev() {
                let col = self.field.column(jj);
                r1 = preimage_row(col, r1, m);
                r2 = preimage_row(col, r2, m);
            }
            (r1, r2)
        } else {
            for jj in j..n {
                let col = self.field.column(jj);
                r1 = (r1 + (col[r1] + 1) as usize) % m;
                r2 = (r2 + (col[r2] + 1) as usize) % m;
            }
            (self.tracker.preimage(r1), self.tracker.preimage(r2))
        }
    }

    fn draw<R: RngCore + ?Sized>(&self, rng: &mut R) -> (usize, usize, Proposal, bool, bool) {
        let dims = self.field.dims();
        let j = rng.random_range(0..dims.n);
        let k = rng.random_range(0..dims.m);
        if self.is_blocked(j, k) {
            return (j, k, Proposal::Vacate, false, false);
        }
        let occupy = rng.next_u64() < self.occupy;
        self.outcome(j, k, occupy)
    }

    fn is_blocked(&self, j: usize, k: usize) -> bool {
        let m = self.dims().m;
        let col = self.field.column(j);
        col[(k + m - 1) % m] == 1 || col[(k + 1) % m] == 1
    }

    fn outcome(&self, j: usize, k: usize, occupy: bool) -> (usize, usize, Proposal, bool, bool) {
        if self.is_blocked(j, k) {
            return (j, k, Proposal::Vacate, false, false);
        }
        let occupied = self.field.column(j)[k] == 1;
        let proposal = if occupy { Proposal::Occupy } else { Proposal::Vacate };
        (j, k, proposal, true, occupy != occupied)
    }

    /// Draws a step and classifies it without changing the state.
    pub fn propose<R: RngCore + ?Sized>(&self, rng: &mut R) -> UpdateRecord {
        let (j, k, proposal, accepted, changed) = self.draw(rng);
        let mut effect = Effect::None;
        let mut count = self.cycle_count();
        if changed {
            let (a1, a2) = self.strands_through(j, k);
            if self.tracker.same_cycle(a1, a2) {
                effect = Effect::Split;
                count += 1;
            } else {
                effect = Effect::Merge;
                count -= 1;
            }
        }
        UpdateRecord {
            step: self.step,
            column: j,
            dual_site: k,
            proposal,
            accepted,
            changed,
            effect,
            cycle_count_after: count,
        }
    }

    pub fn glauber_step<R: RngCore + ?Sized>(&mut self, rng: &mut R) -> UpdateRecord {
        let d = self.draw(rng);
        self.apply(d)
    }

    /// Performs the update of dual site `(j, k)` whose resampled value is
    /// `occupy`; a blocked site stays vacant.
    pub fn update_site(&mut self, j: usize, k: usize, occupy: bool) -> UpdateRecord {
        let d = self.outcome(j, k, occupy);
        self.apply(d)
    }

    fn apply(&mut self, d: (usize, usize, Proposal, bool, bool)) -> UpdateRecord {
        let (j, k, proposal, accepted, changed) = d;
        let mut effect = Effect::None;
        if changed {
            let (a1, a2) = self.strands_through(j, k);
            let m = self.dims().m;
            let col = self.field.column_mut(j);
            let (lo, hi) = match proposal {
                Proposal::Occupy => (1, -1),
                Proposal::Vacate => (0, 0),
            };
            col[k] = lo;
            col[(k + 1) % m] = hi;
            match proposal {
                Proposal::Occupy => self.swaps += 1,
                Proposal::Vacate => self.swaps -= 1,
            }
            effect = self.tracker.swap_images(a1, a2);
            debug_assert_ne!(effect, Effect::None);
            if self.verify {
                self.check();
            }
        }
        let rec = UpdateRecord {
            step: self.step,
            column: j,
            dual_site: k,
            proposal,
            accepted,
            changed,
            effect,
            cycle_count_after: self.cycle_count(),
        };
        self.step += 1;
        rec
    }

    /// Full consistency check against re-extraction.
    pub fn check(&self) {
        let dec = decompose(&self.field);
        assert_eq!(dec.len(), self.cycle_count(), "cycle count drifted");
        assert_eq!(dec.return_map(), self.tracker.perm(), "return map drifted");
        assert!(self.field.is_bijective());
        assert!(!self.field.has_global_shift());
        assert_eq!(self.field.swap_count(), self.swaps);
    }
}

/// Receives every update record of [`run_updates`].
pub trait Observer {
    fn observe(&mut self, rec: &UpdateRecord, state: &DynState);
}

impl Observer for Vec<UpdateRecord> {
    fn observe(&mut self, rec: &UpdateRecord, _state: &DynState) {
        self.push(*rec);
    }
}

/// Writes every `every`-th record as one JSON line.
pub struct NdjsonObserver<W: Write> {
    out: W,
    every: u64,
    pub error: Option<std::io::Error>,
}

impl<W: Write> NdjsonObserver<W> {
    pub fn new(out: W, every: u64) -> Self {
        Self {
            out,
            every: every.max(1),
            error: None,
        }
    }

    pub fn into_inner(self) -> Result<W> {
        match self.error {
            Some(e) => Err(e.into()),
            None => Ok(self.out),
        }
    }
}

impl<W: Write> Observer for NdjsonObserver<W> {
    fn observe(&mut self, rec: &UpdateRecord, _state: &DynState) {
        if self.error.is_some() || rec.step % self.every != 0 {
            return;
        }
        let line = serde_json::to_string(rec).expect("record serializes");
        if let Err(e) = writeln!(self.out, "{line}") {
            self.error = Some(e);
        }
    }
}

/// Step counts of a run; `changed` is the non-lazy clock.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSummary {
    pub steps: u64,
    pub accepted: u64,
    pub changed: u64,
    pub splits: u64,
    pub merges: u64,
}

impl RunSummary {
    pub fn add(&mut self, rec: &UpdateRecord) {
        self.steps += 1;
        self.accepted += rec.accepted as u64;
        self.changed += rec.changed as u64;
        match rec.effect {
            Effect::Split => self.splits += 1,
            Effect::Merge => self.merges += 1,
            Effect::None => {}
        }
    }

    pub fn nonlazy_fraction(&self) -> f64 {
        self.changed as f64 / self.steps.max(1) as f64
    }
}

pub fn run_updates<R: RngCore + ?Sized>(
    state: &mut DynState,
    count: u64,
    rng: &mut R,
    observers: &mut [&mut dyn Observer],
) -> RunSummary {
    let mut summary = RunSummary::default();
    for _ in 0..count {
        let rec = state.glauber_step(rng);
        summary.add(&rec);
        for o in observers.iter_mut() {
            o.observe(&rec, state);
        }
    }
    summary
}

/// Empirical and predicted share of one unordered cycle pair `(i, j)`,
/// `i <= j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairRate {
    pub i: usize,
    pub j: usize,
    pub whole_i: usize,
    pub whole_j: usize,
    pub hits: u64,
    pub empirical: f64,
    pub predicted: f64,
}

/// Tabulates the cycle pairs met by accepted proposals against a fixed
/// snapshot `(field, dec)`.
///
/// The prediction gives ordered pair `(i, j)` weight
/// `w_i (w_j - [i = j])` with `w` the whole traversal counts, normalized
/// over all ordered pairs so the shares sum to one.
pub fn split_merge_rates(
    records: &[UpdateRecord],
    field: &ArrowField,
    dec: &CycleDecomposition,
) -> Result<Vec<PairRate>> {
    let dims = field.dims();
    let gamma = dims.require_gamma(1)?;
    let labels = vertex_cycle_labels(field, dec);
    let c = dec.len();
    let mut hits = vec![0u64; c * c];
    let mut total = 0u64;
    for r in records.iter().filter(|r| r.accepted) {
        let lo = labels[r.column * dims.m + r.dual_site] as usize;
        let hi = labels[r.column * dims.m + (r.dual_site + 1) % dims.m] as usize;
        let (a, b) = (lo.min(hi), lo.max(hi));
        hits[a * c + b] += 1;
        total += 1;
    }
    let w: Vec<usize> = dec.strand_counts().iter().map(|k| k / gamma).collect();
    let sum: usize = w.iter().sum();
    let norm = (sum * sum).saturating_sub(sum) as f64;
    let mut out = Vec::new();
    for i in 0..c {
        for j in i..c {
            let ordered = if i == j {
                (w[i] * w[i].saturating_sub(1)) as f64
            } else {
                2.0 * (w[i] * w[j]) as f64
            };
            out.push(PairRate {
                i,
                j,
                whole_i: w[i],
                whole_j: w[j],
                hits: hits[i * c + j],
                empirical: if total > 0 { hits[i * c + j] as f64 / total as f64 } else { 0.0 },
                predicted: if norm > 0.0 { ordered / norm } else { 0.0 },
            });
        }
    }
    Ok(out)
}

/// One-column Glauber kernel on the independent sets of `C_m`, in the
/// state order of [`crate::hardcore::enumerate_columns`].
pub fn glauber_kernel<T: Exact>(m: usize, lambda: &T) -> Result<(Vec<HardCoreColumn>, Vec<Vec<T>>)> {
    let states: Vec<HardCoreColumn> = crate::hardcore::enumerate_columns(m, lambda)?
        .into_iter()
        .map(|(c, _)| c)
        .collect();
    let index = |mask: u64| states.iter().position(|s| s.mask() == mask).unwrap();
    let mt = T::from_usize_lossless(m);
    let occ = lambda.clone() / (T::one() + lambda.clone());
    let vac = T::one() / (T::one() + lambda.clone());
    let mut kernel = vec![vec![T::zero(); states.len()]; states.len()];
    for (s, st) in states.iter().enumerate() {
        let mask = st.mask();
        for k in 0..m {
            let nb = (mask >> ((k + m - 1) % m) | mask >> ((k + 1) % m)) & 1 == 1;
            if nb {
                kernel[s][s] = kernel[s][s].clone() + T::one() / mt.clone();
                continue;
            }
            let on = index(mask | 1 << k);
            let off = index(mask & !(1 << k));
            kernel[s][on] = kernel[s][on].clone() + occ.clone() / mt.clone();
            kernel[s][off] = kernel[s][off].clone() + vac.clone() / mt.clone();
        }
    }
    Ok((states, kernel))
}

/// Exact small integers in any [`Exact`] scalar.
trait FromUsize {
    fn from_usize_lossless(n: usize) -> Self;
}

impl<T: Exact> FromUsize for T {
    fn from_usize_lossless(n: usize) -> Self {
        (0..n).fold(T::zero(), |acc, _| acc + T::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycles::{contact_count, extract_cycles};
    use crate::hardcore::enumerate_columns;
    use crate::permutation::{activity_from_step, EquilibriumSampler, StepParam};
    use crate::rng::derive_stream;
    use crate::stats::{mean_se, pearson, two_sample_stats};
    use crate::torus::{make_dims, DualVertex};
    use crate::Rational;

    fn sp(a: f64) -> StepParam<f64> {
        StepParam::new(a).unwrap()
    }

    fn state_from(arrows: Vec<i8>, n: usize, m: usize, a: f64) -> DynState {
        let dims = TorusDims::from_sizes(n, m).unwrap();
        let f = ArrowField::from_arrows(dims, arrows).unwrap();
        let mut st = DynState::new(f, activity_from_step(sp(a)));
        st.verify = true;
        st
    }

    #[test]
    fn toggles_on_the_smallest_torus() {
        let mut st = state_from(vec![1, -1, 0, 0, 0, 0], 3, 2, 1.0 / 3.0);
        assert_eq!(st.cycle_count(), 2);
        let r = st.update_site(0, 0, false);
        assert_eq!((r.accepted, r.changed, r.effect), (true, true, Effect::Merge));
        assert_eq!(extract_cycles(st.field()).lengths(), vec![6]);
        let r = st.update_site(0, 1, true);
        assert_eq!(r.effect, Effect::Split);
        assert_eq!(extract_cycles(st.field()).lengths(), vec![3, 3]);
        // neighbour occupied: forced vacant
        let r = st.update_site(0, 0, true);
        assert_eq!((r.accepted, r.changed, r.effect), (false, false, Effect::None));
        let mut st = state_from(vec![0; 6], 3, 2, 1.0 / 3.0);
        let r = st.update_site(0, 0, true);
        assert_eq!((r.effect, r.cycle_count_after), (Effect::Split, 2));
        assert_eq!(st.step_index(), 1);
    }

    #[test]
    fn occupy_probability_at_one_third() {
        let dims = make_dims(40, 1.0).unwrap();
        let st = DynState::new(ArrowField::zeros(dims), activity_from_step(sp(1.0 / 3.0)));
        let mut rng = derive_stream(2, "occ");
        let n = 100_000;
        let occ = (0..n).filter(|_| st.propose(&mut rng).proposal == Proposal::Occupy).count();
        let f = occ as f64 / n as f64;
        assert!((f - 0.5).abs() < 4.0 * (0.25 / n as f64).sqrt());
        // all-zero field: every site is a contact and every occupation is a split
        let mut rng = derive_stream(3, "occ2");
        for _ in 0..1000 {
            let r = st.propose(&mut rng);
            assert!(r.accepted);
            assert_eq!(r.effect == Effect::None, r.proposal == Proposal::Vacate);
        }
    }

    #[test]
    fn blocked_sites_stay_vacant() {
        let dims = make_dims(30, 1.0).unwrap();
        let eq = EquilibriumSampler::new(dims, sp(0.4)).unwrap();
        let mut rng = derive_stream(4, "blocked");
        let mut st = DynState::new(eq.sample(&mut rng), activity_from_step(sp(0.4)));
        for _ in 0..20_000 {
            let before = st.field().clone();
            let r = st.glauber_step(&mut rng);
            let v = DualVertex::new(r.column, r.dual_site);
            assert_eq!(r.accepted, crate::cycles::is_contact(&before, v));
            if !r.accepted {
                assert_eq!(r.effect, Effect::None);
                assert!(!r.changed);
                assert_eq!(&before, st.field());
            }
        }
        st.check();
    }

    #[test]
    fn every_change_moves_cycle_count_by_one() {
        let dims = make_dims(48, 1.0).unwrap();
        let eq = EquilibriumSampler::new(dims, sp(1.0 / 3.0)).unwrap();
        let mut rng = derive_stream(5, "pm1");
        let mut st = DynState::new(eq.sample(&mut rng), activity_from_step(sp(1.0 / 3.0)));
        st.verify = true;
        let mut prev = st.cycle_count();
        for _ in 0..20_000 {
            let r = st.glauber_step(&mut rng);
            let d = r.cycle_count_after as isize - prev as isize;
            match r.effect {
                Effect::Split => assert_eq!(d, 1),
                Effect::Merge => assert_eq!(d, -1),
                Effect::None => assert_eq!(d, 0),
            }
            assert_eq!(r.changed, r.effect != Effect::None);
            prev = r.cycle_count_after;
        }
    }

    #[test]
    fn propose_matches_step() {
        let dims = make_dims(24, 1.0).unwrap();
        let eq = EquilibriumSampler::new(dims, sp(0.3)).unwrap();
        let mut rng = derive_stream(6, "propose");
        let mut st = DynState::new(eq.sample(&mut rng), activity_from_step(sp(0.3)));
        for _ in 0..2000 {
            let p = st.propose(&mut rng.clone());
            let r = st.glauber_step(&mut rng);
            assert_eq!(p, r);
        }
    }

    #[test]
    fn zero_updates_leave_state() {
        let dims = make_dims(16, 1.0).unwrap();
        let eq = EquilibriumSampler::new(dims, sp(0.3)).unwrap();
        let mut rng = derive_stream(7, "zero");
        let f = eq.sample(&mut rng);
        let mut st = DynState::new(f.clone(), activity_from_step(sp(0.3)));
        let s = run_updates(&mut st, 0, &mut rng, &mut []);
        assert_eq!(s.steps, 0);
        assert_eq!(st.field(), &f);
    }

    #[test]
    fn kernel_fixes_hard_core_law() {
        for m in 3..=8 {
            for l in [0.25f64, 1.0, 2.0] {
                let (states, k) = glauber_kernel(m, &l).unwrap();
                let pi: Vec<f64> = enumerate_columns(m, &l).unwrap().into_iter().map(|x| x.1).collect();
                for (s, row) in k.iter().enumerate() {
                    assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                    assert_eq!(states[s].len(), m);
                }
                for t in 0..states.len() {
                    let v: f64 = (0..states.len()).map(|s| pi[s] * k[s][t]).sum();
                    assert!((v - pi[t]).abs() < 1e-12, "m={m} l={l}");
                }
            }
            let l = Rational::new(1.into(), 4.into());
            let (_, k) = glauber_kernel(m, &l).unwrap();
            let pi: Vec<Rational> = enumerate_columns(m, &l).unwrap().into_iter().map(|x| x.1).collect();
            for t in 0..pi.len() {
                let v = (0..pi.len()).fold(Rational::from_integer(0.into()), |acc, s| acc + &pi[s] * &k[s][t]);
                assert_eq!(v, pi[t]);
            }
        }
    }

    #[test]
    fn ndjson_downsamples() {
        let dims = make_dims(16, 1.0).unwrap();
        let eq = EquilibriumSampler::new(dims, sp(0.3)).unwrap();
        let mut rng = derive_stream(8, "nd");
        let mut st = DynState::new(eq.sample(&mut rng), activity_from_step(sp(0.3)));
        let mut obs = NdjsonObserver::new(Vec::new(), 10);
        let mut all: Vec<UpdateRecord> = Vec::new();
        run_updates(&mut st, 95, &mut rng, &mut [&mut obs, &mut all]);
        let text = String::from_utf8(obs.into_inner().unwrap()).unwrap();
        let lines: Vec<UpdateRecord> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(lines.len(), 10);
        assert_eq!(lines[3], all[30]);
        assert!(text.lines().next().unwrap().contains("\"cycle_count_after\""));
    }

    #[test]
    fn stationarity_small() {
        let dims = make_dims(24, 1.0).unwrap();
        let a = sp(1.0 / 3.0);
        let eq = EquilibriumSampler::new(dims, a).unwrap();
        let (mut before, mut after) = (Vec::new(), Vec::new());
        let (mut cb, mut ca) = (Vec::new(), Vec::new());
        for rep in 0..200 {
            let mut rng = derive_stream(9, &format!("stat/{rep}"));
            let mut st = DynState::new(eq.sample(&mut rng), activity_from_step(a));
            before.push(st.swap_density());
            cb.push(contact_count(st.field()) as f64);
            run_updates(&mut st, 5 * dims.vertex_count() as u64, &mut rng, &mut []);
            after.push(st.swap_density());
            ca.push(contact_count(st.field()) as f64);
        }
        for (x, y) in [(&before, &after), (&cb, &ca)] {
            let t = two_sample_stats(x, y).unwrap();
            assert!(t.mean_diff.abs() < 3.0 * t.mean_diff_se, "{t:?}");
        }
        assert!(mean_se(&after).mean > 0.0);
    }

    #[test]
    fn single_cycle_only_splits() {
        let dims = TorusDims::from_offset(100, 1).unwrap();
        let f = ArrowField::zeros(dims);
        let dec = decompose(&f);
        assert_eq!(dec.len(), 1);
        let st = DynState::new(f.clone(), activity_from_step(sp(0.3)));
        let mut rng = derive_stream(10, "single");
        let recs: Vec<UpdateRecord> = (0..5000).map(|_| st.propose(&mut rng)).collect();
        assert!(recs.iter().filter(|r| r.changed).all(|r| r.effect == Effect::Split));
        let rates = split_merge_rates(&recs, &f, &dec).unwrap();
        assert_eq!(rates.len(), 1);
        assert_eq!(rates[0].empirical, 1.0);
    }

    #[test]
    fn rates_follow_traversal_products() {
        let dims = TorusDims::from_offset(256, 4).unwrap();
        let a = sp(1.0 / 3.0);
        let eq = EquilibriumSampler::new(dims, a).unwrap();
        let mut rng = derive_stream(11, "rates");
        let (mut emp, mut pred) = (Vec::new(), Vec::new());
        for _ in 0..20 {
            let f = eq.sample(&mut rng);
            let dec = decompose(&f);
            let st = DynState::new(f.clone(), activity_from_step(a));
            let recs: Vec<UpdateRecord> = (0..20_000).map(|_| st.propose(&mut rng)).collect();
            let rates = split_merge_rates(&recs, &f, &dec).unwrap();
            let s: f64 = rates.iter().map(|r| r.predicted).sum();
            assert!(s == 0.0 || (s - 1.0).abs() < 1e-12);
            for r in rates {
                emp.push(r.empirical);
                pred.push(r.predicted);
            }
        }
        assert!(pearson(&emp, &pred) > 0.9, "{}", pearson(&emp, &pred));
    }
}
