//! The experiment registry. Each experiment has a typed entry point that the
//! acceptance suite calls directly and a row type that fixes its CSV schema.

use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;
use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, ExperimentResult, Report};
use crate::cycles::{check_separation_event, contact_count, decompose, traversal_pair_contacts};
use crate::dynamics::{run_updates, split_merge_rates, DynState, RunSummary};
use crate::error::{invalid, Result};
use crate::gapchain::{hitting_prob_up_streams, GapChain, DEFAULT_I_MAX};
use crate::hardcore::{enumerate_columns, occupation_prob, partition_cycle_exact, Activity, HardCoreColumn};
use crate::permutation::{
    activity_from_step, activity_with_convention, detect_global_shift, ActivityConvention, EquilibriumSampler,
    GlobalShift, RejectionSampler, StepParam,
};
use crate::refmodels::{pd1_sample, DEFAULT_TAIL_EPS};
use crate::rng::derive_stream;
use crate::stats::{chi_square_gof, mean_se, pearson, total_variation, two_sample_stats, weighted_linear_fit};
use crate::torus::make_dims;

const CHUNK: u64 = 10_000;

pub(super) fn dispatch(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let name = cfg.experiment.as_str();
    match name {
        "oracle-equivalence" => ExperimentResult::from_report(name, &oracle_equivalence(cfg)?),
        "global-shift-decay" => ExperimentResult::from_report(name, &global_shift_decay(cfg)?),
        "glauber-stationarity" => ExperimentResult::from_report(name, &glauber_stationarity(cfg)?),
        "splitmerge-invariant" => ExperimentResult::from_report(name, &splitmerge_invariant(cfg)?),
        "pd1-convergence" => ExperimentResult::from_report(name, &pd1_convergence(cfg)?),
        "contact-concentration" => ExperimentResult::from_report(name, &contact_concentration(cfg)?),
        "gapchain-hitting" => ExperimentResult::from_report(name, &gapchain_hitting(cfg)?),
        "strand-separation" => ExperimentResult::from_report(name, &strand_separation(cfg)?),
        _ => Err(crate::Error::UnknownExperiment(cfg.experiment.clone())),
    }
}

macro_rules! report {
    ($report:ty, $row:ty) => {
        impl Report for $report {
            type Row = $row;
            fn rows(&self) -> &[$row] {
                &self.rows
            }
        }
    };
}

fn step(a: f64) -> Result<StepParam<f64>> {
    StepParam::new(a)
}

/// Runs `f(chunk, count)` over fixed-size chunks of `total` work items and
/// returns the results in chunk order.
fn chunked<T: Send>(total: u64, f: impl Fn(u64, u64) -> Result<T> + Sync) -> Result<Vec<T>> {
    let chunks = total.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| f(c, CHUNK.min(total - c * CHUNK)))
        .collect()
}

fn rejection_counts(sampler: &RejectionSampler, samples: u64, seed: u64, label: &str) -> Result<(BTreeMap<ColumnKey, u64>, u64)> {
    let parts = chunked(samples, |c, count| {
        let mut rng = derive_stream(seed, &format!("{label}/chunk/{c}"));
        let mut counts: HashMap<ColumnKey, u64> = HashMap::new();
        let mut attempts = 0;
        for _ in 0..count {
            let (col, tries) = sampler.sample_counted(&mut rng)?;
            attempts += tries;
            let key = match detect_global_shift(&col) {
                GlobalShift::Up => ColumnKey::Up,
                GlobalShift::Down => ColumnKey::Down,
                GlobalShift::None => {
                    let occ: Vec<bool> = col.steps.iter().map(|&s| s == 1).collect();
                    HardCoreColumn::from_bits(occ).map_or(ColumnKey::Invalid, |h| ColumnKey::Set(h.mask()))
                }
            };
            *counts.entry(key).or_default() += 1;
        }
        Ok((counts, attempts))
    })?;
    let mut total = BTreeMap::new();
    let mut attempts = 0;
    for (counts, a) in parts {
        attempts += a;
        for (k, v) in counts {
            *total.entry(k).or_default() += v;
        }
    }
    Ok((total, attempts))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum ColumnKey {
    Set(u64),
    Up,
    Down,
    Invalid,
}

// ---------------------------------------------------------------- oracle

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub m: usize,
    pub a: f64,
    pub convention: String,
    pub lambda: f64,
    pub samples: u64,
    pub states: usize,
    pub tv: f64,
    pub chi2_pvalue: f64,
    /// Accepted columns that were not a valid shift-free configuration.
    pub invalid: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    #[serde(skip)]
    pub rows: Vec<OracleRow>,
    pub max_tv_corrected: f64,
    pub min_tv_literal: f64,
}
report!(OracleReport, OracleRow);

/// Rejection-conditioned columns against the exact hard-core law under both
/// activity conventions.
pub fn oracle_equivalence(cfg: &ExperimentConfig) -> Result<OracleReport> {
    let samples = cfg.samples.unwrap_or(100_000);
    let mut rows = Vec::new();
    for m in cfg.ms(&[3, 4, 5, 6, 7, 8]) {
        for a in cfg.a_list(&[0.25, 1.0 / 3.0]) {
            let p = step(a)?;
            let sampler = RejectionSampler::new(m, p, true)?;
            let (counts, _) = rejection_counts(&sampler, samples, cfg.seed, &format!("oracle/m/{m}/a/{a}"))?;
            let invalid = counts.get(&ColumnKey::Invalid).copied().unwrap_or(0);
            for conv in [ActivityConvention::Corrected, ActivityConvention::Literal] {
                let lambda = activity_with_convention(p, conv).value();
                let law = enumerate_columns(m, &lambda)?;
                let observed: Vec<u64> = law
                    .iter()
                    .map(|(c, _)| counts.get(&ColumnKey::Set(c.mask())).copied().unwrap_or(0))
                    .collect();
                let probs: Vec<f64> = law.iter().map(|(_, q)| *q).collect();
                let emp: Vec<f64> = observed.iter().map(|&c| c as f64 / samples as f64).collect();
                let tv = total_variation(&emp, &probs) + 0.5 * invalid as f64 / samples as f64;
                rows.push(OracleRow {
                    m,
                    a,
                    convention: serde_json::to_value(conv)?.as_str().unwrap_or_default().to_string(),
                    lambda,
                    samples,
                    states: law.len(),
                    tv,
                    chi2_pvalue: chi_square_gof(&observed, &probs).1,
                    invalid,
                });
            }
        }
    }
    let tvs = |conv: &'static str| rows.iter().filter(move |r| r.convention == conv).map(|r| r.tv);
    Ok(OracleReport {
        max_tv_corrected: tvs("corrected").fold(0.0, f64::max),
        min_tv_literal: tvs("literal").fold(f64::INFINITY, f64::min),
        rows,
    })
}

// ---------------------------------------------------------- global shift

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftRow {
    pub m: usize,
    pub a: f64,
    pub samples: u64,
    pub shifts: u64,
    pub prob: f64,
    pub stderr: f64,
    /// `2 a^m / (2 a^m + (1 - 2a)^m Z_m(lambda))`.
    pub exact: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftReport {
    #[serde(skip)]
    pub rows: Vec<ShiftRow>,
    /// Weighted fit of `ln prob` against `m`, over rows with a shift.
    pub slope: f64,
    pub slope_se: f64,
    pub slope_z: f64,
    pub fitted_rows: usize,
}
report!(ShiftReport, ShiftRow);

/// Probability that a bijective column is a global shift.
pub fn global_shift_decay(cfg: &ExperimentConfig) -> Result<ShiftReport> {
    let samples = cfg.samples.unwrap_or(100_000);
    let a = cfg.a.unwrap_or(1.0 / 3.0);
    let p = step(a)?;
    let lambda = activity_from_step(p).value();
    let mut rows = Vec::new();
    for m in cfg.ms(&[4, 6, 8, 10, 12]) {
        let sampler = RejectionSampler::new(m, p, false)?;
        let (counts, _) = rejection_counts(&sampler, samples, cfg.seed, &format!("shift/m/{m}/a/{a}"))?;
        let shifts = counts.get(&ColumnKey::Up).copied().unwrap_or(0) + counts.get(&ColumnKey::Down).copied().unwrap_or(0);
        let prob = shifts as f64 / samples as f64;
        let shift_mass = 2.0 * a.powi(m as i32);
        let free_mass = (1.0 - 2.0 * a).powi(m as i32) * partition_cycle_exact(m, &lambda)?;
        rows.push(ShiftRow {
            m,
            a,
            samples,
            shifts,
            prob,
            stderr: (prob * (1.0 - prob) / samples as f64).sqrt(),
            exact: shift_mass / (shift_mass + free_mass),
        });
    }
    let fit_rows: Vec<&ShiftRow> = rows.iter().filter(|r| r.shifts > 0 && r.shifts < r.samples).collect();
    let (slope, slope_se) = if fit_rows.len() >= 2 {
        let x: Vec<f64> = fit_rows.iter().map(|r| r.m as f64).collect();
        let y: Vec<f64> = fit_rows.iter().map(|r| r.prob.ln()).collect();
        let sy: Vec<f64> = fit_rows.iter().map(|r| ((1.0 - r.prob) / (r.samples as f64 * r.prob)).sqrt()).collect();
        let fit = weighted_linear_fit(&x, &y, &sy);
        (fit.slope, fit.slope_se)
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(ShiftReport {
        slope,
        slope_se,
        slope_z: slope / slope_se,
        fitted_rows: fit_rows.len(),
        rows,
    })
}

// ----------------------------------------------------------- stationarity

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicaRow {
    pub rep: u64,
    pub swap_density_before: f64,
    pub swap_density_after: f64,
    pub contacts_before: usize,
    pub contacts_after: usize,
    pub l1_before: f64,
    pub l1_after: f64,
    pub steps: u64,
    pub changed: u64,
    pub splits: u64,
    pub merges: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub observable: String,
    pub mean_before: f64,
    pub se_before: f64,
    pub mean_after: f64,
    pub se_after: f64,
    /// Difference of means over its standard error.
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    #[serde(skip)]
    pub rows: Vec<ReplicaRow>,
    pub m: usize,
    pub n: usize,
    pub updates: u64,
    pub expected_swap_density: f64,
    pub comparisons: Vec<Comparison>,
    pub max_abs_z: f64,
    pub nonlazy_fraction: f64,
}
report!(StationarityReport, ReplicaRow);

fn compare(name: &str, before: &[f64], after: &[f64]) -> Comparison {
    let (b, a) = (mean_se(before), mean_se(after));
    let se = (b.se.powi(2) + a.se.powi(2)).sqrt();
    let diff = a.mean - b.mean;
    Comparison {
        observable: name.to_string(),
        mean_before: b.mean,
        se_before: b.se,
        mean_after: a.mean,
        se_after: a.se,
        z: if se > 0.0 { diff / se } else if diff == 0.0 { 0.0 } else { f64::INFINITY },
    }
}

/// Equilibrium replicas measured before and after `updates` Glauber steps
/// (default `10 n m`).
pub fn glauber_stationarity(cfg: &ExperimentConfig) -> Result<StationarityReport> {
    let m = cfg.m.unwrap_or(64);
    let dims = make_dims(m, cfg.cprime.unwrap_or(1.0))?;
    let p = step(cfg.a.unwrap_or(1.0 / 3.0))?;
    let act = activity_from_step(p);
    let reps = cfg.reps.unwrap_or(100);
    let updates = cfg.updates.unwrap_or(10 * (dims.n * dims.m) as u64);
    let sampler = EquilibriumSampler::new(dims, p)?;
    let rows: Vec<ReplicaRow> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = derive_stream(cfg.seed, &format!("stationarity/rep/{rep}/field"));
            let field = sampler.sample(&mut rng);
            let contacts_before = contact_count(&field);
            let mut state = DynState::new(field, act);
            let swap_density_before = state.swap_density();
            let l1_before = state.largest();
            let mut rng = derive_stream(cfg.seed, &format!("stationarity/rep/{rep}/dyn"));
            let s = run_updates(&mut state, updates, &mut rng, &mut []);
            ReplicaRow {
                rep,
                swap_density_before,
                swap_density_after: state.swap_density(),
                contacts_before,
                contacts_after: contact_count(state.field()),
                l1_before,
                l1_after: state.largest(),
                steps: s.steps,
                changed: s.changed,
                splits: s.splits,
                merges: s.merges,
            }
        })
        .collect();
    let col = |f: &dyn Fn(&ReplicaRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let comparisons = vec![
        compare("swap_density", &col(&|r| r.swap_density_before), &col(&|r| r.swap_density_after)),
        compare("contacts", &col(&|r| r.contacts_before as f64), &col(&|r| r.contacts_after as f64)),
        compare("largest", &col(&|r| r.l1_before), &col(&|r| r.l1_after)),
    ];
    let total = rows.iter().fold(RunSummary::default(), |mut acc, r| {
        acc.steps += r.steps;
        acc.changed += r.changed;
        acc
    });
    Ok(StationarityReport {
        m: dims.m,
        n: dims.n,
        updates,
        expected_swap_density: occupation_prob(m, act)?,
        max_abs_z: comparisons.iter().map(|c| c.z.abs()).fold(0.0, f64::max),
        comparisons,
        nonlazy_fraction: total.nonlazy_fraction(),
        rows,
    })
}

// ------------------------------------------------------------ split-merge

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRateRow {
    pub sample_id: u64,
    pub i: usize,
    pub j: usize,
    pub whole_i: usize,
    pub whole_j: usize,
    pub hits: u64,
    pub empirical: f64,
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitMergeReport {
    #[serde(skip)]
    pub rows: Vec<PairRateRow>,
    pub m: usize,
    pub proposals_per_sample: u64,
    pub accepted_fraction: f64,
    /// Pearson correlation of empirical and predicted shares, pooled over
    /// samples.
    pub correlation: f64,
}
report!(SplitMergeReport, PairRateRow);

/// Cycle pairs hit by accepted proposals, against the traversal-product
/// prediction, on frozen equilibrium snapshots.
pub fn splitmerge_invariant(cfg: &ExperimentConfig) -> Result<SplitMergeReport> {
    let m = cfg.m.unwrap_or(4096);
    let (cprime, a) = (cfg.cprime.unwrap_or(1.0), cfg.a.unwrap_or(1.0 / 3.0));
    let dims = make_dims(m, cprime)?;
    dims.require_gamma(1)?;
    let p = step(a)?;
    let act = activity_from_step(p);
    let samples = cfg.samples.unwrap_or(20);
    let proposals = cfg.updates.unwrap_or(100_000);
    let sampler = EquilibriumSampler::new(dims, p)?;
    let mut rows = Vec::new();
    let mut accepted = 0u64;
    for s in 0..samples {
        let field = sampler.sample_streams(cfg.seed, &format!("splitmerge/m/{m}/s/{s}"));
        let dec = decompose(&field);
        let state = DynState::new(field, act);
        let mut rng = derive_stream(cfg.seed, &format!("splitmerge/m/{m}/s/{s}/proposals"));
        let records: Vec<_> = (0..proposals).map(|_| state.propose(&mut rng)).collect();
        accepted += records.iter().filter(|r| r.accepted).count() as u64;
        for r in split_merge_rates(&records, state.field(), &dec)? {
            rows.push(PairRateRow {
                sample_id: s,
                i: r.i,
                j: r.j,
                whole_i: r.whole_i,
                whole_j: r.whole_j,
                hits: r.hits,
                empirical: r.empirical,
                predicted: r.predicted,
            });
        }
    }
    let emp: Vec<f64> = rows.iter().map(|r| r.empirical).collect();
    let pred: Vec<f64> = rows.iter().map(|r| r.predicted).collect();
    Ok(SplitMergeReport {
        m,
        proposals_per_sample: proposals,
        accepted_fraction: accepted as f64 / (samples * proposals) as f64,
        correlation: pearson(&emp, &pred),
        rows,
    })
}

// --------------------------------------------------------------- ensemble

/// What a large equilibrium sample contributes to the PD(1) and contact
/// experiments; the field itself is dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSample {
    pub sample_id: u64,
    pub m: usize,
    pub gamma: usize,
    /// Strands per cycle, non-increasing.
    pub strand_counts: Vec<usize>,
    pub traversals: usize,
    pub pair_counts: Option<Vec<u32>>,
}

impl EnsembleSample {
    /// Cycle structure by vertex count.
    pub fn structure(&self) -> Vec<f64> {
        self.strand_counts.iter().map(|&k| k as f64 / self.m as f64).collect()
    }

    /// Cycle structure by whole traversal count, `floor(K / gamma)` over its
    /// total. Empty when no cycle holds a whole traversal.
    pub fn traversal_structure(&self) -> Vec<f64> {
        let whole: Vec<usize> = self.strand_counts.iter().map(|&k| k / self.gamma).filter(|&w| w > 0).collect();
        let total: usize = whole.iter().sum();
        whole.iter().map(|&w| w as f64 / total as f64).collect()
    }
}

pub fn ensemble_label(m: usize, cprime: f64, a: f64, sample: u64) -> String {
    format!("ensemble/m/{m}/cprime/{cprime}/a/{a}/s/{sample}")
}

/// Draws `samples` equilibrium fields one at a time, each from its own
/// labelled column streams.
pub fn ensemble(m: usize, cprime: f64, a: f64, samples: u64, seed: u64, with_contacts: bool) -> Result<Vec<EnsembleSample>> {
    let dims = make_dims(m, cprime)?;
    let gamma = dims.require_gamma(if with_contacts { 2 } else { 1 })?;
    let sampler = EquilibriumSampler::new(dims, step(a)?)?;
    (0..samples)
        .map(|s| {
            let field = sampler.sample_streams(seed, &ensemble_label(m, cprime, a, s));
            let dec = decompose(&field);
            let mut strand_counts = dec.strand_counts().to_vec();
            strand_counts.sort_unstable_by(|x, y| y.cmp(x));
            let pc = if with_contacts { Some(traversal_pair_contacts(&field, &dec)?) } else { None };
            Ok(EnsembleSample {
                sample_id: s,
                m,
                gamma,
                traversals: strand_counts.iter().map(|k| k / gamma).sum(),
                strand_counts,
                pair_counts: pc.map(|p| p.counts),
            })
        })
        .collect()
}

// -------------------------------------------------------------------- pd1

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pd1Row {
    pub m: usize,
    pub cprime: f64,
    pub a: f64,
    pub gamma: usize,
    pub samples: u64,
    /// Mean largest part in traversal units.
    pub mean_l1: f64,
    pub se_l1: f64,
    /// Mean largest part by vertex count.
    pub mean_l1_vertex: f64,
    pub reference_mean: f64,
    pub abs_diff: f64,
    pub ks_statistic: f64,
    pub ks_pvalue: f64,
    pub mean_cycles: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pd1Report {
    #[serde(skip)]
    pub rows: Vec<Pd1Row>,
    pub reference_mean: f64,
    pub reference_se: f64,
    pub reference_samples: u64,
    /// `abs_diff` non-increasing along the rows.
    pub trend_nonincreasing: bool,
}
report!(Pd1Report, Pd1Row);

/// Largest parts of `samples` stick-breaking draws, from chunked streams.
pub fn pd1_reference(samples: u64, seed: u64) -> Result<Vec<f64>> {
    Ok(chunked(samples, |c, count| {
        let mut rng = derive_stream(seed, &format!("pd1/reference/chunk/{c}"));
        (0..count)
            .map(|_| pd1_sample(&mut rng as &mut dyn RngCore, DEFAULT_TAIL_EPS).map(|s| s.largest()))
            .collect::<Result<Vec<f64>>>()
    })?
    .concat())
}

pub fn pd1_row(ens: &[EnsembleSample], reference: &[f64], cprime: f64, a: f64) -> Result<Pd1Row> {
    let first = ens.first().ok_or_else(|| invalid("samples", "empty ensemble"))?;
    let l1: Vec<f64> = ens.iter().map(|s| s.traversal_structure().first().copied().unwrap_or(0.0)).collect();
    let l1v: Vec<f64> = ens.iter().map(|s| s.structure()[0]).collect();
    let ms = mean_se(&l1);
    let reference_mean = mean_se(reference).mean;
    let ts = two_sample_stats(&l1, reference)?;
    Ok(Pd1Row {
        m: first.m,
        cprime,
        a,
        gamma: first.gamma,
        samples: ens.len() as u64,
        mean_l1: ms.mean,
        se_l1: ms.se,
        mean_l1_vertex: mean_se(&l1v).mean,
        reference_mean,
        abs_diff: (ms.mean - reference_mean).abs(),
        ks_statistic: ts.ks_statistic,
        ks_pvalue: ts.ks_pvalue,
        mean_cycles: ens.iter().map(|s| s.strand_counts.len() as f64).sum::<f64>() / ens.len() as f64,
    })
}

pub fn pd1_report(rows: Vec<Pd1Row>, reference: &[f64]) -> Pd1Report {
    let r = mean_se(reference);
    Pd1Report {
        trend_nonincreasing: rows.windows(2).all(|w| w[1].abs_diff <= w[0].abs_diff),
        reference_mean: r.mean,
        reference_se: r.se,
        reference_samples: reference.len() as u64,
        rows,
    }
}

/// Largest normalized cycle of equilibrium samples against PD(1).
pub fn pd1_convergence(cfg: &ExperimentConfig) -> Result<Pd1Report> {
    let (cprime, a) = (cfg.cprime.unwrap_or(1.0), cfg.a.unwrap_or(1.0 / 3.0));
    let samples = cfg.samples.unwrap_or(200);
    let reference = pd1_reference(cfg.reference_samples.unwrap_or(1_000_000), cfg.seed)?;
    let rows = cfg
        .ms(&[4096])
        .into_iter()
        .map(|m| pd1_row(&ensemble(m, cprime, a, samples, cfg.seed, false)?, &reference, cprime, a))
        .collect::<Result<Vec<_>>>()?;
    Ok(pd1_report(rows, &reference))
}

// ---------------------------------------------------------------- contacts

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactRow {
    pub m: usize,
    pub samples: u64,
    pub mean_traversals: f64,
    pub pairs: usize,
    pub mean: f64,
    pub variance: f64,
    pub cv: f64,
    /// Fraction of pairs with at least one contact.
    pub positive_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactReport {
    #[serde(skip)]
    pub rows: Vec<ContactRow>,
    pub cv_strictly_decreasing: bool,
    /// Mean pair contacts of the last row over the first.
    pub mean_ratio: f64,
    pub m_ratio: f64,
}
report!(ContactReport, ContactRow);

pub fn contact_row(ens: &[EnsembleSample]) -> Result<ContactRow> {
    let first = ens.first().ok_or_else(|| invalid("samples", "empty ensemble"))?;
    let mut all = Vec::new();
    for s in ens {
        all.extend_from_slice(s.pair_counts.as_deref().ok_or_else(|| invalid("samples", "ensemble drawn without contacts"))?);
    }
    let st = crate::cycles::pair_contact_summary(&all);
    Ok(ContactRow {
        m: first.m,
        samples: ens.len() as u64,
        mean_traversals: ens.iter().map(|s| s.traversals as f64).sum::<f64>() / ens.len() as f64,
        pairs: st.pair_count,
        mean: st.mean.unwrap_or(f64::NAN),
        variance: st.variance.unwrap_or(f64::NAN),
        cv: st.cv.unwrap_or(f64::NAN),
        positive_fraction: all.iter().filter(|&&c| c > 0).count() as f64 / all.len().max(1) as f64,
    })
}

pub fn contact_report(rows: Vec<ContactRow>) -> ContactReport {
    let (f, l) = (&rows[0], &rows[rows.len() - 1]);
    ContactReport {
        cv_strictly_decreasing: rows.windows(2).all(|w| w[1].cv < w[0].cv),
        mean_ratio: l.mean / f.mean,
        m_ratio: l.m as f64 / f.m as f64,
        rows,
    }
}

/// Contact counts between pairs of whole traversals across system sizes.
pub fn contact_concentration(cfg: &ExperimentConfig) -> Result<ContactReport> {
    let (cprime, a) = (cfg.cprime.unwrap_or(1.0), cfg.a.unwrap_or(1.0 / 3.0));
    let samples = cfg.samples.unwrap_or(20);
    let rows = cfg
        .ms(&[4096, 8192, 16384])
        .into_iter()
        .map(|m| contact_row(&ensemble(m, cprime, a, samples, cfg.seed, true)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(contact_report(rows))
}

// --------------------------------------------------------------- gap chain

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub i_max: usize,
    pub lambda: f64,
    pub j1: u64,
    pub j2: u64,
    pub reps: u64,
    pub estimate: f64,
    pub stderr: f64,
    /// `estimate * j2 / j1`.
    pub scaled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    #[serde(skip)]
    pub rows: Vec<GapRow>,
    /// Largest `|sum(row) - 1|` over states `1..=i_max + 64` and all cutoffs.
    pub max_row_error: f64,
    /// `max(scaled) / min(scaled)` at the reference cutoff.
    pub bracket_ratio: f64,
    pub reference_i_max: usize,
    /// Largest change between consecutive cutoffs, in standard errors.
    pub max_shift_sigma: f64,
    /// Estimates non-decreasing in `j1` up to 3 standard errors.
    pub monotone: bool,
}
report!(GapReport, GapRow);

/// Probability of reaching `j2` before 1 from each `j1`, at several q-table
/// cutoffs with common random numbers.
pub fn gapchain_hitting(cfg: &ExperimentConfig) -> Result<GapReport> {
    let lambda = match (cfg.lambda, cfg.a) {
        (Some(l), _) => l,
        (None, Some(a)) => activity_from_step(step(a)?).value(),
        (None, None) => 0.25,
    };
    let act = Activity::new(lambda)?;
    let j2 = cfg.j2.unwrap_or(200);
    let j1s = cfg.j1_values.clone().unwrap_or_else(|| vec![2, 5, 10, 20, 50]);
    let cutoffs = cfg.i_max_values.clone().unwrap_or_else(|| vec![32, 64, 128]);
    let reps = cfg.reps.unwrap_or(20_000);
    let mut rows = Vec::new();
    let mut max_row_error: f64 = 0.0;
    for &i_max in &cutoffs {
        let chain = GapChain::from_activity(act, i_max)?;
        for i in 1..=(i_max + 64) as u64 {
            let row = chain.transition_row(i)?;
            max_row_error = max_row_error.max((row.iter().sum::<f64>() - 1.0).abs());
        }
        for &j1 in &j1s {
            let e = hitting_prob_up_streams(&chain, j1, j2, reps, cfg.seed, &format!("gap/lambda/{lambda}/j1/{j1}/j2/{j2}"))?;
            rows.push(GapRow {
                i_max,
                lambda,
                j1,
                j2,
                reps,
                estimate: e.estimate,
                stderr: e.stderr,
                scaled: e.estimate * j2 as f64 / j1 as f64,
            });
        }
    }
    let reference_i_max = if cutoffs.contains(&DEFAULT_I_MAX) { DEFAULT_I_MAX } else { cutoffs[0] };
    let at = |i: usize| rows.iter().filter(move |r| r.i_max == i);
    let scaled: Vec<f64> = at(reference_i_max).map(|r| r.scaled).collect();
    let bracket_ratio = scaled.iter().cloned().fold(0.0, f64::max) / scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut max_shift_sigma: f64 = 0.0;
    for w in cutoffs.windows(2) {
        for (x, y) in at(w[0]).zip(at(w[1])) {
            let se = x.stderr.max(y.stderr);
            let d = (x.estimate - y.estimate).abs();
            max_shift_sigma = max_shift_sigma.max(if se > 0.0 { d / se } else if d.is_zero() { 0.0 } else { f64::INFINITY });
        }
    }
    let mut sorted: Vec<&GapRow> = at(reference_i_max).collect();
    sorted.sort_by_key(|r| r.j1);
    let monotone = sorted.windows(2).all(|w| w[1].estimate >= w[0].estimate - 3.0 * (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt());
    Ok(GapReport {
        max_row_error,
        bracket_ratio,
        reference_i_max,
        max_shift_sigma,
        monotone,
        rows,
    })
}

// --------------------------------------------------------------- separation

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationRow {
    pub sample_id: u64,
    pub holds: bool,
    pub min_gap: usize,
    pub max_gap: usize,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    #[serde(skip)]
    pub rows: Vec<SeparationRow>,
    pub m: usize,
    pub d: f64,
    pub holds_frequency: f64,
}
report!(SeparationReport, SeparationRow);

/// Frequency of the consecutive-strand separation event on equilibrium
/// samples.
pub fn strand_separation(cfg: &ExperimentConfig) -> Result<SeparationReport> {
    let m = cfg.m.unwrap_or(4096);
    let dims = make_dims(m, cfg.cprime.unwrap_or(1.0))?;
    let d = cfg.d.unwrap_or(0.1);
    let samples = cfg.samples.unwrap_or(20);
    let sampler = EquilibriumSampler::new(dims, step(cfg.a.unwrap_or(1.0 / 3.0))?)?;
    let rows: Vec<SeparationRow> = (0..samples)
        .map(|s| {
            let field = sampler.sample_streams(cfg.seed, &format!("separation/m/{m}/s/{s}"));
            let r = check_separation_event(&field, d);
            SeparationRow {
                sample_id: s,
                holds: r.holds,
                min_gap: r.min_gap,
                max_gap: r.max_gap,
                lower: r.lower,
                upper: r.upper,
            }
        })
        .collect();
    Ok(SeparationReport {
        m,
        d,
        holds_frequency: rows.iter().filter(|r| r.holds).count() as f64 / rows.len() as f64,
        rows,
    })
}
