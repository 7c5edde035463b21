//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_FAILURES` are reported but do not fail the
//! target; any other failing criterion exits nonzero.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::fs;
use std::time::Instant;

use dsperm::cycles::decompose;
use dsperm::dynamics::{glauber_kernel, DynState, Observer, UpdateRecord};
use dsperm::experiments::{self, contact_report, contact_row, ensemble, pd1_reference, pd1_report, pd1_row, ExperimentConfig, OutputFormat};
use dsperm::hardcore::{enumerate_columns, ColumnSampler};
use dsperm::permutation::{activity_from_step, EquilibriumSampler};
use dsperm::refmodels::{cycle_type_law, pd1_sample, uniform_cycles, PartitionState, DEFAULT_TAIL_EPS};
use dsperm::stats::{chi_square_gof, mean_se, total_variation};
use dsperm::{derive_stream, make_dims, Activity, StepParam};
use num_traits::ToPrimitive;

const KNOWN_FAILURES: &[u32] = &[5, 6];
const GOLOMB_DICKMAN: f64 = 0.6243;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// At least `base`, and enough that the expected TV of a multinomial sample
/// against its own law (normal approximation per cell) is at most half of
/// `threshold`. Rounded up to a multiple of 10^4.
fn samples_for(probs: &[f64], base: u64, threshold: f64) -> u64 {
    let s: f64 = probs.iter().map(|p| (2.0 * p * (1.0 - p) / PI).sqrt()).sum();
    let need = (s / threshold).powi(2).ceil() as u64;
    base.max(need).div_ceil(10_000) * 10_000
}

fn c1_oracle() -> Outcome {
    let mut max_corr: f64 = 0.0;
    let mut min_lit = f64::INFINITY;
    let mut used = Vec::new();
    for m in 3..=8 {
        for a in [0.25, 1.0 / 3.0] {
            let lambda = activity_from_step(StepParam::new(a).unwrap()).value();
            let probs: Vec<f64> = enumerate_columns(m, &lambda).unwrap().into_iter().map(|(_, p)| p).collect();
            let samples = samples_for(&probs, 100_000, 0.01);
            used.push(samples);
            let mut cfg = ExperimentConfig::new("oracle-equivalence");
            cfg.m = Some(m);
            cfg.a = Some(a);
            cfg.samples = Some(samples);
            cfg.seed = 101;
            for row in experiments::oracle_equivalence(&cfg).unwrap().rows {
                if row.convention == "corrected" {
                    max_corr = max_corr.max(row.tv);
                } else if a > 0.3 {
                    min_lit = min_lit.min(row.tv);
                }
            }
        }
    }
    outcome(
        max_corr < 0.01 && min_lit >= 0.05,
        format!(
            "max TV corrected {max_corr:.4} (< 0.01), min TV literal at a=1/3 {min_lit:.4} (>= 0.05), samples {}..{}",
            used.iter().min().unwrap(),
            used.iter().max().unwrap()
        ),
    )
}

fn c2_hardcore() -> Outcome {
    let mut max_tv: f64 = 0.0;
    let mut min_p: f64 = 1.0;
    let mut max_n = 0;
    for m in 3..=10 {
        for lambda in [0.25, 1.0] {
            let law = enumerate_columns(m, &lambda).unwrap();
            let probs: Vec<f64> = law.iter().map(|(_, p)| *p).collect();
            let index: HashMap<u64, usize> = law.iter().enumerate().map(|(i, (c, _))| (c.mask(), i)).collect();
            let n = samples_for(&probs, 200_000, 0.01);
            max_n = max_n.max(n);
            let sampler = ColumnSampler::new(m, Activity::new(lambda).unwrap()).unwrap();
            let mut rng = derive_stream(102, &format!("hardcore/m/{m}/lambda/{lambda}"));
            let mut counts = vec![0u64; probs.len()];
            for _ in 0..n {
                counts[index[&sampler.sample(&mut rng).mask()]] += 1;
            }
            let emp: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
            max_tv = max_tv.max(total_variation(&emp, &probs));
            min_p = min_p.min(chi_square_gof(&counts, &probs).1);
        }
    }
    outcome(
        max_tv < 0.01 && min_p > 0.001,
        format!("m 3..=10, lambda {{1/4, 1}}: max TV {max_tv:.4} (< 0.01), min chi-square p {min_p:.4} (> 0.001), up to {max_n} samples"),
    )
}

fn load_preset(name: &str) -> ExperimentConfig {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("presets").join(format!("{name}.json"));
    ExperimentConfig::load(&path).unwrap()
}

fn c3_shift() -> Outcome {
    let r = experiments::global_shift_decay(&load_preset("global-shift-decay")).unwrap();
    let probs: Vec<String> = r.rows.iter().map(|x| format!("{}:{:.2e}", x.m, x.prob)).collect();
    outcome(
        r.slope + 3.0 * r.slope_se < 0.0,
        format!("slope of ln P[shift] {:.4} +- {:.4} per unit m; {}", r.slope, r.slope_se, probs.join(" ")),
    )
}

struct StepChecker {
    prev: usize,
    changed: u64,
    bad: u64,
    rechecks: u64,
    mismatches: u64,
    every: u64,
}

impl Observer for StepChecker {
    fn observe(&mut self, rec: &UpdateRecord, state: &DynState) {
        if rec.changed {
            self.changed += 1;
            if rec.cycle_count_after.abs_diff(self.prev) != 1 {
                self.bad += 1;
            }
        } else if rec.cycle_count_after != self.prev {
            self.bad += 1;
        }
        self.prev = rec.cycle_count_after;
        if (rec.step + 1) % self.every == 0 {
            self.rechecks += 1;
            let dec = decompose(state.field());
            if dec.len() != state.cycle_count() || dec.structure() != state.structure() {
                self.mismatches += 1;
            }
        }
    }
}

fn c4_glauber() -> Outcome {
    let mut max_err: f64 = 0.0;
    for m in 3..=8 {
        for lambda in [1.0 / 9.0, 1.0, 2.5] {
            let law: Vec<f64> = enumerate_columns(m, &lambda).unwrap().into_iter().map(|(_, p)| p).collect();
            let (_, k) = glauber_kernel(m, &lambda).unwrap();
            for t in 0..law.len() {
                let v: f64 = (0..law.len()).map(|s| law[s] * k[s][t]).sum();
                max_err = max_err.max((v - law[t]).abs());
            }
        }
    }
    let a_ok = max_err <= 1e-12;

    let p = StepParam::new(1.0 / 3.0).unwrap();
    let dims = make_dims(512, 1.0).unwrap();
    let field = EquilibriumSampler::new(dims, p).unwrap().sample(&mut derive_stream(104, "glauber/field"));
    let mut state = DynState::new(field, activity_from_step(p));
    let mut check = StepChecker { prev: state.cycle_count(), changed: 0, bad: 0, rechecks: 0, mismatches: 0, every: 10_000 };
    let updates = 1_000_000;
    dsperm::dynamics::run_updates(&mut state, updates, &mut derive_stream(104, "glauber/dyn"), &mut [&mut check]);
    let valid = state.field().is_bijective() && !state.field().has_global_shift();
    let b_ok = check.bad == 0 && check.mismatches == 0 && valid && check.changed > 0;

    let r = experiments::glauber_stationarity(&load_preset("glauber-stationarity")).unwrap();
    let c_ok = r.max_abs_z < 3.0;
    let zs: Vec<String> = r.comparisons.iter().map(|c| format!("{} {:+.2}", c.observable, c.z)).collect();
    outcome(
        a_ok && b_ok && c_ok,
        format!(
            "(a) kernel max error {max_err:.1e}; (b) {} of {updates} updates changed, {} count violations, {}/{} full-recount mismatches, final field valid {valid}; (c) {} replicas x {} updates, z: {} (|z| < 3), non-lazy fraction {:.3}",
            check.changed,
            check.bad,
            check.mismatches,
            check.rechecks,
            r.rows.len(),
            r.updates,
            zs.join(", "),
            r.nonlazy_fraction
        ),
    )
}

fn c5_c6_large() -> (Outcome, Outcome) {
    let seed = 105;
    let (cprime, a) = (1.0, 1.0 / 3.0);
    let reference = pd1_reference(1_000_000, seed).unwrap();
    let plan = [(4096, 200), (8192, 100), (16384, 50)];
    let mut pd1_rows = Vec::new();
    let mut contact_rows = Vec::new();
    for (m, samples) in plan {
        let start = Instant::now();
        let ens = ensemble(m, cprime, a, samples, seed, true).unwrap();
        pd1_rows.push(pd1_row(&ens, &reference, cprime, a).unwrap());
        contact_rows.push(contact_row(&ens).unwrap());
        eprintln!("  ensemble m={m}: {samples} samples in {:.0}s", start.elapsed().as_secs_f64());
    }
    let pd = pd1_report(pd1_rows, &reference);
    let ref_ok = (pd.reference_mean - GOLOMB_DICKMAN).abs() <= 0.003;
    let first = &pd.rows[0];
    let pass5 = ref_ok && first.abs_diff < 0.05 && first.ks_pvalue > 0.01 && pd.trend_nonincreasing;
    let trend: Vec<String> = pd
        .rows
        .iter()
        .map(|r| format!("m={} mean {:.4}+-{:.4} |diff| {:.4} KS p {:.3} cycles {:.1}", r.m, r.mean_l1, r.se_l1, r.abs_diff, r.ks_pvalue, r.mean_cycles))
        .collect();
    let o5 = outcome(
        pass5,
        format!(
            "reference {:.4}+-{:.4}; {}; |diff| non-increasing {}",
            pd.reference_mean,
            pd.reference_se,
            trend.join("; "),
            pd.trend_nonincreasing
        ),
    );
    let cr = contact_report(contact_rows);
    let pass6 = cr.cv_strictly_decreasing && (2.0..=8.0).contains(&cr.mean_ratio);
    let rows: Vec<String> = cr
        .rows
        .iter()
        .map(|r| format!("m={} mean {:.1} cv {:.3} positive {:.3}", r.m, r.mean, r.cv, r.positive_fraction))
        .collect();
    let o6 = outcome(
        pass6,
        format!(
            "{}; cv strictly decreasing {}; mean ratio 16384/4096 {:.2} (in [2, 8])",
            rows.join("; "),
            cr.cv_strictly_decreasing,
            cr.mean_ratio
        ),
    );
    (o5, o6)
}

fn c7_gap() -> Outcome {
    let r = experiments::gapchain_hitting(&load_preset("gapchain-hitting")).unwrap();
    let scaled: Vec<String> = r
        .rows
        .iter()
        .filter(|x| x.i_max == r.reference_i_max)
        .map(|x| format!("{}:{:.3}", x.j1, x.scaled))
        .collect();
    outcome(
        r.max_row_error <= 1e-12 && r.bracket_ratio < 10.0 && r.max_shift_sigma < 1.0,
        format!(
            "row error {:.1e}; scaled P*j2/j1 {} ratio {:.2} (< 10); max cutoff shift {:.2} sigma (< 1)",
            r.max_row_error,
            scaled.join(" "),
            r.bracket_ratio,
            r.max_shift_sigma
        ),
    )
}

fn law_vec(n: usize, counts: &BTreeMap<Vec<usize>, u64>, total: u64) -> (Vec<f64>, Vec<f64>) {
    let law = cycle_type_law(n);
    let emp = law.iter().map(|(p, _)| counts.get(p).copied().unwrap_or(0) as f64 / total as f64).collect();
    let ex = law.iter().map(|(_, q)| q.to_f64().unwrap()).collect();
    (emp, ex)
}

fn c8_reference() -> Outcome {
    let mut rng = derive_stream(108, "s3");
    let n3 = 100_000;
    let mut counts = BTreeMap::new();
    for _ in 0..n3 {
        let lens: Vec<usize> = uniform_cycles(3, &mut rng).unwrap().iter().map(|x| (x * 3.0).round() as usize).collect();
        *counts.entry(lens).or_insert(0u64) += 1;
    }
    let (emp, ex) = law_vec(3, &counts, n3);
    let tv3 = total_variation(&emp, &ex);

    let n = 8;
    let steps = 10_000;
    let (_, ex8) = law_vec(n, &BTreeMap::new(), 1);
    let chains = samples_for(&ex8, 10_000, 0.02);
    let mut fixed = BTreeMap::new();
    let mut mixed = BTreeMap::new();
    for c in 0..chains {
        let mut rng = derive_stream(108, &format!("rt/chain/{c}"));
        let mut st = PartitionState::identity(n);
        for _ in 0..steps {
            st.transposition_step(&mut rng).unwrap();
        }
        *fixed.entry(st.cycle_type()).or_insert(0u64) += 1;
        if c % 2 == 1 {
            st.transposition_step(&mut rng).unwrap();
        }
        *mixed.entry(st.cycle_type()).or_insert(0u64) += 1;
    }
    let tv_mixed = total_variation(&law_vec(n, &mixed, chains).0, &ex8);
    let tv_fixed = total_variation(&law_vec(n, &fixed, chains).0, &ex8);

    let mut rng = derive_stream(108, "pd1/stick");
    let stick: Vec<f64> = (0..1_000_000).map(|_| pd1_sample(&mut rng, DEFAULT_TAIL_EPS).unwrap().largest()).collect();
    let mut rng = derive_stream(108, "pd1/uniform");
    let unif: Vec<f64> = (0..1_000_000).map(|_| uniform_cycles(1_000_000, &mut rng).unwrap()[0]).collect();
    let (s, u) = (mean_se(&stick), mean_se(&unif));
    let pd_ok = (s.mean - GOLOMB_DICKMAN).abs() <= 0.003 && (u.mean - GOLOMB_DICKMAN).abs() <= 0.003;
    outcome(
        tv3 < 0.01 && tv_mixed < 0.02 && pd_ok,
        format!(
            "S_3 TV {tv3:.4} (< 0.01); N=8 after {steps}+B steps (B ~ parity coin) over {chains} chains TV {tv_mixed:.4} (< 0.02), fixed {steps} steps TV {tv_fixed:.3} (periodic chain); largest part: stick-breaking {:.4}+-{:.4}, uniform N=1e6 {:.4}+-{:.4}",
            s.mean, s.se, u.mean, u.se
        ),
    )
}

fn repro_configs() -> Vec<ExperimentConfig> {
    let base = |name: &str| {
        let mut c = ExperimentConfig::new(name);
        c.seed = 109;
        c
    };
    let mut v = Vec::new();
    let mut c = base("oracle-equivalence");
    c.m_values = Some(vec![3, 4, 5]);
    c.samples = Some(30_000);
    v.push(c);
    let mut c = base("global-shift-decay");
    c.samples = Some(20_000);
    v.push(c);
    let mut c = base("glauber-stationarity");
    c.m = Some(16);
    c.reps = Some(12);
    v.push(c);
    for name in ["splitmerge-invariant", "pd1-convergence", "strand-separation"] {
        let mut c = base(name);
        c.m = Some(256);
        c.cprime = Some(0.5);
        c.samples = Some(6);
        c.updates = Some(20_000);
        c.reference_samples = Some(50_000);
        v.push(c);
    }
    let mut c = base("contact-concentration");
    c.m_values = Some(vec![256, 512]);
    c.cprime = Some(0.5);
    c.samples = Some(4);
    v.push(c);
    let mut c = base("gapchain-hitting");
    c.reps = Some(3000);
    c.j2 = Some(60);
    c.j1_values = Some(vec![2, 5, 20]);
    v.push(c);
    v
}

fn c9_repro() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut identical = 0;
    let mut failures = Vec::new();
    let configs = repro_configs();
    for (i, base) in configs.iter().enumerate() {
        let mut files = Vec::new();
        for (k, threads) in [1, 1, 4].into_iter().enumerate() {
            let mut c = base.clone();
            c.threads = Some(threads);
            c.format = if i % 2 == 0 { OutputFormat::Csv } else { OutputFormat::Json };
            c.output_dir = Some(dir.path().join(format!("{i}/{k}")));
            let rec = experiments::run(&c).unwrap();
            let bytes = fs::read(c.output_dir.unwrap().join(experiments::result_file_name(c.format))).unwrap();
            files.push((bytes, rec.result.rows, rec.result.summary));
        }
        let bytes_same = files[0].0 == files[1].0;
        let values_same = files[0].1 == files[2].1 && files[0].2 == files[2].2;
        if bytes_same && values_same {
            identical += 1;
        } else {
            failures.push(format!("{} (bytes {bytes_same}, threads {values_same})", base.experiment));
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "{identical}/{} experiments byte-identical on single-threaded re-run and value-identical with 4 threads{}",
            configs.len(),
            if failures.is_empty() { String::new() } else { format!("; failing: {}", failures.join(", ")) }
        ),
    )
}

fn main() {
    let names = [
        "oracle equivalence",
        "hard-core sampler exactness",
        "global-shift decay",
        "Glauber correctness",
        "PD(1) consistency",
        "contact concentration trend",
        "ideal gap chain",
        "reference-model calibration",
        "reproducibility",
    ];
    let mut results: Vec<(u32, Outcome)> = Vec::new();
    let run = |k: u32, f: &dyn Fn() -> Outcome, results: &mut Vec<(u32, Outcome)>| {
        let start = Instant::now();
        let o = f();
        eprintln!("  criterion {k} took {:.0}s", start.elapsed().as_secs_f64());
        results.push((k, o));
    };
    run(1, &c1_oracle, &mut results);
    run(2, &c2_hardcore, &mut results);
    run(3, &c3_shift, &mut results);
    run(4, &c4_glauber, &mut results);
    let start = Instant::now();
    let (o5, o6) = c5_c6_large();
    eprintln!("  criteria 5 and 6 took {:.0}s", start.elapsed().as_secs_f64());
    results.push((5, o5));
    results.push((6, o6));
    run(7, &c7_gap, &mut results);
    run(8, &c8_reference, &mut results);
    run(9, &c9_repro, &mut results);
    results.sort_by_key(|r| r.0);

    let mut unexpected = Vec::new();
    for (k, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let note = if !o.pass && KNOWN_FAILURES.contains(k) { " [known]" } else { "" };
        println!("criterion {k} {tag}{note} {}: {}", names[*k as usize - 1], o.detail);
        if !o.pass && !KNOWN_FAILURES.contains(k) {
            unexpected.push(*k);
        }
    }
    let passed = results.iter().filter(|r| r.1.pass).count();
    println!("{passed}/{} criteria pass", results.len());
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
