//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//!
//! The Monte Carlo reproduction targets (criteria 1 and 7) run the four
//! built-in presets once at N = 500 with master seed 1 and share the output
//! across tests.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use pvselect::criteria::{CriterionKind, CriterionSpec, PenaltyRule};
use pvselect::datagen::{gen_gauss_ar, gen_response, SeedSpec, TrueModel};
use pvselect::experiment::emit::emit_results;
use pvselect::experiment::{preset, run_experiment, ExperimentOutput, SummaryRow};
use pvselect::regcore::{fit_ols, full_model_t_stats, Dataset, SubsetIndex};
use pvselect::search::{
    greedy_order, select_exhaustive_reference, select_over_family, ModelFamily,
};
use pvselect::specfun::checks::{run_specfun_checks, CheckConfig};
use pvselect::specfun::{log_beta_upper_tail, BetaParams};

const MASTER_SEED: u64 = 1;
const REPS: usize = 500;

fn preset_outputs() -> &'static BTreeMap<String, ExperimentOutput> {
    static OUTPUTS: OnceLock<BTreeMap<String, ExperimentOutput>> = OnceLock::new();
    OUTPUTS.get_or_init(|| {
        let mut map = BTreeMap::new();
        for name in ["M1", "M2", "M3", "M4"] {
            let cfg = preset(name, MASTER_SEED, REPS)
                .expect("preset exists")
                .remove(0);
            let out = run_experiment(&cfg).expect("preset run succeeds");
            map.insert(name.to_string(), out);
        }
        map
    })
}

fn summary<'a>(outputs: &'a BTreeMap<String, ExperimentOutput>, model: &str, criterion: &str, n: usize) -> &'a SummaryRow {
    outputs[model]
        .summaries
        .iter()
        .find(|r| r.criterion == criterion && r.n == n)
        .expect("summary cell exists")
}

struct Gate {
    name: &'static str,
    failures: Vec<String>,
    checks: usize,
}

impl Gate {
    fn new(name: &'static str) -> Self {
        Self { name, failures: Vec::new(), checks: 0 }
    }

    fn check(&mut self, ok: bool, detail: String) {
        self.checks += 1;
        if !ok {
            self.failures.push(detail);
        }
    }

    fn finish(self) {
        if self.failures.is_empty() {
            println!("ACCEPTANCE {}: PASS ({} checks)", self.name, self.checks);
        } else {
            println!(
                "ACCEPTANCE {}: FAIL ({}/{} checks failed)",
                self.name,
                self.failures.len(),
                self.checks
            );
            for failure in &self.failures {
                println!("    {failure}");
            }
        }
        assert!(
            self.failures.is_empty(),
            "{}: {} of {} checks failed: {:?}",
            self.name,
            self.failures.len(),
            self.checks,
            self.failures
        );
    }
}

/// Criterion 1: estimated correct-ordering probabilities against the
/// published table, ±0.05 on the anchored cells, ≥0.97 floors elsewhere.
#[test]
fn criterion_1_ordering_probability_reproduction() {
    let outputs = preset_outputs();
    let mut gate = Gate::new("1 (correct-ordering reproduction)");

    let anchors: [(&str, usize, f64); 7] = [
        ("M1", 75, 0.16),
        ("M1", 200, 0.39),
        ("M1", 500, 0.85),
        ("M1", 1000, 0.98),
        ("M2", 75, 0.69),
        ("M2", 200, 0.91),
        ("M2", 1000, 1.0),
    ];
    for (model, n, want) in anchors {
        let got = summary(outputs, model, "bic", n).p_ordering;
        gate.check(
            (got - want).abs() <= 0.05,
            format!("{model} n={n}: p_ordering {got:.3} vs published {want} (tol 0.05)"),
        );
    }
    for model in ["M3", "M4"] {
        for n in [75, 100, 200, 300, 500, 1000] {
            let got = summary(outputs, model, "bic", n).p_ordering;
            gate.check(
                got >= 0.97,
                format!("{model} n={n}: p_ordering {got:.3} below the 0.97 floor"),
            );
        }
    }
    gate.finish();
}

/// Criterion 2: special-function oracle suite (quadrature agreement, tail
/// sandwich on both shape branches, gamma-inequality grid).
#[test]
fn criterion_2_special_function_oracles() {
    let report = run_specfun_checks(&CheckConfig::default());
    let mut gate = Gate::new("2 (special-function oracle suite)");
    for section in &report.sections {
        gate.check(
            section.violations.is_empty(),
            format!(
                "{}: {} violations, first: {}",
                section.name,
                section.violations.len(),
                section
                    .violations
                    .first()
                    .map(|v| v.to_string())
                    .unwrap_or_default()
            ),
        );
    }
    gate.finish();
}

/// Criterion 3: drop-one identity RSS(f−{i})/RSS(f) = T_i²/(n−M) + 1 on 200
/// random Gaussian datasets, to 1e−8 relative.
#[test]
fn criterion_3_drop_one_identity() {
    let seeds = SeedSpec::new(303);
    let mut gate = Gate::new("3 (drop-one identity)");
    for case in 0..200u64 {
        let mut rng = seeds.stream(3, case, 0);
        let n = 30 + (case as usize * 7) % 171; // 30..=200
        let m = 2 + (case as usize * 5) % 14; // 2..=15
        let x = gen_gauss_ar(n, m, 0.5, 1.0, &mut rng).unwrap();
        let support = SubsetIndex::new(vec![1 + (case as usize % m)], m).unwrap();
        let truth = TrueModel::new(support, vec![0.8], 1.0).unwrap();
        let y = gen_response(&x, &truth, &mut rng).unwrap();
        let d = Dataset::new(x, y).unwrap();

        let stats = full_model_t_stats(&d).unwrap();
        let full = SubsetIndex::full(m);
        let rss_f = fit_ols(&d, &full).unwrap().rss;
        let df = (n - m) as f64;
        let mut worst: f64 = 0.0;
        for i in 1..=m {
            let rss_drop = fit_ols(&d, &full.without(i)).unwrap().rss;
            let lhs = rss_drop / rss_f;
            let rhs = stats.values[i - 1] * stats.values[i - 1] / df + 1.0;
            worst = worst.max(((lhs - rhs) / rhs).abs());
        }
        gate.check(
            worst <= 1e-8,
            format!("case {case} (n={n}, M={m}): max relative error {worst:.3e}"),
        );
    }
    gate.finish();
}

fn random_instance(seed_base: u64, case: u64) -> Dataset {
    let seeds = SeedSpec::new(seed_base);
    let mut rng = seeds.stream(4, case, 0);
    let m = 2 + (case as usize * 3) % 9; // 2..=10
    let n = m + 4 + (case as usize * 11) % 50;
    let x = gen_gauss_ar(n, m, 0.5, 1.0, &mut rng).unwrap();
    let support: Vec<usize> = (1..=m).filter(|i| i % 2 == 1).collect();
    let beta: Vec<f64> = support.iter().map(|&i| 0.5 * (i as f64 % 3.0 - 1.0)).collect();
    let truth = TrueModel::new(SubsetIndex::new(support, m).unwrap(), beta, 1.0).unwrap();
    let y = gen_response(&x, &truth, &mut rng).unwrap();
    Dataset::new(x, y).unwrap()
}

/// Criterion 4: stratum-reduced all-subsets selection equals exhaustive
/// scoring of all 2^M subsets, for every criterion configuration.
#[test]
fn criterion_4_brute_force_equivalence() {
    let mut gate = Gate::new("4 (brute-force equivalence)");
    for case in 0..100u64 {
        let d = random_instance(404, case);
        let specs = [
            CriterionSpec::mpvc(),
            CriterionSpec::new(CriterionKind::MpvMin, PenaltyRule::HalfLogN).unwrap(),
            CriterionSpec::mpvc_max_cal(),
            CriterionSpec::aic(),
            CriterionSpec::bic(),
        ];
        for spec in &specs {
            let fast = select_over_family(&d, &ModelFamily::all_subsets(), spec)
                .unwrap()
                .chosen;
            let slow = select_exhaustive_reference(&d, spec).unwrap();
            gate.check(
                fast == slow,
                format!(
                    "case {case} criterion {}: reduced {fast} vs exhaustive {slow}",
                    spec.name()
                ),
            );
        }
    }
    gate.finish();
}

/// Criterion 5: the drop-one p-value ordering equals the |t|-descending
/// ordering exactly.
#[test]
fn criterion_5_greedy_ordering_equivalence() {
    let mut gate = Gate::new("5 (greedy-ordering equivalence)");
    for case in 0..100u64 {
        let d = random_instance(505, case);
        let n = d.n();
        let m = d.m();
        let got = greedy_order(&d).unwrap();

        let full = SubsetIndex::full(m);
        let rss_full = fit_ols(&d, &full).unwrap().rss;
        let shapes = BetaParams::new(0.5, (n - m) as f64 / 2.0).unwrap();
        let pv: Vec<f64> = (1..=m)
            .map(|i| {
                let rss_drop = fit_ols(&d, &full.without(i)).unwrap().rss;
                let r = ((rss_drop - rss_full) / rss_drop).clamp(0.0, 1.0);
                log_beta_upper_tail(shapes, r).unwrap()
            })
            .collect();
        let mut want: Vec<usize> = (1..=m).collect();
        want.sort_by(|&i, &j| pv[i - 1].total_cmp(&pv[j - 1]).then(i.cmp(&j)));
        gate.check(
            got == want,
            format!("case {case}: t-ordering {got:?} vs p-value ordering {want:?}"),
        );
    }
    gate.finish();
}

/// Criterion 6: whenever two criteria select subsets of equal cardinality in
/// the same replication, the subsets coincide.
#[test]
fn criterion_6_cardinality_agreement() {
    let outputs = preset_outputs();
    let mut gate = Gate::new("6 (cardinality agreement)");
    let mut comparisons = 0usize;
    let mut mismatches = Vec::new();
    for (model, out) in outputs.iter() {
        let mut by_rep: BTreeMap<(usize, usize), Vec<&pvselect::experiment::ReplicationRecord>> =
            BTreeMap::new();
        for record in &out.records {
            by_rep.entry((record.n, record.rep)).or_default().push(record);
        }
        for ((n, rep), group) in by_rep {
            for a in 0..group.len() {
                for b in (a + 1)..group.len() {
                    if group[a].selected.cardinality() == group[b].selected.cardinality() {
                        comparisons += 1;
                        if group[a].selected != group[b].selected {
                            mismatches.push(format!(
                                "{model} n={n} rep={rep}: {} chose {} but {} chose {}",
                                group[a].criterion,
                                group[a].selected,
                                group[b].criterion,
                                group[b].selected
                            ));
                        }
                    }
                }
            }
        }
    }
    gate.check(
        mismatches.is_empty(),
        format!(
            "{} mismatches over {comparisons} equal-cardinality comparisons; first: {}",
            mismatches.len(),
            mismatches.first().cloned().unwrap_or_default()
        ),
    );
    assert!(comparisons > 10_000, "expected many comparisons, got {comparisons}");
    gate.finish();
}

/// Criterion 7: consistency direction of the correct-selection probability.
#[test]
fn criterion_7_consistency_direction() {
    let outputs = preset_outputs();
    let mut gate = Gate::new("7 (consistency direction)");
    for model in ["M2", "M3", "M4"] {
        for criterion in ["bic", "mpvccal", "mpvc-max-cal"] {
            let at_75 = summary(outputs, model, criterion, 75).p_correct;
            let at_1000 = summary(outputs, model, criterion, 1000).p_correct;
            gate.check(
                at_1000 > 0.9,
                format!("{model} {criterion}: p_correct(1000) = {at_1000:.3} not above 0.9"),
            );
            gate.check(
                at_1000 >= at_75 - 0.02,
                format!(
                    "{model} {criterion}: p_correct(1000) = {at_1000:.3} below p_correct(75) = {at_75:.3} − 0.02"
                ),
            );
        }
    }
    let aic_1000 = summary(outputs, "M1", "aic", 1000).p_correct;
    for criterion in ["mpvccal", "mpvc-max-cal"] {
        let got = summary(outputs, "M1", criterion, 1000).p_correct;
        gate.check(
            got > aic_1000,
            format!("M1 {criterion}: p_correct(1000) = {got:.3} not above aic's {aic_1000:.3}"),
        );
    }
    gate.finish();
}

/// Criterion 8: reruns with the same master seed and any worker count yield
/// byte-identical output files.
#[test]
fn criterion_8_determinism() {
    let mut gate = Gate::new("8 (determinism)");
    let mut cfg = preset("M3", 99, 60).unwrap().remove(0);
    cfg.n_list = vec![75, 200];

    let dir = std::env::temp_dir().join("pvselect_acceptance_determinism");
    let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let pool4 = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let out1 = pool1.install(|| run_experiment(&cfg)).unwrap();
    let out4 = pool4.install(|| run_experiment(&cfg)).unwrap();

    let files1 = emit_results(&out1, &dir.join("a"), "det").unwrap();
    let files4 = emit_results(&out4, &dir.join("b"), "det").unwrap();
    let sum1 = std::fs::read(&files1.summary).unwrap();
    let sum4 = std::fs::read(&files4.summary).unwrap();
    let rep1 = std::fs::read(&files1.replications).unwrap();
    let rep4 = std::fs::read(&files4.replications).unwrap();
    gate.check(sum1 == sum4, "summary files differ across worker counts".into());
    gate.check(rep1 == rep4, "replication files differ across worker counts".into());

    // Rerun in the same pool layout: still byte-identical.
    let out_again = run_experiment(&cfg).unwrap();
    let files_again = emit_results(&out_again, &dir.join("c"), "det").unwrap();
    let sum_again = std::fs::read(&files_again.summary).unwrap();
    gate.check(sum1 == sum_again, "summary files differ across reruns".into());

    std::fs::remove_dir_all(&dir).ok();
    gate.finish();
}
