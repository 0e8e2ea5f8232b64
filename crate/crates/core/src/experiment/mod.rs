//! Monte Carlo experiment runner.
//!
//! Each replication derives its own random stream from the master seed, so
//! results are a pure function of the configuration no matter how many
//! workers execute them. Three metrics are collected per (n, criterion):
//! the probability of selecting exactly the true model, the probability
//! that the greedy order places all true variables first, and the
//! prediction error of the post-selection estimator.

pub mod bootstrap;
pub mod config;
pub mod emit;

use rayon::prelude::*;

use crate::criteria::CriterionSpec;
use crate::datagen::{gen_response, DesignSpec, SeedSpec, TrueModel};
use crate::error::{Error, Result};
use crate::linalg::{norm_sq, Matrix};
use crate::regcore::{fit_ols, Dataset, FitResult, SubsetIndex};
use crate::search::{greedy_order, select_over_family_multi, FamilyKind, ModelFamily};

/// Stream-domain tag for simulation replications.
const DOMAIN_SIM: u64 = 0x51;

/// Full description of one simulation experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub label: String,
    pub design: DesignSpec,
    pub true_model: TrueModel,
    pub n_list: Vec<usize>,
    pub reps: usize,
    pub criteria: Vec<CriterionSpec>,
    pub family: FamilyKind,
    pub seed: SeedSpec,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let m = self.design.m();
        if self.reps == 0 {
            return Err(Error::Config("reps must be at least 1".into()));
        }
        if self.criteria.is_empty() {
            return Err(Error::Config("at least one criterion is required".into()));
        }
        if self.n_list.is_empty() {
            return Err(Error::Config("n_list must not be empty".into()));
        }
        for &n in &self.n_list {
            if n <= m + 1 {
                return Err(Error::Config(format!(
                    "sample size {n} must exceed M+1 = {}",
                    m + 1
                )));
            }
        }
        if let Some(&last) = self.true_model.support.indices().last() {
            if last > m {
                return Err(Error::Config(format!(
                    "true-model index {last} outside 1..={m}"
                )));
            }
        }
        ModelFamily { kind: self.family, order: None }.validate(m)?;
        Ok(())
    }
}

/// Outcome of one replication under one criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationRecord {
    pub label: String,
    pub criterion: String,
    pub n: usize,
    pub rep: usize,
    pub selected: SubsetIndex,
    pub correct: bool,
    pub ordering_correct: bool,
    pub pred_error: f64,
}

/// Aggregated metrics for one (label, criterion, n) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub label: String,
    pub criterion: String,
    pub n: usize,
    pub m: usize,
    pub family: String,
    pub reps: usize,
    pub p_correct: f64,
    pub se_correct: f64,
    pub p_ordering: f64,
    pub mean_pred_error: f64,
    pub mean_pred_error_per_n: f64,
}

/// Records plus their summaries; what the persistence layer writes.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub records: Vec<ReplicationRecord>,
    pub summaries: Vec<SummaryRow>,
}

/// True when every index of `t` precedes every index outside `t` in the
/// given variable order.
pub fn correct_ordering(order: &[usize], t: &SubsetIndex) -> bool {
    let max_true_rank = order
        .iter()
        .enumerate()
        .filter(|(_, ix)| t.contains(**ix))
        .map(|(rank, _)| rank)
        .max();
    match max_true_rank {
        None => true,
        Some(max_t) => {
            let min_spurious = order
                .iter()
                .enumerate()
                .filter(|(_, ix)| !t.contains(**ix))
                .map(|(rank, _)| rank)
                .min();
            match min_spurious {
                None => true,
                Some(min_s) => max_t < min_s,
            }
        }
    }
}

/// ||Xβ − X·β̂(t̂)||² at the replication's design points, with β̂ embedded
/// as a length-M vector that is zero off the selected subset.
pub fn prediction_error(
    design: &Matrix,
    support: &SubsetIndex,
    beta: &[f64],
    fit: &FitResult,
) -> f64 {
    let mut diff = vec![0.0; design.rows()];
    for (pos, &ix) in support.indices().iter().enumerate() {
        let col = design.column(ix - 1);
        let b = beta[pos];
        for (d, &x) in diff.iter_mut().zip(col) {
            *d += b * x;
        }
    }
    for (pos, &ix) in fit.subset.indices().iter().enumerate() {
        let col = design.column(ix - 1);
        let b = fit.coefficients[pos];
        for (d, &x) in diff.iter_mut().zip(col) {
            *d -= b * x;
        }
    }
    norm_sq(&diff)
}

fn replication_records(cfg: &ExperimentConfig, n: usize, rep: usize) -> Result<Vec<ReplicationRecord>> {
    let mut rng = cfg.seed.stream(DOMAIN_SIM, n as u64, rep as u64);
    let design = cfg.design.generate(n, &mut rng)?;
    let response = gen_response(&design, &cfg.true_model, &mut rng)?;
    let d = Dataset::new(design, response)?;

    // The greedy order is computed once per replication and shared by all
    // criteria; the ordering metric uses it regardless of the family.
    let order = greedy_order(&d)?;
    let ordering_correct = correct_ordering(&order, &cfg.true_model.support);

    let family = match cfg.family {
        FamilyKind::AllSubsets => ModelFamily::all_subsets(),
        FamilyKind::Nested => ModelFamily::nested((1..=d.m()).collect()),
        FamilyKind::GreedyNested => ModelFamily { kind: FamilyKind::GreedyNested, order: Some(order) },
    };
    let results = select_over_family_multi(&d, &family, &cfg.criteria)?;

    let mut records = Vec::with_capacity(results.len());
    for result in results {
        let fit = fit_ols(&d, &result.chosen)?;
        let pred_error = prediction_error(
            d.design(),
            &cfg.true_model.support,
            &cfg.true_model.beta,
            &fit,
        );
        records.push(ReplicationRecord {
            label: cfg.label.clone(),
            criterion: result.criterion.name(),
            n,
            rep,
            selected: result.chosen,
            correct: fit.subset == cfg.true_model.support,
            ordering_correct,
            pred_error,
        });
    }
    Ok(records)
}

/// Builds summaries from records in (n_list, criteria) configuration order.
fn summarize(
    label: &str,
    m: usize,
    family: &str,
    reps: usize,
    n_list: &[usize],
    criteria: &[String],
    records: &[ReplicationRecord],
) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    for &n in n_list {
        for criterion in criteria {
            let cell: Vec<&ReplicationRecord> = records
                .iter()
                .filter(|r| r.n == n && &r.criterion == criterion)
                .collect();
            let count = cell.len();
            debug_assert_eq!(count, reps);
            let correct = cell.iter().filter(|r| r.correct).count() as f64;
            let ordering = cell.iter().filter(|r| r.ordering_correct).count() as f64;
            let pred_sum: f64 = cell.iter().map(|r| r.pred_error).sum();
            let nf = count as f64;
            let p_correct = correct / nf;
            rows.push(SummaryRow {
                label: label.to_string(),
                criterion: criterion.clone(),
                n,
                m,
                family: family.to_string(),
                reps: count,
                p_correct,
                se_correct: (p_correct * (1.0 - p_correct) / nf).sqrt(),
                p_ordering: ordering / nf,
                mean_pred_error: pred_sum / nf,
                mean_pred_error_per_n: pred_sum / nf / n as f64,
            });
        }
    }
    rows
}

/// Runs the full experiment. Replications execute in parallel; the output
/// is canonicalized by (n, rep, criterion) so it does not depend on the
/// worker count.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = cfg
        .n_list
        .iter()
        .flat_map(|&n| (0..cfg.reps).map(move |rep| (n, rep)))
        .collect();

    let per_rep: Vec<Result<Vec<ReplicationRecord>>> = jobs
        .par_iter()
        .map(|&(n, rep)| {
            replication_records(cfg, n, rep).map_err(|e| Error::Replication {
                n,
                rep,
                source: Box::new(e),
            })
        })
        .collect();

    let mut records = Vec::with_capacity(jobs.len() * cfg.criteria.len());
    for result in per_rep {
        records.extend(result?);
    }
    records.sort_by(|a, b| {
        a.n.cmp(&b.n)
            .then(a.rep.cmp(&b.rep))
            .then(a.criterion.cmp(&b.criterion))
    });

    let criteria_names: Vec<String> = cfg.criteria.iter().map(|c| c.name()).collect();
    let summaries = summarize(
        &cfg.label,
        cfg.design.m(),
        cfg.family.name(),
        cfg.reps,
        &cfg.n_list,
        &criteria_names,
        &records,
    );
    Ok(ExperimentOutput { records, summaries })
}

/// The standard criteria battery used by the presets.
pub fn standard_criteria() -> Vec<CriterionSpec> {
    vec![
        CriterionSpec::mpvc(),
        CriterionSpec::mpvc_cal(),
        CriterionSpec::mpvc_max_cal(),
        CriterionSpec::aic(),
        CriterionSpec::bic(),
    ]
}

/// Sample sizes of the simulation study.
pub const PRESET_N_LIST: [usize; 6] = [75, 100, 200, 300, 500, 1000];

/// Built-in experiment presets M1–M4 (AR-correlated Gaussian design) and
/// L1 (Legendre design swept over the horizon M). Each returns one or more
/// configurations sharing the given seed and replication count.
pub fn preset(name: &str, seed: u64, reps: usize) -> Result<Vec<ExperimentConfig>> {
    let seed = SeedSpec::new(seed);
    let gauss = |m: usize| DesignSpec::gauss_ar(m, 0.5, 1.0).expect("valid AR spec");
    let base = |label: &str, design: DesignSpec, support: Vec<usize>, beta: Vec<f64>| {
        let m = design.m();
        Ok(ExperimentConfig {
            label: label.to_string(),
            true_model: TrueModel::new(SubsetIndex::new(support, m)?, beta, 1.0)?,
            design,
            n_list: PRESET_N_LIST.to_vec(),
            reps,
            criteria: standard_criteria(),
            family: FamilyKind::GreedyNested,
            seed,
        })
    };
    match name.to_ascii_uppercase().as_str() {
        "M1" => Ok(vec![base("M1", gauss(30), vec![10], vec![0.2])?]),
        "M2" => Ok(vec![base(
            "M2",
            gauss(6),
            vec![1, 2, 5, 6],
            vec![0.9, -0.8, -0.4, 0.2],
        )?]),
        "M3" => Ok(vec![base("M3", gauss(5), vec![2, 4, 5], vec![1.0, 1.0, 1.0])?]),
        "M4" => {
            let support: Vec<usize> = (3..=12).map(|k| 2 * k + 7).collect();
            let beta = vec![1.0; support.len()];
            Ok(vec![base("M4", gauss(60), support, beta)?])
        }
        "L1" => {
            let mut configs = Vec::new();
            for m in [5usize, 10, 15, 20, 25] {
                let mut cfg = base(
                    &format!("L1-M{m}"),
                    DesignSpec::Legendre { m },
                    vec![1, 2, 4],
                    vec![1.0, 1.0, 1.0],
                )?;
                cfg.n_list = vec![300];
                configs.push(cfg);
            }
            Ok(configs)
        }
        other => Err(Error::Config(format!(
            "unknown preset '{other}' (expected M1, M2, M3, M4 or L1)"
        ))),
    }
}
