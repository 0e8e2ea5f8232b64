//! Parametric bootstrap harness for a real dataset.
//!
//! The full model is fit once on the supplied data and the two regressors
//! with the smallest p-values become the base truth (their refit
//! coefficients and residual variance). Spurious regressors are then
//! appended in pairs whose independent normal components match the sample
//! mean and variance of the two originals, and each bootstrap replication
//! redraws the response from the base truth before every criterion selects
//! over the greedy family.

use std::path::PathBuf;

use rand::Rng;
use rayon::prelude::*;

use crate::datagen::{gen_response, SeedSpec, TrueModel};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::regcore::ingest::{load_dataset, ResponseSelector};
use crate::regcore::{fit_ols, full_model_t_stats, Dataset, SubsetIndex};
use crate::search::{greedy_order, select_over_family_multi, FamilyKind, ModelFamily};

use super::{
    correct_ordering, prediction_error, standard_criteria, summarize, ExperimentOutput,
    ReplicationRecord,
};

/// Stream-domain tags for the bootstrap.
const DOMAIN_BOOT_DESIGN: u64 = 0xB0;
const DOMAIN_BOOT_REP: u64 = 0xB1;

/// Configuration of a bootstrap run.
#[derive(Debug, Clone)]
pub struct BootstrapConfig {
    pub data_path: PathBuf,
    pub response: ResponseSelector,
    pub reps: usize,
    /// Counts of spurious regressors to append; each must be even.
    pub added_vars: Vec<usize>,
    pub seed: SeedSpec,
    /// Label prefix of the emitted rows; defaults to the file stem.
    pub label: Option<String>,
}

/// The fitted base truth extracted from the real dataset.
#[derive(Debug, Clone)]
pub struct BootstrapBase {
    /// 1-based positions (in the file's regressor order) of the two chosen
    /// predictors.
    pub chosen: [usize; 2],
    pub names: [String; 2],
    pub beta: [f64; 2],
    pub sigma2: f64,
    pub n: usize,
}

fn mean_and_var(col: &[f64]) -> (f64, f64) {
    let n = col.len() as f64;
    let mean = col.iter().sum::<f64>() / n;
    let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Fits the base truth on the real data.
fn fit_base(data: &Dataset, names: &[String]) -> Result<BootstrapBase> {
    let n = data.n();
    let m = data.m();
    if m < 2 {
        return Err(Error::Config(format!(
            "bootstrap needs at least two regressors, found {m}"
        )));
    }
    let stats = full_model_t_stats(data)?;
    if stats.degenerate {
        return Err(Error::DegenerateFit("full model has zero residual variance".into()));
    }
    // Smallest drop-one p-value means largest |t|; ties go to the smaller
    // index.
    let mut by_strength: Vec<usize> = (1..=m).collect();
    by_strength.sort_by(|&i, &j| {
        let ti = stats.values[i - 1] * stats.values[i - 1];
        let tj = stats.values[j - 1] * stats.values[j - 1];
        tj.total_cmp(&ti).then(i.cmp(&j))
    });
    let mut chosen = [by_strength[0], by_strength[1]];
    chosen.sort_unstable();

    let subset = SubsetIndex::new(chosen.to_vec(), m)?;
    let fit = fit_ols(data, &subset)?;
    let sigma2 = fit.rss / (n - 2) as f64;
    Ok(BootstrapBase {
        chosen,
        names: [names[chosen[0] - 1].clone(), names[chosen[1] - 1].clone()],
        beta: [fit.coefficients[0], fit.coefficients[1]],
        sigma2,
        n,
    })
}

/// Augmented design: the two base predictors first, then `added` spurious
/// columns drawn in pairs matching the base predictors' moments.
fn augmented_design(
    data: &Dataset,
    base: &BootstrapBase,
    added: usize,
    seed: &SeedSpec,
) -> Matrix {
    let n = data.n();
    let col1 = data.design().column(base.chosen[0] - 1).to_vec();
    let col2 = data.design().column(base.chosen[1] - 1).to_vec();
    let (mean1, var1) = mean_and_var(&col1);
    let (mean2, var2) = mean_and_var(&col2);
    let (sd1, sd2) = (var1.sqrt(), var2.sqrt());

    let mut rng = seed.stream(DOMAIN_BOOT_DESIGN, added as u64, 0);
    let mut normal = move || -> f64 {
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen::<f64>();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };

    let mut columns = Vec::with_capacity(2 + added);
    columns.push(col1);
    columns.push(col2);
    for _ in 0..added / 2 {
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for _ in 0..n {
            // One two-dimensional draw per observation, independent
            // components matched to the originals.
            a.push(mean1 + sd1 * normal());
            b.push(mean2 + sd2 * normal());
        }
        columns.push(a);
        columns.push(b);
    }
    Matrix::from_columns(n, &columns)
}

/// Runs the bootstrap for every configured number of added variables.
pub fn run_bootstrap(cfg: &BootstrapConfig) -> Result<(BootstrapBase, ExperimentOutput)> {
    if cfg.reps == 0 {
        return Err(Error::Config("reps must be at least 1".into()));
    }
    if cfg.added_vars.is_empty() {
        return Err(Error::Config("added_vars must not be empty".into()));
    }
    for &k in &cfg.added_vars {
        if k == 0 || k % 2 != 0 {
            return Err(Error::Config(format!(
                "added variable counts must be positive and even, got {k}"
            )));
        }
    }

    let loaded = load_dataset(&cfg.data_path, &cfg.response)?;
    let base = fit_base(&loaded.dataset, &loaded.regressor_names)?;
    let n = base.n;
    let max_m = 2 + cfg.added_vars.iter().max().copied().unwrap_or(0);
    if n <= max_m + 1 {
        return Err(Error::Config(format!(
            "n={n} is too small for the largest augmented model M={max_m}"
        )));
    }

    let label_base = cfg.label.clone().unwrap_or_else(|| {
        cfg.data_path
            .file_stem()
            .map(|s| s.to_string_lossy().to_string())
            .unwrap_or_else(|| "bootstrap".into())
    });

    let truth_support = |m: usize| SubsetIndex::new(vec![1, 2], m).expect("valid support");
    let criteria = standard_criteria();
    let criteria_names: Vec<String> = criteria.iter().map(|c| c.name()).collect();

    let mut records = Vec::new();
    let mut summaries = Vec::new();
    for &added in &cfg.added_vars {
        let m = 2 + added;
        let design = augmented_design(&loaded.dataset, &base, added, &cfg.seed);
        let truth = TrueModel::new(truth_support(m), base.beta.to_vec(), base.sigma2)?;
        let label = format!("{label_base}-M{m}");

        let rep_results: Vec<Result<Vec<ReplicationRecord>>> = (0..cfg.reps)
            .into_par_iter()
            .map(|rep| {
                let mut rng = cfg.seed.stream(DOMAIN_BOOT_REP, added as u64, rep as u64);
                let response = gen_response(&design, &truth, &mut rng)?;
                let d = Dataset::new(design.clone(), response)?;
                let order = greedy_order(&d)?;
                let ordering_correct = correct_ordering(&order, &truth.support);
                let family =
                    ModelFamily { kind: FamilyKind::GreedyNested, order: Some(order) };
                let results = select_over_family_multi(&d, &family, &criteria)?;
                let mut out = Vec::with_capacity(results.len());
                for result in results {
                    let fit = fit_ols(&d, &result.chosen)?;
                    let pred_error =
                        prediction_error(d.design(), &truth.support, &truth.beta, &fit);
                    out.push(ReplicationRecord {
                        label: label.clone(),
                        criterion: result.criterion.name(),
                        n,
                        rep,
                        selected: result.chosen,
                        correct: fit.subset == truth.support,
                        ordering_correct,
                        pred_error,
                    });
                }
                Ok(out)
            })
            .map(|r: Result<Vec<ReplicationRecord>>| r)
            .collect();

        let mut k_records = Vec::with_capacity(cfg.reps * criteria.len());
        for (rep, result) in rep_results.into_iter().enumerate() {
            k_records.extend(result.map_err(|e| Error::Replication {
                n,
                rep,
                source: Box::new(e),
            })?);
        }
        k_records.sort_by(|a, b| a.rep.cmp(&b.rep).then(a.criterion.cmp(&b.criterion)));
        summaries.extend(summarize(
            &label,
            m,
            FamilyKind::GreedyNested.name(),
            cfg.reps,
            &[n],
            &criteria_names,
            &k_records,
        ));
        records.extend(k_records);
    }

    Ok((base, ExperimentOutput { records, summaries }))
}
