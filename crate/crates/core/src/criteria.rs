//! Scoring of candidate subsets.
//!
//! Three criterion families are supported: the minimal p-value criterion
//! (smaller is better), the maximal p-value criterion (larger is better),
//! and penalized log-likelihood (larger is better; AIC and BIC are the
//! classical penalties). All p-value work happens on the log scale since
//! selection tails underflow doubles once n reaches a few hundred.

use crate::error::{Error, Result};
use crate::regcore::{fit_ols, partial_determination_from_rss, Dataset, SubsetIndex};
use crate::specfun::{log_beta_upper_tail, BetaParams};

/// Which way a criterion orders candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Min,
    Max,
}

/// Criterion family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriterionKind {
    /// Minimize e^{p_j a_n} · p(R_{0j}).
    MpvMin,
    /// Maximize e^{−p_j a_n} · p(R_{jf}).
    MpvMax,
    /// Maximize −n·ln(RSS/n) − p_j·C_n.
    PenalizedLl,
}

/// Maps the sample size to the penalty constant (a_n or C_n).
#[derive(Debug, Clone, PartialEq)]
pub enum PenaltyRule {
    Constant(f64),
    /// a_n = ln(n)/2, the calibrated scaling.
    HalfLogN,
    /// C_n = ln(n), the BIC penalty.
    LogN,
    /// Explicit per-n table; lookups outside the table are an error.
    Table(Vec<(usize, f64)>),
}

impl PenaltyRule {
    pub fn evaluate(&self, n: usize) -> Result<f64> {
        match self {
            PenaltyRule::Constant(c) => Ok(*c),
            PenaltyRule::HalfLogN => Ok((n as f64).ln() / 2.0),
            PenaltyRule::LogN => Ok((n as f64).ln()),
            PenaltyRule::Table(entries) => entries
                .iter()
                .find(|(k, _)| *k == n)
                .map(|(_, v)| *v)
                .ok_or_else(|| Error::Config(format!("penalty table has no entry for n={n}"))),
        }
    }
}

/// A criterion plus its penalty schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionSpec {
    kind: CriterionKind,
    rule: PenaltyRule,
}

impl CriterionSpec {
    pub fn new(kind: CriterionKind, rule: PenaltyRule) -> Result<Self> {
        let check = |v: f64, n: usize| -> Result<()> {
            match kind {
                CriterionKind::MpvMin | CriterionKind::MpvMax if v < 0.0 => Err(Error::Config(
                    format!("a_n must be nonnegative, got {v} at n={n}"),
                )),
                CriterionKind::PenalizedLl if v <= 0.0 => {
                    Err(Error::Config(format!("C_n must be positive, got {v} at n={n}")))
                }
                _ => Ok(()),
            }
        };
        match &rule {
            PenaltyRule::Constant(c) => check(*c, 0)?,
            PenaltyRule::Table(entries) => {
                for (n, v) in entries {
                    check(*v, *n)?;
                }
            }
            PenaltyRule::HalfLogN | PenaltyRule::LogN => {}
        }
        Ok(Self { kind, rule })
    }

    /// mPVC with a_n = 0.
    pub fn mpvc() -> Self {
        Self { kind: CriterionKind::MpvMin, rule: PenaltyRule::Constant(0.0) }
    }

    /// mPVC with the calibrated a_n = ln(n)/2.
    pub fn mpvc_cal() -> Self {
        Self { kind: CriterionKind::MpvMin, rule: PenaltyRule::HalfLogN }
    }

    /// MPVC with the calibrated a_n = ln(n)/2.
    pub fn mpvc_max_cal() -> Self {
        Self { kind: CriterionKind::MpvMax, rule: PenaltyRule::HalfLogN }
    }

    pub fn aic() -> Self {
        Self { kind: CriterionKind::PenalizedLl, rule: PenaltyRule::Constant(2.0) }
    }

    pub fn bic() -> Self {
        Self { kind: CriterionKind::PenalizedLl, rule: PenaltyRule::LogN }
    }

    /// Parses a criterion name: `mpvc`, `mpvccal`, `mpvc-max-cal`, `aic`,
    /// `bic`, or the parameterized forms `mpvc:a=<c>` and `pll:c=<c>`.
    pub fn parse(name: &str) -> Result<Self> {
        let name = name.trim();
        match name {
            "mpvc" => return Ok(Self::mpvc()),
            "mpvccal" => return Ok(Self::mpvc_cal()),
            "mpvc-max-cal" => return Ok(Self::mpvc_max_cal()),
            "aic" => return Ok(Self::aic()),
            "bic" => return Ok(Self::bic()),
            _ => {}
        }
        if let Some(rest) = name.strip_prefix("mpvc:a=") {
            let a: f64 = rest
                .parse()
                .map_err(|_| Error::Config(format!("bad a_n value in '{name}'")))?;
            return Self::new(CriterionKind::MpvMin, PenaltyRule::Constant(a));
        }
        if let Some(rest) = name.strip_prefix("pll:c=") {
            let c: f64 = rest
                .parse()
                .map_err(|_| Error::Config(format!("bad C_n value in '{name}'")))?;
            return Self::new(CriterionKind::PenalizedLl, PenaltyRule::Constant(c));
        }
        Err(Error::Config(format!(
            "unknown criterion '{name}' (expected mpvc, mpvccal, mpvc-max-cal, aic, bic, mpvc:a=<c>, pll:c=<c>)"
        )))
    }

    /// Canonical display name.
    pub fn name(&self) -> String {
        match (&self.kind, &self.rule) {
            (CriterionKind::MpvMin, PenaltyRule::Constant(c)) if *c == 0.0 => "mpvc".into(),
            (CriterionKind::MpvMin, PenaltyRule::HalfLogN) => "mpvccal".into(),
            (CriterionKind::MpvMax, PenaltyRule::HalfLogN) => "mpvc-max-cal".into(),
            (CriterionKind::PenalizedLl, PenaltyRule::Constant(c)) if *c == 2.0 => "aic".into(),
            (CriterionKind::PenalizedLl, PenaltyRule::LogN) => "bic".into(),
            (CriterionKind::MpvMin, PenaltyRule::Constant(c)) => format!("mpvc:a={c}"),
            (CriterionKind::MpvMax, PenaltyRule::Constant(c)) => format!("mpvc-max:a={c}"),
            (CriterionKind::PenalizedLl, PenaltyRule::Constant(c)) => format!("pll:c={c}"),
            (kind, rule) => format!("{kind:?}:{rule:?}"),
        }
    }

    pub fn kind(&self) -> CriterionKind {
        self.kind
    }

    pub fn penalty(&self, n: usize) -> Result<f64> {
        self.rule.evaluate(n)
    }

    pub fn direction(&self) -> Direction {
        match self.kind {
            CriterionKind::MpvMin => Direction::Min,
            CriterionKind::MpvMax | CriterionKind::PenalizedLl => Direction::Max,
        }
    }
}

/// A candidate subset with its log-scale score.
#[derive(Debug, Clone)]
pub struct ScoredModel {
    pub subset: SubsetIndex,
    pub log_score: f64,
    pub cardinality: usize,
}

impl ScoredModel {
    pub fn new(subset: SubsetIndex, log_score: f64) -> Self {
        let cardinality = subset.cardinality();
        Self { subset, log_score, cardinality }
    }
}

fn beta_shapes(num: f64, den: f64) -> Result<BetaParams> {
    BetaParams::new(num / 2.0, den / 2.0)
}

/// Minimal p-value log score from residual sums of squares.
///
/// For the empty model the boundary convention p(R|0,0) = e^{a_n}/√n gives
/// a_n − ln(n)/2; otherwise p_j·a_n + ln P[B_{p_j/2,(n−p_j)/2} > R_{0j}].
/// Smaller is better.
pub fn log_score_mpvc_from_rss(
    n: usize,
    p_j: usize,
    rss_empty: f64,
    rss_j: f64,
    a_n: f64,
) -> Result<f64> {
    if p_j == 0 {
        return Ok(a_n - 0.5 * (n as f64).ln());
    }
    if p_j >= n {
        return Err(Error::Config(format!("model size {p_j} must be below n={n}")));
    }
    if rss_empty <= 0.0 {
        return Err(Error::DegenerateFit(
            "response has zero norm; the empty-model RSS must be positive".into(),
        ));
    }
    let r = partial_determination_from_rss(rss_empty, rss_j)?;
    let shapes = beta_shapes(p_j as f64, (n - p_j) as f64)?;
    Ok(p_j as f64 * a_n + log_beta_upper_tail(shapes, r)?)
}

/// Maximal p-value log score from residual sums of squares.
///
/// For the full model the boundary convention p(R|M,M) = 1 gives −M·a_n;
/// otherwise −p_j·a_n + ln P[B_{(M−p_j)/2,(n−M)/2} > R_{jf}]. Larger is
/// better.
pub fn log_score_mpvc_max_from_rss(
    n: usize,
    m: usize,
    p_j: usize,
    rss_j: f64,
    rss_full: f64,
    a_n: f64,
) -> Result<f64> {
    if p_j > m || m >= n {
        return Err(Error::Config(format!(
            "need p_j <= M < n, got p_j={p_j}, M={m}, n={n}"
        )));
    }
    if p_j == m {
        return Ok(-(m as f64) * a_n);
    }
    if rss_j <= 0.0 {
        // A perfect submodel fit: the full model cannot improve on it, the
        // p-value term is ln 1 = 0, and only the complexity penalty remains
        // (so the smallest perfect subset wins).
        return Ok(-(p_j as f64) * a_n);
    }
    let r = partial_determination_from_rss(rss_j, rss_full)?;
    let shapes = beta_shapes((m - p_j) as f64, (n - m) as f64)?;
    Ok(-(p_j as f64) * a_n + log_beta_upper_tail(shapes, r)?)
}

/// Penalized log-likelihood score −n·ln(RSS/n) − p_j·C_n. Larger is better;
/// a perfect fit returns +∞, which outranks every finite score and falls
/// through to the cardinality tie rule.
pub fn log_score_penalized_from_rss(n: usize, p_j: usize, rss_j: f64, c_n: f64) -> Result<f64> {
    if p_j >= n {
        return Err(Error::Config(format!("model size {p_j} must be below n={n}")));
    }
    if rss_j < 0.0 {
        return Err(Error::Domain(format!("negative RSS {rss_j}")));
    }
    if rss_j == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-(n as f64) * (rss_j / n as f64).ln() - p_j as f64 * c_n)
}

/// Minimal p-value criterion score of one subset on a dataset.
pub fn log_score_mpvc(d: &Dataset, j: &SubsetIndex, a_n: f64) -> Result<f64> {
    let rss_empty = fit_ols(d, &SubsetIndex::empty())?.rss;
    let rss_j = if j.is_empty() { rss_empty } else { fit_ols(d, j)?.rss };
    log_score_mpvc_from_rss(d.n(), j.cardinality(), rss_empty, rss_j, a_n)
}

/// Maximal p-value criterion score of one subset, with the full model
/// {1, …, m}.
pub fn log_score_mpvc_max(d: &Dataset, j: &SubsetIndex, a_n: f64, m: usize) -> Result<f64> {
    if m > d.m() {
        return Err(Error::Config(format!(
            "full-model size {m} exceeds the dataset's {} regressors",
            d.m()
        )));
    }
    let p_j = j.cardinality();
    if p_j == m {
        return log_score_mpvc_max_from_rss(d.n(), m, p_j, 1.0, 1.0, a_n);
    }
    let rss_full = fit_ols(d, &SubsetIndex::full(m))?.rss;
    let rss_j = fit_ols(d, j)?.rss;
    log_score_mpvc_max_from_rss(d.n(), m, p_j, rss_j, rss_full, a_n)
}

/// Penalized log-likelihood score of one subset on a dataset.
pub fn log_score_penalized(d: &Dataset, j: &SubsetIndex, c_n: f64) -> Result<f64> {
    let rss_j = fit_ols(d, j)?.rss;
    log_score_penalized_from_rss(d.n(), j.cardinality(), rss_j, c_n)
}

/// Scores one subset under `spec`, given the boundary RSS values the
/// criterion needs (empty-model RSS for the minimal criterion, full-model
/// RSS and M for the maximal one).
pub fn log_score_from_rss(
    spec: &CriterionSpec,
    n: usize,
    m: usize,
    p_j: usize,
    rss_j: f64,
    rss_empty: f64,
    rss_full: f64,
) -> Result<f64> {
    let penalty = spec.penalty(n)?;
    match spec.kind {
        CriterionKind::MpvMin => log_score_mpvc_from_rss(n, p_j, rss_empty, rss_j, penalty),
        CriterionKind::MpvMax => log_score_mpvc_max_from_rss(n, m, p_j, rss_j, rss_full, penalty),
        CriterionKind::PenalizedLl => log_score_penalized_from_rss(n, p_j, rss_j, penalty),
    }
}

/// Comparison used for selection: optimize the log score exactly, break
/// ties first by cardinality, then by lexicographically smallest index
/// list. Returns whether `candidate` beats `best`.
fn improves(candidate: &ScoredModel, best: &ScoredModel, direction: Direction) -> bool {
    let score_order = match direction {
        Direction::Min => candidate.log_score.total_cmp(&best.log_score),
        Direction::Max => best.log_score.total_cmp(&candidate.log_score),
    };
    match score_order {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => match candidate.cardinality.cmp(&best.cardinality) {
            std::cmp::Ordering::Less => true,
            std::cmp::Ordering::Greater => false,
            std::cmp::Ordering::Equal => candidate.subset < best.subset,
        },
    }
}

/// Picks the optimizer from a scored candidate list.
pub fn select(scored: &[ScoredModel], direction: Direction) -> Result<SubsetIndex> {
    let mut iter = scored.iter();
    let mut best = iter
        .next()
        .ok_or_else(|| Error::Config("cannot select from an empty candidate list".into()))?;
    for candidate in iter {
        if improves(candidate, best, direction) {
            best = candidate;
        }
    }
    Ok(best.subset.clone())
}
