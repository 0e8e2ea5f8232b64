//! Model families and their optimization.
//!
//! Exhaustive all-subsets search streams the 2^M candidates and reduces each
//! cardinality stratum to its best-RSS member before scoring, which is valid
//! because every supported criterion is monotone in RSS within a stratum.
//! Nested families (explicit or greedy-ordered) score all M+1 prefixes from
//! a single orthogonal factorization.

use crate::criteria::{log_score_from_rss, select, CriterionSpec, ScoredModel};
use crate::error::{Error, Result};
use crate::linalg::PivotedQr;
use crate::regcore::{fit_ols, full_model_t_stats, Dataset, SubsetIndex};

/// Feasibility cap for exhaustive enumeration.
pub const ALL_SUBSETS_CAP: usize = 25;

/// RSS below this fraction of the empty-model RSS is considered an exact
/// fit. Squared residual norms of perfect fits land at roundoff level
/// (~1e-30 relative), and snapping them to zero keeps log-scale scores of
/// perfect subsets tied so the cardinality rule can resolve them.
pub const RSS_ZERO_REL_TOL: f64 = 1e-20;

fn snap_rss(rss: f64, rss_empty: f64) -> f64 {
    if rss <= RSS_ZERO_REL_TOL * rss_empty {
        0.0
    } else {
        rss
    }
}

/// Search-space layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    AllSubsets,
    Nested,
    GreedyNested,
}

impl FamilyKind {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::AllSubsets => "all",
            FamilyKind::Nested => "nested",
            FamilyKind::GreedyNested => "greedy",
        }
    }
}

/// A family of candidate models over {1, …, M}.
///
/// The empty model is a member of every family; a nested family adds the M
/// prefixes of its order, and the exhaustive family holds all 2^M subsets.
#[derive(Debug, Clone)]
pub struct ModelFamily {
    pub kind: FamilyKind,
    /// Variable order for nested families. Required up front for `Nested`;
    /// computed (and recorded here in results) for `GreedyNested`.
    pub order: Option<Vec<usize>>,
}

impl ModelFamily {
    pub fn all_subsets() -> Self {
        Self { kind: FamilyKind::AllSubsets, order: None }
    }

    pub fn nested(order: Vec<usize>) -> Self {
        Self { kind: FamilyKind::Nested, order: Some(order) }
    }

    pub fn greedy() -> Self {
        Self { kind: FamilyKind::GreedyNested, order: None }
    }

    fn check_order(order: &[usize], m: usize) -> Result<()> {
        let mut seen = order.to_vec();
        seen.sort_unstable();
        if seen.len() != m || seen.iter().enumerate().any(|(i, &v)| v != i + 1) {
            return Err(Error::Config(format!(
                "order must be a permutation of 1..={m}, got {order:?}"
            )));
        }
        Ok(())
    }

    /// Validates the family against the number of regressors.
    pub fn validate(&self, m: usize) -> Result<()> {
        match self.kind {
            FamilyKind::AllSubsets => {
                if m > ALL_SUBSETS_CAP {
                    return Err(Error::Config(format!(
                        "exhaustive search over {m} regressors exceeds the 2^{ALL_SUBSETS_CAP} \
                         feasibility cap; use the greedy family instead"
                    )));
                }
                Ok(())
            }
            FamilyKind::Nested => match &self.order {
                Some(order) => Self::check_order(order, m),
                None => Err(Error::Config("nested family needs an explicit order".into())),
            },
            FamilyKind::GreedyNested => match &self.order {
                Some(order) => Self::check_order(order, m),
                None => Ok(()),
            },
        }
    }
}

/// Streaming iterator over the members of a family, by cardinality then
/// lexicographic order.
pub struct FamilyIter {
    inner: FamilyIterInner,
}

enum FamilyIterInner {
    AllSubsets { m: usize, current: Option<Vec<usize>> },
    List { items: std::vec::IntoIter<SubsetIndex> },
}

impl Iterator for FamilyIter {
    type Item = SubsetIndex;

    fn next(&mut self) -> Option<SubsetIndex> {
        match &mut self.inner {
            FamilyIterInner::List { items } => items.next(),
            FamilyIterInner::AllSubsets { m, current } => {
                let out = current.as_ref()?.clone();
                *current = successor(current.take().unwrap(), *m);
                Some(SubsetIndex::from_sorted_unchecked(out))
            }
        }
    }
}

/// Next combination of {1..m} in (cardinality, lexicographic) order.
fn successor(mut c: Vec<usize>, m: usize) -> Option<Vec<usize>> {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < m - (k - 1 - i) {
            c[i] += 1;
            for j in (i + 1)..k {
                c[j] = c[j - 1] + 1;
            }
            return Some(c);
        }
    }
    // Stratum exhausted; move to cardinality k+1.
    if k < m {
        Some((1..=k + 1).collect())
    } else {
        None
    }
}

/// Enumerates the family members for the given number of regressors.
pub fn build_family(kind: FamilyKind, order: Option<&[usize]>, m: usize) -> Result<FamilyIter> {
    let family = ModelFamily { kind, order: order.map(|o| o.to_vec()) };
    family.validate(m)?;
    let inner = match kind {
        FamilyKind::AllSubsets => FamilyIterInner::AllSubsets { m, current: Some(Vec::new()) },
        FamilyKind::Nested | FamilyKind::GreedyNested => {
            let order = order.ok_or_else(|| {
                Error::Config("nested enumeration needs a variable order".into())
            })?;
            let mut items = Vec::with_capacity(m + 1);
            items.push(SubsetIndex::empty());
            for len in 1..=m {
                let mut prefix = order[..len].to_vec();
                prefix.sort_unstable();
                items.push(SubsetIndex::from_sorted_unchecked(prefix));
            }
            FamilyIterInner::List { items: items.into_iter() }
        }
    };
    Ok(FamilyIter { inner })
}

/// Orders the variables by drop-one p-value, equivalently by squared
/// t-statistic of the full fit, ties broken by ascending index.
pub fn greedy_order(d: &Dataset) -> Result<Vec<usize>> {
    let stats = full_model_t_stats(d)?;
    let t2: Vec<f64> = stats.values.iter().map(|t| t * t).collect();
    let mut order: Vec<usize> = (1..=d.m()).collect();
    order.sort_by(|&i, &j| t2[j - 1].total_cmp(&t2[i - 1]).then(i.cmp(&j)));
    Ok(order)
}

/// Selection outcome over one family.
#[derive(Debug, Clone)]
pub struct SelectionResult {
    pub chosen: SubsetIndex,
    pub criterion: CriterionSpec,
    /// The family searched; for greedy families the computed order is
    /// recorded here.
    pub family: ModelFamily,
    /// The stratum winners that were actually scored.
    pub per_stratum_scores: Option<Vec<ScoredModel>>,
}

/// One best-RSS candidate per cardinality plus the boundary RSS values
/// every criterion needs.
struct StratumData {
    n: usize,
    m: usize,
    /// (subset, rss), exactly one entry per cardinality 0..=m, ascending.
    winners: Vec<(SubsetIndex, f64)>,
}

impl StratumData {
    fn rss_empty(&self) -> f64 {
        self.winners[0].1
    }

    fn rss_full(&self) -> f64 {
        self.winners[self.m].1
    }
}

/// Builds stratum winners by streaming the family.
fn collect_strata(d: &Dataset, kind: FamilyKind, order: Option<&[usize]>) -> Result<StratumData> {
    let n = d.n();
    let m = d.m();
    match kind {
        FamilyKind::AllSubsets => {
            let mut best: Vec<Option<(SubsetIndex, f64)>> = vec![None; m + 1];
            for subset in build_family(kind, None, m)? {
                let rss = fit_ols(d, &subset)?.rss;
                let slot = &mut best[subset.cardinality()];
                // Enumeration is lexicographic within a stratum, so on RSS
                // ties the first (lexicographically smallest) member stays.
                if slot.as_ref().is_none_or(|(_, b)| rss < *b) {
                    *slot = Some((subset, rss));
                }
            }
            let mut winners: Vec<(SubsetIndex, f64)> =
                best.into_iter().map(|w| w.expect("every stratum is populated")).collect();
            let rss_empty = winners[0].1;
            for w in winners.iter_mut() {
                w.1 = snap_rss(w.1, rss_empty);
            }
            Ok(StratumData { n, m, winners })
        }
        FamilyKind::Nested | FamilyKind::GreedyNested => {
            let order = order.ok_or_else(|| {
                Error::Config("nested selection needs a variable order".into())
            })?;
            // One factorization in family order yields every prefix RSS.
            let perm: Vec<usize> = order.iter().map(|&i| i - 1).collect();
            let cols = d.design().select_columns(&perm);
            let qr = PivotedQr::factorize(&cols, d.response(), false);
            if !qr.is_full_rank() {
                return Err(Error::RankDeficient { subset: order.to_vec() });
            }
            let prefix_rss = qr.rss_prefix();
            let rss_empty = prefix_rss[0];
            let mut winners = Vec::with_capacity(m + 1);
            for (len, &rss) in prefix_rss.iter().enumerate() {
                let mut prefix = order[..len].to_vec();
                prefix.sort_unstable();
                winners.push((SubsetIndex::from_sorted_unchecked(prefix), snap_rss(rss, rss_empty)));
            }
            Ok(StratumData { n, m, winners })
        }
    }
}

/// Optimizes several criteria over one family, sharing every fit.
pub fn select_over_family_multi(
    d: &Dataset,
    family: &ModelFamily,
    specs: &[CriterionSpec],
) -> Result<Vec<SelectionResult>> {
    family.validate(d.m())?;
    let resolved_order: Option<Vec<usize>> = match family.kind {
        FamilyKind::AllSubsets => None,
        FamilyKind::Nested => family.order.clone(),
        FamilyKind::GreedyNested => match &family.order {
            Some(o) => Some(o.clone()),
            None => Some(greedy_order(d)?),
        },
    };
    let strata = collect_strata(d, family.kind, resolved_order.as_deref())?;
    let resolved_family = ModelFamily { kind: family.kind, order: resolved_order };

    let mut results = Vec::with_capacity(specs.len());
    for spec in specs {
        let mut scored = Vec::with_capacity(strata.m + 1);
        for (subset, rss) in &strata.winners {
            let log_score = log_score_from_rss(
                spec,
                strata.n,
                strata.m,
                subset.cardinality(),
                *rss,
                strata.rss_empty(),
                strata.rss_full(),
            )?;
            scored.push(ScoredModel::new(subset.clone(), log_score));
        }
        let chosen = select(&scored, spec.direction())?;
        results.push(SelectionResult {
            chosen,
            criterion: spec.clone(),
            family: resolved_family.clone(),
            per_stratum_scores: Some(scored),
        });
    }
    Ok(results)
}

/// Optimizes a single criterion over a family.
pub fn select_over_family(
    d: &Dataset,
    family: &ModelFamily,
    spec: &CriterionSpec,
) -> Result<SelectionResult> {
    Ok(select_over_family_multi(d, family, std::slice::from_ref(spec))?
        .into_iter()
        .next()
        .expect("one result per criterion"))
}

/// Exhaustively scores every subset of the family and selects, with no
/// stratum shortcut. Quadratically slower than `select_over_family`; kept
/// as the reference route for equivalence checks.
pub fn select_exhaustive_reference(
    d: &Dataset,
    spec: &CriterionSpec,
) -> Result<SubsetIndex> {
    let n = d.n();
    let m = d.m();
    let rss_empty = fit_ols(d, &SubsetIndex::empty())?.rss;
    let rss_full = snap_rss(fit_ols(d, &SubsetIndex::full(m))?.rss, rss_empty);
    let mut scored = Vec::new();
    for subset in build_family(FamilyKind::AllSubsets, None, m)? {
        let rss = snap_rss(fit_ols(d, &subset)?.rss, rss_empty);
        let log_score =
            log_score_from_rss(spec, n, m, subset.cardinality(), rss, rss_empty, rss_full)?;
        scored.push(ScoredModel::new(subset, log_score));
    }
    select(&scored, spec.direction())
}
