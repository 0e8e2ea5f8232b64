//! OLS fitting of column subsets and the statistics built on residual sums
//! of squares.
//!
//! Indices are 1-based everywhere a user sees them (files, CLI, reports),
//! matching the convention that model j is a subset of {1, …, M}. The empty
//! subset is the pure-noise model and its RSS is the squared response norm;
//! there is no implicit intercept.

pub mod ingest;

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::linalg::{norm_sq, Matrix, PivotedQr};

/// Value reported when the LRT statistic diverges (perfect nested fit).
pub const LRT_SATURATION: f64 = f64::MAX;

/// A design matrix with its response vector.
#[derive(Debug, Clone)]
pub struct Dataset {
    design: Matrix,
    response: Vec<f64>,
}

impl Dataset {
    pub fn new(design: Matrix, response: Vec<f64>) -> Result<Self> {
        if design.rows() != response.len() {
            return Err(Error::Config(format!(
                "design has {} rows but response has {} entries",
                design.rows(),
                response.len()
            )));
        }
        if response.is_empty() {
            return Err(Error::Config("dataset needs at least one row".into()));
        }
        if !design.all_finite() || response.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("dataset entries must all be finite".into()));
        }
        Ok(Self { design, response })
    }

    pub fn n(&self) -> usize {
        self.response.len()
    }

    /// Number of candidate regressors M.
    pub fn m(&self) -> usize {
        self.design.cols()
    }

    pub fn design(&self) -> &Matrix {
        &self.design
    }

    pub fn response(&self) -> &[f64] {
        self.response.as_slice()
    }
}

/// An ordered set of distinct 1-based column indices denoting one model.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetIndex {
    indices: Vec<usize>,
}

impl SubsetIndex {
    /// The empty model.
    pub fn empty() -> Self {
        Self { indices: Vec::new() }
    }

    /// The full model {1, …, m}.
    pub fn full(m: usize) -> Self {
        Self { indices: (1..=m).collect() }
    }

    /// Validates bounds, distinctness, and sorts.
    pub fn new(mut indices: Vec<usize>, m: usize) -> Result<Self> {
        indices.sort_unstable();
        for pair in indices.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::Config(format!("duplicate index {} in subset", pair[0])));
            }
        }
        if let Some(&first) = indices.first() {
            if first == 0 {
                return Err(Error::Config("subset indices are 1-based".into()));
            }
        }
        if let Some(&last) = indices.last() {
            if last > m {
                return Err(Error::Config(format!(
                    "subset index {last} exceeds the number of regressors {m}"
                )));
            }
        }
        Ok(Self { indices })
    }

    /// Internal constructor for indices already known to be sorted,
    /// distinct and in range.
    pub(crate) fn from_sorted_unchecked(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Self { indices }
    }

    pub fn cardinality(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn zero_based(&self) -> Vec<usize> {
        self.indices.iter().map(|&i| i - 1).collect()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    pub fn is_subset_of(&self, other: &SubsetIndex) -> bool {
        self.indices.iter().all(|i| other.contains(*i))
    }

    /// This subset with one index removed.
    pub fn without(&self, index: usize) -> SubsetIndex {
        SubsetIndex {
            indices: self.indices.iter().copied().filter(|&i| i != index).collect(),
        }
    }
}

impl std::fmt::Display for SubsetIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (i, ix) in self.indices.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{ix}")?;
        }
        write!(f, "}}")
    }
}

/// The outcome of one least-squares fit.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub subset: SubsetIndex,
    pub coefficients: Vec<f64>,
    pub rss: f64,
    pub residual_df: usize,
}

/// Least-squares fit of the columns in `subset`. The empty subset fits
/// nothing and returns the squared response norm as RSS.
pub fn fit_ols(d: &Dataset, subset: &SubsetIndex) -> Result<FitResult> {
    let n = d.n();
    let p = subset.cardinality();
    if p >= n {
        return Err(Error::Config(format!(
            "subset of size {p} cannot be fit with only {n} observations"
        )));
    }
    if let Some(&last) = subset.indices().last() {
        if last > d.m() {
            return Err(Error::Config(format!(
                "subset index {last} exceeds the number of regressors {}",
                d.m()
            )));
        }
    }
    if p == 0 {
        return Ok(FitResult {
            subset: subset.clone(),
            coefficients: Vec::new(),
            rss: norm_sq(d.response()),
            residual_df: n,
        });
    }
    let cols = d.design().select_columns(&subset.zero_based());
    let qr = PivotedQr::factorize(&cols, d.response(), true);
    if !qr.is_full_rank() {
        return Err(Error::RankDeficient { subset: subset.indices().to_vec() });
    }
    Ok(FitResult {
        subset: subset.clone(),
        coefficients: qr.solve(),
        rss: qr.rss(),
        residual_df: n - p,
    })
}

/// Per-run cache of residual sums of squares keyed by subset.
#[derive(Debug, Default)]
pub struct RssMemo {
    map: HashMap<Vec<usize>, f64>,
}

impl RssMemo {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rss(&mut self, d: &Dataset, subset: &SubsetIndex) -> Result<f64> {
        if let Some(&v) = self.map.get(subset.indices()) {
            return Ok(v);
        }
        let v = fit_ols(d, subset)?.rss;
        self.map.insert(subset.indices().to_vec(), v);
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// R_jk from raw residual sums of squares, clamped into [0, 1].
pub fn partial_determination_from_rss(rss_j: f64, rss_k: f64) -> Result<f64> {
    if rss_j <= 0.0 {
        return Err(Error::DegenerateFit(
            "partial determination needs RSS of the nested model to be positive".into(),
        ));
    }
    Ok(((rss_j - rss_k) / rss_j).clamp(0.0, 1.0))
}

/// Coefficient of partial determination R_jk = (RSS(j) − RSS(k)) / RSS(j)
/// for nested models j ⊆ k.
pub fn partial_determination(d: &Dataset, j: &SubsetIndex, k: &SubsetIndex) -> Result<f64> {
    if !j.is_subset_of(k) {
        return Err(Error::Config(format!("{j} is not nested in {k}")));
    }
    let rss_j = fit_ols(d, j)?.rss;
    let rss_k = fit_ols(d, k)?.rss;
    partial_determination_from_rss(rss_j, rss_k)
}

/// Likelihood-ratio statistic between nested fits.
#[derive(Debug, Clone, Copy)]
pub struct LrtStat {
    pub value: f64,
    /// Set when the nested fit is perfect and the log diverges.
    pub saturated: bool,
}

/// D_jk = −n·ln(RSS(k)/RSS(j)) = −n·ln(1 − R_jk).
pub fn lrt_statistic(d: &Dataset, j: &SubsetIndex, k: &SubsetIndex) -> Result<LrtStat> {
    let r = partial_determination(d, j, k)?;
    let n = d.n() as f64;
    if r >= 1.0 {
        return Ok(LrtStat { value: LRT_SATURATION, saturated: true });
    }
    Ok(LrtStat { value: -n * (-r).ln_1p(), saturated: false })
}

/// Full-model t-statistics.
#[derive(Debug, Clone)]
pub struct TStats {
    pub values: Vec<f64>,
    /// Set when the full-model residual variance is zero.
    pub degenerate: bool,
}

/// T_i = β̂_i / (σ̂·sqrt[(XᵀX)⁻¹_{ii}]) with σ̂² = RSS(f)/(n−M).
///
/// Satisfies RSS(f−{i})/RSS(f) = T_i²/(n−M) + 1 for every i.
pub fn full_model_t_stats(d: &Dataset) -> Result<TStats> {
    let n = d.n();
    let m = d.m();
    if m == 0 {
        return Ok(TStats { values: Vec::new(), degenerate: false });
    }
    if m >= n {
        return Err(Error::Config(format!(
            "full model with {m} regressors needs more than {n} observations"
        )));
    }
    let qr = PivotedQr::factorize(d.design(), d.response(), true);
    if !qr.is_full_rank() {
        return Err(Error::RankDeficient { subset: (1..=m).collect() });
    }
    let rss = qr.rss();
    let sigma2 = rss / (n - m) as f64;
    if sigma2 <= 0.0 {
        return Ok(TStats { values: vec![0.0; m], degenerate: true });
    }
    let beta = qr.solve();
    let diag = qr.inverse_gram_diag();
    let sigma = sigma2.sqrt();
    let values = beta
        .iter()
        .zip(&diag)
        .map(|(b, dg)| b / (sigma * dg.sqrt()))
        .collect();
    Ok(TStats { values, degenerate: false })
}

/// Residuals of a fit, for orthogonality checks.
pub fn residuals(d: &Dataset, fit: &FitResult) -> Vec<f64> {
    let mut r = d.response().to_vec();
    for (pos, &col_ix) in fit.subset.indices().iter().enumerate() {
        let col = d.design().column(col_ix - 1);
        let c = fit.coefficients[pos];
        for (ri, &xi) in r.iter_mut().zip(col) {
            *ri -= c * xi;
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dot;

    fn toy_dataset() -> Dataset {
        // Y = (1,2,3,4), single constant column.
        let design = Matrix::from_columns(4, &[vec![1.0, 1.0, 1.0, 1.0]]);
        Dataset::new(design, vec![1.0, 2.0, 3.0, 4.0]).unwrap()
    }

    #[test]
    fn empty_model_rss_is_response_norm() {
        let d = toy_dataset();
        let fit = fit_ols(&d, &SubsetIndex::empty()).unwrap();
        assert_eq!(fit.rss, 30.0);
        assert_eq!(fit.residual_df, 4);
        assert!(fit.coefficients.is_empty());
    }

    #[test]
    fn mean_fit_by_hand() {
        let d = toy_dataset();
        let j = SubsetIndex::new(vec![1], 1).unwrap();
        let fit = fit_ols(&d, &j).unwrap();
        assert!((fit.coefficients[0] - 2.5).abs() < 1e-12);
        assert!((fit.rss - 5.0).abs() < 1e-12);
        assert_eq!(fit.residual_df, 3);
    }

    #[test]
    fn perfect_fit_has_zero_rss() {
        let col = vec![1.0, 2.0, -1.0, 0.5];
        let y: Vec<f64> = col.iter().map(|v| 3.0 * v).collect();
        let d = Dataset::new(Matrix::from_columns(4, &[col]), y).unwrap();
        let fit = fit_ols(&d, &SubsetIndex::new(vec![1], 1).unwrap()).unwrap();
        assert!(fit.rss < 1e-20);
    }

    #[test]
    fn partial_determination_hand_value() {
        let d = toy_dataset();
        let j = SubsetIndex::empty();
        let k = SubsetIndex::new(vec![1], 1).unwrap();
        let r = partial_determination(&d, &j, &k).unwrap();
        assert!((r - 25.0 / 30.0).abs() < 1e-12);
        // j = k gives zero.
        assert_eq!(partial_determination(&d, &k, &k).unwrap(), 0.0);
    }

    #[test]
    fn partial_determination_perfect_nested_fit() {
        let col = vec![1.0, 2.0, -1.0, 0.5];
        let y: Vec<f64> = col.iter().map(|v| 3.0 * v).collect();
        let d = Dataset::new(Matrix::from_columns(4, &[col]), y).unwrap();
        let r = partial_determination(
            &d,
            &SubsetIndex::empty(),
            &SubsetIndex::new(vec![1], 1).unwrap(),
        )
        .unwrap();
        assert_eq!(r, 1.0);
    }

    #[test]
    fn partial_determination_rejects_degenerate_base() {
        let col = vec![1.0, 2.0, -1.0, 0.5];
        let d = Dataset::new(Matrix::from_columns(4, &[col]), vec![0.0; 4]).unwrap();
        let err = partial_determination(
            &d,
            &SubsetIndex::empty(),
            &SubsetIndex::new(vec![1], 1).unwrap(),
        );
        assert!(matches!(err, Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn lrt_statistic_hand_value() {
        let d = toy_dataset();
        let stat = lrt_statistic(&d, &SubsetIndex::empty(), &SubsetIndex::new(vec![1], 1).unwrap())
            .unwrap();
        let want = -4.0 * (5.0f64 / 30.0).ln();
        assert!((stat.value - want).abs() < 1e-10);
        assert!(!stat.saturated);
        assert!((want - 7.16703787691222).abs() < 1e-8);
    }

    #[test]
    fn lrt_statistic_saturates_on_perfect_fit() {
        let col = vec![1.0, 2.0, -1.0, 0.5];
        let y: Vec<f64> = col.iter().map(|v| 3.0 * v).collect();
        let d = Dataset::new(Matrix::from_columns(4, &[col]), y).unwrap();
        let stat = lrt_statistic(&d, &SubsetIndex::empty(), &SubsetIndex::new(vec![1], 1).unwrap())
            .unwrap();
        assert!(stat.saturated);
        assert_eq!(stat.value, LRT_SATURATION);
    }

    #[test]
    fn t_stats_signal_isolation() {
        // Orthonormal-ish columns, response equal to column 3.
        let c1 = vec![1.0, 0.0, 0.0, 0.0, 0.1];
        let c2 = vec![0.0, 1.0, 0.0, 0.0, -0.1];
        let c3 = vec![0.0, 0.0, 1.0, 1.0, 0.2];
        let mut y = c3.clone();
        y[0] += 0.01;
        let d = Dataset::new(Matrix::from_columns(5, &[c1, c2, c3]), y).unwrap();
        let stats = full_model_t_stats(&d).unwrap();
        assert!(!stats.degenerate);
        assert!(
            stats.values[2].abs() > stats.values[0].abs()
                && stats.values[2].abs() > stats.values[1].abs()
        );
    }

    #[test]
    fn t_stats_zero_response_is_degenerate() {
        let d = Dataset::new(
            Matrix::from_columns(4, &[vec![1.0, 2.0, 3.0, 4.0], vec![0.5, -0.5, 1.0, 2.0]]),
            vec![0.0; 4],
        )
        .unwrap();
        let stats = full_model_t_stats(&d).unwrap();
        assert!(stats.degenerate);
        assert!(stats.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn duplicate_columns_are_rank_deficient() {
        let c = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let d = Dataset::new(
            Matrix::from_columns(5, &[c.clone(), c]),
            vec![1.0, 0.0, 2.0, 1.0, 0.0],
        )
        .unwrap();
        let err = fit_ols(&d, &SubsetIndex::new(vec![1, 2], 2).unwrap());
        assert!(matches!(err, Err(Error::RankDeficient { .. })));
        assert!(matches!(full_model_t_stats(&d), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn residuals_orthogonal_to_selected_columns() {
        let c1 = vec![1.0, 1.0, 1.0, 1.0, 1.0, 1.0];
        let c2 = vec![0.3, -1.2, 0.8, 2.0, -0.4, 1.5];
        let y = vec![1.0, 0.2, -0.7, 2.2, 0.0, 1.1];
        let d = Dataset::new(Matrix::from_columns(6, &[c1, c2]), y).unwrap();
        let subset = SubsetIndex::new(vec![1, 2], 2).unwrap();
        let fit = fit_ols(&d, &subset).unwrap();
        let res = residuals(&d, &fit);
        for ix in subset.zero_based() {
            let col = d.design().column(ix);
            let ip = dot(col, &res).abs();
            let bound = 1e-8 * norm_sq(col).sqrt() * norm_sq(&res).sqrt().max(1e-30);
            assert!(ip <= bound.max(1e-12), "inner product {ip}");
        }
    }

    #[test]
    fn memo_avoids_refits() {
        let d = toy_dataset();
        let mut memo = RssMemo::new();
        let j = SubsetIndex::new(vec![1], 1).unwrap();
        let a = memo.rss(&d, &j).unwrap();
        let b = memo.rss(&d, &j).unwrap();
        assert_eq!(a, b);
        assert_eq!(memo.len(), 1);
    }

    #[test]
    fn subset_validation() {
        assert!(SubsetIndex::new(vec![1, 1], 3).is_err());
        assert!(SubsetIndex::new(vec![0], 3).is_err());
        assert!(SubsetIndex::new(vec![4], 3).is_err());
        let s = SubsetIndex::new(vec![3, 1], 3).unwrap();
        assert_eq!(s.indices(), &[1, 3]);
        assert_eq!(SubsetIndex::full(3).indices(), &[1, 2, 3]);
    }
}
