//! Seeded random generation of designs and responses for the simulation
//! scenarios, plus the stream-derivation rule that keeps replications
//! reproducible under any degree of parallelism.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::linalg::{cholesky, Matrix};
use crate::regcore::SubsetIndex;

/// How the design matrix is produced.
#[derive(Debug, Clone)]
pub enum DesignSpec {
    /// Rows iid N(0, Σ) with Σ_ij = variance·rho^|i−j|.
    GaussAr { m: usize, rho: f64, variance: f64 },
    /// Column k holds the orthonormal Legendre polynomial L_k evaluated at
    /// a Uniform[−1,1] draw per row.
    Legendre { m: usize },
    /// A fixed, user-supplied design.
    Fixed { matrix: Matrix },
}

impl DesignSpec {
    pub fn gauss_ar(m: usize, rho: f64, variance: f64) -> Result<Self> {
        if rho.is_nan() || rho.abs() >= 1.0 {
            return Err(Error::Config(format!("|rho| must be below 1, got {rho}")));
        }
        if variance.is_nan() || variance <= 0.0 {
            return Err(Error::Config(format!("variance must be positive, got {variance}")));
        }
        Ok(DesignSpec::GaussAr { m, rho, variance })
    }

    pub fn m(&self) -> usize {
        match self {
            DesignSpec::GaussAr { m, .. } | DesignSpec::Legendre { m } => *m,
            DesignSpec::Fixed { matrix } => matrix.cols(),
        }
    }

    /// Generates an n×M design from the given stream.
    pub fn generate(&self, n: usize, rng: &mut ChaCha12Rng) -> Result<Matrix> {
        match self {
            DesignSpec::GaussAr { m, rho, variance } => gen_gauss_ar(n, *m, *rho, *variance, rng),
            DesignSpec::Legendre { m } => Ok(gen_legendre(n, *m, rng)),
            DesignSpec::Fixed { matrix } => {
                if matrix.rows() != n {
                    return Err(Error::Config(format!(
                        "fixed design has {} rows but n={n} was requested",
                        matrix.rows()
                    )));
                }
                Ok(matrix.clone())
            }
        }
    }
}

/// The data-generating truth: support, coefficients, and noise variance.
#[derive(Debug, Clone)]
pub struct TrueModel {
    pub support: SubsetIndex,
    pub beta: Vec<f64>,
    pub sigma2: f64,
}

impl TrueModel {
    pub fn new(support: SubsetIndex, beta: Vec<f64>, sigma2: f64) -> Result<Self> {
        if beta.len() != support.cardinality() {
            return Err(Error::Config(format!(
                "{} coefficients given for a support of size {}",
                beta.len(),
                support.cardinality()
            )));
        }
        // Zero is allowed: the noiseless limit puts the response exactly in
        // the span of the true columns.
        if !(sigma2 >= 0.0 && sigma2.is_finite()) {
            return Err(Error::Config(format!("sigma2 must be nonnegative, got {sigma2}")));
        }
        Ok(Self { support, beta, sigma2 })
    }

    /// The conditional mean Xβ at the given design.
    pub fn mean(&self, design: &Matrix) -> Vec<f64> {
        let mut mu = vec![0.0; design.rows()];
        for (pos, &ix) in self.support.indices().iter().enumerate() {
            let col = design.column(ix - 1);
            let b = self.beta[pos];
            for (m, &x) in mu.iter_mut().zip(col) {
                *m += b * x;
            }
        }
        mu
    }
}

/// Master seed plus the derivation rule for independent replication streams.
///
/// Stream keys are hashed with splitmix64 steps into a full 256-bit ChaCha
/// seed, so two replications never share a stream and results cannot depend
/// on scheduling order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedSpec {
    pub master_seed: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    /// Derives the stream for a (domain, n, replication) key.
    pub fn stream(&self, domain: u64, n: u64, rep: u64) -> ChaCha12Rng {
        let mut seed = [0u8; 32];
        let mut state = self
            .master_seed
            .wrapping_add(splitmix64(domain))
            .wrapping_add(splitmix64(n.rotate_left(17)))
            .wrapping_add(splitmix64(rep.rotate_left(41)));
        for chunk in seed.chunks_exact_mut(8) {
            state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
            chunk.copy_from_slice(&splitmix64(state).to_le_bytes());
        }
        ChaCha12Rng::from_seed(seed)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn standard_normal(rng: &mut ChaCha12Rng) -> f64 {
    // Box-Muller; the clamp keeps ln() off exact zero.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Rows iid N(0, Σ) with Σ_ij = variance·rho^|i−j|, realized through the
/// lower-triangular square root of the Toeplitz covariance.
pub fn gen_gauss_ar(n: usize, m: usize, rho: f64, variance: f64, rng: &mut ChaCha12Rng) -> Result<Matrix> {
    let root = ar_covariance_root(m, rho, variance)?;
    let mut design = Matrix::zeros(n, m);
    let mut z = vec![0.0; m];
    for row in 0..n {
        for zi in z.iter_mut() {
            *zi = standard_normal(rng);
        }
        for col in 0..m {
            // Row `col` of the lower-triangular root times z.
            let mut s = 0.0;
            for k in 0..=col {
                s += root.get(col, k) * z[k];
            }
            design.set(row, col, s);
        }
    }
    Ok(design)
}

/// Lower-triangular square root of the AR covariance, shared by the
/// generator and its covariance test.
pub fn ar_covariance_root(m: usize, rho: f64, variance: f64) -> Result<Matrix> {
    let sigma = Matrix::from_fn(m, m, |i, j| {
        variance * rho.powi((i as i32 - j as i32).abs())
    });
    cholesky(&sigma)
}

/// Evaluates the orthonormal Legendre polynomials L_1..L_m at u, where
/// L_k = sqrt(2k+1)·P_k and P_k is the classical Legendre polynomial, so
/// that E[L_j(U)L_k(U)] = δ_jk under the uniform density on [−1,1].
pub fn legendre_row(u: f64, m: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(m);
    let mut p_prev = 1.0; // P_0
    let mut p_curr = u; // P_1
    for k in 1..=m {
        out.push(((2 * k + 1) as f64).sqrt() * p_curr);
        // (k+1) P_{k+1} = (2k+1) u P_k − k P_{k−1}
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * u * p_curr - kf * p_prev) / (kf + 1.0);
        p_prev = p_curr;
        p_curr = p_next;
    }
    out
}

/// Design whose rows are L_1..L_m evaluated at iid Uniform[−1,1] draws.
pub fn gen_legendre(n: usize, m: usize, rng: &mut ChaCha12Rng) -> Matrix {
    let mut design = Matrix::zeros(n, m);
    for row in 0..n {
        let u: f64 = rng.gen_range(-1.0..=1.0);
        for (col, v) in legendre_row(u, m).into_iter().enumerate() {
            design.set(row, col, v);
        }
    }
    design
}

/// Y = Xβ + σ·z with z iid standard normal.
pub fn gen_response(design: &Matrix, truth: &TrueModel, rng: &mut ChaCha12Rng) -> Result<Vec<f64>> {
    if let Some(&last) = truth.support.indices().last() {
        if last > design.cols() {
            return Err(Error::Config(format!(
                "true-model index {last} exceeds the design's {} columns",
                design.cols()
            )));
        }
    }
    let sigma = truth.sigma2.sqrt();
    let mut y = truth.mean(design);
    for v in y.iter_mut() {
        *v += sigma * standard_normal(rng);
    }
    Ok(y)
}
