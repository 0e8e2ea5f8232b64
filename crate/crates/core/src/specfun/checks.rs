//! Self-check sweeps for the special-function layer.
//!
//! Three sections: the continued fraction against tanh-sinh quadrature, the
//! analytic tail sandwich on random admissible triples, and the gamma
//! inequality grid. The CLI `check-specfun` command runs all of them and the
//! acceptance suite asserts they come back clean.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use super::{tail_sandwich_log_bounds, gamma_inequality_check, log_beta_upper_tail, oracle, reg_inc_beta, BetaParams};

/// Absolute agreement demanded between the CDF and quadrature.
pub const QUADRATURE_ABS_TOL: f64 = 1e-10;
/// Log-scale slack for the sandwich comparisons (covers exact-equality cases).
pub const SANDWICH_LOG_SLACK: f64 = 1e-8;

/// One failed comparison, carrying the offending parameters.
#[derive(Debug, Clone)]
pub struct Violation {
    pub check: &'static str,
    pub params: String,
    pub detail: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {} ({})", self.check, self.params, self.detail)
    }
}

/// Outcome of one sweep section.
#[derive(Debug)]
pub struct SectionReport {
    pub name: &'static str,
    pub cases: usize,
    pub range: String,
    pub violations: Vec<Violation>,
}

/// Outcome of the full self-check run.
#[derive(Debug)]
pub struct CheckReport {
    pub sections: Vec<SectionReport>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.sections.iter().all(|s| s.violations.is_empty())
    }

    pub fn violation_count(&self) -> usize {
        self.sections.iter().map(|s| s.violations.len()).sum()
    }
}

/// Sweep sizes and the fault-injection hook for negative testing.
#[derive(Debug, Clone)]
pub struct CheckConfig {
    pub quadrature_points: usize,
    pub sandwich_triples: usize,
    pub seed: u64,
    /// Test hook: bias the tail values so every sweep must report violations.
    pub inject_fault: bool,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            quadrature_points: 1000,
            sandwich_triples: 1000,
            seed: 0xbe7a_5eed,
            inject_fault: false,
        }
    }
}

/// Runs all three sweeps and collects violations.
pub fn run_specfun_checks(cfg: &CheckConfig) -> CheckReport {
    CheckReport {
        sections: vec![
            quadrature_section(cfg),
            sandwich_section(cfg),
            gamma_inequality_section(cfg),
        ],
    }
}

fn quadrature_section(cfg: &CheckConfig) -> SectionReport {
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let mut violations = Vec::new();
    for _ in 0..cfg.quadrature_points {
        let a = rng.gen_range(0.5..=500.0);
        let b = rng.gen_range(0.5..=500.0);
        let x = rng.gen_range(1e-6..1.0 - 1e-6);
        let p = BetaParams::new(a, b).expect("valid shapes");
        let mut got = match reg_inc_beta(p, x) {
            Ok(v) => v,
            Err(e) => {
                violations.push(Violation {
                    check: "cdf-vs-quadrature",
                    params: format!("a={a}, b={b}, x={x}"),
                    detail: format!("evaluation failed: {e}"),
                });
                continue;
            }
        };
        if cfg.inject_fault {
            got += 5e-9;
        }
        let want = oracle::beta_cdf_quadrature(a, b, x, 1e-12);
        if (got - want).abs() > QUADRATURE_ABS_TOL {
            violations.push(Violation {
                check: "cdf-vs-quadrature",
                params: format!("a={a}, b={b}, x={x}"),
                detail: format!("cdf={got}, quadrature={want}, diff={:e}", (got - want).abs()),
            });
        }
    }
    SectionReport {
        name: "incomplete beta vs quadrature",
        cases: cfg.quadrature_points,
        range: "a,b in [0.5, 500], x in (0, 1)".to_string(),
        violations,
    }
}

fn sandwich_section(cfg: &CheckConfig) -> SectionReport {
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed.wrapping_add(2));
    let mut violations = Vec::new();
    let half = cfg.sandwich_triples / 2;
    for i in 0..cfg.sandwich_triples {
        // First half exercises a >= 1, second half the swapped a < 1 branch.
        let a: f64 = if i < half {
            rng.gen_range(1.0..=30.0)
        } else {
            rng.gen_range(0.5..1.0)
        };
        let b: f64 = rng.gen_range(0.5..=500.0);
        let threshold = ((a - 1.0) / (a + b)).max(0.0);
        let u: f64 = rng.gen_range(1e-3..1.0 - 1e-3);
        let x = threshold + u * (1.0 - threshold);
        let p = BetaParams::new(a, b).expect("valid shapes");
        let (lo, up) = match tail_sandwich_log_bounds(p, x) {
            Ok(pair) => pair,
            Err(e) => {
                violations.push(Violation {
                    check: "tail-sandwich",
                    params: format!("a={a}, b={b}, x={x}"),
                    detail: format!("bounds failed: {e}"),
                });
                continue;
            }
        };
        let mut tail = match log_beta_upper_tail(p, x) {
            Ok(v) => v,
            Err(e) => {
                violations.push(Violation {
                    check: "tail-sandwich",
                    params: format!("a={a}, b={b}, x={x}"),
                    detail: format!("tail failed: {e}"),
                });
                continue;
            }
        };
        if cfg.inject_fault {
            tail = up + 1.0;
        }
        if !(lo - SANDWICH_LOG_SLACK <= tail && tail <= up + SANDWICH_LOG_SLACK) {
            violations.push(Violation {
                check: "tail-sandwich",
                params: format!("a={a}, b={b}, x={x}"),
                detail: format!("log bounds [{lo}, {up}] exclude log tail {tail}"),
            });
        }
    }
    SectionReport {
        name: "analytic tail sandwich",
        cases: cfg.sandwich_triples,
        range: "a in [0.5, 30] both sides of 1, b in [0.5, 500], x admissible".to_string(),
        violations,
    }
}

fn gamma_inequality_section(cfg: &CheckConfig) -> SectionReport {
    let mut violations = Vec::new();
    let mut cases = 0;
    for p_dim in 1..=40usize {
        for n in (p_dim + 1)..=200usize {
            cases += 1;
            let mut holds = gamma_inequality_check(p_dim, n).expect("grid is within the domain");
            if cfg.inject_fault {
                holds = false;
            }
            if !holds {
                violations.push(Violation {
                    check: "gamma-inequality-grid",
                    params: format!("p={p_dim}, n={n}"),
                    detail: "inequality violated".to_string(),
                });
            }
        }
    }
    SectionReport {
        name: "gamma inequality grid",
        cases,
        range: "p in 1..=40, n in p+1..=200".to_string(),
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_sweeps_pass() {
        let cfg = CheckConfig {
            quadrature_points: 60,
            sandwich_triples: 200,
            ..CheckConfig::default()
        };
        let report = run_specfun_checks(&cfg);
        for section in &report.sections {
            assert!(
                section.violations.is_empty(),
                "{}: {:?}",
                section.name,
                section.violations.first()
            );
        }
    }

    #[test]
    fn fault_injection_is_caught() {
        let cfg = CheckConfig {
            quadrature_points: 10,
            sandwich_triples: 10,
            inject_fault: true,
            ..CheckConfig::default()
        };
        let report = run_specfun_checks(&cfg);
        assert!(!report.passed());
        assert!(report.violation_count() >= 10);
        // Violations carry the offending parameters.
        let first = &report.sections[0].violations[0];
        assert!(first.params.contains("a=") && first.params.contains("x="));
    }
}
