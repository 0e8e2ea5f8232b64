//! Plain-text experiment configuration files.
//!
//! One `key = value` pair per line, `#` starts a comment. Keys mirror the
//! experiment configuration:
//!
//! ```text
//! label    = demo
//! design   = gauss-ar      # gauss-ar | legendre | fixed
//! m        = 8
//! rho      = 0.5           # gauss-ar only
//! variance = 1.0           # gauss-ar only
//! true     = 2,4           # indices of the true model
//! beta     = 1.0,-0.5      # coefficients, parallel to `true`
//! sigma2   = 1.0
//! n_list   = 75,100,200
//! reps     = 500
//! criteria = mpvc,mpvccal,mpvc-max-cal,aic,bic
//! family   = greedy        # all | nested | greedy
//! seed     = 1
//! ```
//!
//! A fixed (deterministic) design takes its regressor columns from a data
//! file instead of `m`/`rho`/`variance`:
//!
//! ```text
//! design   = fixed
//! data     = design.csv    # regcore file format
//! response = 1             # column excluded from the design
//! ```

use std::collections::HashMap;
use std::path::Path;

use crate::criteria::CriterionSpec;
use crate::datagen::{DesignSpec, SeedSpec, TrueModel};
use crate::error::{Error, Result};
use crate::experiment::ExperimentConfig;
use crate::regcore::SubsetIndex;
use crate::search::FamilyKind;

pub fn parse_family(name: &str) -> Result<FamilyKind> {
    match name.trim() {
        "all" => Ok(FamilyKind::AllSubsets),
        "nested" => Ok(FamilyKind::Nested),
        "greedy" => Ok(FamilyKind::GreedyNested),
        other => Err(Error::Config(format!(
            "unknown family '{other}' (expected all, nested or greedy)"
        ))),
    }
}

fn parse_list<T: std::str::FromStr>(raw: &str, what: &str) -> Result<Vec<T>> {
    raw.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| Error::Config(format!("bad {what} entry '{s}'")))
        })
        .collect()
}

/// Loads an experiment configuration file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    parse_config(&text, path)
}

/// Parses configuration text; `path` is used in error messages only.
pub fn parse_config(text: &str, path: &Path) -> Result<ExperimentConfig> {
    let mut pairs: HashMap<String, String> = HashMap::new();
    for (line_no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: line_no + 1,
            msg: "expected 'key = value'".into(),
        })?;
        pairs.insert(key.trim().to_string(), value.trim().to_string());
    }

    let get = |key: &str| -> Result<&String> {
        pairs
            .get(key)
            .ok_or_else(|| Error::Config(format!("missing '{key}' in config file")))
    };
    let get_or = |key: &str, default: &str| -> String {
        pairs.get(key).cloned().unwrap_or_else(|| default.to_string())
    };

    let design = match get("design")?.as_str() {
        "gauss-ar" => {
            let m: usize = get("m")?
                .parse()
                .map_err(|_| Error::Config("bad 'm' value".into()))?;
            let rho: f64 = get_or("rho", "0.5")
                .parse()
                .map_err(|_| Error::Config("bad 'rho' value".into()))?;
            let variance: f64 = get_or("variance", "1")
                .parse()
                .map_err(|_| Error::Config("bad 'variance' value".into()))?;
            DesignSpec::gauss_ar(m, rho, variance)?
        }
        "legendre" => {
            let m: usize = get("m")?
                .parse()
                .map_err(|_| Error::Config("bad 'm' value".into()))?;
            DesignSpec::Legendre { m }
        }
        "fixed" => {
            let data = get("data")?;
            let selector = crate::regcore::ingest::ResponseSelector::parse(&get_or("response", "1"));
            let loaded = crate::regcore::ingest::load_dataset(Path::new(data), &selector)?;
            DesignSpec::Fixed { matrix: loaded.dataset.design().clone() }
        }
        other => {
            return Err(Error::Config(format!(
                "unknown design '{other}' (expected gauss-ar, legendre or fixed)"
            )))
        }
    };
    let m = design.m();

    let support: Vec<usize> = parse_list(get("true")?, "true-model index")?;
    let beta: Vec<f64> = parse_list(get("beta")?, "beta")?;
    let sigma2: f64 = get_or("sigma2", "1")
        .parse()
        .map_err(|_| Error::Config("bad 'sigma2' value".into()))?;
    let true_model = TrueModel::new(SubsetIndex::new(support, m)?, beta, sigma2)?;

    let n_list: Vec<usize> = parse_list(get("n_list")?, "n_list")?;
    let reps: usize = get("reps")?
        .parse()
        .map_err(|_| Error::Config("bad 'reps' value".into()))?;
    let criteria: Vec<CriterionSpec> = get_or("criteria", "mpvc,mpvccal,mpvc-max-cal,aic,bic")
        .split(',')
        .map(CriterionSpec::parse)
        .collect::<Result<_>>()?;
    let family = parse_family(&get_or("family", "greedy"))?;
    let seed: u64 = get_or("seed", "1")
        .parse()
        .map_err(|_| Error::Config("bad 'seed' value".into()))?;

    let cfg = ExperimentConfig {
        label: get_or("label", "custom"),
        design,
        true_model,
        n_list,
        reps,
        criteria,
        family,
        seed: SeedSpec::new(seed),
    };
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let text = "\
# demo configuration
label    = demo
design   = gauss-ar
m        = 6
rho      = 0.5
variance = 1.0
true     = 1,2
beta     = 0.9,-0.8
sigma2   = 1.0
n_list   = 40,80
reps     = 10
criteria = mpvc,bic
family   = greedy
seed     = 3
";
        let cfg = parse_config(text, Path::new("demo.cfg")).unwrap();
        assert_eq!(cfg.label, "demo");
        assert_eq!(cfg.design.m(), 6);
        assert_eq!(cfg.true_model.support.indices(), &[1, 2]);
        assert_eq!(cfg.n_list, vec![40, 80]);
        assert_eq!(cfg.criteria.len(), 2);
        assert_eq!(cfg.family, FamilyKind::GreedyNested);
        assert_eq!(cfg.seed.master_seed, 3);
    }

    #[test]
    fn defaults_fill_in() {
        let text = "design = legendre\nm = 5\ntrue = 1\nbeta = 1\nn_list = 40\nreps = 2\n";
        let cfg = parse_config(text, Path::new("d.cfg")).unwrap();
        assert_eq!(cfg.label, "custom");
        assert_eq!(cfg.criteria.len(), 5);
        assert_eq!(cfg.true_model.sigma2, 1.0);
    }

    #[test]
    fn fixed_design_loads_from_file() {
        let dir = std::env::temp_dir().join("pvselect_config_fixed");
        std::fs::create_dir_all(&dir).unwrap();
        let data = dir.join("design.csv");
        let mut rows = String::from("y,a,b\n");
        for i in 0..30 {
            let x = i as f64 / 3.0;
            rows.push_str(&format!("{},{},{}\n", x, x.sin(), x.cos()));
        }
        std::fs::write(&data, rows).unwrap();
        let text = format!(
            "design = fixed\ndata = {}\nresponse = y\ntrue = 1\nbeta = 2.0\n\
             n_list = 30\nreps = 3\ncriteria = bic\n",
            data.display()
        );
        let cfg = parse_config(&text, Path::new("fixed.cfg")).unwrap();
        assert_eq!(cfg.design.m(), 2);
        let out = crate::experiment::run_experiment(&cfg).unwrap();
        assert_eq!(out.records.len(), 3);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn missing_keys_are_reported() {
        let text = "design = legendre\nm = 5\n";
        match parse_config(text, Path::new("d.cfg")) {
            Err(Error::Config(msg)) => assert!(msg.contains("true")),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_lines_carry_line_numbers() {
        let text = "design = legendre\nnot a pair\n";
        match parse_config(text, Path::new("d.cfg")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
