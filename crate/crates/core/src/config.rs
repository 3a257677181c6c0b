//! Run configuration: plain `key = value` text, one key per line, `#`
//! starts a comment.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::grid::DomainSpec;
use crate::solver::SolverOptions;
use crate::thresholds::SobolevOptions;
use crate::truncation::{ProblemParams, TruncatedCoefficient};

/// A λ given explicitly or derived as `λ*/4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaChoice {
    Auto,
    Value(f64),
}

impl LambdaChoice {
    pub fn resolve(self, lambda_star: f64) -> f64 {
        match self {
            LambdaChoice::Auto => lambda_star / 4.0,
            LambdaChoice::Value(v) => v,
        }
    }

    fn parse(key: &str, s: &str) -> Result<Self> {
        if s == "auto" {
            Ok(LambdaChoice::Auto)
        } else {
            parse_f64(key, s).map(LambdaChoice::Value)
        }
    }

    fn render(self) -> String {
        match self {
            LambdaChoice::Auto => "auto".into(),
            LambdaChoice::Value(v) => format!("{v:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dim: usize,
    pub q: f64,
    pub r: f64,
    pub delta: f64,
    /// Box side lengths; empty means the unit cube.
    pub lengths: Vec<f64>,
    pub n: usize,
    pub lambda: LambdaChoice,
    pub k: usize,
    pub tol: f64,
    pub rel_tol: f64,
    pub dedup_tol: f64,
    pub max_iter: usize,
    pub samples: usize,
    pub seed: u64,
    pub lambda_max: LambdaChoice,
    pub factor: f64,
    pub steps: usize,
    pub out: PathBuf,
    pub sobolev_starts: usize,
    pub sobolev_max_iter: usize,
    pub sobolev_tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let solver = SolverOptions::default();
        let sobolev = SobolevOptions::default();
        Self {
            dim: 3,
            q: 1.5,
            r: 1.0,
            delta: 1.0,
            lengths: Vec::new(),
            n: 17,
            lambda: LambdaChoice::Auto,
            k: 2,
            tol: solver.tol,
            rel_tol: solver.rel_tol,
            dedup_tol: solver.dedup_tol,
            max_iter: solver.max_iter,
            samples: solver.samples,
            seed: solver.seed,
            lambda_max: LambdaChoice::Auto,
            factor: 0.5,
            steps: 9,
            out: PathBuf::from("out"),
            sobolev_starts: sobolev.random_starts,
            sobolev_max_iter: sobolev.max_iter,
            sobolev_tol: sobolev.tol,
        }
    }
}

fn config_err(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        message: message.into(),
    }
}

fn parse_f64(key: &str, s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|e| config_err(key, format!("`{s}`: {e}")))
}

fn parse_usize(key: &str, s: &str) -> Result<usize> {
    s.parse::<usize>()
        .map_err(|e| config_err(key, format!("`{s}`: {e}")))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Self::default();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err(line, "expected `key = value`"))?;
            c.set(key.trim(), value.trim())?;
        }
        Ok(c)
    }

    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "dim" => self.dim = parse_usize(key, v)?,
            "q" => self.q = parse_f64(key, v)?,
            "r" => self.r = parse_f64(key, v)?,
            "delta" => self.delta = parse_f64(key, v)?,
            "lengths" => {
                self.lengths = if v.is_empty() {
                    Vec::new()
                } else {
                    v.split(',')
                        .map(|t| parse_f64(key, t.trim()))
                        .collect::<Result<_>>()?
                }
            }
            "n" => self.n = parse_usize(key, v)?,
            "lambda" => self.lambda = LambdaChoice::parse(key, v)?,
            "k" => self.k = parse_usize(key, v)?,
            "tol" => self.tol = parse_f64(key, v)?,
            "rel_tol" => self.rel_tol = parse_f64(key, v)?,
            "dedup_tol" => self.dedup_tol = parse_f64(key, v)?,
            "max_iter" => self.max_iter = parse_usize(key, v)?,
            "samples" => self.samples = parse_usize(key, v)?,
            "seed" => {
                self.seed = v
                    .parse()
                    .map_err(|e| config_err(key, format!("`{v}`: {e}")))?
            }
            "lambda_max" => self.lambda_max = LambdaChoice::parse(key, v)?,
            "factor" => self.factor = parse_f64(key, v)?,
            "steps" => self.steps = parse_usize(key, v)?,
            "out" => self.out = PathBuf::from(v),
            "sobolev_starts" => self.sobolev_starts = parse_usize(key, v)?,
            "sobolev_max_iter" => self.sobolev_max_iter = parse_usize(key, v)?,
            "sobolev_tol" => self.sobolev_tol = parse_f64(key, v)?,
            _ => return Err(config_err(key, "unknown key")),
        }
        Ok(())
    }

    /// Text that [`RunConfig::parse`] reads back to an identical value.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let lengths: Vec<String> = self.lengths.iter().map(|l| format!("{l:?}")).collect();
        let _ = writeln!(s, "dim = {}", self.dim);
        let _ = writeln!(s, "q = {:?}", self.q);
        let _ = writeln!(s, "r = {:?}", self.r);
        let _ = writeln!(s, "delta = {:?}", self.delta);
        let _ = writeln!(s, "lengths = {}", lengths.join(","));
        let _ = writeln!(s, "n = {}", self.n);
        let _ = writeln!(s, "lambda = {}", self.lambda.render());
        let _ = writeln!(s, "k = {}", self.k);
        let _ = writeln!(s, "tol = {:?}", self.tol);
        let _ = writeln!(s, "rel_tol = {:?}", self.rel_tol);
        let _ = writeln!(s, "dedup_tol = {:?}", self.dedup_tol);
        let _ = writeln!(s, "max_iter = {}", self.max_iter);
        let _ = writeln!(s, "samples = {}", self.samples);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "lambda_max = {}", self.lambda_max.render());
        let _ = writeln!(s, "factor = {:?}", self.factor);
        let _ = writeln!(s, "steps = {}", self.steps);
        let _ = writeln!(s, "out = {}", self.out.display());
        let _ = writeln!(s, "sobolev_starts = {}", self.sobolev_starts);
        let _ = writeln!(s, "sobolev_max_iter = {}", self.sobolev_max_iter);
        let _ = writeln!(s, "sobolev_tol = {:?}", self.sobolev_tol);
        s
    }

    pub fn domain(&self) -> Result<DomainSpec> {
        let lengths = if self.lengths.is_empty() {
            vec![1.0; self.dim]
        } else {
            self.lengths.clone()
        };
        if lengths.len() != self.dim {
            return Err(config_err(
                "lengths",
                format!("{} lengths given for dim = {}", lengths.len(), self.dim),
            ));
        }
        DomainSpec::new(lengths, self.n).map_err(|e| config_err("n", e.to_string()))
    }

    /// Problem parameters at a given λ.
    pub fn params(&self, lambda: f64) -> Result<ProblemParams> {
        let coeff = TruncatedCoefficient::new(self.r, self.delta, self.dim)
            .map_err(|e| config_err("r", e.to_string()))?;
        ProblemParams::new(self.q, lambda, coeff, self.domain()?)
            .map_err(|e| config_err("q", e.to_string()))
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.tol,
            rel_tol: self.rel_tol,
            max_iter: self.max_iter,
            samples: self.samples,
            seed: self.seed,
            dedup_tol: self.dedup_tol,
        }
    }

    pub fn sobolev_options(&self) -> SobolevOptions {
        SobolevOptions {
            random_starts: self.sobolev_starts,
            max_iter: self.sobolev_max_iter,
            tol: self.sobolev_tol,
            seed: self.seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn defaults_round_trip_and_comments() {
        let c = RunConfig::default();
        assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
        let text = "# header\nn = 9   # coarse\n\nlambda = 0.05\nlengths = 1, 2.5, 0.5\n";
        let c = RunConfig::parse(text).unwrap();
        assert_eq!(c.n, 9);
        assert_eq!(c.lambda, LambdaChoice::Value(0.05));
        assert_eq!(c.lengths, vec![1.0, 2.5, 0.5]);
        assert_eq!(c.domain().unwrap().measure(), 1.25);
    }

    #[test]
    fn errors_name_the_key() {
        for (text, key) in [
            ("bogus = 1", "bogus"),
            ("n = x", "n"),
            ("q 1.5", "q 1.5"),
            ("lengths = 1,2", "lengths"),
        ] {
            let err = RunConfig::parse(text)
                .and_then(|c| c.domain().map(|_| c))
                .unwrap_err();
            match err {
                Error::Config { key: k, .. } => assert_eq!(k, key),
                e => panic!("unexpected {e}"),
            }
        }
        let c = RunConfig::parse("r = 5\ndelta = 5").unwrap();
        assert!(matches!(c.params(0.1), Err(Error::Config { .. })));
    }

    proptest! {
        #[test]
        fn arbitrary_values_round_trip(
            q in 1.01f64..1.99,
            tol in 1e-14f64..1e-2,
            lambda in proptest::option::of(1e-6f64..1.0),
            n in 3usize..64,
            seed in any::<u64>(),
            lengths in proptest::collection::vec(0.01f64..10.0, 0..4),
        ) {
            let c = RunConfig {
                q,
                tol,
                n,
                seed,
                lambda: lambda.map_or(LambdaChoice::Auto, LambdaChoice::Value),
                lengths,
                ..RunConfig::default()
            };
            prop_assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
        }
    }
}
