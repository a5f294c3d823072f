use rpca_core::rng::derive_seed;
use rpca_core::simgen::ExperimentSpec;

use crate::trial::{run_trial, Method, MethodConfigs, TrialRecord};
use crate::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepVariable {
    /// `r / m`; the rank used is `round(value · m)`.
    RankFraction,
    Rho,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Scale {
    Desk,
    /// Reference sizes: n = 10 000 for the sweeps, 400 × 400 for the square benchmark.
    #[value(alias = "paper")]
    Full,
}

impl Scale {
    pub fn default_trials(self) -> usize {
        match self {
            Scale::Desk => 5,
            Scale::Full => 10,
        }
    }
}

/// A grid of planted experiments. Every value of the swept variable is
/// combined with `fixed`; trial `t` at value index `v` uses instance seed
/// `derive_seed(fixed.seed, v, t)` for every method, so all methods see the
/// same matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub fixed: ExperimentSpec,
    pub trials: usize,
    pub methods: Vec<Method>,
    pub configs: MethodConfigs,
}

impl SweepSpec {
    /// Recovery versus rank at 20% corruption.
    pub fn figure1(scale: Scale, trials: usize, seed: u64) -> Self {
        let n = match scale {
            Scale::Desk => 1000,
            Scale::Full => 10_000,
        };
        Self {
            variable: SweepVariable::RankFraction,
            values: (1..=10).map(|k| k as f64 / 20.0).collect(),
            fixed: spec(20, n, 1, 0.2, seed),
            trials,
            methods: vec![Method::Eb, Method::Pcp],
            configs: MethodConfigs::default(),
        }
    }

    /// Recovery versus corruption level at rank 4.
    pub fn figure2(scale: Scale, trials: usize, seed: u64) -> Self {
        let n = match scale {
            Scale::Desk => 1000,
            Scale::Full => 10_000,
        };
        Self {
            variable: SweepVariable::Rho,
            values: (1..=8).map(|k| k as f64 / 10.0).collect(),
            fixed: spec(20, n, 4, 0.1, seed),
            trials,
            methods: vec![Method::Eb, Method::Pcp],
            configs: MethodConfigs::default(),
        }
    }

    /// Square matrix, rank 10% of the side, half the entries corrupted.
    pub fn table1(scale: Scale, trials: usize, seed: u64) -> Self {
        let side = match scale {
            Scale::Desk => 100,
            Scale::Full => 400,
        };
        Self {
            variable: SweepVariable::RankFraction,
            values: vec![0.1],
            fixed: spec(side, side, side / 10, 0.5, seed),
            trials,
            methods: vec![Method::Eb, Method::Pcp],
            configs: MethodConfigs::default(),
        }
    }

    /// Instance parameters for value index `v`, trial `t`.
    pub fn instance(&self, v: usize, t: usize) -> Result<ExperimentSpec> {
        let value = *self
            .values
            .get(v)
            .ok_or_else(|| BenchError::InvalidSweep(format!("value index {v} out of range")))?;
        let mut spec = self.fixed;
        match self.variable {
            SweepVariable::RankFraction => {
                if !(value > 0.0 && value <= 1.0) {
                    return Err(BenchError::InvalidSweep(format!("rank fraction {value} outside (0, 1]")));
                }
                spec.r = ((value * spec.m as f64).round() as usize).max(1);
            }
            SweepVariable::Rho => spec.rho = value,
        }
        spec.seed = derive_seed(self.fixed.seed, v as u64, t as u64);
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(BenchError::InvalidSweep("no values to sweep".into()));
        }
        if self.trials == 0 {
            return Err(BenchError::InvalidSweep("trials must be >= 1".into()));
        }
        if self.methods.is_empty() {
            return Err(BenchError::InvalidSweep("no methods selected".into()));
        }
        self.configs.solver.validate()?;
        self.configs.pcp.validate()?;
        for v in 0..self.values.len() {
            self.instance(v, 0)?;
        }
        Ok(())
    }
}

fn spec(m: usize, n: usize, r: usize, rho: f64, seed: u64) -> ExperimentSpec {
    ExperimentSpec {
        m,
        n,
        r,
        rho,
        amplitude: ExperimentSpec::DEFAULT_AMPLITUDE,
        seed,
    }
}

/// Runs every (method, value, trial) combination sequentially. Records are
/// ordered by method, then value index, then trial index.
pub fn run_sweep(sweep: &SweepSpec) -> Result<Vec<TrialRecord>> {
    sweep.validate()?;
    let mut methods = sweep.methods.clone();
    methods.sort();
    methods.dedup();
    let mut out = Vec::with_capacity(methods.len() * sweep.values.len() * sweep.trials);
    for &method in &methods {
        for v in 0..sweep.values.len() {
            for t in 0..sweep.trials {
                let spec = sweep.instance(v, t)?;
                out.push(run_trial(&spec, method, &sweep.configs));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SweepSpec {
        SweepSpec {
            variable: SweepVariable::Rho,
            values: vec![0.0, 0.1],
            fixed: spec(5, 20, 1, 0.0, 3),
            trials: 2,
            methods: vec![Method::Pcp, Method::Eb],
            configs: MethodConfigs::default(),
        }
    }

    #[test]
    fn ordering_and_shared_seeds() {
        let recs = run_sweep(&small()).unwrap();
        assert_eq!(recs.len(), 8);
        assert!(recs[..4].iter().all(|r| r.method == "eb"));
        assert!(recs[4..].iter().all(|r| r.method == "pcp"));
        for i in 0..4 {
            assert_eq!(recs[i].seed, recs[i + 4].seed);
            assert_eq!(recs[i].rho, recs[i + 4].rho);
        }
        assert_eq!(recs[0].rho, 0.0);
        assert_eq!(recs[2].rho, 0.1);
        assert_ne!(recs[0].seed, recs[1].seed);
    }

    #[test]
    fn rank_fraction_rounds() {
        let s = SweepSpec::figure1(Scale::Desk, 1, 0);
        let ranks: Vec<usize> = (0..10).map(|v| s.instance(v, 0).unwrap().r).collect();
        assert_eq!(ranks, (1..=10).collect::<Vec<_>>());
        let t = SweepSpec::table1(Scale::Full, 1, 0);
        assert_eq!(t.instance(0, 0).unwrap().r, 40);
    }

    #[test]
    fn invalid_sweeps_rejected() {
        let mut s = small();
        s.values.clear();
        assert!(run_sweep(&s).is_err());
        let mut s = small();
        s.values = vec![1.5];
        assert!(run_sweep(&s).is_err());
        let mut s = small();
        s.trials = 0;
        assert!(run_sweep(&s).is_err());
    }
}
