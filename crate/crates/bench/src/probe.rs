use std::time::{Duration, Instant};

use rpca_core::eb::{eb_iterate, init_state, SolverConfig};
use rpca_core::simgen::{gen_rpca, ExperimentSpec};
use rpca_core::Error;

use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRow {
    pub n: usize,
    pub median: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeTable {
    pub m: usize,
    pub rows: Vec<ProbeRow>,
}

impl ProbeTable {
    /// `ratios()[k]` is the median time at `rows[k + 1]` over the one at `rows[k]`.
    pub fn ratios(&self) -> Vec<f64> {
        self.rows
            .windows(2)
            .map(|w| w[1].median.as_secs_f64() / w[0].median.as_secs_f64())
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,n,median_iter_ms,ratio_to_prev\n");
        for (k, row) in self.rows.iter().enumerate() {
            let ratio = if k == 0 {
                String::new()
            } else {
                format!("{:.4}", self.ratios()[k - 1])
            };
            out.push_str(&format!("{},{},{:.3},{}\n", self.m, row.n, row.median.as_secs_f64() * 1e3, ratio));
        }
        out
    }
}

/// Median wall time of one `eb_iterate` call over `reps` timed calls (after
/// one warm-up call) on a rank-`max(m/5, 1)` instance with 10% corruption.
pub fn time_iteration(m: usize, n: usize, reps: usize, seed: u64) -> Result<Duration> {
    let spec = ExperimentSpec::new(m, n, (m / 5).max(1), 0.1, seed)?;
    let inst = gen_rpca(&spec);
    let mut state = init_state(&inst.y, &SolverConfig::default())?;
    state = eb_iterate(&state, &inst.y)?;
    let mut times = Vec::with_capacity(reps.max(1));
    for _ in 0..reps.max(1) {
        let t = Instant::now();
        state = eb_iterate(&state, &inst.y)?;
        times.push(t.elapsed());
    }
    times.sort();
    Ok(times[times.len() / 2])
}

/// Per-iteration timing at fixed `m` for each `n` in `n_values`.
pub fn scaling_probe(m: usize, n_values: &[usize]) -> Result<ProbeTable> {
    if n_values.len() < 2 || n_values.iter().any(|&n| n < m) {
        return Err(Error::InvalidParameter("need at least two n values, each >= m".into()).into());
    }
    let rows = n_values
        .iter()
        .map(|&n| Ok(ProbeRow { n, median: time_iteration(m, n, 5, 0x5CA1E)? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(ProbeTable { m, rows })
}
