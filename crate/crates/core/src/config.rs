use serde::{Deserialize, Serialize};

/// Strategy used for the counting / cover subroutines.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    /// Uniform pair sampling for threshold counting; quadtree covers for the
    /// two-sided decision.
    #[default]
    Sampling,
    /// Quadtree partition of `B` for both counting and covers.
    Hierarchical,
    /// Star covers (one biclique per stone) for the two-sided decision.
    NaiveCover,
}

/// Constants of the threshold-counting sampler.
///
/// A query draws `c2 * (mn / L) * ln(m + n)` pairs and reports more than `L`
/// in-interval distances when over `c3 * ln(m + n)` of them hit, so the
/// reporting threshold sits at `c3 / c2 * L`. At most `c1 * ln(m + n)` hits are
/// returned as the sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl Default for SamplingConstants {
    fn default() -> Self {
        SamplingConstants { c1: 3.0, c2: 16.0, c3: 8.0 }
    }
}

impl SamplingConstants {
    /// Upper bound on the number of pairs returned with a `MoreThanL` outcome.
    pub fn sample_cap(&self, m: usize, n: usize) -> usize {
        ((self.c1 * ln_size(m, n)).floor() as usize).max(1)
    }
}

/// `ln(m + n)`, never below 1 so tiny instances still sample something.
pub fn ln_size(m: usize, n: usize) -> f64 {
    ((m + n) as f64).ln().max(1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizeConfig {
    pub seed: u64,
    /// Interval size target; `None` picks the variant's default.
    pub l: Option<usize>,
    pub max_retries: u32,
    pub backend: Backend,
    pub sampling: SamplingConstants,
    /// Oversampling factor for the semi-continuous interval search.
    pub semi_sample_c: f64,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        OptimizeConfig {
            seed: 0,
            l: None,
            max_retries: 5,
            backend: Backend::Sampling,
            sampling: SamplingConstants::default(),
            semi_sample_c: 4.0,
        }
    }
}

impl OptimizeConfig {
    pub fn with_seed(seed: u64) -> Self {
        OptimizeConfig { seed, ..Self::default() }
    }
}

/// Work counters reported by the optimizers.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    /// Restarts after a failed randomized attempt.
    pub retries: u32,
    /// Matrix-entry (or primitive) probes of one decision at the optimum.
    pub probes: u64,
    /// Distinct critical values the parametric search branched on.
    pub bifurcations: u64,
    pub phases: u64,
    pub narrowing_rounds: u64,
    /// Concrete decision-procedure calls.
    pub decisions: u64,
    pub interval_size_target: u64,
}
