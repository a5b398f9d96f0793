//! Short windows of the underlying process sampled conditionally on an
//! early exceedance.
//!
//! Tail probabilities of order `tau / n` are far too small for plain
//! indicator means at the `n` values of interest. Every event the Monte
//! Carlo code estimates requires `max(X_0..=X_m) > u`, and that event is a
//! union of independent innovation exceedances. Sampling the index of the
//! first exceeding innovation, then the innovations before it conditioned
//! below their thresholds and the one at it conditioned above, draws the
//! window exactly from the law given `E = {max(X_0..=X_m) > u}`. The
//! unconditional probability of an event `A` inside `E` is then
//! `P(E) * P(A | E)` with `P(E)` known in closed form.

use rand::Rng;
use rayon::prelude::*;

use crate::processes::{DistributionSpec, ProcessConfig};
use crate::rng::{mix_seed, rng_from_seed, SimRng};

#[derive(Clone, Debug)]
pub(crate) struct ConditionedWindow {
    config: ProcessConfig,
    laws: Vec<DistributionSpec>,
    thresholds: Vec<f64>,
    cumulative: Vec<f64>,
    prob: f64,
}

impl ConditionedWindow {
    /// Window `X_0..=X_len` conditioned on `max(X_0..=X_prefix) > u`.
    pub fn new(config: &ProcessConfig, len: usize, prefix: usize, u: f64) -> Self {
        assert!(prefix <= len, "prefix {prefix} beyond window {len}");
        let count = config.innovation_count(len);
        let laws: Vec<_> = (0..count).map(|k| config.innovation_law(k)).collect();
        let thresholds = config.prefix_thresholds(prefix, u);

        let mut cumulative = Vec::with_capacity(thresholds.len());
        let mut below_all = 1.0;
        let mut log_below = 0.0;
        let mut acc = 0.0;
        for (law, &c) in laws.iter().zip(&thresholds) {
            let q = law.survival(c);
            acc += below_all * q;
            cumulative.push(acc);
            below_all *= 1.0 - q;
            log_below += (-q).ln_1p();
        }
        Self {
            config: *config,
            laws,
            thresholds,
            cumulative,
            prob: -log_below.exp_m1(),
        }
    }

    /// `P(max(X_0..=X_prefix) > u)`.
    pub fn probability(&self) -> f64 {
        self.prob
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, innov: &mut Vec<f64>, path: &mut Vec<f64>) {
        let total = *self.cumulative.last().expect("nonempty prefix");
        let v = rng.random::<f64>() * total;
        let first = self
            .cumulative
            .partition_point(|&c| c < v)
            .min(self.cumulative.len() - 1);

        innov.clear();
        for (k, law) in self.laws.iter().enumerate() {
            let x = if k < first {
                law.sample_below(self.thresholds[k], rng)
            } else if k == first {
                law.sample_above(self.thresholds[k], rng)
            } else {
                law.sample(rng)
            };
            innov.push(x);
        }
        self.config.build_path(innov, path);
    }
}

/// Integer first and second moments of a pair of per-replication counts.
/// Integer sums make parallel reductions bitwise independent of scheduling.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub(crate) struct Tally {
    pub reps: u64,
    pub a: u64,
    pub b: u64,
    pub aa: u64,
    pub bb: u64,
    pub ab: u64,
}

impl Tally {
    pub fn single(a: u64, b: u64) -> Self {
        Self {
            reps: 1,
            a,
            b,
            aa: a * a,
            bb: b * b,
            ab: a * b,
        }
    }

    pub fn merge(self, o: Self) -> Self {
        Self {
            reps: self.reps + o.reps,
            a: self.a + o.a,
            b: self.b + o.b,
            aa: self.aa + o.aa,
            bb: self.bb + o.bb,
            ab: self.ab + o.ab,
        }
    }

    /// Mean of the first count and its standard error.
    pub fn mean_a(&self) -> (f64, f64) {
        let r = self.reps as f64;
        let mean = self.a as f64 / r;
        let var = (self.aa as f64 / r - mean * mean).max(0.0);
        (mean, (var / r).sqrt())
    }

    /// Ratio `sum a / sum b` with a delta-method standard error.
    pub fn ratio(&self) -> (f64, f64) {
        let r = self.reps as f64;
        let theta = self.a as f64 / self.b as f64;
        let (ma, mb) = (self.a as f64 / r, self.b as f64 / r);
        let var_a = self.aa as f64 / r - ma * ma;
        let var_b = self.bb as f64 / r - mb * mb;
        let cov = self.ab as f64 / r - ma * mb;
        let var = (var_a - 2.0 * theta * cov + theta * theta * var_b).max(0.0);
        (theta, (var / r).sqrt() / mb)
    }
}

/// Scratch buffers reused across replications on one worker.
#[derive(Default)]
pub(crate) struct Scratch {
    pub innov: Vec<f64>,
    pub x: Vec<f64>,
    pub u: Vec<bool>,
    pub y: Vec<f64>,
}

/// Runs `reps` replications in parallel; replication `r` draws from the
/// generator seeded with `mix_seed(seed, stream, r)`.
pub(crate) fn tally_reps<F>(reps: usize, seed: u64, stream: u64, body: F) -> Tally
where
    F: Fn(&mut SimRng, &mut Scratch) -> (u64, u64) + Sync,
{
    (0..reps as u64)
        .into_par_iter()
        .map_init(Scratch::default, |scratch, r| {
            let mut rng = rng_from_seed(mix_seed(seed, stream, r));
            let (a, b) = body(&mut rng, scratch);
            Tally::single(a, b)
        })
        .reduce(Tally::default, Tally::merge)
}
