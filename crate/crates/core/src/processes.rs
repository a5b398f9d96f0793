//! Stationary underlying sequences `{X_n}_{n>=0}`.
//!
//! Three processes are shipped, all with Fréchet-type margins:
//!
//! * `iid`: independent draws from a Fréchet law;
//! * `moving_maxima`: `X_n = max(Z_n, Z_{n-1}) / 2` over i.i.d. innovations;
//! * `armax`: `X_n = t * max(X_{n-1}, W_n)` with `W_n` chosen so that the
//!   Fréchet law `H` of `X_0` is stationary.
//!
//! Every path is a monotone max-type function of independent Fréchet
//! innovations. That representation is what lets the Monte Carlo code
//! sample windows conditionally on an exceedance (see [`crate::window`]).

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionFamily {
    Frechet,
}

/// A Fréchet law `F(x) = exp(-(x/scale)^(-shape))` on `x > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    pub family: DistributionFamily,
    pub shape: f64,
    pub scale: f64,
}

impl DistributionSpec {
    pub fn frechet(shape: f64, scale: f64) -> Result<Self> {
        let spec = Self {
            family: DistributionFamily::Frechet,
            shape,
            scale,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn unit_frechet() -> Self {
        Self {
            family: DistributionFamily::Frechet,
            shape: 1.0,
            scale: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.shape.is_finite() && self.shape > 0.0) {
            return Err(Error::config(format!(
                "Fréchet shape must be positive and finite, got {}",
                self.shape
            )));
        }
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(Error::config(format!(
                "Fréchet scale must be positive and finite, got {}",
                self.scale
            )));
        }
        Ok(())
    }

    /// `(x/scale)^(-shape)`, the exponent of the cdf. Infinite at 0, zero at +inf.
    #[inline]
    fn tail_exponent(&self, x: f64) -> f64 {
        if x <= 0.0 {
            f64::INFINITY
        } else if x == f64::INFINITY {
            0.0
        } else {
            (x / self.scale).powf(-self.shape)
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        (-self.tail_exponent(x)).exp()
    }

    /// `1 - cdf(x)`, computed without cancellation in the upper tail.
    pub fn survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        -(-self.tail_exponent(x)).exp_m1()
    }

    /// Inverse cdf on `(0, 1)`.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::config(format!("quantile level {q} outside (0, 1)")));
        }
        Ok(self.scale * (-q.ln()).powf(-1.0 / self.shape))
    }

    /// The level exceeded with probability `tail`, i.e. `quantile(1 - tail)`
    /// evaluated without forming `1 - tail`.
    pub fn upper_quantile(&self, tail: f64) -> Result<f64> {
        if !(tail > 0.0 && tail < 1.0) {
            return Err(Error::config(format!(
                "tail probability {tail} outside (0, 1)"
            )));
        }
        Ok(self.scale * (-(-tail).ln_1p()).powf(-1.0 / self.shape))
    }

    #[inline]
    fn value_at_exponential(&self, e: f64) -> f64 {
        self.scale * e.powf(-1.0 / self.shape)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let v: f64 = rng.sample(Open01);
        self.value_at_exponential(-v.ln())
    }

    /// Draw conditioned on `X <= c`.
    pub fn sample_below<R: Rng + ?Sized>(&self, c: f64, rng: &mut R) -> f64 {
        let v: f64 = rng.sample(Open01);
        self.value_at_exponential(-v.ln() + self.tail_exponent(c))
    }

    /// Draw conditioned on `X > c`; `c` must be finite.
    pub fn sample_above<R: Rng + ?Sized>(&self, c: f64, rng: &mut R) -> f64 {
        let w: f64 = rng.sample(Open01);
        let z = self.tail_exponent(c);
        // -ln V for V uniform on (F(c), 1) is Exp(1) truncated to (0, z)
        let e = -(-w * -(-z).exp_m1()).ln_1p();
        self.value_at_exponential(e)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessKind {
    Iid,
    MovingMaxima,
    Armax,
}

impl ProcessKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProcessKind::Iid => "iid",
            ProcessKind::MovingMaxima => "moving_maxima",
            ProcessKind::Armax => "armax",
        }
    }
}

/// Which stationary sequence to simulate.
///
/// `dist` is the marginal law for `iid`, the innovation law `F_Z` for
/// `moving_maxima` and the stationary marginal `H` for `armax`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcessConfig {
    pub kind: ProcessKind,
    pub dist: DistributionSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
}

impl ProcessConfig {
    pub fn iid(dist: DistributionSpec) -> Result<Self> {
        let cfg = Self {
            kind: ProcessKind::Iid,
            dist,
            t: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn unit_iid() -> Self {
        Self {
            kind: ProcessKind::Iid,
            dist: DistributionSpec::unit_frechet(),
            t: None,
        }
    }

    /// Moving maxima over unit Fréchet innovations.
    pub fn moving_maxima() -> Self {
        Self {
            kind: ProcessKind::MovingMaxima,
            dist: DistributionSpec::unit_frechet(),
            t: None,
        }
    }

    pub fn moving_maxima_with(innovations: DistributionSpec) -> Result<Self> {
        let cfg = Self {
            kind: ProcessKind::MovingMaxima,
            dist: innovations,
            t: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// ARMAX(1) with stationary marginal `H = Fréchet(alpha, 1)`.
    pub fn armax(t: f64, alpha: f64) -> Result<Self> {
        Self::armax_with(t, DistributionSpec::frechet(alpha, 1.0)?)
    }

    pub fn armax_with(t: f64, stationary: DistributionSpec) -> Result<Self> {
        let cfg = Self {
            kind: ProcessKind::Armax,
            dist: stationary,
            t: Some(t),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.dist.validate()?;
        match (self.kind, self.t) {
            (ProcessKind::Armax, Some(t)) if t > 0.0 && t < 1.0 => Ok(()),
            (ProcessKind::Armax, Some(t)) => Err(Error::config(format!(
                "ARMAX coefficient t must lie in (0, 1), got {t}"
            ))),
            (ProcessKind::Armax, None) => Err(Error::config("ARMAX requires a coefficient t")),
            (_, Some(_)) => Err(Error::config(format!(
                "coefficient t only applies to armax, not {}",
                self.kind.name()
            ))),
            (_, None) => Ok(()),
        }
    }

    fn armax_t(&self) -> f64 {
        self.t.expect("validated ARMAX config carries t")
    }

    /// Exact marginal law of every `X_n`.
    pub fn marginal(&self) -> DistributionSpec {
        match self.kind {
            ProcessKind::Iid | ProcessKind::Armax => self.dist,
            ProcessKind::MovingMaxima => {
                // F_Z(2x)^2 is Fréchet with the same shape and scale s * 2^(1/a) / 2
                let a = self.dist.shape;
                DistributionSpec {
                    family: DistributionFamily::Frechet,
                    shape: a,
                    scale: self.dist.scale * 2f64.powf(1.0 / a) / 2.0,
                }
            }
        }
    }

    /// Law `L` of the ARMAX innovations: Fréchet with scale `s (t^-a - 1)^(1/a)`.
    pub fn armax_innovation(&self) -> Option<DistributionSpec> {
        if self.kind != ProcessKind::Armax {
            return None;
        }
        let t = self.armax_t();
        let a = self.dist.shape;
        Some(DistributionSpec {
            family: DistributionFamily::Frechet,
            shape: a,
            scale: self.dist.scale * (t.powf(-a) - 1.0).powf(1.0 / a),
        })
    }

    /// Number of innovations behind a path with indices `0..=len`.
    pub(crate) fn innovation_count(&self, len: usize) -> usize {
        match self.kind {
            ProcessKind::Iid | ProcessKind::Armax => len + 1,
            ProcessKind::MovingMaxima => len + 2,
        }
    }

    /// Law of innovation `k` (0-based position in the innovation vector).
    pub(crate) fn innovation_law(&self, k: usize) -> DistributionSpec {
        match self.kind {
            ProcessKind::Iid | ProcessKind::MovingMaxima => self.dist,
            ProcessKind::Armax if k == 0 => self.dist,
            ProcessKind::Armax => self.armax_innovation().expect("armax"),
        }
    }

    /// Thresholds `c_k` such that `max(X_0..=X_m) > u` iff some innovation
    /// `k < thresholds.len()` exceeds `c_k`.
    pub(crate) fn prefix_thresholds(&self, m: usize, u: f64) -> Vec<f64> {
        match self.kind {
            ProcessKind::Iid => vec![u; m + 1],
            ProcessKind::MovingMaxima => vec![2.0 * u; m + 2],
            ProcessKind::Armax => {
                let t = self.armax_t();
                let mut c = vec![u / t; m + 1];
                c[0] = u;
                c
            }
        }
    }

    /// Maps innovations to the path `X_0..=X_len`.
    pub(crate) fn build_path(&self, innov: &[f64], out: &mut Vec<f64>) {
        out.clear();
        match self.kind {
            ProcessKind::Iid => out.extend_from_slice(innov),
            ProcessKind::MovingMaxima => {
                out.extend(innov.windows(2).map(|w| 0.5 * w[0].max(w[1])));
            }
            ProcessKind::Armax => {
                let t = self.armax_t();
                let mut x = innov[0];
                out.push(x);
                for &w in &innov[1..] {
                    x = t * x.max(w);
                    out.push(x);
                }
            }
        }
    }

    pub(crate) fn sample_innovations<R: Rng + ?Sized>(
        &self,
        len: usize,
        rng: &mut R,
        out: &mut Vec<f64>,
    ) {
        out.clear();
        let count = self.innovation_count(len);
        match self.kind {
            ProcessKind::Armax => {
                out.push(self.dist.sample(rng));
                let w = self.armax_innovation().expect("armax");
                out.extend((1..count).map(|_| w.sample(rng)));
            }
            _ => out.extend((0..count).map(|_| self.dist.sample(rng))),
        }
    }

    /// Simulates `X_0..=X_n`.
    pub fn generate(&self, n: usize, seed: u64) -> Result<ProcessPath> {
        self.validate()?;
        if n == 0 {
            return Err(Error::config("path length n must be at least 1"));
        }
        let mut rng = rng_from_seed(seed);
        let mut innov = Vec::with_capacity(self.innovation_count(n));
        self.sample_innovations(n, &mut rng, &mut innov);
        let mut values = Vec::with_capacity(n + 1);
        self.build_path(&innov, &mut values);
        Ok(ProcessPath {
            values,
            config: *self,
            seed,
        })
    }

    /// `P(X_i <= x for every i in indices)`; indices need not be sorted.
    pub fn joint_cdf_common_level(&self, indices: &[usize], x: f64) -> f64 {
        if indices.is_empty() {
            return 1.0;
        }
        if x <= 0.0 {
            return 0.0;
        }
        match self.kind {
            ProcessKind::Iid => self.dist.cdf(x).powi(distinct(indices) as i32),
            ProcessKind::MovingMaxima => {
                // X_i <= x iff Z_i <= 2x and Z_{i-1} <= 2x
                let mut z: Vec<usize> = indices.iter().flat_map(|&i| [i, i + 1]).collect();
                z.sort_unstable();
                z.dedup();
                self.dist.cdf(2.0 * x).powi(z.len() as i32)
            }
            ProcessKind::Armax => {
                let t = self.armax_t();
                let w = self.armax_innovation().expect("armax");
                let top = *indices.iter().max().expect("nonempty");
                let mut bound = vec![f64::INFINITY; top + 1];
                for &i in indices {
                    bound[i] = x;
                }
                // X_k <= c iff X_{k-1} <= c/t and W_k <= c/t
                let mut prob = 1.0;
                let mut carried = f64::INFINITY;
                for k in (1..=top).rev() {
                    let c = bound[k].min(carried);
                    if c.is_finite() {
                        prob *= w.cdf(c / t);
                    }
                    carried = c / t;
                }
                prob * self.dist.cdf(bound[0].min(carried))
            }
        }
    }
}

fn distinct(indices: &[usize]) -> usize {
    let mut v = indices.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

/// A simulated path `X_0..=X_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProcessPath {
    pub values: Vec<f64>,
    pub config: ProcessConfig,
    pub seed: u64,
}

impl ProcessPath {
    /// The largest index `n` (the path holds `n + 1` values).
    pub fn n(&self) -> usize {
        self.values.len() - 1
    }
}

pub fn generate_iid(n: usize, dist: DistributionSpec, seed: u64) -> Result<ProcessPath> {
    ProcessConfig::iid(dist)?.generate(n, seed)
}

/// Moving maxima `X_k = max(Z_k, Z_{k-1}) / 2` over unit Fréchet `Z_{-1}, ..., Z_n`.
pub fn generate_moving_maxima(n: usize, seed: u64) -> Result<ProcessPath> {
    ProcessConfig::moving_maxima().generate(n, seed)
}

pub fn generate_armax(n: usize, t: f64, alpha: f64, seed: u64) -> Result<ProcessPath> {
    ProcessConfig::armax(t, alpha)?.generate(n, seed)
}

/// Extremal index of the underlying sequence: 1, 1/2 and `1 - t^alpha`.
pub fn theoretical_theta_x(config: &ProcessConfig) -> f64 {
    match config.kind {
        ProcessKind::Iid => 1.0,
        ProcessKind::MovingMaxima => 0.5,
        ProcessKind::Armax => 1.0 - config.armax_t().powf(config.dist.shape),
    }
}

/// The level `u_n` with `n * (1 - F(u_n)) = tau_x` under the exact marginal.
pub fn normalized_level(config: &ProcessConfig, n: usize, tau_x: f64) -> Result<f64> {
    if !(tau_x > 0.0 && tau_x < n as f64) {
        return Err(Error::LevelUndefined { tau: tau_x, n });
    }
    config.marginal().upper_quantile(tau_x / n as f64)
}
