//! Value oracles for `f(b)`.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use crate::cascade::{self, Scenario};
use crate::error::Result;
use crate::graph::DirectedGraph;
use crate::instance::Instance;
use crate::par::Exec;
use crate::seeds;

/// Black-box access to a set function on the integer lattice.
pub trait ValueOracle: Sync {
    fn n(&self) -> usize;

    fn value(&self, b: &[u32]) -> f64;

    /// Number of `value` calls served so far.
    fn queries(&self) -> u64;
}

impl<O: ValueOracle + ?Sized> ValueOracle for &O {
    fn n(&self) -> usize {
        (**self).n()
    }
    fn value(&self, b: &[u32]) -> f64 {
        (**self).value(b)
    }
    fn queries(&self) -> u64 {
        (**self).queries()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMode {
    Exact,
    MonteCarlo,
}

/// `f(b)` as a weighted average of cascade counts over a frozen scenario
/// set: every enumerated scenario with its probability, or `m` seeded
/// samples with weight `1/m`. The set never changes after construction, so
/// all queries see the same randomness.
#[derive(Debug)]
pub struct InfluenceOracle {
    mode: OracleMode,
    graph: DirectedGraph,
    scenarios: Vec<Scenario>,
    seed: Option<u64>,
    exec: Exec,
    queries: AtomicU64,
}

/// Hoeffding half-width at 95% for an average of `m` values in `[0, n]`.
pub fn hoeffding_half_width(n: usize, m: usize) -> f64 {
    n as f64 * ((2.0f64 / 0.05).ln() / (2.0 * m as f64)).sqrt()
}

impl InfluenceOracle {
    pub fn exact(instance: &Instance, limit: u128) -> Result<Self> {
        let scenarios = cascade::enumerate_scenarios(instance, limit)?;
        Ok(Self::build(OracleMode::Exact, instance, scenarios, None))
    }

    /// `m` scenarios; scenario `k` is drawn from ChaCha stream `k` of the
    /// `scenario` seed stream.
    pub fn monte_carlo(instance: &Instance, m: usize, seed: u64) -> Self {
        assert!(m >= 1, "monte carlo oracle needs at least one scenario");
        let base = seeds::derive(seed, seeds::SCENARIO);
        let scenarios = (0..m)
            .map(|k| cascade::sample_scenario_with(instance, &mut seeds::stream_rng(base, k as u64)))
            .collect();
        Self::build(OracleMode::MonteCarlo, instance, scenarios, Some(seed))
    }

    /// Exact when the support fits under `limit`, otherwise Monte Carlo.
    pub fn auto(instance: &Instance, limit: u128, m: usize, seed: u64) -> Self {
        if instance.support_size() <= limit {
            Self::exact(instance, limit).expect("support checked")
        } else {
            Self::monte_carlo(instance, m, seed)
        }
    }

    fn build(mode: OracleMode, instance: &Instance, scenarios: Vec<Scenario>, seed: Option<u64>) -> Self {
        InfluenceOracle {
            mode,
            graph: instance.graph().clone(),
            scenarios,
            seed,
            exec: Exec::default(),
            queries: AtomicU64::new(0),
        }
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn mode(&self) -> OracleMode {
        self.mode
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn scenarios(&self) -> &[Scenario] {
        &self.scenarios
    }

    pub fn graph(&self) -> &DirectedGraph {
        &self.graph
    }

    /// 95% Hoeffding half-width; zero for the exact oracle.
    pub fn half_width(&self) -> f64 {
        match self.mode {
            OracleMode::Exact => 0.0,
            OracleMode::MonteCarlo => hoeffding_half_width(self.graph.n(), self.scenarios.len()),
        }
    }

    /// `f_σ(b)` for every scenario, in scenario order. Not counted as a query.
    pub fn counts(&self, b: &[u32]) -> Vec<u32> {
        self.exec.map(&self.scenarios, |s| cascade::cascade_value(&self.graph, s, b))
    }
}

impl ValueOracle for InfluenceOracle {
    fn n(&self) -> usize {
        self.graph.n()
    }

    fn value(&self, b: &[u32]) -> f64 {
        assert_eq!(b.len(), self.graph.n(), "allocation length");
        self.queries.fetch_add(1, Ordering::Relaxed);
        match self.mode {
            OracleMode::Exact => {
                let counts = self.counts(b);
                self.scenarios
                    .iter()
                    .zip(counts)
                    .map(|(s, c)| s.probability.unwrap_or(0.0) * c as f64)
                    .sum()
            }
            OracleMode::MonteCarlo => {
                let total = self
                    .exec
                    .sum_u64(&self.scenarios, |s| cascade::cascade_value(&self.graph, s, b) as u64);
                total as f64 / self.scenarios.len() as f64
            }
        }
    }

    fn queries(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }
}

/// `f(b) = Σ_σ Pr(σ) f_σ(b)` by full enumeration.
pub fn exact_influence(instance: &Instance, b: &[u32]) -> Result<f64> {
    Ok(InfluenceOracle::exact(instance, cascade::DEFAULT_ENUMERATION_LIMIT)?.value(b))
}

/// Monte Carlo estimate and its 95% Hoeffding half-width.
pub fn mc_influence(instance: &Instance, b: &[u32], m: usize, seed: u64) -> (f64, f64) {
    let oracle = InfluenceOracle::monte_carlo(instance, m, seed);
    (oracle.value(b), oracle.half_width())
}

/// Oracle around an arbitrary function.
pub struct FnOracle<F> {
    n: usize,
    f: F,
    queries: AtomicU64,
}

impl<F: Fn(&[u32]) -> f64 + Sync> FnOracle<F> {
    pub fn new(n: usize, f: F) -> Self {
        FnOracle { n, f, queries: AtomicU64::new(0) }
    }
}

impl<F: Fn(&[u32]) -> f64 + Sync> ValueOracle for FnOracle<F> {
    fn n(&self) -> usize {
        self.n
    }
    fn value(&self, b: &[u32]) -> f64 {
        self.queries.fetch_add(1, Ordering::Relaxed);
        (self.f)(b)
    }
    fn queries(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }
}

/// Memoizing wrapper. `queries` counts calls to the wrapper;
/// `inner().queries()` counts cache misses. Each allocation is computed
/// once even under concurrent lookups, so both counts are deterministic.
pub struct CachedOracle<O> {
    inner: O,
    cache: RwLock<HashMap<Vec<u32>, Arc<OnceLock<f64>>>>,
    queries: AtomicU64,
}

impl<O: ValueOracle> CachedOracle<O> {
    pub fn new(inner: O) -> Self {
        CachedOracle { inner, cache: RwLock::new(HashMap::new()), queries: AtomicU64::new(0) }
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<O: ValueOracle> ValueOracle for CachedOracle<O> {
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn value(&self, b: &[u32]) -> f64 {
        self.queries.fetch_add(1, Ordering::Relaxed);
        let cell = self.cache.read().expect("cache lock").get(b).cloned();
        let cell = match cell {
            Some(c) => c,
            None => self.cache.write().expect("cache lock").entry(b.to_vec()).or_default().clone(),
        };
        *cell.get_or_init(|| self.inner.value(b))
    }

    fn queries(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }
}
