//! Dispatch overhead benchmark built around `benchmark.increment`.

use std::fmt::{self, Write};
use std::hint::black_box;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::execution::ExecError;
use crate::registry::{EnvOptions, OpEnvironment, RegistryError};
use crate::stdlib;
use crate::types::{SemanticType, Value};

const OP: &str = "benchmark.increment";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BenchScenario {
    Static,
    MatchedNoCache,
    MatchedCached,
    Adapted,
    Converted,
    AdaptedConverted,
}

impl BenchScenario {
    pub const ALL: [BenchScenario; 6] = [
        BenchScenario::Static,
        BenchScenario::MatchedNoCache,
        BenchScenario::MatchedCached,
        BenchScenario::Adapted,
        BenchScenario::Converted,
        BenchScenario::AdaptedConverted,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BenchScenario::Static => "STATIC",
            BenchScenario::MatchedNoCache => "MATCHED_NOCACHE",
            BenchScenario::MatchedCached => "MATCHED_CACHED",
            BenchScenario::Adapted => "ADAPTED",
            BenchScenario::Converted => "CONVERTED",
            BenchScenario::AdaptedConverted => "ADAPTED_CONVERTED",
        }
    }

    pub fn cache_enabled(self) -> bool {
        self == BenchScenario::MatchedCached
    }
}

impl fmt::Display for BenchScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub warmup_iterations: usize,
    pub measured_iterations: usize,
    pub repetitions: usize,
    pub scenarios: Vec<BenchScenario>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            warmup_iterations: 10_000,
            measured_iterations: 100_000,
            repetitions: 5,
            scenarios: BenchScenario::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub scenario: BenchScenario,
    /// Mean ns per invocation, averaged over repetitions.
    pub mean_ns: f64,
    /// Extremes of the per-repetition means.
    pub min_ns: f64,
    pub max_ns: f64,
    pub iterations: usize,
    pub reps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub results: Vec<ScenarioResult>,
    pub timer_resolution_ns: f64,
    pub caveats: Vec<String>,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("building the environment failed: {0}")]
    Setup(#[from] RegistryError),
    #[error("{scenario}: {error}")]
    Exec { scenario: BenchScenario, error: ExecError },
    #[error("{scenario}: iteration {iteration} produced {got}, expected {expected}")]
    Incorrect {
        scenario: BenchScenario,
        iteration: usize,
        got: f64,
        expected: f64,
    },
    #[error("iterations and repetitions must be positive")]
    Config,
}

/// Smallest nonzero step of the monotonic clock seen over a short probe.
pub fn timer_resolution() -> Duration {
    let mut best = Duration::MAX;
    for _ in 0..1000 {
        let a = Instant::now();
        let mut b = Instant::now();
        while b == a {
            b = Instant::now();
        }
        best = best.min(b - a);
    }
    best
}

fn environment(cache: bool) -> Result<OpEnvironment, RegistryError> {
    stdlib::environment_with(EnvOptions {
        cache_enabled: cache,
        record_history: false,
        ..EnvOptions::default()
    })
}

fn bytes() -> SemanticType {
    SemanticType::named(crate::types::BYTE_ARRAY)
}

fn reals() -> SemanticType {
    SemanticType::named(crate::types::REAL_ARRAY)
}

/// Runs one invocation and returns the first element afterwards.
type Step<'e> = Box<dyn FnMut() -> Result<f64, ExecError> + 'e>;

struct Harness {
    scenario: BenchScenario,
    /// Value of the first element the next step must produce.
    expected: f64,
    /// True when each step increments the shared state.
    accumulates: bool,
}

impl Harness {
    fn check(&mut self, iteration: usize, got: f64) -> Result<(), BenchError> {
        if got != self.expected {
            return Err(BenchError::Incorrect {
                scenario: self.scenario,
                iteration,
                got,
                expected: self.expected,
            });
        }
        if self.accumulates {
            self.expected = f64::from((self.expected as u8).wrapping_add(1));
        }
        Ok(())
    }
}

fn step<'e>(scenario: BenchScenario, env: &'e OpEnvironment) -> (Step<'e>, Harness) {
    let harness = |expected, accumulates| Harness {
        scenario,
        expected,
        accumulates,
    };
    match scenario {
        BenchScenario::Static => {
            let mut data = vec![0u8];
            let f = move || {
                stdlib::benchmark::increment(black_box(&mut data)).map_err(|e| ExecError::Usage(e.to_string()))?;
                Ok(f64::from(data[0]))
            };
            (Box::new(f), harness(1.0, true))
        }
        BenchScenario::MatchedNoCache | BenchScenario::MatchedCached => {
            let mut data = Value::bytes(vec![0]);
            let f = move || {
                env.op(OP).input(black_box(&mut data)).mutate(0)?;
                Ok(f64::from(data.as_bytes().map_or(0, |b| b[0])))
            };
            (Box::new(f), harness(1.0, true))
        }
        BenchScenario::Adapted => {
            let data = Value::bytes(vec![41]);
            let f = move || {
                let out = env.op(OP).input(black_box(&data)).output_type(bytes()).apply()?;
                Ok(f64::from(out.as_bytes().map_or(0, |b| b[0])))
            };
            (Box::new(f), harness(42.0, false))
        }
        BenchScenario::Converted => {
            let mut data = Value::reals(vec![0.0]);
            let f = move || {
                env.op(OP).input(black_box(&mut data)).mutate(0)?;
                Ok(data.as_reals().map_or(f64::NAN, |r| r[0]))
            };
            (Box::new(f), harness(1.0, true))
        }
        BenchScenario::AdaptedConverted => {
            let data = Value::reals(vec![41.0]);
            let f = move || {
                let out = env.op(OP).input(black_box(&data)).output_type(reals()).apply()?;
                Ok(out.as_reals().map_or(f64::NAN, |r| r[0]))
            };
            (Box::new(f), harness(42.0, false))
        }
    }
}

fn run_scenario(
    scenario: BenchScenario,
    env: &OpEnvironment,
    config: &BenchConfig,
) -> Result<ScenarioResult, BenchError> {
    let (mut f, mut h) = step(scenario, env);
    let exec = |error| BenchError::Exec { scenario, error };
    for i in 0..config.warmup_iterations {
        let got = f().map_err(exec)?;
        h.check(i, got)?;
    }
    let mut means = Vec::with_capacity(config.repetitions);
    for _ in 0..config.repetitions {
        let mut checksum = 0.0;
        let start = Instant::now();
        for i in 0..config.measured_iterations {
            let got = f().map_err(exec)?;
            h.check(i, got)?;
            checksum += got;
        }
        let elapsed = start.elapsed();
        black_box(checksum);
        means.push(elapsed.as_nanos() as f64 / config.measured_iterations as f64);
    }
    Ok(ScenarioResult {
        scenario,
        mean_ns: means.iter().sum::<f64>() / means.len() as f64,
        min_ns: means.iter().copied().fold(f64::INFINITY, f64::min),
        max_ns: means.iter().copied().fold(0.0, f64::max),
        iterations: config.measured_iterations,
        reps: config.repetitions,
    })
}

/// Measures every configured scenario. Cache and history are off except
/// for the cached scenario, which keeps the cache on.
pub fn run_bench(config: &BenchConfig) -> Result<BenchReport, BenchError> {
    if config.measured_iterations == 0 || config.repetitions == 0 {
        return Err(BenchError::Config);
    }
    let cached = environment(true)?;
    let uncached = environment(false)?;
    let mut results = Vec::new();
    for &s in &config.scenarios {
        let env = if s.cache_enabled() { &cached } else { &uncached };
        results.push(run_scenario(s, env, config)?);
    }
    let resolution = timer_resolution().as_nanos() as f64;
    let mut caveats = vec!["no CPU pinning or frequency control; timings are indicative".to_string()];
    if resolution > 100.0 {
        caveats.push(format!("timer resolution is {resolution:.0} ns, coarser than 100 ns"));
    }
    Ok(BenchReport {
        results,
        timer_resolution_ns: resolution,
        caveats,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl BenchReport {
    pub fn get(&self, s: BenchScenario) -> Option<&ScenarioResult> {
        self.results.iter().find(|r| r.scenario == s)
    }

    fn mean(&self, s: BenchScenario) -> Option<f64> {
        self.get(s).map(|r| r.mean_ns)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("scenario,mean_ns,min_ns,max_ns,iterations,reps\n");
        for r in &self.results {
            let _ = writeln!(
                s,
                "{},{:.1},{:.1},{:.1},{},{}",
                r.scenario, r.mean_ns, r.min_ns, r.max_ns, r.iterations, r.reps
            );
        }
        s
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        for c in &self.caveats {
            let _ = writeln!(s, "# {c}");
        }
        let _ = writeln!(
            s,
            "{:<18} {:>12} {:>12} {:>12} {:>10} {:>4}",
            "scenario", "mean_ns", "min_ns", "max_ns", "iters", "reps"
        );
        for r in &self.results {
            let _ = writeln!(
                s,
                "{:<18} {:>12.1} {:>12.1} {:>12.1} {:>10} {:>4}",
                r.scenario.as_str(),
                r.mean_ns,
                r.min_ns,
                r.max_ns,
                r.iterations,
                r.reps
            );
        }
        s
    }

    /// Overhead ordering: STATIC < MATCHED_CACHED < MATCHED_NOCACHE, and
    /// MATCHED_NOCACHE <= ADAPTED, CONVERTED <= ADAPTED_CONVERTED.
    pub fn ordering(&self) -> Option<Check> {
        use BenchScenario::*;
        let [st, ca, nc, a, c, ac] = [
            Static,
            MatchedCached,
            MatchedNoCache,
            Adapted,
            Converted,
            AdaptedConverted,
        ]
        .map(|s| self.mean(s));
        let (st, ca, nc, a, c, ac) = (st?, ca?, nc?, a?, c?, ac?);
        let passed = st < ca && ca < nc && nc <= a && nc <= c && a <= ac && c <= ac;
        Some(Check {
            name: "overhead ordering".into(),
            passed,
            detail: format!(
                "static {st:.0} < cached {ca:.0} < nocache {nc:.0} <= adapted {a:.0}, converted {c:.0} <= both {ac:.0}"
            ),
        })
    }

    /// Cached dispatch is at least `factor` times cheaper than uncached.
    pub fn cache_effect(&self, factor: f64) -> Option<Check> {
        let ca = self.mean(BenchScenario::MatchedCached)?;
        let nc = self.mean(BenchScenario::MatchedNoCache)?;
        Some(Check {
            name: format!("cached <= nocache/{factor}"),
            passed: ca <= nc / factor,
            detail: format!("cached {ca:.0} ns, nocache {nc:.0} ns, ratio {:.1}", nc / ca),
        })
    }

    /// The combined overhead lies within [0.5, 1.5] of the sum of the
    /// individual overheads, measured against MATCHED_NOCACHE.
    pub fn additivity(&self) -> Option<Check> {
        let base = self.mean(BenchScenario::MatchedNoCache)?;
        let a = self.mean(BenchScenario::Adapted)? - base;
        let c = self.mean(BenchScenario::Converted)? - base;
        let ac = self.mean(BenchScenario::AdaptedConverted)? - base;
        let sum = a + c;
        let ratio = ac / sum;
        Some(Check {
            name: "additivity".into(),
            passed: sum > 0.0 && (0.5..=1.5).contains(&ratio),
            detail: format!("A+C overhead {ac:.0} ns vs A {a:.0} + C {c:.0} = {sum:.0} ns (ratio {ratio:.2})"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoke_run_emits_csv() {
        let config = BenchConfig {
            warmup_iterations: 5,
            measured_iterations: 10,
            repetitions: 1,
            ..BenchConfig::default()
        };
        let report = run_bench(&config).unwrap();
        assert_eq!(report.results.len(), 6);
        let csv = report.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "scenario,mean_ns,min_ns,max_ns,iterations,reps");
        assert_eq!(lines.len(), 7);
        for l in &lines[1..] {
            let cols: Vec<&str> = l.split(',').collect();
            assert_eq!(cols.len(), 6);
            assert!(cols[1].parse::<f64>().unwrap() > 0.0);
            assert_eq!(cols[4], "10");
        }
        assert_eq!(report.to_table().lines().filter(|l| !l.starts_with('#')).count(), 7);
    }

    #[test]
    fn increments_past_wrap() {
        let config = BenchConfig {
            warmup_iterations: 250,
            measured_iterations: 20,
            repetitions: 1,
            scenarios: vec![BenchScenario::Static, BenchScenario::Converted],
        };
        run_bench(&config).unwrap();
    }

    #[test]
    fn zero_iterations_rejected() {
        let config = BenchConfig {
            measured_iterations: 0,
            ..BenchConfig::default()
        };
        assert!(matches!(run_bench(&config), Err(BenchError::Config)));
    }

    #[test]
    fn checks_on_synthetic_report() {
        let row = |scenario, mean_ns| ScenarioResult {
            scenario,
            mean_ns,
            min_ns: mean_ns,
            max_ns: mean_ns,
            iterations: 1,
            reps: 1,
        };
        use BenchScenario::*;
        let report = BenchReport {
            results: vec![
                row(Static, 1.0),
                row(MatchedNoCache, 100.0),
                row(MatchedCached, 5.0),
                row(Adapted, 130.0),
                row(Converted, 120.0),
                row(AdaptedConverted, 150.0),
            ],
            timer_resolution_ns: 1.0,
            caveats: vec![],
        };
        assert!(report.ordering().unwrap().passed);
        assert!(report.cache_effect(10.0).unwrap().passed);
        assert!(report.additivity().unwrap().passed);
    }
}
