//! Experiment execution: generate input, time the selected algorithm and
//! the serial baseline on the same keys, verify the output, and produce one
//! record per repetition.

use std::time::Instant;

use bspsort::algo::{distribute, SortConfig, SortReport, SorterRegistry};
use bspsort::kernels::sr4;
use bspsort::model::{self, Algo};
use bspsort::types::Key;
use bspsort::SortError;

use crate::gen::{generate_input, Distribution};

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub algo: String,
    pub n: usize,
    pub p: usize,
    pub seed: u64,
    pub reps: usize,
    pub warmup: usize,
    pub dist: Distribution,
    pub omega: Option<f64>,
    pub epsilon: f64,
    pub rho: f64,
}

impl ExperimentConfig {
    pub fn new(algo: &str, n: usize, p: usize, seed: u64) -> Self {
        ExperimentConfig {
            algo: algo.to_string(),
            n,
            p,
            seed,
            reps: 4,
            warmup: 0,
            dist: Distribution::Uniform32,
            omega: None,
            epsilon: 0.5,
            rho: 1.0,
        }
    }

    fn sort_config(&self, seed: u64) -> SortConfig {
        SortConfig {
            seed,
            omega: self.omega,
            epsilon: self.epsilon,
            rho: self.rho,
            oversample: None,
        }
    }
}

/// One verified repetition. The CSV schema covers exactly these fields.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub algo: String,
    pub n: usize,
    pub p: usize,
    pub rep: usize,
    pub seed: u64,
    pub wall_seconds: f64,
    pub speedup: f64,
    pub predicted_speedup: f64,
    pub verified: bool,
    pub max_bucket: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum RunnerError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("verification failed at position {position}: {detail}")]
    Verification { position: usize, detail: String },
    #[error("run failed: {0}")]
    Runtime(String),
}

impl From<SortError> for RunnerError {
    fn from(e: SortError) -> Self {
        match e {
            SortError::Config(msg) => RunnerError::Config(msg),
            SortError::Runtime(e) => RunnerError::Runtime(e.to_string()),
        }
    }
}

/// Checks the output distribution is sorted and holds exactly the input's
/// key multiset; reports the first offending position otherwise.
pub fn verify_output(report: &SortReport, input: &[Key]) -> Result<(), RunnerError> {
    let got = report.concatenated();
    if let Some(i) = got.windows(2).position(|w| w[0] > w[1]) {
        return Err(RunnerError::Verification {
            position: i + 1,
            detail: format!("key {} follows {}", got[i + 1], got[i]),
        });
    }
    let mut expect = input.to_vec();
    expect.sort_unstable();
    if got.len() != expect.len() {
        return Err(RunnerError::Verification {
            position: got.len().min(expect.len()),
            detail: format!(
                "output holds {} keys, input had {}",
                got.len(),
                expect.len()
            ),
        });
    }
    if let Some(i) = got.iter().zip(&expect).position(|(a, b)| a != b) {
        return Err(RunnerError::Verification {
            position: i,
            detail: format!("multiset differs: expected {}, found {}", expect[i], got[i]),
        });
    }
    Ok(())
}

/// Hardware context recorded alongside runs (informational; no pinning).
#[derive(Debug, Clone, Copy)]
pub struct MachineInfo {
    pub physical_cores: usize,
    pub logical_cpus: usize,
}

pub fn detect_machine() -> MachineInfo {
    let logical = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    let physical = physical_cores_from_cpuinfo().unwrap_or(logical);
    MachineInfo {
        physical_cores: physical,
        logical_cpus: logical,
    }
}

fn physical_cores_from_cpuinfo() -> Option<usize> {
    let text = std::fs::read_to_string("/proc/cpuinfo").ok()?;
    let mut pairs = std::collections::BTreeSet::new();
    let (mut phys, mut core) = (None, None);
    for line in text.lines() {
        let mut split = line.splitn(2, ':');
        let key = split.next()?.trim();
        let value = split.next().map(str::trim);
        match key {
            "physical id" => phys = value.map(str::to_string),
            "core id" => core = value.map(str::to_string),
            "" => {
                if let (Some(p), Some(c)) = (phys.take(), core.take()) {
                    pairs.insert((p, c));
                }
            }
            _ => {}
        }
    }
    if let (Some(p), Some(c)) = (phys, core) {
        pairs.insert((p, c));
    }
    (!pairs.is_empty()).then_some(pairs.len())
}

fn predicted_for(algo: &str, n: usize, p: usize) -> f64 {
    Algo::parse(algo)
        .and_then(|a| model::predicted_speedup(a, n as f64, p, 1.0).ok())
        .unwrap_or(f64::NAN)
}

/// Runs `warmup` discarded repetitions and then `reps` recorded ones. Every
/// recorded repetition is verified; the serial baseline is timed on the
/// same generated input so speedups compare identical work. Timing covers
/// the sort proper, not input generation or verification.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>, RunnerError> {
    let registry = SorterRegistry::standard();
    let sorter = registry
        .get(&cfg.algo)
        .ok_or_else(|| RunnerError::Config(format!("unknown algorithm '{}'", cfg.algo)))?;
    if cfg.reps < 1 {
        return Err(RunnerError::Config("reps must be at least 1".into()));
    }
    if cfg.p < 1 {
        return Err(RunnerError::Config("p must be at least 1".into()));
    }

    let is_baseline = cfg.algo == "sr4";
    let predicted = predicted_for(&cfg.algo, cfg.n, cfg.p);
    let mut records = Vec::with_capacity(cfg.reps);

    for round in 0..cfg.warmup + cfg.reps {
        let warm = round < cfg.warmup;
        let rep = round.saturating_sub(cfg.warmup);
        let rep_seed = cfg.seed.wrapping_add(rep as u64);
        let input = generate_input(cfg.n, cfg.dist, rep_seed).into_keys();
        let blocks = distribute(&input, cfg.p);
        let sort_cfg = cfg.sort_config(rep_seed);

        let start = Instant::now();
        let report = sorter.sort(blocks, &sort_cfg)?;
        let wall = start.elapsed().as_secs_f64();

        if round == 0 {
            if let Some(sp) = &report.sampling {
                eprintln!(
                    "sampling: omega={} r={} s={} epsilon={} rho={}",
                    sp.omega, sp.regularity, sp.oversample, sp.epsilon, sp.rho
                );
            }
            for warning in &report.warnings {
                eprintln!("warning: {warning}");
            }
        }

        let baseline = if is_baseline {
            wall
        } else {
            let start = Instant::now();
            std::hint::black_box(sr4(std::hint::black_box(&input)));
            start.elapsed().as_secs_f64()
        };

        verify_output(&report, &input)?;
        if warm {
            continue;
        }
        records.push(RunRecord {
            algo: cfg.algo.clone(),
            n: cfg.n,
            p: cfg.p,
            rep,
            seed: rep_seed,
            wall_seconds: wall,
            speedup: baseline / wall,
            predicted_speedup: predicted,
            verified: true,
            max_bucket: report.max_received,
        });
    }
    Ok(records)
}
