//! Benchmark harness: seeded scene suites per difficulty level, parallel
//! planning under a timeout, per-case JSONL records and aggregated metrics.

mod metrics;
mod svg;

use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mcts::SearchBudget;
use crate::orchestrator::{plan, FailureKind, PlanFile};
use crate::scene::{generate_scene, SceneConfig, SceneFile};

pub use metrics::{aggregate, mean_std, success_rate, to_csv, MetricsRow, CSV_HEADER};
pub use svg::{render_svg, SvgError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("invalid suite configuration: {0}")]
    InvalidConfig(String),
}

/// A named band of object counts; case `i` uses `object_counts[i % len]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Level {
    pub name: String,
    pub object_counts: Vec<usize>,
}

impl Level {
    pub fn new(name: impl Into<String>, object_counts: Vec<usize>) -> Self {
        Self {
            name: name.into(),
            object_counts,
        }
    }

    pub fn easy() -> Self {
        Self::new("easy", vec![4])
    }

    pub fn medium() -> Self {
        Self::new("medium", vec![5, 6])
    }

    pub fn hard() -> Self {
        Self::new("hard", vec![7, 8])
    }

    pub fn objects_for_case(&self, case: usize) -> usize {
        self.object_counts[case % self.object_counts.len()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
    All,
}

impl Difficulty {
    pub fn levels(self) -> Vec<Level> {
        match self {
            Difficulty::Easy => vec![Level::easy()],
            Difficulty::Medium => vec![Level::medium()],
            Difficulty::Hard => vec![Level::hard()],
            Difficulty::All => vec![Level::easy(), Level::medium(), Level::hard()],
        }
    }
}

impl FromStr for Difficulty {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "easy" => Ok(Difficulty::Easy),
            "medium" => Ok(Difficulty::Medium),
            "hard" => Ok(Difficulty::Hard),
            "all" => Ok(Difficulty::All),
            other => Err(format!("unknown difficulty '{other}' (easy|medium|hard|all)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub levels: Vec<Level>,
    pub cases_per_level: usize,
    pub base_seed: u64,
    /// Scene parameters; `n_objects` and `rng_seed` are overwritten per case.
    pub scene: SceneConfig,
    /// Planner settings. The wall-clock limit is the per-case timeout.
    pub budget: SearchBudget,
    /// Worker threads; `None` uses the rayon default.
    pub threads: Option<usize>,
}

impl SuiteConfig {
    pub fn new(difficulty: Difficulty, cases_per_level: usize, base_seed: u64) -> Self {
        Self {
            levels: difficulty.levels(),
            cases_per_level,
            base_seed,
            scene: SceneConfig::default(),
            budget: SearchBudget::default(),
            threads: None,
        }
    }

    pub fn with_timeout(mut self, timeout: Option<Duration>) -> Self {
        self.budget.wall_clock_limit = timeout;
        self
    }
}

/// One JSONL line: the scene, the outcome and, on success, the plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub level: String,
    pub case_index: usize,
    pub seed: u64,
    pub n_objects: usize,
    pub success: bool,
    pub failure_kind: Option<FailureKind>,
    pub steps: usize,
    pub total_displacement: f64,
    pub wall_time: f64,
    pub raw_steps: usize,
    pub scene: Option<SceneFile>,
    pub plan: Option<PlanFile>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SuiteResult {
    /// One row per level, then one per distinct object count.
    pub rows: Vec<MetricsRow>,
    pub records: Vec<CaseRecord>,
}

fn run_case(cfg: &SuiteConfig, level: &Level, case_index: usize) -> CaseRecord {
    let seed = cfg.base_seed.wrapping_add(case_index as u64);
    let n_objects = level.objects_for_case(case_index);
    let scene_cfg = SceneConfig {
        n_objects,
        rng_seed: seed,
        ..cfg.scene.clone()
    };
    let mut record = CaseRecord {
        level: level.name.clone(),
        case_index,
        seed,
        n_objects,
        success: false,
        failure_kind: None,
        steps: 0,
        total_displacement: 0.0,
        wall_time: 0.0,
        raw_steps: 0,
        scene: None,
        plan: None,
        error: None,
    };
    let scene = match generate_scene(&scene_cfg) {
        Ok(s) => s,
        Err(e) => {
            record.error = Some(e.to_string());
            return record;
        }
    };
    let budget = SearchBudget {
        seed,
        ..cfg.budget.clone()
    };
    let report = plan(&scene, &budget);
    record.scene = Some(SceneFile::from(&scene));
    record.success = report.success;
    record.failure_kind = report.failure_kind;
    record.wall_time = report.wall_time;
    record.raw_steps = report.raw_steps;
    if let Some(p) = &report.plan {
        record.steps = p.steps;
        record.total_displacement = p.total_displacement;
        record.plan = Some(PlanFile::new(p, report.wall_time));
    }
    record
}

/// Aggregates per level and per object count.
pub fn summarize(levels: &[Level], records: &[CaseRecord]) -> Vec<MetricsRow> {
    let mut rows: Vec<MetricsRow> = levels
        .iter()
        .map(|l| aggregate(&l.name, records.iter().filter(|r| r.level == l.name)))
        .collect();
    let mut counts: Vec<usize> = records.iter().map(|r| r.n_objects).collect();
    counts.sort_unstable();
    counts.dedup();
    rows.extend(counts.into_iter().map(|n| {
        aggregate(
            &format!("n{n}"),
            records.iter().filter(|r| r.n_objects == n),
        )
    }));
    rows
}

/// Generates and plans every case. Records come back ordered by level and
/// case index regardless of which worker ran them.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteResult, HarnessError> {
    if cfg.cases_per_level == 0 {
        return Err(HarnessError::InvalidConfig(
            "cases_per_level must be at least 1".into(),
        ));
    }
    if cfg.levels.iter().any(|l| l.object_counts.is_empty()) {
        return Err(HarnessError::InvalidConfig(
            "every level needs at least one object count".into(),
        ));
    }
    let jobs: Vec<(usize, usize)> = (0..cfg.levels.len())
        .flat_map(|l| (0..cfg.cases_per_level).map(move |c| (l, c)))
        .collect();
    let work = || -> Vec<CaseRecord> {
        jobs.par_iter()
            .map(|&(l, c)| run_case(cfg, &cfg.levels[l], c))
            .collect()
    };
    let records = match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| HarnessError::InvalidConfig(e.to_string()))?
            .install(work),
        None => work(),
    };
    let rows = summarize(&cfg.levels, &records);
    Ok(SuiteResult { rows, records })
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `metrics.csv` and `cases.jsonl` into `dir`.
pub fn write_outputs(dir: &Path, result: &SuiteResult) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let csv_path = dir.join("metrics.csv");
    fs::write(&csv_path, to_csv(&result.rows)).map_err(io_err(&csv_path))?;
    let jsonl_path = dir.join("cases.jsonl");
    let mut f = io::BufWriter::new(fs::File::create(&jsonl_path).map_err(io_err(&jsonl_path))?);
    for r in &result.records {
        serde_json::to_writer(&mut f, r)?;
        f.write_all(b"\n").map_err(io_err(&jsonl_path))?;
    }
    f.flush().map_err(io_err(&jsonl_path))?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<CaseRecord>, HarnessError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(HarnessError::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_object_counts() {
        let m = Level::medium();
        assert_eq!(m.objects_for_case(0), 5);
        assert_eq!(m.objects_for_case(1), 6);
        assert_eq!(m.objects_for_case(2), 5);
        assert_eq!(Level::hard().objects_for_case(3), 8);
        assert_eq!(Difficulty::All.levels().len(), 3);
        assert_eq!("HARD".parse::<Difficulty>(), Ok(Difficulty::Hard));
        assert!("extreme".parse::<Difficulty>().is_err());
    }

    #[test]
    fn zero_cases_rejected() {
        let cfg = SuiteConfig::new(Difficulty::Easy, 0, 1);
        assert!(matches!(run_suite(&cfg), Err(HarnessError::InvalidConfig(_))));
    }
}
