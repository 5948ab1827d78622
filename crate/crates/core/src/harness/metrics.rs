use serde::{Deserialize, Serialize};

use super::CaseRecord;

/// CSV header, in column order.
pub const CSV_HEADER: &str = "level,cases,success_rate,mean_steps,std_steps,mean_dist,std_dist,mean_time_s";

/// Aggregate over one group of cases. Step and displacement statistics only
/// use successful cases; time uses every case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub level: String,
    pub cases: usize,
    pub success_rate: f64,
    pub mean_steps: f64,
    pub std_steps: f64,
    pub mean_dist: f64,
    pub std_dist: f64,
    pub mean_time_s: f64,
}

/// Mean and sample standard deviation; `(0, 0)` when empty and a zero
/// deviation for a single value.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

pub fn success_rate(successes: usize, cases: usize) -> f64 {
    if cases == 0 {
        0.0
    } else {
        successes as f64 / cases as f64 * 100.0
    }
}

pub fn aggregate<'a>(level: &str, records: impl IntoIterator<Item = &'a CaseRecord>) -> MetricsRow {
    let records: Vec<&CaseRecord> = records.into_iter().collect();
    let solved: Vec<&CaseRecord> = records.iter().copied().filter(|r| r.success).collect();
    let steps: Vec<f64> = solved.iter().map(|r| r.steps as f64).collect();
    let dists: Vec<f64> = solved.iter().map(|r| r.total_displacement).collect();
    let times: Vec<f64> = records.iter().map(|r| r.wall_time).collect();
    let (mean_steps, std_steps) = mean_std(&steps);
    let (mean_dist, std_dist) = mean_std(&dists);
    MetricsRow {
        level: level.to_string(),
        cases: records.len(),
        success_rate: success_rate(solved.len(), records.len()),
        mean_steps,
        std_steps,
        mean_dist,
        std_dist,
        mean_time_s: mean_std(&times).0,
    }
}

impl MetricsRow {
    /// Full-precision CSV line, so the file can be re-aggregated exactly.
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.level,
            self.cases,
            self.success_rate,
            self.mean_steps,
            self.std_steps,
            self.mean_dist,
            self.std_dist,
            self.mean_time_s
        )
    }
}

pub fn to_csv(rows: &[MetricsRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}
