use std::fs::File;
use std::io::Write;
use std::path::Path;

use recsketch::block_random::BlockParams;

use crate::error::CliError;

pub const SCHEMA: &str = "# schema: recsketch-results v1";
pub const COLUMNS: [&str; 10] = ["run_id", "seed", "d", "b", "q", "depth", "weight", "d_prime", "metric_name", "value"];

/// One results row; fields that do not apply stay empty.
#[derive(Clone, Debug, Default)]
pub struct Row {
    pub seed: u64,
    pub params: Option<BlockParams>,
    pub depth: Option<u32>,
    pub weight: Option<f64>,
    pub d_prime: Option<usize>,
    pub metric: String,
    pub value: f64,
}

impl Row {
    pub fn new(seed: u64, params: Option<BlockParams>, metric: impl Into<String>, value: f64) -> Self {
        Row { seed, params, metric: metric.into(), value, ..Default::default() }
    }

    pub fn at(mut self, depth: u32, weight: f64) -> Self {
        self.depth = Some(depth);
        self.weight = Some(weight);
        self
    }

    pub fn erased(mut self, d_prime: Option<usize>) -> Self {
        self.d_prime = d_prime;
        self
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_results(path: &Path, run_id: &str, rows: &[Row]) -> Result<(), CliError> {
    let mut f = File::create(path)?;
    writeln!(f, "{SCHEMA}")?;
    let mut w = csv::Writer::from_writer(f);
    w.write_record(COLUMNS)?;
    for r in rows {
        w.write_record([
            run_id.to_string(),
            r.seed.to_string(),
            opt(r.params.map(|p| p.d)),
            opt(r.params.map(|p| p.b)),
            opt(r.params.map(|p| p.q)),
            opt(r.depth),
            opt(r.weight),
            opt(r.d_prime),
            r.metric.clone(),
            format!("{:.12e}", r.value),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    match n {
        0 => f64::NAN,
        _ if n % 2 == 1 => v[n / 2],
        _ => 0.5 * (v[n / 2 - 1] + v[n / 2]),
    }
}
