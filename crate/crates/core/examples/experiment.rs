//! A small seeded experiment written to CSV.
//!
//! `cargo run --release --example experiment -- out_dir`

use std::path::PathBuf;

use shepard_cv::experiment::log_spaced;
use shepard_cv::io::{write_aggregates_csv, write_records_csv};
use shepard_cv::{run_experiment, ExperimentConfig};

fn main() -> shepard_cv::Result<()> {
    let out = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "experiment_out".into()),
    );
    std::fs::create_dir_all(&out)?;
    let cfg = ExperimentConfig {
        n: 1000,
        trials: 50,
        h_grid: log_spaced(40.0, 400.0, 8),
        seed: 9,
        ..Default::default()
    };
    let (records, rows) = run_experiment(&cfg)?;
    write_records_csv(&records, out.join("records.csv"))?;
    write_aggregates_csv(&rows, out.join("aggregates.csv"))?;
    println!(
        "{:>8} {:>11} {:>11} {:>11} {:>11} {:>6}",
        "h", "mean cv", "mean risk", "q90 |d|", "eps diff", "gamma"
    );
    for r in &rows {
        println!(
            "{:>8.1} {:>11.3e} {:>11.3e} {:>11.3e} {:>11.3e} {:>6.3}",
            r.h, r.mean_cv, r.mean_risk, r.q90_absdiff, r.eps_diff, r.gamma
        );
    }
    println!("wrote {} records to {}", records.len(), out.display());
    Ok(())
}
