//! The mesh-norm failure probability: exact alternating sum, Gumbel limit, simulation.

use shepard_cv::experiment::log_spaced;
use shepard_cv::{estimate_event_probability, gamma_gumbel, gamma_upper};

fn main() -> shepard_cv::Result<()> {
    let n = 10_000;
    let hs = log_spaced(500.0, 2500.0, 9);
    let empirical = estimate_event_probability(n, &hs, 200, 5)?;
    println!(
        "{:>8} {:>10} {:>10} {:>10} {:>6}",
        "h", "sum", "gumbel", "simulated", "bits"
    );
    for (h, p) in empirical {
        let g = gamma_upper(n as u64, h)?;
        println!(
            "{h:>8.1} {:>10.6} {:>10.6} {p:>10.3} {:>6}",
            g.value,
            gamma_gumbel(n as u64, h)?.value,
            g.precision_bits
        );
    }
    Ok(())
}
