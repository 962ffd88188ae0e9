//! Choose h by leave-one-out cross-validation and compare with the true risk.

use std::time::Instant;

use shepard_cv::experiment::log_spaced;
use shepard_cv::{
    loo_cv_fast, loo_cv_naive, sample_uniform, KernelFamily, SampleSet, ShepardModel, TestFunction,
    UndefinedPolicy,
};

fn main() -> shepard_cv::Result<()> {
    let f = TestFunction::sine();
    let n = 2000;
    let samples = SampleSet::from_function(sample_uniform(11, n)?, &f);
    let policy = UndefinedPolicy::NearestNode;

    let mut best = (f64::INFINITY, 0.0);
    println!("{:>8} {:>12} {:>12}", "h", "cv", "risk");
    for h in log_spaced(20.0, 1000.0, 12) {
        let k = KernelFamily::hat(h)?;
        let cv = loo_cv_fast(&samples, &k, policy)?.score;
        let risk = ShepardModel::fit(samples.clone(), k, policy)?.risk_estimate(&f, 10 * n)?;
        println!("{h:>8.1} {cv:>12.4e} {risk:>12.4e}");
        if cv < best.0 {
            best = (cv, h);
        }
    }
    println!("CV picks h = {:.1}", best.1);

    let small = SampleSet::from_function(sample_uniform(12, 300)?, &f);
    let k = KernelFamily::hat(40.0)?;
    let t = Instant::now();
    let fast = loo_cv_fast(&small, &k, policy)?;
    let t_fast = t.elapsed();
    let t = Instant::now();
    let naive = loo_cv_naive(&small, &k, policy)?;
    let t_naive = t.elapsed();
    println!(
        "n = 300: fast {:.12e} in {t_fast:?}, naive {:.12e} in {t_naive:?}",
        fast.score, naive.score
    );
    Ok(())
}
