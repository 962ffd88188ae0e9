//! Any profile supported on [0, 1/h] can stand in for the hat.

use shepard_cv::{
    loo_cv_fast, sample_uniform, KernelFamily, SampleSet, TestFunction, UndefinedPolicy,
};

fn main() -> shepard_cv::Result<()> {
    let h = 60.0;
    let quartic = KernelFamily::custom("quartic", h, move |t: f64| {
        (1.0 - (h * t).powi(2)).max(0.0).powi(2)
    })?;
    let hat = KernelFamily::hat(h)?;
    let samples = SampleSet::from_function(sample_uniform(3, 1000)?, &TestFunction::sine());
    for k in [&hat, &quartic] {
        let cv = loo_cv_fast(&samples, k, UndefinedPolicy::NearestNode)?;
        println!("{:>8}: CV = {:.4e}", k.name(), cv.score);
    }
    Ok(())
}
