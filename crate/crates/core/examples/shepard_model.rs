//! Fit Shepard's model to samples of the test function and look at the error.

use shepard_cv::{
    sample_uniform, KernelFamily, SampleSet, ShepardModel, TestFunction, UndefinedPolicy,
};

fn main() -> shepard_cv::Result<()> {
    let f = TestFunction::sine();
    let samples = SampleSet::from_function(sample_uniform(1, 400)?, &f);

    for h in [10.0, 40.0, 160.0] {
        let model = ShepardModel::fit(
            samples.clone(),
            KernelFamily::hat(h)?,
            UndefinedPolicy::NearestNode,
        )?;
        let grid = 10 * samples.len();
        println!(
            "h = {h:>5}: R(0.25) = {:+.5} (f = {:+.5}), risk {:.3e}, sup error {:.3e}",
            model.evaluate(0.25)?,
            f.eval(0.25),
            model.risk_estimate(&f, grid)?,
            model.sup_error(&f, grid)?,
        );
    }

    // two far-apart nodes and a narrow kernel leave most of the torus uncovered
    let sparse = SampleSet::new(&[0.1, 0.6], &[1.0, -1.0])?;
    let strict = ShepardModel::fit(
        sparse.clone(),
        KernelFamily::hat(20.0)?,
        UndefinedPolicy::Error,
    )?;
    println!("strict policy at 0.3: {:?}", strict.evaluate(0.3));
    let lenient = ShepardModel::fit(
        sparse,
        KernelFamily::hat(20.0)?,
        UndefinedPolicy::NearestNode,
    )?;
    println!("nearest-node policy at 0.3: {:?}", lenient.evaluate(0.3));
    Ok(())
}
