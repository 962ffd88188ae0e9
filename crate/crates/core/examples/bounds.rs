//! Tail probabilities, certified radii and the quantile bound for Shepard's model.

use shepard_cv::{
    epsilon_bound, gamma_upper, quantile_bound_shepard, tail_probability, validity_threshold,
    BoundParams, TailKind, TestFunction, ALPHA_CV, ALPHA_DIFF, ALPHA_RISK,
};

fn main() -> shepard_cv::Result<()> {
    let f = TestFunction::sine();
    let (n, h) = (10_000u64, 300.0);
    let gamma = gamma_upper(n, h)?.value;
    let p = BoundParams::shepard(n, h, f.lipschitz(), f.sup_norm(), gamma)?;
    println!("n = {n}, h = {h}, gamma = {gamma:.3e}");

    for kind in [TailKind::Risk, TailKind::Cv, TailKind::Diff] {
        let t = validity_threshold(kind, &p, true);
        let eps = 0.05;
        println!(
            "{kind:?}: threshold {t:.3e}, P(dev > {eps}) <= {:.4}",
            tail_probability(kind, eps, &p, true)?
        );
    }
    for (name, alpha) in [("risk", ALPHA_RISK), ("cv", ALPHA_CV), ("diff", ALPHA_DIFF)] {
        println!(
            "eps_{name} at p_fail = 0.1: {:.4e}",
            epsilon_bound(alpha, f.lipschitz(), h, n, gamma, 0.1)?
        );
    }
    println!(
        "90% quantile bound on |CV - risk|: {:.4e}",
        quantile_bound_shepard(&p, 0.05)?
    );
    Ok(())
}
