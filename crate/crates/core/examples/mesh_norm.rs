//! Mesh norm, leave-one-out mesh norms and membership in the good set.

use shepard_cv::{sample_uniform, NodeSet};

fn main() -> shepard_cv::Result<()> {
    let ns = NodeSet::new(&[0.0, 0.1, 0.1, 0.2, 0.3])?;
    println!("gaps      {:?}", ns.gaps());
    println!("mesh norm {}", ns.mesh_norm());
    println!("loo       {:?}", ns.loo_mesh_norms()?);

    let nodes = sample_uniform(42, 10_000)?;
    let worst = nodes.max_loo_mesh_norm()?;
    println!(
        "n = 10000: mesh norm {:.3e}, max loo {:.3e}",
        nodes.mesh_norm(),
        worst
    );
    for h in [500.0, 1000.0, 1500.0, 2000.0] {
        println!("  h = {h:>6}: in good set = {}", nodes.xi_membership(h)?);
    }
    Ok(())
}
