//! Estimators when each item is rated by a random subset of users.
//!
//! `cargo run --example sparse_aggregate`

use transport_ratings::estimators::l2_loss;
use transport_ratings::incomplete::incomplete_aggregate;
use transport_ratings::simulation::{
    consensus_gap, generate_incomplete, required_raters, AlphaLaw, AssignmentConfig, AtomSupport,
    SimulationConfig,
};

fn main() -> transport_ratings::Result<()> {
    let config = SimulationConfig {
        atoms: AtomSupport::UniformGrid(20),
        users: 400,
        alpha: AlphaLaw::section85(),
        replications: 1,
        seed: 3,
    };
    let delta = consensus_gap(&config, 100_000, 1)?;
    println!("consensus gap {delta:.4}, suggested raters per item {}", required_raters(delta, config.users));

    for q in [10, 40, 160, 400] {
        let (data, truth) = generate_incomplete(&config, AssignmentConfig { raters_per_item: q })?;
        let agg = incomplete_aggregate(&data);
        println!(
            "q={q:>3}: users kept {:>3}, loss avg {:.4}, primitive {:.4}, rating {:.4}",
            data.user_count(),
            l2_loss(&agg.average, &truth)?,
            l2_loss(&agg.primitive, &truth)?,
            l2_loss(&agg.rating, &truth)?,
        );
    }
    Ok(())
}
