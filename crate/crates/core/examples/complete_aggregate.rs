//! Average, primitive and rating estimators on a complete ratings matrix,
//! with the loss split into order and scale parts against a known truth.
//!
//! `cargo run --example complete_aggregate`

use transport_ratings::estimators::{aggregate, loss_decomposition};
use transport_ratings::simulation::{generate_complete, AlphaLaw, AtomSupport, SimulationConfig};

fn main() -> transport_ratings::Result<()> {
    let config = SimulationConfig {
        atoms: AtomSupport::UniformGrid(30),
        users: 200,
        alpha: AlphaLaw::section85(),
        replications: 1,
        seed: 7,
    };
    let (data, truth) = generate_complete(&config)?;
    let agg = aggregate(&data);

    println!("{:<10} {:>8} {:>8} {:>8}", "estimator", "total", "scale", "order");
    for table in [&agg.average, &agg.primitive, &agg.rating] {
        let d = loss_decomposition(table, &truth)?;
        println!(
            "{:<10} {:>8.5} {:>8.5} {:>8.5}",
            table.tag().as_str(),
            d.total,
            d.scale_term,
            d.order_term
        );
    }
    Ok(())
}
