//! Monte Carlo experiments: closed forms for a three-user model, the
//! contrarian-user comparison, convergence rates and Glivenko-Cantelli
//! checks for random measures.
//!
//! `cargo run --release --example experiments`

use transport_ratings::simulation::{
    convergence_experiment, example51, gc_experiment, loglog_slope, replication_losses, section85_config,
    AlphaLaw, AtomSupport, MeasureLaw, SimulationConfig,
};
use transport_ratings::EstimatorTag;

fn main() -> transport_ratings::Result<()> {
    for c in example51(1000)? {
        println!("{:<9} loss {:.5} closed form {:.5}", c.estimator.as_str(), c.loss, c.closed_form);
    }

    let rows = replication_losses(&section85_config(0))?;
    let wins = rows.iter().filter(|r| r.rating < r.average).count();
    println!("rating beats average in {wins}/{} replications", rows.len());

    let config = SimulationConfig {
        atoms: AtomSupport::UniformGrid(20),
        users: 1,
        alpha: AlphaLaw::section85(),
        replications: 50,
        seed: 2,
    };
    let rows = convergence_experiment(&config, &[25, 100, 400], &[EstimatorTag::Rating])?;
    for r in &rows {
        println!("n={:<4} mean {:.5} sd {:.5} bound {:.3}", r.n, r.mean_loss, r.sd_loss, r.bound.unwrap_or(f64::NAN));
    }
    println!("log-log slope {:.3}", loglog_slope(&rows));

    let law = MeasureLaw::Power { a: 0.5, b: 2.0 };
    for r in gc_experiment(&law, &[3, 30, 300], 20, 4)? {
        println!("gc n={:<4} sup {:.4} <= {:.4}", r.n, r.mean_loss, r.bound.unwrap());
    }
    Ok(())
}
