//! Quantiles, W2 distance and the monotone transport map between two users'
//! rating distributions.
//!
//! `cargo run --example transport`

use transport_ratings::{pushforward, transport_map, w2_distance, EmpiricalDistribution};

fn main() -> transport_ratings::Result<()> {
    // A harsh rater and a generous one, each rating five items.
    let harsh = EmpiricalDistribution::from_samples(&[0.1, 0.2, 0.2, 0.4, 0.6])?;
    let generous = EmpiricalDistribution::from_samples(&[0.5, 0.7, 0.8, 0.9, 1.0])?;

    println!("harsh mean {:.3}, generous mean {:.3}", harsh.mean(), generous.mean());
    for p in [0.2, 0.5, 0.9] {
        println!("quantile({p}): harsh {:.2}, generous {:.2}", harsh.quantile(p)?, generous.quantile(p)?);
    }
    println!("W2 = {:.4}", w2_distance(&harsh, &generous));

    for x in [0.1, 0.2, 0.4, 0.6] {
        println!("harsh {x:.1} reads as generous {:.1}", transport_map(&harsh, &generous, x));
    }

    let moved = pushforward(&harsh, |x| Some(transport_map(&harsh, &generous, x)))?;
    println!("pushed atoms: {:?}", moved.atoms().collect::<Vec<_>>());
    Ok(())
}
