//! W2 barycenter of several rating distributions.
//!
//! `cargo run --example barycenter`

use transport_ratings::{frechet_functional, frechet_mean, EmpiricalDistribution};

fn main() -> transport_ratings::Result<()> {
    let users = vec![
        EmpiricalDistribution::from_samples(&[0.1, 0.3, 0.5])?,
        EmpiricalDistribution::from_samples(&[0.6, 0.8, 0.9, 1.0])?,
        EmpiricalDistribution::from_atoms([(0.2, 0.5), (0.7, 0.5)])?,
    ];
    let bary = frechet_mean(&users)?;
    let d = bary.distribution();
    println!("barycenter atoms:");
    for (x, w) in d.atoms() {
        println!("  {x:.4}  weight {w:.4}");
    }
    println!("mean squared W2 to inputs: {:.5}", frechet_functional(d, &users)?);
    for (k, u) in users.iter().enumerate() {
        println!("  using user {k} instead: {:.5}", frechet_functional(u, &users)?);
    }
    Ok(())
}
