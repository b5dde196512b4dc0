//! Rankings, rank distance, pairwise majorities, Rank Centrality and top-K
//! utilities.
//!
//! `cargo run --example evaluation`

use transport_ratings::evaluation::{
    btl_scores, pairwise_agreement, pairwise_counts, rank_distance_d1, ranking_from_scores, utility_report,
};
use transport_ratings::incomplete::incomplete_aggregate;
use transport_ratings::simulation::{generate_incomplete, AlphaLaw, AssignmentConfig, AtomSupport, SimulationConfig};

fn main() -> transport_ratings::Result<()> {
    let config = SimulationConfig {
        atoms: AtomSupport::UniformGrid(40),
        users: 150,
        alpha: AlphaLaw::section85(),
        replications: 1,
        seed: 11,
    };
    let (data, _) = generate_incomplete(&config, AssignmentConfig { raters_per_item: 60 })?;
    let agg = incomplete_aggregate(&data);
    let avg = ranking_from_scores(&agg.average);
    let rating = ranking_from_scores(&agg.rating);
    println!("d1(avg, rating) = {:.4}", rank_distance_d1(&avg, &rating)?);

    let counts = pairwise_counts(&data);
    for table in [&agg.average, &agg.rating] {
        let a = pairwise_agreement(table, &counts)?;
        println!(
            "{:<7} agrees with {}/{} pairwise majorities ({:.1}%)",
            table.tag().as_str(),
            a.agreeing_pairs,
            a.eligible_pairs,
            100.0 * a.fraction
        );
    }

    let btl = btl_scores(&counts)?;
    let btl_ranking = ranking_from_scores(&btl.scores);
    println!(
        "Rank Centrality: connected {}, d1 to rating {:.4}, top three {:?}",
        btl.connected,
        rank_distance_d1(&btl_ranking, &rating)?,
        &btl_ranking.ordered()[..3]
    );

    for k in [5, 10] {
        for (name, r, other) in [("avg", &avg, &rating), ("rating", &rating, &avg)] {
            let u = utility_report(&data, r, Some(other), k)?;
            println!("top-{k} {name:<7} u1 {:.4} u2 {:.4} u3 {:.4}", u.u1, u.u2, u.u3);
        }
    }
    Ok(())
}
