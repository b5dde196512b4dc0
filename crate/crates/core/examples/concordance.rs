//! Kendall's W and its two rating generalizations.
//!
//! `cargo run --example concordance`

use transport_ratings::concordance::{concordance_limits, concordance_report, kendalls_w, ranks_to_ratings};
use transport_ratings::simulation::AlphaLaw;
use transport_ratings::CompleteRatings;

fn main() -> transport_ratings::Result<()> {
    let ranks = vec![vec![1, 2, 3, 4, 5], vec![2, 1, 3, 5, 4], vec![1, 3, 2, 4, 5]];
    let rows: Vec<Vec<f64>> = ranks.iter().map(|r| ranks_to_ratings(r)).collect::<Result<_, _>>()?;
    let report = concordance_report(&CompleteRatings::from_rows(&rows)?)?;
    println!("Kendall's W {:.4}", kendalls_w(&ranks)?);
    println!("w_ratings   {:.4}", report.w_ratings);
    println!("w_scale     {:.4}", report.w_scale);

    let rows = vec![
        vec![0.1, 0.2, 0.9],
        vec![0.5, 0.6, 0.7],
        vec![0.9, 0.4, 0.1],
    ];
    let report = concordance_report(&CompleteRatings::from_rows(&rows)?)?;
    println!(
        "mixed raters: w_scale {:.4}, w_ratings {:.4}, mean user variance {:.4}",
        report.w_scale,
        report.w_ratings,
        report.mean_user_variance()
    );

    let limits = concordance_limits(&AlphaLaw::section85(), 200_000, 1)?;
    println!(
        "large-sample limits for the contrarian model: w_scale {:.4}, w_ratings {:.4}",
        limits.w_scale, limits.w_ratings
    );
    Ok(())
}
