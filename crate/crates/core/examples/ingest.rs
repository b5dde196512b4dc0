//! Load a ratings CSV, normalize the scale, filter sparse users and items,
//! and bin the resulting scores.
//!
//! `cargo run --example ingest -- path/to/ratings.csv`

use transport_ratings::incomplete::incomplete_aggregate;
use transport_ratings::ingest::{filter_min_counts, histogram, load_ratings, read_ratings};
use transport_ratings::ScaleSpec;

const SAMPLE: &str = "user_id,item_id,rating
alice,dune,9
alice,heat,4
alice,jaws,7
bob,dune,6
bob,heat,2
bob,jaws,5
carol,dune,10
carol,jaws,8
dave,heat,3
";

fn main() -> transport_ratings::Result<()> {
    let scale = ScaleSpec::default();
    let data = match std::env::args().nth(1) {
        Some(path) => load_ratings(path, scale)?,
        None => read_ratings(SAMPLE.as_bytes(), "sample", scale)?,
    };
    println!("{} ratings from {} users on {} items", data.len(), data.user_count(), data.item_count());

    let (kept, removed) = filter_min_counts(&data, 2, 2)?;
    for r in &removed {
        println!("removed {} {} ({} ratings)", r.entity_type, r.id, r.count);
    }

    let agg = incomplete_aggregate(&kept);
    for (item, x) in agg.rating.iter() {
        println!("{item:<6} {:.2}", scale.denormalize(x));
    }
    for bin in histogram(&agg.rating, 3, scale)? {
        println!("[{:.1}, ...) {}", bin.lower, bin.count);
    }
    Ok(())
}
