//! Loading rating files, mapping them onto `[0, 1]`, and pruning sparse
//! users and items.

use std::collections::HashMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::ScoreTable;
use crate::incomplete::SparseRatings;
use crate::output::{csv_bytes, format_number};

/// Declared rating scale `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleSpec {
    pub min: f64,
    pub max: f64,
}

impl Default for ScaleSpec {
    fn default() -> Self {
        Self {
            min: 1.0,
            max: 10.0,
        }
    }
}

impl ScaleSpec {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::InvalidScale { min, max });
        }
        Ok(Self { min, max })
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }

    pub fn contains(&self, r: f64) -> bool {
        (self.min..=self.max).contains(&r)
    }

    pub fn normalize(&self, r: f64) -> f64 {
        ((r - self.min) / self.width()).clamp(0.0, 1.0)
    }

    pub fn denormalize(&self, x: f64) -> f64 {
        self.min + x * self.width()
    }
}

const HEADER: [&str; 3] = ["user_id", "item_id", "rating"];

/// Read a `user_id,item_id,rating` CSV file and normalize its ratings.
pub fn load_ratings(path: impl AsRef<Path>, scale: ScaleSpec) -> Result<SparseRatings> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(format!("open {}", path.display()), e))?;
    read_ratings(file, &path.display().to_string(), scale)
}

/// [`load_ratings`] from any reader; `source` names the input in errors.
pub fn read_ratings<R: Read>(reader: R, source: &str, scale: ScaleSpec) -> Result<SparseRatings> {
    let scale = ScaleSpec::new(scale.min, scale.max)?;
    let parse_error = |row: usize, column: &str, message: String| Error::Parse {
        path: source.to_string(),
        row,
        column: column.to_string(),
        message,
    };

    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != HEADER {
        return Err(parse_error(
            1,
            "header",
            format!("expected {:?}, found {:?}", HEADER.join(","), header.iter().collect::<Vec<_>>().join(",")),
        ));
    }

    let mut first_row: HashMap<(String, String), usize> = HashMap::new();
    let mut triples = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| record.get(i).unwrap_or("");
        let user = field(0);
        let item = field(1);
        if user.is_empty() {
            return Err(parse_error(row, "user_id", "missing value".into()));
        }
        if item.is_empty() {
            return Err(parse_error(row, "item_id", "missing value".into()));
        }
        let value: f64 = field(2)
            .parse()
            .map_err(|e| parse_error(row, "rating", format!("{:?}: {e}", field(2))))?;
        if !value.is_finite() || !scale.contains(value) {
            return Err(Error::OutOfScale {
                value,
                min: scale.min,
                max: scale.max,
                row,
            });
        }
        let key = (user.to_string(), item.to_string());
        if let Some(&first) = first_row.get(&key) {
            return Err(Error::DuplicatePair {
                user: key.0,
                item: key.1,
                first_row: first,
                second_row: row,
            });
        }
        first_row.insert(key, row);
        triples.push((user.to_string(), item.to_string(), scale.normalize(value)));
    }
    SparseRatings::from_triples(triples)
}

/// One entity dropped by [`filter_min_counts`], with its rating count at the
/// time of removal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Removal {
    pub entity_type: &'static str,
    pub id: String,
    pub count: usize,
}

/// Repeatedly drop users with fewer than `min_user` ratings and items with
/// fewer than `min_item` ratings until neither rule removes anything.
pub fn filter_min_counts(
    data: &SparseRatings,
    min_user: usize,
    min_item: usize,
) -> Result<(SparseRatings, Vec<Removal>)> {
    if min_user == 0 || min_item == 0 {
        return Err(Error::Config("filter thresholds must be at least 1".into()));
    }
    let mut keep_user = vec![true; data.user_count()];
    let mut keep_item = vec![true; data.item_count()];
    let mut log = Vec::new();
    loop {
        let mut user_count = vec![0usize; data.user_count()];
        let mut item_count = vec![0usize; data.item_count()];
        for r in data.entries() {
            if keep_user[r.user] && keep_item[r.item] {
                user_count[r.user] += 1;
                item_count[r.item] += 1;
            }
        }
        let mut changed = false;
        for (k, &c) in user_count.iter().enumerate() {
            if keep_user[k] && c < min_user {
                keep_user[k] = false;
                changed = true;
                log.push(Removal {
                    entity_type: "user",
                    id: data.users()[k].clone(),
                    count: c,
                });
            }
        }
        if changed {
            continue;
        }
        for (x, &c) in item_count.iter().enumerate() {
            if keep_item[x] && c < min_item {
                keep_item[x] = false;
                changed = true;
                log.push(Removal {
                    entity_type: "item",
                    id: data.items()[x].clone(),
                    count: c,
                });
            }
        }
        if !changed {
            break;
        }
    }
    let filtered = data
        .restrict(&keep_user, &keep_item)
        .ok_or(Error::EmptyAfterFilter { min_user, min_item })?;
    Ok((filtered, log))
}

pub fn removal_log_csv(log: &[Removal]) -> Result<Vec<u8>> {
    csv_bytes(
        &["entity_type", "id", "count"],
        log.iter()
            .map(|r| vec![r.entity_type.to_string(), r.id.clone(), r.count.to_string()]),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramBin {
    /// Lower edge on the original scale.
    pub lower: f64,
    pub count: usize,
}

/// Equal-width histogram of `scores` over the original scale. Every bin is
/// half-open except the last, which also holds the scale maximum.
pub fn histogram(scores: &ScoreTable, bins: usize, scale: ScaleSpec) -> Result<Vec<HistogramBin>> {
    if bins == 0 {
        return Err(Error::Config("need at least one histogram bin".into()));
    }
    let mut counts = vec![0usize; bins];
    for &s in scores.scores() {
        let b = ((s * bins as f64).floor() as usize).min(bins - 1);
        counts[b] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistogramBin {
            lower: scale.denormalize(i as f64 / bins as f64),
            count,
        })
        .collect())
}

pub fn histogram_csv(bins: &[HistogramBin]) -> Result<Vec<u8>> {
    csv_bytes(
        &["bin_lower", "count"],
        bins.iter()
            .map(|b| vec![format_number(b.lower), b.count.to_string()]),
    )
}
