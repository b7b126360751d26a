//! Demonstration path ingest: CSV reading, writing, and train/test splits.
//!
//! The interchange format is one row per point, `path_id,x,y` with an
//! optional trailing `heading` column. Rows of one path are contiguous and
//! kept in file order.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::SampledPath;

/// A demonstration path as read from disk, before resampling.
#[derive(Debug, Clone, PartialEq)]
pub struct RawPath {
    pub id: String,
    pub points: Vec<[f64; 2]>,
}

/// An arc-length sampled path with its identifier.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedPath {
    pub id: String,
    pub path: SampledPath,
}

fn check_header(headers: &csv::StringRecord) -> Result<()> {
    let expected = ["path_id", "x", "y"];
    for (i, want) in expected.iter().enumerate() {
        match headers.get(i) {
            Some(got) if got.trim() == *want => {}
            _ => return Err(Error::MissingHeader),
        }
    }
    Ok(())
}

fn parse_coord(field: &str, row: usize, name: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("row {row}: bad {name} value {:?}", field.trim())))
}

/// Reads raw demonstration paths. Rows with the same `path_id` must be
/// contiguous; an identifier that reappears after another path started is
/// rejected rather than silently merged.
pub fn read_paths_csv(path: &Path) -> Result<Vec<RawPath>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::File(path.display().to_string(), std::io::Error::other(e)))?;
    check_header(reader.headers()?)?;
    let mut paths: Vec<RawPath> = Vec::new();
    let mut seen: std::collections::HashSet<String> = std::collections::HashSet::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 2;
        let id = record
            .get(0)
            .ok_or_else(|| Error::Parse(format!("row {row}: missing path_id")))?
            .trim()
            .to_string();
        let x = parse_coord(
            record
                .get(1)
                .ok_or_else(|| Error::Parse(format!("row {row}: missing x")))?,
            row,
            "x",
        )?;
        let y = parse_coord(
            record
                .get(2)
                .ok_or_else(|| Error::Parse(format!("row {row}: missing y")))?,
            row,
            "y",
        )?;
        match paths.last_mut() {
            Some(last) if last.id == id => last.points.push([x, y]),
            _ => {
                if !seen.insert(id.clone()) {
                    return Err(Error::Parse(format!(
                        "row {row}: path id {id:?} reappears after another path"
                    )));
                }
                paths.push(RawPath {
                    id,
                    points: vec![[x, y]],
                });
            }
        }
    }
    Ok(paths)
}

/// Reads sampled paths back from the interchange format, rebuilding chord
/// headings from the coordinates; a stored heading column is ignored.
pub fn read_sampled_csv(path: &Path, delta: f64) -> Result<Vec<NamedPath>> {
    read_paths_csv(path)?
        .into_iter()
        .map(|raw| {
            let path = SampledPath::from_points(delta, raw.points)?;
            Ok(NamedPath { id: raw.id, path })
        })
        .collect()
}

/// Writes sampled paths as `path_id,x,y,heading` rows. Coordinates are
/// written in shortest round-trip form so a read back is bit exact.
pub fn write_sampled_csv(path: &Path, paths: &[NamedPath]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| Error::File(path.display().to_string(), std::io::Error::other(e)))?;
    writer.write_record(["path_id", "x", "y", "heading"])?;
    for np in paths {
        for (point, heading) in np.path.points.iter().zip(np.path.headings.iter()) {
            writer.serialize((&np.id, point[0], point[1], heading))?;
        }
    }
    writer.flush()?;
    Ok(())
}

/// Splits `n` items into train and test index sets by seeded shuffle.
/// `split` is the train fraction; the train count is rounded to nearest.
/// Both outputs are sorted ascending.
pub fn split_indices(n: usize, split: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(0.0..=1.0).contains(&split) {
        return Err(Error::InvalidParameter(format!(
            "split fraction {split} outside [0, 1]"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let train_count = ((split * n as f64).round() as usize).min(n);
    let mut train = order[..train_count].to_vec();
    let mut test = order[train_count..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}
