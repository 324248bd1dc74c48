//! Dataset manifests: CSV with columns `fmap_path,label,split`.
//!
//! `split` is `train`, `test` or empty. Relative paths resolve against the
//! manifest's directory.

use std::path::{Path, PathBuf};

use optivmd_core::dataset::{LabeledDataset, SplitTag};
use serde::{Deserialize, Serialize};

use crate::fmap::{read_fmap, write_fmap, FmapError};

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{path}: {source}")]
    Fmap { path: PathBuf, source: FmapError },
    #[error("unknown split tag {0:?} (expected train, test or empty)")]
    BadSplit(String),
    #[error("manifest has no rows")]
    Empty,
    #[error(transparent)]
    Dataset(#[from] optivmd_core::dataset::DatasetError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub fmap_path: String,
    pub label: String,
    #[serde(default)]
    pub split: String,
}

impl ManifestRow {
    pub fn split_tag(&self) -> Result<Option<SplitTag>, ManifestError> {
        parse_split(&self.split)
    }
}

pub fn parse_split(s: &str) -> Result<Option<SplitTag>, ManifestError> {
    match s.trim() {
        "" => Ok(None),
        "train" => Ok(Some(SplitTag::Train)),
        "test" => Ok(Some(SplitTag::Test)),
        other => Err(ManifestError::BadSplit(other.to_string())),
    }
}

pub fn split_name(tag: Option<SplitTag>) -> &'static str {
    tag.map_or("", SplitTag::name)
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRow>, ManifestError> {
    let mut rdr = csv::Reader::from_path(path)?;
    let rows = rdr.deserialize().collect::<Result<Vec<ManifestRow>, _>>()?;
    for r in &rows {
        r.split_tag()?;
    }
    Ok(rows)
}

pub fn write_manifest(path: &Path, rows: &[ManifestRow]) -> Result<(), ManifestError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Class table: the distinct labels in sorted order.
pub fn class_table(rows: &[ManifestRow]) -> Vec<String> {
    let mut names: Vec<String> = rows.iter().map(|r| r.label.clone()).collect();
    names.sort();
    names.dedup();
    names
}

/// Load every map named by the manifest into a dataset.
pub fn load_dataset(manifest: &Path) -> Result<LabeledDataset, ManifestError> {
    let rows = read_manifest(manifest)?;
    if rows.is_empty() {
        return Err(ManifestError::Empty);
    }
    let base = manifest.parent().unwrap_or(Path::new("."));
    let class_names = class_table(&rows);
    let mut maps = Vec::with_capacity(rows.len());
    let mut labels = Vec::with_capacity(rows.len());
    let mut split = Vec::with_capacity(rows.len());
    for r in &rows {
        let path = resolve(base, &r.fmap_path);
        maps.push(read_fmap(&path).map_err(|source| ManifestError::Fmap { path, source })?);
        labels.push(class_names.binary_search(&r.label).expect("label in table"));
        split.push(r.split_tag()?);
    }
    let mut ds = LabeledDataset::new(maps, labels, class_names)?;
    ds.split = split;
    Ok(ds)
}

/// Write each map as `<prefix><index>.fmap` under `dir` and a manifest next to them.
pub fn save_dataset(
    dataset: &LabeledDataset,
    dir: &Path,
    prefix: &str,
    manifest_name: &str,
) -> Result<PathBuf, ManifestError> {
    std::fs::create_dir_all(dir)?;
    let width = dataset.len().max(1).to_string().len();
    let mut rows = Vec::with_capacity(dataset.len());
    for (i, map) in dataset.maps.iter().enumerate() {
        let name = format!("{prefix}{i:0width$}.fmap");
        let path = dir.join(&name);
        write_fmap(&path, map).map_err(|source| ManifestError::Fmap { path, source })?;
        rows.push(ManifestRow {
            fmap_path: name,
            label: dataset.class_names[dataset.labels[i]].clone(),
            split: split_name(dataset.split[i]).to_string(),
        });
    }
    let manifest = dir.join(manifest_name);
    write_manifest(&manifest, &rows)?;
    Ok(manifest)
}
