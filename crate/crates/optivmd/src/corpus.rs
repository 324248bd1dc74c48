//! Recursive corpus scans with filename-derived labels.

use std::path::{Path, PathBuf};

use optivmd_core::signal::parse_label;
use optivmd_core::{Convention, Emotion, SignalError};
use walkdir::WalkDir;

#[derive(Debug)]
pub struct CorpusEntry {
    pub path: PathBuf,
    pub label: Result<Emotion, SignalError>,
}

/// Every `*.wav` (case-insensitive) below `root`, sorted by path.
pub fn scan_corpus(root: &Path, convention: Convention) -> std::io::Result<Vec<CorpusEntry>> {
    if !root.is_dir() {
        return Err(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("{} is not a directory", root.display()),
        ));
    }
    let mut paths: Vec<PathBuf> = WalkDir::new(root)
        .follow_links(true)
        .into_iter()
        .filter_map(Result::ok)
        .filter(|e| e.file_type().is_file())
        .map(|e| e.into_path())
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("wav")))
        .collect();
    paths.sort();
    Ok(paths
        .into_iter()
        .map(|path| {
            let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            CorpusEntry {
                label: parse_label(&name, convention),
                path,
            }
        })
        .collect())
}

/// Output name for a corpus file: its path relative to `root` with separators
/// replaced by `__` and the extension swapped for `.fmap`.
pub fn fmap_name(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path).with_extension("fmap");
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("__")
}
