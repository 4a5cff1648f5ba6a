//! Labeled image directories: `root/<class>/<image>.pgm`.

use std::fs;
use std::path::{Path, PathBuf};

use hccr_core::data::{shuffle_split, Dataset};

use crate::error::{read_file, write_file, Error, Result};
use crate::pgm::{read_pgm, write_pgm};

pub const MANIFEST: &str = "manifest.tsv";
/// Fraction used when a data directory has no `train/` and `test/` halves.
pub const DEFAULT_TRAIN_FRACTION: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Train,
    Test,
}

impl Part {
    pub fn dir_name(self) -> &'static str {
        match self {
            Part::Train => "train",
            Part::Test => "test",
        }
    }
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut entries = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<Vec<_>>>()?;
    entries.sort();
    Ok(entries)
}

/// Loads every `*.pgm` under one subdirectory per class. Class indices
/// follow `classes` when given, otherwise the sorted subdirectory names.
/// Unreadable images are skipped and counted in a warning.
pub fn load_image_dir_with_classes(root: &Path, classes: Option<&[String]>) -> Result<Dataset> {
    let class_dirs: Vec<PathBuf> = sorted_entries(root)?.into_iter().filter(|p| p.is_dir()).collect();
    if class_dirs.is_empty() {
        return Err(Error::Invalid(format!("{}: no class subdirectories", root.display())));
    }
    let mut ds = match classes {
        Some(names) => Dataset::with_classes(names.iter().cloned()),
        None => Dataset::with_classes(class_dirs.iter().filter_map(|p| Some(p.file_name()?.to_string_lossy().into_owned()))),
    };
    let mut skipped = 0;
    for dir in &class_dirs {
        let name = dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        if ds.class_index(&name).is_none() {
            return Err(Error::Invalid(format!("{}: class {:?} missing from the manifest", root.display(), name)));
        }
        for file in sorted_entries(dir)? {
            if file.extension().is_none_or(|e| !e.eq_ignore_ascii_case("pgm")) {
                continue;
            }
            match read_pgm(&file) {
                Ok(img) => {
                    ds.push(img, &name);
                }
                Err(e) => {
                    log::debug!("skipping {}: {}", file.display(), e);
                    skipped += 1;
                }
            }
        }
    }
    if skipped > 0 {
        log::warn!("{}: skipped {} unreadable image(s)", root.display(), skipped);
    }
    Ok(ds)
}

pub fn load_image_dir(root: &Path) -> Result<Dataset> {
    load_image_dir_with_classes(root, None)
}

/// Writes `root/<class>/<nnnnn>.pgm` for every sample.
pub fn write_image_dir(root: &Path, dataset: &Dataset) -> Result<()> {
    for (i, s) in dataset.samples.iter().enumerate() {
        write_pgm(&root.join(&s.class_name).join(format!("{:05}.pgm", i)), &s.image)?;
    }
    Ok(())
}

/// One `<class_name>\t<index>` line per class.
pub fn write_manifest(path: &Path, class_names: &[String]) -> Result<()> {
    let text: String = class_names
        .iter()
        .enumerate()
        .map(|(i, n)| format!("{}\t{}\n", n, i))
        .collect();
    write_file(path, text.as_bytes())
}

pub fn read_manifest(path: &Path) -> Result<Vec<String>> {
    let text = String::from_utf8(read_file(path)?)
        .map_err(|e| Error::format(&path.display().to_string(), e.utf8_error().valid_up_to(), "not UTF-8"))?;
    let mut names = Vec::new();
    for (line_no, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let (name, index) = line
            .split_once('\t')
            .ok_or_else(|| Error::Invalid(format!("{}:{}: expected <name>\\t<index>", path.display(), line_no + 1)))?;
        if index.trim().parse::<usize>().ok() != Some(names.len()) {
            return Err(Error::Invalid(format!(
                "{}:{}: index {:?} out of sequence",
                path.display(),
                line_no + 1,
                index
            )));
        }
        names.push(name.to_string());
    }
    Ok(names)
}

/// The requested half of a data directory. Uses `root/train` and
/// `root/test` when both exist; otherwise splits `root` itself with a
/// stratified shuffle seeded by `seed`.
pub fn load_data_dir(root: &Path, part: Part, seed: u64) -> Result<Dataset> {
    let manifest = root.join(MANIFEST);
    let classes = if manifest.is_file() { Some(read_manifest(&manifest)?) } else { None };
    let (train, test) = (root.join("train"), root.join("test"));
    if train.is_dir() && test.is_dir() {
        let dir = if part == Part::Train { train } else { test };
        return load_image_dir_with_classes(&dir, classes.as_deref());
    }
    let all = load_image_dir_with_classes(root, classes.as_deref())?;
    let (tr, te) = shuffle_split(&all, DEFAULT_TRAIN_FRACTION, seed)?;
    Ok(if part == Part::Train { tr } else { te })
}
