//! Datasets: manifest files, image IO, the built-in font, synthetic word
//! rendering, and lexicon statistics.

pub mod font;
pub mod image;
pub mod synth;
mod words;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub use font::FontStyle;
pub use image::{ImageTensor, CHANNELS};
pub use synth::{generate_dataset, ink_straightness, render_word, SynthesisSpec};

use crate::error::{Error, Result};
use crate::vocab::Vocabulary;

/// One dataset entry: an image path relative to the manifest plus its
/// transcript.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestRecord {
    pub image: PathBuf,
    pub transcript: String,
}

/// A validated dataset: every record's transcript is non-empty and encodable,
/// and every image file exists. Duplicate image paths are legal and keep
/// their order.
#[derive(Debug, Clone)]
pub struct DatasetManifest {
    pub root: PathBuf,
    pub name: String,
    pub records: Vec<ManifestRecord>,
}

impl DatasetManifest {
    /// Load a tab-separated `relative/path<TAB>transcript` file. Fully empty
    /// lines are ignored; anything else malformed reports its line number.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading manifest {}", path.display()), e))?;
        let root = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        let vocab = Vocabulary::standard();
        let mut records = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            if raw.is_empty() {
                continue;
            }
            let Some((image, transcript)) = raw.split_once('\t') else {
                return Err(Error::Manifest {
                    path: path.to_path_buf(),
                    line,
                    message: "expected `image<TAB>transcript`".into(),
                });
            };
            if image.is_empty() {
                return Err(Error::Manifest {
                    path: path.to_path_buf(),
                    line,
                    message: "empty image path".into(),
                });
            }
            if transcript.is_empty() {
                return Err(Error::Manifest {
                    path: path.to_path_buf(),
                    line,
                    message: "empty transcript".into(),
                });
            }
            if let Err(e) = vocab.encode_text(transcript) {
                return Err(Error::Manifest {
                    path: path.to_path_buf(),
                    line,
                    message: format!("transcript not encodable: {e}"),
                });
            }
            let image_path = PathBuf::from(image);
            if !root.join(&image_path).is_file() {
                return Err(Error::MissingImage {
                    path: path.to_path_buf(),
                    line,
                    image: image_path,
                });
            }
            records.push(ManifestRecord {
                image: image_path,
                transcript: transcript.to_string(),
            });
        }
        if records.is_empty() {
            return Err(Error::EmptyDataset(format!(
                "manifest {} has no records",
                path.display()
            )));
        }
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into());
        Ok(Self { root, name, records })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Absolute path of record `i`'s image.
    pub fn resolve(&self, i: usize) -> PathBuf {
        self.root.join(&self.records[i].image)
    }

    pub fn load_image(&self, i: usize) -> Result<ImageTensor> {
        ImageTensor::load(&self.resolve(i))
    }
}

/// Write records as the tab-separated manifest format.
pub fn save_manifest(records: &[ManifestRecord], path: &Path) -> Result<()> {
    let mut out = String::new();
    for r in records {
        writeln!(out, "{}\t{}", r.image.display(), r.transcript).expect("string write");
    }
    std::fs::write(path, out)
        .map_err(|e| Error::io(format!("writing manifest {}", path.display()), e))
}

/// Character counts over a dataset's transcripts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CharFrequencyHistogram {
    counts: BTreeMap<char, u64>,
}

impl CharFrequencyHistogram {
    pub fn count(&self, c: char) -> u64 {
        self.counts.get(&c).copied().unwrap_or(0)
    }

    /// Total characters counted (sums to total transcript length).
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (char, u64)> + '_ {
        self.counts.iter().map(|(&c, &n)| (c, n))
    }

    /// `max count / min nonzero count`; 1.0 when at most one distinct
    /// character appears.
    pub fn imbalance_ratio(&self) -> f64 {
        let max = self.counts.values().max().copied().unwrap_or(0);
        let min = self.counts.values().filter(|&&n| n > 0).min().copied().unwrap_or(0);
        if min == 0 {
            1.0
        } else {
            max as f64 / min as f64
        }
    }

    /// Characters sorted rarest-first (count, then codepoint, ascending).
    pub fn rarest_first(&self) -> Vec<(char, u64)> {
        let mut v: Vec<(char, u64)> = self.iter().collect();
        v.sort_by_key(|&(c, n)| (n, c as u32));
        v
    }
}

/// Exact character counts of a manifest's transcripts plus the imbalance
/// ratio exposed via [`CharFrequencyHistogram::imbalance_ratio`].
pub fn lexicon_frequency(manifest: &DatasetManifest) -> Result<CharFrequencyHistogram> {
    if manifest.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "manifest {} has no transcripts to count",
            manifest.name
        )));
    }
    let mut h = CharFrequencyHistogram::default();
    for r in &manifest.records {
        for c in r.transcript.chars() {
            *h.counts.entry(c).or_insert(0) += 1;
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_manifest(dir: &Path, lines: &[&str]) -> PathBuf {
        let path = dir.join("manifest.tsv");
        std::fs::write(&path, lines.join("\n")).unwrap();
        path
    }

    fn touch_image(dir: &Path, rel: &str) {
        let p = dir.join(rel);
        std::fs::create_dir_all(p.parent().unwrap()).unwrap();
        ImageTensor::from_fn(2, 2, |_, _| (0.5, 0.5, 0.5)).save_png(&p).unwrap();
    }

    #[test]
    fn two_line_manifest_loads_two_records() {
        let dir = tempfile::tempdir().unwrap();
        touch_image(dir.path(), "a.png");
        touch_image(dir.path(), "b.png");
        let path = write_manifest(dir.path(), &["a.png\thello", "b.png\tworld"]);
        let m = DatasetManifest::load(&path).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.records[1].transcript, "world");
        assert!(m.resolve(0).ends_with("a.png"));
    }

    #[test]
    fn missing_transcript_column_cites_line() {
        let dir = tempfile::tempdir().unwrap();
        touch_image(dir.path(), "a.png");
        let path = write_manifest(dir.path(), &["a.png\tok", "nontab-line"]);
        match DatasetManifest::load(&path) {
            Err(Error::Manifest { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected manifest error, got {other:?}"),
        }
    }

    #[test]
    fn missing_image_cites_line_and_path() {
        let dir = tempfile::tempdir().unwrap();
        touch_image(dir.path(), "a.png");
        let path = write_manifest(dir.path(), &["a.png\tok", "ghost.png\tok"]);
        match DatasetManifest::load(&path) {
            Err(Error::MissingImage { line, image, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(image, PathBuf::from("ghost.png"));
            }
            other => panic!("expected missing-image error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_paths_are_preserved_in_order() {
        let dir = tempfile::tempdir().unwrap();
        touch_image(dir.path(), "a.png");
        let path = write_manifest(dir.path(), &["a.png\tone", "a.png\ttwo"]);
        let m = DatasetManifest::load(&path).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.records[0].transcript, "one");
        assert_eq!(m.records[1].transcript, "two");
    }

    #[test]
    fn unencodable_transcript_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        touch_image(dir.path(), "a.png");
        let path = write_manifest(dir.path(), &["a.png\tcafé"]);
        assert!(matches!(
            DatasetManifest::load(&path),
            Err(Error::Manifest { line: 1, .. })
        ));
    }

    #[test]
    fn histogram_counts_and_ratio() {
        let dir = tempfile::tempdir().unwrap();
        touch_image(dir.path(), "a.png");
        let path = write_manifest(dir.path(), &["a.png\taa", "a.png\tab"]);
        let m = DatasetManifest::load(&path).unwrap();
        let h = lexicon_frequency(&m).unwrap();
        assert_eq!(h.count('a'), 3);
        assert_eq!(h.count('b'), 1);
        assert_eq!(h.total(), 4);
        assert_eq!(h.imbalance_ratio(), 3.0);
    }

    #[test]
    fn histogram_single_transcript() {
        let dir = tempfile::tempdir().unwrap();
        touch_image(dir.path(), "z.png");
        let path = write_manifest(dir.path(), &["z.png\tz"]);
        let m = DatasetManifest::load(&path).unwrap();
        let h = lexicon_frequency(&m).unwrap();
        assert_eq!(h.count('z'), 1);
        assert_eq!(h.total(), 1);
        assert_eq!(h.imbalance_ratio(), 1.0);
    }

    #[test]
    fn save_and_reload_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        touch_image(dir.path(), "images/x.png");
        let records = vec![ManifestRecord {
            image: "images/x.png".into(),
            transcript: "Zig42".into(),
        }];
        let path = dir.path().join("manifest.tsv");
        save_manifest(&records, &path).unwrap();
        let m = DatasetManifest::load(&path).unwrap();
        assert_eq!(m.records, records);
    }

    #[test]
    fn generated_sample_shows_lexicon_imbalance() {
        // the qualitative long-tail check on the built-in list: a character
        // histogram over a 1000-word draw is strongly imbalanced
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let pool = SynthesisSpec::default();
        let pool = pool.word_pool();
        let mut h = CharFrequencyHistogram::default();
        for _ in 0..1000 {
            let w = pool[rng.gen_range(0..pool.len())];
            for c in w.chars() {
                *h.counts.entry(c).or_insert(0) += 1;
            }
        }
        assert!(h.imbalance_ratio() > 10.0, "ratio {}", h.imbalance_ratio());
    }
}
