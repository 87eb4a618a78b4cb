//! On-disk dataset layout and train/test bookkeeping.
//!
//! A dataset directory holds `manifest.json` plus one PGM per raster at
//! `clips/<id>/{gray,depth,boxmask,fingermask}/<frame_index>.pgm`. Paths in
//! the manifest are relative to the manifest's directory.

pub mod pgm;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Component, Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::synth::SynthConfig;
use crate::types::{CupSize, Frame, MaskPair, Quadrant};

pub const FORMAT_VERSION: &str = "1";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

/// A recorded (or synthesized) palpation clip of one quadrant.
#[derive(Debug, Clone, PartialEq)]
pub struct Clip {
    pub id: String,
    pub cup: CupSize,
    pub quadrant: Quadrant,
    pub split: Split,
    pub frames: Vec<Frame>,
    /// Generator ground-truth finger depth per frame, when known.
    pub truth_depths: Option<Vec<f64>>,
    pub generator: Option<SynthConfig>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FramePaths {
    pub gray: String,
    pub depth: String,
    pub boxmask: String,
    pub fingermask: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClipEntry {
    pub id: String,
    pub cup: CupSize,
    pub quadrant: Quadrant,
    pub split: Split,
    pub frame_count: usize,
    pub frames: Vec<FramePaths>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth_depths: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<SynthConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format_version: String,
    pub clips: Vec<ClipEntry>,
}

fn frame_paths(id: &str, index: usize) -> FramePaths {
    let p = |kind: &str| format!("clips/{id}/{kind}/{index}.pgm");
    FramePaths {
        gray: p("gray"),
        depth: p("depth"),
        boxmask: p("boxmask"),
        fingermask: p("fingermask"),
    }
}

fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id != "."
        && id != ".."
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

fn check_unique_ids<'a>(ids: impl IntoIterator<Item = &'a str>) -> Result<()> {
    let mut seen = BTreeSet::new();
    for id in ids {
        if !valid_id(id) {
            return Err(Error::Dataset(format!("clip id {id:?} is not a plain file name")));
        }
        if !seen.insert(id) {
            return Err(Error::Dataset(format!("duplicate clip id {id:?}")));
        }
    }
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Serialized manifest text; pretty JSON with a trailing newline.
pub fn manifest_json(manifest: &Manifest) -> String {
    let mut s = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    s.push('\n');
    s
}

/// Writes every clip's rasters and the manifest under `dir`.
pub fn save_dataset(clips: &[Clip], dir: &Path) -> Result<Manifest> {
    check_unique_ids(clips.iter().map(|c| c.id.as_str()))?;
    let mut entries = Vec::with_capacity(clips.len());
    for clip in clips {
        if let Some(t) = &clip.truth_depths {
            if t.len() != clip.frames.len() {
                return Err(Error::Dataset(format!(
                    "clip {}: {} truth depths for {} frames",
                    clip.id,
                    t.len(),
                    clip.frames.len()
                )));
            }
        }
        let frames: Vec<FramePaths> = (0..clip.frames.len()).map(|i| frame_paths(&clip.id, i)).collect();
        entries.push(ClipEntry {
            id: clip.id.clone(),
            cup: clip.cup,
            quadrant: clip.quadrant,
            split: clip.split,
            frame_count: clip.frames.len(),
            frames,
            truth_depths: clip.truth_depths.clone(),
            generator: clip.generator.clone(),
        });
    }
    clips
        .par_iter()
        .zip(&entries)
        .try_for_each(|(clip, entry)| -> Result<()> {
            for (frame, paths) in clip.frames.iter().zip(&entry.frames) {
                write_file(&dir.join(&paths.gray), &pgm::encode_gray(&frame.gray))?;
                write_file(&dir.join(&paths.depth), &pgm::encode_depth(&frame.depth))?;
                write_file(&dir.join(&paths.boxmask), &pgm::encode_mask(frame.masks.box_mask()))?;
                write_file(&dir.join(&paths.fingermask), &pgm::encode_mask(frame.masks.finger()))?;
            }
            Ok(())
        })?;
    let manifest = Manifest {
        format_version: FORMAT_VERSION.into(),
        clips: entries,
    };
    write_file(&dir.join(MANIFEST_FILE), manifest_json(&manifest).as_bytes())?;
    Ok(manifest)
}

/// Relative path inside the dataset directory; absolute paths and `..` are refused.
fn resolve(root: &Path, rel: &str, what: &str) -> Result<PathBuf> {
    let p = Path::new(rel);
    if rel.is_empty()
        || !p
            .components()
            .all(|c| matches!(c, Component::Normal(_) | Component::CurDir))
    {
        return Err(Error::Dataset(format!(
            "{what}: path {rel:?} escapes the dataset directory"
        )));
    }
    Ok(root.join(p))
}

fn read_file(path: &Path, what: &str) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::Dataset(format!("{what}: cannot read {}: {e}", path.display())))
}

fn load_frame(root: &Path, entry: &ClipEntry, index: usize) -> Result<Frame> {
    let what = format!("clip {} frame {index}", entry.id);
    let paths = &entry.frames[index];
    let tag = |e: Error| Error::Dataset(format!("{what}: {e}"));
    let load = |rel: &str| -> Result<(PathBuf, Vec<u8>)> {
        let path = resolve(root, rel, &what)?;
        let bytes = read_file(&path, &what)?;
        Ok((path, bytes))
    };
    let (p, b) = load(&paths.gray)?;
    let gray = pgm::decode_gray(&b, &p).map_err(tag)?;
    let (p, b) = load(&paths.depth)?;
    let depth = pgm::decode_depth(&b, &p).map_err(tag)?;
    let (p, b) = load(&paths.boxmask)?;
    let box_mask = pgm::decode_mask(&b, &p).map_err(tag)?;
    let (p, b) = load(&paths.fingermask)?;
    let finger = pgm::decode_mask(&b, &p).map_err(tag)?;
    let masks = MaskPair::new(box_mask, finger).map_err(tag)?;
    Frame::new(gray, depth, masks).map_err(tag)
}

fn load_clip(root: &Path, entry: &ClipEntry) -> Result<Clip> {
    if entry.frame_count != entry.frames.len() {
        return Err(Error::Dataset(format!(
            "clip {}: frame_count {} but {} frame entries",
            entry.id,
            entry.frame_count,
            entry.frames.len()
        )));
    }
    if let Some(t) = &entry.truth_depths {
        if t.len() != entry.frame_count {
            return Err(Error::Dataset(format!(
                "clip {}: {} truth depths for {} frames",
                entry.id,
                t.len(),
                entry.frame_count
            )));
        }
    }
    let frames = (0..entry.frame_count)
        .map(|i| load_frame(root, entry, i))
        .collect::<Result<Vec<_>>>()?;
    if let Some(first) = frames.first() {
        let dims = first.gray.dims();
        if let Some(i) = frames.iter().position(|f| f.gray.dims() != dims) {
            return Err(Error::Dataset(format!(
                "clip {} frame {i}: size {:?} differs from frame 0 size {dims:?}",
                entry.id,
                frames[i].gray.dims()
            )));
        }
    }
    Ok(Clip {
        id: entry.id.clone(),
        cup: entry.cup,
        quadrant: entry.quadrant,
        split: entry.split,
        frames,
        truth_depths: entry.truth_depths.clone(),
        generator: entry.generator.clone(),
    })
}

pub fn read_manifest(manifest_path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
    // Version check first so an unknown format is reported as such.
    let raw: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Json {
        path: manifest_path.to_path_buf(),
        source: e,
    })?;
    match raw.get("format_version").and_then(|v| v.as_str()) {
        Some(FORMAT_VERSION) => {}
        Some(other) => return Err(Error::Dataset(format!("unknown format_version {other:?}"))),
        None => return Err(Error::Dataset("manifest has no string format_version".into())),
    }
    let manifest: Manifest = serde_json::from_value(raw).map_err(|e| Error::Json {
        path: manifest_path.to_path_buf(),
        source: e,
    })?;
    check_unique_ids(manifest.clips.iter().map(|c| c.id.as_str()))?;
    Ok(manifest)
}

/// Loads and validates every clip listed in the manifest. Any violation
/// rejects the whole load.
pub fn load_dataset(manifest_path: &Path) -> Result<Vec<Clip>> {
    let manifest = read_manifest(manifest_path)?;
    let root = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    manifest.clips.par_iter().map(|e| load_clip(root, e)).collect()
}

/// Accepts either a dataset directory or a manifest path.
pub fn manifest_path(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.join(MANIFEST_FILE)
    } else {
        path.to_path_buf()
    }
}

/// A frame addressed by clip id and index within the clip.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FrameRef {
    pub clip: String,
    pub frame_index: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellSplit {
    pub train: Vec<FrameRef>,
    pub test: Vec<FrameRef>,
}

/// Train/test frames per (cup, quadrant), ordered by clip id then frame index.
pub fn split_view(clips: &[Clip]) -> BTreeMap<(CupSize, Quadrant), CellSplit> {
    let mut sorted: Vec<&Clip> = clips.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let mut cells: BTreeMap<(CupSize, Quadrant), CellSplit> = BTreeMap::new();
    for clip in sorted {
        let cell = cells.entry((clip.cup, clip.quadrant)).or_default();
        let side = match clip.split {
            Split::Train => &mut cell.train,
            Split::Test => &mut cell.test,
        };
        side.extend((0..clip.frames.len()).map(|i| FrameRef {
            clip: clip.id.clone(),
            frame_index: i,
        }));
    }
    cells
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{BinaryMask, DepthFrame, GrayImage};

    fn frame(w: usize, h: usize, v: u16) -> Frame {
        let gray = GrayImage::from_fn(w, h, |x, y| (x * 7 + y * 3 + v as usize) as u8).unwrap();
        let depth = DepthFrame::from_fn(w, h, |x, y| v + (x + y) as u16).unwrap();
        let boxm = BinaryMask::rect(w, h, 1, 1, w - 1, h - 1).unwrap();
        let finger = BinaryMask::rect(w, h, 2, 2, 4, 4).unwrap();
        Frame::new(gray, depth, MaskPair::new(boxm, finger).unwrap()).unwrap()
    }

    fn clip(id: &str, split: Split, n: usize) -> Clip {
        Clip {
            id: id.into(),
            cup: CupSize::A,
            quadrant: Quadrant::RightQ3,
            split,
            frames: (0..n).map(|i| frame(8, 6, 700 + i as u16)).collect(),
            truth_depths: Some((0..n).map(|i| 700.25 + i as f64 / 3.0).collect()),
            generator: None,
        }
    }

    fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
        fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
            for e in fs::read_dir(dir).unwrap() {
                let p = e.unwrap().path();
                if p.is_dir() {
                    walk(root, &p, out);
                } else {
                    out.insert(p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap());
                }
            }
        }
        let mut out = BTreeMap::new();
        walk(dir, dir, &mut out);
        out
    }

    #[test]
    fn round_trip_and_byte_stable() {
        let clips = vec![clip("a_train", Split::Train, 3), clip("a_test", Split::Test, 2)];
        let d1 = tempfile::tempdir().unwrap();
        save_dataset(&clips, d1.path()).unwrap();
        let loaded = load_dataset(&d1.path().join(MANIFEST_FILE)).unwrap();
        assert_eq!(loaded, clips);
        let d2 = tempfile::tempdir().unwrap();
        save_dataset(&loaded, d2.path()).unwrap();
        assert_eq!(snapshot(d1.path()), snapshot(d2.path()));
    }

    #[test]
    fn empty_dataset() {
        let d = tempfile::tempdir().unwrap();
        let m = save_dataset(&[], d.path()).unwrap();
        assert!(m.clips.is_empty());
        let text = fs::read_to_string(d.path().join(MANIFEST_FILE)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["clips"], serde_json::json!([]));
        assert!(load_dataset(&d.path().join(MANIFEST_FILE)).unwrap().is_empty());
    }

    fn edit_manifest(dir: &Path, f: impl FnOnce(&mut serde_json::Value)) {
        let path = dir.join(MANIFEST_FILE);
        let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        f(&mut v);
        fs::write(&path, serde_json::to_string(&v).unwrap()).unwrap();
    }

    fn saved() -> tempfile::TempDir {
        let d = tempfile::tempdir().unwrap();
        save_dataset(&[clip("c1", Split::Train, 2), clip("c2", Split::Test, 2)], d.path()).unwrap();
        d
    }

    fn load_err(d: &Path) -> String {
        load_dataset(&d.join(MANIFEST_FILE)).unwrap_err().to_string()
    }

    #[test]
    fn tampered_frame_count_names_clip() {
        let d = saved();
        edit_manifest(d.path(), |v| v["clips"][1]["frame_count"] = 5.into());
        let e = load_err(d.path());
        assert!(e.contains("c2") && e.contains("frame_count"), "{e}");
    }

    #[test]
    fn mask_dimension_mismatch_rejected() {
        let d = saved();
        let bad = BinaryMask::filled(5, 5, true).unwrap();
        fs::write(d.path().join("clips/c1/boxmask/1.pgm"), pgm::encode_mask(&bad)).unwrap();
        let e = load_err(d.path());
        assert!(e.contains("clip c1 frame 1") && e.contains("mismatch"), "{e}");
    }

    #[test]
    fn malformed_header_rejected() {
        let d = saved();
        fs::write(d.path().join("clips/c2/depth/0.pgm"), b"P6\n8 6\n65535\n").unwrap();
        let e = load_err(d.path());
        assert!(e.contains("clip c2 frame 0") && e.contains("P5"), "{e}");
    }

    #[test]
    fn unknown_version_rejected() {
        let d = saved();
        edit_manifest(d.path(), |v| v["format_version"] = "2".into());
        assert!(load_err(d.path()).contains("format_version"));
    }

    #[test]
    fn missing_file_rejected() {
        let d = saved();
        fs::remove_file(d.path().join("clips/c1/gray/0.pgm")).unwrap();
        let e = load_err(d.path());
        assert!(e.contains("clip c1 frame 0") && e.contains("gray/0.pgm"), "{e}");
    }

    #[test]
    fn duplicate_ids_and_escaping_paths_rejected() {
        let d = saved();
        edit_manifest(d.path(), |v| v["clips"][1]["id"] = "c1".into());
        assert!(load_err(d.path()).contains("duplicate"));
        let d = saved();
        edit_manifest(d.path(), |v| v["clips"][0]["frames"][0]["gray"] = "../x.pgm".into());
        assert!(load_err(d.path()).contains("escapes"));
        assert!(save_dataset(&[clip("a", Split::Train, 1), clip("a", Split::Test, 1)], d.path()).is_err());
    }

    #[test]
    fn split_view_is_declarative() {
        let clips = vec![clip("x_test", Split::Test, 2), clip("x_train", Split::Train, 3)];
        let mut reversed = clips.clone();
        reversed.reverse();
        let a = split_view(&clips);
        assert_eq!(a, split_view(&reversed));
        let cell = &a[&(CupSize::A, Quadrant::RightQ3)];
        assert_eq!((cell.train.len(), cell.test.len()), (3, 2));
        assert!(cell.test.iter().all(|r| r.clip == "x_test"));
        assert!(cell.train.iter().all(|r| r.clip == "x_train"));
    }
}
