use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::DatasetManifest;
use crate::{Error, Result};

const LABEL_HEADER: [&str; 4] = ["video", "object", "frame", "y"];
const PERF_HEADER: [&str; 5] = ["video", "object", "anno_frame", "eval_frame", "jf"];

/// A (video, object) pair; multi-object videos contribute one key per object.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjectKey {
    pub video: String,
    pub object: String,
}

impl ObjectKey {
    pub fn new(video: impl Into<String>, object: impl Into<String>) -> Self {
        Self {
            video: video.into(),
            object: object.into(),
        }
    }
}

impl fmt::Display for ObjectKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.video, self.object)
    }
}

/// Performance label vectors, one per (video, object).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabelTable {
    entries: BTreeMap<ObjectKey, Vec<f64>>,
}

impl LabelTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: ObjectKey, y: Vec<f64>) -> Result<()> {
        if let Some(v) = y.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::Data(format!(
                "label {v} for {key} is not a finite nonnegative value"
            )));
        }
        match self.entries.entry(key) {
            Entry::Occupied(e) => Err(Error::Data(format!("duplicate labels for {}", e.key()))),
            Entry::Vacant(e) => {
                e.insert(y);
                Ok(())
            }
        }
    }

    pub fn get(&self, key: &ObjectKey) -> Option<&[f64]> {
        self.entries.get(key).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ObjectKey, &[f64])> {
        self.entries.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn objects_of<'a>(&'a self, video: &'a str) -> impl Iterator<Item = (&'a ObjectKey, &'a [f64])> {
        self.iter().filter(move |(k, _)| k.video == video)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn merge(&mut self, other: LabelTable) -> Result<()> {
        for (k, v) in other.entries {
            self.insert(k, v)?;
        }
        Ok(())
    }

    /// Every labeled video must be in the manifest with a matching frame count.
    pub fn validate_against(&self, manifest: &DatasetManifest) -> Result<()> {
        for (key, y) in &self.entries {
            let record = manifest
                .get(&key.video)
                .ok_or_else(|| Error::Data(format!("labels for {key} but video is not in the manifest")))?;
            if record.n_frames != y.len() {
                return Err(Error::Data(format!(
                    "{key} has {} labels, manifest declares {} frames",
                    y.len(),
                    record.n_frames
                )));
            }
        }
        Ok(())
    }
}

/// Square matrix `P[anno][eval]` = J+F on `eval` when `anno` is annotated.
#[derive(Debug, Clone, PartialEq)]
pub struct PerfEntry {
    n: usize,
    data: Vec<f64>,
}

impl PerfEntry {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || data.len() != n * n {
            return Err(Error::Shape(format!(
                "{} values do not form a {n}x{n} matrix",
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !v.is_finite() || !(0.0..=2.0).contains(*v)) {
            return Err(Error::Data(format!("J+F value {v} outside [0, 2]")));
        }
        Ok(Self { n, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Shape("performance matrix is not square".into()));
        }
        Self::new(n, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, anno: usize) -> &[f64] {
        &self.data[anno * self.n..(anno + 1) * self.n]
    }

    pub fn get(&self, anno: usize, eval: usize) -> f64 {
        self.data[anno * self.n + eval]
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PerformanceMatrix {
    entries: BTreeMap<ObjectKey, PerfEntry>,
}

impl PerformanceMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: ObjectKey, entry: PerfEntry) -> Result<()> {
        match self.entries.entry(key) {
            Entry::Occupied(e) => Err(Error::Data(format!("duplicate matrix for {}", e.key()))),
            Entry::Vacant(e) => {
                e.insert(entry);
                Ok(())
            }
        }
    }

    pub fn get(&self, key: &ObjectKey) -> Option<&PerfEntry> {
        self.entries.get(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ObjectKey, &PerfEntry)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct LabelRow {
    video: String,
    object: String,
    frame: usize,
    y: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct PerfRow {
    video: String,
    object: String,
    anno_frame: usize,
    eval_frame: usize,
    jf: f64,
}

fn reader(path: &Path, header: &[&str]) -> Result<csv::Reader<std::fs::File>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::parse(path, e.to_string()))?;
    let found = rdr.headers().map_err(|e| Error::parse(path, e.to_string()))?;
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::parse(
            path,
            format!(
                "expected header `{}`, found `{}`",
                header.join(","),
                found.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    Ok(rdr)
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| Error::parse(path, e.to_string()))
}

/// Reads `video,object,frame,y` rows. Rows may be in any order, but every
/// frame `0..n` of a declared (video, object) must appear exactly once.
pub fn load_labels(path: impl AsRef<Path>) -> Result<LabelTable> {
    let path = path.as_ref();
    let mut rdr = reader(path, &LABEL_HEADER)?;
    let mut raw: BTreeMap<ObjectKey, BTreeMap<usize, f64>> = BTreeMap::new();
    for (line, row) in rdr.deserialize::<LabelRow>().enumerate() {
        let row = row.map_err(|e| Error::parse(path, e.to_string()))?;
        let key = ObjectKey::new(row.video, row.object);
        if raw.entry(key.clone()).or_default().insert(row.frame, row.y).is_some() {
            return Err(Error::parse(
                path,
                format!("duplicate row for {key} frame {} (data line {})", row.frame, line + 1),
            ));
        }
    }
    let mut table = LabelTable::new();
    for (key, frames) in raw {
        let n = frames.keys().next_back().map_or(0, |m| m + 1);
        if frames.len() != n {
            let missing = (0..n).find(|f| !frames.contains_key(f)).unwrap();
            return Err(Error::parse(path, format!("{key} is missing frame {missing}")));
        }
        table
            .insert(key, frames.into_values().collect())
            .map_err(|e| Error::parse(path, e.to_string()))?;
    }
    Ok(table)
}

pub fn save_labels(table: &LabelTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    for (key, y) in table.iter() {
        for (frame, &v) in y.iter().enumerate() {
            w.serialize(LabelRow {
                video: key.video.clone(),
                object: key.object.clone(),
                frame,
                y: v,
            })
            .map_err(|e| Error::parse(path, e.to_string()))?;
        }
    }
    if table.is_empty() {
        w.write_record(LABEL_HEADER)
            .map_err(|e| Error::parse(path, e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads `video,object,anno_frame,eval_frame,jf` rows into complete n×n
/// matrices, n being one more than the largest frame index seen.
pub fn load_perf_matrix(path: impl AsRef<Path>) -> Result<PerformanceMatrix> {
    let path = path.as_ref();
    let mut rdr = reader(path, &PERF_HEADER)?;
    let mut raw: BTreeMap<ObjectKey, BTreeMap<(usize, usize), f64>> = BTreeMap::new();
    for row in rdr.deserialize::<PerfRow>() {
        let row = row.map_err(|e| Error::parse(path, e.to_string()))?;
        let key = ObjectKey::new(row.video, row.object);
        let cell = (row.anno_frame, row.eval_frame);
        if raw.entry(key.clone()).or_default().insert(cell, row.jf).is_some() {
            return Err(Error::parse(path, format!("duplicate cell {cell:?} for {key}")));
        }
    }
    let mut matrix = PerformanceMatrix::new();
    for (key, cells) in raw {
        let n = cells.keys().map(|&(a, e)| a.max(e) + 1).max().unwrap_or(0);
        if cells.len() != n * n {
            let missing = (0..n)
                .flat_map(|a| (0..n).map(move |e| (a, e)))
                .find(|c| !cells.contains_key(c))
                .unwrap();
            return Err(Error::parse(path, format!("{key} is missing cell {missing:?}")));
        }
        let entry =
            PerfEntry::new(n, cells.into_values().collect()).map_err(|e| Error::parse(path, format!("{key}: {e}")))?;
        matrix.insert(key, entry)?;
    }
    Ok(matrix)
}

pub fn save_perf_matrix(matrix: &PerformanceMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    for (key, entry) in matrix.iter() {
        for anno in 0..entry.n() {
            for eval in 0..entry.n() {
                w.serialize(PerfRow {
                    video: key.video.clone(),
                    object: key.object.clone(),
                    anno_frame: anno,
                    eval_frame: eval,
                    jf: entry.get(anno, eval),
                })
                .map_err(|e| Error::parse(path, e.to_string()))?;
            }
        }
    }
    if matrix.is_empty() {
        w.write_record(PERF_HEADER)
            .map_err(|e| Error::parse(path, e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
