//! Snippet corpora, ground-truth label files, and run stores.
//!
//! Label file format (JSON): an object mapping snippet id to a list of slots.
//!
//! ```json
//! {
//!   "pkg/util.py": [
//!     {"owner": "parse", "kind": "param", "name": "text", "type": "str"},
//!     {"owner": "parse", "kind": "return", "name": "", "type": "List[int]"},
//!     {"owner": "", "kind": "variable", "name": "CACHE", "type": "Dict[str, int]"}
//!   ]
//! }
//! ```
//!
//! `owner` is the dotted scope path (`""` at module level), `kind` is one of
//! `param`, `return`, `variable`, `name` is empty for returns, and `type` may
//! be `null` for slots without an expected type.
//!
//! A run directory holds `run.json` (the [`RunHeader`]) and `results.jsonl`
//! with one serialized [`PipelineResult`] per line.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::eval::TypeSlot;
use crate::pipeline::PipelineResult;

pub const RESULTS_FILE: &str = "results.jsonl";
pub const HEADER_FILE: &str = "run.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSnippet {
    pub id: String,
    pub relative_path: String,
    pub code: String,
    pub line_count: usize,
}

impl SourceSnippet {
    pub fn new(id: impl Into<String>, relative_path: impl Into<String>, code: impl Into<String>) -> Self {
        let code = code.into();
        SourceSnippet {
            id: id.into(),
            relative_path: relative_path.into(),
            line_count: code.lines().count().max(1),
            code,
        }
    }
}

/// Loads every `.py` file under `root`, sorted by relative path. Ids are the
/// relative paths with `/` separators.
pub fn load_corpus(root: &Path) -> Result<Vec<SourceSnippet>> {
    let mut files = Vec::new();
    walk(root, &mut files)?;
    files.sort();

    let mut seen: HashMap<String, PathBuf> = HashMap::new();
    let mut out = Vec::with_capacity(files.len());
    for path in files {
        let rel = path.strip_prefix(root).expect("walked under root");
        let id = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        if let Some(prev) = seen.insert(id.clone(), path.clone()) {
            return Err(Error::Corpus(format!(
                "duplicate snippet id {id:?} from {} and {}",
                prev.display(),
                path.display()
            )));
        }
        let code = fs::read_to_string(&path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        out.push(SourceSnippet::new(id.clone(), id, code));
    }
    Ok(out)
}

fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(format!("reading directory {}", dir.display()), e))?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(format!("reading directory {}", dir.display()), e))?;
        let path = entry.path();
        let ty = entry
            .file_type()
            .map_err(|e| Error::io(format!("stat {}", path.display()), e))?;
        if ty.is_dir() {
            walk(&path, out)?;
        } else if path.extension().is_some_and(|e| e == "py") {
            out.push(path);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruthRecord {
    pub snippet_id: String,
    pub slots: Vec<TypeSlot>,
}

/// Label document entries in file order, duplicates retained for checking.
struct LabelEntries(Vec<(String, Vec<TypeSlot>)>);

impl<'de> Deserialize<'de> for LabelEntries {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = LabelEntries;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an object mapping snippet ids to slot lists")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<LabelEntries, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, Vec<TypeSlot>>()? {
                    out.push((k, v));
                }
                Ok(LabelEntries(out))
            }
        }
        d.deserialize_map(V)
    }
}

pub fn parse_ground_truth(text: &str, path: &Path) -> Result<BTreeMap<String, GroundTruthRecord>> {
    if text.trim().is_empty() {
        return Ok(BTreeMap::new());
    }
    let LabelEntries(entries) = serde_json::from_str(text).map_err(|e| Error::json(path, &e))?;
    let mut out = BTreeMap::new();
    for (id, slots) in entries {
        let mut keys = HashSet::new();
        for s in &slots {
            if !keys.insert(s.key()) {
                return Err(Error::Corpus(format!(
                    "snippet {id:?}: duplicate slot ({:?}, {}, {:?})",
                    s.owner, s.kind, s.name
                )));
            }
        }
        let record = GroundTruthRecord {
            snippet_id: id.clone(),
            slots,
        };
        if out.insert(id.clone(), record).is_some() {
            return Err(Error::Corpus(format!("duplicate snippet id {id:?} in {}", path.display())));
        }
    }
    Ok(out)
}

pub fn load_ground_truth(path: &Path) -> Result<BTreeMap<String, GroundTruthRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    parse_ground_truth(&text, path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunHeader {
    pub run_id: String,
    pub created_at: DateTime<Utc>,
    pub checker_version: String,
    pub model_id: String,
    /// Snippets the run is expected to cover.
    pub snippet_ids: Vec<String>,
}

struct StoreInner {
    file: File,
    ids: HashSet<String>,
    results: Vec<PipelineResult>,
}

/// Append-only, line-delimited result log for one run. Appends are
/// serialized through an internal lock and synced before returning.
pub struct RunStore {
    dir: PathBuf,
    header: RunHeader,
    inner: Mutex<StoreInner>,
}

impl fmt::Debug for RunStore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RunStore")
            .field("dir", &self.dir)
            .field("run_id", &self.header.run_id)
            .field("len", &self.len())
            .finish()
    }
}

impl RunStore {
    /// Starts a new run in `dir`. An existing results file is a conflict
    /// unless `force` is set, in which case it is replaced.
    pub fn create(dir: &Path, header: RunHeader, force: bool) -> Result<RunStore> {
        fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
        let results = dir.join(RESULTS_FILE);
        if results.exists() && !force {
            return Err(Error::Conflict(format!(
                "{} already holds a run (use --force to overwrite)",
                dir.display()
            )));
        }
        let header_json = serde_json::to_string_pretty(&header).expect("header serializes");
        write_file(&dir.join(HEADER_FILE), header_json.as_bytes())?;
        let file = File::create(&results).map_err(|e| Error::io(format!("creating {}", results.display()), e))?;
        Ok(RunStore {
            dir: dir.to_path_buf(),
            header,
            inner: Mutex::new(StoreInner {
                file,
                ids: HashSet::new(),
                results: Vec::new(),
            }),
        })
    }

    /// Reopens an existing run for reading and further appends.
    pub fn open(dir: &Path) -> Result<RunStore> {
        let header_path = dir.join(HEADER_FILE);
        let text = fs::read_to_string(&header_path)
            .map_err(|e| Error::io(format!("reading {}", header_path.display()), e))?;
        let header: RunHeader = serde_json::from_str(&text).map_err(|e| Error::json(&header_path, &e))?;

        let results_path = dir.join(RESULTS_FILE);
        let file = File::open(&results_path).map_err(|e| Error::io(format!("opening {}", results_path.display()), e))?;
        let mut ids = HashSet::new();
        let mut results = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(format!("reading {}", results_path.display()), e))?;
            if line.trim().is_empty() {
                continue;
            }
            let result: PipelineResult = serde_json::from_str(&line).map_err(|e| Error::Format {
                path: results_path.clone(),
                line: i + 1,
                column: e.column(),
                message: e.to_string(),
            })?;
            if !ids.insert(result.snippet_id.clone()) {
                return Err(Error::Conflict(format!(
                    "{} line {}: duplicate result for {:?}",
                    results_path.display(),
                    i + 1,
                    result.snippet_id
                )));
            }
            results.push(result);
        }
        let file = OpenOptions::new()
            .append(true)
            .open(&results_path)
            .map_err(|e| Error::io(format!("opening {}", results_path.display()), e))?;
        Ok(RunStore {
            dir: dir.to_path_buf(),
            header,
            inner: Mutex::new(StoreInner { file, ids, results }),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn header(&self) -> &RunHeader {
        &self.header
    }

    pub fn len(&self) -> usize {
        self.lock().results.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, snippet_id: &str) -> bool {
        self.lock().ids.contains(snippet_id)
    }

    pub fn results(&self) -> Vec<PipelineResult> {
        self.lock().results.clone()
    }

    /// Expected snippet ids with no stored result.
    pub fn missing(&self) -> Vec<String> {
        let inner = self.lock();
        self.header
            .snippet_ids
            .iter()
            .filter(|id| !inner.ids.contains(*id))
            .cloned()
            .collect()
    }

    pub fn persist(&self, result: &PipelineResult) -> Result<()> {
        let mut inner = self.lock();
        if inner.ids.contains(&result.snippet_id) {
            return Err(Error::Conflict(format!(
                "run {} already has a result for {:?}",
                self.header.run_id, result.snippet_id
            )));
        }
        let mut line = serde_json::to_string(result).expect("results serialize");
        line.push('\n');
        let path = self.dir.join(RESULTS_FILE);
        inner
            .file
            .write_all(line.as_bytes())
            .and_then(|_| inner.file.sync_data())
            .map_err(|e| Error::io(format!("appending to {}", path.display()), e))?;
        inner.ids.insert(result.snippet_id.clone());
        inner.results.push(result.clone());
        Ok(())
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, StoreInner> {
        self.inner.lock().unwrap_or_else(|p| p.into_inner())
    }
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}
