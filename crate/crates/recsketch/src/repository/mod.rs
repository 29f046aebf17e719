//! Sketch store: insertion, inner-product retrieval and clustering.
//!
//! One writer, many readers. Queries run on a [`Snapshot`], which sees a
//! fixed prefix of the inserts even while the writer keeps appending.

mod cluster;
mod lsh;

use std::collections::{BTreeMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{dot, Scalar};
use crate::sketcher::Sketch;

pub use cluster::{cluster, Clustering};
pub use lsh::{LshIndex, LshQuery, DEFAULT_HYPERPLANES};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct SketchEntry<T> {
    pub id: String,
    pub sketch: Sketch<T>,
    #[serde(default)]
    pub tags: BTreeMap<String, String>,
    /// Insert sequence number, assigned by the repository.
    pub seq: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Hit {
    pub id: String,
    pub seq: u64,
    pub score: f64,
}

#[derive(Debug, Error)]
pub enum RepoError {
    #[error("sketch dimension {got}, repository holds dimension {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("id `{0}` already present")]
    DuplicateId(String),
    #[error("cannot form {k} clusters from {n} entries")]
    ClusterCount { k: usize, n: usize },
    #[error("log line {line}: {source}")]
    Log { line: usize, source: serde_json::Error },
    #[error("log holds no entries")]
    EmptyLog,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Immutable view of the first `len()` inserted entries.
#[derive(Clone, Debug)]
pub struct Snapshot<T> {
    dim: usize,
    entries: Arc<Vec<Arc<SketchEntry<T>>>>,
}

impl<T: Scalar> Snapshot<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Arc<SketchEntry<T>>] {
        &self.entries
    }

    pub fn get(&self, id: &str) -> Option<&SketchEntry<T>> {
        self.entries.iter().find(|e| e.id == id).map(|e| &**e)
    }

    fn check(&self, probe: &Sketch<T>) -> Result<(), RepoError> {
        if probe.dim() != self.dim {
            return Err(RepoError::Dimension { expected: self.dim, got: probe.dim() });
        }
        Ok(())
    }

    /// Exact top-k by inner product; ties go to the earlier insert.
    pub fn query_similar(&self, probe: &Sketch<T>, k: usize) -> Result<Vec<Hit>, RepoError> {
        self.check(probe)?;
        Ok(top_k(self.entries.iter().map(|e| &**e), probe, k))
    }
}

pub(crate) fn top_k<'a, T: Scalar>(
    entries: impl Iterator<Item = &'a SketchEntry<T>>,
    probe: &Sketch<T>,
    k: usize,
) -> Vec<Hit> {
    let mut hits: Vec<Hit> = entries
        .map(|e| Hit { id: e.id.clone(), seq: e.seq, score: dot(&e.sketch.values, &probe.values).f64() })
        .collect();
    hits.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.seq.cmp(&b.seq)));
    hits.truncate(k);
    hits
}

struct State<T> {
    entries: Arc<Vec<Arc<SketchEntry<T>>>>,
    ids: HashSet<String>,
}

pub struct Repository<T> {
    dim: usize,
    state: RwLock<State<T>>,
    log: Mutex<Option<(PathBuf, File)>>,
}

impl<T: Scalar> Repository<T> {
    pub fn in_memory(dim: usize) -> Self {
        Repository {
            dim,
            state: RwLock::new(State { entries: Arc::new(Vec::new()), ids: HashSet::new() }),
            log: Mutex::new(None),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn snapshot(&self) -> Snapshot<T> {
        let st = self.state.read().expect("repository lock poisoned");
        Snapshot { dim: self.dim, entries: Arc::clone(&st.entries) }
    }

    pub fn len(&self) -> usize {
        self.state.read().expect("repository lock poisoned").entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn validate(&self, st: &State<T>, id: &str, sketch: &Sketch<T>) -> Result<(), RepoError> {
        if sketch.dim() != self.dim {
            return Err(RepoError::Dimension { expected: self.dim, got: sketch.dim() });
        }
        if st.ids.contains(id) {
            return Err(RepoError::DuplicateId(id.to_string()));
        }
        Ok(())
    }

    fn push(st: &mut State<T>, entry: SketchEntry<T>) {
        st.ids.insert(entry.id.clone());
        // Copy-on-write: outstanding snapshots keep the old vector.
        Arc::make_mut(&mut st.entries).push(Arc::new(entry));
    }

    /// Snapshot-wide top-k; see [`Snapshot::query_similar`].
    pub fn query_similar(&self, probe: &Sketch<T>, k: usize) -> Result<Vec<Hit>, RepoError> {
        self.snapshot().query_similar(probe, k)
    }
}

impl<T: Scalar + Serialize + DeserializeOwned> Repository<T> {
    /// Open or create a repository backed by an append-only JSON-lines log.
    pub fn open(path: impl AsRef<Path>, dim: usize) -> Result<Self, RepoError> {
        let path = path.as_ref().to_path_buf();
        let repo = Self::in_memory(dim);
        if path.exists() {
            let mut st = repo.state.write().expect("repository lock poisoned");
            for (i, line) in BufReader::new(File::open(&path)?).lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let mut e: SketchEntry<T> =
                    serde_json::from_str(&line).map_err(|source| RepoError::Log { line: i + 1, source })?;
                repo.validate(&st, &e.id, &e.sketch)?;
                e.seq = st.entries.len() as u64;
                Self::push(&mut st, e);
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        *repo.log.lock().expect("log lock poisoned") = Some((path, file));
        Ok(repo)
    }

    /// Open a log, taking the dimension from its first entry.
    pub fn open_existing(path: impl AsRef<Path>) -> Result<Self, RepoError> {
        let path = path.as_ref();
        let first = BufReader::new(File::open(path)?).lines().find(|l| l.as_ref().map_or(true, |l| !l.trim().is_empty()));
        let Some(line) = first else {
            return Err(RepoError::EmptyLog);
        };
        let e: SketchEntry<T> = serde_json::from_str(&line?).map_err(|source| RepoError::Log { line: 1, source })?;
        Self::open(path, e.sketch.dim())
    }

    pub fn log_path(&self) -> Option<PathBuf> {
        self.log.lock().expect("log lock poisoned").as_ref().map(|(p, _)| p.clone())
    }

    /// Insert and, when backed by a log, append the entry to it.
    pub fn insert(&self, id: impl Into<String>, sketch: Sketch<T>, tags: BTreeMap<String, String>) -> Result<u64, RepoError> {
        // The log lock serializes writers, so log order matches seq order.
        let mut log = self.log.lock().expect("log lock poisoned");
        let mut st = self.state.write().expect("repository lock poisoned");
        let id = id.into();
        self.validate(&st, &id, &sketch)?;
        let seq = st.entries.len() as u64;
        let entry = SketchEntry { id, sketch, tags, seq };
        if let Some((_, f)) = log.as_mut() {
            let line = serde_json::to_string(&entry).map_err(|source| RepoError::Log { line: seq as usize + 1, source })?;
            writeln!(f, "{line}")?;
            f.flush()?;
        }
        Self::push(&mut st, entry);
        Ok(seq)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketcher::SketchKind;

    fn sk(v: &[f64]) -> Sketch<f64> {
        Sketch::new(v.to_vec(), SketchKind::Overall, 1)
    }

    fn repo() -> Repository<f64> {
        let r = Repository::in_memory(3);
        r.insert("a", sk(&[1.0, 0.0, 0.0]), BTreeMap::new()).unwrap();
        r.insert("b", sk(&[0.0, 1.0, 0.0]), BTreeMap::new()).unwrap();
        r.insert("c", sk(&[0.0, 1.0, 0.0]), BTreeMap::new()).unwrap();
        r.insert("d", sk(&[0.6, 0.8, 0.0]), BTreeMap::new()).unwrap();
        r
    }

    #[test]
    fn empty_returns_nothing() {
        let r = Repository::<f64>::in_memory(3);
        assert!(r.query_similar(&sk(&[1.0, 0.0, 0.0]), 5).unwrap().is_empty());
    }

    #[test]
    fn self_query_ranks_first_and_ties_by_seq() {
        let r = repo();
        let hits = r.query_similar(&sk(&[1.0, 0.0, 0.0]), 2).unwrap();
        assert_eq!(hits[0].id, "a");
        let hits = r.query_similar(&sk(&[0.0, 1.0, 0.0]), 4).unwrap();
        let ids: Vec<_> = hits.iter().map(|h| h.id.as_str()).collect();
        assert_eq!(ids, ["b", "c", "d", "a"]);
    }

    #[test]
    fn rejects_bad_inserts() {
        let r = repo();
        assert!(matches!(r.insert("a", sk(&[0.0; 3]), BTreeMap::new()), Err(RepoError::DuplicateId(_))));
        assert!(matches!(r.insert("z", sk(&[0.0; 2]), BTreeMap::new()), Err(RepoError::Dimension { .. })));
        assert!(matches!(r.query_similar(&sk(&[0.0; 4]), 1), Err(RepoError::Dimension { .. })));
        assert_eq!(r.len(), 4);
    }

    #[test]
    fn snapshot_is_a_fixed_prefix() {
        let r = repo();
        let snap = r.snapshot();
        r.insert("e", sk(&[0.0, 0.0, 1.0]), BTreeMap::new()).unwrap();
        assert_eq!(snap.len(), 4);
        assert_eq!(r.snapshot().len(), 5);
        assert!(snap.get("e").is_none());
    }

    #[test]
    fn log_replays() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("repo.jsonl");
        {
            let r = Repository::<f64>::open(&path, 3).unwrap();
            let tags = BTreeMap::from([("module".to_string(), "conv".to_string())]);
            r.insert("x", sk(&[0.5, 0.25, 0.125]), tags).unwrap();
            r.insert("y", sk(&[1.0, 0.0, 0.0]), BTreeMap::new()).unwrap();
            assert!(r.insert("y", sk(&[1.0, 0.0, 0.0]), BTreeMap::new()).is_err());
        }
        let r = Repository::<f64>::open(&path, 3).unwrap();
        let snap = r.snapshot();
        assert_eq!(snap.len(), 2);
        assert_eq!(snap.get("x").unwrap().tags["module"], "conv");
        assert_eq!(snap.get("x").unwrap().sketch.values, vec![0.5, 0.25, 0.125]);
        r.insert("z", sk(&[0.0, 0.0, 1.0]), BTreeMap::new()).unwrap();
        assert_eq!(Repository::<f64>::open(&path, 3).unwrap().len(), 3);
        assert!(matches!(Repository::<f64>::open(&path, 4), Err(RepoError::Dimension { .. })));
        assert_eq!(Repository::<f64>::open_existing(&path).unwrap().dim(), 3);
        std::fs::write(dir.path().join("empty.jsonl"), "").unwrap();
        assert!(matches!(Repository::<f64>::open_existing(dir.path().join("empty.jsonl")), Err(RepoError::EmptyLog)));
    }

    #[test]
    fn concurrent_readers_see_prefixes() {
        let r = Arc::new(Repository::<f64>::in_memory(2));
        std::thread::scope(|s| {
            let w = Arc::clone(&r);
            s.spawn(move || {
                for i in 0..200 {
                    w.insert(format!("e{i}"), sk(&[i as f64, 1.0]), BTreeMap::new()).unwrap();
                }
            });
            for _ in 0..4 {
                let rd = Arc::clone(&r);
                s.spawn(move || {
                    for _ in 0..50 {
                        let snap = rd.snapshot();
                        for (i, e) in snap.entries().iter().enumerate() {
                            assert_eq!(e.seq, i as u64);
                            assert_eq!(e.id, format!("e{i}"));
                        }
                    }
                });
            }
        });
        assert_eq!(r.len(), 200);
    }
}
