//! On-disk cache of order matrices.
//!
//! Files are keyed by a SHA-256 of the layer, the candidate list and the
//! budget. A file with another schema version or key is ignored and
//! recomputed. Writes go to a temporary file that is then renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use multigap::embeddings::SearchBudget;
use multigap::gaps::{GapSpec, Layer, OrderMatrix};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;
pub const CACHE_ENV: &str = "MULTIGAP_CACHE_DIR";

/// `--cache-dir`, else `$MULTIGAP_CACHE_DIR`, else `$XDG_CACHE_HOME/multigap`,
/// else `~/.cache/multigap`.
pub fn resolve_cache_dir(flag: Option<&Path>) -> Option<PathBuf> {
    if let Some(dir) = flag {
        return Some(dir.to_path_buf());
    }
    if let Some(dir) = std::env::var_os(CACHE_ENV).filter(|d| !d.is_empty()) {
        return Some(PathBuf::from(dir));
    }
    if let Some(dir) = std::env::var_os("XDG_CACHE_HOME").filter(|d| !d.is_empty()) {
        return Some(PathBuf::from(dir).join("multigap"));
    }
    std::env::var_os("HOME").map(|h| PathBuf::from(h).join(".cache").join("multigap"))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

#[derive(Serialize)]
struct KeyMaterial<'a> {
    layer: Layer,
    candidates: &'a [GapSpec],
    budget: Option<&'a SearchBudget>,
}

pub fn matrix_key(layer: Layer, candidates: &[GapSpec], budget: Option<&SearchBudget>) -> String {
    let material = serde_json::to_vec(&KeyMaterial { layer, candidates, budget }).expect("plain data");
    sha256_hex(&material)
}

#[derive(Serialize, Deserialize)]
struct MatrixFile {
    schema: u32,
    key: String,
    size: usize,
    rows: Vec<Vec<u64>>,
}

pub struct MatrixCache {
    dir: Option<PathBuf>,
}

impl MatrixCache {
    /// `None` disables caching.
    pub fn new(dir: Option<PathBuf>) -> Self {
        MatrixCache { dir }
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("matrix-{key}.json")))
    }

    pub fn load(&self, key: &str) -> Option<OrderMatrix> {
        let text = fs::read_to_string(self.path(key)?).ok()?;
        let file: MatrixFile = serde_json::from_str(&text).ok()?;
        if file.schema != SCHEMA_VERSION || file.key != key {
            return None;
        }
        OrderMatrix::from_rows(file.size, file.rows).ok()
    }

    pub fn store(&self, key: &str, matrix: &OrderMatrix) -> std::io::Result<()> {
        let (Some(dir), Some(path)) = (&self.dir, self.path(key)) else {
            return Ok(());
        };
        fs::create_dir_all(dir)?;
        let rows = (0..matrix.size()).map(|i| matrix.row_words(i).to_vec()).collect();
        let file = MatrixFile { schema: SCHEMA_VERSION, key: key.into(), size: matrix.size(), rows };
        let tmp = dir.join(format!(".matrix-{key}.{}.tmp", std::process::id()));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&serde_json::to_vec(&file).expect("plain data"))?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)
    }

    /// The cached matrix for `key`, or `compute()` stored under it.
    pub fn get_or_compute<E>(
        &self,
        key: &str,
        compute: impl FnOnce() -> Result<OrderMatrix, E>,
    ) -> Result<(OrderMatrix, bool), E> {
        if let Some(m) = self.load(key) {
            return Ok((m, true));
        }
        let m = compute()?;
        // A failed write only costs a recomputation next time.
        let _ = self.store(key, &m);
        Ok((m, false))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scratch(name: &str) -> PathBuf {
        let d = std::env::temp_dir().join(format!("multigap-cache-{name}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&d);
        d
    }

    #[test]
    fn round_trip_and_schema_guard() {
        let dir = scratch("rt");
        let cache = MatrixCache::new(Some(dir.clone()));
        let mut m = OrderMatrix::new(70);
        m.set(3, 69);
        m.set(69, 0);
        cache.store("k", &m).unwrap();
        assert_eq!(cache.load("k").unwrap(), m);
        let path = dir.join("matrix-k.json");
        let text = fs::read_to_string(&path).unwrap().replace("\"schema\":1", "\"schema\":99");
        fs::write(&path, text).unwrap();
        assert!(cache.load("k").is_none());
        let _ = fs::remove_dir_all(dir);
    }

    #[test]
    fn disabled_cache_always_computes() {
        let cache = MatrixCache::new(None);
        let (_, hit) = cache.get_or_compute::<()>("x", || Ok(OrderMatrix::new(1))).unwrap();
        assert!(!hit);
        assert!(cache.load("x").is_none());
    }

    #[test]
    fn keys_depend_on_candidates() {
        let a = multigap::gaps::enumerate_candidates_strong(2).unwrap();
        let k1 = matrix_key(Layer::FirstMove, &a, None);
        let k2 = matrix_key(Layer::FirstMove, &a[1..], None);
        assert_ne!(k1, k2);
        assert_eq!(k1, matrix_key(Layer::FirstMove, &a, None));
    }
}
