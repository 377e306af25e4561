//! Plain-file JSON cache for solved loop-equation orders.
//!
//! Entries live in `<dir>/<id>-<version>.json`; the version hash changes
//! whenever the workspace version or [`ALGORITHM_REVISION`] change, so stale
//! entries are simply never read.

use std::fs;
use std::path::{Path, PathBuf};

use bkdv_core::exact_algebra::ExprJson;
use bkdv_core::loop_solver::{solve_up_to_with, FreeEnergyTable};
use bkdv_core::{LocalizedExpr, Result};
use sha2::{Digest, Sha256};

/// Bump when a change alters computed expressions without a version bump.
pub const ALGORITHM_REVISION: u32 = 1;

pub const ENV_VAR: &str = "BKDV_CACHE_DIR";

#[derive(Clone, Debug, Default)]
pub struct Cache {
    dir: Option<PathBuf>,
}

impl Cache {
    /// Directory from the flag, else from `BKDV_CACHE_DIR`, else no cache.
    pub fn from_flag(flag: Option<PathBuf>) -> Cache {
        let dir = flag.or_else(|| std::env::var_os(ENV_VAR).filter(|s| !s.is_empty()).map(PathBuf::from));
        Cache { dir }
    }

    pub fn disabled() -> Cache {
        Cache { dir: None }
    }

    pub fn at(dir: &Path) -> Cache {
        Cache { dir: Some(dir.to_path_buf()) }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn version_hash() -> String {
        let mut h = Sha256::new();
        h.update(format!(
            "bkdv {} / rev {}",
            env!("CARGO_PKG_VERSION"),
            ALGORITHM_REVISION
        ));
        h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    fn path(&self, id: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{id}-{}.json", Self::version_hash())))
    }

    /// Unreadable or malformed entries count as misses.
    pub fn load_expr(&self, id: &str) -> Option<LocalizedExpr> {
        let text = fs::read_to_string(self.path(id)?).ok()?;
        let j: ExprJson = serde_json::from_str(&text).ok()?;
        LocalizedExpr::from_json(&j).ok()
    }

    /// Best effort: a cache that cannot be written is skipped.
    pub fn store_expr(&self, id: &str, e: &LocalizedExpr) {
        let Some(path) = self.path(id) else { return };
        if let Some(parent) = path.parent() {
            if fs::create_dir_all(parent).is_err() {
                return;
            }
        }
        if let Ok(text) = serde_json::to_string(&e.to_json()) {
            let tmp = path.with_extension("tmp");
            if fs::write(&tmp, text).is_ok() {
                let _ = fs::rename(&tmp, &path);
            }
        }
    }

    /// Loop-equation solve through order `pmax`, reusing cached `X_p`
    /// (each cached order is still checked against its loop equation).
    pub fn solve(&self, pmax: usize) -> Result<FreeEnergyTable> {
        solve_up_to_with(pmax, &mut |p| self.load_expr(&format!("X{p}")), &mut |p, x| {
            self.store_expr(&format!("X{p}"), x)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use bkdv_core::jet_ring::parse_jets;

    #[test]
    fn roundtrip_and_misses() {
        let dir = tempfile::tempdir().unwrap();
        let c = Cache::at(dir.path());
        assert!(c.load_expr("X1").is_none());
        let e = parse_jets("r2/(12*v1) + u1").unwrap();
        c.store_expr("X1", &e);
        assert_eq!(c.load_expr("X1").unwrap(), e);
        std::fs::write(c.path("X2").unwrap(), "not json").unwrap();
        assert!(c.load_expr("X2").is_none());
        assert!(Cache::disabled().load_expr("X1").is_none());
        assert_eq!(Cache::version_hash().len(), 16);
    }

    #[test]
    fn cached_solve_matches_cold() {
        let dir = tempfile::tempdir().unwrap();
        let c = Cache::at(dir.path());
        let cold = c.solve(1).unwrap();
        assert!(c.load_expr("X1").is_some());
        let warm = c.solve(1).unwrap();
        assert_eq!(cold.x, warm.x);
        assert_eq!(cold.fo, warm.fo);
    }
}
