//! Dataset manifests: `{"root": DIR, "entries": [{"id", "image", "mask"?}]}`.
//!
//! `root` is resolved against the manifest's own directory, and entry paths
//! against `root`.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub image: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    #[serde(default = "default_root")]
    pub root: PathBuf,
    pub entries: Vec<ManifestEntry>,
}

fn default_root() -> PathBuf {
    PathBuf::from(".")
}

impl DatasetManifest {
    /// Reads and validates a manifest. Entry paths come back resolved.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading manifest {}", path.display()))?;
        let mut m: DatasetManifest = serde_json::from_str(&text)
            .with_context(|| format!("parsing manifest {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        m.root = base.join(&m.root);
        for e in &mut m.entries {
            e.image = m.root.join(&e.image);
            e.mask = e.mask.as_ref().map(|p| m.root.join(p));
        }
        m.validate()?;
        Ok(m)
    }

    /// Ids must be unique and every referenced file must exist.
    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for e in &self.entries {
            if !seen.insert(e.id.as_str()) {
                bail!("duplicate manifest id {:?}", e.id);
            }
            for p in std::iter::once(&e.image).chain(e.mask.as_ref()) {
                if !p.is_file() {
                    bail!("entry {:?}: missing file {}", e.id, p.display());
                }
            }
        }
        Ok(())
    }

    /// Entries in ascending id order.
    pub fn sorted_entries(&self) -> Vec<&ManifestEntry> {
        let mut v: Vec<_> = self.entries.iter().collect();
        v.sort_by(|a, b| a.id.cmp(&b.id));
        v
    }
}
