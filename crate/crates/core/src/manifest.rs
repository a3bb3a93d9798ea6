//! Sequence manifests and frame file naming.
//!
//! A pass directory holds `<pass>_<frame:04>.png` frames plus a
//! `<pass>_manifest.json` describing them. Any renderer that writes this
//! layout can feed the compositor.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::composite::{Formula, ManipulatorChain};
use crate::error::{Error, Result};
use crate::render::{FrameRange, PassKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PassName {
    T0,
    T1,
    W,
    C,
}

impl PassName {
    pub fn as_str(self) -> &'static str {
        match self {
            PassName::T0 => "t0",
            PassName::T1 => "t1",
            PassName::W => "w",
            PassName::C => "c",
        }
    }
}

impl fmt::Display for PassName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<PassKind> for PassName {
    fn from(kind: PassKind) -> Self {
        match kind {
            PassKind::ShadowTexture => PassName::T0,
            PassKind::DiffuseTexture => PassName::T1,
            PassKind::Weight => PassName::W,
        }
    }
}

/// `t0_0007.png` and friends.
pub fn frame_file_name(pass: PassName, frame: u32) -> String {
    format!("{pass}_{frame:04}.png")
}

pub fn manifest_path(dir: &Path, pass: PassName) -> PathBuf {
    dir.join(format!("{pass}_manifest.json"))
}

/// Digests of the three input manifests a composite was built from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigests {
    pub t0: String,
    pub t1: String,
    pub w: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompositeRecord {
    pub formula: Formula,
    pub chain: ManipulatorChain,
    pub inputs: InputDigests,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub pass: PassName,
    /// Inclusive `[first, last]`.
    pub frames: [u32; 2],
    pub seed: u64,
    pub config_sha256: String,
    pub complete: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub composite: Option<CompositeRecord>,
}

impl Manifest {
    pub fn range(&self) -> FrameRange {
        FrameRange {
            first: self.frames[0],
            last: self.frames[1],
        }
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Manifest> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let manifest: Manifest =
            serde_json::from_str(&text).map_err(|e| Error::format(path, format!("bad manifest: {e}")))?;
        if manifest.frames[0] > manifest.frames[1] {
            return Err(Error::validation(format!(
                "{}: frame range {}..{} is reversed",
                path.display(),
                manifest.frames[0],
                manifest.frames[1]
            )));
        }
        Ok(manifest)
    }

    /// Write via a temporary file and rename, so readers never see half a file.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
        std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }

    /// Frame files this manifest describes, relative to `dir`.
    pub fn frame_paths(&self, dir: &Path) -> Vec<(u32, PathBuf)> {
        self.range()
            .iter()
            .map(|f| (f, dir.join(frame_file_name(self.pass, f))))
            .collect()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_sha256(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}
