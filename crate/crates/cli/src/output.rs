use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use chrono::DateTime;

use crate::error::CliError;

/// One rendered output file, named `<command>-<tag>.<ext>`.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub ext: &'static str,
    pub contents: String,
}

impl Artifact {
    pub fn new(ext: &'static str, contents: String) -> Self {
        Artifact { ext, contents }
    }
}

pub fn timestamp_tag() -> String {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs() as i64)
        .unwrap_or(0);
    DateTime::from_timestamp(secs, 0)
        .map(|t| t.format("%Y%m%dT%H%M%SZ").to_string())
        .unwrap_or_else(|| "19700101T000000Z".into())
}

/// Writes every artifact to a temporary file first and only renames once all
/// of them are on disk, so a failed run leaves no partial outputs behind.
pub fn write_all(dir: &Path, command: &str, tag: &str, artifacts: &[Artifact]) -> Result<Vec<PathBuf>, CliError> {
    let fail = |path: &Path, source| CliError::Output {
        path: path.to_path_buf(),
        source,
    };
    fs::create_dir_all(dir).map_err(|e| fail(dir, e))?;
    let mut staged = Vec::with_capacity(artifacts.len());
    for a in artifacts {
        let target = dir.join(format!("{command}-{tag}.{}", a.ext));
        let tmp = dir.join(format!(".{command}-{tag}.{}.{}.tmp", a.ext, std::process::id()));
        if let Err(e) = fs::write(&tmp, &a.contents) {
            for (t, _) in &staged {
                let _ = fs::remove_file(t);
            }
            let _ = fs::remove_file(&tmp);
            return Err(fail(&tmp, e));
        }
        staged.push((tmp, target));
    }
    let mut written = Vec::with_capacity(staged.len());
    for (tmp, target) in staged {
        fs::rename(&tmp, &target).map_err(|e| fail(&target, e))?;
        written.push(target);
    }
    Ok(written)
}
