//! Project files on disk: TOML, one file per project.
//!
//! Writers take an exclusive `<file>.lock` sibling and replace the file by
//! renaming a fully written temporary file, so an interrupted run leaves
//! either the old or the new state.

use std::fs;
use std::io::{ErrorKind, Write as _};
use std::path::{Path, PathBuf};

use super::{EpcProject, WorkflowError};

fn io(path: &Path, e: impl std::fmt::Display) -> WorkflowError {
    WorkflowError::Io(format!("{}: {e}", path.display()))
}

pub fn load_project(path: &Path) -> Result<EpcProject, WorkflowError> {
    let text = fs::read_to_string(path).map_err(|e| io(path, e))?;
    toml::from_str(&text).map_err(|e| WorkflowError::Parse(format!("{}: {e}", path.display())))
}

/// Atomically replaces `path` with the serialized project.
pub fn save_project(path: &Path, project: &EpcProject) -> Result<(), WorkflowError> {
    let text = toml::to_string(project).map_err(|e| WorkflowError::Parse(e.to_string()))?;
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io(dir, e))?;
    tmp.write_all(text.as_bytes())
        .map_err(|e| io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| io(path, e.error))?;
    Ok(())
}

/// Exclusive writer lock held for the lifetime of the value.
#[derive(Debug)]
pub struct ProjectLock {
    path: PathBuf,
}

impl ProjectLock {
    pub fn acquire(project_path: &Path) -> Result<Self, WorkflowError> {
        let mut name = project_path.as_os_str().to_owned();
        name.push(".lock");
        let path = PathBuf::from(name);
        match fs::OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)
        {
            Ok(_) => Ok(Self { path }),
            Err(e) if e.kind() == ErrorKind::AlreadyExists => {
                Err(WorkflowError::Locked(path.display().to_string()))
            }
            Err(e) => Err(io(&path, e)),
        }
    }
}

impl Drop for ProjectLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// Load, mutate and save under the writer lock. The file is only rewritten
/// when `f` succeeds.
pub fn update_project<T>(
    path: &Path,
    f: impl FnOnce(&mut EpcProject) -> Result<T, WorkflowError>,
) -> Result<T, WorkflowError> {
    let _lock = ProjectLock::acquire(path)?;
    let mut project = load_project(path)?;
    let out = f(&mut project)?;
    save_project(path, &project)?;
    Ok(out)
}
