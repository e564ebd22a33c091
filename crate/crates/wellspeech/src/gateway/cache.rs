//! On-disk completion cache: `<root>/<model>/t<temperature>/<prompt hash>.json`,
//! each file holding one [`RawCompletion`].

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use super::RawCompletion;

#[derive(Debug)]
pub struct CompletionCache {
    root: PathBuf,
    write_lock: Mutex<()>,
}

fn slug(text: &str) -> String {
    text.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_') { c } else { '_' })
        .collect()
}

impl CompletionCache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self {
            root: root.into(),
            write_lock: Mutex::new(()),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn entry_path(&self, model_id: &str, temperature: f64, prompt_hash: &str) -> PathBuf {
        self.root
            .join(slug(model_id))
            .join(format!("t{temperature}"))
            .join(format!("{prompt_hash}.json"))
    }

    /// Cached successful completion, if any. Unreadable entries count as
    /// misses.
    pub fn get(&self, model_id: &str, temperature: f64, prompt_hash: &str) -> Option<RawCompletion> {
        let data = fs::read(self.entry_path(model_id, temperature, prompt_hash)).ok()?;
        let entry: RawCompletion = serde_json::from_slice(&data).ok()?;
        (entry.prompt_hash == prompt_hash && entry.is_ok()).then_some(entry)
    }

    /// Stores a completion; writes go through a temp file and rename.
    pub fn put(&self, temperature: f64, completion: &RawCompletion) -> io::Result<()> {
        let path = self.entry_path(&completion.model_id, temperature, &completion.prompt_hash);
        let _guard = self.write_lock.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, serde_json::to_vec_pretty(completion)?)?;
        fs::rename(tmp, path)
    }
}
