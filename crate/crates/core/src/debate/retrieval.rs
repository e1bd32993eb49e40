use std::collections::BTreeSet;
use std::path::PathBuf;

use super::DebateError;
use crate::agent::Document;

/// Local literature corpus: one document per regular file in a directory,
/// title on the first line and abstract in the remainder.
#[derive(Debug, Clone)]
pub struct CorpusProvider {
    docs: Vec<(String, Document)>,
}

/// Lowercased alphanumeric tokens.
pub fn tokenize(text: &str) -> BTreeSet<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

impl CorpusProvider {
    /// Opens a `corpus:<directory>` provider.
    pub fn open(uri: &str) -> Result<Self, DebateError> {
        let dir = uri
            .strip_prefix("corpus:")
            .ok_or_else(|| DebateError::ProviderUnavailable(format!("unsupported provider `{uri}`")))?;
        let dir = PathBuf::from(dir);
        let rd = std::fs::read_dir(&dir).map_err(|e| DebateError::ProviderUnavailable(format!("{}: {e}", dir.display())))?;
        let mut docs = Vec::new();
        for entry in rd {
            let entry = entry.map_err(|e| DebateError::ProviderUnavailable(e.to_string()))?;
            let path = entry.path();
            if !path.is_file() {
                continue;
            }
            let text = std::fs::read_to_string(&path)
                .map_err(|e| DebateError::ProviderUnavailable(format!("{}: {e}", path.display())))?;
            let (title, rest) = text.split_once('\n').unwrap_or((text.as_str(), ""));
            let file = entry.file_name().to_string_lossy().into_owned();
            docs.push((
                file.clone(),
                Document {
                    title: title.trim().to_string(),
                    abstract_text: rest.trim().to_string(),
                    source: file,
                },
            ));
        }
        docs.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(Self { docs })
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    /// Up to `k` documents sharing at least one token with `query`, ranked by
    /// the number of shared tokens, ties by file name.
    pub fn retrieve(&self, query: &str, k: usize) -> Vec<Document> {
        let q = tokenize(query);
        let mut scored: Vec<(usize, &str, &Document)> = self
            .docs
            .iter()
            .map(|(file, d)| {
                let toks = tokenize(&format!("{}\n{}", d.title, d.abstract_text));
                (q.intersection(&toks).count(), file.as_str(), d)
            })
            .filter(|(s, _, _)| *s > 0)
            .collect();
        scored.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(b.1)));
        scored.into_iter().take(k).map(|(_, _, d)| d.clone()).collect()
    }
}
