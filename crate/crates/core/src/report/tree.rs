//! Line-oriented key-value tree: `[section]` headers followed by
//! `key = value` lines. Keys may repeat inside a section; order is kept.

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Section {
    pub name: String,
    pub entries: Vec<(String, String)>,
}

impl Section {
    pub fn new(name: impl Into<String>) -> Self {
        Section { name: name.into(), entries: Vec::new() }
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.entries.push((key.into(), value.into()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReportTree {
    /// Comment lines (without `# `) emitted before the first section.
    pub preamble: Vec<String>,
    pub sections: Vec<Section>,
}

fn valid_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.' | '/'))
}

fn valid_value(s: &str) -> bool {
    !s.contains(['\n', '\r']) && s.trim() == s
}

impl ReportTree {
    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn emit(&self) -> Result<String> {
        let mut out = String::new();
        for line in &self.preamble {
            if line.contains('\n') {
                return Err(Error::InvalidArgument(format!("multi-line comment {line:?}")));
            }
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        for (n, s) in self.sections.iter().enumerate() {
            if !valid_name(&s.name) {
                return Err(Error::InvalidArgument(format!("bad section name {:?}", s.name)));
            }
            if n > 0 || !self.preamble.is_empty() {
                out.push('\n');
            }
            out.push('[');
            out.push_str(&s.name);
            out.push_str("]\n");
            for (k, v) in &s.entries {
                if !valid_name(k) || !valid_value(v) {
                    return Err(Error::InvalidArgument(format!("bad entry {k:?} = {v:?} in [{}]", s.name)));
                }
                out.push_str(k);
                out.push_str(" = ");
                out.push_str(v);
                out.push('\n');
            }
        }
        Ok(out)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut tree = ReportTree::default();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let err = |message: String| Error::ReportParse { line, message };
            if raw.is_empty() {
                continue;
            }
            if let Some(c) = raw.strip_prefix('#') {
                if tree.sections.is_empty() {
                    tree.preamble.push(c.strip_prefix(' ').unwrap_or(c).to_string());
                }
                continue;
            }
            if let Some(name) = raw.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
                if !valid_name(name) {
                    return Err(err(format!("bad section name {name:?}")));
                }
                tree.sections.push(Section::new(name));
                continue;
            }
            let (k, v) = raw.split_once(" = ").ok_or_else(|| err(format!("expected `key = value`, got {raw:?}")))?;
            if !valid_name(k) {
                return Err(err(format!("bad key {k:?}")));
            }
            let section = tree.sections.last_mut().ok_or_else(|| err("entry before any section".into()))?;
            section.push(k, v);
        }
        Ok(tree)
    }
}
