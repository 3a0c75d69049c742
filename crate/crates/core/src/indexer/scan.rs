use std::fmt;
use std::path::{Path, PathBuf};

use globset::{Glob, GlobSet, GlobSetBuilder};
use thiserror::Error;
use walkdir::WalkDir;

pub const DEFAULT_INCLUDE: &[&str] = &["**/*.rs", "**/*.java"];
pub const DEFAULT_LINE_PREFIX: &str = "///";
const MARKER: &str = "@implNote";

/// One contiguous doc comment. Line `k` of `text` sits at `start_line + k`
/// in the file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommentBlock {
    /// Relative to the scan root, `/`-separated.
    pub path: String,
    pub start_line: usize,
    pub text: String,
}

impl CommentBlock {
    pub fn lines(&self) -> impl Iterator<Item = (usize, &str)> {
        self.text
            .lines()
            .enumerate()
            .map(move |(k, l)| (self.start_line + k, l))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Diagnostic {
    pub path: String,
    pub line: usize,
    pub message: String,
}

impl Diagnostic {
    pub fn new(path: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.path, self.line, self.message)
    }
}

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("{0}: no such directory")]
    MissingRoot(PathBuf),
    #[error("bad include pattern {pattern:?}: {message}")]
    Glob { pattern: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone)]
pub struct ScanOptions {
    pub include: Vec<String>,
    pub line_prefix: String,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            include: DEFAULT_INCLUDE.iter().map(|s| s.to_string()).collect(),
            line_prefix: DEFAULT_LINE_PREFIX.to_string(),
        }
    }
}

impl ScanOptions {
    /// Falls back to the defaults when `include` is empty.
    pub fn with_include(include: Vec<String>) -> Self {
        let mut opts = Self::default();
        if !include.is_empty() {
            opts.include = include;
        }
        opts
    }
}

#[derive(Debug, Clone, Default)]
pub struct ScanOutput {
    pub blocks: Vec<CommentBlock>,
    pub diagnostics: Vec<Diagnostic>,
}

fn glob_set(patterns: &[String]) -> Result<GlobSet, IndexError> {
    let mut b = GlobSetBuilder::new();
    for p in patterns {
        let g = Glob::new(p).map_err(|e| IndexError::Glob {
            pattern: p.clone(),
            message: e.kind().to_string(),
        })?;
        b.add(g);
    }
    b.build().map_err(|e| IndexError::Glob {
        pattern: patterns.join(","),
        message: e.to_string(),
    })
}

fn relative(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

/// Collects every tagged doc comment under `root`, ordered by path then
/// line.
pub fn scan(root: &Path, opts: &ScanOptions) -> Result<ScanOutput, IndexError> {
    if !root.is_dir() {
        return Err(IndexError::MissingRoot(root.to_path_buf()));
    }
    let globs = glob_set(&opts.include)?;
    let mut out = ScanOutput::default();
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = match entry {
            Ok(e) => e,
            Err(e) => {
                let path = e.path().map(|p| relative(root, p)).unwrap_or_default();
                out.diagnostics
                    .push(Diagnostic::new(path, 1, format!("unreadable: {e}")));
                continue;
            }
        };
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = relative(root, entry.path());
        if !globs.is_match(&rel) {
            continue;
        }
        match std::fs::read(entry.path()) {
            Ok(bytes) => {
                let text = String::from_utf8_lossy(&bytes);
                out.blocks.extend(extract_blocks(&rel, &text, &opts.line_prefix));
            }
            Err(e) => out
                .diagnostics
                .push(Diagnostic::new(rel, 1, format!("unreadable: {e}"))),
        }
    }
    out.blocks
        .sort_by(|a, b| (&a.path, a.start_line).cmp(&(&b.path, b.start_line)));
    out.diagnostics.sort();
    Ok(out)
}

fn strip_one_space(s: &str) -> &str {
    s.strip_prefix(' ').unwrap_or(s)
}

fn line_comment<'a>(line: &'a str, prefix: &str) -> Option<&'a str> {
    let rest = line.trim_start().strip_prefix(prefix)?;
    let repeat = prefix.chars().last();
    if rest.starts_with(|c| Some(c) == repeat) {
        return None;
    }
    Some(strip_one_space(rest))
}

fn block_line(line: &str) -> &str {
    let t = line.trim_start();
    match t.strip_prefix('*') {
        Some(r) if !r.starts_with('/') => strip_one_space(r),
        _ => t,
    }
}

/// Splits `text` into doc comments (runs of `prefix` lines and `/** */`
/// blocks) and keeps the ones mentioning `@implNote`.
pub fn extract_blocks(path: &str, text: &str, prefix: &str) -> Vec<CommentBlock> {
    let lines: Vec<&str> = text.lines().collect();
    let mut blocks = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        let start = i;
        let mut body: Vec<String> = Vec::new();
        let trimmed = lines[i].trim_start();
        if !prefix.is_empty() && line_comment(lines[i], prefix).is_some() {
            while let Some(c) = lines.get(i).and_then(|l| line_comment(l, prefix)) {
                body.push(c.trim_end().to_string());
                i += 1;
            }
        } else if let Some(rest) = trimmed
            .strip_prefix("/**")
            .filter(|r| !r.starts_with('*') && !r.starts_with('/'))
        {
            let mut current = strip_one_space(rest);
            loop {
                if let Some(end) = current.find("*/") {
                    body.push(current[..end].trim_end().to_string());
                    i += 1;
                    break;
                }
                body.push(current.trim_end().to_string());
                i += 1;
                match lines.get(i) {
                    Some(l) => current = block_line(l),
                    None => break,
                }
            }
        } else {
            i += 1;
            continue;
        }
        while body.last().is_some_and(|l| l.is_empty()) {
            body.pop();
        }
        if body.iter().any(|l| l.contains(MARKER)) {
            blocks.push(CommentBlock {
                path: path.to_string(),
                start_line: start + 1,
                text: body.join("\n"),
            });
        }
    }
    blocks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_comments() {
        let src = "fn a() {}\n/// Adds.\n/// @implNote op names='x.y'\nfn b() {}\n/// untagged\nfn c() {}\n";
        let b = extract_blocks("a.rs", src, "///");
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].start_line, 2);
        assert_eq!(b[0].text, "Adds.\n@implNote op names='x.y'");
    }

    #[test]
    fn four_slashes_are_not_doc() {
        let b = extract_blocks("a.rs", "//// @implNote op names='x.y'\n", "///");
        assert!(b.is_empty());
    }

    #[test]
    fn javadoc_block() {
        let src = "class A {\n  /**\n   * Copies.\n   * @implNote op names='copy.array'\n   */\n  void f() {}\n}\n";
        let b = extract_blocks("A.java", src, "///");
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].start_line, 2);
        let lines: Vec<_> = b[0].lines().collect();
        assert_eq!(lines[2], (4, "@implNote op names='copy.array'"));
    }

    #[test]
    fn single_line_javadoc() {
        let b = extract_blocks("A.java", "/** @implNote op names='a.b' */\n", "///");
        assert_eq!(b[0].text, "@implNote op names='a.b'");
    }

    #[test]
    fn missing_root() {
        let err = scan(Path::new("/definitely/not/here"), &ScanOptions::default()).unwrap_err();
        assert!(matches!(err, IndexError::MissingRoot(_)));
    }
}
