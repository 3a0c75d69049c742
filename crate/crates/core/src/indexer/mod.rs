//! Extracts op declarations from tagged doc comments and writes descriptor
//! YAML.
//!
//! ```text
//! /// Copies an array into a preallocated one.
//! /// @input input RealArray the source
//! /// @container output RealArray the destination
//! /// @implNote op names='copy.array' priority='100'
//! ```
//!
//! A `?` after an input name marks it optional. `@output <Type>` declares
//! the function output, always named `output`.

mod scan;
mod tags;

use std::collections::HashMap;
use std::path::Path;

pub use scan::{
    extract_blocks, scan, CommentBlock, Diagnostic, IndexError, ScanOptions, ScanOutput, DEFAULT_INCLUDE,
    DEFAULT_LINE_PREFIX,
};
pub use tags::{parse_tags, OpTagSet};

use crate::registry::emit_descriptors;

/// Descriptor YAML for the tag sets, in the given order.
pub fn emit_yaml(sets: &[OpTagSet]) -> String {
    let infos: Vec<_> = sets.iter().map(OpTagSet::to_info).collect();
    emit_descriptors(&infos)
}

#[derive(Debug, Clone, Default)]
pub struct IndexReport {
    pub ops: Vec<OpTagSet>,
    pub diagnostics: Vec<Diagnostic>,
    pub yaml: String,
}

/// Scans `root`, parses every block and emits YAML for the valid ones.
/// Blocks with problems are left out and reported.
pub fn index(root: &Path, opts: &ScanOptions) -> Result<IndexReport, IndexError> {
    let scanned = scan(root, opts)?;
    let mut report = IndexReport {
        diagnostics: scanned.diagnostics,
        ..Default::default()
    };
    let mut seen: HashMap<(String, String), (String, usize)> = HashMap::new();
    'blocks: for block in &scanned.blocks {
        let set = match parse_tags(block) {
            Ok(s) => s,
            Err(d) => {
                report.diagnostics.extend(d);
                continue;
            }
        };
        let key = set.to_info().signature_key();
        for name in &set.names {
            if let Some((path, line)) = seen.get(&(name.clone(), key.clone())) {
                report.diagnostics.push(Diagnostic::new(
                    set.path.clone(),
                    set.line,
                    format!("duplicate op {name} {key}, first declared at {path}:{line}"),
                ));
                continue 'blocks;
            }
        }
        for name in &set.names {
            seen.insert((name.clone(), key.clone()), (set.path.clone(), set.line));
        }
        report.ops.push(set);
    }
    report.diagnostics.sort();
    report.yaml = emit_yaml(&report.ops);
    Ok(report)
}
