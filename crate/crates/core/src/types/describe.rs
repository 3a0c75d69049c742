use std::collections::BTreeMap;

use super::semantic::SemanticType;

/// Simplified, package-neutral names for types, used in help output.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DescriptorTable {
    entries: BTreeMap<String, String>,
}

impl DescriptorTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, base: impl Into<String>, description: impl Into<String>) {
        self.entries.insert(base.into(), description.into());
    }

    pub fn get(&self, base: &str) -> Option<&str> {
        self.entries.get(base).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Mapped bases collapse to their description; unmapped bases keep their
    /// name and describe their parameters recursively.
    pub fn describe(&self, t: &SemanticType) -> String {
        match t {
            SemanticType::Var(v) => format!("'{v}"),
            SemanticType::Named { base, params } => {
                if let Some(d) = self.get(base).filter(|d| !d.is_empty()) {
                    return d.to_string();
                }
                if params.is_empty() {
                    return base.clone();
                }
                let inner: Vec<String> = params.iter().map(|p| self.describe(p)).collect();
                format!("{base}<{}>", inner.join(","))
            }
        }
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for DescriptorTable {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        let mut t = DescriptorTable::new();
        for (k, v) in iter {
            t.insert(k, v);
        }
        t
    }
}
