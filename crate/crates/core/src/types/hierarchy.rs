use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use super::semantic::{Bindings, SemanticType};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HierarchyError {
    #[error("subtype edge {sub} -> {sup} would introduce a cycle")]
    Cycle { sub: String, sup: String },
    #[error("invalid type name in subtype edge: {0:?}")]
    InvalidName(String),
}

/// Declared subtype edges between base names.
///
/// Only direct edges are stored; reflexive and transitive closure is
/// computed per query.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypeHierarchy {
    parents: BTreeMap<String, BTreeSet<String>>,
}

impl TypeHierarchy {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_edge(&mut self, sub: &str, sup: &str) -> Result<(), HierarchyError> {
        for name in [sub, sup] {
            if !super::semantic::is_identifier(name) {
                return Err(HierarchyError::InvalidName(name.to_string()));
            }
        }
        if self.is_subtype(sup, sub) {
            return Err(HierarchyError::Cycle {
                sub: sub.to_string(),
                sup: sup.to_string(),
            });
        }
        self.parents.entry(sub.to_string()).or_default().insert(sup.to_string());
        Ok(())
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.parents
            .iter()
            .flat_map(|(sub, sups)| sups.iter().map(move |sup| (sub.as_str(), sup.as_str())))
    }

    /// Reflexive-transitive subtype query over base names.
    pub fn is_subtype(&self, sub: &str, sup: &str) -> bool {
        if sub == sup {
            return true;
        }
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([sub]);
        while let Some(cur) = queue.pop_front() {
            if let Some(ps) = self.parents.get(cur) {
                for p in ps {
                    if p == sup {
                        return true;
                    }
                    if seen.insert(p.as_str()) {
                        queue.push_back(p);
                    }
                }
            }
        }
        false
    }

    /// `from` may be used where `to` is expected.
    pub fn is_assignable(&self, from: &SemanticType, to: &SemanticType) -> bool {
        let mut b = Bindings::new();
        self.assign(from, to, &mut b)
    }

    /// Assignability with unification. Variables on either side bind to the
    /// opposite type, consistently with bindings already present. On failure
    /// `bindings` is left untouched.
    pub fn assign(&self, from: &SemanticType, to: &SemanticType, bindings: &mut Bindings) -> bool {
        let mut scratch = bindings.clone();
        if self.assign_inner(from, to, &mut scratch) {
            *bindings = scratch;
            true
        } else {
            false
        }
    }

    fn assign_inner(&self, from: &SemanticType, to: &SemanticType, b: &mut Bindings) -> bool {
        match (from, to) {
            (_, SemanticType::Var(v)) => match b.get(v).cloned() {
                Some(bound) if &bound != to => self.assign_inner(from, &bound, b),
                Some(_) => true,
                None => {
                    if from != to {
                        b.insert(v.clone(), from.clone());
                    }
                    true
                }
            },
            (SemanticType::Var(v), _) => match b.get(v).cloned() {
                Some(bound) if &bound != from => self.assign_inner(&bound, to, b),
                Some(_) => true,
                None => {
                    b.insert(v.clone(), to.clone());
                    true
                }
            },
            (SemanticType::Named { base: fb, params: fp }, SemanticType::Named { base: tb, params: tp }) => {
                fp.len() == tp.len()
                    && self.is_subtype(fb, tb)
                    && fp.iter().zip(tp).all(|(f, t)| self.assign_inner(f, t, b))
            }
        }
    }
}

/// Structural unification without subtyping. Variables in `pattern` bind to
/// the matching part of `target`; variables in `target` are opaque names.
pub fn unify(pattern: &SemanticType, target: &SemanticType, bindings: &mut Bindings) -> bool {
    match pattern {
        SemanticType::Var(v) => match bindings.get(v) {
            Some(bound) => bound == target,
            None => {
                bindings.insert(v.clone(), target.clone());
                true
            }
        },
        SemanticType::Named { base, params } => match target {
            SemanticType::Named { base: tb, params: tp } => {
                base == tb && params.len() == tp.len() && params.iter().zip(tp).all(|(p, t)| unify(p, t, bindings))
            }
            SemanticType::Var(_) => false,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t(s: &str) -> SemanticType {
        SemanticType::parse(s).unwrap()
    }

    fn images() -> TypeHierarchy {
        let mut h = TypeHierarchy::new();
        h.add_edge("ImageU8", "Image").unwrap();
        h.add_edge("ImageF64", "Image").unwrap();
        h
    }

    #[test]
    fn reflexive_and_declared_edges() {
        let h = images();
        assert!(h.is_assignable(&t("ImageU8"), &t("ImageU8")));
        assert!(h.is_assignable(&t("ImageU8"), &t("Image")));
        assert!(!h.is_assignable(&t("Image"), &t("ImageU8")));
        assert!(!h.is_assignable(&t("ImageU8"), &t("ImageF64")));
    }

    #[test]
    fn parameters_are_covariant() {
        let h = images();
        assert!(h.is_assignable(&t("List<ImageU8>"), &t("List<Image>")));
        assert!(!h.is_assignable(&t("List<Image>"), &t("List<ImageU8>")));
        assert!(!h.is_assignable(&t("List<Image>"), &t("List")));
    }

    #[test]
    fn variables_bind_consistently() {
        let h = images();
        let mut b = Bindings::new();
        assert!(h.assign(&t("Pair<Real, Real>"), &t("Pair<'E, 'E>"), &mut b));
        assert_eq!(b["E"], t("Real"));
        let mut b = Bindings::new();
        assert!(!h.assign(&t("Pair<Real, Text>"), &t("Pair<'E, 'E>"), &mut b));
        assert!(b.is_empty(), "failed assignment must not leak bindings");
    }

    #[test]
    fn cycles_rejected() {
        let mut h = TypeHierarchy::new();
        h.add_edge("A", "B").unwrap();
        h.add_edge("B", "C").unwrap();
        assert!(matches!(h.add_edge("C", "A"), Err(HierarchyError::Cycle { .. })));
        assert!(h.add_edge("A", "A").is_err());
    }

    #[test]
    fn unify_is_structural() {
        let mut b = Bindings::new();
        assert!(unify(
            &t("Computer<'O, 'I, 'O>"),
            &t("Computer<ImageF64, Real, ImageF64>"),
            &mut b
        ));
        assert_eq!(b["O"], t("ImageF64"));
        let mut b = Bindings::new();
        assert!(!unify(
            &t("Computer<'O, 'I, 'O>"),
            &t("Computer<ImageF64, Real, Real>"),
            &mut b
        ));
    }

    fn arb_hierarchy() -> impl Strategy<Value = (TypeHierarchy, Vec<String>)> {
        // edges only go from lower to higher index, which keeps the graph acyclic
        prop::collection::vec((0usize..8, 0usize..8), 0..16).prop_map(|pairs| {
            let names: Vec<String> = (0..8).map(|i| format!("T{i}")).collect();
            let mut h = TypeHierarchy::new();
            for (a, b) in pairs {
                if a < b {
                    h.add_edge(&names[a], &names[b]).unwrap();
                }
            }
            (h, names)
        })
    }

    proptest! {
        #[test]
        fn assignability_reflexive((h, names) in arb_hierarchy(), i in 0usize..8, j in 0usize..8) {
            let ty = SemanticType::with_params(names[i].clone(), vec![SemanticType::named(names[j].clone())]);
            prop_assert!(h.is_assignable(&ty, &ty));
        }

        #[test]
        fn assignability_transitive((h, names) in arb_hierarchy(), a in 0usize..8, b in 0usize..8, c in 0usize..8) {
            let (ta, tb, tc) = (
                SemanticType::named(names[a].clone()),
                SemanticType::named(names[b].clone()),
                SemanticType::named(names[c].clone()),
            );
            if h.is_assignable(&ta, &tb) && h.is_assignable(&tb, &tc) {
                prop_assert!(h.is_assignable(&ta, &tc));
            }
            let (la, lc) = (
                SemanticType::with_params("List", vec![ta]),
                SemanticType::with_params("List", vec![tc]),
            );
            if h.is_assignable(&la, &SemanticType::with_params("List", vec![tb.clone()]))
                && h.is_assignable(&SemanticType::with_params("List", vec![tb]), &lc)
            {
                prop_assert!(h.is_assignable(&la, &lc));
            }
        }
    }
}
