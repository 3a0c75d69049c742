use std::sync::Arc;

use super::info::{IoRole, OpInfo, OpKind};

/// Priority penalty applied per omitted parameter.
pub const REDUCTION_PENALTY: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{op}: optional parameters must be trailing (offending parameter {param:?})")]
pub struct ReductionError {
    pub op: String,
    pub param: String,
}

/// Returns `info` followed by one variant per right-anchored run of omitted
/// optional inputs, shortest omission first.
pub fn reduce_optional(info: &OpInfo) -> Result<Vec<OpInfo>, ReductionError> {
    let input_idx: Vec<usize> = info
        .params
        .iter()
        .enumerate()
        .filter(|(_, p)| p.io == IoRole::Input)
        .map(|(i, _)| i)
        .collect();
    let optional_count = input_idx.iter().filter(|&&i| info.params[i].optional).count();
    let trailing = input_idx.iter().rev().take_while(|&&i| info.params[i].optional).count();
    if trailing != optional_count {
        let offending = input_idx
            .iter()
            .find(|&&i| info.params[i].optional)
            .map(|&i| info.params[i].name.clone())
            .unwrap_or_default();
        return Err(ReductionError {
            op: info.name().to_string(),
            param: offending,
        });
    }

    let original = Arc::new(info.clone());
    let mut variants = vec![info.clone()];
    for removed in 1..=optional_count {
        let drop: Vec<usize> = input_idx[input_idx.len() - removed..].to_vec();
        let params: Vec<_> = info
            .params
            .iter()
            .enumerate()
            .filter(|(i, _)| !drop.contains(i))
            .map(|(_, p)| p.clone())
            .collect();
        let kind = match info.kind {
            OpKind::Inplace(_) => OpKind::Inplace(params.iter().position(|p| p.io == IoRole::Mutable).unwrap_or(0)),
            k => k,
        };
        variants.push(OpInfo {
            params,
            kind,
            priority: info.priority - REDUCTION_PENALTY * removed as f64,
            reduced_from: Some(original.clone()),
            ..info.clone()
        });
    }
    Ok(variants)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::info::ParamSpec;
    use crate::types::SemanticType;

    fn param(name: &str, ty: &str, io: IoRole, optional: bool) -> ParamSpec {
        ParamSpec {
            optional,
            ..ParamSpec::new(name, SemanticType::parse(ty).unwrap(), io)
        }
    }

    fn info(params: Vec<ParamSpec>) -> OpInfo {
        let kind = OpKind::infer(params.iter().map(|p| p.io)).unwrap();
        OpInfo {
            names: vec!["filter.fft".into()],
            kind,
            priority: 0.0,
            params,
            dependencies: vec![],
            source: "builtin:filter/fft".into(),
            description: String::new(),
            reduced_from: None,
        }
    }

    #[test]
    fn fft_has_three_variants() {
        let fft = info(vec![
            param("input", "ImageF64", IoRole::Input, false),
            param("fftType", "Text", IoRole::Input, false),
            param("borderSize", "Integer", IoRole::Input, true),
            param("fast", "Boolean", IoRole::Input, true),
            param("output", "ImageF64", IoRole::Output, false),
        ]);
        let v = reduce_optional(&fft).unwrap();
        let arities: Vec<String> = v
            .iter()
            .map(|i| i.inputs().map(|p| p.name.as_str()).collect::<Vec<_>>().join(","))
            .collect();
        assert_eq!(
            arities,
            [
                "input,fftType,borderSize,fast",
                "input,fftType,borderSize",
                "input,fftType"
            ]
        );
        assert_eq!(v[1].priority, -1e-6);
        assert_eq!(v[2].priority, -2e-6);
        assert_eq!(v[2].removed_params(), 2);
        assert_eq!(v[1].reduced_from.as_deref(), Some(&fft));
    }

    #[test]
    fn no_optionals_is_identity() {
        let plain = info(vec![
            param("a", "Real", IoRole::Input, false),
            param("out", "Real", IoRole::Output, false),
        ]);
        assert_eq!(reduce_optional(&plain).unwrap(), vec![plain]);
    }

    #[test]
    fn non_trailing_rejected() {
        let bad = info(vec![
            param("a", "Real", IoRole::Input, true),
            param("b", "Real", IoRole::Input, false),
            param("out", "Real", IoRole::Output, false),
        ]);
        let err = reduce_optional(&bad).unwrap_err();
        assert!(err.to_string().contains("optional parameters must be trailing"));
    }

    #[test]
    fn inplace_index_tracks_removal() {
        let op = info(vec![
            param("a", "Real", IoRole::Input, true),
            param("m", "ByteArray", IoRole::Mutable, false),
        ]);
        let v = reduce_optional(&op).unwrap();
        assert_eq!(v[0].kind, OpKind::Inplace(1));
        assert_eq!(v[1].kind, OpKind::Inplace(0));
    }
}
