//! Versioned TOML instance files.
//!
//! ```toml
//! version = 1
//! n = 2
//! m = 3
//! kind = "two-valued"
//! scale = 1
//! a = 5
//! b = 1
//! values = [[5, 1, 5], [1, 1, 5]]
//! ```
//!
//! `a` and `b` are the public high and low values and appear only for the
//! two-valued kind. Fields are written in this order so files diff cleanly.

use std::path::Path;

use fairbits_core::model::ModelError;
use fairbits_core::{Instance, Valuation, ValuationKind};
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("malformed instance file: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("unsupported instance file version {found} (expected {FORMAT_VERSION})")]
    Version { found: u32 },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("unknown valuation kind {0:?}")]
    Kind(String),
    #[error("invalid instance: {0}")]
    Invalid(#[from] ModelError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    version: u32,
    n: usize,
    m: usize,
    kind: String,
    scale: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    a: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    b: Option<u64>,
    values: Vec<Vec<u64>>,
}

pub fn serialize_instance(inst: &Instance) -> String {
    let (a, b) = match inst.kind() {
        ValuationKind::TwoValued { high, low } => (Some(high), Some(low)),
        _ => (None, None),
    };
    let file = InstanceFile {
        version: FORMAT_VERSION,
        n: inst.n(),
        m: inst.m(),
        kind: inst.kind().name().to_string(),
        scale: inst.scale(),
        a,
        b,
        values: inst.valuations().iter().map(|v| v.values().to_vec()).collect(),
    };
    // One row per agent keeps value matrices readable.
    let mut out = toml::to_string(&file).expect("instance files always serialize");
    let rows: Vec<String> = file.values.iter().map(|r| format!("    {r:?},")).collect();
    let start = out.find("values = ").expect("values field is present");
    out.truncate(start);
    out.push_str("values = [\n");
    out.push_str(&rows.join("\n"));
    out.push_str("\n]\n");
    out
}

pub fn parse_instance(text: &str) -> Result<Instance, FormatError> {
    let file: InstanceFile = toml::from_str(text)?;
    if file.version != FORMAT_VERSION {
        return Err(FormatError::Version { found: file.version });
    }
    if file.values.len() != file.n {
        return Err(FormatError::Shape(format!("n = {} but {} value rows", file.n, file.values.len())));
    }
    if let Some((agent, row)) = file.values.iter().enumerate().find(|(_, r)| r.len() != file.m) {
        return Err(FormatError::Shape(format!("m = {} but row {agent} has {} values", file.m, row.len())));
    }
    let kind = match (file.kind.as_str(), file.a, file.b) {
        ("unit-demand", None, None) => ValuationKind::UnitDemand,
        ("binary", None, None) => ValuationKind::BinaryAdditive,
        ("additive", None, None) => ValuationKind::Additive,
        ("two-valued", Some(high), Some(low)) => ValuationKind::TwoValued { high, low },
        ("two-valued", _, _) => return Err(FormatError::Shape("two-valued kind needs both a and b".into())),
        ("unit-demand" | "binary" | "additive", _, _) => {
            return Err(FormatError::Shape(format!("kind {} takes no a or b", file.kind)))
        }
        _ => return Err(FormatError::Kind(file.kind)),
    };
    let valuations =
        file.values.into_iter().map(|row| Valuation::new(kind, row, file.scale)).collect::<Result<Vec<_>, _>>()?;
    Ok(Instance::new(valuations)?)
}

pub fn read_instance(path: &Path) -> Result<Instance, FormatError> {
    let text =
        std::fs::read_to_string(path).map_err(|source| FormatError::Io { path: path.display().to_string(), source })?;
    parse_instance(&text)
}

pub fn write_instance(path: &Path, inst: &Instance) -> Result<(), FormatError> {
    std::fs::write(path, serialize_instance(inst))
        .map_err(|source| FormatError::Io { path: path.display().to_string(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_valued_roundtrip_keeps_public_values() {
        let kind = ValuationKind::TwoValued { high: 5, low: 1 };
        let inst = Instance::new(vec![
            Valuation::new(kind, vec![5, 1, 5], 1).unwrap(),
            Valuation::new(kind, vec![1, 1, 5], 1).unwrap(),
        ])
        .unwrap();
        let text = serialize_instance(&inst);
        assert!(text.starts_with("version = 1\nn = 2\nm = 3\nkind = \"two-valued\"\nscale = 1\na = 5\nb = 1\n"));
        assert_eq!(parse_instance(&text).unwrap(), inst);
    }

    #[test]
    fn error_kinds_are_distinct() {
        let good = "version = 1\nn = 1\nm = 2\nkind = \"additive\"\nscale = 1\nvalues = [[1, 2]]\n";
        assert!(parse_instance(good).is_ok());
        let cases = [
            (good.replace("version = 1", "version = 2"), "version"),
            (good.replace("m = 2", "m = 3"), "shape"),
            (good.replace("additive", "submodular"), "kind"),
            (good.replace("scale = 1", "scale = 0"), "invalid"),
            (good[..good.len() - 4].to_string(), "syntax"),
        ];
        for (text, what) in cases {
            let err = parse_instance(&text).unwrap_err();
            let got = match err {
                FormatError::Syntax(_) => "syntax",
                FormatError::Version { .. } => "version",
                FormatError::Shape(_) => "shape",
                FormatError::Kind(_) => "kind",
                FormatError::Invalid(_) => "invalid",
                FormatError::Io { .. } => "io",
            };
            assert_eq!(got, what, "{text}");
        }
    }
}
