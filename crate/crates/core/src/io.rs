//! Reading and writing the shared JSON formats: structure definition
//! files, address lists, matrix dumps, and mass-ratio pairings.

use std::fs;
use std::path::Path;

use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::spectral::SpectralMatrix;
use crate::structure::{CloneAddress, CloneStructure};

/// Parse a structure definition. Placement scales left out of the file
/// are filled from the clone's inverse scale.
pub fn parse_structure(text: &str) -> Result<CloneStructure> {
    let mut s: CloneStructure =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    for c in &mut s.clones {
        if let Some(p) = &mut c.placement {
            if p.scale.is_nan() {
                p.scale = c.inverse_scale.to_f64();
            }
        }
    }
    Ok(s)
}

pub fn read_structure(path: &Path) -> Result<CloneStructure> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_structure(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn write_structure(path: &Path, s: &CloneStructure) -> Result<()> {
    let text = serde_json::to_string_pretty(s).map_err(|e| Error::Parse(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Matrix dump: `{"d": number | "0", "entries": [[...]]}`. The exponent
/// is emitted as the string "0" at zero, where entries are plain counts.
pub fn matrix_to_json(m: &SpectralMatrix) -> Value {
    let d = m.dimension_exponent();
    let d_value = if d == 0.0 { json!("0") } else { json!(d) };
    json!({ "d": d_value, "entries": m.rows() })
}

pub fn matrix_from_json(v: &Value) -> Result<SpectralMatrix> {
    #[derive(Deserialize)]
    struct Dump {
        d: Value,
        entries: Vec<Vec<f64>>,
    }
    let dump: Dump = serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
    let d = match &dump.d {
        Value::String(s) if s == "0" => 0.0,
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| Error::Parse("bad exponent".into()))?,
        other => return Err(Error::Parse(format!("bad exponent {other}"))),
    };
    SpectralMatrix::from_entries(d, dump.entries)
}

/// Address list: `[{"model": 1, "word": [1, 2]}, ...]`.
pub fn parse_addresses(text: &str) -> Result<Vec<CloneAddress>> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

/// Mass-ratio pairing file:
/// `{"pairs": [{"source": {...}, "target": {...}}, ...]}`.
#[derive(Debug, Deserialize)]
pub struct PairingFile {
    pub pairs: Vec<PairEntry>,
}

#[derive(Debug, Deserialize)]
pub struct PairEntry {
    pub source: CloneAddress,
    pub target: CloneAddress,
}

pub fn parse_pairing(text: &str) -> Result<Vec<(CloneAddress, CloneAddress)>> {
    let file: PairingFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    Ok(file
        .pairs
        .into_iter()
        .map(|p| (p.source, p.target))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;

    #[test]
    fn structure_round_trip() {
        for (name, s) in gallery::all_bundled() {
            let text = serde_json::to_string_pretty(&s).unwrap();
            let back = parse_structure(&text).unwrap();
            assert_eq!(
                serde_json::to_value(&back).unwrap(),
                serde_json::to_value(&s).unwrap(),
                "{name}"
            );
        }
    }

    #[test]
    fn placement_scale_defaults_to_inverse_scale() {
        let text = r#"{
            "models": [{"id": 1, "diameter": 1, "region": {"center": [0.5, 0.0], "radius": 0.5}}],
            "clones": [
                {"id": 1, "container": 1, "target": 1, "inverse_scale": {"num": 1, "den": 3},
                 "placement": {"translation": [0.0, 0.0]}},
                {"id": 2, "container": 1, "target": 1, "inverse_scale": {"num": 1, "den": 3},
                 "placement": {"translation": [0.6666666666666666, 0.0]}}
            ]
        }"#;
        let s = parse_structure(text).unwrap();
        let p = s.clones[0].placement.unwrap();
        assert!((p.scale - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn matrix_json_round_trip() {
        let m = crate::spectral::build_matrix(&gallery::two_model(), 0.5).unwrap();
        let v = matrix_to_json(&m);
        let back = matrix_from_json(&v).unwrap();
        assert_eq!(back.rows(), m.rows());
        assert_eq!(back.dimension_exponent(), 0.5);

        let m0 = crate::spectral::build_matrix(&gallery::two_model(), 0.0).unwrap();
        let v0 = matrix_to_json(&m0);
        assert_eq!(v0["d"], serde_json::json!("0"));
        assert_eq!(matrix_from_json(&v0).unwrap().rows(), m0.rows());
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = parse_structure("{\"models\": [{\"id\": }]}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line") && msg.contains("column"), "{msg}");
    }
}
