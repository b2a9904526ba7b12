//! JSON complex files and OFF triangle-mesh import.
//!
//! The JSON layout is
//! `{ "ambient_dim": d, "vertices": {"<id>": [coords]}, "maximal_simplices": [[ids]] }`
//! with an optional free-form `"metadata"` object.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::complex::{EmbeddedComplex, Embedding, build_complex};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComplexFile {
    pub ambient_dim: usize,
    pub vertices: BTreeMap<String, Vec<f64>>,
    pub maximal_simplices: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<serde_json::Value>,
}

impl ComplexFile {
    pub fn from_complex(k: &EmbeddedComplex) -> Self {
        Self {
            ambient_dim: k.ambient_dim(),
            vertices: k.embedding().iter().map(|(v, p)| (v.to_string(), p.to_vec())).collect(),
            maximal_simplices: k
                .complex()
                .maximal_simplices()
                .into_iter()
                .map(|s| s.vertices().to_vec())
                .collect(),
            metadata: None,
        }
    }

    pub fn to_complex(&self) -> Result<EmbeddedComplex> {
        let mut coords = BTreeMap::new();
        for (key, p) in &self.vertices {
            let id: usize = key
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("vertex id {key:?} is not a non-negative integer")))?;
            if coords.insert(id, p.clone()).is_some() {
                return Err(Error::Parse(format!("vertex id {id} listed twice")));
            }
        }
        let complex = build_complex(&self.maximal_simplices)?;
        EmbeddedComplex::new(complex, Embedding::new(self.ambient_dim, coords)?)
    }
}

pub fn complex_from_json_str(text: &str) -> Result<EmbeddedComplex> {
    let file: ComplexFile = serde_json::from_str(text)?;
    file.to_complex()
}

pub fn complex_to_json_string(k: &EmbeddedComplex) -> Result<String> {
    Ok(serde_json::to_string_pretty(&ComplexFile::from_complex(k))?)
}

/// Parse an OFF mesh. Only triangular faces are accepted; vertex ids are the
/// zero-based line order.
pub fn complex_from_off_str(text: &str) -> Result<EmbeddedComplex> {
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace);

    let header = tokens.next().ok_or_else(|| Error::Parse("empty OFF file".into()))?;
    // header may be glued to the counts, e.g. "OFF8 6 12"
    let mut pending = None;
    if header != "OFF" {
        match header.strip_prefix("OFF") {
            Some(rest) if !rest.is_empty() => pending = Some(rest),
            _ => return Err(Error::Parse(format!("expected OFF header, found {header:?}"))),
        }
    }
    let mut next = |what: &str| -> Result<&str> {
        pending
            .take()
            .or_else(|| tokens.next())
            .ok_or_else(|| Error::Parse(format!("unexpected end of OFF file reading {what}")))
    };
    let parse_usize = |s: &str, what: &str| -> Result<usize> {
        s.parse().map_err(|_| Error::Parse(format!("bad {what}: {s:?}")))
    };

    let nv = parse_usize(next("vertex count")?, "vertex count")?;
    let nf = parse_usize(next("face count")?, "face count")?;
    let _ne = next("edge count")?;

    let mut coords = BTreeMap::new();
    for v in 0..nv {
        let mut p = Vec::with_capacity(3);
        for _ in 0..3 {
            let s = next("vertex coordinate")?;
            p.push(s.parse::<f64>().map_err(|_| Error::Parse(format!("bad coordinate {s:?}")))?);
        }
        coords.insert(v, p);
    }
    let mut faces = Vec::with_capacity(nf);
    for f in 0..nf {
        let arity = parse_usize(next("face arity")?, "face arity")?;
        if arity != 3 {
            return Err(Error::Parse(format!("face {f} has {arity} vertices; only triangles are supported")));
        }
        let mut face = Vec::with_capacity(3);
        for _ in 0..3 {
            let v = parse_usize(next("face index")?, "face index")?;
            if v >= nv {
                return Err(Error::Parse(format!("face {f} references vertex {v} of {nv}")));
            }
            face.push(v);
        }
        faces.push(face);
    }
    // keep isolated vertices as 0-simplices
    let mut used = vec![false; nv];
    for f in &faces {
        for &v in f {
            used[v] = true;
        }
    }
    faces.extend((0..nv).filter(|&v| !used[v]).map(|v| vec![v]));

    let complex = build_complex(&faces)?;
    EmbeddedComplex::new(complex, Embedding::new(3, coords)?)
}

/// Load a complex from `.json` or `.off`, chosen by extension.
pub fn load_complex(path: &Path) -> Result<EmbeddedComplex> {
    let text = std::fs::read_to_string(path)?;
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("off") => complex_from_off_str(&text),
        _ => complex_from_json_str(&text),
    }
}

pub fn save_complex(path: &Path, k: &EmbeddedComplex, metadata: Option<serde_json::Value>) -> Result<()> {
    let mut file = ComplexFile::from_complex(k);
    file.metadata = metadata;
    std::fs::write(path, serde_json::to_string_pretty(&file)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_roundtrip_preserves_complex() {
        let text = r#"{ "ambient_dim": 2,
            "vertices": {"0": [0,0], "1": [1,0], "2": [0,1], "7": [5,5]},
            "maximal_simplices": [[0,1,2],[7]] }"#;
        let k = complex_from_json_str(text).unwrap();
        assert_eq!(k.complex().counts(), vec![4, 3, 1]);
        let again = complex_from_json_str(&complex_to_json_string(&k).unwrap()).unwrap();
        assert_eq!(k, again);
    }

    #[test]
    fn json_rejects_bad_ids_and_uncovered_vertices() {
        let bad_id = r#"{"ambient_dim":1,"vertices":{"a":[0]},"maximal_simplices":[[0]]}"#;
        assert!(matches!(complex_from_json_str(bad_id), Err(Error::Parse(_))));
        let uncovered = r#"{"ambient_dim":1,"vertices":{"0":[0]},"maximal_simplices":[[0,1]]}"#;
        assert!(matches!(complex_from_json_str(uncovered), Err(Error::EmbeddingMismatch(_))));
    }

    #[test]
    fn off_tetrahedron_surface() {
        let text = "OFF\n# comment\n4 4 6\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 1 2\n3 0 1 3\n3 0 2 3\n3 1 2 3\n";
        let k = complex_from_off_str(text).unwrap();
        assert_eq!(k.complex().counts(), vec![4, 6, 4]);
        assert_eq!(k.ambient_dim(), 3);
    }

    #[test]
    fn off_rejects_quads_and_out_of_range() {
        let quad = "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n";
        assert!(complex_from_off_str(quad).is_err());
        let oob = "OFF\n3 1 0\n0 0 0\n1 0 0\n1 1 0\n3 0 1 5\n";
        assert!(complex_from_off_str(oob).is_err());
    }

    #[test]
    fn off_keeps_isolated_vertices() {
        let text = "OFF\n4 1 0\n0 0 0\n1 0 0\n0 1 0\n9 9 9\n3 0 1 2\n";
        let k = complex_from_off_str(text).unwrap();
        assert_eq!(k.complex().counts(), vec![4, 3, 1]);
    }
}
