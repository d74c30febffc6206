//! Built-in curve corpus and the optional on-disk extension.

use std::path::{Path, PathBuf};

use rand::Rng;

use crate::error::{Error, Result};
use crate::poly::{CurveSpec, PolyCurve, Polynomial};
use crate::rng::stream;

/// Bumped whenever a built-in curve changes.
pub const CORPUS_VERSION: u32 = 1;

/// Directory scanned for extra `<name>.toml` curve specs.
pub const CORPUS_DIR_ENV: &str = "CURVELAB_CORPUS_DIR";

pub const RANDOM_DIM: usize = 3;
pub const RANDOM_DEGREE: usize = 6;
pub const RANDOM_COEFF_BOUND: i64 = 5;

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: String,
    pub description: String,
    pub curve: PolyCurve,
}

fn curve(comps: &[&[i64]]) -> PolyCurve {
    PolyCurve::new(comps.iter().map(|c| Polynomial::from_i64s(c)).collect()).expect("built-in curve is valid")
}

/// Fixed curves, in listing order.
pub fn builtin() -> Vec<CorpusEntry> {
    let mut out = Vec::new();
    for d in 2..=5 {
        out.push(CorpusEntry {
            name: format!("moment-{d}"),
            description: format!("({})", (1..=d).map(|j| if j == 1 { "t".to_string() } else { format!("t^{j}") }).collect::<Vec<_>>().join(", ")),
            curve: PolyCurve::moment(d).expect("moment curve"),
        });
    }
    out.push(CorpusEntry { name: "cusp".into(), description: "(t^2, t^3)".into(), curve: curve(&[&[0, 0, 1], &[0, 0, 0, 1]]) });
    out.push(CorpusEntry {
        name: "inflection".into(),
        description: "(t, t^3 - 3t)".into(),
        curve: curve(&[&[0, 1], &[0, -3, 0, 1]]),
    });
    out.push(CorpusEntry {
        name: "quartic-twist".into(),
        description: "(t, t^2, t^4)".into(),
        curve: curve(&[&[0, 1], &[0, 0, 1], &[0, 0, 0, 0, 1]]),
    });
    out
}

/// A nondegenerate curve in `R^3` with integer coefficients in `[-5, 5]` of
/// degree exactly 6, drawn from the counter stream of `seed` (redrawn on
/// the next stream index if degenerate).
pub fn random_curve(seed: u64) -> PolyCurve {
    for index in 0.. {
        let mut rng = stream(seed, index);
        let comps: Vec<Polynomial> = (0..RANDOM_DIM)
            .map(|_| {
                let c: Vec<i64> =
                    (0..=RANDOM_DEGREE).map(|_| rng.random_range(-RANDOM_COEFF_BOUND..=RANDOM_COEFF_BOUND)).collect();
                Polynomial::from_i64s(&c)
            })
            .collect();
        if let Ok(c) = PolyCurve::new(comps) {
            if c.degree() == RANDOM_DEGREE && c.is_nondegenerate() {
                return c;
            }
        }
    }
    unreachable!("stream indices exhausted")
}

fn corpus_dir() -> Option<PathBuf> {
    std::env::var_os(CORPUS_DIR_ENV).map(PathBuf::from)
}

fn load_dir(dir: &Path) -> Result<Vec<CorpusEntry>> {
    let mut out = Vec::new();
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    for p in paths {
        let name = p.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        let text = std::fs::read_to_string(&p)?;
        let spec = CurveSpec::from_toml_str(&text)
            .and_then(|s| s.to_curve())
            .map_err(|e| Error::config(format!("{}", p.display()), e.to_string()))?;
        out.push(CorpusEntry { name, description: format!("from {}", p.display()), curve: spec });
    }
    Ok(out)
}

/// Built-in entries followed by those of the corpus directory, if set.
pub fn list() -> Result<Vec<CorpusEntry>> {
    let mut out = builtin();
    if let Some(dir) = corpus_dir() {
        out.extend(load_dir(&dir)?);
    }
    Ok(out)
}

/// Looks up a corpus name; `random-<seed>` names any seed.
pub fn lookup(name: &str) -> Result<PolyCurve> {
    if let Some(seed) = name.strip_prefix("random-") {
        let seed: u64 = seed.parse().map_err(|_| Error::config("curve.corpus", format!("bad random seed in {name:?}")))?;
        return Ok(random_curve(seed));
    }
    if let Some(e) = builtin().into_iter().find(|e| e.name == name) {
        return Ok(e.curve);
    }
    if let Some(dir) = corpus_dir() {
        if let Some(e) = load_dir(&dir)?.into_iter().find(|e| e.name == name) {
            return Ok(e.curve);
        }
    }
    Err(Error::config("curve.corpus", format!("unknown corpus curve {name:?}")))
}

/// Names used by whole-corpus runs: the fixed curves plus `random-<seed>`.
pub fn standard_names(seed: u64) -> Vec<String> {
    let mut names: Vec<String> = builtin().into_iter().map(|e| e.name).collect();
    names.push(format!("random-{seed}"));
    names
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_names_unique() {
        let names: Vec<String> = builtin().into_iter().map(|e| e.name).collect();
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), names.len());
        assert!(builtin().iter().all(|e| e.curve.is_nondegenerate()));
    }

    #[test]
    fn random_curves_reproducible() {
        let a = random_curve(3);
        assert_eq!(a.components(), random_curve(3).components());
        assert_ne!(a.components(), random_curve(4).components());
        assert_eq!(a.dim(), 3);
        assert_eq!(a.degree(), 6);
        assert_eq!(lookup("random-3").unwrap().components(), a.components());
        assert!(lookup("random-x").is_err());
        assert!(lookup("nope").is_err());
    }

    #[test]
    fn directory_entries() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("twisted.toml"), "dim = 2\ncoeffs = [[\"0\", \"1\"], [\"0\", \"0\", \"1/3\"]]\n")
            .unwrap();
        let entries = load_dir(dir.path()).unwrap();
        assert_eq!(entries.len(), 1);
        assert_eq!(entries[0].name, "twisted");
    }
}
