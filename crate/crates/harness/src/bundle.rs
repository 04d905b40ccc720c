//! Result bundles: one CSV per observable plus a JSON manifest carrying the
//! resolved config and SHA-256 digests of every table and every data line.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::catalog::CATALOG_VERSION;
use crate::check::CriteriaFile;
use crate::config::{ExperimentConfig, Resolved};
use crate::error::{HarnessError, Result};
use crate::exec::{Execution, Row, StepRecord, COLUMNS};

pub const FORMAT: &str = "lgt-bundle/1";
pub const MANIFEST: &str = "manifest.json";
pub const CONFIG: &str = "config.json";
pub const CRITERIA: &str = "criteria.json";
/// Hex characters kept from each per-line digest.
const LINE_DIGEST_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
    pub catalog_version: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobRecord {
    pub key: String,
    pub h_e: f64,
    pub lambda: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub retention: Vec<StepRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub p_eff: Vec<StepRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRecord {
    pub observable: String,
    pub file: String,
    pub rows: usize,
    pub sha256: String,
    pub line_digests: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub tool: ToolInfo,
    pub config: ExperimentConfig,
    pub lattice: serde_json::Value,
    pub threads: usize,
    pub runtime_secs: f64,
    pub jobs: Vec<JobRecord>,
    pub tables: Vec<TableRecord>,
    pub criteria_file: String,
}

fn sha_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn line_digests(csv: &[u8]) -> Vec<String> {
    csv.split(|&b| b == b'\n')
        .skip(1)
        .filter(|l| !l.is_empty())
        .map(|l| sha_hex(l)[..LINE_DIGEST_LEN].to_string())
        .collect()
}

pub fn to_csv(rows: &[&Row]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(COLUMNS)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| HarnessError::Bundle(e.to_string()))
}

/// Rows grouped per observable; tables sorted by name, rows in merge order.
pub fn tables(rows: &[Row]) -> BTreeMap<&str, Vec<&Row>> {
    let mut t: BTreeMap<&str, Vec<&Row>> = BTreeMap::new();
    for r in rows {
        t.entry(r.observable.as_str()).or_default().push(r);
    }
    t
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| HarnessError::io(path, e))
}

fn json_bytes<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("serializable");
    s.push(b'\n');
    s
}

pub fn write_bundle(dir: &Path, cfg: &Resolved, exec: &Execution, lattice: serde_json::Value, runtime_secs: f64) -> Result<Manifest> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut records = Vec::new();
    for (obs, rows) in tables(&exec.rows) {
        if obs.is_empty() || !obs.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_') {
            return Err(HarnessError::Bundle(format!("observable name {obs:?} is not file-safe")));
        }
        let bytes = to_csv(&rows)?;
        let file = format!("{obs}.csv");
        write(&dir.join(&file), &bytes)?;
        records.push(TableRecord {
            observable: obs.into(),
            file,
            rows: rows.len(),
            sha256: sha_hex(&bytes),
            line_digests: line_digests(&bytes),
        });
    }
    let config = cfg.to_config();
    write(&dir.join(CONFIG), &json_bytes(&config))?;
    let criteria = CriteriaFile {
        criteria: (cfg.scenario.criteria)(cfg),
    };
    write(&dir.join(CRITERIA), &json_bytes(&criteria))?;
    let manifest = Manifest {
        format: FORMAT.into(),
        tool: ToolInfo {
            name: "lgt".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            catalog_version: CATALOG_VERSION,
        },
        config,
        lattice,
        threads: exec.threads,
        runtime_secs,
        jobs: exec
            .jobs
            .iter()
            .zip(&exec.outputs)
            .map(|(j, o)| JobRecord {
                key: j.key(),
                h_e: j.h_e,
                lambda: j.lam,
                dt: j.dt,
                n_steps: j.n_steps,
                seed: j.seed,
                retention: o.retention.clone(),
                p_eff: o.p_eff.clone(),
            })
            .collect(),
        tables: records,
        criteria_file: CRITERIA.into(),
    };
    write(&dir.join(MANIFEST), &json_bytes(&manifest))?;
    Ok(manifest)
}

pub struct Bundle {
    pub manifest: Manifest,
}

impl Bundle {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST);
        let text = fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
        let manifest: Manifest = serde_json::from_str(&text).map_err(|e| HarnessError::Bundle(format!("{MANIFEST}: {e}")))?;
        if manifest.format != FORMAT {
            return Err(HarnessError::Bundle(format!("unsupported format {:?}", manifest.format)));
        }
        Ok(Self { manifest })
    }

    /// Parse every table, keyed by observable. Unparseable tables are skipped
    /// here; [`verify`] reports them.
    pub fn tables(&self, dir: &Path) -> Result<BTreeMap<String, Vec<Row>>> {
        let mut out = BTreeMap::new();
        for t in &self.manifest.tables {
            let path = dir.join(&t.file);
            let Ok(mut r) = csv::Reader::from_path(&path) else { continue };
            let rows: std::result::Result<Vec<Row>, _> = r.deserialize().collect();
            if let Ok(rows) = rows {
                out.insert(t.observable.clone(), rows);
            }
        }
        Ok(out)
    }
}

/// Compare every table with the manifest; each problem names the file and,
/// where possible, the first differing line.
pub fn verify(dir: &Path, manifest: &Manifest) -> Result<Vec<String>> {
    let mut problems = Vec::new();
    for t in &manifest.tables {
        let path = dir.join(&t.file);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) => {
                problems.push(format!("{}: {e}", t.file));
                continue;
            }
        };
        if sha_hex(&bytes) == t.sha256 {
            continue;
        }
        let header = bytes.split(|&b| b == b'\n').next().unwrap_or_default();
        if header != COLUMNS.join(",").as_bytes() {
            problems.push(format!("{}: header differs", t.file));
            continue;
        }
        let got = line_digests(&bytes);
        match got.iter().zip(&t.line_digests).position(|(a, b)| a != b) {
            Some(i) => problems.push(format!("{}: data row {} (line {}) differs from the manifest digest", t.file, i + 1, i + 2)),
            None if got.len() != t.line_digests.len() => {
                problems.push(format!("{}: {} data rows, manifest lists {}", t.file, got.len(), t.line_digests.len()))
            }
            None => problems.push(format!("{}: bytes differ outside data rows", t.file)),
        }
    }
    Ok(problems)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout_is_fixed() {
        let r = Row {
            scenario: "s".into(),
            observable: "o".into(),
            h_e: 0.3,
            lambda: 0.25,
            dt: 0.1,
            site: "v1".into(),
            t: 0.3,
            value: 1.0 / 3.0,
            stderr: f64::NAN,
            stage: "raw".into(),
        };
        let bytes = to_csv(&[&r]).unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert_eq!(
            text,
            "scenario,observable,h_e,lambda,dt,site,t,value,stderr,stage\ns,o,0.3,0.25,0.1,v1,0.3,0.3333333333333333,NaN,raw\n"
        );
        let back: Vec<Row> = csv::Reader::from_reader(&bytes[..]).deserialize().collect::<std::result::Result<_, _>>().unwrap();
        assert_eq!(back[0].value, r.value);
        assert!(back[0].stderr.is_nan());
        assert_eq!(line_digests(&bytes).len(), 1);
    }
}
