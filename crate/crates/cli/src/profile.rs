//! Profile CSV files (`x,q,region`) and their JSON sidecars.

use std::path::{Path, PathBuf};

use dswlab_core::whitham::RegionLabel;
use dswlab_pde::InvariantRecord;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const HEADER: &str = "x,q,region";

#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub x: Vec<f64>,
    pub q: Vec<f64>,
    pub region: Vec<RegionLabel>,
}

impl Profile {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// 17 significant digits; round-trips every finite f64.
pub fn fmt_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_profile_csv(p: &Profile) -> String {
    let mut out = String::with_capacity(48 * p.len() + HEADER.len() + 1);
    out.push_str(HEADER);
    out.push('\n');
    for ((x, q), r) in p.x.iter().zip(&p.q).zip(&p.region) {
        out.push_str(&fmt_value(*x));
        out.push(',');
        out.push_str(&fmt_value(*q));
        out.push(',');
        out.push_str(r.as_str());
        out.push('\n');
    }
    out
}

#[derive(Deserialize)]
struct Row {
    x: f64,
    q: f64,
    region: String,
}

/// Parses a profile; x must be finite and strictly increasing.
pub fn parse_profile_csv(bytes: &[u8]) -> Result<Profile, CliError> {
    let bad = |m: String| CliError::Input(m);
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
    let header = rdr.headers().map_err(|e| bad(format!("profile header: {e}")))?;
    if header.iter().collect::<Vec<_>>() != ["x", "q", "region"] {
        return Err(bad(format!("profile header must be {HEADER:?}")));
    }
    let mut p = Profile { x: Vec::new(), q: Vec::new(), region: Vec::new() };
    for (i, row) in rdr.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| bad(format!("profile row {}: {e}", i + 1)))?;
        if !row.x.is_finite() {
            return Err(bad(format!("profile row {}: non-finite x", i + 1)));
        }
        if let Some(&last) = p.x.last() {
            if row.x <= last {
                return Err(bad(format!("profile row {}: x not strictly increasing", i + 1)));
            }
        }
        let region = row.region.parse().map_err(|e| bad(format!("profile row {}: {e}", i + 1)))?;
        p.x.push(row.x);
        p.q.push(row.q);
        p.region.push(region);
    }
    if p.is_empty() {
        return Err(bad("profile has no rows".into()));
    }
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Asymptotic,
    Simulation,
}

/// Metadata written next to every profile CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileMeta {
    pub kind: ProfileKind,
    pub ql: f64,
    pub qr: f64,
    pub t: f64,
    /// Collar half-width used for the region column.
    pub eps: f64,
    /// x-range free of artefacts from the periodisation (simulations only).
    #[serde(default)]
    pub valid_x: Option<[f64; 2]>,
    /// Conserved-quantity records up to this snapshot (simulations only).
    #[serde(default)]
    pub invariants: Vec<InvariantRecord>,
    /// Points where the asymptotic formula failed (asymptotic profiles only).
    #[serde(default)]
    pub failures: usize,
}

/// `a/b.csv` → `a/b.meta.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("meta.json")
}
