//! Witness files and run configuration.
//!
//! Witness files are JSON. Complex numbers are `[re, im]` pairs, matrices are
//! arrays of rows, and tensors use the row-major `(i, j, k)` order, which every
//! file declares in `meta.index_order`. Floats round-trip exactly.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::Format;
use crate::monodromy::{StopReason, WitnessMeta, WitnessSet};
use crate::numerics::{CVector, ComplexMatrix, Tolerances};
use crate::segre::{SecantProfile, SliceParams, Solution};
use crate::tracker::TrackerConfig;
use crate::TOOL_VERSION;

pub const INDEX_ORDER: &str = "row-major-ijk";

type Pair = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormatRecord {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub r: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub dim: usize,
    pub codim: usize,
    pub fiber_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsRecord {
    #[serde(rename = "A")]
    pub a: Vec<Vec<Pair>>,
    #[serde(rename = "B")]
    pub b: Vec<Pair>,
    #[serde(rename = "H")]
    pub h: Vec<Vec<Pair>>,
    pub u0: Vec<Pair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub u: Vec<Pair>,
    pub t: Vec<Pair>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaRecord {
    pub rng_seed: u64,
    pub loops_run: u64,
    pub paths_failed: u64,
    #[serde(default)]
    pub paths_closed: u64,
    #[serde(default)]
    pub stall_counter: u64,
    #[serde(default)]
    pub target_count: Option<usize>,
    pub stop_reason: Option<StopReason>,
    #[serde(default)]
    pub fiber_collisions: u64,
    pub tool_version: String,
    pub index_order: String,
}

/// On-disk form of a [`WitnessSet`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessFile {
    pub format: FormatRecord,
    pub profile: ProfileRecord,
    pub params: ParamsRecord,
    pub solutions: Vec<SolutionRecord>,
    pub meta: MetaRecord,
}

fn pair(z: &Complex64) -> Pair {
    [z.re, z.im]
}

fn vector_record(v: &CVector) -> Vec<Pair> {
    v.iter().map(pair).collect()
}

fn matrix_record(m: &ComplexMatrix) -> Vec<Vec<Pair>> {
    m.row_iter().map(|row| row.iter().map(pair).collect()).collect()
}

fn vector_from(what: &str, v: &[Pair], len: usize) -> Result<CVector> {
    if v.len() != len {
        return Err(Error::Schema(format!("{what} has length {}, expected {len}", v.len())));
    }
    Ok(CVector::from_iterator(len, v.iter().map(|p| Complex64::new(p[0], p[1]))))
}

fn matrix_from(what: &str, rows: &[Vec<Pair>], nrows: usize, ncols: usize) -> Result<ComplexMatrix> {
    if rows.len() != nrows {
        return Err(Error::Schema(format!("{what} has {} rows, expected {nrows}", rows.len())));
    }
    let mut data = Vec::with_capacity(nrows * ncols);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(Error::Schema(format!(
                "{what} row {i} has {} entries, expected {ncols}",
                row.len()
            )));
        }
        data.extend(row.iter().map(|p| Complex64::new(p[0], p[1])));
    }
    Ok(ComplexMatrix::from_row_slice(nrows, ncols, &data))
}

impl WitnessFile {
    pub fn from_witness(ws: &WitnessSet) -> Self {
        let f = ws.profile.format;
        Self {
            format: FormatRecord {
                a: f.a,
                b: f.b,
                c: f.c,
                r: f.r,
            },
            profile: ProfileRecord {
                dim: ws.profile.dim,
                codim: ws.profile.codim,
                fiber_dim: ws.profile.fiber_dim,
            },
            params: ParamsRecord {
                a: matrix_record(&ws.params.a),
                b: vector_record(&ws.params.b),
                h: matrix_record(&ws.params.h),
                u0: vector_record(&ws.params.u0),
            },
            solutions: ws
                .solutions
                .iter()
                .map(|s| SolutionRecord {
                    u: vector_record(&s.u),
                    t: vector_record(&s.t),
                    residual: s.residual_norm,
                })
                .collect(),
            meta: MetaRecord {
                rng_seed: ws.meta.rng_seed,
                loops_run: ws.meta.loops_run,
                paths_failed: ws.meta.paths_failed,
                paths_closed: ws.meta.paths_closed,
                stall_counter: ws.meta.stall_counter,
                target_count: ws.meta.target_count,
                stop_reason: ws.meta.stop_reason,
                fiber_collisions: ws.meta.fiber_collisions,
                tool_version: TOOL_VERSION.to_string(),
                index_order: INDEX_ORDER.to_string(),
            },
        }
    }

    /// Rebuild the witness set, checking shapes and re-validating every
    /// residual against `validation_tol`.
    pub fn into_witness(self, validation_tol: f64) -> Result<WitnessSet> {
        if self.meta.index_order != INDEX_ORDER {
            return Err(Error::Schema(format!(
                "unsupported index order {:?}",
                self.meta.index_order
            )));
        }
        let FormatRecord { a, b, c, r } = self.format;
        let format = Format::new(a, b, c, r)?;
        if (format.a, format.b, format.c) != (a, b, c) {
            return Err(Error::Schema(format!("format sides ({a},{b},{c}) are not sorted")));
        }
        let profile = SecantProfile::from_dim(format, self.profile.dim)?;
        if (profile.codim, profile.fiber_dim) != (self.profile.codim, self.profile.fiber_dim) {
            return Err(Error::Schema(format!(
                "profile {:?} is inconsistent with dimension {} of {format}",
                self.profile, self.profile.dim
            )));
        }
        let abc = format.ambient_dim();
        let n_u = format.n_u();
        let params = SliceParams {
            a: matrix_from("A", &self.params.a, abc, profile.codim)?,
            b: vector_from("B", &self.params.b, abc)?,
            h: matrix_from("H", &self.params.h, profile.fiber_dim, n_u)?,
            u0: vector_from("u0", &self.params.u0, n_u)?,
        };
        let solutions = self
            .solutions
            .iter()
            .enumerate()
            .map(|(i, s)| {
                Ok(Solution {
                    u: vector_from(&format!("solution {i} u"), &s.u, n_u)?,
                    t: vector_from(&format!("solution {i} t"), &s.t, profile.codim)?,
                    residual_norm: s.residual,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let m = self.meta;
        let mut ws = WitnessSet {
            profile,
            params,
            solutions,
            meta: WitnessMeta {
                rng_seed: m.rng_seed,
                loops_run: m.loops_run,
                paths_failed: m.paths_failed,
                paths_closed: m.paths_closed,
                stall_counter: m.stall_counter,
                target_count: m.target_count,
                stop_reason: m.stop_reason,
                fiber_collisions: m.fiber_collisions,
            },
        };
        ws.revalidate(validation_tol)?;
        Ok(ws)
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Write through a sibling temp file and rename, so an interrupted checkpoint
/// never leaves a truncated witness file behind.
pub fn save_witness(ws: &WitnessSet, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(&WitnessFile::from_witness(ws))?;
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
        f.write_all(json.as_bytes()).map_err(io_err(&tmp))?;
        f.write_all(b"\n").map_err(io_err(&tmp))?;
        f.sync_all().map_err(io_err(&tmp))?;
    }
    fs::rename(&tmp, path).map_err(io_err(path))
}

pub fn load_witness(path: &Path) -> Result<WitnessSet> {
    load_witness_with_tol(path, Tolerances::default().validation)
}

pub fn load_witness_with_tol(path: &Path, validation_tol: f64) -> Result<WitnessSet> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let file: WitnessFile = serde_json::from_str(&text)?;
    file.into_witness(validation_tol)
}

/// Optional TOML configuration: `[tolerances]` and `[tracker]` tables.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub tolerances: Tolerances,
    pub tracker: TrackerConfig,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let cfg: Config = toml::from_str(&text)?;
        cfg.tracker.validate()?;
        Ok(cfg)
    }
}
