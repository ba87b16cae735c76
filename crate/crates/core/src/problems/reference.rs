//! Fine-step reference solutions and their on-disk cache.
//!
//! Cache file layout (all integers and floats little-endian):
//!
//! | bytes | field |
//! |-------|-------|
//! | 8  | magic `EXPRKREF` |
//! | 4  | `u32` format version |
//! | 1  | `u8` field tag: 0 real, 1 complex |
//! | 8  | `u64` state length `n` |
//! | 8  | `f64` final time `T` |
//! | 8  | `u64` key hash |
//! | 8  | `u64` step count |
//! | 8  | `f64` self-check difference (NaN if not computed) |
//! | …  | `n` scalars: `f64`, or `(re, im)` pairs of `f64` |

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use super::{max_norm_error, ProblemError, SemilinearSystem};
use crate::scalar::Scalar;
use crate::schemes::{integrate, make_engine, method_by_name, EngineSettings, ExecutionMode};

pub const CACHE_MAGIC: &[u8; 8] = b"EXPRKREF";
pub const CACHE_VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 1 + 8 + 8 + 8 + 8 + 8;

/// Scalars storable in the cache.
pub trait CacheScalar: Scalar + 'static {
    const FIELD_TAG: u8;
    const WIDTH: usize;
    fn write_le(&self, out: &mut Vec<u8>);
    fn read_le(bytes: &[u8]) -> Self;
}

impl CacheScalar for f64 {
    const FIELD_TAG: u8 = 0;
    const WIDTH: usize = 8;
    fn write_le(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
    fn read_le(bytes: &[u8]) -> Self {
        f64::from_le_bytes(bytes[..8].try_into().expect("8 bytes"))
    }
}

impl CacheScalar for Complex64 {
    const FIELD_TAG: u8 = 1;
    const WIDTH: usize = 16;
    fn write_le(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.re.to_le_bytes());
        out.extend_from_slice(&self.im.to_le_bytes());
    }
    fn read_le(bytes: &[u8]) -> Self {
        Complex64::new(f64::read_le(&bytes[..8]), f64::read_le(&bytes[8..16]))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CacheHeader {
    pub version: u32,
    pub field_tag: u8,
    pub n: u64,
    pub t_end: f64,
    pub hash: u64,
    pub steps: u64,
    pub self_check: f64,
}

impl CacheHeader {
    fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN);
        out.extend_from_slice(CACHE_MAGIC);
        out.extend_from_slice(&self.version.to_le_bytes());
        out.push(self.field_tag);
        out.extend_from_slice(&self.n.to_le_bytes());
        out.extend_from_slice(&self.t_end.to_le_bytes());
        out.extend_from_slice(&self.hash.to_le_bytes());
        out.extend_from_slice(&self.steps.to_le_bytes());
        out.extend_from_slice(&self.self_check.to_le_bytes());
        out
    }

    fn decode(bytes: &[u8]) -> Result<Self, ProblemError> {
        if bytes.len() < HEADER_LEN {
            return Err(ProblemError::Cache(format!("file too short for header ({} bytes)", bytes.len())));
        }
        if &bytes[..8] != CACHE_MAGIC {
            return Err(ProblemError::Cache("bad magic".into()));
        }
        let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
        let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
        if version != CACHE_VERSION {
            return Err(ProblemError::Cache(format!("unsupported version {version}")));
        }
        Ok(Self {
            version,
            field_tag: bytes[12],
            n: u64_at(13),
            t_end: f64::from_bits(u64_at(21)),
            hash: u64_at(29),
            steps: u64_at(37),
            self_check: f64::from_bits(u64_at(45)),
        })
    }
}

/// One file in the cache directory.
#[derive(Clone, Debug, PartialEq)]
pub struct CacheEntry {
    pub path: PathBuf,
    pub header: Result<CacheHeader, ProblemError>,
    pub bytes: u64,
}

/// Directory of reference files named `<problem>-<hash>.ref`.
#[derive(Clone, Debug)]
pub struct ReferenceCache {
    dir: PathBuf,
}

impl ReferenceCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, problem: &str, hash: u64) -> PathBuf {
        self.dir.join(format!("{problem}-{hash:016x}.ref"))
    }

    pub fn store<T: CacheScalar>(&self, problem: &str, header: &CacheHeader, data: &[T]) -> Result<PathBuf, ProblemError> {
        let io = |e: std::io::Error| ProblemError::Cache(e.to_string());
        fs::create_dir_all(&self.dir).map_err(io)?;
        let mut bytes = header.encode();
        for x in data {
            x.write_le(&mut bytes);
        }
        let path = self.path_for(problem, header.hash);
        let tmp = path.with_extension("ref.tmp");
        let mut f = fs::File::create(&tmp).map_err(io)?;
        f.write_all(&bytes).map_err(io)?;
        f.sync_all().map_err(io)?;
        fs::rename(&tmp, &path).map_err(io)?;
        Ok(path)
    }

    /// Reads the entry for `hash`; `Ok(None)` when absent, `Err` when the
    /// file exists but does not hold a valid entry of the expected shape.
    pub fn load<T: CacheScalar>(
        &self,
        problem: &str,
        hash: u64,
        n: usize,
        t_end: f64,
    ) -> Result<Option<(CacheHeader, Vec<T>)>, ProblemError> {
        let path = self.path_for(problem, hash);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(ProblemError::Cache(e.to_string())),
        };
        let header = CacheHeader::decode(&bytes)?;
        if header.field_tag != T::FIELD_TAG || header.n != n as u64 || header.hash != hash || header.t_end != t_end {
            return Err(ProblemError::Cache(format!("header of {} does not match the request", path.display())));
        }
        let body = &bytes[HEADER_LEN..];
        if body.len() != n * T::WIDTH {
            return Err(ProblemError::Cache(format!("expected {} data bytes, found {}", n * T::WIDTH, body.len())));
        }
        let data: Vec<T> = body.chunks_exact(T::WIDTH).map(T::read_le).collect();
        if !data.iter().all(|x| x.is_finite()) {
            return Err(ProblemError::Cache("non-finite values".into()));
        }
        Ok(Some((header, data)))
    }

    pub fn list(&self) -> Result<Vec<CacheEntry>, ProblemError> {
        let mut out = Vec::new();
        let rd = match fs::read_dir(&self.dir) {
            Ok(rd) => rd,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(out),
            Err(e) => return Err(ProblemError::Cache(e.to_string())),
        };
        for entry in rd {
            let entry = entry.map_err(|e| ProblemError::Cache(e.to_string()))?;
            let path = entry.path();
            if path.extension().and_then(|e| e.to_str()) != Some("ref") {
                continue;
            }
            let bytes = fs::read(&path).map_err(|e| ProblemError::Cache(e.to_string()))?;
            out.push(CacheEntry { header: CacheHeader::decode(&bytes), bytes: bytes.len() as u64, path });
        }
        out.sort_by(|a, b| a.path.cmp(&b.path));
        Ok(out)
    }

    /// Removes all `.ref` files; returns how many were deleted.
    pub fn clear(&self) -> Result<usize, ProblemError> {
        let entries = self.list()?;
        for e in &entries {
            fs::remove_file(&e.path).map_err(|err| ProblemError::Cache(err.to_string()))?;
        }
        Ok(entries.len())
    }
}

/// How a reference is computed.
#[derive(Clone, Debug)]
pub struct ReferenceOptions {
    pub method: String,
    pub steps: usize,
    pub tolerance: f64,
    /// Also integrate with half the steps and report the difference.
    pub self_check: bool,
    pub cache: Option<ReferenceCache>,
}

impl ReferenceOptions {
    /// expRK5s10 with `8 × finest_steps` steps at engine tolerance `1e-12`.
    pub fn for_study(finest_steps: usize) -> Self {
        Self { method: "expRK5s10".into(), steps: 8 * finest_steps, tolerance: 1e-12, self_check: true, cache: None }
    }

    pub fn with_cache(mut self, cache: ReferenceCache) -> Self {
        self.cache = Some(cache);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReferenceSource {
    Exact,
    Computed,
    Cached,
}

#[derive(Clone, Debug)]
pub struct ReferenceSolution<T> {
    pub u: Vec<T>,
    pub source: ReferenceSource,
    pub steps: usize,
    /// Max-norm difference to the run with half the steps.
    pub self_check: Option<f64>,
}

fn key_hash<T: CacheScalar>(fingerprint: &str, initial: &[T], t_end: f64, opts: &ReferenceOptions) -> u64 {
    let mut h = Sha256::new();
    h.update(fingerprint.as_bytes());
    let mut bytes = Vec::with_capacity(initial.len() * T::WIDTH);
    for x in initial {
        x.write_le(&mut bytes);
    }
    h.update(&bytes);
    h.update(format!("|T={:e}|method={}|steps={}|tol={:e}", t_end, opts.method, opts.steps, opts.tolerance).as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// Solution at `t_end`: the exact one when the problem has it, otherwise a
/// fine-step integration, read from and written to the cache if configured.
/// A corrupt cache entry is reported with a warning and recomputed.
pub fn reference_solution<T: CacheScalar>(
    problem: &SemilinearSystem<T>,
    t_end: f64,
    opts: &ReferenceOptions,
) -> Result<ReferenceSolution<T>, ProblemError> {
    if let Some(u) = problem.exact(t_end) {
        return Ok(ReferenceSolution { u, source: ReferenceSource::Exact, steps: 0, self_check: None });
    }
    if !(t_end > 0.0 && t_end.is_finite()) || opts.steps < 2 {
        return Err(ProblemError::Parameter(format!("reference needs T > 0 and ≥ 2 steps (T = {t_end}, steps = {})", opts.steps)));
    }
    let hash = key_hash(&problem.fingerprint(), problem.initial(), t_end, opts);
    let n = problem.initial().len();
    if let Some(cache) = &opts.cache {
        match cache.load::<T>(problem.name(), hash, n, t_end) {
            Ok(Some((header, u))) => {
                let self_check = if header.self_check.is_nan() { None } else { Some(header.self_check) };
                return Ok(ReferenceSolution { u, source: ReferenceSource::Cached, steps: opts.steps, self_check });
            }
            Ok(None) => {}
            Err(e) => log::warn!("ignoring reference cache entry for {}: {e}; recomputing", problem.name()),
        }
    }

    let method = method_by_name(&opts.method).map_err(|e| ProblemError::Reference(e.to_string()))?;
    let settings = EngineSettings { tolerance: opts.tolerance, ..Default::default() };
    let engine = make_engine(crate::schemes::SemilinearProblem::linear(problem), &settings)
        .map_err(|e| ProblemError::Reference(e.to_string()))?;
    let run = |steps: usize| {
        integrate(&method, problem, engine.as_ref(), problem.initial(), 0.0, t_end, steps, ExecutionMode::Batched)
            .map(|r| r.u)
            .map_err(|e| ProblemError::Reference(e.to_string()))
    };
    let u = run(opts.steps)?;
    let self_check = if opts.self_check { Some(max_norm_error(&u, &run(opts.steps / 2)?)?) } else { None };

    if let Some(cache) = &opts.cache {
        let header = CacheHeader {
            version: CACHE_VERSION,
            field_tag: T::FIELD_TAG,
            n: n as u64,
            t_end,
            hash,
            steps: opts.steps as u64,
            self_check: self_check.unwrap_or(f64::NAN),
        };
        if let Err(e) = cache.store(problem.name(), &header, &u) {
            log::warn!("could not write reference cache: {e}");
        }
    }
    Ok(ReferenceSolution { u, source: ReferenceSource::Computed, steps: opts.steps, self_check })
}
