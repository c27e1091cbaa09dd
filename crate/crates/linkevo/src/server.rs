//! Read-only HTTP API over a directory of archive files.
//!
//! Archives are addressed by file name without the `.jsonl` extension and
//! are read from disk on every request, so the server holds no state
//! beyond the directory path. Errors are JSON `{code, message}` bodies.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use linkevo_core::descriptors::DescriptorSpace;
use linkevo_core::evolve::{PathSummary, RunMeta, DEFAULT_STEPS};
use linkevo_core::fitness::{fitness_fp, fitness_fsl, FitnessKind, TargetPointSet};
use linkevo_core::kinematics::Beam;
use linkevo_core::prototyping::{apply_overrides, build_sheet, build_sheet_for, downsample, BuildSheet, DEFAULT_PITCH};
use linkevo_core::{EncodingConfig, Genome, Point};
use serde::{Deserialize, Serialize};

use crate::archive::{read_header, Archive, ArchiveKind, ArchiveRecord, ARCHIVE_FORMAT};
use crate::svg::path_scale;

/// Largest step count a simulation request may ask for.
pub const MAX_STEPS: usize = 720;
/// Largest display grid side.
pub const MAX_DISPLAY: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: u16,
    pub code: String,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self { status: status.as_u16(), code: code.into(), message: message.into() }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    fn invalid(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, code, message)
    }

    fn not_found(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, code, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

#[derive(Clone)]
struct AppState {
    dir: Arc<PathBuf>,
}

pub fn router(archive_dir: PathBuf) -> Router {
    Router::new()
        .route("/api/repertoires", get(list_repertoires))
        .route("/api/repertoires/{id}/grid", get(get_grid))
        .route("/api/repertoires/{id}/cells/{index}", get(get_cell))
        .route("/api/repertoires/{id}/cells/{index}/buildsheet", get(get_build_sheet))
        .route("/api/simulate", post(simulate))
        .fallback(|| async { ApiError::not_found("not_found", "no such endpoint") })
        .with_state(AppState { dir: Arc::new(archive_dir) })
}

pub async fn serve(archive_dir: PathBuf, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("serving {} on http://{}", archive_dir.display(), listener.local_addr()?);
    axum::serve(listener, router(archive_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> ApiResult<T> {
    match tokio::task::spawn_blocking(f).await {
        Ok(r) => r.map(Json),
        Err(e) => Err(ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string())),
    }
}

fn archive_path(dir: &Path, id: &str) -> Result<PathBuf, ApiError> {
    let ok = !id.is_empty() && !id.starts_with('.') && id.chars().all(|c| c.is_ascii_alphanumeric() || "._-".contains(c));
    let path = dir.join(format!("{id}.jsonl"));
    if !ok || !path.is_file() {
        return Err(ApiError::not_found("archive_not_found", format!("no archive {id:?}")));
    }
    Ok(path)
}

fn load(dir: &Path, id: &str) -> Result<Archive, ApiError> {
    let path = archive_path(dir, id)?;
    Archive::load(&path).map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "archive_unreadable", e.to_string()))
}

fn parse_index(s: &str) -> Result<usize, ApiError> {
    s.parse().map_err(|_| ApiError::bad_request(format!("cell index must be a non-negative integer, got {s:?}")))
}

fn record<'a>(a: &'a Archive, id: &str, cell: usize) -> Result<&'a ArchiveRecord, ApiError> {
    a.record(cell).ok_or_else(|| ApiError::not_found("cell_not_found", format!("archive {id:?} has no individual in cell {cell}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepertoireSummary {
    pub id: String,
    pub kind: ArchiveKind,
    pub algorithm: String,
    pub fitness: FitnessKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<DescriptorSpace>,
    pub seed: u64,
    pub evaluations: usize,
    pub records: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_fitness: Option<f64>,
    /// Bins per grid dimension.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grid_bins: Vec<usize>,
}

/// Either a summary or a warning for a file that could not be read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ListEntry {
    Archive(RepertoireSummary),
    Unreadable { id: String, error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepertoireList {
    pub repertoires: Vec<ListEntry>,
}

pub fn summarize(id: &str, a: &Archive) -> RepertoireSummary {
    let h = &a.header;
    RepertoireSummary {
        id: id.into(),
        kind: h.kind,
        algorithm: h.run.algorithm.name().into(),
        fitness: h.run.fitness,
        space: h.run.space,
        seed: h.run.seed,
        evaluations: h.run.evaluations,
        records: a.records.len(),
        coverage: a.coverage(),
        best_fitness: a.best().map(|r| r.fitness),
        grid_bins: h.grid.as_ref().map(|g| g.dims.iter().map(|d| d.bins).collect()).unwrap_or_default(),
    }
}

/// Lists `*.jsonl` files of the directory that carry an archive header;
/// other line-delimited files (metrics logs, checkpoints) are ignored.
pub fn list_dir(dir: &Path) -> Result<RepertoireList, ApiError> {
    let entries = std::fs::read_dir(dir).map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "directory_unreadable", e.to_string()))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    paths.sort();
    let mut out = Vec::new();
    for path in paths {
        let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        match read_header(&path) {
            Ok(h) if h.format == ARCHIVE_FORMAT => {}
            Ok(_) => continue,
            Err(_) if !looks_like_archive(&path) => continue,
            Err(e) => {
                log::warn!("skipping {}: {e}", path.display());
                out.push(ListEntry::Unreadable { id, error: e.to_string() });
                continue;
            }
        }
        match Archive::load(&path) {
            Ok(a) => out.push(ListEntry::Archive(summarize(&id, &a))),
            Err(e) => {
                log::warn!("skipping {}: {e}", path.display());
                out.push(ListEntry::Unreadable { id, error: e.to_string() });
            }
        }
    }
    Ok(RepertoireList { repertoires: out })
}

/// Whether a file whose header failed to parse still claims to be an
/// archive (so it is reported rather than silently skipped).
fn looks_like_archive(path: &Path) -> bool {
    let Ok(text) = std::fs::read(path) else { return true };
    let first = text.split(|&b| b == b'\n').next().unwrap_or_default();
    match serde_json::from_slice::<serde_json::Value>(first) {
        Ok(v) => v.get("format").and_then(|f| f.as_str()) == Some(ARCHIVE_FORMAT),
        Err(_) => true,
    }
}

async fn list_repertoires(State(s): State<AppState>) -> ApiResult<RepertoireList> {
    blocking(move || list_dir(&s.dir)).await
}

#[derive(Debug, Default, Deserialize)]
struct GridQuery {
    rows: Option<String>,
    cols: Option<String>,
    dims: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub row: usize,
    pub col: usize,
    pub source_cell: usize,
    pub fitness: f64,
    pub error_count: usize,
    pub foot_path: Vec<Point>,
    /// Larger side of the path's bounding box (mm).
    pub extent: f64,
    /// Extent relative to the largest in the map.
    pub relative_scale: f64,
    /// Drawing scale that fits the path to one display cell.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPayload {
    pub id: String,
    pub rows: usize,
    pub cols: usize,
    /// Source dimensions shown along columns and rows.
    pub dims: [usize; 2],
    pub fitness: FitnessKind,
    pub cells: Vec<GridCell>,
}

fn parse_count(v: Option<&str>, name: &str) -> Result<usize, ApiError> {
    let Some(v) = v else { return Ok(5) };
    match v.parse::<usize>() {
        Ok(n) if (1..=MAX_DISPLAY).contains(&n) => Ok(n),
        _ => Err(ApiError::bad_request(format!("{name} must be an integer in 1..={MAX_DISPLAY}, got {v:?}"))),
    }
}

pub fn parse_dims(v: Option<&str>) -> Result<(usize, usize), ApiError> {
    let Some(v) = v else { return Ok((0, 1)) };
    let parts: Vec<Result<usize, _>> = v.split(',').map(|p| p.trim().parse::<usize>()).collect();
    match parts.as_slice() {
        [Ok(a), Ok(b)] => Ok((*a, *b)),
        _ => Err(ApiError::bad_request(format!("dims must look like 0,1, got {v:?}"))),
    }
}

pub fn grid_payload(id: &str, a: &Archive, rows: usize, cols: usize, dims: (usize, usize)) -> Result<GridPayload, ApiError> {
    let rep = a.to_repertoire().map_err(|e| ApiError::invalid("not_a_grid", e.to_string()))?;
    let dims = if rep.grid.dims.len() == 1 { (0, 0) } else { dims };
    let map = downsample(&rep, rows, cols, dims).map_err(|e| ApiError::invalid("invalid_dims", e.to_string()))?;
    let cells = map
        .populated()
        .map(|c| GridCell {
            row: c.row,
            col: c.col,
            source_cell: c.source_cell,
            fitness: c.elite.fitness,
            error_count: c.elite.error_count,
            foot_path: c.foot_path.clone(),
            extent: c.extent,
            relative_scale: c.relative_scale,
            scale: path_scale(c.extent),
        })
        .collect();
    Ok(GridPayload { id: id.into(), rows, cols, dims: [dims.0, dims.1], fitness: a.header.run.fitness, cells })
}

async fn get_grid(State(s): State<AppState>, UrlPath(id): UrlPath<String>, Query(q): Query<GridQuery>) -> ApiResult<GridPayload> {
    blocking(move || {
        let rows = parse_count(q.rows.as_deref(), "rows")?;
        let cols = parse_count(q.cols.as_deref(), "cols")?;
        let dims = parse_dims(q.dims.as_deref())?;
        let a = load(&s.dir, &id)?;
        grid_payload(&id, &a, rows, cols, dims)
    })
    .await
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellPayload {
    pub id: String,
    pub cell: usize,
    /// Grid coordinates of the cell, for repertoires.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<usize>>,
    pub record: ArchiveRecord,
    pub fitness_kind: FitnessKind,
    pub beams: Vec<Beam>,
    pub foot_path: Vec<Point>,
}

async fn get_cell(State(s): State<AppState>, UrlPath((id, index)): UrlPath<(String, String)>) -> ApiResult<CellPayload> {
    blocking(move || {
        let cell = parse_index(&index)?;
        let a = load(&s.dir, &id)?;
        let rec = record(&a, &id, cell)?;
        let meta = &a.header.run;
        let linkage = rec.genome.decode(&meta.encoding);
        let trace = linkage.solve(meta.steps);
        Ok(CellPayload {
            id: id.clone(),
            cell,
            coords: a.header.grid.as_ref().map(|g| g.unflatten(cell)),
            record: rec.clone(),
            fitness_kind: meta.fitness,
            beams: linkage.beams().to_vec(),
            foot_path: trace.foot_path,
        })
    })
    .await
}

#[derive(Debug, Default, Deserialize)]
struct PitchQuery {
    pitch: Option<String>,
}

pub fn parse_pitch(v: Option<&str>) -> Result<f64, ApiError> {
    let Some(v) = v else { return Ok(DEFAULT_PITCH) };
    match v.parse::<f64>() {
        Ok(p) if p.is_finite() && p > 0.0 => Ok(p),
        _ => Err(ApiError::invalid("invalid_pitch", format!("pitch must be a positive number of mm, got {v:?}"))),
    }
}

/// Build sheet of one stored individual.
pub fn cell_build_sheet(a: &Archive, id: &str, cell: usize, pitch: f64) -> Result<BuildSheet, ApiError> {
    let rec = record(a, id, cell)?;
    build_sheet(&a.evaluation(rec), pitch, &a.header.run).map_err(|e| ApiError::invalid("invalid_pitch", e.to_string()))
}

async fn get_build_sheet(
    State(s): State<AppState>,
    UrlPath((id, index)): UrlPath<(String, String)>,
    Query(q): Query<PitchQuery>,
) -> ApiResult<BuildSheet> {
    blocking(move || {
        let cell = parse_index(&index)?;
        let pitch = parse_pitch(q.pitch.as_deref())?;
        let a = load(&s.dir, &id)?;
        cell_build_sheet(&a, &id, cell, pitch)
    })
    .await
}

/// Body of `POST /api/simulate`: a stored individual (`archive` + `cell`)
/// or an inline genome, optional beam-length overrides (beam index → mm)
/// and step count.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub archive: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub genome: Option<Genome>,
    /// Encoding for an inline genome (defaults apply when absent).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub encoding: Option<EncodingConfig>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub overrides: BTreeMap<usize, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    /// Also return the brick build sheet of the (edited) linkage.
    #[serde(default)]
    pub build_sheet: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pitch: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessPair {
    pub fp: f64,
    pub fsl: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResponse {
    pub steps: usize,
    pub beams: Vec<Beam>,
    /// Node positions per step; `null` where a node could not be placed.
    pub positions: Vec<Vec<Option<Point>>>,
    pub feasible: Vec<bool>,
    pub moving: Vec<bool>,
    pub foot_index: usize,
    pub foot_path: Vec<Point>,
    pub error_count: usize,
    pub fitness: FitnessPair,
    /// The fitness the source run optimised, in its own sign convention.
    pub fitness_kind: FitnessKind,
    pub fitness_value: f64,
    pub summary: PathSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub build_sheet: Option<BuildSheet>,
}

pub fn run_simulation(dir: &Path, req: &SimRequest) -> Result<SimResponse, ApiError> {
    let (genome, meta): (Genome, RunMeta) = match (&req.archive, req.cell, &req.genome) {
        (Some(id), Some(cell), None) => {
            if req.encoding.is_some() {
                return Err(ApiError::bad_request("encoding comes from the archive; do not send one with archive + cell"));
            }
            let a = load(dir, id)?;
            (record(&a, id, cell)?.genome.clone(), a.header.run.clone())
        }
        (None, None, Some(g)) => {
            let defaults = linkevo_core::evolve::RunConfig::default();
            let meta = RunMeta { encoding: req.encoding.unwrap_or_default(), targets: TargetPointSet::default(), steps: DEFAULT_STEPS, ..defaults.meta(0, 0) };
            meta.encoding.validate().map_err(|e| ApiError::invalid("invalid_encoding", e.to_string()))?;
            (g.clone(), meta)
        }
        _ => return Err(ApiError::bad_request("send either archive and cell, or genome")),
    };
    genome.validate(&meta.encoding).map_err(|e| ApiError::invalid("invalid_genome", e.to_string()))?;
    let steps = req.steps.unwrap_or(meta.steps);
    if !(3..=MAX_STEPS).contains(&steps) {
        return Err(ApiError::invalid("invalid_steps", format!("steps must be in 3..={MAX_STEPS}, got {steps}")));
    }
    let meta = RunMeta { steps, ..meta };
    let mut linkage = genome.decode(&meta.encoding);
    let overrides: Vec<(usize, f64)> = req.overrides.iter().map(|(&i, &l)| (i, l)).collect();
    apply_overrides(&mut linkage, &overrides).map_err(|e| ApiError::invalid("invalid_override", e.to_string()))?;
    let trace = linkage.solve(steps);
    let fp = fitness_fp(&trace, &meta.targets);
    let fsl = fitness_fsl(&trace);
    let build_sheet = if req.build_sheet {
        let pitch = req.pitch.unwrap_or(DEFAULT_PITCH);
        Some(build_sheet_for(&linkage, pitch, &meta).map_err(|e| ApiError::invalid("invalid_pitch", e.to_string()))?)
    } else {
        None
    };
    Ok(SimResponse {
        steps,
        beams: linkage.beams().to_vec(),
        summary: PathSummary::of(&trace),
        fitness_value: match meta.fitness {
            FitnessKind::Fp => fp,
            FitnessKind::Fsl => fsl,
        },
        fitness_kind: meta.fitness,
        fitness: FitnessPair { fp, fsl },
        positions: trace.positions,
        feasible: trace.feasible,
        moving: trace.moving,
        foot_index: trace.foot_index,
        foot_path: trace.foot_path,
        error_count: trace.error_count,
        build_sheet,
    })
}

async fn simulate(State(s): State<AppState>, body: Bytes) -> ApiResult<SimResponse> {
    let req: SimRequest = serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(format!("invalid request body: {e}")))?;
    blocking(move || run_simulation(&s.dir, &req)).await
}
