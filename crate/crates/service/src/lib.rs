//! Local HTTP service behind the calibration and A/B preference studies.
//!
//! Sessions hand out seeded trial plans, previews render the pipeline on
//! demand as 8-bit PNG, and submissions append one JSON line per record
//! to the study logs.

pub mod session;

use std::collections::{BTreeMap, HashMap};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use emotion_isp::io::{self, encode_png, ImageFile, QuantizedImage};
use emotion_isp::pipeline::shipped_presets;
use emotion_isp::stats::records::append_record;
use emotion_isp::stats::{AbRecord, CalibrationRecord, Choice};
use emotion_isp::{render, ControlVector, LinearImage, OutputEncoding, PipelineConfig, Side, VAVector};
use serde::{Deserialize, Serialize};

use crate::session::{
    ab_plan, calibration_plan, AbAssignment, Mode, Planned, Session, SubmitError, AB_QUESTION,
};

/// Longest side of a draft preview.
pub const DRAFT_MAX_SIDE: usize = 1024;

pub struct CorpusImage {
    pub full: Arc<LinearImage>,
    pub draft: Arc<LinearImage>,
}

/// Images by id, plus optional valence/arousal labels for A/B sessions.
#[derive(Default)]
pub struct Corpus {
    pub images: BTreeMap<String, CorpusImage>,
    pub labels: BTreeMap<String, VAVector>,
}

#[derive(Deserialize)]
struct LabelLine {
    image_id: String,
    valence: f64,
    arousal: f64,
}

impl Corpus {
    pub fn insert(&mut self, id: impl Into<String>, img: LinearImage) {
        let draft = Arc::new(img.downscale_to_fit(DRAFT_MAX_SIDE));
        self.images.insert(
            id.into(),
            CorpusImage {
                full: Arc::new(img),
                draft,
            },
        );
    }

    /// Loads every `.ppm`/`.png` in `dir` under its file stem, and
    /// `labels.jsonl` (`{image_id, valence, arousal}` per line) if present.
    pub fn load(dir: &Path) -> emotion_isp::Result<Self> {
        let mut corpus = Corpus::default();
        for path in io::list_frames(dir)? {
            let id = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or_default()
                .to_string();
            corpus.insert(id, io::load_image(&ImageFile::infer(&path)?)?);
        }
        let labels = dir.join("labels.jsonl");
        if labels.exists() {
            for (i, line) in std::fs::read_to_string(&labels)?.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let l: LabelLine = serde_json::from_str(line).map_err(|e| {
                    emotion_isp::Error::MalformedRecord {
                        line: i + 1,
                        reason: e.to_string(),
                    }
                })?;
                corpus.labels.insert(
                    l.image_id,
                    VAVector {
                        valence: l.valence,
                        arousal: l.arousal,
                    },
                );
            }
        }
        Ok(corpus)
    }
}

pub struct AppState {
    corpus: Corpus,
    config: PipelineConfig,
    records_dir: PathBuf,
    include_calm: bool,
    sessions: Mutex<HashMap<String, Session>>,
    next_session: AtomicU64,
    /// Serializes appends across both logs.
    log: Mutex<()>,
}

impl AppState {
    pub fn new(corpus: Corpus, config: PipelineConfig, records_dir: PathBuf) -> Self {
        Self {
            corpus,
            config,
            records_dir,
            include_calm: false,
            sessions: Mutex::new(HashMap::new()),
            next_session: AtomicU64::new(1),
            log: Mutex::new(()),
        }
    }

    pub fn with_calm(mut self, include_calm: bool) -> Self {
        self.include_calm = include_calm;
        self
    }

    pub fn calibration_log(&self) -> PathBuf {
        self.records_dir.join("calibration.jsonl")
    }

    pub fn ab_log(&self) -> PathBuf {
        self.records_dir.join("ab.jsonl")
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/session/new", get(new_session))
        .route("/trial/next", get(next_trial))
        .route("/preview", get(preview))
        .route("/calibration", post(submit_calibration))
        .route("/ab-choice", post(submit_ab_choice))
        .route("/ab/image", get(ab_image))
        .route("/images/{id}", get(reference_image))
        .route("/presets", get(presets))
        .with_state(state)
}

/// Loopback address for `port`; the service is a lab tool.
pub fn loopback(port: u16) -> SocketAddr {
    SocketAddr::from(([127, 0, 0, 1], port))
}

pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(serde_json::json!({ "error": self.message }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn bad_request(msg: impl Into<String>) -> ApiError {
    ApiError::new(StatusCode::BAD_REQUEST, msg)
}

fn not_found(msg: impl Into<String>) -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, msg)
}

fn internal(e: impl std::fmt::Display) -> ApiError {
    ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

type Params = Query<HashMap<String, String>>;

fn required<'a>(params: &'a HashMap<String, String>, key: &str) -> ApiResult<&'a str> {
    params
        .get(key)
        .map(String::as_str)
        .filter(|v| !v.is_empty())
        .ok_or_else(|| bad_request(format!("missing `{key}` parameter")))
}

async fn new_session(State(state): State<Arc<AppState>>, Query(params): Params) -> ApiResult<Response> {
    let subject = required(&params, "subject")?.to_string();
    let seed = match params.get("seed") {
        Some(s) => s
            .parse::<u64>()
            .map_err(|_| bad_request(format!("seed `{s}` is not an unsigned integer")))?,
        None => SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_nanos() as u64)
            .unwrap_or(0),
    };
    let mode = match params.get("mode").map(String::as_str) {
        None | Some("calibration") => Mode::Calibration,
        Some("ab") => Mode::Ab,
        Some(other) => return Err(bad_request(format!("unknown mode `{other}`"))),
    };
    let plan = match mode {
        Mode::Calibration => {
            let ids: Vec<String> = state.corpus.images.keys().cloned().collect();
            calibration_plan(&ids, seed)
        }
        Mode::Ab => {
            let labels: Vec<(String, VAVector)> = state
                .corpus
                .labels
                .iter()
                .filter(|(id, _)| state.corpus.images.contains_key(*id))
                .map(|(id, va)| (id.clone(), *va))
                .collect();
            ab_plan(&labels, seed, state.include_calm)
        }
    }
    .map_err(|e| ApiError::new(StatusCode::CONFLICT, e.to_string()))?;
    let id = format!("session-{}", state.next_session.fetch_add(1, Ordering::Relaxed));
    let session = Session::new(id.clone(), subject, seed, mode, plan);
    let body = session.state();
    state.sessions.lock().unwrap().insert(id, session);
    Ok(Json(body).into_response())
}

fn ab_assignment(session_id: &str, trial_id: &str, clip_id: &str) -> AbAssignment {
    let url = |side: &str| format!("/ab/image?session={session_id}&trial={trial_id}&side={side}");
    AbAssignment {
        trial_id: trial_id.to_string(),
        clip_id: clip_id.to_string(),
        left: url("left"),
        right: url("right"),
        question: AB_QUESTION.to_string(),
    }
}

async fn next_trial(State(state): State<Arc<AppState>>, Query(params): Params) -> ApiResult<Response> {
    let id = required(&params, "session")?;
    let mut sessions = state.sessions.lock().unwrap();
    let session = sessions
        .get_mut(id)
        .ok_or_else(|| not_found(format!("unknown session `{id}`")))?;
    match session.next() {
        Some(Planned::Calibration(t)) => Ok(Json(t).into_response()),
        Some(Planned::Ab {
            trial_id,
            descriptor,
        }) => Ok(Json(ab_assignment(id, &trial_id, &descriptor.image_id)).into_response()),
        None => Err(ApiError::new(
            StatusCode::GONE,
            format!("session `{id}` has no trials left"),
        )),
    }
}

fn png_response(img: &LinearImage) -> ApiResult<Response> {
    let bytes = encode_png(&QuantizedImage::encode(img, OutputEncoding::Srgb8)).map_err(internal)?;
    Ok(([(header::CONTENT_TYPE, "image/png")], bytes).into_response())
}

async fn render_png(img: Arc<LinearImage>, vector: ControlVector, config: PipelineConfig) -> ApiResult<Response> {
    let out = tokio::task::spawn_blocking(move || render(&img, &vector, &config))
        .await
        .map_err(internal)?
        .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()))?;
    png_response(&out)
}

async fn preview(State(state): State<Arc<AppState>>, Query(params): Params) -> ApiResult<Response> {
    let image_id = required(&params, "image")?;
    let alphas = required(&params, "alphas")?;
    let vector = ControlVector::parse_list(alphas).map_err(|e| bad_request(e.to_string()))?;
    let draft = match params.get("quality").map(String::as_str) {
        None | Some("draft") => true,
        Some("full") => false,
        Some(other) => return Err(bad_request(format!("unknown quality `{other}`"))),
    };
    let entry = state
        .corpus
        .images
        .get(image_id)
        .ok_or_else(|| not_found(format!("unknown image `{image_id}`")))?;
    let img = if draft { &entry.draft } else { &entry.full };
    render_png(img.clone(), vector, state.config.clone()).await
}

async fn reference_image(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<Response> {
    let entry = state
        .corpus
        .images
        .get(&id)
        .ok_or_else(|| not_found(format!("unknown image `{id}`")))?;
    render_png(entry.full.clone(), ControlVector::NEUTRAL, state.config.clone()).await
}

async fn ab_image(State(state): State<Arc<AppState>>, Query(params): Params) -> ApiResult<Response> {
    let session_id = required(&params, "session")?;
    let trial_id = required(&params, "trial")?;
    let side: Side = required(&params, "side")?
        .parse()
        .map_err(|e: emotion_isp::Error| bad_request(e.to_string()))?;
    let descriptor = {
        let sessions = state.sessions.lock().unwrap();
        let session = sessions
            .get(session_id)
            .ok_or_else(|| not_found(format!("unknown session `{session_id}`")))?;
        match session.issued(trial_id) {
            Some(Planned::Ab { descriptor, .. }) => descriptor.clone(),
            _ => return Err(not_found(format!("trial `{trial_id}` not issued in this session"))),
        }
    };
    let entry = state
        .corpus
        .images
        .get(&descriptor.image_id)
        .ok_or_else(|| not_found(format!("unknown image `{}`", descriptor.image_id)))?;
    let vector = if side == descriptor.emotion_side {
        emotion_isp::preset_for_emotion(descriptor.shown_emotion)
    } else {
        ControlVector::NEUTRAL
    };
    render_png(entry.full.clone(), vector, state.config.clone()).await
}

#[derive(Deserialize)]
struct CalibrationSubmission {
    session_id: String,
    trial_id: String,
    chosen: ControlVector,
}

#[derive(Deserialize)]
struct AbSubmission {
    session_id: String,
    trial_id: String,
    choice: String,
}

fn parse_body<T: serde::de::DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| bad_request(format!("malformed body: {e}")))
}

fn submit_error(e: SubmitError, trial_id: &str) -> ApiError {
    match e {
        SubmitError::Duplicate => ApiError::new(
            StatusCode::CONFLICT,
            format!("trial `{trial_id}` was already submitted"),
        ),
        SubmitError::UnknownTrial => not_found(format!("trial `{trial_id}` was not issued in this session")),
        SubmitError::WrongMode => bad_request(format!("trial `{trial_id}` belongs to the other study mode")),
    }
}

/// Validates, persists, then marks the trial submitted, all under the
/// session lock so replays race-free resolve to a single record.
fn submit<R: Serialize>(
    state: &AppState,
    session_id: &str,
    trial_id: &str,
    log: &Path,
    build: impl FnOnce(&Session, &Planned) -> ApiResult<R>,
) -> ApiResult<R> {
    let mut sessions = state.sessions.lock().unwrap();
    let session = sessions
        .get_mut(session_id)
        .ok_or_else(|| not_found(format!("unknown session `{session_id}`")))?;
    let planned = session.check_submit(trial_id).map_err(|e| submit_error(e, trial_id))?;
    let record = build(session, planned)?;
    {
        let _guard = state.log.lock().unwrap();
        append_record(log, &record).map_err(internal)?;
    }
    session.mark_submitted(trial_id);
    Ok(record)
}

async fn submit_calibration(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult<Response> {
    let sub: CalibrationSubmission = parse_body(&body)?;
    sub.chosen.validate().map_err(|e| bad_request(e.to_string()))?;
    let log = state.calibration_log();
    let record = submit(&state, &sub.session_id, &sub.trial_id, &log, |session, planned| {
        let Planned::Calibration(t) = planned else {
            return Err(submit_error(SubmitError::WrongMode, &sub.trial_id));
        };
        Ok(CalibrationRecord {
            subject_id: session.subject_id.clone(),
            image_id: t.image_id.clone(),
            target_emotion: t.target_emotion,
            chosen: sub.chosen,
            timestamp: now_ms(),
            session_id: Some(session.id.clone()),
            trial_id: Some(t.trial_id.clone()),
        })
    })?;
    Ok((StatusCode::CREATED, Json(record)).into_response())
}

async fn submit_ab_choice(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult<Response> {
    let sub: AbSubmission = parse_body(&body)?;
    let side: Side = sub
        .choice
        .parse()
        .map_err(|_| bad_request(format!("choice must be `left` or `right`, got `{}`", sub.choice)))?;
    let log = state.ab_log();
    submit(&state, &sub.session_id, &sub.trial_id, &log, |session, planned| {
        let Planned::Ab { trial_id, descriptor } = planned else {
            return Err(submit_error(SubmitError::WrongMode, &sub.trial_id));
        };
        Ok(AbRecord {
            subject_id: session.subject_id.clone(),
            clip_id: descriptor.image_id.clone(),
            shown_emotion: descriptor.shown_emotion,
            is_correct_emotion: descriptor.is_correct_emotion,
            emotion_side: descriptor.emotion_side,
            choice: if side == descriptor.emotion_side {
                Choice::EmotionSide
            } else {
                Choice::NeutralSide
            },
            timestamp: now_ms(),
            session_id: Some(session.id.clone()),
            trial_id: Some(trial_id.clone()),
        })
    })?;
    // The acknowledgment does not echo the record: it would unblind the pair.
    Ok((
        StatusCode::CREATED,
        Json(serde_json::json!({ "session_id": sub.session_id, "trial_id": sub.trial_id, "recorded": true })),
    )
        .into_response())
}

async fn presets() -> Json<BTreeMap<String, ControlVector>> {
    Json(
        shipped_presets()
            .into_iter()
            .map(|p| (p.emotion.name().to_string(), p.vector))
            .collect(),
    )
}
