//! Local HTTP service backing the trajectory-authoring preview.
//!
//! Bodies reuse the file schemas: keyframes are trajectory keyframe
//! records, `/project` answers with a one-frame landmark-frames file and
//! `/trajectory` stores trajectory files per session.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use crate::camera::{Intrinsics, Pose};
use crate::error::{Error, ErrorClass, Result};
use crate::landmarks::{
    project_landmarks, rasterize, LandmarkFrame2D, LandmarkFramesFile, LandmarkTemplate3D, RasterStyle,
    TemplateFile,
};
use crate::trajectory::{CameraKeyframe, ImageSize, KeyframeRecord, TrajectoryFile};

pub const BUILTIN_TEMPLATE: &str = "builtin";

/// A single view: template, camera, and output size.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViewRequest {
    /// `"builtin"` (default) or the name of a template registered with
    /// the server.
    #[serde(default)]
    pub template_ref: Option<String>,
    /// Inline template; takes precedence over `template_ref`.
    #[serde(default)]
    pub template: Option<TemplateFile>,
    /// Look-at camera. Mutually exclusive with `pose` + `intrinsics`.
    #[serde(default)]
    pub keyframe: Option<KeyframeRecord>,
    #[serde(default)]
    pub pose: Option<Pose>,
    #[serde(default)]
    pub intrinsics: Option<Intrinsics>,
    pub image: ImageSize,
    #[serde(default)]
    pub style: Option<RasterStyle>,
}

#[derive(Default)]
pub struct AppState {
    templates: HashMap<String, LandmarkTemplate3D>,
    sessions: Mutex<HashMap<String, Arc<Mutex<TrajectoryFile>>>>,
    /// Raster style used when a request does not carry one.
    pub default_style: RasterStyle,
}

impl AppState {
    pub fn new(default_style: RasterStyle) -> Self {
        AppState { default_style, ..Default::default() }
    }

    pub fn with_template(mut self, name: impl Into<String>, t: LandmarkTemplate3D) -> Self {
        self.templates.insert(name.into(), t);
        self
    }

    fn template(&self, req: &ViewRequest) -> Result<LandmarkTemplate3D> {
        if let Some(t) = &req.template {
            return t.clone().into_template();
        }
        match req.template_ref.as_deref() {
            None | Some(BUILTIN_TEMPLATE) => Ok(LandmarkTemplate3D::builtin()),
            Some(name) => self
                .templates
                .get(name)
                .cloned()
                .ok_or_else(|| Error::schema(format!("unknown template_ref '{name}'"))),
        }
    }
}

/// Resolved camera for a request.
pub fn resolve_camera(req: &ViewRequest) -> Result<(Pose, Intrinsics)> {
    let ImageSize { w, h } = req.image;
    match (&req.keyframe, &req.pose, &req.intrinsics) {
        (Some(kf), None, None) => {
            let file = TrajectoryFile { image: req.image, keyframes: vec![kf.clone()], frames: None };
            let traj = file.to_trajectory()?;
            let k: &CameraKeyframe = &traj.keyframes[0];
            Ok((k.pose, k.intrinsics(w, h)?))
        }
        (None, Some(pose), Some(k)) => {
            if (k.width, k.height) != (w, h) {
                return Err(Error::schema("intrinsics size differs from image size"));
            }
            k.validate()?;
            Ok((*pose, *k))
        }
        _ => Err(Error::schema("give either keyframe or pose with intrinsics")),
    }
}

fn project_view(state: &AppState, req: &ViewRequest) -> Result<(LandmarkTemplate3D, LandmarkFrame2D, Intrinsics)> {
    let t = state.template(req)?;
    let (pose, k) = resolve_camera(req)?;
    let lm = project_landmarks(&t, &pose, &k).map_err(|e| match e {
        Error::AllBehindCamera { .. } => Error::AllBehindCamera { frame: Some(0) },
        e => e,
    })?;
    Ok((t, lm, k))
}

/// `/project` body for a request.
pub fn project_request(state: &AppState, req: &ViewRequest) -> Result<LandmarkFramesFile> {
    let (t, lm, k) = project_view(state, req)?;
    Ok(LandmarkFramesFile::from_frames(&[lm], t.ids(), k.width, k.height))
}

/// `/condition` PNG for a request.
pub fn condition_request(state: &AppState, req: &ViewRequest) -> Result<Vec<u8>> {
    let (t, lm, k) = project_view(state, req)?;
    let style = req.style.clone().unwrap_or_else(|| state.default_style.clone());
    style.validate()?;
    Ok(rasterize(&lm, &style.bind(&t), k.width, k.height).png_bytes())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub class: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frame: Option<usize>,
}

pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn not_found(msg: String) -> Self {
        ApiError { status: StatusCode::NOT_FOUND, body: ErrorBody { error: msg, class: "not_found".into(), frame: None } }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let (status, class) = match e.class() {
            ErrorClass::Usage | ErrorClass::Schema => (StatusCode::BAD_REQUEST, "schema"),
            ErrorClass::Geometry => (StatusCode::UNPROCESSABLE_ENTITY, "geometry"),
            ErrorClass::Io => (StatusCode::INTERNAL_SERVER_ERROR, "io"),
        };
        let frame = match &e {
            Error::AllBehindCamera { frame } => *frame,
            _ => None,
        };
        ApiError { status, body: ErrorBody { error: e.to_string(), class: class.into(), frame } }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

/// Parses a JSON body; syntax and schema violations become 400.
fn parse<T: serde::de::DeserializeOwned>(body: &Bytes) -> std::result::Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| Error::schema(e).into())
}

#[derive(Deserialize)]
struct SessionQuery {
    session: Option<String>,
}

impl SessionQuery {
    fn id(self) -> std::result::Result<String, ApiError> {
        self.session.filter(|s| !s.is_empty()).ok_or_else(|| Error::schema("missing session parameter").into())
    }
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

async fn post_project(State(st): State<Arc<AppState>>, body: Bytes) -> std::result::Result<Json<LandmarkFramesFile>, ApiError> {
    let req: ViewRequest = parse(&body)?;
    Ok(Json(project_request(&st, &req)?))
}

async fn post_condition(State(st): State<Arc<AppState>>, body: Bytes) -> std::result::Result<Response, ApiError> {
    let req: ViewRequest = parse(&body)?;
    let png = condition_request(&st, &req)?;
    Ok(([(header::CONTENT_TYPE, "image/png")], png).into_response())
}

async fn get_trajectory(
    State(st): State<Arc<AppState>>,
    Query(q): Query<SessionQuery>,
) -> std::result::Result<Json<TrajectoryFile>, ApiError> {
    let id = q.id()?;
    let doc = st.sessions.lock().expect("session table poisoned").get(&id).cloned();
    let doc = doc.ok_or_else(|| ApiError::not_found(format!("unknown session '{id}'")))?;
    let file = doc.lock().expect("session document poisoned").clone();
    Ok(Json(file))
}

/// Validates and stores the trajectory; the response is the stored document.
async fn put_trajectory(
    State(st): State<Arc<AppState>>,
    Query(q): Query<SessionQuery>,
    body: Bytes,
) -> std::result::Result<Json<TrajectoryFile>, ApiError> {
    let id = q.id()?;
    let file: TrajectoryFile = parse(&body)?;
    file.to_trajectory()?;
    let doc = st
        .sessions
        .lock()
        .expect("session table poisoned")
        .entry(id)
        .or_insert_with(|| Arc::new(Mutex::new(file.clone())))
        .clone();
    *doc.lock().expect("session document poisoned") = file.clone();
    Ok(Json(file))
}

pub fn router(state: Arc<AppState>, static_dir: Option<PathBuf>) -> Router {
    let r = Router::new()
        .route("/health", get(health))
        .route("/project", post(post_project))
        .route("/condition", post(post_condition))
        .route("/trajectory", get(get_trajectory).put(put_trajectory))
        .with_state(state);
    match static_dir {
        Some(dir) => r.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => r,
    }
}

/// Serves until the process is stopped.
pub fn serve(addr: SocketAddr, state: AppState, static_dir: Option<PathBuf>) -> Result<()> {
    let rt = tokio::runtime::Runtime::new().map_err(|e| Error::io("tokio runtime", e))?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await.map_err(|e| Error::io(addr.to_string(), e))?;
        log::info!("listening on http://{addr}");
        axum::serve(listener, router(Arc::new(state), static_dir))
            .await
            .map_err(|e| Error::io(addr.to_string(), e))
    })
}
