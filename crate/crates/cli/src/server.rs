//! HTTP JSON service over a loaded surrogate model.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::{json, Value};

use shoebox::ann::SurrogateNet;
use shoebox::dataset::{METRIC_LABELS, METRIC_NAMES};
use shoebox::scene::{build_grid, Bounds, Divisions, GridSpec, Orientation, RoomConfig, Shading, GLAZING_TRANSMITTANCE, ROOM_HEIGHT};
use shoebox::shap::{exact_shap, FeatureGrouping};
use shoebox::views::{assess, ViewSettings};

/// Immutable state shared by all requests.
pub struct AppState {
    pub model: SurrogateNet,
    pub digest: String,
    pub background: Vec<Vec<f64>>,
    pub grouping: FeatureGrouping,
    pub grid: GridSpec,
    pub views: ViewSettings,
}

impl AppState {
    pub fn new(model: SurrogateNet, background: Vec<Vec<f64>>) -> Self {
        AppState {
            digest: model.digest(),
            model,
            background,
            grouping: FeatureGrouping::design_variables(),
            grid: GridSpec::default(),
            views: ViewSettings::default(),
        }
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn bad_request(message: impl ToString) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            body: json!({ "error": "malformed request body", "message": message.to_string() }),
        }
    }

    fn out_of_range(field: &str, value: f64, bounds: Bounds) -> Self {
        ApiError {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            body: json!({
                "error": "value out of range",
                "field": field,
                "value": value,
                "min": bounds.min,
                "max": bounds.max,
                "message": format!("{field} = {value} outside [{}, {}]", bounds.min, bounds.max),
            }),
        }
    }

    fn invalid(message: impl ToString) -> Self {
        ApiError {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            body: json!({ "error": "invalid configuration", "message": message.to_string() }),
        }
    }

    fn internal(message: impl ToString) -> Self {
        ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            body: json!({ "error": "internal error", "message": message.to_string() }),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/design-space", get(design_space))
        .route("/predict", post(predict))
        .route("/explain", post(explain))
        .with_state(state)
}

async fn health(State(s): State<Arc<AppState>>) -> Json<Value> {
    Json(json!({ "status": "ok", "model_digest": s.digest }))
}

fn range(name: &str, b: Bounds, unit: &str) -> Value {
    let default = ((b.min + b.max) / 2.0 * 100.0).round() / 100.0;
    json!({ "name": name, "min": b.min, "max": b.max, "default": default, "unit": unit })
}

/// Seven design variables with the ranges the model was trained on.
pub fn design_space_json(model: &SurrogateNet) -> Value {
    let n = &model.norm;
    let categorical = |name: &str, choices: Vec<&str>, default: &str| {
        json!({ "name": name, "kind": "categorical", "choices": choices, "default": default })
    };
    let scalar = |name: &str, b: Bounds, unit: &str| {
        let mut v = range(name, b, unit);
        v["kind"] = json!("range");
        v
    };
    json!({
        "variables": [
            categorical("orientation", Orientation::ALL.iter().map(|o| o.as_str()).collect(), "S"),
            {
                "name": "room_dimensions",
                "kind": "dimensions",
                "fields": [range("width", n.width, "m"), range("depth", n.depth, "m")],
            },
            scalar("reflectance", n.reflectance, "fraction"),
            categorical("shading", vec![Shading::None.as_str(), Shading::HorizontalLouvre15cm.as_str()], "none"),
            scalar("sill_height", n.sill_height, "m"),
            scalar("window_height", n.window_height, "m"),
            categorical(
                "divisions",
                vec![Divisions::OneFullWidth.as_str(), Divisions::ThreeEqual.as_str()],
                Divisions::OneFullWidth.as_str(),
            ),
        ],
        "fixed": { "height": ROOM_HEIGHT, "glazing_transmittance": GLAZING_TRANSMITTANCE },
        "metrics": METRIC_NAMES.iter().zip(METRIC_LABELS).map(|(n, l)| json!({ "name": n, "label": l, "unit": "fraction" })).collect::<Vec<_>>(),
    })
}

async fn design_space(State(s): State<Arc<AppState>>) -> Json<Value> {
    Json(design_space_json(&s.model))
}

/// Parses and checks a request body against the config invariants and the
/// model's trained ranges.
pub fn parse_config(body: &[u8], model: &SurrogateNet) -> Result<RoomConfig, ApiError> {
    let config: RoomConfig = serde_json::from_slice(body).map_err(ApiError::bad_request)?;
    if let Some((field, value, bounds)) = model.norm.violation(&config) {
        return Err(ApiError::out_of_range(field, value, bounds));
    }
    config.validate().map_err(ApiError::invalid)?;
    Ok(config)
}

fn metric_object(values: &[f64]) -> Value {
    Value::Object(
        METRIC_NAMES
            .iter()
            .zip(values)
            .map(|(n, v)| (n.to_string(), json!(v)))
            .collect(),
    )
}

pub fn predict_json(s: &AppState, config: &RoomConfig) -> Result<Value, ApiError> {
    let prediction = s.model.predict_config(config).map_err(ApiError::internal)?;
    let grid = build_grid(config, &s.grid).map_err(ApiError::invalid)?;
    let views = assess(config, &grid, &s.views).map_err(ApiError::invalid)?;
    Ok(json!({
        "prediction": metric_object(&prediction.to_array()),
        "geometric": {
            "view_range": views.view_range_fraction,
            "view_depth": views.view_depth_fraction,
            "view_factor": views.view_factor_fraction,
        },
        "quality_views_pass": views.quality_views_pass,
        "model_digest": s.digest,
    }))
}

pub fn explain_json(s: &AppState, config: &RoomConfig) -> Result<Value, ApiError> {
    let x = s.model.norm.features(config);
    let e = exact_shap(&s.model, x.as_slice(), &s.background, &s.grouping).map_err(ApiError::internal)?;
    let groups = s.grouping.names();
    let attributions: Vec<Value> = METRIC_NAMES
        .iter()
        .enumerate()
        .map(|(k, name)| {
            json!({
                "metric": name,
                "base": e.base[k],
                "prediction": e.prediction[k],
                "phi": groups.iter().zip(&e.phi[k]).map(|(g, v)| json!({ "group": g, "value": v })).collect::<Vec<_>>(),
            })
        })
        .collect();
    Ok(json!({
        "groups": groups,
        "background_size": s.background.len(),
        "efficiency_gap": e.efficiency_gap(),
        "attributions": attributions,
    }))
}

async fn compute(
    s: Arc<AppState>,
    body: Bytes,
    f: fn(&AppState, &RoomConfig) -> Result<Value, ApiError>,
) -> Result<Json<Value>, ApiError> {
    let config = parse_config(&body, &s.model)?;
    tokio::task::spawn_blocking(move || f(&s, &config))
        .await
        .map_err(ApiError::internal)?
        .map(Json)
}

async fn predict(State(s): State<Arc<AppState>>, body: Bytes) -> Result<Json<Value>, ApiError> {
    compute(s, body, predict_json).await
}

async fn explain(State(s): State<Arc<AppState>>, body: Bytes) -> Result<Json<Value>, ApiError> {
    compute(s, body, explain_json).await
}

pub async fn serve(state: Arc<AppState>, bind: &str) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(bind).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}
