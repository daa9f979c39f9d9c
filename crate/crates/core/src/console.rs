//! Read-only JSON API over the artifacts of one completed run.
//!
//! The snapshot is loaded once and shared immutably; every handler is a pure
//! function of (snapshot, query). What-if requests recompute thresholds and
//! monthly alert rates per request.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::drift::{monthly_alert_rates, topk_events, DriftReport, MonthlyRate, ShiftStats};
use crate::error::{Error, Result};
use crate::ingest::RangeSummary;
use crate::ops_risk::{thresholds_for_rates, OpsRiskConfig, ThresholdSet};
use crate::output::{load_scored, read_json, ScoredRow};
use crate::pipeline::{RunManifest, MANIFEST};
use crate::record::AlertState;

/// Default artifacts directory for `serve`.
pub const ARTIFACTS_ENV: &str = "REDNET_ARTIFACTS";

#[derive(Debug, Clone)]
pub struct ConsoleApi {
    rows: Vec<ScoredRow>,
    thresholds: ThresholdSet,
    drift: DriftReport,
    ranges: RangeSummary,
    ops: OpsRiskConfig,
    ref_end: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskPoint {
    pub t: NaiveDate,
    pub hab_prob: Option<f64>,
    pub ops_risk: Option<f64>,
    pub state: Option<AlertState>,
    pub det_mean: Option<f64>,
    pub oci_adj: f64,
    pub season_adj: f64,
    pub chlor_a: Option<f64>,
    pub nflh: Option<f64>,
    pub kd490: Option<f64>,
    pub sst: Option<f64>,
}

impl From<&ScoredRow> for RiskPoint {
    fn from(r: &ScoredRow) -> Self {
        RiskPoint {
            t: r.timestamp,
            hab_prob: r.hab_prob,
            ops_risk: r.ops_risk,
            state: r.state,
            det_mean: r.det_mean,
            oci_adj: r.oci_adj,
            season_adj: r.season_adj,
            chlor_a: r.chlor_a,
            nflh: r.nflh,
            kd490: r.kd490,
            sst: r.sst,
        }
    }
}

/// Either both explicit thresholds or both target exceedance rates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WhatIfRequest {
    pub tau_watch: Option<f64>,
    pub tau_action: Option<f64>,
    pub r_watch: Option<f64>,
    pub r_action: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhatIfResponse {
    pub thresholds: ThresholdSet,
    pub monthly_alert_rates: Vec<MonthlyRate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantDrift {
    pub plant_id: String,
    pub shift: ShiftStats,
    pub monthly_alert_rates: Vec<MonthlyRate>,
}

/// Request-level failure: unknown plant (404) or invalid input (422).
#[derive(Debug, Clone, PartialEq)]
pub enum ApiError {
    NotFound(String),
    Invalid(String),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, msg) = match self {
            ApiError::NotFound(m) => (StatusCode::NOT_FOUND, m),
            ApiError::Invalid(m) => (StatusCode::UNPROCESSABLE_ENTITY, m),
        };
        (status, Json(serde_json::json!({ "error": msg }))).into_response()
    }
}

type ApiResult<T> = std::result::Result<T, ApiError>;

impl ConsoleApi {
    /// Loads a run directory; any missing artifact is an error.
    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let manifest: RunManifest = read_json(dir.join(MANIFEST))?;
        Ok(ConsoleApi {
            rows: load_scored(dir.join("ops.csv"))?,
            thresholds: read_json(dir.join("thresholds.json"))?,
            drift: read_json(dir.join("drift.json"))?,
            ranges: read_json(dir.join("ranges.json"))?,
            ops: manifest.config.ops,
            ref_end: manifest.config.ref_end,
        })
    }

    pub fn plants(&self) -> Vec<String> {
        let mut p: Vec<String> = self.rows.iter().map(|r| r.plant_id.clone()).collect();
        p.sort();
        p.dedup();
        p
    }

    fn known_plant(&self, plant: &str) -> ApiResult<()> {
        if self.rows.iter().any(|r| r.plant_id == plant) {
            Ok(())
        } else {
            Err(ApiError::NotFound(format!("unknown plant `{plant}`")))
        }
    }

    /// Rows of one plant with `from <= t <= to`, in time order.
    pub fn risk(
        &self,
        plant: &str,
        from: Option<NaiveDate>,
        to: Option<NaiveDate>,
    ) -> ApiResult<Vec<RiskPoint>> {
        self.known_plant(plant)?;
        let mut pts: Vec<RiskPoint> = self
            .rows
            .iter()
            .filter(|r| r.plant_id == plant)
            .filter(|r| {
                from.is_none_or(|f| r.timestamp >= f) && to.is_none_or(|t| r.timestamp <= t)
            })
            .map(RiskPoint::from)
            .collect();
        pts.sort_by_key(|p| p.t);
        Ok(pts)
    }

    pub fn thresholds(&self) -> &ThresholdSet {
        &self.thresholds
    }

    pub fn ranges(&self) -> &RangeSummary {
        &self.ranges
    }

    pub fn whatif(&self, req: &WhatIfRequest) -> ApiResult<WhatIfResponse> {
        let thresholds = match *req {
            WhatIfRequest {
                tau_watch: Some(w),
                tau_action: Some(a),
                r_watch: None,
                r_action: None,
            } => ThresholdSet::explicit(w, a, &self.ops)
                .map_err(|e| ApiError::Invalid(e.to_string()))?,
            WhatIfRequest {
                tau_watch: None,
                tau_action: None,
                r_watch: Some(rw),
                r_action: Some(ra),
            } => {
                if !((0.0..=1.0).contains(&rw) && (0.0..=1.0).contains(&ra)) {
                    return Err(ApiError::Invalid("rates must lie in [0, 1]".into()));
                }
                let pool: Vec<f64> = self
                    .rows
                    .iter()
                    .filter(|r| r.timestamp <= self.ref_end)
                    .filter_map(|r| r.ops_risk)
                    .collect();
                thresholds_for_rates(&pool, rw, ra, &self.ops)
            }
            _ => {
                return Err(ApiError::Invalid(
                    "give either tau_watch and tau_action, or r_watch and r_action".into(),
                ))
            }
        };
        Ok(WhatIfResponse {
            monthly_alert_rates: monthly_alert_rates(&self.rows, &thresholds),
            thresholds,
        })
    }

    pub fn drift_report(&self) -> &DriftReport {
        &self.drift
    }

    pub fn plant_drift(&self, plant: &str) -> ApiResult<PlantDrift> {
        let shift = self
            .drift
            .plants
            .get(plant)
            .ok_or_else(|| ApiError::NotFound(format!("unknown plant `{plant}`")))?;
        Ok(PlantDrift {
            plant_id: plant.to_string(),
            shift: shift.clone(),
            monthly_alert_rates: self
                .drift
                .monthly_alert_rates
                .iter()
                .filter(|m| m.plant_id == plant)
                .cloned()
                .collect(),
        })
    }

    /// Highest-risk events of the current period.
    pub fn topk(&self, plant: &str, k: usize) -> ApiResult<Vec<ScoredRow>> {
        self.known_plant(plant)?;
        if k == 0 {
            return Err(ApiError::Invalid("k must be >= 1".into()));
        }
        let current: Vec<ScoredRow> = self
            .rows
            .iter()
            .filter(|r| r.plant_id == plant && r.timestamp > self.ref_end)
            .cloned()
            .collect();
        Ok(topk_events(&current, k).remove(plant).unwrap_or_default())
    }
}

#[derive(Debug, Deserialize)]
struct RiskQuery {
    plant: String,
    from: Option<NaiveDate>,
    to: Option<NaiveDate>,
}

#[derive(Debug, Deserialize)]
struct PlantQuery {
    plant: Option<String>,
}

#[derive(Debug, Deserialize)]
struct TopkQuery {
    plant: String,
    k: Option<usize>,
}

type Shared = State<Arc<ConsoleApi>>;

async fn plants(State(api): Shared) -> Json<Vec<String>> {
    Json(api.plants())
}

async fn risk(State(api): Shared, Query(q): Query<RiskQuery>) -> ApiResult<Json<Vec<RiskPoint>>> {
    api.risk(&q.plant, q.from, q.to).map(Json)
}

async fn thresholds(State(api): Shared) -> Json<ThresholdSet> {
    Json(*api.thresholds())
}

async fn whatif(
    State(api): Shared,
    Json(req): Json<WhatIfRequest>,
) -> ApiResult<Json<WhatIfResponse>> {
    api.whatif(&req).map(Json)
}

async fn drift(State(api): Shared, Query(q): Query<PlantQuery>) -> ApiResult<Response> {
    Ok(match q.plant {
        Some(p) => Json(api.plant_drift(&p)?).into_response(),
        None => Json(api.drift_report().clone()).into_response(),
    })
}

async fn topk(State(api): Shared, Query(q): Query<TopkQuery>) -> ApiResult<Json<Vec<ScoredRow>>> {
    let k = q.k.unwrap_or(api.drift_report().metadata.top_k);
    api.topk(&q.plant, k).map(Json)
}

async fn ranges(State(api): Shared) -> Json<RangeSummary> {
    Json(api.ranges().clone())
}

pub fn router(api: Arc<ConsoleApi>) -> Router {
    Router::new()
        .route("/api/plants", get(plants))
        .route("/api/risk", get(risk))
        .route("/api/thresholds", get(thresholds))
        .route("/api/whatif", post(whatif))
        .route("/api/drift", get(drift))
        .route("/api/topk", get(topk))
        .route("/api/ranges", get(ranges))
        .with_state(api)
}

/// Serves `api` until the listener fails. Port 0 picks a free port; the
/// bound address is passed to `on_bound` before serving starts.
pub async fn serve(
    api: ConsoleApi,
    addr: SocketAddr,
    on_bound: impl FnOnce(SocketAddr),
) -> Result<()> {
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| Error::io(PathBuf::from(addr.to_string()), e))?;
    let local = listener
        .local_addr()
        .map_err(|e| Error::io(PathBuf::from(addr.to_string()), e))?;
    on_bound(local);
    axum::serve(listener, router(Arc::new(api)))
        .await
        .map_err(|e| Error::io(PathBuf::from(local.to_string()), e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{run_pipeline, RunConfig};
    use crate::synth::SyntheticConfig;

    fn api() -> (tempfile::TempDir, ConsoleApi) {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig {
            out_dir: dir.path().to_path_buf(),
            synthetic: SyntheticConfig {
                start: NaiveDate::from_ymd_opt(2023, 1, 1).unwrap(),
                ..SyntheticConfig::default()
            },
            k: 3,
            ..RunConfig::default()
        };
        run_pipeline(&cfg).unwrap();
        let api = ConsoleApi::load(dir.path()).unwrap();
        (dir, api)
    }

    #[test]
    fn live_thresholds_reproduce_drift_rates() {
        let (_d, api) = api();
        let t = *api.thresholds();
        let explicit = api
            .whatif(&WhatIfRequest {
                tau_watch: Some(t.tau_watch),
                tau_action: Some(t.tau_action),
                ..Default::default()
            })
            .unwrap();
        assert_eq!(
            explicit.monthly_alert_rates,
            api.drift_report().monthly_alert_rates
        );
    }

    #[test]
    fn whatif_rejects_bad_requests() {
        let (_d, api) = api();
        let gap = WhatIfRequest {
            tau_watch: Some(0.6),
            tau_action: Some(0.62),
            ..Default::default()
        };
        assert!(matches!(api.whatif(&gap), Err(ApiError::Invalid(_))));
        let mixed = WhatIfRequest {
            tau_watch: Some(0.5),
            r_action: Some(0.1),
            ..Default::default()
        };
        assert!(matches!(api.whatif(&mixed), Err(ApiError::Invalid(_))));
        let rates = WhatIfRequest {
            r_watch: Some(0.3),
            r_action: Some(0.1),
            ..Default::default()
        };
        let r = api.whatif(&rates).unwrap();
        assert!(r.thresholds.tau_action - r.thresholds.tau_watch >= 0.04);
    }

    #[test]
    fn lowering_watch_never_lowers_watch_rates() {
        let (_d, api) = api();
        let at = |w: f64| {
            api.whatif(&WhatIfRequest {
                tau_watch: Some(w),
                tau_action: Some(0.8),
                ..Default::default()
            })
            .unwrap()
            .monthly_alert_rates
        };
        for (hi, lo) in at(0.6).iter().zip(at(0.4)) {
            assert!(lo.rate_watch >= hi.rate_watch);
        }
    }

    #[test]
    fn risk_slices_and_unknown_plants() {
        let (_d, api) = api();
        let from = NaiveDate::from_ymd_opt(2025, 1, 1);
        let to = NaiveDate::from_ymd_opt(2025, 12, 31);
        let pts = api.risk("A", from, to).unwrap();
        assert!(!pts.is_empty());
        assert!(pts
            .iter()
            .all(|p| p.t >= from.unwrap() && p.t <= to.unwrap()));
        assert!(pts.windows(2).all(|w| w[0].t <= w[1].t));
        assert!(matches!(
            api.risk("Z", None, None),
            Err(ApiError::NotFound(_))
        ));
        assert_eq!(api.plants(), vec!["A", "B", "C", "D"]);
        let top = api.topk("A", 3).unwrap();
        assert_eq!(top.len(), 3);
        assert_eq!(top, api.drift_report().topk["A"][..3].to_vec());
    }

    #[test]
    fn missing_artifacts_fail_at_load() {
        let dir = tempfile::tempdir().unwrap();
        assert!(ConsoleApi::load(dir.path()).is_err());
    }
}
