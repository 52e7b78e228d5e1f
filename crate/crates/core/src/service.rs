//! JSON-over-HTTP interface.
//!
//! | method | path | |
//! |---|---|---|
//! | POST | `/v1/networks` | import a network document |
//! | GET | `/v1/networks` | list networks |
//! | GET | `/v1/networks/{id}` | export the canonical document |
//! | POST | `/v1/networks/{id}/ask` | `{question}` → answer or pending ticket |
//! | GET | `/v1/networks/{id}/tickets?status=&kind=` | ticket queue |
//! | POST | `/v1/networks/{id}/tickets/{tid}/resolve` | `{action, expected_version}` |
//! | PUT | `/v1/networks/{id}/entities/{eid}` | `{entity, expected_version}` |
//! | PUT | `/v1/networks/{id}/edges/{a}/{b}/relations/{slot}` | `{qa, expected_version}` |
//!
//! Every non-2xx response carries an [`ApiError`] body. When a token is
//! configured, requests must send it in the `x-api-token` header.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, Request, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::audit::Mutation;
use crate::expert::{Action, KindTag, PendingTicket, TicketError, TicketFilter, TicketStatus};
use crate::network::{ConceptNetwork, DocumentError, Entity, NetworkError, QaTuple};
use crate::retrieval::Scorer;
use crate::similarity::SimilarityConfig;
use crate::store::{NetworkStore, StoreError};
use crate::wordnet::WordNetLexicon;

pub const TOKEN_HEADER: &str = "x-api-token";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: u16,
    pub code: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub details: Option<Value>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status: status.as_u16(),
            code: code.to_string(),
            message: message.into(),
            details: None,
        }
    }

    fn with_details(mut self, details: Value) -> Self {
        self.details = Some(details);
        self
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

fn network_error_code(err: &NetworkError) -> &'static str {
    match err {
        NetworkError::EmptyId => "empty_id",
        NetworkError::DuplicateSlotId(_) => "duplicate_slot_id",
        NetworkError::InvalidSlotId(_) => "invalid_slot_id",
        NetworkError::SchemaMismatch { .. } => "schema_mismatch",
        NetworkError::SurfaceFormCollision { .. } => "surface_form_collision",
        NetworkError::InvalidEntity { .. } => "invalid_entity",
        NetworkError::UnknownTopic(_) => "unknown_topic",
        NetworkError::UnknownEntity(_) => "unknown_entity",
        NetworkError::UnknownAttributeSlot(_) => "unknown_attribute_slot",
        NetworkError::UnknownRelationSlot(_) => "unknown_relation_slot",
        NetworkError::SelfLoop(_) => "self_loop",
        NetworkError::EmptyQaField => "empty_qa_field",
    }
}

impl From<StoreError> for ApiError {
    fn from(err: StoreError) -> Self {
        let message = err.to_string();
        match &err {
            StoreError::UnknownNetwork(_) => ApiError::new(StatusCode::NOT_FOUND, "unknown_network", message),
            StoreError::InvalidNetworkId(_) => ApiError::new(StatusCode::BAD_REQUEST, "invalid_network_id", message),
            StoreError::VersionConflict { expected, actual } => {
                ApiError::new(StatusCode::CONFLICT, "version_conflict", message)
                    .with_details(json!({"expected": expected, "actual": actual}))
            }
            StoreError::Ticket(TicketError::UnknownTicket(_)) => {
                ApiError::new(StatusCode::NOT_FOUND, "unknown_ticket", message)
            }
            StoreError::Ticket(TicketError::TicketNotOpen { .. }) => {
                ApiError::new(StatusCode::CONFLICT, "ticket_not_open", message)
            }
            StoreError::Network(e) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, network_error_code(e), message),
            _ => {
                tracing::error!(error = %err, "store failure");
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal_error", message)
            }
        }
    }
}

impl From<DocumentError> for ApiError {
    fn from(err: DocumentError) -> Self {
        let message = err.to_string();
        match err {
            DocumentError::Parse(_) => ApiError::new(StatusCode::BAD_REQUEST, "parse_error", message),
            DocumentError::InvariantViolation { path, .. } => {
                ApiError::new(StatusCode::BAD_REQUEST, "invariant_violation", message)
                    .with_details(json!({"path": path}))
            }
        }
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<NetworkStore>,
    pub lexicon: Arc<WordNetLexicon>,
    pub config: Arc<SimilarityConfig>,
    pub token: Option<String>,
}

impl AppState {
    pub fn new(store: NetworkStore, lexicon: WordNetLexicon, config: SimilarityConfig) -> Self {
        AppState {
            store: Arc::new(store),
            lexicon: Arc::new(lexicon),
            config: Arc::new(config),
            token: None,
        }
    }

    pub fn with_token(mut self, token: impl Into<String>) -> Self {
        self.token = Some(token.into());
        self
    }
}

/// Run blocking store work off the async workers.
async fn blocking<T, F>(state: &AppState, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(AppState) -> ApiResult<T> + Send + 'static,
{
    let state = state.clone();
    tokio::task::spawn_blocking(move || f(state))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal_error", e.to_string()))?
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "parse_error", e.to_string()))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/v1/networks", post(import_network).get(list_networks))
        .route("/v1/networks/{id}", get(export_network))
        .route("/v1/networks/{id}/ask", post(ask))
        .route("/v1/networks/{id}/tickets", get(list_tickets))
        .route("/v1/networks/{id}/tickets/{tid}/resolve", post(resolve_ticket))
        .route("/v1/networks/{id}/entities/{eid}", put(put_entity))
        .route("/v1/networks/{id}/edges/{a}/{b}/relations/{slot}", put(put_relation))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint") })
        .method_not_allowed_fallback(|| async {
            ApiError::new(
                StatusCode::METHOD_NOT_ALLOWED,
                "method_not_allowed",
                "method not allowed",
            )
        })
        .layer(middleware::from_fn_with_state(state.clone(), check_token))
        .with_state(state)
}

async fn check_token(State(state): State<AppState>, request: Request, next: Next) -> Response {
    if let Some(expected) = &state.token {
        let given = request.headers().get(TOKEN_HEADER).and_then(|v| v.to_str().ok());
        if given != Some(expected.as_str()) {
            return ApiError::new(StatusCode::UNAUTHORIZED, "unauthorized", "missing or wrong api token")
                .into_response();
        }
    }
    next.run(request).await
}

/// Bind `addr` and serve until the process is stopped.
pub async fn serve(addr: SocketAddr, state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(state)).await
}

#[derive(Serialize)]
struct ImportResponse {
    id: String,
    version: u64,
}

async fn import_network(State(state): State<AppState>, body: Bytes) -> ApiResult<Json<ImportResponse>> {
    let text =
        std::str::from_utf8(&body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "parse_error", e.to_string()))?;
    let network = ConceptNetwork::deserialize(text)?;
    let info = blocking(&state, move |s| Ok(s.store.import(network)?)).await?;
    Ok(Json(ImportResponse {
        id: info.id,
        version: info.version,
    }))
}

async fn list_networks(State(state): State<AppState>) -> Json<Value> {
    Json(json!({ "networks": state.store.list() }))
}

async fn export_network(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let snapshot = state.store.snapshot(&id)?;
    let mut response = snapshot.network.serialize().into_response();
    response
        .headers_mut()
        .insert(header::CONTENT_TYPE, HeaderValue::from_static("application/json"));
    Ok(response)
}

#[derive(Deserialize)]
struct AskRequest {
    question: String,
}

async fn ask(State(state): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let request: AskRequest = parse_body(&body)?;
    if request.question.trim().is_empty() {
        return Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "empty_question",
            "question must not be empty",
        ));
    }
    let result = blocking(&state, move |s| {
        let scorer = Scorer {
            lexicon: &s.lexicon,
            config: &s.config,
        };
        Ok(s.store.ask(&id, scorer, &request.question)?)
    })
    .await?;
    Ok(Json(result).into_response())
}

#[derive(Serialize)]
struct TicketList {
    network_version: u64,
    tickets: Vec<PendingTicket>,
}

async fn list_tickets(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(params): Query<HashMap<String, String>>,
) -> ApiResult<Json<TicketList>> {
    let bad = |msg: String| ApiError::new(StatusCode::BAD_REQUEST, "invalid_query", msg);
    let status = match params.get("status").map(String::as_str) {
        None | Some("") => Some(TicketStatus::Open),
        Some("all") => None,
        Some(s) => Some(s.parse::<TicketStatus>().map_err(bad)?),
    };
    let kind = match params.get("kind").map(String::as_str) {
        None | Some("") => None,
        Some(k) => Some(k.parse::<KindTag>().map_err(bad)?),
    };
    let version = state.store.snapshot(&id)?.network.version();
    let tickets = state.store.tickets(&id, TicketFilter { status, kind })?;
    Ok(Json(TicketList {
        network_version: version,
        tickets,
    }))
}

#[derive(Deserialize)]
struct ResolveRequest {
    action: Action,
    expected_version: u64,
}

#[derive(Serialize)]
struct ResolveResponse {
    ticket: PendingTicket,
    version: u64,
}

async fn resolve_ticket(
    State(state): State<AppState>,
    Path((id, tid)): Path<(String, String)>,
    body: Bytes,
) -> ApiResult<Json<ResolveResponse>> {
    let ticket_id: u64 = tid
        .parse()
        .map_err(|_| ApiError::new(StatusCode::NOT_FOUND, "unknown_ticket", format!("unknown ticket {tid}")))?;
    let request: ResolveRequest = parse_body(&body)?;
    let (ticket, version) = blocking(&state, move |s| {
        Ok(s.store
            .resolve_ticket(&id, ticket_id, request.action, request.expected_version, "expert")?)
    })
    .await?;
    Ok(Json(ResolveResponse { ticket, version }))
}

#[derive(Serialize)]
struct VersionResponse {
    version: u64,
}

#[derive(Deserialize)]
struct EntityRequest {
    entity: Entity,
    expected_version: u64,
}

async fn put_entity(
    State(state): State<AppState>,
    Path((id, eid)): Path<(String, String)>,
    body: Bytes,
) -> ApiResult<Json<VersionResponse>> {
    let request: EntityRequest = parse_body(&body)?;
    if request.entity.id != eid {
        return Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "id_mismatch",
            format!("body entity id `{}` differs from path `{eid}`", request.entity.id),
        ));
    }
    let version = blocking(&state, move |s| {
        Ok(s.store.mutate(
            &id,
            request.expected_version,
            "editor",
            Mutation::UpsertEntity { entity: request.entity },
        )?)
    })
    .await?;
    Ok(Json(VersionResponse { version }))
}

#[derive(Deserialize)]
struct RelationRequest {
    qa: Option<QaTuple>,
    expected_version: u64,
}

async fn put_relation(
    State(state): State<AppState>,
    Path((id, a, b, slot)): Path<(String, String, String, String)>,
    body: Bytes,
) -> ApiResult<Json<VersionResponse>> {
    let request: RelationRequest = parse_body(&body)?;
    let version = blocking(&state, move |s| {
        Ok(s.store.mutate(
            &id,
            request.expected_version,
            "editor",
            Mutation::UpsertEdgeRelation {
                a,
                b,
                slot,
                qa: request.qa,
            },
        )?)
    })
    .await?;
    Ok(Json(VersionResponse { version }))
}
