//! Interactive question sessions: one solved instance plus the history of
//! questions asked about it. Sessions persist to versioned JSON files.

use std::fs;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domains::{decode_routes, enumerate_questions, DomainError, GenSpec, Instance, Question, Route, VarRole};
use crate::engine::answer;
use crate::explain::{render_explanation, Explanation, RenderedExplanation};
use crate::hcmaop::{HcmaopError, Property, Variant, Weights};
use crate::model::{Assignment, Model};
use crate::rational::{self, JsonRational, Rational};
use crate::solver::{solve, SolveParams, SolveResult, SolveStats, SolveStatus};

pub const SCHEMA_VERSION: u32 = 1;

pub const PROPERTY_INFEASIBLE_MESSAGE: &str = "the requested property contradicts the problem constraints";

#[derive(Debug, Error)]
pub enum ApiError {
    #[error("{0}")]
    Validation(String),
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("unknown session {0:?}")]
    UnknownSession(String),
    #[error("{PROPERTY_INFEASIBLE_MESSAGE}")]
    PropertyInfeasible,
    #[error("solver did not finish within its limits")]
    SolveTimeout,
    #[error("session file has schema version {found}, expected {SCHEMA_VERSION}")]
    SchemaVersionMismatch { found: u32 },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("internal error: {0}")]
    Internal(String),
}

impl ApiError {
    pub fn code(&self) -> &'static str {
        match self {
            ApiError::Validation(_) => "validation_error",
            ApiError::UnknownVariable(_) => "unknown_variable",
            ApiError::UnknownSession(_) => "unknown_session",
            ApiError::PropertyInfeasible => "property_infeasible",
            ApiError::SolveTimeout => "solve_timeout",
            ApiError::SchemaVersionMismatch { .. } => "schema_version_mismatch",
            ApiError::Io(_) => "io_error",
            ApiError::Internal(_) => "internal_error",
        }
    }

    /// HTTP status code for this error.
    pub fn status(&self) -> u16 {
        match self {
            ApiError::Validation(_) => 400,
            ApiError::UnknownVariable(_) | ApiError::UnknownSession(_) => 404,
            ApiError::PropertyInfeasible => 409,
            ApiError::SchemaVersionMismatch { .. } => 422,
            ApiError::SolveTimeout => 503,
            ApiError::Io(_) | ApiError::Internal(_) => 500,
        }
    }
}

impl From<DomainError> for ApiError {
    fn from(e: DomainError) -> Self {
        ApiError::Validation(e.to_string())
    }
}

impl From<HcmaopError> for ApiError {
    fn from(e: HcmaopError) -> Self {
        match e {
            HcmaopError::PropertyInfeasible(_) => ApiError::PropertyInfeasible,
            HcmaopError::TimedOut => ApiError::SolveTimeout,
            HcmaopError::UnknownVariable(v) => ApiError::UnknownVariable(v),
            HcmaopError::Solve(s) => ApiError::Internal(s.to_string()),
            other => ApiError::Validation(other.to_string()),
        }
    }
}

/// Body of a session-creation request: a full instance or a generation spec.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SessionSource {
    Instance(Instance),
    GenSpec(GenSpec),
}

impl SessionSource {
    pub fn from_json(value: serde_json::Value) -> Result<Self, ApiError> {
        let instance_err = match serde_json::from_value::<Instance>(value.clone()) {
            Ok(i) => return Ok(SessionSource::Instance(i)),
            Err(e) => e,
        };
        let looks_like_spec = ["size", "seed", "fixture"].iter().any(|k| value.get(k).is_some())
            && value.as_object().is_some_and(|o| o.keys().all(|k| ["domain", "size", "seed", "fixture"].contains(&k.as_str())));
        if looks_like_spec || value.as_object().is_some_and(|o| o.len() == 1 && o.contains_key("domain")) {
            return serde_json::from_value::<GenSpec>(value)
                .map(SessionSource::GenSpec)
                .map_err(|e| ApiError::Validation(format!("invalid generation spec: {e}")));
        }
        Err(ApiError::Validation(format!("invalid instance: {instance_err}")))
    }

    pub fn realize(&self) -> Result<Instance, ApiError> {
        match self {
            SessionSource::Instance(i) => Ok(i.clone()),
            SessionSource::GenSpec(g) => Ok(g.realize()?),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolvedSolution {
    pub status: SolveStatus,
    pub assignment: Assignment,
    #[serde(with = "rational")]
    pub objective: Rational,
    pub stats: SolveStats,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AskRequest {
    pub variable: String,
    #[serde(default)]
    pub variant: Option<Variant>,
    #[serde(default)]
    pub alpha: Option<JsonRational>,
    #[serde(default)]
    pub beta: Option<JsonRational>,
}

impl AskRequest {
    fn resolved_variant(&self) -> Result<Variant, ApiError> {
        match (self.alpha, self.beta) {
            (Some(a), Some(b)) => Ok(Variant::Custom { alpha: a.0, beta: b.0 }),
            (None, None) => Ok(self.variant.unwrap_or_default()),
            _ => Err(ApiError::Validation("alpha and beta must be given together".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AskMetrics {
    #[serde(with = "rational")]
    pub quality_diff: Rational,
    pub length: usize,
    #[serde(with = "rational::option")]
    pub suboptimality_ratio: Option<Rational>,
    #[serde(with = "rational")]
    pub changes: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AskTimings {
    pub t_explain_s: f64,
    pub t_total_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AskResponse {
    pub question: Question,
    pub variant: Variant,
    pub weights: Weights,
    /// Solution variables of the hypothetical solution, by name.
    pub s_prime: IndexMap<String, JsonRational>,
    #[serde(with = "rational")]
    pub q_hypothetical: Rational,
    pub explanation: Explanation,
    pub rendered: RenderedExplanation,
    pub metrics: AskMetrics,
    pub timings: AskTimings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub question: Question,
    pub variant: Variant,
    pub response: AskResponse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub schema_version: u32,
    pub id: String,
    pub instance: Instance,
    pub model: Model,
    pub roles: Vec<VarRole>,
    pub solution: SolvedSolution,
    pub history: Vec<HistoryEntry>,
    /// Unix milliseconds.
    pub created_at: u64,
    pub updated_at: u64,
    #[serde(default)]
    pub params: SolveParams,
}

/// Compact view returned on creation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub id: String,
    pub domain: String,
    pub agents: Vec<String>,
    pub status: SolveStatus,
    #[serde(with = "rational")]
    pub objective: Rational,
    /// Solution variables at a nonzero value.
    pub selected: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub routes: Option<Vec<Route>>,
    pub questions: usize,
    pub history: usize,
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

pub fn create_session(source: &SessionSource, params: &SolveParams) -> Result<Session, ApiError> {
    params.validate().map_err(|e| ApiError::Validation(e.to_string()))?;
    let instance = source.realize()?;
    let (model, _) = instance.build()?;
    let result = solve(&model, params).map_err(|e| ApiError::Validation(e.to_string()))?;
    Session::from_solution(instance, result, params)
}

impl Session {
    /// Wraps an already solved instance. `result` must come from the model
    /// that `instance` builds.
    pub fn from_solution(instance: Instance, result: SolveResult, params: &SolveParams) -> Result<Session, ApiError> {
        let (model, roles) = instance.build()?;
        let (status, assignment, objective) = match (result.status, result.assignment, result.objective) {
            (SolveStatus::Optimal, Some(a), Some(q)) => (SolveStatus::Optimal, a, q),
            (SolveStatus::Infeasible, ..) => {
                return Err(ApiError::Validation("the instance has no feasible solution".into()))
            }
            _ => return Err(ApiError::SolveTimeout),
        };
        if assignment.len() != model.num_vars() || model.evaluate_objective(&assignment).ok() != Some(objective) {
            return Err(ApiError::Validation("solution does not match the instance".into()));
        }
        let now = now_ms();
        Ok(Session {
            schema_version: SCHEMA_VERSION,
            id: uuid::Uuid::new_v4().to_string(),
            instance,
            model,
            roles,
            solution: SolvedSolution { status, assignment, objective, stats: result.stats },
            history: Vec::new(),
            created_at: now,
            updated_at: now,
            params: params.clone(),
        })
    }

    pub fn questions(&self) -> Vec<Question> {
        enumerate_questions(&self.model, &self.roles, &self.solution.assignment)
    }

    pub fn routes(&self) -> Option<Vec<Route>> {
        match &self.instance {
            Instance::Cvrp(c) => decode_routes(c, &self.model, &self.solution.assignment).ok(),
            _ => None,
        }
    }

    pub fn summary(&self) -> SessionSummary {
        SessionSummary {
            id: self.id.clone(),
            domain: self.instance.domain().tag().to_string(),
            agents: self.model.agents().to_vec(),
            status: self.solution.status,
            objective: self.solution.objective,
            selected: self
                .model
                .solution_vars()
                .filter(|v| self.solution.assignment.get(v.id) != Rational::from_integer(0))
                .map(|v| v.name.clone())
                .collect(),
            routes: self.routes(),
            questions: self.questions().len(),
            history: self.history.len(),
        }
    }

    /// Answers "why is `variable` not 1?" and appends the answer to history.
    pub fn ask(&mut self, request: &AskRequest) -> Result<AskResponse, ApiError> {
        let started = Instant::now();
        let response = self.answer(request, started)?;
        self.history.push(HistoryEntry {
            question: response.question.clone(),
            variant: response.variant,
            response: response.clone(),
        });
        self.updated_at = now_ms();
        Ok(response)
    }

    /// Same as [`Session::ask`] without touching history.
    pub fn answer(&self, request: &AskRequest, started: Instant) -> Result<AskResponse, ApiError> {
        let id = self.model.var_id(&request.variable).ok_or_else(|| ApiError::UnknownVariable(request.variable.clone()))?;
        let role = &self.roles[id];
        let askable = (self.model.variable(id).is_solution || matches!(role, VarRole::Pair { .. })) && role.is_askable();
        if !askable {
            return Err(ApiError::Validation(format!("{:?} is not an askable variable", request.variable)));
        }
        let variant = request.resolved_variant()?;
        let question = Question { id, variable: request.variable.clone(), prompt: role.prompt() };
        let property = Property::fix(id, Rational::from_integer(1), question.prompt.clone());
        let a = answer(&self.model, &self.solution.assignment, &property, variant, &self.params)?;
        let template = self.instance.template(&self.roles);
        let rendered = render_explanation(&a.explanation, Some(&template));
        let s_prime = self
            .model
            .solution_vars()
            .map(|v| (v.name.clone(), JsonRational(a.hypothetical.assignment.get(v.id))))
            .collect();
        Ok(AskResponse {
            question,
            variant,
            weights: a.weights,
            s_prime,
            q_hypothetical: a.hypothetical.quality,
            metrics: AskMetrics {
                quality_diff: a.explanation.summary.quality_diff,
                length: a.explanation.length,
                suboptimality_ratio: a.explanation.suboptimality_ratio,
                changes: a.hypothetical.changes,
            },
            explanation: a.explanation,
            rendered,
            timings: AskTimings { t_explain_s: a.seconds, t_total_s: started.elapsed().as_secs_f64() },
        })
    }

    pub fn persist(&self, path: &Path) -> Result<(), ApiError> {
        let text = serde_json::to_string_pretty(self).map_err(|e| ApiError::Internal(e.to_string()))?;
        fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Session, ApiError> {
        let text = fs::read_to_string(path)?;
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| ApiError::Validation(format!("session file is not JSON: {e}")))?;
        let found = value.get("schema_version").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
        if found != SCHEMA_VERSION {
            return Err(ApiError::SchemaVersionMismatch { found });
        }
        serde_json::from_value(value).map_err(|e| ApiError::Validation(format!("invalid session file: {e}")))
    }
}
