//! Experiment runner: solve generated instances, ask sampled questions under
//! each variant, and record timings, qualities and explanation metrics.

use std::io;
use std::time::Instant;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domains::{enumerate_questions, generate_instance, sample_questions, Domain, DomainError, SizeParams};
use crate::engine::{answer, Answer};
use crate::explain::Explanation;
use crate::hcmaop::{HcmaopError, Variant};
use crate::model::{Assignment, Model};
use crate::rational::{self, Rational};
use crate::solver::{solve, SolveError, SolveParams, SolveStatus};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Hcmaop(#[from] HcmaopError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub domain: Domain,
    pub sizes: Vec<SizeParams>,
    pub instances_per_size: usize,
    pub questions_per_instance: usize,
    pub variants: Vec<Variant>,
    pub seed: u64,
    pub solver: SolveParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig::for_domain(Domain::Kp)
    }
}

/// Size ladders small enough for the built-in solver.
pub fn default_ladder(domain: Domain) -> Vec<SizeParams> {
    match domain {
        Domain::Kp | Domain::KpFair => [4, 6, 8, 10].map(|a| SizeParams::kp(a, 10)).to_vec(),
        Domain::Tap => [10, 15, 20, 25].map(|t| SizeParams::tap(5, t)).to_vec(),
        Domain::Wsp => [6, 8, 10].map(|a| SizeParams::wsp(a, 3)).to_vec(),
        Domain::Cvrp => [4, 5, 6].map(|p| SizeParams::cvrp(p, 2)).to_vec(),
    }
}

impl ExperimentConfig {
    pub fn for_domain(domain: Domain) -> Self {
        ExperimentConfig {
            domain,
            sizes: default_ladder(domain),
            instances_per_size: 10,
            questions_per_instance: 10,
            variants: vec![Variant::Q, Variant::C],
            seed: 0,
            solver: SolveParams::default(),
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.sizes.is_empty() || self.instances_per_size == 0 || self.questions_per_instance == 0 {
            return Err(BenchError::InvalidConfig("sizes, instances and questions must be nonempty".into()));
        }
        if self.variants.is_empty() {
            return Err(BenchError::InvalidConfig("at least one variant is required".into()));
        }
        self.solver.validate()?;
        Ok(())
    }

    /// Parses a config file. Missing `sizes` default to the ladder of the
    /// configured domain rather than of the default domain.
    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| BenchError::InvalidConfig(e.to_string()))?;
        let has_sizes = value.get("sizes").is_some();
        let mut config: ExperimentConfig =
            serde_json::from_value(value).map_err(|e| BenchError::InvalidConfig(e.to_string()))?;
        if !has_sizes {
            config.sizes = default_ladder(config.domain);
        }
        Ok(config)
    }

    /// Seed of the `k`-th instance at any size.
    pub fn instance_seed(&self, k: usize) -> u64 {
        self.seed.wrapping_add(k as u64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RecordStatus {
    Optimal,
    PropertyInfeasible,
    /// The base problem or the hypothetical problem hit a limit.
    TimedOut,
    /// q(f(S′)) = 0, so the ratio is undefined.
    DivisionByZero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub domain: Domain,
    pub size: usize,
    pub instance_seed: u64,
    /// Variable id of the asked variable; absent when the base solve failed.
    pub question_id: Option<usize>,
    pub question_var: Option<String>,
    pub variant: Variant,
    pub status: RecordStatus,
    pub t_solve_s: f64,
    pub t_explain_s: f64,
    #[serde(with = "rational::option")]
    pub q_original: Option<Rational>,
    #[serde(with = "rational::option")]
    pub q_hypothetical: Option<Rational>,
    #[serde(with = "rational::option")]
    pub subopt_ratio: Option<Rational>,
    pub expl_length: Option<usize>,
    /// Σz at the hypothetical optimum.
    #[serde(with = "rational::option")]
    pub z_total: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Metrics {
    pub suboptimality_ratio: Option<Rational>,
    pub length: usize,
}

/// Ratio q(f(S))/q(f(S′)) in native sense and |E|.
pub fn compute_metrics(model: &Model, s: &Assignment, s_prime: &Assignment, explanation: &Explanation) -> Metrics {
    let q = model.evaluate_objective(s).expect("complete assignment");
    let q_prime = model.evaluate_objective(s_prime).expect("complete assignment");
    Metrics {
        suboptimality_ratio: (!q_prime.is_zero()).then(|| q / q_prime),
        length: explanation.increases.len() + explanation.decreases.len(),
    }
}

/// Solved base problem of one experiment cell.
pub struct SolvedInstance {
    pub size: usize,
    pub instance_seed: u64,
    pub model: Model,
    pub solution: Option<Assignment>,
    pub t_solve_s: f64,
    pub questions: Vec<crate::domains::Question>,
}

pub fn solve_instance(config: &ExperimentConfig, size: &SizeParams, k: usize) -> Result<SolvedInstance, BenchError> {
    let instance_seed = config.instance_seed(k);
    let instance = generate_instance(config.domain, size, instance_seed)?;
    let started = Instant::now();
    let (model, roles) = instance.build()?;
    let result = solve(&model, &config.solver)?;
    let t_solve_s = started.elapsed().as_secs_f64();
    let (solution, questions) = match (result.status, result.assignment) {
        (SolveStatus::Optimal, Some(a)) => {
            let all = enumerate_questions(&model, &roles, &a);
            (Some(a), sample_questions(&all, config.questions_per_instance, instance_seed))
        }
        _ => (None, Vec::new()),
    };
    Ok(SolvedInstance { size: size.scale(config.domain), instance_seed, model, solution, t_solve_s, questions })
}

/// Runs one (instance, question, variant) cell.
pub fn run_cell(config: &ExperimentConfig, solved: &SolvedInstance, question: &crate::domains::Question, variant: Variant) -> Result<BenchRecord, BenchError> {
    run_cell_detailed(config, solved, question, variant).map(|(record, _)| record)
}

/// [`run_cell`] plus the underlying answer when the hypothetical solve succeeded.
pub fn run_cell_detailed(
    config: &ExperimentConfig,
    solved: &SolvedInstance,
    question: &crate::domains::Question,
    variant: Variant,
) -> Result<(BenchRecord, Option<Answer>), BenchError> {
    let solution = solved.solution.as_ref().expect("cells need a solved instance");
    let q_original = solved.model.evaluate_objective(solution).ok();
    let mut record = BenchRecord {
        domain: config.domain,
        size: solved.size,
        instance_seed: solved.instance_seed,
        question_id: Some(question.id),
        question_var: Some(question.variable.clone()),
        variant,
        status: RecordStatus::Optimal,
        t_solve_s: solved.t_solve_s,
        t_explain_s: 0.0,
        q_original,
        q_hypothetical: None,
        subopt_ratio: None,
        expl_length: None,
        z_total: None,
    };
    let started = Instant::now();
    match answer(&solved.model, solution, &question.property(), variant, &config.solver) {
        Ok(a) => {
            record.t_explain_s = a.seconds;
            let metrics = compute_metrics(&solved.model, solution, &a.hypothetical.assignment, &a.explanation);
            record.q_hypothetical = Some(a.hypothetical.quality);
            record.z_total = Some(a.hypothetical.changes);
            record.expl_length = Some(metrics.length);
            match metrics.suboptimality_ratio {
                Some(r) => record.subopt_ratio = Some(r),
                None => {
                    record.status = RecordStatus::DivisionByZero;
                    record.expl_length = None;
                }
            }
            return Ok((record, Some(a)));
        }
        Err(HcmaopError::PropertyInfeasible(_)) => {
            record.t_explain_s = started.elapsed().as_secs_f64();
            record.status = RecordStatus::PropertyInfeasible;
        }
        Err(HcmaopError::TimedOut) => {
            record.t_explain_s = started.elapsed().as_secs_f64();
            record.status = RecordStatus::TimedOut;
        }
        Err(e) => return Err(e.into()),
    }
    Ok((record, None))
}

/// Records in canonical order: size, instance, question, variant.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<BenchRecord>, BenchError> {
    config.validate()?;
    let mut records = Vec::new();
    for size in &config.sizes {
        for k in 0..config.instances_per_size {
            let solved = solve_instance(config, size, k)?;
            if solved.solution.is_none() {
                for variant in &config.variants {
                    records.extend((0..config.questions_per_instance).map(|_| BenchRecord {
                        domain: config.domain,
                        size: solved.size,
                        instance_seed: solved.instance_seed,
                        question_id: None,
                        question_var: None,
                        variant: *variant,
                        status: RecordStatus::TimedOut,
                        t_solve_s: solved.t_solve_s,
                        t_explain_s: 0.0,
                        q_original: None,
                        q_hypothetical: None,
                        subopt_ratio: None,
                        expl_length: None,
                        z_total: None,
                    }));
                }
                continue;
            }
            for question in &solved.questions {
                for variant in &config.variants {
                    records.push(run_cell(config, &solved, question, *variant)?);
                }
            }
        }
    }
    Ok(records)
}

pub const CSV_HEADER: [&str; 12] = [
    "domain",
    "size",
    "instance_seed",
    "question_id",
    "variant",
    "status",
    "t_solve_s",
    "t_explain_s",
    "q_original",
    "q_hypothetical",
    "subopt_ratio",
    "expl_length",
];

fn opt_rational(r: &Option<Rational>) -> String {
    r.as_ref().map(rational::format_rational).unwrap_or_default()
}

pub fn write_csv<W: io::Write>(records: &[BenchRecord], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.domain.tag().to_string(),
            r.size.to_string(),
            r.instance_seed.to_string(),
            r.question_id.map(|q| q.to_string()).unwrap_or_default(),
            r.variant.label().to_string(),
            format!("{:?}", r.status),
            format!("{:.6}", r.t_solve_s),
            format!("{:.6}", r.t_explain_s),
            opt_rational(&r.q_original),
            opt_rational(&r.q_hypothetical),
            r.subopt_ratio.map(|x| format!("{:.6}", rational::to_f64(&x))).unwrap_or_default(),
            r.expl_length.map(|l| l.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Median of t_explain / t_solve over Optimal records.
pub fn median_time_ratio(records: &[BenchRecord]) -> Option<f64> {
    let mut ratios: Vec<f64> = records
        .iter()
        .filter(|r| r.status == RecordStatus::Optimal && r.t_solve_s > 0.0)
        .map(|r| r.t_explain_s / r.t_solve_s)
        .collect();
    if ratios.is_empty() {
        return None;
    }
    ratios.sort_by(f64::total_cmp);
    let mid = ratios.len() / 2;
    Some(if ratios.len().is_multiple_of(2) { (ratios[mid - 1] + ratios[mid]) / 2.0 } else { ratios[mid] })
}
