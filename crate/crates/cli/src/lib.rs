//! Command implementations behind the `qcausal` binary.
//!
//! Every command writes a `report.json` into the output directory that embeds
//! the fully resolved configuration it ran with.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use qcausal_core::algebra::{AlgebraMode, Profile};
use qcausal_core::hierarchy::{CompileStats, CompiledHierarchy, HierarchyConfig, ScenarioProblem};
use qcausal_core::moment::ObjectiveMode;
use qcausal_core::oracle::{
    magic_basis_model, sample_general_model, sample_model, squared_distance, truncate_model,
    FiniteModel,
};
use qcausal_core::scenario::{
    parse_structure, prepare, CausalStructure, Distribution, StructureClass,
};
use qcausal_core::sdp::{certify, export_sdpa, Decision, Residuals, SolveStatus, SolverSettings};

pub const REPORT_FILE: &str = "report.json";
pub const PROBLEM_FILE: &str = "problem.sdpa";
pub const MODEL_FILE: &str = "model.json";
pub const DISTRIBUTION_FILE: &str = "distribution.json";
pub const MOMENTS_FILE: &str = "moments.json";

/// Optional algebra and constraint variants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProfileFlags {
    pub hermitian_generators: bool,
    pub legacy_projective: bool,
    pub legacy_marginals: bool,
}

impl Default for ProfileFlags {
    fn default() -> Self {
        ProfileFlags {
            hermitian_generators: true,
            legacy_projective: false,
            legacy_marginals: false,
        }
    }
}

impl ProfileFlags {
    /// Parses a comma-separated flag list. The listed flags are switched on
    /// and every other flag off; `default` restores the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut flags = ProfileFlags {
            hermitian_generators: false,
            legacy_projective: false,
            legacy_marginals: false,
        };
        for tok in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            match tok {
                "hermitianGenerators" => flags.hermitian_generators = true,
                "legacyProjective" => flags.legacy_projective = true,
                "legacyMarginals" => flags.legacy_marginals = true,
                "default" => flags = ProfileFlags::default(),
                other => bail!(
                    "unknown profile flag `{other}` (expected hermitianGenerators, legacyProjective, legacyMarginals or default)"
                ),
            }
        }
        Ok(flags)
    }
}

pub fn parse_mode(text: &str) -> Result<ObjectiveMode> {
    Ok(match text {
        "polarizedObjective" => ObjectiveMode::PolarizedObjective,
        "linearConstraints" => ObjectiveMode::LinearConstraints,
        "quadraticEpigraph" => ObjectiveMode::QuadraticEpigraph,
        other => bail!(
            "unknown mode `{other}` (expected polarizedObjective, linearConstraints or quadraticEpigraph)"
        ),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunConfig {
    pub scenario: PathBuf,
    pub distribution: Option<PathBuf>,
    pub n: usize,
    pub k: usize,
    pub r: usize,
    #[serde(rename = "C")]
    pub c_bound: f64,
    pub epsilon: f64,
    pub mode: ObjectiveMode,
    pub profile: ProfileFlags,
    pub tol: f64,
    /// Seconds.
    pub time_limit: Option<f64>,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn new(scenario: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        RunConfig {
            scenario: scenario.into(),
            distribution: None,
            n: 1,
            k: 1,
            r: 1,
            c_bound: 1.0,
            epsilon: 0.0,
            mode: ObjectiveMode::QuadraticEpigraph,
            profile: ProfileFlags::default(),
            tol: SolverSettings::default().tol,
            time_limit: None,
            out: out.into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 || self.k < 1 || self.r < 1 {
            bail!(
                "n, k and r must be at least 1 (got n={}, k={}, r={})",
                self.n,
                self.k,
                self.r
            );
        }
        if !(self.c_bound > 0.0 && self.c_bound.is_finite()) {
            bail!("C must be positive, got {}", self.c_bound);
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            bail!("epsilon must be non-negative, got {}", self.epsilon);
        }
        if !(self.tol > 0.0) {
            bail!("tol must be positive, got {}", self.tol);
        }
        if let Some(t) = self.time_limit {
            if !(t > 0.0) {
                bail!("time limit must be positive, got {t}");
            }
        }
        Ok(())
    }

    pub fn hierarchy(&self) -> HierarchyConfig {
        // Projectors are self-adjoint whatever the generator flag says.
        let hermitian = self.profile.hermitian_generators || self.profile.legacy_projective;
        HierarchyConfig {
            n: self.n,
            k: self.k,
            r: self.r,
            c_bound: self.c_bound,
            mode: self.mode,
            profile: Profile {
                hermitian_generators: hermitian,
                mode: if self.profile.legacy_projective {
                    AlgebraMode::LegacyProjective
                } else {
                    AlgebraMode::RankConstrained
                },
            },
            legacy_marginals: self.profile.legacy_marginals,
            all_real: hermitian,
        }
    }

    pub fn solver(&self) -> SolverSettings {
        SolverSettings {
            tol: self.tol,
            time_limit: self.time_limit,
            ..SolverSettings::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Level {
    pub n: usize,
    pub k: usize,
    pub r: usize,
    #[serde(rename = "C")]
    pub c_bound: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CompileReport {
    pub config: RunConfig,
    pub structure_class: StructureClass,
    pub parties: Vec<String>,
    pub stats: CompileStats,
    pub warnings: Vec<String>,
    pub compile_time: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CertifyReport {
    pub config: RunConfig,
    pub level: Level,
    pub decision: Decision,
    pub status: SolveStatus,
    pub value: Option<f64>,
    pub lower_bound: Option<f64>,
    pub residuals: Residuals,
    pub iterations: usize,
    pub solve_time: f64,
    pub stats: CompileStats,
    pub warnings: Vec<String>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(dir: &Path, name: &str, text: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write(dir, name, &text)
}

pub fn load_structure(path: &Path) -> Result<CausalStructure> {
    parse_structure(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn load_problem(config: &RunConfig) -> Result<(CausalStructure, ScenarioProblem)> {
    let s = load_structure(&config.scenario)?;
    let dist = match &config.distribution {
        Some(p) => Some(
            Distribution::parse(&read(p)?, &s).with_context(|| format!("parsing {}", p.display()))?,
        ),
        None => None,
    };
    let problem = ScenarioProblem::new(&s, dist.as_ref())?;
    Ok((s, problem))
}

fn compile(config: &RunConfig) -> Result<(ScenarioProblem, CompiledHierarchy, f64)> {
    config.validate()?;
    let (_, problem) = load_problem(config)?;
    let start = Instant::now();
    let compiled = problem.compile(&config.hierarchy())?;
    let elapsed = start.elapsed().as_secs_f64();
    for w in &compiled.warnings {
        log::warn!("{w}");
    }
    log::info!(
        "compiled: {} generators, {} variables after merge, blocks {:?}",
        compiled.stats.generator_count,
        compiled.stats.variables_after_merge,
        compiled.stats.block_dims
    );
    Ok((problem, compiled, elapsed))
}

/// Builds the relaxation and writes `problem.sdpa` and a statistics report.
pub fn cmd_compile(config: &RunConfig) -> Result<CompileReport> {
    let (problem, compiled, compile_time) = compile(config)?;
    write(&config.out, PROBLEM_FILE, &export_sdpa(&compiled.problem))?;
    let report = CompileReport {
        config: config.clone(),
        structure_class: problem.prepared.class,
        parties: problem
            .prepared
            .network
            .parties
            .iter()
            .map(|p| p.id.clone())
            .collect(),
        stats: compiled.stats.clone(),
        warnings: compiled.warnings.clone(),
        compile_time,
    };
    write_json(&config.out, REPORT_FILE, &report)?;
    Ok(report)
}

/// Compiles, solves and applies the rejection rule.
pub fn cmd_certify(config: &RunConfig) -> Result<CertifyReport> {
    if config.distribution.is_none() {
        bail!("certify needs a distribution (--dist)");
    }
    let (_, compiled, _) = compile(config)?;
    write(&config.out, PROBLEM_FILE, &export_sdpa(&compiled.problem))?;
    let result = compiled.solve(&config.solver())?;
    let decision = certify(&result, config.epsilon);
    log::info!(
        "status {:?}, value {:?}, decision {:?}",
        result.status,
        result.value,
        decision
    );
    let report = CertifyReport {
        config: config.clone(),
        level: Level {
            n: config.n,
            k: config.k,
            r: config.r,
            c_bound: config.c_bound,
        },
        decision,
        status: result.status,
        value: result.value,
        lower_bound: result.lower_bound,
        residuals: result.residuals,
        iterations: result.iterations,
        solve_time: result.solve_time,
        stats: compiled.stats.clone(),
        warnings: compiled.warnings.clone(),
    };
    write_json(&config.out, REPORT_FILE, &report)?;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "command")]
pub enum OracleCommand {
    /// Random model on a scenario; `rank: None` samples without a Schmidt
    /// structure.
    Sample {
        scenario: PathBuf,
        endpoint_dim: usize,
        rank: Option<usize>,
        seed: u64,
        out: PathBuf,
    },
    /// The magic-basis triangle model with `copies` inflation copies per slot.
    Magic { copies: usize, out: PathBuf },
    /// Moments of every word of the relaxation at (n, k), plus the minimum
    /// eigenvalue of every instantiated block.
    Moments {
        model: PathBuf,
        n: usize,
        k: usize,
        words: Vec<String>,
        out: PathBuf,
    },
    Truncate {
        model: PathBuf,
        r: usize,
        delta: f64,
        out: PathBuf,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WordMoment {
    pub word: String,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OracleReport {
    pub command: OracleCommand,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub block_min_eigenvalues: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equality_residual: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub moments: Vec<WordMoment>,
    /// ‖P̃ − P‖₂² between the truncated and the original model.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distribution_error: Option<f64>,
}

impl OracleReport {
    fn new(command: &OracleCommand) -> Self {
        OracleReport {
            command: command.clone(),
            c_bound: None,
            rank: None,
            block_min_eigenvalues: Vec::new(),
            equality_residual: None,
            moments: Vec::new(),
            distribution_error: None,
        }
    }
}

fn load_model(path: &Path) -> Result<FiniteModel> {
    FiniteModel::from_json(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn write_model(out: &Path, model: &FiniteModel) -> Result<()> {
    write(out, MODEL_FILE, &model.to_json())?;
    write(out, DISTRIBUTION_FILE, &model.distribution()?.to_json())
}

pub fn cmd_oracle(command: &OracleCommand) -> Result<OracleReport> {
    let mut report = OracleReport::new(command);
    let out = match command {
        OracleCommand::Sample {
            scenario,
            endpoint_dim,
            rank,
            seed,
            out,
        } => {
            log::info!("sampling with seed {seed}");
            let s = load_structure(scenario)?;
            let net = prepare(&s)?.network;
            let model = match rank {
                Some(r) => sample_model(&net, *endpoint_dim, *r, *seed)?.0,
                None => sample_general_model(&net, *endpoint_dim, *seed)?,
            };
            report.c_bound = Some(model.c_bound);
            report.rank = Some(model.r);
            write_model(out, &model)?;
            out
        }
        OracleCommand::Magic { copies, out } => {
            let m = magic_basis_model(*copies);
            report.c_bound = Some(m.model.c_bound);
            report.rank = Some(m.model.r);
            write_model(out, &m.model)?;
            out
        }
        OracleCommand::Moments {
            model,
            n,
            k,
            words,
            out,
        } => {
            let model = load_model(model)?;
            let config = HierarchyConfig {
                n: *n,
                k: *k,
                r: model.r,
                c_bound: model.c_bound,
                ..HierarchyConfig::default()
            };
            let cells = model.cells()?;
            let h = CompiledHierarchy::compile(&model.network, Some(&cells), &config)?;
            let values = model.product_extension(&h.alphabet, h.words())?;
            let x = h.point(&values);
            report.block_min_eigenvalues = h.problem.block_min_eigenvalues(&x);
            report.equality_residual = Some(h.problem.residuals(&x).equality);
            report.moments = if words.is_empty() {
                h.words()
                    .iter()
                    .zip(&values)
                    .map(|(w, v)| WordMoment {
                        word: h.alphabet.word_label(w),
                        re: v.re,
                        im: v.im,
                    })
                    .collect()
            } else {
                let mut parsed = Vec::with_capacity(words.len());
                for text in words {
                    parsed.push(h.alphabet.parse_word(text)?);
                }
                let known: Vec<_> = parsed.iter().flatten().cloned().collect();
                let known_values = model.product_extension(&h.alphabet, &known)?;
                let mut it = known_values.into_iter();
                words
                    .iter()
                    .zip(&parsed)
                    .map(|(text, w)| {
                        // A word that normalizes to zero has moment zero.
                        let v = w.as_ref().and_then(|_| it.next()).unwrap_or_default();
                        WordMoment {
                            word: text.clone(),
                            re: v.re,
                            im: v.im,
                        }
                    })
                    .collect()
            };
            write_json(out, MOMENTS_FILE, &report.moments)?;
            out
        }
        OracleCommand::Truncate {
            model,
            r,
            delta,
            out,
        } => {
            let original = load_model(model)?;
            let truncated = truncate_model(&original, *r, *delta)?;
            report.distribution_error =
                Some(squared_distance(&truncated.cells()?, &original.cells()?));
            report.c_bound = Some(truncated.c_bound);
            report.rank = Some(truncated.r);
            write_model(out, &truncated)?;
            out
        }
    };
    write_json(out, REPORT_FILE, &report)?;
    Ok(report)
}
