//! One level of the hierarchy, from a network and target to a solvable SDP.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{build_relations, AlgebraMode, Alphabet, Polynomial, Profile, Word};
use crate::error::{Error, Result};
use crate::inflation::SymmetryGroup;
use crate::moment::{
    enumerate_basis, probability_constraints, symmetry_merge, LinearForm, LocalizingKind,
    LocalizingSpec, MomentContext, ObjectiveMode, ProbabilityOptions, SymbolicMatrix,
    VariableTable, WordTable,
};
use crate::scenario::{
    conditional_target, network_cells, prepare, CausalStructure, Distribution, NetworkScenario,
    Prepared, TargetCell,
};
use crate::sdp::{self, assemble, AssemblyInput, SdpProblem, SolveResult, SolverSettings, VariableLayout};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HierarchyConfig {
    /// Inflation level.
    pub n: usize,
    /// Moment matrix level.
    pub k: usize,
    /// Schmidt rank.
    pub r: usize,
    /// Norm bound on each Schmidt factor.
    pub c_bound: f64,
    pub mode: ObjectiveMode,
    pub profile: Profile,
    pub legacy_marginals: bool,
    /// Drop imaginary parts (requires hermitian generators).
    pub all_real: bool,
}

impl Default for HierarchyConfig {
    fn default() -> Self {
        HierarchyConfig {
            n: 1,
            k: 1,
            r: 1,
            c_bound: 1.0,
            mode: ObjectiveMode::QuadraticEpigraph,
            profile: Profile::default(),
            legacy_marginals: false,
            all_real: true,
        }
    }
}

impl HierarchyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 || self.k < 1 || self.r < 1 {
            return Err(Error::InvalidParameter(format!(
                "n, k and r must be at least 1 (got n={}, k={}, r={})",
                self.n, self.k, self.r
            )));
        }
        if !(self.c_bound > 0.0) || !self.c_bound.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "C must be positive, got {}",
                self.c_bound
            )));
        }
        if self.all_real && !self.profile.hermitian_generators {
            return Err(Error::InvalidParameter(
                "all-real moments need hermitian generators".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CompileStats {
    /// Unstarred letters plus the identity.
    pub generator_count: usize,
    pub letter_count: usize,
    /// d_0, …, d_k.
    pub basis_sizes: Vec<usize>,
    pub word_count: usize,
    pub variables_before_merge: usize,
    pub variables_after_merge: usize,
    pub group_order: String,
    pub group_fully_enumerated: bool,
    pub sdp_variables: usize,
    pub block_dims: Vec<usize>,
    pub equality_count: usize,
    pub localizing_count: usize,
    pub deferred_constraints: usize,
}

/// A compiled relaxation with everything needed to solve it or to check an
/// explicit model against it.
pub struct CompiledHierarchy {
    pub config: HierarchyConfig,
    pub alphabet: Alphabet,
    pub table: WordTable,
    pub variables: VariableTable,
    pub moment: SymbolicMatrix,
    pub localizing: Vec<LocalizingSpec>,
    pub problem: SdpProblem,
    pub layout: VariableLayout,
    pub stats: CompileStats,
    pub warnings: Vec<String>,
    /// User inequalities were added; completeness is not claimed.
    pub relaxation_only: bool,
    epigraph: Vec<(LinearForm, f64)>,
}

impl CompiledHierarchy {
    pub fn compile(
        net: &NetworkScenario,
        target: Option<&[TargetCell]>,
        config: &HierarchyConfig,
    ) -> Result<Self> {
        Self::compile_with_inequalities(net, target, config, &[])
    }

    /// As `compile`, with extra constraints ρ(y) ≥ 0 over copy-1 words.
    pub fn compile_with_inequalities(
        net: &NetworkScenario,
        target: Option<&[TargetCell]>,
        config: &HierarchyConfig,
        inequalities: &[Polynomial],
    ) -> Result<Self> {
        config.validate()?;
        let alphabet = Alphabet::new(net, config.n, config.r, config.profile)?;
        let relations = build_relations(&alphabet, config.c_bound)?;
        let basis = enumerate_basis(&alphabet, config.k);
        let mut warnings = Vec::new();

        let (objective, equalities, epigraph, localizing, moment, table, variables, before, group_info) = {
            let mut ctx = MomentContext::new(&alphabet);
            let moment = ctx.moment_matrix(&basis);
            let mut localizing = Vec::new();
            for q in relations.norm.iter().chain(&relations.positivity) {
                localizing.push(ctx.localizing_matrix(q, &basis, config.k, LocalizingKind::Positive));
            }
            for q in &relations.equalities {
                localizing.push(ctx.localizing_matrix(q, &basis, config.k, LocalizingKind::Zero));
            }
            let mut objective = LinearForm::new();
            let mut equalities = Vec::new();
            let mut epigraph = Vec::new();
            match target {
                Some(cells) => {
                    let options = ProbabilityOptions {
                        legacy_marginals: config.legacy_marginals,
                    };
                    let bundle = probability_constraints(&alphabet, cells, config.mode, options, config.k)?;
                    warnings.extend(bundle.warnings);
                    objective = ctx.linear_form(&bundle.objective);
                    for (p, v) in &bundle.equalities {
                        equalities.push((ctx.linear_form(p), *v));
                    }
                    for (p, v) in &bundle.epigraph {
                        epigraph.push((ctx.linear_form(p), *v));
                    }
                }
                None if config.mode == ObjectiveMode::LinearConstraints => {
                    return Err(Error::InvalidParameter(
                        "linearConstraints mode needs a target distribution".into(),
                    ));
                }
                None => warnings.push("no target distribution; compiling the bare relaxation".into()),
            }
            for y in inequalities {
                if !alphabet.is_self_adjoint(y, 1e-12) {
                    return Err(Error::InvalidParameter(
                        "inequality constraints must be self-adjoint".into(),
                    ));
                }
                localizing.push(LocalizingSpec {
                    source: y.clone(),
                    level: 0,
                    kind: LocalizingKind::Positive,
                    matrix: SymbolicMatrix {
                        dim: 1,
                        entries: vec![ctx.linear_form(y)],
                    },
                });
            }
            let group = (config.n >= 2).then(|| SymmetryGroup::new(&alphabet));
            let variables = symmetry_merge(&ctx, group.as_ref(), config.all_real);
            let before = symmetry_merge(&ctx, None, config.all_real).len();
            let group_info = group
                .as_ref()
                .map_or((1, true), |g| (g.order(), g.is_fully_enumerated()));
            warnings.append(&mut ctx.warnings);
            (
                objective,
                equalities,
                epigraph,
                localizing,
                moment,
                ctx.table().clone(),
                variables,
                before,
                group_info,
            )
        };

        let deferred = localizing.iter().filter(|l| l.is_empty()).count();
        let (problem, layout) = assemble(&AssemblyInput {
            table: &table,
            variables: &variables,
            moment: &moment,
            localizing: &localizing,
            equalities: &equalities,
            objective: &objective,
            epigraph: &epigraph,
        })?;
        let stats = CompileStats {
            generator_count: alphabet.generator_count(),
            letter_count: alphabet.len(),
            basis_sizes: basis.cumulative.clone(),
            word_count: table.len(),
            variables_before_merge: before,
            variables_after_merge: variables.len(),
            group_order: group_info.0.to_string(),
            group_fully_enumerated: group_info.1,
            sdp_variables: problem.num_vars,
            block_dims: problem.block_dims(),
            equality_count: problem.equalities.len(),
            localizing_count: localizing.len() - deferred,
            deferred_constraints: deferred,
        };
        if alphabet.mode() == AlgebraMode::LegacyProjective && config.r != 1 {
            warnings.push("legacy projective mode ignores r".into());
        }
        Ok(CompiledHierarchy {
            config: config.clone(),
            alphabet,
            table,
            variables,
            moment,
            localizing,
            problem,
            layout,
            stats,
            warnings,
            relaxation_only: !inequalities.is_empty(),
            epigraph,
        })
    }

    pub fn solve(&self, settings: &SolverSettings) -> Result<SolveResult> {
        sdp::solve(&self.problem, settings)
    }

    /// Interned words, in the order expected by `point`.
    pub fn words(&self) -> &[Word] {
        self.table.words()
    }

    /// SDP point for per-word moment values (e.g. from an explicit model);
    /// the epigraph variable is set to the exact squared distance.
    pub fn point(&self, values: &[Complex64]) -> Vec<f64> {
        let mut x = self.layout.point(&self.variables, values);
        if let Some(t) = self.layout.epigraph {
            x[t] = self
                .epigraph
                .iter()
                .map(|(form, p)| {
                    let v: f64 = form.iter().map(|&(w, c)| (c * values[w as usize]).re).sum();
                    (v - p).powi(2)
                })
                .sum();
        }
        x
    }
}

/// Scenario-level entry point: rewrites the structure, conditions the
/// distribution, and compiles.
pub struct ScenarioProblem {
    pub prepared: Prepared,
    pub cells: Option<Vec<TargetCell>>,
    pub warnings: Vec<String>,
}

impl ScenarioProblem {
    pub fn new(structure: &CausalStructure, distribution: Option<&Distribution>) -> Result<Self> {
        let prepared = prepare(structure)?;
        let mut warnings = Vec::new();
        let cells = match distribution {
            Some(p) => {
                let t = conditional_target(p, structure, &prepared.report)?;
                warnings.extend(t.warnings.iter().cloned());
                if !t.factorization.passes {
                    warnings.push(format!(
                        "setting variables do not factorize (max deviation {:.3e})",
                        t.factorization.max_deviation
                    ));
                }
                Some(network_cells(&t, &prepared.network)?)
            }
            None => None,
        };
        Ok(ScenarioProblem {
            prepared,
            cells,
            warnings,
        })
    }

    pub fn compile(&self, config: &HierarchyConfig) -> Result<CompiledHierarchy> {
        let mut c = CompiledHierarchy::compile(&self.prepared.network, self.cells.as_deref(), config)?;
        let mut w = self.warnings.clone();
        w.append(&mut c.warnings);
        c.warnings = w;
        Ok(c)
    }
}
