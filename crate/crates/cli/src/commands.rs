//! Subcommand bodies. Each returns an [`Outcome`] or a [`Failure`] that maps
//! onto the process exit code.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use diabatic::gatemodel::{error_scaling, fit_zn_form, gate_error, Axis, GateErrorReport, ScalingReference};
use diabatic::propagator::{full_evolution_operator, half_passage_p};
use diabatic::synthesis::{
    compose, controlled_not, embedded_dynamics, recipe, synthesize, target_unitary, GateName, GateRecipe,
    PairHamiltonian, PhaseCondition, RecipeKind, SearchWindow, TracePoint,
};
use diabatic::trajectory::MASSEY_ADIABATIC_THRESHOLD;
use diabatic::{adiabaticity, Adiabaticity, Matrix, Model, Passage, Scaling, Settings, ZnForm};

use crate::config::{ConfigError, Format, Range, RunConfig};
use crate::table::{local_maxima, write_csv, write_json, Annotation, SweepRow, SweepTable};

#[derive(Debug)]
pub enum Failure {
    /// Bad arguments, configuration or I/O. Exit code 2.
    Usage(anyhow::Error),
    /// Integration, quadrature, fit or search failure. Exit code 3.
    Numerical(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(e) => write!(f, "{e:#}"),
            Failure::Numerical(e) => write!(f, "numerical failure: {e:#}"),
        }
    }
}

impl From<diabatic::Error> for Failure {
    fn from(e: diabatic::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.into())
        } else {
            Failure::Usage(e.into())
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Usage(e.into())
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

/// What a successful run produced. `passed == false` maps to exit code 1.
#[derive(Debug)]
pub struct Outcome {
    pub summary: String,
    pub files: Vec<PathBuf>,
    pub passed: bool,
}

type Run = Result<Outcome, Failure>;

fn model_and_settings(cfg: &RunConfig) -> Result<(Model, Settings), Failure> {
    cfg.validate()?;
    Ok((cfg.model()?, cfg.settings()))
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf, Failure> {
    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| Failure::Usage(anyhow::anyhow!("creating {}: {e}", cfg.out_dir.display())))?;
    Ok(cfg.out_dir.clone())
}

pub fn sweep_v(cfg: &RunConfig) -> Run {
    let (model, settings) = model_and_settings(cfg)?;
    let v = cfg.v_range(500);
    let b = Range {
        min: cfg.b,
        max: cfg.b,
        points: 1,
    };
    let table = SweepTable::evaluate(cfg, &model, &settings, &v, &b);
    let files = table.write(&out_dir(cfg)?, "sweep-v", cfg.format)?;

    let ok: Vec<&SweepRow> = table.rows.iter().filter(|r| r.is_ok()).collect();
    let mut summary = format!("{} rows, {} failed", table.rows.len(), table.failed_rows());
    let argmax = |f: &dyn Fn(&SweepRow) -> f64| {
        ok.iter()
            .map(|r| (r.v, f(r)))
            .fold((f64::NAN, f64::NEG_INFINITY), |a, c| if c.1 > a.1 { c } else { a })
    };
    if !ok.is_empty() {
        let (vp, p) = argmax(&|r| r.transition_probability.unwrap());
        let (ve, e) = argmax(&|r| r.eta.unwrap());
        let probs: Vec<f64> = ok.iter().map(|r| r.transition_probability.unwrap()).collect();
        let fringes = local_maxima(&probs)
            .into_iter()
            .filter(|&i| ok[i].v >= 0.02 && ok[i].v <= 0.1)
            .count();
        summary += &format!(
            "\nmax transition probability {p:.6} at v = {vp:.5}\nmax eta {e:.4} at v = {ve:.5}\nlocal maxima of P on [0.02, 0.1]: {fringes}"
        );
    }
    Ok(Outcome {
        summary,
        files,
        passed: true,
    })
}

pub fn sweep_grid(cfg: &RunConfig) -> Run {
    let (model, settings) = model_and_settings(cfg)?;
    let mut table = SweepTable::evaluate(cfg, &model, &settings, &cfg.v_range(50), &cfg.b_range(26));
    let mut points: Vec<(String, (f64, f64))> = ["not", "z", "t", "hadamard"]
        .iter()
        .map(|g| (g.to_string(), recipe(g).expect("registered").nominal_point))
        .collect();
    points.push(("hadamard (v and b exchanged)".into(), (0.2249, 0.2677)));
    table.annotations = points
        .into_iter()
        .map(|(label, (v, b))| {
            let row = SweepRow::evaluate(&model, &settings, v, b);
            Annotation {
                label,
                v,
                b,
                half_p: row.half_p,
                transition_probability: row.transition_probability,
                status: row.status,
            }
        })
        .collect();
    let files = table.write(&out_dir(cfg)?, "sweep-grid", cfg.format)?;
    let mut summary = format!(
        "{} x {} grid, {} failed rows",
        table.axes.v.len(),
        table.axes.b.len(),
        table.failed_rows()
    );
    for a in &table.annotations {
        if let Some(p) = a.half_p {
            summary += &format!("\n{:<24} (v, b) = ({}, {}): p = {p:.4}", a.label, a.v, a.b);
        }
    }
    Ok(Outcome {
        summary,
        files,
        passed: true,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddedReport {
    pub n_qubits: usize,
    pub coupled_pair: (usize, usize),
    pub pair_hamiltonian: PairHamiltonian,
    pub full_unitary: Matrix,
    /// Largest deviation from identity outside the coupled pair.
    pub complement_deviation: f64,
    /// Gap between the integrated register and the embedding of its block.
    pub leakage: f64,
    pub unitarity_defect: f64,
    /// Block against the two-state target.
    pub block_error: GateErrorReport<f64>,
    /// Whole register against the ideal controlled gate.
    pub ideal_error: GateErrorReport<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchInfo {
    pub window: SearchWindow<f64>,
    pub converged: bool,
    pub trace: Vec<TracePoint<f64>>,
}

/// Gate realized at one `(v, b)`, found by search or given directly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateReport {
    pub config: RunConfig,
    pub gate: String,
    pub target: GateName,
    pub v: f64,
    pub b: f64,
    pub gate_error: GateErrorReport<f64>,
    pub zn: ZnForm,
    pub half_p: f64,
    pub phase_condition: PhaseCondition,
    pub phase_distance: f64,
    pub expected_half_p: Option<(f64, f64)>,
    pub unitary: Matrix,
    pub embedded: Option<EmbeddedReport>,
    pub threshold: f64,
    /// The error compared against `threshold`: the block `d_max` for
    /// embedded gates, `d_max` otherwise.
    pub checked_error: f64,
    pub passed: bool,
    pub search: Option<SearchInfo>,
}

fn single_recipe(gate: &str) -> Result<GateRecipe, Failure> {
    let r = recipe(gate)?;
    if matches!(r.kind, RecipeKind::Composite(_)) {
        return Err(Failure::Usage(anyhow::anyhow!(
            "{gate} is a product of passages; use `compose` (e.g. `compose z not --expect Y`)"
        )));
    }
    Ok(r)
}

fn window_for(cfg: &RunConfig, r: &GateRecipe) -> SearchWindow<f64> {
    let w = r.window;
    let mut w = SearchWindow {
        v_min: cfg.search_v_min.unwrap_or(w.v_min),
        v_max: cfg.search_v_max.unwrap_or(w.v_max),
        b_min: cfg.search_b_min.unwrap_or(w.b_min),
        b_max: cfg.search_b_max.unwrap_or(w.b_max),
        refine_evals: cfg.refine_evals,
        ..w
    };
    // A degenerate b window keeps a single column.
    w = w.with_grid(cfg.nv.unwrap_or(100), cfg.nb.unwrap_or(48));
    w
}

fn gate_report(
    cfg: &RunConfig,
    model: &Model,
    settings: &Settings,
    r: &GateRecipe,
    v: f64,
    b: f64,
    pair: PairHamiltonian,
    search: Option<SearchInfo>,
) -> Result<GateReport, Failure> {
    let traj = Passage::new(v, b)?;
    let u = full_evolution_operator(model, &traj, settings)?.unitary;
    let half_p = half_passage_p(model, &traj, settings)?;
    let zn = fit_zn_form(&u, half_p)?;
    let target = target_unitary::<f64>(r.target).matrix;
    let err = gate_error(&u, &target)?;
    let embedded = match r.kind {
        RecipeKind::Embedded { n_qubits, pair: coupled } => {
            let e = embedded_dynamics(model, &traj, n_qubits, coupled, pair, settings)?;
            Some(EmbeddedReport {
                n_qubits,
                coupled_pair: coupled,
                pair_hamiltonian: pair,
                complement_deviation: e.gate.complement_deviation(),
                leakage: e.leakage,
                unitarity_defect: e.unitarity_defect,
                block_error: gate_error(&e.gate.block, &target)?,
                ideal_error: gate_error(&e.gate.full_unitary, &controlled_not(n_qubits))?,
                full_unitary: e.gate.full_unitary,
            })
        }
        _ => None,
    };
    let checked_error = embedded.as_ref().map_or(err.d_max, |e| e.block_error.d_max);
    Ok(GateReport {
        config: cfg.clone(),
        gate: r.name.clone(),
        target: r.target,
        v,
        b,
        gate_error: err,
        phase_distance: r.phase_condition.distance(&zn),
        zn,
        half_p,
        phase_condition: r.phase_condition,
        expected_half_p: r.expected_half_p,
        unitary: u,
        embedded,
        threshold: cfg.threshold,
        checked_error,
        passed: checked_error <= cfg.threshold,
        search,
    })
}

fn gate_summary(r: &GateReport) -> String {
    let mut s = format!(
        "{} vs {}: (v, b) = ({:.6}, {:.6})\nd_max = {:.3e}, trace bound = {:.3e}, phase-invariant infidelity = {:.3e}\nfit: p = {:.4}, alpha00 = {:.5}, alpha01 = {:.5}, residual = {:.1e}, phase distance = {:.2e} rad\nhalf-passage p = {:.4}",
        r.gate,
        r.target,
        r.v,
        r.b,
        r.gate_error.d_max,
        r.gate_error.trace_bound,
        r.gate_error.phase_invariant_infidelity,
        r.zn.p,
        r.zn.alpha00,
        r.zn.alpha01,
        r.zn.fit_residual,
        r.phase_distance,
        r.half_p
    );
    if r.zn.is_mismatch() {
        s += "\nwarning: unitary does not have the symmetric-passage shape";
    }
    if let Some(e) = &r.embedded {
        s += &format!(
            "\n{}-qubit register, pair {:?}: complement deviation {:e}, block d_max {:.3e}, d_max vs ideal {:.3e}",
            e.n_qubits, e.coupled_pair, e.complement_deviation, e.block_error.d_max, e.ideal_error.d_max
        );
    }
    if let Some(search) = &r.search {
        if !search.converged {
            s += "\nwarning: refinement stopped before converging";
        }
    }
    s += &format!(
        "\n{} (error {:.3e} vs threshold {:.1e})",
        if r.passed { "PASS" } else { "MISS" },
        r.checked_error,
        r.threshold
    );
    s
}

fn write_gate_report(cfg: &RunConfig, stem: &str, r: &GateReport) -> Result<Vec<PathBuf>, Failure> {
    let dir = out_dir(cfg)?;
    let json = dir.join(format!("{stem}.json"));
    write_json(&json, r)?;
    let mut files = vec![json];
    if let (Format::Csv, Some(search)) = (cfg.format, &r.search) {
        let csv = dir.join(format!("{stem}.trace.csv"));
        write_csv(&csv, &search.trace)?;
        files.push(csv);
    }
    Ok(files)
}

pub fn synthesize_gate(cfg: &RunConfig, gate: &str, pair: PairHamiltonian) -> Run {
    let (model, settings) = model_and_settings(cfg)?;
    if let RecipeKind::Composite(parts) = recipe(gate)?.kind {
        let target = recipe(gate)?.target;
        return compose_gates(cfg, &parts, Some(target), false);
    }
    let r = single_recipe(gate)?;
    let window = window_for(cfg, &r);
    let res = synthesize(&model, &target_unitary(r.target), &window, &settings)?;
    let search = SearchInfo {
        window,
        converged: res.converged,
        trace: res.search_trace,
    };
    let report = gate_report(cfg, &model, &settings, &r, res.v_opt, res.b_opt, pair, Some(search))?;
    let files = write_gate_report(cfg, &format!("synthesize-{}", r.name), &report)?;
    Ok(Outcome {
        summary: gate_summary(&report),
        files,
        passed: report.passed,
    })
}

pub fn report_gate(cfg: &RunConfig, gate: &str, v: f64, b: f64, pair: PairHamiltonian) -> Run {
    let (model, settings) = model_and_settings(cfg)?;
    let r = single_recipe(gate)?;
    let report = gate_report(cfg, &model, &settings, &r, v, b, pair, None)?;
    let files = write_gate_report(cfg, &format!("report-{}", r.name), &report)?;
    Ok(Outcome {
        summary: gate_summary(&report),
        files,
        passed: report.passed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceKind {
    /// The unperturbed operator at the operating point.
    Nominal,
    /// The gate's achieved target matrix.
    Target,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub config: RunConfig,
    pub gate: String,
    pub v0: f64,
    pub b0: f64,
    pub axis: Axis,
    pub reference: ReferenceKind,
    pub fit: Scaling,
    pub law_disagrees: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub eps: f64,
    pub d_max: f64,
}

pub fn error_scaling_gate(
    cfg: &RunConfig,
    gate: &str,
    axis: Axis,
    point: Option<(f64, f64)>,
    reference: ReferenceKind,
) -> Run {
    let (model, settings) = model_and_settings(cfg)?;
    let r = single_recipe(gate)?;
    let (v0, b0) = point.unwrap_or(r.nominal_point);
    let reference_matrix = match reference {
        ReferenceKind::Nominal => ScalingReference::Nominal,
        ReferenceKind::Target => ScalingReference::Target(target_unitary(r.target).matrix),
    };
    let fit = error_scaling(
        &model,
        v0,
        b0,
        &reference_matrix,
        axis,
        &cfg.eps_list(),
        r.scaling_law,
        &settings,
    )?;
    let report = ScalingReport {
        config: cfg.clone(),
        gate: r.name.clone(),
        v0,
        b0,
        axis,
        reference,
        law_disagrees: fit.law_disagrees(),
        fit,
    };
    let dir = out_dir(cfg)?;
    let axis_name = match axis {
        Axis::V => "v",
        Axis::B => "b",
    };
    let stem = format!("error-scaling-{}-{axis_name}", r.name);
    let json = dir.join(format!("{stem}.json"));
    write_json(&json, &report)?;
    let mut files = vec![json];
    if cfg.format == Format::Csv {
        let points: Vec<ScalingPoint> = report
            .fit
            .eps
            .iter()
            .zip(&report.fit.d_max)
            .map(|(&eps, &d_max)| ScalingPoint { eps, d_max })
            .collect();
        let csv = dir.join(format!("{stem}.csv"));
        write_csv(&csv, &points)?;
        files.push(csv);
    }
    let f = &report.fit;
    let c = &f.coefficients;
    let mut summary = format!(
        "{} along {axis_name} at (v, b) = ({v0}, {b0}): d_max ~ {:.3e} eps^{:.4} (R^2 {:.6}, {} points, {} excluded)\ncoefficients: c_p = {:.4e}, c_0 = {:.4e}, c_1 = {:.4e} (step-halving change {:.1}%)",
        r.name,
        f.prefactor,
        f.slope,
        f.r_squared,
        f.eps.len(),
        f.excluded_eps.len(),
        c.c_p,
        c.c_0,
        c.c_1,
        c.step_halving_change * 100.0
    );
    if let Some(p) = f.predicted_prefactor {
        summary += &format!("\nclosed-form law prefactor {p:.3e} (ratio {:.2})", p / f.prefactor);
        if report.law_disagrees {
            summary += "; disagrees with the fit by more than 3x";
        }
    }
    Ok(Outcome {
        summary,
        files,
        passed: true,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticityOutput {
    pub config: RunConfig,
    pub v: f64,
    pub b: f64,
    pub report: Adiabaticity,
    pub is_adiabatic: bool,
    pub massey_threshold: f64,
}

pub fn adiabaticity_at(cfg: &RunConfig, v: f64, b: f64) -> Run {
    let (model, _) = model_and_settings(cfg)?;
    let report = adiabaticity(&model, &Passage::new(v, b)?)?;
    let out = AdiabaticityOutput {
        config: cfg.clone(),
        v,
        b,
        is_adiabatic: report.is_adiabatic(),
        massey_threshold: MASSEY_ADIABATIC_THRESHOLD,
        report,
    };
    let dir = out_dir(cfg)?;
    let path = match cfg.format {
        Format::Json => {
            let p = dir.join("adiabaticity.json");
            write_json(&p, &out)?;
            p
        }
        Format::Csv => {
            #[derive(Serialize)]
            struct Flat {
                v: f64,
                b: f64,
                delta_e_min: f64,
                d_max: f64,
                epsilon_ratio: f64,
                massey_xi: f64,
                interaction_length_a: f64,
                is_adiabatic: bool,
            }
            let p = dir.join("adiabaticity.csv");
            write_csv(
                &p,
                &[Flat {
                    v,
                    b,
                    delta_e_min: report.delta_e_min,
                    d_max: report.d_max,
                    epsilon_ratio: report.epsilon_ratio,
                    massey_xi: report.massey_xi,
                    interaction_length_a: report.interaction_length_a,
                    is_adiabatic: out.is_adiabatic,
                }],
            )?;
            p
        }
    };
    let summary = format!(
        "dE_min = {:.10}, D_max = {:.6e}, D_max/dE_min^2 = {:.4}, a = {:.5}, xi = {:.4} -> {}",
        report.delta_e_min,
        report.d_max,
        report.epsilon_ratio,
        report.interaction_length_a,
        report.massey_xi,
        if out.is_adiabatic { "adiabatic" } else { "non-adiabatic" }
    );
    Ok(Outcome {
        summary,
        files: vec![path],
        passed: true,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub gate: String,
    pub v: f64,
    pub b: f64,
    pub d_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub target: GateName,
    pub error: GateErrorReport<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeReport {
    pub config: RunConfig,
    /// First listed acts first.
    pub components: Vec<Component>,
    pub product: Matrix,
    pub comparisons: Vec<Comparison>,
    pub expect: Option<GateName>,
    pub threshold: f64,
    pub passed: bool,
}

/// Multiplies passages. With `expect`, the run passes when the product's
/// phase-invariant infidelity against it is within the threshold.
pub fn compose_gates(cfg: &RunConfig, gates: &[String], expect: Option<GateName>, nominal: bool) -> Run {
    let (model, settings) = model_and_settings(cfg)?;
    if gates.is_empty() {
        return Err(Failure::Usage(anyhow::anyhow!("compose needs at least one gate")));
    }
    let mut components = Vec::new();
    let mut matrices = Vec::new();
    for g in gates {
        let r = single_recipe(g)?;
        if !matches!(r.kind, RecipeKind::Single) {
            return Err(Failure::Usage(anyhow::anyhow!("{g} is not a single-qubit passage")));
        }
        let (v, b) = if nominal {
            r.nominal_point
        } else {
            let s = synthesize(&model, &target_unitary(r.target), &window_for(cfg, &r), &settings)?;
            (s.v_opt, s.b_opt)
        };
        let u = full_evolution_operator(&model, &Passage::new(v, b)?, &settings)?.unitary;
        components.push(Component {
            gate: r.name.clone(),
            v,
            b,
            d_max: gate_error(&u, &target_unitary(r.target).matrix)?.d_max,
        });
        matrices.push(u);
    }
    let product = compose(&matrices)?;
    let comparisons = GateName::ALL
        .into_iter()
        .map(|t| {
            Ok(Comparison {
                target: t,
                error: gate_error(&product, &target_unitary(t).matrix)?,
            })
        })
        .collect::<Result<Vec<_>, diabatic::Error>>()?;
    let passed = expect.map_or(true, |t| {
        comparisons
            .iter()
            .find(|c| c.target == t)
            .map_or(false, |c| c.error.phase_invariant_infidelity <= cfg.threshold)
    });
    let report = CompositeReport {
        config: cfg.clone(),
        components,
        product,
        comparisons,
        expect,
        threshold: cfg.threshold,
        passed,
    };
    let stem = format!("compose-{}", gates.join("-"));
    let path = out_dir(cfg)?.join(format!("{stem}.json"));
    write_json(&path, &report)?;
    let mut summary = report
        .components
        .iter()
        .map(|c| format!("{} at (v, b) = ({:.6}, {:.6}), d_max {:.2e}", c.gate, c.v, c.b, c.d_max))
        .collect::<Vec<_>>()
        .join("\n");
    let mut ranked: Vec<&Comparison> = report.comparisons.iter().collect();
    ranked.sort_by(|a, b| {
        a.error
            .phase_invariant_infidelity
            .partial_cmp(&b.error.phase_invariant_infidelity)
            .unwrap()
    });
    for c in ranked.iter().take(3) {
        summary += &format!(
            "\nvs {:<3} phase-invariant infidelity {:.3e}, d_max {:.3e}",
            c.target.label(),
            c.error.phase_invariant_infidelity,
            c.error.d_max
        );
    }
    if let Some(t) = expect {
        summary += &format!("\n{} for {t} at threshold {:.1e}", if passed { "PASS" } else { "MISS" }, cfg.threshold);
    }
    Ok(Outcome {
        summary,
        files: vec![path],
        passed,
    })
}
