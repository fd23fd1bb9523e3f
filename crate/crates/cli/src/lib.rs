//! Command implementations behind the `duality` binary. Every command
//! returns a [`RunReport`]; the binary only parses flags and prints.

mod report;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::path::Path;

use duality_core::bell::{chsh, scan_max, BellError, NetworkModel};
use duality_core::channel::{
    build_w, check_w, is_permutation, reversal_op, reversal_trials, run_trials, schmidt, which_way_state, ChannelError,
};
use duality_core::duality::{pivot_reverse, time_reverse, verify_term_identity, BoundaryMap, DualityError};
use duality_core::linalg::{c, CMatrix};
use duality_core::network::{is_isomorphic, presets, validate, NetworkError};
use duality_core::path_sum::{conditional, full_table, JointTable, PathSumError};
use duality_core::state::{StateBackend, StateError};
use duality_core::{build_network, ExperimentDoc, OpticalNetwork, PhaseMode};
use thiserror::Error;

pub use report::*;

/// Supported channel dimensions.
pub const CHANNEL_DIMS: std::ops::RangeInclusive<usize> = 2..=8;
/// Reversal-identity sequences are drawn with at most this dimension and
/// this many steps.
pub const REVERSAL_MAX: usize = 6;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    PathSum(#[from] PathSumError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Duality(#[from] DualityError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Bell(#[from] BellError),
    #[error("{0}")]
    Invalid(String),
}

impl CliError {
    /// 2 for usage errors, 3 for experiment validation and structural
    /// failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Read { .. } => 2,
            CliError::Network(NetworkError::UnknownPreset(_)) => 2,
            CliError::Bell(e) if bell_error_is_usage(e) => 2,
            _ => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Backend {
    Path,
    State,
    #[default]
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Mode {
    #[default]
    Relative,
    Physical,
}

impl From<Mode> for PhaseMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Relative => PhaseMode::Relative,
            Mode::Physical => PhaseMode::Physical,
        }
    }
}

fn is_preset(name: &str) -> bool {
    presets::NAMES.contains(&name.to_ascii_lowercase().as_str())
}

fn read_doc(path: &str) -> Result<ExperimentDoc, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_string(), source })?;
    Ok(ExperimentDoc::from_json(&text).map_err(NetworkError::from)?)
}

/// A preset name or a path to an experiment file, with `E` set to `alpha`
/// and `F` to `beta` where given and present. Returns the experiment id.
pub fn load(name: &str, alpha: Option<f64>, beta: Option<f64>) -> Result<(String, OpticalNetwork), CliError> {
    let (id, mut doc) = if is_preset(name) {
        let id = name.to_ascii_lowercase();
        let doc = presets::doc(&id)?;
        (id, doc)
    } else if Path::new(name).exists() {
        (name.to_string(), read_doc(name)?)
    } else {
        return Err(CliError::Usage(format!("{name} is neither a preset ({}) nor a file", presets::NAMES.join(", "))));
    };
    for (setting, value) in [("E", alpha), ("F", beta)] {
        if let Some(v) = value {
            if !v.is_finite() {
                return Err(NetworkError::NonFinitePhase(setting.to_string()).into());
            }
            // absent settings are ignored, so --beta is harmless on a1
            match doc.elements.iter().find(|e| e.id == setting) {
                Some(e) if e.phase_param.is_none() => {
                    return Err(NetworkError::NotPhaseElement(setting.to_string()).into());
                }
                Some(_) => {
                    doc.set_phase(setting, v);
                }
                None => {}
            }
        }
    }
    Ok((id, build_network(&doc)?))
}

fn rows(
    table: &JointTable,
    backend: &'static str,
    mode: &'static str,
) -> Result<(Vec<TableRow>, Vec<TableRow>), CliError> {
    let mut joint = Vec::with_capacity(table.entries.len());
    let mut cond = Vec::with_capacity(table.entries.len());
    for e in &table.entries {
        let given: Vec<&str> = e.input.iter().map(String::as_str).collect();
        let outcome: Vec<&str> = e.output.iter().map(String::as_str).collect();
        let row = |value| TableRow { backend, mode, input: e.input.clone(), output: e.output.clone(), value };
        joint.push(row(e.value));
        cond.push(row(conditional(table, &given, &outcome)?));
    }
    Ok((joint, cond))
}

fn max_delta(a: &[TableRow], b: &[TableRow]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x.value - y.value).abs()).fold(0.0, f64::max)
}

pub struct RunOptions<'a> {
    pub experiment: &'a str,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub backend: Backend,
    pub mode: Mode,
}

/// Joint and conditional tables over every single-source input and its
/// reachable outcomes.
pub fn run_experiment(opts: &RunOptions) -> Result<RunReport, CliError> {
    let (id, net) = load(opts.experiment, opts.alpha, opts.beta)?;
    let mode = PhaseMode::from(opts.mode);
    let mut report = RunReport::new(id, mode.name());
    let mut path_rows = None;
    if opts.backend != Backend::State {
        let (j, c) = rows(&full_table(&net, mode)?, "path", mode.name())?;
        report.joint.extend(j.iter().cloned());
        report.conditional.extend(c.iter().cloned());
        path_rows = Some((j, c));
    }
    if opts.backend != Backend::Path {
        let table = StateBackend::new(&net)?.full_table()?;
        let (j, c) = rows(&table, "state", PhaseMode::Physical.name())?;
        if let Some((_, path_c)) = &path_rows {
            let physical = match mode {
                PhaseMode::Physical => path_rows.as_ref().map(|(pj, _)| pj.clone()).unwrap_or_default(),
                PhaseMode::Relative => rows(&full_table(&net, PhaseMode::Physical)?, "path", "physical")?.0,
            };
            report.agreement = Some(Agreement {
                conditional_max_delta: max_delta(&c, path_c),
                physical_joint_max_delta: max_delta(&j, &physical),
            });
        }
        report.joint.extend(j);
        report.conditional.extend(c);
    }
    Ok(report)
}

/// Which experiments `verify` compares.
#[derive(Debug, Clone, PartialEq)]
pub enum DualityPair {
    A1A2,
    B1B2,
    Files { first: String, second: String, pivot: Option<String> },
}

impl DualityPair {
    pub fn parse(first: &str, second: Option<&str>, pivot: Option<&str>) -> Result<Self, CliError> {
        match (first.to_ascii_lowercase().as_str(), second) {
            ("a1a2", None) => Ok(DualityPair::A1A2),
            ("b1b2", None) => Ok(DualityPair::B1B2),
            (_, Some(second)) => Ok(DualityPair::Files {
                first: first.to_string(),
                second: second.to_string(),
                pivot: pivot.map(str::to_string),
            }),
            _ => Err(CliError::Usage(format!("{first}: expected a1a2, b1b2 or two experiment files"))),
        }
    }
}

pub fn verify_duality(
    pair: &DualityPair,
    alpha: Option<f64>,
    beta: Option<f64>,
    mode: Mode,
) -> Result<RunReport, CliError> {
    let (first, second, pivot) = match pair {
        DualityPair::A1A2 => ("a1", "a2", None),
        DualityPair::B1B2 => ("b1", "b2", Some("Z")),
        DualityPair::Files { first, second, pivot } => (first.as_str(), second.as_str(), pivot.as_deref()),
    };
    let (first_id, net1) = load(first, alpha, beta)?;
    let (second_id, net2) = load(second, alpha, beta)?;
    let (constructed, map): (OpticalNetwork, BoundaryMap) = match pivot {
        Some(p) => pivot_reverse(&net1, p)?,
        None => time_reverse(&net1)?,
    };
    let phase_mode = PhaseMode::from(mode);
    let report = verify_term_identity(&net1, &net2, &map, phase_mode)?;
    let name = match pair {
        DualityPair::A1A2 => "a1a2".to_string(),
        DualityPair::B1B2 => "b1b2".to_string(),
        DualityPair::Files { .. } => format!("{first_id}|{second_id}"),
    };
    let mut out = RunReport::new(name, phase_mode.name());
    out.duality = Some(DualitySection {
        first: first_id,
        second: second_id,
        transform: if pivot.is_some() { "pivot_reverse" } else { "time_reverse" },
        pivot: pivot.map(str::to_string),
        constructed_isomorphic: is_isomorphic(&constructed, &net2),
        boundary_map: map.pairs().iter().map(|(a, b)| MapRow { first: a.clone(), second: b.clone() }).collect(),
        report,
    });
    Ok(out)
}

pub fn verify_channel(dims: &[usize], trials: usize, seed: u64) -> Result<RunReport, CliError> {
    if dims.is_empty() {
        return Err(CliError::Usage("--dims needs at least one dimension".into()));
    }
    if let Some(d) = dims.iter().find(|d| !CHANNEL_DIMS.contains(d)) {
        return Err(CliError::Usage(format!(
            "dimension {d} is outside {}..={}",
            CHANNEL_DIMS.start(),
            CHANNEL_DIMS.end()
        )));
    }
    if trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let equivalence = run_trials(dims, trials, seed)?;
    let reversal = reversal_trials(trials, REVERSAL_MAX, REVERSAL_MAX, seed)?;

    let theta2 = reversal_op(2, None)?;
    let skewed = CMatrix::from_row_slice(2, 2, &[c(0.8, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.6, 0.0)]);
    let sf = schmidt(&skewed)?;
    let check = check_w(&sf, &build_w(&sf, &theta2)?);
    let non_maximal =
        NonMaximal { coefficients: sf.coefficients.clone(), w_deviation: check.deviation, unitary: check.unitary };

    let ww = which_way_state(&presets::b1(0.0, 0.0)?, "Z")?;
    let sf = schmidt(&ww.psi)?;
    let scaled = check_w(&sf, &build_w(&sf, &reversal_op(sf.dim(), None)?)?).scaled;
    let which_way = WhichWaySection {
        left_modes: ww.left_modes,
        right_modes: ww.right_modes,
        scaled_w: scaled.row_iter().map(|r| r.iter().map(|z| z.re).collect()).collect(),
        max_imaginary: scaled.iter().map(|z| z.im.abs()).fold(0.0, f64::max),
        permutation: is_permutation(&scaled, 1e-12),
    };

    let pass = equivalence.pass && reversal.pass && !non_maximal.unitary && which_way.permutation;
    let mut out = RunReport::new("channel", "none");
    out.meta.seed = Some(seed);
    out.channel =
        Some(ChannelSection { dims: dims.to_vec(), trials, equivalence, reversal, non_maximal, which_way, pass });
    Ok(out)
}

pub fn bell_scan(preset: &str, resolution: usize) -> Result<RunReport, CliError> {
    let model = NetworkModel::preset(preset)?;
    let scan = scan_max(&model, resolution)?;
    let canonical = [0.0, FRAC_PI_2, FRAC_PI_4, 3.0 * FRAC_PI_4];
    let s = chsh(&model, canonical[0], canonical[1], canonical[2], canonical[3])?;
    let grid = scan
        .grid
        .settings
        .iter()
        .zip(&scan.grid.values)
        .map(|(&(alpha, beta), &e)| GridRow { alpha, beta, e })
        .collect();
    let id = preset.to_ascii_lowercase();
    let mut out = RunReport::new(id.clone(), PhaseMode::Relative.name());
    out.bell = Some(BellSection {
        preset: id,
        resolution,
        s_max: scan.s_max,
        best: ChshValue { settings: scan.settings, s: scan.s },
        canonical: ChshValue { settings: canonical, s },
        grid,
    });
    Ok(out)
}

/// Validation findings for an experiment file or preset. Schema errors are
/// reported as messages with no structured violations.
pub fn validate_experiment(name: &str) -> Result<ValidationOutput, CliError> {
    let doc = if is_preset(name) {
        presets::doc(name)
    } else {
        let text = std::fs::read_to_string(name).map_err(|source| CliError::Read { path: name.to_string(), source })?;
        ExperimentDoc::from_json(&text).map_err(NetworkError::from)
    };
    let doc = match doc {
        Ok(d) => d,
        Err(e) => {
            return Ok(ValidationOutput {
                experiment: name.to_string(),
                valid: false,
                violations: Vec::new(),
                messages: vec![e.to_string()],
            })
        }
    };
    let report = validate(&doc);
    Ok(ValidationOutput {
        experiment: name.to_string(),
        valid: report.is_valid(),
        messages: report.violations.iter().map(ToString::to_string).collect(),
        violations: report.violations,
    })
}
