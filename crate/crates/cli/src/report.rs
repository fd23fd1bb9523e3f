//! Report types and their json, csv and table renderings.

use std::fmt::Write as _;

use duality_core::bell::BellError;
use duality_core::channel::{ChannelSummary, ReversalSummary};
use duality_core::duality::{BoundaryPair, DualityReport};
use duality_core::network::Violation;
use serde::Serialize;

/// One probability with the backend and mode that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub backend: &'static str,
    pub mode: &'static str,
    pub input: Vec<String>,
    pub output: Vec<String>,
    pub value: f64,
}

/// Largest differences between the two backends.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Agreement {
    /// State-vector conditionals against path-sum conditionals in the
    /// selected mode.
    pub conditional_max_delta: f64,
    /// Born probabilities against physical-mode path sums.
    pub physical_joint_max_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapRow {
    pub first: BoundaryPair,
    pub second: BoundaryPair,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualitySection {
    pub first: String,
    pub second: String,
    pub transform: &'static str,
    pub pivot: Option<String>,
    /// Whether the transformed first experiment has the shape of the second.
    pub constructed_isomorphic: bool,
    pub boundary_map: Vec<MapRow>,
    pub report: DualityReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRow {
    pub alpha: f64,
    pub beta: f64,
    pub e: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChshValue {
    /// `(a, a', b, b')`.
    pub settings: [f64; 4],
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BellSection {
    pub preset: String,
    pub resolution: usize,
    pub s_max: f64,
    pub best: ChshValue,
    pub canonical: ChshValue,
    pub grid: Vec<GridRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonMaximal {
    pub coefficients: Vec<f64>,
    pub w_deviation: f64,
    pub unitary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WhichWaySection {
    pub left_modes: Vec<String>,
    pub right_modes: Vec<String>,
    /// Real parts of `√2·W`, row major.
    pub scaled_w: Vec<Vec<f64>>,
    pub max_imaginary: f64,
    pub permutation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelSection {
    pub dims: Vec<usize>,
    pub trials: usize,
    pub equivalence: ChannelSummary,
    pub reversal: ReversalSummary,
    pub non_maximal: NonMaximal,
    pub which_way: WhichWaySection,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Meta {
    pub seed: Option<u64>,
    pub version: &'static str,
    pub timing_ms: Option<f64>,
}

impl Default for Meta {
    fn default() -> Self {
        Meta { seed: None, version: env!("CARGO_PKG_VERSION"), timing_ms: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub experiment: String,
    pub mode: &'static str,
    pub joint: Vec<TableRow>,
    pub conditional: Vec<TableRow>,
    pub agreement: Option<Agreement>,
    pub duality: Option<DualitySection>,
    pub bell: Option<BellSection>,
    pub channel: Option<ChannelSection>,
    pub meta: Meta,
}

impl RunReport {
    pub fn new(experiment: impl Into<String>, mode: &'static str) -> Self {
        RunReport {
            experiment: experiment.into(),
            mode,
            joint: Vec::new(),
            conditional: Vec::new(),
            agreement: None,
            duality: None,
            bell: None,
            channel: None,
            meta: Meta::default(),
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
            Format::Table => self.to_table(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    /// Tables only: probabilities, duality outcomes, the correlator grid
    /// or the per-dimension channel summary, whichever the report holds.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if let Some(d) = &self.duality {
            out.push_str("first_input,first_output,second_input,second_output,terms_first,terms_second,probability_first,probability_second,discrepancy,matched\n");
            for o in &d.report.outcomes {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{}",
                    o.first.input.join(" "),
                    o.first.output.join(" "),
                    o.second.input.join(" "),
                    o.second.output.join(" "),
                    o.terms_first.len(),
                    o.terms_second.len(),
                    o.probability_first,
                    o.probability_second,
                    o.discrepancy.map_or(String::new(), |x| x.to_string()),
                    o.matched
                );
            }
        } else if let Some(b) = &self.bell {
            out.push_str("alpha,beta,e\n");
            for g in &b.grid {
                let _ = writeln!(out, "{},{},{}", g.alpha, g.beta, g.e);
            }
        } else if let Some(c) = &self.channel {
            out.push_str("d,trials,max_delta,max_w_deviation,pass\n");
            for s in &c.equivalence.dimensions {
                let _ = writeln!(out, "{},{},{},{},{}", s.d, s.trials, s.max_delta, s.max_w_deviation, s.pass);
            }
        } else {
            out.push_str("backend,mode,input,output,joint,conditional\n");
            for (j, c) in self.joint.iter().zip(&self.conditional) {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    j.backend,
                    j.mode,
                    j.input.join(" "),
                    j.output.join(" "),
                    j.value,
                    c.value
                );
            }
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "experiment {}  mode {}", self.experiment, self.mode);
        if !self.joint.is_empty() {
            let _ = writeln!(
                out,
                "{:<8} {:<9} {:<10} {:<10} {:>14} {:>14}",
                "backend", "mode", "input", "output", "joint", "conditional"
            );
            for (j, c) in self.joint.iter().zip(&self.conditional) {
                let _ = writeln!(
                    out,
                    "{:<8} {:<9} {:<10} {:<10} {:>14.10} {:>14.10}",
                    j.backend,
                    j.mode,
                    j.input.join(","),
                    j.output.join(","),
                    j.value,
                    c.value
                );
            }
        }
        if let Some(a) = &self.agreement {
            let _ = writeln!(
                out,
                "agreement: conditional {:.3e}, physical joint {:.3e}",
                a.conditional_max_delta, a.physical_joint_max_delta
            );
        }
        if let Some(d) = &self.duality {
            let _ =
                writeln!(out, "{} {} -> {}  isomorphic {}", d.transform, d.first, d.second, d.constructed_isomorphic);
            for o in &d.report.outcomes {
                let disc = o.discrepancy.map_or("count".to_string(), |x| format!("{x:.3e}"));
                let _ = writeln!(
                    out,
                    "{:<16} {:<16} {:>3} terms  {:>10}  {}",
                    o.first.to_string(),
                    o.second.to_string(),
                    o.terms_first.len(),
                    disc,
                    if o.matched { "ok" } else { "MISMATCH" }
                );
            }
            let _ = writeln!(out, "verdict: {}", if d.report.matched { "matched" } else { "unmatched" });
        }
        if let Some(b) = &self.bell {
            let [a, a2, bb, b2] = b.best.settings;
            let _ = writeln!(
                out,
                "resolution {}  S_max {:.6}  at a={a:.4} a'={a2:.4} b={bb:.4} b'={b2:.4}",
                b.resolution, b.s_max
            );
            let _ = writeln!(out, "canonical S {:.12}", b.canonical.s);
        }
        if let Some(c) = &self.channel {
            for s in &c.equivalence.dimensions {
                let _ = writeln!(
                    out,
                    "d={} trials={} max_delta={:.3e} max_w_dev={:.3e} {}",
                    s.d,
                    s.trials,
                    s.max_delta,
                    s.max_w_deviation,
                    pass(s.pass)
                );
            }
            let r = &c.reversal;
            let _ =
                writeln!(out, "reversal: {} sequences max_dev={:.3e} {}", r.sequences, r.max_deviation, pass(r.pass));
            let _ = writeln!(
                out,
                "non-maximal: deviation {:.4} unitary {}",
                c.non_maximal.w_deviation, c.non_maximal.unitary
            );
            let _ = writeln!(out, "which-way: permutation {}", c.which_way.permutation);
        }
        out
    }
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
    Table,
}

/// Outcome of `validate`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationOutput {
    pub experiment: String,
    pub valid: bool,
    pub violations: Vec<Violation>,
    pub messages: Vec<String>,
}

pub(crate) fn bell_error_is_usage(e: &BellError) -> bool {
    matches!(e, BellError::Resolution(_) | BellError::Network(duality_core::network::NetworkError::UnknownPreset(_)))
}
