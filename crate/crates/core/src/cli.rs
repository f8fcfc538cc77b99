//! Command-line front end. The binary only parses arguments and forwards to
//! [`run_cli`], so everything here is usable (and tested) as a library.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::channel::MagnitudeBounds;
use crate::demand::{compute_grouping, DemandSpec};
use crate::error::{Error, ErrorClass, Result};
use crate::plan::{multi_plan_for_point, plan_for_point, ConstraintMode, DEFAULT_TAU_CAP};
use crate::rational::DofPoint;
use crate::region::{expand_region, max_sum_dof};
use crate::verify::{
    run_verification, AntennaMode, VerificationReport, VerifyOptions, DEFAULT_SEED,
};
use crate::vertex::enumerate_vertices;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Region,
    Vertices,
    Maxsum,
    Primes,
    Check,
    Plan,
    Verify,
}

impl Command {
    pub fn needs_point(self) -> bool {
        matches!(self, Command::Check | Command::Plan | Command::Verify)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Human,
    Machine,
}

#[derive(Clone, Debug, Parser)]
#[command(
    name = "dofregion",
    version,
    about = "DoF regions and alignment plans for general message demands"
)]
pub struct CliInvocation {
    pub command: Command,
    /// JSON demand spec: {"K": .., "M": .., "demands": [[..], ..]}
    pub spec_path: PathBuf,
    /// Comma-separated rationals, e.g. 1/3,1/3,1/3,1/3
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub l: u32,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Alignment constraints from prime receivers only (default)
    #[arg(long, overrides_with = "full")]
    pub grouped: bool,
    /// Alignment constraints from every receiver
    #[arg(long, overrides_with = "grouped")]
    pub full: bool,
    /// Force the multi-antenna scheme (needs M > 1)
    #[arg(long, overrides_with = "single")]
    pub multi: bool,
    /// Force the single-antenna scheme (needs M = 1)
    #[arg(long, overrides_with = "multi")]
    pub single: bool,
    /// Rank tolerance on smallest singular values
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    #[arg(long, default_value_t = DEFAULT_TAU_CAP)]
    pub tau_cap: u128,
    /// Channel and base-vector magnitude range, as lo,hi
    #[arg(long, default_value = "0.5,2")]
    pub bounds: String,
    #[arg(long, value_enum, default_value_t = OutputFormat::Human)]
    pub format: OutputFormat,
}

impl CliInvocation {
    /// Invocation with every flag at its default.
    pub fn new(command: Command, spec_path: impl Into<PathBuf>) -> Self {
        CliInvocation {
            command,
            spec_path: spec_path.into(),
            point: None,
            l: 1,
            seed: DEFAULT_SEED,
            grouped: false,
            full: false,
            multi: false,
            single: false,
            tolerance: 1e-6,
            tau_cap: DEFAULT_TAU_CAP,
            bounds: "0.5,2".into(),
            format: OutputFormat::Human,
        }
    }

    pub fn mode(&self) -> ConstraintMode {
        ConstraintMode::grouped(!self.full)
    }

    pub fn antenna_mode(&self) -> Option<AntennaMode> {
        match (self.multi, self.single) {
            (true, _) => Some(AntennaMode::Multi),
            (_, true) => Some(AntennaMode::Single),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.command.needs_point() != self.point.is_some() {
            let msg = if self.point.is_some() {
                format!("--point is not used by {:?}", self.command)
            } else {
                format!("{:?} needs --point", self.command)
            };
            return Err(Error::InvalidParameter(msg.to_lowercase()));
        }
        if self.l < 1 {
            return Err(Error::InvalidParameter("--l must be at least 1".into()));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidParameter(
                "--tolerance must be positive".into(),
            ));
        }
        self.parsed_bounds()?;
        Ok(())
    }

    fn parsed_bounds(&self) -> Result<MagnitudeBounds> {
        let parts: Vec<&str> = self.bounds.split(',').map(str::trim).collect();
        let parse = |t: &str| {
            t.parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("--bounds: cannot parse {t:?}")))
        };
        match parts.as_slice() {
            [lo, hi] => MagnitudeBounds::new(parse(lo)?, parse(hi)?),
            _ => Err(Error::InvalidParameter("--bounds takes lo,hi".into())),
        }
    }

    fn parsed_point(&self, spec: &DemandSpec) -> Result<DofPoint> {
        let point = DofPoint::parse(self.point.as_deref().unwrap_or_default())?;
        if point.dim() != spec.k() {
            return Err(Error::DimensionMismatch {
                expected: spec.k(),
                found: point.dim(),
            });
        }
        Ok(point)
    }
}

/// Exit status plus the text to print on stdout.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliOutcome {
    pub exit_code: i32,
    pub output: String,
}

pub fn run_cli(invocation: &CliInvocation) -> CliOutcome {
    match execute(invocation) {
        Ok((exit_code, output)) => CliOutcome { exit_code, output },
        Err(err) => CliOutcome {
            exit_code: err.class().exit_code(),
            output: render_error(&err, invocation.format),
        },
    }
}

fn class_name(class: ErrorClass) -> &'static str {
    match class {
        ErrorClass::Validation => "validation",
        ErrorClass::OutOfRegion => "out-of-region",
        ErrorClass::CapExceeded => "cap-exceeded",
        ErrorClass::Verification => "verification",
        ErrorClass::Io => "io",
    }
}

fn render_error(err: &Error, format: OutputFormat) -> String {
    match format {
        OutputFormat::Human => format!("error ({}): {err}\n", class_name(err.class())),
        OutputFormat::Machine => {
            let doc = json!({ "error": { "class": class_name(err.class()), "message": err.to_string() } });
            format!("{}\n", serde_json::to_string_pretty(&doc).expect("json"))
        }
    }
}

fn machine<T: Serialize>(value: &T) -> String {
    format!("{}\n", serde_json::to_string_pretty(value).expect("json"))
}

fn load_spec(path: &PathBuf) -> Result<DemandSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    DemandSpec::parse(&text)
}

fn set(s: &std::collections::BTreeSet<usize>) -> String {
    let items: Vec<String> = s.iter().map(usize::to_string).collect();
    format!("{{{}}}", items.join(","))
}

fn status(passed: bool) -> i32 {
    if passed {
        0
    } else {
        ErrorClass::Verification.exit_code()
    }
}

fn execute(inv: &CliInvocation) -> Result<(i32, String)> {
    inv.validate()?;
    let spec = load_spec(&inv.spec_path)?;
    let human = inv.format == OutputFormat::Human;
    let mut out = String::new();
    match inv.command {
        Command::Region => {
            let region = expand_region(&spec);
            if !human {
                return Ok((0, machine(&region)));
            }
            for ineq in &region.inequalities {
                let terms: Vec<String> = ineq.support.iter().map(|i| format!("d{i}")).collect();
                let from: Vec<String> = ineq
                    .provenance
                    .iter()
                    .map(|p| match p.excluded {
                        Some(i) => format!("rx{}+d{i}", p.receiver),
                        None => format!("rx{}", p.receiver),
                    })
                    .collect();
                writeln!(
                    out,
                    "{} <= {}    [{}]",
                    terms.join(" + "),
                    ineq.bound,
                    from.join(", ")
                )
                .unwrap();
            }
        }
        Command::Vertices => {
            let vertices = enumerate_vertices(&expand_region(&spec))?;
            if !human {
                return Ok((0, machine(&vertices)));
            }
            for v in &vertices.vertices {
                writeln!(out, "{v}").unwrap();
            }
            writeln!(
                out,
                "{} vertices, {} bases solved",
                vertices.len(),
                vertices.bases_solved
            )
            .unwrap();
        }
        Command::Maxsum => {
            let best = max_sum_dof(&expand_region(&spec));
            if !human {
                return Ok((0, machine(&best)));
            }
            writeln!(out, "max sum-DoF {} at {}", best.total, best.argmax).unwrap();
        }
        Command::Primes => {
            let grouping = compute_grouping(&spec);
            if !human {
                return Ok((0, machine(&grouping)));
            }
            let primes: Vec<String> = grouping.primes.iter().map(usize::to_string).collect();
            writeln!(out, "primes: {}", primes.join(", ")).unwrap();
            for (g, maximal) in grouping.maximal_sets.iter().enumerate() {
                let members: Vec<String> = (1..=spec.j())
                    .filter(|&j| grouping.group_of(j) == g + 1)
                    .map(|j| j.to_string())
                    .collect();
                writeln!(
                    out,
                    "group {}: {} <- receivers {}",
                    g + 1,
                    set(maximal),
                    members.join(", ")
                )
                .unwrap();
            }
        }
        Command::Check => {
            let point = inv.parsed_point(&spec)?;
            let membership = expand_region(&spec).contains(&point)?;
            let inside = membership.inside;
            if !human {
                out = machine(&membership);
            } else {
                writeln!(out, "{}", if inside { "inside" } else { "outside" }).unwrap();
                let tight: Vec<String> = membership.tight.iter().map(set).collect();
                let violated: Vec<String> = membership.violated.iter().map(set).collect();
                writeln!(out, "tight: {}", tight.join(" ")).unwrap();
                if !inside {
                    writeln!(out, "violated: {}", violated.join(" ")).unwrap();
                }
            }
            if !inside {
                return Ok((ErrorClass::OutOfRegion.exit_code(), out));
            }
        }
        Command::Plan => {
            let point = inv.parsed_point(&spec)?;
            let multi = match inv.antenna_mode() {
                Some(AntennaMode::Multi) => true,
                Some(AntennaMode::Single) => false,
                None => spec.m() > 1,
            };
            let summary = if multi {
                multi_plan_for_point(&spec, &point, inv.l, inv.mode(), inv.tau_cap)?.summary()
            } else {
                if spec.m() > 1 {
                    return Err(Error::InvalidParameter(format!(
                        "single-antenna scheme requested but the spec has M = {}",
                        spec.m()
                    )));
                }
                plan_for_point(&spec, &point, inv.l, inv.mode(), inv.tau_cap)?.summary()
            };
            if !human {
                return Ok((status(summary.symbolic_pass), machine(&summary)));
            }
            writeln!(out, "{} plan, l = {}", summary.mode, summary.l).unwrap();
            writeln!(
                out,
                "kappa = {}, tau = {}, Gamma = {}",
                summary.kappa, summary.tau, summary.gamma
            )
            .unwrap();
            writeln!(out, "Gamma_k = {:?}", summary.gamma_k).unwrap();
            writeln!(out, "columns = {:?}", summary.column_counts).unwrap();
            let fr: Vec<String> = summary
                .dof_fractions
                .iter()
                .map(|f| f.to_string())
                .collect();
            writeln!(out, "dof fractions = {}", fr.join(", ")).unwrap();
            writeln!(
                out,
                "symbolic check: {}",
                if summary.symbolic_pass {
                    "pass"
                } else {
                    "FAIL"
                }
            )
            .unwrap();
            return Ok((status(summary.symbolic_pass), out));
        }
        Command::Verify => {
            let point = inv.parsed_point(&spec)?;
            let options = VerifyOptions {
                l: inv.l,
                seed: inv.seed,
                mode: inv.mode(),
                antenna_mode: inv.antenna_mode(),
                rank_tolerance: inv.tolerance,
                tau_cap: inv.tau_cap,
                bounds: inv.parsed_bounds()?,
                ..VerifyOptions::default()
            };
            let report = run_verification(&spec, &point, &options)?;
            let text = if human {
                human_report(&report)
            } else {
                machine(&report)
            };
            return Ok((status(report.passed()), text));
        }
    }
    Ok((0, out))
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.3e}"))
}

fn human_report(r: &VerificationReport) -> String {
    let mut out = String::new();
    let v = &r.verdict;
    writeln!(
        out,
        "{:?} antenna, l = {}, seed = {}, grouped = {}",
        r.mode, r.l, r.seed, r.grouped
    )
    .unwrap();
    writeln!(out, "symbolic      {}", mark(v.symbolic)).unwrap();
    writeln!(
        out,
        "alignment     {}  max residual {:.3e}",
        mark(v.alignment),
        r.max_alignment_residual()
    )
    .unwrap();
    writeln!(
        out,
        "tx rank       {}  min margin {}",
        mark(v.tx_rank),
        opt(r.min_tx_margin())
    )
    .unwrap();
    writeln!(
        out,
        "rx separation {}  min margin {}",
        mark(v.rx_separation),
        opt(r.min_rx_margin())
    )
    .unwrap();
    for rx in r
        .rx_rank_margins
        .iter()
        .filter(|m| m.precondition.is_some())
    {
        writeln!(
            out,
            "  receiver {}: {}",
            rx.receiver,
            rx.precondition.as_deref().unwrap_or("")
        )
        .unwrap();
    }
    if !r.diag_residuals.is_empty() {
        writeln!(
            out,
            "diagonality   {}  max off-diagonal {:.3e}",
            mark(v.diagonality),
            r.max_diag_residual()
        )
        .unwrap();
    }
    let fr: Vec<String> = r.dof_fractions.iter().map(|f| f.to_string()).collect();
    writeln!(out, "dof fractions {}", fr.join(", ")).unwrap();
    writeln!(out, "overall       {}", mark(v.overall)).unwrap();
    out
}
