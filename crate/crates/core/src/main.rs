use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use gto_kit::channels::{
    apply_channel, displaced_gto, gto_dilation_apply, gto_to_channel, validate_channel,
    GaussianChannel, GtoSpec, SingleModeGto, CHANNEL_TOL,
};
use gto_kit::cooling::{greedy_adversary, run_protocol, sideband_swap, CoolingTrace, StepParams};
use gto_kit::exec::ExecMode;
use gto_kit::feasibility::{
    necessary_bounds, single_mode_feasible, squeezed_bath_feasible, BoundCheck, FeasibilityResult,
    TransformQuery, FEASIBILITY_TOL,
};
use gto_kit::matrix::{max_abs_diff, CMat, RMat, RVec};
use gto_kit::states::{validate_state, GaussianState};
use gto_kit::symplectic::{cosine_sine_decompose, williamson, STRUCTURAL_TOL};
use gto_kit::sweeps::{run_all, SuiteSizes};
use gto_kit::thermo::{
    cross_check, cutoff_for, geometric_probs, thermo_curve, DEFAULT_TAIL_TOL,
};
use gto_kit::GtoError;

const EXIT_OK: u8 = 0;
const EXIT_NEGATIVE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_INVARIANT: u8 = 3;

#[derive(Parser)]
#[command(name = "gto-kit", version, about = "Gaussian thermal operations toolkit")]
struct Cli {
    /// Read JSON input from this file instead of stdin.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Seed for randomised commands.
    #[arg(long, global = true, env = "GTO_KIT_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = FEASIBILITY_TOL)]
    tol_feasibility: f64,
    #[arg(long, global = true, default_value_t = CHANNEL_TOL)]
    tol_channel: f64,
    #[arg(long, global = true, default_value_t = STRUCTURAL_TOL)]
    tol_state: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a GaussianState, GaussianChannel or GTO spec.
    Validate,
    /// Decide a single-mode transformation query.
    Feasible,
    /// Apply a GTO or channel to a state.
    Apply {
        /// Also apply the spec by explicit dilation and report the deviation.
        #[arg(long)]
        oracle: bool,
    },
    /// Run a cooling protocol, the adversarial search or the sideband swap.
    Cool(CoolArgs),
    /// Export a thermo-majorization curve, or cross-check a target temperature.
    ThermoCurve(ThermoArgs),
    /// Williamson form of {"matrix": ...} or cosine-sine form of {"unitary": ...}.
    Decompose,
    /// Run the seeded property suites.
    Selftest {
        #[arg(long)]
        quick: bool,
        /// Run every suite on one thread.
        #[arg(long)]
        sequential: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct CoolArgs {
    /// Greedy adversarial search with this many rounds.
    #[arg(long, value_name = "N", conflicts_with = "sideband")]
    adversary: Option<usize>,
    /// Swap with a thermal ancilla at this frequency.
    #[arg(long, value_name = "OMEGA")]
    sideband: Option<f64>,
    #[arg(long, default_value_t = 5.0)]
    nu0: f64,
    #[arg(long, default_value_t = 2.0)]
    nu_b: f64,
    /// Inverse temperature for the sideband ancilla.
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Squeeze values per adversary round.
    #[arg(long, default_value_t = 16)]
    search_grid: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct ThermoArgs {
    #[arg(long)]
    beta_i: f64,
    /// Bath inverse temperature.
    #[arg(long)]
    beta: f64,
    /// Level spacing.
    #[arg(long, default_value_t = 1.0)]
    energy: f64,
    /// Fock cutoff; chosen from the tail tolerance when omitted.
    #[arg(long)]
    cutoff: Option<usize>,
    /// Target inverse temperature: print a cross-check record instead of a curve.
    #[arg(long)]
    beta_f: Option<f64>,
}

enum Failure {
    Input(String),
    Invariant(String),
}

impl From<GtoError> for Failure {
    fn from(e: GtoError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Input(format!("malformed JSON: {e}"))
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<u8, Failure>;

struct Io<'a> {
    input: Option<&'a PathBuf>,
    output: Option<&'a PathBuf>,
}

impl Io<'_> {
    fn read(&self) -> Result<String, Failure> {
        let mut buf = String::new();
        match self.input {
            Some(p) if p.as_os_str() != "-" => buf = std::fs::read_to_string(p)?,
            _ => {
                std::io::stdin().read_to_string(&mut buf)?;
            }
        }
        Ok(buf)
    }

    fn read_json<T: for<'de> Deserialize<'de>>(&self) -> Result<T, Failure> {
        Ok(serde_json::from_str(&self.read()?)?)
    }

    fn write(&self, text: &str) -> Result<(), Failure> {
        match self.output {
            Some(p) => std::fs::write(p, text)?,
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())?;
                out.flush()?;
            }
        }
        Ok(())
    }

    fn write_json<T: Serialize>(&self, value: &T) -> Result<(), Failure> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(&text)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let io = Io { input: cli.input.as_ref(), output: cli.output.as_ref() };
    let outcome = match &cli.command {
        Command::Validate => cmd_validate(&cli, &io),
        Command::Feasible => cmd_feasible(&cli, &io),
        Command::Apply { oracle } => cmd_apply(&cli, &io, *oracle),
        Command::Cool(args) => cmd_cool(&io, args),
        Command::ThermoCurve(args) => cmd_thermo(&io, args),
        Command::Decompose => cmd_decompose(&cli, &io),
        Command::Selftest { quick, sequential } => cmd_selftest(&cli, &io, *quick, *sequential),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Invariant(msg)) => {
            eprintln!("internal invariant breached: {msg}");
            ExitCode::from(EXIT_INVARIANT)
        }
    }
}

fn verdict(ok: bool) -> u8 {
    if ok {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    }
}

#[derive(Serialize)]
struct ValidateReport {
    kind: &'static str,
    valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    message: Option<String>,
}

fn cmd_validate(cli: &Cli, io: &Io) -> Outcome {
    let value: Value = serde_json::from_str(&io.read()?)?;
    let obj = value
        .as_object()
        .ok_or_else(|| Failure::Input("expected a JSON object".into()))?;
    let report = if obj.contains_key("cm") {
        let st: GaussianState = serde_json::from_value(value)?;
        let valid = validate_state(&st, cli.tol_state)?;
        ValidateReport { kind: "state", valid, message: None }
    } else if obj.contains_key("X") {
        let ch: GaussianChannel = serde_json::from_value(value)?;
        let valid = validate_channel(&ch, cli.tol_channel)?;
        ValidateReport { kind: "channel", valid, message: None }
    } else if obj.contains_key("sectors") {
        let spec: GtoSpec = serde_json::from_value(value)?;
        match spec.check() {
            Ok(()) => {
                let valid = validate_channel(&gto_to_channel(&spec)?, cli.tol_channel)?;
                ValidateReport { kind: "gto-spec", valid, message: None }
            }
            Err(GtoError::Validation(m)) => {
                ValidateReport { kind: "gto-spec", valid: false, message: Some(m) }
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        return Err(Failure::Input(
            "input is not a state (cm), channel (X, Y, d) or GTO spec (sectors)".into(),
        ));
    };
    io.write_json(&report)?;
    Ok(verdict(report.valid))
}

#[derive(Serialize)]
struct FeasibleReport {
    #[serde(flatten)]
    result: FeasibilityResult,
    bounds: Vec<BoundCheck>,
}

fn cmd_feasible(cli: &Cli, io: &Io) -> Outcome {
    let q: TransformQuery = io.read_json()?;
    let result = if q.vartheta.is_some() {
        squeezed_bath_feasible(&q, cli.tol_feasibility)?
    } else {
        single_mode_feasible(&q, cli.tol_feasibility)?
    };
    let bounds = necessary_bounds(&q)?;
    if result.feasible && bounds.iter().any(|b| !b.satisfied) {
        return Err(Failure::Invariant(format!(
            "feasible query violates a necessary bound: {bounds:?}"
        )));
    }
    io.write_json(&FeasibleReport { result, bounds })?;
    Ok(verdict(result.feasible))
}

#[derive(Deserialize)]
struct ApplyInput {
    state: GaussianState,
    #[serde(default)]
    spec: Option<GtoSpec>,
    #[serde(default)]
    gto: Option<SingleModeGto>,
    #[serde(default)]
    channel: Option<GaussianChannel>,
    /// Hamiltonian centre; shifts the channel's displacement.
    #[serde(default)]
    center: Option<Vec<f64>>,
}

fn cmd_apply(cli: &Cli, io: &Io, oracle: bool) -> Outcome {
    let input: ApplyInput = io.read_json()?;
    let given = [input.spec.is_some(), input.gto.is_some(), input.channel.is_some()];
    if given.iter().filter(|b| **b).count() != 1 {
        return Err(Failure::Input("give exactly one of spec, gto, channel".into()));
    }
    if !validate_state(&input.state, cli.tol_state)? {
        return Err(Failure::Input("input state is not a valid Gaussian state".into()));
    }
    let mut ch = if let Some(spec) = &input.spec {
        gto_to_channel(spec)?
    } else if let Some(g) = &input.gto {
        g.to_channel()?
    } else {
        input.channel.clone().expect("checked above")
    };
    if !validate_channel(&ch, cli.tol_channel)? {
        return Err(Failure::Input("channel is not completely positive".into()));
    }
    if let Some(c) = &input.center {
        ch = displaced_gto(&ch, &RVec::from_row_slice(c))?;
    }
    let out = apply_channel(&ch, &input.state)?;
    if oracle {
        let spec = input
            .spec
            .as_ref()
            .ok_or_else(|| Failure::Input("--oracle needs a GTO spec".into()))?;
        let via_dilation = gto_dilation_apply(spec, &input.state.cm)?;
        let dev = max_abs_diff(&via_dilation, &out.cm);
        eprintln!("oracle max deviation: {dev:e}");
        if !(dev <= 1e-8) {
            return Err(Failure::Invariant(format!(
                "closed form and dilation disagree by {dev:e}"
            )));
        }
    }
    if !validate_state(&out, cli.tol_state)? {
        return Err(Failure::Invariant("output state failed validation".into()));
    }
    io.write_json(&out)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct SidebandReport {
    nu_before: f64,
    nu_after: f64,
    state: GaussianState,
}

fn emit_trace(io: &Io, trace: &CoolingTrace, format: Format) -> Outcome {
    match format {
        Format::Csv => io.write(&trace.to_csv())?,
        Format::Json => io.write_json(trace)?,
    }
    if trace.violated {
        return Err(Failure::Invariant("cooling trace dropped below the entropy bound".into()));
    }
    Ok(EXIT_OK)
}

fn cmd_cool(io: &Io, args: &CoolArgs) -> Outcome {
    let initial = GaussianState::thermal_single_mode(args.nu0);
    if let Some(omega) = args.sideband {
        let (state, nu_after) = sideband_swap(&initial, args.beta, omega)?;
        io.write_json(&SidebandReport { nu_before: args.nu0, nu_after, state })?;
        return Ok(EXIT_OK);
    }
    if let Some(rounds) = args.adversary {
        let (trace, _) =
            greedy_adversary(args.nu0, args.nu_b, rounds, args.search_grid, ExecMode::default())?;
        return emit_trace(io, &trace, args.format);
    }
    let params: Vec<StepParams> = io.read_json()?;
    let steps = params
        .iter()
        .map(|p| p.to_step())
        .collect::<Result<Vec<_>, _>>()?;
    let trace = run_protocol(&initial, &steps, args.nu_b, &RMat::identity(2, 2))?;
    emit_trace(io, &trace, args.format)
}

fn cmd_thermo(io: &Io, args: &ThermoArgs) -> Outcome {
    let coldest_needed = args.beta_i.min(args.beta).min(args.beta_f.unwrap_or(f64::INFINITY));
    let n = args
        .cutoff
        .unwrap_or_else(|| cutoff_for(coldest_needed, args.energy, DEFAULT_TAIL_TOL));
    if let Some(beta_f) = args.beta_f {
        let r = cross_check(args.beta_i, beta_f, args.beta, args.energy, n)?;
        io.write_json(&r)?;
        if !r.agree {
            return Err(Failure::Invariant(
                "thermo-majorization and Gaussian verdicts disagree".into(),
            ));
        }
        return Ok(verdict(r.thermo_verdict));
    }
    let p = geometric_probs(args.beta_i, args.energy, n, DEFAULT_TAIL_TOL)?;
    let g = geometric_probs(args.beta, args.energy, n, DEFAULT_TAIL_TOL)?;
    io.write(&thermo_curve(&p, &g)?.to_csv())?;
    Ok(EXIT_OK)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DecomposeInput {
    #[serde(default, with = "opt_real")]
    matrix: Option<RMat>,
    #[serde(default, with = "opt_complex")]
    unitary: Option<CMat>,
}

mod opt_real {
    use gto_kit::matrix::{real_matrix, RMat};
    use serde::{Deserialize, Deserializer};

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<RMat>, D::Error> {
        let rows: Option<Vec<Vec<f64>>> = Option::deserialize(d)?;
        rows.map(|r| real_matrix::from_rows(&r).map_err(serde::de::Error::custom))
            .transpose()
    }
}

mod opt_complex {
    use gto_kit::matrix::CMat;
    use serde::{Deserialize, Deserializer};

    #[derive(Deserialize)]
    struct Wrap(#[serde(with = "gto_kit::matrix::complex_matrix")] CMat);

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<CMat>, D::Error> {
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

fn cmd_decompose(cli: &Cli, io: &Io) -> Outcome {
    let input: DecomposeInput = io.read_json()?;
    match (input.matrix, input.unitary) {
        (Some(p), None) => {
            let w = williamson(&p, cli.tol_state)?;
            let err = max_abs_diff(&w.reconstruct(), &p);
            if !(err <= 1e-8 * gto_kit::matrix::max_abs(&p)) {
                return Err(Failure::Invariant(format!("reconstruction error {err:e}")));
            }
            io.write_json(&w)?;
        }
        (None, Some(u)) => {
            let f = cosine_sine_decompose(&u)?;
            io.write_json(&f)?;
        }
        _ => return Err(Failure::Input("give exactly one of matrix, unitary".into())),
    }
    Ok(EXIT_OK)
}

fn cmd_selftest(cli: &Cli, io: &Io, quick: bool, sequential: bool) -> Outcome {
    let sizes = if quick { SuiteSizes::quick() } else { SuiteSizes::full() };
    let mode = if sequential { ExecMode::Sequential } else { ExecMode::default() };
    let start = Instant::now();
    let reports = run_all(cli.seed, sizes, mode);
    let mut text = String::new();
    for r in &reports {
        text.push_str(&format!(
            "{:<22} {} cases={} failures={} max_error={:e}\n",
            r.name,
            if r.passed() { "PASS" } else { "FAIL" },
            r.cases,
            r.failures,
            r.max_error
        ));
    }
    let all = reports.iter().all(|r| r.passed());
    text.push_str(&format!(
        "selftest seed={} {} ({} suites)\n",
        cli.seed,
        if all { "PASS" } else { "FAIL" },
        reports.len()
    ));
    io.write(&text)?;
    eprintln!("elapsed: {:.2}s", start.elapsed().as_secs_f64());
    if all {
        Ok(EXIT_OK)
    } else {
        Err(Failure::Invariant("selftest suites failed".into()))
    }
}
