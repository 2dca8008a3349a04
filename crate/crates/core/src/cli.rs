//! Command-line front end. `run` is the whole program, parameterized over
//! its argument list and output streams so it can be driven from tests.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bounds::{branch_table, evaluate, nonconvexity_bound, numeric_crosscheck_erasure_protocol, BoundKind, HSign};
use crate::centropy::{alicki_fannes_check, channel_coherent_info_at, channel_coherent_info_max};
use crate::channels::{
    choi_state, depolarizing_channel, erasure_channel, flagged_mixture, is_ppt, verify_two_symmetric_extension,
    QuantumChannel,
};
use crate::error::Error;
use crate::pdit::{
    controlled_swap_twists, identity_twists, make_approx_pdit, make_pdit, random_swap_twists, werner_shield,
    PditState,
};
use crate::qalg::{DensityOperator, SystemLayout};
use crate::sweep::{run_sweep, EpsilonMode, Range, SweepSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILED: i32 = 2;

const TABLE_TOL: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(name = "superact", version, about = "Coherent-information bounds for superactivation protocols")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a bound over a parameter grid and write CSV.
    Sweep(Box<SweepArgs>),
    /// Evaluate a bound at a single point.
    Eval(EvalArgs),
    /// Run a certification check (exit 2 on failure).
    Certify {
        #[command(subcommand)]
        target: CertifyTarget,
    },
    /// Print the nine branch contributions and check their sum.
    VerifyTable {
        #[arg(long)]
        kappa: f64,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 2)]
        d: usize,
    },
    /// Coherent information of a channel read from a JSON description.
    EvalChannel {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2000)]
        iters: usize,
    },
    /// Write a built-in channel as a JSON description.
    ExportChannel {
        #[arg(long, value_enum)]
        kind: ChannelKind,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 0.5)]
        kappa: f64,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, value_enum, default_value_t = TwistKind::ControlledSwap)]
        twist: TwistKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// JSON sweep spec; flags override its values.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    bound: Option<BoundKind>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    h_sign: Option<HSign>,
    /// Fix kappa instead of sweeping it.
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Step for every swept parameter without its own step flag.
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    kappa_min: Option<f64>,
    #[arg(long)]
    kappa_max: Option<f64>,
    #[arg(long)]
    kappa_step: Option<f64>,
    #[arg(long)]
    p_min: Option<f64>,
    #[arg(long)]
    p_max: Option<f64>,
    #[arg(long)]
    p_step: Option<f64>,
    #[arg(long)]
    epsilon_min: Option<f64>,
    #[arg(long)]
    epsilon_max: Option<f64>,
    #[arg(long)]
    epsilon_step: Option<f64>,
    #[arg(long, value_enum)]
    epsilon_mode: Option<EpsilonModeArg>,
    #[arg(long)]
    tied_fraction: Option<f64>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EpsilonModeArg {
    Grid,
    Tied,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    bound: BoundKind,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = HSign::Conservative)]
    h_sign: HSign,
}

#[derive(Debug, Subcommand)]
enum CertifyTarget {
    /// PPT test across the A|B cut.
    Ppt {
        #[arg(long, value_enum)]
        state: StateKind,
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// Depolarizing parameter for `depolarizing-choi`.
        #[arg(long, default_value_t = 0.5)]
        p: f64,
    },
    /// Two-symmetric extension of the depolarizing Choi state.
    Symext {
        #[arg(long, default_value_t = 2)]
        r: usize,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
    },
    /// Build a (possibly approximate) pbit and check its privacy witnesses.
    Pdit {
        #[arg(long, value_enum, default_value_t = TwistKind::ControlledSwap)]
        twist: TwistKind,
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
        /// Erasure probability for the shield-erasure protocol check.
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Sampled continuity check of the conditional entropy.
    AlickiFannes {
        /// Total dimension `dim_a * dim_b`.
        #[arg(long, default_value_t = 4)]
        dim: usize,
        #[arg(long, default_value_t = 2)]
        dim_a: usize,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 200)]
        seeds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StateKind {
    #[value(name = "phi+")]
    PhiPlus,
    Classical,
    Mixed,
    DepolarizingChoi,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
enum TwistKind {
    Identity,
    ControlledSwap,
    Random,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ChannelKind {
    Identity,
    Erasure,
    Depolarizing,
    PditDealer,
    NonconvexMixture,
}

/// Command failure: usage/IO problems exit 1, failed checks exit 2.
enum Failure {
    Usage(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::CrossCheck { .. } => Failure::Check(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Formats with 12 significant digits, then prints the shortest decimal that
/// round-trips that rounded value.
pub fn format_sig12(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let rounded: f64 = format!("{v:.11e}").parse().unwrap_or(v);
    format!("{rounded}")
}

/// Runs the program on `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Sweep(args) => cmd_sweep(*args, out),
        Command::Eval(args) => cmd_eval(args, out),
        Command::Certify { target } => cmd_certify(target, out),
        Command::VerifyTable { kappa, p, d } => cmd_verify_table(kappa, p, d, out),
        Command::EvalChannel {
            channel,
            restarts,
            seed,
            iters,
        } => cmd_eval_channel(&channel, restarts, seed, iters, out),
        Command::ExportChannel {
            kind,
            p,
            kappa,
            d,
            twist,
            seed,
            out: path,
        } => cmd_export_channel(kind, p, kappa, d, twist, seed, path, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Check(msg)) => {
            let _ = writeln!(err, "FAIL: {msg}");
            EXIT_FAILED
        }
    }
}

fn build_spec(args: &SweepArgs) -> std::result::Result<SweepSpec, Failure> {
    let mut spec = match &args.spec {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            SweepSpec::from_json(&text)?
        }
        None => {
            let bound = args
                .bound
                .ok_or_else(|| Failure::Usage("either --spec or --bound is required".into()))?;
            SweepSpec::new(bound)
        }
    };
    if let Some(bound) = args.bound {
        spec.bound = bound;
    }
    if let Some(d) = args.d {
        spec.d = d;
    }
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(h) = args.h_sign {
        spec.h_sign = h;
    }
    if let Some(mode) = args.epsilon_mode {
        spec.epsilon_mode = match mode {
            EpsilonModeArg::Grid => EpsilonMode::Grid,
            EpsilonModeArg::Tied => EpsilonMode::Tied,
        };
    }
    if let Some(f) = args.tied_fraction {
        spec.tied_fraction = f;
    }

    let per_param = [
        ("kappa", args.kappa, args.kappa_min, args.kappa_max, args.kappa_step),
        ("p", args.p, args.p_min, args.p_max, args.p_step),
        ("epsilon", args.epsilon, args.epsilon_min, args.epsilon_max, args.epsilon_step),
    ];
    for (name, fixed, min, max, step) in per_param {
        let applies = spec.bound.parameters().contains(&name);
        if !applies {
            if fixed.is_some() || min.is_some() || max.is_some() || step.is_some() {
                return Err(Failure::Usage(format!("--{name} does not apply to bound `{}`", spec.bound)));
            }
            continue;
        }
        if let Some(v) = fixed {
            spec.fixed.insert(name.to_string(), v);
            spec.ranges.remove(name);
            continue;
        }
        let step = step.or(args.step);
        if min.is_some() || max.is_some() || step.is_some() {
            spec.fixed.remove(name);
            let mut r = spec.ranges.get(name).copied().unwrap_or_else(Range::default);
            if let Some(v) = min {
                r.min = v;
            }
            if let Some(v) = max {
                r.max = v;
            }
            if let Some(v) = step {
                r.step = v;
            }
            spec.ranges.insert(name.to_string(), r);
        }
    }
    Ok(spec)
}

fn cmd_sweep(args: SweepArgs, out: &mut dyn Write) -> CmdResult {
    let spec = build_spec(&args)?;
    let result = run_sweep(&spec)?;
    let csv = result.to_csv();
    match &args.out {
        Some(path) => {
            std::fs::write(path, csv)
                .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
            let argmax: Vec<String> = result.summary.argmax.iter().map(|(k, v)| format!("{k}={v}")).collect();
            writeln!(out, "bound={}", spec.bound)?;
            writeln!(out, "points={}", result.points.len())?;
            writeln!(out, "max_value={}", result.summary.max_value)?;
            writeln!(out, "argmax={}", argmax.join(","))?;
            writeln!(out, "positive_fraction={}", result.summary.positive_fraction)?;
            writeln!(out, "csv={}", path.display())?;
        }
        None => out.write_all(csv.as_bytes())?,
    }
    Ok(())
}

fn cmd_eval(args: EvalArgs, out: &mut dyn Write) -> CmdResult {
    let kappa = match (args.bound, args.kappa) {
        (BoundKind::Nonconvexity, None) => return Err(Failure::Usage("--kappa is required for nonconvexity".into())),
        (_, k) => k.unwrap_or(0.0),
    };
    let point = evaluate(args.bound, kappa, args.p, args.epsilon, args.d, args.h_sign)?;
    writeln!(out, "{}", format_sig12(point.value))?;
    Ok(())
}

fn verdict(out: &mut dyn Write, passed: bool, what: &str) -> CmdResult {
    if passed {
        writeln!(out, "PASS")?;
        Ok(())
    } else {
        writeln!(out, "FAIL")?;
        Err(Failure::Check(what.to_string()))
    }
}

fn twists_for(kind: TwistKind, seed: u64) -> Vec<crate::qalg::linalg::CMatrix> {
    match kind {
        TwistKind::Identity => identity_twists(2, 4),
        TwistKind::ControlledSwap => controlled_swap_twists(),
        TwistKind::Random => random_swap_twists(seed),
    }
}

fn pbit(kind: TwistKind, seed: u64) -> crate::error::Result<PditState> {
    make_pdit(2, &werner_shield(), &twists_for(kind, seed))
}

fn cmd_certify(target: CertifyTarget, out: &mut dyn Write) -> CmdResult {
    match target {
        CertifyTarget::Ppt { state, d, p } => {
            let rho = match state {
                StateKind::PhiPlus => DensityOperator::max_entangled("A", "B", d)?,
                StateKind::Classical => DensityOperator::classically_correlated("A", "B", d)?,
                StateKind::Mixed => DensityOperator::maximally_mixed(SystemLayout::new([("A", d), ("B", d)])?),
                StateKind::DepolarizingChoi => choi_state(&depolarizing_channel(p, d)?)?.into_state(),
            };
            let labels = rho.layout().labels();
            let report = is_ppt(&rho, &labels[1..], 1e-10)?;
            writeln!(out, "min_eigenvalue={}", report.min_eigenvalue)?;
            verdict(
                out,
                report.ppt,
                &format!("partial transpose has min eigenvalue {}", report.min_eigenvalue),
            )
        }
        CertifyTarget::Symext { r, p } => {
            let report = verify_two_symmetric_extension(p, r)?;
            writeln!(out, "min_eigenvalue={}", report.min_eigenvalue)?;
            writeln!(out, "marginal_deviation={}", report.marginal_deviation)?;
            writeln!(out, "swap_deviation={}", report.swap_deviation)?;
            verdict(out, report.passed, "symmetric extension check")
        }
        CertifyTarget::Pdit { twist, epsilon, p, seed } => {
            let exact = pbit(twist, seed)?;
            let approx = make_approx_pdit(2, exact.shield(), exact.twists(), epsilon, seed)?;
            let untwist = approx.untwist_distance()?;
            let attack = approx.key_attack_epsilon()?;
            let ppt = approx.ppt(1e-10)?;
            writeln!(out, "untwist_distance={untwist}")?;
            writeln!(out, "key_attack_distance={attack}")?;
            writeln!(out, "ppt_min_eigenvalue={}", ppt.min_eigenvalue)?;
            let mut ok = untwist <= epsilon + 1e-9 && attack <= 2.0 * epsilon + 1e-9;
            let mut what = format!("untwist distance {untwist}, key attack distance {attack} for epsilon {epsilon}");
            match numeric_crosscheck_erasure_protocol(p, &exact) {
                Ok(r) => {
                    writeln!(out, "unerased={}", r.unerased)?;
                    writeln!(out, "erased={}", r.erased)?;
                    writeln!(out, "average={}", r.average)?;
                }
                Err(Error::CrossCheck { detail, .. }) => {
                    writeln!(out, "erasure_protocol={detail}")?;
                    ok = false;
                    what = detail;
                }
                Err(e) => return Err(e.into()),
            }
            verdict(out, ok, &what)
        }
        CertifyTarget::AlickiFannes {
            dim,
            dim_a,
            epsilon,
            seeds,
            seed,
        } => {
            if dim_a == 0 || dim % dim_a != 0 {
                return Err(Failure::Usage(format!("--dim {dim} is not a multiple of --dim-a {dim_a}")));
            }
            let report = alicki_fannes_check(dim_a, dim / dim_a, epsilon, seeds, seed)?;
            writeln!(out, "pairs={}", report.pairs)?;
            writeln!(out, "envelope={}", report.envelope)?;
            writeln!(out, "max_gap={}", report.max_gap)?;
            writeln!(out, "max_distance={}", report.max_distance)?;
            writeln!(out, "violations={}", report.violations.len())?;
            verdict(
                out,
                report.passed(),
                &format!("{} violations (first seed {:?})", report.violations.len(), report.violations.first()),
            )
        }
    }
}

fn cmd_verify_table(kappa: f64, p: f64, d: usize, out: &mut dyn Write) -> CmdResult {
    let table = branch_table(kappa, p, d)?;
    for e in &table.entries {
        writeln!(out, "{}\t{}", e.label(), e.value)?;
    }
    let closed = nonconvexity_bound(kappa, p, d)?;
    let diff = (table.rate() - closed).abs();
    writeln!(out, "sum={}", table.sum())?;
    writeln!(out, "sum/2={}", table.rate())?;
    writeln!(out, "closed_form={closed}")?;
    writeln!(out, "difference={diff}")?;
    verdict(out, diff <= TABLE_TOL, &format!("table sum/2 differs from closed form by {diff}"))
}

fn cmd_eval_channel(path: &PathBuf, restarts: usize, seed: u64, iters: usize, out: &mut dyn Write) -> CmdResult {
    let text =
        std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let ch = QuantumChannel::from_json(&text)?;
    let mixed = DensityOperator::maximally_mixed(SystemLayout::single("A", ch.in_dim())?);
    let at_mixed = channel_coherent_info_at(&ch, &mixed)?;
    let best = channel_coherent_info_max(&ch, restarts, seed, iters)?;
    writeln!(out, "name={}", ch.name())?;
    writeln!(out, "in_dim={}", ch.in_dim())?;
    writeln!(out, "out_dim={}", ch.out_dim())?;
    writeln!(out, "kraus={}", ch.kraus().len())?;
    writeln!(out, "coherent_info_maximally_mixed={}", format_sig12(at_mixed.value))?;
    writeln!(out, "coherent_info_optimized={}", format_sig12(best.value))?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_export_channel(
    kind: ChannelKind,
    p: f64,
    kappa: f64,
    d: usize,
    twist: TwistKind,
    seed: u64,
    path: Option<PathBuf>,
    out: &mut dyn Write,
) -> CmdResult {
    let ch = match kind {
        ChannelKind::Identity => QuantumChannel::identity(d)?,
        ChannelKind::Erasure => erasure_channel(p, d)?,
        ChannelKind::Depolarizing => depolarizing_channel(p, d)?,
        ChannelKind::PditDealer => pbit(twist, seed)?.dealer_channel()?,
        ChannelKind::NonconvexMixture => {
            let dealer = pbit(twist, seed)?.dealer_channel()?;
            let erasure = erasure_channel(p, dealer.in_dim())?;
            flagged_mixture(kappa, &dealer, &erasure)?
        }
    };
    let json = ch.to_json()?;
    match path {
        Some(path) => std::fs::write(&path, json + "\n")
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?,
        None => writeln!(out, "{json}")?,
    }
    Ok(())
}
