//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use dude_core::bounds::{self, BoundInputs};
use dude_core::metrics::{relative_ber, report};
use dude_core::ndude::{ndude_denoise, train_observed, Arch, EpochStats, NetParams, TrainConfig, TrainObserver};
use dude_core::{dude, ContextSpec, Denoised, Grid, LossReport, Padding, Problem, Signal, Symbol};

use crate::channel_file::ChannelSource;
use crate::error::{read_file, HarnessError, Result};
use crate::select::{select_rows, TestReport};
use crate::seqfile::{self, Sequence};
use crate::sweep::{self, parse_arch, SweepConfig};
use crate::{checkpoint, pbm, source};

#[derive(Debug, Parser)]
#[command(name = "dude-cli", version, about = "Discrete universal denoising with DUDE and Neural DUDE")]
#[command(arg_required_else_help = true)]
struct Cli {
    /// Seed for the source, channel, initialization and shuffling streams.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for sweeps (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct ChannelArgs {
    /// Binary symmetric channel with this crossover probability.
    #[arg(long)]
    bsc: Option<f64>,
    /// Channel description file.
    #[arg(long)]
    channel: Option<PathBuf>,
}

impl ChannelArgs {
    fn source(&self) -> ChannelSource {
        match (&self.bsc, &self.channel) {
            (Some(d), _) => ChannelSource::Bsc(*d),
            (None, Some(p)) => ChannelSource::File(p.clone()),
            (None, None) => unreachable!("clap requires one of the two"),
        }
    }

    fn problem(&self, prune: bool) -> Result<Problem> {
        let p = Problem::new(self.source().build()?)?;
        Ok(if prune { p.pruned()? } else { p })
    }
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct ContextArgs {
    /// Half-width of a 1-D window (images are raster scanned).
    #[arg(long)]
    k: Option<usize>,
    /// Side of a square patch (odd, at least 3; images only).
    #[arg(long)]
    l: Option<usize>,
}

#[derive(Debug, Args)]
struct DenoiseArgs {
    /// Noisy input: a PBM bitmap or a symbol sequence file.
    #[arg(long)]
    input: PathBuf,
    /// Denoised output, written in the input's format.
    #[arg(long)]
    output: PathBuf,
    #[command(flatten)]
    channel: ChannelArgs,
    #[command(flatten)]
    context: ContextArgs,
    /// Boundary handling for 1-D windows: `zero` or `skip`.
    #[arg(long)]
    pad: Option<String>,
    /// Drop single-symbol denoisers dominated by another one.
    #[arg(long)]
    prune_dominated: bool,
    /// Clean reference, for true loss and regret.
    #[arg(long)]
    clean: Option<PathBuf>,
    /// Print the loss report.
    #[arg(long)]
    report: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Pass clean data through a channel.
    Corrupt {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        channel: ChannelArgs,
    },
    /// Two-pass context-counting denoiser.
    Dude(DenoiseArgs),
    /// Neural DUDE: train on the noisy data, then denoise it.
    Ndude {
        #[command(flatten)]
        common: DenoiseArgs,
        /// Hidden layers: `40x4`, `64-32` or `linear`.
        #[arg(long, default_value = "40x4")]
        arch: String,
        #[arg(long, default_value_t = 10)]
        epochs: usize,
        #[arg(long, default_value_t = 128)]
        batch: usize,
        #[arg(long, default_value_t = 1e-3)]
        lr: f64,
        /// Project every node's incoming weights onto a ball of this radius.
        #[arg(long)]
        max_weight_norm: Option<f64>,
        /// Print per-epoch objective and estimated loss.
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        save_model: Option<PathBuf>,
        /// Denoise with saved parameters instead of training.
        #[arg(long, conflicts_with = "save_model")]
        load_model: Option<PathBuf>,
    },
    /// Run a configuration sweep and write CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Add a wall-time column (makes the CSV non-reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Choose the config with the smallest mean true loss on validation data.
    Select {
        #[arg(long)]
        validation: PathBuf,
        /// Sweep CSV on test data, for a per-dataset BER/delta report.
        #[arg(long)]
        test: Option<PathBuf>,
    },
    /// Evaluate the bound formulas.
    Bounds {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        /// Hidden layers of the network class.
        #[arg(long)]
        arch: String,
        /// Per-node weight-norm bound.
        #[arg(long = "B")]
        b: f64,
        /// Free parameter of the uniform deviation bound (default: optimal).
        #[arg(long)]
        gamma: Option<f64>,
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long)]
        prune_dominated: bool,
    },
    /// Generate a binary symmetric Markov source.
    GenSource {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        switch_prob: f64,
        #[arg(long)]
        output: PathBuf,
    },
}

enum Data {
    Seq(Sequence),
    Image(Grid),
}

impl Data {
    fn load(path: &Path) -> Result<Data> {
        let bytes = read_file(path)?;
        if bytes.starts_with(seqfile::MAGIC) {
            Ok(Data::Seq(seqfile::parse(&bytes)?))
        } else if bytes.first() == Some(&b'P') {
            Ok(Data::Image(pbm::parse(&bytes)?))
        } else {
            Err(HarnessError::UnsupportedFormat(format!("{}: neither PBM nor a symbol sequence", path.display())))
        }
    }

    fn symbols(&self) -> &[Symbol] {
        match self {
            Data::Seq(s) => &s.symbols,
            Data::Image(g) => g.cells(),
        }
    }

    fn width(&self) -> Option<usize> {
        match self {
            Data::Seq(_) => None,
            Data::Image(g) => Some(g.cols()),
        }
    }

    fn with_symbols(&self, symbols: Vec<Symbol>, alphabet: usize) -> Result<Data> {
        Ok(match self {
            Data::Seq(_) => Data::Seq(Sequence { alphabet, symbols }),
            Data::Image(g) => Data::Image(Grid::new(g.rows(), g.cols(), symbols)?),
        })
    }

    fn save(&self, path: &Path) -> Result<()> {
        match self {
            Data::Seq(s) => seqfile::save(path, s),
            Data::Image(g) => pbm::save(path, g, pbm::PbmFormat::Packed),
        }
    }
}

fn context_spec(ctx: &ContextArgs, pad: Option<&str>, default_pad: Padding, z_size: usize) -> Result<ContextSpec> {
    let pad = match pad {
        None => default_pad,
        Some(p) => Padding::parse(p).ok_or_else(|| HarnessError::Invalid(format!("unknown padding {p:?}")))?,
    };
    match (ctx.k, ctx.l) {
        (Some(k), _) => Ok(ContextSpec::one_d(k, z_size, pad)),
        (None, Some(l)) => Ok(ContextSpec::two_d(l, z_size)?),
        (None, None) => unreachable!("clap requires one of the two"),
    }
}

fn signal<'a>(data: &'a Data, spec: &ContextSpec) -> Result<Signal<'a>> {
    match (spec.shape, data.width()) {
        (dude_core::ContextShape::OneD { .. }, _) => Ok(Signal::line(data.symbols())),
        (dude_core::ContextShape::TwoD { .. }, Some(w)) => Ok(Signal::raster(data.symbols(), w)?),
        (dude_core::ContextShape::TwoD { .. }, None) => {
            Err(HarnessError::Invalid("patch contexts need an image input".into()))
        }
    }
}

fn print_report(out: &mut dyn Write, rep: &LossReport, delta: Option<f64>) -> Result<()> {
    let io = |e| HarnessError::Io { path: "<stdout>".into(), source: e };
    writeln!(out, "n_eval\t{}\nboundary_rule\t{}\nest_loss\t{:.6}", rep.n_eval, rep.boundary_rule.as_str(), rep.est_loss)
        .map_err(io)?;
    if let (Some(t), Some(r)) = (rep.true_loss, rep.regret) {
        writeln!(out, "true_loss\t{t:.6}\nregret\t{r:.6}").map_err(io)?;
        if let Some(d) = delta.filter(|&d| d > 0.0) {
            writeln!(out, "ber_rel\t{:.6}", relative_ber(t, d)?).map_err(io)?;
        }
    }
    Ok(())
}

struct Tracer<'a> {
    out: &'a mut dyn Write,
    enabled: bool,
    start: std::time::Instant,
}

impl TrainObserver for Tracer<'_> {
    fn elapsed_seconds(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    fn on_epoch(&mut self, epoch: usize, _params: &NetParams, _out: &Denoised, stats: &EpochStats) {
        if self.enabled {
            let _ = writeln!(
                self.out,
                "epoch {epoch}\tobjective {:.6}\test_loss {:.6}\tsteps {}\t{:.1}s",
                stats.objective, stats.est_loss, stats.steps, stats.wall_seconds
            );
        }
    }
}

fn finish(args: &DenoiseArgs, problem: &Problem, noisy: &Data, spec: &ContextSpec, out: Denoised, w: &mut dyn Write) -> Result<()> {
    if args.report || args.clean.is_some() {
        let clean = args.clean.as_deref().map(Data::load).transpose()?;
        let rep = report(
            noisy.symbols(),
            clean.as_ref().map(Data::symbols),
            &out,
            &problem.tables,
            problem.channel.lambda(),
            spec.pad,
        )?;
        print_report(w, &rep, args.channel.bsc)?;
    }
    noisy.with_symbols(out.symbols, problem.channel.xhat_size())?.save(&args.output)
}

fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let io = |e| HarnessError::Io { path: "<stdout>".into(), source: e };
    match cli.command {
        Command::Corrupt { input, output, channel } => {
            let ch = channel.source().build()?;
            let data = Data::load(&input)?;
            let z = ch.corrupt(data.symbols(), cli.seed)?;
            data.with_symbols(z, ch.z_size())?.save(&output)?;
        }
        Command::GenSource { n, switch_prob, output } => {
            let x = source::gen_markov_source(n, switch_prob, cli.seed)?;
            seqfile::save(&output, &Sequence { alphabet: 2, symbols: x })?;
        }
        Command::Dude(args) => {
            let problem = args.channel.problem(args.prune_dominated)?;
            let noisy = Data::load(&args.input)?;
            let spec = context_spec(&args.context, args.pad.as_deref(), Padding::SkipBoundary, problem.z_size())?;
            let d = dude::denoise(signal(&noisy, &spec)?, &spec, &problem)?;
            finish(&args, &problem, &noisy, &spec, d, out)?;
        }
        Command::Ndude { common: args, arch, epochs, batch, lr, max_weight_norm, trace, save_model, load_model } => {
            let problem = args.channel.problem(args.prune_dominated)?;
            let noisy = Data::load(&args.input)?;
            let spec = context_spec(&args.context, args.pad.as_deref(), Padding::ZeroPad, problem.z_size())?;
            let sig = signal(&noisy, &spec)?;
            let params = match load_model {
                Some(path) => checkpoint::load(&path)?,
                None => {
                    let hidden = parse_arch(&arch).ok_or_else(|| HarnessError::Invalid(format!("bad arch {arch:?}")))?;
                    let arch = Arch::for_contexts(&spec, hidden, problem.s_size())?;
                    let cfg = TrainConfig {
                        epochs,
                        batch_size: batch,
                        learning_rate: lr,
                        seed: cli.seed,
                        max_weight_norm,
                        ..TrainConfig::default()
                    };
                    let mut tracer = Tracer { out: &mut *out, enabled: trace, start: std::time::Instant::now() };
                    let (params, t) = train_observed(sig, &spec, &problem, &arch, &cfg, &mut tracer)?;
                    if trace {
                        writeln!(out, "initial objective {:.6}", t.initial_objective).map_err(io)?;
                    }
                    params
                }
            };
            if let Some(path) = save_model {
                checkpoint::save(&path, &params)?;
            }
            let d = ndude_denoise(&params, sig, &spec, &problem)?;
            finish(&args, &problem, &noisy, &spec, d, out)?;
        }
        Command::Sweep { config, output, timing } => {
            let cfg = SweepConfig::load(&config)?;
            let records = with_threads(cli.threads, || sweep::run_sweep(&cfg))?;
            let mut buf = Vec::new();
            sweep::write_csv(&records, &mut buf, timing)?;
            crate::error::write_file(&output, &buf)?;
            let failed = records.iter().filter(|r| r.outcome.is_err()).count();
            writeln!(out, "{} records written to {} ({failed} failed)", records.len(), output.display()).map_err(io)?;
        }
        Command::Select { validation, test } => {
            let rows = sweep::read_csv_file(&validation)?;
            let sel = select_rows(&rows)?;
            writeln!(out, "selected {} (mean true loss {:.6} over {} records)", sel.config_id, sel.mean_true_loss, sel.count)
                .map_err(io)?;
            if let Some(row) = rows.iter().find(|r| r.get("config_id") == Some(sel.config_id.as_str())) {
                let knobs = ["method", "context", "arch", "epochs", "batch_size", "lr", "boundary_rule"];
                let desc: Vec<String> = knobs.iter().map(|k| format!("{k}={}", row.get(k).unwrap_or(""))).collect();
                writeln!(out, "{}", desc.join(" ")).map_err(io)?;
            }
            if let Some(test) = test {
                let rows = sweep::read_csv_file(&test)?;
                write!(out, "{}", TestReport::from_rows(&rows, &sel.config_id)?.render()).map_err(io)?;
            }
        }
        Command::Bounds { n, k, delta, arch, b, gamma, channel, prune_dominated } => {
            let problem = channel.problem(prune_dominated)?;
            let widths = parse_arch(&arch).ok_or_else(|| HarnessError::Invalid(format!("bad arch {arch:?}")))?;
            let c_max = bounds::c_max(&problem.tables, problem.channel.lambda());
            let inputs = BoundInputs {
                n,
                k,
                delta,
                gamma,
                b,
                widths,
                s_size: problem.s_size(),
                z_size: problem.z_size(),
                c_max,
            };
            let t1 = bounds::thm1_rhs(&inputs)?;
            let t2 = bounds::thm2_rhs(&inputs)?;
            let p3 = bounds::prop3_epsilon(n, k, delta, problem.z_size(), problem.s_size(), c_max)?;
            let flag = |v: bool| if v { "\tvacuous" } else { "" };
            writeln!(out, "c_max\t{c_max:.6}\nc_tilde\t{:.6}", inputs.c_tilde()).map_err(io)?;
            writeln!(out, "gamma\t{:.6}", gamma.unwrap_or_else(|| inputs.optimal_gamma())).map_err(io)?;
            writeln!(out, "thm1\t{:.6}{}", t1.value, flag(t1.vacuous)).map_err(io)?;
            writeln!(out, "thm2\t{:.6}{}", t2.value, flag(t2.vacuous)).map_err(io)?;
            writeln!(out, "prop3\t{:.6}{}", p3.value, flag(p3.vacuous)).map_err(io)?;
        }
    }
    Ok(())
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| HarnessError::Invalid(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs the CLI with explicit output streams and returns the exit code:
/// 0 on success, 1 on a usage error, 2 on a data error.
pub fn cli_main_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match run(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    cli_main_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
