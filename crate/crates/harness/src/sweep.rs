//! Configuration sweeps.
//!
//! A sweep expands a [`SweepConfig`] into config points, runs every
//! (point, seed, dataset) combination and emits one [`Record`] each. Neural
//! DUDE points that differ only in their epoch count share a training run:
//! the network is evaluated after each requested epoch.
//!
//! Records are sorted by `(config_id, seed, dataset)` so the CSV does not
//! depend on scheduling.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use dude_core::bounds::{self, BoundInputs, BoundValue};
use dude_core::metrics::{relative_ber, report};
use dude_core::ndude::{parse_hidden, train_observed, Arch, EpochStats, NetParams, TrainConfig, TrainObserver};
use dude_core::{dude, ContextSpec, Denoised, LossReport, Padding, Problem, Signal, Symbol};

use crate::channel_file::ChannelSource;
use crate::error::{read_file, HarnessError, Result};
use crate::{pbm, source};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Dude,
    Ndude,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Dude => "dude",
            Method::Ndude => "ndude",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "dude" => Some(Method::Dude),
            "ndude" => Some(Method::Ndude),
            _ => None,
        }
    }
}

/// A 1-D window of half-width `k` or an `l×l` patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Context {
    K(usize),
    L(usize),
}

impl Context {
    pub fn canonical(self) -> String {
        match self {
            Context::K(k) => format!("k{k}"),
            Context::L(l) => format!("l{l}"),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let (tag, num) = s.split_at_checked(1)?;
        let v = num.parse().ok()?;
        match tag {
            "k" => Some(Context::K(v)),
            "l" => Some(Context::L(v)),
            _ => None,
        }
    }

    /// The equivalent 1-D order.
    pub fn k(self) -> usize {
        match self {
            Context::K(k) => k,
            Context::L(l) => (l * l).saturating_sub(1) / 2,
        }
    }
}

/// Hidden widths in canonical text form: `40x4`, `64-32` or `linear`.
pub fn arch_label(widths: &[usize]) -> String {
    match widths {
        [] => "linear".into(),
        [w, rest @ ..] if rest.iter().all(|v| v == w) => format!("{w}x{}", widths.len()),
        _ => widths.iter().map(usize::to_string).collect::<Vec<_>>().join("-"),
    }
}

pub fn parse_arch(s: &str) -> Option<Vec<usize>> {
    parse_hidden(&s.replace('-', ","))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    Markov { n: usize, switch_prob: f64 },
    Image(PathBuf),
}

impl Dataset {
    pub fn canonical(&self) -> String {
        match self {
            Dataset::Markov { n, switch_prob } => format!("markov:n={n}:p={switch_prob:?}"),
            Dataset::Image(p) => format!("image:{}", p.display()),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        if let Some(rest) = s.strip_prefix("markov:") {
            let (n, p) = rest.split_once(':')?;
            let n = n.strip_prefix("n=")?.parse().ok()?;
            let switch_prob = p.strip_prefix("p=")?.parse().ok()?;
            return Some(Dataset::Markov { n, switch_prob });
        }
        s.strip_prefix("image:").map(|p| Dataset::Image(PathBuf::from(p)))
    }

    /// Short name for reports: the file stem of an image.
    pub fn label(&self) -> String {
        match self {
            Dataset::Markov { .. } => "markov".into(),
            Dataset::Image(p) => p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into()),
        }
    }

    /// Clean data and, for images, the raster width.
    pub fn load(&self, seed: u64) -> Result<(Vec<Symbol>, Option<usize>)> {
        match self {
            Dataset::Markov { n, switch_prob } => Ok((source::gen_markov_source(*n, *switch_prob, seed)?, None)),
            Dataset::Image(p) => {
                let g = pbm::load(p)?;
                let w = g.cols();
                Ok((g.into_cells(), Some(w)))
            }
        }
    }
}

/// Every knob that identifies one configuration, apart from seed and data.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub method: Method,
    pub context: Context,
    /// Hidden widths; unused by DUDE.
    pub arch: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub boundary: Padding,
    pub channel: ChannelSource,
    pub prune: bool,
    pub bound_delta: f64,
}

impl Point {
    pub fn canonical(&self) -> String {
        let mut s = format!("method={};context={}", self.method.as_str(), self.context.canonical());
        match self.method {
            Method::Dude => s.push_str(";arch=-;epochs=-;batch=-;lr=-"),
            Method::Ndude => {
                let _ = write!(
                    s,
                    ";arch={};epochs={};batch={};lr={:?}",
                    arch_label(&self.arch),
                    self.epochs,
                    self.batch_size,
                    self.learning_rate
                );
            }
        }
        let _ = write!(
            s,
            ";boundary={};channel={};prune={};bound_delta={:?}",
            self.boundary.as_str(),
            self.channel.canonical(),
            self.prune,
            self.bound_delta
        );
        s
    }

    /// First 16 hex digits of the SHA-256 of [`Point::canonical`].
    pub fn config_id(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest[..8].iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    /// Point with the epoch count removed, for grouping training runs.
    fn run_key(&self) -> String {
        Point { epochs: 0, ..self.clone() }.canonical()
    }

    fn spec(&self, z_size: usize) -> Result<ContextSpec> {
        Ok(match self.context {
            Context::K(k) => ContextSpec::one_d(k, z_size, self.boundary),
            Context::L(l) => {
                if self.boundary != Padding::ZeroPad {
                    return Err(HarnessError::Invalid("patch contexts are always zero-padded".into()));
                }
                ContextSpec::two_d(l, z_size)?
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub methods: Vec<Method>,
    pub contexts: Vec<Context>,
    pub archs: Vec<Vec<usize>>,
    pub epochs: Vec<usize>,
    pub seeds: Vec<u64>,
    pub batch_sizes: Vec<usize>,
    pub learning_rates: Vec<f64>,
    /// `None` picks SkipBoundary for DUDE on 1-D windows and ZeroPad otherwise.
    pub boundaries: Vec<Option<Padding>>,
    pub channel: ChannelSource,
    pub datasets: Vec<Dataset>,
    pub prune: bool,
    pub bound_delta: f64,
}

impl SweepConfig {
    /// A single-point config over a Markov source with the default knobs.
    pub fn markov(n: usize, switch_prob: f64, delta: f64) -> Self {
        let train = TrainConfig::default();
        SweepConfig {
            methods: vec![Method::Dude],
            contexts: vec![Context::K(1)],
            archs: vec![vec![40; 4]],
            epochs: vec![train.epochs],
            seeds: vec![0],
            batch_sizes: vec![train.batch_size],
            learning_rates: vec![train.learning_rate],
            boundaries: vec![None],
            channel: ChannelSource::Bsc(delta),
            datasets: vec![Dataset::Markov { n, switch_prob }],
            prune: false,
            bound_delta: 0.01,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = read_file(path)?;
        let text = String::from_utf8_lossy(&bytes);
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Parses `key = value` lines; lists are comma-separated and relative
    /// paths are taken from `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg = SweepConfig::markov(0, 0.1, 0.1);
        cfg.datasets.clear();
        let (mut channel, mut markov, mut n, mut switch_prob) = (None, false, None, None);
        let mut images = Vec::new();
        let mut contexts = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = no + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let err = |msg: String| HarnessError::Config { line, msg };
            let (key, value) = body.split_once('=').ok_or_else(|| err("expected key = value".into()))?;
            let (key, value) = (key.trim(), value.trim());
            let items: Vec<&str> = value.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
            if items.is_empty() {
                return Err(err(format!("{key}: empty value")));
            }
            let bad = |v: &str| err(format!("{key}: cannot parse {v:?}"));
            fn list<T>(items: &[&str], f: impl Fn(&str) -> Option<T>, bad: impl Fn(&str) -> HarnessError) -> Result<Vec<T>> {
                items.iter().map(|v| f(v).ok_or_else(|| bad(v))).collect()
            }
            fn one<'a>(items: &[&'a str], err: impl Fn(String) -> HarnessError, key: &str) -> Result<&'a str> {
                match items {
                    [v] => Ok(v),
                    _ => Err(err(format!("{key} takes a single value"))),
                }
            }
            match key {
                "method" => cfg.methods = list(&items, Method::parse, bad)?,
                "k" => contexts.extend(list(&items, |v| v.parse().ok().map(Context::K), bad)?),
                "l" => contexts.extend(list(
                    &items,
                    |v| v.parse().ok().filter(|l| l % 2 == 1 && *l >= 3).map(Context::L),
                    bad,
                )?),
                "arch" => cfg.archs = list(&items, parse_arch, bad)?,
                "epochs" => cfg.epochs = list(&items, |v| v.parse().ok().filter(|&e| e > 0), bad)?,
                "seeds" => cfg.seeds = list(&items, |v| v.parse().ok(), bad)?,
                "batch" => cfg.batch_sizes = list(&items, |v| v.parse().ok().filter(|&b| b > 0), bad)?,
                "lr" => cfg.learning_rates = list(&items, |v| v.parse().ok().filter(|&r: &f64| r > 0.0), bad)?,
                "boundary" => {
                    cfg.boundaries = list(&items, |v| if v == "auto" { Some(None) } else { Padding::parse(v).map(Some) }, bad)?
                }
                "bsc" => {
                    let v = one(&items, err, key)?;
                    channel = Some(ChannelSource::Bsc(v.parse().map_err(|_| bad(v))?));
                }
                "channel" => channel = Some(ChannelSource::File(base.join(one(&items, err, key)?))),
                "source" => match one(&items, err, key)? {
                    "markov" => markov = true,
                    other => return Err(bad(other)),
                },
                "n" => {
                    let v = one(&items, err, key)?;
                    n = Some(v.parse().map_err(|_| bad(v))?);
                }
                "switch_prob" => {
                    let v = one(&items, err, key)?;
                    switch_prob = Some(v.parse().map_err(|_| bad(v))?);
                }
                "images" => images.extend(items.iter().map(|p| Dataset::Image(base.join(p)))),
                "prune_dominated" => {
                    let v = one(&items, err, key)?;
                    cfg.prune = v.parse().map_err(|_| bad(v))?;
                }
                "bound_delta" => {
                    let v = one(&items, err, key)?;
                    cfg.bound_delta = v.parse().ok().filter(|d| *d > 0.0 && *d < 1.0).ok_or_else(|| bad(v))?;
                }
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }
        cfg.channel = channel.ok_or(HarnessError::Config { line: 0, msg: "missing bsc or channel".into() })?;
        if markov {
            let missing = |what: &str| HarnessError::Config { line: 0, msg: format!("markov source needs {what}") };
            cfg.datasets.push(Dataset::Markov {
                n: n.ok_or_else(|| missing("n"))?,
                switch_prob: switch_prob.ok_or_else(|| missing("switch_prob"))?,
            });
        }
        cfg.datasets.extend(images);
        if !contexts.is_empty() {
            cfg.contexts = contexts;
        }
        if cfg.datasets.is_empty() {
            return Err(HarnessError::Config { line: 0, msg: "no data: set source = markov or images".into() });
        }
        Ok(cfg)
    }

    /// All distinct config points, in expansion order.
    pub fn points(&self) -> Vec<Point> {
        let mut out: Vec<Point> = Vec::new();
        for &method in &self.methods {
            for &context in &self.contexts {
                for &boundary in &self.boundaries {
                    let boundary = boundary.unwrap_or(match (method, context) {
                        (Method::Dude, Context::K(_)) => Padding::SkipBoundary,
                        _ => Padding::ZeroPad,
                    });
                    let base = Point {
                        method,
                        context,
                        arch: Vec::new(),
                        epochs: 0,
                        batch_size: 0,
                        learning_rate: 0.0,
                        boundary,
                        channel: self.channel.clone(),
                        prune: self.prune,
                        bound_delta: self.bound_delta,
                    };
                    if method == Method::Dude {
                        if !out.contains(&base) {
                            out.push(base);
                        }
                        continue;
                    }
                    for arch in &self.archs {
                        for &batch_size in &self.batch_sizes {
                            for &learning_rate in &self.learning_rates {
                                for &epochs in &self.epochs {
                                    let p = Point { arch: arch.clone(), epochs, batch_size, learning_rate, ..base.clone() };
                                    if !out.contains(&p) {
                                        out.push(p);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: LossReport,
    pub ber_rel: Option<f64>,
    /// Final training objective (Neural DUDE only).
    pub objective: Option<f64>,
    /// Largest per-node incoming weight norm (Neural DUDE only).
    pub b_hat: Option<f64>,
    pub c_max: f64,
    pub bound: Option<BoundValue>,
    pub bound_kind: &'static str,
    /// `|regret|` exceeds a non-vacuous bound.
    pub anomaly: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub config_id: String,
    pub seed: u64,
    pub dataset: Dataset,
    pub point: Point,
    pub outcome: std::result::Result<Outcome, String>,
    pub wall_seconds: f64,
}

impl Record {
    pub fn true_loss(&self) -> Option<f64> {
        self.outcome.as_ref().ok().and_then(|o| o.report.true_loss)
    }
}

struct Prepared {
    problem: Problem,
    clean: Vec<Symbol>,
    noisy: Vec<Symbol>,
    width: Option<usize>,
}

fn prepare(point: &Point, dataset: &Dataset, seed: u64) -> Result<Prepared> {
    let channel = point.channel.build()?;
    let problem = Problem::new(channel)?;
    let problem = if point.prune { problem.pruned()? } else { problem };
    let (clean, width) = dataset.load(seed)?;
    let noisy = problem.channel.corrupt(&clean, seed)?;
    Ok(Prepared { problem, clean, noisy, width })
}

impl Prepared {
    fn signal(&self, context: Context) -> Result<Signal<'_>> {
        match (context, self.width) {
            (Context::K(_), _) => Ok(Signal::line(&self.noisy)),
            (Context::L(_), Some(w)) => Ok(Signal::raster(&self.noisy, w)?),
            (Context::L(_), None) => Err(HarnessError::Invalid("patch contexts need image data".into())),
        }
    }

    fn outcome(
        &self,
        point: &Point,
        spec: &ContextSpec,
        out: &Denoised,
        nn: Option<(&NetParams, &EpochStats)>,
    ) -> Result<Outcome> {
        let lambda = self.problem.channel.lambda();
        let rep = report(&self.noisy, Some(&self.clean), out, &self.problem.tables, lambda, spec.pad)?;
        let ber_rel = match (point.channel.delta(), rep.true_loss) {
            (Some(d), Some(t)) if d > 0.0 => Some(relative_ber(t, d)?),
            _ => None,
        };
        let c_max = bounds::c_max(&self.problem.tables, lambda);
        let n = self.noisy.len();
        let k = spec.order();
        let (bound, bound_kind, objective, b_hat) = match nn {
            None => {
                let b = bounds::prop3_epsilon(n, k, point.bound_delta, self.problem.z_size(), self.problem.s_size(), c_max);
                (b.ok(), "prop3", None, None)
            }
            Some((params, stats)) => {
                let b_hat = params.max_node_norm();
                let inputs = BoundInputs {
                    n,
                    k,
                    delta: point.bound_delta,
                    gamma: None,
                    b: b_hat,
                    widths: point.arch.clone(),
                    s_size: self.problem.s_size(),
                    z_size: self.problem.z_size(),
                    c_max,
                };
                (bounds::thm2_rhs(&inputs).ok(), "thm2", Some(stats.objective), Some(b_hat))
            }
        };
        let anomaly = match (rep.regret, bound) {
            (Some(r), Some(b)) => !b.vacuous && r.abs() > b.value,
            _ => false,
        };
        Ok(Outcome { report: rep, ber_rel, objective, b_hat, c_max, bound, bound_kind, anomaly })
    }
}

fn run_dude(point: &Point, dataset: &Dataset, seed: u64) -> Result<Outcome> {
    let prep = prepare(point, dataset, seed)?;
    let spec = point.spec(prep.problem.z_size())?;
    let signal = prep.signal(point.context)?;
    let out = dude::denoise(signal, &spec, &prep.problem)?;
    prep.outcome(point, &spec, &out, None)
}

struct Checkpoints<'a> {
    prep: &'a Prepared,
    spec: &'a ContextSpec,
    points: &'a [Point],
    start: Instant,
    results: Vec<(usize, Result<Outcome>, f64)>,
}

impl TrainObserver for Checkpoints<'_> {
    fn on_epoch(&mut self, epoch: usize, params: &NetParams, out: &Denoised, stats: &EpochStats) {
        for (i, p) in self.points.iter().enumerate() {
            if p.epochs == epoch {
                let o = self.prep.outcome(p, self.spec, out, Some((params, stats)));
                self.results.push((i, o, self.start.elapsed().as_secs_f64()));
            }
        }
    }
}

/// Trains once for the largest epoch count among `points` (which differ
/// only in `epochs`) and evaluates each requested epoch.
fn run_ndude(points: &[Point], dataset: &Dataset, seed: u64) -> Vec<(Result<Outcome>, f64)> {
    let start = Instant::now();
    let fail = |e: HarnessError| points.iter().map(|_| (Err(HarnessError::Invalid(e.to_string())), 0.0)).collect();
    let first = &points[0];
    let prep = match prepare(first, dataset, seed) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    let spec = match first.spec(prep.problem.z_size()) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let signal = match prep.signal(first.context) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let arch = match Arch::for_contexts(&spec, first.arch.clone(), prep.problem.s_size()) {
        Ok(a) => a,
        Err(e) => return fail(e.into()),
    };
    let cfg = TrainConfig {
        epochs: points.iter().map(|p| p.epochs).max().unwrap_or(1),
        batch_size: first.batch_size,
        learning_rate: first.learning_rate,
        seed,
        ..TrainConfig::default()
    };
    let mut obs = Checkpoints { prep: &prep, spec: &spec, points, start, results: Vec::new() };
    if let Err(e) = train_observed(signal, &spec, &prep.problem, &arch, &cfg, &mut obs) {
        return fail(e.into());
    }
    let mut results = obs.results;
    results.sort_by_key(|r| r.0);
    results.into_iter().map(|(_, o, t)| (o, t)).collect()
}

/// Runs one config point on one dataset item.
pub fn run_point(point: &Point, dataset: &Dataset, seed: u64) -> Record {
    match point.method {
        Method::Dude => {
            let start = Instant::now();
            let outcome = run_dude(point, dataset, seed);
            make_record(point, dataset, seed, outcome, start.elapsed().as_secs_f64())
        }
        Method::Ndude => {
            let (outcome, t) = run_ndude(std::slice::from_ref(point), dataset, seed).pop().expect("one result");
            make_record(point, dataset, seed, outcome, t)
        }
    }
}

fn make_record(point: &Point, dataset: &Dataset, seed: u64, outcome: Result<Outcome>, wall_seconds: f64) -> Record {
    Record {
        config_id: point.config_id(),
        seed,
        dataset: dataset.clone(),
        point: point.clone(),
        outcome: outcome.map_err(|e| e.to_string()),
        wall_seconds,
    }
}

/// Runs the whole sweep on the current rayon pool.
pub fn run_sweep(cfg: &SweepConfig) -> Vec<Record> {
    let points = cfg.points();
    // One job per DUDE point, or per group of Neural DUDE points sharing a run.
    let mut groups: Vec<Vec<Point>> = Vec::new();
    let mut seen = BTreeSet::new();
    for p in &points {
        match p.method {
            Method::Dude => groups.push(vec![p.clone()]),
            Method::Ndude => {
                let key = p.run_key();
                if seen.insert(key.clone()) {
                    groups.push(points.iter().filter(|q| q.method == Method::Ndude && q.run_key() == key).cloned().collect());
                }
            }
        }
    }
    let jobs: Vec<(&Vec<Point>, &Dataset, u64)> = groups
        .iter()
        .flat_map(|g| cfg.datasets.iter().flat_map(move |d| cfg.seeds.iter().map(move |&s| (g, d, s))))
        .collect();
    let mut records: Vec<Record> = jobs
        .into_par_iter()
        .flat_map_iter(|(group, dataset, seed)| match group[0].method {
            Method::Dude => vec![run_point(&group[0], dataset, seed)],
            Method::Ndude => run_ndude(group, dataset, seed)
                .into_iter()
                .zip(group)
                .map(|((o, t), p)| make_record(p, dataset, seed, o, t))
                .collect(),
        })
        .collect();
    records.sort_by(|a, b| {
        (&a.config_id, a.seed, a.dataset.canonical()).cmp(&(&b.config_id, b.seed, b.dataset.canonical()))
    });
    records
}

pub const COLUMNS: [&str; 28] = [
    "config_id",
    "seed",
    "n_eval",
    "boundary_rule",
    "est_loss",
    "true_loss",
    "regret",
    "ber_rel",
    "dataset",
    "method",
    "context",
    "k",
    "arch",
    "epochs",
    "batch_size",
    "lr",
    "channel",
    "prune_dominated",
    "bound_delta",
    "objective",
    "b_hat",
    "c_max",
    "bound",
    "bound_kind",
    "bound_vacuous",
    "bound_anomaly",
    "status",
    "wall_seconds",
];

fn num(v: f64) -> String {
    format!("{v:?}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn row(r: &Record) -> Vec<String> {
    let p = &r.point;
    let ndude = p.method == Method::Ndude;
    let (arch, epochs, batch, lr) = if ndude {
        (arch_label(&p.arch), p.epochs.to_string(), p.batch_size.to_string(), num(p.learning_rate))
    } else {
        Default::default()
    };
    let mut fields = vec![r.config_id.clone(), r.seed.to_string()];
    match &r.outcome {
        Ok(o) => fields.extend([
            o.report.n_eval.to_string(),
            o.report.boundary_rule.as_str().into(),
            num(o.report.est_loss),
            opt(o.report.true_loss),
            opt(o.report.regret),
            opt(o.ber_rel),
        ]),
        Err(_) => fields.extend([String::new(), p.boundary.as_str().into(), String::new(), String::new(), String::new(), String::new()]),
    }
    fields.extend([
        r.dataset.canonical(),
        p.method.as_str().into(),
        p.context.canonical(),
        p.context.k().to_string(),
        arch,
        epochs,
        batch,
        lr,
        p.channel.canonical(),
        p.prune.to_string(),
        num(p.bound_delta),
    ]);
    match &r.outcome {
        Ok(o) => fields.extend([
            opt(o.objective),
            opt(o.b_hat),
            num(o.c_max),
            opt(o.bound.map(|b| b.value)),
            o.bound_kind.into(),
            o.bound.map(|b| b.vacuous.to_string()).unwrap_or_default(),
            o.anomaly.to_string(),
            "ok".into(),
        ]),
        Err(e) => {
            fields.extend(std::iter::repeat_n(String::new(), 7));
            fields.push(format!("error: {e}"));
        }
    }
    fields
}

/// Writes records as CSV. Wall time is only included when `timing` is set,
/// so that the default output is reproducible byte for byte.
pub fn write_csv<W: io::Write>(records: &[Record], out: W, timing: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let width = if timing { COLUMNS.len() } else { COLUMNS.len() - 1 };
    w.write_record(&COLUMNS[..width])?;
    for r in records {
        let mut fields = row(r);
        if timing {
            fields.push(num(r.wall_seconds));
        }
        w.write_record(&fields)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// One CSV row, addressed by column name.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    headers: csv::StringRecord,
    fields: csv::StringRecord,
}

impl CsvRow {
    pub fn get(&self, column: &str) -> Option<&str> {
        let i = self.headers.iter().position(|h| h == column)?;
        self.fields.get(i)
    }

    fn require(&self, column: &str) -> Result<&str> {
        self.get(column).ok_or_else(|| HarnessError::Invalid(format!("row has no {column} column")))
    }

    fn parse<T: std::str::FromStr>(&self, column: &str) -> Result<T> {
        let v = self.require(column)?;
        v.parse().map_err(|_| HarnessError::Invalid(format!("{column}: cannot parse {v:?}")))
    }

    pub fn f64(&self, column: &str) -> Option<f64> {
        self.get(column).filter(|s| !s.is_empty()).and_then(|s| s.parse().ok())
    }

    pub fn is_ok(&self) -> bool {
        self.get("status") == Some("ok")
    }

    /// Rebuilds the config point described by this row.
    pub fn point(&self) -> Result<Point> {
        let bad = |c: &str| HarnessError::Invalid(format!("row has an invalid {c}"));
        let method = Method::parse(self.require("method")?).ok_or_else(|| bad("method"))?;
        let context = Context::parse(self.require("context")?).ok_or_else(|| bad("context"))?;
        let boundary = Padding::parse(self.require("boundary_rule")?).ok_or_else(|| bad("boundary_rule"))?;
        let channel = self.require("channel")?;
        let channel = if let Some(d) = channel.strip_prefix("bsc:") {
            ChannelSource::Bsc(d.parse().map_err(|_| bad("channel"))?)
        } else if let Some(p) = channel.strip_prefix("file:") {
            ChannelSource::File(PathBuf::from(p))
        } else {
            return Err(bad("channel"));
        };
        let mut point = Point {
            method,
            context,
            arch: Vec::new(),
            epochs: 0,
            batch_size: 0,
            learning_rate: 0.0,
            boundary,
            channel,
            prune: self.parse("prune_dominated")?,
            bound_delta: self.parse("bound_delta")?,
        };
        if method == Method::Ndude {
            point.arch = parse_arch(self.require("arch")?).ok_or_else(|| bad("arch"))?;
            point.epochs = self.parse("epochs")?;
            point.batch_size = self.parse("batch_size")?;
            point.learning_rate = self.parse("lr")?;
        }
        Ok(point)
    }

    pub fn dataset(&self) -> Result<Dataset> {
        Dataset::parse(self.require("dataset")?).ok_or_else(|| HarnessError::Invalid("row has an invalid dataset".into()))
    }

    pub fn seed(&self) -> Result<u64> {
        self.parse("seed")
    }
}

pub fn read_csv<R: io::Read>(input: R) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    r.records()
        .map(|f| Ok(CsvRow { headers: headers.clone(), fields: f? }))
        .collect()
}

pub fn read_csv_file(path: &Path) -> Result<Vec<CsvRow>> {
    read_csv(io::Cursor::new(read_file(path)?))
}

/// Re-executes the configuration a row describes.
pub fn rerun_row(row: &CsvRow) -> Result<Record> {
    let point = row.point()?;
    let id = row.require("config_id")?;
    if point.config_id() != id {
        return Err(HarnessError::Invalid(format!("row knobs hash to {}, not {id}", point.config_id())));
    }
    Ok(run_point(&point, &row.dataset()?, row.seed()?))
}
