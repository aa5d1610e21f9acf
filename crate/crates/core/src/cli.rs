//! `hoopsnet` command line.
//!
//! Settings are layered: built-in defaults, then a JSON file given with `--config`,
//! then command-line flags. Every output carries a config hash and the base seed.
//! The hash covers the resolved settings and the contents (not paths) of the input
//! files, so identical runs from different directories stamp identical bytes.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::centrality::{low_key_leader_strengths, CentralityTable, PageRankParams};
use crate::embedding::{node2vec, EmbeddingMatrix, TrainConfig, WalkConfig};
use crate::error::{Error, Result};
use crate::glm::FitOptions;
use crate::graph::WeightedDigraph;
use crate::ingest::{self, BlockWeight, Phase, DEFAULT_TOURNAMENT_START_DAY};
use crate::linkpred::{self, BlockingFilters, CandidatePairs, ExperimentConfig, ExperimentReport};
use crate::ranking::{self, ChangeDirection, DEFAULT_QUANTILES, DEFAULT_THRESHOLD};
use crate::report::{self, fmt_sig, Bar, RunMeta};
use crate::seed::{derive_seed, STREAM_SHUFFLE};
use crate::synth::{self, PlantedAffinityModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DirectionArg {
    /// Previous season into the analysed one.
    Prev,
    /// Analysed season into the next one.
    Next,
}

impl From<DirectionArg> for ChangeDirection {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::Prev => ChangeDirection::PrevToCurrent,
            DirectionArg::Next => ChangeDirection::CurrentToNext,
        }
    }
}

/// Fully resolved settings for one run. Also the schema of `--config` files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub games: Option<PathBuf>,
    pub rankings: Option<PathBuf>,
    pub blocks: Option<PathBuf>,
    pub passes: Option<PathBuf>,
    pub edges: Option<PathBuf>,
    pub pairs: Option<PathBuf>,
    pub tournament: Option<PathBuf>,

    pub season: Option<i32>,
    pub game: Option<String>,
    pub phase: Phase,
    pub tournament_start_day: i32,
    pub quarters: Option<String>,
    pub later_quarters: String,
    pub block_weight: BlockWeight,
    pub include_self: bool,
    pub require_next_season: bool,
    pub exclude_early_edges: bool,
    pub pagerank: PageRankParams,

    pub quantiles: usize,
    pub threshold: f64,
    pub direction: DirectionArg,

    pub p: f64,
    pub q: f64,
    pub walk_length: usize,
    pub walks: usize,
    /// Unset means the per-experiment default.
    pub dims: Option<usize>,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub lr_initial: f64,
    pub lr_final: f64,
    pub iterations: usize,
    pub shuffle_labels: bool,
    /// Coefficient norm treated as separation in per-iteration fits.
    pub separation_bound: f64,

    pub focus: Option<String>,
    pub include_focus: bool,
    pub synth: PlantedAffinityModel,

    pub seed: u64,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let walk = WalkConfig::default();
        let train = TrainConfig::default();
        RunConfig {
            games: None,
            rankings: None,
            blocks: None,
            passes: None,
            edges: None,
            pairs: None,
            tournament: None,
            season: None,
            game: None,
            phase: Phase::All,
            tournament_start_day: DEFAULT_TOURNAMENT_START_DAY,
            quarters: None,
            later_quarters: "2-4,ot".into(),
            block_weight: BlockWeight::Raw,
            include_self: true,
            require_next_season: false,
            exclude_early_edges: false,
            pagerank: PageRankParams::default(),
            quantiles: DEFAULT_QUANTILES,
            threshold: DEFAULT_THRESHOLD,
            direction: DirectionArg::Prev,
            p: walk.p,
            q: walk.q,
            walk_length: walk.walk_length,
            walks: walk.walks_per_node,
            dims: None,
            window: train.window,
            negatives: train.negative_samples,
            epochs: train.epochs,
            lr_initial: train.lr_initial,
            lr_final: train.lr_final,
            iterations: 100,
            shuffle_labels: false,
            separation_bound: ExperimentConfig::default_fit().separation_bound,
            focus: None,
            include_focus: false,
            synth: PlantedAffinityModel::default(),
            seed: 0,
            threads: None,
            out: None,
            format: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        if !path.exists() {
            return Err(Error::MissingInput(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Schema {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    fn walk_config(&self) -> WalkConfig {
        WalkConfig {
            p: self.p,
            q: self.q,
            walk_length: self.walk_length,
            walks_per_node: self.walks,
            seed: 0,
        }
    }

    fn train_config(&self, default_dims: usize) -> TrainConfig {
        TrainConfig {
            dimensions: self.dims.unwrap_or(default_dims),
            window: self.window,
            negative_samples: self.negatives,
            epochs: self.epochs,
            lr_initial: self.lr_initial,
            lr_final: self.lr_final,
            seed: 0,
        }
    }

    fn input_paths(&self) -> [(&'static str, &Option<PathBuf>); 7] {
        [
            ("games", &self.games),
            ("rankings", &self.rankings),
            ("blocks", &self.blocks),
            ("passes", &self.passes),
            ("edges", &self.edges),
            ("pairs", &self.pairs),
            ("tournament", &self.tournament),
        ]
    }

    /// Content digests of the configured input files, keyed by kind.
    pub fn input_digests(&self) -> Result<BTreeMap<&'static str, String>> {
        let mut inputs = BTreeMap::new();
        for (name, path) in self.input_paths() {
            if let Some(p) = path {
                inputs.insert(name, file_digest(p)?);
            }
        }
        Ok(inputs)
    }

    /// Settings that affect results: no paths, thread count or output format.
    pub fn location_free(&self) -> RunConfig {
        RunConfig {
            games: None,
            rankings: None,
            blocks: None,
            passes: None,
            edges: None,
            pairs: None,
            tournament: None,
            out: None,
            threads: None,
            format: None,
            ..self.clone()
        }
    }

    /// Hash of the location-free settings plus input digests, and the base seed.
    pub fn provenance(&self) -> Result<RunMeta> {
        let inputs = self.input_digests()?;
        Ok(RunMeta::new(
            report::config_hash(&(self.location_free(), inputs)),
            self.seed,
        ))
    }
}

fn file_digest(path: &Path) -> Result<String> {
    if !path.exists() {
        return Err(Error::MissingInput(path.to_path_buf()));
    }
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(Sha256::digest(&bytes)[..8]
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect())
}

#[derive(Debug, Parser)]
#[command(
    name = "hoopsnet",
    version,
    about = "Network analytics for basketball interaction data"
)]
pub struct Cli {
    /// JSON settings file; flags take precedence over it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed for every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true, env = "HOOPSNET_THREADS")]
    threads: Option<usize>,
    /// Output directory, created if missing.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// More log output on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Network construction.
    #[command(subcommand)]
    Network(NetworkCommand),
    /// CON scores and reversed-edge PageRank.
    Centrality(CentralityArgs),
    /// Low-key leader strengths.
    Lkl(CentralityArgs),
    /// Strength quantiles against ranking changes.
    Quantiles(QuantileArgs),
    /// node2vec embeddings of a network.
    Embed(EmbedCommandArgs),
    /// Repeated link-prediction experiments.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
    /// Cosine similarity from one node to all others.
    SimilarityReport(SimilarityArgs),
    /// Planted-partition synthetic network and future-link pairs.
    Synth(SynthArgs),
}

#[derive(Debug, Subcommand)]
enum NetworkCommand {
    /// Build a network and dump it as an edge list.
    Build(NetworkArgs),
}

#[derive(Debug, Subcommand)]
enum ExperimentCommand {
    /// Tournament matchups from regular-season team embeddings.
    Matchups(MatchupArgs),
    /// Next-season blocks from player embeddings.
    Blocks(BlockArgs),
    /// Later-quarter passes from early-quarter region embeddings.
    Passes(PassArgs),
    /// Labelled pairs from a file over an edge-list network.
    Pairs(PairArgs),
}

/// Network source: exactly one of `--games`, `--blocks`, `--passes`, `--edges`.
#[derive(Debug, Args)]
struct NetworkArgs {
    #[arg(long)]
    games: Option<PathBuf>,
    #[arg(long)]
    blocks: Option<PathBuf>,
    #[arg(long)]
    passes: Option<PathBuf>,
    /// Edge-list CSV as written by `network build`.
    #[arg(long)]
    edges: Option<PathBuf>,
    #[arg(long)]
    season: Option<i32>,
    #[arg(long)]
    game: Option<String>,
    #[arg(long, value_enum)]
    phase: Option<Phase>,
    /// First postseason day number.
    #[arg(long)]
    tournament_start_day: Option<i32>,
    /// Quarter selection such as `1`, `2-4,ot`.
    #[arg(long)]
    quarters: Option<String>,
    #[arg(long, value_enum)]
    block_weight: Option<BlockWeight>,
}

#[derive(Debug, Args)]
struct CentralityArgs {
    #[command(flatten)]
    network: NetworkArgs,
    #[arg(long, value_parser = clap::value_parser!(bool))]
    include_self: Option<bool>,
}

#[derive(Debug, Args)]
struct QuantileArgs {
    #[command(flatten)]
    network: NetworkArgs,
    #[arg(long)]
    rankings: Option<PathBuf>,
    #[arg(long)]
    quantiles: Option<usize>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long, value_enum)]
    direction: Option<DirectionArg>,
    #[arg(long, value_parser = clap::value_parser!(bool))]
    include_self: Option<bool>,
}

#[derive(Debug, Args)]
struct EmbedArgs {
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    dims: Option<usize>,
    /// Walks per node.
    #[arg(long)]
    walks: Option<usize>,
    #[arg(long)]
    walk_length: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    negatives: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
}

#[derive(Debug, Args)]
struct EmbedCommandArgs {
    #[command(flatten)]
    network: NetworkArgs,
    #[command(flatten)]
    embed: EmbedArgs,
}

#[derive(Debug, Args)]
struct IterationArgs {
    #[arg(long)]
    iterations: Option<usize>,
    /// Permute the outcome labels (null control).
    #[arg(long, num_args = 0..=1, default_missing_value = "true", value_parser = clap::value_parser!(bool))]
    shuffle_labels: Option<bool>,
    /// Coefficient norm treated as separation.
    #[arg(long)]
    separation_bound: Option<f64>,
}

#[derive(Debug, Args)]
struct MatchupArgs {
    #[command(flatten)]
    network: NetworkArgs,
    /// Postseason games file; defaults to games on or after the start day in `--games`.
    #[arg(long)]
    tournament: Option<PathBuf>,
    #[command(flatten)]
    embed: EmbedArgs,
    #[command(flatten)]
    iter: IterationArgs,
}

#[derive(Debug, Args)]
struct BlockArgs {
    #[command(flatten)]
    network: NetworkArgs,
    /// Keep only players who also appear in the next season.
    #[arg(long, num_args = 0..=1, default_missing_value = "true", value_parser = clap::value_parser!(bool))]
    require_next_season: Option<bool>,
    #[command(flatten)]
    embed: EmbedArgs,
    #[command(flatten)]
    iter: IterationArgs,
}

#[derive(Debug, Args)]
struct PassArgs {
    #[command(flatten)]
    network: NetworkArgs,
    /// Quarters whose edges are the outcomes.
    #[arg(long)]
    later_quarters: Option<String>,
    /// Drop pairs already connected in the embedding quarters.
    #[arg(long, num_args = 0..=1, default_missing_value = "true", value_parser = clap::value_parser!(bool))]
    exclude_early_edges: Option<bool>,
    #[command(flatten)]
    embed: EmbedArgs,
    #[command(flatten)]
    iter: IterationArgs,
}

#[derive(Debug, Args)]
struct PairArgs {
    #[command(flatten)]
    network: NetworkArgs,
    /// `source_label,target_label,label` CSV.
    #[arg(long)]
    pairs: Option<PathBuf>,
    #[command(flatten)]
    embed: EmbedArgs,
    #[command(flatten)]
    iter: IterationArgs,
}

#[derive(Debug, Args)]
struct SimilarityArgs {
    #[command(flatten)]
    network: NetworkArgs,
    /// Label of the node to compare against.
    #[arg(long)]
    focus: Option<String>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true", value_parser = clap::value_parser!(bool))]
    include_focus: Option<bool>,
    #[command(flatten)]
    embed: EmbedArgs,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    communities: Option<usize>,
    #[arg(long)]
    p_in: Option<f64>,
    #[arg(long)]
    p_out: Option<f64>,
    /// Odds multiplier for same-community future links.
    #[arg(long)]
    bias: Option<f64>,
    /// Future-link probability across communities.
    #[arg(long)]
    base_prob: Option<f64>,
}

macro_rules! set {
    ($cfg:expr, $($field:ident),+ ; $src:expr) => {
        $( if let Some(v) = &$src.$field { $cfg.$field = v.clone().into(); } )+
    };
}

impl NetworkArgs {
    fn apply(&self, c: &mut RunConfig) {
        for (flag, slot) in [
            (&self.games, &mut c.games),
            (&self.blocks, &mut c.blocks),
            (&self.passes, &mut c.passes),
            (&self.edges, &mut c.edges),
        ] {
            if flag.is_some() {
                *slot = flag.clone();
            }
        }
        if self.season.is_some() {
            c.season = self.season;
        }
        if self.game.is_some() {
            c.game = self.game.clone();
        }
        if self.quarters.is_some() {
            c.quarters = self.quarters.clone();
        }
        set!(c, phase, tournament_start_day, block_weight; self);
    }
}

impl EmbedArgs {
    fn apply(&self, c: &mut RunConfig) {
        set!(c, p, q, walks, walk_length, window, negatives, epochs; self);
        if self.dims.is_some() {
            c.dims = self.dims;
        }
    }
}

impl IterationArgs {
    fn apply(&self, c: &mut RunConfig) {
        set!(c, iterations, shuffle_labels, separation_bound; self);
    }
}

impl Command {
    fn apply(&self, c: &mut RunConfig) {
        match self {
            Command::Network(NetworkCommand::Build(a)) => a.apply(c),
            Command::Centrality(a) | Command::Lkl(a) => {
                a.network.apply(c);
                set!(c, include_self; a);
            }
            Command::Quantiles(a) => {
                a.network.apply(c);
                if a.rankings.is_some() {
                    c.rankings = a.rankings.clone();
                }
                set!(c, quantiles, threshold, direction, include_self; a);
            }
            Command::Embed(a) => {
                a.network.apply(c);
                a.embed.apply(c);
            }
            Command::Experiment(e) => match e {
                ExperimentCommand::Matchups(a) => {
                    a.network.apply(c);
                    a.embed.apply(c);
                    a.iter.apply(c);
                    if a.tournament.is_some() {
                        c.tournament = a.tournament.clone();
                    }
                }
                ExperimentCommand::Blocks(a) => {
                    a.network.apply(c);
                    a.embed.apply(c);
                    a.iter.apply(c);
                    set!(c, require_next_season; a);
                }
                ExperimentCommand::Passes(a) => {
                    a.network.apply(c);
                    a.embed.apply(c);
                    a.iter.apply(c);
                    set!(c, later_quarters, exclude_early_edges; a);
                }
                ExperimentCommand::Pairs(a) => {
                    a.network.apply(c);
                    a.embed.apply(c);
                    a.iter.apply(c);
                    if a.pairs.is_some() {
                        c.pairs = a.pairs.clone();
                    }
                }
            },
            Command::SimilarityReport(a) => {
                a.network.apply(c);
                a.embed.apply(c);
                if a.focus.is_some() {
                    c.focus = a.focus.clone();
                }
                set!(c, include_focus; a);
            }
            Command::Synth(a) => {
                let m = &mut c.synth;
                if let Some(v) = a.nodes {
                    m.num_nodes = v;
                }
                if let Some(v) = a.communities {
                    m.num_communities = v;
                }
                if let Some(v) = a.p_in {
                    m.p_in = v;
                }
                if let Some(v) = a.p_out {
                    m.p_out = v;
                }
                if let Some(v) = a.bias {
                    m.future_link_bias = v;
                }
                if let Some(v) = a.base_prob {
                    m.future_base_prob = v;
                }
            }
        }
    }
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .try_init();
    match run(cli) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.exit_code() == 1 {
                eprintln!("run with --help for usage");
            }
            e.exit_code()
        }
    }
}

pub fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut c = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        c.seed = s;
    }
    if cli.threads.is_some() {
        c.threads = cli.threads;
    }
    if cli.out.is_some() {
        c.out = cli.out.clone();
    }
    if cli.format.is_some() {
        c.format = cli.format;
    }
    cli.command.apply(&mut c);
    Ok(c)
}

fn run(cli: Cli) -> Result<String> {
    let cfg = resolve_config(&cli)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        if n == 0 {
            return Err(Error::invalid("--threads must be positive"));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::Numerical(format!("cannot start worker pool: {e}")))?;
    pool.install(|| dispatch(&cli.command, &cfg))
}

struct Output<'a> {
    dir: &'a Path,
    meta: RunMeta,
}

impl Output<'_> {
    fn write(&self, stem: &str, format: Format, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(format!("{stem}.{}", format.ext()));
        report::write_file(&path, bytes)?;
        Ok(path)
    }

    fn comments(&self) -> Vec<String> {
        self.meta.comment_lines()
    }
}

#[derive(Serialize)]
struct JsonDoc<'a, T: Serialize> {
    meta: &'a RunMeta,
    #[serde(flatten)]
    body: T,
}

fn json<T: Serialize>(meta: &RunMeta, body: T) -> Result<Vec<u8>> {
    report::to_json_pretty(&JsonDoc { meta, body })
}

fn unsupported(command: &str, format: Format) -> Error {
    Error::invalid(format!("`{command}` cannot write {} output", format.ext()))
}

fn dispatch(command: &Command, cfg: &RunConfig) -> Result<String> {
    let dir = cfg
        .out
        .as_deref()
        .ok_or_else(|| Error::invalid("missing --out DIR"))?;
    let meta = cfg.provenance()?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let out = Output { dir, meta };
    match command {
        Command::Network(NetworkCommand::Build(_)) => network_build(cfg, &out),
        Command::Centrality(_) => centrality(cfg, &out, false),
        Command::Lkl(_) => centrality(cfg, &out, true),
        Command::Quantiles(_) => quantiles(cfg, &out),
        Command::Embed(_) => embed(cfg, &out),
        Command::Experiment(e) => experiment(e, cfg, &out),
        Command::SimilarityReport(_) => similarity(cfg, &out),
        Command::Synth(_) => synth_cmd(cfg, &out),
    }
}

fn require<'a, T>(value: &'a Option<T>, flag: &str) -> Result<&'a T> {
    value
        .as_ref()
        .ok_or_else(|| Error::invalid(format!("missing required {flag}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NetworkKind {
    Adversarial,
    Blocking,
    Passing,
    EdgeList,
}

impl NetworkKind {
    /// Embedding width used when `--dims` is not given.
    fn default_dims(self) -> usize {
        match self {
            NetworkKind::Adversarial => 128,
            NetworkKind::Blocking => 10,
            NetworkKind::Passing | NetworkKind::EdgeList => 16,
        }
    }
}

fn network_kind(cfg: &RunConfig) -> Result<NetworkKind> {
    let given: Vec<NetworkKind> = [
        (cfg.games.is_some(), NetworkKind::Adversarial),
        (cfg.blocks.is_some(), NetworkKind::Blocking),
        (cfg.passes.is_some(), NetworkKind::Passing),
        (cfg.edges.is_some(), NetworkKind::EdgeList),
    ]
    .into_iter()
    .filter_map(|(set, k)| set.then_some(k))
    .collect();
    match given[..] {
        [k] => Ok(k),
        [] => Err(Error::invalid(
            "need one of --games, --blocks, --passes, --edges",
        )),
        _ => Err(Error::invalid(
            "give only one of --games, --blocks, --passes, --edges",
        )),
    }
}

/// Builds the configured network; `phase` and `quarters` override the configured ones.
fn load_network(
    cfg: &RunConfig,
    kind: NetworkKind,
    phase: Option<Phase>,
    default_quarters: &str,
) -> Result<WeightedDigraph> {
    let g = match kind {
        NetworkKind::Adversarial => {
            let season = *require(&cfg.season, "--season")?;
            let games = ingest::load_games(require(&cfg.games, "--games")?)?;
            let selected = ingest::select_games(
                &games,
                season,
                phase.unwrap_or(cfg.phase),
                cfg.tournament_start_day,
            );
            ingest::build_adversarial_network(selected, season)
        }
        NetworkKind::Blocking => {
            let season = *require(&cfg.season, "--season")?;
            let blocks = ingest::load_blocks(require(&cfg.blocks, "--blocks")?)?;
            ingest::build_blocking_network(&blocks, season, cfg.block_weight)
        }
        NetworkKind::Passing => {
            let game = require(&cfg.game, "--game")?;
            let passes = ingest::load_passes(require(&cfg.passes, "--passes")?)?;
            let quarters =
                ingest::parse_quarters(cfg.quarters.as_deref().unwrap_or(default_quarters))?;
            ingest::build_passing_network(&passes, game, &quarters)?
        }
        NetworkKind::EdgeList => WeightedDigraph::load_edge_list(require(&cfg.edges, "--edges")?)?,
    };
    if g.num_nodes() == 0 {
        return Err(Error::Data("selected network has no nodes".into()));
    }
    Ok(g)
}

fn network_build(cfg: &RunConfig, out: &Output) -> Result<String> {
    let kind = network_kind(cfg)?;
    let g = load_network(cfg, kind, None, "1-4,ot")?;
    let format = cfg.format.unwrap_or(Format::Csv);
    let bytes = match format {
        Format::Csv => {
            let mut buf = Vec::new();
            g.write_edge_list(&mut buf, &out.comments())?;
            buf
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Edge<'a> {
                source: &'a str,
                target: &'a str,
                weight: f64,
            }
            #[derive(Serialize)]
            struct Body<'a> {
                nodes: &'a [String],
                edges: Vec<Edge<'a>>,
            }
            let edges = g
                .edges()
                .map(|(u, v, w)| Edge {
                    source: g.label(u),
                    target: g.label(v),
                    weight: w,
                })
                .collect();
            json(
                &out.meta,
                Body {
                    nodes: g.labels(),
                    edges,
                },
            )?
        }
        Format::Svg => return Err(unsupported("network build", format)),
    };
    let path = out.write("network", format, &bytes)?;
    Ok(format!(
        "network: {} nodes, {} edges -> {}",
        g.num_nodes(),
        g.num_edges(),
        path.display()
    ))
}

fn centrality_table(cfg: &RunConfig) -> Result<CentralityTable> {
    let kind = network_kind(cfg)?;
    let g = load_network(cfg, kind, None, "1-4,ot")?;
    low_key_leader_strengths(&g, &cfg.pagerank, cfg.include_self)
}

fn centrality(cfg: &RunConfig, out: &Output, with_lkl: bool) -> Result<String> {
    let table = centrality_table(cfg)?;
    let format = cfg.format.unwrap_or(Format::Csv);
    let (stem, name) = if with_lkl {
        ("lkl", "lkl")
    } else {
        ("centrality", "centrality")
    };
    let bytes = match format {
        Format::Csv if with_lkl => report::csv_bytes(
            &out.comments(),
            &CentralityTable::CSV_HEADER,
            &table.csv_rows(),
        )?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = table
                .csv_rows()
                .into_iter()
                .map(|r| r[..3].to_vec())
                .collect();
            report::csv_bytes(&out.comments(), &CentralityTable::CSV_HEADER[..3], &rows)?
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Body<'a> {
                lkl_range: Option<(f64, f64)>,
                rows: &'a CentralityTable,
            }
            json(
                &out.meta,
                Body {
                    lkl_range: table.lkl_range(),
                    rows: &table,
                },
            )?
        }
        Format::Svg => {
            let bars: Vec<Bar> = table
                .rows
                .iter()
                .map(|r| Bar {
                    label: r.label.clone(),
                    value: if with_lkl { r.lkl } else { r.pagerank },
                    highlight: with_lkl && r.lkl > 0.0,
                })
                .collect();
            let (title, y) = if with_lkl {
                ("Low-key leader strength", "lkl")
            } else {
                ("Reversed-edge PageRank", "pagerank")
            };
            report::bar_chart_svg(title, y, &bars, &out.comments()).into_bytes()
        }
    };
    let path = out.write(stem, format, &bytes)?;
    let range = match table.lkl_range() {
        Some((lo, hi)) if with_lkl => {
            format!(", lkl range [{}, {}]", fmt_sig(lo, 6), fmt_sig(hi, 6))
        }
        _ => String::new(),
    };
    Ok(format!(
        "{name}: {} nodes{range} -> {}",
        table.rows.len(),
        path.display()
    ))
}

fn quantiles(cfg: &RunConfig, out: &Output) -> Result<String> {
    if network_kind(cfg)? != NetworkKind::Adversarial {
        return Err(Error::invalid("quantiles needs --games"));
    }
    let season = *require(&cfg.season, "--season")?;
    let table = centrality_table(cfg)?;
    let rankings = ingest::load_rankings(require(&cfg.rankings, "--rankings")?)?;
    let direction: ChangeDirection = cfg.direction.into();
    let (from, to) = match direction {
        ChangeDirection::PrevToCurrent => (season - 1, season),
        ChangeDirection::CurrentToNext => (season, season + 1),
    };
    let changes = ranking::rank_changes(
        &ranking::season_ranks(&rankings, from),
        &ranking::season_ranks(&rankings, to),
    );
    if changes.changes.is_empty() {
        return Err(Error::Data(format!(
            "no team is ranked in both {from} and {to}"
        )));
    }
    let lkl: BTreeMap<String, f64> = table
        .rows
        .iter()
        .map(|r| (r.label.clone(), r.lkl))
        .collect();
    let rep = ranking::quantile_report(&lkl, &changes.changes, cfg.quantiles, direction)?;
    let check = ranking::hypothesis_check(&rep, cfg.threshold);
    let format = cfg.format.unwrap_or(Format::Csv);
    let mut comments = out.comments();
    comments.push(format!("predicate: {}", check.predicate));
    comments.push(format!("passed={} total={}", check.passed, check.total));
    let bytes = match format {
        Format::Csv => report::csv_bytes(
            &comments,
            &ranking::QUANTILE_CSV_HEADER,
            &ranking::quantile_csv_rows(&rep, &check),
        )?,
        Format::Json => {
            #[derive(Serialize)]
            struct Body<'a> {
                season: i32,
                report: &'a ranking::QuantileReport,
                check: &'a ranking::HypothesisCheck,
            }
            json(
                &out.meta,
                Body {
                    season,
                    report: &rep,
                    check: &check,
                },
            )?
        }
        Format::Svg => {
            let bars: Vec<Bar> = rep
                .quantiles
                .iter()
                .zip(&check.passes)
                .map(|(q, &pass)| Bar {
                    label: format!("Q{}", q.index + 1),
                    value: q.mean_rank_change,
                    highlight: pass,
                })
                .collect();
            report::bar_chart_svg(
                &format!("Mean rank change by strength quantile, {season}"),
                "mean rank change",
                &bars,
                &comments,
            )
            .into_bytes()
        }
    };
    let path = out.write("quantiles", format, &bytes)?;
    Ok(format!(
        "quantiles: season {season}, {} of {} quantiles pass -> {}",
        check.passed,
        check.total,
        path.display()
    ))
}

fn embedding_for(
    cfg: &RunConfig,
    g: &WeightedDigraph,
    kind: NetworkKind,
) -> Result<EmbeddingMatrix> {
    let (walk_seed, train_seed) = linkpred::iteration_seeds(cfg.seed, 0);
    let walk = WalkConfig {
        seed: walk_seed,
        ..cfg.walk_config()
    };
    let train = TrainConfig {
        seed: train_seed,
        ..cfg.train_config(kind.default_dims())
    };
    node2vec(g, &walk, &train)
}

fn embed(cfg: &RunConfig, out: &Output) -> Result<String> {
    let kind = network_kind(cfg)?;
    let g = load_network(cfg, kind, None, "1-4,ot")?;
    let emb = embedding_for(cfg, &g, kind)?;
    let format = cfg.format.unwrap_or(Format::Csv);
    let bytes = match format {
        Format::Csv => emb.csv_bytes(g.labels(), &out.comments())?,
        Format::Json => {
            #[derive(Serialize)]
            struct Body<'a> {
                dims: usize,
                embeddings: BTreeMap<&'a str, &'a [f64]>,
            }
            let embeddings = (0..g.num_nodes())
                .map(|u| (g.label(u), emb.row(u)))
                .collect();
            json(
                &out.meta,
                Body {
                    dims: emb.dims(),
                    embeddings,
                },
            )?
        }
        Format::Svg => return Err(unsupported("embed", format)),
    };
    let path = out.write("embeddings", format, &bytes)?;
    Ok(format!(
        "embed: {} nodes x {} dims -> {}",
        emb.num_rows(),
        emb.dims(),
        path.display()
    ))
}

fn experiment(which: &ExperimentCommand, cfg: &RunConfig, out: &Output) -> Result<String> {
    let (name, g, kind, candidates) = match which {
        ExperimentCommand::Matchups(_) => {
            if network_kind(cfg)? != NetworkKind::Adversarial {
                return Err(Error::invalid("experiment matchups needs --games"));
            }
            let season = *require(&cfg.season, "--season")?;
            let g = load_network(cfg, NetworkKind::Adversarial, Some(Phase::Regular), "")?;
            let matchups = match &cfg.tournament {
                Some(path) => {
                    ingest::tournament_matchups(&ingest::load_games(path)?, season, i32::MIN)
                }
                None => {
                    let games = ingest::load_games(require(&cfg.games, "--games")?)?;
                    ingest::tournament_matchups(&games, season, cfg.tournament_start_day)
                }
            };
            let c = linkpred::matchup_candidates(&g, &matchups)?;
            ("matchups", g, NetworkKind::Adversarial, c)
        }
        ExperimentCommand::Blocks(_) => {
            if network_kind(cfg)? != NetworkKind::Blocking {
                return Err(Error::invalid("experiment blocks needs --blocks"));
            }
            let season = *require(&cfg.season, "--season")?;
            let g = load_network(cfg, NetworkKind::Blocking, None, "")?;
            let blocks = ingest::load_blocks(require(&cfg.blocks, "--blocks")?)?;
            let filters = BlockingFilters {
                require_next_season: cfg.require_next_season,
            };
            let c = linkpred::blocking_candidates(&g, &blocks, season + 1, filters);
            ("blocks", g, NetworkKind::Blocking, c)
        }
        ExperimentCommand::Passes(_) => {
            if network_kind(cfg)? != NetworkKind::Passing {
                return Err(Error::invalid("experiment passes needs --passes"));
            }
            let early = load_network(cfg, NetworkKind::Passing, None, "1")?;
            let later_cfg = RunConfig {
                quarters: Some(cfg.later_quarters.clone()),
                ..cfg.clone()
            };
            let later = load_network(&later_cfg, NetworkKind::Passing, None, "")?;
            let c = linkpred::passing_candidates(&early, &later, cfg.exclude_early_edges)?;
            ("passes", early, NetworkKind::Passing, c)
        }
        ExperimentCommand::Pairs(_) => {
            if network_kind(cfg)? != NetworkKind::EdgeList {
                return Err(Error::invalid("experiment pairs needs --edges"));
            }
            let g = load_network(cfg, NetworkKind::EdgeList, None, "")?;
            let path = require(&cfg.pairs, "--pairs")?;
            let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
            let c = synth::read_pairs(std::io::BufReader::new(file), path, &g, false)?;
            ("pairs", g, NetworkKind::EdgeList, c)
        }
    };
    let candidates: CandidatePairs = if cfg.shuffle_labels {
        candidates.shuffled_labels(derive_seed(cfg.seed, &[STREAM_SHUFFLE]))
    } else {
        candidates
    };
    let exp = ExperimentConfig {
        walk: cfg.walk_config(),
        train: cfg.train_config(kind.default_dims()),
        iterations: cfg.iterations,
        base_seed: cfg.seed,
        fit: FitOptions {
            separation_bound: cfg.separation_bound,
            ..ExperimentConfig::default_fit()
        },
    };
    let rep = linkpred::run_experiment(&g, &candidates, &exp)?;
    let format = cfg.format.unwrap_or(Format::Json);
    let bytes = experiment_output(name, cfg, &exp, &candidates, &rep, out, format)?;
    let path = out.write(&format!("experiment_{name}"), format, &bytes)?;
    let a = &rep.aggregate;
    Ok(format!(
        "experiment {name}: {} pairs, {} positive, median llr_p {}, {} significant, {} of {} iterations excluded -> {}",
        rep.pairs,
        rep.positives,
        fmt_sig(a.median_llr_p, 4),
        a.significant_dimensions,
        a.excluded,
        a.iterations,
        path.display()
    ))
}

fn experiment_output(
    name: &str,
    cfg: &RunConfig,
    exp: &ExperimentConfig,
    candidates: &CandidatePairs,
    rep: &ExperimentReport,
    out: &Output,
    format: Format,
) -> Result<Vec<u8>> {
    let a = &rep.aggregate;
    match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Echo<'a> {
                experiment: &'a str,
                inputs: BTreeMap<&'static str, String>,
                settings: &'a RunConfig,
                resolved: &'a ExperimentConfig,
            }
            #[derive(Serialize)]
            struct Body<'a> {
                config: Echo<'a>,
                dropped_inputs: &'a [String],
                #[serde(flatten)]
                report: &'a ExperimentReport,
            }
            let settings = cfg.location_free();
            json(
                &out.meta,
                Body {
                    config: Echo {
                        experiment: name,
                        inputs: cfg.input_digests()?,
                        settings: &settings,
                        resolved: exp,
                    },
                    dropped_inputs: &candidates.dropped,
                    report: rep,
                },
            )
        }
        Format::Csv => {
            let mut comments = out.comments();
            for (k, v) in &rep.table.pair_count {
                comments.push(format!("{k}={v}"));
            }
            comments.push(format!(
                "embedding_features={}",
                rep.table.embedding_features
            ));
            comments.push(format!("pseudo_r2={}", fmt_sig(rep.table.pseudo_r2, 10)));
            comments.push(format!("llr_p={}", fmt_sig(rep.table.llr_p, 10)));
            comments.push(format!(
                "significant_dimensions={}",
                rep.table.significant_dimensions
            ));
            comments.push(format!("excluded_iterations={}", a.excluded));
            let mut rows = vec![vec![
                "intercept".to_string(),
                fmt_sig(a.mean_coefficients[0], 10),
                String::new(),
                String::new(),
                String::new(),
            ]];
            for (j, (mean_p, median_p)) in
                a.mean_p_values.iter().zip(&a.median_p_values).enumerate()
            {
                rows.push(vec![
                    format!("f{j}"),
                    fmt_sig(a.mean_coefficients[j + 1], 10),
                    fmt_sig(*mean_p, 10),
                    fmt_sig(*median_p, 10),
                    (*median_p < linkpred::SIGNIFICANCE_LEVEL).to_string(),
                ]);
            }
            report::csv_bytes(
                &comments,
                &[
                    "feature",
                    "mean_coefficient",
                    "mean_p_value",
                    "median_p_value",
                    "significant",
                ],
                &rows,
            )
        }
        Format::Svg => {
            let bars: Vec<Bar> = a
                .median_p_values
                .iter()
                .enumerate()
                .map(|(j, &p)| Bar {
                    label: format!("f{j}"),
                    value: p,
                    highlight: p < linkpred::SIGNIFICANCE_LEVEL,
                })
                .collect();
            Ok(report::bar_chart_svg(
                &format!("Median p-value per feature ({name})"),
                "median p",
                &bars,
                &out.comments(),
            )
            .into_bytes())
        }
    }
}

fn similarity(cfg: &RunConfig, out: &Output) -> Result<String> {
    let kind = network_kind(cfg)?;
    let g = load_network(cfg, kind, None, "1-4,ot")?;
    let focus_label = require(&cfg.focus, "--focus")?;
    let focus = g
        .node_id(focus_label)
        .ok_or_else(|| Error::Data(format!("focus node `{focus_label}` is not in the network")))?;
    let emb = embedding_for(cfg, &g, kind)?;
    let rows = linkpred::node_similarity_report(&emb, g.labels(), focus, cfg.include_focus)?;
    let format = cfg.format.unwrap_or(Format::Csv);
    let bytes = match format {
        Format::Csv => {
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| vec![r.label.clone(), fmt_sig(r.similarity, 10)])
                .collect();
            let mut comments = out.comments();
            comments.push(format!("focus={focus_label}"));
            report::csv_bytes(&comments, &["label", "similarity"], &body)?
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Body<'a> {
                focus: &'a str,
                rows: &'a [linkpred::SimilarityRow],
            }
            json(
                &out.meta,
                Body {
                    focus: focus_label,
                    rows: &rows,
                },
            )?
        }
        Format::Svg => {
            let bars: Vec<Bar> = rows
                .iter()
                .map(|r| Bar {
                    label: r.label.clone(),
                    value: r.similarity,
                    highlight: false,
                })
                .collect();
            report::bar_chart_svg(
                &format!("Cosine similarity to {focus_label}"),
                "similarity",
                &bars,
                &out.comments(),
            )
            .into_bytes()
        }
    };
    let path = out.write("similarity", format, &bytes)?;
    Ok(format!(
        "similarity-report: {} rows for {focus_label} -> {}",
        rows.len(),
        path.display()
    ))
}

fn synth_cmd(cfg: &RunConfig, out: &Output) -> Result<String> {
    let format = cfg.format.unwrap_or(Format::Csv);
    if format != Format::Csv {
        return Err(unsupported("synth", format));
    }
    let model = PlantedAffinityModel {
        seed: cfg.seed,
        ..cfg.synth
    };
    let inst = synth::generate_planted(&model)?;
    let mut edges = Vec::new();
    inst.graph.write_edge_list(&mut edges, &out.comments())?;
    let edge_path = out.write("edges", Format::Csv, &edges)?;
    let mut pairs = Vec::new();
    synth::write_pairs(&mut pairs, &inst.graph, &inst.future, &out.comments())?;
    let pair_path = out.write("pairs", Format::Csv, &pairs)?;
    Ok(format!(
        "synth: {} nodes, {} edges, {} of {} pairs positive -> {}, {}",
        inst.graph.num_nodes(),
        inst.graph.num_edges(),
        inst.future.positives(),
        inst.future.len(),
        edge_path.display(),
        pair_path.display()
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"seed": 5, "quantiles": 4, "p": 2.0}"#).unwrap();
        let cli = Cli::try_parse_from([
            "hoopsnet",
            "--config",
            path.to_str().unwrap(),
            "quantiles",
            "--quantiles",
            "8",
        ])
        .unwrap();
        let c = resolve_config(&cli).unwrap();
        assert_eq!(c.seed, 5);
        assert_eq!(c.quantiles, 8);
        assert_eq!(c.p, 2.0);
        assert_eq!(c.threshold, DEFAULT_THRESHOLD);
    }

    #[test]
    fn unknown_config_key_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"sede": 5}"#).unwrap();
        assert_eq!(RunConfig::load(&path).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn provenance_ignores_output_location() {
        let a = RunConfig {
            out: Some("x".into()),
            ..Default::default()
        };
        let b = RunConfig {
            out: Some("y".into()),
            threads: Some(3),
            ..Default::default()
        };
        assert_eq!(a.provenance().unwrap(), b.provenance().unwrap());
        let c = RunConfig {
            seed: 1,
            ..Default::default()
        };
        assert_ne!(
            a.provenance().unwrap().config_hash,
            c.provenance().unwrap().config_hash
        );
    }
}
