//! Command-line surface: argument parsing, result serialization and run
//! statistics. Output is JSON Lines with a fixed key order, so runs are
//! byte-for-byte reproducible for fixed inputs and flags.

use std::collections::HashMap;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::index::{build_tctree, load_index, query_tctree, save_index, QueryAnswer};
use crate::miners::{
    brute_force_mine, count_metrics, tcfa, tcfi, tcs, MinerError, MiningResult,
    DEFAULT_CANDIDATE_CAP, DEFAULT_MAX_LEN,
};
use crate::model::{DatabaseNetwork, NetworkError, Pattern};
use crate::rational::Rational;
use crate::synth::{generate, SynthConfig, SynthError};
use crate::truss::{extract_communities, MaximalPatternTruss};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BAD_INPUT: i32 = 3;
pub const EXIT_GUARD: i32 = 4;
pub const EXIT_BAD_CONFIG: i32 = 5;

/// One mined or retrieved maximal pattern truss as a JSON Lines record.
#[derive(Debug, Serialize)]
pub struct ResultRecord {
    pub pattern: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub alpha: String,
    pub vertices: Vec<u32>,
    pub edges: Vec<(u32, u32)>,
    pub communities: Vec<Vec<u32>>,
    pub cohesion_min: String,
    pub cohesion_max: String,
}

#[derive(Debug, Serialize)]
struct StatsBody {
    np: u64,
    nv: u64,
    ne: u64,
    mptd_calls: u64,
    candidates_generated: u64,
    wall_ms: u128,
}

#[derive(Debug, Serialize)]
struct StatsRecord {
    stats: StatsBody,
}

#[derive(Debug, Serialize)]
struct RetrievedRecord {
    retrieved_nodes: u64,
}

/// Optional item label dictionary (`items.tsv`: `item_id<TAB>label`).
#[derive(Debug, Default)]
pub struct ItemLabels(HashMap<u32, String>);

impl ItemLabels {
    pub fn parse(src: &str) -> Result<Self, NetworkError> {
        let mut map = HashMap::new();
        for (idx, raw) in src.lines().enumerate() {
            let line = idx + 1;
            let text = raw.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            let Some((id, label)) = text.split_once('\t') else {
                return Err(NetworkError::Malformed {
                    line,
                    msg: "expected `item_id<TAB>label`".to_string(),
                });
            };
            let id: u32 = id.trim().parse().map_err(|_| NetworkError::Malformed {
                line,
                msg: format!("invalid item id: {id:?}"),
            })?;
            map.insert(id, label.to_string());
        }
        Ok(ItemLabels(map))
    }

    fn labels_for(&self, p: &Pattern) -> Option<Vec<String>> {
        if self.0.is_empty() {
            return None;
        }
        Some(
            p.items()
                .iter()
                .map(|i| self.0.get(i).cloned().unwrap_or_else(|| i.to_string()))
                .collect(),
        )
    }
}

pub fn result_record(
    pattern: &Pattern,
    alpha: Rational,
    truss: &MaximalPatternTruss,
    labels: &ItemLabels,
) -> ResultRecord {
    let communities = extract_communities(truss)
        .into_iter()
        .map(|c| c.vertices)
        .collect();
    let cohesion_min = truss.cohesion.values().min().copied().unwrap_or_default();
    let cohesion_max = truss.cohesion.values().max().copied().unwrap_or_default();
    ResultRecord {
        pattern: pattern.items().to_vec(),
        labels: labels.labels_for(pattern),
        alpha: alpha.to_decimal_string(),
        vertices: truss.vertices.clone(),
        edges: truss.edges.clone(),
        communities,
        cohesion_min: cohesion_min.to_decimal_string(),
        cohesion_max: cohesion_max.to_decimal_string(),
    }
}

/// Writes one record per truss in lexicographic pattern order, then an
/// optional stats record.
pub fn write_mining_result(
    w: &mut dyn Write,
    r: &MiningResult,
    labels: &ItemLabels,
    with_stats: bool,
) -> io::Result<()> {
    for (p, t) in &r.trusses {
        let record = result_record(p, r.alpha, t, labels);
        serde_json::to_writer(&mut *w, &record)?;
        writeln!(w)?;
    }
    if with_stats {
        let (np, nv, ne) = count_metrics(r);
        let record = StatsRecord {
            stats: StatsBody {
                np,
                nv,
                ne,
                mptd_calls: r.stats.mptd_calls,
                candidates_generated: r.stats.candidates_generated,
                wall_ms: r.stats.wall_ms,
            },
        };
        serde_json::to_writer(&mut *w, &record)?;
        writeln!(w)?;
    }
    Ok(())
}

/// Writes answer records in lexicographic pattern order followed by the
/// retrieved-node count.
pub fn write_query_answer(
    w: &mut dyn Write,
    a: &QueryAnswer,
    labels: &ItemLabels,
) -> io::Result<()> {
    for (p, t) in &a.trusses {
        let record = result_record(p, a.alpha, t, labels);
        serde_json::to_writer(&mut *w, &record)?;
        writeln!(w)?;
    }
    let record = RetrievedRecord {
        retrieved_nodes: a.retrieved_nodes,
    };
    serde_json::to_writer(&mut *w, &record)?;
    writeln!(w)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// CLI

#[derive(Debug, Parser)]
#[command(
    name = "themetruss",
    about = "Mine, index and query theme communities in database networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mine maximal pattern trusses from a database network
    Mine(MineArgs),
    /// Build or query a TC-Tree index
    #[command(subcommand)]
    Index(IndexCommand),
    /// Generate a synthetic database network
    Gen(GenArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Algo {
    Tcs,
    Tcfa,
    Tcfi,
    /// brute-force oracle; size-guarded, for verification only
    Brute,
}

#[derive(Debug, Args)]
pub struct MineArgs {
    #[arg(long, value_enum)]
    pub algo: Algo,
    /// cohesion threshold, exact fraction `a/b` or decimal
    #[arg(long)]
    pub alpha: String,
    /// TCS frequency pre-filter (strict `>`); ignored by other algorithms
    #[arg(long, default_value = "0")]
    pub epsilon: String,
    #[arg(long, default_value_t = DEFAULT_MAX_LEN)]
    pub max_len: usize,
    #[arg(long, default_value_t = DEFAULT_CANDIDATE_CAP)]
    pub candidate_cap: usize,
    #[arg(long)]
    pub edges: PathBuf,
    #[arg(long)]
    pub tx: PathBuf,
    /// optional item label dictionary
    #[arg(long)]
    pub items: Option<PathBuf>,
    /// output path; `-` for stdout
    #[arg(long, default_value = "-")]
    pub out: String,
    /// worker threads; 0 picks the rayon default
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// append a final stats record (NP, NV, NE, MPTD calls, wall ms)
    #[arg(long)]
    pub stats: bool,
}

#[derive(Debug, Subcommand)]
pub enum IndexCommand {
    /// Build a TC-Tree index file from a database network
    Build(IndexBuildArgs),
    /// Query an index file by pattern and threshold
    Query(IndexQueryArgs),
}

#[derive(Debug, Args)]
pub struct IndexBuildArgs {
    #[arg(long)]
    pub edges: PathBuf,
    #[arg(long)]
    pub tx: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct IndexQueryArgs {
    #[arg(long)]
    pub idx: PathBuf,
    /// comma-separated item ids, or `all` for the full item universe
    #[arg(long)]
    pub pattern: String,
    #[arg(long)]
    pub alpha: String,
    #[arg(long)]
    pub items: Option<PathBuf>,
    #[arg(long, default_value = "-")]
    pub out: String,
    /// original network files; when given, their fingerprint is checked
    /// against the one stored in the index
    #[arg(long)]
    pub edges: Option<PathBuf>,
    #[arg(long)]
    pub tx: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub vertices: u32,
    #[arg(long)]
    pub edges: u64,
    #[arg(long)]
    pub seeds: u32,
    #[arg(long)]
    pub items: u32,
    #[arg(long)]
    pub rng_seed: u64,
    #[arg(long, default_value_t = 0.10)]
    pub mutation_rate: f64,
    #[arg(long, default_value_t = 0.1)]
    pub tx_count_coeff: f64,
    #[arg(long, default_value_t = 0.13)]
    pub tx_len_coeff: f64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Miner(#[from] MinerError),
    #[error(transparent)]
    Index(#[from] crate::index::IndexError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Network(_) | CliError::Index(_) => EXIT_BAD_INPUT,
            CliError::Miner(MinerError::CandidateCapExceeded { .. }) => EXIT_GUARD,
            CliError::Miner(MinerError::GuardExceeded(_)) => EXIT_GUARD,
            CliError::Synth(_) => EXIT_BAD_CONFIG,
            CliError::Io(_) => 1,
        }
    }
}

fn parse_alpha(s: &str) -> Result<Rational, CliError> {
    s.parse()
        .map_err(|e| CliError::Usage(format!("--alpha/--epsilon: {e}")))
}

fn load_labels(path: &Option<PathBuf>) -> Result<ItemLabels, CliError> {
    match path {
        None => Ok(ItemLabels::default()),
        Some(p) => Ok(ItemLabels::parse(&fs::read_to_string(p)?)?),
    }
}

fn open_out(spec: &str) -> Result<Box<dyn Write>, CliError> {
    if spec == "-" {
        Ok(Box::new(io::stdout().lock()))
    } else {
        Ok(Box::new(io::BufWriter::new(fs::File::create(spec)?)))
    }
}

fn with_thread_pool<T: Send>(
    threads: usize,
    f: impl FnOnce() -> T + Send,
) -> Result<T, CliError> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    Ok(pool.install(f))
}

pub fn run_mine(args: &MineArgs) -> Result<(), CliError> {
    let alpha = parse_alpha(&args.alpha)?;
    let epsilon = parse_alpha(&args.epsilon)?;
    let g = DatabaseNetwork::load(&args.edges, &args.tx)?;
    let labels = load_labels(&args.items)?;
    let result: Result<MiningResult, MinerError> = with_thread_pool(args.threads, || {
        match args.algo {
            Algo::Tcs => tcs(&g, alpha, epsilon, args.max_len, args.candidate_cap),
            Algo::Tcfa => Ok(tcfa(&g, alpha)),
            Algo::Tcfi => Ok(tcfi(&g, alpha)),
            Algo::Brute => brute_force_mine(&g, alpha, args.max_len),
        }
    })?;
    let result = result?;
    let mut out = open_out(&args.out)?;
    write_mining_result(&mut out, &result, &labels, args.stats)?;
    out.flush()?;
    Ok(())
}

pub fn run_index_build(args: &IndexBuildArgs) -> Result<(), CliError> {
    let g = DatabaseNetwork::load(&args.edges, &args.tx)?;
    let tree = with_thread_pool(args.threads, || build_tctree(&g))?;
    let bytes = save_index(&tree)?;
    fs::write(&args.out, bytes)?;
    Ok(())
}

pub fn run_index_query(args: &IndexQueryArgs) -> Result<(), CliError> {
    let alpha = parse_alpha(&args.alpha)?;
    let bytes = fs::read(&args.idx)?;
    let tree = load_index(&bytes)?;
    if let (Some(edges), Some(tx)) = (&args.edges, &args.tx) {
        let g = DatabaseNetwork::load(edges, tx)?;
        if g.fingerprint() != tree.fingerprint {
            eprintln!(
                "warning: network files do not match the fingerprint stored in {}",
                args.idx.display()
            );
        }
    }
    let q = if args.pattern == "all" {
        // the full item universe: every item that can appear in the tree
        let max_item = max_item_in_tree(&tree);
        Pattern::new(0..=max_item.unwrap_or(0))
    } else {
        let mut items = Vec::new();
        for part in args.pattern.split(',') {
            let item: u32 = part.trim().parse().map_err(|_| {
                CliError::Usage(format!("--pattern: invalid item id {part:?}"))
            })?;
            items.push(item);
        }
        Pattern::new(items)
    };
    let labels = load_labels(&args.items)?;
    let answer = query_tctree(&tree, &q, alpha);
    let mut out = open_out(&args.out)?;
    write_query_answer(&mut out, &answer, &labels)?;
    out.flush()?;
    Ok(())
}

fn max_item_in_tree(t: &crate::index::TCTree) -> Option<u32> {
    // items only grow along root paths, so scanning every node's own item
    // is enough
    fn walk(nodes: &[crate::index::TCTreeNode], max: &mut Option<u32>) {
        for n in nodes {
            *max = Some(max.map_or(n.item, |m| m.max(n.item)));
            walk(&n.children, max);
        }
    }
    let mut max = None;
    walk(&t.children, &mut max);
    max
}

pub fn run_gen(args: &GenArgs) -> Result<(), CliError> {
    let cfg = SynthConfig {
        n_vertices: args.vertices,
        n_edges: args.edges,
        n_seeds: args.seeds,
        n_items: args.items,
        mutation_rate: args.mutation_rate,
        tx_count_coeff: args.tx_count_coeff,
        tx_len_coeff: args.tx_len_coeff,
        rng_seed: args.rng_seed,
    };
    let g = generate(&cfg)?;
    fs::create_dir_all(&args.out_dir)?;
    g.save(
        &args.out_dir.join("edges.tsv"),
        &args.out_dir.join("tx.tsv"),
    )?;
    Ok(())
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Mine(args) => run_mine(args),
        Command::Index(IndexCommand::Build(args)) => run_index_build(args),
        Command::Index(IndexCommand::Query(args)) => run_index_query(args),
        Command::Gen(args) => run_gen(args),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Transaction, TransactionDatabase};

    fn triangle() -> DatabaseNetwork {
        let d = TransactionDatabase::new(vec![Transaction::new([0, 1]), Transaction::new([0])]);
        DatabaseNetwork::from_parts(vec![(0, 1), (1, 2), (0, 2)], vec![d.clone(), d.clone(), d])
            .unwrap()
    }

    #[test]
    fn mine_records_are_deterministic_json_lines() {
        let g = triangle();
        let r = tcfi(&g, Rational::zero());
        let mut buf = Vec::new();
        write_mining_result(&mut buf, &r, &ItemLabels::default(), false).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), r.trusses.len());
        let first: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
        assert_eq!(first["pattern"], serde_json::json!([0]));
        assert_eq!(first["alpha"], "0");
        assert_eq!(first["cohesion_min"], "1");
    }

    #[test]
    fn stats_record_carries_metrics() {
        let g = triangle();
        let r = tcfi(&g, Rational::zero());
        let mut buf = Vec::new();
        write_mining_result(&mut buf, &r, &ItemLabels::default(), true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let last: serde_json::Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
        let (np, nv, ne) = count_metrics(&r);
        assert_eq!(last["stats"]["np"], np);
        assert_eq!(last["stats"]["nv"], nv);
        assert_eq!(last["stats"]["ne"], ne);
    }

    #[test]
    fn emitted_rationals_round_trip() {
        for r in [
            Rational::new(1, 2),
            Rational::new(1, 3),
            Rational::new(7, 8),
            Rational::from_int(2),
        ] {
            let s = r.to_decimal_string();
            assert_eq!(s.parse::<Rational>().unwrap(), r);
        }
    }

    #[test]
    fn labels_attach_when_dictionary_present() {
        let labels = ItemLabels::parse("0\talpha\n1\tbeta\n").unwrap();
        let g = triangle();
        let r = tcfi(&g, Rational::zero());
        let p = Pattern::new([0, 1]);
        let t = &r.trusses[&p];
        let record = result_record(&p, r.alpha, t, &labels);
        assert_eq!(record.labels, Some(vec!["alpha".to_string(), "beta".to_string()]));
    }
}
