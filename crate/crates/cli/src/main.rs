use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use im_meta_cli::harness::DatasetSection;
use im_meta_cli::{run_suite, write_records, SuiteConfig};

#[derive(Parser)]
#[command(
    name = "im-meta",
    version,
    about = "Influence maximization on partially observed networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one method for a number of trials.
    Run(Box<RunArgs>),
    /// Run a sweep described by a TOML file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the file's `out`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        append: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Edge-list file of the hidden graph.
    #[arg(
        long,
        conflicts_with = "synthetic",
        required_unless_present = "synthetic"
    )]
    dataset: Option<PathBuf>,
    /// Feature file matching `--dataset`.
    #[arg(long, requires = "dataset")]
    features: Option<PathBuf>,
    /// Synthetic graph, e.g. `n=300,d=32,markers=8,in=0.2,out=0.005`.
    #[arg(long)]
    synthetic: Option<String>,
    /// im-meta, im-meta-lr, im-meta-degree, rand, dfs, change or upper.
    #[arg(long, default_value = "im-meta")]
    method: String,
    #[arg(long = "queries", default_value_t = 15)]
    queries: usize,
    #[arg(long = "seeds", default_value_t = 5)]
    seeds: usize,
    /// ic or wc.
    #[arg(long, default_value = "ic")]
    model: String,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    /// IC activation probability.
    #[arg(long, default_value_t = 0.1)]
    p: f64,
    /// Monte-Carlo replicates for evaluation.
    #[arg(long, default_value_t = 20_000)]
    mc: usize,
    /// Monte-Carlo replicates for greedy selection (default: --mc).
    #[arg(long)]
    selection_mc: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Adam learning rate.
    #[arg(long)]
    learning_rate: Option<f64>,
    /// Sampled negatives per observed edge.
    #[arg(long)]
    neg_ratio: Option<f64>,
    #[arg(long)]
    h_cap: Option<usize>,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    /// Fraction of feature positions removed per node.
    #[arg(long, default_value_t = 0.0)]
    drop: f64,
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
    #[arg(long)]
    append: bool,
}

impl RunArgs {
    fn suite(&self) -> SuiteConfig {
        let dataset = DatasetSection {
            synthetic: self.synthetic.clone(),
            edges: self.dataset.clone(),
            features: self.features.clone(),
            name: None,
        };
        let mut s = SuiteConfig::single(dataset, &self.method);
        s.queries = vec![self.queries];
        s.seeds = vec![self.seeds];
        s.models = vec![self.model.clone()];
        s.alpha = vec![self.alpha];
        s.epsilon = vec![self.epsilon];
        s.drop = vec![self.drop];
        s.ic_probability = self.p;
        s.mc = self.mc;
        s.selection_mc = self.selection_mc;
        s.epochs = self.epochs;
        s.learning_rate = self.learning_rate;
        s.neg_ratio = self.neg_ratio;
        s.h_cap = self.h_cap;
        s.trials = self.trials;
        s.rng_seed = self.rng_seed;
        s.out = Some(self.out.clone());
        s
    }
}

fn execute(suite: &SuiteConfig, base: &Path, append: bool) -> im_meta_cli::Result<usize> {
    let spec = suite.dataset.spec(base)?;
    let data = spec.load(suite.rng_seed)?;
    log::info!(
        "{}: {} nodes, {} edges, d = {}",
        data.name,
        data.graph.node_count(),
        data.graph.edge_count(),
        data.features.dim()
    );
    let outcome = run_suite(suite, &data)?;
    let out = suite
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("results.csv"));
    write_records(&out, &outcome.records, append)?;
    println!(
        "{} rows written to {} ({} failed)",
        outcome.records.len(),
        out.display(),
        outcome.failures
    );
    Ok(outcome.failures)
}

fn dispatch(command: Command) -> im_meta_cli::Result<usize> {
    match command {
        Command::Run(args) => execute(&args.suite(), Path::new("."), args.append),
        Command::Sweep {
            config,
            out,
            append,
        } => SuiteConfig::from_file(&config).and_then(|mut suite| {
            if out.is_some() {
                suite.out = out;
            }
            let base = config.parent().unwrap_or(Path::new("."));
            execute(&suite, base, append)
        }),
    }
}

/// 0 on full success, 2 when some trials failed, 1 on a fatal error.
fn status(result: &im_meta_cli::Result<usize>) -> u8 {
    match result {
        Ok(0) => 0,
        Ok(_) => 2,
        Err(_) => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let result = dispatch(Cli::parse().command);
    if let Err(e) = &result {
        eprintln!("error: {e}");
    }
    ExitCode::from(status(&result))
}

#[cfg(test)]
mod tests {
    use super::*;
    use im_meta_cli::read_records;

    fn run(args: &[&str]) -> im_meta_cli::Result<usize> {
        let argv = std::iter::once("im-meta").chain(args.iter().copied());
        dispatch(Cli::try_parse_from(argv).unwrap().command)
    }

    #[test]
    fn run_writes_one_row_per_trial_and_appends() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("r.csv");
        let out_s = out.to_str().unwrap();
        let spec = "n=40,d=8,markers=2,in=0.3,out=0.02";
        let r = run(&[
            "run",
            "--synthetic",
            spec,
            "--method",
            "rand",
            "--queries",
            "3",
            "--seeds",
            "2",
            "--mc",
            "200",
            "--trials",
            "3",
            "--out",
            out_s,
        ]);
        assert_eq!(status(&r), 0);
        let rows = read_records(&out).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows
            .iter()
            .all(|r| r.method == "rand" && r.queries == 3 && r.k == 2));
        assert_eq!(
            rows.iter().map(|r| r.trial).collect::<Vec<_>>(),
            vec![0, 1, 2]
        );

        let r = run(&[
            "run",
            "--synthetic",
            spec,
            "--method",
            "upper",
            "--mc",
            "200",
            "--trials",
            "1",
            "--append",
            "--out",
            out_s,
        ]);
        assert_eq!(status(&r), 0);
        let text = std::fs::read_to_string(&out).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("method,")).count(), 1);
        assert_eq!(read_records(&out).unwrap().len(), 4);
    }

    #[test]
    fn sweep_with_expired_budget_is_partial_failure() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("s.toml");
        std::fs::write(
            &cfg,
            "methods = [\"rand\"]\ntrials = 2\nmc = 100\ncell_timeout_ms = 0\nout = \"s.csv\"\n\n\
             [dataset]\nsynthetic = \"n=30,d=8,markers=2,in=0.3,out=0.02\"\n",
        )
        .unwrap();
        let out = dir.path().join("s.csv");
        let r = run(&[
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(status(&r), 2);
        let rows = read_records(&out).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.is_error()));
    }

    #[test]
    fn bad_input_is_fatal() {
        let dir = tempfile::tempdir().unwrap();
        let edges = dir.path().join("g.txt");
        std::fs::write(&edges, "0 1\n1 x\n").unwrap();
        let r = run(&[
            "run",
            "--dataset",
            edges.to_str().unwrap(),
            "--method",
            "rand",
        ]);
        assert_eq!(status(&r), 1);
        assert!(r.unwrap_err().to_string().contains("line 2"));

        let r = run(&[
            "run",
            "--synthetic",
            "n=40,d=8,in=0.3,out=0.02",
            "--method",
            "nope",
        ]);
        assert_eq!(status(&r), 1);
    }

    #[test]
    fn synthetic_and_dataset_are_exclusive() {
        let argv = [
            "im-meta",
            "run",
            "--synthetic",
            "n=9,d=2,in=1,out=0",
            "--dataset",
            "g.txt",
        ];
        assert!(Cli::try_parse_from(argv).is_err());
        assert!(Cli::try_parse_from(["im-meta", "run"]).is_err());
    }
}
