use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use clsec::header::{build_codebook, header_stats, LengthHistogram};
use clsec::oracle::self_check;
use clsec::sim::{self, parse_schemes, parse_snr_list, RunConfig, ScorerKind};
use clsec::textcodec::strip_message;

#[derive(Parser)]
#[command(name = "clsec", version, about = "Cross-layer semantic error correction simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo sweep and write trials.csv, summary.csv and summary.json.
    Run(RunArgs),
    /// Print the word-length codebook and header overhead of one passage.
    HeaderDemo {
        #[arg(long)]
        passage: PathBuf,
    },
    /// Check the fast implementations against exhaustive oracles.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML config; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// `start:stop:step` or a comma list, in dB.
    #[arg(long)]
    snr: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma list of bcjr, wl_llr, mlm, clsec, clsec_pr.
    #[arg(long)]
    schemes: Option<String>,
    /// builtin (unigram counts), uniform, unigram, oracle or remote.
    #[arg(long)]
    scorer: Option<String>,
    #[arg(long)]
    counts: Option<PathBuf>,
    #[arg(long)]
    oracle_p: Option<f64>,
    /// Service URL; CLSEC_SCORER_ENDPOINT takes precedence.
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    max_concurrency: Option<usize>,
    #[arg(long)]
    bertscore: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn into_config(self) -> clsec::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.corpus {
            cfg.corpus = v;
        }
        if let Some(v) = self.vocab {
            cfg.vocab = Some(v);
        }
        if let Some(v) = self.snr {
            cfg.channel.snr_db = parse_snr_list(&v)?;
        }
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        if let Some(v) = self.schemes {
            cfg.schemes = parse_schemes(&v)?;
        }
        if let Some(v) = self.scorer {
            cfg.scorer.kind = match v.as_str() {
                "builtin" | "unigram" => ScorerKind::Unigram,
                "uniform" => ScorerKind::Uniform,
                "oracle" => ScorerKind::Oracle,
                "remote" => ScorerKind::Remote,
                other => return Err(clsec::Error::Config(format!("unknown scorer {other:?}"))),
            };
        }
        if let Some(v) = self.counts {
            cfg.scorer.counts = Some(v);
        }
        if let Some(v) = self.oracle_p {
            cfg.scorer.oracle_p = v;
        }
        if let Some(v) = self.endpoint {
            cfg.scorer.endpoint = Some(v);
        }
        if let Some(v) = self.max_concurrency {
            cfg.scorer.max_concurrency = v;
        }
        cfg.bertscore |= self.bertscore;
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.out {
            cfg.out = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(args: RunArgs) -> clsec::Result<()> {
    let cfg = args.into_config()?;
    let result = sim::sweep(&cfg)?;
    sim::write_outputs(&result, &cfg, &cfg.out)?;
    println!("{:<9} {:>6} {:>7} {:>10} {:>8} {:>8}", "scheme", "snr_db", "trials", "ber", "wer", "rouge_l");
    let fmt = |x: Option<f64>, p: usize| x.map_or_else(|| "-".to_owned(), |v| format!("{v:.p$}"));
    for r in &result.summary {
        println!(
            "{:<9} {:>6} {:>7} {:>10} {:>8} {:>8}",
            r.scheme.as_str(),
            r.snr_db,
            r.trials,
            fmt(r.ber, 6),
            fmt(r.wer, 4),
            fmt(r.rouge_l, 2)
        );
    }
    eprintln!("wrote {} rows to {} in {:.1?}", result.records.len(), cfg.out.display(), result.elapsed);
    Ok(())
}

fn header_demo(passage: PathBuf) -> clsec::Result<()> {
    let text = std::fs::read_to_string(&passage)?;
    let ws = strip_message(&text)?;
    let hist = LengthHistogram::from_lengths(ws.lengths());
    let cb = build_codebook(&hist);
    let stats = header_stats(&ws)?;
    println!("N = {}  L = {}  payload = {} bits", stats.word_count, stats.letters, stats.payload_bits);
    println!("{:>8} {:>6} {:>10}", "length", "count", "codeword");
    let mut rows: Vec<_> = cb.entries().iter().collect();
    rows.sort_by_key(|(len, cw)| (cw.len, cw.bits, **len));
    for (len, cw) in rows {
        println!("{:>8} {:>6} {:>10}", len, hist.count(*len), cw.to_string());
    }
    println!(
        "sum theta = {}  phi = {}  header = {} bits  rho = {:.2}%",
        stats.sum_theta,
        stats.phi,
        stats.sum_theta + stats.phi,
        100.0 * stats.rho
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::HeaderDemo { passage } => header_demo(passage),
        Command::Selftest { seed } => {
            let results = self_check(seed);
            for r in &results {
                println!("{} {} ({})", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
            }
            return if results.iter().all(|r| r.passed) { ExitCode::SUCCESS } else { ExitCode::FAILURE };
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
