use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use inquest::bench::{render_table, run_benchmark, BenchOptions, Engine};
use inquest::providers::{HttpChatProvider, HttpProviderConfig, ScriptedProvider};
use inquest::service::{serve, AppState};
use inquest::{snapshot, Config, Dataset};
use inquest_core::{qgc_bounds, ChatProvider, Mode, QuestionTree};

#[derive(Parser)]
#[command(name = "bench", about = "Run benchmarks, compute QGC bounds or serve live sessions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum GeneratorKind {
    Oracle,
    Llm,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Closed,
    Open,
    Constrained,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Closed => Mode::Closed,
            ModeArg::Open => Mode::Open,
            ModeArg::Constrained => Mode::Constrained,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Play every sample of a dataset through a simulated answerer.
    Run {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "oracle")]
        generator: GeneratorKind,
        #[arg(long, value_enum, default_value = "closed")]
        mode: ModeArg,
        /// Tree snapshot to resume from and write back to.
        #[arg(long)]
        snapshot: Option<PathBuf>,
        /// Where to write the full JSON report.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Replay chat responses from a script file instead of calling an endpoint.
        #[arg(long)]
        script: Option<PathBuf>,
        #[arg(long)]
        shuffle_seed: Option<u64>,
    },
    /// Print the analytic generation-call bounds.
    QgcBounds {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        ds: u32,
        #[arg(long)]
        k: u32,
    },
    /// Serve the session API.
    Serve {
        #[arg(long, required = true)]
        dataset: Vec<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        #[arg(long, value_enum, default_value = "oracle")]
        generator: GeneratorKind,
        #[arg(long)]
        script: Option<PathBuf>,
        #[arg(long)]
        snapshot_dir: Option<PathBuf>,
    },
}

fn load_config(path: Option<&Path>) -> Result<Config, String> {
    path.map_or_else(|| Ok(Config::default()), |p| Config::load(p).map_err(|e| e.to_string()))
}

fn chat_provider(kind: GeneratorKind, script: Option<&Path>) -> Result<Option<Arc<dyn ChatProvider>>, String> {
    if let GeneratorKind::Oracle = kind {
        return Ok(None);
    }
    if let Some(path) = script {
        return Ok(Some(Arc::new(ScriptedProvider::from_file(path).map_err(|e| e.to_string())?)));
    }
    let cfg = HttpProviderConfig::from_env().ok_or("set INQUEST_LLM_ENDPOINT or pass --script for the llm generator")?;
    Ok(Some(Arc::new(HttpChatProvider::new(cfg).map_err(|e| e.to_string())?)))
}

#[allow(clippy::too_many_arguments)]
fn run(
    dataset: &Path,
    config: Option<&Path>,
    generator: GeneratorKind,
    mode: Mode,
    snapshot_path: Option<&Path>,
    report: Option<&Path>,
    script: Option<&Path>,
    shuffle_seed: Option<u64>,
) -> Result<(), String> {
    let cfg = load_config(config)?;
    let mut data = Dataset::load(dataset).map_err(|e| e.to_string())?;
    let engine = match chat_provider(generator, script)? {
        Some(chat) => Engine::llm(chat, data.domain),
        None => Engine::oracle(&data),
    };
    let fresh = cfg.cluster_store().map_err(|e| e.to_string())?;
    let (mut tree, mut clusters) = match snapshot_path.filter(|p| p.exists()) {
        Some(p) => snapshot::load(p, &mut data.catalog, &cfg.search().reward, fresh).map_err(|e| e.to_string())?,
        None => (QuestionTree::new(data.id.clone()), fresh),
    };
    let mut opts = BenchOptions::new(cfg, mode);
    opts.shuffle_seed = shuffle_seed;
    let result = run_benchmark(&mut data, &mut tree, &mut clusters, &engine, &opts).map_err(|e| e.to_string())?;
    if let Some(p) = snapshot_path {
        snapshot::save(p, &tree, &data.catalog, &clusters).map_err(|e| e.to_string())?;
    }
    if let Some(p) = report {
        let text = serde_json::to_string_pretty(&result).map_err(|e| e.to_string())?;
        std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display()))?;
    }
    print!("{}", render_table(&result));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { dataset, config, generator, mode, snapshot, report, script, shuffle_seed } => run(
            &dataset,
            config.as_deref(),
            generator,
            mode.into(),
            snapshot.as_deref(),
            report.as_deref(),
            script.as_deref(),
            shuffle_seed,
        ),
        Command::QgcBounds { m, ds, k } => match qgc_bounds(m, ds, k) {
            Some(b) => {
                println!("exhaustive_first       {}", b.exhaustive_first);
                println!("exhaustive_subsequent  {}", b.exhaustive_subsequent);
                println!("mcts_max_per_turn      {}", b.mcts_max_per_turn);
                Ok(())
            }
            None => Err(String::from("m, ds and k must be at least 1 and the bounds must fit in 128 bits")),
        },
        Command::Serve { dataset, config, addr, generator, script, snapshot_dir } => (|| {
            let cfg = load_config(config.as_deref())?;
            let chat = chat_provider(generator, script.as_deref())?;
            let mut state = AppState::new(cfg, chat);
            if let Some(dir) = snapshot_dir {
                state = state.with_snapshot_dir(dir);
            }
            for path in &dataset {
                let d = Dataset::load(path).map_err(|e| e.to_string())?;
                state.add_dataset(d).map_err(|e| e.to_string())?;
            }
            let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
            eprintln!("listening on {addr}");
            rt.block_on(serve(addr, Arc::new(state))).map_err(|e| e.to_string())
        })(),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
