use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use concept_qa::service::{self, AppState};
use concept_qa::{
    load_question_set, run_eval, AppConfig, ConceptNetwork, NetworkStore, Scorer, TicketFilter, TicketStatus,
};

#[derive(Parser)]
#[command(name = "concept-qa", version, about = "Question answering over a concept network")]
struct Cli {
    /// TOML config file (delta, tau, stopwords_path, wordnet_dir, data_dir).
    #[arg(long, global = true, env = "CONCEPT_QA_CONFIG")]
    config: Option<PathBuf>,
    /// Network store directory; overrides the config and $CONCEPT_QA_DATA_DIR.
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a network document into the store.
    Import { file: PathBuf },
    /// Print a stored network document.
    Export {
        id: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Answer one question; unanswerable questions file a ticket.
    Ask { id: String, question: String },
    /// List expert tickets.
    Tickets {
        id: String,
        /// open, resolved, dismissed or all.
        #[arg(long, default_value = "open")]
        status: String,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        /// Require this value in the x-api-token header.
        #[arg(long, env = "CONCEPT_QA_TOKEN")]
        token: Option<String>,
    },
    /// Per-category accuracy over a labeled question set.
    Eval {
        id: String,
        #[arg(long)]
        questions: PathBuf,
        /// Also write the report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let config = match &cli.config {
        Some(path) => AppConfig::load(path)?,
        None => AppConfig::default(),
    };
    let data_dir = cli.data_dir.clone().unwrap_or_else(|| config.data_dir());
    let store = || NetworkStore::open(&data_dir).with_context(|| format!("opening store {}", data_dir.display()));

    match cli.command {
        Command::Import { file } => {
            let network =
                ConceptNetwork::deserialize(&read(&file)?).with_context(|| format!("loading {}", file.display()))?;
            let info = store()?.import(network)?;
            println!("{} version {}", info.id, info.version);
        }
        Command::Export { id, out } => {
            let text = store()?.snapshot(&id)?.network.serialize();
            match out {
                Some(path) => std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{text}"),
            }
        }
        Command::Ask { id, question } => {
            if question.trim().is_empty() {
                bail!("question must not be empty");
            }
            let (lexicon, similarity) = (config.lexicon()?, config.similarity()?);
            let scorer = Scorer {
                lexicon: &lexicon,
                config: &similarity,
            };
            let result = store()?.ask(&id, scorer, &question)?;
            println!("{}", serde_json::to_string_pretty(&result)?);
        }
        Command::Tickets { id, status } => {
            let status = match status.as_str() {
                "all" => None,
                s => Some(s.parse::<TicketStatus>().map_err(anyhow::Error::msg)?),
            };
            let tickets = store()?.tickets(&id, TicketFilter { status, kind: None })?;
            println!("{}", serde_json::to_string_pretty(&tickets)?);
        }
        Command::Serve { addr, token } => {
            let mut state = AppState::new(store()?, config.lexicon()?, config.similarity()?);
            if let Some(token) = token {
                state = state.with_token(token);
            }
            tokio::runtime::Runtime::new()?.block_on(service::serve(addr, state))?;
        }
        Command::Eval { id, questions, report } => {
            let (lexicon, similarity) = (config.lexicon()?, config.similarity()?);
            let network = store()?.snapshot(&id)?.network.clone();
            let set = load_question_set(&read(&questions)?, &network)
                .with_context(|| format!("loading {}", questions.display()))?;
            let result = run_eval(
                &network,
                Scorer {
                    lexicon: &lexicon,
                    config: &similarity,
                },
                &set,
            );
            print!("{}", result.to_table());
            if let Some(path) = report {
                std::fs::write(&path, result.to_json() + "\n")
                    .with_context(|| format!("writing {}", path.display()))?;
            }
        }
    }
    Ok(())
}
