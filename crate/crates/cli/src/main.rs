mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gms_core::schemes::Scheme;
use gms_core::GroupId;

/// Gamma multi-signature simulator and benchmark driver.
#[derive(Debug, Parser)]
#[command(name = "gms", version)]
pub struct Cli {
    /// Group backend; attacks default to `toy`, everything else to `curve`.
    #[arg(long, global = true, env = "MULTISIG_BACKEND", value_parser = parse_backend)]
    pub backend: Option<GroupId>,

    /// Subgroup order for the toy backend (smallest prime p = kq + 1 is used).
    #[arg(long, global = true)]
    pub toy_q: Option<u64>,

    /// RNG seed; omit for OS entropy.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate key pairs with proofs of possession.
    Keygen {
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Output directory for public.json and secret.json.
        #[arg(long, default_value = "keys")]
        out: PathBuf,
    },
    /// Run KVf over every key in a public bundle.
    VerifyKeys {
        #[arg(long)]
        keys: PathBuf,
    },
    /// Sign one message end-to-end over a simulated tree.
    Simulate {
        #[command(flatten)]
        tree: TreeArgs,
        #[arg(long, value_parser = parse_scheme, default_value = "agms")]
        scheme: Scheme,
        #[arg(long, default_value = "hello")]
        message: String,
        /// Directory holding public.json and secret.json from `keygen`.
        #[arg(long)]
        keys: Option<PathBuf>,
        /// Output directory for signature, aggregate, metrics and transcript.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Check a signature file against an aggregated key.
    Verify {
        #[arg(long, value_parser = parse_scheme, default_value = "agms")]
        scheme: Scheme,
        #[arg(long)]
        aggregate: PathBuf,
        #[arg(long)]
        signature: PathBuf,
        #[arg(long, default_value = "hello")]
        message: String,
    },
    /// Time signing and verification across schemes and signer counts.
    Bench {
        #[arg(long, value_parser = parse_scheme, value_delimiter = ',', default_value = "cosi,gms,agms")]
        scheme: Vec<Scheme>,
        #[arg(long, value_delimiter = ',', default_value = "4,16,64,256,1024,4096")]
        signers: Vec<usize>,
        #[arg(long)]
        branching: Option<usize>,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u32).range(1..))]
        reps: u32,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the rogue-key or k-sum attack demo.
    Attack {
        #[arg(value_enum)]
        kind: AttackKind,
        #[arg(long, value_enum, default_value = "cosi")]
        target: Target,
        /// Number of lists for the k-sum solver.
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value_t = 8)]
        retries: usize,
        /// Honest signers facing the adversary.
        #[arg(long, default_value_t = 3)]
        signers: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the default and revised endorsement flows.
    Endorse {
        /// Endorser counts.
        #[arg(long, value_delimiter = ',', default_value = "2,4,8,16,32")]
        signers: Vec<usize>,
        /// Emit every step instead of the Step 5–7 summary.
        #[arg(long)]
        detailed: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Args)]
pub struct TreeArgs {
    #[arg(long, default_value_t = 15)]
    pub signers: usize,
    /// Branching factor; defaults to the smallest one that fits within --depth.
    #[arg(long)]
    pub branching: Option<usize>,
    #[arg(long, default_value_t = 3)]
    pub depth: usize,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AttackKind {
    RogueKey,
    Ksum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Cosi,
    Agms,
}

fn parse_backend(s: &str) -> Result<GroupId, String> {
    s.parse()
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
