use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "qhe",
    version,
    about = "Masked delegation of a 2x2 quantum linear solver",
    propagate_version = true
)]
pub struct Cli {
    /// Log verbosity: -v info, -vv debug.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mask a system, solve it on a server and decrypt the result.
    Solve(SolveArgs),
    /// Best Clifford+T approximation of an RY rotation.
    Synth(SynthArgs),
    /// Bloch points reachable from |0> within a T budget, as CSV.
    Bloch(BlochArgs),
    /// Build a solver circuit and write it in the text format.
    Compile(CompileArgs),
    /// Run a circuit file locally with the server's job semantics.
    Simulate(JobArgs),
    /// Serve jobs over TCP until interrupted.
    Serve(ServeArgs),
    /// Send a job to a running server.
    Submit(SubmitArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fixture {
    /// A = [[0.7, 0.3], [0.3, 0.7]], b = (1/√2 + 0.7, 1/√2 + 0.3).
    Eq7,
    /// A = [[1.75, 0.75], [0.75, 1.75]], b = (1/√2 + 1.75, −1/√2 + 0.75).
    Eq8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Replica,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExecutionArg {
    Analytic,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CircuitKind {
    /// Three-qubit circuit with the eigenbasis written in closed form.
    Optimized,
    /// Phase estimation, controlled rotations and uncomputation.
    General,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TopologyArg {
    Star,
    None,
}

/// Mask bits from the command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyBits(pub Vec<u8>);

#[derive(Debug, Clone, Args)]
pub struct SystemArgs {
    /// Built-in system.
    #[arg(long, value_enum, conflicts_with_all = ["matrix", "rhs"], required_unless_present = "matrix")]
    pub fixture: Option<Fixture>,

    /// Symmetric matrix as a11,a12,a21,a22.
    #[arg(long, value_parser = parse_matrix, allow_hyphen_values = true, requires = "rhs")]
    pub matrix: Option<[[f64; 2]; 2]>,

    /// Right-hand side as b1,b2.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true, requires = "matrix")]
    pub rhs: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,

    /// Inversion constant C [default: smallest |λ|].
    #[arg(long)]
    pub c: Option<f64>,

    /// Replica rotation angle in radians [default with --fixture: -57.34°,
    /// otherwise -2·acos(λ2/λ1)].
    #[arg(long, allow_hyphen_values = true, conflicts_with = "theta_deg")]
    pub theta: Option<f64>,

    /// Replica rotation angle in degrees.
    #[arg(long, allow_hyphen_values = true)]
    pub theta_deg: Option<f64>,

    /// T budget for replacing replica rotations with Clifford+T words.
    #[arg(long, default_value_t = 7, conflicts_with = "exact_ry")]
    pub t_budget: usize,

    /// Keep replica rotations as exact RY gates.
    #[arg(long)]
    pub exact_ry: bool,

    /// Coupling graph: a star centered on the eigenvalue qubit, or none.
    #[arg(long, value_enum, default_value_t = TopologyArg::Star)]
    pub topology: TopologyArg,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub system: SystemArgs,

    #[command(flatten)]
    pub solver: SolverArgs,

    /// Private key as comma-separated bits [default: drawn from --seed].
    #[arg(long, value_parser = parse_key)]
    pub key: Option<KeyBits>,

    #[arg(long, value_enum, default_value_t = ExecutionArg::Analytic)]
    pub execution: ExecutionArg,

    /// Shots per measurement basis (sampled execution).
    #[arg(long, default_value_t = 8192)]
    pub shots: u64,

    /// Seed for sampling and key generation.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Depolarizing probability per gate and qubit (sampled execution).
    #[arg(long)]
    pub noise_p: Option<f64>,

    /// Server address [default: a private in-process server].
    #[arg(long)]
    pub server: Option<SocketAddr>,

    /// Client timeout in seconds.
    #[arg(long, default_value_t = 30)]
    pub timeout_secs: u64,

    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Target RY angle in radians.
    #[arg(
        long,
        allow_hyphen_values = true,
        required_unless_present = "target_ry_deg",
        conflicts_with = "target_ry_deg"
    )]
    pub target_ry: Option<f64>,

    /// Target RY angle in degrees.
    #[arg(long, allow_hyphen_values = true)]
    pub target_ry_deg: Option<f64>,

    /// Maximum number of T and T† gates.
    #[arg(long, default_value_t = 7)]
    pub t_budget: usize,

    /// Write the sequence as a one-qubit circuit.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BlochArgs {
    /// Maximum number of T and T† gates.
    #[arg(long, default_value_t = 0)]
    pub t_budget: usize,

    /// Also mark R_y(angle)|0> and its best approximation; radians.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "mark_ry_deg")]
    pub mark_ry: Option<f64>,

    /// As --mark-ry, in degrees.
    #[arg(long, allow_hyphen_values = true)]
    pub mark_ry_deg: Option<f64>,

    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CompileArgs {
    #[command(flatten)]
    pub system: SystemArgs,

    #[command(flatten)]
    pub solver: SolverArgs,

    /// Mask the system with this key before compiling.
    #[arg(long, value_parser = parse_key)]
    pub key: Option<KeyBits>,

    #[arg(long, value_enum, default_value_t = CircuitKind::Optimized)]
    pub circuit: CircuitKind,

    /// Phase-estimation register width (general circuit).
    #[arg(long, default_value_t = 3)]
    pub bits: usize,

    /// Evolution time t0 (general circuit) [default: chosen so every
    /// eigenvalue lands on a register value].
    #[arg(long)]
    pub t0: Option<f64>,

    /// Write the circuit here; stdout then carries a summary.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct JobArgs {
    /// Circuit file in the text format.
    pub circuit: PathBuf,

    /// Job id echoed in the result.
    #[arg(long, default_value = "job")]
    pub id: String,

    #[arg(long, value_enum, default_value_t = ExecutionArg::Analytic)]
    pub execution: ExecutionArg,

    /// Shots per basis (sampled execution).
    #[arg(long, default_value_t = 1024)]
    pub shots: u64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Keep only shots where qubit reads outcome, as q=o.
    #[arg(long, value_parser = parse_postselect)]
    pub postselect: Option<(usize, u8)>,

    /// Measurement basis and qubit, as Z:0; repeatable.
    #[arg(long = "basis", value_parser = parse_basis)]
    pub bases: Vec<(char, usize)>,

    /// Depolarizing probability (sampled execution).
    #[arg(long)]
    pub noise_p: Option<f64>,

    /// Write the JSON result here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:7878")]
    pub listen: String,

    #[arg(long, default_value_t = 4)]
    pub max_jobs: usize,

    /// Entries kept in the in-memory job log.
    #[arg(long, default_value_t = 256)]
    pub log_capacity: usize,

    /// Drop idle connections after this many seconds; 0 waits forever.
    #[arg(long, default_value_t = 300)]
    pub idle_timeout_secs: u64,
}

#[derive(Debug, Clone, Args)]
pub struct SubmitArgs {
    #[arg(long)]
    pub server: SocketAddr,

    /// Client timeout in seconds.
    #[arg(long, default_value_t = 30)]
    pub timeout_secs: u64,

    #[command(flatten)]
    pub job: JobArgs,
}

fn parse_floats(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let values = s
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    if values.len() != n {
        return Err(format!(
            "expected {n} comma-separated numbers, got {}",
            values.len()
        ));
    }
    Ok(values)
}

fn parse_matrix(s: &str) -> Result<[[f64; 2]; 2], String> {
    let v = parse_floats(s, 4)?;
    Ok([[v[0], v[1]], [v[2], v[3]]])
}

fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    let v = parse_floats(s, 2)?;
    Ok([v[0], v[1]])
}

fn parse_key(s: &str) -> Result<KeyBits, String> {
    s.split(',')
        .map(|v| match v.trim() {
            "0" => Ok(0),
            "1" => Ok(1),
            other => Err(format!("key bits must be 0 or 1, got `{other}`")),
        })
        .collect::<Result<_, _>>()
        .map(KeyBits)
}

fn parse_postselect(s: &str) -> Result<(usize, u8), String> {
    let (q, o) = s.split_once('=').ok_or("expected q=o")?;
    let q = q
        .trim()
        .trim_start_matches('q')
        .parse()
        .map_err(|e| format!("qubit: {e}"))?;
    let o = match o.trim() {
        "0" => 0,
        "1" => 1,
        other => return Err(format!("outcome must be 0 or 1, got `{other}`")),
    };
    Ok((q, o))
}

fn parse_basis(s: &str) -> Result<(char, usize), String> {
    let (b, q) = s.split_once(':').ok_or("expected BASIS:QUBIT, e.g. Z:0")?;
    let b = match b.trim() {
        "Z" | "z" => 'Z',
        "X" | "x" => 'X',
        "Y" | "y" => 'Y',
        other => return Err(format!("basis must be Z, X or Y, got `{other}`")),
    };
    let q = q
        .trim()
        .trim_start_matches('q')
        .parse()
        .map_err(|e| format!("qubit: {e}"))?;
    Ok((b, q))
}
