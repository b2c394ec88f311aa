//! Command-line front end for `qhe-core`.
//!
//! [`run`] parses arguments and dispatches one verb. Exit status is 0 on
//! success, 1 on runtime failure and 2 on usage errors.

pub mod args;

use std::ffi::OsString;
use std::fmt::Display;
use std::io::Write;
use std::path::Path;
use std::time::Duration;

use clap::error::ErrorKind;
use clap::Parser;
use log::LevelFilter;

use qhe_core::circ::{emit_text, parse_text, Topology};
use qhe_core::hecrypt::{encrypt, keygen, solve_encrypted, MaskKey};
use qhe_core::hhl::{
    build_general_circuit, compile_solver, Execution, LinearSystem, Mode, SolverConfig,
};
use qhe_core::qserve::{
    execute, serve, submit_via, BasisSpec, Job, JobResult, Postselect, ServerConfig, TcpTransport,
    WireBasis,
};
use qhe_core::synth::{
    approximate_unitary, enumerate_states, export_bloch_csv, maximizers, ry_unitary, BlochPoint,
    MarkTag,
};

use args::{
    BlochArgs, CircuitKind, Cli, Command, CompileArgs, ExecutionArg, Fixture, JobArgs, ModeArg,
    ServeArgs, SolveArgs, SolverArgs, SubmitArgs, SynthArgs, SystemArgs, TopologyArg,
};

/// Replica angle used with the built-in fixtures unless overridden.
pub const FIXTURE_THETA_DEG: f64 = -57.34;

#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(String),
}

fn runtime(e: impl Display) -> Failure {
    Failure::Runtime(e.to_string())
}

/// Parses `args` (including the program name) and runs the verb.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    2
                }
            };
        }
    };
    let level = match cli.verbose {
        0 => LevelFilter::Warn,
        1 => LevelFilter::Info,
        _ => LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .try_init();
    let result = match &cli.command {
        Command::Solve(a) => solve(a, stdout),
        Command::Synth(a) => synth(a, stdout),
        Command::Bloch(a) => bloch(a, stdout),
        Command::Compile(a) => compile(a, stdout),
        Command::Simulate(a) => simulate(a, stdout),
        Command::Serve(a) => serve_forever(a, stdout),
        Command::Submit(a) => submit(a, stdout),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
        Err(Failure::Runtime(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            1
        }
    }
}

fn emit(stdout: &mut dyn Write, out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(runtime),
    }
}

fn degrees_or_radians(rad: Option<f64>, deg: Option<f64>) -> Option<f64> {
    rad.or(deg.map(f64::to_radians))
}

pub fn fixture_system(f: Fixture) -> LinearSystem {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (a, b) = match f {
        Fixture::Eq7 => ([[0.7, 0.3], [0.3, 0.7]], [s + 0.7, s + 0.3]),
        Fixture::Eq8 => ([[1.75, 0.75], [0.75, 1.75]], [s + 1.75, -s + 0.75]),
    };
    LinearSystem::new(a, b).expect("fixtures are valid")
}

fn system_from(a: &SystemArgs) -> Result<LinearSystem, Failure> {
    match (a.fixture, a.matrix, a.rhs) {
        (Some(f), _, _) => Ok(fixture_system(f)),
        (None, Some(m), Some(b)) => LinearSystem::new(m, b).map_err(runtime),
        _ => Err(Failure::Usage(
            "give --fixture or both --matrix and --rhs".into(),
        )),
    }
}

fn solver_config(a: &SolverArgs, fixture: bool) -> SolverConfig {
    let mut config = match a.mode {
        ModeArg::Exact => SolverConfig::exact(),
        ModeArg::Replica => SolverConfig::replica(),
    };
    config.c_constant = a.c;
    if config.mode == Mode::Replica {
        config.theta_override = degrees_or_radians(a.theta, a.theta_deg)
            .or(fixture.then(|| FIXTURE_THETA_DEG.to_radians()));
        config.t_budget = (!a.exact_ry).then_some(a.t_budget);
    }
    if a.topology == TopologyArg::None {
        config.topology = Topology::Unconstrained;
    }
    config
}

fn mask_key(bits: Option<&args::KeyBits>, seed: u64) -> Result<MaskKey, Failure> {
    match bits {
        Some(k) => MaskKey::new(k.0.clone()).map_err(|e| Failure::Usage(e.to_string())),
        None => keygen(2, seed).map_err(runtime),
    }
}

fn solve(a: &SolveArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let system = system_from(&a.system)?;
    let key = mask_key(a.key.as_ref(), a.seed)?;
    let mut config = solver_config(&a.solver, a.system.fixture.is_some());
    config.execution = match a.execution {
        ExecutionArg::Analytic => Execution::Analytic,
        ExecutionArg::Sampled => Execution::Sampled {
            shots: a.shots,
            seed: a.seed,
        },
    };
    let timeout = Duration::from_secs(a.timeout_secs.max(1));
    let local = match a.server {
        Some(_) => None,
        None => Some(serve("127.0.0.1:0", ServerConfig::default()).map_err(runtime)?),
    };
    let addr = a
        .server
        .or(local.as_ref().map(|s| s.addr()))
        .expect("one of the two is set");
    let mut transport = TcpTransport::new(addr).with_timeout(timeout);
    let report = solve_encrypted(&system, &key, &mut transport, &config, a.noise_p);
    if let Some(server) = local {
        server.shutdown();
    }
    emit(
        stdout,
        a.out.as_deref(),
        &report.map_err(runtime)?.to_record(),
    )
}

fn synth(a: &SynthArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let angle = degrees_or_radians(a.target_ry, a.target_ry_deg).expect("clap requires one");
    let target = ry_unitary(angle);
    let best = approximate_unitary(&target, a.t_budget).map_err(runtime)?;
    let ties = maximizers(&target, a.t_budget).map_err(runtime)?;
    let distance = BlochPoint::of_unitary(&target).distance(&BlochPoint::of_unitary(&best.unitary));
    let mut text = String::new();
    let line = |text: &mut String, k: &str, v: String| text.push_str(&format!("{k}={v}\n"));
    line(&mut text, "target_ry_rad", format!("{angle:?}"));
    line(&mut text, "t_budget", a.t_budget.to_string());
    line(
        &mut text,
        "similarity",
        qhe_core::fmt::sig(best.similarity, 12),
    );
    line(&mut text, "t_count", best.sequence.t_count().to_string());
    line(&mut text, "length", best.sequence.len().to_string());
    line(&mut text, "maximizers", ties.len().to_string());
    line(
        &mut text,
        "max_t_count_among_maximizers",
        ties.iter()
            .map(|s| s.t_count())
            .max()
            .unwrap_or(0)
            .to_string(),
    );
    line(
        &mut text,
        "bloch_distance",
        qhe_core::fmt::sig(distance, 12),
    );
    line(&mut text, "sequence", best.sequence.to_string());
    stdout.write_all(text.as_bytes()).map_err(runtime)?;
    if let Some(path) = &a.out {
        emit(stdout, Some(path), &emit_text(&best.sequence.to_circuit()))?;
    }
    Ok(())
}

fn bloch(a: &BlochArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let coverage = enumerate_states(a.t_budget).map_err(runtime)?;
    let mut marks = Vec::new();
    let mut summary = format!("t_budget={}\npoints={}\n", a.t_budget, coverage.len());
    if let Some(angle) = degrees_or_radians(a.mark_ry, a.mark_ry_deg) {
        let target = ry_unitary(angle);
        let approx = approximate_unitary(&target, a.t_budget).map_err(runtime)?;
        let (t, p) = (
            BlochPoint::of_unitary(&target),
            BlochPoint::of_unitary(&approx.unitary),
        );
        summary.push_str(&format!(
            "mark_distance={}\n",
            qhe_core::fmt::sig(t.distance(&p), 12)
        ));
        marks.push((t, MarkTag::Target));
        marks.push((p, MarkTag::Approx));
    }
    let csv = export_bloch_csv(&coverage, &marks);
    match &a.out {
        Some(path) => {
            emit(stdout, Some(path), &csv)?;
            stdout.write_all(summary.as_bytes()).map_err(runtime)
        }
        None => stdout.write_all(csv.as_bytes()).map_err(runtime),
    }
}

fn compile(a: &CompileArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let mut system = system_from(&a.system)?;
    if let Some(bits) = &a.key {
        let key = mask_key(Some(bits), 0)?;
        system = encrypt(&system, &key)
            .map_err(runtime)?
            .system()
            .map_err(runtime)?;
    }
    let mut config = solver_config(&a.solver, a.system.fixture.is_some());
    config.eigen_register_bits = a.bits;
    config.t0 = a.t0;
    let circuit = match a.circuit {
        CircuitKind::Optimized => compile_solver(&system, &config).map_err(runtime)?.circuit,
        CircuitKind::General => build_general_circuit(&system, &config).map_err(runtime)?,
    };
    let text = emit_text(&circuit);
    match &a.out {
        Some(path) => {
            emit(stdout, Some(path), &text)?;
            let summary = format!(
                "qubits={}\ngates={}\ncnots={}\nry={}\nt_count={}\n",
                circuit.n_qubits(),
                circuit.gates().len(),
                circuit.count_cnots(),
                circuit.count_ry(),
                circuit.count_t()
            );
            stdout.write_all(summary.as_bytes()).map_err(runtime)
        }
        None => stdout.write_all(text.as_bytes()).map_err(runtime),
    }
}

fn build_job(a: &JobArgs) -> Result<Job, Failure> {
    let text = std::fs::read_to_string(&a.circuit)
        .map_err(|e| Failure::Runtime(format!("{}: {e}", a.circuit.display())))?;
    parse_text(&text).map_err(|e| Failure::Runtime(format!("{}: {e}", a.circuit.display())))?;
    let mut job = match a.execution {
        ExecutionArg::Analytic => Job::analytic(a.id.clone(), text),
        ExecutionArg::Sampled => Job::sampled(a.id.clone(), text, a.shots, a.seed),
    };
    job.postselect = a
        .postselect
        .map(|(qubit, outcome)| Postselect { qubit, outcome });
    job.bases = a
        .bases
        .iter()
        .map(|&(b, qubit)| BasisSpec {
            basis: match b {
                'X' => WireBasis::X,
                'Y' => WireBasis::Y,
                _ => WireBasis::Z,
            },
            qubit,
        })
        .collect();
    job.noise_p = a.noise_p;
    Ok(job)
}

fn report_result(
    result: &JobResult,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(result).map_err(runtime)?;
    text.push('\n');
    emit(stdout, out, &text)?;
    match (&result.error, &result.detail) {
        (Some(code), detail) => Err(Failure::Runtime(format!(
            "{code}: {}",
            detail.as_deref().unwrap_or("")
        ))),
        _ => Ok(()),
    }
}

fn simulate(a: &JobArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let job = build_job(a)?;
    report_result(&execute(&job), a.out.as_deref(), stdout)
}

fn submit(a: &SubmitArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let job = build_job(&a.job)?;
    let mut transport =
        TcpTransport::new(a.server).with_timeout(Duration::from_secs(a.timeout_secs.max(1)));
    let result = match submit_via(&mut transport, &job) {
        Ok(r) => r,
        Err(qhe_core::qserve::QserveError::Server { code, detail }) => {
            JobResult::error(job.id.clone(), &code, detail)
        }
        Err(e) => return Err(runtime(e)),
    };
    report_result(&result, a.job.out.as_deref(), stdout)
}

fn serve_forever(a: &ServeArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let config = ServerConfig {
        max_concurrent_jobs: a.max_jobs,
        log_capacity: a.log_capacity,
        idle_timeout: (a.idle_timeout_secs > 0).then(|| Duration::from_secs(a.idle_timeout_secs)),
    };
    let server = serve(a.listen.as_str(), config).map_err(runtime)?;
    writeln!(stdout, "listening on {}", server.addr()).map_err(runtime)?;
    stdout.flush().map_err(runtime)?;
    loop {
        std::thread::park();
    }
}
