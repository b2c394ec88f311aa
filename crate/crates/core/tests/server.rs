use std::io::Write;
use std::net::{TcpListener, TcpStream};
use std::thread;

use qhe_core::circ::{emit_text, Circuit, Gate};
use qhe_core::hecrypt::{solve_encrypted, MaskKey};
use qhe_core::hhl::{Execution, LinearSystem, SolverConfig};
use qhe_core::qserve::{
    read_frame, serve, submit, write_frame, BasisSpec, Job, JobResult, QserveError, ServerConfig,
    TcpTransport, WireBasis,
};
use std::f64::consts::FRAC_1_SQRT_2 as S;

fn bell_text() -> String {
    let mut c = Circuit::new(2);
    c.extend([Gate::h(0), Gate::cnot(0, 1)]).unwrap();
    emit_text(&c)
}

fn sampled_bell(id: &str, seed: u64) -> Job {
    let mut job = Job::sampled(id, bell_text(), 500, seed);
    job.bases = vec![
        BasisSpec {
            basis: WireBasis::Z,
            qubit: 0,
        },
        BasisSpec {
            basis: WireBasis::X,
            qubit: 1,
        },
    ];
    job
}

#[test]
fn bell_job_round_trip() {
    let server = serve("127.0.0.1:0", ServerConfig::default()).unwrap();
    let mut job = Job::analytic("job-1", bell_text());
    job.bases.push(BasisSpec {
        basis: WireBasis::Z,
        qubit: 0,
    });
    let r = submit(server.addr(), &job).unwrap();
    assert_eq!(r.id, "job-1");
    let amps = r.amplitudes.unwrap();
    let norm: f64 = amps.iter().map(|[re, im]| re * re + im * im).sum();
    assert!((norm - 1.0).abs() < 1e-9);
    assert!((amps[0][0] - S).abs() < 1e-12 && (amps[3][0] - S).abs() < 1e-12);
    assert_eq!(r.success_probability, Some(1.0));
}

#[test]
fn sampled_totals_match_shots() {
    let server = serve("127.0.0.1:0", ServerConfig::default()).unwrap();
    let r = submit(server.addr(), &sampled_bell("s", 3)).unwrap();
    for b in r.results.unwrap() {
        assert_eq!(b.raw_shots, 500);
        assert_eq!(b.kept_shots, 500);
        assert_eq!(b.counts.values().sum::<u64>(), 500);
    }
}

#[test]
fn parse_errors_name_line_and_column() {
    let server = serve("127.0.0.1:0", ServerConfig::default()).unwrap();
    let job = Job::analytic("bad", "qubits 1\nfrob q0\n");
    match submit(server.addr(), &job) {
        Err(QserveError::Server { code, detail }) => {
            assert_eq!(code, "parse_error");
            assert!(
                detail.contains("line 2") && detail.contains("column 1"),
                "{detail}"
            );
        }
        other => panic!("expected a server error, got {other:?}"),
    }
}

#[test]
fn closed_port_is_a_connection_error() {
    let port = TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap();
    let err = submit(port, &Job::analytic("x", bell_text())).unwrap_err();
    assert!(matches!(err, QserveError::Io(_)), "{err:?}");
}

#[test]
fn identical_jobs_give_identical_results() {
    let server = serve("127.0.0.1:0", ServerConfig::default()).unwrap();
    let a = submit(server.addr(), &sampled_bell("d", 11)).unwrap();
    let b = submit(server.addr(), &sampled_bell("d", 11)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn concurrent_jobs_match_serial_runs() {
    let server = serve(
        "127.0.0.1:0",
        ServerConfig {
            max_concurrent_jobs: 3,
            ..ServerConfig::default()
        },
    )
    .unwrap();
    let addr = server.addr();
    let jobs: Vec<Job> = (0..8).map(|i| sampled_bell(&format!("c{i}"), i)).collect();
    let serial: Vec<JobResult> = jobs.iter().map(|j| submit(addr, j).unwrap()).collect();
    let handles: Vec<_> = jobs
        .clone()
        .into_iter()
        .map(|j| thread::spawn(move || submit(addr, &j).unwrap()))
        .collect();
    let parallel: Vec<JobResult> = handles.into_iter().map(|h| h.join().unwrap()).collect();
    assert_eq!(serial, parallel);
}

#[test]
fn malformed_frames_get_a_reply_and_the_connection_stays_open() {
    let server = serve("127.0.0.1:0", ServerConfig::default()).unwrap();
    let mut conn = TcpStream::connect(server.addr()).unwrap();
    for garbage in [
        &b"not json"[..],
        b"{\"id\":\"g\",\"mode\":\"analytic\"}",
        b"\xff\xfe",
        b"",
    ] {
        write_frame(&mut conn, garbage).unwrap();
        let reply: JobResult =
            serde_json::from_slice(&read_frame(&mut conn).unwrap().unwrap()).unwrap();
        assert!(reply.is_error(), "{reply:?}");
    }
    let job = serde_json::to_vec(&Job::analytic("after", bell_text())).unwrap();
    write_frame(&mut conn, &job).unwrap();
    let reply: JobResult =
        serde_json::from_slice(&read_frame(&mut conn).unwrap().unwrap()).unwrap();
    assert_eq!(reply.id, "after");
    assert!(!reply.is_error());

    // Requests on one connection are answered in order.
    let mut batch = Vec::new();
    for i in 0..3 {
        write_frame(
            &mut batch,
            &serde_json::to_vec(&sampled_bell(&format!("o{i}"), i)).unwrap(),
        )
        .unwrap();
    }
    conn.write_all(&batch).unwrap();
    for i in 0..3 {
        let reply: JobResult =
            serde_json::from_slice(&read_frame(&mut conn).unwrap().unwrap()).unwrap();
        assert_eq!(reply.id, format!("o{i}"));
    }
}

#[test]
fn oversized_frames_are_refused() {
    let server = serve("127.0.0.1:0", ServerConfig::default()).unwrap();
    let mut conn = TcpStream::connect(server.addr()).unwrap();
    conn.write_all(&u32::MAX.to_be_bytes()).unwrap();
    let reply: JobResult =
        serde_json::from_slice(&read_frame(&mut conn).unwrap().unwrap()).unwrap();
    assert_eq!(reply.error.as_deref(), Some("frame_error"));
}

#[test]
fn job_log_keeps_metadata_only() {
    let server = serve(
        "127.0.0.1:0",
        ServerConfig {
            log_capacity: 2,
            ..ServerConfig::default()
        },
    )
    .unwrap();
    for i in 0..3 {
        submit(server.addr(), &sampled_bell(&format!("m{i}"), i)).unwrap();
    }
    let log = server.job_log();
    assert_eq!(
        log.iter().map(|m| m.id.as_str()).collect::<Vec<_>>(),
        ["m1", "m2"]
    );
    assert!(log
        .iter()
        .all(|m| m.request_bytes > 0 && m.response_bytes > 0 && m.error.is_none()));
    server.shutdown();
}

#[test]
fn encrypted_replica_job_over_tcp() {
    let server = serve("127.0.0.1:0", ServerConfig::default()).unwrap();
    let small = LinearSystem::new([[0.7, 0.3], [0.3, 0.7]], [S + 0.7, S + 0.3]).unwrap();
    let config = SolverConfig {
        execution: Execution::Sampled {
            shots: 8192,
            seed: 1,
        },
        ..SolverConfig::replica()
    };
    let key = MaskKey::new(vec![1, 0]).unwrap();
    let mut transport = TcpTransport::new(server.addr());
    let r = solve_encrypted(&small, &key, &mut transport, &config, None).unwrap();
    let e = r.expectations;
    assert!(e.z.abs() < 5.0 * e.sigma_z.max(1e-3), "{e:?}");
    assert!((e.x - 1.0).abs() < 5.0 * e.sigma_x.max(1e-3), "{e:?}");
    assert!(e.y.abs() < 5.0 * e.sigma_y.max(1e-3), "{e:?}");
    assert!(r.relative_error < 0.02);
}

#[test]
fn depolarizing_noise_lowers_fidelity() {
    let server = serve("127.0.0.1:0", ServerConfig::default()).unwrap();
    let large = LinearSystem::new([[1.75, 0.75], [0.75, 1.75]], [S + 1.75, -S + 0.75]).unwrap();
    let config = SolverConfig {
        execution: Execution::Sampled {
            shots: 4096,
            seed: 5,
        },
        ..SolverConfig::replica()
    };
    let key = MaskKey::new(vec![1, 0]).unwrap();
    let mut transport = TcpTransport::new(server.addr());
    let r = solve_encrypted(&large, &key, &mut transport, &config, Some(0.05)).unwrap();
    assert!(
        r.fidelity_vs_ideal < 1.0 && r.fidelity_vs_ideal > 0.5,
        "{}",
        r.fidelity_vs_ideal
    );
}
