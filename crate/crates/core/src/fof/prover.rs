//! Dispatch of a conjecture to an external SZS-speaking prover.
//!
//! The prover is any executable that takes a TPTP problem file as its final
//! argument and prints `SZS status <word>` on stdout, the convention the
//! MetiTarski family follows. We stay agnostic about which binary it is:
//! extra flags pass through verbatim, the problem goes into a temp file that
//! lives for the duration of the call, and stdout is scanned for the first
//! status line. A missing or unlaunchable binary is a capability error, not
//! a verdict.

use super::{FofConjecture, FofError};
use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

/// Classified prover outcome. `Error` covers crashes, unknown status words,
/// and output with no SZS line at all; the raw text is kept alongside for
/// diagnosis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SzsStatus {
    Theorem,
    CounterSatisfiable,
    GaveUp,
    Timeout,
    Error,
}

impl std::fmt::Display for SzsStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SzsStatus::Theorem => "Theorem",
            SzsStatus::CounterSatisfiable => "CounterSatisfiable",
            SzsStatus::GaveUp => "GaveUp",
            SzsStatus::Timeout => "Timeout",
            SzsStatus::Error => "Error",
        })
    }
}

/// One prover run: the classified status, everything the process printed,
/// and how long it took.
#[derive(Debug, Clone)]
pub struct SzsResult {
    pub status: SzsStatus,
    pub raw: String,
    pub wall_time: f64,
}

/// How to invoke the prover: binary path plus flags inserted before the
/// problem-file argument.
#[derive(Debug, Clone)]
pub struct ProverCmd {
    pub path: PathBuf,
    pub args: Vec<String>,
}

impl ProverCmd {
    pub fn new(path: impl Into<PathBuf>) -> ProverCmd {
        ProverCmd {
            path: path.into(),
            args: Vec::new(),
        }
    }
}

type DrainBuf = (
    std::sync::Arc<std::sync::Mutex<Vec<u8>>>,
    std::thread::JoinHandle<()>,
);

fn drain(mut pipe: impl Read + Send + 'static) -> DrainBuf {
    let buf = std::sync::Arc::new(std::sync::Mutex::new(Vec::new()));
    let writer = buf.clone();
    let handle = std::thread::spawn(move || {
        let mut chunk = [0u8; 4096];
        loop {
            match pipe.read(&mut chunk) {
                Ok(0) | Err(_) => break,
                Ok(n) => writer.lock().unwrap().extend_from_slice(&chunk[..n]),
            }
        }
    });
    (buf, handle)
}

fn classify(stdout: &str) -> SzsStatus {
    for line in stdout.lines() {
        if let Some(rest) = line.split("SZS status").nth(1) {
            return match rest.split_whitespace().next() {
                Some("Theorem") => SzsStatus::Theorem,
                Some("CounterSatisfiable") => SzsStatus::CounterSatisfiable,
                Some("GaveUp") => SzsStatus::GaveUp,
                Some("Timeout") => SzsStatus::Timeout,
                _ => SzsStatus::Error,
            };
        }
    }
    SzsStatus::Error
}

/// Run `cmd` on the rendered conjecture, enforcing `timeout` on the wall
/// clock. A deadline overrun kills the process and reports `Timeout`; a
/// failure to start at all is [`FofError::Spawn`].
pub fn run_prover(
    cmd: &ProverCmd,
    conj: &FofConjecture,
    timeout: Duration,
) -> Result<SzsResult, FofError> {
    let mut problem = tempfile::Builder::new()
        .prefix("conjecture-")
        .suffix(".p")
        .tempfile()?;
    problem.write_all(conj.render().as_bytes())?;
    problem.flush()?;

    let start = Instant::now();
    let mut child = Command::new(&cmd.path)
        .args(&cmd.args)
        .arg(problem.path())
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|source| FofError::Spawn {
            path: cmd.path.clone(),
            source,
        })?;

    // Drain both pipes off-thread so a chatty prover cannot deadlock on a
    // full pipe while we wait. The buffers are shared rather than returned
    // through join because a killed prover can leave grandchildren holding
    // the write end, pinning the reader forever; on timeout we snapshot
    // whatever has arrived and walk away.
    let (out_buf, out_thread) = drain(child.stdout.take().expect("stdout was piped"));
    let (err_buf, err_thread) = drain(child.stderr.take().expect("stderr was piped"));

    let mut timed_out = false;
    loop {
        if child.try_wait()?.is_some() {
            break;
        }
        if start.elapsed() >= timeout {
            timed_out = true;
            child.kill().ok();
            child.wait().ok();
            break;
        }
        std::thread::sleep(Duration::from_millis(10));
    }
    if !timed_out {
        out_thread.join().ok();
        err_thread.join().ok();
    }

    let snapshot =
        |b: &std::sync::Mutex<Vec<u8>>| String::from_utf8_lossy(&b.lock().unwrap()).into_owned();
    let stdout = snapshot(&out_buf);
    let stderr = snapshot(&err_buf);
    let mut raw = stdout.clone();
    if !stderr.is_empty() {
        raw.push_str(&stderr);
    }

    let status = if timed_out {
        SzsStatus::Timeout
    } else {
        classify(&stdout)
    };
    Ok(SzsResult {
        status,
        raw,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fof::{Atom, Expr, RelOp};

    fn tiny() -> FofConjecture {
        FofConjecture {
            name: "T".into(),
            universal_vars: vec!["X".into()],
            existential_vars: vec!["Y".into()],
            hypotheses: vec![vec![Atom::new(Expr::var("X"), RelOp::Eq, Expr::num(1.0))]],
            conclusion: Atom::new(Expr::var("X"), RelOp::Lt, Expr::num(2.0)),
        }
    }

    fn stub(dir: &std::path::Path, name: &str, body: &str) -> PathBuf {
        use std::os::unix::fs::PermissionsExt;
        let path = dir.join(name);
        std::fs::write(&path, format!("#!/bin/sh\n{body}\n")).unwrap();
        std::fs::set_permissions(&path, std::fs::Permissions::from_mode(0o755)).unwrap();
        path
    }

    #[test]
    fn classifies_the_standard_verdicts() {
        let dir = tempfile::tempdir().unwrap();
        for (word, want) in [
            ("Theorem", SzsStatus::Theorem),
            ("CounterSatisfiable", SzsStatus::CounterSatisfiable),
            ("GaveUp", SzsStatus::GaveUp),
            ("Timeout", SzsStatus::Timeout),
        ] {
            let cmd = ProverCmd::new(stub(
                dir.path(),
                &format!("p_{word}"),
                &format!("echo \"% preamble\"\necho \"SZS status {word}\""),
            ));
            let res = run_prover(&cmd, &tiny(), Duration::from_secs(5)).unwrap();
            assert_eq!(res.status, want);
            assert!(res.raw.contains("% preamble"));
        }
    }

    #[test]
    fn unknown_word_and_silence_map_to_error() {
        let dir = tempfile::tempdir().unwrap();
        for body in ["echo \"SZS status Wharrgarbl\"", "echo \"no verdict here\""] {
            let cmd = ProverCmd::new(stub(dir.path(), "p", body));
            let res = run_prover(&cmd, &tiny(), Duration::from_secs(5)).unwrap();
            assert_eq!(res.status, SzsStatus::Error);
            assert!(!res.raw.is_empty());
        }
    }

    #[test]
    fn deadline_overrun_kills_and_reports_timeout() {
        let dir = tempfile::tempdir().unwrap();
        let cmd = ProverCmd::new(stub(dir.path(), "sleeper", "sleep 30"));
        let start = Instant::now();
        let res = run_prover(&cmd, &tiny(), Duration::from_millis(200)).unwrap();
        assert_eq!(res.status, SzsStatus::Timeout);
        assert!(start.elapsed() < Duration::from_secs(5));
        assert!(res.wall_time >= 0.2);
    }

    #[test]
    fn extra_flags_precede_the_problem_file() {
        let dir = tempfile::tempdir().unwrap();
        let mut cmd = ProverCmd::new(stub(
            dir.path(),
            "argcheck",
            r#"[ "$1" = "--time" ] || { echo "SZS status GaveUp"; exit 0; }
[ "$2" = "10" ] || { echo "SZS status GaveUp"; exit 0; }
grep -q "conjecture" "$3" && echo "SZS status Theorem" || echo "SZS status GaveUp""#,
        ));
        cmd.args = vec!["--time".into(), "10".into()];
        let res = run_prover(&cmd, &tiny(), Duration::from_secs(5)).unwrap();
        assert_eq!(res.status, SzsStatus::Theorem, "raw: {}", res.raw);
    }

    #[test]
    fn problem_file_reaching_the_prover_is_well_formed() {
        let dir = tempfile::tempdir().unwrap();
        // Echo the problem back; it must parse and end with the terminator.
        let cmd = ProverCmd::new(stub(dir.path(), "catter", "cat \"$1\""));
        let res = run_prover(&cmd, &tiny(), Duration::from_secs(5)).unwrap();
        assert_eq!(res.status, SzsStatus::Error);
        assert!(res.raw.ends_with(")).\n"));
        assert_eq!(crate::fof::parse_conjecture(&res.raw).unwrap(), tiny());
    }

    #[test]
    fn missing_binary_is_a_spawn_error() {
        let cmd = ProverCmd::new("/definitely/not/a/prover");
        match run_prover(&cmd, &tiny(), Duration::from_secs(1)) {
            Err(FofError::Spawn { path, .. }) => {
                assert_eq!(path, PathBuf::from("/definitely/not/a/prover"));
            }
            other => panic!("expected spawn error, got {other:?}"),
        }
    }

    #[test]
    fn stderr_is_retained_in_raw() {
        let dir = tempfile::tempdir().unwrap();
        let cmd = ProverCmd::new(stub(
            dir.path(),
            "noisy",
            "echo \"warning: old cad backend\" >&2\necho \"SZS status Theorem\"",
        ));
        let res = run_prover(&cmd, &tiny(), Duration::from_secs(5)).unwrap();
        assert_eq!(res.status, SzsStatus::Theorem);
        assert!(res.raw.contains("old cad backend"));
    }
}
