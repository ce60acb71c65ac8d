//! Command-line entry point.
//!
//! ```text
//! homascend run <session-file> [--seed N] [--format text|json] [--timeout SECS]
//! homascend gallery <id> [key=value ...] [--format text|json]
//! ```
//!
//! Exit status: 0 all assertions hold; 1 an equivalence assertion failed
//! (the witness is printed); 2 usage or parse error; 3 resource bound hit.

use std::time::{Duration, Instant};

use crate::error::Error;
use crate::runner::{emit, run, EmitFormat};
use crate::session::parse_session;

const USAGE: &str = "\
usage:
  homascend run <session-file> [--seed N] [--format text|json] [--timeout SECS]
  homascend gallery <2.8|2.9|2.10|2.11> [key=value ...] [--format text|json]

environment:
  HOMASCEND_THREADS   caps command-level parallelism (default 1)
";

pub fn cli_main() -> i32 {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match dispatch(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Parse { .. } => 2,
                Error::EquivalenceViolation { .. } => 1,
                _ => 2,
            }
        }
    }
}

fn dispatch(args: &[String]) -> Result<i32, Error> {
    let Some(cmd) = args.first() else {
        eprint!("{USAGE}");
        return Ok(2);
    };
    match cmd.as_str() {
        "run" => {
            let Some(path) = args.get(1) else {
                eprint!("{USAGE}");
                return Ok(2);
            };
            let opts = parse_opts(&args[2..])?;
            let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
                line: 0,
                col: 0,
                msg: format!("cannot read {path}: {e}"),
            })?;
            run_session_text(&text, &opts)
        }
        "gallery" => {
            let Some(id) = args.get(1) else {
                eprint!("{USAGE}");
                return Ok(2);
            };
            let mut params = String::new();
            let mut rest = Vec::new();
            for a in &args[2..] {
                if a.contains('=') && !a.starts_with("--") {
                    params.push(' ');
                    params.push_str(a);
                } else {
                    rest.push(a.clone());
                }
            }
            let opts = parse_opts(&rest)?;
            let text = format!("cmd gallery {id}{params}\n");
            run_session_text(&text, &opts)
        }
        "--help" | "-h" | "help" => {
            print!("{USAGE}");
            Ok(0)
        }
        other => {
            eprintln!("unknown subcommand {other:?}");
            eprint!("{USAGE}");
            Ok(2)
        }
    }
}

struct Opts {
    seed: Option<u64>,
    format: EmitFormat,
    timeout: Option<Duration>,
}

fn parse_opts(args: &[String]) -> Result<Opts, Error> {
    let mut opts = Opts {
        seed: None,
        format: EmitFormat::Text,
        timeout: None,
    };
    let mut i = 0;
    let arg_err = |msg: String| Error::Parse {
        line: 0,
        col: 0,
        msg,
    };
    while i < args.len() {
        match args[i].as_str() {
            "--seed" => {
                i += 1;
                let v = args
                    .get(i)
                    .ok_or_else(|| arg_err("--seed needs a value".into()))?;
                opts.seed = Some(v.parse().map_err(|_| arg_err(format!("bad seed {v:?}")))?);
            }
            "--format" => {
                i += 1;
                let v = args
                    .get(i)
                    .ok_or_else(|| arg_err("--format needs a value".into()))?;
                opts.format = match v.as_str() {
                    "text" => EmitFormat::Text,
                    "json" => EmitFormat::Json,
                    other => return Err(arg_err(format!("unknown format {other:?}"))),
                };
            }
            "--timeout" => {
                i += 1;
                let v = args
                    .get(i)
                    .ok_or_else(|| arg_err("--timeout needs a value".into()))?;
                let secs: u64 = v
                    .parse()
                    .map_err(|_| arg_err(format!("bad timeout {v:?}")))?;
                opts.timeout = Some(Duration::from_secs(secs));
            }
            other => return Err(arg_err(format!("unknown option {other:?}"))),
        }
        i += 1;
    }
    Ok(opts)
}

fn run_session_text(text: &str, opts: &Opts) -> Result<i32, Error> {
    let start = Instant::now();
    let mut session = parse_session(text)?;
    if let Some(seed) = opts.seed {
        session.config.seed = seed;
    }
    let deadline = opts.timeout.map(|t| start + t);
    let report = run(&session, deadline)?;
    print!("{}", emit(&report, opts.format));
    eprintln!("wall-time: {:.3}s", start.elapsed().as_secs_f64());
    if report.incomplete {
        return Ok(3);
    }
    Ok(0)
}
