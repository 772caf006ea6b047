use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use radius_lab::experiment::{flag_value, run, ExperimentConfig, EXPERIMENTS};
use serde_json::{json, Map, Value};

/// Radii of information experiments.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment. Parameters are `--key value` pairs after the
    /// experiment name and override keys of `--config`.
    Run {
        experiment: String,
        /// JSON config file (a flat object of parameters).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write the result document here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the experiment's table here, if it has one.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Worker threads; results do not depend on this.
        #[arg(long)]
        threads: Option<usize>,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--KEY VALUE")]
        params: Vec<String>,
    },
    /// List experiment names.
    List,
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

/// Runner options given after the experiment name.
#[derive(Default)]
struct Late {
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    csv: Option<PathBuf>,
    threads: Option<String>,
}

fn collect_params(tokens: &[String], late: &mut Late) -> Result<Map<String, Value>, String> {
    let mut map = Map::new();
    let mut it = tokens.iter();
    while let Some(tok) = it.next() {
        let key = tok.strip_prefix("--").ok_or_else(|| format!("expected --key, found '{tok}'"))?;
        let (key, raw) = match key.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => (key.to_string(), it.next().ok_or_else(|| format!("missing value for --{key}"))?.clone()),
        };
        match key.as_str() {
            "" => return Err("empty flag name".into()),
            "config" => late.config = Some(raw.into()),
            "out" => late.out = Some(raw.into()),
            "csv" => late.csv = Some(raw.into()),
            "threads" => late.threads = Some(raw),
            _ => {
                map.insert(key, flag_value(&raw));
            }
        }
    }
    Ok(map)
}

fn write_or_print(path: &Option<PathBuf>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let Command::Run { experiment, config, out, csv, threads, params } = cli.command else {
        use std::io::Write;
        let mut stdout = std::io::stdout().lock();
        for name in EXPERIMENTS {
            if writeln!(stdout, "{name}").is_err() {
                break;
            }
        }
        return ExitCode::SUCCESS;
    };
    let mut late = Late::default();
    let flags = match collect_params(&params, &mut late) {
        Ok(f) => f,
        Err(e) => return usage(e),
    };
    let config = late.config.or(config);
    let out = late.out.or(out);
    let csv = late.csv.or(csv);
    let threads = match late.threads.map(|t| t.parse::<usize>()) {
        None => threads,
        Some(Ok(n)) => Some(n),
        Some(Err(e)) => return usage(format!("--threads: {e}")),
    };

    let mut map = match &config {
        None => Map::new(),
        Some(path) => {
            let text = match std::fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => return usage(format!("{}: {e}", path.display())),
            };
            match serde_json::from_str::<Value>(&text) {
                Ok(Value::Object(m)) => m,
                Ok(_) => return usage("config file must hold a JSON object"),
                Err(e) => return usage(format!("{}: {e}", path.display())),
            }
        }
    };
    if let Some(name) = map.get("experiment") {
        if name != &json!(experiment) {
            return usage(format!("config names experiment {name}, command line names '{experiment}'"));
        }
    }
    map.extend(flags);
    map.insert("experiment".into(), json!(experiment));
    let cfg = match ExperimentConfig::from_value(Value::Object(map)) {
        Ok(c) => c,
        Err(e) => return usage(e),
    };

    if let Some(n) = threads {
        if n == 0 {
            return usage("--threads must be positive");
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return usage(e);
        }
    }

    let report = match run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            let diag = json!({ "experiment": cfg.experiment, "config_echo": cfg.echo(), "error": e.to_string() });
            let text = serde_json::to_string_pretty(&diag).expect("diagnostic serializes");
            if let Err(io) = write_or_print(&out, &text) {
                eprintln!("error: {io}");
            }
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    if let Err(e) = write_or_print(&out, &text) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    if let (Some(path), Some(table)) = (&csv, &report.csv) {
        if let Err(e) = std::fs::write(path, table) {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    for f in report.pass_flags.iter().filter(|f| !f.pass) {
        eprintln!("FAIL: {}", f.claim);
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
