use clap::Parser;
use romforge_cli::error::exit;
use romforge_cli::{run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::ARGUMENT } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    // ROMFORGE_THREADS caps the worker pool; unset means one per core.
    if let Ok(v) = std::env::var("ROMFORGE_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
            _ => {
                eprintln!("error: ROMFORGE_THREADS must be a positive integer, got '{v}'");
                std::process::exit(exit::ARGUMENT);
            }
        }
    }
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
