use clap::Parser;
use magspec_cli::{execute, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let code = match execute(&cli) {
        Ok(artifact) => {
            for c in &artifact.checks {
                log::info!("check {}: {} ({})", c.name, if c.passed { "PASS" } else { "FAIL" }, c.detail);
            }
            match artifact.verdict() {
                Ok(()) => 0,
                Err(e) => {
                    eprintln!("error: {e}");
                    e.exit_code()
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
