use clap::Parser;
use itersplit::SplitError;
use itersplit_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let diverged = e
                .downcast_ref::<SplitError>()
                .is_some_and(|s| matches!(s, SplitError::Divergence { .. }));
            std::process::exit(if diverged { itersplit_cli::EXIT_DIVERGED } else { 1 });
        }
    }
}
