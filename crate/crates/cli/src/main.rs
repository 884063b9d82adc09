use std::process::ExitCode;

use clap::Parser;
use vqh_cli::{Cli, Shell};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let mut shell = Shell::open(cli.out_dir);
    let mut out = std::io::stdout().lock();
    let code = match cli.command {
        Some(command) => match shell.execute(command, &mut out) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("error: {e}");
                e.exit_code()
            }
        },
        None => shell.repl(std::io::stdin().lock(), &mut out, &mut std::io::stderr()),
    };
    ExitCode::from(code as u8)
}
