use std::process::ExitCode;

fn main() -> ExitCode {
    let outcome = nlfsr::cli::run_command(std::env::args_os());
    print!("{}", outcome.stdout);
    eprint!("{}", outcome.stderr);
    ExitCode::from(outcome.code)
}
