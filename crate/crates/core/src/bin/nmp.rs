use std::env;
use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    let args: Vec<String> = env::args().collect();
    let code = nmp::cli::run_cli(&args, &mut io::stdout(), &mut io::stderr());
    ExitCode::from(code as u8)
}
