use std::process::ExitCode;

fn main() -> ExitCode {
    let code = gramconv::cli::run(std::env::args(), &mut std::io::stdout(), &mut std::io::stderr());
    ExitCode::from(code as u8)
}
