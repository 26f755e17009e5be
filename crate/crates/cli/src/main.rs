use std::process::ExitCode;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    match rvf_cli::parse_args(&argv).and_then(rvf_cli::run) {
        Ok(()) => ExitCode::SUCCESS,
        Err(rvf_cli::CliError::Display(msg)) => {
            print!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("rvf: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
