use std::process::ExitCode;

fn main() -> ExitCode {
    match qubit_bandit::cli::run(std::env::args_os()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let message = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {}", e.kind(), message);
            ExitCode::FAILURE
        }
    }
}
