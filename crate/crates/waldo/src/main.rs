use std::process::ExitCode;

fn main() -> ExitCode {
    waldo::cli::main_entry()
}
