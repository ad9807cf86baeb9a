use std::process::ExitCode;

fn main() -> ExitCode {
    molgen::cli::main_entry()
}
