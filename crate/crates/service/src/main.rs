use std::process::ExitCode;

fn main() -> ExitCode {
    erbench::cli::main()
}
