use std::process::ExitCode;

fn main() -> ExitCode {
    sdc::cli::main()
}
