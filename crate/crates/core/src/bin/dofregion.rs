use clap::Parser;
use dof_region::cli::{run_cli, CliInvocation};

fn main() {
    let outcome = run_cli(&CliInvocation::parse());
    print!("{}", outcome.output);
    std::process::exit(outcome.exit_code);
}
