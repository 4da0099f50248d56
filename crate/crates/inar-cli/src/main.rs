use std::process::exit;

fn main() {
    exit(inar_cli::cli_dispatch(std::env::args_os()));
}
