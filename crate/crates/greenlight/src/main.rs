use std::process::exit;

fn main() {
    exit(greenlight::cli::cli_main(std::env::args_os()))
}
