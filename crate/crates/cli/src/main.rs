fn main() { std::process::exit(sns_cli::cli_main(std::env::args().collect())); }
