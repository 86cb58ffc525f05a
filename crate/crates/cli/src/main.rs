use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = shoebox_cli::Cli::parse();
    if let Err(err) = shoebox_cli::run(cli) {
        eprintln!("error: {}", shoebox_cli::error_message(&err));
        std::process::exit(shoebox_cli::exit_code(&err));
    }
}
