use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = resistlab_cli::Cli::parse();
    if let Err(err) = resistlab_cli::run(cli) {
        eprintln!("error: {:#}", err.source);
        std::process::exit(err.code);
    }
}
