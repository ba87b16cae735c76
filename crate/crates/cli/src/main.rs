use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = exprk_cli::Cli::parse();
    let mut out = std::io::stdout().lock();
    let code = exprk_cli::execute(cli, &mut out);
    std::process::exit(code);
}
