use clap::Parser;

fn main() {
    let cli = gf2mat::cli::Cli::parse();
    let code = gf2mat::cli::run(cli, &mut std::io::stdout().lock());
    std::process::exit(code);
}
