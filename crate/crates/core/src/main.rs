use clap::Parser;

fn main() {
    let cli = sckn::cli::Cli::parse();
    let code = sckn::cli::run(
        cli,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    std::process::exit(code);
}
