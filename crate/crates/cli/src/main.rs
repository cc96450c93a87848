use clap::Parser;

fn main() {
    let cli = algact_cli::Cli::parse();
    match algact_cli::run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}
