use clap::Parser;

use gibbs_cli::args::Cli;

fn main() {
    let cli = Cli::parse();
    match gibbs_cli::run(&cli) {
        Ok(out) => {
            print!("{}", out.text);
            std::process::exit(out.code);
        }
        Err(e) => {
            eprintln!("error: {}", e);
            std::process::exit(e.exit_code());
        }
    }
}
