mod commands;
mod ppm;

use clap::error::ErrorKind;
use clap::Parser;

fn main() {
    let cli = match commands::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            std::process::exit(0);
        }
        Err(e) => {
            commands::emit_error(&e.to_string(), commands::EXIT_INVALID);
            std::process::exit(commands::EXIT_INVALID);
        }
    };
    if let Err(err) = commands::run(cli) {
        commands::emit_error(&err.message, err.code);
        std::process::exit(err.code);
    }
}
