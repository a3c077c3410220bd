use std::process::ExitCode;

use kantorovich_gruss::cli::{parse_config, run, ConfigError};

fn main() -> ExitCode {
    let config = match parse_config(std::env::args_os()) {
        Ok(c) => c,
        Err(ConfigError::Usage(e)) => e.exit(),
        Err(e) => {
            eprintln!("kgruss: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&config) {
        Ok(summary) => {
            match serde_json::to_string(&summary) {
                Ok(line) => eprintln!("{line}"),
                Err(e) => eprintln!("kgruss: cannot encode summary: {e}"),
            }
            if summary.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("kgruss: {e}");
            ExitCode::from(2)
        }
    }
}
