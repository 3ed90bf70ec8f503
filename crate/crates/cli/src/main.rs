use clap::Parser;

use polyot_cli::config::Cli;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            std::process::exit(if usage { 1 } else { 0 });
        }
    };
    let (command, flags) = cli.command.split();
    let result = polyot_cli::init_threads().and_then(|_| polyot_cli::dispatch(command, flags));
    match result {
        Ok(report) => {
            for c in &report.checks {
                println!("{} {}", c.check_id, if c.passed() { "pass" } else { "FAIL" });
            }
        }
        Err(e) => {
            eprintln!("polyot: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
