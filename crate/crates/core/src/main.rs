use clap::Parser;
use photogemm::cli::{report_failure, run, Cli};

fn main() {
    let cli = Cli::parse();
    let fallback_dir = cli.out.clone();
    let config = match cli.into_run_config() {
        Ok(c) => c,
        Err(e) => std::process::exit(report_failure(Some(&fallback_dir), &e)),
    };
    match run(&config) {
        Ok(manifest) => {
            for f in &manifest.files {
                println!("{}  {}", f.sha256, config.out_dir.join(&f.path).display());
            }
        }
        Err(e) => std::process::exit(report_failure(Some(&config.out_dir), &e)),
    }
}
