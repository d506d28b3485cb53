//! Regenerates every table and figure dataset into one directory, with a
//! manifest of content hashes. Same as `photogemm reproduce-paper`.
//!
//! ```text
//! cargo run --release --example reproduce_all [out-dir]
//! ```

use photogemm::cli::{run, Command, RunConfig};

fn main() {
    let out_dir = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "photogemm-out".into());
    let cfg = RunConfig {
        out_dir: out_dir.into(),
        workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        platform_config: None,
        job: Command::ReproducePaper,
    };
    match run(&cfg) {
        Ok(m) => {
            for f in &m.files {
                println!("{:>8} B  {}  {}", f.bytes, &f.sha256[..16], f.path);
            }
        }
        Err(e) => {
            eprintln!("{}", photogemm::cli::error_report(&e));
            std::process::exit(photogemm::cli::exit_code(&e));
        }
    }
}
