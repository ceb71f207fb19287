use std::io::Write;

fn main() {
    if let Some(n) = std::env::var("STEERNET_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let code = steernet::cli::run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock());
    let _ = std::io::stdout().flush();
    std::process::exit(code);
}
