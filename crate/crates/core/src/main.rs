use std::io::Write;

fn main() {
    if let Ok(v) = std::env::var("ECMSIM_THREADS") {
        match v.trim().parse::<usize>() {
            Ok(0) => {}
            Ok(n) => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            Err(_) => {
                eprintln!("error: ECMSIM_THREADS must be a non-negative integer, got `{v}`");
                std::process::exit(1);
            }
        }
    }
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let code = ecmsim::cli::run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock());
    let _ = std::io::stdout().flush();
    std::process::exit(code);
}
