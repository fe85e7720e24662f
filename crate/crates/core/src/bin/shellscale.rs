fn main() {
    if let Ok(n) = std::env::var("SHELLSCALE_THREADS") {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: SHELLSCALE_THREADS must be a positive integer, got `{n}`");
                std::process::exit(1);
            }
        }
    }
    std::process::exit(shellscale::cli::main_with_args(std::env::args_os()));
}
