fn main() {
    if let Err(err) = hexazero::cli::run() {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
