fn main() {
    std::process::exit(obench::cli::dispatch(std::env::args_os()));
}
