fn main() {
    std::process::exit(fslt_cli::dispatch(std::env::args_os()));
}
