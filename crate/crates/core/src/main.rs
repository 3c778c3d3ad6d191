fn main() {
    std::process::exit(maplearn::cli::cli_main(std::env::args_os()));
}
