fn main() {
    std::process::exit(plasmodium::cli::cli_main(std::env::args_os()));
}
