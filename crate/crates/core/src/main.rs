fn main() {
    std::process::exit(hs2s::cli::run(std::env::args_os()));
}
