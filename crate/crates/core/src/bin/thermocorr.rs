fn main() {
    std::process::exit(thermocorr::cli::run(std::env::args_os()));
}
