fn main() {
    std::process::exit(gpseg::cli::run(std::env::args_os()));
}
