fn main() {
    std::process::exit(testscore::cli::run(std::env::args_os()));
}
