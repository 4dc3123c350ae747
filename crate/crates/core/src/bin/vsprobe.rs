fn main() {
    std::process::exit(vsprobe::cli::run(std::env::args_os()));
}
