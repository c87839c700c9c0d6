fn main() {
    std::process::exit(carnot::cli::run(std::env::args_os()));
}
