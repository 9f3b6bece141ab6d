fn main() {
    std::process::exit(germdyn::cli::app::run(std::env::args_os()));
}
