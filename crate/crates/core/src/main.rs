fn main() {
    std::process::exit(spreadscope::cli::run(std::env::args_os()));
}
