fn main() {
    std::process::exit(wslln::cli::main_with(std::env::args_os()));
}
