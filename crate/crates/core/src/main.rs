fn main() {
    std::process::exit(riemann_gluer::cli::run(std::env::args_os()));
}
