fn main() {
    std::process::exit(lsim_cli::dispatch(std::env::args_os()));
}
