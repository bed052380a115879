fn main() {
    std::process::exit(heatbound::cli::dispatch(std::env::args_os()));
}
