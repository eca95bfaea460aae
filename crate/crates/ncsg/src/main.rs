fn main() {
    std::process::exit(ncsg::cli::cli_dispatch(std::env::args()));
}
