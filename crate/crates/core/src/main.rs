fn main() {
    std::process::exit(stereo_decorr::cli::main());
}
