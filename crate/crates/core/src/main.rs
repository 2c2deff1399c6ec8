fn main() {
    std::process::exit(coldplasma::cli::main());
}
