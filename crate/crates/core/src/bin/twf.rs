fn main() {
    std::process::exit(twisted_fourier::cli::main());
}
