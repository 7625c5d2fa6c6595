fn main() {
    std::process::exit(bess_epc::cli::run(std::env::args_os()));
}
