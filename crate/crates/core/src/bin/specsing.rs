fn main() { std::process::exit(specsing::cli::main()); }
