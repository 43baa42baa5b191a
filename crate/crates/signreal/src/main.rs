fn main() { std::process::exit(signreal::cli::run_from_env()) }
