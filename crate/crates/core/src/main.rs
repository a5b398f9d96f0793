fn main() {
    let code = imputed_extremes::cli::run(std::env::args_os(), &mut std::io::stdout().lock());
    std::process::exit(code);
}
