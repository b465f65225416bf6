fn main() {
    let argv: Vec<String> = std::env::args().collect();
    let code = pointproc_cli::run_cli(&argv, &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
