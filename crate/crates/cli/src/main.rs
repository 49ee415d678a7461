fn main() {
    let env_seed = std::env::var(hdwear::config::SEED_ENV).ok();
    let code = hdwear::run(
        std::env::args_os(),
        env_seed.as_deref(),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    std::process::exit(code);
}
