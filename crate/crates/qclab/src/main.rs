use qclab::error::Error;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    std::panic::set_hook(Box::new(|info| {
        eprintln!("{}", Error::Internal(info.to_string()).to_line());
        std::process::exit(3);
    }));
    std::process::exit(qclab::cli::main_with(std::env::args_os()));
}
