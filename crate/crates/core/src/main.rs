use std::io::Write;

fn main() {
    let code = std::thread::Builder::new()
        .stack_size(512 << 20)
        .spawn(|| {
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            let code = freedesc::cli::run_cli(std::env::args_os(), &mut out, &mut std::io::stderr());
            let _ = out.flush();
            code
        })
        .expect("spawn main thread")
        .join()
        .unwrap_or(freedesc::cli::EXIT_INTERNAL);
    std::process::exit(code);
}
