use std::io::Write;

fn main() {
    let outcome = carnot_core::cli::run(std::env::args_os());
    if !outcome.stdout.is_empty() {
        let mut out = std::io::stdout().lock();
        let _ = out.write_all(outcome.stdout.as_bytes());
        if !outcome.stdout.ends_with('\n') {
            let _ = out.write_all(b"\n");
        }
    }
    if !outcome.stderr.is_empty() {
        let mut err = std::io::stderr().lock();
        let _ = err.write_all(outcome.stderr.as_bytes());
        if !outcome.stderr.ends_with('\n') {
            let _ = err.write_all(b"\n");
        }
    }
    std::process::exit(outcome.code);
}
