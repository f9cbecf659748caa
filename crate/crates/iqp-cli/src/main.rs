use clap::Parser;

fn main() {
    // Exit 3 for usage errors: clap's default exit 2 would collide with the
    // inconclusive-verdict code.
    let cli = match iqp_cli::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match iqp_cli::run(&cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            use std::io::Write;
            let _ = writeln!(std::io::stderr(), "error: {err:#}");
            std::process::exit(3);
        }
    }
}
