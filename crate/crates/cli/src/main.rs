use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

fn main() -> ExitCode {
    let mut out = BufWriter::new(io::stdout().lock());
    let mut code = fraclog_cli::execute(std::env::args_os(), &mut out, &mut io::stderr());
    if out.flush().is_err() && code == 0 {
        code = 1;
    }
    ExitCode::from(code as u8)
}
