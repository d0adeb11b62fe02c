#![no_main]

use clap::Parser;
use libfuzzer_sys::fuzz_target;
use semiquant::cli::{Cli, Command};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let args: Vec<&str> = std::iter::once("semiquant").chain(text.split_whitespace()).collect();
    // config paths would reach the filesystem
    if args.iter().any(|a| a.starts_with("--config")) {
        return;
    }
    let Ok(cli) = Cli::try_parse_from(args) else { return };
    let common = match &cli.command {
        Command::Spectrum(a) | Command::Compare(a) | Command::Critical(a) | Command::Count(a) => a,
        Command::Plotdata(p) => &p.common,
    };
    let _ = common.resolve();
});
