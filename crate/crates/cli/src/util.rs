//! Small CLI helpers: colored diagnostics and output directory handling.

use std::io::IsTerminal;
use std::path::Path;

use anyhow::{Context, Result};

/// ANSI color is used only on a terminal and only when `EDGEKIT_NO_COLOR`
/// is unset.
fn color_enabled() -> bool {
    std::env::var_os("EDGEKIT_NO_COLOR").is_none() && std::io::stderr().is_terminal()
}

pub fn warn(msg: &str) {
    if color_enabled() {
        eprintln!("\x1b[33mwarning\x1b[0m: {msg}");
    } else {
        eprintln!("warning: {msg}");
    }
}

pub fn error(msg: &str) {
    if color_enabled() {
        eprintln!("\x1b[31merror\x1b[0m: {msg}");
    } else {
        eprintln!("error: {msg}");
    }
}

pub fn ensure_out_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))
}
