//! Command-line entry point.

/// Dispatch argv; returns the process exit code.
pub fn run(_argv: &[String]) -> i32 {
    2
}
