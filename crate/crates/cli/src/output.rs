use std::fmt;
use std::io::Write;
use std::path::Path;

use isocurse::io::Table;
use isocurse::Error;
use serde::Serialize;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or parameters. Exit status 2.
    Usage(String),
    /// A computation could not be carried out. Exit status 3.
    Numerical(String),
    /// Reading or writing failed. Exit status 1.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Numerical(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::InvalidDimension(_)
            | Error::InvalidExponent(_)
            | Error::ExponentBelowTwo { .. }
            | Error::InfiniteExponent { .. }
            | Error::InvalidArgument { .. }
            | Error::DimensionMismatch { .. }
            | Error::Parse(_) => CliError::Usage(msg),
            Error::Io(_) => CliError::Io(msg),
            _ => CliError::Numerical(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// CSV with optional leading `# ` comment lines.
pub fn csv_bytes(comments: &[String], table: &Table) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    for c in comments {
        writeln!(buf, "# {c}")?;
    }
    table.write_csv(&mut buf)?;
    Ok(buf)
}

pub fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut buf = serde_json::to_vec_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    buf.push(b'\n');
    Ok(buf)
}

/// Single writer: the whole output is assembled first, then written once.
pub fn emit(bytes: &[u8], out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_kind() {
        assert_eq!(CliError::from(Error::InvalidDimension(0)).exit_code(), 2);
        assert_eq!(CliError::from(Error::Parse("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(Error::EmptyDeltaWindow { ratio: 2.5 }).exit_code(), 3);
        assert_eq!(
            CliError::from(Error::PsiNormNotBracketed { lambda: 1.0, mean: 3.0 }).exit_code(),
            3
        );
        let io = std::io::Error::new(std::io::ErrorKind::NotFound, "gone");
        assert_eq!(CliError::from(io).exit_code(), 1);
    }

    #[test]
    fn csv_comments_precede_the_header() {
        let mut t = Table::new(["a", "b"]);
        t.push(vec!["1".into(), "2".into()]);
        let bytes = csv_bytes(&["note".into()], &t).unwrap();
        assert_eq!(String::from_utf8(bytes).unwrap(), "# note\na,b\n1,2\n");
    }
}
