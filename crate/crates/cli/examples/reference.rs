//! Prints the annotated reference configuration.

fn main() -> Result<(), cornerpmt::CliError> {
    print!("{}", cornerpmt::config::reference_toml()?);
    Ok(())
}
