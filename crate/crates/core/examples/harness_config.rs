//! Running a harness command from a config text, as the binary does.

use metlab::harness::{default_table, execute, parse_assignments, Command, ExperimentConfig};

const CONFIG: &str = "
# moment curve, five levels
n = 1
family = moment
p = 2
q = 2
delta = 3..7
";

fn main() -> metlab::Result<()> {
    let mut table = default_table();
    parse_assignments(CONFIG, &mut table)?;
    let config = ExperimentConfig::from_table(table)?;
    let outcome = execute(Command::Counterexample, &config)?;
    print!("{}", String::from_utf8_lossy(&outcome.output));
    for m in outcome.messages {
        eprintln!("{m}");
    }
    Ok(())
}
