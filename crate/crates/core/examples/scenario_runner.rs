//! Runs an inline scenario through the same code path as the command-line tool.

use anisoscat::cli::{execute, ScenarioConfig};

const SCENARIO: &str = r#"
experiment = "decay-fit"
name = "inline"

[symbol]
blocks = [{ dim = 1, exponent = "3/2", kind = "positive" }]

[lattice]
points = [2048]
half_length = [400.0]

[decay-fit]
block = 1
eps = 1.0
"#;

fn main() -> anisoscat::Result<()> {
    let cfg = ScenarioConfig::from_toml(SCENARIO)?;
    let out = execute(&cfg, 1)?;
    for line in &out.log {
        println!("{line}");
    }
    for (name, table) in &out.tables {
        println!("detail_{name}.csv:\n{}", table.to_csv());
    }
    println!("{}", serde_json::to_string_pretty(&out.summary["results"]["fit"]).expect("json"));
    Ok(())
}
