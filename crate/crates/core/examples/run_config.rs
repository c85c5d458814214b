//! Drive the command layer from a TOML config, as the binary does, and keep
//! the output in memory.

use squeezed_pairs::commands;
use squeezed_pairs::config::RunConfig;

fn main() -> squeezed_pairs::Result<()> {
    let config = RunConfig::from_toml_str(
        r#"
        [input]
        r = 0.85
        [truncation]
        n_max = 30
        "#,
    )?;
    let out = commands::dist(&config, false)?;
    for a in &out.artifacts {
        println!("{} ({} bytes)", a.file_name, a.contents.len());
    }
    print!(
        "{}",
        out.summary.lines().take(8).collect::<Vec<_>>().join("\n")
    );
    println!();
    Ok(())
}
