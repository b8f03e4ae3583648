//! Reading a MAGFLOW-SPEC file, sampling it to a grid and round-tripping
//! both formats.

use magflow::fields::{parse_grid, parse_spec, write_grid, write_spec, FieldGrid};

fn main() -> magflow::Result<()> {
    let text = include_str!("data/fam2.spec");
    let spec = parse_spec(text)?;
    assert_eq!(parse_spec(&write_spec(&spec))?, spec);
    let grid = FieldGrid::sample(&spec, 16, 16)?;
    let out = write_grid(&grid);
    assert_eq!(parse_grid(&out)?, grid);
    println!("{}", out.lines().take(3).collect::<Vec<_>>().join("\n"));
    println!("... {} lines, round trips exact", out.lines().count());
    Ok(())
}
