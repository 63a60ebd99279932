use clap::Parser;
use fedfeed::cli::{run_persona, PersonaCli};

fn main() -> anyhow::Result<()> {
    run_persona(PersonaCli::parse())
}
