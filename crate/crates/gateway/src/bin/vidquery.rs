use clap::Parser;
use fedfeed::cli::{run_vidquery, VidqueryCli};

fn main() -> anyhow::Result<()> {
    run_vidquery(VidqueryCli::parse())
}
