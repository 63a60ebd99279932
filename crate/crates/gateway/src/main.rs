use clap::Parser;
use fedfeed::cli::{run_fedfeed, FedfeedCli};

fn main() -> anyhow::Result<()> {
    run_fedfeed(FedfeedCli::parse())
}
