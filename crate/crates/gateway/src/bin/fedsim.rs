use clap::Parser;
use fedfeed::cli::{run_fedsim, FedsimCli};

fn main() -> anyhow::Result<()> {
    run_fedsim(FedsimCli::parse())
}
