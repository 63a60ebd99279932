use clap::Parser;
use fedfeed::cli::{run_socialrank, SocialrankCli};

fn main() -> anyhow::Result<()> {
    run_socialrank(SocialrankCli::parse())
}
