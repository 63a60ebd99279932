use clap::Parser;
use fedfeed::cli::{run_feed, FeedCli};

fn main() -> anyhow::Result<()> {
    run_feed(FeedCli::parse())
}
