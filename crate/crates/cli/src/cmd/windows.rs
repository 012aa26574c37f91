use anyhow::{anyhow, Result};
use clap::Args;
use subtab_core::divide_table;
use subtab_core::repr::{encode_coordinate, serialize_window};
use subtab_core::selector::oracle_select;

use crate::{InputArgs, WindowArgs};

#[derive(Args, Debug)]
pub struct WindowsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub window: WindowArgs,
    /// Record to dump, by question id; defaults to the first record.
    #[arg(long)]
    pub question_id: Option<String>,
    /// Also print the oracle target of each window.
    #[arg(long)]
    pub targets: bool,
}

pub fn run(args: WindowsArgs) -> Result<()> {
    let examples = args.input.load()?;
    let ex = match &args.question_id {
        Some(id) => examples
            .iter()
            .find(|e| &e.question_id == id)
            .ok_or_else(|| anyhow!("no record with question id '{id}'"))?,
        None => examples.first().ok_or_else(|| anyhow!("corpus is empty"))?,
    };
    let windows = divide_table(&ex.table, args.window.config()?)?;
    println!(
        "{} / {}: {}x{} table, {} window(s)",
        ex.table_id,
        ex.question_id,
        ex.table.n_rows(),
        ex.table.n_cols(),
        windows.len()
    );
    for (i, w) in windows.iter().enumerate() {
        let (r, c) = w.global_origin();
        println!("\n## window {i} at ({r},{c}), {}x{}", w.height(), w.width());
        println!("{}", serialize_window(w));
        if args.targets {
            let target = oracle_select(w, &ex.annotation);
            println!("-- target\n{}", encode_coordinate(w, &target)?);
        }
    }
    Ok(())
}
