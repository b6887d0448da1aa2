use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use isaclab_core::checker::{check, cross_validate};

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    /// Pattern JSON file.
    #[arg(long)]
    pub pattern: PathBuf,
    /// Also run the brute-force collision oracle and require agreement.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Exit code 0 on pass, 1 on fail, 2 when the oracle disagrees.
pub fn run(a: &CheckArgs) -> Result<i32> {
    let file = crate::read_pattern(&a.pattern)?;
    if a.oracle {
        let cc = cross_validate(&file.pattern)?;
        crate::emit(&serde_json::to_string_pretty(&cc)?, a.out.as_ref())?;
        if !cc.agree {
            eprintln!("checker and oracle disagree");
            return Ok(2);
        }
        return Ok(if cc.check.pass { 0 } else { 1 });
    }
    let result = check(&file.pattern)?;
    crate::emit(&serde_json::to_string_pretty(&result)?, a.out.as_ref())?;
    Ok(if result.pass { 0 } else { 1 })
}
