//! Vocabulary and template loading shared by the subcommands.

use std::path::Path;

use anyhow::{Context, Result};

use mwp_core::realize::TemplateSet;
use mwp_core::vocab::Vocab;

pub fn load_vocab(dir: Option<&Path>) -> Result<Vocab> {
    match dir {
        Some(dir) => {
            Vocab::load_dir(dir).with_context(|| format!("loading vocab from {}", dir.display()))
        }
        None => Ok(Vocab::builtin().clone()),
    }
}

pub fn load_templates(dir: Option<&Path>) -> Result<TemplateSet> {
    match dir {
        Some(dir) => TemplateSet::load_dir(dir)
            .with_context(|| format!("loading templates from {}", dir.display())),
        None => Ok(TemplateSet::builtin()),
    }
}
