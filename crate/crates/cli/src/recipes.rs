//! Bundled experiment configs.

use crate::config::Source;
use crate::error::{CliError, Result};
use std::path::PathBuf;

pub const RECIPES: [(&str, &str); 7] = [
    ("fig3", include_str!("../recipes/fig3.toml")),
    ("fig4", include_str!("../recipes/fig4.toml")),
    ("fig5", include_str!("../recipes/fig5.toml")),
    ("fig6", include_str!("../recipes/fig6.toml")),
    ("fig7", include_str!("../recipes/fig7.toml")),
    ("fig8", include_str!("../recipes/fig8.toml")),
    ("table1", include_str!("../recipes/table1.toml")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    RECIPES.iter().map(|(n, _)| *n)
}

pub fn source(name: &str) -> Result<Source> {
    let key = name.to_ascii_lowercase();
    RECIPES
        .iter()
        .find(|(n, _)| *n == key)
        .map(|(n, text)| Source {
            name: n.to_string(),
            text: text.to_string(),
            base: PathBuf::new(),
        })
        .ok_or_else(|| CliError::UnknownRecipe(name.to_string()))
}
