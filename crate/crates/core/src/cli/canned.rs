//! Scenario documents compiled into the binary for `reproduce`.

use super::scenario::{parse_scenario, Scenario};
use crate::error::{Error, Result};

pub const CANNED: &[(&str, &str)] = &[
    ("stry-dfg", include_str!("../../scenarios/stry-dfg.ini")),
    ("pittman-lens", include_str!("../../scenarios/pittman-lens.ini")),
    ("sqm-law", include_str!("../../scenarios/sqm-law.ini")),
    ("young-visibility", include_str!("../../scenarios/young-visibility.ini")),
    ("ghost-doubleslit", include_str!("../../scenarios/ghost-doubleslit.ini")),
    ("dfg-xi-scan", include_str!("../../scenarios/dfg-xi-scan.ini")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    CANNED.iter().map(|(n, _)| *n)
}

pub fn canned_text(name: &str) -> Result<&'static str> {
    CANNED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| {
            let known: Vec<&str> = names().collect();
            Error::Validation(format!("no canned scenario '{name}' (known: {})", known.join(", ")))
        })
}

pub fn canned(name: &str) -> Result<Scenario> {
    parse_scenario(canned_text(name)?).map_err(|e| e.context(format!("canned scenario '{name}'")))
}
