//! Configurations shipped with the tool.

pub const PRESETS: [(&str, &str); 5] = [
    ("coherence-ratio", include_str!("../presets/coherence-ratio.toml")),
    ("threshold", include_str!("../presets/threshold.toml")),
    ("refocus", include_str!("../presets/refocus.toml")),
    ("stark", include_str!("../presets/stark.toml")),
    ("budget", include_str!("../presets/budget.toml")),
];

pub fn get(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}
