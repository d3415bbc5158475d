//! Bundled experiment presets, one JSON config per benchmark suite.

pub const NAMES: &[&str] = &[
    "quad-ne-monotone",
    "quad-ne-nonmonotone",
    "quad-ni-test1",
    "quad-ni-test2",
    "games-ne",
    "games-ni",
    "logit-ne",
    "logit-ni",
];

pub fn load(name: &str) -> Option<&'static str> {
    Some(match name {
        "quad-ne-monotone" => include_str!("../presets/quad-ne-monotone.json"),
        "quad-ne-nonmonotone" => include_str!("../presets/quad-ne-nonmonotone.json"),
        "quad-ni-test1" => include_str!("../presets/quad-ni-test1.json"),
        "quad-ni-test2" => include_str!("../presets/quad-ni-test2.json"),
        "games-ne" => include_str!("../presets/games-ne.json"),
        "games-ni" => include_str!("../presets/games-ni.json"),
        "logit-ne" => include_str!("../presets/logit-ne.json"),
        "logit-ni" => include_str!("../presets/logit-ni.json"),
        _ => return None,
    })
}
