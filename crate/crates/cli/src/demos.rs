//! Bundled scenarios.

pub const DEMOS: &[(&str, &str)] = &[
    ("schwarz", include_str!("../scenarios/schwarz.json")),
    ("polarization_flow", include_str!("../scenarios/polarization_flow.json")),
    ("kschwarz_counterexample", include_str!("../scenarios/kschwarz_counterexample.json")),
    ("content_identity", include_str!("../scenarios/content_identity.json")),
];

pub const PAPER_SUITE: &str = include_str!("../scenarios/paper_suite.json");

pub fn demo(name: &str) -> Option<&'static str> {
    DEMOS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}
