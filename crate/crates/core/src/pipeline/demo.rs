//! Built-in catalog and fixture sets for offline runs.

use crate::retrieval::Catalog;

pub const DEFAULT_DEMO: &str = "western_guestroom";
pub const DEMOS: [&str; 2] = ["western_guestroom", "chinese_residence"];

const CATALOG: &str = include_str!("../../assets/demo_catalog.json");
const WESTERN: &str = include_str!("../../assets/western_guestroom.fixtures.json");
const CHINESE: &str = include_str!("../../assets/chinese_residence.fixtures.json");

/// The twelve-asset demo catalog. Every asset is a procedural box, so the
/// catalog needs no files on disk.
pub fn catalog() -> Catalog {
    Catalog::from_json("", CATALOG).expect("demo catalog is valid")
}

pub fn catalog_json() -> &'static str {
    CATALOG
}

pub fn fixtures(name: &str) -> Option<&'static str> {
    match name {
        "western_guestroom" => Some(WESTERN),
        "chinese_residence" => Some(CHINESE),
        _ => None,
    }
}

pub fn description(name: &str) -> Option<&'static str> {
    match name {
        "western_guestroom" => Some(
            "A western guestroom: a bedroom with a small bathroom to the east and a sitting room with a curved bay to the north.",
        ),
        "chinese_residence" => Some(
            "A traditional Chinese residence framed in timber: a central hall between a bedroom and a study.",
        ),
        _ => None,
    }
}
