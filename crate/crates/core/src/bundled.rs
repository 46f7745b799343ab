//! Assets compiled into the crate: the default taxonomy and icon templates, the
//! demo app pages with their UI sidecars, and a dummy privacy policy.

use crate::detect::TemplateSet;
use crate::model::load_taxonomy;
use crate::Taxonomy;

pub const TAXONOMY_JSON: &[u8] = include_bytes!("../assets/taxonomy.json");
pub const DUMMY_POLICY_HTML: &str = include_str!("../assets/policy.html");

const TEMPLATES: &[(&str, &[u8])] = &[
    ("templates/account.png", include_bytes!("../assets/templates/account.png")),
    ("templates/camera.png", include_bytes!("../assets/templates/camera.png")),
    ("templates/contacts.png", include_bytes!("../assets/templates/contacts.png")),
    ("templates/identifiers.png", include_bytes!("../assets/templates/identifiers.png")),
    ("templates/location.png", include_bytes!("../assets/templates/location.png")),
    ("templates/microphone.png", include_bytes!("../assets/templates/microphone.png")),
    ("templates/photos.png", include_bytes!("../assets/templates/photos.png")),
];

pub fn taxonomy() -> Taxonomy {
    load_taxonomy(TAXONOMY_JSON).expect("bundled taxonomy is valid")
}

pub fn template_bytes(name: &str) -> Option<&'static [u8]> {
    TEMPLATES.iter().find(|(n, _)| *n == name).map(|(_, b)| *b)
}

pub fn templates() -> TemplateSet {
    TemplateSet::from_taxonomy(&taxonomy(), |name| {
        template_bytes(name).map(<[u8]>::to_vec).ok_or_else(|| std::io::Error::new(std::io::ErrorKind::NotFound, name.to_string()))
    })
    .expect("bundled templates decode")
}

/// Screen conditions of the demo app pages.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Condition {
    IconOnly,
    TextOnly,
    Mixed,
    NoElements,
}

#[derive(Clone, Copy, Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub condition: Condition,
    pub png: &'static [u8],
    pub sidecar: &'static [u8],
}

/// Home (location icon and text), posting (profile, camera and album icons),
/// settings (account text) and rewards (nothing privacy related).
pub const FIXTURES: [Fixture; 4] = [
    Fixture {
        name: "home",
        condition: Condition::Mixed,
        png: include_bytes!("../assets/fixtures/home.png"),
        sidecar: include_bytes!("../assets/fixtures/home.sidecar.json"),
    },
    Fixture {
        name: "posting",
        condition: Condition::IconOnly,
        png: include_bytes!("../assets/fixtures/posting.png"),
        sidecar: include_bytes!("../assets/fixtures/posting.sidecar.json"),
    },
    Fixture {
        name: "settings",
        condition: Condition::TextOnly,
        png: include_bytes!("../assets/fixtures/settings.png"),
        sidecar: include_bytes!("../assets/fixtures/settings.sidecar.json"),
    },
    Fixture {
        name: "rewards",
        condition: Condition::NoElements,
        png: include_bytes!("../assets/fixtures/rewards.png"),
        sidecar: include_bytes!("../assets/fixtures/rewards.sidecar.json"),
    },
];

pub fn fixture(condition: Condition) -> &'static Fixture {
    FIXTURES.iter().find(|f| f.condition == condition).expect("every condition has a fixture")
}
