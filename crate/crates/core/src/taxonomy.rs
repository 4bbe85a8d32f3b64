//! Style and subject labels used by the generated corpora.

/// Closed set of style labels a generated poem may carry: the 23 tagged forms
/// of the human corpus plus the generic "a poem".
pub const GENERATED_STYLES: [&str; 24] = [
    "ballad",
    "ghazal",
    "haiku",
    "limerick",
    "pantoum",
    "sestina",
    "sonnet",
    "villanelle",
    "blank verse",
    "free verse",
    "common measure",
    "couplet",
    "quatrain",
    "tercet",
    "ars poetica",
    "aubade",
    "concrete poetry",
    "dramatic monologue",
    "ekphrasis",
    "elegy",
    "ode",
    "pastoral",
    "prose poem",
    "a poem",
];

pub const GENERAL_SUBJECTS: [&str; 9] = [
    "activities",
    "arts & sciences",
    "living",
    "love",
    "mythology & folklore",
    "nature",
    "religion",
    "relationships",
    "social commentaries",
];

pub const OCCASION_SUBJECTS: [&str; 11] = [
    "anniversary",
    "birth",
    "birthdays",
    "engagement",
    "farewells & good luck",
    "funerals",
    "get well & recovery",
    "graduation",
    "gratitude & apologies",
    "toasts & celebrations",
    "weddings",
];

pub const HOLIDAY_SUBJECTS: [&str; 20] = [
    "cinco de mayo",
    "christmas",
    "easter",
    "father's day",
    "halloween",
    "hanukkah",
    "independence day",
    "kwanzaa",
    "labor day",
    "memorial day",
    "mother's day",
    "new year",
    "passover",
    "ramadan",
    "rosh hashanah",
    "september 11th",
    "st. patrick's day",
    "thanksgiving",
    "valentine's day",
    "yom kippur",
];

/// All 40 subjects in table order (general, occasions, holidays).
pub fn all_subjects() -> Vec<&'static str> {
    GENERAL_SUBJECTS
        .iter()
        .chain(OCCASION_SUBJECTS.iter())
        .chain(HOLIDAY_SUBJECTS.iter())
        .copied()
        .collect()
}

/// Subjects of a named group: `general`, `occasions` or `holidays`.
pub fn subject_group(name: &str) -> Option<&'static [&'static str]> {
    match name.trim().to_ascii_lowercase().as_str() {
        "general" | "subjects" => Some(&GENERAL_SUBJECTS),
        "occasion" | "occasions" => Some(&OCCASION_SUBJECTS),
        "holiday" | "holidays" => Some(&HOLIDAY_SUBJECTS),
        _ => None,
    }
}

pub fn is_generated_style(style: &str) -> bool {
    GENERATED_STYLES.contains(&style)
}

/// Conventional length in lines of the fixed forms.
pub fn conventional_length(style: &str) -> Option<usize> {
    match style.trim().to_ascii_lowercase().as_str() {
        "sonnet" => Some(14),
        "villanelle" => Some(19),
        "sestina" => Some(39),
        "limerick" => Some(5),
        "haiku" => Some(3),
        _ => None,
    }
}
