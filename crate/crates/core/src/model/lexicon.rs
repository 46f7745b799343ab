/// Lowercases and collapses internal whitespace runs to one space.
pub fn normalize_phrase(raw: &str) -> String {
    raw.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Phrases shorter than this must sit on word edges ("id" must not hit "video").
const WORD_EDGE_BELOW: usize = 4;

/// True when `phrase` occurs in `haystack`. Both are expected lowercase.
pub fn phrase_matches(haystack: &str, phrase: &str) -> bool {
    if phrase.is_empty() {
        return false;
    }
    if phrase.chars().count() >= WORD_EDGE_BELOW {
        return haystack.contains(phrase);
    }
    haystack.match_indices(phrase).any(|(start, m)| {
        let before = haystack[..start].chars().next_back();
        let after = haystack[start + m.len()..].chars().next();
        !before.is_some_and(char::is_alphanumeric) && !after.is_some_and(char::is_alphanumeric)
    })
}
