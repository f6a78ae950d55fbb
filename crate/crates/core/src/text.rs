//! Whitespace and case normalization shared by ingest, coverage and filters.

/// Trims and collapses every run of whitespace to a single ASCII space.
pub fn collapse_whitespace(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for word in s.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Matching key used for key terms and substring search: whitespace collapsed
/// and case-folded.
pub fn match_key(s: &str) -> String {
    collapse_whitespace(s).to_lowercase()
}

/// Case-insensitive, whitespace-insensitive substring test.
///
/// `needle_key` must already be a [`match_key`].
pub fn contains_key(haystack: &str, needle_key: &str) -> bool {
    !needle_key.is_empty() && match_key(haystack).contains(needle_key)
}

/// Case-folds and drops punctuation, then collapses whitespace. Used when
/// comparing a predicted answer against a stored one.
pub fn loose_key(s: &str) -> String {
    let stripped: String = s
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect();
    match_key(&stripped)
}

/// Formats a fraction as a percentage with one decimal place, rounding half
/// away from zero. Computed from the integer counts so that ties round
/// exactly.
pub fn percent_1dp(numerator: usize, denominator: usize) -> f64 {
    if denominator == 0 {
        return 0.0;
    }
    let num = numerator as u128 * 2000 + denominator as u128;
    let tenths = num / (2 * denominator as u128);
    tenths as f64 / 10.0
}

/// Rounds an arbitrary percentage to one decimal place, half away from zero.
pub fn round_1dp(pct: f64) -> f64 {
    (pct * 10.0).round() / 10.0
}
