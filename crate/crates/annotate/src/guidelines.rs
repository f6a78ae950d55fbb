use std::collections::BTreeMap;
use std::path::Path;

use flashqg::Category;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryGuideline {
    pub prompt: String,
    pub guidance: String,
}

/// Judgment instructions served to the annotation UI, one entry per
/// category.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Guidelines(pub BTreeMap<Category, CategoryGuideline>);

impl Default for Guidelines {
    fn default() -> Self {
        let entry = |prompt: &str, guidance: &str| CategoryGuideline {
            prompt: prompt.to_owned(),
            guidance: guidance.to_owned(),
        };
        let mut m = BTreeMap::new();
        m.insert(
            Category::Acceptable,
            entry(
                "Would you put this question on a flashcard as it stands? (Yes / No)",
                "Yes means the question targets something worth knowing, reads naturally, is grammatical and \
                 has a single right answer. Answering Yes ends the item: the remaining four judgments are \
                 recorded as Yes. Answering No requires the remaining four judgments. A No is allowed even when \
                 every other judgment would be Yes, for example when the question is too easy or too vague.",
            ),
        );
        m.insert(
            Category::Grammatical,
            entry(
                "Is the question free of grammatical errors? (Yes / No)",
                "Judge grammar only. Clumsy but grammatical wording is still Yes.",
            ),
        );
        m.insert(
            Category::Interpretable,
            entry(
                "Can the question be understood without the passage it came from? (Yes / No)",
                "No when the question points at something only the source passage explains, such as \"this \
                 method\" or \"the example above\". Yes when a reader with no surrounding text could sensibly ask it.",
            ),
        );
        m.insert(
            Category::Relevant,
            entry(
                "Does the question matter for the chapter's main ideas? (Yes / No)",
                "Yes for material a thorough course on the subject could plausibly quiz, including tangential but \
                 on-topic points. No for trivia or for details of a worked example that do not help with the \
                 chapter's concepts.",
            ),
        );
        m.insert(
            Category::Correct,
            entry(
                "Is the given answer a correct answer to the question? (Yes / No)",
                "Yes if the answer is one of possibly several acceptable answers. Also Yes when the question is \
                 too broken to judge the answer. Otherwise judge the answer on its merits, even for irrelevant \
                 questions.",
            ),
        );
        Guidelines(m)
    }
}

impl Guidelines {
    /// Loads a JSON object keyed by category name, falling back to the
    /// built-in text for categories it omits.
    pub fn load(path: &Path) -> std::io::Result<Self> {
        let raw = std::fs::read_to_string(path)?;
        let custom: BTreeMap<Category, CategoryGuideline> =
            serde_json::from_str(&raw).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
        let mut g = Self::default();
        g.0.extend(custom);
        Ok(g)
    }
}
