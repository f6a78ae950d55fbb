use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::MetricsError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Judgment {
    Yes,
    No,
    Skipped,
}

impl Judgment {
    fn name(self) -> &'static str {
        match self {
            Judgment::Yes => "yes",
            Judgment::No => "no",
            Judgment::Skipped => "skipped",
        }
    }
}

/// The five yes/no judgment categories.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Acceptable,
    Grammatical,
    Interpretable,
    Relevant,
    Correct,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::Acceptable,
        Category::Grammatical,
        Category::Interpretable,
        Category::Relevant,
        Category::Correct,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::Acceptable => "acceptable",
            Category::Grammatical => "grammatical",
            Category::Interpretable => "interpretable",
            Category::Relevant => "relevant",
            Category::Correct => "correct",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Category::Acceptable => "Acceptable",
            Category::Grammatical => "Grammatical",
            Category::Interpretable => "Interpretable",
            Category::Relevant => "Relevant",
            Category::Correct => "Correct",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One annotator's judgments for one question.
///
/// Answering `acceptable = yes` lets the annotator skip the other four,
/// which are then taken as yes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnnotationLabel {
    pub acceptable: Judgment,
    pub grammatical: Judgment,
    pub interpretable: Judgment,
    pub relevant: Judgment,
    pub correct: Judgment,
}

impl AnnotationLabel {
    pub fn new(
        acceptable: Judgment,
        grammatical: Judgment,
        interpretable: Judgment,
        relevant: Judgment,
        correct: Judgment,
    ) -> Self {
        Self { acceptable, grammatical, interpretable, relevant, correct }
    }

    pub fn all(j: Judgment) -> Self {
        Self::new(j, j, j, j, j)
    }

    /// The quick path: acceptable, everything else skipped.
    pub fn accept() -> Self {
        Self::new(Judgment::Yes, Judgment::Skipped, Judgment::Skipped, Judgment::Skipped, Judgment::Skipped)
    }

    pub fn get(&self, category: Category) -> Judgment {
        match category {
            Category::Acceptable => self.acceptable,
            Category::Grammatical => self.grammatical,
            Category::Interpretable => self.interpretable,
            Category::Relevant => self.relevant,
            Category::Correct => self.correct,
        }
    }

    /// Checks the skip rule without expanding.
    pub fn validate(&self) -> Result<(), MetricsError> {
        match self.acceptable {
            Judgment::Skipped => Err(MetricsError::AcceptableSkipped),
            Judgment::Yes => Ok(()),
            Judgment::No => {
                for cat in &Category::ALL[1..] {
                    if self.get(*cat) == Judgment::Skipped {
                        return Err(MetricsError::IncompleteAnnotation { acceptable: "no", field: cat.name() });
                    }
                }
                Ok(())
            }
        }
    }

    pub fn is_expanded(&self) -> bool {
        Category::ALL.iter().all(|c| self.get(*c) != Judgment::Skipped)
    }

    /// Yes/no for `category` on an expanded label.
    pub fn is_yes(&self, category: Category) -> Result<bool, MetricsError> {
        match self.get(category) {
            Judgment::Yes => Ok(true),
            Judgment::No => Ok(false),
            Judgment::Skipped => Err(MetricsError::NotExpanded(category.name())),
        }
    }
}

impl fmt::Display for AnnotationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<_> = Category::ALL.iter().map(|c| self.get(*c).name()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Applies the skip rule: `acceptable = yes` forces every field to yes;
/// `acceptable = no` must come with all four other fields answered.
pub fn expand_annotation(raw: AnnotationLabel) -> Result<AnnotationLabel, MetricsError> {
    raw.validate()?;
    Ok(match raw.acceptable {
        Judgment::Yes => AnnotationLabel::all(Judgment::Yes),
        _ => raw,
    })
}

/// True iff at least two of the three (expanded) labels say yes.
pub fn majority_vote(labels: &[AnnotationLabel], category: Category) -> Result<bool, MetricsError> {
    if labels.len() != 3 {
        return Err(MetricsError::WrongLabelCount(labels.len()));
    }
    let mut yes = 0;
    for l in labels {
        if l.is_yes(category)? {
            yes += 1;
        }
    }
    Ok(yes >= 2)
}

/// One stored judgment. The label is kept as submitted; expansion happens
/// on export.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub pair_id: String,
    pub annotator_id: String,
    pub label: AnnotationLabel,
    pub submitted_at: DateTime<Utc>,
    pub revision: u64,
}
