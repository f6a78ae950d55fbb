//! Aligned plain-text renderings of coverage and agreement results.

use std::fmt::Write;

use super::agreement::AgreementReport;
use super::coverage::CoverageReport;
use super::labels::Category;
use crate::text::round_1dp;

pub fn render_coverage_table(reports: &[CoverageReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<16}| {:>6} | {:>7} {:>7} {:>9}", "Source", "n", "Qs", "As", "Qs or As");
    let _ = writeln!(out, "{}", "-".repeat(54));
    for r in reports {
        let (q, a, e) = r.rounded_percentages();
        let _ = writeln!(
            out,
            "{:<16}| {:>6} | {:>6.1}% {:>6.1}% {:>8.1}%",
            r.source_kind.title(),
            r.n,
            q,
            a,
            e
        );
    }
    out
}

pub fn render_agreement_table(report: &AgreementReport) -> String {
    let mut out = String::new();
    let names = &report.annotators;
    let _ = writeln!(
        out,
        "{:<14}| {:>6} {:>6} {:>6} | Pairwise kappa ({}-{}, {}-{}, {}-{})",
        "",
        names[0],
        names[1],
        names[2],
        names[0],
        names[1],
        names[1],
        names[2],
        names[2],
        names[0]
    );
    let _ = writeln!(out, "{}", "-".repeat(72));
    for cat in Category::ALL {
        let rates = &report.per_annotator_yes_rate[&cat];
        let k = report.pairwise_kappa[&cat];
        let d = report.degenerate_kappa[&cat];
        let mark = |i: usize| if d[i] { "*" } else { "" };
        let _ = writeln!(
            out,
            "{:<14}| {:>6.1} {:>6.1} {:>6.1} | ({:.2}{}, {:.2}{}, {:.2}{})",
            cat.title(),
            round_1dp(rates[&names[0]] * 100.0),
            round_1dp(rates[&names[1]] * 100.0),
            round_1dp(rates[&names[2]] * 100.0),
            k[0],
            mark(0),
            k[1],
            mark(1),
            k[2],
            mark(2)
        );
    }
    if report.degenerate_kappa.values().any(|d| d.iter().any(|&x| x)) {
        let _ = writeln!(out, "* degenerate: both annotators constant and identical");
    }
    out
}

/// Majority-vote proportions per source mode.
pub fn render_source_table(report: &AgreementReport) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:<14}|", "");
    for source in report.proportions_by_source.keys() {
        let _ = write!(out, " {:>14}", source.title());
    }
    let _ = writeln!(out);
    let _ = write!(out, "{:<14}|", "# Questions");
    for source in report.proportions_by_source.keys() {
        let _ = write!(out, " {:>14}", format!("(n = {})", report.items_by_source[source]));
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "{}", "-".repeat(15 + 15 * report.proportions_by_source.len()));
    for cat in Category::ALL {
        let _ = write!(out, "{:<14}|", cat.title());
        for props in report.proportions_by_source.values() {
            let _ = write!(out, " {:>13.1}%", round_1dp(props[&cat] * 100.0));
        }
        let _ = writeln!(out);
    }
    out
}

/// Majority-vote proportions per chapter.
pub fn render_chapter_table(report: &AgreementReport) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:<14}|", "");
    for chapter in report.proportions_by_chapter.keys() {
        let _ = write!(out, " {:>12}", chapter);
    }
    let _ = writeln!(out);
    let _ = write!(out, "{:<14}|", "# Questions");
    for chapter in report.proportions_by_chapter.keys() {
        let _ = write!(out, " {:>12}", format!("(n = {})", report.items_by_chapter[chapter]));
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "{}", "-".repeat(15 + 13 * report.proportions_by_chapter.len()));
    for cat in Category::ALL {
        let _ = write!(out, "{:<14}|", cat.title());
        for props in report.proportions_by_chapter.values() {
            let _ = write!(out, " {:>11.1}%", round_1dp(props[&cat] * 100.0));
        }
        let _ = writeln!(out);
    }
    out
}
