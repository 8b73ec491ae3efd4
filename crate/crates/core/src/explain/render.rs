//! Text and table rendering of explanations.
//!
//! Layout: a headline "Total <noun> would <decrease|increase> by N", then one
//! column per affected agent with a "Removed" and an "Added" row. A cell lists
//! the agent's changed items followed by their summed contribution, or "-".

use std::collections::HashMap;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{Explanation, ExplanationEntry};
use crate::rational::{self, Rational};

pub const NOTHING_CHANGES: &str = "The requested property is already satisfied; nothing changes.";

/// Domain wording. Missing labels fall back to variable names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderTemplate {
    pub objective_noun: String,
    pub item_noun: String,
    /// Display label per variable id.
    pub labels: HashMap<usize, String>,
    pub residual_label: String,
}

impl RenderTemplate {
    pub fn generic() -> Self {
        RenderTemplate {
            objective_noun: "objective".into(),
            item_noun: "variables".into(),
            labels: HashMap::new(),
            residual_label: "Other objective terms".into(),
        }
    }

    fn label<'a>(&'a self, entry: &'a ExplanationEntry) -> &'a str {
        self.labels.get(&entry.id).map(String::as_str).unwrap_or(&entry.var)
    }

    fn cell(&self, entries: &[ExplanationEntry]) -> String {
        if entries.is_empty() {
            return "-".into();
        }
        let names: Vec<&str> = entries.iter().map(|e| self.label(e)).collect();
        let total: Rational = entries.iter().map(|e| e.contribution).sum();
        format!("{} ({})", names.join(", "), rational::format_rational(&total))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentColumn {
    pub agent: String,
    pub removed: String,
    pub added: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedExplanation {
    pub headline: String,
    pub direction_phrase: String,
    pub removed_label: String,
    pub added_label: String,
    pub columns: Vec<AgentColumn>,
    pub residual_line: Option<String>,
    pub text: String,
}

fn signed(value: &Rational) -> String {
    let text = rational::format_rational(value);
    if value.is_positive() {
        format!("+{text}")
    } else {
        text
    }
}

pub fn render_explanation(explanation: &Explanation, template: Option<&RenderTemplate>) -> RenderedExplanation {
    let generic = RenderTemplate::generic();
    let t = template.unwrap_or(&generic);
    let noun = &t.objective_noun;
    let removed_label = format!("Removed {} ({noun})", t.item_noun);
    let added_label = format!("Added {} ({noun})", t.item_noun);
    let diff = &explanation.summary.quality_diff;
    let direction_phrase = explanation.summary.direction.phrase(diff, noun);

    let change = -*diff;
    let headline = if explanation.is_empty() && change.is_zero() {
        NOTHING_CHANGES.to_string()
    } else if change.is_zero() {
        format!("Total {noun} would stay the same")
    } else if change.is_negative() {
        format!("Total {noun} would decrease by {}", rational::format_rational(&-change))
    } else {
        format!("Total {noun} would increase by {}", rational::format_rational(&change))
    };

    let columns: Vec<AgentColumn> = explanation
        .per_agent
        .iter()
        .map(|(agent, view)| AgentColumn {
            agent: agent.clone(),
            removed: t.cell(&view.decreases),
            added: t.cell(&view.increases),
        })
        .collect();
    let residual_line = (!explanation.residual_fg.is_zero())
        .then(|| format!("{}: {}", t.residual_label, signed(&-explanation.residual_fg)));

    let mut text = headline.clone();
    if !columns.is_empty() {
        text.push_str(" based on the following table:\n");
        text.push_str(&table_text(&removed_label, &added_label, &columns));
    }
    if let Some(line) = &residual_line {
        text.push('\n');
        text.push_str(line);
    }
    RenderedExplanation { headline, direction_phrase, removed_label, added_label, columns, residual_line, text }
}

fn table_text(removed_label: &str, added_label: &str, columns: &[AgentColumn]) -> String {
    let mut rows: Vec<Vec<&str>> = vec![vec![""], vec![removed_label], vec![added_label]];
    for c in columns {
        rows[0].push(&c.agent);
        rows[1].push(&c.removed);
        rows[2].push(&c.added);
    }
    let widths: Vec<usize> = (0..rows[0].len()).map(|i| rows.iter().map(|r| r[i].chars().count()).max().unwrap_or(0)).collect();
    rows.iter()
        .map(|r| {
            let cells: Vec<String> = r.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            format!("| {} |", cells.join(" | "))
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explain::{full_explanation, Direction};
    use crate::model::{Assignment, Metadata, ModelBuilder, Relation, Sense};
    use crate::rational::int;

    fn micro_explanation(after: &[i64]) -> Explanation {
        let mut b = ModelBuilder::new(vec!["Alice".into(), "Bob".into()]);
        let ab = b.add_binary("x[Alice][bed]", true, vec![0]);
        let al = b.add_binary("x[Alice][lamp]", true, vec![0]);
        let bb = b.add_binary("x[Bob][bed]", true, vec![1]);
        b.add_objective_term(ab, int(2));
        b.add_objective_term(al, int(3));
        b.add_objective_term(bb, int(4));
        b.add_constraint(vec![(ab, int(5)), (al, int(1)), (bb, int(5))], Relation::Le, int(6));
        let m = b.build(Sense::Maximize, Metadata::domain("kp")).unwrap();
        let s = Assignment::new(vec![int(0), int(1), int(1)]);
        let s2 = Assignment::new(after.iter().map(|v| int(*v)).collect());
        full_explanation(&m, &s, &s2).unwrap()
    }

    fn kp_template() -> RenderTemplate {
        RenderTemplate {
            objective_noun: "utility".into(),
            item_noun: "items".into(),
            labels: [(0, "bed"), (1, "lamp"), (2, "bed")].into_iter().map(|(k, v)| (k, v.to_string())).collect(),
            residual_label: "Fairness term".into(),
        }
    }

    #[test]
    fn bed_swap_table() {
        let r = render_explanation(&micro_explanation(&[1, 1, 0]), Some(&kp_template()));
        assert_eq!(r.headline, "Total utility would decrease by 2");
        assert_eq!(r.removed_label, "Removed items (utility)");
        assert_eq!(r.added_label, "Added items (utility)");
        assert_eq!(
            r.columns,
            vec![
                AgentColumn { agent: "Alice".into(), removed: "-".into(), added: "bed (2)".into() },
                AgentColumn { agent: "Bob".into(), removed: "bed (4)".into(), added: "-".into() },
            ]
        );
        assert!(r.text.starts_with("Total utility would decrease by 2 based on the following table:"));
        assert_eq!(r.direction_phrase, "loss of 2 utility units");
    }

    #[test]
    fn several_items_share_one_total() {
        let r = render_explanation(&micro_explanation(&[1, 0, 0]), Some(&kp_template()));
        assert_eq!(r.columns[0].removed, "lamp (3)");
        assert_eq!(r.headline, "Total utility would decrease by 5");
        let r = render_explanation(&micro_explanation(&[0, 0, 0]), Some(&kp_template()));
        assert_eq!(r.columns.iter().map(|c| c.removed.as_str()).collect::<Vec<_>>(), ["lamp (3)", "bed (4)"]);
    }

    #[test]
    fn empty_explanation_sentence() {
        let e = micro_explanation(&[0, 1, 1]);
        assert_eq!(e.summary.direction, Direction::Unchanged);
        let r = render_explanation(&e, None);
        assert_eq!(r.headline, NOTHING_CHANGES);
        assert!(r.columns.is_empty());
    }

    #[test]
    fn generic_fallback_uses_variable_names() {
        let r = render_explanation(&micro_explanation(&[1, 1, 0]), None);
        assert_eq!(r.headline, "Total objective would decrease by 2");
        assert_eq!(r.columns[0].added, "x[Alice][bed] (2)");
    }
}
