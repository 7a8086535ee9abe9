//! Prompt rendering and closed-set answer parsing.
//!
//! Every prompt enumerates its admissible answers as `TOKEN = Label` lines
//! and asks for the token alone. An answer is accepted if, after trimming
//! quotes and trailing punctuation, it equals a token or a label
//! (case-insensitively). Anything else is unparseable.

pub const SYSTEM_PROMPT: &str = "You are an expert annotator of biomedical literature. \
Answer with exactly one label from the list you are given and nothing else.";

pub const NONE_TOKEN: &str = "NONE";

/// `"Health Care Access and Quality"` → `"HEALTH_CARE_ACCESS_AND_QUALITY"`.
pub fn label_token(label: &str) -> String {
    let mut token = String::with_capacity(label.len());
    let mut pending_sep = false;
    for c in label.chars() {
        if c.is_alphanumeric() {
            if pending_sep && !token.is_empty() {
                token.push('_');
            }
            pending_sep = false;
            token.extend(c.to_uppercase());
        } else {
            pending_sep = true;
        }
    }
    token
}

fn clean_answer(raw: &str) -> &str {
    raw.trim_matches(|c: char| c.is_whitespace() || matches!(c, '"' | '\'' | '`' | '*' | '.' | '!'))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelAnswer<'a> {
    Label(&'a str),
    None,
    Unparseable,
}

/// Parses an answer against `labels`. `NONE` is always admissible.
pub fn parse_label<'a>(raw: &str, labels: &'a [String]) -> LabelAnswer<'a> {
    let answer = clean_answer(raw);
    if answer.eq_ignore_ascii_case(NONE_TOKEN) {
        return LabelAnswer::None;
    }
    labels
        .iter()
        .find(|l| answer.eq_ignore_ascii_case(l) || answer.eq_ignore_ascii_case(&label_token(l)))
        .map_or(LabelAnswer::Unparseable, |l| LabelAnswer::Label(l.as_str()))
}

fn render_options(labels: &[String]) -> String {
    let mut out = String::new();
    for l in labels {
        out.push_str(&format!("{} = {}\n", label_token(l), l));
    }
    out.push_str(&format!("{NONE_TOKEN} = none of the above\n"));
    out
}

fn render_context(context: &[&str]) -> String {
    context.iter().map(|s| format!("- {s}\n")).collect()
}

pub fn sdoh_type_prompt(term: &str, context: &[&str], types: &[String]) -> String {
    format!(
        "Candidate term: \"{term}\"\n\
         Sentences mentioning it:\n{}\n\
         Is this term a social determinant of health? If it is, assign it to exactly one of the \
         social determinant of health types below; if it fits none of them, answer {NONE_TOKEN}.\n\
         Answer with the token only.\n\n{}",
        render_context(context),
        render_options(types)
    )
}

pub fn sdoh_subtype_prompt(term: &str, sdoh_type: &str, context: &[&str], subtypes: &[String]) -> String {
    format!(
        "Candidate term: \"{term}\" (social determinant of health type: {sdoh_type})\n\
         Sentences mentioning it:\n{}\n\
         Assign the term to exactly one subtype of {sdoh_type} below; if it does not fit any \
         subtype well, answer {NONE_TOKEN}.\n\
         Answer with the token only.\n\n{}",
        render_context(context),
        render_options(subtypes)
    )
}

pub fn relation_prompt(bio: &str, sdoh: &str, abstract_text: &str, vocabulary: &[&str]) -> String {
    let mut options = String::new();
    for v in vocabulary {
        options.push_str(v);
        options.push('\n');
    }
    format!(
        "Abstract:\n{abstract_text}\n\n\
         Biomedical entity: \"{bio}\"\nSocial determinant of health: \"{sdoh}\"\n\
         Read the abstract and identify any explicit or implicit connection between the two, \
         such as a causal relationship or an association. Answer with one relation label from \
         the list below, or no_relation if the abstract does not connect them.\n\n{options}"
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels() -> Vec<String> {
        vec!["Economic Stability".into(), "Health Care Access and Quality".into()]
    }

    #[test]
    fn tokens() {
        assert_eq!(label_token("Health Care Access and Quality"), "HEALTH_CARE_ACCESS_AND_QUALITY");
        assert_eq!(
            label_token("Access to Foods That Support Healthy Dietary Patterns"),
            "ACCESS_TO_FOODS_THAT_SUPPORT_HEALTHY_DIETARY_PATTERNS"
        );
        assert_eq!(label_token(" Crime -- and  Violence "), "CRIME_AND_VIOLENCE");
    }

    #[test]
    fn parse_accepts_token_or_label() {
        let l = labels();
        assert_eq!(parse_label("ECONOMIC_STABILITY", &l), LabelAnswer::Label("Economic Stability"));
        assert_eq!(parse_label(" \"economic stability\". ", &l), LabelAnswer::Label("Economic Stability"));
        assert_eq!(parse_label("none", &l), LabelAnswer::None);
        assert_eq!(parse_label("Economic", &l), LabelAnswer::Unparseable);
        assert_eq!(parse_label("", &l), LabelAnswer::Unparseable);
        assert_eq!(
            parse_label("I think it is ECONOMIC_STABILITY", &l),
            LabelAnswer::Unparseable
        );
    }

    #[test]
    fn prompts_enumerate_options() {
        let p = sdoh_type_prompt("poverty", &["Poverty is common."], &labels());
        assert!(p.contains("ECONOMIC_STABILITY = Economic Stability"));
        assert!(p.contains("NONE = none of the above"));
        assert!(p.contains("- Poverty is common."));
        let p = relation_prompt("APOE", "poverty", "Text.", &["associated_with", "no_relation"]);
        assert!(p.ends_with("associated_with\nno_relation\n"));
    }
}
