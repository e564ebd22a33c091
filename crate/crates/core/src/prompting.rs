//! The clinician-role prompt: template structure, the built-in template,
//! the section-based template file format, and prompt rendering.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::dimension::DimensionName;

/// Placeholder replaced by the transcript.
pub const TRANSCRIPT_SLOT: &str = "{{TRANSCRIPT}}";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionSpec {
    pub name: DimensionName,
    pub low_descriptor: String,
    pub moderate_descriptor: String,
    pub high_descriptor: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub role_preamble: String,
    pub context_statement: String,
    pub dimension_specs: Vec<DimensionSpec>,
    pub scoring_instruction: String,
    pub output_schema_instruction: String,
    /// Closing section; must hold [`TRANSCRIPT_SLOT`].
    pub transcript_section: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DescriptorLevel {
    Low,
    Moderate,
    High,
}

impl DescriptorLevel {
    fn as_str(self) -> &'static str {
        match self {
            DescriptorLevel::Low => "low",
            DescriptorLevel::Moderate => "moderate",
            DescriptorLevel::High => "high",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TemplateDefect {
    MissingDimension(DimensionName),
    DuplicateDimension(DimensionName),
    EmptyDescriptor(DimensionName, DescriptorLevel),
    MissingSlot,
    DuplicateSlot,
}

impl fmt::Display for TemplateDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TemplateDefect::MissingDimension(d) => write!(f, "missing: {d}"),
            TemplateDefect::DuplicateDimension(d) => write!(f, "duplicate: {d}"),
            TemplateDefect::EmptyDescriptor(d, level) => {
                write!(f, "empty {} descriptor: {d}", level.as_str())
            }
            TemplateDefect::MissingSlot => f.write_str("missing transcript slot"),
            TemplateDefect::DuplicateSlot => f.write_str("duplicate transcript slot"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("transcript is empty")]
    EmptyTranscript,
    #[error("invalid template: {}", join_defects(.0))]
    InvalidTemplate(Vec<TemplateDefect>),
}

fn join_defects(defects: &[TemplateDefect]) -> String {
    defects.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Reports structural defects; an empty list means the template is usable.
pub fn validate_template(template: &PromptTemplate) -> Vec<TemplateDefect> {
    let mut defects = Vec::new();
    let mut seen = [0usize; 6];
    for spec in &template.dimension_specs {
        seen[spec.name.index()] += 1;
        for (level, text) in [
            (DescriptorLevel::Low, &spec.low_descriptor),
            (DescriptorLevel::Moderate, &spec.moderate_descriptor),
            (DescriptorLevel::High, &spec.high_descriptor),
        ] {
            if text.trim().is_empty() {
                defects.push(TemplateDefect::EmptyDescriptor(spec.name, level));
            }
        }
    }
    for dim in DimensionName::ALL {
        match seen[dim.index()] {
            0 => defects.push(TemplateDefect::MissingDimension(dim)),
            1 => {}
            _ => defects.push(TemplateDefect::DuplicateDimension(dim)),
        }
    }
    match render_skeleton(template).matches(TRANSCRIPT_SLOT).count() {
        0 => defects.push(TemplateDefect::MissingSlot),
        1 => {}
        _ => defects.push(TemplateDefect::DuplicateSlot),
    }
    defects
}

/// The full prompt text with the slot marker still in place.
fn render_skeleton(t: &PromptTemplate) -> String {
    let mut out = String::new();
    out.push_str(t.role_preamble.trim());
    out.push_str("\n\n");
    out.push_str(t.context_statement.trim());
    out.push_str("\n\nRate the speaker on these six dimensions of psychological well-being:\n");
    for (i, spec) in t.dimension_specs.iter().enumerate() {
        out.push_str(&format!(
            "\n{}. {} (JSON key \"{}\")\n   Low: {}\n   Moderate: {}\n   High: {}\n",
            i + 1,
            spec.name.label(),
            spec.name.key(),
            spec.low_descriptor.trim(),
            spec.moderate_descriptor.trim(),
            spec.high_descriptor.trim(),
        ));
    }
    out.push('\n');
    out.push_str(t.scoring_instruction.trim());
    out.push_str("\n\n");
    out.push_str(t.output_schema_instruction.trim());
    out.push_str("\n\n");
    out.push_str(t.transcript_section.trim());
    out.push('\n');
    out
}

/// Renders the prompt for one transcript. The transcript is inserted
/// verbatim at the slot and is never rescanned, so braces or markers inside
/// it are left alone.
pub fn build_prompt(template: &PromptTemplate, transcript: &str) -> Result<String, PromptError> {
    if transcript.trim().is_empty() {
        return Err(PromptError::EmptyTranscript);
    }
    let defects = validate_template(template);
    if !defects.is_empty() {
        return Err(PromptError::InvalidTemplate(defects));
    }
    let skeleton = render_skeleton(template);
    let at = skeleton
        .find(TRANSCRIPT_SLOT)
        .ok_or(PromptError::InvalidTemplate(alloc::vec![TemplateDefect::MissingSlot]))?;
    let mut out = String::with_capacity(skeleton.len() + transcript.len());
    out.push_str(&skeleton[..at]);
    out.push_str(transcript);
    out.push_str(&skeleton[at + TRANSCRIPT_SLOT.len()..]);
    Ok(out)
}

fn spec(name: DimensionName, low: &str, moderate: &str, high: &str) -> DimensionSpec {
    DimensionSpec {
        name,
        low_descriptor: low.to_string(),
        moderate_descriptor: moderate.to_string(),
        high_descriptor: high.to_string(),
    }
}

/// Built-in template. Descriptor wording is a reconstruction of the
/// standard dimension definitions and can be replaced with `--template`.
pub fn default_template() -> PromptTemplate {
    use DimensionName::*;
    PromptTemplate {
        role_preamble: "You are an expert clinical psychologist who assesses psychological \
well-being from spontaneous speech. You judge only from what the speaker says, you stay \
close to the words in the transcript, and you follow Ryff's model of psychological \
well-being."
            .to_string(),
        context_statement: "The transcript below comes from a participant who was asked to \
describe their typical day during the COVID-19 lockdown. It is a manual transcription of \
a short spoken monologue, so expect informal and fragmented language."
            .to_string(),
        dimension_specs: alloc::vec![
            spec(
                Autonomy,
                "Worried about others' expectations and evaluations; relies on others' \
judgements to make important decisions; conforms to social pressure.",
                "Usually makes own choices but sometimes defers to others or to outside pressure.",
                "Self-determining and independent; resists social pressure; regulates \
behaviour from within and judges self by personal standards.",
            ),
            spec(
                EnvironmentalMastery,
                "Has difficulty managing everyday affairs; feels unable to change or \
improve the surroundings; lacks a sense of control.",
                "Copes with daily demands most of the time, with occasional feelings of \
being overwhelmed.",
                "Has a sense of mastery and competence in managing the environment; makes \
effective use of opportunities; shapes contexts to suit personal needs.",
            ),
            spec(
                PersonalGrowth,
                "Feels stagnant; lacks a sense of improvement over time; bored and \
uninterested in life; unable to develop new attitudes.",
                "Shows some interest in learning or new experiences without a clear sense \
of development.",
                "Feels continued development; open to new experiences; sees self as growing \
and expanding; changes in ways that reflect self-knowledge.",
            ),
            spec(
                PositiveRelations,
                "Has few close, trusting relationships; finds it hard to be warm, open, and \
concerned about others; isolated and frustrated in relationships.",
                "Maintains some supportive relationships but with limited closeness or \
frequency of contact.",
                "Has warm, satisfying, trusting relationships; cares about the welfare of \
others; capable of empathy, affection, and intimacy.",
            ),
            spec(
                PurposeInLife,
                "Lacks a sense of meaning; has few goals or aims; sees no purpose in past \
life; has no outlook or beliefs that give life meaning.",
                "Has some goals and routines, with an uncertain sense of direction.",
                "Has goals and a sense of directedness; feels meaning in present and past \
life; holds beliefs that give life purpose.",
            ),
            spec(
                SelfAcceptance,
                "Feels dissatisfied with self; disappointed with what has occurred in past \
life; troubled about personal qualities; wishes to be different.",
                "Accepts some aspects of self while remaining critical of others.",
                "Has a positive attitude toward the self; acknowledges and accepts multiple \
aspects of self, good and bad; feels positive about past life.",
            ),
        ],
        scoring_instruction: "For each dimension assign an integer score from 3 (lowest \
well-being) to 21 (highest well-being), using the low, moderate, and high descriptions \
as anchors. The overall well-being score is the sum of all six dimension scores and \
therefore lies between 18 and 126. For each dimension also list the indicative keywords \
the speaker actually used, and quote the relevant transcript excerpts word for word as \
evidence. Do not invent words that are not in the transcript."
            .to_string(),
        output_schema_instruction: "Respond with JSON only, with no text before or after it, \
in exactly this shape:\n{\n  \"autonomy\": {\"score\": <3-21>, \"keywords\": [\"...\"], \
\"evidence\": [\"...\"]},\n  \"environmental_mastery\": {\"score\": <3-21>, \"keywords\": \
[\"...\"], \"evidence\": [\"...\"]},\n  \"personal_growth\": {\"score\": <3-21>, \
\"keywords\": [\"...\"], \"evidence\": [\"...\"]},\n  \"positive_relations\": {\"score\": \
<3-21>, \"keywords\": [\"...\"], \"evidence\": [\"...\"]},\n  \"purpose_in_life\": \
{\"score\": <3-21>, \"keywords\": [\"...\"], \"evidence\": [\"...\"]},\n  \
\"self_acceptance\": {\"score\": <3-21>, \"keywords\": [\"...\"], \"evidence\": \
[\"...\"]}\n}"
            .to_string(),
        transcript_section: "Transcript:\n\"\"\"\n{{TRANSCRIPT}}\n\"\"\"".to_string(),
    }
}

// ---------------------------------------------------------------------------
// Template files
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TemplateParseError {
    #[error("line {line}: unknown section {name:?}")]
    UnknownSection { line: usize, name: String },
    #[error("line {line}: unknown dimension {name:?}")]
    UnknownDimension { line: usize, name: String },
    #[error("line {line}: text before the first section header")]
    TextOutsideSection { line: usize },
    #[error("line {line}: expected `low:`, `moderate:` or `high:`")]
    BadDescriptor { line: usize },
    #[error("section {0:?} given more than once")]
    RepeatedSection(String),
}

enum Section {
    Role,
    Context,
    Scoring,
    Output,
    Transcript,
    Dimension,
}

/// Parses a template file. Sections start with `## <name>` where name is
/// `role`, `context`, `dimension <Name>`, `scoring`, `output`, or
/// `transcript`; dimension sections hold `low:`, `moderate:`, and `high:`
/// entries that may continue over several lines.
pub fn parse_template(text: &str) -> Result<PromptTemplate, TemplateParseError> {
    let mut t = PromptTemplate {
        role_preamble: String::new(),
        context_statement: String::new(),
        dimension_specs: Vec::new(),
        scoring_instruction: String::new(),
        output_schema_instruction: String::new(),
        transcript_section: String::new(),
    };
    let mut seen: Vec<String> = Vec::new();
    let mut current: Option<Section> = None;
    let mut level: Option<DescriptorLevel> = None;

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if let Some(header) = line.strip_prefix("## ") {
            let header = header.trim();
            let lower = header.to_ascii_lowercase();
            if seen.contains(&lower) {
                return Err(TemplateParseError::RepeatedSection(header.to_string()));
            }
            seen.push(lower.clone());
            level = None;
            current = Some(match lower.as_str() {
                "role" => Section::Role,
                "context" => Section::Context,
                "scoring" => Section::Scoring,
                "output" => Section::Output,
                "transcript" => Section::Transcript,
                _ => match lower.strip_prefix("dimension") {
                    Some(rest) if rest.starts_with(char::is_whitespace) => {
                        let name = header["dimension".len()..].trim();
                        let dim = DimensionName::from_loose(name).ok_or_else(|| {
                            TemplateParseError::UnknownDimension {
                                line: line_no,
                                name: name.to_string(),
                            }
                        })?;
                        t.dimension_specs.push(spec(dim, "", "", ""));
                        Section::Dimension
                    }
                    _ => {
                        return Err(TemplateParseError::UnknownSection {
                            line: line_no,
                            name: header.to_string(),
                        })
                    }
                },
            });
            continue;
        }

        let target = match &current {
            None if line.trim().is_empty() => continue,
            None => return Err(TemplateParseError::TextOutsideSection { line: line_no }),
            Some(Section::Role) => &mut t.role_preamble,
            Some(Section::Context) => &mut t.context_statement,
            Some(Section::Scoring) => &mut t.scoring_instruction,
            Some(Section::Output) => &mut t.output_schema_instruction,
            Some(Section::Transcript) => &mut t.transcript_section,
            Some(Section::Dimension) => {
                let spec = t.dimension_specs.last_mut().expect("pushed with header");
                let trimmed = line.trim_start();
                let lower = trimmed.to_ascii_lowercase();
                let mut body = trimmed;
                for candidate in [DescriptorLevel::Low, DescriptorLevel::Moderate, DescriptorLevel::High] {
                    let key = candidate.as_str();
                    if lower.starts_with(key) && lower[key.len()..].starts_with(':') {
                        level = Some(candidate);
                        body = trimmed[key.len() + 1..].trim_start();
                        break;
                    }
                }
                if line.trim().is_empty() {
                    continue;
                }
                let field = match level {
                    Some(DescriptorLevel::Low) => &mut spec.low_descriptor,
                    Some(DescriptorLevel::Moderate) => &mut spec.moderate_descriptor,
                    Some(DescriptorLevel::High) => &mut spec.high_descriptor,
                    None => return Err(TemplateParseError::BadDescriptor { line: line_no }),
                };
                if !field.is_empty() && !body.is_empty() {
                    field.push(' ');
                }
                field.push_str(body);
                continue;
            }
        };
        if !target.is_empty() {
            target.push('\n');
        }
        target.push_str(line);
    }

    for s in [
        &mut t.role_preamble,
        &mut t.context_statement,
        &mut t.scoring_instruction,
        &mut t.output_schema_instruction,
        &mut t.transcript_section,
    ] {
        let trimmed = s.trim().to_string();
        *s = trimmed;
    }
    Ok(t)
}

/// Writes a template in the format read by [`parse_template`].
pub fn render_template_file(t: &PromptTemplate) -> String {
    let mut out = String::new();
    let mut section = |name: &str, body: &str| {
        out.push_str("## ");
        out.push_str(name);
        out.push('\n');
        out.push_str(body.trim());
        out.push_str("\n\n");
    };
    section("role", &t.role_preamble);
    section("context", &t.context_statement);
    for s in &t.dimension_specs {
        section(
            &format!("dimension {}", s.name.ident()),
            &format!(
                "low: {}\nmoderate: {}\nhigh: {}",
                s.low_descriptor.trim(),
                s.moderate_descriptor.trim(),
                s.high_descriptor.trim()
            ),
        );
    }
    section("scoring", &t.scoring_instruction);
    section("output", &t.output_schema_instruction);
    section("transcript", &t.transcript_section);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid_and_deterministic() {
        let t = default_template();
        assert_eq!(t.dimension_specs.len(), 6);
        assert!(validate_template(&t).is_empty());
        assert_eq!(t, default_template());
        let schema = &t.output_schema_instruction;
        for key in ["\"score\"", "\"keywords\"", "\"evidence\""] {
            assert!(schema.contains(key));
        }
        for d in DimensionName::ALL {
            assert!(schema.contains(d.key()));
        }
    }

    #[test]
    fn prompt_contains_transcript_once() {
        let t = default_template();
        let p = build_prompt(&t, "I cook and read.").unwrap();
        assert_eq!(p.matches("I cook and read.").count(), 1);
        for d in DimensionName::ALL {
            assert!(p.contains(d.label()));
        }
        assert!(p.contains("3 (lowest"));
        assert_eq!(p, build_prompt(&t, "I cook and read.").unwrap());
    }

    #[test]
    fn braces_survive() {
        let p = build_prompt(&default_template(), "weird {} {{x}} text").unwrap();
        assert!(p.contains("weird {} {{x}} text"));
    }

    #[test]
    fn defects() {
        let mut t = default_template();
        t.dimension_specs.pop();
        let d = validate_template(&t);
        assert_eq!(d, alloc::vec![TemplateDefect::MissingDimension(DimensionName::SelfAcceptance)]);
        assert_eq!(d[0].to_string(), "missing: SelfAcceptance");

        let mut t = default_template();
        t.context_statement.push_str(TRANSCRIPT_SLOT);
        let d = validate_template(&t);
        assert_eq!(d, alloc::vec![TemplateDefect::DuplicateSlot]);
        assert_eq!(d[0].to_string(), "duplicate transcript slot");

        let mut t = default_template();
        t.transcript_section = "Transcript follows.".into();
        assert!(matches!(
            build_prompt(&t, "x"),
            Err(PromptError::InvalidTemplate(ref v)) if v == &[TemplateDefect::MissingSlot]
        ));
        assert_eq!(build_prompt(&default_template(), "  "), Err(PromptError::EmptyTranscript));

        let mut t = default_template();
        let dup = t.dimension_specs[0].clone();
        t.dimension_specs.push(dup);
        t.dimension_specs[1].high_descriptor.clear();
        let d = validate_template(&t);
        assert!(d.contains(&TemplateDefect::DuplicateDimension(DimensionName::Autonomy)));
        assert!(d.contains(&TemplateDefect::EmptyDescriptor(
            DimensionName::EnvironmentalMastery,
            DescriptorLevel::High
        )));
    }

    #[test]
    fn file_round_trip() {
        let t = default_template();
        let text = render_template_file(&t);
        assert_eq!(parse_template(&text).unwrap(), t);
    }

    #[test]
    fn file_errors() {
        assert!(matches!(
            parse_template("hello\n## role\nx"),
            Err(TemplateParseError::TextOutsideSection { line: 1 })
        ));
        assert!(matches!(
            parse_template("## mood\nx"),
            Err(TemplateParseError::UnknownSection { .. })
        ));
        assert!(matches!(
            parse_template("## dimension Happiness\nlow: x"),
            Err(TemplateParseError::UnknownDimension { .. })
        ));
        assert!(matches!(
            parse_template("## dimension Autonomy\nsomething"),
            Err(TemplateParseError::BadDescriptor { line: 2 })
        ));
        let t = parse_template("## dimension self acceptance\nlow: a\n  continued\nmoderate: b\nhigh: c\n")
            .unwrap();
        assert_eq!(t.dimension_specs[0].name, DimensionName::SelfAcceptance);
        assert_eq!(t.dimension_specs[0].low_descriptor, "a continued");
    }
}
