use super::{single_website, EnvRepr, InductionConfig, InductionError};
use crate::types::Experience;

/// The induction instructions, shipped verbatim as a text asset.
pub const INDUCTION_INSTRUCTIONS: &str = include_str!("../../prompts/induction.txt");

const OUTPUT_FORMAT: &str = "Write each workflow as a block that starts with a line `## <website>: <workflow description>`, \
followed by its steps. For each step, write one line describing the page state, one line of reasoning, \
and one action line such as `fill('145', '{place_name}')`. Separate workflows with one blank line.";

/// Induction prompts for one website, one per batch of experiences.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PromptBatches {
    pub prompts: Vec<String>,
    /// Experience ids in each batch, aligned with `prompts`.
    pub batches: Vec<Vec<String>>,
    pub warnings: Vec<String>,
}

/// Renders experiences into induction prompts.
///
/// Experience blocks are packed greedily, in order, into batches whose total
/// length stays within `cfg.max_prompt_chars`.
pub fn build_induction_prompt(
    experiences: &[Experience],
    cfg: &InductionConfig,
) -> Result<PromptBatches, InductionError> {
    cfg.validate()?;
    let website = single_website(experiences)?.unwrap_or_default().to_string();
    let mut out = PromptBatches::default();
    let mut blocks: Vec<(&str, String)> = Vec::with_capacity(experiences.len());
    for e in experiences {
        let block = render_experience(e, cfg.env_repr, &mut out.warnings);
        if block.len() > cfg.max_prompt_chars {
            return Err(InductionError::OversizeExperience {
                id: e.id.clone(),
                chars: block.len(),
                budget: cfg.max_prompt_chars,
            });
        }
        blocks.push((e.id.as_str(), block));
    }

    let mut current: Vec<(&str, String)> = Vec::new();
    let mut used = 0;
    for (id, block) in blocks {
        let extra = if current.is_empty() { block.len() } else { block.len() + 2 };
        if !current.is_empty() && used + extra > cfg.max_prompt_chars {
            flush(&website, &mut current, &mut out);
            used = 0;
        }
        used += if current.is_empty() { block.len() } else { block.len() + 2 };
        current.push((id, block));
    }
    if !current.is_empty() {
        flush(&website, &mut current, &mut out);
    }
    Ok(out)
}

fn flush(website: &str, current: &mut Vec<(&str, String)>, out: &mut PromptBatches) {
    let body: Vec<&str> = current.iter().map(|(_, b)| b.as_str()).collect();
    out.prompts.push(format!(
        "{}\n{}\nWebsite: {}\n\n{}\n",
        INDUCTION_INSTRUCTIONS,
        OUTPUT_FORMAT,
        website,
        body.join("\n\n")
    ));
    out.batches.push(current.iter().map(|(id, _)| id.to_string()).collect());
    current.clear();
}

fn render_experience(e: &Experience, repr: EnvRepr, warnings: &mut Vec<String>) -> String {
    let mut out = format!("Query: {}\nActions:", e.instruction);
    let mut missing = 0;
    for (i, step) in e.steps.iter().enumerate() {
        out.push_str(&format!("\nStep {}:", i + 1));
        let want_desc = matches!(repr, EnvRepr::Description | EnvRepr::Both);
        let want_html = matches!(repr, EnvRepr::Html | EnvRepr::Both);
        let mut shown = false;
        if want_desc {
            if let Some(d) = &step.state_desc {
                out.push_str("\nState: ");
                out.push_str(d);
                shown = true;
            }
        }
        if want_html {
            if let Some(h) = &step.html {
                out.push_str("\nHTML: ");
                out.push_str(h);
                shown = true;
            }
        }
        if !shown {
            missing += 1;
        }
        if let Some(r) = &step.reasoning {
            out.push_str("\nReasoning: ");
            out.push_str(r);
        }
        out.push_str("\nAction: ");
        out.push_str(&step.action.render());
    }
    if missing > 0 {
        warnings.push(format!(
            "experience `{}`: {missing} step(s) lack the {:?} representation; rendered without it",
            e.id, repr
        ));
    }
    out
}
