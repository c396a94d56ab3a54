use std::collections::HashSet;

use super::{build_induction_prompt, single_website, InductionConfig, InductionError};
use crate::action::{placeholder_re, Arg};
use crate::lm::{LmClient, LmError, LmRequest};
use crate::types::{Experience, Workflow, WorkflowFormat, WorkflowSource};
use crate::workflow_text::{parse_workflow, split_blocks};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParsedOutput {
    pub workflows: Vec<Workflow>,
    /// Index of each skipped block and the reason.
    pub skipped: Vec<(usize, String)>,
}

/// Splits model output on blank lines and parses each block as a workflow.
/// Unparseable blocks are skipped and logged. Workflows are assigned to
/// `website` and numbered `lm-1`, `lm-2`, ...
pub fn parse_workflow_output(lm_text: &str, website: &str) -> ParsedOutput {
    let mut out = ParsedOutput::default();
    for (i, block) in split_blocks(lm_text).iter().enumerate() {
        let parsed = parse_workflow(block, website).map_err(|e| e.to_string()).and_then(|mut w| {
            w.website = website.to_string();
            w.validate().map(|_| w)
        });
        match parsed {
            Ok(mut w) => {
                w.source = WorkflowSource::Lm;
                w.id = format!("lm-{}", out.workflows.len() + 1);
                out.workflows.push(w);
            }
            Err(reason) => {
                tracing::info!(block = i, %reason, "skipping workflow block");
                out.skipped.push((i, reason));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LmInduction {
    pub workflows: Vec<Workflow>,
    pub skipped: Vec<(usize, String)>,
    pub warnings: Vec<String>,
    pub prompts: usize,
}

/// Prompts the model once per batch, parses, concatenates and deduplicates.
pub fn induce_lm(
    experiences: &[Experience],
    cfg: &InductionConfig,
    lm: &dyn LmClient,
) -> Result<LmInduction, InductionError> {
    let Some(website) = single_website(experiences)? else {
        return Ok(LmInduction::default());
    };
    let batches = build_induction_prompt(experiences, cfg)?;
    let mut out = LmInduction {
        warnings: batches.warnings,
        prompts: batches.prompts.len(),
        ..LmInduction::default()
    };
    let mut all = Vec::new();
    for (batch, prompt) in batches.prompts.into_iter().enumerate() {
        let reply = lm
            .complete(&LmRequest::new(prompt))
            .map_err(|source| InductionError::Lm { batch, source })?;
        let parsed = parse_workflow_output(&reply.text, website);
        out.skipped.extend(parsed.skipped);
        all.extend(parsed.workflows);
    }
    out.workflows = dedup_workflows(&all);
    for (i, w) in out.workflows.iter_mut().enumerate() {
        w.id = format!("lm-{}", i + 1);
    }
    Ok(out)
}

type DedupKey = (String, Vec<String>, Vec<Vec<String>>);

fn dedup_key(w: &Workflow) -> DedupKey {
    let masked = |a: &Arg| placeholder_re().replace_all(a.as_str(), "{}").into_owned();
    (
        w.website.clone(),
        w.steps.iter().map(|s| s.action.name.clone()).collect(),
        w.steps.iter().map(|s| s.action.args.iter().map(masked).collect()).collect(),
    )
}

/// Keeps the earliest workflow of each (website, signature, masked-argument)
/// group, preserving order.
pub fn dedup_workflows(workflows: &[Workflow]) -> Vec<Workflow> {
    let mut seen = HashSet::new();
    workflows.iter().filter(|w| seen.insert(dedup_key(w))).cloned().collect()
}

/// True when two workflows share website, signature and placeholder-masked arguments.
pub fn same_pattern(a: &Workflow, b: &Workflow) -> bool {
    dedup_key(a) == dedup_key(b)
}

const VERBALIZE_PROMPT: &str = "Rewrite the web action below as one short imperative sentence that starts with the \
action verb in capitals, for example `CLICK the submit button`. Keep placeholders such as {name} unchanged. \
Reply with the sentence only.";

/// Replaces each step's action text with a model-written sentence. State and
/// reasoning text are kept unchanged.
pub fn verbalize_workflows(workflows: &[Workflow], lm: &dyn LmClient) -> Result<Vec<Workflow>, LmError> {
    let mut out = Vec::with_capacity(workflows.len());
    for w in workflows {
        let mut w = w.clone();
        for step in &mut w.steps {
            let mut prompt = format!("{VERBALIZE_PROMPT}\nWorkflow: {}\n", w.description);
            if let Some(r) = &step.reasoning {
                prompt.push_str(&format!("Reasoning: {r}\n"));
            }
            prompt.push_str(&format!("Action: {}", step.action.render()));
            let reply = lm.complete(&LmRequest::new(prompt))?;
            let sentence = reply.text.lines().map(str::trim).find(|l| !l.is_empty()).unwrap_or_default();
            step.verbalized = Some(sentence.to_string());
        }
        w.format = WorkflowFormat::Text;
        out.push(w);
    }
    Ok(out)
}
