use awm::action::parse_action;
use awm::induction::{
    action_signature, dedup_workflows, induce, induce_lm, induce_rule, parse_workflow_output, DropReason,
    InductionConfig, InductionError,
};
use awm::lm::MockLm;
use awm::types::{Experience, Step};

fn exp(id: &str, site: &str, template: Option<&str>, actions: &[&str]) -> Experience {
    let mut e = Experience::new(id, site, format!("do {id}"));
    e.template_id = template.map(str::to_string);
    e.steps = actions.iter().map(|a| Step::new(format!("page of {id}"), parse_action(a).unwrap())).collect();
    e
}

#[test]
fn rule_induction_stage_by_stage() {
    let set = vec![
        exp("e1", "shop", Some("t1"), &["click('1')", "fill('2', 'a')", "stop()"]),
        // Same template as e1, larger id: dropped first.
        exp("e2", "shop", Some("t1"), &["click('9')", "click('8')"]),
        // Same signature as e1 under another template: dropped second.
        exp("e3", "shop", Some("t2"), &["click('5')", "fill('6', 'b')", "stop()"]),
        // Only one valid step remains after filtering.
        exp("e4", "shop", None, &["click(3)", "click('4')"]),
        exp("e5", "shop", None, &["hover('1')", "click('2')"]),
    ];
    let out = induce_rule(&set, &InductionConfig::rule()).unwrap();
    let ids: Vec<&str> = out.workflows.iter().map(|w| w.id.as_str()).collect();
    assert_eq!(out.workflows.len(), 2, "{ids:?}");
    let reasons: Vec<(&str, &DropReason)> = out.dropped.iter().map(|d| (d.experience_id.as_str(), &d.reason)).collect();
    assert_eq!(
        reasons,
        vec![
            ("e2", &DropReason::DuplicateTemplate),
            ("e3", &DropReason::DuplicateSignature),
            ("e4", &DropReason::TooFewSteps { remaining: 1 }),
        ]
    );
    assert_eq!(out.workflows[0].signature(), ["click", "fill", "stop"]);
    assert_eq!(out.workflows[1].signature(), ["hover", "click"]);
}

#[test]
fn signatures_are_lowercase_names() {
    let e = exp("e", "shop", None, &["CLICK('1')", "TYPE('2', 'x')"]);
    assert_eq!(action_signature(&e), ["click", "type"]);
}

#[test]
fn mixed_websites_are_rejected() {
    let set = [exp("a", "shop", None, &["click('1')"]), exp("b", "map", None, &["click('1')"])];
    assert!(matches!(induce_rule(&set, &InductionConfig::rule()), Err(InductionError::MixedWebsites(_))));
}

#[test]
fn lm_mode_needs_a_client() {
    let set = [exp("a", "shop", None, &["click('1')", "stop()"])];
    assert_eq!(induce(&set, &InductionConfig::default(), None), Err(InductionError::MissingLm));
    let bad = InductionConfig { dedup_n: 0, ..InductionConfig::rule() };
    assert!(matches!(induce(&set, &bad, None), Err(InductionError::Config(_))));
}

const REPLY: &str = "\
## Search for a product
Given that you are on the shop home page, find a product by name.
fill('145', '{product-name}')
press('145', 'Enter')
click('{product_id}')

## Open the cart
click('9')
click('12')

## Open the cart again
click('9')
click('12')
";

#[test]
fn lm_output_parsing_and_dedup() {
    let parsed = parse_workflow_output(REPLY, "shop");
    assert_eq!(parsed.workflows.len(), 3);
    let search = &parsed.workflows[0];
    assert_eq!(search.description, "Search for a product");
    assert_eq!(search.placeholders(), ["product_name", "product_id"]);
    assert_eq!(dedup_workflows(&parsed.workflows).len(), 2);

    let lm = MockLm::scripted([REPLY]);
    let set = [exp("a", "shop", None, &["fill('145', 'cat')", "press('145', 'Enter')", "click('201')"])];
    let out = induce_lm(&set, &InductionConfig::default(), &lm).unwrap();
    assert_eq!(out.workflows.len(), 2);
    assert_eq!(lm.call_count(), 1);
    assert!(lm.requests()[0].prompt.contains("fill('145', 'cat')"));
}
