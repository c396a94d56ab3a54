//! Action values and the one-line call grammar `name('arg', ...)`.
//!
//! Arguments keep track of whether they were quoted, because the rule-based
//! validity filter treats `click(12)` and `click('12')` differently. Quoted
//! text is canonicalized on the way in: `{Search-Term}`, `<forum_link_id>`,
//! `'subcategory_id'` and bare ALL-CAPS tokens such as `FROM_LOCATION` all
//! become `{snake_case}` placeholders.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::de::{self, Deserializer, MapAccess, Visitor};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

/// Built-in actions every agent understands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Primitive {
    Click,
    Fill,
    Type,
    Hover,
    Press,
    SelectOption,
    Clear,
    SendMsgToUser,
    Stop,
}

impl Primitive {
    pub const ALL: [Primitive; 9] = [
        Primitive::Click,
        Primitive::Fill,
        Primitive::Type,
        Primitive::Hover,
        Primitive::Press,
        Primitive::SelectOption,
        Primitive::Clear,
        Primitive::SendMsgToUser,
        Primitive::Stop,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Primitive::Click => "click",
            Primitive::Fill => "fill",
            Primitive::Type => "type",
            Primitive::Hover => "hover",
            Primitive::Press => "press",
            Primitive::SelectOption => "select_option",
            Primitive::Clear => "clear",
            Primitive::SendMsgToUser => "send_msg_to_user",
            Primitive::Stop => "stop",
        }
    }

    /// Resolves a (case-insensitive) verb, including the Mind2Web `SELECT` spelling.
    pub fn from_name(name: &str) -> Option<Primitive> {
        let lower = name.to_ascii_lowercase();
        let p = match lower.as_str() {
            "click" => Primitive::Click,
            "fill" => Primitive::Fill,
            "type" => Primitive::Type,
            "hover" => Primitive::Hover,
            "press" => Primitive::Press,
            "select_option" | "select" => Primitive::SelectOption,
            "clear" => Primitive::Clear,
            "send_msg_to_user" => Primitive::SendMsgToUser,
            "stop" => Primitive::Stop,
            _ => return None,
        };
        Some(p)
    }

    /// Inclusive `(min, max)` argument count.
    pub fn arity(self) -> (usize, usize) {
        match self {
            Primitive::Click | Primitive::Hover | Primitive::Clear => (1, 1),
            Primitive::Fill | Primitive::Type | Primitive::Press | Primitive::SelectOption => (2, 2),
            Primitive::SendMsgToUser => (1, 1),
            Primitive::Stop => (0, 1),
        }
    }

    pub fn is_terminal(self) -> bool {
        matches!(self, Primitive::SendMsgToUser | Primitive::Stop)
    }

    /// Whether the first argument names a page element.
    pub fn targets_element(self) -> bool {
        !self.is_terminal()
    }

    /// `type` and `fill` behave identically; scoring and execution use this.
    pub fn semantic(self) -> Primitive {
        match self {
            Primitive::Type => Primitive::Fill,
            other => other,
        }
    }
}

impl fmt::Display for Primitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One call argument.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Arg {
    /// Written inside quotes: `'12'`, `"cat"`.
    Quoted(String),
    /// Written without quotes: `12`, `username`.
    Bare(String),
}

impl Arg {
    pub fn quoted(s: impl Into<String>) -> Arg {
        Arg::Quoted(s.into())
    }

    pub fn bare(s: impl Into<String>) -> Arg {
        Arg::Bare(s.into())
    }

    pub fn as_str(&self) -> &str {
        match self {
            Arg::Quoted(s) | Arg::Bare(s) => s,
        }
    }

    pub fn is_quoted(&self) -> bool {
        matches!(self, Arg::Quoted(_))
    }

    /// True when the argument is a quoted, non-empty run of ASCII digits.
    pub fn is_quoted_integer(&self) -> bool {
        match self {
            Arg::Quoted(s) => !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()),
            Arg::Bare(_) => false,
        }
    }

    /// True when the whole argument is a single placeholder such as `{place_name}`.
    pub fn is_placeholder(&self) -> bool {
        placeholder_re()
            .find(self.as_str())
            .is_some_and(|m| m.start() == 0 && m.end() == self.as_str().len())
    }

    pub fn placeholders(&self) -> Vec<String> {
        placeholders_in(self.as_str())
    }

    fn render_into(&self, out: &mut String) {
        match self {
            Arg::Bare(s) => out.push_str(s),
            Arg::Quoted(s) => {
                out.push('\'');
                for c in s.chars() {
                    if c == '\'' || c == '\\' {
                        out.push('\\');
                    }
                    out.push(c);
                }
                out.push('\'');
            }
        }
    }
}

impl Serialize for Arg {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Arg::Quoted(s) => serializer.serialize_str(s),
            Arg::Bare(s) => {
                if let Ok(n) = s.parse::<i64>() {
                    if n.to_string() == *s {
                        return serializer.serialize_i64(n);
                    }
                }
                let mut map = serializer.serialize_map(Some(1))?;
                map.serialize_entry("bare", s)?;
                map.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for Arg {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ArgVisitor;

        impl<'de> Visitor<'de> for ArgVisitor {
            type Value = Arg;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a string, an integer, or {\"bare\": string}")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Arg, E> {
                Ok(Arg::Quoted(v.to_string()))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Arg, E> {
                Ok(Arg::Bare(v.to_string()))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Arg, E> {
                Ok(Arg::Bare(v.to_string()))
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Arg, A::Error> {
                let mut bare = None;
                while let Some(key) = map.next_key::<String>()? {
                    if key == "bare" {
                        bare = Some(map.next_value::<String>()?);
                    } else {
                        return Err(de::Error::unknown_field(&key, &["bare"]));
                    }
                }
                bare.map(Arg::Bare).ok_or_else(|| de::Error::missing_field("bare"))
            }
        }

        deserializer.deserialize_any(ArgVisitor)
    }
}

/// A primitive or macro call.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Action {
    pub name: String,
    pub args: Vec<Arg>,
}

impl Action {
    pub fn new(name: impl Into<String>, args: Vec<Arg>) -> Action {
        Action { name: name.into(), args }
    }

    /// Shorthand for a primitive with all-quoted arguments.
    pub fn primitive(p: Primitive, args: &[&str]) -> Action {
        Action {
            name: p.as_str().to_string(),
            args: args.iter().map(|a| Arg::quoted(*a)).collect(),
        }
    }

    pub fn stop() -> Action {
        Action::new("stop", Vec::new())
    }

    pub fn primitive_kind(&self) -> Option<Primitive> {
        Primitive::from_name(&self.name)
    }

    pub fn is_terminal(&self) -> bool {
        self.primitive_kind().is_some_and(Primitive::is_terminal)
    }

    /// The element id argument of element-targeting primitives.
    pub fn element(&self) -> Option<&str> {
        match self.primitive_kind() {
            Some(p) if p.targets_element() => self.args.first().map(Arg::as_str),
            _ => None,
        }
    }

    /// Arguments that carry values rather than element references.
    pub fn value_args(&self) -> &[Arg] {
        match self.primitive_kind() {
            Some(p) if p.targets_element() && !self.args.is_empty() => &self.args[1..],
            _ => &self.args,
        }
    }

    /// Message payload of a terminal action.
    pub fn payload(&self) -> Option<&str> {
        if self.is_terminal() {
            self.args.first().map(Arg::as_str)
        } else {
            None
        }
    }

    pub fn placeholders(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for arg in &self.args {
            for p in arg.placeholders() {
                if !out.contains(&p) {
                    out.push(p);
                }
            }
        }
        out
    }

    pub fn render(&self) -> String {
        let mut out = String::with_capacity(16);
        out.push_str(&self.name);
        out.push('(');
        for (i, arg) in self.args.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            arg.render_into(&mut out);
        }
        out.push(')');
        out
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ActionError {
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("`{name}` takes {expected} argument(s), got {got}")]
    Arity {
        name: String,
        expected: String,
        got: usize,
    },
    #[error("cannot parse action at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

/// Macro names accepted on top of the primitives, with their parameter counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    macros: BTreeMap<String, usize>,
}

impl Vocabulary {
    pub fn new() -> Vocabulary {
        Vocabulary::default()
    }

    pub fn register(&mut self, name: impl Into<String>, arity: usize) {
        self.macros.insert(name.into(), arity);
    }

    pub fn macro_arity(&self, name: &str) -> Option<usize> {
        self.macros.get(name).copied()
    }

    pub fn is_macro(&self, name: &str) -> bool {
        self.macros.contains_key(name)
    }

    pub fn is_empty(&self) -> bool {
        self.macros.is_empty()
    }
}

/// Parses one action line against the primitive set.
pub fn parse_action(text: &str) -> Result<Action, ActionError> {
    parse_action_with(text, &Vocabulary::default())
}

/// Parses one action line, additionally accepting the macros in `vocab`.
pub fn parse_action_with(text: &str, vocab: &Vocabulary) -> Result<Action, ActionError> {
    let (raw_name, raw_args) = Lexer::new(text).call()?;
    let (name, expected) = if let Some(p) = Primitive::from_name(&raw_name) {
        (p.as_str().to_string(), p.arity())
    } else if let Some(arity) = vocab.macro_arity(&raw_name) {
        (raw_name.clone(), (arity, arity))
    } else {
        return Err(ActionError::UnknownAction(raw_name));
    };
    let got = raw_args.len();
    if got < expected.0 || got > expected.1 {
        let expected = if expected.0 == expected.1 {
            expected.0.to_string()
        } else {
            format!("{}..={}", expected.0, expected.1)
        };
        return Err(ActionError::Arity { name, expected, got });
    }
    let args = raw_args.into_iter().map(canonicalize).collect();
    Ok(Action { name, args })
}

fn canonicalize(arg: Arg) -> Arg {
    match arg {
        Arg::Quoted(s) => Arg::Quoted(canonicalize_placeholders(&s)),
        Arg::Bare(s) => {
            let canon = canonicalize_placeholders(&s);
            if placeholders_in(&canon).is_empty() {
                Arg::Bare(canon)
            } else {
                Arg::Quoted(canon)
            }
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Lexer<'a> {
        Lexer { src, pos: 0 }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ActionError> {
        Err(ActionError::Parse {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.bump();
        }
    }

    fn call(mut self) -> Result<(String, Vec<Arg>), ActionError> {
        self.skip_ws();
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\\')
        {
            self.bump();
        }
        if self.pos == start {
            return self.err("expected an action name");
        }
        let name = self.src[start..self.pos].replace("\\_", "_").to_ascii_lowercase();
        if name.is_empty() || name.starts_with(|c: char| c.is_ascii_digit()) || name.contains('\\') {
            return self.err("malformed action name");
        }
        self.skip_ws();
        if self.bump() != Some('(') {
            return self.err("expected `(`");
        }
        let mut args = Vec::new();
        self.skip_ws();
        if self.peek() == Some(')') {
            self.bump();
        } else {
            loop {
                self.skip_ws();
                args.push(self.arg()?);
                self.skip_ws();
                match self.bump() {
                    Some(',') => continue,
                    Some(')') => break,
                    Some(c) => return self.err(format!("unexpected `{c}` after argument")),
                    None => return self.err("unbalanced parentheses"),
                }
            }
        }
        self.skip_ws();
        if self.pos != self.src.len() {
            return self.err("trailing input after `)`");
        }
        Ok((name, args))
    }

    fn arg(&mut self) -> Result<Arg, ActionError> {
        match self.peek() {
            Some(q @ ('\'' | '"')) => {
                self.bump();
                let mut out = String::new();
                loop {
                    match self.bump() {
                        None => return self.err("unbalanced quotes"),
                        Some('\\') => match self.bump() {
                            None => return self.err("unbalanced quotes"),
                            Some(c @ ('\'' | '"' | '\\' | '_' | '{' | '}')) => out.push(c),
                            Some(c) => {
                                out.push('\\');
                                out.push(c);
                            }
                        },
                        Some(c) if c == q => break,
                        Some(c) => out.push(c),
                    }
                }
                Ok(Arg::Quoted(out))
            }
            _ => {
                let start = self.pos;
                while self
                    .peek()
                    .is_some_and(|c| !matches!(c, ',' | ')' | '(' | '\'' | '"'))
                {
                    self.bump();
                }
                let raw = self.src[start..self.pos].trim();
                if raw.is_empty() {
                    return self.err("empty argument");
                }
                if matches!(self.peek(), Some('\'' | '"' | '(')) {
                    return self.err("unexpected character in bare argument");
                }
                Ok(Arg::Bare(unescape_latex(raw)))
            }
        }
    }
}

fn unescape_latex(s: &str) -> String {
    s.replace("\\_", "_").replace("\\{", "{").replace("\\}", "}")
}

pub(crate) fn placeholder_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\{([a-z0-9_]+)\}").expect("valid regex"))
}

fn braces_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\{([^{}]*)\}").expect("valid regex"))
}

fn caps_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\b[A-Z][A-Z0-9_]*\b").expect("valid regex"))
}

fn angle_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^<([A-Za-z][A-Za-z0-9_\- ]*)>$").expect("valid regex"))
}

fn id_name_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[a-z][a-z0-9_]*_id$").expect("valid regex"))
}

/// True when every `{...}` group in `s` is a canonical placeholder.
pub fn placeholders_canonical(s: &str) -> bool {
    braces_re().find_iter(s).count() == placeholder_re().find_iter(s).count()
}

/// Placeholder names (without braces) in order of first occurrence.
pub fn placeholders_in(s: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for cap in placeholder_re().captures_iter(s) {
        let name = cap[1].to_string();
        if !out.contains(&name) {
            out.push(name);
        }
    }
    out
}

/// Lowercase snake-case form of a placeholder or identifier name.
///
/// `RepositoryName` → `repository_name`, `search-term` → `search_term`.
pub fn snake_case(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 4);
    let chars: Vec<char> = s.chars().collect();
    for (i, &c) in chars.iter().enumerate() {
        if c.is_ascii_alphanumeric() {
            let boundary = c.is_ascii_uppercase()
                && i > 0
                && (chars[i - 1].is_ascii_lowercase()
                    || chars[i - 1].is_ascii_digit()
                    || (chars[i - 1].is_ascii_uppercase()
                        && chars.get(i + 1).is_some_and(|n| n.is_ascii_lowercase())));
            if boundary && !out.ends_with('_') {
                out.push('_');
            }
            out.push(c.to_ascii_lowercase());
        } else if !out.is_empty() && !out.ends_with('_') {
            out.push('_');
        }
    }
    while out.ends_with('_') {
        out.pop();
    }
    out
}

/// Rewrites every placeholder style into the canonical `{snake_case}` form.
/// Idempotent.
pub fn canonicalize_placeholders(raw: &str) -> String {
    let s = unescape_latex(raw);
    let trimmed = s.trim();
    if let Some(cap) = angle_re().captures(trimmed) {
        let name = snake_case(&cap[1]);
        if !name.is_empty() {
            return format!("{{{name}}}");
        }
    }
    if id_name_re().is_match(trimmed) {
        return format!("{{{trimmed}}}");
    }

    // Canonicalize existing brace groups, then ALL-CAPS tokens in the text between them.
    let mut out = String::with_capacity(s.len() + 8);
    let mut last = 0;
    for m in braces_re().find_iter(&s) {
        out.push_str(&caps_to_placeholders(&s[last..m.start()]));
        let inner = &s[m.start() + 1..m.end() - 1];
        let name = snake_case(inner);
        if name.is_empty() {
            out.push_str(m.as_str());
        } else {
            out.push('{');
            out.push_str(&name);
            out.push('}');
        }
        last = m.end();
    }
    out.push_str(&caps_to_placeholders(&s[last..]));
    out
}

fn caps_to_placeholders(text: &str) -> String {
    caps_re()
        .replace_all(text, |caps: &regex::Captures<'_>| {
            let tok = &caps[0];
            let has_letters = tok.bytes().filter(u8::is_ascii_alphabetic).count() >= 2;
            if has_letters && (tok.contains('_') || tok.len() >= 4) {
                format!("{{{}}}", tok.to_ascii_lowercase())
            } else {
                tok.to_string()
            }
        })
        .into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_caps_placeholder() {
        let a = parse_action("fill('158', 'FROM_LOCATION')").unwrap();
        assert_eq!(a.name, "fill");
        assert_eq!(a.args, vec![Arg::quoted("158"), Arg::quoted("{from_location}")]);
    }

    #[test]
    fn parses_zero_arg_stop() {
        assert_eq!(parse_action("stop()").unwrap(), Action::stop());
        assert_eq!(parse_action("  stop ( )  ").unwrap(), Action::stop());
    }

    #[test]
    fn id_suffix_becomes_placeholder_after_unescape() {
        let a = parse_action(r"click('subcategory\_id')").unwrap();
        assert_eq!(a.args, vec![Arg::quoted("{subcategory_id}")]);
        let a = parse_action(r"hover('main\_category\_id')").unwrap();
        assert_eq!(a.args, vec![Arg::quoted("{main_category_id}")]);
    }

    #[test]
    fn numeric_ids_are_not_placeholders() {
        let a = parse_action("click('12_id')").unwrap();
        assert_eq!(a.args, vec![Arg::quoted("12_id")]);
        let a = parse_action("click('42')").unwrap();
        assert_eq!(a.args, vec![Arg::quoted("42")]);
    }

    #[test]
    fn brace_and_angle_styles() {
        let a = parse_action(r"fill('130', '\{RepositoryName\}')").unwrap();
        assert_eq!(a.args[1], Arg::quoted("{repository_name}"));
        let a = parse_action("click('<forum_link_id>')").unwrap();
        assert_eq!(a.args[0], Arg::quoted("{forum_link_id}"));
        let a = parse_action("fill('1', '{search-term}')").unwrap();
        assert_eq!(a.args[1], Arg::quoted("{search_term}"));
    }

    #[test]
    fn embedded_caps_tokens() {
        let a = parse_action(
            "send_msg_to_user('The distance between FROM_LOCATION and TO_LOCATION is DISTANCE and the estimated travel time is TIME.')",
        )
        .unwrap();
        assert_eq!(
            a.args[0].as_str(),
            "The distance between {from_location} and {to_location} is {distance} and the estimated travel time is {time}."
        );
        assert_eq!(a.placeholders(), vec!["from_location", "to_location", "distance", "time"]);
    }

    #[test]
    fn short_acronyms_survive() {
        let a = parse_action("fill('3', 'USA')").unwrap();
        assert_eq!(a.args[1], Arg::quoted("USA"));
        let a = parse_action("press('3', 'Enter')").unwrap();
        assert_eq!(a.args[1], Arg::quoted("Enter"));
    }

    #[test]
    fn uppercase_verbs_and_aliases() {
        let a = parse_action("CLICK('12')").unwrap();
        assert_eq!(a.name, "click");
        let a = parse_action("TYPE(44, \"cat\")").unwrap();
        assert_eq!(a.name, "type");
        assert_eq!(a.args, vec![Arg::bare("44"), Arg::quoted("cat")]);
        let a = parse_action("SELECT('7', 'Economy')").unwrap();
        assert_eq!(a.name, "select_option");
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_action("jump('1')"), Err(ActionError::UnknownAction(n)) if n == "jump"));
        assert!(matches!(parse_action("click('1', '2')"), Err(ActionError::Arity { .. })));
        assert!(matches!(parse_action("fill('1')"), Err(ActionError::Arity { .. })));
        assert!(matches!(parse_action("click('1)"), Err(ActionError::Parse { .. })));
        assert!(matches!(parse_action("click('1'"), Err(ActionError::Parse { .. })));
        assert!(matches!(parse_action("click('1') extra"), Err(ActionError::Parse { .. })));
        assert!(matches!(parse_action("I will click the button"), Err(_)));
        assert!(matches!(parse_action(""), Err(ActionError::Parse { .. })));
    }

    #[test]
    fn macros_need_registration() {
        let mut vocab = Vocabulary::new();
        assert!(parse_action_with("login('a', 'b')", &vocab).is_err());
        vocab.register("login", 2);
        let a = parse_action_with("login('a', 'b')", &vocab).unwrap();
        assert_eq!(a.name, "login");
        assert!(matches!(
            parse_action_with("login('a')", &vocab),
            Err(ActionError::Arity { .. })
        ));
    }

    #[test]
    fn quoting_round_trip() {
        let a = Action::new("send_msg_to_user", vec![Arg::quoted(r"it's a \ path")]);
        assert_eq!(parse_action(&a.render()).unwrap(), a);
    }

    #[test]
    fn snake_case_rules() {
        assert_eq!(snake_case("RepositoryName"), "repository_name");
        assert_eq!(snake_case("best-popup-option"), "best_popup_option");
        assert_eq!(snake_case("Find a place by its name"), "find_a_place_by_its_name");
        assert_eq!(snake_case("HTTPServer"), "http_server");
        assert_eq!(snake_case("  x  "), "x");
    }

    #[test]
    fn arg_json_shapes() {
        let a = Action::new("click", vec![Arg::bare("12"), Arg::quoted("12"), Arg::bare("user")]);
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(json, r#"{"name":"click","args":[12,"12",{"bare":"user"}]}"#);
        let back: Action = serde_json::from_str(&json).unwrap();
        assert_eq!(back, a);
    }
}
