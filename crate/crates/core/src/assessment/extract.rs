//! Locating the JSON object in free-form model output.
//!
//! Reasoning spans and markdown fences are removed first, then the text is
//! scanned for top-level balanced `{...}` spans. The last span that parses,
//! directly or after a bounded repair, wins.

use alloc::string::String;
use alloc::vec::Vec;

use serde_json::{Map, Value};

const CONTEXT_CHARS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractedJson {
    pub object: Map<String, Value>,
    /// True when the object only parsed after a repair.
    pub repaired: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExtractError {
    #[error("no JSON object found in model output near: {context:?}")]
    NoObject { context: String },
}

pub fn extract_json(raw: &str) -> Result<ExtractedJson, ExtractError> {
    let cleaned = strip_fences(&strip_think(raw));
    for (start, end) in balanced_spans(&cleaned).into_iter().rev() {
        let candidate = &cleaned[start..end];
        if let Ok(Value::Object(object)) = serde_json::from_str::<Value>(candidate) {
            return Ok(ExtractedJson {
                object,
                repaired: false,
            });
        }
        let fixed = repair(candidate);
        if fixed != candidate {
            if let Ok(Value::Object(object)) = serde_json::from_str::<Value>(&fixed) {
                return Ok(ExtractedJson {
                    object,
                    repaired: true,
                });
            }
        }
    }
    Err(ExtractError::NoObject {
        context: raw.chars().take(CONTEXT_CHARS).collect(),
    })
}

fn find_ci(hay: &str, needle: &str, from: usize) -> Option<usize> {
    let h = hay.as_bytes();
    let n = needle.as_bytes();
    if n.len() > h.len() {
        return None;
    }
    (from..=h.len() - n.len()).find(|&i| h[i..i + n.len()].eq_ignore_ascii_case(n))
}

/// Removes `<think>...</think>` spans. A closing tag with no opener drops
/// everything before it, since some servers strip the opening tag.
pub(crate) fn strip_think(raw: &str) -> String {
    const OPEN: &str = "<think>";
    const CLOSE: &str = "</think>";
    let mut text = raw;
    if let Some(close) = find_ci(text, CLOSE, 0) {
        match find_ci(text, OPEN, 0) {
            Some(open) if open < close => {}
            _ => text = &text[close + CLOSE.len()..],
        }
    }
    let mut out = String::with_capacity(text.len());
    let mut pos = 0;
    while let Some(open) = find_ci(text, OPEN, pos) {
        match find_ci(text, CLOSE, open + OPEN.len()) {
            Some(close) => {
                out.push_str(&text[pos..open]);
                pos = close + CLOSE.len();
            }
            // unterminated block: keep the rest, an answer may follow
            None => break,
        }
    }
    out.push_str(&text[pos..]);
    out
}

/// Drops markdown fence markers (```` ``` ```` plus an optional language
/// tag), keeping the fenced content in place.
pub(crate) fn strip_fences(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(idx) = rest.find("```") {
        out.push_str(&rest[..idx]);
        rest = &rest[idx + 3..];
        let tag_len = rest
            .bytes()
            .take_while(|b| b.is_ascii_alphanumeric() || *b == b'_' || *b == b'-')
            .count();
        rest = &rest[tag_len..];
        out.push('\n');
    }
    out.push_str(rest);
    out
}

/// Byte ranges of top-level balanced objects. Strings in either quote style
/// are skipped while inside an object.
fn balanced_spans(text: &str) -> Vec<(usize, usize)> {
    let bytes = text.as_bytes();
    let mut spans = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] != b'{' {
            i += 1;
            continue;
        }
        match match_brace(bytes, i) {
            Some(end) => {
                spans.push((i, end));
                i = end;
            }
            None => i += 1,
        }
    }
    spans
}

fn match_brace(bytes: &[u8], start: usize) -> Option<usize> {
    let mut depth = 0usize;
    let mut quote: Option<u8> = None;
    let mut escaped = false;
    for (offset, &b) in bytes[start..].iter().enumerate() {
        if let Some(q) = quote {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == q {
                quote = None;
            }
            continue;
        }
        match b {
            b'"' => quote = Some(b'"'),
            // only a quote that opens a token counts; apostrophes in bare
            // words would otherwise swallow the rest of the object
            b'\'' if opens_single_quote(bytes, start + offset) => quote = Some(b'\''),
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(start + offset + 1);
                }
            }
            _ => {}
        }
    }
    None
}

fn opens_single_quote(bytes: &[u8], at: usize) -> bool {
    let prev = bytes[..at].iter().rev().find(|b| !b.is_ascii_whitespace());
    matches!(prev, Some(b'{' | b',' | b':' | b'['))
}

/// Bounded textual repairs: trailing commas, single-quoted strings, and
/// bare identifier keys.
fn repair(text: &str) -> String {
    let bytes = text.as_bytes();
    let mut out = String::with_capacity(text.len() + 16);
    let mut i = 0;
    // last non-whitespace byte emitted outside a string
    let mut last_sig: Option<u8> = None;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b'"' => {
                let end = skip_string(bytes, i, b'"');
                out.push_str(&text[i..end]);
                i = end;
                last_sig = Some(b'"');
            }
            b'\'' if opens_single_quote(bytes, i) => {
                let end = skip_string(bytes, i, b'\'');
                let inner_end = if end > i + 1 && bytes[end - 1] == b'\'' { end - 1 } else { end };
                out.push('"');
                push_requoted(&mut out, &text[i + 1..inner_end]);
                out.push('"');
                i = end;
                last_sig = Some(b'"');
            }
            b',' => {
                let next = bytes[i + 1..].iter().find(|c| !c.is_ascii_whitespace());
                if !matches!(next, Some(b'}' | b']')) {
                    out.push(',');
                    last_sig = Some(b',');
                }
                i += 1;
            }
            c if (c.is_ascii_alphabetic() || c == b'_') && matches!(last_sig, Some(b'{' | b',')) => {
                let len = bytes[i..]
                    .iter()
                    .take_while(|c| c.is_ascii_alphanumeric() || **c == b'_' || **c == b'$')
                    .count();
                let ident = &text[i..i + len];
                let next = bytes[i + len..].iter().find(|c| !c.is_ascii_whitespace());
                if next == Some(&b':') {
                    out.push('"');
                    out.push_str(ident);
                    out.push('"');
                } else {
                    out.push_str(ident);
                }
                i += len;
                last_sig = Some(b'"');
            }
            _ => {
                // copy one UTF-8 scalar
                let ch_len = utf8_len(b);
                out.push_str(&text[i..i + ch_len]);
                if !b.is_ascii_whitespace() {
                    last_sig = Some(b);
                }
                i += ch_len;
            }
        }
    }
    out
}

fn utf8_len(first: u8) -> usize {
    match first {
        0x00..=0x7f => 1,
        0xc0..=0xdf => 2,
        0xe0..=0xef => 3,
        _ => 4,
    }
}

/// End (exclusive) of the quoted string starting at `start`.
fn skip_string(bytes: &[u8], start: usize, quote: u8) -> usize {
    let mut escaped = false;
    for (offset, &b) in bytes[start + 1..].iter().enumerate() {
        if escaped {
            escaped = false;
        } else if b == b'\\' {
            escaped = true;
        } else if b == quote {
            return start + offset + 2;
        }
    }
    bytes.len()
}

fn push_requoted(out: &mut String, inner: &str) {
    let mut chars = inner.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '\\' if chars.peek() == Some(&'\'') => {
                out.push('\'');
                chars.next();
            }
            '\\' => {
                out.push('\\');
                if let Some(n) = chars.next() {
                    out.push(n);
                }
            }
            '"' => out.push_str("\\\""),
            _ => out.push(c),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn obj(raw: &str) -> (Value, bool) {
        let e = extract_json(raw).unwrap();
        (Value::Object(e.object), e.repaired)
    }

    #[test]
    fn plain_object() {
        assert_eq!(obj(r#"{"a":1}"#), (json!({"a": 1}), false));
    }

    #[test]
    fn fenced_object() {
        assert_eq!(obj("```json\n{\"a\":1}\n```"), (json!({"a": 1}), false));
        assert_eq!(obj("Sure!\n```\n{\"a\":1}\n```\nDone."), (json!({"a": 1}), false));
    }

    #[test]
    fn think_then_trailing_comma() {
        let (v, repaired) = obj("<think>reasoning… maybe {\"a\":0}</think> Here: {\"a\":1,}");
        assert_eq!(v, json!({"a": 1}));
        assert!(repaired);
    }

    #[test]
    fn orphan_close_tag() {
        assert_eq!(obj("draft {\"a\":0} </think>{\"a\":2}").0, json!({"a": 2}));
    }

    #[test]
    fn last_object_wins() {
        assert_eq!(obj(r#"draft {"a":1} final {"a":2}"#).0, json!({"a": 2}));
        // an unparseable trailing object falls back to the earlier one
        assert_eq!(obj(r#"{"a":1} then {oops nope}"#).0, json!({"a": 1}));
    }

    #[test]
    fn key_repairs() {
        let (v, repaired) = obj("{'a': 'it\\'s', b: [1, 2,], \"c\": \"x'y\"}");
        assert_eq!(v, json!({"a": "it's", "b": [1, 2], "c": "x'y"}));
        assert!(repaired);
    }

    #[test]
    fn nested_and_braces_in_strings() {
        let raw = r#"{"autonomy": {"score": 12, "evidence": ["I said {hi}"]}}"#;
        assert_eq!(
            obj(raw).0,
            json!({"autonomy": {"score": 12, "evidence": ["I said {hi}"]}})
        );
    }

    #[test]
    fn no_object() {
        let long: String = "x".repeat(500);
        match extract_json(&long) {
            Err(ExtractError::NoObject { context }) => assert_eq!(context.chars().count(), 200),
            other => panic!("unexpected {other:?}"),
        }
        assert!(extract_json("score: 12, keywords: [a]").is_err());
        assert!(extract_json("").is_err());
    }
}
