//! A JSON writer that reproduces the byte layout of Python's `json.dump`
//! (and of serde's compact output), so that SMD files we did not touch can be
//! written back verbatim.

use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JsonStyle {
    /// Per-level indentation; `None` writes everything on one line.
    pub indent: Option<String>,
    pub item_separator: String,
    pub key_separator: String,
    /// Escape every character outside printable ASCII as `\uXXXX`.
    pub ensure_ascii: bool,
    pub final_newline: bool,
}

impl Default for JsonStyle {
    /// `json.dump(obj, f, indent=2)` on Python 3.
    fn default() -> Self {
        JsonStyle {
            indent: Some("  ".into()),
            item_separator: ",".into(),
            key_separator: ": ".into(),
            ensure_ascii: true,
            final_newline: false,
        }
    }
}

impl JsonStyle {
    /// Guesses the style of `text` (which must parse to `value`) and confirms
    /// the guess by re-rendering. Falls back to the first plausible candidate
    /// when nothing reproduces the input exactly.
    pub fn detect(text: &str, value: &Value) -> JsonStyle {
        let final_newline = text.ends_with('\n');
        let body = text.trim_end_matches(['\n', '\r']);
        let indent = detect_indent(body);
        let has_non_ascii = !body.is_ascii();

        let separators: &[(&str, &str)] = if indent.is_some() {
            &[(",", ": "), (", ", ": ")]
        } else {
            &[(", ", ": "), (",", ":")]
        };
        let ascii_modes: &[bool] = if has_non_ascii {
            &[false]
        } else {
            &[true, false]
        };

        let mut candidates = Vec::new();
        for (item, key) in separators {
            for &ensure_ascii in ascii_modes {
                candidates.push(JsonStyle {
                    indent: indent.clone(),
                    item_separator: (*item).into(),
                    key_separator: (*key).into(),
                    ensure_ascii,
                    final_newline,
                });
            }
        }
        candidates
            .iter()
            .find(|style| render(value, style) == text)
            .unwrap_or(&candidates[0])
            .clone()
    }
}

fn detect_indent(body: &str) -> Option<String> {
    let mut lines = body.lines();
    let first = lines.next()?;
    if first.trim_end() != "[" && first.trim_end() != "{" {
        return None;
    }
    let second = lines.next()?;
    let ws: String = second
        .chars()
        .take_while(|c| *c == ' ' || *c == '\t')
        .collect();
    (!ws.is_empty()).then_some(ws)
}

pub fn render(value: &Value, style: &JsonStyle) -> String {
    let mut out = String::new();
    write_value(&mut out, value, style, 0);
    if style.final_newline {
        out.push('\n');
    }
    out
}

fn newline_indent(out: &mut String, style: &JsonStyle, depth: usize) {
    if let Some(ind) = &style.indent {
        out.push('\n');
        for _ in 0..depth {
            out.push_str(ind);
        }
    }
}

fn write_value(out: &mut String, value: &Value, style: &JsonStyle, depth: usize) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => out.push_str(&n.to_string()),
        Value::String(s) => write_string(out, s, style.ensure_ascii),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(&style.item_separator);
                }
                newline_indent(out, style, depth + 1);
                write_value(out, item, style, depth + 1);
            }
            newline_indent(out, style, depth);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push('{');
            for (i, (k, v)) in map.iter().enumerate() {
                if i > 0 {
                    out.push_str(&style.item_separator);
                }
                newline_indent(out, style, depth + 1);
                write_string(out, k, style.ensure_ascii);
                out.push_str(&style.key_separator);
                write_value(out, v, style, depth + 1);
            }
            newline_indent(out, style, depth);
            out.push('}');
        }
    }
}

fn write_string(out: &mut String, s: &str, ensure_ascii: bool) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            '\u{08}' => out.push_str("\\b"),
            '\u{0c}' => out.push_str("\\f"),
            c if (c as u32) < 0x20 => push_u_escape(out, c as u32),
            c if ensure_ascii && !(' '..='~').contains(&c) => {
                let mut buf = [0u16; 2];
                for unit in c.encode_utf16(&mut buf) {
                    push_u_escape(out, *unit as u32);
                }
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

fn push_u_escape(out: &mut String, unit: u32) {
    out.push_str(&format!("\\u{unit:04x}"));
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Value {
        serde_json::from_str(text).unwrap()
    }

    #[test]
    fn python_indent_two() {
        let text = "[\n  {\n    \"a\": [],\n    \"b\": {\n      \"c\": null,\n      \"d\": [\n        1,\n        true\n      ]\n    }\n  }\n]";
        let v = parse(text);
        let style = JsonStyle::detect(text, &v);
        assert_eq!(style.indent.as_deref(), Some("  "));
        assert_eq!(render(&v, &style), text);
    }

    #[test]
    fn python_compact_default_separators() {
        let text = "[{\"z\": \"caf\\u00e9\", \"a\": [1, 2], \"e\": {}}]\n";
        let v = parse(text);
        let style = JsonStyle::detect(text, &v);
        assert!(style.indent.is_none());
        assert!(style.ensure_ascii);
        assert!(style.final_newline);
        assert_eq!(render(&v, &style), text);
    }

    #[test]
    fn serde_compact_and_raw_unicode() {
        let text = "[{\"k\":\"café \\u001f\",\"n\":-3}]";
        let v = parse(text);
        let style = JsonStyle::detect(text, &v);
        assert!(!style.ensure_ascii);
        assert_eq!(render(&v, &style), text);
    }

    #[test]
    fn python2_trailing_space_separators() {
        let text = "[\n    {\n        \"a\": 1, \n        \"b\": \"x\"\n    }\n]";
        let v = parse(text);
        assert_eq!(render(&v, &JsonStyle::detect(text, &v)), text);
    }

    #[test]
    fn astral_chars_become_surrogate_pairs() {
        let mut out = String::new();
        write_string(&mut out, "a\u{1F600}\u{7f}", true);
        assert_eq!(out, "\"a\\ud83d\\ude00\\u007f\"");
    }
}
