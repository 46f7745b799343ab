use serde::{Deserialize, Serialize};

/// A sentence of the policy text. `offset` is the byte offset of `text` in the
/// source string.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub index: usize,
    pub offset: usize,
    pub text: String,
}

impl Sentence {
    pub fn end(&self) -> usize {
        self.offset + self.text.len()
    }
}

/// Tokens ending in `.` that never close a sentence.
const ABBREVIATIONS: &[&str] = &[
    "e.g.", "i.e.", "etc.", "vs.", "mr.", "mrs.", "ms.", "dr.", "inc.", "ltd.", "co.", "corp.", "no.", "u.s.",
    "approx.", "incl.", "cf.", "st.",
];

/// Characters allowed between a terminator and the boundary (closing quotes/brackets).
fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '\u{201d}' | '\u{2019}')
}

fn is_abbreviation(text: &str, dot: usize) -> bool {
    let token_start = text[..dot].rfind(|c: char| c.is_whitespace() || c == '(').map_or(0, |i| i + 1);
    let token = text[token_start..=dot].to_lowercase();
    ABBREVIATIONS.contains(&token.as_str())
}

/// Splits on `.`, `!` or `?` followed by whitespace and an uppercase letter or a
/// newline, and at every newline (paragraph break). Sentences carry their offsets so
/// the original text can be rebuilt from sentences plus the whitespace between them.
pub fn split_sentences(text: &str) -> Vec<Sentence> {
    let mut out = Vec::new();
    let mut start = None::<usize>;
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;

    let push = |from: usize, to: usize, out: &mut Vec<Sentence>| {
        let piece = &text[from..to];
        let trimmed = piece.trim_end();
        if !trimmed.is_empty() {
            out.push(Sentence { index: out.len(), offset: from, text: trimmed.to_string() });
        }
    };

    while i < chars.len() {
        let (at, c) = chars[i];
        if start.is_none() {
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            start = Some(at);
        }
        if c == '\n' {
            push(start.take().expect("set"), at, &mut out);
            i += 1;
            continue;
        }
        if matches!(c, '.' | '!' | '?') {
            let mut j = i + 1;
            while j < chars.len() && (is_closer(chars[j].1) || matches!(chars[j].1, '.' | '!' | '?')) {
                j += 1;
            }
            let end = chars.get(j).map_or(text.len(), |&(b, _)| b);
            let boundary = if j == chars.len() {
                true
            } else if chars[j].1.is_whitespace() {
                let mut k = j;
                while k < chars.len() && chars[k].1.is_whitespace() && chars[k].1 != '\n' {
                    k += 1;
                }
                k == chars.len() || chars[k].1 == '\n' || chars[k].1.is_uppercase()
            } else {
                false
            };
            if boundary && !(c == '.' && is_abbreviation(text, at)) {
                push(start.take().expect("set"), end, &mut out);
                i = j;
                continue;
            }
        }
        i += 1;
    }
    if let Some(s) = start {
        push(s, text.len(), &mut out);
    }
    out
}
