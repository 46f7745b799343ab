//! Tolerant HTML to plain text conversion.
//!
//! Not a conforming HTML parser: a forgiving tag scanner that never fails on
//! malformed markup. Unclosed tags, stray `<` and missing end tags are all accepted.

/// Elements whose content is never visible text.
const SKIP: &[&str] = &["script", "style", "nav", "noscript", "template", "head", "title", "svg", "iframe", "object"];

/// Elements that start or end a paragraph.
const BLOCK: &[&str] = &[
    "address", "article", "aside", "blockquote", "body", "br", "caption", "dd", "details", "div", "dl", "dt",
    "fieldset", "figcaption", "figure", "footer", "form", "h1", "h2", "h3", "h4", "h5", "h6", "header", "hr",
    "html", "li", "main", "ol", "p", "pre", "section", "summary", "table", "tbody", "td", "tfoot", "th", "thead",
    "tr", "ul",
];

struct Tag {
    name: String,
    closing: bool,
    self_closing: bool,
}

/// Parses a tag starting right after `<`. Returns the tag and the byte length consumed
/// (through `>`), or `None` when this `<` does not start a tag.
fn parse_tag(rest: &str) -> Option<(Tag, usize)> {
    let bytes = rest.as_bytes();
    let mut i = 0;
    let closing = bytes.first() == Some(&b'/');
    if closing {
        i += 1;
    }
    let start = i;
    while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'-' || bytes[i] == b':') {
        i += 1;
    }
    if i == start || !bytes[start].is_ascii_alphabetic() {
        return None;
    }
    let name = rest[start..i].to_ascii_lowercase();
    // attributes: skip to the next '>' outside quotes
    let mut quote = None;
    while i < bytes.len() {
        let b = bytes[i];
        match quote {
            Some(q) if b == q => quote = None,
            Some(_) => {}
            None if b == b'"' || b == b'\'' => quote = Some(b),
            None if b == b'>' => {
                let self_closing = i > 0 && bytes[i - 1] == b'/';
                return Some((Tag { name, closing, self_closing }, i + 1));
            }
            None => {}
        }
        i += 1;
    }
    // unterminated tag swallows the rest of the document
    Some((Tag { name, closing, self_closing: false }, bytes.len()))
}

struct TextBuilder {
    paragraphs: Vec<String>,
    current: String,
}

impl TextBuilder {
    fn push_text(&mut self, raw: &str) {
        let decoded = html_escape::decode_html_entities(raw);
        self.current.push_str(&decoded);
    }

    fn push_space(&mut self) {
        self.current.push(' ');
    }

    fn break_paragraph(&mut self) {
        let para = self.current.split_whitespace().collect::<Vec<_>>().join(" ");
        if !para.is_empty() {
            self.paragraphs.push(para);
        }
        self.current.clear();
    }
}

/// Visible text of an HTML document: paragraphs separated by `\n`, whitespace runs
/// inside a paragraph collapsed to single spaces, entities decoded.
pub fn html_to_text(html: &[u8]) -> String {
    let src = String::from_utf8_lossy(html);
    let src = src.as_ref();
    let mut out = TextBuilder { paragraphs: Vec::new(), current: String::new() };
    let mut pos = 0;
    let mut text_start = 0;

    while let Some(off) = src[pos..].find('<') {
        let lt = pos + off;
        let after = &src[lt + 1..];
        if after.starts_with("!--") {
            out.push_text(&src[text_start..lt]);
            let end = after[3..].find("-->").map_or(src.len(), |e| lt + 1 + 3 + e + 3);
            pos = end;
            text_start = end;
            continue;
        }
        if after.starts_with('!') || after.starts_with('?') {
            // doctype, cdata, processing instruction
            out.push_text(&src[text_start..lt]);
            let end = after.find('>').map_or(src.len(), |e| lt + 1 + e + 1);
            pos = end;
            text_start = end;
            continue;
        }
        let Some((tag, len)) = parse_tag(after) else {
            pos = lt + 1;
            continue;
        };
        out.push_text(&src[text_start..lt]);
        let mut next = lt + 1 + len;

        if !tag.closing && !tag.self_closing && SKIP.contains(&tag.name.as_str()) {
            next = skip_element(src, next, &tag.name);
            out.push_space();
        } else if BLOCK.contains(&tag.name.as_str()) {
            out.break_paragraph();
        } else {
            // inline tags separate words only when the source had whitespace
            if matches!(tag.name.as_str(), "img" | "input" | "button" | "select" | "textarea") {
                out.push_space();
            }
        }
        pos = next;
        text_start = next;
    }
    out.push_text(&src[text_start..]);
    out.break_paragraph();
    out.paragraphs.join("\n")
}

/// Byte offset just past the matching `</name>`, honoring nesting of the same element.
fn skip_element(src: &str, from: usize, name: &str) -> usize {
    let lower = src[from..].to_ascii_lowercase();
    let open = format!("<{name}");
    let close = format!("</{name}");
    let mut depth = 1usize;
    let mut i = 0;
    while i < lower.len() {
        let Some(off) = lower[i..].find('<') else { break };
        let at = i + off;
        let rest = &lower[at..];
        let boundary = |s: &str| rest[s.len()..].chars().next().is_none_or(|c| !c.is_ascii_alphanumeric());
        if rest.starts_with(&close) && boundary(&close) {
            depth -= 1;
            let end = rest.find('>').map_or(lower.len(), |e| at + e + 1);
            if depth == 0 {
                return from + end;
            }
            i = end;
        } else if name != "script" && name != "style" && rest.starts_with(&open) && boundary(&open) {
            depth += 1;
            i = at + open.len();
        } else {
            i = at + 1;
        }
    }
    src.len()
}
