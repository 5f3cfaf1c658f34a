/// Characters split off the edges of a whitespace token.
pub fn is_punct_char(c: char) -> bool {
    c.is_ascii_punctuation() || "¿¡«»…“”‘’–—".contains(c)
}

/// True when every character of `token` is punctuation.
pub fn is_punct_token(token: &str) -> bool {
    !token.is_empty() && token.chars().all(is_punct_char)
}

/// Removes parenthesized spans, innermost pairs included. An unmatched `(`
/// removes the rest of the line; a stray `)` is dropped.
pub fn strip_parentheses(line: &str) -> String {
    let mut out = String::with_capacity(line.len());
    let mut depth = 0usize;
    for c in line.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            _ if depth == 0 => out.push(c),
            _ => {}
        }
    }
    out
}

fn split_edges(token: &str, out: &mut Vec<String>) {
    if is_punct_token(token) {
        out.push(token.to_string());
        return;
    }
    let start = token.find(|c: char| !is_punct_char(c)).unwrap_or(0);
    let end = token
        .char_indices()
        .rev()
        .find(|(_, c)| !is_punct_char(*c))
        .map(|(i, c)| i + c.len_utf8())
        .unwrap_or(token.len());
    if start > 0 {
        out.push(token[..start].to_string());
    }
    out.push(token[start..end].to_string());
    if end < token.len() {
        out.push(token[end..].to_string());
    }
}

/// Subtitle-line cleaner: drop parenthesized spans, strip leading hyphens,
/// lower-case, and split punctuation off word edges.
pub fn clean_tokens(line: &str) -> Vec<String> {
    let stripped = strip_parentheses(line);
    let body = stripped.trim_start_matches(|c: char| c == '-' || c.is_whitespace());
    let lower = body.to_lowercase();
    let mut out = Vec::new();
    for tok in lower.split_whitespace() {
        split_edges(tok, &mut out);
    }
    out
}

/// [`clean_tokens`] joined by single spaces.
pub fn clean_line(line: &str) -> String {
    clean_tokens(line).join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn subtitle_line() {
        assert_eq!(clean_tokens("- (SIGHS) Hello there."), ["hello", "there", "."]);
    }

    #[test]
    fn nested_and_unbalanced_parentheses() {
        assert_eq!(strip_parentheses("a (b (c) d) e"), "a  e");
        assert_eq!(strip_parentheses("a (b c"), "a ");
        assert_eq!(strip_parentheses("a) b"), "a b");
        assert_eq!(clean_line("We (quietly (very)) left"), "we left");
    }

    #[test]
    fn clean_line_is_a_fixed_point() {
        assert_eq!(clean_line("hello there ."), "hello there .");
        assert_eq!(clean_line("¿qué pasa?"), "¿ qué pasa ?");
        assert_eq!(clean_line("don't stop"), "don't stop");
        assert_eq!(clean_line("-- well..."), "well ...");
    }

    proptest! {
        #[test]
        fn cleaning_is_idempotent(s in "[-a-zA-Z (),.!?' ]{0,40}") {
            let once = clean_line(&s);
            prop_assert_eq!(clean_line(&once), once);
        }
    }
}
