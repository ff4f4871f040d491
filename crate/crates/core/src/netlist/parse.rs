use std::collections::HashMap;

use super::{Card, ParseError, RawDeck, Token};

/// Split deck text into cards.
///
/// The first line is always the title. Full-line `*` comments and trailing
/// `;` comments are dropped, `+` lines are appended to the previous card, and
/// reading stops at `.end`.
pub fn parse_netlist(text: &str) -> Result<RawDeck, ParseError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let title = match lines.next() {
        Some((_, t)) if !text.trim().is_empty() => t.trim().to_string(),
        _ => return Err(ParseError::new(1, 1, "empty deck")),
    };
    if title.starts_with('.') {
        return Err(ParseError::new(
            1,
            1,
            format!("directive `{title}` before title line"),
        ));
    }

    let mut cards: Vec<Card> = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (lineno, raw) in lines {
        let body = match raw.find(';') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let trimmed = body.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('*') {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('+') {
            let offset = body.len() - rest.len();
            let Some(prev) = cards.last_mut() else {
                return Err(ParseError::new(
                    lineno,
                    offset,
                    "continuation line with no card to continue",
                ));
            };
            prev.tokens.extend(tokenize(rest, lineno, offset + 1));
            continue;
        }
        let tokens = tokenize(body, lineno, 1);
        let first = tokens[0].text.to_ascii_lowercase();
        if first == ".end" {
            break;
        }
        if !first.starts_with('.') {
            if let Some(prev) = seen.insert(first.clone(), lineno) {
                return Err(ParseError::new(
                    lineno,
                    tokens[0].column,
                    format!("duplicate device name `{}` (first defined on line {prev})", tokens[0].text),
                ));
            }
        }
        cards.push(Card {
            line: lineno,
            tokens,
        });
    }
    Ok(RawDeck { title, cards })
}

/// Whitespace, parentheses and commas separate tokens; `=` is a token of
/// its own so `W=200n` and `W = 200n` read the same.
fn tokenize(s: &str, line: usize, col0: usize) -> Vec<Token> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut start = 0;
    let flush = |cur: &mut String, start: usize, out: &mut Vec<Token>| {
        if !cur.is_empty() {
            out.push(Token {
                text: std::mem::take(cur),
                line,
                column: col0 + start,
            });
        }
    };
    for (i, ch) in s.char_indices() {
        match ch {
            c if c.is_whitespace() || c == '(' || c == ')' || c == ',' => {
                flush(&mut cur, start, &mut out)
            }
            '=' => {
                flush(&mut cur, start, &mut out);
                out.push(Token {
                    text: "=".into(),
                    line,
                    column: col0 + i,
                });
            }
            c => {
                if cur.is_empty() {
                    start = i;
                }
                cur.push(c);
            }
        }
    }
    flush(&mut cur, start, &mut out);
    out
}
