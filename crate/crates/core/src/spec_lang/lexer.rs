use super::SpecError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(u64),
    Sym(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub pos: usize,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(n) => format!("`{n}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

const SYMBOLS: [&str; 19] =
    [":=", "->", "<=", "&&", "||", "(", ")", ",", ";", ".", "=", "<", ">", "+", "-", "*", "!", "{", "}"];

pub fn tokenize(src: &str) -> Result<Vec<Token>, SpecError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    'outer: while i < bytes.len() {
        let ch = bytes[i];
        if ch.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if src[i..].starts_with("//") {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if ch.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n = src[start..i].parse::<u64>().map_err(|_| SpecError::Syntax {
                position: start,
                expected: vec!["a number below 2^64".into()],
                found: format!("`{}`", &src[start..i]),
            })?;
            out.push(Token { tok: Tok::Num(n), pos: start });
            continue;
        }
        if ch.is_ascii_alphabetic() || ch == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(src[start..i].to_string()), pos: start });
            continue;
        }
        for sym in SYMBOLS {
            if src[i..].starts_with(sym) {
                out.push(Token { tok: Tok::Sym(sym), pos: i });
                i += sym.len();
                continue 'outer;
            }
        }
        let c = src[i..].chars().next().unwrap_or('?');
        return Err(SpecError::Syntax { position: i, expected: vec!["a token".into()], found: format!("`{c}`") });
    }
    out.push(Token { tok: Tok::Eof, pos: src.len() });
    Ok(out)
}
