use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    /// Lowercase-initial identifier or number: predicate, constant, keyword.
    Ident(String),
    Var(String),
    Param(String),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Amp,
    Bar,
    Dot,
    Eq,
    Neq,
    /// `:-`
    If,
    /// `<-`
    Deny,
    /// `<=`
    Defines,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) | Tok::Var(s) => format!("`{s}`"),
            Tok::Param(s) => format!("`${s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrack => "`[`".into(),
            Tok::RBrack => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Bar => "`|`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Neq => "`!=`".into(),
            Tok::If => "`:-`".into(),
            Tok::Deny => "`<-`".into(),
            Tok::Defines => "`<=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

fn ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

pub fn tokenize(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, msg: String| ParseError::Syntax { line, col, msg };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let tok2 = match two.as_str() {
            ":-" => Some(Tok::If),
            "<-" => Some(Tok::Deny),
            "<=" => Some(Tok::Defines),
            "!=" => Some(Tok::Neq),
            _ => None,
        };
        if let Some(t) = tok2 {
            out.push(Spanned {
                tok: t,
                line: l0,
                col: c0,
            });
            i += 2;
            col += 2;
            continue;
        }
        let tok1 = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBrack),
            ']' => Some(Tok::RBrack),
            ',' => Some(Tok::Comma),
            '&' => Some(Tok::Amp),
            '|' => Some(Tok::Bar),
            '.' => Some(Tok::Dot),
            '=' => Some(Tok::Eq),
            _ => None,
        };
        if let Some(t) = tok1 {
            out.push(Spanned {
                tok: t,
                line: l0,
                col: c0,
            });
            i += 1;
            col += 1;
            continue;
        }
        let start = if c == '$' { i + 1 } else { i };
        let mut j = start;
        while j < chars.len() && ident_char(chars[j]) {
            j += 1;
        }
        if j == start {
            return Err(err(l0, c0, format!("unexpected character `{c}`")));
        }
        let word: String = chars[start..j].iter().collect();
        let first = word.chars().next().unwrap();
        let tok = if c == '$' {
            Tok::Param(word)
        } else if first.is_uppercase() || first == '_' {
            Tok::Var(word)
        } else {
            Tok::Ident(word)
        };
        out.push(Spanned {
            tok,
            line: l0,
            col: c0,
        });
        col += j - i;
        i = j;
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}
