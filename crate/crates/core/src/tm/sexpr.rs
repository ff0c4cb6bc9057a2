//! S-expression reader with `;` line comments and source positions.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExpr {
    Atom(String, Pos),
    List(Vec<SExpr>, Pos),
}

impl SExpr {
    pub fn pos(&self) -> Pos {
        match self {
            SExpr::Atom(_, p) | SExpr::List(_, p) => *p,
        }
    }

    pub fn atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom(s, _) => Some(s),
            SExpr::List(..) => None,
        }
    }

    pub fn list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(items, _) => Some(items),
            SExpr::Atom(..) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SExprError {
    #[error("unbalanced parentheses at {0}")]
    Unbalanced(Pos),
}

/// Reads every top-level expression in `text`.
pub fn parse_all(text: &str) -> Result<Vec<SExpr>, SExprError> {
    let mut stack: Vec<(Vec<SExpr>, Pos)> = Vec::new();
    let mut top = Vec::new();
    let mut atom = String::new();
    let mut atom_pos = Pos::default();
    let (mut line, mut col) = (1, 0);
    let mut in_comment = false;

    fn push(stack: &mut [(Vec<SExpr>, Pos)], top: &mut Vec<SExpr>, e: SExpr) {
        match stack.last_mut() {
            Some((items, _)) => items.push(e),
            None => top.push(e),
        }
    }

    for c in text.chars().chain(std::iter::once('\n')) {
        if c == '\n' {
            line += 1;
            col = 0;
        } else {
            col += 1;
        }
        let here = Pos { line, col };
        if in_comment {
            if c == '\n' {
                in_comment = false;
            }
            continue;
        }
        let delimiter = c.is_whitespace() || c == '(' || c == ')' || c == ';';
        if delimiter && !atom.is_empty() {
            push(&mut stack, &mut top, SExpr::Atom(std::mem::take(&mut atom), atom_pos));
        }
        match c {
            ';' => in_comment = true,
            '(' => stack.push((Vec::new(), here)),
            ')' => {
                let (items, pos) = stack.pop().ok_or(SExprError::Unbalanced(here))?;
                push(&mut stack, &mut top, SExpr::List(items, pos));
            }
            c if c.is_whitespace() => {}
            c => {
                if atom.is_empty() {
                    atom_pos = here;
                }
                atom.push(c);
            }
        }
    }
    if let Some((_, pos)) = stack.pop() {
        return Err(SExprError::Unbalanced(pos));
    }
    Ok(top)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_lists_and_comments() {
        let e = parse_all("(a (b ?c) ; note (\n d)").unwrap();
        assert_eq!(e.len(), 1);
        let items = e[0].list().unwrap();
        assert_eq!(items[0].atom(), Some("a"));
        assert_eq!(items[1].list().unwrap()[1].atom(), Some("?c"));
        assert_eq!(items[2].atom(), Some("d"));
        assert_eq!(items[2].pos(), Pos { line: 2, col: 2 });
    }

    #[test]
    fn unbalanced() {
        assert_eq!(parse_all("(a (b)").unwrap_err(), SExprError::Unbalanced(Pos { line: 1, col: 1 }));
        assert!(matches!(parse_all("a)"), Err(SExprError::Unbalanced(_))));
    }

    #[test]
    fn adjacent_lists() {
        let e = parse_all("(when (a ?x)(not (b ?y)))").unwrap();
        assert_eq!(e[0].list().unwrap().len(), 3);
    }
}
