//! Canonical text for type expressions.
//!
//! Rules, applied recursively through bracket parameters:
//!
//! 1. all whitespace is dropped;
//! 2. string-literal annotations (forward references) are unquoted, except
//!    inside `Literal[...]` where strings are values;
//! 3. a leading `typing.` is dropped from the well-known typing names;
//! 4. `list`, `dict`, `tuple`, `set`, `frozenset` and `type` become `List`,
//!    `Dict`, `Tuple`, `Set`, `FrozenSet` and `Type`;
//! 5. `X | Y | Z` becomes `Union[X,Y,Z]` in source order;
//! 6. `Optional[X]` is left alone unless [`NormalizeOptions::equate_optional`]
//!    is set, in which case two-member unions with `None` become `Optional`.
//!
//! Input that is not a type expression is kept verbatim and flagged.

/// Version tag for the rule set above. Bump on any rule change.
pub const NORMALIZATION_VERSION: u32 = 1;

const TYPING_NAMES: &[&str] = &[
    "Any",
    "AnyStr",
    "Awaitable",
    "Callable",
    "ClassVar",
    "Coroutine",
    "DefaultDict",
    "Deque",
    "Dict",
    "Final",
    "FrozenSet",
    "Generator",
    "Iterable",
    "Iterator",
    "List",
    "Literal",
    "Mapping",
    "MutableMapping",
    "MutableSequence",
    "NoReturn",
    "Optional",
    "Sequence",
    "Set",
    "Tuple",
    "Type",
    "Union",
];

const BUILTIN_ALIASES: &[(&str, &str)] = &[
    ("list", "List"),
    ("dict", "Dict"),
    ("tuple", "Tuple"),
    ("set", "Set"),
    ("frozenset", "FrozenSet"),
    ("type", "Type"),
];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NormalizeOptions {
    pub equate_optional: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalized {
    pub text: String,
    pub failed: bool,
}

pub fn normalize(raw: &str) -> String {
    normalize_with(raw, NormalizeOptions::default()).text
}

pub fn normalize_with(raw: &str, opts: NormalizeOptions) -> Normalized {
    match parse_type(raw) {
        Some(expr) => Normalized {
            text: expr.canonical(opts).render(),
            failed: false,
        },
        None => Normalized {
            text: raw.to_string(),
            failed: true,
        },
    }
}

/// Text before the first `[`, i.e. the outermost constructor.
pub fn base_type(normalized: &str) -> &str {
    match normalized.find('[') {
        Some(i) => &normalized[..i],
        None => normalized,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum TypeExpr {
    Name(String),
    Generic(String, Vec<TypeExpr>),
    /// `a | b` operator form.
    Union(Vec<TypeExpr>),
    /// Bracketed argument list, as in `Callable[[int], str]`.
    List(Vec<TypeExpr>),
    /// String literal, stored with its quotes.
    Str(String),
    Number(String),
    Ellipsis,
}

impl TypeExpr {
    fn canonical(self, opts: NormalizeOptions) -> TypeExpr {
        self.canon(opts, false)
    }

    fn canon(self, opts: NormalizeOptions, in_literal: bool) -> TypeExpr {
        match self {
            TypeExpr::Name(n) => TypeExpr::Name(canonical_name(&n)),
            TypeExpr::Generic(n, args) => {
                let name = canonical_name(&n);
                let literal = name == "Literal";
                let args: Vec<_> = args.into_iter().map(|a| a.canon(opts, literal)).collect();
                if opts.equate_optional && name == "Union" {
                    if let Some(inner) = optional_member(&args) {
                        return TypeExpr::Generic("Optional".into(), vec![inner]);
                    }
                }
                TypeExpr::Generic(name, args)
            }
            TypeExpr::Union(members) => {
                let members: Vec<_> = members.into_iter().map(|m| m.canon(opts, false)).collect();
                if opts.equate_optional {
                    if let Some(inner) = optional_member(&members) {
                        return TypeExpr::Generic("Optional".into(), vec![inner]);
                    }
                }
                TypeExpr::Generic("Union".into(), members)
            }
            TypeExpr::List(items) => {
                TypeExpr::List(items.into_iter().map(|i| i.canon(opts, in_literal)).collect())
            }
            TypeExpr::Str(lit) if !in_literal => match parse_type(unquote(&lit)) {
                Some(inner) => inner.canon(opts, false),
                None => TypeExpr::Str(lit),
            },
            other => other,
        }
    }

    fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out);
        out
    }

    fn render_into(&self, out: &mut String) {
        match self {
            TypeExpr::Name(n) | TypeExpr::Str(n) | TypeExpr::Number(n) => out.push_str(n),
            TypeExpr::Ellipsis => out.push_str("..."),
            TypeExpr::Generic(n, args) => {
                out.push_str(n);
                render_list(args, out);
            }
            TypeExpr::Union(members) => {
                out.push_str("Union");
                render_list(members, out);
            }
            TypeExpr::List(items) => render_list(items, out),
        }
    }
}

fn render_list(items: &[TypeExpr], out: &mut String) {
    out.push('[');
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        item.render_into(out);
    }
    out.push(']');
}

fn optional_member(members: &[TypeExpr]) -> Option<TypeExpr> {
    let none = TypeExpr::Name("None".into());
    match members {
        [a, b] if *b == none && *a != none => Some(a.clone()),
        [a, b] if *a == none && *b != none => Some(b.clone()),
        _ => None,
    }
}

fn canonical_name(name: &str) -> String {
    let name = match name.strip_prefix("typing.") {
        Some(rest) if TYPING_NAMES.contains(&rest) => rest,
        _ => name,
    };
    BUILTIN_ALIASES
        .iter()
        .find(|(lower, _)| *lower == name)
        .map_or(name, |(_, upper)| upper)
        .to_string()
}

fn unquote(lit: &str) -> &str {
    &lit[1..lit.len() - 1]
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Name(String),
    Str(String),
    Number(String),
    Ellipsis,
    Open,
    Close,
    Comma,
    Pipe,
}

fn tokenize(src: &str) -> Option<Vec<Tok>> {
    let chars: Vec<char> = src.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '[' => {
                toks.push(Tok::Open);
                i += 1;
            }
            ']' => {
                toks.push(Tok::Close);
                i += 1;
            }
            ',' => {
                toks.push(Tok::Comma);
                i += 1;
            }
            '|' => {
                toks.push(Tok::Pipe);
                i += 1;
            }
            '.' if chars[i..].starts_with(&['.', '.', '.']) => {
                toks.push(Tok::Ellipsis);
                i += 3;
            }
            '\'' | '"' => {
                let start = i;
                i += 1;
                while i < chars.len() && chars[i] != c {
                    if chars[i] == '\\' {
                        i += 1;
                    }
                    i += 1;
                }
                if i >= chars.len() {
                    return None;
                }
                i += 1;
                toks.push(Tok::Str(chars[start..i].iter().collect()));
            }
            c if c == '-' || c.is_ascii_digit() => {
                let start = i;
                i += 1;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '.') {
                    i += 1;
                }
                let lit: String = chars[start..i].iter().collect();
                if lit == "-" {
                    return None;
                }
                toks.push(Tok::Number(lit));
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut name = String::new();
                loop {
                    while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                        name.push(chars[i]);
                        i += 1;
                    }
                    // dotted continuation, tolerating whitespace around the dot
                    let mut j = i;
                    while j < chars.len() && chars[j].is_whitespace() {
                        j += 1;
                    }
                    if j < chars.len() && chars[j] == '.' && !chars[j..].starts_with(&['.', '.', '.']) {
                        j += 1;
                        while j < chars.len() && chars[j].is_whitespace() {
                            j += 1;
                        }
                        if j < chars.len() && (chars[j].is_alphabetic() || chars[j] == '_') {
                            name.push('.');
                            i = j;
                            continue;
                        }
                        return None;
                    }
                    break;
                }
                toks.push(Tok::Name(name));
            }
            _ => return None,
        }
    }
    Some(toks)
}

fn parse_type(src: &str) -> Option<TypeExpr> {
    let toks = tokenize(src)?;
    let mut p = TypeParser { toks, pos: 0 };
    let expr = p.union()?;
    (p.pos == p.toks.len()).then_some(expr)
}

struct TypeParser {
    toks: Vec<Tok>,
    pos: usize,
}

impl TypeParser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn union(&mut self) -> Option<TypeExpr> {
        let first = self.primary()?;
        if self.peek() != Some(&Tok::Pipe) {
            return Some(first);
        }
        let mut members = vec![first];
        while self.peek() == Some(&Tok::Pipe) {
            self.pos += 1;
            members.push(self.primary()?);
        }
        Some(TypeExpr::Union(members))
    }

    fn primary(&mut self) -> Option<TypeExpr> {
        match self.next()? {
            Tok::Name(n) => {
                if self.peek() == Some(&Tok::Open) {
                    self.pos += 1;
                    let args = self.args()?;
                    if args.is_empty() {
                        return None;
                    }
                    Some(TypeExpr::Generic(n, args))
                } else {
                    Some(TypeExpr::Name(n))
                }
            }
            Tok::Open => Some(TypeExpr::List(self.args()?)),
            Tok::Str(s) => Some(TypeExpr::Str(s)),
            Tok::Number(n) => Some(TypeExpr::Number(n)),
            Tok::Ellipsis => Some(TypeExpr::Ellipsis),
            _ => None,
        }
    }

    /// Comma-separated items up to and including the closing bracket.
    fn args(&mut self) -> Option<Vec<TypeExpr>> {
        let mut items = Vec::new();
        loop {
            if self.peek() == Some(&Tok::Close) {
                self.pos += 1;
                return Some(items);
            }
            items.push(self.union()?);
            match self.next()? {
                Tok::Comma => {}
                Tok::Close => return Some(items),
                _ => return None,
            }
        }
    }
}
