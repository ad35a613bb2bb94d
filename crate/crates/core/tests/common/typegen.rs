//! Random type expressions with a canonical form computed independently
//! of the normalizer, rendered in varied surface spellings.

use proptest::prelude::*;

#[derive(Debug, Clone)]
pub enum Ty {
    Name(&'static str),
    Generic(&'static str, Vec<Ty>),
    Optional(Box<Ty>),
    Union(Vec<Ty>),
}

const NAMES: &[&str] = &["int", "str", "float", "bool", "bytes", "None", "Any", "Node", "pkg.Model"];
/// (canonical, lowercase builtin spelling, arity)
const GENERICS: &[(&str, Option<&str>, usize)] = &[
    ("List", Some("list"), 1),
    ("Set", Some("set"), 1),
    ("FrozenSet", Some("frozenset"), 1),
    ("Type", Some("type"), 1),
    ("Dict", Some("dict"), 2),
    ("Tuple", Some("tuple"), 2),
    ("Sequence", None, 1),
    ("Mapping", None, 2),
];

pub fn ty() -> impl Strategy<Value = Ty> {
    let leaf = prop::sample::select(NAMES).prop_map(Ty::Name);
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (0..GENERICS.len(), prop::collection::vec(inner.clone(), 2)).prop_map(|(g, args)| {
                let (name, _, arity) = GENERICS[g];
                Ty::Generic(name, args.into_iter().take(arity).collect())
            }),
            inner.clone().prop_map(|t| Ty::Optional(Box::new(t))),
            prop::collection::vec(inner, 2..4).prop_map(|members| {
                // Members of a union are never unions themselves here.
                let flat = members
                    .into_iter()
                    .map(|m| match m {
                        Ty::Union(_) => Ty::Name("int"),
                        m => m,
                    })
                    .collect();
                Ty::Union(flat)
            }),
        ]
    })
}

/// The documented canonical form, built straight from the tree.
pub fn canonical(t: &Ty) -> String {
    let list = |args: &[Ty]| args.iter().map(canonical).collect::<Vec<_>>().join(",");
    match t {
        Ty::Name(n) => n.to_string(),
        Ty::Generic(g, args) => format!("{g}[{}]", list(args)),
        Ty::Optional(x) => format!("Optional[{}]", canonical(x)),
        Ty::Union(ms) => format!("Union[{}]", list(ms)),
    }
}

/// Spelling choices for one rendering.
#[derive(Debug, Clone)]
struct Style {
    bits: Vec<bool>,
}

impl Style {
    fn pick(&self, i: &mut usize) -> bool {
        *i += 1;
        self.bits[*i % self.bits.len()]
    }
}

fn surface(t: &Ty, s: &Style, i: &mut usize) -> String {
    let sep = |s: &Style, i: &mut usize| if s.pick(i) { ", " } else { "," };
    let ws = |s: &Style, i: &mut usize| if s.pick(i) { " " } else { "" };
    match t {
        Ty::Name(n) => {
            if *n == "Any" && s.pick(i) {
                "typing.Any".into()
            } else {
                n.to_string()
            }
        }
        Ty::Generic(g, args) => {
            let lower = GENERICS.iter().find(|x| x.0 == *g).and_then(|x| x.1);
            let head = match (lower, s.pick(i), s.pick(i)) {
                (Some(l), true, _) => l.to_string(),
                (_, _, true) => format!("typing.{g}"),
                _ => g.to_string(),
            };
            let mut parts = Vec::new();
            for a in args {
                parts.push(surface(a, s, i));
            }
            let joined = parts.join(sep(s, i));
            format!("{head}[{}{joined}{}]", ws(s, i), ws(s, i))
        }
        Ty::Optional(x) => {
            let head = if s.pick(i) { "typing.Optional" } else { "Optional" };
            format!("{head}[{}]", surface(x, s, i))
        }
        Ty::Union(ms) => {
            let parts: Vec<String> = ms.iter().map(|m| surface(m, s, i)).collect();
            if s.pick(i) {
                parts.join(if s.pick(i) { " | " } else { "|" })
            } else {
                format!("Union[{}]", parts.join(sep(s, i)))
            }
        }
    }
}

pub fn render(t: &Ty, bits: Vec<bool>, quoted: bool) -> String {
    let text = surface(t, &Style { bits }, &mut 0);
    if quoted {
        format!("'{text}'")
    } else {
        text
    }
}

pub fn style() -> impl Strategy<Value = (Vec<bool>, bool)> {
    (prop::collection::vec(any::<bool>(), 1..16), any::<bool>())
}
