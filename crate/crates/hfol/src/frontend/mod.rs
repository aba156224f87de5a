//! The text format: a line-oriented, keyword-driven syntax for
//! signatures, morphisms, structures, sentence lists and spans, with
//! located diagnostics and a canonical printer that round-trips.

pub mod cli;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::semantics::{validate_model, KripkeStructure, WorldStructure};
use crate::sig::{
    extend, validate_morphism, validate_signature, FuncSym, HFOLSignature, Name, RelSym,
    SignatureMorphism, Var, VarSort,
};
use crate::squares::Span;
use crate::syntax::{and, implies, wellformed, Sentence, Term};
use crate::{Error, Result};

/// Everything a document can declare, keyed by name.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Workspace {
    pub signatures: BTreeMap<Name, HFOLSignature>,
    pub morphisms: BTreeMap<Name, SignatureMorphism>,
    pub models: BTreeMap<Name, KripkeStructure>,
    /// sentence lists with the name of the signature they live over
    pub sentences: BTreeMap<Name, (Name, Vec<Sentence>)>,
    pub spans: BTreeMap<Name, Span>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Loc {
    line: usize,
    col: usize,
}

impl std::fmt::Display for Loc {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Sym(&'static str),
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "{s}"),
            Tok::Sym(s) => write!(f, "{s}"),
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '@' || c == '!'
}

fn lex(src: &str) -> Result<Vec<(Tok, Loc)>> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = src.chars().peekable();
    while let Some(&c) = chars.peek() {
        let loc = Loc { line, col };
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        if c == '#' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                bump(&mut chars);
            }
            continue;
        }
        if is_ident_start(c) {
            let mut name = String::new();
            while let Some(&c) = chars.peek() {
                if is_ident_continue(c) {
                    name.push(bump(&mut chars));
                } else {
                    break;
                }
            }
            out.push((Tok::Ident(name), loc));
            continue;
        }
        bump(&mut chars);
        let two = |chars: &mut std::iter::Peekable<std::str::Chars>, want: char| {
            if chars.peek() == Some(&want) {
                true
            } else {
                false
            }
        };
        let sym: &'static str = match c {
            '{' => "{",
            '}' => "}",
            '(' => "(",
            ')' => ")",
            ':' => ":",
            ';' => ";",
            ',' => ",",
            '.' => ".",
            '@' => "@",
            '>' => ">",
            ']' => "]",
            '[' => "[",
            '=' => {
                if two(&mut chars, '>') {
                    bump(&mut chars);
                    "=>"
                } else {
                    "="
                }
            }
            '<' => {
                if two(&mut chars, '=') {
                    bump(&mut chars);
                    if chars.peek() == Some(&'>') {
                        bump(&mut chars);
                        "<=>"
                    } else {
                        return Err(Error::Parse(format!("{loc}: expected <=>")));
                    }
                } else {
                    "<"
                }
            }
            '-' => {
                if two(&mut chars, '>') {
                    bump(&mut chars);
                    "->"
                } else {
                    return Err(Error::Parse(format!("{loc}: stray -")));
                }
            }
            '|' => {
                if two(&mut chars, '-') {
                    bump(&mut chars);
                    if chars.peek() == Some(&'>') {
                        bump(&mut chars);
                        "|->"
                    } else {
                        return Err(Error::Parse(format!("{loc}: expected |->")));
                    }
                } else {
                    return Err(Error::Parse(format!("{loc}: stray |")));
                }
            }
            '\\' => {
                if two(&mut chars, '/') {
                    bump(&mut chars);
                    "\\/"
                } else {
                    return Err(Error::Parse(format!("{loc}: stray \\")));
                }
            }
            '/' => {
                if two(&mut chars, '\\') {
                    bump(&mut chars);
                    "/\\"
                } else {
                    "/"
                }
            }
            other => return Err(Error::Parse(format!("{loc}: unexpected character {other:?}"))),
        };
        out.push((Tok::Sym(sym), loc));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Loc)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn loc(&self) -> Loc {
        self.toks
            .get(self.pos.min(self.toks.len().saturating_sub(1)))
            .map(|(_, l)| *l)
            .unwrap_or(Loc { line: 1, col: 1 })
    }

    fn next(&mut self) -> Result<Tok> {
        let t = self
            .toks
            .get(self.pos)
            .map(|(t, _)| t.clone())
            .ok_or_else(|| Error::Parse("unexpected end of input".into()))?;
        self.pos += 1;
        Ok(t)
    }

    fn at_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(x)) if *x == s)
    }

    fn at_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(x)) if x == s)
    }

    fn sym(&mut self, s: &str) -> Result<()> {
        let loc = self.loc();
        match self.next()? {
            Tok::Sym(x) if x == s => Ok(()),
            other => Err(Error::Parse(format!("{loc}: expected {s:?}, found {other}"))),
        }
    }

    fn kw(&mut self, s: &str) -> Result<()> {
        let loc = self.loc();
        match self.next()? {
            Tok::Ident(x) if x == s => Ok(()),
            other => Err(Error::Parse(format!("{loc}: expected {s:?}, found {other}"))),
        }
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.at_sym(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, s: &str) -> bool {
        if self.at_kw(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<Name> {
        let loc = self.loc();
        match self.next()? {
            Tok::Ident(x) => Ok(x),
            other => Err(Error::Parse(format!("{loc}: expected a name, found {other}"))),
        }
    }
}

/// Surface terms before resolution against a signature.
#[derive(Clone, Debug)]
struct STerm {
    name: Name,
    at: Option<Name>,
    args: Vec<STerm>,
    parens: bool,
    loc: Loc,
}

#[derive(Clone, Debug)]
enum SExpr {
    Bare(STerm),
    Eq(STerm, STerm),
    At(Name, Box<SExpr>),
    Not(Box<SExpr>),
    Or(Vec<SExpr>),
    And(Vec<SExpr>),
    Implies(Box<SExpr>, Box<SExpr>),
    Iff(Box<SExpr>, Box<SExpr>),
    Store(Name, Box<SExpr>),
    Exists(Vec<(Name, Option<Name>)>, Box<SExpr>),
    Forall(Vec<(Name, Option<Name>)>, Box<SExpr>),
    Diamond(Name, Box<SExpr>),
    BoxMod(Name, Box<SExpr>),
    True,
    False,
}

fn parse_sexpr(p: &mut Parser) -> Result<SExpr> {
    let lhs = parse_prefix(p)?;
    if p.eat_sym("=>") {
        let rhs = parse_sexpr(p)?;
        return Ok(SExpr::Implies(Box::new(lhs), Box::new(rhs)));
    }
    if p.eat_sym("<=>") {
        let rhs = parse_sexpr(p)?;
        return Ok(SExpr::Iff(Box::new(lhs), Box::new(rhs)));
    }
    Ok(lhs)
}

fn parse_prefix(p: &mut Parser) -> Result<SExpr> {
    if p.eat_sym("@") {
        let k = p.ident()?;
        return Ok(SExpr::At(k, Box::new(parse_prefix(p)?)));
    }
    if p.eat_sym("<") {
        let l = p.ident()?;
        p.sym(">")?;
        return Ok(SExpr::Diamond(l, Box::new(parse_prefix(p)?)));
    }
    if p.eat_sym("[") {
        let l = p.ident()?;
        p.sym("]")?;
        return Ok(SExpr::BoxMod(l, Box::new(parse_prefix(p)?)));
    }
    if p.at_sym("\\/") || p.at_sym("/\\") {
        let conj = p.at_sym("/\\");
        p.pos += 1;
        p.sym("{")?;
        let mut items = Vec::new();
        while !p.at_sym("}") {
            items.push(parse_sexpr(p)?);
            if !p.eat_sym(";") {
                break;
            }
        }
        p.sym("}")?;
        return Ok(if conj { SExpr::And(items) } else { SExpr::Or(items) });
    }
    if p.eat_kw("not") {
        return Ok(SExpr::Not(Box::new(parse_prefix(p)?)));
    }
    if p.eat_kw("true") {
        return Ok(SExpr::True);
    }
    if p.eat_kw("false") {
        return Ok(SExpr::False);
    }
    if p.eat_kw("down") {
        let z = p.ident()?;
        p.sym(".")?;
        return Ok(SExpr::Store(z, Box::new(parse_sexpr(p)?)));
    }
    if p.at_kw("exists") || p.at_kw("forall") {
        let universal = p.at_kw("forall");
        p.pos += 1;
        let mut binders = Vec::new();
        loop {
            let x = p.ident()?;
            p.sym(":")?;
            let s = p.ident()?;
            let sort = if s == "world" { None } else { Some(s) };
            binders.push((x, sort));
            if !p.eat_sym(",") {
                break;
            }
        }
        p.sym(".")?;
        let body = Box::new(parse_sexpr(p)?);
        return Ok(if universal {
            SExpr::Forall(binders, body)
        } else {
            SExpr::Exists(binders, body)
        });
    }
    let lhs = parse_sterm(p)?;
    if p.eat_sym("=") {
        let rhs = parse_sterm(p)?;
        return Ok(SExpr::Eq(lhs, rhs));
    }
    Ok(SExpr::Bare(lhs))
}

fn parse_sterm(p: &mut Parser) -> Result<STerm> {
    let loc = p.loc();
    let name = p.ident()?;
    let at = if p.eat_sym("{") {
        let k = p.ident()?;
        p.sym("}")?;
        Some(k)
    } else {
        None
    };
    let mut parens = false;
    let mut args = Vec::new();
    if p.eat_sym("(") {
        parens = true;
        while !p.at_sym(")") {
            args.push(parse_sterm(p)?);
            if !p.eat_sym(",") {
                break;
            }
        }
        p.sym(")")?;
    }
    Ok(STerm { name, at, args, parens, loc })
}

fn resolve_term(sig: &HFOLSignature, t: &STerm) -> Result<Term> {
    let candidates: Vec<&FuncSym> = sig
        .base
        .functions
        .iter()
        .filter(|f| f.name == t.name && f.arity.len() == t.args.len())
        .collect();
    let sym = match candidates.as_slice() {
        [one] => (*one).clone(),
        [] => {
            return Err(Error::Parse(format!(
                "{}: unknown operation {} with {} arguments",
                t.loc,
                t.name,
                t.args.len()
            )))
        }
        _ => {
            return Err(Error::Parse(format!(
                "{}: ambiguous operation name {}",
                t.loc, t.name
            )))
        }
    };
    let at = match &t.at {
        Some(k) if !sig.nominals.contains(k) => {
            return Err(Error::Parse(format!("{}: unknown nominal {k}", t.loc)))
        }
        other => other.clone(),
    };
    let args = t.args.iter().map(|a| resolve_term(sig, a)).collect::<Result<_>>()?;
    Ok(Term { at, sym, args })
}

fn resolve_sexpr(sig: &HFOLSignature, e: &SExpr) -> Result<Sentence> {
    Ok(match e {
        SExpr::Bare(t) if t.args.is_empty() && !t.parens && t.at.is_none() => {
            if sig.nominals.contains(&t.name) {
                Sentence::Nominal(t.name.clone())
            } else if sig.unary_modalities.contains(&t.name) {
                Sentence::Modal(t.name.clone())
            } else {
                return Err(Error::Parse(format!(
                    "{}: {} is neither a nominal nor a unary modality",
                    t.loc, t.name
                )));
            }
        }
        SExpr::Bare(t) => {
            let candidates: Vec<&RelSym> = sig
                .base
                .relations
                .iter()
                .filter(|r| r.name == t.name && r.arity.len() == t.args.len())
                .collect();
            let sym = match candidates.as_slice() {
                [one] => (*one).clone(),
                [] => {
                    return Err(Error::Parse(format!(
                        "{}: unknown relation {} with {} arguments",
                        t.loc,
                        t.name,
                        t.args.len()
                    )))
                }
                _ => {
                    return Err(Error::Parse(format!(
                        "{}: ambiguous relation name {}",
                        t.loc, t.name
                    )))
                }
            };
            let at = match &t.at {
                Some(k) if !sig.nominals.contains(k) => {
                    return Err(Error::Parse(format!("{}: unknown nominal {k}", t.loc)))
                }
                other => other.clone(),
            };
            Sentence::Rel {
                at,
                sym,
                args: t.args.iter().map(|a| resolve_term(sig, a)).collect::<Result<_>>()?,
            }
        }
        SExpr::Eq(a, b) => Sentence::Eq(resolve_term(sig, a)?, resolve_term(sig, b)?),
        SExpr::At(k, p) => Sentence::at(k.clone(), resolve_sexpr(sig, p)?),
        SExpr::Not(p) => Sentence::not(resolve_sexpr(sig, p)?),
        SExpr::Or(items) => {
            Sentence::or(items.iter().map(|p| resolve_sexpr(sig, p)).collect::<Result<_>>()?)
        }
        SExpr::And(items) => {
            and(items.iter().map(|p| resolve_sexpr(sig, p)).collect::<Result<_>>()?)
        }
        SExpr::Implies(a, b) => implies(resolve_sexpr(sig, a)?, resolve_sexpr(sig, b)?),
        SExpr::Iff(a, b) => {
            let a = resolve_sexpr(sig, a)?;
            let b = resolve_sexpr(sig, b)?;
            and(vec![implies(a.clone(), b.clone()), implies(b, a)])
        }
        SExpr::Store(z, p) => {
            let ext = extend(sig, &[Var::nominal(z.clone())])
                .map_err(|e| Error::Parse(format!("binder {z}: {e}")))?;
            Sentence::Store(z.clone(), Box::new(resolve_sexpr(&ext.extended, p)?))
        }
        SExpr::Exists(binders, p) | SExpr::Forall(binders, p) => {
            let vars: Vec<Var> = binders
                .iter()
                .map(|(x, s)| match s {
                    None => Var::nominal(x.clone()),
                    Some(s) => Var::rigid(x.clone(), s.clone()),
                })
                .collect();
            let ext = extend(sig, &vars)
                .map_err(|e| Error::Parse(format!("binder: {e}")))?;
            let body = resolve_sexpr(&ext.extended, p)?;
            match e {
                SExpr::Forall(..) => crate::syntax::forall(vars, body),
                _ => Sentence::Exists(vars, Box::new(body)),
            }
        }
        SExpr::Diamond(l, p) => Sentence::Diamond(l.clone(), Box::new(resolve_sexpr(sig, p)?)),
        SExpr::BoxMod(l, p) => crate::syntax::box_mod(l.clone(), resolve_sexpr(sig, p)?),
        SExpr::True => Sentence::truth(),
        SExpr::False => Sentence::falsity(),
    })
}

/// Parses one sentence against a signature.
pub fn parse_sentence(sig: &HFOLSignature, text: &str) -> Result<Sentence> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let e = parse_sexpr(&mut p)?;
    if p.pos != p.toks.len() {
        return Err(Error::Parse(format!("{}: trailing input", p.loc())));
    }
    let s = resolve_sexpr(sig, &e)?;
    let diags = wellformed(sig, &s);
    if !diags.is_empty() {
        return Err(Error::Parse(format!("ill-formed sentence: {}", diags.join("; "))));
    }
    Ok(s)
}

fn parse_signature_block(p: &mut Parser) -> Result<HFOLSignature> {
    let mut sig = HFOLSignature::default();
    p.sym("{")?;
    while !p.at_sym("}") {
        let loc = p.loc();
        let section = p.ident()?;
        p.sym(":")?;
        match section.as_str() {
            "nominals" => loop {
                sig.nominals.insert(p.ident()?);
                if !p.eat_sym(",") {
                    break;
                }
            },
            "modalities" => loop {
                let m = p.ident()?;
                p.sym("/")?;
                let n = p.ident()?;
                match n.as_str() {
                    "1" => sig.unary_modalities.insert(m),
                    "2" => sig.binary_modalities.insert(m),
                    other => {
                        return Err(Error::Parse(format!("{loc}: modality arity {other}")))
                    }
                };
                if !p.eat_sym(",") {
                    break;
                }
            },
            "sorts" => loop {
                let s = p.ident()?;
                let rigid = if p.eat_kw("rigid") {
                    true
                } else {
                    p.eat_kw("flexible");
                    false
                };
                sig.base.sorts.insert(s.clone());
                if rigid {
                    sig.rigid.sorts.insert(s);
                }
                if !p.eat_sym(",") {
                    break;
                }
            },
            "ops" => loop {
                let name = p.ident()?;
                p.sym(":")?;
                let mut arity = Vec::new();
                while !p.at_sym("->") {
                    arity.push(p.ident()?);
                }
                p.sym("->")?;
                let result = p.ident()?;
                let rigid = if p.eat_kw("rigid") {
                    true
                } else {
                    p.eat_kw("flexible");
                    false
                };
                let f = FuncSym::new(name, arity, result);
                sig.base.functions.insert(f.clone());
                if rigid {
                    sig.rigid.functions.insert(f);
                }
                if !p.eat_sym(";") || p.at_sym("}") {
                    break;
                }
                if is_section(p) {
                    break;
                }
            },
            "rels" => loop {
                let name = p.ident()?;
                p.sym(":")?;
                let mut arity = Vec::new();
                while !p.at_sym(";") && !p.at_kw("rigid") && !p.at_kw("flexible") {
                    arity.push(p.ident()?);
                }
                let rigid = if p.eat_kw("rigid") {
                    true
                } else {
                    p.eat_kw("flexible");
                    false
                };
                let r = RelSym { name, arity };
                sig.base.relations.insert(r.clone());
                if rigid {
                    sig.rigid.relations.insert(r);
                }
                if !p.eat_sym(";") || p.at_sym("}") {
                    break;
                }
                if is_section(p) {
                    break;
                }
            },
            other => return Err(Error::Parse(format!("{loc}: unknown section {other}"))),
        }
        p.eat_sym(";");
    }
    p.sym("}")?;
    Ok(sig)
}

fn is_section(p: &Parser) -> bool {
    if let Some(Tok::Ident(x)) = p.peek() {
        if matches!(x.as_str(), "nominals" | "modalities" | "sorts" | "ops" | "rels") {
            return matches!(p.toks.get(p.pos + 1), Some((Tok::Sym(":"), _)));
        }
    }
    false
}

fn parse_morphism_block(
    p: &mut Parser,
    ws: &Workspace,
) -> Result<SignatureMorphism> {
    p.sym(":")?;
    let a = p.ident()?;
    p.sym("->")?;
    let b = p.ident()?;
    let src = ws
        .signatures
        .get(&a)
        .ok_or_else(|| Error::Parse(format!("unknown signature {a}")))?;
    let tgt = ws
        .signatures
        .get(&b)
        .ok_or_else(|| Error::Parse(format!("unknown signature {b}")))?;
    let mut chi = SignatureMorphism::identity(src);
    chi.target = tgt.clone();
    p.sym("{")?;
    while !p.at_sym("}") {
        let loc = p.loc();
        let kind = p.ident()?;
        let from = p.ident()?;
        p.sym("|->")?;
        let to = p.ident()?;
        p.sym(";")?;
        match kind.as_str() {
            "sort" => {
                chi.sort_map.insert(from, to);
            }
            "nominal" => {
                chi.nominal_map.insert(from, to);
            }
            "mod" => {
                chi.modality_map.insert(from, to);
            }
            "op" => {
                let syms: Vec<FuncSym> = src
                    .base
                    .functions
                    .iter()
                    .filter(|f| f.name == from)
                    .cloned()
                    .collect();
                if syms.is_empty() {
                    return Err(Error::Parse(format!("{loc}: unknown operation {from}")));
                }
                for f in syms {
                    chi.function_map.insert(f, to.clone());
                }
            }
            "rel" => {
                let syms: Vec<RelSym> = src
                    .base
                    .relations
                    .iter()
                    .filter(|r| r.name == from)
                    .cloned()
                    .collect();
                if syms.is_empty() {
                    return Err(Error::Parse(format!("{loc}: unknown relation {from}")));
                }
                for r in syms {
                    chi.relation_map.insert(r, to.clone());
                }
            }
            other => return Err(Error::Parse(format!("{loc}: unknown mapping kind {other}"))),
        }
    }
    p.sym("}")?;
    Ok(chi)
}

fn parse_model_block(p: &mut Parser, sig: &HFOLSignature) -> Result<KripkeStructure> {
    p.sym("{")?;
    let mut worlds: BTreeSet<Name> = BTreeSet::new();
    let mut nominal_interp = BTreeMap::new();
    let mut unary_interp: BTreeMap<Name, BTreeSet<Name>> = BTreeMap::new();
    let mut binary_interp: BTreeMap<Name, BTreeSet<(Name, Name)>> = BTreeMap::new();
    let mut world_models: BTreeMap<Name, WorldStructure> = BTreeMap::new();
    while !p.at_sym("}") {
        let loc = p.loc();
        let kw = p.ident()?;
        match kw.as_str() {
            "worlds" => {
                p.sym(":")?;
                loop {
                    worlds.insert(p.ident()?);
                    if !p.eat_sym(",") {
                        break;
                    }
                }
                p.sym(";")?;
            }
            "nominal" => {
                let k = p.ident()?;
                p.sym("=")?;
                let w = p.ident()?;
                p.sym(";")?;
                nominal_interp.insert(k, w);
            }
            "mod" => {
                let m = p.ident()?;
                p.sym("=")?;
                p.sym("{")?;
                if sig.unary_modalities.contains(&m) {
                    let mut ws = BTreeSet::new();
                    while !p.at_sym("}") {
                        ws.insert(p.ident()?);
                        if !p.eat_sym(",") {
                            break;
                        }
                    }
                    unary_interp.insert(m, ws);
                } else if sig.binary_modalities.contains(&m) {
                    let mut pairs = BTreeSet::new();
                    while !p.at_sym("}") {
                        p.sym("(")?;
                        let a = p.ident()?;
                        p.sym(",")?;
                        let b = p.ident()?;
                        p.sym(")")?;
                        pairs.insert((a, b));
                        if !p.eat_sym(",") {
                            break;
                        }
                    }
                    binary_interp.insert(m, pairs);
                } else {
                    return Err(Error::Parse(format!("{loc}: unknown modality {m}")));
                }
                p.sym("}")?;
                p.sym(";")?;
            }
            "world" => {
                let w = p.ident()?;
                let ws = parse_world_block(p, sig)?;
                world_models.insert(w, ws);
            }
            other => return Err(Error::Parse(format!("{loc}: unknown model item {other}"))),
        }
    }
    p.sym("}")?;
    Ok(KripkeStructure {
        sig: sig.clone(),
        worlds,
        nominal_interp,
        unary_interp,
        binary_interp,
        world_models,
    })
}

fn parse_world_block(p: &mut Parser, sig: &HFOLSignature) -> Result<WorldStructure> {
    let mut out = WorldStructure::default();
    p.sym("{")?;
    while !p.at_sym("}") {
        let loc = p.loc();
        let kw = p.ident()?;
        match kw.as_str() {
            "carrier" => {
                let s = p.ident()?;
                p.sym("=")?;
                p.sym("{")?;
                let mut elems = BTreeSet::new();
                while !p.at_sym("}") {
                    elems.insert(p.ident()?);
                    if !p.eat_sym(",") {
                        break;
                    }
                }
                p.sym("}")?;
                p.sym(";")?;
                out.carriers.insert(s, elems);
            }
            "op" => {
                let name = p.ident()?;
                let sym = lookup_func(sig, &name, loc)?;
                p.sym("=")?;
                let mut table = BTreeMap::new();
                if p.eat_sym("{") {
                    while !p.at_sym("}") {
                        p.sym("(")?;
                        let mut args = Vec::new();
                        while !p.at_sym(")") {
                            args.push(p.ident()?);
                            if !p.eat_sym(",") {
                                break;
                            }
                        }
                        p.sym(")")?;
                        p.sym("->")?;
                        let v = p.ident()?;
                        p.sym(";")?;
                        table.insert(args, v);
                    }
                    p.sym("}")?;
                } else {
                    let v = p.ident()?;
                    table.insert(vec![], v);
                }
                p.sym(";")?;
                out.functions.insert(sym, table);
            }
            "rel" => {
                let name = p.ident()?;
                let sym = lookup_rel(sig, &name, loc)?;
                p.sym("=")?;
                p.sym("{")?;
                let mut rows = BTreeSet::new();
                while !p.at_sym("}") {
                    if p.eat_sym("(") {
                        let mut row = Vec::new();
                        while !p.at_sym(")") {
                            row.push(p.ident()?);
                            if !p.eat_sym(",") {
                                break;
                            }
                        }
                        p.sym(")")?;
                        rows.insert(row);
                    } else {
                        rows.insert(vec![p.ident()?]);
                    }
                    if !p.eat_sym(",") {
                        break;
                    }
                }
                p.sym("}")?;
                p.sym(";")?;
                out.relations.insert(sym, rows);
            }
            other => return Err(Error::Parse(format!("{loc}: unknown world item {other}"))),
        }
    }
    p.sym("}")?;
    Ok(out)
}

fn lookup_func(sig: &HFOLSignature, name: &str, loc: Loc) -> Result<FuncSym> {
    let mut hits = sig.base.functions.iter().filter(|f| f.name == name);
    match (hits.next(), hits.next()) {
        (Some(f), None) => Ok(f.clone()),
        (None, _) => Err(Error::Parse(format!("{loc}: unknown operation {name}"))),
        _ => Err(Error::Parse(format!("{loc}: ambiguous operation name {name}"))),
    }
}

fn lookup_rel(sig: &HFOLSignature, name: &str, loc: Loc) -> Result<RelSym> {
    let mut hits = sig.base.relations.iter().filter(|r| r.name == name);
    match (hits.next(), hits.next()) {
        (Some(r), None) => Ok(r.clone()),
        (None, _) => Err(Error::Parse(format!("{loc}: unknown relation {name}"))),
        _ => Err(Error::Parse(format!("{loc}: ambiguous relation name {name}"))),
    }
}

/// Parses a whole document into a workspace. Declarations may only
/// reference earlier declarations; every object is validated on load.
pub fn parse_document(src: &str) -> Result<Workspace> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let mut ws = Workspace::default();
    while p.peek().is_some() {
        let loc = p.loc();
        let kw = p.ident()?;
        match kw.as_str() {
            "signature" => {
                let name = p.ident()?;
                let sig = parse_signature_block(&mut p)?;
                let diags = validate_signature(&sig);
                if !diags.is_empty() {
                    return Err(Error::Parse(format!(
                        "{loc}: signature {name} invalid: {}",
                        diags.join("; ")
                    )));
                }
                ws.signatures.insert(name, sig);
            }
            "morphism" => {
                let name = p.ident()?;
                let chi = parse_morphism_block(&mut p, &ws)
                    .map_err(|e| Error::Parse(format!("{loc}: morphism {name}: {e}")))?;
                let diags = validate_morphism(&chi);
                if !diags.is_empty() {
                    return Err(Error::Parse(format!(
                        "{loc}: morphism {name} invalid: {}",
                        diags.join("; ")
                    )));
                }
                ws.morphisms.insert(name, chi);
            }
            "model" => {
                let name = p.ident()?;
                p.kw("over")?;
                let signame = p.ident()?;
                let sig = ws
                    .signatures
                    .get(&signame)
                    .ok_or_else(|| Error::Parse(format!("{loc}: unknown signature {signame}")))?
                    .clone();
                let m = parse_model_block(&mut p, &sig)
                    .map_err(|e| Error::Parse(format!("{loc}: model {name}: {e}")))?;
                let diags = validate_model(&m);
                if !diags.is_empty() {
                    return Err(Error::Parse(format!(
                        "{loc}: model {name} invalid: {}",
                        diags.join("; ")
                    )));
                }
                ws.models.insert(name, m);
            }
            "sentences" => {
                let name = p.ident()?;
                p.kw("over")?;
                let signame = p.ident()?;
                let sig = ws
                    .signatures
                    .get(&signame)
                    .ok_or_else(|| Error::Parse(format!("{loc}: unknown signature {signame}")))?
                    .clone();
                p.sym("{")?;
                let mut phis = Vec::new();
                while !p.at_sym("}") {
                    let e = parse_sexpr(&mut p)?;
                    let s = resolve_sexpr(&sig, &e)?;
                    let diags = wellformed(&sig, &s);
                    if !diags.is_empty() {
                        return Err(Error::Parse(format!(
                            "{loc}: sentences {name}: {}",
                            diags.join("; ")
                        )));
                    }
                    phis.push(s);
                    p.sym(";")?;
                }
                p.sym("}")?;
                ws.sentences.insert(name, (signame, phis));
            }
            "span" => {
                let name = p.ident()?;
                p.sym("{")?;
                let mut left = None;
                let mut right = None;
                let mut presentations: BTreeMap<String, Vec<Sentence>> = BTreeMap::new();
                while !p.at_sym("}") {
                    let field = p.ident()?;
                    p.sym(":")?;
                    let value = p.ident()?;
                    p.sym(";")?;
                    match field.as_str() {
                        "left" => left = Some(value),
                        "right" => right = Some(value),
                        "phi" | "phi1" | "phi2" => {
                            let (_, phis) = ws.sentences.get(&value).ok_or_else(|| {
                                Error::Parse(format!("{loc}: unknown sentence list {value}"))
                            })?;
                            presentations.insert(field, phis.clone());
                        }
                        other => {
                            return Err(Error::Parse(format!("{loc}: unknown span field {other}")))
                        }
                    }
                }
                p.sym("}")?;
                let get = |n: &Option<Name>, which: &str| -> Result<SignatureMorphism> {
                    let n = n
                        .as_ref()
                        .ok_or_else(|| Error::Parse(format!("{loc}: span {name} missing {which}")))?;
                    ws.morphisms
                        .get(n)
                        .cloned()
                        .ok_or_else(|| Error::Parse(format!("{loc}: unknown morphism {n}")))
                };
                let chi1 = get(&left, "left")?;
                let chi2 = get(&right, "right")?;
                if chi1.source != chi2.source {
                    return Err(Error::Parse(format!(
                        "{loc}: span {name}: legs have different sources"
                    )));
                }
                ws.spans.insert(
                    name,
                    Span {
                        chi1,
                        chi2,
                        phi: presentations.remove("phi").unwrap_or_default(),
                        phi1: presentations.remove("phi1").unwrap_or_default(),
                        phi2: presentations.remove("phi2").unwrap_or_default(),
                    },
                );
            }
            other => {
                return Err(Error::Parse(format!("{loc}: unknown declaration {other}")))
            }
        }
    }
    Ok(ws)
}

pub fn print_term(t: &Term) -> String {
    let mut out = t.sym.name.clone();
    if let Some(k) = &t.at {
        let _ = write!(out, "{{{k}}}");
    }
    if !t.args.is_empty() {
        let args: Vec<String> = t.args.iter().map(print_term).collect();
        let _ = write!(out, "({})", args.join(", "));
    }
    out
}

pub fn print_sentence(s: &Sentence) -> String {
    match s {
        Sentence::Nominal(k) => k.clone(),
        Sentence::Modal(m) => m.clone(),
        Sentence::Eq(a, b) => format!("{} = {}", print_term(a), print_term(b)),
        Sentence::Rel { at, sym, args } => {
            let mut out = sym.name.clone();
            if let Some(k) = at {
                let _ = write!(out, "{{{k}}}");
            }
            let args: Vec<String> = args.iter().map(print_term).collect();
            let _ = write!(out, "({})", args.join(", "));
            out
        }
        Sentence::At(k, p) => format!("@ {k} {}", print_sentence(p)),
        Sentence::Not(p) => format!("not {}", print_sentence(p)),
        Sentence::Or(items) => {
            let inner: Vec<String> = items.iter().map(print_sentence).collect();
            format!("\\/{{{}}}", inner.join("; "))
        }
        Sentence::Store(z, p) => format!("down {z} . {}", print_sentence(p)),
        Sentence::Exists(vars, p) => {
            let binders: Vec<String> = vars
                .iter()
                .map(|v| match &v.sort {
                    VarSort::Nominal => format!("{}:world", v.name),
                    VarSort::Rigid(s) => format!("{}:{s}", v.name),
                })
                .collect();
            format!("exists {} . {}", binders.join(", "), print_sentence(p))
        }
        Sentence::Diamond(l, p) => format!("<{l}> {}", print_sentence(p)),
    }
}

pub fn print_signature(name: &str, sig: &HFOLSignature) -> String {
    let mut out = format!("signature {name} {{\n");
    if !sig.nominals.is_empty() {
        let ks: Vec<&str> = sig.nominals.iter().map(|s| s.as_str()).collect();
        let _ = writeln!(out, "  nominals: {};", ks.join(", "));
    }
    if !sig.unary_modalities.is_empty() || !sig.binary_modalities.is_empty() {
        let mut ms: Vec<String> =
            sig.unary_modalities.iter().map(|m| format!("{m}/1")).collect();
        ms.extend(sig.binary_modalities.iter().map(|m| format!("{m}/2")));
        let _ = writeln!(out, "  modalities: {};", ms.join(", "));
    }
    if !sig.base.sorts.is_empty() {
        let ss: Vec<String> = sig
            .base
            .sorts
            .iter()
            .map(|s| {
                if sig.is_rigid_sort(s) {
                    format!("{s} rigid")
                } else {
                    format!("{s} flexible")
                }
            })
            .collect();
        let _ = writeln!(out, "  sorts: {};", ss.join(", "));
    }
    if !sig.base.functions.is_empty() {
        let fs: Vec<String> = sig
            .base
            .functions
            .iter()
            .map(|f| {
                let marker = if sig.is_rigid_func(f) { "rigid" } else { "flexible" };
                let arity: Vec<&str> = f.arity.iter().map(|s| s.as_str()).collect();
                if arity.is_empty() {
                    format!("{} : -> {} {marker}", f.name, f.result)
                } else {
                    format!("{} : {} -> {} {marker}", f.name, arity.join(" "), f.result)
                }
            })
            .collect();
        let _ = writeln!(out, "  ops: {};", fs.join("; "));
    }
    if !sig.base.relations.is_empty() {
        let rs: Vec<String> = sig
            .base
            .relations
            .iter()
            .map(|r| {
                let marker = if sig.is_rigid_rel(r) { " rigid" } else { "" };
                let arity: Vec<&str> = r.arity.iter().map(|s| s.as_str()).collect();
                format!("{} : {}{marker}", r.name, arity.join(" "))
            })
            .collect();
        let _ = writeln!(out, "  rels: {};", rs.join("; "));
    }
    out.push_str("}\n");
    out
}

pub fn print_morphism(name: &str, chi: &SignatureMorphism, src: &str, tgt: &str) -> String {
    let mut out = format!("morphism {name} : {src} -> {tgt} {{\n");
    for (s, u) in &chi.sort_map {
        let _ = writeln!(out, "  sort {s} |-> {u};");
    }
    for (k, j) in &chi.nominal_map {
        let _ = writeln!(out, "  nominal {k} |-> {j};");
    }
    for (m, n) in &chi.modality_map {
        let _ = writeln!(out, "  mod {m} |-> {n};");
    }
    let mut ops: BTreeMap<&str, &str> = BTreeMap::new();
    for (f, d) in &chi.function_map {
        ops.insert(&f.name, d);
    }
    for (c, d) in ops {
        let _ = writeln!(out, "  op {c} |-> {d};");
    }
    let mut rels: BTreeMap<&str, &str> = BTreeMap::new();
    for (r, q) in &chi.relation_map {
        rels.insert(&r.name, q);
    }
    for (pn, q) in rels {
        let _ = writeln!(out, "  rel {pn} |-> {q};");
    }
    out.push_str("}\n");
    out
}

pub fn print_model(name: &str, signame: &str, m: &KripkeStructure) -> String {
    let mut out = format!("model {name} over {signame} {{\n");
    let ws: Vec<&str> = m.worlds.iter().map(|w| w.as_str()).collect();
    let _ = writeln!(out, "  worlds: {};", ws.join(", "));
    for (k, w) in &m.nominal_interp {
        let _ = writeln!(out, "  nominal {k} = {w};");
    }
    for (r, ws) in &m.unary_interp {
        let items: Vec<&str> = ws.iter().map(|w| w.as_str()).collect();
        let _ = writeln!(out, "  mod {r} = {{{}}};", items.join(", "));
    }
    for (l, pairs) in &m.binary_interp {
        let items: Vec<String> = pairs.iter().map(|(a, b)| format!("({a}, {b})")).collect();
        let _ = writeln!(out, "  mod {l} = {{{}}};", items.join(", "));
    }
    for (w, ws) in &m.world_models {
        let _ = writeln!(out, "  world {w} {{");
        for (s, carrier) in &ws.carriers {
            let items: Vec<&str> = carrier.iter().map(|e| e.as_str()).collect();
            let _ = writeln!(out, "    carrier {s} = {{{}}};", items.join(", "));
        }
        for (f, table) in &ws.functions {
            if f.arity.is_empty() {
                let _ = writeln!(out, "    op {} = {};", f.name, table[&vec![]]);
            } else {
                let rows: Vec<String> = table
                    .iter()
                    .map(|(args, v)| {
                        let args: Vec<&str> = args.iter().map(|e| e.as_str()).collect();
                        format!("({}) -> {v};", args.join(", "))
                    })
                    .collect();
                let _ = writeln!(out, "    op {} = {{ {} }};", f.name, rows.join(" "));
            }
        }
        for (r, rows) in &ws.relations {
            let items: Vec<String> = rows
                .iter()
                .map(|row| {
                    if row.len() == 1 {
                        row[0].clone()
                    } else {
                        let row: Vec<&str> = row.iter().map(|e| e.as_str()).collect();
                        format!("({})", row.join(", "))
                    }
                })
                .collect();
            let _ = writeln!(out, "    rel {} = {{{}}};", r.name, items.join(", "));
        }
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    out
}

/// Canonical text for a whole workspace: declarations sorted by kind
/// and name, each in the form the parser accepts.
pub fn print_workspace(ws: &Workspace) -> String {
    let mut out = String::new();
    for (name, sig) in &ws.signatures {
        out.push_str(&print_signature(name, sig));
        out.push('\n');
    }
    let signame = |sig: &HFOLSignature| -> Name {
        ws.signatures
            .iter()
            .find(|(_, s)| *s == sig)
            .map(|(n, _)| n.clone())
            .unwrap_or_else(|| "?".into())
    };
    for (name, chi) in &ws.morphisms {
        out.push_str(&print_morphism(name, chi, &signame(&chi.source), &signame(&chi.target)));
        out.push('\n');
    }
    for (name, m) in &ws.models {
        out.push_str(&print_model(name, &signame(&m.sig), m));
        out.push('\n');
    }
    for (name, (signame, phis)) in &ws.sentences {
        let _ = writeln!(out, "sentences {name} over {signame} {{");
        for phi in phis {
            let _ = writeln!(out, "  {};", print_sentence(phi));
        }
        out.push_str("}\n\n");
    }
    let morphname = |chi: &SignatureMorphism| -> Name {
        ws.morphisms
            .iter()
            .find(|(_, m)| *m == chi)
            .map(|(n, _)| n.clone())
            .unwrap_or_else(|| "?".into())
    };
    for (name, span) in &ws.spans {
        let _ = writeln!(out, "span {name} {{");
        let _ = writeln!(out, "  left: {};", morphname(&span.chi1));
        let _ = writeln!(out, "  right: {};", morphname(&span.chi2));
        let list_name = |phis: &Vec<Sentence>| -> Option<Name> {
            ws.sentences
                .iter()
                .find(|(_, (_, ps))| ps == phis)
                .map(|(n, _)| n.clone())
        };
        if !span.phi.is_empty() {
            if let Some(n) = list_name(&span.phi) {
                let _ = writeln!(out, "  phi: {n};");
            }
        }
        if !span.phi1.is_empty() {
            if let Some(n) = list_name(&span.phi1) {
                let _ = writeln!(out, "  phi1: {n};");
            }
        }
        if !span.phi2.is_empty() {
            if let Some(n) = list_name(&span.phi2) {
                let _ = writeln!(out, "  phi2: {n};");
            }
        }
        out.push_str("}\n\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::squares::fixtures;

    const SMALL: &str = r#"
signature D {
  nominals: k, k1;
  modalities: u/1, l/2;
  sorts: s rigid, t flexible;
  ops: c : -> s rigid; d : -> t flexible; f : s t -> t flexible;
  rels: p : s rigid; q : t;
}

model M over D {
  worlds: w1, w2;
  nominal k = w1;
  nominal k1 = w2;
  mod u = {w1};
  mod l = {(w1, w2)};
  world w1 {
    carrier s = {a, b};
    carrier t = {x};
    op c = a;
    op d = x;
    op f = { (a, x) -> x; (b, x) -> x; };
    rel p = {a};
    rel q = {};
  }
  world w2 {
    carrier s = {a, b};
    carrier t = {x, y};
    op c = a;
    op d = y;
    op f = { (a, x) -> y; (a, y) -> x; (b, x) -> x; (b, y) -> y; };
    rel p = {a};
    rel q = {(y)};
  }
}
"#;

    #[test]
    fn small_document_parses_and_validates() {
        let ws = parse_document(SMALL).unwrap();
        assert_eq!(ws.signatures.len(), 1);
        let m = &ws.models["M"];
        assert_eq!(m.worlds.len(), 2);
        assert!(m.sig.is_rigid_sort("s"));
        assert!(!m.sig.is_rigid_sort("t"));
    }

    #[test]
    fn empty_document_gives_empty_workspace() {
        let ws = parse_document("").unwrap();
        assert_eq!(ws, Workspace::default());
    }

    #[test]
    fn unknown_sort_reference_is_a_located_error() {
        let doc = "signature D {\n  ops: c : -> s rigid;\n}\n";
        let err = parse_document(doc).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("1:1"), "{msg}");
        assert!(msg.contains('s'), "{msg}");
    }

    #[test]
    fn sentence_round_trip_through_printer() {
        let ws = parse_document(SMALL).unwrap();
        let sig = &ws.signatures["D"];
        for text in [
            "@ k not u",
            "forall x:s . x = c",
            "exists z:world . \\/{k; @ z u}",
            "down z . @ z k1",
            "<l> p(c)",
            "true",
            "false",
        ] {
            let s = parse_sentence(sig, text).unwrap();
            let printed = print_sentence(&s);
            let back = parse_sentence(sig, &printed).unwrap();
            assert_eq!(s, back, "{text} -> {printed}");
        }
    }

    #[test]
    fn at_prefixed_terms_round_trip() {
        let ws = parse_document(SMALL).unwrap();
        let sig = &ws.signatures["D"];
        let s = parse_sentence(sig, "f{k}(c, d{k}) = d{k}").unwrap();
        let printed = print_sentence(&s);
        assert_eq!(parse_sentence(sig, &printed).unwrap(), s);
        assert!(printed.contains("{k}"), "{printed}");
        let r = parse_sentence(sig, "q{k1}(d{k1})").unwrap();
        assert_eq!(parse_sentence(sig, &print_sentence(&r)).unwrap(), r);
        assert!(parse_sentence(sig, "q(d{k})").is_err());
        assert!(parse_sentence(sig, "d{j} = d{j}").is_err());
    }

    #[test]
    fn workspace_print_parse_fixpoint() {
        let ws = parse_document(SMALL).unwrap();
        let printed = print_workspace(&ws);
        let back = parse_document(&printed).unwrap();
        assert_eq!(ws, back);
        assert_eq!(print_workspace(&back), printed);
    }

    #[test]
    fn sugar_desugars_on_parse() {
        let ws = parse_document(SMALL).unwrap();
        let sig = &ws.signatures["D"];
        let a = parse_sentence(sig, "k => k1").unwrap();
        let b = implies(Sentence::Nominal("k".into()), Sentence::Nominal("k1".into()));
        assert_eq!(a, b);
        let c = parse_sentence(sig, "/\\{k; k1}").unwrap();
        assert_eq!(c, and(vec![Sentence::Nominal("k".into()), Sentence::Nominal("k1".into())]));
        let d = parse_sentence(sig, "[l] k").unwrap();
        assert_eq!(d, crate::syntax::box_mod("l".into(), Sentence::Nominal("k".into())));
    }

    #[test]
    fn counterexample_fixtures_print_and_reparse() {
        let span = fixtures::counter1();
        let mut ws = Workspace::default();
        ws.signatures.insert("Delta".into(), span.chi1.source.clone());
        ws.signatures.insert("Delta1".into(), span.chi1.target.clone());
        ws.signatures.insert("Delta2".into(), span.chi2.target.clone());
        ws.morphisms.insert("chi1".into(), span.chi1.clone());
        ws.morphisms.insert("chi2".into(), span.chi2.clone());
        ws.models.insert("W1M1".into(), fixtures::counter1_w1m1());
        ws.sentences.insert(
            "Phi1".into(),
            ("Delta1".into(), vec![fixtures::counter1_phi1()]),
        );
        ws.spans.insert("counter1".into(), span);
        let printed = print_workspace(&ws);
        let back = parse_document(&printed).unwrap();
        assert_eq!(ws.signatures, back.signatures);
        assert_eq!(ws.morphisms, back.morphisms);
        assert_eq!(ws.models, back.models);
        assert_eq!(ws.sentences, back.sentences);
        assert_eq!(print_workspace(&back), printed);
    }
}
