//! Hybrid terms and sentences: well-sortedness, the core grammar,
//! derived connectives, translation along morphisms and semantic
//! opposites.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::sig::{
    at_name, extend, fresh_name, FuncSym, HFOLSignature, Name, RelSym, SignatureMorphism, Var,
    VarSort,
};
use crate::{Error, Result};

/// Sort of a hybrid term: a plain sort of the base signature, or a
/// rigidified copy `@_k s` of a flexible sort.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum HybridSort {
    Plain(Name),
    At(Name, Name),
}

impl std::fmt::Display for HybridSort {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HybridSort::Plain(s) => write!(f, "{s}"),
            HybridSort::At(k, s) => write!(f, "{}", at_name(k, s)),
        }
    }
}

/// `@_k s`, collapsing to `s` when `s` is rigid.
pub fn at_sort(sig: &HFOLSignature, k: &str, s: &Name) -> HybridSort {
    if sig.is_flexible_sort(s) {
        HybridSort::At(k.to_string(), s.clone())
    } else {
        HybridSort::Plain(s.clone())
    }
}

/// A hybrid term: a symbol application, optionally read at the world
/// named by a nominal (`at`). Variables-as-constants are nullary
/// applications.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Term {
    pub at: Option<Name>,
    pub sym: FuncSym,
    pub args: Vec<Term>,
}

impl Term {
    pub fn constant(sym: FuncSym) -> Self {
        Term { at: None, sym, args: vec![] }
    }

    pub fn at_constant(k: impl Into<Name>, sym: FuncSym) -> Self {
        Term { at: Some(k.into()), sym, args: vec![] }
    }

    pub fn apply(sym: FuncSym, args: Vec<Term>) -> Self {
        Term { at: None, sym, args }
    }

    /// True when every symbol is rigid or `@`-prefixed, i.e. the term
    /// belongs to the rigid term algebra.
    pub fn is_rigid(&self, sig: &HFOLSignature) -> bool {
        (self.at.is_some() || sig.is_rigid_func(&self.sym))
            && self.args.iter().all(|t| t.is_rigid(sig))
    }
}

/// Computes the unique sort of a hybrid term, rejecting unknown
/// symbols and arity or sort mismatches.
pub fn sort_of_term(sig: &HFOLSignature, t: &Term) -> Result<HybridSort> {
    if !sig.base.functions.contains(&t.sym) {
        return Err(Error::Sentence(format!("unknown function symbol {}", t.sym)));
    }
    if t.args.len() != t.sym.arity.len() {
        return Err(Error::Sentence(format!(
            "arity mismatch: {} applied to {} arguments",
            t.sym,
            t.args.len()
        )));
    }
    if let Some(k) = &t.at {
        if !sig.nominals.contains(k) {
            return Err(Error::Sentence(format!("unknown nominal {k} in @-prefix")));
        }
        if sig.is_rigid_func(&t.sym) {
            return Err(Error::Sentence(format!(
                "@-prefix on rigid symbol {} (rigid symbols are their own rigidification)",
                t.sym
            )));
        }
    }
    for (arg, want) in t.args.iter().zip(t.sym.arity.iter()) {
        let got = sort_of_term(sig, arg)?;
        let expected = match &t.at {
            Some(k) => at_sort(sig, k, want),
            None => HybridSort::Plain(want.clone()),
        };
        if got != expected {
            return Err(Error::Sentence(format!(
                "sort mismatch: argument of {} has sort {got}, expected {expected}",
                t.sym
            )));
        }
    }
    Ok(match &t.at {
        Some(k) => at_sort(sig, k, &t.sym.result),
        None => HybridSort::Plain(t.sym.result.clone()),
    })
}

/// Core sentences. `Or` is kept as a canonically sorted,
/// duplicate-free sequence so syntactic equality is decidable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sentence {
    Nominal(Name),
    Modal(Name),
    Eq(Term, Term),
    Rel { at: Option<Name>, sym: RelSym, args: Vec<Term> },
    At(Name, Box<Sentence>),
    Not(Box<Sentence>),
    Or(Vec<Sentence>),
    Store(Name, Box<Sentence>),
    Exists(Vec<Var>, Box<Sentence>),
    Diamond(Name, Box<Sentence>),
}

impl Sentence {
    pub fn or(mut items: Vec<Sentence>) -> Sentence {
        items.sort();
        items.dedup();
        Sentence::Or(items)
    }

    pub fn not(s: Sentence) -> Sentence {
        Sentence::Not(Box::new(s))
    }

    pub fn at(k: impl Into<Name>, s: Sentence) -> Sentence {
        Sentence::At(k.into(), Box::new(s))
    }

    pub fn falsity() -> Sentence {
        Sentence::Or(vec![])
    }

    pub fn truth() -> Sentence {
        Sentence::not(Sentence::falsity())
    }

    /// All names bound anywhere in the sentence.
    pub fn bound_names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_bound(&mut out);
        out
    }

    fn collect_bound(&self, out: &mut BTreeSet<Name>) {
        match self {
            Sentence::Nominal(_) | Sentence::Modal(_) | Sentence::Eq(..) | Sentence::Rel { .. } => {}
            Sentence::At(_, s) | Sentence::Not(s) | Sentence::Diamond(_, s) => s.collect_bound(out),
            Sentence::Or(items) => items.iter().for_each(|s| s.collect_bound(out)),
            Sentence::Store(z, s) => {
                out.insert(z.clone());
                s.collect_bound(out);
            }
            Sentence::Exists(vars, s) => {
                out.extend(vars.iter().map(|v| v.name.clone()));
                s.collect_bound(out);
            }
        }
    }
}

/// Sugared sentences: the core grammar plus the standard
/// abbreviations.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sugared {
    Nominal(Name),
    Modal(Name),
    Eq(Term, Term),
    Rel { at: Option<Name>, sym: RelSym, args: Vec<Term> },
    At(Name, Box<Sugared>),
    Not(Box<Sugared>),
    Or(Vec<Sugared>),
    Store(Name, Box<Sugared>),
    Exists(Vec<Var>, Box<Sugared>),
    Diamond(Name, Box<Sugared>),
    And(Vec<Sugared>),
    Implies(Box<Sugared>, Box<Sugared>),
    Iff(Box<Sugared>, Box<Sugared>),
    Forall(Vec<Var>, Box<Sugared>),
    BoxMod(Name, Box<Sugared>),
}

/// Expands the abbreviations into the core grammar.
pub fn desugar(s: &Sugared) -> Sentence {
    match s {
        Sugared::Nominal(k) => Sentence::Nominal(k.clone()),
        Sugared::Modal(m) => Sentence::Modal(m.clone()),
        Sugared::Eq(a, b) => Sentence::Eq(a.clone(), b.clone()),
        Sugared::Rel { at, sym, args } => {
            Sentence::Rel { at: at.clone(), sym: sym.clone(), args: args.clone() }
        }
        Sugared::At(k, p) => Sentence::at(k.clone(), desugar(p)),
        Sugared::Not(p) => Sentence::not(desugar(p)),
        Sugared::Or(items) => Sentence::or(items.iter().map(desugar).collect()),
        Sugared::Store(z, p) => Sentence::Store(z.clone(), Box::new(desugar(p))),
        Sugared::Exists(vars, p) => Sentence::Exists(vars.clone(), Box::new(desugar(p))),
        Sugared::Diamond(l, p) => Sentence::Diamond(l.clone(), Box::new(desugar(p))),
        Sugared::And(items) => and(items.iter().map(desugar).collect()),
        Sugared::Implies(a, b) => implies(desugar(a), desugar(b)),
        Sugared::Iff(a, b) => {
            let a = desugar(a);
            let b = desugar(b);
            and(vec![implies(a.clone(), b.clone()), implies(b, a)])
        }
        Sugared::Forall(vars, p) => forall(vars.clone(), desugar(p)),
        Sugared::BoxMod(l, p) => box_mod(l.clone(), desugar(p)),
    }
}

pub fn and(items: Vec<Sentence>) -> Sentence {
    Sentence::not(Sentence::or(items.into_iter().map(Sentence::not).collect()))
}

pub fn implies(a: Sentence, b: Sentence) -> Sentence {
    Sentence::or(vec![Sentence::not(a), b])
}

pub fn forall(vars: Vec<Var>, body: Sentence) -> Sentence {
    Sentence::not(Sentence::Exists(vars, Box::new(Sentence::not(body))))
}

pub fn box_mod(l: Name, body: Sentence) -> Sentence {
    Sentence::not(Sentence::Diamond(l, Box::new(Sentence::not(body))))
}

/// Checks the sentence against the grammar's side conditions. Empty
/// result means wellformed.
pub fn wellformed(sig: &HFOLSignature, s: &Sentence) -> Vec<String> {
    let mut out = Vec::new();
    wf(sig, s, &mut out);
    out
}

fn wf(sig: &HFOLSignature, s: &Sentence, out: &mut Vec<String>) {
    match s {
        Sentence::Nominal(k) => {
            if !sig.nominals.contains(k) {
                out.push(format!("unknown nominal {k}"));
            }
        }
        Sentence::Modal(m) => {
            if !sig.unary_modalities.contains(m) {
                out.push(format!("unknown unary modality {m}"));
            }
        }
        Sentence::Eq(a, b) => match (sort_of_term(sig, a), sort_of_term(sig, b)) {
            (Ok(sa), Ok(sb)) => {
                if sa != sb {
                    out.push(format!("equation between different sorts {sa} and {sb}"));
                }
            }
            (ra, rb) => {
                for r in [ra, rb] {
                    if let Err(e) = r {
                        out.push(e.to_string());
                    }
                }
            }
        },
        Sentence::Rel { at, sym, args } => {
            if !sig.base.relations.contains(sym) {
                out.push(format!("unknown relation symbol {sym}"));
                return;
            }
            if let Some(k) = at {
                if !sig.nominals.contains(k) {
                    out.push(format!("unknown nominal {k} in @-prefix"));
                }
                if sig.is_rigid_rel(sym) {
                    out.push(format!("@-prefix on rigid relation {sym}"));
                }
            }
            if args.len() != sym.arity.len() {
                out.push(format!("arity mismatch for relation {sym}"));
                return;
            }
            for (arg, want) in args.iter().zip(sym.arity.iter()) {
                match sort_of_term(sig, arg) {
                    Ok(got) => {
                        let expected = match at {
                            Some(k) => at_sort(sig, k, want),
                            None => HybridSort::Plain(want.clone()),
                        };
                        if got != expected {
                            out.push(format!(
                                "sort mismatch: argument of {sym} has sort {got}, expected {expected}"
                            ));
                        }
                    }
                    Err(e) => out.push(e.to_string()),
                }
            }
        }
        Sentence::At(k, p) => {
            if !sig.nominals.contains(k) {
                out.push(format!("unknown nominal {k} in @"));
            }
            wf(sig, p, out);
        }
        Sentence::Not(p) => wf(sig, p, out),
        Sentence::Or(items) => items.iter().for_each(|p| wf(sig, p, out)),
        Sentence::Store(z, p) => match extend(sig, &[Var::nominal(z.clone())]) {
            Ok(ext) => wf(&ext.extended, p, out),
            Err(e) => out.push(e.to_string()),
        },
        Sentence::Exists(vars, p) => match extend(sig, vars) {
            Ok(ext) => wf(&ext.extended, p, out),
            Err(e) => out.push(e.to_string()),
        },
        Sentence::Diamond(l, p) => {
            if !sig.binary_modalities.contains(l) {
                out.push(format!("unknown binary modality {l}"));
            }
            wf(sig, p, out);
        }
    }
}

/// Extends a morphism across a binder: the bound variables are added
/// to the source, fresh counterparts to the target, and the maps grow
/// accordingly. Returns the extended morphism and the renamed
/// variables.
pub fn extend_morphism(
    chi: &SignatureMorphism,
    vars: &[Var],
) -> Result<(SignatureMorphism, Vec<Var>)> {
    let src_ext = extend(&chi.source, vars)?;
    let mut taken = chi.target.all_names();
    let mut renamed = Vec::new();
    for v in vars {
        let name = fresh_name(&v.name, &taken);
        taken.insert(name.clone());
        let sort = match &v.sort {
            VarSort::Nominal => VarSort::Nominal,
            VarSort::Rigid(s) => VarSort::Rigid(chi.apply_sort(s)),
        };
        renamed.push(Var { name, sort });
    }
    let tgt_ext = extend(&chi.target, &renamed)?;
    let mut out = chi.clone();
    out.source = src_ext.extended;
    out.target = tgt_ext.extended;
    for (v, w) in vars.iter().zip(renamed.iter()) {
        match &v.sort {
            VarSort::Nominal => {
                out.nominal_map.insert(v.name.clone(), w.name.clone());
            }
            VarSort::Rigid(s) => {
                let src_sym = FuncSym::constant(v.name.clone(), s.clone());
                out.function_map.insert(src_sym, w.name.clone());
            }
        }
    }
    Ok((out, renamed))
}

/// Translates a term symbol-wise. An `@`-prefix is dropped when the
/// image symbol is rigid (rigid symbols equal their rigidification).
pub fn translate_term(chi: &SignatureMorphism, t: &Term) -> Term {
    let sym = chi.apply_func(&t.sym);
    let at = match &t.at {
        Some(k) if !chi.target.is_rigid_func(&sym) => Some(chi.apply_nominal(k)),
        _ => None,
    };
    Term { at, sym, args: t.args.iter().map(|a| translate_term(chi, a)).collect() }
}

/// Sentence translation along a signature morphism. Binders extend
/// the morphism canonically with fresh bound names in the target.
pub fn translate(chi: &SignatureMorphism, s: &Sentence) -> Result<Sentence> {
    Ok(match s {
        Sentence::Nominal(k) => Sentence::Nominal(chi.apply_nominal(k)),
        Sentence::Modal(m) => Sentence::Modal(chi.apply_modality(m)),
        Sentence::Eq(a, b) => Sentence::Eq(translate_term(chi, a), translate_term(chi, b)),
        Sentence::Rel { at, sym, args } => {
            let sym2 = chi.apply_rel(sym);
            let at2 = match at {
                Some(k) if !chi.target.is_rigid_rel(&sym2) => Some(chi.apply_nominal(k)),
                _ => None,
            };
            Sentence::Rel {
                at: at2,
                sym: sym2,
                args: args.iter().map(|a| translate_term(chi, a)).collect(),
            }
        }
        Sentence::At(k, p) => Sentence::at(chi.apply_nominal(k), translate(chi, p)?),
        Sentence::Not(p) => Sentence::not(translate(chi, p)?),
        Sentence::Or(items) => {
            Sentence::or(items.iter().map(|p| translate(chi, p)).collect::<Result<_>>()?)
        }
        Sentence::Store(z, p) => {
            let (ext, renamed) = extend_morphism(chi, &[Var::nominal(z.clone())])?;
            Sentence::Store(renamed[0].name.clone(), Box::new(translate(&ext, p)?))
        }
        Sentence::Exists(vars, p) => {
            let (ext, renamed) = extend_morphism(chi, vars)?;
            Sentence::Exists(renamed, Box::new(translate(&ext, p)?))
        }
        Sentence::Diamond(l, p) => Sentence::Diamond(chi.apply_modality(l), Box::new(translate(chi, p)?)),
    })
}

/// `+psi = forall z. @_z psi` and `-psi = exists z. @_z not psi`, with
/// a fresh world variable.
pub fn semantic_opposite(sig: &HFOLSignature, psi: &Sentence, positive: bool) -> Sentence {
    let mut taken = sig.all_names();
    taken.extend(psi.bound_names());
    let z = fresh_name("z!o", &taken);
    let var = Var::nominal(z.clone());
    if positive {
        forall(vec![var], Sentence::at(z, psi.clone()))
    } else {
        Sentence::Exists(vec![var], Box::new(Sentence::at(z, Sentence::not(psi.clone()))))
    }
}

/// Query sort for rigid item enumeration: the nominal sort or a hybrid
/// sort.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum SortQuery {
    NominalSort,
    Hybrid(HybridSort),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum RigidItem {
    Nominal(Name),
    Term(Term),
}

/// Enumerates all rigid hybrid terms grouped by sort, up to the depth
/// bound. Every flexible symbol occurs `@`-prefixed; rigid symbols
/// occur plain. Keys are the sorts of `@Sigma`: rigid sorts and
/// `@_k`-copies of flexible sorts.
pub fn rigid_terms_by_sort(
    sig: &HFOLSignature,
    depth: usize,
) -> BTreeMap<HybridSort, Vec<Term>> {
    let mut by_sort: BTreeMap<HybridSort, BTreeSet<Term>> = BTreeMap::new();
    for s in &sig.rigid.sorts {
        by_sort.entry(HybridSort::Plain(s.clone())).or_default();
    }
    for k in &sig.nominals {
        for s in sig.flexible_sorts() {
            by_sort.entry(HybridSort::At(k.clone(), s)).or_default();
        }
    }
    // forms: (at-prefix, symbol) with argument sorts and result sort
    let mut forms: Vec<(Option<Name>, FuncSym, Vec<HybridSort>, HybridSort)> = Vec::new();
    for f in &sig.base.functions {
        if sig.is_rigid_func(f) {
            forms.push((
                None,
                f.clone(),
                f.arity.iter().map(|s| HybridSort::Plain(s.clone())).collect(),
                HybridSort::Plain(f.result.clone()),
            ));
        } else {
            for k in &sig.nominals {
                forms.push((
                    Some(k.clone()),
                    f.clone(),
                    f.arity.iter().map(|s| at_sort(sig, k, s)).collect(),
                    at_sort(sig, k, &f.result),
                ));
            }
        }
    }
    for _level in 0..depth {
        let snapshot = by_sort.clone();
        for (at, sym, arg_sorts, result) in &forms {
            let pools: Vec<&BTreeSet<Term>> = match arg_sorts
                .iter()
                .map(|s| snapshot.get(s))
                .collect::<Option<Vec<_>>>()
            {
                Some(p) => p,
                None => continue,
            };
            for args in cartesian(&pools) {
                by_sort
                    .entry(result.clone())
                    .or_default()
                    .insert(Term { at: at.clone(), sym: sym.clone(), args });
            }
        }
        if by_sort == snapshot {
            break;
        }
    }
    by_sort.into_iter().map(|(k, v)| (k, v.into_iter().collect())).collect()
}

fn cartesian(pools: &[&BTreeSet<Term>]) -> Vec<Vec<Term>> {
    let mut out: Vec<Vec<Term>> = vec![vec![]];
    for pool in pools {
        let mut next = Vec::new();
        for prefix in &out {
            for item in pool.iter() {
                let mut row = prefix.clone();
                row.push(item.clone());
                next.push(row);
            }
        }
        out = next;
    }
    out
}

/// All rigid items of the queried sort up to the depth bound, without
/// duplicates.
pub fn enumerate_rigid_items(
    sig: &HFOLSignature,
    query: &SortQuery,
    depth: usize,
) -> Vec<RigidItem> {
    match query {
        SortQuery::NominalSort => {
            sig.nominals.iter().cloned().map(RigidItem::Nominal).collect()
        }
        SortQuery::Hybrid(sort) => rigid_terms_by_sort(sig, depth)
            .remove(sort)
            .unwrap_or_default()
            .into_iter()
            .filter(|t| term_depth(t) <= depth)
            .map(RigidItem::Term)
            .collect(),
    }
}

pub fn term_depth(t: &Term) -> usize {
    1 + t.args.iter().map(term_depth).max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sig::{compose, validate_morphism};
    use crate::squares::fixtures;

    #[test]
    fn sort_of_constants_in_fixtures() {
        let span = fixtures::counter1();
        let delta = &span.chi1.source;
        let c3 = Term::constant(FuncSym::constant("c3", "s3"));
        assert_eq!(sort_of_term(delta, &c3).unwrap(), HybridSort::Plain("s3".into()));

        let span2 = fixtures::counter2();
        let d = &span2.chi1.source;
        let at_c = Term::at_constant("k", FuncSym::constant("c", "s"));
        assert_eq!(sort_of_term(d, &at_c).unwrap(), HybridSort::At("k".into(), "s".into()));

        let span3 = fixtures::counter3();
        let d3 = &span3.chi1.source;
        let zero = Term::constant(FuncSym::constant("0", "Nat"));
        let succ = FuncSym::new("succ", vec!["Nat".into()], "Nat");
        let one = Term::apply(succ, vec![zero]);
        assert_eq!(sort_of_term(d3, &one).unwrap(), HybridSort::Plain("Nat".into()));
    }

    #[test]
    fn empty_disjunction_is_wellformed() {
        let span = fixtures::counter1();
        assert!(wellformed(&span.chi1.source, &Sentence::falsity()).is_empty());
    }

    #[test]
    fn phi1_of_counter1_is_wellformed() {
        let span = fixtures::counter1();
        let d1 = &span.chi1.target;
        let phi = Sentence::at(
            "k3",
            Sentence::Eq(
                Term::constant(FuncSym::constant("c", "s")),
                Term::constant(FuncSym::constant("c3", "s")),
            ),
        );
        assert!(wellformed(d1, &phi).is_empty());
    }

    #[test]
    fn quantifying_flexible_sort_is_rejected() {
        let span = fixtures::counter2();
        let delta = &span.chi1.source; // s is flexible here
        let phi = Sentence::Exists(
            vec![Var::rigid("y", "s")],
            Box::new(Sentence::truth()),
        );
        assert!(!wellformed(delta, &phi).is_empty());
    }

    #[test]
    fn desugar_forall_and_box() {
        let v = Var::rigid("y", "s");
        let body = Sugared::Eq(
            Term::constant(FuncSym::constant("c", "s")),
            Term::constant(FuncSym::constant("y", "s")),
        );
        let got = desugar(&Sugared::Forall(vec![v.clone()], Box::new(body.clone())));
        let want = Sentence::not(Sentence::Exists(
            vec![v],
            Box::new(Sentence::not(desugar(&body))),
        ));
        assert_eq!(got, want);

        let got = desugar(&Sugared::BoxMod("l".into(), Box::new(Sugared::Nominal("k".into()))));
        let want = Sentence::not(Sentence::Diamond(
            "l".into(),
            Box::new(Sentence::not(Sentence::Nominal("k".into()))),
        ));
        assert_eq!(got, want);
    }

    #[test]
    fn implies_is_disjunction() {
        let a = Sentence::Modal("p1".into());
        let b = Sentence::Nominal("k".into());
        assert_eq!(
            implies(a.clone(), b.clone()),
            Sentence::or(vec![Sentence::not(a), b])
        );
    }

    #[test]
    fn counter1_translation_of_phi() {
        let span = fixtures::counter1();
        let phi = Sentence::at(
            "k1",
            Sentence::Eq(
                Term::constant(FuncSym::constant("c1", "s1")),
                Term::constant(FuncSym::constant("c3", "s3")),
            ),
        );
        let got = translate(&span.chi1, &phi).unwrap();
        let want = Sentence::at(
            "k",
            Sentence::Eq(
                Term::constant(FuncSym::constant("c", "s")),
                Term::constant(FuncSym::constant("c3", "s")),
            ),
        );
        assert_eq!(got, want);
    }

    #[test]
    fn translate_along_identity_is_identity() {
        let span = fixtures::counter2();
        let d1 = &span.chi1.target;
        let id = SignatureMorphism::identity(d1);
        let phi = desugar(&Sugared::Forall(
            vec![Var::rigid("y", "s")],
            Box::new(Sugared::Eq(
                Term::constant(FuncSym::constant("c", "s")),
                Term::constant(FuncSym::constant("y", "s")),
            )),
        ));
        assert_eq!(translate(&id, &phi).unwrap(), phi);
    }

    #[test]
    fn translation_functoriality_on_fixture() {
        let span = fixtures::counter1();
        let po = crate::sig::pushout(&span.chi1, &span.chi2).unwrap();
        let chain = compose(&span.chi1, &po.left_leg).unwrap();
        assert!(validate_morphism(&chain).is_empty());
        let phi = Sentence::Exists(
            vec![Var::nominal("z!v")],
            Box::new(Sentence::at("z!v", Sentence::Nominal("k1".into()))),
        );
        let one_step = translate(&chain, &phi).unwrap();
        let two_step =
            translate(&po.left_leg, &translate(&span.chi1, &phi).unwrap()).unwrap();
        assert_eq!(one_step, two_step);
    }

    #[test]
    fn semantic_opposite_shape() {
        let span = fixtures::counter1();
        let delta = &span.chi1.source;
        let k = Sentence::Nominal("k1".into());
        let plus = semantic_opposite(delta, &k, true);
        match &plus {
            Sentence::Not(inner) => match inner.as_ref() {
                Sentence::Exists(vars, body) => {
                    assert_eq!(vars.len(), 1);
                    assert_eq!(vars[0].sort, VarSort::Nominal);
                    match body.as_ref() {
                        Sentence::Not(at) => {
                            assert!(matches!(at.as_ref(), Sentence::At(z, _) if *z == vars[0].name))
                        }
                        _ => panic!("unexpected +psi body"),
                    }
                }
                _ => panic!("unexpected +psi shape"),
            },
            _ => panic!("unexpected +psi shape"),
        }
        let minus = semantic_opposite(delta, &k, false);
        assert!(matches!(minus, Sentence::Exists(_, _)));
    }

    #[test]
    fn rigid_term_enumeration_counter3() {
        let span = fixtures::counter3();
        let delta = &span.chi1.source; // Nat flexible, symbols 0 and succ
        let items = enumerate_rigid_items(
            delta,
            &SortQuery::Hybrid(HybridSort::At("k".into(), "Nat".into())),
            3,
        );
        // @_k 0, @_k succ(@_k 0), @_k succ(@_k succ(@_k 0))
        assert_eq!(items.len(), 3);
    }

    #[test]
    fn nominal_sort_enumeration() {
        let span = fixtures::counter2();
        let items = enumerate_rigid_items(&span.chi1.source, &SortQuery::NominalSort, 1);
        assert_eq!(items, vec![RigidItem::Nominal("k".into())]);
    }

    #[test]
    fn flexible_sort_without_constants_is_empty() {
        let mut sig = HFOLSignature::default();
        sig.nominals.insert("k".into());
        sig.base.sorts.insert("s".into());
        let items = enumerate_rigid_items(
            &sig,
            &SortQuery::Hybrid(HybridSort::At("k".into(), "s".into())),
            4,
        );
        assert!(items.is_empty());
    }
}
