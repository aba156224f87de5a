//! Signature algebra: well-formedness, morphisms, rigidification,
//! extensions by variables-as-constants, coproducts and pushouts.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type Name = String;
pub type Diagnostics = Vec<String>;

/// A function symbol with its full profile. Symbols with the same name
/// but different profiles are distinct.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FuncSym {
    pub name: Name,
    pub arity: Vec<Name>,
    pub result: Name,
}

impl FuncSym {
    pub fn constant(name: impl Into<Name>, sort: impl Into<Name>) -> Self {
        FuncSym { name: name.into(), arity: vec![], result: sort.into() }
    }

    pub fn new(name: impl Into<Name>, arity: Vec<Name>, result: impl Into<Name>) -> Self {
        FuncSym { name: name.into(), arity, result: result.into() }
    }
}

impl std::fmt::Display for FuncSym {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} : {} -> {}", self.name, self.arity.join(" "), self.result)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RelSym {
    pub name: Name,
    pub arity: Vec<Name>,
}

impl RelSym {
    pub fn new(name: impl Into<Name>, arity: Vec<Name>) -> Self {
        RelSym { name: name.into(), arity }
    }
}

impl std::fmt::Display for RelSym {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} : {}", self.name, self.arity.join(" "))
    }
}

/// A plain many-sorted first-order signature.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FOSignature {
    pub sorts: BTreeSet<Name>,
    pub functions: BTreeSet<FuncSym>,
    pub relations: BTreeSet<RelSym>,
}

impl FOSignature {
    pub fn is_included_in(&self, other: &FOSignature) -> bool {
        self.sorts.is_subset(&other.sorts)
            && self.functions.is_subset(&other.functions)
            && self.relations.is_subset(&other.relations)
    }
}

/// A hybrid signature: nominal part, base first-order part and the
/// rigid sub-signature of the base.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HFOLSignature {
    pub nominals: BTreeSet<Name>,
    pub unary_modalities: BTreeSet<Name>,
    pub binary_modalities: BTreeSet<Name>,
    pub base: FOSignature,
    pub rigid: FOSignature,
}

impl HFOLSignature {
    pub fn is_rigid_sort(&self, s: &str) -> bool {
        self.rigid.sorts.contains(s)
    }

    pub fn is_flexible_sort(&self, s: &str) -> bool {
        self.base.sorts.contains(s) && !self.rigid.sorts.contains(s)
    }

    pub fn flexible_sorts(&self) -> BTreeSet<Name> {
        self.base.sorts.difference(&self.rigid.sorts).cloned().collect()
    }

    pub fn is_rigid_func(&self, f: &FuncSym) -> bool {
        self.rigid.functions.contains(f)
    }

    pub fn flexible_functions(&self) -> BTreeSet<FuncSym> {
        self.base.functions.difference(&self.rigid.functions).cloned().collect()
    }

    pub fn is_rigid_rel(&self, r: &RelSym) -> bool {
        self.rigid.relations.contains(r)
    }

    pub fn flexible_relations(&self) -> BTreeSet<RelSym> {
        self.base.relations.difference(&self.rigid.relations).cloned().collect()
    }

    pub fn has_modality(&self, m: &str) -> bool {
        self.unary_modalities.contains(m) || self.binary_modalities.contains(m)
    }

    /// Names already in use, across all kinds. Used for freshness checks.
    pub fn all_names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        out.extend(self.nominals.iter().cloned());
        out.extend(self.unary_modalities.iter().cloned());
        out.extend(self.binary_modalities.iter().cloned());
        out.extend(self.base.sorts.iter().cloned());
        out.extend(self.base.functions.iter().map(|f| f.name.clone()));
        out.extend(self.base.relations.iter().map(|r| r.name.clone()));
        out
    }
}

/// Picks `base` if unused, otherwise `base!2`, `base!3`, ... The `!`
/// never occurs in user identifiers, so generated names cannot capture.
pub fn fresh_name(base: &str, taken: &BTreeSet<Name>) -> Name {
    let stem = base.split('!').next().unwrap_or(base).to_string();
    if !taken.contains(&stem) {
        return stem;
    }
    let mut i = 2usize;
    loop {
        let cand = format!("{stem}!{i}");
        if !taken.contains(&cand) {
            return cand;
        }
        i += 1;
    }
}

/// Checks the well-formedness clauses of a hybrid signature. An empty
/// list means the signature is valid.
pub fn validate_signature(sig: &HFOLSignature) -> Diagnostics {
    let mut out = Vec::new();
    let check_fo = |fo: &FOSignature, which: &str, out: &mut Vec<String>| {
        for f in &fo.functions {
            for s in f.arity.iter().chain(std::iter::once(&f.result)) {
                if !fo.sorts.contains(s) {
                    out.push(format!(
                        "unknown sort in profile: {which} function {f} uses sort {s} not in {which} sorts"
                    ));
                }
            }
        }
        for r in &fo.relations {
            for s in &r.arity {
                if !fo.sorts.contains(s) {
                    out.push(format!(
                        "unknown sort in profile: {which} relation {r} uses sort {s} not in {which} sorts"
                    ));
                }
            }
        }
    };
    check_fo(&sig.base, "base", &mut out);
    check_fo(&sig.rigid, "rigid", &mut out);
    if !sig.rigid.sorts.is_subset(&sig.base.sorts) {
        for s in sig.rigid.sorts.difference(&sig.base.sorts) {
            out.push(format!("rigid not included in base: sort {s}"));
        }
    }
    for f in sig.rigid.functions.difference(&sig.base.functions) {
        out.push(format!("rigid not included in base: function {f}"));
    }
    for r in sig.rigid.relations.difference(&sig.base.relations) {
        out.push(format!("rigid not included in base: relation {r}"));
    }
    for m in sig.unary_modalities.intersection(&sig.binary_modalities) {
        out.push(format!("modality {m} declared with both arity 1 and 2"));
    }
    out
}

/// A signature morphism: kind-respecting maps preserving profiles and
/// rigidity. Function and relation maps are keyed by the full source
/// symbol; the target profile is determined by the sort map.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignatureMorphism {
    pub source: HFOLSignature,
    pub target: HFOLSignature,
    pub nominal_map: BTreeMap<Name, Name>,
    pub modality_map: BTreeMap<Name, Name>,
    pub sort_map: BTreeMap<Name, Name>,
    pub function_map: BTreeMap<FuncSym, Name>,
    pub relation_map: BTreeMap<RelSym, Name>,
}

impl SignatureMorphism {
    pub fn identity(sig: &HFOLSignature) -> Self {
        SignatureMorphism {
            source: sig.clone(),
            target: sig.clone(),
            nominal_map: sig.nominals.iter().map(|k| (k.clone(), k.clone())).collect(),
            modality_map: sig
                .unary_modalities
                .iter()
                .chain(sig.binary_modalities.iter())
                .map(|m| (m.clone(), m.clone()))
                .collect(),
            sort_map: sig.base.sorts.iter().map(|s| (s.clone(), s.clone())).collect(),
            function_map: sig.base.functions.iter().map(|f| (f.clone(), f.name.clone())).collect(),
            relation_map: sig.base.relations.iter().map(|r| (r.clone(), r.name.clone())).collect(),
        }
    }

    pub fn apply_sort(&self, s: &str) -> Name {
        self.sort_map.get(s).cloned().unwrap_or_else(|| s.to_string())
    }

    pub fn apply_nominal(&self, k: &str) -> Name {
        self.nominal_map.get(k).cloned().unwrap_or_else(|| k.to_string())
    }

    pub fn apply_modality(&self, m: &str) -> Name {
        self.modality_map.get(m).cloned().unwrap_or_else(|| m.to_string())
    }

    /// Image of a function symbol, with the profile translated.
    pub fn apply_func(&self, f: &FuncSym) -> FuncSym {
        FuncSym {
            name: self.function_map.get(f).cloned().unwrap_or_else(|| f.name.clone()),
            arity: f.arity.iter().map(|s| self.apply_sort(s)).collect(),
            result: self.apply_sort(&f.result),
        }
    }

    pub fn apply_rel(&self, r: &RelSym) -> RelSym {
        RelSym {
            name: self.relation_map.get(r).cloned().unwrap_or_else(|| r.name.clone()),
            arity: r.arity.iter().map(|s| self.apply_sort(s)).collect(),
        }
    }

    pub fn is_injective_on_sorts(&self) -> bool {
        let images: BTreeSet<_> = self.sort_map.values().collect();
        images.len() == self.sort_map.len()
    }

    pub fn is_injective_on_nominals(&self) -> bool {
        let images: BTreeSet<_> = self.nominal_map.values().collect();
        images.len() == self.nominal_map.len()
    }
}

/// Checks totality, profile compatibility and rigidity preservation.
pub fn validate_morphism(chi: &SignatureMorphism) -> Diagnostics {
    let mut out = Vec::new();
    let src = &chi.source;
    let tgt = &chi.target;
    for k in &src.nominals {
        match chi.nominal_map.get(k) {
            None => out.push(format!("morphism not total: nominal {k} unmapped")),
            Some(j) if !tgt.nominals.contains(j) => {
                out.push(format!("nominal {k} maps to {j}, not a target nominal"))
            }
            _ => {}
        }
    }
    for m in &src.unary_modalities {
        match chi.modality_map.get(m) {
            None => out.push(format!("morphism not total: modality {m} unmapped")),
            Some(j) if !tgt.unary_modalities.contains(j) => out.push(format!(
                "modality arity not preserved: unary {m} maps to {j}, not a unary target modality"
            )),
            _ => {}
        }
    }
    for m in &src.binary_modalities {
        match chi.modality_map.get(m) {
            None => out.push(format!("morphism not total: modality {m} unmapped")),
            Some(j) if !tgt.binary_modalities.contains(j) => out.push(format!(
                "modality arity not preserved: binary {m} maps to {j}, not a binary target modality"
            )),
            _ => {}
        }
    }
    for s in &src.base.sorts {
        match chi.sort_map.get(s) {
            None => out.push(format!("morphism not total: sort {s} unmapped")),
            Some(u) if !tgt.base.sorts.contains(u) => {
                out.push(format!("sort {s} maps to {u}, not a target sort"))
            }
            _ => {}
        }
    }
    for f in &src.base.functions {
        if !chi.function_map.contains_key(f) {
            out.push(format!("morphism not total: function {f} unmapped"));
            continue;
        }
        let img = chi.apply_func(f);
        if !tgt.base.functions.contains(&img) {
            out.push(format!("profile incompatibility: function {f} maps to {img}, absent from target"));
        }
    }
    for r in &src.base.relations {
        if !chi.relation_map.contains_key(r) {
            out.push(format!("morphism not total: relation {r} unmapped"));
            continue;
        }
        let img = chi.apply_rel(r);
        if !tgt.base.relations.contains(&img) {
            out.push(format!("profile incompatibility: relation {r} maps to {img}, absent from target"));
        }
    }
    // rigidity: chi(rigid) must land in the target's rigid part
    for s in &src.rigid.sorts {
        if let Some(u) = chi.sort_map.get(s) {
            if !tgt.rigid.sorts.contains(u) {
                out.push(format!("rigidity not preserved: rigid sort {s} maps to flexible {u}"));
            }
        }
    }
    for f in &src.rigid.functions {
        if chi.function_map.contains_key(f) {
            let img = chi.apply_func(f);
            if !tgt.rigid.functions.contains(&img) {
                out.push(format!("rigidity not preserved: rigid function {f} maps to flexible {img}"));
            }
        }
    }
    for r in &src.rigid.relations {
        if chi.relation_map.contains_key(r) {
            let img = chi.apply_rel(r);
            if !tgt.rigid.relations.contains(&img) {
                out.push(format!("rigidity not preserved: rigid relation {r} maps to flexible {img}"));
            }
        }
    }
    out
}

/// Component-wise composition `chi1 ; chi2`.
pub fn compose(chi1: &SignatureMorphism, chi2: &SignatureMorphism) -> Result<SignatureMorphism> {
    if chi1.target != chi2.source {
        return Err(Error::Morphism(
            "cannot compose: target of first morphism differs from source of second".into(),
        ));
    }
    Ok(SignatureMorphism {
        source: chi1.source.clone(),
        target: chi2.target.clone(),
        nominal_map: chi1
            .nominal_map
            .iter()
            .map(|(k, j)| (k.clone(), chi2.apply_nominal(j)))
            .collect(),
        modality_map: chi1
            .modality_map
            .iter()
            .map(|(m, j)| (m.clone(), chi2.apply_modality(j)))
            .collect(),
        sort_map: chi1.sort_map.iter().map(|(s, u)| (s.clone(), chi2.apply_sort(u))).collect(),
        function_map: chi1
            .function_map
            .iter()
            .map(|(f, _)| (f.clone(), chi2.apply_func(&chi1.apply_func(f)).name))
            .collect(),
        relation_map: chi1
            .relation_map
            .iter()
            .map(|(r, _)| (r.clone(), chi2.apply_rel(&chi1.apply_rel(r)).name))
            .collect(),
    })
}

/// Encodes the rigidified copy `@_k x` of a flexible symbol name.
pub fn at_name(nominal: &str, base: &str) -> Name {
    format!("{base}@{nominal}")
}

/// Rigidification of the base signature with respect to the nominals:
/// returns `(@Sigma, Sigma-bar)`. Rigid symbols are identified with
/// their copies, so they appear un-prefixed in both results.
pub fn rigidify(sig: &HFOLSignature) -> (FOSignature, FOSignature) {
    let mut at_sig = sig.rigid.clone();
    let at_sort = |k: &str, s: &Name| -> Name {
        if sig.is_rigid_sort(s) {
            s.clone()
        } else {
            at_name(k, s)
        }
    };
    for k in &sig.nominals {
        for s in sig.flexible_sorts() {
            at_sig.sorts.insert(at_name(k, &s));
        }
        for f in sig.flexible_functions() {
            at_sig.functions.insert(FuncSym {
                name: at_name(k, &f.name),
                arity: f.arity.iter().map(|s| at_sort(k, s)).collect(),
                result: at_sort(k, &f.result),
            });
        }
        for r in sig.flexible_relations() {
            at_sig.relations.insert(RelSym {
                name: at_name(k, &r.name),
                arity: r.arity.iter().map(|s| at_sort(k, s)).collect(),
            });
        }
    }
    let mut bar = sig.base.clone();
    for s in &at_sig.sorts {
        bar.sorts.insert(s.clone());
    }
    for f in &at_sig.functions {
        if !sig.rigid.functions.contains(f) {
            bar.functions.insert(f.clone());
        }
    }
    for r in &at_sig.relations {
        if !sig.rigid.relations.contains(r) {
            bar.relations.insert(r.clone());
        }
    }
    (at_sig, bar)
}

/// Sort of a quantifiable variable: the nominal sort `n` or a rigid sort.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VarSort {
    Nominal,
    Rigid(Name),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Var {
    pub name: Name,
    pub sort: VarSort,
}

impl Var {
    pub fn nominal(name: impl Into<Name>) -> Self {
        Var { name: name.into(), sort: VarSort::Nominal }
    }

    pub fn rigid(name: impl Into<Name>, sort: impl Into<Name>) -> Self {
        Var { name: name.into(), sort: VarSort::Rigid(sort.into()) }
    }
}

/// A signature extended by variables regarded as new constants:
/// nominal variables join the nominals, rigid variables join the rigid
/// constants.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignatureExtension {
    pub base: HFOLSignature,
    pub added: Vec<Var>,
    pub extended: HFOLSignature,
}

impl SignatureExtension {
    pub fn inclusion(&self) -> SignatureMorphism {
        let mut inc = SignatureMorphism::identity(&self.base);
        inc.target = self.extended.clone();
        inc
    }

    pub fn nominal_vars(&self) -> impl Iterator<Item = &Var> {
        self.added.iter().filter(|v| v.sort == VarSort::Nominal)
    }

    pub fn rigid_vars(&self) -> impl Iterator<Item = &Var> {
        self.added.iter().filter(|v| matches!(v.sort, VarSort::Rigid(_)))
    }
}

/// Adds the variables in `vars` as new constants, producing `Delta(X)`.
pub fn extend(sig: &HFOLSignature, vars: &[Var]) -> Result<SignatureExtension> {
    let mut extended = sig.clone();
    let mut taken = sig.all_names();
    for v in vars {
        if taken.contains(&v.name) {
            return Err(Error::Signature(format!(
                "variable name {} clashes with an existing symbol",
                v.name
            )));
        }
        taken.insert(v.name.clone());
        match &v.sort {
            VarSort::Nominal => {
                extended.nominals.insert(v.name.clone());
            }
            VarSort::Rigid(s) => {
                if !sig.is_rigid_sort(s) {
                    return Err(Error::Signature(format!(
                        "variable {} has sort {s}, which is not rigid (quantifiable sorts are the rigid sorts and the nominal sort)",
                        v.name
                    )));
                }
                let c = FuncSym::constant(v.name.clone(), s.clone());
                extended.base.functions.insert(c.clone());
                extended.rigid.functions.insert(c);
            }
        }
    }
    Ok(SignatureExtension { base: sig.clone(), added: vars.to_vec(), extended })
}

/// Disjoint union of two signatures, tag-renaming where names clash.
/// Returns the coproduct with its two injections.
pub fn coproduct(
    left: &HFOLSignature,
    right: &HFOLSignature,
) -> (HFOLSignature, SignatureMorphism, SignatureMorphism) {
    // A name is renamed on both sides whenever the other side uses it in
    // the same kind, so injections stay injective and never capture.
    let mut taken: BTreeSet<Name> = BTreeSet::new();
    let rename = |name: &Name,
                  mine: &BTreeSet<Name>,
                  theirs: &BTreeSet<Name>,
                  tag: &str,
                  taken: &mut BTreeSet<Name>|
     -> Name {
        let _ = mine;
        let new = if theirs.contains(name) {
            fresh_name(&format!("{name}@{tag}"), taken)
        } else {
            fresh_name(name, taken)
        };
        taken.insert(new.clone());
        new
    };

    let func_names = |s: &HFOLSignature| -> BTreeSet<Name> {
        s.base.functions.iter().map(|f| f.name.clone()).collect()
    };
    let rel_names = |s: &HFOLSignature| -> BTreeSet<Name> {
        s.base.relations.iter().map(|r| r.name.clone()).collect()
    };
    let mod_names = |s: &HFOLSignature| -> BTreeSet<Name> {
        s.unary_modalities.union(&s.binary_modalities).cloned().collect()
    };

    let build_side = |sig: &HFOLSignature,
                          other: &HFOLSignature,
                          tag: &str,
                          taken: &mut BTreeSet<Name>|
     -> SignatureMorphism {
        let mut m = SignatureMorphism::identity(sig);
        for k in &sig.nominals {
            let n = rename(k, &sig.nominals, &other.nominals, tag, taken);
            m.nominal_map.insert(k.clone(), n);
        }
        let other_mods = mod_names(other);
        for md in sig.unary_modalities.iter().chain(sig.binary_modalities.iter()) {
            let n = rename(md, &mod_names(sig), &other_mods, tag, taken);
            m.modality_map.insert(md.clone(), n);
        }
        for s in &sig.base.sorts {
            let n = rename(s, &sig.base.sorts, &other.base.sorts, tag, taken);
            m.sort_map.insert(s.clone(), n);
        }
        let other_funcs = rel_free(&func_names(other));
        for f in &sig.base.functions {
            // all symbols sharing a name get the same renaming
            if let Some(done) = m
                .function_map
                .iter()
                .find(|(g, _)| g.name == f.name)
                .map(|(_, n)| n.clone())
            {
                m.function_map.insert(f.clone(), done);
            } else {
                let n = rename(&f.name, &func_names(sig), &other_funcs, tag, taken);
                m.function_map.insert(f.clone(), n);
            }
        }
        let other_rels = rel_free(&rel_names(other));
        for r in &sig.base.relations {
            if let Some(done) = m
                .relation_map
                .iter()
                .find(|(q, _)| q.name == r.name)
                .map(|(_, n)| n.clone())
            {
                m.relation_map.insert(r.clone(), done);
            } else {
                let n = rename(&r.name, &rel_names(sig), &other_rels, tag, taken);
                m.relation_map.insert(r.clone(), n);
            }
        }
        m
    };

    let mut inj1 = build_side(left, right, "1", &mut taken);
    let mut inj2 = build_side(right, left, "2", &mut taken);

    let mut sum = HFOLSignature::default();
    for (sig, inj) in [(left, &inj1), (right, &inj2)] {
        for k in &sig.nominals {
            sum.nominals.insert(inj.apply_nominal(k));
        }
        for m in &sig.unary_modalities {
            sum.unary_modalities.insert(inj.apply_modality(m));
        }
        for m in &sig.binary_modalities {
            sum.binary_modalities.insert(inj.apply_modality(m));
        }
        for s in &sig.base.sorts {
            sum.base.sorts.insert(inj.apply_sort(s));
        }
        for s in &sig.rigid.sorts {
            sum.rigid.sorts.insert(inj.apply_sort(s));
        }
        for f in &sig.base.functions {
            sum.base.functions.insert(inj.apply_func(f));
        }
        for f in &sig.rigid.functions {
            sum.rigid.functions.insert(inj.apply_func(f));
        }
        for r in &sig.base.relations {
            sum.base.relations.insert(inj.apply_rel(r));
        }
        for r in &sig.rigid.relations {
            sum.rigid.relations.insert(inj.apply_rel(r));
        }
    }
    inj1.target = sum.clone();
    inj2.target = sum.clone();
    (sum, inj1, inj2)
}

fn rel_free(names: &BTreeSet<Name>) -> BTreeSet<Name> {
    names.clone()
}

// ---------------------------------------------------------------------------
// pushouts

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Side {
    Left,
    Right,
}

/// Union-find over symbol keys.
struct Classes<K: Ord + Clone> {
    parent: BTreeMap<K, K>,
}

impl<K: Ord + Clone> Classes<K> {
    fn new() -> Self {
        Classes { parent: BTreeMap::new() }
    }

    fn add(&mut self, k: K) {
        self.parent.entry(k.clone()).or_insert(k);
    }

    fn find(&mut self, k: &K) -> K {
        let p = self.parent.get(k).cloned().unwrap_or_else(|| k.clone());
        if &p == k {
            return p;
        }
        let root = self.find(&p);
        self.parent.insert(k.clone(), root.clone());
        root
    }

    fn union(&mut self, a: &K, b: &K) {
        self.add(a.clone());
        self.add(b.clone());
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent.insert(hi, lo);
        }
    }

    fn groups(&mut self) -> Vec<Vec<K>> {
        let keys: Vec<K> = self.parent.keys().cloned().collect();
        let mut by_root: BTreeMap<K, Vec<K>> = BTreeMap::new();
        for k in keys {
            let r = self.find(&k);
            by_root.entry(r).or_default().push(k);
        }
        by_root.into_values().collect()
    }
}

/// The computed pushout of a span: the vertex signature and the two
/// cocone legs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pushout {
    pub vertex: HFOLSignature,
    pub left_leg: SignatureMorphism,
    pub right_leg: SignatureMorphism,
}

/// Pushout of `chi1 : Delta -> Delta1`, `chi2 : Delta -> Delta2`:
/// the quotient of the coproduct by the congruence generated by
/// `chi1(x) ~ chi2(x)`, per kind. A quotient sort is rigid iff its
/// class contains a rigid sort; likewise for function and relation
/// classes. Class representatives are named by the least member name,
/// disambiguated deterministically.
pub fn pushout(chi1: &SignatureMorphism, chi2: &SignatureMorphism) -> Result<Pushout> {
    if chi1.source != chi2.source {
        return Err(Error::Morphism("pushout span legs have different sources".into()));
    }
    let d1 = &chi1.target;
    let d2 = &chi2.target;

    // sorts
    let mut sort_cls: Classes<(Side, Name)> = Classes::new();
    for s in &d1.base.sorts {
        sort_cls.add((Side::Left, s.clone()));
    }
    for s in &d2.base.sorts {
        sort_cls.add((Side::Right, s.clone()));
    }
    for s in &chi1.source.base.sorts {
        sort_cls.union(&(Side::Left, chi1.apply_sort(s)), &(Side::Right, chi2.apply_sort(s)));
    }
    let sort_groups = sort_cls.groups();
    let mut sort_rep: BTreeMap<(Side, Name), Name> = BTreeMap::new();
    let mut taken: BTreeSet<Name> = BTreeSet::new();
    let mut quotient_sorts: BTreeSet<Name> = BTreeSet::new();
    let mut quotient_rigid_sorts: BTreeSet<Name> = BTreeSet::new();
    let mut ordered_groups = sort_groups;
    ordered_groups.sort_by_key(|g| g.iter().map(|(_, n)| n.clone()).min());
    for g in &ordered_groups {
        let base = g.iter().map(|(_, n)| n.clone()).min().unwrap();
        let rep = fresh_pushout_name(&base, &mut taken);
        let rigid = g.iter().any(|(side, n)| match side {
            Side::Left => d1.is_rigid_sort(n),
            Side::Right => d2.is_rigid_sort(n),
        });
        quotient_sorts.insert(rep.clone());
        if rigid {
            quotient_rigid_sorts.insert(rep.clone());
        }
        for k in g {
            sort_rep.insert(k.clone(), rep.clone());
        }
    }
    let map_sort = |side: Side, s: &Name| -> Name { sort_rep[&(side, s.clone())].clone() };

    // nominals
    let mut nom_cls: Classes<(Side, Name)> = Classes::new();
    for k in &d1.nominals {
        nom_cls.add((Side::Left, k.clone()));
    }
    for k in &d2.nominals {
        nom_cls.add((Side::Right, k.clone()));
    }
    for k in &chi1.source.nominals {
        nom_cls.union(&(Side::Left, chi1.apply_nominal(k)), &(Side::Right, chi2.apply_nominal(k)));
    }
    let (nom_rep, quotient_noms) = name_classes(nom_cls.groups());

    // modalities (unary and binary live in separate namespaces)
    let mut umod_cls: Classes<(Side, Name)> = Classes::new();
    for m in &d1.unary_modalities {
        umod_cls.add((Side::Left, m.clone()));
    }
    for m in &d2.unary_modalities {
        umod_cls.add((Side::Right, m.clone()));
    }
    for m in &chi1.source.unary_modalities {
        umod_cls.union(&(Side::Left, chi1.apply_modality(m)), &(Side::Right, chi2.apply_modality(m)));
    }
    let (umod_rep, quotient_umods) = name_classes(umod_cls.groups());

    let mut bmod_cls: Classes<(Side, Name)> = Classes::new();
    for m in &d1.binary_modalities {
        bmod_cls.add((Side::Left, m.clone()));
    }
    for m in &d2.binary_modalities {
        bmod_cls.add((Side::Right, m.clone()));
    }
    for m in &chi1.source.binary_modalities {
        bmod_cls.union(&(Side::Left, chi1.apply_modality(m)), &(Side::Right, chi2.apply_modality(m)));
    }
    let (bmod_rep, quotient_bmods) = name_classes(bmod_cls.groups());

    // functions
    let mut fun_cls: Classes<(Side, FuncSym)> = Classes::new();
    for f in &d1.base.functions {
        fun_cls.add((Side::Left, f.clone()));
    }
    for f in &d2.base.functions {
        fun_cls.add((Side::Right, f.clone()));
    }
    for f in &chi1.source.base.functions {
        fun_cls.union(&(Side::Left, chi1.apply_func(f)), &(Side::Right, chi2.apply_func(f)));
    }
    let mut fun_groups = fun_cls.groups();
    fun_groups.sort_by_key(|g| g.iter().map(|(_, f)| f.name.clone()).min());
    let mut fun_rep: BTreeMap<(Side, FuncSym), FuncSym> = BTreeMap::new();
    let mut taken_f: BTreeSet<Name> = BTreeSet::new();
    let mut quotient_funcs: BTreeSet<FuncSym> = BTreeSet::new();
    let mut quotient_rigid_funcs: BTreeSet<FuncSym> = BTreeSet::new();
    for g in &fun_groups {
        let profiles: BTreeSet<(Vec<Name>, Name)> = g
            .iter()
            .map(|(side, f)| {
                (
                    f.arity.iter().map(|s| map_sort(side.clone(), s)).collect(),
                    map_sort(side.clone(), &f.result),
                )
            })
            .collect();
        if profiles.len() != 1 {
            let (_, w) = &g[0];
            return Err(Error::Construction(format!(
                "profile conflict in pushout congruence class containing function {w}"
            )));
        }
        let (arity, result) = profiles.into_iter().next().unwrap();
        let base = g.iter().map(|(_, f)| f.name.clone()).min().unwrap();
        let name = fresh_pushout_name(&base, &mut taken_f);
        let rep = FuncSym { name, arity, result };
        let rigid = g.iter().any(|(side, f)| match side {
            Side::Left => d1.is_rigid_func(f),
            Side::Right => d2.is_rigid_func(f),
        });
        quotient_funcs.insert(rep.clone());
        if rigid {
            quotient_rigid_funcs.insert(rep.clone());
        }
        for k in g {
            fun_rep.insert(k.clone(), rep.clone());
        }
    }

    // relations
    let mut rel_cls: Classes<(Side, RelSym)> = Classes::new();
    for r in &d1.base.relations {
        rel_cls.add((Side::Left, r.clone()));
    }
    for r in &d2.base.relations {
        rel_cls.add((Side::Right, r.clone()));
    }
    for r in &chi1.source.base.relations {
        rel_cls.union(&(Side::Left, chi1.apply_rel(r)), &(Side::Right, chi2.apply_rel(r)));
    }
    let mut rel_groups = rel_cls.groups();
    rel_groups.sort_by_key(|g| g.iter().map(|(_, r)| r.name.clone()).min());
    let mut rel_rep: BTreeMap<(Side, RelSym), RelSym> = BTreeMap::new();
    let mut taken_r: BTreeSet<Name> = BTreeSet::new();
    let mut quotient_rels: BTreeSet<RelSym> = BTreeSet::new();
    let mut quotient_rigid_rels: BTreeSet<RelSym> = BTreeSet::new();
    for g in &rel_groups {
        let profiles: BTreeSet<Vec<Name>> = g
            .iter()
            .map(|(side, r)| r.arity.iter().map(|s| map_sort(side.clone(), s)).collect())
            .collect();
        if profiles.len() != 1 {
            let (_, w) = &g[0];
            return Err(Error::Construction(format!(
                "profile conflict in pushout congruence class containing relation {w}"
            )));
        }
        let arity = profiles.into_iter().next().unwrap();
        let base = g.iter().map(|(_, r)| r.name.clone()).min().unwrap();
        let name = fresh_pushout_name(&base, &mut taken_r);
        let rep = RelSym { name, arity };
        let rigid = g.iter().any(|(side, r)| match side {
            Side::Left => d1.is_rigid_rel(r),
            Side::Right => d2.is_rigid_rel(r),
        });
        quotient_rels.insert(rep.clone());
        if rigid {
            quotient_rigid_rels.insert(rep.clone());
        }
        for k in g {
            rel_rep.insert(k.clone(), rep.clone());
        }
    }

    let vertex = HFOLSignature {
        nominals: quotient_noms,
        unary_modalities: quotient_umods,
        binary_modalities: quotient_bmods,
        base: FOSignature {
            sorts: quotient_sorts,
            functions: quotient_funcs,
            relations: quotient_rels,
        },
        rigid: FOSignature {
            sorts: quotient_rigid_sorts,
            functions: quotient_rigid_funcs,
            relations: quotient_rigid_rels,
        },
    };

    let mk_leg = |sig: &HFOLSignature, side: Side| -> SignatureMorphism {
        SignatureMorphism {
            source: sig.clone(),
            target: vertex.clone(),
            nominal_map: sig
                .nominals
                .iter()
                .map(|k| (k.clone(), nom_rep[&(side.clone(), k.clone())].clone()))
                .collect(),
            modality_map: sig
                .unary_modalities
                .iter()
                .map(|m| (m.clone(), umod_rep[&(side.clone(), m.clone())].clone()))
                .chain(
                    sig.binary_modalities
                        .iter()
                        .map(|m| (m.clone(), bmod_rep[&(side.clone(), m.clone())].clone())),
                )
                .collect(),
            sort_map: sig
                .base
                .sorts
                .iter()
                .map(|s| (s.clone(), sort_rep[&(side.clone(), s.clone())].clone()))
                .collect(),
            function_map: sig
                .base
                .functions
                .iter()
                .map(|f| (f.clone(), fun_rep[&(side.clone(), f.clone())].name.clone()))
                .collect(),
            relation_map: sig
                .base
                .relations
                .iter()
                .map(|r| (r.clone(), rel_rep[&(side.clone(), r.clone())].name.clone()))
                .collect(),
        }
    };

    let left_leg = mk_leg(d1, Side::Left);
    let right_leg = mk_leg(d2, Side::Right);
    Ok(Pushout { vertex, left_leg, right_leg })
}

fn fresh_pushout_name(base: &str, taken: &mut BTreeSet<Name>) -> Name {
    let n = fresh_name(base, taken);
    taken.insert(n.clone());
    n
}

fn name_classes(
    mut groups: Vec<Vec<(Side, Name)>>,
) -> (BTreeMap<(Side, Name), Name>, BTreeSet<Name>) {
    groups.sort_by_key(|g| g.iter().map(|(_, n)| n.clone()).min());
    let mut rep = BTreeMap::new();
    let mut taken = BTreeSet::new();
    let mut names = BTreeSet::new();
    for g in &groups {
        let base = g.iter().map(|(_, n)| n.clone()).min().unwrap();
        let name = fresh_pushout_name(&base, &mut taken);
        names.insert(name.clone());
        for k in g {
            rep.insert(k.clone(), name.clone());
        }
    }
    (rep, names)
}

/// Mediating morphism out of a pushout. The cocone `(theta1, theta2)`
/// must commute over the span; the result is the unique morphism `mu`
/// from the pushout vertex with `leg_i ; mu = theta_i`.
pub fn mediator(
    po: &Pushout,
    chi1: &SignatureMorphism,
    chi2: &SignatureMorphism,
    theta1: &SignatureMorphism,
    theta2: &SignatureMorphism,
) -> Result<SignatureMorphism> {
    if theta1.target != theta2.target {
        return Err(Error::Morphism("cocone legs have different targets".into()));
    }
    let c1 = compose(chi1, theta1)?;
    let c2 = compose(chi2, theta2)?;
    if c1 != c2 {
        return Err(Error::Construction("cocone does not commute over the span".into()));
    }

    let mut mu = SignatureMorphism {
        source: po.vertex.clone(),
        target: theta1.target.clone(),
        nominal_map: BTreeMap::new(),
        modality_map: BTreeMap::new(),
        sort_map: BTreeMap::new(),
        function_map: BTreeMap::new(),
        relation_map: BTreeMap::new(),
    };

    let set = |map: &mut BTreeMap<Name, Name>, key: Name, val: Name| -> Result<()> {
        if let Some(old) = map.get(&key) {
            if old != &val {
                return Err(Error::Construction(format!(
                    "cocone does not factor: class {key} has conflicting images {old} and {val}"
                )));
            }
        } else {
            map.insert(key, val);
        }
        Ok(())
    };

    for (leg, theta) in [(&po.left_leg, theta1), (&po.right_leg, theta2)] {
        let src = &leg.source;
        for k in &src.nominals {
            set(&mut mu.nominal_map, leg.apply_nominal(k), theta.apply_nominal(k))?;
        }
        for m in src.unary_modalities.iter().chain(src.binary_modalities.iter()) {
            set(&mut mu.modality_map, leg.apply_modality(m), theta.apply_modality(m))?;
        }
        for s in &src.base.sorts {
            set(&mut mu.sort_map, leg.apply_sort(s), theta.apply_sort(s))?;
        }
        for f in &src.base.functions {
            let key = leg.apply_func(f);
            let val = theta.apply_func(f);
            if let Some(old) = mu.function_map.get(&key) {
                if old != &val.name {
                    return Err(Error::Construction(format!(
                        "cocone does not factor: function class {key} has conflicting images"
                    )));
                }
            } else {
                mu.function_map.insert(key, val.name);
            }
        }
        for r in &src.base.relations {
            let key = leg.apply_rel(r);
            let val = theta.apply_rel(r);
            if let Some(old) = mu.relation_map.get(&key) {
                if old != &val.name {
                    return Err(Error::Construction(format!(
                        "cocone does not factor: relation class {key} has conflicting images"
                    )));
                }
            } else {
                mu.relation_map.insert(key, val.name);
            }
        }
    }
    Ok(mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::squares::fixtures;

    fn simple_sig() -> HFOLSignature {
        let mut sig = HFOLSignature::default();
        sig.nominals.insert("k".into());
        sig.base.sorts.insert("r".into());
        sig.base.sorts.insert("s".into());
        sig.rigid.sorts.insert("r".into());
        sig.base.functions.insert(FuncSym::new("f", vec!["s".into()], "s"));
        sig.base.functions.insert(FuncSym::constant("a", "r"));
        sig.rigid.functions.insert(FuncSym::constant("a", "r"));
        sig
    }

    #[test]
    fn empty_signature_is_valid() {
        assert!(validate_signature(&HFOLSignature::default()).is_empty());
    }

    #[test]
    fn counter1_delta_validates() {
        let span = fixtures::counter1();
        assert!(validate_signature(&span.chi1.source).is_empty());
        assert!(validate_signature(&span.chi1.target).is_empty());
        assert!(validate_signature(&span.chi2.target).is_empty());
        assert!(validate_morphism(&span.chi1).is_empty());
        assert!(validate_morphism(&span.chi2).is_empty());
    }

    #[test]
    fn rigid_sort_outside_base_is_flagged() {
        let mut sig = HFOLSignature::default();
        sig.rigid.sorts.insert("s".into());
        let diags = validate_signature(&sig);
        assert!(diags.iter().any(|d| d.contains("rigid not included in base")));
    }

    #[test]
    fn rigidity_violation_is_flagged() {
        let mut src = HFOLSignature::default();
        src.base.sorts.insert("s".into());
        src.rigid.sorts.insert("s".into());
        let mut tgt = HFOLSignature::default();
        tgt.base.sorts.insert("u".into());
        let mut chi = SignatureMorphism::identity(&src);
        chi.target = tgt;
        chi.sort_map.insert("s".into(), "u".into());
        let diags = validate_morphism(&chi);
        assert!(diags.iter().any(|d| d.contains("rigidity not preserved")));
    }

    #[test]
    fn identity_and_associativity() {
        let span = fixtures::counter1();
        let chi1 = &span.chi1;
        let id_src = SignatureMorphism::identity(&chi1.source);
        let id_tgt = SignatureMorphism::identity(&chi1.target);
        assert_eq!(&compose(&id_src, chi1).unwrap(), chi1);
        assert_eq!(&compose(chi1, &id_tgt).unwrap(), chi1);
    }

    #[test]
    fn counter1_pushout_square_commutes() {
        let span = fixtures::counter1();
        let po = pushout(&span.chi1, &span.chi2).unwrap();
        let l = compose(&span.chi1, &po.left_leg).unwrap();
        let r = compose(&span.chi2, &po.right_leg).unwrap();
        assert_eq!(l, r);
        // expected vertex: one nominal, one flexible sort, constants c and c3
        assert_eq!(po.vertex.nominals.len(), 1);
        assert_eq!(po.vertex.base.sorts.len(), 1);
        assert_eq!(po.vertex.base.functions.len(), 2);
        assert!(po.vertex.rigid.sorts.is_empty());
        assert!(po.vertex.nominals.contains("k"));
        assert!(po.vertex.base.sorts.contains("s"));
    }

    #[test]
    fn pushout_of_identity_span_is_isomorphic_to_source() {
        let sig = simple_sig();
        let id = SignatureMorphism::identity(&sig);
        let po = pushout(&id, &id).unwrap();
        assert_eq!(po.vertex, sig);
    }

    #[test]
    fn rigidify_keeps_rigid_symbols_unprefixed() {
        let sig = simple_sig();
        let (at_sig, bar) = rigidify(&sig);
        assert!(at_sig.sorts.contains("r"));
        assert!(at_sig.sorts.contains(&at_name("k", "s")));
        assert!(!at_sig.sorts.contains("s"));
        assert!(at_sig.functions.contains(&FuncSym::constant("a", "r")));
        assert!(at_sig.functions.contains(&FuncSym::new(
            at_name("k", "f"),
            vec![at_name("k", "s")],
            at_name("k", "s")
        )));
        assert!(bar.sorts.contains("s"));
        assert!(bar.sorts.contains(&at_name("k", "s")));
    }

    #[test]
    fn rigidify_without_nominals_is_rigid_part() {
        let mut sig = simple_sig();
        sig.nominals.clear();
        let (at_sig, _) = rigidify(&sig);
        assert_eq!(at_sig, sig.rigid);
    }

    #[test]
    fn extend_rejects_flexible_sorts_and_clashes() {
        let sig = simple_sig();
        assert!(extend(&sig, &[Var::rigid("y", "s")]).is_err());
        assert!(extend(&sig, &[Var::nominal("k")]).is_err());
        let ext = extend(&sig, &[Var::rigid("y", "r"), Var::nominal("z")]).unwrap();
        assert!(ext.extended.nominals.contains("z"));
        assert!(ext.extended.rigid.functions.contains(&FuncSym::constant("y", "r")));
        assert!(validate_morphism(&ext.inclusion()).is_empty());
    }

    #[test]
    fn extend_by_nothing_is_identity() {
        let sig = simple_sig();
        let ext = extend(&sig, &[]).unwrap();
        assert_eq!(ext.extended, sig);
    }

    #[test]
    fn coproduct_tags_clashing_names() {
        let span = fixtures::counter1();
        let (sum, inj1, inj2) = coproduct(&span.chi1.target, &span.chi2.target);
        assert!(validate_signature(&sum).is_empty());
        assert!(validate_morphism(&inj1).is_empty());
        assert!(validate_morphism(&inj2).is_empty());
        // both sides contain k and c3, so tagged copies must appear
        assert_eq!(
            sum.nominals.len(),
            span.chi1.target.nominals.len() + span.chi2.target.nominals.len()
        );
        assert!(inj1.apply_nominal("k") != inj2.apply_nominal("k"));
    }

    #[test]
    fn coproduct_with_empty_signature() {
        let sig = simple_sig();
        let (sum, inj1, _) = coproduct(&sig, &HFOLSignature::default());
        assert_eq!(sum, sig);
        assert_eq!(inj1, SignatureMorphism::identity(&sig));
    }

    #[test]
    fn coproduct_sort_count_on_disjoint_inputs() {
        let mut a = HFOLSignature::default();
        a.base.sorts.insert("s".into());
        let mut b = HFOLSignature::default();
        b.base.sorts.insert("t".into());
        b.base.sorts.insert("u".into());
        let (sum, _, _) = coproduct(&a, &b);
        assert_eq!(sum.base.sorts.len(), 3);
    }

    #[test]
    fn mediator_of_pushout_cocone_is_identity() {
        let span = fixtures::counter1();
        let po = pushout(&span.chi1, &span.chi2).unwrap();
        let mu = mediator(&po, &span.chi1, &span.chi2, &po.left_leg, &po.right_leg).unwrap();
        assert_eq!(mu, SignatureMorphism::identity(&po.vertex));
    }

    #[test]
    fn mediator_rejects_non_commuting_cocone() {
        let span = fixtures::counter1();
        let po = pushout(&span.chi1, &span.chi2).unwrap();
        let mut theta2 = po.right_leg.clone();
        // perturb one nominal: k1 no longer agrees through the span
        theta2.nominal_map.insert("k1".into(), "nonexistent".into());
        assert!(mediator(&po, &span.chi1, &span.chi2, &po.left_leg, &theta2).is_err());
    }

    #[test]
    fn counter3_pushout_matches_paper() {
        let span = fixtures::counter3();
        let po = pushout(&span.chi1, &span.chi2).unwrap();
        assert_eq!(po.vertex.rigid.sorts.len(), 2);
        assert!(po.vertex.rigid.sorts.contains("Nat"));
        assert!(po.vertex.rigid.sorts.contains("List"));
        assert_eq!(po.vertex.base.functions.len(), 5);
        assert_eq!(po.vertex.nominals.len(), 3);
    }
}
