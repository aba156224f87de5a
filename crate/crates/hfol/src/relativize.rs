//! Relativized unions of signatures and structures, relativized
//! reducts and the guarded sentence translation between a part and
//! the union.

use std::collections::{BTreeMap, BTreeSet};

use crate::semantics::{sat_global_all, KripkeStructure, WorldStructure};
use crate::sig::{coproduct, fresh_name, FuncSym, HFOLSignature, Name, SignatureMorphism, Var, VarSort};
use crate::syntax::{and, extend_morphism, implies, translate_term, Sentence};
use crate::{Error, Result};

/// The presentation `(Diamond, Axioms)` describing unions of a
/// structure over the first part with a structure over the second,
/// together with the part markers and the two injections.
#[derive(Clone, Debug)]
pub struct RelativizedUnion {
    pub diamond_sig: HFOLSignature,
    pub axioms: Vec<Sentence>,
    pub o1: Name,
    pub o2: Name,
    pub pi1: Name,
    pub pi2: Name,
    pub inj1: SignatureMorphism,
    pub inj2: SignatureMorphism,
}

impl RelativizedUnion {
    pub fn part(&self, i: usize) -> Result<(&SignatureMorphism, &Name, &Name)> {
        match i {
            1 => Ok((&self.inj1, &self.pi1, &self.o1)),
            2 => Ok((&self.inj2, &self.pi2, &self.o2)),
            other => Err(Error::Construction(format!("part index {other} out of range"))),
        }
    }
}

/// Builds the relativized union presentation: the coproduct of the
/// two signatures plus two fresh nominals and two fresh unary
/// modalities, axiomatized by coverage and nominal placement.
pub fn relativized_union_sig(d1: &HFOLSignature, d2: &HFOLSignature) -> RelativizedUnion {
    let (mut diamond, mut inj1, mut inj2) = coproduct(d1, d2);
    let mut taken = diamond.all_names();
    let o1 = fresh_name("o1", &taken);
    taken.insert(o1.clone());
    let o2 = fresh_name("o2", &taken);
    taken.insert(o2.clone());
    let pi1 = fresh_name("pi1", &taken);
    taken.insert(pi1.clone());
    let pi2 = fresh_name("pi2", &taken);
    diamond.nominals.insert(o1.clone());
    diamond.nominals.insert(o2.clone());
    diamond.unary_modalities.insert(pi1.clone());
    diamond.unary_modalities.insert(pi2.clone());
    inj1.target = diamond.clone();
    inj2.target = diamond.clone();
    // a fixed clause order keeps output byte-stable: coverage first,
    // then the placement axioms of part 1, then part 2
    let mut axioms =
        vec![Sentence::or(vec![Sentence::Modal(pi1.clone()), Sentence::Modal(pi2.clone())])];
    for (inj, pi, o) in [(&inj1, &pi1, &o1), (&inj2, &pi2, &o2)] {
        let mut named: BTreeSet<Name> =
            inj.source.nominals.iter().map(|k| inj.apply_nominal(k)).collect();
        named.insert(o.clone());
        for k in named {
            axioms.push(Sentence::at(k, Sentence::Modal(pi.clone())));
        }
    }
    RelativizedUnion { diamond_sig: diamond, axioms, o1, o2, pi1, pi2, inj1, inj2 }
}

/// Restricts a model of the union presentation to part `i`: worlds
/// inside the part marker, modalities intersected with the part and
/// only the part's symbols kept.
pub fn relativized_reduct(
    ru: &RelativizedUnion,
    model: &KripkeStructure,
    i: usize,
) -> Result<KripkeStructure> {
    if model.sig != ru.diamond_sig {
        return Err(Error::Model("structure is not over the union signature".into()));
    }
    if !sat_global_all(model, &ru.axioms)? {
        return Err(Error::Model(
            "structure violates the union axioms, so the reduct frame is ill-formed".into(),
        ));
    }
    let (inj, pi, _) = ru.part(i)?;
    let part_worlds = model
        .unary_interp
        .get(pi)
        .ok_or_else(|| Error::Model(format!("part marker {pi} not interpreted")))?
        .clone();
    let sig = inj.source.clone();
    let mut nominal_interp = BTreeMap::new();
    for k in &sig.nominals {
        let w = model.world_of(&inj.apply_nominal(k))?;
        if !part_worlds.contains(w) {
            return Err(Error::Model(format!("nominal {k} names a world outside the part")));
        }
        nominal_interp.insert(k.clone(), w.clone());
    }
    let mut unary_interp = BTreeMap::new();
    for m in &sig.unary_modalities {
        let ws = model
            .unary_interp
            .get(&inj.apply_modality(m))
            .ok_or_else(|| Error::Model(format!("modality {m} not interpreted")))?;
        unary_interp.insert(m.clone(), ws.intersection(&part_worlds).cloned().collect());
    }
    let mut binary_interp = BTreeMap::new();
    for l in &sig.binary_modalities {
        let pairs = model
            .binary_interp
            .get(&inj.apply_modality(l))
            .ok_or_else(|| Error::Model(format!("modality {l} not interpreted")))?;
        binary_interp.insert(
            l.clone(),
            pairs
                .iter()
                .filter(|(a, b)| part_worlds.contains(a) && part_worlds.contains(b))
                .cloned()
                .collect(),
        );
    }
    let mut world_models = BTreeMap::new();
    for w in &part_worlds {
        let big = &model.world_models[w];
        let mut out = WorldStructure::default();
        for s in &sig.base.sorts {
            out.carriers.insert(s.clone(), big.carriers[&inj.apply_sort(s)].clone());
        }
        for f in &sig.base.functions {
            out.functions.insert(f.clone(), big.functions[&inj.apply_func(f)].clone());
        }
        for r in &sig.base.relations {
            out.relations.insert(r.clone(), big.relations[&inj.apply_rel(r)].clone());
        }
        world_models.insert(w.clone(), out);
    }
    Ok(KripkeStructure {
        sig,
        worlds: part_worlds,
        nominal_interp,
        unary_interp,
        binary_interp,
        world_models,
    })
}

/// Translates a part-`i` sentence to the union signature, guarding
/// every clause except disjunction with the part marker.
pub fn rt_translate(ru: &RelativizedUnion, i: usize, gamma: &Sentence) -> Result<Sentence> {
    let (inj, pi, _) = ru.part(i)?;
    rt(inj, pi, gamma)
}

fn rt(inj: &SignatureMorphism, pi: &Name, gamma: &Sentence) -> Result<Sentence> {
    let guard = |s: Sentence| implies(Sentence::Modal(pi.clone()), s);
    Ok(match gamma {
        Sentence::Nominal(k) => guard(Sentence::Nominal(inj.apply_nominal(k))),
        Sentence::Modal(m) => guard(Sentence::Modal(inj.apply_modality(m))),
        Sentence::Eq(a, b) => {
            guard(Sentence::Eq(translate_term(inj, a), translate_term(inj, b)))
        }
        Sentence::Rel { at, sym, args } => {
            let sym2 = inj.apply_rel(sym);
            let at2 = match at {
                Some(k) if !inj.target.is_rigid_rel(&sym2) => Some(inj.apply_nominal(k)),
                _ => None,
            };
            guard(Sentence::Rel {
                at: at2,
                sym: sym2,
                args: args.iter().map(|a| translate_term(inj, a)).collect(),
            })
        }
        Sentence::At(k, p) => guard(Sentence::at(inj.apply_nominal(k), rt(inj, pi, p)?)),
        Sentence::Diamond(l, p) => guard(Sentence::Diamond(
            inj.apply_modality(l),
            Box::new(and(vec![Sentence::Modal(pi.clone()), rt(inj, pi, p)?])),
        )),
        Sentence::Not(p) => guard(Sentence::not(rt(inj, pi, p)?)),
        // disjunction commutes without a guard, except that the empty
        // disjunction must still become vacuous outside the part
        Sentence::Or(items) if items.is_empty() => guard(Sentence::falsity()),
        Sentence::Or(items) => {
            Sentence::or(items.iter().map(|p| rt(inj, pi, p)).collect::<Result<_>>()?)
        }
        Sentence::Store(z, p) => {
            let (ext, renamed) = extend_morphism(inj, &[Var::nominal(z.clone())])?;
            guard(Sentence::Store(renamed[0].name.clone(), Box::new(rt(&ext, pi, p)?)))
        }
        Sentence::Exists(vars, p) => {
            let (ext, renamed) = extend_morphism(inj, vars)?;
            let mut conjuncts: Vec<Sentence> = renamed
                .iter()
                .filter(|v| v.sort == VarSort::Nominal)
                .map(|v| Sentence::at(v.name.clone(), Sentence::Modal(pi.clone())))
                .collect();
            conjuncts.push(rt(&ext, pi, p)?);
            guard(Sentence::Exists(renamed, Box::new(and(conjuncts))))
        }
    })
}

/// How foreign flexible sorts are interpreted on the other part's
/// worlds. The choice is invisible to the reducts, which is exactly
/// why the union is not unique.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ForeignPolicy {
    OneElement,
    TwoElements,
}

/// Joins a part-1 structure and a part-2 structure into a model of
/// the union presentation whose relativized reducts return the inputs
/// exactly.
pub fn relativized_union_models(
    ru: &RelativizedUnion,
    m1: &KripkeStructure,
    m2: &KripkeStructure,
    policy: ForeignPolicy,
) -> Result<KripkeStructure> {
    if m1.sig != ru.inj1.source || m2.sig != ru.inj2.source {
        return Err(Error::Model("inputs are not over the union's part signatures".into()));
    }
    if m1.worlds.intersection(&m2.worlds).next().is_some() {
        return Err(Error::Model("world names of the two parts must be disjoint".into()));
    }
    let diamond = &ru.diamond_sig;
    let worlds: BTreeSet<Name> = m1.worlds.union(&m2.worlds).cloned().collect();

    let mut nominal_interp = BTreeMap::new();
    let mut unary_interp = BTreeMap::new();
    let mut binary_interp = BTreeMap::new();
    for (inj, m, o, pi) in [
        (&ru.inj1, m1, &ru.o1, &ru.pi1),
        (&ru.inj2, m2, &ru.o2, &ru.pi2),
    ] {
        for (k, w) in &m.nominal_interp {
            nominal_interp.insert(inj.apply_nominal(k), w.clone());
        }
        nominal_interp.insert(o.clone(), m.worlds.iter().next().unwrap().clone());
        for (r, ws) in &m.unary_interp {
            unary_interp.insert(inj.apply_modality(r), ws.clone());
        }
        unary_interp.insert(pi.clone(), m.worlds.clone());
        for (l, pairs) in &m.binary_interp {
            binary_interp.insert(inj.apply_modality(l), pairs.clone());
        }
    }

    let default_carrier = |sort: &Name| -> BTreeSet<Name> {
        match policy {
            ForeignPolicy::OneElement => [format!("{sort}0")].into(),
            ForeignPolicy::TwoElements => [format!("{sort}0"), format!("{sort}1")].into(),
        }
    };
    let mut world_models = BTreeMap::new();
    for (home, m, foreign) in [(&ru.inj1, m1, (&ru.inj2, m2)), (&ru.inj2, m2, (&ru.inj1, m1))] {
        let (finj, fm) = foreign;
        let fhome_world = fm.worlds.iter().next().unwrap();
        for w in &m.worlds {
            let own = &m.world_models[w];
            let mut out = WorldStructure::default();
            for s in &m.sig.base.sorts {
                out.carriers.insert(home.apply_sort(s), own.carriers[s].clone());
            }
            for s in &fm.sig.base.sorts {
                let img = finj.apply_sort(s);
                let carrier = if fm.sig.is_rigid_sort(s) {
                    fm.world_models[fhome_world].carriers[s].clone()
                } else {
                    default_carrier(&img)
                };
                out.carriers.insert(img, carrier);
            }
            for f in &m.sig.base.functions {
                out.functions.insert(home.apply_func(f), own.functions[f].clone());
            }
            for f in &fm.sig.base.functions {
                let img = finj.apply_func(f);
                let table = if fm.sig.is_rigid_func(f) {
                    fm.world_models[fhome_world].functions[f].clone()
                } else {
                    total_default(&out, &img)?
                };
                out.functions.insert(img, table);
            }
            for r in &m.sig.base.relations {
                out.relations.insert(home.apply_rel(r), own.relations[r].clone());
            }
            for r in &fm.sig.base.relations {
                let img = finj.apply_rel(r);
                let rows = if fm.sig.is_rigid_rel(r) {
                    fm.world_models[fhome_world].relations[r].clone()
                } else {
                    BTreeSet::new()
                };
                out.relations.insert(img, rows);
            }
            world_models.insert(w.clone(), out);
        }
    }
    Ok(KripkeStructure {
        sig: diamond.clone(),
        worlds,
        nominal_interp,
        unary_interp,
        binary_interp,
        world_models,
    })
}

fn total_default(ws: &WorldStructure, f: &FuncSym) -> Result<BTreeMap<Vec<Name>, Name>> {
    let least = ws
        .carriers
        .get(&f.result)
        .and_then(|c| c.iter().next())
        .cloned()
        .ok_or_else(|| Error::Model(format!("empty carrier for {f}")))?;
    let mut domain: Vec<Vec<Name>> = vec![vec![]];
    for s in &f.arity {
        let carrier = ws
            .carriers
            .get(s)
            .ok_or_else(|| Error::Model(format!("missing carrier {s} for {f}")))?;
        let mut next = Vec::new();
        for prefix in &domain {
            for e in carrier {
                let mut row = prefix.clone();
                row.push(e.clone());
                next.push(row);
            }
        }
        domain = next;
    }
    Ok(domain.into_iter().map(|args| (args, least.clone())).collect())
}
