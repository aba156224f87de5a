//! Finite Kripke structures over HFOL signatures: validation,
//! reducts, local and global satisfaction, expansions, reachability,
//! unreachable-element surgery, bounded consequence search and
//! probe-set equivalence.

use std::collections::{BTreeMap, BTreeSet};

use crate::sig::{
    extend, FuncSym, HFOLSignature, Name, RelSym, SignatureExtension, SignatureMorphism, Var,
    VarSort,
};
use crate::syntax::{
    at_sort, rigid_terms_by_sort, HybridSort, Sentence, Term,
};
use crate::{Error, Result};

/// First-order structure interpreting the base signature at one
/// world. Elements are plain names.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct WorldStructure {
    pub carriers: BTreeMap<Name, BTreeSet<Name>>,
    pub functions: BTreeMap<FuncSym, BTreeMap<Vec<Name>, Name>>,
    pub relations: BTreeMap<RelSym, BTreeSet<Vec<Name>>>,
}

/// A Kripke structure: a frame over the nominal part plus one
/// first-order structure per world, with rigid symbols shared.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct KripkeStructure {
    pub sig: HFOLSignature,
    pub worlds: BTreeSet<Name>,
    pub nominal_interp: BTreeMap<Name, Name>,
    pub unary_interp: BTreeMap<Name, BTreeSet<Name>>,
    pub binary_interp: BTreeMap<Name, BTreeSet<(Name, Name)>>,
    pub world_models: BTreeMap<Name, WorldStructure>,
}

impl KripkeStructure {
    pub fn world_of(&self, nominal: &str) -> Result<&Name> {
        self.nominal_interp
            .get(nominal)
            .ok_or_else(|| Error::Model(format!("nominal {nominal} has no interpretation")))
    }

    /// Carrier of a rigid sort, read off the least world.
    pub fn rigid_carrier(&self, sort: &Name) -> Result<&BTreeSet<Name>> {
        let w = self
            .worlds
            .iter()
            .next()
            .ok_or_else(|| Error::Model("structure has no worlds".into()))?;
        self.world_models[w]
            .carriers
            .get(sort)
            .ok_or_else(|| Error::Model(format!("no carrier for sort {sort}")))
    }
}

/// Checks frame totality, carrier nonemptiness, function totality and
/// rigid sharing across worlds. Empty result means valid.
pub fn validate_model(m: &KripkeStructure) -> Vec<String> {
    let mut out = Vec::new();
    let sig = &m.sig;
    if m.worlds.is_empty() {
        out.push("structure has no worlds".into());
        return out;
    }
    for k in &sig.nominals {
        match m.nominal_interp.get(k) {
            None => out.push(format!("nominal {k} not interpreted")),
            Some(w) if !m.worlds.contains(w) => {
                out.push(format!("nominal {k} names unknown world {w}"))
            }
            _ => {}
        }
    }
    for r in &sig.unary_modalities {
        match m.unary_interp.get(r) {
            None => out.push(format!("unary modality {r} not interpreted")),
            Some(ws) => {
                for w in ws {
                    if !m.worlds.contains(w) {
                        out.push(format!("modality {r} contains unknown world {w}"));
                    }
                }
            }
        }
    }
    for l in &sig.binary_modalities {
        match m.binary_interp.get(l) {
            None => out.push(format!("binary modality {l} not interpreted")),
            Some(pairs) => {
                for (a, b) in pairs {
                    if !m.worlds.contains(a) || !m.worlds.contains(b) {
                        out.push(format!("modality {l} contains unknown world pair ({a},{b})"));
                    }
                }
            }
        }
    }
    for w in &m.worlds {
        let ws = match m.world_models.get(w) {
            Some(ws) => ws,
            None => {
                out.push(format!("world {w} has no structure"));
                continue;
            }
        };
        for s in &sig.base.sorts {
            match ws.carriers.get(s) {
                None => out.push(format!("world {w}: no carrier for sort {s}")),
                Some(c) if c.is_empty() => out.push(format!("world {w}: empty carrier for {s}")),
                _ => {}
            }
        }
        for f in &sig.base.functions {
            let table = match ws.functions.get(f) {
                Some(t) => t,
                None => {
                    out.push(format!("world {w}: function {f} not interpreted"));
                    continue;
                }
            };
            let domain = tuples(ws, &f.arity);
            for tuple in &domain {
                match table.get(tuple) {
                    None => out.push(format!("world {w}: function {f} undefined at {tuple:?}")),
                    Some(v) => {
                        if !ws.carriers.get(&f.result).is_some_and(|c| c.contains(v)) {
                            out.push(format!("world {w}: function {f} value {v} outside carrier"));
                        }
                    }
                }
            }
            for tuple in table.keys() {
                if !domain.contains(tuple) {
                    out.push(format!("world {w}: function {f} defined off-carrier at {tuple:?}"));
                }
            }
        }
        for r in &sig.base.relations {
            match ws.relations.get(r) {
                None => out.push(format!("world {w}: relation {r} not interpreted")),
                Some(rows) => {
                    let domain = tuples(ws, &r.arity);
                    for row in rows {
                        if !domain.contains(row) {
                            out.push(format!("world {w}: relation {r} row {row:?} off-carrier"));
                        }
                    }
                }
            }
        }
    }
    // rigid sharing
    let first = m.worlds.iter().next().unwrap();
    if let Some(base) = m.world_models.get(first) {
        for w in m.worlds.iter().skip(1) {
            let ws = match m.world_models.get(w) {
                Some(ws) => ws,
                None => continue,
            };
            for s in &sig.rigid.sorts {
                if ws.carriers.get(s) != base.carriers.get(s) {
                    out.push(format!("rigid sharing violated: carrier of {s} differs at {w}"));
                }
            }
            for f in &sig.rigid.functions {
                if ws.functions.get(f) != base.functions.get(f) {
                    out.push(format!("rigid sharing violated: function {f} differs at {w}"));
                }
            }
            for r in &sig.rigid.relations {
                if ws.relations.get(r) != base.relations.get(r) {
                    out.push(format!("rigid sharing violated: relation {r} differs at {w}"));
                }
            }
        }
    }
    out
}

/// All argument tuples over the carriers named by `arity`.
fn tuples(ws: &WorldStructure, arity: &[Name]) -> BTreeSet<Vec<Name>> {
    let mut out: Vec<Vec<Name>> = vec![vec![]];
    for s in arity {
        let carrier = match ws.carriers.get(s) {
            Some(c) => c,
            None => return BTreeSet::new(),
        };
        let mut next = Vec::new();
        for prefix in &out {
            for e in carrier {
                let mut row = prefix.clone();
                row.push(e.clone());
                next.push(row);
            }
        }
        out = next;
    }
    out.into_iter().collect()
}

/// Model reduct along a signature morphism: same worlds, symbol-wise
/// pullback of interpretations.
pub fn reduct(chi: &SignatureMorphism, model: &KripkeStructure) -> Result<KripkeStructure> {
    if model.sig != chi.target {
        return Err(Error::Model("reduct: model signature is not the morphism target".into()));
    }
    let src = &chi.source;
    let mut nominal_interp = BTreeMap::new();
    for k in &src.nominals {
        nominal_interp.insert(k.clone(), model.world_of(&chi.apply_nominal(k))?.clone());
    }
    let mut unary_interp = BTreeMap::new();
    for r in &src.unary_modalities {
        let img = chi.apply_modality(r);
        unary_interp.insert(
            r.clone(),
            model
                .unary_interp
                .get(&img)
                .ok_or_else(|| Error::Model(format!("modality {img} not interpreted")))?
                .clone(),
        );
    }
    let mut binary_interp = BTreeMap::new();
    for l in &src.binary_modalities {
        let img = chi.apply_modality(l);
        binary_interp.insert(
            l.clone(),
            model
                .binary_interp
                .get(&img)
                .ok_or_else(|| Error::Model(format!("modality {img} not interpreted")))?
                .clone(),
        );
    }
    let mut world_models = BTreeMap::new();
    for (w, ws) in &model.world_models {
        let mut out = WorldStructure::default();
        for s in &src.base.sorts {
            let img = chi.apply_sort(s);
            out.carriers.insert(
                s.clone(),
                ws.carriers
                    .get(&img)
                    .ok_or_else(|| Error::Model(format!("no carrier for {img}")))?
                    .clone(),
            );
        }
        for f in &src.base.functions {
            let img = chi.apply_func(f);
            out.functions.insert(
                f.clone(),
                ws.functions
                    .get(&img)
                    .ok_or_else(|| Error::Model(format!("function {img} not interpreted")))?
                    .clone(),
            );
        }
        for r in &src.base.relations {
            let img = chi.apply_rel(r);
            out.relations.insert(
                r.clone(),
                ws.relations
                    .get(&img)
                    .ok_or_else(|| Error::Model(format!("relation {img} not interpreted")))?
                    .clone(),
            );
        }
        world_models.insert(w.clone(), out);
    }
    Ok(KripkeStructure {
        sig: src.clone(),
        worlds: model.worlds.clone(),
        nominal_interp,
        unary_interp,
        binary_interp,
        world_models,
    })
}

/// Evaluates a hybrid term at a world. An `@`-prefix redirects the
/// symbol lookup to the world named by the nominal; arguments carry
/// their own prefixes.
pub fn eval_term(model: &KripkeStructure, w: &Name, t: &Term) -> Result<Name> {
    let args = t
        .args
        .iter()
        .map(|a| eval_term(model, w, a))
        .collect::<Result<Vec<_>>>()?;
    let site = match &t.at {
        Some(k) => model.world_of(k)?,
        None => w,
    };
    let ws = model
        .world_models
        .get(site)
        .ok_or_else(|| Error::Model(format!("no structure at world {site}")))?;
    ws.functions
        .get(&t.sym)
        .and_then(|table| table.get(&args))
        .cloned()
        .ok_or_else(|| Error::Model(format!("function {} undefined at {args:?} in {site}", t.sym)))
}

/// Local satisfaction at a world, by the inductive definition.
/// Quantifiers enumerate expansions of the model; `Store` interprets
/// the bound nominal as the current world.
pub fn sat_local(model: &KripkeStructure, w: &Name, phi: &Sentence) -> Result<bool> {
    Ok(match phi {
        Sentence::Nominal(k) => model.world_of(k)? == w,
        Sentence::Modal(r) => model
            .unary_interp
            .get(r)
            .ok_or_else(|| Error::Model(format!("modality {r} not interpreted")))?
            .contains(w),
        Sentence::Eq(a, b) => eval_term(model, w, a)? == eval_term(model, w, b)?,
        Sentence::Rel { at, sym, args } => {
            let row = args
                .iter()
                .map(|a| eval_term(model, w, a))
                .collect::<Result<Vec<_>>>()?;
            let site = match at {
                Some(k) => model.world_of(k)?,
                None => w,
            };
            model.world_models[site]
                .relations
                .get(sym)
                .ok_or_else(|| Error::Model(format!("relation {sym} not interpreted")))?
                .contains(&row)
        }
        Sentence::At(k, p) => {
            let v = model.world_of(k)?.clone();
            sat_local(model, &v, p)?
        }
        Sentence::Not(p) => !sat_local(model, w, p)?,
        Sentence::Or(items) => {
            let mut any = false;
            for p in items {
                if sat_local(model, w, p)? {
                    any = true;
                    break;
                }
            }
            any
        }
        Sentence::Store(z, p) => {
            let ext = extend(&model.sig, &[Var::nominal(z.clone())])
                .map_err(|e| Error::Model(format!("store binder: {e}")))?;
            let expanded = expand_model(
                model,
                &ext,
                &Assignment {
                    nominals: [(z.clone(), w.clone())].into(),
                    rigids: BTreeMap::new(),
                },
            )?;
            sat_local(&expanded, w, p)?
        }
        Sentence::Exists(vars, p) => {
            let ext = extend(&model.sig, vars)
                .map_err(|e| Error::Model(format!("exists binder: {e}")))?;
            let mut any = false;
            for expanded in expansions(model, &ext)? {
                if sat_local(&expanded, w, p)? {
                    any = true;
                    break;
                }
            }
            any
        }
        Sentence::Diamond(l, p) => {
            let pairs = model
                .binary_interp
                .get(l)
                .ok_or_else(|| Error::Model(format!("modality {l} not interpreted")))?
                .clone();
            let mut any = false;
            for (a, b) in pairs {
                if &a == w && sat_local(model, &b, p)? {
                    any = true;
                    break;
                }
            }
            any
        }
    })
}

/// Global satisfaction: local satisfaction at every world.
pub fn sat_global(model: &KripkeStructure, phi: &Sentence) -> Result<bool> {
    for w in model.worlds.clone() {
        if !sat_local(model, &w, phi)? {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn sat_global_all(model: &KripkeStructure, phis: &[Sentence]) -> Result<bool> {
    for phi in phis {
        if !sat_global(model, phi)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Values for the added constants of a signature extension.
#[derive(Clone, Debug, Default)]
pub struct Assignment {
    pub nominals: BTreeMap<Name, Name>,
    pub rigids: BTreeMap<Name, Name>,
}

/// Expands a model along a signature extension with the given values:
/// nominal variables name worlds, rigid variables pick shared rigid
/// carrier elements.
pub fn expand_model(
    model: &KripkeStructure,
    ext: &SignatureExtension,
    values: &Assignment,
) -> Result<KripkeStructure> {
    if ext.base != model.sig {
        return Err(Error::Model("expansion: extension base is not the model signature".into()));
    }
    let mut out = model.clone();
    out.sig = ext.extended.clone();
    for v in &ext.added {
        match &v.sort {
            VarSort::Nominal => {
                let w = values
                    .nominals
                    .get(&v.name)
                    .ok_or_else(|| Error::Model(format!("no world for variable {}", v.name)))?;
                if !model.worlds.contains(w) {
                    return Err(Error::Model(format!("unknown world {w} for {}", v.name)));
                }
                out.nominal_interp.insert(v.name.clone(), w.clone());
            }
            VarSort::Rigid(s) => {
                let e = values
                    .rigids
                    .get(&v.name)
                    .ok_or_else(|| Error::Model(format!("no value for variable {}", v.name)))?;
                if !model.rigid_carrier(s)?.contains(e) {
                    return Err(Error::Model(format!("value {e} outside carrier of {s}")));
                }
                let sym = FuncSym::constant(v.name.clone(), s.clone());
                for ws in out.world_models.values_mut() {
                    ws.functions.insert(sym.clone(), [(vec![], e.clone())].into());
                }
            }
        }
    }
    Ok(out)
}

/// All expansions of a model along an extension, in canonical order.
pub fn expansions(
    model: &KripkeStructure,
    ext: &SignatureExtension,
) -> Result<Vec<KripkeStructure>> {
    let mut assignments: Vec<Assignment> = vec![Assignment::default()];
    for v in &ext.added {
        let choices: Vec<Name> = match &v.sort {
            VarSort::Nominal => model.worlds.iter().cloned().collect(),
            VarSort::Rigid(s) => model.rigid_carrier(s)?.iter().cloned().collect(),
        };
        let mut next = Vec::new();
        for a in &assignments {
            for c in &choices {
                let mut b = a.clone();
                match &v.sort {
                    VarSort::Nominal => {
                        b.nominals.insert(v.name.clone(), c.clone());
                    }
                    VarSort::Rigid(_) => {
                        b.rigids.insert(v.name.clone(), c.clone());
                    }
                }
                next.push(b);
            }
        }
        assignments = next;
    }
    assignments.iter().map(|a| expand_model(model, ext, a)).collect()
}

/// Reachability analysis: which worlds are named by nominals and
/// which elements are denoted by rigid hybrid terms, up to the depth
/// bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReachabilityReport {
    pub reachable_worlds: BTreeSet<Name>,
    pub unreachable_worlds: BTreeSet<Name>,
    /// world -> sort -> denoted elements
    pub reachable_elements: BTreeMap<Name, BTreeMap<Name, BTreeSet<Name>>>,
    pub unreachable_elements: BTreeMap<Name, BTreeMap<Name, BTreeSet<Name>>>,
    /// every world named and every rigid-sort element denoted
    pub reachable_model: bool,
}

pub fn reachability_report(model: &KripkeStructure, depth: usize) -> Result<ReachabilityReport> {
    let sig = &model.sig;
    let reachable_worlds: BTreeSet<Name> = model.nominal_interp.values().cloned().collect();
    let unreachable_worlds: BTreeSet<Name> =
        model.worlds.difference(&reachable_worlds).cloned().collect();
    let by_sort = rigid_terms_by_sort(sig, depth);
    let mut reachable_elements: BTreeMap<Name, BTreeMap<Name, BTreeSet<Name>>> = BTreeMap::new();
    let eval_world = model.worlds.iter().next().unwrap().clone();
    for w in &model.worlds {
        reachable_elements.insert(w.clone(), BTreeMap::new());
    }
    for (sort, terms) in &by_sort {
        match sort {
            HybridSort::Plain(s) => {
                // rigid sort: denotations are world independent
                let mut den = BTreeSet::new();
                for t in terms {
                    den.insert(eval_term(model, &eval_world, t)?);
                }
                for w in &model.worlds {
                    reachable_elements.get_mut(w).unwrap().insert(s.clone(), den.clone());
                }
            }
            HybridSort::At(k, s) => {
                let w = model.world_of(k)?.clone();
                let entry = reachable_elements
                    .get_mut(&w)
                    .unwrap()
                    .entry(s.clone())
                    .or_default();
                for t in terms {
                    entry.insert(eval_term(model, &eval_world, t)?);
                }
            }
        }
    }
    let mut unreachable_elements: BTreeMap<Name, BTreeMap<Name, BTreeSet<Name>>> = BTreeMap::new();
    let mut rigid_covered = true;
    for w in &model.worlds {
        let ws = &model.world_models[w];
        let mut per_sort = BTreeMap::new();
        for (s, carrier) in &ws.carriers {
            let denoted = reachable_elements
                .get(w)
                .and_then(|m| m.get(s))
                .cloned()
                .unwrap_or_default();
            let missing: BTreeSet<Name> = carrier.difference(&denoted).cloned().collect();
            if sig.is_rigid_sort(s) && !missing.is_empty() {
                rigid_covered = false;
            }
            if !missing.is_empty() {
                per_sort.insert(s.clone(), missing);
            }
        }
        unreachable_elements.insert(w.clone(), per_sort);
    }
    let reachable_model = unreachable_worlds.is_empty() && rigid_covered;
    Ok(ReachabilityReport {
        reachable_worlds,
        unreachable_worlds,
        reachable_elements,
        unreachable_elements,
        reachable_model,
    })
}

/// Surgery on unreachable elements of flexible sorts: bijectively
/// rename some of them and add fresh ones, giving function symbols
/// chosen or default values on the new argument tuples.
#[derive(Clone, Debug, Default)]
pub struct SwapPlan {
    /// world -> sort -> old unreachable element -> replacement
    pub rename: BTreeMap<Name, BTreeMap<Name, BTreeMap<Name, Name>>>,
    /// world -> sort -> fresh elements to add
    pub add: BTreeMap<Name, BTreeMap<Name, BTreeSet<Name>>>,
    /// values on argument tuples that involve added elements
    pub function_values: BTreeMap<(Name, FuncSym, Vec<Name>), Name>,
}

impl SwapPlan {
    pub fn add_element(mut self, world: &str, sort: &str, elem: &str) -> Self {
        self.add
            .entry(world.into())
            .or_default()
            .entry(sort.into())
            .or_default()
            .insert(elem.into());
        self
    }

    pub fn with_function_value(
        mut self,
        world: &str,
        sym: &FuncSym,
        args: Vec<Name>,
        value: &str,
    ) -> Self {
        self.function_values
            .insert((world.into(), sym.clone(), args), value.into());
        self
    }
}

pub fn swap_unreachable(
    model: &KripkeStructure,
    plan: &SwapPlan,
    depth: usize,
) -> Result<KripkeStructure> {
    let report = reachability_report(model, depth)?;
    let sig = &model.sig;
    for (w, per_sort) in &plan.rename {
        for (s, map) in per_sort {
            if sig.is_rigid_sort(s) {
                return Err(Error::Model(format!("swap touches rigid sort {s}")));
            }
            let unreachable = report
                .unreachable_elements
                .get(w)
                .and_then(|m| m.get(s))
                .cloned()
                .unwrap_or_default();
            for old in map.keys() {
                if !unreachable.contains(old) {
                    return Err(Error::Model(format!(
                        "swap touches reachable element {old} of sort {s} at {w}"
                    )));
                }
            }
        }
    }
    let mut out = model.clone();
    for (w, per_sort) in &plan.rename {
        for (s, map) in per_sort {
            let ws = out
                .world_models
                .get_mut(w)
                .ok_or_else(|| Error::Model(format!("unknown world {w}")))?;
            let rename = |e: &Name| map.get(e).cloned().unwrap_or_else(|| e.clone());
            let carrier = ws.carriers.get_mut(s).unwrap();
            let renamed: BTreeSet<Name> = carrier.iter().map(&rename).collect();
            if renamed.len() != carrier.len() {
                return Err(Error::Model(format!("rename not injective on sort {s} at {w}")));
            }
            *carrier = renamed;
            // rewrite element occurrences in tables at this world
            let sorted = |sym_arity: &[Name]| sym_arity.to_vec();
            for (f, table) in ws.functions.iter_mut() {
                let arity = sorted(&f.arity);
                let mut next = BTreeMap::new();
                for (args, val) in table.iter() {
                    let args2: Vec<Name> = args
                        .iter()
                        .zip(arity.iter())
                        .map(|(e, srt)| if srt == s { rename(e) } else { e.clone() })
                        .collect();
                    let val2 = if f.result == *s { rename(val) } else { val.clone() };
                    next.insert(args2, val2);
                }
                *table = next;
            }
            for (r, rows) in ws.relations.iter_mut() {
                let arity = sorted(&r.arity);
                *rows = rows
                    .iter()
                    .map(|row| {
                        row.iter()
                            .zip(arity.iter())
                            .map(|(e, srt)| if srt == s { rename(e) } else { e.clone() })
                            .collect()
                    })
                    .collect();
            }
        }
    }
    for (w, per_sort) in &plan.add {
        for (s, elems) in per_sort {
            if sig.is_rigid_sort(s) {
                return Err(Error::Model(format!("swap touches rigid sort {s}")));
            }
            let ws = out
                .world_models
                .get_mut(w)
                .ok_or_else(|| Error::Model(format!("unknown world {w}")))?;
            let carrier = ws
                .carriers
                .get_mut(s)
                .ok_or_else(|| Error::Model(format!("no carrier for {s}")))?;
            for e in elems {
                if !carrier.insert(e.clone()) {
                    return Err(Error::Model(format!("element {e} already present in {s} at {w}")));
                }
            }
        }
    }
    // complete function tables on the enlarged domains
    for w in out.worlds.clone() {
        let ws = out.world_models.get_mut(&w).unwrap();
        let carriers = ws.carriers.clone();
        for f in &sig.base.functions {
            let domain = tuples(ws, &f.arity);
            let table = ws.functions.get_mut(f).unwrap();
            for args in domain {
                if table.contains_key(&args) {
                    continue;
                }
                let value = plan
                    .function_values
                    .get(&(w.clone(), f.clone(), args.clone()))
                    .cloned()
                    .or_else(|| carriers.get(&f.result).and_then(|c| c.iter().next().cloned()))
                    .ok_or_else(|| Error::Model(format!("no value for {f} at {args:?}")))?;
                table.insert(args, value);
            }
        }
    }
    let diags = validate_model(&out);
    if !diags.is_empty() {
        return Err(Error::Model(format!("swap result invalid: {}", diags.join("; "))));
    }
    Ok(out)
}

/// A finite sentence set standing in for elementary equivalence.
#[derive(Clone, Debug)]
pub struct ProbeSet {
    pub sentences: Vec<Sentence>,
    pub depth: usize,
    pub quantifier_budget: usize,
}

/// Deterministic duplicate-free enumeration of wellformed sentences
/// up to the depth bound, with at most `quantifier_budget` binders per
/// sentence. Every constructor the signature supports appears by
/// depth 3.
pub fn probe_sentences(sig: &HFOLSignature, depth: usize, quantifier_budget: usize) -> ProbeSet {
    let mut levels: Vec<BTreeSet<Sentence>> = Vec::new();
    if depth == 0 {
        return ProbeSet { sentences: vec![], depth, quantifier_budget };
    }
    let mut atoms: BTreeSet<Sentence> = BTreeSet::new();
    for k in &sig.nominals {
        atoms.insert(Sentence::Nominal(k.clone()));
    }
    for r in &sig.unary_modalities {
        atoms.insert(Sentence::Modal(r.clone()));
    }
    let terms = ground_terms(sig, 2);
    for (sort, ts) in &terms {
        for (i, a) in ts.iter().enumerate() {
            for b in ts.iter().skip(i) {
                atoms.insert(Sentence::Eq(a.clone(), b.clone()));
            }
        }
        let _ = sort;
    }
    for r in &sig.base.relations {
        let pools: Option<Vec<&Vec<Term>>> =
            r.arity.iter().map(|s| terms.get(&HybridSort::Plain(s.clone()))).collect();
        if let Some(pools) = pools {
            for args in cartesian_terms(&pools) {
                atoms.insert(Sentence::Rel { at: None, sym: r.clone(), args });
            }
        }
    }
    levels.push(atoms);
    let binders = |phi: &Sentence| -> usize { count_binders(phi) };
    for _ in 1..depth {
        let prev = levels.last().unwrap().clone();
        let mut next = prev.clone();
        for phi in &prev {
            for k in &sig.nominals {
                next.insert(Sentence::at(k.clone(), phi.clone()));
            }
            next.insert(Sentence::not(phi.clone()));
            for l in &sig.binary_modalities {
                next.insert(Sentence::Diamond(l.clone(), Box::new(phi.clone())));
            }
            if binders(phi) < quantifier_budget {
                let taken = sig.all_names();
                let z = crate::sig::fresh_name("z!p", &taken);
                next.insert(Sentence::Store(z.clone(), Box::new(phi.clone())));
                next.insert(Sentence::Exists(
                    vec![Var::nominal(z.clone())],
                    Box::new(Sentence::or(vec![phi.clone(), Sentence::Nominal(z)])),
                ));
                for s in &sig.rigid.sorts {
                    let y = crate::sig::fresh_name("y!p", &taken);
                    next.insert(Sentence::Exists(
                        vec![Var::rigid(y, s.clone())],
                        Box::new(phi.clone()),
                    ));
                }
            }
        }
        // pairwise disjunctions of atoms only, to keep the set small
        let atoms: Vec<Sentence> = levels[0].iter().cloned().collect();
        for (i, a) in atoms.iter().enumerate() {
            for b in atoms.iter().skip(i + 1) {
                next.insert(Sentence::or(vec![a.clone(), b.clone()]));
            }
        }
        levels.push(next);
    }
    let sentences = levels.pop().unwrap().into_iter().collect();
    ProbeSet { sentences, depth, quantifier_budget }
}

fn count_binders(phi: &Sentence) -> usize {
    match phi {
        Sentence::Nominal(_) | Sentence::Modal(_) | Sentence::Eq(..) | Sentence::Rel { .. } => 0,
        Sentence::At(_, p) | Sentence::Not(p) | Sentence::Diamond(_, p) => count_binders(p),
        Sentence::Or(items) => items.iter().map(count_binders).max().unwrap_or(0),
        Sentence::Store(_, p) => 1 + count_binders(p),
        Sentence::Exists(vars, p) => vars.len() + count_binders(p),
    }
}

/// Ground hybrid terms by sort, plain and `@`-prefixed alike, up to
/// the depth bound.
pub(crate) fn ground_terms(sig: &HFOLSignature, depth: usize) -> BTreeMap<HybridSort, Vec<Term>> {
    let mut by_sort: BTreeMap<HybridSort, BTreeSet<Term>> = BTreeMap::new();
    let mut forms: Vec<(Option<Name>, FuncSym, Vec<HybridSort>, HybridSort)> = Vec::new();
    for f in &sig.base.functions {
        forms.push((
            None,
            f.clone(),
            f.arity.iter().map(|s| HybridSort::Plain(s.clone())).collect(),
            HybridSort::Plain(f.result.clone()),
        ));
        if !sig.is_rigid_func(f) {
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
    for _ in 0..depth {
        let snapshot = by_sort.clone();
        for (at, sym, arg_sorts, result) in &forms {
            let pools: Vec<&BTreeSet<Term>> = match arg_sorts
                .iter()
                .map(|s| snapshot.get(s))
                .collect::<Option<Vec<_>>>()
            {
                Some(p) => p,
                None => {
                    if arg_sorts.is_empty() {
                        by_sort
                            .entry(result.clone())
                            .or_default()
                            .insert(Term { at: at.clone(), sym: sym.clone(), args: vec![] });
                    }
                    continue;
                }
            };
            let mut combos: Vec<Vec<Term>> = vec![vec![]];
            for pool in pools {
                let mut next = Vec::new();
                for prefix in &combos {
                    for item in pool.iter() {
                        let mut row = prefix.clone();
                        row.push(item.clone());
                        next.push(row);
                    }
                }
                combos = next;
            }
            for args in combos {
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

fn cartesian_terms(pools: &[&Vec<Term>]) -> Vec<Vec<Term>> {
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

/// Global-satisfaction agreement on every probe sentence; on failure
/// returns the first distinguishing sentence.
pub fn equivalent_on(
    a: &KripkeStructure,
    b: &KripkeStructure,
    probe: &ProbeSet,
) -> Result<(bool, Option<Sentence>)> {
    for phi in &probe.sentences {
        if sat_global(a, phi)? != sat_global(b, phi)? {
            return Ok((false, Some(phi.clone())));
        }
    }
    Ok((true, None))
}

/// A homomorphism of Kripke structures: a frame map plus per-world
/// sort-indexed functions, shared on rigid sorts.
#[derive(Clone, Debug)]
pub struct KripkeHomomorphism {
    pub source: KripkeStructure,
    pub target: KripkeStructure,
    pub frame_map: BTreeMap<Name, Name>,
    /// world -> sort -> element map
    pub world_maps: BTreeMap<Name, BTreeMap<Name, BTreeMap<Name, Name>>>,
}

pub fn is_homomorphism(h: &KripkeHomomorphism) -> bool {
    let src = &h.source;
    let tgt = &h.target;
    if src.sig != tgt.sig {
        return false;
    }
    let sig = &src.sig;
    for w in &src.worlds {
        if !h.frame_map.get(w).is_some_and(|v| tgt.worlds.contains(v)) {
            return false;
        }
    }
    for (k, w) in &src.nominal_interp {
        if tgt.nominal_interp.get(k) != h.frame_map.get(w) {
            return false;
        }
    }
    for (r, ws) in &src.unary_interp {
        for w in ws {
            if !tgt.unary_interp.get(r).is_some_and(|t| t.contains(&h.frame_map[w])) {
                return false;
            }
        }
    }
    for (l, pairs) in &src.binary_interp {
        for (a, b) in pairs {
            let img = (h.frame_map[a].clone(), h.frame_map[b].clone());
            if !tgt.binary_interp.get(l).is_some_and(|t| t.contains(&img)) {
                return false;
            }
        }
    }
    // rigid components shared
    let ws_list: Vec<&Name> = src.worlds.iter().collect();
    for s in &sig.rigid.sorts {
        let first = h.world_maps.get(ws_list[0]).and_then(|m| m.get(s));
        for w in &ws_list[1..] {
            if h.world_maps.get(*w).and_then(|m| m.get(s)) != first {
                return false;
            }
        }
    }
    for w in &src.worlds {
        let v = &h.frame_map[w];
        let sm = match h.world_maps.get(w) {
            Some(m) => m,
            None => return false,
        };
        let sws = &src.world_models[w];
        let tws = &tgt.world_models[v];
        let map_elem = |s: &Name, e: &Name| -> Option<Name> { sm.get(s)?.get(e).cloned() };
        for (s, carrier) in &sws.carriers {
            for e in carrier {
                match map_elem(s, e) {
                    Some(img) if tws.carriers.get(s).is_some_and(|c| c.contains(&img)) => {}
                    _ => return false,
                }
            }
        }
        for (f, table) in &sws.functions {
            for (args, val) in table {
                let imgs: Option<Vec<Name>> = args
                    .iter()
                    .zip(f.arity.iter())
                    .map(|(e, s)| map_elem(s, e))
                    .collect();
                let (imgs, val_img) = match (imgs, map_elem(&f.result, val)) {
                    (Some(a), Some(v)) => (a, v),
                    _ => return false,
                };
                if tws.functions.get(f).and_then(|t| t.get(&imgs)) != Some(&val_img) {
                    return false;
                }
            }
        }
        for (r, rows) in &sws.relations {
            for row in rows {
                let imgs: Option<Vec<Name>> = row
                    .iter()
                    .zip(r.arity.iter())
                    .map(|(e, s)| map_elem(s, e))
                    .collect();
                match imgs {
                    Some(imgs) => {
                        if !tws.relations.get(r).is_some_and(|t| t.contains(&imgs)) {
                            return false;
                        }
                    }
                    None => return false,
                }
            }
        }
    }
    true
}

/// Homomorphism conditions plus bijectivity of the frame map and of
/// every sort component.
pub fn is_isomorphism(h: &KripkeHomomorphism) -> bool {
    if !is_homomorphism(h) {
        return false;
    }
    let src = &h.source;
    let tgt = &h.target;
    let frame_img: BTreeSet<&Name> = h.frame_map.values().collect();
    if h.frame_map.len() != src.worlds.len() || frame_img.len() != tgt.worlds.len() {
        return false;
    }
    for w in &src.worlds {
        let v = &h.frame_map[w];
        let sm = &h.world_maps[w];
        for (s, carrier) in &src.world_models[w].carriers {
            let m = match sm.get(s) {
                Some(m) => m,
                None => return false,
            };
            let img: BTreeSet<&Name> = carrier.iter().filter_map(|e| m.get(e)).collect();
            let tgt_carrier = &tgt.world_models[v].carriers[s];
            if img.len() != carrier.len() || img.len() != tgt_carrier.len() {
                return false;
            }
        }
    }
    // relation and modality preservation must be exact for isomorphisms
    let inverse = invert(h);
    match inverse {
        Some(inv) => is_homomorphism(&inv),
        None => false,
    }
}

fn invert(h: &KripkeHomomorphism) -> Option<KripkeHomomorphism> {
    let mut frame_map = BTreeMap::new();
    for (w, v) in &h.frame_map {
        if frame_map.insert(v.clone(), w.clone()).is_some() {
            return None;
        }
    }
    let mut world_maps = BTreeMap::new();
    for (w, sm) in &h.world_maps {
        let v = h.frame_map.get(w)?;
        let mut out_sm = BTreeMap::new();
        for (s, m) in sm {
            let mut inv = BTreeMap::new();
            for (e, img) in m {
                if inv.insert(img.clone(), e.clone()).is_some() {
                    return None;
                }
            }
            out_sm.insert(s.clone(), inv);
        }
        world_maps.insert(v.clone(), out_sm);
    }
    Some(KripkeHomomorphism {
        source: h.target.clone(),
        target: h.source.clone(),
        frame_map,
        world_maps,
    })
}

/// Verdict of the bounded consequence search.
#[derive(Clone, Debug)]
pub enum Verdict {
    HoldsUpTo { max_worlds: usize, max_carrier: usize, models_checked: usize },
    Countermodel(Box<KripkeStructure>),
}

/// Exhaustive model enumeration up to the bounds, modulo isomorphism
/// via canonical renaming; returns the first countermodel in
/// enumeration order.
pub fn consequence_bounded(
    sig: &HFOLSignature,
    premises: &[Sentence],
    conclusion: &Sentence,
    max_worlds: usize,
    max_carrier: usize,
) -> Result<Verdict> {
    let mut checked = 0usize;
    let mut seen: BTreeSet<String> = BTreeSet::new();
    for model in enumerate_models(sig, max_worlds, max_carrier) {
        let key = canonical_key(&model);
        if !seen.insert(key) {
            continue;
        }
        checked += 1;
        if sat_global_all(&model, premises)? && !sat_global(&model, conclusion)? {
            return Ok(Verdict::Countermodel(Box::new(model)));
        }
    }
    Ok(Verdict::HoldsUpTo { max_worlds, max_carrier, models_checked: checked })
}

/// A canonical string invariant under world and element renaming:
/// minimum serialized form over all world permutations and per-sort
/// element permutations.
pub fn canonical_key(model: &KripkeStructure) -> String {
    let worlds: Vec<Name> = model.worlds.iter().cloned().collect();
    let mut best: Option<String> = None;
    for wperm in permutations(worlds.len()) {
        let wmap: BTreeMap<&Name, usize> =
            worlds.iter().enumerate().map(|(i, w)| (w, wperm[i])).collect();
        // canonical element names: per (world, sort) sorted order;
        // rigid sorts use the shared carrier once
        let mut key = String::new();
        let elem_name = |w: &Name, s: &Name, e: &Name| -> String {
            let site = if model.sig.is_rigid_sort(s) {
                model.worlds.iter().next().unwrap()
            } else {
                w
            };
            let carrier = &model.world_models[site].carriers[s];
            let idx = carrier.iter().position(|x| x == e).unwrap();
            format!("{s}#{idx}")
        };
        for (k, w) in &model.nominal_interp {
            key.push_str(&format!("n{k}={};", wmap[w]));
        }
        for (r, ws) in &model.unary_interp {
            let mut idxs: Vec<usize> = ws.iter().map(|w| wmap[w]).collect();
            idxs.sort_unstable();
            key.push_str(&format!("u{r}={idxs:?};"));
        }
        for (l, pairs) in &model.binary_interp {
            let mut idxs: Vec<(usize, usize)> =
                pairs.iter().map(|(a, b)| (wmap[a], wmap[b])).collect();
            idxs.sort_unstable();
            key.push_str(&format!("b{l}={idxs:?};"));
        }
        let mut rows: Vec<(usize, String)> = Vec::new();
        for (w, ws) in &model.world_models {
            let mut s = String::new();
            for (sort, carrier) in &ws.carriers {
                s.push_str(&format!("|{sort}|={};", carrier.len()));
            }
            for (f, table) in &ws.functions {
                let mut entries: Vec<String> = table
                    .iter()
                    .map(|(args, val)| {
                        let a: Vec<String> = args
                            .iter()
                            .zip(f.arity.iter())
                            .map(|(e, srt)| elem_name(w, srt, e))
                            .collect();
                        format!("{a:?}->{}", elem_name(w, &f.result, val))
                    })
                    .collect();
                entries.sort();
                s.push_str(&format!("{f}={entries:?};"));
            }
            for (r, rel) in &ws.relations {
                let mut entries: Vec<String> = rel
                    .iter()
                    .map(|row| {
                        let a: Vec<String> = row
                            .iter()
                            .zip(r.arity.iter())
                            .map(|(e, srt)| elem_name(w, srt, e))
                            .collect();
                        format!("{a:?}")
                    })
                    .collect();
                entries.sort();
                s.push_str(&format!("{r}={entries:?};"));
            }
            rows.push((wmap[w], s));
        }
        rows.sort();
        for (i, s) in rows {
            key.push_str(&format!("w{i}:{s}"));
        }
        if best.as_ref().is_none_or(|b| key < *b) {
            best = Some(key);
        }
    }
    best.unwrap_or_default()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for i in 0..n {
            let mut p = rest.clone();
            p.insert(i, n - 1);
            out.push(p);
        }
    }
    out
}

/// All models over the signature with at most the given numbers of
/// worlds and elements per sort, in a fixed deterministic order.
pub fn enumerate_models(
    sig: &HFOLSignature,
    max_worlds: usize,
    max_carrier: usize,
) -> Vec<KripkeStructure> {
    let mut out = Vec::new();
    for n in 1..=max_worlds.max(1) {
        let worlds: Vec<Name> = (1..=n).map(|i| format!("w{i}")).collect();
        let world_set: BTreeSet<Name> = worlds.iter().cloned().collect();
        // nominal interpretations
        let mut nominal_choices: Vec<BTreeMap<Name, Name>> = vec![BTreeMap::new()];
        for k in &sig.nominals {
            let mut next = Vec::new();
            for m in &nominal_choices {
                for w in &worlds {
                    let mut m2 = m.clone();
                    m2.insert(k.clone(), w.clone());
                    next.push(m2);
                }
            }
            nominal_choices = next;
        }
        let mut unary_choices: Vec<BTreeMap<Name, BTreeSet<Name>>> = vec![BTreeMap::new()];
        for r in &sig.unary_modalities {
            let subsets = subsets_of(&worlds);
            let mut next = Vec::new();
            for m in &unary_choices {
                for s in &subsets {
                    let mut m2 = m.clone();
                    m2.insert(r.clone(), s.clone());
                    next.push(m2);
                }
            }
            unary_choices = next;
        }
        let mut binary_choices: Vec<BTreeMap<Name, BTreeSet<(Name, Name)>>> = vec![BTreeMap::new()];
        for l in &sig.binary_modalities {
            let pairs: Vec<(Name, Name)> = worlds
                .iter()
                .flat_map(|a| worlds.iter().map(move |b| (a.clone(), b.clone())))
                .collect();
            let subsets = subsets_of(&pairs);
            let mut next = Vec::new();
            for m in &binary_choices {
                for s in &subsets {
                    let mut m2 = m.clone();
                    m2.insert(l.clone(), s.clone());
                    next.push(m2);
                }
            }
            binary_choices = next;
        }
        // carrier sizes: one per rigid sort, one per (flexible sort, world)
        let rigid_sorts: Vec<Name> = sig.rigid.sorts.iter().cloned().collect();
        let flex_sorts: Vec<Name> = sig.flexible_sorts().into_iter().collect();
        let mut size_slots: Vec<(Name, Option<Name>)> = Vec::new();
        for s in &rigid_sorts {
            size_slots.push((s.clone(), None));
        }
        for s in &flex_sorts {
            for w in &worlds {
                size_slots.push((s.clone(), Some(w.clone())));
            }
        }
        let mut size_choices: Vec<Vec<usize>> = vec![vec![]];
        for _ in &size_slots {
            let mut next = Vec::new();
            for v in &size_choices {
                for sz in 1..=max_carrier.max(1) {
                    let mut v2 = v.clone();
                    v2.push(sz);
                    next.push(v2);
                }
            }
            size_choices = next;
        }
        for sizes in size_choices {
            // carriers per world
            let mut carriers: BTreeMap<Name, BTreeMap<Name, BTreeSet<Name>>> = BTreeMap::new();
            for w in &worlds {
                carriers.insert(w.clone(), BTreeMap::new());
            }
            for (slot, sz) in size_slots.iter().zip(sizes.iter()) {
                let elems: BTreeSet<Name> = (1..=*sz).map(|i| format!("e{i}")).collect();
                match &slot.1 {
                    None => {
                        for w in &worlds {
                            carriers.get_mut(w).unwrap().insert(slot.0.clone(), elems.clone());
                        }
                    }
                    Some(w) => {
                        carriers.get_mut(w).unwrap().insert(slot.0.clone(), elems.clone());
                    }
                }
            }
            // function interpretation slots: rigid functions once,
            // flexible per world
            let funcs: Vec<&FuncSym> = sig.base.functions.iter().collect();
            let rels: Vec<&RelSym> = sig.base.relations.iter().collect();
            let mut interp_sets: Vec<BTreeMap<Name, WorldStructure>> = vec![worlds
                .iter()
                .map(|w| {
                    (
                        w.clone(),
                        WorldStructure {
                            carriers: carriers[w].clone(),
                            functions: BTreeMap::new(),
                            relations: BTreeMap::new(),
                        },
                    )
                })
                .collect()];
            let mut ok = true;
            for f in &funcs {
                let rigid = sig.is_rigid_func(f);
                let sites: Vec<&Name> =
                    if rigid { vec![&worlds[0]] } else { worlds.iter().collect() };
                for site in sites {
                    let ws_dummy = WorldStructure {
                        carriers: carriers[site].clone(),
                        functions: BTreeMap::new(),
                        relations: BTreeMap::new(),
                    };
                    let domain: Vec<Vec<Name>> = tuples(&ws_dummy, &f.arity).into_iter().collect();
                    let codomain: Vec<Name> = match carriers[site].get(&f.result) {
                        Some(c) => c.iter().cloned().collect(),
                        None => {
                            ok = false;
                            break;
                        }
                    };
                    let tables = all_tables(&domain, &codomain);
                    let mut next = Vec::new();
                    for partial in &interp_sets {
                        for table in &tables {
                            let mut p2 = partial.clone();
                            if rigid {
                                for w in &worlds {
                                    p2.get_mut(w)
                                        .unwrap()
                                        .functions
                                        .insert((*f).clone(), table.clone());
                                }
                            } else {
                                p2.get_mut(site).unwrap().functions.insert((*f).clone(), table.clone());
                            }
                            next.push(p2);
                        }
                    }
                    interp_sets = next;
                }
                if !ok {
                    break;
                }
            }
            if !ok {
                continue;
            }
            for r in &rels {
                let rigid = sig.is_rigid_rel(r);
                let sites: Vec<&Name> =
                    if rigid { vec![&worlds[0]] } else { worlds.iter().collect() };
                for site in sites {
                    let ws_dummy = WorldStructure {
                        carriers: carriers[site].clone(),
                        functions: BTreeMap::new(),
                        relations: BTreeMap::new(),
                    };
                    let domain: Vec<Vec<Name>> = tuples(&ws_dummy, &r.arity).into_iter().collect();
                    let subsets = subsets_of(&domain);
                    let mut next = Vec::new();
                    for partial in &interp_sets {
                        for rows in &subsets {
                            let mut p2 = partial.clone();
                            if rigid {
                                for w in &worlds {
                                    p2.get_mut(w).unwrap().relations.insert((*r).clone(), rows.clone());
                                }
                            } else {
                                p2.get_mut(site).unwrap().relations.insert((*r).clone(), rows.clone());
                            }
                            next.push(p2);
                        }
                    }
                    interp_sets = next;
                }
            }
            for nom in &nominal_choices {
                for un in &unary_choices {
                    for bin in &binary_choices {
                        for interp in &interp_sets {
                            out.push(KripkeStructure {
                                sig: sig.clone(),
                                worlds: world_set.clone(),
                                nominal_interp: nom.clone(),
                                unary_interp: un.clone(),
                                binary_interp: bin.clone(),
                                world_models: interp.clone(),
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

fn subsets_of<T: Clone + Ord>(items: &[T]) -> Vec<BTreeSet<T>> {
    let mut out: Vec<BTreeSet<T>> = vec![BTreeSet::new()];
    for item in items {
        let mut next = Vec::new();
        for s in &out {
            next.push(s.clone());
            let mut s2 = s.clone();
            s2.insert(item.clone());
            next.push(s2);
        }
        out = next;
    }
    out
}

fn all_tables(domain: &[Vec<Name>], codomain: &[Name]) -> Vec<BTreeMap<Vec<Name>, Name>> {
    let mut out: Vec<BTreeMap<Vec<Name>, Name>> = vec![BTreeMap::new()];
    for args in domain {
        let mut next = Vec::new();
        for t in &out {
            for v in codomain {
                let mut t2 = t.clone();
                t2.insert(args.clone(), v.clone());
                next.push(t2);
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sig::compose;
    use crate::squares::fixtures;
    use crate::syntax::{desugar, wellformed, Sugared};

    #[test]
    fn counter1_model_validates() {
        let m = fixtures::counter1_w1m1();
        assert!(validate_model(&m).is_empty(), "{:?}", validate_model(&m));
    }

    #[test]
    fn rigid_sharing_violation_detected() {
        let mut m = fixtures::counter2_w1m1_over_delta1();
        // s is rigid in counter-2's Delta1; perturb one world's carrier
        let w = m.worlds.iter().next().unwrap().clone();
        m.worlds.insert("w2".into());
        let mut ws = m.world_models[&w].clone();
        ws.carriers.get_mut("s").unwrap().insert("extra".into());
        // also make the function total over the enlarged carrier
        m.world_models.insert("w2".into(), ws);
        let diags = validate_model(&m);
        assert!(diags.iter().any(|d| d.contains("rigid sharing violated")), "{diags:?}");
    }

    #[test]
    fn counter1_reduct_carries_everything_to_de() {
        let span = fixtures::counter1();
        let m = fixtures::counter1_w1m1();
        let red = reduct(&span.chi1, &m).unwrap();
        assert!(validate_model(&red).is_empty());
        for s in ["s1", "s2", "s3"] {
            let carrier = &red.world_models["w"].carriers[s];
            assert_eq!(carrier.len(), 2);
        }
        let c1 = Term::constant(FuncSym::constant("c1", "s1"));
        let c3 = Term::constant(FuncSym::constant("c3", "s3"));
        assert_eq!(eval_term(&red, &"w".into(), &c1).unwrap(), "d");
        assert_eq!(eval_term(&red, &"w".into(), &c3).unwrap(), "d");
    }

    #[test]
    fn reduct_functor_law_on_fixture() {
        let span = fixtures::counter1();
        let po = crate::sig::pushout(&span.chi1, &span.chi2).unwrap();
        let chain = compose(&span.chi1, &po.left_leg).unwrap();
        let m = fixtures::trivial_model(&po.vertex);
        let one = reduct(&chain, &m).unwrap();
        let two = reduct(&span.chi1, &reduct(&po.left_leg, &m).unwrap()).unwrap();
        assert_eq!(one, two);
    }

    #[test]
    fn counter1_phi1_holds() {
        let m = fixtures::counter1_w1m1();
        let phi1 = fixtures::counter1_phi1();
        assert!(sat_global(&m, &phi1).unwrap());
    }

    #[test]
    fn empty_disjunction_false_everywhere() {
        let m = fixtures::counter1_w1m1();
        assert!(!sat_local(&m, &"w".into(), &Sentence::falsity()).unwrap());
    }

    #[test]
    fn counter2_forall_holds() {
        let m = fixtures::counter2_w1m1_over_delta1();
        let phi = desugar(&Sugared::Forall(
            vec![Var::rigid("y", "s")],
            Box::new(Sugared::Eq(
                Term::constant(FuncSym::constant("c", "s")),
                Term::constant(FuncSym::constant("y", "s")),
            )),
        ));
        assert!(wellformed(&m.sig, &phi).is_empty());
        assert!(sat_global(&m, &phi).unwrap());
    }

    #[test]
    fn expansion_count_formula() {
        let m = fixtures::counter2_w1m1_over_delta1();
        // one nominal variable over a 1-world model
        let ext = extend(&m.sig, &[Var::nominal("z!t")]).unwrap();
        assert_eq!(expansions(&m, &ext).unwrap().len(), 1);
        // two rigid variables over carrier of size 1
        let ext2 = extend(&m.sig, &[Var::rigid("y1!t", "s"), Var::rigid("y2!t", "s")]).unwrap();
        assert_eq!(expansions(&m, &ext2).unwrap().len(), 1);
    }

    #[test]
    fn expansion_count_with_larger_carrier() {
        let span = fixtures::counter3();
        let m = fixtures::counter3_z2_model(&span.chi1.target);
        // Nat is rigid in Delta1 with carrier {z0, z1}; two worlds
        let ext = extend(
            &m.sig,
            &[Var::nominal("z!t"), Var::rigid("y1!t", "Nat"), Var::rigid("y2!t", "Nat")],
        )
        .unwrap();
        assert_eq!(expansions(&m, &ext).unwrap().len(), 2 * 2 * 2);
    }

    #[test]
    fn store_binds_current_world() {
        let span = fixtures::counter3();
        let m = fixtures::counter3_z2_model(&span.chi1.target);
        // down z . z holds everywhere
        let phi = Sentence::Store("z!t".into(), Box::new(Sentence::Nominal("z!t".into())));
        assert!(sat_global(&m, &phi).unwrap());
    }

    #[test]
    fn counter3_axioms_hold_and_fail_after_surgery() {
        let span = fixtures::counter3();
        let m = fixtures::counter3_z2_model(&span.chi1.target);
        for phi in fixtures::counter3_phi1() {
            assert!(wellformed(&m.sig, &phi).is_empty(), "{:?}", wellformed(&m.sig, &phi));
            assert!(sat_global(&m, &phi).unwrap());
        }
        let red = reduct(&span.chi1, &m).unwrap();
        let swapped = fixtures::counter3_add_two(&red);
        let w2m2 = fixtures::counter3_w2m2(&swapped, &span.chi2.target);
        let inv = fixtures::counter3_involution();
        assert!(!sat_global(&w2m2, &inv).unwrap());
    }

    #[test]
    fn reachability_flags_added_element() {
        let span = fixtures::counter2();
        let m1 = fixtures::counter2_w1m1_over_delta1();
        let red = reduct(&span.chi1, &m1).unwrap();
        let rep = reachability_report(&red, 3).unwrap();
        assert!(rep.reachable_model);
        let plan = SwapPlan::default().add_element("w", "s", "d");
        let swapped = swap_unreachable(&red, &plan, 3).unwrap();
        let rep2 = reachability_report(&swapped, 3).unwrap();
        assert_eq!(
            rep2.unreachable_elements["w"]["s"],
            BTreeSet::from(["d".to_string()])
        );
    }

    #[test]
    fn swap_rejects_rigid_and_reachable() {
        let m = fixtures::counter2_w1m1_over_delta1();
        // s is rigid in Delta1
        let plan = SwapPlan::default().add_element("w", "s", "d");
        assert!(swap_unreachable(&m, &plan, 3).is_err());
    }

    #[test]
    fn unnamed_worlds_are_unreachable() {
        let span = fixtures::counter3();
        let mut m = fixtures::counter3_z2_model(&span.chi1.target);
        m.worlds.insert("w3".into());
        m.world_models.insert("w3".into(), m.world_models["w1"].clone());
        let rep = reachability_report(&m, 2).unwrap();
        assert_eq!(rep.unreachable_worlds, BTreeSet::from(["w3".to_string()]));
        assert!(!rep.reachable_model);
    }

    #[test]
    fn probe_sets_basics() {
        let span = fixtures::counter2();
        let delta = &span.chi1.source;
        let p0 = probe_sentences(delta, 0, 1);
        assert!(p0.sentences.is_empty());
        let p1 = probe_sentences(delta, 1, 1);
        assert!(p1.sentences.contains(&Sentence::Nominal("k".into())));
        let c = Term::constant(FuncSym::constant("c", "s"));
        assert!(p1.sentences.contains(&Sentence::Eq(c.clone(), c)));
        let p3 = probe_sentences(delta, 3, 1);
        let has = |pred: &dyn Fn(&Sentence) -> bool| p3.sentences.iter().any(pred);
        assert!(has(&|s| matches!(s, Sentence::Not(_))));
        assert!(has(&|s| matches!(s, Sentence::At(_, _))));
        assert!(has(&|s| matches!(s, Sentence::Store(_, _))));
        assert!(has(&|s| matches!(s, Sentence::Exists(_, _))));
        assert!(has(&|s| matches!(s, Sentence::Or(items) if !items.is_empty())));
    }

    #[test]
    fn model_equivalent_to_itself() {
        let m = fixtures::counter1_w1m1();
        let probe = probe_sentences(&m.sig, 2, 1);
        let (eq, _) = equivalent_on(&m, &m, &probe).unwrap();
        assert!(eq);
    }

    #[test]
    fn counter1_isomorphism_with_swap() {
        let span = fixtures::counter1();
        let m1 = fixtures::counter1_w1m1();
        let red = reduct(&span.chi1, &m1).unwrap();
        let vn = fixtures::counter1_vn(&red);
        let h = fixtures::counter1_iso(&vn, &red);
        assert!(is_isomorphism(&h));
        // removing the swap on s3 breaks c3 preservation
        let mut h2 = h.clone();
        let m = h2.world_maps.get_mut("w").unwrap().get_mut("s3").unwrap();
        m.insert("d".into(), "d".into());
        m.insert("e".into(), "e".into());
        assert!(!is_homomorphism(&h2));
    }

    #[test]
    fn identity_homomorphism_is_iso() {
        let m = fixtures::counter1_w1m1();
        let h = identity_homomorphism(&m);
        assert!(is_isomorphism(&h));
    }

    pub(crate) fn identity_homomorphism(m: &KripkeStructure) -> KripkeHomomorphism {
        let frame_map = m.worlds.iter().map(|w| (w.clone(), w.clone())).collect();
        let world_maps = m
            .worlds
            .iter()
            .map(|w| {
                let sm = m.world_models[w]
                    .carriers
                    .iter()
                    .map(|(s, c)| {
                        (s.clone(), c.iter().map(|e| (e.clone(), e.clone())).collect())
                    })
                    .collect();
                (w.clone(), sm)
            })
            .collect();
        KripkeHomomorphism { source: m.clone(), target: m.clone(), frame_map, world_maps }
    }

    #[test]
    fn trivial_consequence_holds() {
        let span = fixtures::counter2();
        let delta = &span.chi1.source;
        let phi = Sentence::Nominal("k".into());
        match consequence_bounded(delta, &[phi.clone()], &phi, 2, 2).unwrap() {
            Verdict::HoldsUpTo { models_checked, .. } => assert!(models_checked > 0),
            Verdict::Countermodel(_) => panic!("unexpected countermodel"),
        }
    }

    #[test]
    fn nominal_not_valid_without_premises() {
        let mut sig = HFOLSignature::default();
        sig.nominals.insert("k".into());
        match consequence_bounded(&sig, &[], &Sentence::Nominal("k".into()), 2, 1).unwrap() {
            Verdict::Countermodel(m) => {
                let w = m.nominal_interp["k"].clone();
                assert!(m.worlds.iter().any(|v| *v != w));
            }
            Verdict::HoldsUpTo { .. } => panic!("expected countermodel"),
        }
    }

    #[test]
    fn counter2_entailment_over_vertex() {
        let span = fixtures::counter2();
        let po = crate::sig::pushout(&span.chi1, &span.chi2).unwrap();
        let phi1 = desugar(&Sugared::Forall(
            vec![Var::rigid("y", "s")],
            Box::new(Sugared::Eq(
                Term::constant(FuncSym::constant("c", "s")),
                Term::constant(FuncSym::constant("y", "s")),
            )),
        ));
        let phi2 = Sentence::Eq(
            Term::constant(FuncSym::constant("c2", "s")),
            Term::constant(FuncSym::constant("c", "s")),
        );
        assert!(wellformed(&po.vertex, &phi1).is_empty());
        assert!(wellformed(&po.vertex, &phi2).is_empty());
        match consequence_bounded(&po.vertex, &[phi1], &phi2, 1, 2).unwrap() {
            Verdict::HoldsUpTo { .. } => {}
            Verdict::Countermodel(m) => panic!("unexpected countermodel {m:?}"),
        }
    }

    #[test]
    fn satisfaction_condition_on_counter1() {
        let span = fixtures::counter1();
        let m1 = fixtures::counter1_w1m1();
        let red = reduct(&span.chi1, &m1).unwrap();
        let probe = probe_sentences(&span.chi1.source, 2, 1);
        for phi in &probe.sentences {
            let t = crate::syntax::translate(&span.chi1, phi).unwrap();
            assert_eq!(
                sat_global(&m1, &t).unwrap(),
                sat_global(&red, phi).unwrap(),
                "satisfaction condition failed on {phi:?}"
            );
        }
    }

    #[test]
    fn semantic_opposites_laws_on_fixture() {
        let span = fixtures::counter1();
        let m1 = fixtures::counter1_w1m1();
        let red = reduct(&span.chi1, &m1).unwrap();
        let probe = probe_sentences(&span.chi1.source, 2, 1);
        for psi in probe.sentences.iter().take(40) {
            let plus = crate::syntax::semantic_opposite(&red.sig, psi, true);
            let minus = crate::syntax::semantic_opposite(&red.sig, psi, false);
            let holds = sat_global(&red, psi).unwrap();
            assert_eq!(holds, sat_global(&red, &plus).unwrap());
            assert_eq!(!holds, sat_global(&red, &minus).unwrap());
            let w = red.worlds.iter().next().unwrap();
            assert_eq!(holds, sat_local(&red, w, &plus).unwrap());
        }
    }
}
