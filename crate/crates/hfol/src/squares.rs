//! Span and square analysis: the flexible-symbol protection criteria,
//! the constructive lifting of equivalent expansions, model
//! amalgamation over pushout squares, and the scripted counterexample
//! verifier.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::semantics::{
    equivalent_on, eval_term, probe_sentences, reachability_report, reduct, sat_global,
    validate_model, KripkeStructure, WorldStructure,
};
use crate::sig::{
    extend, fresh_name, FuncSym, HFOLSignature, Name, Pushout, RelSym, SignatureExtension,
    SignatureMorphism, Var, VarSort,
};
use crate::syntax::{rigid_terms_by_sort, HybridSort, Sentence, Term};
use crate::{Error, Result};

/// A span of signature morphisms with optional presentations.
#[derive(Clone, Debug, PartialEq)]
pub struct Span {
    pub chi1: SignatureMorphism,
    pub chi2: SignatureMorphism,
    pub phi: Vec<Sentence>,
    pub phi1: Vec<Sentence>,
    pub phi2: Vec<Sentence>,
}

/// True iff the morphism keeps flexible sorts flexible and adds no
/// new flexible operations on old flexible sorts. On failure the
/// witness names the offending symbol.
pub fn preserves_flexible(chi: &SignatureMorphism) -> (bool, Option<String>) {
    for s in chi.source.flexible_sorts() {
        let img = chi.apply_sort(&s);
        if !chi.target.is_flexible_sort(&img) {
            return (false, Some(format!("flexible sort {s} maps to non-flexible sort {img}")));
        }
    }
    let old_flex_images: BTreeSet<Name> =
        chi.source.flexible_sorts().iter().map(|s| chi.apply_sort(s)).collect();
    for f1 in chi.target.flexible_functions() {
        if !old_flex_images.contains(&f1.result) {
            continue;
        }
        let covered = chi
            .source
            .flexible_functions()
            .iter()
            .any(|f| chi.apply_func(f) == f1);
        if !covered {
            return (
                false,
                Some(format!("new flexible operation {f1} on an old flexible sort")),
            );
        }
    }
    (true, None)
}

/// `preserves_flexible` plus injectivity on flexible sorts and on
/// flexible function/relation symbols with a flexible sort in the
/// arity.
pub fn protects_flexible(chi: &SignatureMorphism) -> (bool, Option<String>) {
    let (ok, witness) = preserves_flexible(chi);
    if !ok {
        return (ok, witness);
    }
    let flex_sorts: Vec<Name> = chi.source.flexible_sorts().into_iter().collect();
    for (i, a) in flex_sorts.iter().enumerate() {
        for b in flex_sorts.iter().skip(i + 1) {
            if chi.apply_sort(a) == chi.apply_sort(b) {
                return (false, Some(format!("flexible sorts {a} and {b} merged")));
            }
        }
    }
    let touches_flex =
        |arity: &[Name]| arity.iter().any(|s| chi.source.is_flexible_sort(s));
    let funcs: Vec<FuncSym> = chi
        .source
        .flexible_functions()
        .into_iter()
        .filter(|f| touches_flex(&f.arity))
        .collect();
    for (i, a) in funcs.iter().enumerate() {
        for b in funcs.iter().skip(i + 1) {
            if chi.apply_func(a) == chi.apply_func(b) {
                return (false, Some(format!("flexible functions {a} and {b} merged")));
            }
        }
    }
    let rels: Vec<RelSym> = chi
        .source
        .flexible_relations()
        .into_iter()
        .filter(|r| touches_flex(&r.arity))
        .collect();
    for (i, a) in rels.iter().enumerate() {
        for b in rels.iter().skip(i + 1) {
            if chi.apply_rel(a) == chi.apply_rel(b) {
                return (false, Some(format!("flexible relations {a} and {b} merged")));
            }
        }
    }
    (true, None)
}

/// Analysis of one leg of a span.
#[derive(Clone, Debug, Serialize)]
pub struct LegReport {
    pub injective_on_sorts: bool,
    pub injective_on_nominals: bool,
    pub preserves_flexible: bool,
    pub preserves_witness: Option<String>,
    pub protects_flexible: bool,
    pub protects_witness: Option<String>,
    /// injectivity on sorts and nominals plus protection
    pub hypotheses_hold: bool,
}

fn analyze_leg(chi: &SignatureMorphism) -> LegReport {
    let (pres, pres_w) = preserves_flexible(chi);
    let (prot, prot_w) = protects_flexible(chi);
    let inj_s = chi.is_injective_on_sorts();
    let inj_n = chi.is_injective_on_nominals();
    LegReport {
        injective_on_sorts: inj_s,
        injective_on_nominals: inj_n,
        preserves_flexible: pres,
        preserves_witness: pres_w,
        protects_flexible: prot,
        protects_witness: prot_w,
        hypotheses_hold: inj_s && inj_n && prot,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RobinsonReport {
    pub leg1: LegReport,
    pub leg2: LegReport,
    /// at least one leg satisfies the consistency-theorem hypotheses
    pub hypotheses_hold: bool,
}

pub fn analyze_span(span: &Span) -> RobinsonReport {
    let leg1 = analyze_leg(&span.chi1);
    let leg2 = analyze_leg(&span.chi2);
    let hypotheses_hold = leg1.hypotheses_hold || leg2.hypotheses_hold;
    RobinsonReport { leg1, leg2, hypotheses_hold }
}

/// The bijection built in the first step of the lifting construction:
/// a frame bijection plus per-world, per-sort element bijections, all
/// read off term denotations.
struct Lift {
    frame: BTreeMap<Name, Name>,
    frame_inv: BTreeMap<Name, Name>,
    /// (source world, source sort) -> element map into the rebuilt carrier
    elems: BTreeMap<(Name, Name), BTreeMap<Name, Name>>,
}

impl Lift {
    fn map(&self, w: &Name, s: &Name, e: &Name) -> Result<Name> {
        self.elems
            .get(&(w.clone(), s.clone()))
            .and_then(|m| m.get(e))
            .cloned()
            .ok_or_else(|| Error::Construction(format!("h undefined at {e} of sort {s} in {w}")))
    }

    fn unmap(&self, w: &Name, s: &Name, e: &Name) -> Result<Name> {
        self.elems
            .get(&(w.clone(), s.clone()))
            .and_then(|m| m.iter().find(|(_, v)| *v == e).map(|(k, _)| k.clone()))
            .ok_or_else(|| Error::Construction(format!("h not surjective at {e} of sort {s}")))
    }
}

/// Computes the reduct `C` of an extension `C1` across `chi` and the
/// extension `chi^C : Delta(C) -> Delta1(C1)`.
pub fn reduct_extension(
    chi: &SignatureMorphism,
    c1: &SignatureExtension,
) -> Result<(SignatureExtension, SignatureMorphism)> {
    if c1.base != chi.target {
        return Err(Error::Construction(
            "constant extension is not over the morphism target".into(),
        ));
    }
    let mut c_vars = Vec::new();
    for v in &c1.added {
        match &v.sort {
            VarSort::Nominal => c_vars.push(Var::nominal(v.name.clone())),
            VarSort::Rigid(s1) => {
                if let Some(s) =
                    chi.source.base.sorts.iter().find(|s| chi.apply_sort(s) == *s1)
                {
                    c_vars.push(Var::rigid(v.name.clone(), s.clone()));
                }
            }
        }
    }
    let ext = extend(&chi.source, &c_vars)?;
    let mut chi_c = chi.clone();
    chi_c.source = ext.extended.clone();
    chi_c.target = c1.extended.clone();
    for v in &c_vars {
        match &v.sort {
            VarSort::Nominal => {
                chi_c.nominal_map.insert(v.name.clone(), v.name.clone());
            }
            VarSort::Rigid(s) => {
                chi_c
                    .function_map
                    .insert(FuncSym::constant(v.name.clone(), s.clone()), v.name.clone());
            }
        }
    }
    Ok((ext, chi_c))
}

/// The lifting construction: given `chi : Delta -> Delta1` injective
/// on sorts and nominals and protecting flexible symbols, a constant
/// extension `C1` of `Delta1`, a `Delta1(C1)`-structure reachable by
/// its constants and a `Delta(C)`-structure reachable by the reduct
/// constants whose theories agree, produces an expansion of the
/// latter whose `chi^C`-reduct is exact and which matches the former
/// on probe sentences.
pub fn lift_expansion(
    chi: &SignatureMorphism,
    c1: &SignatureExtension,
    v1n1: &KripkeStructure,
    wm: &KripkeStructure,
    depth: usize,
) -> Result<KripkeStructure> {
    if !chi.is_injective_on_sorts() || !chi.is_injective_on_nominals() {
        return Err(Error::Construction(
            "lifting requires a morphism injective on sorts and nominals".into(),
        ));
    }
    if let (false, w) = protects_flexible(chi) {
        return Err(Error::Construction(format!(
            "lifting requires protection of flexible symbols: {}",
            w.unwrap_or_default()
        )));
    }
    let (ext_c, chi_c) = reduct_extension(chi, c1)?;
    if v1n1.sig != c1.extended {
        return Err(Error::Construction("structure is not over Delta1(C1)".into()));
    }
    if wm.sig != ext_c.extended {
        return Err(Error::Construction("structure is not over Delta(C)".into()));
    }
    let rep_v1 = reachability_report(v1n1, depth)?;
    if !rep_v1.reachable_model {
        return Err(Error::Construction("Delta1(C1)-structure is not reachable".into()));
    }
    let rep_wm = reachability_report(wm, depth)?;
    if !rep_wm.reachable_model {
        return Err(Error::Construction("Delta(C)-structure is not reachable".into()));
    }
    let vn = reduct(&chi_c, v1n1)?;
    let rep_vn = reachability_report(&vn, depth)?;

    let sig_c = &ext_c.extended; // Delta(C)
    let sig1_c1 = &c1.extended; // Delta1(C1)

    // step 1: h as a bijection, read off nominal and term denotations
    let mut frame: BTreeMap<Name, Name> = BTreeMap::new();
    for k in &sig_c.nominals {
        let w = wm.world_of(k)?.clone();
        let v = vn.world_of(k)?.clone();
        if let Some(prev) = frame.insert(w.clone(), v.clone()) {
            if prev != v {
                return Err(Error::Construction(format!(
                    "h ill-defined on worlds: {w} maps to both {prev} and {v}"
                )));
            }
        }
    }
    if frame.len() != wm.worlds.len() {
        return Err(Error::Construction("h not total on worlds".into()));
    }
    let mut frame_inv: BTreeMap<Name, Name> = BTreeMap::new();
    for (w, v) in &frame {
        if frame_inv.insert(v.clone(), w.clone()).is_some() {
            return Err(Error::Construction("h not bijective on worlds".into()));
        }
    }
    if frame_inv.len() != vn.worlds.len() {
        return Err(Error::Construction("h not bijective on worlds".into()));
    }

    let terms = rigid_terms_by_sort(sig_c, depth);
    let eval_w = wm.worlds.iter().next().unwrap().clone();
    let eval_v = vn.worlds.iter().next().unwrap().clone();
    let mut elems: BTreeMap<(Name, Name), BTreeMap<Name, Name>> = BTreeMap::new();
    let mut seed = |w: &Name, s: &Name, ts: &[Term]| -> Result<()> {
        let entry = elems.entry((w.clone(), s.clone())).or_default();
        for t in ts {
            let me = eval_term(wm, &eval_w, t)?;
            let ne = eval_term(&vn, &eval_v, t)?;
            if let Some(prev) = entry.get(&me) {
                if prev != &ne {
                    return Err(Error::Construction(format!(
                        "h not functional at sort {s}: element {me} maps to {prev} and {ne}"
                    )));
                }
            } else {
                entry.insert(me, ne);
            }
        }
        Ok(())
    };
    for (sort, ts) in &terms {
        match sort {
            HybridSort::Plain(s) => {
                for w in wm.worlds.clone() {
                    seed(&w, s, ts)?;
                }
            }
            HybridSort::At(k, s) => {
                let w = wm.world_of(k)?.clone();
                seed(&w, s, ts)?;
            }
        }
    }
    // transplant unreachable flexible elements, renaming away from the
    // target carriers
    for w in &wm.worlds {
        let v = &frame[w];
        for s in sig_c.flexible_sorts() {
            let entry = elems.entry((w.clone(), s.clone())).or_default();
            let n_carrier = &vn.world_models[v].carriers[&s];
            let mut taken: BTreeSet<Name> = n_carrier.clone();
            taken.extend(entry.values().cloned());
            let unreachable = rep_wm
                .unreachable_elements
                .get(w)
                .and_then(|m| m.get(&s))
                .cloned()
                .unwrap_or_default();
            for e in unreachable {
                let name = fresh_name(&e, &taken);
                taken.insert(name.clone());
                entry.insert(e, name);
            }
        }
    }
    // bijectivity checks against the target carriers
    for w in &wm.worlds {
        let v = &frame[w];
        for s in &sig_c.base.sorts {
            let entry = elems.get(&(w.clone(), s.clone())).cloned().unwrap_or_default();
            let m_carrier = &wm.world_models[w].carriers[s];
            if entry.len() != m_carrier.len()
                || !m_carrier.iter().all(|e| entry.contains_key(e))
            {
                return Err(Error::Construction(format!(
                    "h not total on carrier of {s} at {w} (structure not reachable enough)"
                )));
            }
            let image: BTreeSet<&Name> = entry.values().collect();
            if image.len() != entry.len() {
                return Err(Error::Construction(format!("h not injective on sort {s} at {w}")));
            }
            let required: BTreeSet<Name> = if sig_c.is_rigid_sort(s) {
                vn.world_models[v].carriers[s].clone()
            } else {
                let unreachable = rep_vn
                    .unreachable_elements
                    .get(v)
                    .and_then(|m| m.get(s))
                    .cloned()
                    .unwrap_or_default();
                vn.world_models[v].carriers[s]
                    .difference(&unreachable)
                    .cloned()
                    .collect()
            };
            if !required.iter().all(|e| image.contains(e)) {
                return Err(Error::Construction(format!(
                    "h not bijective: reachable part of sort {s} at {v} is not covered"
                )));
            }
        }
    }
    let h = Lift { frame, frame_inv, elems };

    // step 1 continued: the structure (V,R) with the transplanted
    // carriers and interpretations pushed through h
    let mut vr_worlds: BTreeMap<Name, WorldStructure> = BTreeMap::new();
    for v in &vn.worlds {
        let w = &h.frame_inv[v];
        let mws = &wm.world_models[w];
        let mut out = WorldStructure::default();
        for (s, carrier) in &mws.carriers {
            let mapped: BTreeSet<Name> =
                carrier.iter().map(|e| h.map(w, s, e)).collect::<Result<_>>()?;
            out.carriers.insert(s.clone(), mapped);
        }
        for (f, table) in &mws.functions {
            let mut t2 = BTreeMap::new();
            for (args, val) in table {
                let args2: Vec<Name> = args
                    .iter()
                    .zip(f.arity.iter())
                    .map(|(e, s)| h.map(w, s, e))
                    .collect::<Result<_>>()?;
                t2.insert(args2, h.map(w, &f.result, val)?);
            }
            out.functions.insert(f.clone(), t2);
        }
        for (r, rows) in &mws.relations {
            let mut rs = BTreeSet::new();
            for row in rows {
                let row2: Vec<Name> = row
                    .iter()
                    .zip(r.arity.iter())
                    .map(|(e, s)| h.map(w, s, e))
                    .collect::<Result<_>>()?;
                rs.insert(row2);
            }
            out.relations.insert(r.clone(), rs);
        }
        vr_worlds.insert(v.clone(), out);
    }

    // step 2: (V1,R1), replacing unreachable elements of image sorts
    let flex_img: BTreeMap<Name, Name> = sig_c
        .flexible_sorts()
        .into_iter()
        .map(|s| (chi_c.apply_sort(&s), s))
        .collect();
    let preimage_func = |f1: &FuncSym| -> Option<FuncSym> {
        sig_c.base.functions.iter().find(|f| &chi_c.apply_func(f) == f1).cloned()
    };
    let preimage_rel = |r1: &RelSym| -> Option<RelSym> {
        sig_c.base.relations.iter().find(|r| &chi_c.apply_rel(r) == r1).cloned()
    };
    let mut v1r1_worlds: BTreeMap<Name, WorldStructure> = BTreeMap::new();
    for v in &v1n1.worlds {
        let n1ws = &v1n1.world_models[v];
        let vr = &vr_worlds[v];
        let mut out = WorldStructure::default();
        for s1 in &sig1_c1.base.sorts {
            let carrier = match flex_img.get(s1) {
                Some(s) => vr.carriers[s].clone(),
                None => n1ws.carriers[s1].clone(),
            };
            out.carriers.insert(s1.clone(), carrier);
        }
        for f1 in &sig1_c1.base.functions {
            let table = if let Some(f) = preimage_func(f1) {
                vr.functions[&f].clone()
            } else {
                // rebuild over the possibly changed domain
                let domain = product(&out, &f1.arity);
                let result_carrier = &out.carriers[&f1.result];
                let old = n1ws.functions.get(f1);
                let mut t2 = BTreeMap::new();
                for args in domain {
                    let val = old
                        .and_then(|t| t.get(&args))
                        .filter(|v| result_carrier.contains(*v))
                        .cloned()
                        .or_else(|| result_carrier.iter().next().cloned())
                        .ok_or_else(|| Error::Construction(format!("empty carrier for {f1}")))?;
                    t2.insert(args, val);
                }
                t2
            };
            out.functions.insert(f1.clone(), table);
        }
        for r1 in &sig1_c1.base.relations {
            let rows = if let Some(r) = preimage_rel(r1) {
                vr.relations[&r].clone()
            } else {
                let domain = product(&out, &r1.arity);
                n1ws
                    .relations
                    .get(r1)
                    .map(|rows| rows.iter().filter(|row| domain.contains(*row)).cloned().collect())
                    .unwrap_or_default()
            };
            out.relations.insert(r1.clone(), rows);
        }
        v1r1_worlds.insert(v.clone(), out);
    }

    // step 3: pull (V1,R1) back along the expanded bijection
    let sort_preimage: BTreeMap<Name, Name> = sig_c
        .base
        .sorts
        .iter()
        .map(|s| (chi_c.apply_sort(s), s.clone()))
        .collect();
    let h1_map = |w: &Name, s1: &Name, e: &Name| -> Result<Name> {
        match sort_preimage.get(s1) {
            Some(s) => h.map(w, s, e),
            None => Ok(e.clone()),
        }
    };
    let h1_unmap = |w: &Name, s1: &Name, e: &Name| -> Result<Name> {
        match sort_preimage.get(s1) {
            Some(s) => h.unmap(w, s, e),
            None => Ok(e.clone()),
        }
    };
    let mut nominal_interp = BTreeMap::new();
    for k1 in &sig1_c1.nominals {
        let v = v1n1.world_of(k1)?;
        let w = h
            .frame_inv
            .get(v)
            .ok_or_else(|| Error::Construction(format!("no preimage world for {v}")))?;
        nominal_interp.insert(k1.clone(), w.clone());
    }
    let mut unary_interp = BTreeMap::new();
    for r in &sig1_c1.unary_modalities {
        let vs = v1n1
            .unary_interp
            .get(r)
            .ok_or_else(|| Error::Model(format!("modality {r} not interpreted")))?;
        unary_interp.insert(
            r.clone(),
            vs.iter().filter_map(|v| h.frame_inv.get(v).cloned()).collect(),
        );
    }
    let mut binary_interp = BTreeMap::new();
    for l in &sig1_c1.binary_modalities {
        let pairs = v1n1
            .binary_interp
            .get(l)
            .ok_or_else(|| Error::Model(format!("modality {l} not interpreted")))?;
        binary_interp.insert(
            l.clone(),
            pairs
                .iter()
                .filter_map(|(a, b)| {
                    Some((h.frame_inv.get(a)?.clone(), h.frame_inv.get(b)?.clone()))
                })
                .collect(),
        );
    }
    let mut world_models = BTreeMap::new();
    for w in &wm.worlds {
        let v = &h.frame[w];
        let r1ws = &v1r1_worlds[v];
        let mut out = WorldStructure::default();
        for s1 in &sig1_c1.base.sorts {
            let carrier: BTreeSet<Name> = match sort_preimage.get(s1) {
                Some(s) => wm.world_models[w].carriers[s].clone(),
                None => r1ws.carriers[s1].clone(),
            };
            out.carriers.insert(s1.clone(), carrier);
        }
        for f1 in &sig1_c1.base.functions {
            let domain = product(&out, &f1.arity);
            let mut table = BTreeMap::new();
            for args in domain {
                let imgs: Vec<Name> = args
                    .iter()
                    .zip(f1.arity.iter())
                    .map(|(e, s1)| h1_map(w, s1, e))
                    .collect::<Result<_>>()?;
                let val1 = r1ws.functions[f1]
                    .get(&imgs)
                    .cloned()
                    .ok_or_else(|| Error::Construction(format!("{f1} undefined at {imgs:?}")))?;
                table.insert(args, h1_unmap(w, &f1.result, &val1)?);
            }
            out.functions.insert(f1.clone(), table);
        }
        for r1 in &sig1_c1.base.relations {
            let domain = product(&out, &r1.arity);
            let mut rows = BTreeSet::new();
            for row in domain {
                let imgs: Vec<Name> = row
                    .iter()
                    .zip(r1.arity.iter())
                    .map(|(e, s1)| h1_map(w, s1, e))
                    .collect::<Result<_>>()?;
                if r1ws.relations[r1].contains(&imgs) {
                    rows.insert(row);
                }
            }
            out.relations.insert(r1.clone(), rows);
        }
        world_models.insert(w.clone(), out);
    }
    let result = KripkeStructure {
        sig: sig1_c1.clone(),
        worlds: wm.worlds.clone(),
        nominal_interp,
        unary_interp,
        binary_interp,
        world_models,
    };
    let diags = validate_model(&result);
    if !diags.is_empty() {
        return Err(Error::Construction(format!(
            "lifted structure invalid: {}",
            diags.join("; ")
        )));
    }
    let back = reduct(&chi_c, &result)?;
    if &back != wm {
        return Err(Error::Construction(
            "lifted structure does not reduce to the input (theories disagree)".into(),
        ));
    }
    Ok(result)
}

fn product(ws: &WorldStructure, arity: &[Name]) -> Vec<Vec<Name>> {
    let mut out: Vec<Vec<Name>> = vec![vec![]];
    for s in arity {
        let carrier = match ws.carriers.get(s) {
            Some(c) => c,
            None => return vec![],
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
    out
}

/// Amalgamation over a pushout square: the unique structure over the
/// vertex whose leg reducts are the two inputs. Requires exact
/// agreement of the span reducts.
pub fn amalgamate(
    chi1: &SignatureMorphism,
    chi2: &SignatureMorphism,
    po: &Pushout,
    m1: &KripkeStructure,
    m2: &KripkeStructure,
) -> Result<KripkeStructure> {
    if m1.sig != chi1.target || m2.sig != chi2.target {
        return Err(Error::Model("amalgamation inputs are not over the span targets".into()));
    }
    let r1 = reduct(chi1, m1)?;
    let r2 = reduct(chi2, m2)?;
    if r1 != r2 {
        return Err(Error::Construction(format!(
            "reducts disagree: {}",
            first_difference(&r1, &r2)
        )));
    }
    let vertex = &po.vertex;
    let mut nominal_interp = BTreeMap::new();
    for k in &vertex.nominals {
        let from1 = chi_preimage_nominal(&po.left_leg, k).map(|j| m1.nominal_interp[&j].clone());
        let from2 = chi_preimage_nominal(&po.right_leg, k).map(|j| m2.nominal_interp[&j].clone());
        let w = from1.or(from2).ok_or_else(|| {
            Error::Construction(format!("vertex nominal {k} has no preimage"))
        })?;
        nominal_interp.insert(k.clone(), w);
    }
    let mut unary_interp = BTreeMap::new();
    for r in &vertex.unary_modalities {
        let from1 = preimage_modality(&po.left_leg, r, true).map(|j| m1.unary_interp[&j].clone());
        let from2 = preimage_modality(&po.right_leg, r, true).map(|j| m2.unary_interp[&j].clone());
        unary_interp.insert(
            r.clone(),
            from1.or(from2).ok_or_else(|| {
                Error::Construction(format!("vertex modality {r} has no preimage"))
            })?,
        );
    }
    let mut binary_interp = BTreeMap::new();
    for l in &vertex.binary_modalities {
        let from1 = preimage_modality(&po.left_leg, l, false).map(|j| m1.binary_interp[&j].clone());
        let from2 = preimage_modality(&po.right_leg, l, false).map(|j| m2.binary_interp[&j].clone());
        binary_interp.insert(
            l.clone(),
            from1.or(from2).ok_or_else(|| {
                Error::Construction(format!("vertex modality {l} has no preimage"))
            })?,
        );
    }
    let mut world_models = BTreeMap::new();
    for w in &m1.worlds {
        let ws1 = &m1.world_models[w];
        let ws2 = &m2.world_models[w];
        let mut out = WorldStructure::default();
        for s in &vertex.base.sorts {
            let c1 = po.left_leg.source.base.sorts.iter()
                .find(|x| po.left_leg.apply_sort(x) == *s)
                .map(|x| ws1.carriers[x].clone());
            let c2 = po.right_leg.source.base.sorts.iter()
                .find(|x| po.right_leg.apply_sort(x) == *s)
                .map(|x| ws2.carriers[x].clone());
            out.carriers.insert(
                s.clone(),
                c1.or(c2).ok_or_else(|| {
                    Error::Construction(format!("vertex sort {s} has no preimage"))
                })?,
            );
        }
        for f in &vertex.base.functions {
            let t1 = po.left_leg.source.base.functions.iter()
                .find(|x| &po.left_leg.apply_func(x) == f)
                .map(|x| ws1.functions[x].clone());
            let t2 = po.right_leg.source.base.functions.iter()
                .find(|x| &po.right_leg.apply_func(x) == f)
                .map(|x| ws2.functions[x].clone());
            out.functions.insert(
                f.clone(),
                t1.or(t2).ok_or_else(|| {
                    Error::Construction(format!("vertex function {f} has no preimage"))
                })?,
            );
        }
        for r in &vertex.base.relations {
            let t1 = po.left_leg.source.base.relations.iter()
                .find(|x| &po.left_leg.apply_rel(x) == r)
                .map(|x| ws1.relations[x].clone());
            let t2 = po.right_leg.source.base.relations.iter()
                .find(|x| &po.right_leg.apply_rel(x) == r)
                .map(|x| ws2.relations[x].clone());
            out.relations.insert(
                r.clone(),
                t1.or(t2).ok_or_else(|| {
                    Error::Construction(format!("vertex relation {r} has no preimage"))
                })?,
            );
        }
        world_models.insert(w.clone(), out);
    }
    let result = KripkeStructure {
        sig: vertex.clone(),
        worlds: m1.worlds.clone(),
        nominal_interp,
        unary_interp,
        binary_interp,
        world_models,
    };
    let back1 = reduct(&po.left_leg, &result)?;
    let back2 = reduct(&po.right_leg, &result)?;
    if &back1 != m1 || &back2 != m2 {
        return Err(Error::Construction("reducts disagree: amalgam does not round-trip".into()));
    }
    Ok(result)
}

fn chi_preimage_nominal(chi: &SignatureMorphism, k: &Name) -> Option<Name> {
    chi.source.nominals.iter().find(|j| &chi.apply_nominal(j) == k).cloned()
}

fn preimage_modality(chi: &SignatureMorphism, m: &Name, unary: bool) -> Option<Name> {
    let pool = if unary { &chi.source.unary_modalities } else { &chi.source.binary_modalities };
    pool.iter().find(|j| &chi.apply_modality(j) == m).cloned()
}

fn first_difference(a: &KripkeStructure, b: &KripkeStructure) -> String {
    if a.worlds != b.worlds {
        return "different world sets".into();
    }
    if a.nominal_interp != b.nominal_interp {
        return "different nominal interpretations".into();
    }
    for (w, wa) in &a.world_models {
        let wb = &b.world_models[w];
        for (s, ca) in &wa.carriers {
            if wb.carriers.get(s) != Some(ca) {
                return format!("carrier of sort {s} differs at world {w}");
            }
        }
        for (f, ta) in &wa.functions {
            if wb.functions.get(f) != Some(ta) {
                return format!("function {f} differs at world {w}");
            }
        }
        for (r, ra) in &wa.relations {
            if wb.relations.get(r) != Some(ra) {
                return format!("relation {r} differs at world {w}");
            }
        }
    }
    "different frame interpretations".into()
}

/// One machine-checked step of a counterexample replay.
#[derive(Clone, Debug, Serialize)]
pub struct Step {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CounterexampleReport {
    pub case: String,
    pub steps: Vec<Step>,
    pub all_pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseId {
    Counter1,
    Counter2,
    Counter3,
}

impl std::str::FromStr for CaseId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "counter1" => Ok(CaseId::Counter1),
            "counter2" => Ok(CaseId::Counter2),
            "counter3" => Ok(CaseId::Counter3),
            other => Err(Error::Parse(format!("unknown case {other}"))),
        }
    }
}

/// Re-executes every machine-checkable step of the chosen
/// counterexample and reports pass/fail per step.
pub fn verify_counterexample(case: CaseId) -> Result<CounterexampleReport> {
    let mut steps = Vec::new();
    let mut step = |name: &str, pass: bool, detail: String| {
        steps.push(Step { name: name.to_string(), pass, detail });
    };
    match case {
        CaseId::Counter1 => {
            let span = fixtures::counter1();
            let m1 = fixtures::counter1_w1m1();
            let phi1 = fixtures::counter1_phi1();
            let phi2 = fixtures::counter1_phi2();
            let s1 = sat_global(&m1, &phi1)?;
            step("W1M1 satisfies Phi1", s1, format!("global satisfaction = {s1}"));
            let red = reduct(&span.chi1, &m1)?;
            let vn = fixtures::counter1_vn(&red);
            let h = fixtures::counter1_iso(&vn, &red);
            let iso = crate::semantics::is_isomorphism(&h);
            step(
                "h with the d/e swap on s3 is an isomorphism",
                iso,
                "frame identity, s1/s2 identities, s3 swap".into(),
            );
            let v2n2 = fixtures::counter1_v2n2(&vn, &span.chi2.target);
            let valid = validate_model(&v2n2).is_empty();
            let back = reduct(&span.chi2, &v2n2)?;
            let exp_ok = valid && back == vn;
            step(
                "a chi2-expansion of (V,N) exists",
                exp_ok,
                format!("validates = {valid}, reduct matches = {}", back == vn),
            );
            let refutes = !sat_global(&v2n2, &phi2)?;
            step("the expansion refutes Phi2", refutes, format!("satisfies Phi2 = {}", !refutes));
        }
        CaseId::Counter2 => {
            let span = fixtures::counter2();
            let m1 = fixtures::counter2_w1m1_over_delta1();
            let phi1 = span.phi1[0].clone();
            let s1 = sat_global(&m1, &phi1)?;
            step("W1M1 satisfies the forall axiom", s1, format!("global satisfaction = {s1}"));
            let red = reduct(&span.chi1, &m1)?;
            let plan = crate::semantics::SwapPlan::default().add_element("w", "s", "d");
            let swapped = crate::semantics::swap_unreachable(&red, &plan, 3)?;
            let added = swapped.world_models["w"].carriers["s"].contains("d");
            step("surgery adds the fresh unreachable element d", added, "carrier now {d, e}".into());
            let probe = probe_sentences(&red.sig, 3, 1);
            let (eq, witness) = equivalent_on(&red, &swapped, &probe)?;
            step(
                "the enlarged structure is probe-equivalent to the reduct",
                eq,
                match witness {
                    Some(s) => format!("distinguished by {s:?}"),
                    None => format!("{} probe sentences agree", probe.sentences.len()),
                },
            );
            let w2m2 = fixtures::counter2_w2m2(&swapped, &span.chi2.target);
            let back = reduct(&span.chi2, &w2m2)?;
            let exp_ok = validate_model(&w2m2).is_empty() && back == swapped;
            step("the chi2-expansion interprets c2 as d", exp_ok, "reduct round-trips".into());
            let phi2 = span.phi2[0].clone();
            let refutes = !sat_global(&w2m2, &phi2)?;
            step("the expansion refutes c2 = c", refutes, format!("satisfies Phi2 = {}", !refutes));
        }
        CaseId::Counter3 => {
            let span = fixtures::counter3();
            let m1 = fixtures::counter3_z2_model(&span.chi1.target);
            let mut all = true;
            for phi in fixtures::counter3_phi1() {
                all = all && sat_global(&m1, &phi)?;
            }
            step("the two-world mod-2 structure satisfies all three axioms", all, format!("global satisfaction = {all}"));
            let red = reduct(&span.chi1, &m1)?;
            let swapped = fixtures::counter3_add_two(&red);
            let added = swapped.world_models["w1"].carriers["Nat"].contains("z2")
                && swapped.world_models["w2"].carriers["Nat"].contains("z2");
            step("surgery adds the unreachable element z2 with succ(z2) = z0", added, "both worlds enlarged".into());
            let probe = probe_sentences(&red.sig, 3, 1);
            let (eq, witness) = equivalent_on(&red, &swapped, &probe)?;
            step(
                "the enlarged structure is probe-equivalent to the reduct",
                eq,
                match witness {
                    Some(s) => format!("distinguished by {s:?}"),
                    None => format!("{} probe sentences agree", probe.sentences.len()),
                },
            );
            let w2m2 = fixtures::counter3_w2m2(&swapped, &span.chi2.target);
            let back = reduct(&span.chi2, &w2m2)?;
            let exp_ok = validate_model(&w2m2).is_empty() && back == swapped;
            step("the expansion to Delta2 interprets List over truncated lists", exp_ok, "reduct round-trips".into());
            let phi2 = fixtures::counter3_involution();
            let refutes = !sat_global(&w2m2, &phi2)?;
            step(
                "the expansion refutes the involution axiom",
                refutes,
                format!("satisfies Phi2 = {}", !refutes),
            );
        }
    }
    let all_pass = steps.iter().all(|s| s.pass);
    Ok(CounterexampleReport {
        case: match case {
            CaseId::Counter1 => "counter1",
            CaseId::Counter2 => "counter2",
            CaseId::Counter3 => "counter3",
        }
        .to_string(),
        steps,
        all_pass,
    })
}

/// The built-in example spans and structures used by the
/// counterexample verifier and throughout the test suites.
pub mod fixtures {
    use super::*;
    use crate::syntax::{desugar, Sugared};

    fn sig(
        nominals: &[&str],
        sorts: &[&str],
        rigid_sorts: &[&str],
        funcs: &[(&str, &[&str], &str, bool)],
    ) -> HFOLSignature {
        let mut out = HFOLSignature::default();
        for k in nominals {
            out.nominals.insert((*k).into());
        }
        for s in sorts {
            out.base.sorts.insert((*s).into());
        }
        for s in rigid_sorts {
            out.rigid.sorts.insert((*s).into());
        }
        for (name, arity, result, rigid) in funcs {
            let f = FuncSym::new(*name, arity.iter().map(|s| (*s).to_string()).collect(), *result);
            out.base.functions.insert(f.clone());
            if *rigid {
                out.rigid.functions.insert(f);
            }
        }
        out
    }

    fn var_const(name: &str, sort: &str) -> Term {
        Term::constant(FuncSym::constant(name, sort))
    }

    pub fn counter1() -> Span {
        let delta = sig(
            &["k1", "k2", "k3"],
            &["s1", "s2", "s3"],
            &[],
            &[("c1", &[], "s1", false), ("c2", &[], "s2", false), ("c3", &[], "s3", false)],
        );
        let delta1 = sig(
            &["k", "k3"],
            &["s"],
            &[],
            &[("c", &[], "s", false), ("c3", &[], "s", false)],
        );
        let delta2 = sig(
            &["k", "k1"],
            &["s", "s2"],
            &[],
            &[("c1", &[], "s", false), ("c2", &[], "s2", false), ("c3", &[], "s", false)],
        );
        let mut chi1 = SignatureMorphism::identity(&delta);
        chi1.target = delta1;
        chi1.nominal_map = [("k1", "k"), ("k2", "k"), ("k3", "k3")]
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .into();
        chi1.sort_map = [("s1", "s"), ("s2", "s"), ("s3", "s")]
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .into();
        chi1.function_map = [
            (FuncSym::constant("c1", "s1"), "c".to_string()),
            (FuncSym::constant("c2", "s2"), "c".to_string()),
            (FuncSym::constant("c3", "s3"), "c3".to_string()),
        ]
        .into();
        let mut chi2 = SignatureMorphism::identity(&delta);
        chi2.target = delta2;
        chi2.nominal_map = [("k1", "k1"), ("k2", "k"), ("k3", "k")]
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .into();
        chi2.sort_map = [("s1", "s"), ("s2", "s2"), ("s3", "s")]
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .into();
        chi2.function_map = [
            (FuncSym::constant("c1", "s1"), "c1".to_string()),
            (FuncSym::constant("c2", "s2"), "c2".to_string()),
            (FuncSym::constant("c3", "s3"), "c3".to_string()),
        ]
        .into();
        Span {
            chi1,
            chi2,
            phi: vec![],
            phi1: vec![counter1_phi1()],
            phi2: vec![counter1_phi2()],
        }
    }

    pub fn counter1_phi1() -> Sentence {
        Sentence::at("k3", Sentence::Eq(var_const("c", "s"), var_const("c3", "s")))
    }

    pub fn counter1_phi2() -> Sentence {
        Sentence::at("k1", Sentence::Eq(var_const("c1", "s"), var_const("c3", "s")))
    }

    /// One world `w`, carrier `{d, e}`, `c = c3 = d`, over counter-1's
    /// `Delta1`.
    pub fn counter1_w1m1() -> KripkeStructure {
        let span = counter1();
        let sig = span.chi1.target.clone();
        let mut ws = WorldStructure::default();
        ws.carriers.insert("s".into(), ["d".to_string(), "e".to_string()].into());
        ws.functions.insert(FuncSym::constant("c", "s"), [(vec![], "d".to_string())].into());
        ws.functions.insert(FuncSym::constant("c3", "s"), [(vec![], "d".to_string())].into());
        KripkeStructure {
            sig,
            worlds: ["w".to_string()].into(),
            nominal_interp: [("k", "w"), ("k3", "w")]
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .into(),
            unary_interp: BTreeMap::new(),
            binary_interp: BTreeMap::new(),
            world_models: [("w".to_string(), ws)].into(),
        }
    }

    /// `(V,N)`: the chi1-reduct with `c3 : -> s3` moved from `d` to `e`.
    pub fn counter1_vn(red: &KripkeStructure) -> KripkeStructure {
        let mut out = red.clone();
        out.world_models
            .get_mut("w")
            .unwrap()
            .functions
            .insert(FuncSym::constant("c3", "s3"), [(vec![], "e".to_string())].into());
        out
    }

    /// The isomorphism from `(V,N)` to the reduct: identities on s1
    /// and s2, the d/e swap on s3.
    pub fn counter1_iso(
        vn: &KripkeStructure,
        red: &KripkeStructure,
    ) -> crate::semantics::KripkeHomomorphism {
        let id: BTreeMap<Name, Name> =
            [("d", "d"), ("e", "e")].map(|(a, b)| (a.to_string(), b.to_string())).into();
        let swap: BTreeMap<Name, Name> =
            [("d", "e"), ("e", "d")].map(|(a, b)| (a.to_string(), b.to_string())).into();
        let sm: BTreeMap<Name, BTreeMap<Name, Name>> = [
            ("s1".to_string(), id.clone()),
            ("s2".to_string(), id),
            ("s3".to_string(), swap),
        ]
        .into();
        crate::semantics::KripkeHomomorphism {
            source: vn.clone(),
            target: red.clone(),
            frame_map: [("w".to_string(), "w".to_string())].into(),
            world_maps: [("w".to_string(), sm)].into(),
        }
    }

    /// The chi2-expansion of `(V,N)` to counter-1's `Delta2`.
    pub fn counter1_v2n2(vn: &KripkeStructure, delta2: &HFOLSignature) -> KripkeStructure {
        let de: BTreeSet<Name> = ["d".to_string(), "e".to_string()].into();
        let mut ws = WorldStructure::default();
        ws.carriers.insert("s".into(), de.clone());
        ws.carriers.insert("s2".into(), de);
        let val = |f: &FuncSym, sort: &str| -> Name {
            vn.world_models["w"].functions[&FuncSym::constant(f.name.clone(), sort)][&vec![]]
                .clone()
        };
        ws.functions.insert(
            FuncSym::constant("c1", "s"),
            [(vec![], val(&FuncSym::constant("c1", "s"), "s1"))].into(),
        );
        ws.functions.insert(
            FuncSym::constant("c2", "s2"),
            [(vec![], val(&FuncSym::constant("c2", "s2"), "s2"))].into(),
        );
        ws.functions.insert(
            FuncSym::constant("c3", "s"),
            [(vec![], val(&FuncSym::constant("c3", "s"), "s3"))].into(),
        );
        KripkeStructure {
            sig: delta2.clone(),
            worlds: ["w".to_string()].into(),
            nominal_interp: [("k", "w"), ("k1", "w")]
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .into(),
            unary_interp: BTreeMap::new(),
            binary_interp: BTreeMap::new(),
            world_models: [("w".to_string(), ws)].into(),
        }
    }

    pub fn counter2() -> Span {
        let delta = sig(&["k"], &["s"], &[], &[("c", &[], "s", false)]);
        let delta1 = sig(&["k", "k1"], &["s"], &["s"], &[("c", &[], "s", false)]);
        let delta2 = sig(
            &["k", "k2"],
            &["s"],
            &[],
            &[("c", &[], "s", false), ("c2", &[], "s", false)],
        );
        let mut chi1 = SignatureMorphism::identity(&delta);
        chi1.target = delta1;
        let mut chi2 = SignatureMorphism::identity(&delta);
        chi2.target = delta2;
        let phi1 = desugar(&Sugared::Forall(
            vec![Var::rigid("y", "s")],
            Box::new(Sugared::Eq(var_const("c", "s"), var_const("y", "s"))),
        ));
        let phi2 = Sentence::Eq(var_const("c2", "s"), var_const("c", "s"));
        Span { chi1, chi2, phi: vec![], phi1: vec![phi1], phi2: vec![phi2] }
    }

    /// One world `w`, rigid carrier `{e}`, `c = e`, over counter-2's
    /// `Delta1`.
    pub fn counter2_w1m1_over_delta1() -> KripkeStructure {
        let span = counter2();
        let sig = span.chi1.target.clone();
        let mut ws = WorldStructure::default();
        ws.carriers.insert("s".into(), ["e".to_string()].into());
        ws.functions.insert(FuncSym::constant("c", "s"), [(vec![], "e".to_string())].into());
        KripkeStructure {
            sig,
            worlds: ["w".to_string()].into(),
            nominal_interp: [("k", "w"), ("k1", "w")]
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .into(),
            unary_interp: BTreeMap::new(),
            binary_interp: BTreeMap::new(),
            world_models: [("w".to_string(), ws)].into(),
        }
    }

    /// Expansion of the enlarged `Delta`-structure to `Delta2`,
    /// interpreting `c2` as the fresh element `d`.
    pub fn counter2_w2m2(swapped: &KripkeStructure, delta2: &HFOLSignature) -> KripkeStructure {
        let mut out = swapped.clone();
        out.sig = delta2.clone();
        out.nominal_interp.insert("k2".into(), "w".into());
        out.world_models
            .get_mut("w")
            .unwrap()
            .functions
            .insert(FuncSym::constant("c2", "s"), [(vec![], "d".to_string())].into());
        out
    }

    pub fn counter3() -> Span {
        let delta = sig(
            &["k"],
            &["Nat"],
            &[],
            &[("0", &[], "Nat", false), ("succ", &["Nat"], "Nat", false)],
        );
        let delta1 = sig(
            &["k", "k1"],
            &["Nat"],
            &["Nat"],
            &[
                ("0", &[], "Nat", false),
                ("succ", &["Nat"], "Nat", false),
                ("plus", &["Nat", "Nat"], "Nat", false),
            ],
        );
        let delta2 = sig(
            &["k", "k2"],
            &["Nat", "List"],
            &["Nat", "List"],
            &[
                ("0", &[], "Nat", false),
                ("succ", &["Nat"], "Nat", false),
                ("nil", &[], "List", false),
                ("cons", &["Nat", "List"], "List", false),
            ],
        );
        let mut chi1 = SignatureMorphism::identity(&delta);
        chi1.target = delta1;
        let mut chi2 = SignatureMorphism::identity(&delta);
        chi2.target = delta2;
        Span {
            chi1,
            chi2,
            phi: vec![],
            phi1: counter3_phi1(),
            phi2: vec![counter3_involution()],
        }
    }

    fn succ(t: Term) -> Term {
        Term::apply(FuncSym::new("succ", vec!["Nat".into()], "Nat"), vec![t])
    }

    fn plus(a: Term, b: Term) -> Term {
        Term::apply(FuncSym::new("plus", vec!["Nat".into(), "Nat".into()], "Nat"), vec![a, b])
    }

    /// The three axioms over counter-3's `Delta1`: succ is an
    /// involution, and plus is defined by recursion on the left.
    pub fn counter3_phi1() -> Vec<Sentence> {
        let x = || var_const("x", "Nat");
        let y = || var_const("y", "Nat");
        let zero = || var_const("0", "Nat");
        vec![
            desugar(&Sugared::Forall(
                vec![Var::rigid("x", "Nat")],
                Box::new(Sugared::Eq(succ(succ(x())), x())),
            )),
            desugar(&Sugared::Forall(
                vec![Var::rigid("x", "Nat")],
                Box::new(Sugared::Eq(plus(zero(), x()), x())),
            )),
            desugar(&Sugared::Forall(
                vec![Var::rigid("x", "Nat"), Var::rigid("y", "Nat")],
                Box::new(Sugared::Eq(plus(succ(y()), x()), succ(plus(y(), x())))),
            )),
        ]
    }

    /// `forall x . succ(succ(x)) = x` over counter-3's `Delta2`.
    pub fn counter3_involution() -> Sentence {
        let x = || var_const("x", "Nat");
        desugar(&Sugared::Forall(
            vec![Var::rigid("x", "Nat")],
            Box::new(Sugared::Eq(succ(succ(x())), x())),
        ))
    }

    /// Two worlds, both carrying arithmetic mod 2, over counter-3's
    /// `Delta1`.
    pub fn counter3_z2_model(delta1: &HFOLSignature) -> KripkeStructure {
        let z0 = "z0".to_string();
        let z1 = "z1".to_string();
        let mut ws = WorldStructure::default();
        ws.carriers.insert("Nat".into(), [z0.clone(), z1.clone()].into());
        ws.functions.insert(FuncSym::constant("0", "Nat"), [(vec![], z0.clone())].into());
        ws.functions.insert(
            FuncSym::new("succ", vec!["Nat".into()], "Nat"),
            [(vec![z0.clone()], z1.clone()), (vec![z1.clone()], z0.clone())].into(),
        );
        ws.functions.insert(
            FuncSym::new("plus", vec!["Nat".into(), "Nat".into()], "Nat"),
            [
                (vec![z0.clone(), z0.clone()], z0.clone()),
                (vec![z0.clone(), z1.clone()], z1.clone()),
                (vec![z1.clone(), z0.clone()], z1.clone()),
                (vec![z1.clone(), z1.clone()], z0.clone()),
            ]
            .into(),
        );
        KripkeStructure {
            sig: delta1.clone(),
            worlds: ["w1".to_string(), "w2".to_string()].into(),
            nominal_interp: [("k", "w1"), ("k1", "w2")]
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .into(),
            unary_interp: BTreeMap::new(),
            binary_interp: BTreeMap::new(),
            world_models: [("w1".to_string(), ws.clone()), ("w2".to_string(), ws)].into(),
        }
    }

    /// Adds the unreachable element `z2` with `succ(z2) = z0` in both
    /// worlds of the `Delta`-reduct.
    pub fn counter3_add_two(red: &KripkeStructure) -> KripkeStructure {
        let succ_sym = FuncSym::new("succ", vec!["Nat".into()], "Nat");
        let plan = crate::semantics::SwapPlan::default()
            .add_element("w1", "Nat", "z2")
            .add_element("w2", "Nat", "z2")
            .with_function_value("w1", &succ_sym, vec!["z2".into()], "z0")
            .with_function_value("w2", &succ_sym, vec!["z2".into()], "z0");
        crate::semantics::swap_unreachable(red, &plan, 4).expect("surgery on the mod-2 reduct")
    }

    /// Expansion of the enlarged structure to `Delta2`: `List` is the
    /// set of lists over `{z0, z1, z2}` truncated to length 2, with
    /// cons saturating at the bound.
    pub fn counter3_w2m2(swapped: &KripkeStructure, delta2: &HFOLSignature) -> KripkeStructure {
        let nats = ["z0", "z1", "z2"];
        let mut lists: Vec<Vec<&str>> = vec![vec![]];
        for a in nats {
            lists.push(vec![a]);
            for b in nats {
                lists.push(vec![a, b]);
            }
        }
        let name = |l: &[&str]| -> String {
            if l.is_empty() {
                "lnil".to_string()
            } else {
                format!("l_{}", l.join("_"))
            }
        };
        let carrier: BTreeSet<Name> = lists.iter().map(|l| name(l)).collect();
        let cons_sym = FuncSym::new("cons", vec!["Nat".into(), "List".into()], "List");
        let mut cons_table: BTreeMap<Vec<Name>, Name> = BTreeMap::new();
        for x in nats {
            for l in &lists {
                let out: Vec<&str> = if l.len() < 2 {
                    let mut v = vec![x];
                    v.extend(l.iter().copied());
                    v
                } else {
                    vec![x, l[0]]
                };
                cons_table.insert(vec![x.to_string(), name(l)], name(&out));
            }
        }
        let mut out = swapped.clone();
        out.sig = delta2.clone();
        out.nominal_interp.insert("k2".into(), "w1".into());
        for ws in out.world_models.values_mut() {
            ws.carriers.insert("List".into(), carrier.clone());
            ws.functions
                .insert(FuncSym::constant("nil", "List"), [(vec![], "lnil".to_string())].into());
            ws.functions.insert(cons_sym.clone(), cons_table.clone());
        }
        out
    }

    /// A one-world, one-element structure over any signature without
    /// modalities or relations needing more: every carrier is `{a}`,
    /// every function is constant, every relation empty.
    pub fn trivial_model(sig: &HFOLSignature) -> KripkeStructure {
        let mut ws = WorldStructure::default();
        for s in &sig.base.sorts {
            ws.carriers.insert(s.clone(), ["a".to_string()].into());
        }
        for f in &sig.base.functions {
            ws.functions.insert(
                f.clone(),
                [(vec!["a".to_string(); f.arity.len()], "a".to_string())].into(),
            );
        }
        for r in &sig.base.relations {
            ws.relations.insert(r.clone(), BTreeSet::new());
        }
        KripkeStructure {
            sig: sig.clone(),
            worlds: ["w".to_string()].into(),
            nominal_interp: sig.nominals.iter().map(|k| (k.clone(), "w".to_string())).collect(),
            unary_interp: sig
                .unary_modalities
                .iter()
                .map(|m| (m.clone(), BTreeSet::new()))
                .collect(),
            binary_interp: sig
                .binary_modalities
                .iter()
                .map(|m| (m.clone(), BTreeSet::new()))
                .collect(),
            world_models: [("w".to_string(), ws)].into(),
        }
    }
}
