//! Seeded random generators for signatures, morphisms, structures and
//! sentences. The property suites draw their instances from here, so
//! everything is deterministic in the seed.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::semantics::{ground_terms, reduct, KripkeStructure, SwapPlan, WorldStructure};
use crate::sig::{
    extend, FuncSym, HFOLSignature, Name, RelSym, SignatureExtension, SignatureMorphism, Var,
};
use crate::syntax::{at_sort, HybridSort, Sentence, Term};

pub struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    fn below(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    fn flip(&mut self) -> bool {
        self.rng.gen_bool(0.5)
    }

    fn pick<'a, T>(&mut self, xs: &'a [T]) -> &'a T {
        &xs[self.below(xs.len())]
    }

    /// A small random signature: up to two sorts, two nominals, one
    /// modality of each arity, three functions and two relations.
    pub fn signature(&mut self) -> HFOLSignature {
        let mut out = HFOLSignature::default();
        let nsorts = 1 + self.below(2);
        for i in 0..nsorts {
            let s = format!("s{i}");
            out.base.sorts.insert(s.clone());
            if self.flip() {
                out.rigid.sorts.insert(s);
            }
        }
        for i in 0..1 + self.below(2) {
            out.nominals.insert(format!("n{i}"));
        }
        if self.flip() {
            out.unary_modalities.insert("u0".into());
        }
        if self.flip() {
            out.binary_modalities.insert("m0".into());
        }
        let sorts: Vec<Name> = out.base.sorts.iter().cloned().collect();
        for i in 0..1 + self.below(3) {
            let arity: Vec<Name> =
                (0..self.below(3)).map(|_| self.pick(&sorts).clone()).collect();
            let result = self.pick(&sorts).clone();
            let f = FuncSym::new(format!("f{i}"), arity, result);
            let all_rigid = f.arity.iter().chain([&f.result]).all(|s| out.is_rigid_sort(s));
            out.base.functions.insert(f.clone());
            if all_rigid && self.flip() {
                out.rigid.functions.insert(f);
            }
        }
        for i in 0..self.below(3) {
            let arity: Vec<Name> =
                (0..1 + self.below(2)).map(|_| self.pick(&sorts).clone()).collect();
            let r = RelSym { name: format!("p{i}"), arity };
            let all_rigid = r.arity.iter().all(|s| out.is_rigid_sort(s));
            out.base.relations.insert(r.clone());
            if all_rigid && self.flip() {
                out.rigid.relations.insert(r);
            }
        }
        out
    }

    /// A random morphism out of the given signature: symbols may be
    /// renamed or merged (profiles permitting), flexible symbols may
    /// turn rigid, and the target can gain fresh symbols.
    pub fn morphism(&mut self, src: &HFOLSignature) -> SignatureMorphism {
        let mut chi = SignatureMorphism::identity(src);
        let mut tgt = HFOLSignature::default();

        let mut sort_names: Vec<Name> = Vec::new();
        for s in &src.base.sorts {
            let img = if !sort_names.is_empty() && self.flip() {
                self.pick(&sort_names).clone()
            } else {
                let img = format!("S{}", sort_names.len());
                sort_names.push(img.clone());
                img
            };
            chi.sort_map.insert(s.clone(), img.clone());
            tgt.base.sorts.insert(img.clone());
            if src.is_rigid_sort(s) {
                tgt.rigid.sorts.insert(img);
            }
        }
        // a flexible source sort may land on a rigid target sort, but
        // not the other way around; promotion is a free choice
        for s in tgt.base.sorts.clone() {
            if !tgt.rigid.sorts.contains(&s) && self.rng.gen_bool(0.25) {
                tgt.rigid.sorts.insert(s);
            }
        }
        if self.flip() {
            tgt.base.sorts.insert("Sx".into());
        }

        let mut nom_names: Vec<Name> = Vec::new();
        for k in &src.nominals {
            let img = if !nom_names.is_empty() && self.flip() {
                self.pick(&nom_names).clone()
            } else {
                let img = format!("N{}", nom_names.len());
                nom_names.push(img.clone());
                img
            };
            chi.nominal_map.insert(k.clone(), img.clone());
            tgt.nominals.insert(img);
        }
        if self.flip() {
            tgt.nominals.insert("Nx".into());
        }
        for (i, m) in src.unary_modalities.iter().enumerate() {
            let img = format!("U{i}");
            chi.modality_map.insert(m.clone(), img.clone());
            tgt.unary_modalities.insert(img);
        }
        for (i, m) in src.binary_modalities.iter().enumerate() {
            let img = format!("M{i}");
            chi.modality_map.insert(m.clone(), img.clone());
            tgt.binary_modalities.insert(img);
        }

        // functions merge only when their mapped profiles coincide
        let mut func_by_profile: BTreeMap<(Vec<Name>, Name), Vec<FuncSym>> = BTreeMap::new();
        let mut count = 0usize;
        for f in &src.base.functions {
            let profile: (Vec<Name>, Name) = (
                f.arity.iter().map(|s| chi.apply_sort(s)).collect(),
                chi.apply_sort(&f.result),
            );
            let pool = func_by_profile.entry(profile.clone()).or_default();
            let img = if !pool.is_empty() && self.flip() {
                self.pick(pool).clone()
            } else {
                let img = FuncSym::new(format!("F{count}"), profile.0.clone(), profile.1.clone());
                count += 1;
                pool.push(img.clone());
                img
            };
            chi.function_map.insert(f.clone(), img.name.clone());
            tgt.base.functions.insert(img.clone());
            if src.is_rigid_func(f) {
                tgt.rigid.functions.insert(img);
            }
        }
        let mut rel_by_profile: BTreeMap<Vec<Name>, Vec<RelSym>> = BTreeMap::new();
        let mut rcount = 0usize;
        for r in &src.base.relations {
            let profile: Vec<Name> = r.arity.iter().map(|s| chi.apply_sort(s)).collect();
            let pool = rel_by_profile.entry(profile.clone()).or_default();
            let img = if !pool.is_empty() && self.flip() {
                self.pick(pool).clone()
            } else {
                let img = RelSym { name: format!("P{rcount}"), arity: profile.clone() };
                rcount += 1;
                pool.push(img.clone());
                img
            };
            chi.relation_map.insert(r.clone(), img.name.clone());
            tgt.base.relations.insert(img.clone());
            if src.is_rigid_rel(r) {
                tgt.rigid.relations.insert(img);
            }
        }
        chi.target = tgt;
        chi
    }

    /// A random structure over the signature, with world names carrying
    /// the given prefix so two generated structures can be disjoint.
    pub fn model(
        &mut self,
        sig: &HFOLSignature,
        max_worlds: usize,
        max_carrier: usize,
        prefix: &str,
    ) -> KripkeStructure {
        let nworlds = 1 + self.below(max_worlds);
        let worlds: BTreeSet<Name> = (0..nworlds).map(|i| format!("{prefix}w{i}")).collect();
        let world_list: Vec<Name> = worlds.iter().cloned().collect();
        let nominal_interp: BTreeMap<Name, Name> = sig
            .nominals
            .iter()
            .map(|k| (k.clone(), self.pick(&world_list).clone()))
            .collect();
        let mut unary_interp = BTreeMap::new();
        for m in &sig.unary_modalities {
            let ws: BTreeSet<Name> =
                world_list.iter().filter(|_| self.flip()).cloned().collect();
            unary_interp.insert(m.clone(), ws);
        }
        let mut binary_interp = BTreeMap::new();
        for l in &sig.binary_modalities {
            let mut pairs = BTreeSet::new();
            for a in &world_list {
                for b in &world_list {
                    if self.rng.gen_bool(0.3) {
                        pairs.insert((a.clone(), b.clone()));
                    }
                }
            }
            binary_interp.insert(l.clone(), pairs);
        }

        let mut rigid_carriers: BTreeMap<Name, BTreeSet<Name>> = BTreeMap::new();
        for s in sig.rigid.sorts.iter() {
            let n = 1 + self.below(max_carrier);
            rigid_carriers.insert(s.clone(), (0..n).map(|i| format!("e{i}")).collect());
        }
        let mut shells: BTreeMap<Name, WorldStructure> = BTreeMap::new();
        for w in &worlds {
            let mut ws = WorldStructure::default();
            for s in &sig.base.sorts {
                let carrier = match rigid_carriers.get(s) {
                    Some(c) => c.clone(),
                    None => {
                        let n = 1 + self.below(max_carrier);
                        (0..n).map(|i| format!("e{i}")).collect()
                    }
                };
                ws.carriers.insert(s.clone(), carrier);
            }
            shells.insert(w.clone(), ws);
        }
        // rigid interpretations are drawn once and copied everywhere
        let mut rigid_tables: BTreeMap<FuncSym, BTreeMap<Vec<Name>, Name>> = BTreeMap::new();
        let mut rigid_rows: BTreeMap<RelSym, BTreeSet<Vec<Name>>> = BTreeMap::new();
        let some_world = world_list[0].clone();
        for f in &sig.base.functions {
            if sig.is_rigid_func(f) {
                let table = self.random_table(&shells[&some_world], f);
                rigid_tables.insert(f.clone(), table);
            }
        }
        for r in &sig.base.relations {
            if sig.is_rigid_rel(r) {
                let rows = self.random_rows(&shells[&some_world], r);
                rigid_rows.insert(r.clone(), rows);
            }
        }
        let mut world_models = BTreeMap::new();
        for w in &worlds {
            let mut ws = shells[w].clone();
            for f in &sig.base.functions {
                let table = match rigid_tables.get(f) {
                    Some(t) => t.clone(),
                    None => self.random_table(&ws, f),
                };
                ws.functions.insert(f.clone(), table);
            }
            for r in &sig.base.relations {
                let rows = match rigid_rows.get(r) {
                    Some(t) => t.clone(),
                    None => self.random_rows(&ws, r),
                };
                ws.relations.insert(r.clone(), rows);
            }
            world_models.insert(w.clone(), ws);
        }
        KripkeStructure {
            sig: sig.clone(),
            worlds,
            nominal_interp,
            unary_interp,
            binary_interp,
            world_models,
        }
    }

    fn random_table(&mut self, ws: &WorldStructure, f: &FuncSym) -> BTreeMap<Vec<Name>, Name> {
        let pool: Vec<Name> = ws.carriers[&f.result].iter().cloned().collect();
        domain(ws, &f.arity)
            .into_iter()
            .map(|args| (args, self.pick(&pool).clone()))
            .collect()
    }

    fn random_rows(&mut self, ws: &WorldStructure, r: &RelSym) -> BTreeSet<Vec<Name>> {
        domain(ws, &r.arity).into_iter().filter(|_| self.flip()).collect()
    }

    /// A random wellformed sentence of bounded depth over the
    /// signature.
    pub fn sentence(&mut self, sig: &HFOLSignature, depth: usize) -> Sentence {
        let nominals: Vec<Name> = sig.nominals.iter().cloned().collect();
        let binaries: Vec<Name> = sig.binary_modalities.iter().cloned().collect();
        let rigid_sorts: Vec<Name> = sig.rigid.sorts.iter().cloned().collect();
        if depth == 0 {
            return self.atom(sig);
        }
        match self.below(8) {
            0 => self.atom(sig),
            1 => Sentence::not(self.sentence(sig, depth - 1)),
            2 => Sentence::or(vec![
                self.sentence(sig, depth - 1),
                self.sentence(sig, depth - 1),
            ]),
            3 if !nominals.is_empty() => {
                let k = self.pick(&nominals).clone();
                Sentence::at(k, self.sentence(sig, depth - 1))
            }
            4 if !binaries.is_empty() => {
                let l = self.pick(&binaries).clone();
                Sentence::Diamond(l, Box::new(self.sentence(sig, depth - 1)))
            }
            5 => {
                let z = crate::sig::fresh_name("z", &sig.all_names());
                let ext = extend(sig, &[Var::nominal(z.clone())]).expect("fresh binder");
                Sentence::Store(z, Box::new(self.sentence(&ext.extended, depth - 1)))
            }
            6 => {
                let z = crate::sig::fresh_name("z", &sig.all_names());
                let var = Var::nominal(z);
                let ext = extend(sig, &[var.clone()]).expect("fresh binder");
                Sentence::Exists(vec![var], Box::new(self.sentence(&ext.extended, depth - 1)))
            }
            7 if !rigid_sorts.is_empty() => {
                let s = self.pick(&rigid_sorts).clone();
                let y = crate::sig::fresh_name("y", &sig.all_names());
                let var = Var::rigid(y, s);
                let ext = extend(sig, &[var.clone()]).expect("fresh binder");
                Sentence::Exists(vec![var], Box::new(self.sentence(&ext.extended, depth - 1)))
            }
            _ => self.atom(sig),
        }
    }

    fn atom(&mut self, sig: &HFOLSignature) -> Sentence {
        let nominals: Vec<Name> = sig.nominals.iter().cloned().collect();
        let unaries: Vec<Name> = sig.unary_modalities.iter().cloned().collect();
        let terms = ground_terms(sig, 2);
        let eq_pools: Vec<&Vec<Term>> = terms.values().filter(|ts| !ts.is_empty()).collect();
        for _ in 0..8 {
            match self.below(5) {
                0 if !nominals.is_empty() => {
                    return Sentence::Nominal(self.pick(&nominals).clone())
                }
                1 if !unaries.is_empty() => return Sentence::Modal(self.pick(&unaries).clone()),
                2 if !eq_pools.is_empty() => {
                    let pool = self.pick(&eq_pools);
                    let a = self.pick(pool).clone();
                    let b = self.pick(pool).clone();
                    return Sentence::Eq(a, b);
                }
                3 => {
                    let at = if nominals.is_empty() || self.flip() {
                        None
                    } else {
                        Some(self.pick(&nominals).clone())
                    };
                    // argument sorts shift to @-sorts under a marker
                    let arg_sort = |at: &Option<Name>, s: &Name| match at {
                        Some(k) => at_sort(sig, k, s),
                        None => HybridSort::Plain(s.clone()),
                    };
                    let rels: Vec<&RelSym> = sig
                        .base
                        .relations
                        .iter()
                        .filter(|r| {
                            (at.is_none() || !sig.is_rigid_rel(r))
                                && r.arity.iter().all(|s| {
                                    terms
                                        .get(&arg_sort(&at, s))
                                        .map(|ts| !ts.is_empty())
                                        .unwrap_or(false)
                                })
                        })
                        .collect();
                    if let Some(r) = (!rels.is_empty()).then(|| *self.pick(&rels)) {
                        let args = r
                            .arity
                            .iter()
                            .map(|s| {
                                let pool = &terms[&arg_sort(&at, s)];
                                self.pick(pool).clone()
                            })
                            .collect();
                        return Sentence::Rel { at, sym: r.clone(), args };
                    }
                }
                _ => return if self.flip() { Sentence::truth() } else { Sentence::falsity() },
            }
        }
        Sentence::truth()
    }
}

fn domain(ws: &WorldStructure, arity: &[Name]) -> Vec<Vec<Name>> {
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

/// One valid input for the lifting construction.
pub struct LiftInstance {
    pub chi: SignatureMorphism,
    pub c1: SignatureExtension,
    pub v1n1: KripkeStructure,
    pub wm: KripkeStructure,
}

impl Gen {
    /// Generates a valid lifting instance: an inclusion adding rigid
    /// material and nominals, a reachable structure over the extended
    /// target, and an isomorphic copy of its reduct (optionally with a
    /// fresh unreachable flexible element grafted on).
    pub fn lift_instance(&mut self) -> LiftInstance {
        let mut delta = HFOLSignature::default();
        let nnoms = 1 + self.below(2);
        for i in 0..nnoms {
            delta.nominals.insert(format!("k{i}"));
        }
        delta.base.sorts.insert("r".into());
        delta.rigid.sorts.insert("r".into());
        delta.base.sorts.insert("fs".into());
        for c in ["a0", "a1"] {
            let f = FuncSym::constant(c, "r");
            delta.base.functions.insert(f.clone());
            delta.rigid.functions.insert(f);
        }
        for c in ["b0", "b1"] {
            delta.base.functions.insert(FuncSym::constant(c, "fs"));
        }
        if self.flip() {
            delta.base.relations.insert(RelSym { name: "p".into(), arity: vec!["fs".into()] });
        }

        let mut delta1 = delta.clone();
        delta1.nominals.insert("j".into());
        let a2 = FuncSym::constant("a2", "r");
        delta1.base.functions.insert(a2.clone());
        delta1.rigid.functions.insert(a2);
        let with_r2 = self.flip();
        if with_r2 {
            delta1.base.sorts.insert("r2".into());
            delta1.rigid.sorts.insert("r2".into());
            let d0 = FuncSym::constant("d0", "r2");
            delta1.base.functions.insert(d0.clone());
            delta1.rigid.functions.insert(d0);
        }
        if self.flip() {
            delta1.base.relations.insert(RelSym { name: "q".into(), arity: vec!["r".into()] });
        }
        let mut chi = SignatureMorphism::identity(&delta);
        chi.target = delta1.clone();

        let mut vars = Vec::new();
        if self.flip() {
            vars.push(Var::nominal("zc"));
        }
        if self.flip() {
            vars.push(Var::rigid("yc", "r"));
        }
        let c1 = extend(&delta1, &vars).expect("constant extension");
        let sig1c1 = c1.extended.clone();

        // worlds must all be named by nominals visible to the reduct
        let mut shared_noms: Vec<Name> = delta.nominals.iter().cloned().collect();
        if vars.iter().any(|v| v.name == "zc") {
            shared_noms.push("zc".into());
        }
        let nworlds = 1 + self.below(shared_noms.len());
        let worlds: Vec<Name> = (0..nworlds).map(|i| format!("u{i}")).collect();
        let mut nominal_interp: BTreeMap<Name, Name> = BTreeMap::new();
        for (i, k) in shared_noms.iter().enumerate() {
            let w = if i < nworlds {
                worlds[i].clone()
            } else {
                self.pick(&worlds).clone()
            };
            nominal_interp.insert(k.clone(), w);
        }
        nominal_interp.insert("j".into(), self.pick(&worlds).clone());

        // rigid constants visible to the reduct must cover the carrier
        let mut r_consts: Vec<Name> = vec!["a0".into(), "a1".into()];
        if vars.iter().any(|v| v.name == "yc") {
            r_consts.push("yc".into());
        }
        let r_size = 1 + self.below(r_consts.len());
        let r_carrier: BTreeSet<Name> = (0..r_size).map(|i| format!("e{i}")).collect();
        let r_elems: Vec<Name> = r_carrier.iter().cloned().collect();
        let mut r_values: BTreeMap<Name, Name> = BTreeMap::new();
        for (i, c) in r_consts.iter().enumerate() {
            let v = if i < r_size { r_elems[i].clone() } else { self.pick(&r_elems).clone() };
            r_values.insert(c.clone(), v);
        }
        r_values.insert("a2".into(), self.pick(&r_elems).clone());

        let mut world_models = BTreeMap::new();
        for w in &worlds {
            let mut ws = WorldStructure::default();
            ws.carriers.insert("r".into(), r_carrier.clone());
            let fs_size = 1 + self.below(2);
            let fs_carrier: BTreeSet<Name> = (0..fs_size).map(|i| format!("x{i}")).collect();
            let fs_elems: Vec<Name> = fs_carrier.iter().cloned().collect();
            ws.carriers.insert("fs".into(), fs_carrier);
            if with_r2 {
                ws.carriers.insert("r2".into(), ["h0".to_string()].into());
            }
            for f in &sig1c1.base.functions {
                let table = match f.result.as_str() {
                    "r" => [(vec![], r_values[&f.name].clone())].into(),
                    "r2" => [(vec![], "h0".to_string())].into(),
                    _ => [(vec![], self.pick(&fs_elems).clone())].into(),
                };
                ws.functions.insert(f.clone(), table);
            }
            for r in &sig1c1.base.relations {
                let rows = self.random_rows(&ws, r);
                ws.relations.insert(r.clone(), rows);
            }
            world_models.insert(w.clone(), ws);
        }
        // rigid relations drawn per world above would break sharing;
        // this family only uses flexible relations, so nothing to fix
        let v1n1 = KripkeStructure {
            sig: sig1c1,
            worlds: worlds.iter().cloned().collect(),
            nominal_interp,
            unary_interp: BTreeMap::new(),
            binary_interp: BTreeMap::new(),
            world_models,
        };

        let (_, chi_c) =
            crate::squares::reduct_extension(&chi, &c1).expect("reduct extension");
        let red = reduct(&chi_c, &v1n1).expect("reduct of the generated structure");
        let mut wm = self.isomorphic_copy(&red);
        if self.flip() {
            let w = wm.worlds.iter().next().unwrap().clone();
            let plan = SwapPlan::default().add_element(&w, "fs", "fresh!");
            wm = crate::semantics::swap_unreachable(&wm, &plan, 3)
                .expect("grafting an unreachable element");
        }
        LiftInstance { chi, c1, v1n1, wm }
    }

    /// A structure isomorphic to the input, with worlds and elements
    /// bijectively renamed.
    pub fn isomorphic_copy(&mut self, m: &KripkeStructure) -> KripkeStructure {
        let world_list: Vec<Name> = m.worlds.iter().cloned().collect();
        let mut targets: Vec<Name> = (0..world_list.len()).map(|i| format!("t{i}")).collect();
        self.shuffle(&mut targets);
        let wmap: BTreeMap<Name, Name> =
            world_list.iter().cloned().zip(targets.into_iter()).collect();

        // rigid sorts get one shared renaming, flexible sorts one per world
        let mut rigid_maps: BTreeMap<Name, BTreeMap<Name, Name>> = BTreeMap::new();
        for s in &m.sig.rigid.sorts {
            let carrier = &m.world_models[&world_list[0]].carriers[s];
            rigid_maps.insert(s.clone(), self.random_bijection(carrier, "g"));
        }
        let mut elem_maps: BTreeMap<(Name, Name), BTreeMap<Name, Name>> = BTreeMap::new();
        for w in &world_list {
            for (s, carrier) in &m.world_models[w].carriers {
                let map = match rigid_maps.get(s) {
                    Some(map) => map.clone(),
                    None => self.random_bijection(carrier, "g"),
                };
                elem_maps.insert((w.clone(), s.clone()), map);
            }
        }
        let emap = |w: &Name, s: &Name, e: &Name| elem_maps[&(w.clone(), s.clone())][e].clone();

        let mut world_models = BTreeMap::new();
        for w in &world_list {
            let old = &m.world_models[w];
            let mut ws = WorldStructure::default();
            for (s, carrier) in &old.carriers {
                ws.carriers.insert(s.clone(), carrier.iter().map(|e| emap(w, s, e)).collect());
            }
            for (f, table) in &old.functions {
                let mut t2 = BTreeMap::new();
                for (args, val) in table {
                    let args2 = args
                        .iter()
                        .zip(f.arity.iter())
                        .map(|(e, s)| emap(w, s, e))
                        .collect();
                    t2.insert(args2, emap(w, &f.result, val));
                }
                ws.functions.insert(f.clone(), t2);
            }
            for (r, rows) in &old.relations {
                let rows2 = rows
                    .iter()
                    .map(|row| {
                        row.iter().zip(r.arity.iter()).map(|(e, s)| emap(w, s, e)).collect()
                    })
                    .collect();
                ws.relations.insert(r.clone(), rows2);
            }
            world_models.insert(wmap[w].clone(), ws);
        }
        KripkeStructure {
            sig: m.sig.clone(),
            worlds: m.worlds.iter().map(|w| wmap[w].clone()).collect(),
            nominal_interp: m
                .nominal_interp
                .iter()
                .map(|(k, w)| (k.clone(), wmap[w].clone()))
                .collect(),
            unary_interp: m
                .unary_interp
                .iter()
                .map(|(r, ws)| (r.clone(), ws.iter().map(|w| wmap[w].clone()).collect()))
                .collect(),
            binary_interp: m
                .binary_interp
                .iter()
                .map(|(l, pairs)| {
                    (
                        l.clone(),
                        pairs
                            .iter()
                            .map(|(a, b)| (wmap[a].clone(), wmap[b].clone()))
                            .collect(),
                    )
                })
                .collect(),
            world_models,
        }
    }

    fn random_bijection(&mut self, carrier: &BTreeSet<Name>, prefix: &str) -> BTreeMap<Name, Name> {
        let mut targets: Vec<Name> = (0..carrier.len()).map(|i| format!("{prefix}{i}")).collect();
        self.shuffle(&mut targets);
        carrier.iter().cloned().zip(targets.into_iter()).collect()
    }

    fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.below(i + 1);
            xs.swap(i, j);
        }
    }
}

/// A pushout square of inclusions with a vertex structure and its two
/// leg reducts.
pub struct SquareInstance {
    pub chi1: SignatureMorphism,
    pub chi2: SignatureMorphism,
    pub po: crate::sig::Pushout,
    pub m1: KripkeStructure,
    pub m2: KripkeStructure,
}

impl Gen {
    pub fn square_instance(&mut self) -> SquareInstance {
        let delta = self.signature();
        let rigid_sorts: Vec<Name> = delta.rigid.sorts.iter().cloned().collect();
        let extend_sig = |this: &mut Self, base: &HFOLSignature, tag: &str| -> HFOLSignature {
            let mut out = base.clone();
            out.nominals.insert(format!("x{tag}"));
            if !rigid_sorts.is_empty() && this.flip() {
                let s = this.pick(&rigid_sorts).clone();
                let f = FuncSym::constant(format!("c{tag}"), s);
                out.base.functions.insert(f.clone());
                out.rigid.functions.insert(f);
            }
            if this.flip() {
                let sorts: Vec<Name> = out.base.sorts.iter().cloned().collect();
                let s = this.pick(&sorts).clone();
                out.base.relations.insert(RelSym { name: format!("q{tag}"), arity: vec![s] });
            }
            out
        };
        let d1 = extend_sig(self, &delta, "1");
        let d2 = extend_sig(self, &delta, "2");
        let mut chi1 = SignatureMorphism::identity(&delta);
        chi1.target = d1;
        let mut chi2 = SignatureMorphism::identity(&delta);
        chi2.target = d2;
        let po = crate::sig::pushout(&chi1, &chi2).expect("pushout of inclusions");
        let m = self.model(&po.vertex, 2, 2, "");
        let m1 = reduct(&po.left_leg, &m).expect("left reduct");
        let m2 = reduct(&po.right_leg, &m).expect("right reduct");
        SquareInstance { chi1, chi2, po, m1, m2 }
    }
}
