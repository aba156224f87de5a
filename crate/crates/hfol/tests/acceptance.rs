//! End-to-end acceptance checks. Each test prints one summary line so
//! `cargo test -- --nocapture` gives a one-page report.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use hfol::frontend::{parse_document, print_workspace};
use hfol::gen::Gen;
use hfol::relativize::{
    relativized_reduct, relativized_union_models, relativized_union_sig, rt_translate,
    ForeignPolicy,
};
use hfol::semantics::{
    enumerate_models, equivalent_on, probe_sentences, reduct, sat_global, sat_local,
    swap_unreachable, validate_model, SwapPlan,
};
use hfol::sig::{
    mediator, pushout, validate_morphism, FuncSym, HFOLSignature, Name, SignatureMorphism,
};
use hfol::squares::{
    amalgamate, analyze_span, fixtures, lift_expansion, protects_flexible, reduct_extension,
    verify_counterexample, CaseId, Span,
};
use hfol::syntax::{semantic_opposite, translate};

fn report(n: usize, desc: &str, ok: bool) {
    println!("criterion {n}: {} ({desc})", if ok { "pass" } else { "FAIL" });
    assert!(ok, "criterion {n} failed: {desc}");
}

#[test]
fn criterion_01_first_counterexample_replays() {
    let start = Instant::now();
    let rep = verify_counterexample(CaseId::Counter1).unwrap();
    let ok = rep.all_pass && start.elapsed() < Duration::from_secs(1);
    report(1, "counter-1 replays exactly in under a second", ok);
}

#[test]
fn criterion_02_remaining_counterexamples_replay() {
    let mut ok = true;
    for case in [CaseId::Counter2, CaseId::Counter3] {
        let start = Instant::now();
        let rep = verify_counterexample(case).unwrap();
        ok = ok && rep.all_pass && start.elapsed() < Duration::from_secs(1);
    }
    report(2, "counter-2 and counter-3 replay exactly in under a second each", ok);
}

#[test]
fn criterion_03_protection_verdicts() {
    let r1 = analyze_span(&fixtures::counter1());
    let mut ok = !r1.leg1.injective_on_sorts
        && !r1.leg1.injective_on_nominals
        && !r1.leg2.injective_on_sorts
        && !r1.leg2.injective_on_nominals
        && !r1.hypotheses_hold;

    let r2 = analyze_span(&fixtures::counter2());
    ok = ok
        && !r2.leg2.protects_flexible
        && r2.leg2.protects_witness.as_deref().unwrap_or("").contains("c2")
        && !r2.hypotheses_hold;

    let r3 = analyze_span(&fixtures::counter3());
    ok = ok
        && !r3.leg2.preserves_flexible
        && r3.leg2.preserves_witness.as_deref().unwrap_or("").contains("Nat")
        && !r3.hypotheses_hold;

    // positive cases: no flexible sorts at all, and an identity with them
    let rigid_only = fixtures::counter2().chi1.target.clone();
    let (p1, _) = protects_flexible(&SignatureMorphism::identity(&rigid_only));
    let with_flex = fixtures::counter3().chi1.source.clone();
    let (p2, _) = protects_flexible(&SignatureMorphism::identity(&with_flex));
    ok = ok && p1 && p2;
    report(3, "protection verdicts and witnesses on all fixture spans", ok);
}

#[test]
fn criterion_04_translation_satisfaction_condition() {
    let start = Instant::now();
    let mut g = Gen::new(401);
    let mut instances = 0usize;
    let mut seed_round = 0usize;
    while instances < 10_000 {
        seed_round += 1;
        let src = g.signature();
        let chi = g.morphism(&src);
        let model = g.model(&chi.target, 3, 3, "w");
        let depth = 1 + seed_round % 5;
        let phi = g.sentence(&src, depth);
        let tphi = translate(&chi, &phi).unwrap();
        let red = reduct(&chi, &model).unwrap();
        for w in &model.worlds {
            let lhs = sat_local(&model, w, &tphi).unwrap();
            let rhs = sat_local(&red, w, &phi).unwrap();
            assert_eq!(lhs, rhs, "satisfaction condition failed on {phi:?} at {w}");
            instances += 1;
        }
    }
    let ok = start.elapsed() < Duration::from_secs(60);
    report(4, &format!("{instances} translation satisfaction instances"), ok);
}

#[test]
fn criterion_05_rt_satisfaction_condition() {
    let start = Instant::now();
    let mut g = Gen::new(501);
    let mut instances = 0usize;
    let mut bicond = 0usize;
    while instances < 2_000 {
        let d1 = g.signature();
        let d2 = g.signature();
        let ru = relativized_union_sig(&d1, &d2);
        let m1 = g.model(&d1, 2, 2, "a");
        let m2 = g.model(&d2, 2, 2, "b");
        let union = relativized_union_models(&ru, &m1, &m2, ForeignPolicy::OneElement).unwrap();
        for part in [1usize, 2] {
            let part_sig = if part == 1 { &d1 } else { &d2 };
            let red = relativized_reduct(&ru, &union, part).unwrap();
            let gamma = g.sentence(part_sig, 2);
            let tr = rt_translate(&ru, part, &gamma).unwrap();
            for w in &union.worlds {
                let lhs = sat_local(&union, w, &tr).unwrap();
                if red.worlds.contains(w) {
                    assert_eq!(lhs, sat_local(&red, w, &gamma).unwrap(), "at {w}: {gamma:?}");
                } else {
                    assert!(lhs, "guarded translation fails outside its part at {w}");
                }
            }
            assert_eq!(
                sat_global(&union, &tr).unwrap(),
                sat_global(&red, &gamma).unwrap(),
                "global satisfaction condition on {gamma:?}"
            );
            instances += 1;
            if bicond < 600 {
                let other =
                    relativized_union_models(&ru, &m1, &m2, ForeignPolicy::TwoElements).unwrap();
                assert_eq!(
                    sat_global(&union, &tr).unwrap(),
                    sat_global(&other, &tr).unwrap(),
                    "the two union expansions disagree on {gamma:?}"
                );
                bicond += 1;
            }
        }
    }
    let ok = bicond >= 500 && start.elapsed() < Duration::from_secs(120);
    report(5, &format!("{instances} rt instances, {bicond} expansion agreements"), ok);
}

/// All signature morphisms between two given signatures, by brute
/// force over the kind-wise maps.
fn all_morphisms(a: &HFOLSignature, b: &HFOLSignature) -> Vec<SignatureMorphism> {
    fn maps<K: Clone + Ord>(keys: &[K], vals: &[Name]) -> Vec<BTreeMap<K, Name>> {
        let mut out = vec![BTreeMap::new()];
        for k in keys {
            if vals.is_empty() {
                return Vec::new();
            }
            let mut next = Vec::new();
            for m in &out {
                for v in vals {
                    let mut m = m.clone();
                    m.insert(k.clone(), v.clone());
                    next.push(m);
                }
            }
            out = next;
        }
        out
    }
    let src_sorts: Vec<Name> = a.base.sorts.iter().cloned().collect();
    let tgt_sorts: Vec<Name> = b.base.sorts.iter().cloned().collect();
    let src_noms: Vec<Name> = a.nominals.iter().cloned().collect();
    let tgt_noms: Vec<Name> = b.nominals.iter().cloned().collect();
    let src_funcs: Vec<FuncSym> = a.base.functions.iter().cloned().collect();
    let mut out = Vec::new();
    for sort_map in maps(&src_sorts, &tgt_sorts) {
        if a.rigid.sorts.iter().any(|s| !b.rigid.sorts.contains(&sort_map[s])) {
            continue;
        }
        for nominal_map in maps(&src_noms, &tgt_noms) {
            // candidate target names per function, profile-compatible
            let mut per_func: Vec<Vec<Name>> = Vec::new();
            for f in &src_funcs {
                let want_arity: Vec<Name> = f.arity.iter().map(|s| sort_map[s].clone()).collect();
                let want_result = sort_map[&f.result].clone();
                let cands: Vec<Name> = b
                    .base
                    .functions
                    .iter()
                    .filter(|g| {
                        g.arity == want_arity
                            && g.result == want_result
                            && (!a.is_rigid_func(f) || b.is_rigid_func(g))
                    })
                    .map(|g| g.name.clone())
                    .collect();
                per_func.push(cands);
            }
            let mut fmaps: Vec<BTreeMap<FuncSym, Name>> = vec![BTreeMap::new()];
            for (f, cands) in src_funcs.iter().zip(&per_func) {
                if cands.is_empty() {
                    fmaps.clear();
                    break;
                }
                let mut next = Vec::new();
                for m in &fmaps {
                    for c in cands {
                        let mut m = m.clone();
                        m.insert(f.clone(), c.clone());
                        next.push(m);
                    }
                }
                fmaps = next;
            }
            for function_map in fmaps {
                let chi = SignatureMorphism {
                    source: a.clone(),
                    target: b.clone(),
                    nominal_map: nominal_map.clone(),
                    modality_map: BTreeMap::new(),
                    sort_map: sort_map.clone(),
                    function_map,
                    relation_map: BTreeMap::new(),
                };
                if validate_morphism(&chi).is_empty() {
                    out.push(chi);
                }
            }
        }
    }
    out
}

fn cocone_commutes(
    chi1: &SignatureMorphism,
    chi2: &SignatureMorphism,
    t1: &SignatureMorphism,
    t2: &SignatureMorphism,
) -> bool {
    chi1.source.base.sorts.iter().all(|s| {
        t1.sort_map[&chi1.sort_map[s]] == t2.sort_map[&chi2.sort_map[s]]
    }) && chi1.source.nominals.iter().all(|k| {
        t1.nominal_map[&chi1.nominal_map[k]] == t2.nominal_map[&chi2.nominal_map[k]]
    }) && chi1.source.base.functions.iter().all(|f| {
        let g1 = chi1.apply_func(f);
        let g2 = chi2.apply_func(f);
        t1.function_map[&g1] == t2.function_map[&g2]
    })
}

/// Small signatures with constants only: every combination of up to
/// two sorts (each rigid or flexible), up to two nominals, and per
/// sort an optional constant (flexible, or rigid where the sort is).
fn bounded_signatures() -> Vec<HFOLSignature> {
    let mut out = Vec::new();
    for nsorts in 0..=2usize {
        let sorts: Vec<Name> = (1..=nsorts).map(|i| format!("s{i}")).collect();
        for rigid_mask in 0..1usize << nsorts {
            for nnoms in 0..=2usize {
                let const_opts: Vec<usize> = (0..nsorts)
                    .map(|i| if rigid_mask >> i & 1 == 1 { 3 } else { 2 })
                    .collect();
                let total: usize = const_opts.iter().product::<usize>().max(1);
                for combo in 0..total {
                    let mut sig = HFOLSignature::default();
                    for k in 1..=nnoms {
                        sig.nominals.insert(format!("k{k}"));
                    }
                    let mut rest = combo;
                    for (i, s) in sorts.iter().enumerate() {
                        sig.base.sorts.insert(s.clone());
                        if rigid_mask >> i & 1 == 1 {
                            sig.rigid.sorts.insert(s.clone());
                        }
                        let choice = rest % const_opts[i];
                        rest /= const_opts[i];
                        if choice > 0 {
                            let f = FuncSym::constant(format!("c{}", i + 1), s.clone());
                            sig.base.functions.insert(f.clone());
                            if choice == 2 {
                                sig.rigid.functions.insert(f);
                            }
                        }
                    }
                    out.push(sig);
                }
            }
        }
    }
    out
}

/// Quotient morphisms out of a bounded source: merge the two sorts,
/// the two nominals, the two constants, in every consistent way.
fn quotient_legs(sig: &HFOLSignature) -> Vec<SignatureMorphism> {
    let sorts: Vec<Name> = sig.base.sorts.iter().cloned().collect();
    let noms: Vec<Name> = sig.nominals.iter().cloned().collect();
    let mut out = Vec::new();
    let sort_merges: Vec<bool> =
        if sorts.len() == 2 && sig.is_rigid_sort(&sorts[0]) == sig.is_rigid_sort(&sorts[1]) {
            vec![false, true]
        } else {
            vec![false]
        };
    let nom_merges: Vec<bool> = if noms.len() == 2 { vec![false, true] } else { vec![false] };
    for &merge_sorts in &sort_merges {
        for &merge_noms in &nom_merges {
            let consts: Vec<FuncSym> = sig.base.functions.iter().cloned().collect();
            let can_merge_consts = consts.len() == 2
                && (merge_sorts || consts[0].result == consts[1].result)
                && sig.is_rigid_func(&consts[0]) == sig.is_rigid_func(&consts[1]);
            let const_merges: Vec<bool> =
                if can_merge_consts { vec![false, true] } else { vec![false] };
            for &merge_consts in &const_merges {
                let mut target = HFOLSignature::default();
                let mut chi = SignatureMorphism::identity(sig);
                for s in &sorts {
                    let img = if merge_sorts { sorts[0].clone() } else { s.clone() };
                    target.base.sorts.insert(img.clone());
                    if sig.is_rigid_sort(s) {
                        target.rigid.sorts.insert(img.clone());
                    }
                    chi.sort_map.insert(s.clone(), img);
                }
                for k in &noms {
                    let img = if merge_noms { noms[0].clone() } else { k.clone() };
                    target.nominals.insert(img.clone());
                    chi.nominal_map.insert(k.clone(), img);
                }
                for f in &consts {
                    let name = if merge_consts { consts[0].name.clone() } else { f.name.clone() };
                    let result = chi.sort_map[&f.result].clone();
                    let img = FuncSym::constant(name.clone(), result);
                    target.base.functions.insert(img.clone());
                    if sig.is_rigid_func(f) {
                        target.rigid.functions.insert(img);
                    }
                    chi.function_map.insert(f.clone(), name);
                }
                chi.target = target;
                if validate_morphism(&chi).is_empty() {
                    out.push(chi);
                }
            }
        }
    }
    out
}

fn cocone_targets() -> Vec<HFOLSignature> {
    let mut a = HFOLSignature::default();
    a.nominals.insert("n1".into());
    a.base.sorts.insert("t1".into());
    a.base.functions.insert(FuncSym::constant("d1", "t1"));

    let mut b = HFOLSignature::default();
    b.nominals.extend(["n1".to_string(), "n2".to_string()]);
    b.base.sorts.extend(["t1".to_string(), "t2".to_string()]);
    b.rigid.sorts.insert("t2".into());
    b.base.functions.insert(FuncSym::constant("d1", "t1"));
    let d2 = FuncSym::constant("d2", "t2");
    b.base.functions.insert(d2.clone());
    b.rigid.functions.insert(d2);

    let mut c = HFOLSignature::default();
    c.nominals.insert("n1".into());
    c.base.sorts.extend(["t1".to_string(), "t2".to_string(), "t3".to_string()]);
    c.rigid.sorts.extend(["t2".to_string(), "t3".to_string()]);
    c.base.functions.insert(FuncSym::constant("d1", "t1"));
    let d3 = FuncSym::constant("d3", "t3");
    c.base.functions.insert(d3.clone());
    c.rigid.functions.insert(d3);

    vec![a, b, c]
}

#[test]
fn criterion_06_pushout_universal_property() {
    let targets = cocone_targets();
    let mut spans = 0usize;
    let mut cocones = 0usize;
    for delta in bounded_signatures() {
        let legs = quotient_legs(&delta);
        for chi1 in &legs {
            for chi2 in &legs {
                let po = pushout(chi1, chi2).unwrap();
                spans += 1;
                for t in &targets {
                    let m1 = all_morphisms(&chi1.target, t);
                    let m2 = all_morphisms(&chi2.target, t);
                    let mut vertex_morphisms: Option<Vec<SignatureMorphism>> = None;
                    for t1 in &m1 {
                        for t2 in &m2 {
                            if !cocone_commutes(chi1, chi2, t1, t2) {
                                continue;
                            }
                            cocones += 1;
                            let all = vertex_morphisms
                                .get_or_insert_with(|| all_morphisms(&po.vertex, t));
                            let commuting: Vec<&SignatureMorphism> = all
                                .iter()
                                .filter(|u| {
                                    cocone_commutes(
                                        &SignatureMorphism::identity(&chi1.target),
                                        &po.left_leg,
                                        t1,
                                        u,
                                    )
                                        && cocone_commutes(
                                            &SignatureMorphism::identity(&chi2.target),
                                            &po.right_leg,
                                            t2,
                                            u,
                                        )
                                })
                                .collect();
                            assert_eq!(
                                commuting.len(),
                                1,
                                "mediator not unique for a cocone over {delta:?}"
                            );
                            let med = mediator(&po, chi1, chi2, t1, t2).unwrap();
                            assert_eq!(&med, commuting[0]);
                        }
                    }
                }
            }
        }
    }
    // the first fixture's pushout collapses to one nominal, one sort
    // and two constants
    let span = fixtures::counter1();
    let po = pushout(&span.chi1, &span.chi2).unwrap();
    let shape_ok = po.vertex.nominals.len() == 1
        && po.vertex.base.sorts.len() == 1
        && po.vertex.rigid.sorts.is_empty()
        && po.vertex.base.functions.len() == 2;
    report(
        6,
        &format!("{spans} spans, {cocones} commuting cocones, fixture pushout shape"),
        cocones > 0 && shape_ok,
    );
}

#[test]
fn criterion_07_lifting_construction() {
    let mut g = Gen::new(701);
    let mut count = 0usize;
    while count < 200 {
        let inst = g.lift_instance();
        let lifted = lift_expansion(&inst.chi, &inst.c1, &inst.v1n1, &inst.wm, 3).unwrap();
        assert!(validate_model(&lifted).is_empty(), "{:?}", validate_model(&lifted));
        let (_, chi_c) = reduct_extension(&inst.chi, &inst.c1).unwrap();
        assert_eq!(reduct(&chi_c, &lifted).unwrap(), inst.wm, "reduct is not exact");
        let probe = probe_sentences(&inst.v1n1.sig, 3, 1);
        let (eq, witness) = equivalent_on(&lifted, &inst.v1n1, &probe).unwrap();
        assert!(eq, "distinguished by {witness:?}");
        count += 1;
    }

    // engineered failures name the violated precondition
    let span = fixtures::counter1();
    let c1 = hfol::sig::extend(&span.chi1.target, &[]).unwrap();
    let m = fixtures::counter1_w1m1();
    let red = reduct(&span.chi1, &m).unwrap();
    let err = lift_expansion(&span.chi1, &c1, &m, &red, 3).unwrap_err().to_string();
    let noninjective_named = err.contains("injective");

    let span2 = fixtures::counter2();
    let id = SignatureMorphism::identity(&span2.chi1.target);
    let c1 = hfol::sig::extend(&span2.chi1.target, &[]).unwrap();
    let m = fixtures::counter2_w1m1_over_delta1();
    let mut other = m.clone();
    other.world_models.get_mut("w").unwrap().carriers.get_mut("s").unwrap().insert("d".into());
    let err2 = lift_expansion(&id, &c1, &other, &m, 3).unwrap_err().to_string();
    let mismatch_named = err2.contains("bijective") || err2.contains("reachable");

    report(
        7,
        &format!("{count} lifted instances with exact reducts and probe equivalence"),
        noninjective_named && mismatch_named,
    );
}

#[test]
fn criterion_08_amalgamation() {
    let mut g = Gen::new(801);
    let mut count = 0usize;
    while count < 500 {
        let inst = g.square_instance();
        let v = amalgamate(&inst.chi1, &inst.chi2, &inst.po, &inst.m1, &inst.m2).unwrap();
        assert_eq!(reduct(&inst.po.left_leg, &v).unwrap(), inst.m1);
        assert_eq!(reduct(&inst.po.right_leg, &v).unwrap(), inst.m2);
        count += 1;
    }

    // uniqueness, exhaustively at two worlds and two elements
    let span = fixtures::counter2();
    let po = pushout(&span.chi1, &span.chi2).unwrap();
    let all = enumerate_models(&po.vertex, 2, 2);
    let mut uniq = 0usize;
    for v in &all {
        let m1 = reduct(&po.left_leg, v).unwrap();
        let m2 = reduct(&po.right_leg, v).unwrap();
        let same: Vec<&_> = all
            .iter()
            .filter(|u| {
                reduct(&po.left_leg, u).unwrap() == m1 && reduct(&po.right_leg, u).unwrap() == m2
            })
            .collect();
        assert_eq!(same.len(), 1, "amalgamation not unique");
        let back = amalgamate(&span.chi1, &span.chi2, &po, &m1, &m2).unwrap();
        assert_eq!(&back, v);
        uniq += 1;
    }

    // disagreeing reducts are rejected with the documented error
    let inst = g.square_instance();
    let mut bad = inst.m2.clone();
    let extra = format!("x{}", bad.worlds.len());
    bad.worlds.insert(extra.clone());
    let copied = bad.world_models.values().next().unwrap().clone();
    bad.world_models.insert(extra, copied);
    let err = amalgamate(&inst.chi1, &inst.chi2, &inst.po, &inst.m1, &bad)
        .unwrap_err()
        .to_string();
    report(
        8,
        &format!("{count} amalgamated squares, {uniq} exhaustive uniqueness checks"),
        uniq > 0 && err.contains("reducts disagree"),
    );
}

#[test]
fn criterion_09_surgery_and_opposites() {
    let mut g = Gen::new(901);
    let mut swaps = 0usize;
    while swaps < 1_000 {
        let sig = g.signature();
        let flex: Vec<Name> = sig.flexible_sorts().into_iter().collect();
        if flex.is_empty() {
            continue;
        }
        let m = g.model(&sig, 2, 2, "w");
        let w = m.worlds.iter().next().unwrap().clone();
        let s = &flex[swaps % flex.len()];
        let plan = SwapPlan::default().add_element(&w, s, "fresh!e");
        let swapped = swap_unreachable(&m, &plan, 2).unwrap();
        let probe = probe_sentences(&sig, 2, 1);
        let (eq, witness) = equivalent_on(&m, &swapped, &probe).unwrap();
        assert!(eq, "swap broke equivalence: {witness:?}");
        swaps += 1;
    }

    let mut opposites = 0usize;
    while opposites < 1_000 {
        let sig = g.signature();
        let m = g.model(&sig, 2, 2, "w");
        let psi = g.sentence(&sig, 2);
        let plus = semantic_opposite(&sig, &psi, true);
        let minus = semantic_opposite(&sig, &psi, false);
        let holds = sat_global(&m, &psi).unwrap();
        assert_eq!(holds, sat_global(&m, &plus).unwrap(), "+ law failed on {psi:?}");
        assert_eq!(!holds, sat_global(&m, &minus).unwrap(), "- law failed on {psi:?}");
        opposites += 1;
    }
    report(9, &format!("{swaps} surgery equivalences, {opposites} opposite laws"), true);
}

#[test]
fn criterion_10_round_trip_and_determinism() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let mut files = 0usize;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let ws = parse_document(&text).unwrap();
        let printed = print_workspace(&ws);
        assert_eq!(parse_document(&printed).unwrap(), ws, "{path:?} round trip");
        assert_eq!(print_workspace(&parse_document(&printed).unwrap()), printed);
        files += 1;
    }
    let run = || {
        std::process::Command::new(env!("CARGO_BIN_EXE_hfol"))
            .args(["--json", "verify-paper", "--case", "all"])
            .env_remove("HFOL_COLOR")
            .output()
            .unwrap()
    };
    let a = run();
    let b = run();
    let ok = files == 3 && a.status.success() && a.stdout == b.stdout && !a.stdout.is_empty();
    report(10, &format!("{files} fixtures round-trip, JSON replay byte-identical"), ok);
}

// spot checks shared by several criteria

#[test]
fn fixture_spans_have_the_declared_legs() {
    for span in [fixtures::counter1(), fixtures::counter2(), fixtures::counter3()] {
        let Span { chi1, chi2, .. } = span;
        assert_eq!(chi1.source, chi2.source);
        assert!(validate_morphism(&chi1).is_empty());
        assert!(validate_morphism(&chi2).is_empty());
    }
}
