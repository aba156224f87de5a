//! Command dispatch for the `hfol` binary. Every subcommand reads its
//! named objects from the workspaces given with `--file`, runs one
//! library operation and prints a text or JSON report.
//!
//! Exit codes: 0 when every checked property holds, 1 when a checked
//! property fails, 2 on input or usage errors.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Parser as ClapParser, Subcommand};
use serde_json::{json, Value};

use crate::relativize::{relativized_union_sig, rt_translate};
use crate::semantics::{probe_sentences, reduct, sat_global, sat_local, consequence_bounded, Verdict};
use crate::sig::{extend, pushout, validate_morphism, validate_signature, SignatureMorphism};
use crate::squares::{
    amalgamate, analyze_span, lift_expansion, protects_flexible, verify_counterexample, CaseId,
    Span,
};
use crate::syntax::translate;
use crate::{Error, Result};

use super::{
    parse_document, parse_sentence, print_model, print_sentence, print_signature, Workspace,
};

#[derive(ClapParser)]
#[command(name = "hfol", about = "hybrid first-order logic toolkit", disable_help_subcommand = true)]
struct Cli {
    /// emit a JSON report instead of text
    #[arg(long, global = true)]
    json: bool,
    /// workspace documents to load, in order
    #[arg(long = "file", global = true)]
    files: Vec<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// validate a signature: check-sig sig=NAME
    CheckSig { args: Vec<String> },
    /// validate a morphism: check-morphism morphism=NAME
    CheckMorphism {
        args: Vec<String>,
        /// also require the flexible-symbol protection criterion
        #[arg(long)]
        protects_flexible: bool,
        /// also require injectivity on sorts and nominals
        #[arg(long)]
        injective: bool,
    },
    /// translate a sentence along a morphism: translate morphism=NAME sentence=TEXT
    Translate { args: Vec<String> },
    /// reduct of a model along a morphism: reduct morphism=NAME model=NAME
    Reduct { args: Vec<String> },
    /// satisfaction: sat model=NAME sentence=TEXT (--world W or --global)
    Sat {
        args: Vec<String>,
        #[arg(long)]
        world: Option<String>,
        #[arg(long)]
        global: bool,
    },
    /// pushout of a span: pushout span=NAME
    Pushout { args: Vec<String> },
    /// amalgamate models over a span: amalgamate span=NAME m1=NAME m2=NAME
    Amalgamate { args: Vec<String> },
    /// relativized union of two signatures: relativize sig1=A sig2=B
    Relativize {
        args: Vec<String>,
        /// translate this sentence instead of printing the union
        #[arg(long)]
        rt: Option<String>,
        /// which part the --rt sentence lives over (1 or 2)
        #[arg(long, default_value_t = 1)]
        part: usize,
    },
    /// lift a model along a morphism: lift morphism=NAME expansion=NAME model=NAME
    Lift {
        args: Vec<String>,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
    /// bounded consequence: consequence sentences=NAME goal=TEXT
    Consequence {
        args: Vec<String>,
        #[arg(long, default_value_t = 2)]
        max_worlds: usize,
        #[arg(long, default_value_t = 2)]
        max_carrier: usize,
    },
    /// replay the shipped counterexamples: verify-paper --case counter1|counter2|counter3|all
    VerifyPaper {
        #[arg(long, default_value = "all")]
        case: String,
    },
    /// enumerate probe sentences over a signature: probe sig=NAME
    Probe {
        args: Vec<String>,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long, default_value_t = 1)]
        budget: usize,
    },
}

fn kv(args: &[String]) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for a in args {
        let (k, v) = a
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("argument {a:?} is not key=value")))?;
        out.insert(k.to_string(), v.to_string());
    }
    Ok(out)
}

fn need<'a>(kv: &'a BTreeMap<String, String>, key: &str) -> Result<&'a str> {
    kv.get(key)
        .map(|s| s.as_str())
        .ok_or_else(|| Error::Parse(format!("missing argument {key}=...")))
}

struct Ctx {
    ws: Workspace,
    color: bool,
}

impl Ctx {
    fn signature(&self, name: &str) -> Result<&crate::sig::HFOLSignature> {
        self.ws
            .signatures
            .get(name)
            .ok_or_else(|| Error::Parse(format!("unknown signature {name}")))
    }

    fn morphism(&self, name: &str) -> Result<&SignatureMorphism> {
        self.ws
            .morphisms
            .get(name)
            .ok_or_else(|| Error::Parse(format!("unknown morphism {name}")))
    }

    fn model(&self, name: &str) -> Result<&crate::semantics::KripkeStructure> {
        self.ws
            .models
            .get(name)
            .ok_or_else(|| Error::Parse(format!("unknown model {name}")))
    }

    fn span(&self, name: &str) -> Result<&Span> {
        self.ws
            .spans
            .get(name)
            .ok_or_else(|| Error::Parse(format!("unknown span {name}")))
    }

    fn mark(&self, pass: bool) -> String {
        match (pass, self.color) {
            (true, true) => "\x1b[32mpass\x1b[0m".into(),
            (false, true) => "\x1b[31mFAIL\x1b[0m".into(),
            (true, false) => "pass".into(),
            (false, false) => "FAIL".into(),
        }
    }
}

/// Report produced by one subcommand: text lines, a JSON body and the
/// pass verdict (`None` when nothing was checked, only computed).
struct Report {
    lines: Vec<String>,
    body: Value,
    pass: Option<bool>,
}

pub fn run_cli<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let color = std::env::var("HFOL_COLOR").map(|v| v != "0").unwrap_or(false);
    let mut ws = Workspace::default();
    for path in &cli.files {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                return 2;
            }
        };
        let parsed = match parse_document(&text) {
            Ok(w) => w,
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                return 2;
            }
        };
        ws.signatures.extend(parsed.signatures);
        ws.morphisms.extend(parsed.morphisms);
        ws.models.extend(parsed.models);
        ws.sentences.extend(parsed.sentences);
        ws.spans.extend(parsed.spans);
    }
    let ctx = Ctx { ws, color };
    match dispatch(&ctx, &cli.cmd) {
        Ok(report) => {
            if cli.json {
                let wrapped = json!({ "schema": 1, "report": report.body });
                println!("{}", serde_json::to_string_pretty(&wrapped).unwrap());
            } else {
                for line in &report.lines {
                    println!("{line}");
                }
            }
            match report.pass {
                Some(false) => 1,
                _ => 0,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Parse(_) => 2,
                _ => 1,
            }
        }
    }
}

fn dispatch(ctx: &Ctx, cmd: &Cmd) -> Result<Report> {
    match cmd {
        Cmd::CheckSig { args } => {
            let kv = kv(args)?;
            let name = need(&kv, "sig")?;
            let sig = ctx.signature(name)?;
            let diags = validate_signature(sig);
            let pass = diags.is_empty();
            Ok(Report {
                lines: vec![format!("signature {name}: {}", ctx.mark(pass))]
                    .into_iter()
                    .chain(diags.iter().map(|d| format!("  {d}")))
                    .collect(),
                body: json!({ "command": "check-sig", "name": name, "pass": pass, "diagnostics": diags }),
                pass: Some(pass),
            })
        }
        Cmd::CheckMorphism { args, protects_flexible: want_protect, injective } => {
            let kv = kv(args)?;
            let name = need(&kv, "morphism")?;
            let chi = ctx.morphism(name)?;
            let mut diags = validate_morphism(chi);
            if *injective {
                if !chi.is_injective_on_sorts() {
                    diags.push("not injective on sorts".into());
                }
                if !chi.is_injective_on_nominals() {
                    diags.push("not injective on nominals".into());
                }
            }
            let mut protect_witness = None;
            if *want_protect {
                let (ok, witness) = protects_flexible(chi);
                if !ok {
                    let w = witness.unwrap_or_default();
                    diags.push(format!("does not protect flexible symbols: {w}"));
                    protect_witness = Some(w);
                }
            }
            let pass = diags.is_empty();
            Ok(Report {
                lines: vec![format!("morphism {name}: {}", ctx.mark(pass))]
                    .into_iter()
                    .chain(diags.iter().map(|d| format!("  {d}")))
                    .collect(),
                body: json!({
                    "command": "check-morphism", "name": name, "pass": pass,
                    "diagnostics": diags, "protect_witness": protect_witness,
                }),
                pass: Some(pass),
            })
        }
        Cmd::Translate { args } => {
            let kv = kv(args)?;
            let chi = ctx.morphism(need(&kv, "morphism")?)?;
            let s = parse_sentence(&chi.source, need(&kv, "sentence")?)?;
            let out = translate(chi, &s)?;
            let text = print_sentence(&out);
            Ok(Report {
                lines: vec![text.clone()],
                body: json!({ "command": "translate", "sentence": text }),
                pass: None,
            })
        }
        Cmd::Reduct { args } => {
            let kv = kv(args)?;
            let chi = ctx.morphism(need(&kv, "morphism")?)?;
            let m = ctx.model(need(&kv, "model")?)?;
            let out = reduct(chi, m)?;
            let text = print_model("reduct", "source", &out);
            Ok(Report {
                lines: vec![text.clone()],
                body: json!({ "command": "reduct", "model": text }),
                pass: None,
            })
        }
        Cmd::Sat { args, world, global } => {
            let kv = kv(args)?;
            let m = ctx.model(need(&kv, "model")?)?;
            let s = parse_sentence(&m.sig, need(&kv, "sentence")?)?;
            let (mode, holds) = match (world, global) {
                (Some(w), false) => {
                    if !m.worlds.contains(w.as_str()) {
                        return Err(Error::Parse(format!("unknown world {w}")));
                    }
                    (format!("at {w}"), sat_local(m, w, &s)?)
                }
                (None, _) => ("globally".to_string(), sat_global(m, &s)?),
                (Some(_), true) => {
                    return Err(Error::Parse("--world and --global are exclusive".into()))
                }
            };
            Ok(Report {
                lines: vec![format!("{} {mode}: {holds}", print_sentence(&s))],
                body: json!({ "command": "sat", "mode": mode, "holds": holds }),
                pass: Some(holds),
            })
        }
        Cmd::Pushout { args } => {
            let kv = kv(args)?;
            let name = need(&kv, "span")?;
            let span = ctx.span(name)?;
            let po = pushout(&span.chi1, &span.chi2)?;
            let text = print_signature("pushout", &po.vertex);
            let report = analyze_span(span);
            Ok(Report {
                lines: vec![
                    text.clone(),
                    format!("hypotheses hold: {}", ctx.mark(report.hypotheses_hold)),
                ],
                body: json!({
                    "command": "pushout", "span": name,
                    "vertex": text, "analysis": report,
                }),
                pass: None,
            })
        }
        Cmd::Amalgamate { args } => {
            let kv = kv(args)?;
            let span = ctx.span(need(&kv, "span")?)?;
            let m1 = ctx.model(need(&kv, "m1")?)?;
            let m2 = ctx.model(need(&kv, "m2")?)?;
            let po = pushout(&span.chi1, &span.chi2)?;
            let out = amalgamate(&span.chi1, &span.chi2, &po, m1, m2)?;
            let text = print_model("amalgam", "pushout", &out);
            Ok(Report {
                lines: vec![text.clone()],
                body: json!({ "command": "amalgamate", "model": text }),
                pass: None,
            })
        }
        Cmd::Relativize { args, rt, part } => {
            let kv = kv(args)?;
            let d1 = ctx.signature(need(&kv, "sig1")?)?;
            let d2 = ctx.signature(need(&kv, "sig2")?)?;
            let ru = relativized_union_sig(d1, d2);
            if let Some(text) = rt {
                let (inj, _, _) = ru.part(*part)?;
                let s = parse_sentence(&inj.source, text)?;
                let out = rt_translate(&ru, *part, &s)?;
                let printed = print_sentence(&out);
                return Ok(Report {
                    lines: vec![printed.clone()],
                    body: json!({ "command": "relativize", "rt": printed }),
                    pass: None,
                });
            }
            let sig_text = print_signature("union", &ru.diamond_sig);
            let axioms: Vec<String> = ru.axioms.iter().map(print_sentence).collect();
            let mut lines = vec![sig_text.clone()];
            lines.extend(axioms.iter().map(|a| format!("axiom {a};")));
            Ok(Report {
                lines,
                body: json!({ "command": "relativize", "signature": sig_text, "axioms": axioms }),
                pass: None,
            })
        }
        Cmd::Lift { args, depth } => {
            let kv = kv(args)?;
            let chi = ctx.morphism(need(&kv, "morphism")?)?;
            let v1n1 = ctx.model(need(&kv, "expansion")?)?;
            let wm = ctx.model(need(&kv, "model")?)?;
            let c1 = extend(&chi.target, &[])?;
            let out = lift_expansion(chi, &c1, v1n1, wm, *depth)?;
            let text = print_model("lifted", "target", &out);
            Ok(Report {
                lines: vec![text.clone()],
                body: json!({ "command": "lift", "model": text }),
                pass: None,
            })
        }
        Cmd::Consequence { args, max_worlds, max_carrier } => {
            let kv = kv(args)?;
            let name = need(&kv, "sentences")?;
            let (signame, premises) = ctx
                .ws
                .sentences
                .get(name)
                .ok_or_else(|| Error::Parse(format!("unknown sentence list {name}")))?;
            let sig = ctx.signature(signame)?;
            let goal = parse_sentence(sig, need(&kv, "goal")?)?;
            let verdict = consequence_bounded(sig, premises, &goal, *max_worlds, *max_carrier)?;
            let (lines, body, pass) = match verdict {
                Verdict::HoldsUpTo { max_worlds, max_carrier, models_checked } => (
                    vec![format!(
                        "holds up to {max_worlds} worlds and {max_carrier} elements ({models_checked} models)"
                    )],
                    json!({
                        "command": "consequence", "holds": true,
                        "max_worlds": max_worlds, "max_carrier": max_carrier,
                        "models_checked": models_checked,
                    }),
                    true,
                ),
                Verdict::Countermodel(m) => {
                    let text = print_model("countermodel", signame, &m);
                    (
                        vec!["countermodel found".to_string(), text.clone()],
                        json!({ "command": "consequence", "holds": false, "countermodel": text }),
                        false,
                    )
                }
            };
            Ok(Report { lines, body, pass: Some(pass) })
        }
        Cmd::VerifyPaper { case } => {
            let cases: Vec<CaseId> = match case.as_str() {
                "all" => vec![CaseId::Counter1, CaseId::Counter2, CaseId::Counter3],
                other => vec![other.parse()?],
            };
            let mut lines = Vec::new();
            let mut reports = Vec::new();
            let mut all_pass = true;
            for c in cases {
                let report = verify_counterexample(c)?;
                lines.push(format!("{}: {}", report.case, ctx.mark(report.all_pass)));
                for step in &report.steps {
                    lines.push(format!("  {} {}: {}", ctx.mark(step.pass), step.name, step.detail));
                }
                all_pass &= report.all_pass;
                reports.push(report);
            }
            Ok(Report {
                lines,
                body: json!({ "command": "verify-paper", "pass": all_pass, "cases": reports }),
                pass: Some(all_pass),
            })
        }
        Cmd::Probe { args, depth, budget } => {
            let kv = kv(args)?;
            let sig = ctx.signature(need(&kv, "sig")?)?;
            let probe = probe_sentences(sig, *depth, *budget);
            let sentences: Vec<String> = probe.sentences.iter().map(print_sentence).collect();
            let mut lines = vec![format!("{} probe sentences", sentences.len())];
            lines.extend(sentences.iter().cloned());
            Ok(Report {
                lines,
                body: json!({ "command": "probe", "count": sentences.len(), "sentences": sentences }),
                pass: None,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(name: &str) -> String {
        concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/").to_string() + name
    }

    #[test]
    fn verify_paper_all_passes() {
        let code = run_cli(["hfol", "verify-paper", "--case", "all"]);
        assert_eq!(code, 0);
    }

    #[test]
    fn unknown_case_is_an_input_error() {
        let code = run_cli(["hfol", "verify-paper", "--case", "counter9"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn sat_on_counter2_fixture() {
        let code = run_cli([
            "hfol",
            "--file",
            &fixture("counter2.hfol"),
            "sat",
            "--global",
            "model=W1M1",
            "sentence=forall x:s . x = c",
        ]);
        assert_eq!(code, 0);
    }

    #[test]
    fn missing_argument_is_an_input_error() {
        let code = run_cli(["hfol", "check-sig"]);
        assert_eq!(code, 2);
    }
}
