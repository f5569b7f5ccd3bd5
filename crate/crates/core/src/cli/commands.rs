use std::sync::Arc;

use num_traits::ToPrimitive;

use super::output::{Cell, Document};
use super::params::Params;
use super::{Command, Outcome, RmtCommand};
use crate::characters::{twist_scan, variance_via_characters, CharacterClass, CharacterGroup, TwistTable};
use crate::error::{Error, Result};
use crate::field::FieldCtx;
use crate::lfunc::{CoeffTable, DivisorTable, ModelSpec};
use crate::poly::{PolyRing, PrimeSieve};
use crate::rmt::{
    calibrate_column_order, closed_form, gamma_from_lattice, gamma_mc, haar_mc_all, lattice_count,
    CALIBRATED_COLUMN_ORDER,
};
use crate::variance::{
    check_budget, field_reports, progression_sums, variance_by_definition, ModulusTemplate,
    VarianceReport,
};

pub(super) fn dispatch(cmd: &Command, allow_large: bool) -> Result<Outcome> {
    let ok = |document| Ok(Outcome { document, success: true });
    match cmd {
        Command::Variance { params } => ok(variance(params, allow_large)?),
        Command::Rmt { which } => match which {
            RmtCommand::Lattice { params } => ok(rmt_lattice(params)?),
            RmtCommand::Closed { params } => ok(rmt_closed(params)?),
            RmtCommand::Mc { params } => ok(rmt_mc(params)?),
            RmtCommand::Gamma { params } => ok(rmt_gamma(params)?),
        },
        Command::TwistScan { params } => ok(twist(params, allow_large)?),
        Command::DivisorTable { params } => ok(divisor_table(params, allow_large)?),
        Command::Selftest { params } => selftest(params),
    }
}

fn field_orders(p: &Params) -> Result<Vec<u64>> {
    match (p.list::<u64>("q")?, p.get::<u64>("p")?) {
        (Some(qs), None) => Ok(qs),
        (None, Some(prime)) => {
            let r: u32 = p.get_or("r", 1)?;
            prime
                .checked_pow(r)
                .map(|q| vec![q])
                .ok_or_else(|| Error::ConfigParse("p^r overflows".into()))
        }
        (Some(_), Some(_)) => Err(Error::ConfigParse("give q= or p= (with r=), not both".into())),
        (None, None) => Err(Error::ConfigParse("missing parameter q= (or p= r=)".into())),
    }
}

fn ring_for(q: u64) -> Result<PolyRing> {
    Ok(PolyRing::new(Arc::new(FieldCtx::from_order(q)?)))
}

fn modulus_text(ring: &PolyRing) -> String {
    format!("{:?}", ring.field().modulus()).replace(' ', "")
}

fn model_spec(p: &Params) -> Result<ModelSpec> {
    p.raw("model").unwrap_or("trivial").parse()
}

const VARIANCE_COLUMNS: &[&str] = &[
    "q", "p", "r", "model", "k", "n", "Q", "phi", "R", "expectation", "variance", "normalized",
    "predicted", "deviation", "flags", "error",
];

fn variance_row(rep: &VarianceReport, spec: &ModelSpec) -> Vec<Cell> {
    let flags: Vec<String> = rep.flags.iter().map(|f| f.to_string()).collect();
    vec![
        rep.q.into(),
        rep.p.into(),
        rep.r.into(),
        spec.to_string().into(),
        rep.k.into(),
        rep.n.into(),
        rep.modulus.to_string().into(),
        rep.phi.into(),
        rep.degree_r.into(),
        Cell::rational(&rep.expectation),
        Cell::rational(&rep.variance),
        Cell::rational(&rep.normalized),
        Cell::ubig(&rep.predicted),
        rep.deviation.into(),
        flags.join(";").into(),
        Cell::Null,
    ]
}

fn variance(words: &[String], allow_large: bool) -> Result<Document> {
    let p = Params::parse(words, &["model", "k", "q", "p", "r", "Q", "n"])?;
    let spec = model_spec(&p)?;
    let k: u32 = p.need("k")?;
    let qs = field_orders(&p)?;
    let template: ModulusTemplate = p.require("Q")?.parse()?;
    let ns: Vec<usize> = p
        .range("n")?
        .ok_or_else(|| Error::ConfigParse("missing parameter n=".into()))?
        .into_iter()
        .map(|n| n as usize)
        .collect();
    let mut doc = Document::new("variance", VARIANCE_COLUMNS);
    doc.config("model", &spec);
    doc.config("k", k);
    doc.config("Q", &template);
    doc.config("n", p.require("n")?);
    doc.config("allow_large", allow_large);
    for &q in &qs {
        if let Ok(ring) = ring_for(q) {
            doc.config(&format!("field_modulus.q{q}"), modulus_text(&ring));
        }
        match field_reports(&spec, q, k, &ns, &template, allow_large) {
            Ok(reps) => reps.iter().for_each(|r| doc.push(variance_row(r, &spec))),
            Err(e) => {
                let mut row = vec![Cell::Null; VARIANCE_COLUMNS.len()];
                row[0] = q.into();
                row[3] = spec.to_string().into();
                row[4] = k.into();
                row[15] = format!("{}: {e}", e.kind()).into();
                doc.push(row);
            }
        }
    }
    Ok(doc)
}

fn kr(p: &Params) -> Result<(u32, u32, Vec<u64>)> {
    let k: u32 = p.need("k")?;
    let r: u32 = p.need("R")?;
    let ns = p.range("n")?.unwrap_or_else(|| (0..=k as u64 * r as u64).collect());
    Ok((k, r, ns))
}

fn rmt_lattice(words: &[String]) -> Result<Document> {
    let p = Params::parse(words, &["k", "R", "n"])?;
    let (k, r, ns) = kr(&p)?;
    let mut doc = Document::new("rmt-lattice", &["k", "R", "n", "count"]);
    doc.config("k", k);
    doc.config("R", r);
    doc.config("column_order", format!("{CALIBRATED_COLUMN_ORDER:?}"));
    for n in ns {
        doc.push(vec![k.into(), r.into(), n.into(), Cell::ubig(&lattice_count(k, n, r))]);
    }
    Ok(doc)
}

fn rmt_closed(words: &[String]) -> Result<Document> {
    let p = Params::parse(words, &["k", "R", "n"])?;
    let (k, r, ns) = kr(&p)?;
    let mut doc = Document::new("rmt-closed", &["k", "R", "n", "closed_form", "count", "agree"]);
    doc.config("k", k);
    doc.config("R", r);
    for n in ns {
        let count = lattice_count(k, n, r);
        let closed = closed_form(k, n, r);
        let agree = closed.as_ref().map(|c| *c == count);
        doc.push(vec![
            k.into(),
            r.into(),
            n.into(),
            closed.as_ref().map(Cell::ubig).unwrap_or(Cell::Null),
            Cell::ubig(&count),
            agree.into(),
        ]);
    }
    Ok(doc)
}

fn rmt_mc(words: &[String]) -> Result<Document> {
    let p = Params::parse(words, &["k", "R", "n", "samples", "seed"])?;
    let (k, r, ns) = kr(&p)?;
    let samples: u64 = p.get_or("samples", 100_000)?;
    let seed: u64 = p.get_or("seed", 0)?;
    let all = haar_mc_all(k, r, samples, seed)?;
    let mut doc =
        Document::new("rmt-mc", &["k", "R", "n", "exact", "estimate", "stderr", "samples", "seed"]);
    doc.config("k", k);
    doc.config("R", r);
    doc.config("samples", samples);
    doc.config("seed", seed);
    for n in ns {
        let (estimate, stderr) = match all.get(n as usize) {
            Some(e) => (e.estimate, e.stderr),
            None => (0.0, 0.0),
        };
        doc.push(vec![
            k.into(),
            r.into(),
            n.into(),
            Cell::ubig(&lattice_count(k, n, r)),
            estimate.into(),
            stderr.into(),
            samples.into(),
            seed.into(),
        ]);
    }
    Ok(doc)
}

fn rmt_gamma(words: &[String]) -> Result<Document> {
    let p = Params::parse(words, &["k", "c", "samples", "seed", "R"])?;
    let k: u32 = p.need("k")?;
    let cs: Vec<f64> = p.list("c")?.ok_or_else(|| Error::ConfigParse("missing parameter c=".into()))?;
    let samples: u64 = p.get_or("samples", 1_000_000)?;
    let seed: u64 = p.get_or("seed", 0)?;
    let r: Option<u32> = p.get("R")?;
    let mut doc = Document::new(
        "rmt-gamma",
        &["k", "c", "estimate", "stderr", "samples", "seed", "R", "lattice_ratio", "lattice_ratio_float"],
    );
    doc.config("k", k);
    doc.config("samples", samples);
    doc.config("seed", seed);
    if let Some(r) = r {
        doc.config("R", r);
    }
    for c in cs {
        let est = gamma_mc(k, c, samples, seed)?;
        let lattice = r.map(|r| gamma_from_lattice(k, c, r)).transpose()?;
        doc.push(vec![
            k.into(),
            c.into(),
            est.estimate.into(),
            est.stderr.into(),
            samples.into(),
            seed.into(),
            r.into(),
            lattice.as_ref().map(Cell::rational).unwrap_or(Cell::Null),
            lattice.as_ref().and_then(|l| l.to_f64()).into(),
        ]);
    }
    Ok(doc)
}

fn single_field(p: &Params) -> Result<u64> {
    match field_orders(p)?.as_slice() {
        [q] => Ok(*q),
        _ => Err(Error::ConfigParse("this command takes a single field".into())),
    }
}

fn twist(words: &[String], allow_large: bool) -> Result<Document> {
    let p = Params::parse(words, &["model", "q", "p", "r", "Q"])?;
    let spec = model_spec(&p)?;
    let q = single_field(&p)?;
    let ring = ring_for(q)?;
    let model = spec.build(ring.clone())?;
    let modulus = p.require("Q")?.parse::<ModulusTemplate>()?.instantiate(&ring)?;
    let group = Arc::new(CharacterGroup::new(&ring, &modulus)?);
    let r = model.nominal_degree_r(&modulus) as usize;
    check_budget(&ring, r + 3, allow_large)?;
    let table = TwistTable::new(&model, group.clone(), r + 3)?;
    let diags = twist_scan(&table)?;

    let mut doc = Document::new(
        "twist-scan",
        &["chi", "exponents", "even", "primitive", "max_tail", "degree", "root_moduli", "class"],
    );
    doc.config("model", &spec);
    doc.config("q", q);
    doc.config("field_modulus", modulus_text(&ring));
    doc.config("Q", &modulus);
    doc.config("R", r);
    if let Some(why) = table.hypothesis_violation() {
        doc.config("hypothesis_violated", why);
    }
    let join = |v: Vec<String>| v.join(";");
    for d in &diags {
        doc.push(vec![
            d.chi.into(),
            join(d.exponents.iter().map(u64::to_string).collect()).into(),
            group.is_even(d.chi).into(),
            group.is_primitive(d.chi).into(),
            d.max_tail.into(),
            d.degree.into(),
            join(d.root_moduli.iter().map(|m| m.to_string()).collect()).into(),
            d.class.to_string().into(),
        ]);
    }
    let count = |c| diags.iter().filter(|d| d.class == c).count();
    doc.summary("characters", diags.len());
    doc.summary("good_like", count(CharacterClass::GoodLike));
    doc.summary("bad_like", count(CharacterClass::BadLike));
    doc.summary("truncation_failure", count(CharacterClass::TruncationFailure));
    Ok(doc)
}

fn divisor_table(words: &[String], allow_large: bool) -> Result<Document> {
    let p = Params::parse(words, &["model", "k", "q", "p", "r", "n"])?;
    let spec = model_spec(&p)?;
    let k: u32 = p.need("k")?;
    let q = single_field(&p)?;
    let ns = p.range("n")?.unwrap_or_else(|| (0..=3).collect());
    let n_max = *ns.iter().max().expect("non-empty range") as usize;
    let ring = ring_for(q)?;
    check_budget(&ring, n_max, allow_large)?;
    let model = spec.build(ring.clone())?;
    let sieve = Arc::new(PrimeSieve::new(ring.clone(), n_max.max(1)));
    let a = CoeffTable::build(&model, sieve, n_max)?;
    let d = DivisorTable::build(k, &a)?;
    let mut doc = Document::new("divisor-table", &["f", "degree", "index", "a_f", "d_k"]);
    doc.config("model", &spec);
    doc.config("k", k);
    doc.config("q", q);
    doc.config("field_modulus", modulus_text(&ring));
    for n in ns {
        let n = n as usize;
        for (idx, (av, dv)) in a.degree_values(n).iter().zip(d.degree_values(n)).enumerate() {
            let f = ring.monic_from_index(n, idx as u64);
            doc.push(vec![f.to_string().into(), n.into(), idx.into(), (*av).into(), (*dv).into()]);
        }
    }
    Ok(doc)
}

fn selftest(words: &[String]) -> Result<Outcome> {
    let p = Params::parse(words, &["max_r"])?;
    let max_r: u32 = p.get_or("max_r", 4)?;
    let mut doc = Document::new("selftest", &["check", "status", "detail"]);
    doc.config("max_r", max_r);
    let mut all = true;
    let mut record = |name: &str, ok: bool, detail: String| {
        all &= ok;
        doc.push(vec![name.into(), if ok { "pass" } else { "fail" }.into(), detail.into()]);
    };

    let order = calibrate_column_order(max_r);
    record(
        "column-calibration",
        order == Some(CALIBRATED_COLUMN_ORDER),
        format!("calibrated {order:?}, frozen {CALIBRATED_COLUMN_ORDER:?}"),
    );

    let mut checked = 0;
    let mut bad = Vec::new();
    for (k, rs) in [(2u32, 2..=max_r + 2), (3, 2..=max_r)] {
        for r in rs {
            for n in 0..=(k * r) as u64 {
                let count = lattice_count(k, n, r);
                if let Some(c) = closed_form(k, n, r) {
                    checked += 1;
                    if c != count {
                        bad.push(format!("k={k} R={r} n={n}"));
                    }
                }
                if count != lattice_count(k, (k * r) as u64 - n, r) {
                    bad.push(format!("symmetry k={k} R={r} n={n}"));
                }
            }
        }
    }
    record("closed-form", bad.is_empty(), format!("{checked} closed-form values; mismatches: {bad:?}"));

    let mut worst = 0.0f64;
    for (q, m) in [(3u64, "[0,1,1]"), (5, "[1,0,1]"), (4, "[1,1,0,1]")] {
        let ring = ring_for(q)?;
        let group = CharacterGroup::new(&ring, &ring.parse_monic(m)?)?;
        let (a, b) = group.orthogonality_residuals();
        worst = worst.max(a).max(b);
    }
    record("orthogonality", worst < 1e-10, format!("max residual {worst:e}"));

    let ring = ring_for(5)?;
    let model = ModelSpec::legendre().build(ring.clone())?;
    let modulus = ring.parse_monic("[0,1,1]")?;
    let table = TwistTable::new(&model, Arc::new(CharacterGroup::new(&ring, &modulus)?), 3)?;
    let mut worst = 0.0f64;
    for n in 1..=3 {
        let exact = variance_by_definition(&progression_sums(&model, 2, n, &modulus, false)?.sums)
            .to_f64()
            .unwrap_or(f64::NAN);
        let via = variance_via_characters(&table, 2, n)?;
        worst = worst.max((via - exact).abs() / exact.abs().max(1e-300));
    }
    record("two-path-variance", worst <= 1e-6, format!("max relative gap {worst:e}"));

    Ok(Outcome { document: doc, success: all })
}
