use std::collections::BTreeMap;

use log::debug;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use padic_gas::domain::{self, Threshold};
use padic_gas::evaluator::{self, EvalOptions};
use padic_gas::oracle;
use padic_gas::scalar::{format_f64, q_pow_int, ratio_text, ScalarReport};
use padic_gas::{Catalog, Evaluation, Limits, Membership};
use serde::Serialize;
use serde_json::json;

use crate::output::{to_value, Output, Table};
use crate::params::{CliError, CliResult, Params};

fn report(ev: &Evaluation) -> CliResult<serde_json::Value> {
    to_value(ScalarReport {
        value: &ev.value,
        tolerance: ev.tolerance,
    })
}

fn scalar_row(ev: &Evaluation) -> Vec<String> {
    let (regime, value) = match ev.value.as_exact() {
        Some(r) => ("exact", ratio_text(r)),
        None => ("float", ev.value.to_string()),
    };
    vec![
        regime.to_string(),
        value,
        ev.tolerance.map(format_f64).unwrap_or_default(),
    ]
}

fn biguint_ratio(m: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(m.clone()))
}

#[derive(Serialize)]
struct Listed {
    index: usize,
    chain: padic_gas::SplittingFiltration,
    levels: usize,
    reduced: bool,
    class: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    multiplicity: Option<String>,
}

pub fn enumerate(p: &mut Params, limits: &Limits) -> CliResult<Output> {
    let n = p.n()?;
    let q = p.q.map(|_| p.q()).transpose()?;
    let cat = Catalog::get(n, limits)?;
    let mut table = Table::new(&["index", "chain", "levels", "reduced", "class", "multiplicity"]);
    let mut listed = Vec::new();
    for (index, rec) in cat.records.iter().enumerate() {
        if p.reduced && !rec.reduced {
            continue;
        }
        let multiplicity = q.map(|q| rec.multiplicity(q)).transpose()?.map(|m| m.to_string());
        table.push(vec![
            index.to_string(),
            rec.spl.encode(),
            rec.spl.len().to_string(),
            rec.reduced.to_string(),
            rec.class.to_string(),
            multiplicity.clone().unwrap_or_default(),
        ]);
        listed.push(Listed {
            index,
            chain: rec.spl.clone(),
            levels: rec.spl.len(),
            reduced: rec.reduced,
            class: rec.class,
            multiplicity,
        });
    }
    Output::new(json!({ "count": listed.len(), "filtrations": listed }), table)
}

pub fn stats(p: &mut Params, limits: &Limits) -> CliResult<Output> {
    let n = p.n()?;
    let q = p.q()?;
    let cat = Catalog::get(n, limits)?;
    let mut by_levels: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    let mut positive = 0usize;
    let mut total_multiplicity = BigUint::zero();
    let mut measure = BigRational::zero();
    for rec in &cat.records {
        let entry = by_levels.entry(rec.spl.len()).or_default();
        entry.0 += 1;
        entry.1 += usize::from(rec.reduced);
        let m = rec.multiplicity(q)?;
        if !m.is_zero() {
            positive += 1;
        }
        let mut term = biguint_ratio(&m);
        for &(rank, _) in &rec.levels {
            term /= q_pow_int(q, rank as i64) - BigRational::one();
        }
        measure += term;
        total_multiplicity += m;
    }
    let mut table = Table::new(&["levels", "filtrations", "reduced"]);
    let rows: Vec<_> = by_levels
        .iter()
        .map(|(&l, &(all, red))| {
            table.push(vec![l.to_string(), all.to_string(), red.to_string()]);
            json!({ "levels": l, "filtrations": all, "reduced": red })
        })
        .collect();
    Output::new(
        json!({
            "filtrations": cat.records.len(),
            "reduced": cat.reduced.len(),
            "positive_multiplicity": positive,
            "total_multiplicity": total_multiplicity.to_string(),
            "total_measure": ratio_text(&measure),
            "by_levels": rows,
        }),
        table,
    )
}

pub fn evaluate(p: &mut Params, limits: &Limits) -> CliResult<Output> {
    let n = p.n()?;
    let q = p.q()?;
    let opts = EvalOptions {
        force_float: p.force_float()?,
        override_domain: false,
    };
    let form = p.form.get_or_insert_with(|| "full".to_string()).clone();
    let plain = |ev: Evaluation, p: &Params| -> CliResult<Output> {
        if p.wants_exact() && !ev.value.is_exact() {
            return Err(CliError::Usage("--precision exact, but the inputs need the float regime".into()));
        }
        let mut table = Table::new(&["regime", "value", "tolerance"]);
        table.push(scalar_row(&ev));
        Ok(Output {
            result: report(&ev)?,
            table,
        })
    };
    match form.as_str() {
        "full" | "reduced" | "restricted" | "n2" | "n3" => {
            let rho = if form == "restricted" { None } else { Some(p.rho()?) };
            let e = p.exponents()?;
            let rho = rho.as_ref();
            let ev = match form.as_str() {
                "full" => evaluator::z_full(n, q, &e, rho.unwrap(), opts, limits)?,
                "reduced" => evaluator::z_reduced(n, q, &e, rho.unwrap(), opts, limits)?,
                "restricted" => evaluator::z_restricted(n, q, &e, opts, limits)?,
                "n2" => evaluator::closed_form_n2(q, &e, rho.unwrap(), opts, limits)?,
                _ => evaluator::closed_form_n3(q, &e, rho.unwrap(), opts, limits)?,
            };
            plain(ev, p)
        }
        "mehta" => {
            let rho = p.rho()?;
            let cv = p.charge_vector()?;
            let r = evaluator::mehta_partition(n, q, &cv, &rho, opts, limits)?;
            let mut table = Table::new(&["quantity", "regime", "value", "tolerance"]);
            let mut row = |name: &str, ev: &Evaluation| {
                let mut v = vec![name.to_string()];
                v.extend(scalar_row(ev));
                table.push(v);
            };
            row("value", &r.value);
            if let Some(o) = &r.orbit_form {
                row("orbit_form", o);
            }
            let orbit = r.orbit_form.as_ref().map(report).transpose()?;
            Output::new(
                json!({
                    "value": report(&r.value)?,
                    "orbit_form": orbit,
                    "threshold": threshold_json(&r.threshold)?,
                }),
                table,
            )
        }
        "expectation" => {
            let rho = p.rho()?;
            let cv = p.charge_vector()?;
            let (a, b) = (p.a()?, p.b()?);
            let r = evaluator::expectation(n, q, &cv, &a, &b, &rho, opts, limits)?;
            let mut table = Table::new(&["quantity", "value"]);
            table.push(vec!["value".into(), r.value.to_string()]);
            if let Some(x) = &r.root_ratio {
                table.push(vec!["root_ratio".into(), x.to_string()]);
            }
            Output::new(&r, table)
        }
        "low-temp" => {
            let rho = p.rho()?;
            let cv = p.charge_vector()?;
            let (a, b) = (p.a()?, p.b()?);
            let r = evaluator::low_temp_limit(n, q, &cv, &a, &b, &rho, limits)?;
            let mut table = Table::new(&["quantity", "value"]);
            table.push(vec!["value".into(), r.value.to_string()]);
            table.push(vec!["q_min".into(), ratio_text(&r.q_min)]);
            for m in &r.minimizers {
                table.push(vec!["minimizer".into(), m.encode()]);
            }
            Output::new(&r, table)
        }
        other => Err(CliError::Usage(format!(
            "--form {other:?}: expected full, reduced, restricted, n2, n3, mehta, expectation or low-temp"
        ))),
    }
}

fn threshold_json(t: &Threshold) -> CliResult<serde_json::Value> {
    Ok(json!({
        "value": ratio_text(&t.value),
        "source": to_value(&t.source)?,
        "constraint": t.source.to_string(),
    }))
}

pub fn domain(p: &mut Params, limits: &Limits) -> CliResult<Output> {
    let n = p.n()?;
    let q = p.q()?;
    let e = p.exponents()?;
    let (m, count): (Membership, usize) = if p.reduced {
        (
            domain::in_reduced_region(n, q, &e, limits)?,
            domain::reduced_constraints(n, q, limits)?.len(),
        )
    } else {
        (
            domain::in_omega(n, q, &e, limits)?,
            domain::omega_constraints(n, q, limits)?.len(),
        )
    };
    let threshold = if p.beta.is_some() || p.charges.is_some() {
        let cv = p.charge_vector()?;
        Some(domain::beta_threshold(n, q, &cv, e.a(), e.b(), p.reduced, limits)?)
    } else {
        None
    };
    let mut table = Table::new(&["member", "constraints", "witness", "beta_threshold"]);
    table.push(vec![
        m.member.to_string(),
        count.to_string(),
        m.witness.as_ref().map(|w| w.to_string()).unwrap_or_default(),
        threshold.as_ref().map(|t| ratio_text(&t.value)).unwrap_or_default(),
    ]);
    let mut result = json!({
        "member": m.member,
        "region": if p.reduced { "reduced" } else { "full" },
        "constraints": count,
        "witness": m.witness.as_ref().map(to_value).transpose()?,
        "witness_text": m.witness.as_ref().map(|w| w.to_string()),
    });
    if let Some(t) = &threshold {
        result["beta_threshold"] = threshold_json(t)?;
    }
    Output::new(result, table)
}

pub fn sample(p: &mut Params, limits: &Limits) -> CliResult<Output> {
    let n = p.n()?;
    let q = p.q()?;
    let mode = p.mode.get_or_insert_with(|| "mc".to_string()).clone();
    match mode.as_str() {
        "mc" => {
            let e = p.exponents()?;
            let depth = *p.depth.get_or_insert(16);
            let samples = *p.samples.get_or_insert(10_000);
            let seed = *p.seed.get_or_insert(0);
            let r = oracle::monte_carlo_integral(&e, q, depth, samples, seed, limits)?;
            debug!("monte carlo: {} accepted of {}", r.samples - r.saturated, r.samples);
            let mut table = Table::new(&["estimate", "stderr", "samples", "saturated", "saturation_rate", "seed"]);
            table.push(vec![
                r.estimate.to_string(),
                format_f64(r.stderr),
                r.samples.to_string(),
                r.saturated.to_string(),
                format_f64(r.saturation_rate),
                r.seed.to_string(),
            ]);
            Output::new(&r, table)
        }
        "exact" => {
            let e = p.exponents()?;
            let depth = match p.depth {
                Some(d) => d,
                None => *p.depth.insert(oracle::max_depth(n, q, limits)?),
            };
            let r = oracle::exact_truncated_integral(&e, q, depth, limits)?;
            let mut table = Table::new(&["main", "tail_bound", "depth"]);
            table.push(vec![r.main.to_string(), format_f64(r.tail_bound), r.depth.to_string()]);
            Output::new(&r, table)
        }
        "levels" => {
            let depth = *p.depth.get_or_insert(8);
            let samples = *p.samples.get_or_insert(10_000);
            let seed = *p.seed.get_or_insert(0);
            let (freq, saturated) = oracle::level_pair_frequencies(n, q, depth, samples, seed)?;
            let mut table = Table::new(&["chain", "gaps", "count", "measure"]);
            let mut rows = Vec::new();
            for (lp, count) in &freq {
                let mu = oracle::measure_of_level_pair(lp, q)?;
                let gaps = lp.n.iter().map(u64::to_string).collect::<Vec<_>>().join(";");
                table.push(vec![lp.chain.encode(), gaps, count.to_string(), ratio_text(&mu)]);
                rows.push(json!({ "level_pair": lp, "count": count, "measure": ratio_text(&mu) }));
            }
            Output::new(json!({ "samples": samples, "saturated": saturated, "level_pairs": rows }), table)
        }
        other => Err(CliError::Usage(format!("--mode {other:?}: expected mc, exact or levels"))),
    }
}
