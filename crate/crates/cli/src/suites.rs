//! The verification suites, evaluated per grid point.

use std::collections::BTreeSet;
use std::time::Instant;

use mpd_core::arith::{check_unit_lemma, qbinom_scalar, qbinom_valuation_legendre, valuation};
use mpd_core::frob::{verify_frobenius_descent, FrobParams};
use mpd_core::hdr::{augmented_lhdr, beta, build_lhdr_window, crosscheck_quotient, iota, verify_kunneth};
use mpd_core::homology::{base_change, homology, homology_by_weight, is_quasi_iso, HomologySummary};
use mpd_core::jet::{find_splittings, omega2_basis, omega3_probe};
use mpd_core::matrix::Matrix;
use mpd_core::strat::{stratification_eps, verify_cocycle, verify_horizontality};
use mpd_core::{MultiIndex, PParams};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{RunConfig, Suite};
use crate::report::{Point, Status, SuiteResult};

/// Upper end of the unit-lemma range checked by `arith-lemmas`.
pub const UNIT_LEMMA_BOUND: u64 = 1000;
/// Weight cap for the polynomial-coefficient stratification checks.
pub const STRAT_WEIGHT_CAP: u64 = 6;
/// Weight cap for comparing `ε` across precisions.
pub const EPS_BASECHANGE_CAP: u64 = 4;

struct Outcome {
    status: Status,
    diagnostics: Vec<String>,
    details: Value,
}

impl Outcome {
    fn checked(details: Value, failures: Vec<String>) -> Self {
        let status = if failures.is_empty() { Status::Pass } else { Status::Fail };
        Outcome {
            status,
            diagnostics: failures,
            details,
        }
    }

    fn skip(reason: &str) -> Self {
        Outcome {
            status: Status::Skip,
            diagnostics: vec![reason.into()],
            details: Value::Null,
        }
    }
}

type Eval = Result<Outcome, String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn point_of(params: &PParams) -> Point {
    Point {
        p: params.p,
        m: params.m,
        n: Some(params.n),
        precision: Some(params.precision),
    }
}

/// Number of `I` in the box `i_j < p^m` with `|I| = w`.
fn box_count(params: &PParams, w: u64) -> usize {
    let pm = params.pm();
    MultiIndex::of_weight(params.n, w)
        .iter()
        .filter(|i| i.0.iter().all(|&x| x < pm))
        .count()
}

fn eval_point(params: &PParams, a: i64) -> Vec<u128> {
    vec![params.ring().from_i64(a); params.n]
}

fn poincare(params: &PParams, cfg: &RunConfig) -> Eval {
    let w_max = cfg.max_weight;
    let ring = params.ring();
    let mut failures = Vec::new();

    let plain = build_lhdr_window(params, w_max).map_err(err)?;
    let d_squared_zero = (1..plain.diffs.len()).all(|k| plain.diffs[k].mul(&plain.diffs[k - 1], &ring).is_zero());
    if !d_squared_zero {
        failures.push("d∘d ≠ 0".into());
    }
    let by_w = homology_by_weight(&plain).map_err(err)?;
    let aug = homology_by_weight(&augmented_lhdr(params, w_max).map_err(err)?).map_err(err)?;

    let mut weights = Vec::new();
    let (mut h0_total, mut h0_expected) = (0, 0);
    for w in 0..=w_max {
        let h = by_w.get(&w).cloned().unwrap_or_default();
        let expected = box_count(params, w);
        let h0 = h.degree(0);
        let exact = aug.get(&w).is_none_or(HomologySummary::is_zero);
        if h0.free_rank != expected || !h0.torsion.is_empty() {
            failures.push(format!("weight {w}: H^0 = {h0:?}, expected free rank {expected}"));
        }
        if (1..=params.n as i32).any(|d| !h.degree(d).is_zero()) {
            failures.push(format!("weight {w}: higher homology {h:?}"));
        }
        if !exact {
            failures.push(format!("weight {w}: augmented complex not exact"));
        }
        h0_total += h0.free_rank;
        h0_expected += expected;
        weights.push(json!({
            "weight": w,
            "homology": to_value(&h),
            "expected_h0": expected,
            "augmented_exact": exact,
        }));
    }
    let box_size = (params.p as usize).pow(params.m * params.n as u32);
    let box_covered = w_max >= params.n as u64 * (params.pm() as u64 - 1);
    if box_covered && h0_total != box_size {
        failures.push(format!("total H^0 rank {h0_total}, expected {box_size}"));
    }

    let mut evals = Vec::new();
    for &a in &cfg.eval {
        let pt = eval_point(params, a);
        let neg: Vec<u128> = pt.iter().map(|&x| ring.neg(x)).collect();
        let b = beta(params, &pt).map_err(err)?;
        let b_neg = beta(params, &neg).map_err(err)?;
        let beta_invertible =
            b.mul(&b_neg, &ring) == Matrix::identity(b.rows(), &ring) && b.inverse(&ring).is_some();
        let (src, tgt, f) = iota(params, &pt, w_max).map_err(err)?;
        let iota_quasi_iso = is_quasi_iso(&f, &src, &tgt).map_err(err)?.is_quasi_iso;
        if !beta_invertible {
            failures.push(format!("a={a}: β not invertible"));
        }
        if !iota_quasi_iso {
            failures.push(format!("a={a}: ι not a quasi-isomorphism"));
        }
        evals.push(json!({"a": a, "beta_invertible": beta_invertible, "iota_quasi_iso": iota_quasi_iso}));
    }

    let details = json!({
        "d_squared_zero": d_squared_zero,
        "weights": weights,
        "h0_total": h0_total,
        "h0_expected": h0_expected,
        "box_size": box_size,
        "box_covered": box_covered,
        "eval": evals,
    });
    Ok(Outcome::checked(details, failures))
}

fn stratification(params: &PParams, cfg: &RunConfig) -> Eval {
    let w = cfg.max_weight.min(STRAT_WEIGHT_CAP);
    let s = stratification_eps(params, w).map_err(err)?;
    let weight_preserving = s.is_weight_preserving();
    let axiom = s.satisfies_axiom();
    let invertible = s.is_invertible().map_err(err)?;
    let cocycle = verify_cocycle(params, w).map_err(err)?;
    let horizontality = verify_horizontality(params, w).map_err(err)?;
    let mut failures = Vec::new();
    for (ok, what) in [
        (weight_preserving, "ε is not weight preserving"),
        (axiom, "ε fails the unit axiom"),
        (invertible, "ε is not invertible"),
        (cocycle.passed(), "cocycle identity fails"),
        (horizontality.passed(), "horizontality square does not commute"),
    ] {
        if !ok {
            failures.push(what.into());
        }
    }
    let details = json!({
        "window": w,
        "basis_size": s.basis.len(),
        "weight_preserving": weight_preserving,
        "axiom": axiom,
        "invertible": invertible,
        "cocycle": to_value(&cocycle),
        "horizontality": to_value(&horizontality),
    });
    Ok(Outcome::checked(details, failures))
}

fn frobenius(params: &PParams, cfg: &RunConfig) -> Eval {
    let fp = FrobParams::new(*params, 1).map_err(err)?;
    let rep = verify_frobenius_descent(&fp, cfg.max_weight).map_err(err)?;
    let failures = if rep.passed() {
        vec![]
    } else {
        let mut f = vec!["φ is not a quasi-isomorphism".to_string()];
        f.extend(rep.diagnostics.iter().cloned());
        f
    };
    Ok(Outcome::checked(to_value(&rep), failures))
}

fn kunneth(params: &PParams, cfg: &RunConfig) -> Eval {
    let left = params.with_n(1).map_err(err)?;
    let right = params.with_n(params.n.saturating_sub(1).max(1)).map_err(err)?;
    let k = verify_kunneth(&left, &right, cfg.max_weight).map_err(err)?;
    let failures = if k.passed() { vec![] } else { vec![format!("Künneth map fails: {k:?}")] };
    let mut details = to_value(&k);
    details["n_left"] = json!(left.n);
    details["n_right"] = json!(right.n);
    Ok(Outcome::checked(details, failures))
}

fn basechange(params: &PParams, cfg: &RunConfig) -> Eval {
    if params.precision == 1 {
        return Ok(Outcome::skip("N = 1 has no lower precision"));
    }
    let w = cfg.max_weight;
    let w_eps = w.min(EPS_BASECHANGE_CAP);
    let hi = build_lhdr_window(params, w).map_err(err)?;
    let ha = augmented_lhdr(params, w).map_err(err)?;
    let he = stratification_eps(params, w_eps).map_err(err)?;
    let mut failures = Vec::new();
    let mut lower = Vec::new();
    for k in 1..params.precision {
        let low = params.with_precision(k).map_err(err)?;
        let reduced = base_change(&hi, k).map_err(err)?;
        let lo = build_lhdr_window(&low, w).map_err(err)?;
        let lhdr_equal = reduced == lo;
        let augmented_equal = base_change(&ha, k).map_err(err)? == augmented_lhdr(&low, w).map_err(err)?;
        let eps_equal = he.matrix.reduce(&low.ring()) == stratification_eps(&low, w_eps).map_err(err)?.matrix;
        let homology_equal = homology(&reduced).map_err(err)? == homology(&lo).map_err(err)?;
        for (ok, what) in [
            (lhdr_equal, "linearized complex"),
            (augmented_equal, "augmented complex"),
            (eps_equal, "ε"),
            (homology_equal, "homology"),
        ] {
            if !ok {
                failures.push(format!("N'={k}: reduced {what} differs from the direct build"));
            }
        }
        lower.push(json!({
            "N'": k,
            "lhdr_equal": lhdr_equal,
            "augmented_equal": augmented_equal,
            "eps_equal": eps_equal,
            "homology_equal": homology_equal,
        }));
    }
    Ok(Outcome::checked(json!({"window": w, "eps_window": w_eps, "lower": lower}), failures))
}

fn arith_lemmas(params: &PParams, _cfg: &RunConfig) -> Eval {
    let (p, pm) = (params.p, params.pm() as u64);
    let mut failures = Vec::new();
    let mut unit_cases = 0;
    for i in pm..=UNIT_LEMMA_BOUND.max(pm) {
        if !check_unit_lemma(i, params).map_err(err)? {
            failures.push(format!("unit lemma fails at i={i}"));
        }
        unit_cases += 1;
    }
    let k_max = 4 * pm + 8;
    let mut val_cases = 0;
    for k in 0..=k_max {
        for kp in 0..=k {
            let q = qbinom_scalar(k, kp, p, pm).map_err(err)?;
            let v = valuation(q.numer(), p) as i64 - valuation(q.denom(), p) as i64;
            let legendre = qbinom_valuation_legendre(k, kp, p, pm);
            if v != legendre || v < 0 {
                failures.push(format!("qbinom({k},{kp}): valuation {v}, Legendre {legendre}"));
            }
            val_cases += 1;
        }
    }
    failures.truncate(8);
    let details = json!({
        "unit_lemma": {"from": pm, "to": UNIT_LEMMA_BOUND.max(pm), "cases": unit_cases},
        "qbinom_valuation": {"k_max": k_max, "cases": val_cases},
    });
    Ok(Outcome::checked(details, failures))
}

fn crosscheck(params: &PParams, _cfg: &RunConfig) -> Eval {
    let w = 2 * params.pm() as u64 + 1;
    let rep = crosscheck_quotient(params, w).map_err(err)?;
    let mut failures = rep.failures.clone();
    if !rep.passed() && failures.is_empty() {
        failures.push("quotient presentation differs from the exterior algebra".into());
    }
    let mut details = to_value(&rep);
    details["window"] = json!(w);
    Ok(Outcome::checked(details, failures))
}

fn jet(params: &PParams, _cfg: &RunConfig) -> Eval {
    let choice = find_splittings(params).map_err(err)?;
    let o2 = omega2_basis(params, &choice).map_err(err)?;
    let o3 = omega3_probe(params, &choice).map_err(err)?;
    let mut failures = Vec::new();
    if !o2.passed() {
        failures.push("Ω² elimination certificate fails".into());
    }
    let details = json!({"omega2": to_value(&o2), "omega3": to_value(&o3)});
    Ok(Outcome::checked(details, failures))
}

/// The parameter points a suite is evaluated at. Arithmetic lemmas depend
/// only on `(p, m)`; Frobenius descent is defined for `N = 1` only.
fn points_for(suite: Suite, grid: &[PParams]) -> Vec<(Point, PParams)> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for params in grid {
        let entry = match suite {
            Suite::ArithLemmas => {
                let q = PParams::new(params.p, params.m, 1, 1).expect("grid point is valid");
                let pt = Point {
                    p: q.p,
                    m: q.m,
                    n: None,
                    precision: None,
                };
                (pt, q)
            }
            Suite::Frobenius => {
                let q = params.with_precision(1).expect("grid point is valid");
                (point_of(&q), q)
            }
            _ => (point_of(params), *params),
        };
        if seen.insert(entry.0.clone()) {
            out.push(entry);
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

fn evaluate(name: &str, advisory: bool, point: Point, timings: bool, f: impl FnOnce() -> Eval) -> SuiteResult {
    let start = Instant::now();
    let outcome = f().unwrap_or_else(|e| Outcome {
        status: Status::Fail,
        diagnostics: vec![format!("error: {e}")],
        details: Value::Null,
    });
    SuiteResult {
        suite: name.into(),
        point,
        status: outcome.status,
        advisory,
        diagnostics: outcome.diagnostics,
        details: outcome.details,
        timing_ms: timings.then(|| start.elapsed().as_secs_f64() * 1e3),
    }
}

fn suite_fn(suite: Suite) -> fn(&PParams, &RunConfig) -> Eval {
    match suite {
        Suite::Poincare => poincare,
        Suite::Stratification => stratification,
        Suite::Frobenius => frobenius,
        Suite::Kunneth => kunneth,
        Suite::Basechange => basechange,
        Suite::ArithLemmas => arith_lemmas,
        Suite::Crosscheck => crosscheck,
        Suite::Jet => jet,
    }
}

/// Runs `suites` over the grid in parallel; results are ordered by suite, then point.
pub fn run_suites(cfg: &RunConfig, suites: &[Suite]) -> Result<Vec<SuiteResult>, crate::config::ConfigError> {
    let grid = cfg.grid()?;
    let mut tasks = Vec::new();
    for &s in suites {
        for (pt, params) in points_for(s, &grid) {
            tasks.push((s, pt, params));
        }
    }
    tasks.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    Ok(tasks
        .into_par_iter()
        .map(|(s, pt, params)| evaluate(s.name(), s.is_advisory(), pt, cfg.timings, || suite_fn(s)(&params, cfg)))
        .collect())
}

/// Per-weight homology of the linearized complex and of its augmented
/// version, for `min_weight..=max_weight`.
fn homology_table(params: &PParams, cfg: &RunConfig) -> Eval {
    let plain = homology_by_weight(&build_lhdr_window(params, cfg.max_weight).map_err(err)?).map_err(err)?;
    let aug = homology_by_weight(&augmented_lhdr(params, cfg.max_weight).map_err(err)?).map_err(err)?;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut h0_total = 0;
    for w in cfg.min_weight..=cfg.max_weight {
        let h = plain.get(&w).cloned().unwrap_or_default();
        let a = aug.get(&w).cloned().unwrap_or_default();
        let expected = box_count(params, w);
        let h0 = h.degree(0);
        if h0.free_rank != expected || !h0.torsion.is_empty() {
            failures.push(format!("weight {w}: H^0 = {h0:?}, expected free rank {expected}"));
        }
        if (1..=params.n as i32).any(|d| !h.degree(d).is_zero()) {
            failures.push(format!("weight {w}: higher homology"));
        }
        if !a.is_zero() {
            failures.push(format!("weight {w}: augmented complex not exact"));
        }
        h0_total += h0.free_rank;
        let ranks: Vec<usize> = (0..=params.n as i32).map(|d| h.free_rank(d)).collect();
        rows.push(json!({
            "weight": w,
            "free_ranks": ranks,
            "homology": to_value(&h),
            "augmented": to_value(&a),
            "expected_h0": expected,
        }));
    }
    Ok(Outcome::checked(json!({"weights": rows, "h0_total": h0_total}), failures))
}

pub fn run_homology(cfg: &RunConfig) -> Result<Vec<SuiteResult>, crate::config::ConfigError> {
    let grid = cfg.grid()?;
    Ok(grid
        .par_iter()
        .map(|params| evaluate("homology", false, point_of(params), cfg.timings, || homology_table(params, cfg)))
        .collect())
}

pub fn run_jet(cfg: &RunConfig) -> Result<Vec<SuiteResult>, crate::config::ConfigError> {
    run_suites(cfg, &[Suite::Jet])
}
