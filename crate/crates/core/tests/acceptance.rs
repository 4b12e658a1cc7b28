//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Oracles here are independent of the library's own coefficient code: the
//! divided-power laws are checked against exact rational arithmetic in
//! `Q[x, y]` under `τ^{I} = x^I / q(I)!`, reduced into `Z/p^N` by a local
//! extended-gcd inverse.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use mpd_core::arith::{check_unit_lemma, mbinom, qbinom_scalar};
use mpd_core::dpcore::{DPElement, DpAlgebra, TensorWord, WeightWindow};
use mpd_core::frob::{verify_frobenius_descent, FrobParams};
use mpd_core::hdr::{
    augmented_lhdr, beta, build_lhdr, build_lhdr_window, crosscheck_quotient, iota, verify_kunneth,
};
use mpd_core::homology::{base_change, homology, homology_by_weight, is_quasi_iso};
use mpd_core::jet::{find_splittings, omega2_basis, omega3_probe, FreenessReport};
use mpd_core::strat::{stratification_eps, verify_cocycle, verify_horizontality};
use mpd_core::{MultiIndex, PParams};

type Check = Result<String, String>;

fn grid(ns: &[u32]) -> Vec<PParams> {
    let mut out = Vec::new();
    for p in [2, 3] {
        for m in [0, 1] {
            for n in [1, 2] {
                for &big_n in ns {
                    out.push(PParams::new(p, m, n, big_n).unwrap());
                }
            }
        }
    }
    out
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------------------
// Rational oracle

fn factorial(k: u64) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, x| acc * BigInt::from(x))
}

fn q_fact(i: &[u32], pm: u32) -> BigInt {
    i.iter().fold(BigInt::one(), |acc, &x| acc * factorial((x / pm) as u64))
}

fn binom_big(n: u64, k: u64) -> BigInt {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// `a / b mod p^N` for `p ∤ b`.
fn reduce_q(q: &BigRational, p: u64, big_n: u32) -> Option<u128> {
    let modulus = BigInt::from(p).pow(big_n);
    let num = q.numer().mod_floor(&modulus);
    let den = q.denom().mod_floor(&modulus);
    let g = den.extended_gcd(&modulus);
    if !g.gcd.is_one() {
        return None;
    }
    let inv = g.x.mod_floor(&modulus);
    ((num * inv).mod_floor(&modulus)).to_u128()
}

/// Sparse polynomial in `2n` variables (`x` then `y`) over `Q`.
type QPoly = BTreeMap<Vec<u32>, BigRational>;

fn q_add(a: &mut QPoly, e: Vec<u32>, c: BigRational) {
    let v = a.entry(e.clone()).or_insert_with(BigRational::zero);
    *v += c;
    if v.is_zero() {
        a.remove(&e);
    }
}

fn q_mul(a: &QPoly, b: &QPoly) -> QPoly {
    let mut out = QPoly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            q_add(&mut out, e, ca * cb);
        }
    }
    out
}

fn q_pow(a: &QPoly, k: u32, nv: usize) -> QPoly {
    let mut acc: QPoly = [(vec![0; nv], BigRational::one())].into_iter().collect();
    for _ in 0..k {
        acc = q_mul(&acc, a);
    }
    acc
}

/// `∏_j (s_x x_j + s_y y_j)^{i_j} / q(I)!`.
fn q_linear_power(i: &[u32], sx: i64, sy: i64, pm: u32) -> QPoly {
    let n = i.len();
    let nv = 2 * n;
    let mut acc: QPoly = [(vec![0; nv], BigRational::one())].into_iter().collect();
    for (j, &e) in i.iter().enumerate() {
        let mut lin = QPoly::new();
        if sx != 0 {
            let mut v = vec![0; nv];
            v[j] = 1;
            q_add(&mut lin, v, BigRational::from_integer(sx.into()));
        }
        if sy != 0 {
            let mut v = vec![0; nv];
            v[n + j] = 1;
            q_add(&mut lin, v, BigRational::from_integer(sy.into()));
        }
        acc = q_mul(&acc, &q_pow(&lin, e, nv));
    }
    let qf = BigRational::from_integer(q_fact(i, pm));
    acc.into_iter().map(|(e, c)| (e, c / &qf)).collect()
}

/// Coefficients of a two-slot rational polynomial on the basis `τ^{V} ⊗ τ^{W}`.
fn to_dp2(poly: &QPoly, n: usize, pm: u32, p: u64, big_n: u32) -> Result<BTreeMap<TensorWord, u128>, String> {
    let mut out = BTreeMap::new();
    for (e, c) in poly {
        let (v, w) = e.split_at(n);
        let coeff = c * BigRational::from_integer(q_fact(v, pm) * q_fact(w, pm));
        let r = reduce_q(&coeff, p, big_n).ok_or_else(|| format!("coefficient {coeff} is not p-integral"))?;
        if r != 0 {
            out.insert(TensorWord(vec![MultiIndex(v.to_vec()), MultiIndex(w.to_vec())]), r);
        }
    }
    Ok(out)
}

fn nonzero_terms(x: &DPElement) -> BTreeMap<TensorWord, u128> {
    x.terms.iter().filter(|(_, &c)| c != 0).map(|(w, &c)| (w.clone(), c)).collect()
}

fn indices_up_to(n: usize, w: u64) -> Vec<MultiIndex> {
    (0..=w).flat_map(|k| MultiIndex::of_weight(n, k)).collect()
}

// ---------------------------------------------------------------------------
// Criteria

fn c1_unit_lemma() -> Check {
    let mut count = 0;
    let mut lib_time = Duration::ZERO;
    for p in [2u64, 3, 5] {
        for m in 0..=2u32 {
            let params = PParams::new(p, m, 1, 1).unwrap();
            let pm = params.pm() as u64;
            // Oracle: binom(i, p^m) / floor(i / p^m) ≡ 1 (mod p), with the
            // binomial advanced by binom(i+1, k) = binom(i, k) (i+1) / (i+1-k).
            let mut b = BigInt::one();
            for i in pm..=2000 {
                if i > pm {
                    b = b * BigInt::from(i) / BigInt::from(i - pm);
                }
                let start = Instant::now();
                let lib = check_unit_lemma(i, &params).map_err(|e| e.to_string())?;
                lib_time += start.elapsed();
                let q = BigRational::new(b.clone(), BigInt::from(i / pm));
                let oracle = reduce_q(&q, p, 1) == Some(1);
                ensure(lib && oracle, || format!("p={p}, m={m}, i={i}: lib={lib}, oracle={oracle}"))?;
                count += 1;
            }
        }
    }
    ensure(lib_time < Duration::from_secs(5), || format!("library took {:.2}s", lib_time.as_secs_f64()))?;
    Ok(format!("{count} cases, library {:.2}s", lib_time.as_secs_f64()))
}

fn c2_d_squared() -> Check {
    let mut blocks = 0;
    for params in grid(&[1, 2, 3]) {
        let ring = params.ring();
        for w in 0..=12 {
            let c = build_lhdr(&params, w).map_err(|e| e.to_string())?;
            for k in 1..c.diffs.len() {
                let sq = c.diffs[k].mul(&c.diffs[k - 1], &ring);
                ensure(sq.is_zero(), || format!("{params}, weight {w}: d∘d ≠ 0 in degree {k}"))?;
            }
            blocks += 1;
        }
    }
    Ok(format!("{blocks} weight blocks"))
}

fn c3_poincare() -> Check {
    let w_max = 12;
    for params in grid(&[1, 2, 3]) {
        let aug = augmented_lhdr(&params, w_max).map_err(|e| e.to_string())?;
        for (w, h) in homology_by_weight(&aug).map_err(|e| e.to_string())? {
            ensure(h.is_zero(), || format!("{params}, weight {w}: augmented complex not exact: {h:?}"))?;
        }
        let plain = build_lhdr_window(&params, w_max).map_err(|e| e.to_string())?;
        let by_w = homology_by_weight(&plain).map_err(|e| e.to_string())?;
        let pm = params.pm();
        let mut total = 0;
        for (w, h) in &by_w {
            // Oracle: H^0 in weight w is free on {I : i_j < p^m, |I| = w}.
            let expected = MultiIndex::of_weight(params.n, *w)
                .iter()
                .filter(|i| i.0.iter().all(|&x| x < pm))
                .count();
            let h0 = h.degree(0);
            ensure(h0.free_rank == expected && h0.torsion.is_empty(), || {
                format!("{params}, weight {w}: H^0 = {h0:?}, expected free rank {expected}")
            })?;
            ensure((1..=params.n as i32).all(|d| h.degree(d).is_zero()), || {
                format!("{params}, weight {w}: higher homology {h:?}")
            })?;
            total += h0.free_rank;
        }
        let expected = (params.p as usize).pow(params.m * params.n as u32);
        ensure(total == expected, || format!("{params}: total H^0 rank {total}, expected {expected}"))?;
    }
    Ok("24 grid points, weights <= 12".into())
}

fn c4_beta_iota() -> Check {
    let mut count = 0;
    for params in grid(&[1, 2, 3]) {
        let ring = params.ring();
        let n = params.n;
        let p = params.p as u128;
        let points: Vec<Vec<u128>> = vec![
            vec![0; n],
            vec![1; n],
            (0..n).map(|i| ring.reduce(p * (i as u128 + 1))).collect(),
            (0..n).map(|i| ring.reduce(i as u128 + 2)).collect(),
        ];
        for a in points {
            let b = beta(&params, &a).map_err(|e| e.to_string())?;
            // Oracle: β is translation by a, so β(-a) is its inverse.
            let neg: Vec<u128> = a.iter().map(|&x| ring.neg(x)).collect();
            let b_neg = beta(&params, &neg).map_err(|e| e.to_string())?;
            let id = mpd_core::matrix::Matrix::identity(b.rows(), &ring);
            ensure(b.mul(&b_neg, &ring) == id, || format!("{params}, a={a:?}: β(a)β(-a) ≠ 1"))?;
            ensure(b.inverse(&ring).is_some(), || format!("{params}, a={a:?}: β not invertible"))?;
            let (src, tgt, f) = iota(&params, &a, 8).map_err(|e| e.to_string())?;
            let rep = is_quasi_iso(&f, &src, &tgt).map_err(|e| e.to_string())?;
            ensure(rep.is_quasi_iso, || format!("{params}, a={a:?}: ι not a quasi-isomorphism"))?;
            count += 1;
        }
    }
    Ok(format!("{count} (grid point, evaluation point) pairs"))
}

fn c5_stratification() -> Check {
    let w = 6;
    for params in grid(&[2]) {
        let s = stratification_eps(&params, w).map_err(|e| e.to_string())?;
        ensure(s.is_weight_preserving() && s.satisfies_axiom(), || format!("{params}: ε axioms"))?;
        ensure(s.is_invertible().map_err(|e| e.to_string())?, || format!("{params}: ε not invertible"))?;
        // Oracle: ε(1 ⊗ τ^{I}) = (x - y)^I / q(I)!.
        for i in indices_up_to(params.n, w) {
            let oracle = to_dp2(&q_linear_power(&i.0, 1, -1, params.pm()), params.n, params.pm(), params.p, 2)?;
            let lib = nonzero_terms(&s.apply_unit(&i));
            ensure(lib == oracle, || format!("{params}, I={i}: ε = {lib:?}, oracle {oracle:?}"))?;
        }
        let cocycle = verify_cocycle(&params, w).map_err(|e| e.to_string())?;
        ensure(cocycle.passed(), || format!("{params}: cocycle fails: {:?}", cocycle.counterexample))?;
        let horiz = verify_horizontality(&params, w).map_err(|e| e.to_string())?;
        ensure(horiz.passed(), || format!("{params}: horizontality fails: {:?}", horiz.counterexample))?;
    }
    Ok("8 grid points, weights <= 6, polynomial coefficients".into())
}

fn c6_frobenius() -> Check {
    for (p, m, s, n) in [(2, 0, 1, 1), (3, 0, 1, 1), (2, 1, 1, 1)] {
        let fp = FrobParams::new(PParams::new(p, m, n, 1).unwrap(), s).map_err(|e| e.to_string())?;
        let rep = verify_frobenius_descent(&fp, 8).map_err(|e| e.to_string())?;
        ensure(rep.passed(), || format!("(p,m,s,n)=({p},{m},{s},{n}): {rep:?}"))?;
    }
    Ok("3 points, source weights <= 8".into())
}

fn c7_kunneth() -> Check {
    for p in [2, 3] {
        for m in [0, 1] {
            let params = PParams::new(p, m, 1, 2).unwrap();
            let k = verify_kunneth(&params, &params, 8).map_err(|e| e.to_string())?;
            ensure(k.passed(), || format!("{params}: {k:?}"))?;
        }
    }
    Ok("4 points, weights <= 8".into())
}

fn c8_base_change() -> Check {
    let mut count = 0;
    for params in grid(&[2, 3]) {
        for lower in 1..params.precision {
            let low = params.with_precision(lower).unwrap();
            let hi = build_lhdr_window(&params, 8).map_err(|e| e.to_string())?;
            let lo = build_lhdr_window(&low, 8).map_err(|e| e.to_string())?;
            ensure(base_change(&hi, lower).map_err(|e| e.to_string())? == lo, || {
                format!("{params} -> N'={lower}: LHDR differs")
            })?;
            let ha = augmented_lhdr(&params, 8).map_err(|e| e.to_string())?;
            let la = augmented_lhdr(&low, 8).map_err(|e| e.to_string())?;
            ensure(base_change(&ha, lower).map_err(|e| e.to_string())? == la, || {
                format!("{params} -> N'={lower}: augmented complex differs")
            })?;
            let se = stratification_eps(&params, 4).map_err(|e| e.to_string())?;
            let le = stratification_eps(&low, 4).map_err(|e| e.to_string())?;
            ensure(se.matrix.reduce(&low.ring()) == le.matrix, || {
                format!("{params} -> N'={lower}: ε differs")
            })?;
            // Homology of the reduced complex is the homology of the direct build.
            ensure(
                homology(&base_change(&hi, lower).unwrap()).unwrap() == homology(&lo).unwrap(),
                || format!("{params} -> N'={lower}: homology differs"),
            )?;
            count += 1;
        }
    }
    Ok(format!("{count} (N, N') pairs"))
}

fn c9_crosscheck() -> Check {
    for p in [2, 3] {
        for m in [0, 1] {
            for n in [1, 2] {
                let params = PParams::new(p, m, n, 2).unwrap();
                let w = 2 * params.pm() as u64 + 1;
                let rep = crosscheck_quotient(&params, w).map_err(|e| e.to_string())?;
                ensure(rep.passed(), || format!("{params}: {rep:?}"))?;
            }
        }
    }
    Ok("8 points, through weight 2p^m + 1".into())
}

fn c10_rational_oracle() -> Check {
    let w_max = 10;
    let big_n = 3;
    let mut checks = 0;
    for p in [2u64, 3] {
        for m in 0..=2u32 {
            for n in [1usize, 2] {
                let params = PParams::new(p, m, n, big_n).unwrap();
                let pm = params.pm();
                let ring = params.ring();
                let alg = DpAlgebra::new(params, WeightWindow::new(w_max)).map_err(|e| e.to_string())?;
                let idx = indices_up_to(n, w_max);
                for i in &idx {
                    // Multiplication: τ^{I} τ^{J} = q(I+J)! / (q(I)! q(J)!) τ^{I+J}.
                    for j in &idx {
                        if i.weight() + j.weight() > w_max {
                            continue;
                        }
                        let k = i.add(j);
                        let c = BigRational::new(q_fact(&k.0, pm), q_fact(&i.0, pm) * q_fact(&j.0, pm));
                        let want = reduce_q(&c, p, big_n).unwrap();
                        let got = alg.mul(&alg.tau(i), &alg.tau(j)).map_err(|e| e.to_string())?;
                        ensure(got.coeff(&TensorWord::single(k.clone())) == want, || {
                            format!("{params}: τ^{{{i}}}τ^{{{j}}}")
                        })?;
                        checks += 1;
                    }
                    // Comultiplication: (x + y)^I / q(I)!.
                    let oracle = to_dp2(&q_linear_power(&i.0, 1, 1, pm), n, pm, p, big_n)?;
                    ensure(nonzero_terms(&alg.add_expand(i)) == oracle, || format!("{params}: Δτ^{{{i}}}"))?;
                    // d¹ on the normalized complex: (x^I + y^I - (x+y)^I) / q(I)!.
                    let mut d1 = q_linear_power(&i.0, 1, 0, pm);
                    for (e, c) in q_linear_power(&i.0, 0, 1, pm) {
                        q_add(&mut d1, e, c);
                    }
                    for (e, c) in q_linear_power(&i.0, 1, 1, pm) {
                        q_add(&mut d1, e, -c);
                    }
                    let oracle = to_dp2(&d1, n, pm, p, big_n)?;
                    let got = alg.dga_differential(1, &alg.tau(i)).map_err(|e| e.to_string())?;
                    ensure(nonzero_terms(&got) == oracle, || format!("{params}: d¹τ^{{{i}}}"))?;
                    // Scaling: (c x)^I / q(I)! = c^{|I|} x^I / q(I)!.
                    for c in [2i64, -1, p as i64, p as i64 + 1] {
                        let cr = ring.from_i64(c);
                        let want = reduce_q(&BigRational::from_integer(BigInt::from(c).pow(i.weight() as u32)), p, big_n)
                            .unwrap();
                        ensure(alg.scale_substitute(cr, i) == want, || format!("{params}: scaling {c} on {i}"))?;
                    }
                    checks += 3;
                }
            }
        }
    }
    Ok(format!("{checks} identities"))
}

fn c11_level_zero() -> Check {
    for p in [2u64, 3, 5] {
        for k in 0..=60u64 {
            for kp in 0..=k {
                let q = qbinom_scalar(k, kp, p, 1).map_err(|e| e.to_string())?;
                ensure(q.is_integer() && q.to_integer() == BigUint::one(), || {
                    format!("p={p}: qbinom({k},{kp}) = {q} at m=0")
                })?;
                let mb = mbinom(k, kp, 1).map_err(|e| e.to_string())?;
                ensure(BigInt::from(mb) == binom_big(k, kp), || format!("p={p}: mbinom({k},{kp}) at m=0"))?;
            }
        }
    }
    for p in [2, 3] {
        for n in [1, 2, 3] {
            let params = PParams::new(p, 0, n, 2).unwrap();
            let plain = build_lhdr_window(&params, 8).map_err(|e| e.to_string())?;
            let h = homology(&plain).map_err(|e| e.to_string())?;
            ensure(h.free_rank(0) == 1 && (1..=n as i32).all(|d| h.degree(d).is_zero()), || {
                format!("{params}: classical Poincaré lemma fails: {h:?}")
            })?;
            ensure(verify_cocycle(&params, 5).map_err(|e| e.to_string())?.passed(), || {
                format!("{params}: classical cocycle")
            })?;
            let choice = find_splittings(&params).map_err(|e| e.to_string())?;
            let o2 = omega2_basis(&params, &choice).map_err(|e| e.to_string())?;
            let o3 = omega3_probe(&params, &choice).map_err(|e| e.to_string())?;
            let c2 = n * (n.saturating_sub(1)) / 2;
            let c3 = if n >= 3 { n * (n - 1) * (n - 2) / 6 } else { 0 };
            ensure(o2.passed() && o2.rank == c2, || format!("{params}: Ω² rank {} vs {c2}", o2.rank))?;
            ensure(o3.elimination_complete && o3.residual_count == c3, || {
                format!("{params}: Ω³ residual {} vs {c3}", o3.residual_count)
            })?;
        }
    }
    Ok("qbinom ≡ 1, mbinom = binom, classical Poincaré, cocycle and jet ranks".into())
}

fn c12_jet() -> Check {
    let required = [
        "schema",
        "params",
        "choice",
        "generator_count",
        "eliminated_count",
        "residual_generators",
        "b_cycles",
    ];
    for params in grid(&[2]) {
        let choice = find_splittings(&params).map_err(|e| e.to_string())?;
        let o2 = omega2_basis(&params, &choice).map_err(|e| e.to_string())?;
        ensure(o2.passed(), || format!("{params}: Ω² certificate {o2:?}"))?;
        ensure(o2.rank == o2.generator_count - o2.relation_count, || format!("{params}: Ω² rank"))?;
        let a = serde_json::to_string(&omega3_probe(&params, &choice).map_err(|e| e.to_string())?).unwrap();
        let b = serde_json::to_string(&omega3_probe(&params, &choice).map_err(|e| e.to_string())?).unwrap();
        ensure(a == b, || format!("{params}: Ω³ report not deterministic"))?;
        let v: serde_json::Value = serde_json::from_str(&a).unwrap();
        for key in required {
            ensure(v.get(key).is_some(), || format!("{params}: report lacks {key}"))?;
        }
        let back: FreenessReport = serde_json::from_str(&a).map_err(|e| e.to_string())?;
        ensure(serde_json::to_string(&back).unwrap() == a, || format!("{params}: round trip"))?;
    }
    Ok("8 grid points; Ω³ reports are evidence only".into())
}

type Criterion = (u32, &'static str, Option<Duration>, fn() -> Check);

fn main() -> ExitCode {
    let criteria: Vec<Criterion> = vec![
        (1, "unit lemma", None, c1_unit_lemma),
        (2, "d^2 = 0", Some(Duration::from_secs(60)), c2_d_squared),
        (3, "Poincaré lemma avatar", Some(Duration::from_secs(300)), c3_poincare),
        (4, "β invertible, ι quasi-isomorphism", None, c4_beta_iota),
        (5, "stratification cocycle and horizontality", None, c5_stratification),
        (6, "Frobenius descent", Some(Duration::from_secs(120)), c6_frobenius),
        (7, "Künneth", None, c7_kunneth),
        (8, "base change", None, c8_base_change),
        (9, "quotient cross-validation", None, c9_crosscheck),
        (10, "rational oracle", None, c10_rational_oracle),
        (11, "level 0 regression", None, c11_level_zero),
        (12, "jet probe", None, c12_jet),
    ];
    let mut failed = 0;
    for (k, name, limit, f) in criteria {
        let start = Instant::now();
        let result = f();
        let elapsed = start.elapsed();
        let over = limit.filter(|&l| elapsed > l);
        match (result, over) {
            (Ok(note), None) => println!("criterion {k:>2} PASS  {name} ({note}; {:.2}s)", elapsed.as_secs_f64()),
            (Ok(_), Some(l)) => {
                failed += 1;
                println!(
                    "criterion {k:>2} FAIL  {name} (took {:.2}s, limit {}s)",
                    elapsed.as_secs_f64(),
                    l.as_secs()
                );
            }
            (Err(e), _) => {
                failed += 1;
                println!("criterion {k:>2} FAIL  {name}: {e}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
