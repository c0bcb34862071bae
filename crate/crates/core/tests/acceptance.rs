//! Acceptance criteria 1–11, one PASS/FAIL line each.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;

use qdepth_core::compressed::{equivalence_suite, extract_collision, ExtractConfig, ExtractTarget};
use qdepth_core::experiments::{
    backend_cross_check, h_collision_experiment, honest_collision_experiment, serial_experiment, CollisionConfig,
    HCollisionConfig, SerialConfig,
};
use qdepth_core::podq::{replay, run_protocol, KeyMode, Transcript, TranscriptConfig};
use qdepth_core::problems::constants::{c_brute_force, c_exact, c_for_lambda, c_limit, rational_to_f64};
use qdepth_core::problems::ProblemKind;
use qdepth_core::provers::ProverBackend;
use qdepth_core::shadowlab::{run_shadowlab, ShadowlabConfig};
use qdepth_core::{Result, Seed};

type Verdict = Result<(bool, String)>;

fn criterion(n: usize, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let result = f();
    let elapsed = start.elapsed();
    let (ok, detail) = match result {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    let in_time = limit.map_or(true, |l| elapsed < l);
    let passed = ok && in_time;
    let budget = limit.map_or(String::new(), |l| format!(" of {:.0} s", l.as_secs_f64()));
    println!(
        "criterion {n:>2} {} {name}: {detail} [{:.2} s{budget}]",
        if passed { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    passed
}

fn c1() -> Verdict {
    let two_fifths = BigRational::new(BigInt::from(2), BigInt::from(5));
    let exact = c_exact(4, 2)? == two_fifths && c_brute_force(4, 2)? == two_fifths;
    let limit = c_limit(2);
    let target = 2.0 / (2f64.exp() - 1.0);
    let mut worst: f64 = 0.0;
    for lambda in 10..=16 {
        let c = rational_to_f64(&c_for_lambda(lambda)?)?;
        worst = worst.max((c - limit).abs() / limit);
    }
    let ok = exact && (limit - target).abs() < 1e-15 && worst < 0.01;
    Ok((
        ok,
        format!("c_exact(4,2) = 2/5 by formula and enumeration: {exact}; worst gap for λ in 10..=16 {worst:.5}"),
    ))
}

fn c2() -> Verdict {
    let r = honest_collision_experiment(&CollisionConfig::new(10, 0, 1000, Seed::from_u64(2)))?;
    let i = r.interference;
    let ok = i.repetitions == 10_000 && i.violations == 0;
    Ok((
        ok,
        format!(
            "{} repetitions, {} with two preimages, {} violations",
            i.repetitions, i.two_preimage, i.violations
        ),
    ))
}

fn c3() -> Verdict {
    let r = backend_cross_check(6, 10_000, Seed::from_u64(3))?;
    Ok((
        r.tv < 0.05,
        format!("outcome-class TV {:.4} < 0.05 over {} shots per backend", r.tv, r.shots),
    ))
}

fn c4() -> Verdict {
    let r = honest_collision_experiment(&CollisionConfig::new(12, 0, 500, Seed::from_u64(4)))?;
    let frozen = (r.chernoff_lower_bound - 0.1108).abs() < 1e-3 && (r.random_guess_bound - 0.076_099).abs() < 1e-4;
    let ok = frozen && r.completeness_ok() && r.random_guess_ok();
    Ok((
        ok,
        format!(
            "honest {:.3} >= {:.4}; random guess {:.3} <= {:.4} (+3σ); bounds match frozen values: {frozen}",
            r.honest.rate, r.chernoff_lower_bound, r.random_guess.rate, r.random_guess_limit
        ),
    ))
}

fn c5() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for d in 0..=3 {
        let mut cfg = CollisionConfig::new(4, d, 100, Seed::from_u64(50 + d as u64));
        cfg.backend = ProverBackend::SparseCircuit;
        let r = honest_collision_experiment(&cfg)?.depth;
        ok &= r.max_depth <= 3 + 2 * d + 1 && r.budget_trials == 100 && r.budget_exceeded == 100;
        parts.push(format!(
            "d={d}: depth {} <= {}, budget exceeded {}/{}",
            r.max_depth, r.bound, r.budget_exceeded, r.budget_trials
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn c6() -> Verdict {
    let r = h_collision_experiment(&HCollisionConfig::new(8, 4, 200, Seed::from_u64(6)))?;
    let flat = h_collision_experiment(&HCollisionConfig::new(8, 0, 20, Seed::from_u64(60)))?;
    let same_depth = r.depth_is_constant() && flat.depth_is_constant() && r.max_depth == flat.max_depth;
    let queries = r.stage_query_mismatches == 0 && flat.stage_query_mismatches == 0;
    let ok = r.acceptance.rate >= 0.95 && same_depth && queries;
    Ok((
        ok,
        format!(
            "acceptance {:.3} >= 0.95 (TwoToOne hit bound {:.3}); depth {} at d=4 and {} at d=0; {} stage queries exact: {queries}",
            r.acceptance.rate, r.hit_bound, r.max_depth, flat.max_depth, r.expected_stage_queries
        ),
    ))
}

fn c7() -> Verdict {
    let r = serial_experiment(&SerialConfig::new(8, 3, 100, Seed::from_u64(7)))?;
    let ok = r.completeness_ok() && r.tamper_rejected.rate >= 0.99;
    Ok((
        ok,
        format!(
            "honest {:.2} >= {:.2e}; tampered chains rejected {:.2} >= 0.99",
            r.honest.rate, r.product_bound, r.tamper_rejected.rate
        ),
    ))
}

fn c8() -> Verdict {
    let r = equivalence_suite(20, Seed::from_u64(8))?;
    let shapes = r.cases.len() == 20 && r.cases.iter().all(|c| c.n <= 4 && c.queries <= 4);
    let ok = shapes && r.max_tv < 1e-9 && r.decomp_involution_error < 1e-9;
    Ok((
        ok,
        format!(
            "max TV {:.2e}, Decomp involution error {:.2e}",
            r.max_tv, r.decomp_involution_error
        ),
    ))
}

fn c9() -> Verdict {
    let cfg = ExtractConfig {
        lambda: 4,
        d: 1,
        trials: 500,
        seed: Seed::from_u64(9),
        target: ExtractTarget::HonestQc,
    };
    let r = extract_collision(&cfg)?;
    Ok((
        r.all_verified,
        format!(
            "{} emissions all verified: {}; non-empty rate {:.3}",
            r.emissions.len(),
            r.all_verified,
            r.nonempty.rate
        ),
    ))
}

fn c10() -> Verdict {
    let r = run_shadowlab(&ShadowlabConfig::new(3, 2, 10_000, Seed::from_u64(10)))?;
    let worst = r
        .find
        .iter()
        .map(|c| c.hits.rate - c.limit)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok((
        r.abort_ok() && r.find_ok(),
        format!(
            "abort {:.4} <= {:.4}; worst find cell {:+.4} from its limit; exclusion cells ok: {}; structure ok: {}",
            r.abort.rate,
            r.abort_limit,
            worst,
            r.qc_ok(),
            r.structure_ok()
        ),
    ))
}

fn c11() -> Verdict {
    let mut count = 0;
    let mut ok = true;
    for (problem, lambda, d) in [
        (ProblemKind::CollisionHashing, 8, 0),
        (ProblemKind::CollisionHashing, 8, 2),
        (ProblemKind::CodeHashing, 4, 1),
    ] {
        for mode in [KeyMode::Keyless, KeyMode::Salted] {
            for s in 0..4u64 {
                let cfg = TranscriptConfig::new(lambda, d, problem, Seed::from_u64(110 + s))?;
                let run = |seed| {
                    run_protocol(
                        &cfg,
                        mode,
                        ProverBackend::StructuredBranch,
                        &mut Seed::from_u64(seed).rng(),
                    )
                };
                let t = run(s)?;
                let json = t.to_json();
                let back = Transcript::from_json(&json)?;
                ok &= t.messages().len() == 2
                    && t.depth.verifier_quantum_depth == 0
                    && back == t
                    && back.to_json() == json
                    && run(s)?.to_json() == json
                    && replay(&back)? == t.verdict;
                count += 1;
            }
        }
    }
    Ok((
        ok,
        format!("{count} transcripts: two messages, verifier depth 0, byte-identical replay"),
    ))
}

fn main() {
    let secs = Duration::from_secs;
    let results = [
        criterion(1, "constant c", Some(secs(1)), c1),
        criterion(2, "interference law", Some(secs(30)), c2),
        criterion(3, "backend cross-check", Some(secs(120)), c3),
        criterion(4, "verifier completeness", Some(secs(300)), c4),
        criterion(5, "depth ledger", Some(secs(60)), c5),
        criterion(6, "h-CollisionHashing QC prover", Some(secs(120)), c6),
        criterion(7, "serial lifting", Some(secs(180)), c7),
        criterion(8, "compressed-oracle equivalence", Some(secs(60)), c8),
        criterion(9, "extractor soundness filter", None, c9),
        criterion(10, "shadow lab", Some(secs(120)), c10),
        criterion(11, "protocol shape", None, c11),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
