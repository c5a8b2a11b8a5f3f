//! Counterexample reproductions and the invariant suites behind `verify`.
//!
//! Every check draws from its own stream derived from the run seed, so
//! suites can be run alone or together with identical results.

use realop_core::linalg::{self, Mat};
use realop_core::mideal::{
    certify_left_m_projection, is_right_ideal, projection_complexification_consistency,
    shuffle_iso, solve_multiplier, verify_multiplier_witness, CertifyOptions, Check, Projection,
    Verdict,
};
use realop_core::opspace::{
    check_ruan_axioms, complex_elem, complex_quotient_norms, complexification_norm,
    complexify_space, direct_sum_elem, direct_sum_spaces, level_cb_norm_lower, level_norm,
    sampled_level_ratio, theta_dual_norm_lower, CbOptions, QuotientOptions, ThetaOptions,
};
use realop_core::quantization::{
    compare_l1_quantizations, l12_pair, max_l1_norm_bounds, min_complexification_check,
    min_level_norm, realize_min, w2_complex_norm, BanachSpace,
};
use realop_core::systems::{
    build_paulsen_system, check_brs_level, choi_effros_product, generated_subtriple, is_tro,
    paulsen_positivity_transfer, shilov_inner_product, unitization_complexification_check,
    OpAlgebra, TroSpace,
};
use realop_core::{rng, CBMap, MatElem, OpSpace};
use serde_json::{json, Value};

use crate::input::{load_map, load_space};
use crate::report::{Measurement, Status};
use crate::{CliError, Ctx, Outcome};

pub const REPRODUCTIONS: [&str; 2] = ["l12-nonunique", "complex-dual"];
pub const SUITES: [&str; 5] = ["linalg", "opspace", "quantization", "mideal", "systems"];

const L12_CLAIM: &str =
    "the operator space structure on l1_2 is not unique: max norm >= 2 > sqrt(2) = min norm";
const DUAL_CLAIM: &str =
    "complexification and duality need not commute completely isometrically: ||x|| = sqrt(2) while the dual-side norm is equal to 1";

type Checks = Result<Vec<Measurement>, CliError>;

pub(crate) fn reproduce(ctx: &Ctx, name: &str) -> Result<Outcome, CliError> {
    let ms = match name {
        "l12-nonunique" => l12_nonunique(ctx.seed)?,
        "complex-dual" => complex_dual(ctx.seed)?,
        other => {
            return Err(CliError::Usage(format!(
                "unknown reproduction `{other}`\nusage: realop reproduce <{}>",
                REPRODUCTIONS.join("|")
            )))
        }
    };
    Ok(Outcome::new(ms, Value::Null))
}

pub(crate) fn verify(
    ctx: &Ctx,
    suite: &str,
    proj: Option<(&str, &str)>,
) -> Result<Outcome, CliError> {
    let names: Vec<&str> = match suite {
        "all" => SUITES.to_vec(),
        s if SUITES.contains(&s) => vec![s],
        other => {
            return Err(CliError::Usage(format!(
                "unknown suite `{other}`\nusage: realop verify <all|{}>",
                SUITES.join("|")
            )))
        }
    };
    if proj.is_some() && !names.contains(&"mideal") {
        return Err(CliError::Usage(
            "--space/--proj only apply to the mideal suite".into(),
        ));
    }
    // Inputs are validated before any suite runs.
    let user_proj = match proj {
        Some((s, p)) => {
            let space = load_space(s)?;
            let map = load_map(p, Some(&space))?;
            Some(Projection::new(map).map_err(|e| CliError::Precondition(e.to_string()))?)
        }
        None => None,
    };
    let mut all = Vec::new();
    let mut status = None;
    for name in names {
        let ms = match name {
            "linalg" => linalg_suite(ctx.seed)?,
            "opspace" => opspace_suite(ctx.seed)?,
            "quantization" => quantization_suite(ctx.seed)?,
            "mideal" => {
                let mut ms = mideal_suite(ctx.seed)?;
                if let Some(p) = &user_proj {
                    let c = certify_left_m_projection(
                        p,
                        &CertifyOptions {
                            seed: ctx.seed,
                            ..Default::default()
                        },
                    )?;
                    if let Verdict::Inconclusive { .. } = c.verdict {
                        status = Some(Status::Inconclusive);
                    }
                    ms.push(
                        Measurement::flag("user_projection_certified", c.is_certified(), true)
                            .params(serde_json::to_value(&c).expect("certificates serialize")),
                    );
                }
                ms
            }
            "systems" => systems_suite(ctx.seed)?,
            _ => unreachable!(),
        };
        all.extend(ms.into_iter().map(|mut m| {
            m.name = format!("{name}/{}", m.name);
            m
        }));
    }
    let out = Outcome::new(all, Value::Null);
    Ok(match status {
        Some(s) if out.measurements.iter().all(|m| m.pass) => out.with_status(s),
        _ => out,
    })
}

fn seed_for(seed: u64, suite: u64, check: u64) -> u64 {
    rng::derive_seed(seed, &[suite, check])
}

pub fn l12_nonunique(seed: u64) -> Checks {
    let (m_max, restarts) = (4, 64);
    let c = compare_l1_quantizations(&l12_pair(), m_max, restarts, seed)?;
    let p = json!({ "m_max": m_max, "restarts": restarts, "seed": seed, "attained_m": c.max.attained_m });
    Ok(vec![
        Measurement::near("min_norm", c.min_norm, 2f64.sqrt(), "sqrt(2)", 1e-9).claim(L12_CLAIM),
        Measurement::at_least("max_lower", c.max.lower, 2.0 - 1e-6)
            .params(p)
            .claim(L12_CLAIM),
        Measurement::near("max_upper", c.max.upper, 2.0, "2", 1e-12).claim(L12_CLAIM),
        Measurement::at_least("gap", c.gap, 0.58).claim(L12_CLAIM),
    ])
}

pub fn complex_dual(seed: u64) -> Checks {
    let m2 = OpSpace::full(2, 2);
    // x = e11 + i e12
    let re = MatElem::scalar(vec![1.0, 0.0, 0.0, 0.0]);
    let im = MatElem::scalar(vec![0.0, 1.0, 0.0, 0.0]);
    let norm = complexification_norm(&m2, &re, &im)?;
    let opts = ThetaOptions {
        seed,
        ..Default::default()
    };
    let t = theta_dual_norm_lower(&Mat::unit(2, 2, 0, 0), &Mat::unit(2, 2, 0, 1), &opts)?;
    let p = json!({ "m_max": opts.m_max, "restarts": opts.restarts, "iters": opts.iters, "seed": seed });
    Ok(vec![
        Measurement::near("complex_norm", norm, 2f64.sqrt(), "sqrt(2)", 1e-9).claim(DUAL_CLAIM),
        Measurement::near("dual_norm_lower", t.value, 1.0, "1", 1e-6)
            .params(p.clone())
            .claim(DUAL_CLAIM),
        Measurement::at_most("max_restart_value", t.max_restart_value, 1.0 + 1e-6).params(p),
        Measurement::equals("restarts_per_m", t.restarts_run / opts.m_max, opts.restarts),
        Measurement::at_most("attained_m", t.attained_m as f64, opts.m_max as f64),
        Measurement::at_least("strict_gap", norm - t.value, 0.4).claim(DUAL_CLAIM),
    ])
}

fn linalg_suite(seed: u64) -> Checks {
    let mut ms = Vec::new();

    // op_norm against the largest eigenvalue of x^T x
    let mut dev: f64 = 0.0;
    for s in 0..200u64 {
        let mut r = rng::stream(seed_for(seed, 1, 1), &[s]);
        let (p, q) = (1 + (s as usize) % 5, 1 + (s as usize / 5) % 4);
        let x = rng::gaussian_mat(&mut r, p, q);
        let (ev, _) = linalg::sym_eigen(&x.transpose().matmul(&x))?;
        let oracle = ev.iter().cloned().fold(0.0, f64::max).sqrt();
        dev = dev.max((linalg::op_norm(&x)? - oracle).abs() / (1.0 + oracle));
    }
    ms.push(
        Measurement::deviation("op_norm_vs_gram_eigenvalue", dev, 1e-10)
            .params(json!({ "samples": 200 })),
    );

    let mut dev: f64 = 0.0;
    for s in 0..100u64 {
        let mut r = rng::stream(seed_for(seed, 1, 2), &[s]);
        let x = rng::gaussian_mat(&mut r, 4, 3);
        let d = linalg::svd(&x);
        let rebuilt = d.u.matmul(&Mat::diag(&d.s)).matmul(&d.v.transpose());
        dev = dev.max(rebuilt.max_abs_diff(&x));
    }
    ms.push(
        Measurement::deviation("svd_reconstruction", dev, 1e-12).params(json!({ "samples": 100 })),
    );

    let n = 500;
    let mut agree = 0;
    for s in 0..n {
        let mut r = rng::stream(seed_for(seed, 1, 3), &[s as u64]);
        let (p, q) = (1 + s % 3, 1 + (s / 3) % 3);
        let x = rng::gaussian_mat(&mut r, p, q);
        let x = x.scale(rng::uniform(&mut r, 0.5, 1.5) / linalg::op_norm(&x)?);
        let (c, pos) = linalg::contraction_iff_positive(&x, 1e-9)?;
        agree += usize::from(c == pos);
    }
    ms.push(
        Measurement::near(
            "contraction_positivity_agreement",
            agree as f64 / n as f64,
            1.0,
            "1",
            0.0,
        )
        .params(json!({ "samples": n, "norm_range": [0.5, 1.5], "tol": 1e-9 })),
    );

    let mut dev: f64 = 0.0;
    for s in 0..50u64 {
        let mut r = rng::stream(seed_for(seed, 1, 4), &[s]);
        let k = linalg::skew(&rng::gaussian_mat(&mut r, 4, 4).scale(2.0));
        let q = linalg::expm(&k);
        dev = dev.max(q.transpose().matmul(&q).max_abs_diff(&Mat::identity(4)));
    }
    ms.push(
        Measurement::deviation("expm_skew_orthogonal", dev, 1e-12).params(json!({ "samples": 50 })),
    );
    Ok(ms)
}

fn sample_spaces() -> Vec<OpSpace> {
    let upper = OpSpace::new(
        2,
        2,
        vec![
            Mat::unit(2, 2, 0, 0),
            Mat::unit(2, 2, 0, 1),
            Mat::unit(2, 2, 1, 1),
        ],
    )
    .expect("upper triangular basis");
    vec![
        OpSpace::scalars(),
        OpSpace::full(2, 2),
        OpSpace::full(2, 3),
        upper,
        realize_min(&BanachSpace::ell_one(3)),
    ]
}

fn opspace_suite(seed: u64) -> Checks {
    let mut ms = Vec::new();
    let m2 = OpSpace::full(2, 2);

    let scaled = OpSpace::new(1, 1, vec![Mat::rows_of(&[[2.0]])])?;
    let mut blocks = MatElem::zeros(2, 4);
    blocks
        .entry_mut(0, 0)
        .copy_from_slice(&[1.0, 0.0, 0.0, -1.0]);
    blocks
        .entry_mut(1, 1)
        .copy_from_slice(&[0.0, 1.0, 1.0, 0.0]);
    ms.push(Measurement::near(
        "identity_norm",
        level_norm(&m2, &MatElem::scalar(vec![1.0, 0.0, 0.0, 1.0]))?,
        1.0,
        "1",
        1e-12,
    ));
    ms.push(Measurement::near(
        "scaled_basis_norm",
        level_norm(&scaled, &MatElem::scalar(vec![1.0]))?,
        2.0,
        "2",
        1e-12,
    ));
    ms.push(Measurement::near(
        "block_diagonal_norm",
        level_norm(&m2, &blocks)?,
        1.0,
        "1",
        1e-12,
    ));

    // Conjugation is isometric and x + i0 has the norm of x.
    let (mut conj, mut real, mut pairs) = (0.0f64, 0.0f64, 0);
    for (i, x) in sample_spaces().iter().enumerate() {
        let xc = complexify_space(x)?;
        for s in 0..200u64 {
            let mut r = rng::stream(seed_for(seed, 2, 1), &[i as u64, s]);
            let n = 1 + (s as usize) % 3;
            let a = x.random_elem(n, &mut r);
            let b = x.random_elem(n, &mut r);
            let z = complex_elem(&a, &b)?;
            conj = conj.max((level_norm(&xc, &z)? - level_norm(&xc, &xc.conjugate(&z)?)?).abs());
            let zero = MatElem::zeros(n, x.dim());
            real = real.max((complexification_norm(x, &a, &zero)? - level_norm(x, &a)?).abs());
            pairs += 1;
        }
    }
    let p = json!({ "pairs": pairs, "spaces": 5, "levels": [1, 2, 3] });
    ms.push(Measurement::deviation("conjugation_isometry", conj, 1e-10).params(p.clone()));
    ms.push(Measurement::deviation("real_part_embedding", real, 1e-12).params(p));

    let ruan = [
        ("m2", m2.clone()),
        ("m2_complexified", complexify_space(&m2)?),
        ("min_linf2", realize_min(&BanachSpace::ell_inf(2))),
    ];
    for (i, (label, s)) in ruan.iter().enumerate() {
        let rep = check_ruan_axioms(s, 3, 100, seed_for(seed, 2, 10 + i as u64), 1e-10)?;
        let p =
            json!({ "samples": rep.samples, "max_level": rep.max_level, "skipped": rep.skipped });
        ms.push(
            Measurement::deviation(
                &format!("ruan_direct_sum_{label}"),
                rep.direct_sum_violation,
                1e-10,
            )
            .params(p.clone()),
        );
        ms.push(
            Measurement::deviation(
                &format!("ruan_bimodule_{label}"),
                rep.bimodule_violation,
                1e-10,
            )
            .params(p),
        );
    }

    let a = m2.clone();
    let b = realize_min(&BanachSpace::ell_one(2));
    let sum = direct_sum_spaces(&[a.clone(), b.clone()])?;
    let mut dev: f64 = 0.0;
    for s in 0..50u64 {
        let mut r = rng::stream(seed_for(seed, 2, 2), &[s]);
        let n = 1 + (s as usize) % 3;
        let x = a.random_elem(n, &mut r);
        let y = b.random_elem(n, &mut r);
        let want = level_norm(&a, &x)?.max(level_norm(&b, &y)?);
        dev = dev.max((level_norm(&sum, &direct_sum_elem(&[x, y])?)? - want).abs());
    }
    ms.push(Measurement::deviation("direct_sum_max", dev, 1e-12).params(json!({ "samples": 50 })));

    let mut gap: f64 = 0.0;
    let qopts = QuotientOptions::default();
    for s in 0..50u64 {
        let mut r = rng::stream(seed_for(seed, 2, 3), &[s]);
        let k = 1 + (s as usize) % 2;
        let sub: Vec<Vec<f64>> = (0..k).map(|_| rng::gaussian_vec(&mut r, 4)).collect();
        let x = m2.random_elem(1, &mut r);
        let y = m2.random_elem(1, &mut r);
        gap = gap.max(complex_quotient_norms(&m2, &sub, &x, &y, &qopts)?.gap);
    }
    ms.push(
        Measurement::deviation("quotient_complexification", gap, 1e-6)
            .params(json!({ "cases": 50, "max_iters": qopts.max_iters, "barrier_tol": qopts.tol })),
    );

    // The transpose on M_2 has cb norm 2, attained at level 2.
    let t = CBMap::from_ambient_fn(&m2, Mat::transpose)?;
    let cbo = CbOptions {
        restarts: 4,
        iters: 200,
        seed: seed_for(seed, 2, 4),
    };
    let est = level_cb_norm_lower(&t, 2, &cbo)?;
    ms.push(
        Measurement::near("transpose_cb_level_2", est.value, 2.0, "2", 1e-6)
            .params(json!({ "restarts": cbo.restarts, "iters": cbo.iters, "seed": cbo.seed })),
    );
    ms.push(Measurement::near(
        "transpose_norm_level_1",
        level_cb_norm_lower(&t, 1, &cbo)?.value,
        1.0,
        "1",
        1e-9,
    ));

    ms.extend(complex_dual(seed)?.into_iter().map(|mut m| {
        m.name = format!("complex_dual_{}", m.name);
        m
    }));
    Ok(ms)
}

fn quantization_suite(seed: u64) -> Checks {
    let mut ms = Vec::new();
    let polytope = BanachSpace::new(2, vec![vec![1.0, 0.0], vec![0.6, 0.8], vec![0.6, -0.8]])?;
    let spaces = [
        BanachSpace::ell_one(3),
        BanachSpace::ell_inf(3),
        polytope,
        BanachSpace::real_line(),
    ];

    let (mut lvl1, mut sym) = (0.0f64, 0.0f64);
    for (i, e) in spaces.iter().enumerate() {
        for s in 0..100u64 {
            let mut r = rng::stream(seed_for(seed, 3, 1), &[i as u64, s]);
            let x = rng::gaussian_vec(&mut r, e.dim());
            let y = rng::gaussian_vec(&mut r, e.dim());
            lvl1 = lvl1.max((min_level_norm(e, &MatElem::scalar(x.clone()))? - e.norm(&x)?).abs());
            let ny: Vec<f64> = y.iter().map(|v| -v).collect();
            sym = sym.max((w2_complex_norm(e, &x, &y)? - w2_complex_norm(e, &x, &ny)?).abs());
        }
    }
    ms.push(
        Measurement::deviation("min_level_one_is_banach_norm", lvl1, 1e-12)
            .params(json!({ "samples": 400 })),
    );
    ms.push(
        Measurement::deviation("w2_conjugation_symmetry", sym, 0.0)
            .params(json!({ "samples": 400 })),
    );

    for (label, e) in [
        ("real", BanachSpace::real_line()),
        ("linf2", BanachSpace::ell_inf(2)),
        ("l1_2", BanachSpace::ell_one(2)),
    ] {
        let s = seed_for(seed, 3, 2);
        let dev = min_complexification_check(&e, 3, 30, s)?;
        ms.push(
            Measurement::deviation(&format!("min_complexification_{label}"), dev, 1e-10)
                .params(json!({ "levels": [1, 2, 3], "samples_per_level": 30, "seed": s })),
        );
    }

    // Maps into Min E: the sampled level ratios never beat ||u||, which for
    // u: M_2 -> Min E is the largest nuclear norm of f o u.
    let mut excess = f64::NEG_INFINITY;
    for (i, e) in [BanachSpace::ell_one(2), BanachSpace::ell_inf(3)]
        .iter()
        .enumerate()
    {
        let target = realize_min(e);
        for s in 0..4u64 {
            let mut r = rng::stream(seed_for(seed, 3, 3), &[i as u64, s]);
            let u = rng::gaussian_mat(&mut r, e.dim(), 4);
            let map = CBMap::new(OpSpace::full(2, 2), target.clone(), u.clone())?;
            let norm = e
                .representatives()
                .iter()
                .map(|f| {
                    linalg::nuclear_norm(
                        &Mat::from_vec(2, 2, u.transpose().matvec(f)).expect("2x2"),
                    )
                })
                .fold(0.0, f64::max);
            for n in 1..=3 {
                let ratio = sampled_level_ratio(&map, n, 30, seed_for(seed, 3, 4 + s))?;
                excess = excess.max(ratio - norm);
            }
        }
    }
    ms.push(
        Measurement::at_most("min_minimality_excess", excess, 1e-9)
            .params(json!({ "maps": 8, "levels": [1, 2, 3] })),
    );

    let scalars = [
        Mat::rows_of(&[[0.7]]),
        Mat::rows_of(&[[-1.3]]),
        Mat::rows_of(&[[0.2]]),
    ];
    let b = max_l1_norm_bounds(&scalars, 1, 4, seed_for(seed, 3, 5))?;
    ms.push(Measurement::near(
        "max_level_one_is_l1_norm",
        b.lower,
        2.2,
        "2.2",
        1e-12,
    ));
    ms.push(Measurement::at_most(
        "max_lower_minus_upper",
        b.lower - b.upper,
        1e-12,
    ));

    ms.extend(l12_nonunique(seed)?.into_iter().map(|mut m| {
        m.name = format!("l12_{}", m.name);
        m
    }));
    Ok(ms)
}

fn left_mult(space: &OpSpace, e: Mat) -> Result<CBMap, CliError> {
    Ok(CBMap::from_ambient_fn(space, move |x| e.matmul(x))?)
}

fn mideal_suite(seed: u64) -> Checks {
    let mut ms = Vec::new();
    let m2 = OpSpace::full(2, 2);
    let e = Mat::diag(&[1.0, 0.0]);

    let corner = Projection::new(left_mult(&m2, e.clone())?)?;
    let opts = CertifyOptions {
        seed: seed_for(seed, 4, 1),
        ..Default::default()
    };
    let c = certify_left_m_projection(&corner, &opts)?;
    let p = json!({
        "max_level": opts.max_level, "samples": opts.samples, "restarts": opts.restarts, "seed": opts.seed,
    });
    ms.push(
        Measurement::flag("corner_projection_certified", c.is_certified(), true)
            .params(p.clone())
            .tolerance(opts.tol),
    );
    ms.push(Measurement::equals(
        "corner_projection_levels",
        c.levels_checked,
        3,
    ));

    let sym = Projection::new(CBMap::from_ambient_fn(&m2, |x| {
        x.add(&x.transpose()).scale(0.5)
    })?)?;
    let c = certify_left_m_projection(&sym, &opts)?;
    match &c.verdict {
        Verdict::Refuted {
            check,
            level,
            observed,
            ..
        } => {
            ms.push(Measurement::equals(
                "symmetrization_refuted_check",
                json!(check),
                json!(Check::NuIsometry),
            ));
            ms.push(Measurement::equals(
                "symmetrization_refuted_level",
                *level,
                1,
            ));
            ms.push(
                Measurement::near(
                    "symmetrization_witness_ratio",
                    *observed,
                    0.5f64.sqrt(),
                    "sqrt(0.5)",
                    1e-9,
                )
                .params(p),
            );
            let again = c.reverify(&sym)?.unwrap_or(f64::NAN);
            ms.push(Measurement::deviation(
                "symmetrization_witness_reverified",
                (again - observed).abs(),
                1e-12,
            ));
        }
        _ => ms.push(Measurement::flag("symmetrization_refuted", false, true).params(p)),
    }

    for (label, s) in [("m2", m2.clone()), ("scalars", OpSpace::scalars())] {
        let sh = shuffle_iso(&s, 50, seed_for(seed, 4, 2))?;
        ms.push(Measurement::deviation(
            &format!("shuffle_basis_{label}"),
            sh.basis_deviation,
            1e-12,
        ));
        ms.push(
            Measurement::deviation(&format!("shuffle_norms_{label}"), sh.norm_deviation, 1e-12)
                .params(json!({ "samples": sh.samples })),
        );
        ms.push(Measurement::flag(
            &format!("shuffle_involution_{label}"),
            sh.involution,
            true,
        ));
    }

    let mut dev: f64 = 0.0;
    for s in 0..20u64 {
        let mut r = rng::stream(seed_for(seed, 4, 3), &[s]);
        let u = CBMap::new(m2.clone(), m2.clone(), rng::gaussian_mat(&mut r, 4, 4))?;
        dev = dev.max(projection_complexification_consistency(
            &u,
            8,
            seed_for(seed, 4, 4 + s),
        )?);
    }
    ms.push(
        Measurement::deviation("map_complexification_consistency", dev, 1e-12)
            .params(json!({ "maps": 20, "samples": 8 })),
    );

    let w = verify_multiplier_witness(&m2, corner.map(), &e)?;
    ms.push(Measurement::flag("corner_multiplier_holds", w.holds, true).tolerance(w.tol));
    let sol = solve_multiplier(&m2, corner.map())?;
    ms.push(
        Measurement::flag("corner_multiplier_solved", sol.accepted, true).tolerance(sol.threshold),
    );
    ms.push(Measurement::deviation(
        "corner_multiplier_recovered",
        sol.a.max_abs_diff(&e),
        1e-10,
    ));
    let transpose = CBMap::from_ambient_fn(&m2, Mat::transpose)?;
    ms.push(Measurement::flag(
        "transpose_is_multiplier",
        solve_multiplier(&m2, &transpose)?.accepted,
        false,
    ));

    let alg = OpAlgebra::from_space(m2.clone())?;
    // coefficients over e11, e12, e21, e22
    let rows = is_right_ideal(&alg, &[vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0]])?;
    let cols = is_right_ideal(&alg, &[vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 0.0]])?;
    ms.push(Measurement::flag(
        "first_row_is_right_ideal",
        rows.is_right_ideal,
        true,
    ));
    ms.push(Measurement::flag(
        "first_column_is_right_ideal",
        cols.is_right_ideal,
        false,
    ));
    Ok(ms)
}

fn systems_suite(seed: u64) -> Checks {
    let mut ms = Vec::new();
    let e = |i, j| Mat::unit(2, 2, i, j);
    let m2 = OpAlgebra::from_space(OpSpace::full(2, 2))?;
    let upper = OpAlgebra::from_space(OpSpace::new(2, 2, vec![e(0, 0), e(0, 1), e(1, 1)])?)?;

    for (label, alg) in [("m2", &m2), ("upper_triangular", &upper)] {
        let mut worst: f64 = 0.0;
        let mut tol = 0.0;
        for n in 1..=3 {
            let r = check_brs_level(alg, n, 60, seed_for(seed, 5, n as u64))?;
            worst = worst.max(r.violation);
            tol = r.tol;
        }
        ms.push(
            Measurement::deviation(&format!("brs_{label}"), worst, tol)
                .params(json!({ "levels": [1, 2, 3], "samples": 60 })),
        );
    }
    let half = OpSpace::new(1, 1, vec![Mat::rows_of(&[[0.5]])])?;
    let bad = OpAlgebra::with_structure(half, vec![vec![vec![1.0]]])?;
    let r = check_brs_level(&bad, 1, 10, seed_for(seed, 5, 4))?;
    ms.push(Measurement::flag(
        "brs_scaled_scalar_flagged",
        r.pass,
        false,
    ));
    ms.push(Measurement::at_least(
        "brs_scaled_scalar_violation",
        r.violation,
        0.25 - 1e-12,
    ));

    let diag = CBMap::from_ambient_fn(m2.space(), |x| Mat::diag(&[x[(0, 0)], x[(1, 1)]]))?;
    let ce_seed = seed_for(seed, 5, 5);
    let ce = choi_effros_product(&m2, &diag, 1e-10, 500, ce_seed)?;
    let p = json!({ "samples": 500, "seed": ce_seed });
    ms.push(Measurement::equals(
        "choi_effros_mode",
        json!(ce.preconditions.mode),
        json!("selfadjoint"),
    ));
    for (name, v) in [
        ("associativity", ce.associativity),
        ("c_star_identity", ce.c_star_identity),
        ("left_bimodule", ce.left_bimodule),
        ("right_bimodule", ce.right_bimodule),
        ("bilinearity", ce.bilinearity),
        ("unit", ce.unit),
        ("involution", ce.involution),
    ] {
        ms.push(Measurement::deviation(&format!("choi_effros_{name}"), v, 1e-10).params(p.clone()));
    }

    let z = OpSpace::new(2, 2, vec![e(0, 0), e(0, 1).add(&e(1, 0))])?;
    let tr = is_tro(&z, 1e-10);
    ms.push(Measurement::flag(
        "tro_rejects_symmetric_span",
        tr.is_tro,
        false,
    ));
    let witness_dev = tr
        .witness
        .as_ref()
        .map_or(f64::INFINITY, |w| w.max_abs_diff(&e(1, 1)));
    ms.push(Measurement::deviation(
        "tro_witness_is_e22",
        witness_dev,
        0.0,
    ));
    let t = generated_subtriple(&z, 16)?;
    ms.push(Measurement::equals("subtriple_dimension", t.dim(), 4));
    let tro = TroSpace::new(t)?;
    let (mut lowest, mut members) = (f64::INFINITY, true);
    for s in 0..100u64 {
        let mut r = rng::stream(seed_for(seed, 5, 6), &[s]);
        let y = tro.space().random_elem(1, &mut r);
        let sp = shilov_inner_product(&tro, &y, &y)?;
        members &= sp.member;
        lowest = lowest.min(linalg::min_eigenvalue(&sp.value)?);
    }
    ms.push(
        Measurement::at_least("shilov_min_eigenvalue", lowest, -1e-12)
            .params(json!({ "samples": 100 })),
    );
    ms.push(Measurement::flag("shilov_in_span", members, true));

    let sys = build_paulsen_system(&OpSpace::full(2, 2))?;
    ms.push(Measurement::equals(
        "paulsen_dimension",
        sys.space.dim(),
        10,
    ));
    ms.push(Measurement::deviation(
        "paulsen_transpose_residual",
        sys.transpose_residual,
        0.0,
    ));
    let id =
        paulsen_positivity_transfer(&CBMap::identity(m2.space()), 2, 40, seed_for(seed, 5, 7))?;
    ms.push(Measurement::flag("paulsen_identity_positive", id.pass, true).tolerance(id.tol));
    let two = paulsen_positivity_transfer(
        &CBMap::scaling(&OpSpace::scalars(), 2.0),
        1,
        10,
        seed_for(seed, 5, 8),
    )?;
    ms.push(Measurement::flag(
        "paulsen_expansion_flagged",
        two.pass,
        false,
    ));

    let nil = OpAlgebra::from_space(OpSpace::new(2, 2, vec![e(0, 1)])?)?;
    let u = unitization_complexification_check(&nil, 100, seed_for(seed, 5, 9))?;
    ms.push(Measurement::equals(
        "unitization_dimensions",
        u.dim_unitized_then_complexified,
        u.dim_complexified_then_unitized,
    ));
    ms.push(Measurement::deviation(
        "unitization_complexification_norms",
        u.norm_deviation,
        1e-12,
    ));
    Ok(ms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_names_are_usage_errors() {
        let ctx = Ctx::new(1, None);
        assert!(matches!(reproduce(&ctx, "nope"), Err(CliError::Usage(_))));
        assert!(matches!(
            verify(&ctx, "nope", None),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn linalg_suite_passes() {
        assert!(linalg_suite(5).unwrap().iter().all(|m| m.pass));
    }
}
