//! One handler per subcommand.

use realop_core::linalg::{self, Mat};
use realop_core::mideal::{
    certify_left_m_projection, is_right_ideal, solve_multiplier, verify_multiplier_witness,
    CertifyOptions, Projection, Verdict,
};
use realop_core::opspace::{
    complexification_norm, complexify_space, level_norm, quotient_level_norm, QuotientOptions,
};
use realop_core::quantization::{
    max_l1_norm_bounds, min_level_norm, realize_min, w2_complex_norm, BanachSpace,
};
use realop_core::systems::{
    build_paulsen_system, check_brs_level, choi_effros_product, generated_subtriple, is_tro,
    paulsen_positivity_transfer, shilov_inner_product, unitization_complexification_check, unitize,
    OpAlgebra, TroSpace, CLOSURE_TOL,
};
use realop_core::{rng, MatElem, OpSpace};
use serde_json::{json, Value};

use crate::input::{load, load_map, load_space, load_vector, load_vectors};
use crate::report::{Measurement, Status};
use crate::{suites, CliError, Command, Ctx, Outcome};

type Handled = Result<Outcome, CliError>;

pub(crate) fn dispatch(ctx: &Ctx, cmd: &Command) -> Handled {
    match cmd {
        Command::Norm(a) => norm(ctx, &a.space, &a.elem),
        Command::Complexify(a) => complexify(ctx, &a.space, a.x.as_deref().zip(a.y.as_deref())),
        Command::QuantizeMin(a) => quantize_min(ctx, &a.banach, a.elem.as_deref()),
        Command::W2Norm(a) => w2_norm(&a.banach, &a.x, &a.y),
        Command::MaxL1(a) => max_l1(ctx, &a.coeffs, a.mmax, a.restarts),
        Command::CertifyMproj(a) => {
            let space = load_space(&a.space)?;
            let p = Projection::new(load_map(&a.proj, Some(&space))?)?;
            let opts = CertifyOptions {
                max_level: a.max_level,
                samples: a.samples,
                restarts: a.restarts,
                seed: ctx.seed,
                tol: ctx.tol_or(1e-9),
            };
            certify(&p, &opts)
        }
        Command::MultiplierWitness(a) => multiplier(&a.space, &a.map, a.a.as_deref()),
        Command::RightIdeal(a) => right_ideal(&a.algebra, &a.subspace),
        Command::BrsCheck(a) => brs(ctx, &a.algebra, a.max_level, a.samples),
        Command::Unitize(a) => unitize_cmd(ctx, &a.algebra, a.samples),
        Command::Paulsen(a) => paulsen(ctx, &a.space, a.map.as_deref(), a.levels, a.samples),
        Command::ChoiEffros(a) => choi_effros(ctx, &a.algebra, &a.idempotent, a.samples),
        Command::TroCheck(a) => tro_check(ctx, &a.space),
        Command::Subtriple(a) => subtriple(&a.space, a.max_iters),
        Command::Shilov(a) => shilov(&a.space, &a.y, &a.z),
        Command::QuotientNorm(a) => quotient(ctx, &a.space, &a.subspace, &a.elem, a.max_iters),
        Command::Reproduce(a) => suites::reproduce(ctx, &a.name),
        Command::Verify(a) => {
            suites::verify(ctx, &a.suite, a.space.as_deref().zip(a.proj.as_deref()))
        }
    }
}

fn load_elem(arg: &str) -> Result<MatElem, CliError> {
    load(arg, "matrix element")
}

fn load_algebra(arg: &str) -> Result<OpAlgebra, CliError> {
    load(arg, "operator algebra")
}

fn to_json(v: impl serde::Serialize) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

fn norm(ctx: &Ctx, space: &str, elem: &str) -> Handled {
    let s = load_space(space)?;
    let x = load_elem(elem)?;
    let v = level_norm(&s, &x)?;
    ctx.record("level", x.level());
    Ok(Outcome::new(
        vec![Measurement::info("level_norm", v).params(json!({ "level": x.level() }))],
        Value::Null,
    ))
}

fn complexify(ctx: &Ctx, space: &str, xy: Option<(&str, &str)>) -> Handled {
    let s = load_space(space)?;
    let sc = complexify_space(&s)?;
    let mut ms = vec![Measurement::equals("dimension", sc.dim(), 2 * s.dim())];
    if let Some((x, y)) = xy {
        let (x, y) = (load_elem(x)?, load_elem(y)?);
        let v = complexification_norm(&s, &x, &y)?;
        ctx.record("level", x.level());
        ms.push(Measurement::info("complex_norm", v).params(json!({ "level": x.level() })));
    }
    Ok(Outcome::new(ms, json!({ "space": sc })))
}

fn quantize_min(ctx: &Ctx, banach: &str, elem: Option<&str>) -> Handled {
    let e: BanachSpace = load(banach, "Banach space")?;
    let s = realize_min(&e);
    let mut ms = vec![Measurement::info("dimension", s.dim())];
    if let Some(x) = elem {
        let x = load_elem(x)?;
        let tol = ctx.tol_or(1e-12);
        let direct = min_level_norm(&e, &x)?;
        let realized = level_norm(&s, &x)?;
        ms.push(Measurement::info("min_level_norm", direct).params(json!({ "level": x.level() })));
        ms.push(Measurement::deviation(
            "realization_agreement",
            (direct - realized).abs(),
            tol,
        ));
    }
    Ok(Outcome::new(ms, json!({ "space": s })))
}

fn w2_norm(banach: &str, x: &str, y: &str) -> Handled {
    let e: BanachSpace = load(banach, "Banach space")?;
    let v = w2_complex_norm(&e, &load_vector(x)?, &load_vector(y)?)?;
    Ok(Outcome::new(
        vec![Measurement::info("w2_norm", v)],
        Value::Null,
    ))
}

fn max_l1(ctx: &Ctx, coeffs: &str, mmax: usize, restarts: usize) -> Handled {
    let cs: Vec<Mat> = load(coeffs, "list of coefficient matrices")?;
    let b = max_l1_norm_bounds(&cs, mmax, restarts, ctx.seed)?;
    let params = json!({ "m_max": mmax, "restarts": restarts, "seed": ctx.seed });
    Ok(Outcome::new(
        vec![
            Measurement::info("lower", b.lower).params(params.clone()),
            Measurement::info("upper", b.upper),
            Measurement::info("attained_m", b.attained_m),
            Measurement::at_most("lower_minus_upper", b.lower - b.upper, 1e-12),
        ],
        to_json(&b),
    ))
}

pub(crate) fn certify(p: &Projection, opts: &CertifyOptions) -> Handled {
    let c = certify_left_m_projection(p, opts)?;
    let params = json!({
        "max_level": opts.max_level, "samples": opts.samples, "restarts": opts.restarts, "seed": opts.seed,
    });
    let (status, verdict) = match &c.verdict {
        Verdict::CertifiedAtLevels { .. } => (Status::Pass, "certified"),
        Verdict::Refuted { .. } => (Status::Fail, "refuted"),
        Verdict::Inconclusive { .. } => (Status::Inconclusive, "inconclusive"),
    };
    let mut ms = vec![
        Measurement::equals("verdict", verdict, "certified").params(params),
        Measurement::info("max_deviation", c.max_deviation).tolerance(opts.tol),
    ];
    if let Verdict::Refuted {
        level,
        observed,
        expected,
        ..
    } = &c.verdict
    {
        ms.push(
            Measurement::info("witness_ratio", *observed)
                .params(json!({ "level": level, "expected": expected }))
                .tolerance(opts.tol),
        );
    }
    Ok(Outcome::new(ms, to_json(&c)).with_status(status))
}

fn multiplier(space: &str, map: &str, a: Option<&str>) -> Handled {
    let s = load_space(space)?;
    let u = load_map(map, Some(&s))?;
    match a {
        Some(a) => {
            let a: Mat = load(a, "matrix")?;
            let r = verify_multiplier_witness(&s, &u, &a)?;
            let ms = vec![
                Measurement::flag("holds", r.holds, true),
                Measurement::deviation("residual", r.residual, r.tol),
            ];
            Ok(Outcome::new(ms, Value::Null))
        }
        None => {
            let r = solve_multiplier(&s, &u)?;
            let ms = vec![
                Measurement::flag("accepted", r.accepted, true),
                Measurement::deviation("residual", r.residual, r.threshold),
            ];
            Ok(Outcome::new(ms, json!({ "a": r.a })))
        }
    }
}

fn right_ideal(algebra: &str, subspace: &str) -> Handled {
    let alg = load_algebra(algebra)?;
    let j = load_vectors(subspace)?;
    let r = is_right_ideal(&alg, &j)?;
    Ok(Outcome::new(
        vec![
            Measurement::flag("is_right_ideal", r.is_right_ideal, true),
            Measurement::info("max_residual", r.max_residual),
        ],
        to_json(&r),
    ))
}

fn brs(ctx: &Ctx, algebra: &str, max_level: usize, samples: usize) -> Handled {
    let alg = load_algebra(algebra)?;
    let mut ms = Vec::new();
    let mut witnesses = Vec::new();
    for n in 1..=max_level {
        let seed = rng::derive_seed(ctx.seed, &[n as u64]);
        let r = check_brs_level(&alg, n, samples, seed)?;
        ms.push(
            Measurement::deviation(&format!("violation_level_{n}"), r.violation, r.tol)
                .params(json!({ "level": n, "samples": samples, "seed": seed })),
        );
        if let Some(w) = &r.witness {
            witnesses.push(json!({ "level": n, "x": w.0, "y": w.1 }));
        }
    }
    let details = if witnesses.is_empty() {
        Value::Null
    } else {
        json!({ "witnesses": witnesses })
    };
    Ok(Outcome::new(ms, details))
}

fn unitize_cmd(ctx: &Ctx, algebra: &str, samples: usize) -> Handled {
    let alg = load_algebra(algebra)?;
    let u = unitize(&alg)?;
    let tol = ctx.tol_or(1e-12);
    let c = unitization_complexification_check(&alg, samples, ctx.seed)?;
    Ok(Outcome::new(
        vec![
            Measurement::info("dimension", u.dim()),
            Measurement::equals(
                "complexification_dimensions",
                c.dim_unitized_then_complexified,
                c.dim_complexified_then_unitized,
            ),
            Measurement::deviation("complexification_basis", c.basis_deviation, tol),
            Measurement::deviation("complexification_norms", c.norm_deviation, tol)
                .params(json!({ "samples": samples, "seed": ctx.seed })),
        ],
        json!({ "algebra": to_json(&u) }),
    ))
}

fn paulsen(ctx: &Ctx, space: &str, map: Option<&str>, levels: usize, samples: usize) -> Handled {
    let s = load_space(space)?;
    let sys = build_paulsen_system(&s)?;
    let mut ms = vec![
        Measurement::equals("dimension", sys.space.dim(), 2 * s.dim() + 2),
        Measurement::deviation("transpose_residual", sys.transpose_residual, 0.0),
    ];
    let mut details = json!({ "system": to_json(&sys) });
    if let Some(m) = map {
        let u = load_map(m, Some(&s))?;
        let r = paulsen_positivity_transfer(&u, levels, samples, ctx.seed)?;
        ms.push(
            Measurement::flag("positivity_preserved", r.pass, true)
                .params(json!({ "levels": levels, "samples": samples, "checked": r.checked }))
                .tolerance(r.tol),
        );
        details["positivity"] = to_json(&r);
    }
    Ok(Outcome::new(ms, details))
}

fn choi_effros(ctx: &Ctx, algebra: &str, idempotent: &str, samples: usize) -> Handled {
    let alg = load_algebra(algebra)?;
    let phi = load_map(idempotent, Some(alg.space()))?;
    let tol = ctx.tol_or(1e-10);
    let r = choi_effros_product(&alg, &phi, tol, samples, ctx.seed)?;
    if r.preconditions.mode.is_none() {
        let ms = vec![Measurement::flag("preconditions", false, true)];
        return Ok(Outcome::new(ms, to_json(&r)).with_status(Status::Invalid));
    }
    let p = json!({ "samples": samples, "seed": ctx.seed });
    let ms = vec![
        Measurement::info("mode", r.preconditions.mode.clone()),
        Measurement::deviation("bilinearity", r.bilinearity, tol).params(p.clone()),
        Measurement::deviation("associativity", r.associativity, tol).params(p.clone()),
        Measurement::deviation("unit", r.unit, tol).params(p.clone()),
        Measurement::deviation("involution", r.involution, tol).params(p.clone()),
        Measurement::deviation("c_star_identity", r.c_star_identity, tol).params(p.clone()),
        Measurement::deviation("left_bimodule", r.left_bimodule, tol).params(p.clone()),
        Measurement::deviation("right_bimodule", r.right_bimodule, tol).params(p),
    ];
    Ok(Outcome::new(ms, to_json(&r)))
}

fn tro_check(ctx: &Ctx, space: &str) -> Handled {
    let s = load_space(space)?;
    let r = is_tro(&s, ctx.tol_or(CLOSURE_TOL));
    Ok(Outcome::new(
        vec![
            Measurement::flag("is_tro", r.is_tro, true),
            Measurement::info("max_residual", r.max_residual).tolerance(r.tol),
        ],
        to_json(&r),
    ))
}

fn subtriple(space: &str, max_iters: usize) -> Handled {
    let s = load_space(space)?;
    let t = generated_subtriple(&s, max_iters)?;
    let r = is_tro(&t, CLOSURE_TOL);
    Ok(Outcome::new(
        vec![
            Measurement::info("dimension", t.dim()),
            Measurement::flag("is_tro", r.is_tro, true).tolerance(CLOSURE_TOL),
        ],
        json!({ "space": t }),
    ))
}

fn shilov(space: &str, y: &str, z: &str) -> Handled {
    let t = TroSpace::new(load_space(space)?)?;
    let y = MatElem::scalar(load_vector(y)?);
    let z = MatElem::scalar(load_vector(z)?);
    let p = shilov_inner_product(&t, &y, &z)?;
    let mut ms = vec![Measurement::flag("member", p.member, true).tolerance(CLOSURE_TOL)];
    if y == z {
        let lo = linalg::min_eigenvalue(&p.value)?;
        ms.push(Measurement::at_least("min_eigenvalue", lo, -1e-12));
    }
    Ok(Outcome::new(ms, to_json(&p)))
}

fn quotient(ctx: &Ctx, space: &str, subspace: &str, elem: &str, max_iters: usize) -> Handled {
    let s: OpSpace = load_space(space)?;
    let j = load_vectors(subspace)?;
    let x = load_elem(elem)?;
    let opts = QuotientOptions {
        max_iters,
        tol: ctx.tol_or(QuotientOptions::default().tol),
    };
    let q = quotient_level_norm(&s, &j, &x, &opts)?;
    let ms = vec![
        Measurement::info("quotient_norm", q.value).params(json!({ "level": x.level() })),
        Measurement::info("lower_bound", q.lower_bound),
        Measurement::deviation("gap", q.gap, opts.tol),
    ];
    let out = Outcome::new(ms, to_json(&q));
    Ok(if q.converged {
        out
    } else {
        out.with_status(Status::Inconclusive)
    })
}
