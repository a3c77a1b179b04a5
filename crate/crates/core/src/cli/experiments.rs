//! The built-in experiment registry.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::bundle::{sample_bundle, NormalBundle};
use crate::cli::config::{parse_call, parse_num, ExperimentConfig, Section};
use crate::cli::report::{Check, Report};
use crate::cylinder::{
    derivative_algebra_check, differentiability_test, magnify_set, r_differentiability_test, reparam_check,
    ConvergenceReport, FiberIntervalSet, TestMode, Verdict,
};
use crate::error::{Error, Result};
use crate::families::split::bifurcation_candidate;
use crate::families::{
    comb_instance, local_parallel_candidate, split_instance, subgraph_candidate, support_subgraph, BoundarySegments,
    CombInstance, ConvexBody, FamilySpec, NormalDecomposition, Profile, SplitInstance, SubgraphSpec,
};
use crate::gridgeom::{CombSequence, Rect, SetGeometry, ShapeSpec};
use crate::region::ProbeRegion;
use crate::steiner::{
    measure_derivative_check, polygon_support_measures, steiner_check, DensitySpec, MeasureOptions, Order,
    PolygonMeasures, Sides, SteinerSet, TestFunction,
};
use crate::vec2::Vec2;

type RunFn = fn(&ExperimentConfig, &mut Report) -> Result<()>;

pub struct Experiment {
    pub name: &'static str,
    /// Topic of the result the experiment illustrates.
    pub anchor: &'static str,
    /// Coarser grouping used by `--filter`.
    pub group: &'static str,
    pub summary: &'static str,
    run: RunFn,
}

pub static REGISTRY: [Experiment; 10] = [
    Experiment {
        name: "steiner-square",
        anchor: "local Steiner formula (outer)",
        group: "steiner",
        summary: "outer parallel shell area of a convex polygon against perimeter t + pi t^2",
        run: steiner_square,
    },
    Experiment {
        name: "steiner-twosided",
        anchor: "local Steiner formula (two-sided)",
        group: "steiner",
        summary: "inner and outer shell areas of a convex polygon against the support-measure integral",
        run: steiner_twosided,
    },
    Experiment {
        name: "disk-gaussian-derivative",
        anchor: "measure derivative",
        group: "measures",
        summary: "P(A(eps))/eps for the parallel sets of a disk under a Gaussian density",
        run: disk_gaussian,
    },
    Experiment {
        name: "local-parallel",
        anchor: "local parallel sets",
        group: "local-structure",
        summary: "local parallel family against the reach-capped slab {0 <= t <= min(r, 1)}",
        run: local_parallel,
    },
    Experiment {
        name: "minkowski-convex",
        anchor: "Minkowski parallel sets",
        group: "local-structure",
        summary: "F + eps K against the subgraph of the support function of K",
        run: minkowski_convex,
    },
    Experiment {
        name: "subgraph",
        anchor: "subgraph families",
        group: "local-structure",
        summary: "subgraph family of a height profile against its limit subgraph",
        run: subgraph,
    },
    Experiment {
        name: "comb-counterexample",
        anchor: "comb counterexample",
        group: "counterexamples",
        summary: "comb with accumulating teeth: magnified mass stays near a_k/(a_k+a_k+1), no derivative",
        run: comb_counterexample,
    },
    Experiment {
        name: "comb-rdiff",
        anchor: "r-differentiability",
        group: "r-differentiability",
        summary: "comb parallel sets: not differentiable on the full cylinder, differentiable above reach c",
        run: comb_rdiff,
    },
    Experiment {
        name: "split-bifurcation",
        anchor: "bifurcation at a split boundary",
        group: "bifurcation",
        summary: "two squares drifting apart: collar rates, weight decomposition, predicted derivative",
        run: split_bifurcation,
    },
    Experiment {
        name: "algebra-suite",
        anchor: "derivative algebra",
        group: "algebra",
        summary: "union, intersection, difference and reparameterizations of two subgraph families",
        run: algebra_suite,
    },
];

pub fn find(name: &str) -> Result<&'static Experiment> {
    REGISTRY.iter().find(|e| e.name == name).ok_or_else(|| Error::UnknownExperiment(name.into()))
}

/// Entries whose name, group or anchor contains `filter` (case-insensitive).
pub fn list(filter: Option<&str>) -> Vec<&'static Experiment> {
    let f = filter.map(str::to_lowercase);
    REGISTRY
        .iter()
        .filter(|e| match &f {
            None => true,
            Some(f) => [e.name, e.group, e.anchor].iter().any(|s| s.to_lowercase().contains(f.as_str())),
        })
        .collect()
}

pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    let e = find(&cfg.name)?;
    let mut r = Report::new(e.name, e.anchor);
    r.meta("seed", cfg.seed);
    (e.run)(cfg, &mut r)?;
    Ok(r)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn dyadic(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|k| 2f64.powi(-k)).collect()
}

fn eps_meta(r: &mut Report, eps: &[f64]) {
    let parts: Vec<String> = eps.iter().map(|e| crate::cli::report::fmt_f64(*e)).collect();
    r.meta("eps", parts.join(" "));
}

fn grid_params(sec: &Section, h: f64, margin: f64) -> Result<(f64, f64)> {
    let h = sec.num_or("h", h)?;
    let margin = sec.num_or("margin", margin)?;
    if !(h > 0.0) || !(margin > 0.0) {
        return Err(Error::ConfigParse(format!("[{}] h and margin must be positive", sec.name)));
    }
    Ok((h, margin))
}

fn equilateral() -> Vec<Vec2> {
    vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.5, 3f64.sqrt() / 2.0)]
}

fn parse_shape(sec: &Section, default: &str) -> Result<ShapeSpec> {
    let kind = sec.get("kind").unwrap_or(default);
    Ok(match kind {
        "square" => {
            let min = sec.point("min")?.unwrap_or(Vec2::ZERO);
            let side = sec.num_or("side", 1.0)?;
            ShapeSpec::Rect(Rect::new(min, min + Vec2::new(side, side)))
        }
        "rect" => {
            let min = sec.point("min")?.ok_or_else(|| Error::ConfigParse("[shape] rect needs `min`".into()))?;
            let max = sec.point("max")?.ok_or_else(|| Error::ConfigParse("[shape] rect needs `max`".into()))?;
            ShapeSpec::Rect(Rect::new(min, max))
        }
        "disk" => ShapeSpec::Disk {
            center: sec.point("center")?.unwrap_or(Vec2::ZERO),
            radius: sec.num_or("radius", 1.0)?,
        },
        "triangle" => ShapeSpec::Polygon(sec.points("vertices")?.unwrap_or_else(equilateral)),
        "polygon" => ShapeSpec::Polygon(
            sec.points("vertices")?.ok_or_else(|| Error::ConfigParse("[shape] polygon needs `vertices`".into()))?,
        ),
        other => return Err(Error::ConfigParse(format!("[shape] kind `{other}` is not supported here"))),
    })
}

fn vertices_of(shape: &ShapeSpec) -> Result<Vec<Vec2>> {
    match shape {
        ShapeSpec::Polygon(v) => Ok(v.clone()),
        ShapeSpec::Rect(r) => {
            Ok(vec![r.min, Vec2::new(r.max.x, r.min.y), r.max, Vec2::new(r.min.x, r.max.y)])
        }
        _ => Err(Error::UnsupportedSet("this experiment needs a polygonal shape".into())),
    }
}

fn geometry(shape: &ShapeSpec, h: f64, margin: f64) -> Result<Arc<SetGeometry>> {
    Ok(Arc::new(SetGeometry::from_shape(shape, h, margin)?))
}

fn bundle(g: &Arc<SetGeometry>) -> Result<Arc<NormalBundle>> {
    Ok(Arc::new(sample_bundle(g.clone())?))
}

fn nums(args: &[String]) -> Result<Vec<f64>> {
    args.iter().map(|a| parse_num(a)).collect()
}

/// `square(cx, cy, side)`, `segment(x0, y0, x1, y1)`, `point(x, y)`, `ball`, `polygon(x0, y0, x1, y1, ...)`.
fn parse_body(s: &str) -> Result<ConvexBody> {
    let (name, args) = parse_call(s)?;
    let v = nums(&args)?;
    let arity = |n: usize| {
        if v.len() == n {
            Ok(())
        } else {
            Err(Error::ConfigParse(format!("`{s}`: {name} takes {n} numbers")))
        }
    };
    match name.as_str() {
        "square" => {
            arity(3)?;
            Ok(ConvexBody::square(Vec2::new(v[0], v[1]), v[2]))
        }
        "segment" => {
            arity(4)?;
            Ok(ConvexBody::segment(Vec2::new(v[0], v[1]), Vec2::new(v[2], v[3])))
        }
        "point" => {
            arity(2)?;
            Ok(ConvexBody::point(Vec2::new(v[0], v[1])))
        }
        "ball" => Ok(ConvexBody::unit_ball()),
        "polygon" => {
            if v.len() < 6 || v.len() % 2 != 0 {
                return Err(Error::ConfigParse(format!("`{s}`: polygon takes at least three (x, y) pairs")));
            }
            ConvexBody::polygon(v.chunks(2).map(|p| Vec2::new(p[0], p[1])).collect())
        }
        _ => Err(Error::ConfigParse(format!("unknown convex body `{s}`"))),
    }
}

/// `const(c)`, `affine(c0, cx, cy)`, `support(<body>)`, `reach`.
fn parse_profile(s: &str) -> Result<Profile> {
    let (name, args) = parse_call(s)?;
    match name.as_str() {
        "const" if args.len() == 1 => Ok(Profile::Const(parse_num(&args[0])?)),
        "affine" if args.len() == 3 => {
            let v = nums(&args)?;
            Ok(Profile::Affine { c0: v[0], c: Vec2::new(v[1], v[2]) })
        }
        "support" if args.len() == 1 => Ok(Profile::SupportOf(parse_body(&args[0])?)),
        "reach" if args.is_empty() => Ok(Profile::ReachCapped),
        _ => Err(Error::ConfigParse(format!("unknown profile `{s}`"))),
    }
}

/// `gaussian(sigma)`, `uniform`, `table(x0, y0, h, nx, ny, v...)`.
fn parse_density(s: &str) -> Result<DensitySpec> {
    let (name, args) = parse_call(s)?;
    match name.as_str() {
        "gaussian" if args.len() == 1 => DensitySpec::gaussian(parse_num(&args[0])?),
        "uniform" if args.is_empty() => Ok(DensitySpec::uniform()),
        "table" if args.len() >= 5 => {
            let v = nums(&args)?;
            let count = |x: f64| {
                if x >= 1.0 && x.fract() == 0.0 {
                    Ok(x as usize)
                } else {
                    Err(Error::ConfigParse(format!("`{s}`: table sizes must be positive integers")))
                }
            };
            let (nx, ny) = (count(v[3])?, count(v[4])?);
            DensitySpec::table(Vec2::new(v[0], v[1]), v[2], nx, ny, v[5..].to_vec())
        }
        _ => Err(Error::ConfigParse(format!("unknown density `{s}`"))),
    }
}

fn parse_comb(sec: &Section, h: f64, margin: f64) -> Result<CombInstance> {
    let (h, margin) = grid_params(sec, h, margin)?;
    let teeth = sec.usize_or("teeth", 6)?;
    let ratio = sec.num_or("ratio", 0.5)?;
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::ConfigParse(format!("[{}] ratio must lie in (0, 1)", sec.name)));
    }
    comb_instance(&CombSequence::Geometric { ratio }, teeth, h, margin)
}

fn verdict_check(name: &str, r: &ConvergenceReport, want: Verdict) -> Check {
    Check::new(name, want, r.verdict, r.verdict == want)
}

fn convergence_rows(rep: &mut Report, series: &str, r: &ConvergenceReport) {
    for (e, v) in r.epsilons.iter().zip(&r.values) {
        rep.row(series, *e, *v, None);
    }
}

fn outer_shell(m: &PolygonMeasures, t: f64) -> TestFunction {
    let m = m.clone();
    TestFunction::Indicator(Arc::new(ProbeRegion::new(
        move |z| {
            let d = m.sdf(z);
            (d > 0.0 && d <= t, d.abs().min((d - t).abs()))
        },
        None,
    )))
}

fn two_sided_shell(m: &PolygonMeasures, t: f64) -> TestFunction {
    let m = m.clone();
    TestFunction::Indicator(Arc::new(ProbeRegion::new(
        move |z| {
            let d = m.sdf(z).abs();
            (d > 0.0 && d <= t, d.min((d - t).abs()))
        },
        None,
    )))
}

fn t_values(cfg: &ExperimentConfig, default: &[f64]) -> Result<Vec<f64>> {
    let sched = cfg.raw.section_or_empty("schedule");
    let Some(s) = sched.get("t") else { return Ok(default.to_vec()) };
    let (name, args) = parse_call(s)?;
    if name != "list" {
        return Err(Error::ConfigParse("[schedule] t must be list(...)".into()));
    }
    let v = nums(&args)?;
    if v.is_empty() || v.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::ConfigParse("[schedule] t values must be positive".into()));
    }
    Ok(v)
}

fn steiner_setup(cfg: &ExperimentConfig, r: &mut Report) -> Result<(Vec<Vec2>, PolygonMeasures, f64)> {
    let sec = cfg.raw.section_or_empty("shape");
    let shape = parse_shape(&sec, "square")?;
    let (h, _) = grid_params(&sec, 1.0 / 1024.0, 0.25)?;
    let v = vertices_of(&shape)?;
    let m = polygon_support_measures(&v)?;
    r.meta("shape", sec.get("kind").unwrap_or("square"));
    r.meta("h", h);
    Ok((v, m, h))
}

fn steiner_square(cfg: &ExperimentConfig, r: &mut Report) -> Result<()> {
    let (v, m, h) = steiner_setup(cfg, r)?;
    let tol = cfg.tol.unwrap_or(0.01);
    let perimeter: f64 = (0..v.len()).map(|i| v[i].dist(v[(i + 1) % v.len()])).sum();
    let set = SteinerSet::Polygon { measures: m.clone(), h };
    for t in t_values(cfg, &[0.05, 0.1, 0.2])? {
        let s = steiner_check(&set, &outer_shell(&m, t), t + 0.05, Sides::Outer, Order::Full)?;
        let closed = perimeter * t + PI * t * t;
        r.row("area", t, s.lhs, Some(closed));
        r.row("measure-integral", t, s.rhs, Some(closed));
        let e = rel(s.lhs, closed);
        r.check(Check::new(&format!("rel_err(t={t})"), format!("< {tol}"), format!("{e:.3e}"), e < tol));
        let e = rel(s.rhs, closed);
        r.check(Check::new(&format!("integral(t={t})"), "closed form", format!("rel {e:.1e}"), e < 1e-9));
    }
    Ok(())
}

fn steiner_twosided(cfg: &ExperimentConfig, r: &mut Report) -> Result<()> {
    let (v, m, h) = steiner_setup(cfg, r)?;
    let tol = cfg.tol.unwrap_or(0.02);
    let set = SteinerSet::Polygon { measures: m.clone(), h };
    let sides = v.len() == 4
        && (0..4).all(|i| (v[(i + 1) % 4] - v[i]).dot(v[(i + 2) % 4] - v[(i + 1) % 4]).abs() < 1e-12);
    for t in t_values(cfg, &[0.1])? {
        let s = steiner_check(&set, &two_sided_shell(&m, t), t + 0.05, Sides::TwoSided, Order::Full)?;
        r.row("inner", t, s.lhs_inner, Some(s.rhs_inner));
        r.row("outer", t, s.lhs_outer, Some(s.rhs_outer));
        let e = rel(s.lhs_inner, s.rhs_inner);
        r.check(Check::new(&format!("inner(t={t})"), format!("< {tol}"), format!("{e:.3e}"), e < tol));
        let e = rel(s.lhs_outer, s.rhs_outer);
        r.check(Check::new(&format!("outer(t={t})"), format!("< {tol}"), format!("{e:.3e}"), e < tol));
        if sides {
            // rectangle: inner shell is the area minus the shrunken rectangle
            let (a, b) = (v[0].dist(v[1]), v[1].dist(v[2]));
            let closed = a * b - (a - 2.0 * t).max(0.0) * (b - 2.0 * t).max(0.0);
            r.row("inner-closed", t, s.lhs_inner, Some(closed));
            let e = rel(s.lhs_inner, closed);
            r.check(Check::new(&format!("inner-closed(t={t})"), format!("< {tol}"), format!("{e:.3e}"), e < tol));
        }
    }
    Ok(())
}

fn disk_gaussian(cfg: &ExperimentConfig, r: &mut Report) -> Result<()> {
    let sec = cfg.raw.section_or_empty("shape");
    let shape = parse_shape(&sec, "disk")?;
    let (h, margin) = grid_params(&sec, 1.0 / 1024.0, 0.5)?;
    let dsec = cfg.raw.section_or_empty("density");
    let dtext = dsec.get("kind").unwrap_or("gaussian(1)");
    let ds = parse_density(dtext)?;
    let eps = cfg.eps_or(&dyadic(3, 7));
    let tol = cfg.tol.unwrap_or(0.02);
    r.meta("shape", sec.get("kind").unwrap_or("disk"));
    r.meta("h", h);
    r.meta("margin", margin);
    r.meta("density", dtext);
    eps_meta(r, &eps);

    let g = geometry(&shape, h, margin)?;
    let nb = bundle(&g)?;
    let fam = FamilySpec::parallel_ball(g.clone(), 1.0);
    let slab = FiberIntervalSet::slab(nb.clone(), 0.0, 1.0);
    let rep = measure_derivative_check(&fam, &slab, &ds, &eps, MeasureOptions { rel_tol: tol, ..Default::default() })?;
    // centered disk under a centered Gaussian: annulus mass in closed form
    let (name, args) = parse_call(dtext)?;
    let closed = match (&shape, name.as_str()) {
        (ShapeSpec::Disk { center, radius }, "gaussian") if *center == Vec2::ZERO => {
            let (s2, rad) = (parse_num(&args[0])?.powi(2), *radius);
            let tail = move |q: f64| (-q * q / (2.0 * s2)).exp();
            Some((rad / s2 * tail(rad), move |e: f64| (tail(rad) - tail(rad + e)) / e))
        }
        _ => None,
    };
    for (e, ratio) in rep.epsilons.iter().zip(&rep.ratios) {
        r.row("P(A)/eps", *e, *ratio, closed.as_ref().map(|c| (c.1)(*e)));
    }
    r.row("Q(B)", 0.0, rep.q_b, closed.as_ref().map(|c| c.0));
    let last = *rep.ratios.last().expect("nonempty schedule");
    let e = rep.final_rel_err();
    r.check(Check::new("P(A)/eps vs Q(B)", format!("< {tol}"), format!("{e:.3e}"), e < tol));
    if let Some((limit, _)) = closed {
        let e = rel(last, limit);
        r.check(Check::new("P(A)/eps vs limit", format!("< {tol}"), format!("{e:.3e}"), e < tol));
    }
    Ok(())
}

fn local_parallel(cfg: &ExperimentConfig, r: &mut Report) -> Result<()> {
    let sec = cfg.raw.section_or_empty("shape");
    let eps = cfg.eps_or(&dyadic(3, 7));
    let kind = sec.get("kind").unwrap_or("comb");
    let g = if kind == "comb" {
        parse_comb(&sec, 2f64.powi(-10), 0.25)?.geom
    } else {
        let (h, margin) = grid_params(&sec, 1.0 / 512.0, 0.25)?;
        geometry(&parse_shape(&sec, kind)?, h, margin)?
    };
    r.meta("shape", kind);
    r.meta("h", g.h());
    eps_meta(r, &eps);
    let nb = bundle(&g)?;
    let fam = FamilySpec::local_parallel(g.clone(), nb.clone())?;
    let cand = local_parallel_candidate(&nb);
    let t = differentiability_test(&fam, &nb, &cand, &eps, 1.0, TestMode::Full)?;
    convergence_rows(r, "sym-diff", &t);
    let worst = t.values.iter().copied().fold(0.0, f64::max);
    r.check(Check::new("max sym-diff", format!("< {:.3e}", t.tol_conv), format!("{worst:.3e}"), worst < t.tol_conv));
    r.check(verdict_check("verdict", &t, Verdict::Differentiable));
    Ok(())
}

fn minkowski_convex(cfg: &ExperimentConfig, r: &mut Report) -> Result<()> {
    let sec = cfg.raw.section_or_empty("shape");
    let shape = parse_shape(&sec, "disk")?;
    let (h, margin) = grid_params(&sec, 1.0 / 512.0, 0.5)?;
    let fsec = cfg.raw.require("family")?;
    let text = fsec.require("body")?;
    let k = parse_body(text)?;
    let eps = cfg.eps_or(&dyadic(3, 7));
    let frac = cfg.tol.unwrap_or(0.05);
    r.meta("shape", sec.get("kind").unwrap_or("disk"));
    r.meta("h", h);
    r.meta("margin", margin);
    r.meta("body", text);
    eps_meta(r, &eps);
    let g = geometry(&shape, h, margin)?;
    let nb = bundle(&g)?;
    let fam = FamilySpec::parallel_body(g.clone(), k.clone(), eps[0])?;
    let cand = support_subgraph(&nb, &k);
    let t = differentiability_test(&fam, &nb, &cand, &eps, cand.bound, TestMode::Full)?;
    convergence_rows(r, "sym-diff", &t);
    let decreasing = t.values.windows(2).all(|w| w[1] < w[0]);
    r.check(Check::new("decreasing", true, decreasing, decreasing));
    let bound = frac * nb.total_weight;
    let fin = t.final_value();
    r.check(Check::new("final sym-diff", format!("< {bound:.4}"), format!("{fin:.3e}"), fin < bound));
    Ok(())
}

fn subgraph_spec(fsec: &Section, key: &str, default: &str, t_default: f64) -> Result<SubgraphSpec> {
    let profile = parse_profile(fsec.get(key).unwrap_or(default))?;
    let power = fsec.num_or("power", 1.0)?;
    let declared_t = fsec.num_or("T", t_default)?;
    Ok(SubgraphSpec { profile, power, declared_t })
}

fn subgraph(cfg: &ExperimentConfig, r: &mut Report) -> Result<()> {
    let sec = cfg.raw.section_or_empty("shape");
    let shape = parse_shape(&sec, "square")?;
    let (h, margin) = grid_params(&sec, 1.0 / 512.0, 0.25)?;
    let fsec = cfg.raw.section_or_empty("family");
    let t_max = cfg.t_max.unwrap_or(1.0);
    let spec = subgraph_spec(&fsec, "profile", "affine(0.3, 0.4, 0)", t_max)?;
    let eps = cfg.eps_or(&dyadic(3, 7));
    r.meta("shape", sec.get("kind").unwrap_or("square"));
    r.meta("h", h);
    r.meta("profile", format!("{:?}", spec.profile));
    r.meta("power", spec.power);
    eps_meta(r, &eps);
    let g = geometry(&shape, h, margin)?;
    let nb = bundle(&g)?;
    let fam = FamilySpec::subgraph(g.clone(), nb.clone(), spec.clone(), &eps)?;
    let cand = subgraph_candidate(&nb, &spec);
    let t = differentiability_test(&fam, &nb, &cand, &eps, spec.declared_t, TestMode::Full)?;
    convergence_rows(r, "sym-diff", &t);
    r.row("candidate-mass", 0.0, cand.m_measure(), None);
    r.check(verdict_check("verdict", &t, Verdict::Differentiable));
    Ok(())
}

fn comb_counterexample(cfg: &ExperimentConfig, r: &mut Report) -> Result<()> {
    let sec = cfg.raw.section_or_empty("shape");
    let c = parse_comb(&sec, 2f64.powi(-12), 0.25)?;
    let tol = cfg.tol.unwrap_or(0.05);
    let k0 = sec.usize_or("k_from", 2)?;
    let k1 = sec.usize_or("k_to", 5)?.min(c.comb.teeth.saturating_sub(1));
    if k0 < 1 || k1 < k0 {
        return Err(Error::ConfigParse(format!("[shape] tooth range {k0}..={k1} is empty")));
    }
    r.meta("h", c.geom.h());
    r.meta("teeth", c.comb.teeth);
    r.meta("merged_teeth", c.merged_teeth);
    let nb = bundle(&c.geom)?;
    r.check(Check::new("merged teeth", 0, c.merged_teeth, c.merged_teeth == 0));
    for k in k0..=k1 {
        let (a, b) = (c.comb.a(k), c.comb.a(k + 1));
        let expect = a / (a + b);
        let e = a + b;
        let m = magnify_set(&nb, &*c.family.a_region(e)?, e, 1.0).m_measure();
        r.row("M", k as f64, m, Some(expect));
        let err = rel(m, expect);
        r.check(Check::new(&format!("M(k={k})"), format!("{expect:.4} within {tol}"), format!("{m:.4}"), err < tol));
    }
    let eps: Vec<f64> = (k0..=k1).map(|k| c.comb.b(k)).collect();
    for (name, cand) in
        [("empty", FiberIntervalSet::empty(nb.clone(), 1.0)), ("slab", FiberIntervalSet::slab(nb.clone(), 0.0, 1.0))]
    {
        let t = differentiability_test(&c.family, &nb, &cand, &eps, 1.0, TestMode::Full)?;
        convergence_rows(r, &format!("sym-diff vs {name}"), &t);
        r.check(verdict_check(&format!("vs {name}"), &t, Verdict::NotDifferentiable));
        r.check(Check::new(
            &format!("floor vs {name}"),
            ">= 0.25",
            format!("{:.3}", t.floor_nc),
            t.floor_nc >= 0.25,
        ));
    }
    Ok(())
}

fn comb_rdiff(cfg: &ExperimentConfig, r: &mut Report) -> Result<()> {
    let sec = cfg.raw.section_or_empty("shape");
    let c = parse_comb(&sec, 2f64.powi(-12), 0.25)?;
    let eps = cfg.eps_or(&dyadic(3, 7));
    let cut = cfg.c.unwrap_or_else(|| c.comb.a(4.min(c.comb.teeth)));
    r.meta("h", c.geom.h());
    r.meta("teeth", c.comb.teeth);
    r.meta("c", cut);
    eps_meta(r, &eps);
    let nb = bundle(&c.geom)?;
    let fam = FamilySpec::parallel_ball(c.geom.clone(), 1.0);
    let slab = FiberIntervalSet::slab(nb.clone(), 0.0, 1.0);
    let (full, res, v) = r_differentiability_test(&fam, &nb, &slab, &eps, 1.0, cut)?;
    convergence_rows(r, "full", &full);
    convergence_rows(r, "restricted", &res);
    let mut fc = Check::new(
        "full cylinder",
        "not-differentiable or inconclusive",
        full.verdict,
        matches!(full.verdict, Verdict::NotDifferentiable | Verdict::Inconclusive),
    );
    fc.inconclusive = full.verdict == Verdict::Inconclusive;
    r.check(fc);
    r.check(verdict_check("restricted", &res, Verdict::Differentiable));
    let fin = res.final_value();
    r.check(Check::new("restricted final", format!("< {:.3e}", res.tol_conv), format!("{fin:.3e}"), fin < res.tol_conv));
    r.check(Check::new("combined", Verdict::RDifferentiableOnly, v, v == Verdict::RDifferentiableOnly));
    let mut finite = true;
    for &e in &eps {
        let m = magnify_set(&nb, &*fam.a_region(e)?, e, 1.0).m_measure();
        finite &= m.is_finite();
        r.row("M(B)", e, m, None);
    }
    r.check(Check::new("M(B(eps)) finite", true, finite, finite));

    // M(Σ₁ \ B(ε)) as the tooth count grows
    let psec = cfg.raw.section_or_empty("proxy");
    let pe = psec.num_or("eps", 2f64.powi(-6))?;
    let (hp, _) = grid_params(&psec, c.geom.h(), 0.25)?;
    let k0 = psec.usize_or("teeth_from", 4)?;
    let k1 = psec.usize_or("teeth_to", 8)?;
    let ratio = sec.num_or("ratio", 0.5)?;
    let mut prev = f64::NEG_INFINITY;
    let mut grows = k1 > k0;
    for k in k0..=k1 {
        let ck = comb_instance(&CombSequence::Geometric { ratio }, k, hp, 0.25)?;
        grows &= ck.merged_teeth == 0;
        let nbk = bundle(&ck.geom)?;
        let famk = FamilySpec::parallel_ball(ck.geom.clone(), 1.0);
        let img = magnify_set(&nbk, &*famk.a_region(pe)?, pe, 1.0);
        let rest = FiberIntervalSet::slab(nbk.clone(), 0.0, 1.0).difference(&img)?.m_measure();
        grows &= rest > prev;
        prev = rest;
        r.row("proxy", k as f64, rest, None);
    }
    r.check(Check::new("proxy grows with K", true, grows, grows));
    Ok(())
}

fn split_bifurcation(cfg: &ExperimentConfig, r: &mut Report) -> Result<()> {
    let sec = cfg.raw.section_or_empty("shape");
    let (h, margin) = grid_params(&sec, 2f64.powi(-9), 0.25)?;
    let shift = sec.point("shift")?.unwrap_or(Vec2::new(-1.0, 0.0));
    let tol = cfg.tol.unwrap_or(0.02);
    let eps = cfg.eps_or(&dyadic(3, 7));
    r.meta("h", h);
    r.meta("shift", format!("({}, {})", shift.x, shift.y));
    eps_meta(r, &eps);
    let s = split_instance(shift, h, margin)?;
    let seq: Vec<f64> = eps.iter().map(|&e| s.decomposition.triple_collar(e)).collect();
    for (e, v) in eps.iter().zip(&seq) {
        r.row("collar", *e, *v, None);
    }
    let halving = seq[0] > 0.0 && seq.windows(2).all(|w| w[0] >= 2.0 * w[1]);
    r.check(Check::new("collar halves per step", true, halving, halving));
    let dec = s.decomposition.check(&eps);
    r.check(Check::new("normal decomposition", "holds", if dec.is_ok() { "holds" } else { "fails" }, dec.is_ok()));

    let [nb_c, nb_f, nb_1, nb_2] = s.bundles()?;
    let w = SplitInstance::weights(&nb_c, &nb_f, &nb_1, &nb_2);
    r.row("weight C", 0.0, w.c_total, Some(w.f_outer + w.f1_inner + w.f2_inner));
    let e = w.rel_err();
    r.check(Check::new("weight decomposition", format!("< {tol}"), format!("{e:.3e}"), e < tol));

    let [b1, b2] = s.piece_derivatives(&nb_1, &nb_2);
    let cand = bifurcation_candidate(&nb_c, [&b1, &b2], 1.0);
    let t = differentiability_test(&s.family, &nb_c, &cand, &eps, 1.0, TestMode::Full)?;
    convergence_rows(r, "sym-diff", &t);
    r.check(verdict_check("predicted derivative", &t, Verdict::Differentiable));

    let ctl = cfg.raw.section_or_empty("control");
    if ctl.get("enabled") != Some("false") {
        let comb = parse_comb(&ctl, 2f64.powi(-10), 0.25)?;
        let (f, f1, f2) = comb.boundaries();
        let mut sym = f1.clone();
        sym.extend(&f2);
        let common = BoundarySegments::new(vec![(Vec2::new(0.0, 0.0), Vec2::new(0.0, comb.f2.max.y))]);
        let nd = NormalDecomposition { f, f1, f2, sym, common };
        let fails = matches!(nd.check(&eps), Err(Error::NormalDecompositionFails(_)));
        r.check(Check::new("comb control", "fails", if fails { "fails" } else { "holds" }, fails));
    }
    Ok(())
}

fn algebra_suite(cfg: &ExperimentConfig, r: &mut Report) -> Result<()> {
    let sec = cfg.raw.section_or_empty("shape");
    let shape = parse_shape(&sec, "square")?;
    let (h, margin) = grid_params(&sec, 1.0 / 512.0, 0.25)?;
    let fsec = cfg.raw.section_or_empty("family");
    let t_max = cfg.t_max.unwrap_or(1.0);
    let spec1 = subgraph_spec(&fsec, "first", "affine(0.3, 0.4, 0)", t_max)?;
    let spec2 = subgraph_spec(&fsec, "second", "affine(0.7, 0, -0.4)", t_max)?;
    let eps = cfg.eps_or(&dyadic(3, 7));
    let tol = cfg.tol.unwrap_or(0.03);
    r.meta("shape", sec.get("kind").unwrap_or("square"));
    r.meta("h", h);
    eps_meta(r, &eps);
    let g = geometry(&shape, h, margin)?;
    let nb = bundle(&g)?;
    let f1 = FamilySpec::subgraph(g.clone(), nb.clone(), spec1.clone(), &eps)?;
    let f2 = FamilySpec::subgraph(g.clone(), nb.clone(), spec2.clone(), &eps)?;
    let b1 = subgraph_candidate(&nb, &spec1);
    let b2 = subgraph_candidate(&nb, &spec2);
    let alg = derivative_algebra_check(&f1, &b1, &f2, &b2, &eps, t_max)?;
    for (name, t) in [("union", &alg.union), ("intersection", &alg.intersection), ("difference", &alg.difference)] {
        convergence_rows(r, name, t);
        r.check(verdict_check(name, t, Verdict::Differentiable));
    }

    let (twice, cand) = reparam_check(&f1, &b1, 2.0, 1.0, &eps, t_max)?;
    convergence_rows(r, "f=2eps", &twice);
    r.check(verdict_check("f = 2 eps", &twice, Verdict::Differentiable));
    let e = *eps.last().expect("nonempty schedule");
    let base = magnify_set(&nb, &*f1.a_region(e)?, e, 2.0 * t_max).m_measure();
    let doubled = magnify_set(&nb, &*f1.a_region(2.0 * e)?, e, 2.0 * t_max).m_measure();
    let ratio = doubled / base;
    r.row("mass ratio", e, ratio, Some(2.0));
    r.check(Check::new("mass ratio", format!("2 within {tol}"), format!("{ratio:.4}"), (ratio - 2.0).abs() < 2.0 * tol));
    let scaled = rel(cand.m_measure(), 2.0 * b1.m_measure()) < 1e-12;
    r.check(Check::new("candidate doubles", true, scaled, scaled));

    let (square, cand) = reparam_check(&f1, &b1, 1.0, 2.0, &eps, t_max)?;
    convergence_rows(r, "f=eps^2", &square);
    r.check(verdict_check("f = eps^2", &square, Verdict::Differentiable));
    let empty = cand.m_measure() == 0.0;
    r.check(Check::new("eps^2 candidate empty", true, empty, empty));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_and_filter() {
        assert_eq!(list(None).len(), 10);
        assert_eq!(list(Some("local-structure")).len(), 3);
        assert!(list(Some("no-such-topic")).is_empty());
        assert!(matches!(find("nope"), Err(Error::UnknownExperiment(_))));
    }

    #[test]
    fn body_and_profile_grammar() {
        assert!(matches!(parse_body("polygon(0,0, 1,0, 0.2,0.2, 0,1)"), Err(Error::NonConvex)));
        assert_eq!(parse_body("segment(-0.5, 0, 0.5, 0)").unwrap().diameter(), 1.0);
        assert!(matches!(parse_profile("support(square(0, 0, 1))").unwrap(), Profile::SupportOf(_)));
        assert!(parse_profile("const()").is_err());
        assert!(parse_density("gaussian(0)").is_err());
        assert!(parse_density("table(0, 0, 1, 1, 1, 2)").is_ok());
    }
}
