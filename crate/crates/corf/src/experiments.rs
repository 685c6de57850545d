//! Reports and tables behind the subcommands.

use std::f64::consts::FRAC_PI_4;

use corf_core::growth::{
    certificate_curve, cover_transfer_check, cover_transfer_free_rank2, cyclically_reduced, divisibility_bruteforce,
    format_free_word, growth_curve, reduced_words, svarc_milnor_probe, trace_table, DValue, GrowthSample, NormKind,
};
use corf_core::lorentz::to_ball;
use corf_core::polyhedron::Polyhedron;
use corf_core::separator::SeparatorConfig;
use corf_core::spherical::{codim_threshold, max_threshold, tetrahedron_center_angle};
use corf_core::tiling::tiles_in_ball;
use corf_core::tubes::{mc_tube_volume, tube_volume, TubeSpec};
use serde_json::{json, Value};

use crate::formats::Table;
use crate::CliError;

/// Closed forms of the inradius and threshold for a codimension.
fn closed_forms(codim: usize) -> Option<(f64, f64)> {
    let (s2, s3) = (2f64.sqrt(), 3f64.sqrt());
    match codim {
        2 => Some((FRAC_PI_4, (1.0 + s2).ln())),
        3 => Some(((s2 / s3).acos(), (s2 + s3).ln())),
        4 => Some(((s3 / 2.0).acos(), (2.0 + s3).ln())),
        _ => None,
    }
}

/// Every threshold case in dimensions 2 to 4 against its closed form.
/// Returns the report and the largest deviation.
pub fn thresholds() -> Result<(Value, f64), CliError> {
    let mut worst = 0.0f64;
    let mut note = |x: f64, y: f64| {
        let d = (x - y).abs();
        worst = worst.max(d);
        d
    };
    let mut cases = Vec::new();
    for dim in 2..=4 {
        for codim in 1..=dim {
            let c = codim_threshold(dim, codim)?;
            match (c.inscribed_radius, closed_forms(codim)) {
                (Some(r), Some((r0, t0))) => cases.push(json!({
                    "dim": dim,
                    "codim": codim,
                    "inscribed_radius": r,
                    "inscribed_radius_closed_form": r0,
                    "inscribed_radius_deviation": note(r, r0),
                    "threshold": c.threshold,
                    "threshold_closed_form": t0,
                    "threshold_deviation": note(c.threshold, t0),
                })),
                _ => cases.push(json!({
                    "dim": dim,
                    "codim": codim,
                    "inscribed_radius": null,
                    "threshold": c.threshold,
                    "note": "a closest face of codimension one separates by itself, so any positive radius works",
                })),
            }
        }
    }
    let mut maxima = Vec::new();
    for (dim, sinh_form) in [(2usize, 1.0f64), (3, 2f64.sqrt()), (4, 3f64.sqrt())] {
        let r = max_threshold(dim)?;
        let r0 = closed_forms(dim).map_or(0.0, |c| c.1);
        maxima.push(json!({
            "dim": dim,
            "threshold": r,
            "closed_form": r0,
            "deviation": note(r, r0),
            "sinh": r.sinh(),
            "sinh_closed_form": sinh_form,
            "sinh_deviation": note(r.sinh(), sinh_form),
        }));
    }
    let a = tetrahedron_center_angle();
    let a0 = (1.0 / 3f64.sqrt()).acos();
    let angle = json!({ "value": a, "closed_form": a0, "deviation": note(a, a0) });
    Ok((
        json!({
            "cases": cases,
            "max_thresholds": maxima,
            "tetrahedron_center_angle": angle,
            "max_deviation": worst,
        }),
        worst,
    ))
}

pub fn volumes(dim: usize, b: f64, ell: f64, samples: usize, seed: u64) -> Result<Value, CliError> {
    let spec = TubeSpec::new(dim, b, ell)?;
    let exact = tube_volume(&spec);
    let e = mc_tube_volume(&spec, samples, seed);
    Ok(json!({
        "dim": dim,
        "b": b,
        "ell": ell,
        "closed_form": exact,
        "estimate": e.value,
        "std_error": e.std_error,
        "samples": e.samples,
        "z_score": e.z_score(exact),
        "relative_error": (e.value - exact).abs() / exact,
    }))
}

const BASE: [&str; 6] = ["n", "word_length", "cyc_length", "geodesic_length", "D_or_bound", "source"];

fn d_text(d: DValue) -> String {
    match d {
        DValue::Exact(v) => v.to_string(),
        DValue::UpperBound(v) => format!("<={v}"),
    }
}

fn base_row(n: u64, s: &GrowthSample) -> Vec<String> {
    vec![
        n.to_string(),
        s.word_length.to_string(),
        s.cyc_reduced_length.to_string(),
        s.geodesic_length.to_string(),
        d_text(s.d),
        s.source.as_str().to_string(),
    ]
}

fn with_extra(extra: &[&str]) -> Table {
    let mut h: Vec<&str> = BASE.to_vec();
    h.extend_from_slice(extra);
    Table::new(&h)
}

/// Traces and geodesic lengths of `a b^n`.
pub fn example62(n_max: u64) -> Result<Table, CliError> {
    let mut t = with_extra(&["trace", "ratio"]);
    for r in trace_table(n_max)? {
        t.push(vec![
            r.n.to_string(),
            r.word_length.to_string(),
            r.word_length.to_string(),
            r.geodesic_length.to_string(),
            String::new(),
            "formula".into(),
            r.trace.to_string(),
            r.ratio.to_string(),
        ]);
    }
    Ok(t)
}

/// Exhaustive divisibility of every reduced word of the free group of rank
/// 2 up to `max_len`. Words outside every subgroup of index at most
/// `max_index` are marked `>max_index`.
pub fn bruteforce(max_len: usize, max_index: usize) -> Result<Table, CliError> {
    let mut t = with_extra(&["word"]);
    t.comment(format!("max_index={max_index}"));
    for len in 1..=max_len {
        for w in reduced_words(2, len) {
            let d = divisibility_bruteforce(2, &w, max_index)?;
            t.push(vec![
                len.to_string(),
                len.to_string(),
                cyclically_reduced(&w).len().to_string(),
                String::new(),
                d.map_or_else(|| format!(">{max_index}"), |v| v.to_string()),
                "bruteforce".into(),
                format_free_word(&w),
            ]);
        }
    }
    Ok(t)
}

/// Word-norm growth of the free group of rank 2 against twice that of its
/// index-2 subgroup. Returns the table and whether the inequality holds.
pub fn cover_transfer(n_max: usize, max_index: usize) -> Result<(Table, bool), CliError> {
    let (big, small) = cover_transfer_free_rank2(n_max, max_index)?;
    let m = growth_curve(&big, NormKind::Word)?;
    let k = growth_curve(&small, NormKind::Word)?;
    let rep = cover_transfer_check(2, &m, &k);
    let mut t = Table::new(&["n", "curve_m", "curve_k", "factor_times_curve_k", "holds"]);
    t.comment(format!("factor={}", rep.factor));
    for &(n, a, b) in &rep.rows {
        t.push(vec![
            n.to_string(),
            a.to_string(),
            (b / rep.factor).to_string(),
            b.to_string(),
            (a <= b).to_string(),
        ]);
    }
    let bad: Vec<String> = rep.rows.iter().filter(|r| r.1 > r.2).map(|r| r.0.to_string()).collect();
    t.comment(if rep.holds {
        "inequality holds at all n".to_string()
    } else {
        format!("inequality fails at n = {}", bad.join(", "))
    });
    Ok((t, rep.holds))
}

pub fn svarc_milnor(p: &Polyhedron, n_words: usize, max_len: usize, seed: u64) -> Result<Table, CliError> {
    let r = svarc_milnor_probe(p, n_words, max_len, seed)?;
    let mut t = Table::new(&["n", "word_length", "displacement", "translation_length"]);
    t.comment(format!("upper={}", r.upper));
    t.comment(format!("lower={}", r.lower));
    t.comment(format!("max_generator_displacement={}", r.max_generator_displacement));
    t.comment(format!("translation_below_displacement={}", r.translation_below_displacement));
    for (i, s) in r.samples.iter().enumerate() {
        t.push(vec![
            (i + 1).to_string(),
            s.word_length.to_string(),
            s.displacement.to_string(),
            s.translation_length.to_string(),
        ]);
    }
    Ok(t)
}

/// Certificate indices of `alpha^n` with the bound line at each length.
pub fn certificate_curve_table(
    p: &Polyhedron,
    alpha_word: &[usize],
    n_max: usize,
    cfg: &SeparatorConfig,
) -> Result<Table, CliError> {
    let mut t = with_extra(&["bound_line", "word"]);
    for (i, (s, line)) in certificate_curve(p, alpha_word, n_max, cfg)?.into_iter().enumerate() {
        let mut row = base_row(i as u64 + 1, &s);
        row.push(line.to_string());
        row.push(s.word.clone());
        t.push(row);
    }
    Ok(t)
}

/// Tiles meeting the ball of radius `radius` about the reference point,
/// with Poincaré ball coordinates.
pub fn tiling_export(p: &Polyhedron, radius: f64, frontier_bound: usize) -> Result<Value, CliError> {
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(CliError::Input(format!("radius must be finite and nonnegative, got {radius}")));
    }
    let tiles = tiles_in_ball(p, p.reference(), radius, frontier_bound)?;
    let list: Vec<Value> = tiles
        .iter()
        .map(|t| {
            json!({
                "word": t.word,
                "base_point": to_ball(&t.base_point),
                "vertices": t.vertices.iter().map(to_ball).collect::<Vec<_>>(),
            })
        })
        .collect();
    Ok(json!({
        "polyhedron": p.name(),
        "dim": p.dim(),
        "radius": radius,
        "model": "ball",
        "count": list.len(),
        "tiles": list,
    }))
}
