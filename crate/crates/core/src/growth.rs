//! Divisibility functions and residual finiteness growth experiments.
//!
//! Free-group words are sequences of nonzero letters: `g + 1` is generator
//! `g`, `-(g + 1)` its inverse. In text, `a b c ...` name generators and the
//! upper-case letters their inverses.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::math::{acosh, ceil, ln};
use crate::polyhedron::{word_to_isometry, Polyhedron};
use crate::separator::{build_certificate, AxisChart, SeparatorConfig};
use crate::tiling::reduce_racg;
use crate::tubes::{index_bound, BoundInputs};

/// Largest index the exhaustive search accepts.
pub const MAX_BRUTEFORCE_INDEX: usize = 8;

pub fn parse_free_word(s: &str) -> Result<Vec<i32>> {
    s.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            'a'..='z' => Ok(c as i32 - 'a' as i32 + 1),
            'A'..='Z' => Ok(-(c as i32 - 'A' as i32 + 1)),
            _ => Err(Error::InvalidWord(format!("unexpected character {c:?}"))),
        })
        .collect()
}

pub fn format_free_word(w: &[i32]) -> String {
    if w.is_empty() {
        return "1".into();
    }
    w.iter()
        .map(|&l| {
            let base = if l > 0 { b'a' } else { b'A' };
            (base + (l.unsigned_abs() - 1) as u8) as char
        })
        .collect()
}

pub fn free_reduce(w: &[i32]) -> Vec<i32> {
    let mut out: Vec<i32> = Vec::with_capacity(w.len());
    for &l in w {
        if out.last() == Some(&-l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

pub fn is_freely_reduced(w: &[i32]) -> bool {
    w.windows(2).all(|p| p[0] != -p[1]) && !w.contains(&0)
}

pub fn free_inverse(w: &[i32]) -> Vec<i32> {
    w.iter().rev().map(|l| -l).collect()
}

/// Reduced and cyclically reduced (shortest conjugate) length.
pub fn cyclically_reduced(w: &[i32]) -> Vec<i32> {
    let mut r = free_reduce(w);
    while r.len() >= 2 && r[0] == -r[r.len() - 1] {
        r.remove(0);
        r.pop();
    }
    r
}

/// All freely reduced words of length exactly `len` on `generators` letters,
/// in shortlex order.
pub fn reduced_words(generators: usize, len: usize) -> Vec<Vec<i32>> {
    let letters: Vec<i32> = (1..=generators as i32).flat_map(|g| [g, -g]).collect();
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::with_capacity(out.len() * letters.len());
        for w in &out {
            for &l in &letters {
                if w.last() != Some(&-l) {
                    let mut v = w.clone();
                    v.push(l);
                    next.push(v);
                }
            }
        }
        out = next;
    }
    out
}

/// Partial permutation action on `n` points being built during the search.
struct Partial {
    fwd: Vec<Vec<Option<usize>>>,
    back: Vec<Vec<Option<usize>>>,
}

impl Partial {
    fn new(generators: usize, n: usize) -> Self {
        Self {
            fwd: vec![vec![None; n]; generators],
            back: vec![vec![None; n]; generators],
        }
    }

    fn image(&self, p: usize, l: i32) -> Option<usize> {
        let g = (l.unsigned_abs() - 1) as usize;
        if l > 0 {
            self.fwd[g][p]
        } else {
            self.back[g][p]
        }
    }

    /// Whether `p -> q` under letter `l` can be added.
    fn free(&self, p: usize, q: usize, l: i32) -> bool {
        let g = (l.unsigned_abs() - 1) as usize;
        let (f, b) = if l > 0 { (&self.fwd[g], &self.back[g]) } else { (&self.back[g], &self.fwd[g]) };
        f[p].is_none() && b[q].is_none()
    }

    fn set(&mut self, p: usize, q: usize, l: i32, v: bool) {
        let g = (l.unsigned_abs() - 1) as usize;
        let (f, b) = if l > 0 { (&mut self.fwd[g], &mut self.back[g]) } else { (&mut self.back[g], &mut self.fwd[g]) };
        f[p] = v.then_some(q);
        b[q] = v.then_some(p);
    }
}

/// Is there an action on at most `n` points in which `w` moves point 0?
/// Partial injective maps always extend to permutations, so it suffices to
/// trace `w` from 0, defining images as needed; fresh points are numbered in
/// order of first use.
fn moves_within(generators: usize, w: &[i32], n: usize) -> bool {
    fn go(act: &mut Partial, w: &[i32], at: usize, used: usize, n: usize) -> bool {
        let Some((&l, rest)) = w.split_first() else {
            return at != 0;
        };
        if let Some(q) = act.image(at, l) {
            return go(act, rest, q, used, n);
        }
        let limit = if used < n { used + 1 } else { used };
        for q in 0..limit {
            if !act.free(at, q, l) {
                continue;
            }
            act.set(at, q, l, true);
            let ok = go(act, rest, q, used.max(q + 1), n);
            act.set(at, q, l, false);
            if ok {
                return true;
            }
        }
        false
    }
    let mut act = Partial::new(generators, n);
    go(&mut act, w, 0, 1, n)
}

fn check_word(generators: usize, w: &[i32]) -> Result<()> {
    if w.is_empty() {
        return Err(Error::InvalidWord("the trivial element has no divisibility".into()));
    }
    if !is_freely_reduced(w) {
        return Err(Error::InvalidWord(format!("{} is not freely reduced", format_free_word(w))));
    }
    if let Some(l) = w.iter().find(|l| l.unsigned_abs() as usize > generators) {
        return Err(Error::InvalidWord(format!("letter {l} outside {generators} generators")));
    }
    Ok(())
}

/// Least index of a subgroup of the free group on `generators` letters that
/// misses `w`, searched up to `max_index`.
pub fn divisibility_bruteforce(generators: usize, w: &[i32], max_index: usize) -> Result<Option<usize>> {
    check_word(generators, w)?;
    if max_index > MAX_BRUTEFORCE_INDEX {
        return Err(Error::OutOfRange(format!(
            "max_index {max_index} exceeds {MAX_BRUTEFORCE_INDEX}"
        )));
    }
    Ok((2..=max_index).find(|&n| moves_within(generators, w, n)))
}

/// Least `m >= 2` not dividing `power`: the order of the smallest cyclic
/// quotient separating `a^power`.
pub fn divisibility_upper_cyclic(power: u64) -> Result<u64> {
    if power == 0 {
        return Err(Error::InvalidWord("a^0 is trivial".into()));
    }
    Ok((2..).find(|&m| !power.is_multiple_of(m)).unwrap())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum DValue {
    Exact(u64),
    UpperBound(u64),
}

impl DValue {
    pub fn value(self) -> u64 {
        match self {
            DValue::Exact(v) | DValue::UpperBound(v) => v,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, DValue::Exact(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    Bruteforce,
    Certificate,
    Formula,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Bruteforce => "bruteforce",
            Source::Certificate => "certificate",
            Source::Formula => "formula",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthSample {
    pub word: String,
    pub word_length: usize,
    pub cyc_reduced_length: usize,
    pub geodesic_length: f64,
    pub d: DValue,
    pub source: Source,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    Word,
    Geodesic,
}

/// Running maximum of `D` over balls `{norm <= n}` at integer `n`, starting
/// at the smallest `n` whose ball is nonempty.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthCurve {
    pub norm: NormKind,
    pub points: Vec<(u64, u64)>,
    pub upper_bound: bool,
}

impl GrowthCurve {
    pub fn at(&self, n: u64) -> Option<u64> {
        self.points.iter().find(|p| p.0 == n).map(|p| p.1)
    }
}

pub fn growth_curve(samples: &[GrowthSample], norm: NormKind) -> Result<GrowthCurve> {
    if samples.is_empty() {
        return Err(Error::OutOfRange("no samples".into()));
    }
    let exact = samples[0].d.is_exact();
    if samples.iter().any(|s| s.d.is_exact() != exact) {
        return Err(Error::OutOfRange("mixed exact values and upper bounds".into()));
    }
    let key = |s: &GrowthSample| match norm {
        NormKind::Word => s.word_length as u64,
        NormKind::Geodesic => ceil(s.geodesic_length - 1e-12).max(0.0) as u64,
    };
    let mut by: BTreeMap<u64, u64> = BTreeMap::new();
    for s in samples {
        let e = by.entry(key(s)).or_insert(0);
        *e = (*e).max(s.d.value());
    }
    let lo = *by.keys().next().unwrap();
    let hi = *by.keys().next_back().unwrap();
    let mut points = Vec::new();
    let mut run = 0;
    for n in lo..=hi {
        if let Some(&v) = by.get(&n) {
            run = run.max(v);
        }
        points.push((n, run));
    }
    Ok(GrowthCurve {
        norm,
        points,
        upper_bound: !exact,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoverTransferReport {
    pub factor: u64,
    /// `(n, curve_m(n), factor * curve_k(n))` at every shared `n`.
    pub rows: Vec<(u64, u64, u64)>,
    pub holds: bool,
}

pub fn cover_transfer_check(factor: u64, curve_m: &GrowthCurve, curve_k: &GrowthCurve) -> CoverTransferReport {
    let rows: Vec<(u64, u64, u64)> = curve_m
        .points
        .iter()
        .filter_map(|&(n, v)| curve_k.at(n).map(|w| (n, v, factor * w)))
        .collect();
    let holds = !rows.is_empty() && rows.iter().all(|r| r.1 <= r.2);
    CoverTransferReport { factor, rows, holds }
}

/// Rewrites `w` in the free basis `x = b, y = a b a^-1, z = a^2` of the
/// index-2 subgroup of `F(a, b)` where the exponent sum of `a` is even.
/// Returns `None` for elements outside the subgroup.
pub fn rewrite_in_even_a_subgroup(w: &[i32]) -> Option<Vec<i32>> {
    const X: i32 = 1;
    const Y: i32 = 2;
    const Z: i32 = 3;
    let mut coset = 0;
    let mut out = Vec::with_capacity(w.len());
    for &l in w {
        match (coset, l) {
            (0, 1) => coset = 1,
            (1, 1) => {
                out.push(Z);
                coset = 0;
            }
            (0, -1) => {
                out.push(-Z);
                coset = 1;
            }
            (1, -1) => coset = 0,
            (0, 2) => out.push(X),
            (0, -2) => out.push(-X),
            (1, 2) => out.push(Y),
            (1, -2) => out.push(-Y),
            _ => return None,
        }
    }
    (coset == 0).then(|| free_reduce(&out))
}

/// Inverse of [`rewrite_in_even_a_subgroup`]: the subgroup word in `a, b`.
pub fn expand_even_a_word(w: &[i32]) -> Vec<i32> {
    let mut out = Vec::new();
    for &l in w {
        let piece: &[i32] = match l.abs() {
            1 => &[2],
            2 => &[1, 2, -1],
            _ => &[1, 1],
        };
        if l > 0 {
            out.extend_from_slice(piece);
        } else {
            out.extend(free_inverse(piece));
        }
    }
    free_reduce(&out)
}

/// Word-norm curves of the free group of rank 2 and of its even-`a`
/// subgroup, over all nontrivial words of length at most `n_max`. Elements
/// outside the subgroup count as 1 for the subgroup.
pub fn cover_transfer_free_rank2(n_max: usize, max_index: usize) -> Result<(Vec<GrowthSample>, Vec<GrowthSample>)> {
    let mut big = Vec::new();
    let mut small = Vec::new();
    for len in 1..=n_max {
        for w in reduced_words(2, len) {
            let sample = |d: u64| GrowthSample {
                word: format_free_word(&w),
                word_length: len,
                cyc_reduced_length: cyclically_reduced(&w).len(),
                geodesic_length: len as f64,
                d: DValue::Exact(d),
                source: Source::Bruteforce,
            };
            let dm = divisibility_bruteforce(2, &w, max_index)?
                .ok_or_else(|| Error::Numerical(format!("no subgroup of index <= {max_index} misses {}", format_free_word(&w))))?;
            big.push(sample(dm as u64));
            let dk = match rewrite_in_even_a_subgroup(&w) {
                None => 1,
                Some(u) => divisibility_bruteforce(3, &u, max_index)?.ok_or_else(|| {
                    Error::Numerical(format!("no subgroup of index <= {max_index} misses {}", format_free_word(&u)))
                })? as u64,
            };
            small.push(sample(dk));
        }
    }
    Ok((big, small))
}

/// One row of the trace table for `a b^n` with `a = [[1,2],[0,1]]`,
/// `b = [[1,0],[2,1]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    pub n: u64,
    pub word_length: u64,
    pub trace: i128,
    pub geodesic_length: f64,
    /// Geodesic length over the log of the word length.
    pub ratio: f64,
}

fn mat_mul(x: [[i128; 2]; 2], y: [[i128; 2]; 2]) -> [[i128; 2]; 2] {
    let mut out = [[0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
        }
    }
    out
}

/// Exact integer matrix of `a b^n`.
pub fn parabolic_product(n: u64) -> [[i128; 2]; 2] {
    let a = [[1, 2], [0, 1]];
    let b = [[1, 0], [2, 1]];
    let mut m = a;
    for _ in 0..n {
        m = mat_mul(m, b);
    }
    m
}

pub fn trace_table(n_max: u64) -> Result<Vec<TraceRow>> {
    if n_max == 0 {
        return Err(Error::OutOfRange("n_max must be at least 1".into()));
    }
    Ok((1..=n_max).map(trace_row).collect())
}

pub fn trace_row(n: u64) -> TraceRow {
    let m = parabolic_product(n);
    let trace = m[0][0] + m[1][1];
    let geodesic_length = 2.0 * acosh(trace as f64 / 2.0);
    let word_length = n + 1;
    TraceRow {
        n,
        word_length,
        trace,
        geodesic_length,
        ratio: geodesic_length / ln(word_length as f64),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeSample {
    pub word_length: usize,
    pub displacement: f64,
    pub translation_length: f64,
}

/// Constants relating word length and displacement on a sample of
/// loxodromic elements: `lower * |w| <= d(x, w x) <= upper * |w|`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeReport {
    pub samples: Vec<ProbeSample>,
    pub upper: f64,
    pub lower: f64,
    pub max_generator_displacement: f64,
    pub translation_below_displacement: bool,
    pub seed: u64,
}

pub fn svarc_milnor_probe(p: &Polyhedron, n_words: usize, max_len: usize, seed: u64) -> Result<ProbeReport> {
    if n_words == 0 || max_len < 2 {
        return Err(Error::OutOfRange("need at least one word of length at least 2".into()));
    }
    let x = p.reference();
    let mut rng = crate::mc::stream(seed, 0);
    let mut samples = Vec::with_capacity(n_words);
    let mut attempts = 0usize;
    while samples.len() < n_words {
        attempts += 1;
        if attempts > 1000 * n_words {
            return Err(Error::Numerical("too few loxodromic words sampled".into()));
        }
        let len = rng.random_range(2..=max_len);
        let raw: Vec<usize> = (0..len).map(|_| rng.random_range(0..p.face_count())).collect();
        let w = reduce_racg(p, &raw);
        if w.is_empty() {
            continue;
        }
        let chart = match AxisChart::new(p, &w) {
            Ok(c) => c,
            Err(Error::NotLoxodromic { .. }) => continue,
            Err(e) => return Err(e),
        };
        let g = word_to_isometry(p, &w)?;
        samples.push(ProbeSample {
            word_length: w.len(),
            displacement: x.distance(&g.apply(x)),
            translation_length: chart.translation_length,
        });
    }
    let ratio = |s: &ProbeSample| s.displacement / s.word_length as f64;
    let upper = samples.iter().map(ratio).fold(0.0, f64::max);
    let lower = samples.iter().map(ratio).fold(f64::INFINITY, f64::min);
    let max_generator_displacement = (0..p.face_count())
        .map(|i| x.distance(&p.reflection(i).apply(x)))
        .fold(0.0, f64::max);
    let translation_below_displacement = samples
        .iter()
        .all(|s| s.translation_length <= s.displacement + 1e-9 * s.displacement.max(1.0));
    Ok(ProbeReport {
        samples,
        upper,
        lower,
        max_generator_displacement,
        translation_below_displacement,
        seed,
    })
}

/// Certificate indices of `alpha^n` for `n = 1..=n_max`, as upper bounds on
/// the divisibility in the reflection group, with the bound line
/// `index_bound` evaluated at each translation length.
pub fn certificate_curve(
    p: &Polyhedron,
    alpha_word: &[usize],
    n_max: usize,
    cfg: &SeparatorConfig,
) -> Result<Vec<(GrowthSample, f64)>> {
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let word: Vec<usize> = alpha_word.iter().copied().cycle().take(alpha_word.len() * n).collect();
        let cert = build_certificate(p, &word, cfg)?;
        let v = p.volume() - 3.0 * p.volume_std_error();
        let line = index_bound(&BoundInputs::new(p.dim(), p.diameter(), v, cert.translation_length)?)?;
        let reduced = reduce_racg(p, &word);
        let core = AxisChart::new(p, &word)?.core_word;
        out.push((
            GrowthSample {
                word: reduced.iter().map(|i| format!("{i}")).collect::<Vec<_>>().join(" "),
                word_length: reduced.len(),
                cyc_reduced_length: core.len(),
                geodesic_length: cert.translation_length,
                d: DValue::UpperBound(cert.index as u64),
                source: Source::Certificate,
            },
            line,
        ));
    }
    Ok(out)
}
