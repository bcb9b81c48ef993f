//! Human-readable traces of the core constructions.

use std::fmt::Write as _;

use dilation_core::continuous::{
    left_dilation_apply, shift_index, ElementarySection, KVector, SectionRecord, ShiftIndex,
};
use dilation_core::grid::RationalString;
use dilation_core::product::{ExponentialSystem, FiberVector, ProductSystem};
use dilation_core::step::{StepFunction, StepFunctionRecord};
use dilation_core::{Grid, GridRational, Result, C64};
use serde::Deserialize;

#[derive(Clone, Debug, Deserialize)]
pub struct DescribeInput {
    #[serde(default)]
    pub grid_denominator: Option<i64>,
    #[serde(default = "one")]
    pub multiplicity: usize,
    #[serde(flatten)]
    pub element: Element,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Element {
    StepFunction { f: StepFunctionRecord },
    FiberVector { t: RationalString, x: FiberInput },
    Kvector { k: KInput },
    ShiftIndex { alpha: RationalString, t: RationalString },
    LeftDilation { t: RationalString, k: KInput, x: FiberInput },
    RightDilation { t: RationalString, x: FiberInput, l: KInput },
    Associativity { s: RationalString, t: RationalString, k: KInput, x: FiberInput, y: FiberInput },
}

/// `"vacuum"` or a list of sections.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum KInput {
    Named(String),
    Sections(Vec<SectionRecord>),
}

/// `"vacuum"` (the unit `e(0)`) or a list of `{c, f}` terms.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum FiberInput {
    Named(String),
    Terms(Vec<TermInput>),
}

#[derive(Clone, Debug, Deserialize)]
pub struct TermInput {
    #[serde(default = "unit_coefficient")]
    pub c: [f64; 2],
    pub f: StepFunctionRecord,
}

fn unit_coefficient() -> [f64; 2] {
    [1.0, 0.0]
}

struct Session {
    grid: Grid,
    model: ExponentialSystem,
}

impl Session {
    fn time(&self, s: &RationalString) -> Result<GridRational> {
        s.resolve(self.grid)
    }

    fn kvector(&self, k: &KInput) -> Result<KVector> {
        match k {
            KInput::Named(n) if n == "vacuum" => Ok(KVector::vacuum(self.grid, self.model.multiplicity())),
            KInput::Named(n) => Err(dilation_core::DilationError::Parse(format!("unknown K vector {n:?}"))),
            KInput::Sections(s) => KVector::from_records(s, self.grid, self.model.multiplicity()),
        }
    }

    fn fiber(&self, t: GridRational, x: &FiberInput) -> Result<FiberVector> {
        match x {
            FiberInput::Named(n) if n == "vacuum" => self.model.vacuum_unit(t),
            FiberInput::Named(n) => Err(dilation_core::DilationError::Parse(format!("unknown fiber vector {n:?}"))),
            FiberInput::Terms(terms) => {
                let terms = terms
                    .iter()
                    .map(|term| {
                        Ok((C64::new(term.c[0], term.c[1]), term.f.resolve(self.grid, self.model.multiplicity())?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                self.model.combination(t, terms)
            }
        }
    }
}

pub fn describe(input: &DescribeInput) -> Result<String> {
    let grid = Grid::new(input.grid_denominator.unwrap_or(dilation_core::grid::DEFAULT_DENOMINATOR))?;
    let sess = Session { grid, model: ExponentialSystem::new(input.multiplicity, grid)? };
    let mut out = String::new();
    match &input.element {
        Element::StepFunction { f } => out.push_str(&step(&f.resolve(grid, input.multiplicity)?)),
        Element::FiberVector { t, x } => out.push_str(&fiber(&sess.fiber(sess.time(t)?, x)?)),
        Element::Kvector { k } => out.push_str(&kvector(&sess.kvector(k)?)),
        Element::ShiftIndex { alpha, t } => {
            let (alpha, t) = (sess.time(alpha)?, sess.time(t)?);
            let (n, beta) = shift_index(alpha, t)?;
            let _ = write!(out, "alpha = {alpha}, t = {t}: alpha + t = {} lands on {beta} with n = {n}", alpha + t);
        }
        Element::LeftDilation { t, k, x } => {
            let t = sess.time(t)?;
            let (k, x) = (sess.kvector(k)?, sess.fiber(t, x)?);
            let _ = writeln!(out, "left dilation v_t(k ⊗ x)");
            let _ = writeln!(out, "k: {}", indent(&kvector(&k)));
            let _ = writeln!(out, "x: {}", fiber(&x));
            left_trace(&mut out, &sess.model, t, &k, &x, "")?;
        }
        Element::RightDilation { t, x, l } => {
            let t = sess.time(t)?;
            let (l, x) = (sess.kvector(l)?, sess.fiber(t, x)?);
            let _ = writeln!(out, "right dilation w_t(x ⊗ l) = v_t(l ⊗ x reversed)");
            let _ = writeln!(out, "x: {}", fiber(&x));
            let _ = writeln!(out, "l: {}", indent(&kvector(&l)));
            let _ = writeln!(out, "x reversed: {}", fiber(&x.reversed()));
            left_trace(&mut out, &sess.model, t, &l, &x.reversed(), "")?;
        }
        Element::Associativity { s, t, k, x, y } => {
            let (s, t) = (sess.time(s)?, sess.time(t)?);
            let k = sess.kvector(k)?;
            let (x, y) = (sess.fiber(s, x)?, sess.fiber(t, y)?);
            let m = &sess.model;
            let _ = writeln!(out, "associativity check with s = {s}, t = {t}");
            let _ = writeln!(out, "k: {}", indent(&kvector(&k)));
            let _ = writeln!(out, "x: {}", fiber(&x));
            let _ = writeln!(out, "y: {}", fiber(&y));
            let _ = writeln!(out, "route 1 (iterated): v_t(v_s(k ⊗ x) ⊗ y)");
            let inner = left_trace(&mut out, m, s, &k, &x, "  ")?;
            let lhs = left_trace(&mut out, m, t, &inner, &y, "  ")?;
            let _ = writeln!(out, "route 2 (joined): v_(s+t)(k ⊗ u_(s,t)(x ⊗ y))");
            let xy = m.u_concat(&x, &y)?;
            let _ = writeln!(out, "  u_(s,t)(x ⊗ y) concatenates generators: {}", fiber(&xy));
            let rhs = left_trace(&mut out, m, s + t, &k, &xy, "  ")?;
            let _ = write!(out, "‖route 1 − route 2‖ = {:.3e}", lhs.distance(&rhs)?);
        }
    }
    Ok(out.trim_end().to_string())
}

fn indent(s: &str) -> String {
    s.replace('\n', "\n  ")
}

fn decimal(g: GridRational) -> String {
    if g.is_integer() {
        g.to_string()
    } else {
        format!("{} ({})", g, g.to_f64())
    }
}

fn complex(z: C64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

fn vector(v: &[C64]) -> String {
    if v.len() == 1 {
        complex(v[0])
    } else {
        format!("[{}]", v.iter().map(|z| complex(*z)).collect::<Vec<_>>().join(", "))
    }
}

pub fn step(f: &StepFunction) -> String {
    if f.is_empty_domain() {
        return "0".to_string();
    }
    if f.is_zero() {
        return format!("0 on ({},{}]", f.lo(), f.hi());
    }
    let b = f.breakpoints();
    let pieces: Vec<String> =
        (0..f.piece_count()).map(|i| format!("({},{}] ↦ {}", b[i], b[i + 1], vector(f.piece_value(i)))).collect();
    pieces.join("; ")
}

pub fn fiber(x: &FiberVector) -> String {
    if x.is_zero() {
        return format!("0 in E_{}", x.fiber());
    }
    let terms: Vec<String> = x
        .terms()
        .iter()
        .map(|(c, f)| {
            let e = if f.is_zero() { "e(0)".to_string() } else { format!("e({})", step(f)) };
            if *c == C64::new(1.0, 0.0) {
                e
            } else {
                format!("({})·{e}", complex(*c))
            }
        })
        .collect();
    format!("{} in E_{}", terms.join(" + "), x.fiber())
}

fn section(s: &ElementarySection) -> String {
    let (lo, hi) = s.interval();
    let mut out = format!("interval ({lo},{hi}], depth {}, ", s.depth());
    if s.is_vacuum_like() {
        out.push_str("vacuum");
    } else {
        let _ = write!(out, "F_abs {}, F_rel {}", step(s.abs_profile()), step(s.rel_profile()));
    }
    if s.kappa() != C64::new(1.0, 0.0) {
        let _ = write!(out, ", kappa {}", complex(s.kappa()));
    }
    out
}

pub fn kvector(k: &KVector) -> String {
    match k.sections() {
        [] => "0 sections".to_string(),
        [s] => format!("1 section, {}", section(s)),
        all => {
            let mut out = format!("{} sections", all.len());
            for (i, s) in all.iter().enumerate() {
                let _ = write!(out, "\n[{i}] {}", section(s));
            }
            out
        }
    }
}

/// Appends the trace of `v_t(k ⊗ x)` and returns the result.
fn left_trace(
    out: &mut String,
    m: &ExponentialSystem,
    t: GridRational,
    k: &KVector,
    x: &FiberVector,
    pad: &str,
) -> Result<KVector> {
    let sh = ShiftIndex::new(t)?;
    let g = t.grid();
    let wrap = sh.wrap_point();
    let _ = writeln!(out, "{pad}v_{t}: t = {} + {}, split at 1−r = {}", sh.n, decimal(sh.r), decimal(wrap));
    for (i, s) in k.sections().iter().enumerate() {
        let (lo, hi) = s.interval();
        let _ = writeln!(out, "{pad}  section [{i}] on ({lo},{hi}]:");
        if lo < wrap {
            let end = hi.min(wrap);
            let _ =
                writeln!(out, "{pad}    alpha in ({lo},{end}]: n = {}, lands on ({},{}]", sh.n, lo + sh.r, end + sh.r);
        }
        if hi > wrap {
            let start = lo.max(wrap);
            let _ = writeln!(
                out,
                "{pad}    alpha in ({start},{hi}]: n = {}, lands on ({},{}]",
                sh.n + 1,
                start + sh.r - g.one(),
                hi + sh.r - g.one()
            );
        }
        let _ = writeln!(
            out,
            "{pad}    F_abs shifted left by n, depth {} → {}, F_rel extended by each generator on ({},0]",
            s.depth(),
            s.depth() + t,
            -t
        );
    }
    let result = left_dilation_apply(m, t, k, x)?;
    let _ = writeln!(out, "{pad}  result: {}", kvector(&result).replace('\n', &format!("\n{pad}    ")));
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(json: &str) -> String {
        describe(&serde_json::from_str(json).unwrap()).unwrap()
    }

    #[test]
    fn vacuum_kvector() {
        assert_eq!(run(r#"{"kind": "kvector", "k": "vacuum"}"#), "1 section, interval (0,1], depth 0, vacuum");
    }

    #[test]
    fn half_step_split() {
        let text = run(r#"{"kind": "left_dilation", "t": "1/2", "k": "vacuum", "x": "vacuum"}"#);
        assert!(text.contains("split at 1−r = 1/2 (0.5)"), "{text}");
        assert!(text.contains("lands on (1/2,1]") && text.contains("lands on (0,1/2]"), "{text}");
    }

    #[test]
    fn associativity_names_both_routes() {
        let text =
            run(r#"{"kind": "associativity", "s": "1/3", "t": "5/4", "k": "vacuum", "x": "vacuum", "y": "vacuum"}"#);
        assert!(text.contains("route 1 (iterated)") && text.contains("route 2 (joined)"), "{text}");
        assert!(text.contains("‖route 1 − route 2‖ = 0.000e0"), "{text}");
    }

    #[test]
    fn shift_index_line() {
        let text = run(r#"{"kind": "shift_index", "alpha": "3/4", "t": "1/2"}"#);
        assert_eq!(text, "alpha = 3/4, t = 1/2: alpha + t = 5/4 lands on 1/4 with n = 1");
    }

    #[test]
    fn step_and_fiber() {
        let text = run(
            r#"{"kind": "fiber_vector", "t": "1", "x": [{"c": [2, 0], "f": {"lo": "0", "hi": "1", "breakpoints": ["1/2"], "values": [[[1, 0]], [[0, 1]]]}}]}"#,
        );
        assert_eq!(text, "(2)·e((0,1/2] ↦ 1; (1/2,1] ↦ 0+1i) in E_1");
    }
}
